//! Dense complex linear-algebra helpers built on `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{MetroqError, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn sigma_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Hadamard matrix; its rows are `<+|` and `<-|`.
pub fn hadamard() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[cr(s), cr(s), cr(s), cr(-s)])
}

/// Outer product `|a><b|`.
pub fn outer(a: &CVec, b: &CVec) -> CMat {
    a * b.adjoint()
}

/// Projector `|a><a|`.
pub fn projector(a: &CVec) -> CMat {
    outer(a, a)
}

/// Computational basis vector `|k>` in dimension `n`.
pub fn basis(n: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[k] = ONE;
    v
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of vectors.
pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

pub fn is_unitary(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_abs_diff(&(m.adjoint() * m), &identity(m.nrows())) <= tol
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Real part of `Tr(a b)`, computed without forming the product.
pub fn tr_prod_re(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..a.ncols() {
            s += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    s
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
/// Columns of the returned matrix are the eigenvectors.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitian_part(m);
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Eigen-decomposition of a real symmetric matrix with ascending eigenvalues.
pub fn eigh_real(m: &RMat) -> (Vec<f64>, RMat) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = RMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Applies a scalar function to a Hermitian matrix through its spectrum.
pub fn herm_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let fv = f(v);
        scaled.column_mut(k).scale_mut(fv);
    }
    scaled * vecs.adjoint()
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// `[-clamp, 0)` are set to zero; anything more negative is an error.
pub fn sqrt_psd(m: &CMat, clamp: f64) -> Result<CMat> {
    let (vals, vecs) = eigh(m);
    if let Some(&min) = vals.first() {
        if min < -clamp {
            return Err(MetroqError::NotPsd { min_eig: min });
        }
    }
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        scaled.column_mut(k).scale_mut(v.max(0.0).sqrt());
    }
    Ok(scaled * vecs.adjoint())
}

/// `exp(i t h)` for Hermitian `h`.
pub fn expm_i_herm(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let ph = C64::from_polar(1.0, t * v);
        for r in 0..scaled.nrows() {
            scaled[(r, k)] *= ph;
        }
    }
    scaled * vecs.adjoint()
}

/// Operator norm of a Hermitian matrix (largest absolute eigenvalue).
pub fn herm_op_norm(m: &CMat) -> f64 {
    let v = eigvalsh(m);
    v.first()
        .map(|a| a.abs())
        .unwrap_or(0.0)
        .max(v.last().map(|a| a.abs()).unwrap_or(0.0))
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max(m: &CMat) -> f64 {
    *eigvalsh(m).last().unwrap_or(&0.0)
}

/// Unitary factor of the polar decomposition `m = U |m|`.
pub fn polar_unitary(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    u * vt
}

/// Orthonormal (Hilbert-Schmidt) basis of the n x n Hermitian matrices:
/// diagonal units first, then symmetric and antisymmetric off-diagonal pairs.
pub fn hermitian_basis(n: usize) -> Vec<CMat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut e = CMat::zeros(n, n);
        e[(i, i)] = ONE;
        out.push(e);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut e = CMat::zeros(n, n);
            e[(i, j)] = cr(s);
            e[(j, i)] = cr(s);
            out.push(e);
            let mut e = CMat::zeros(n, n);
            e[(i, j)] = c(0.0, -s);
            e[(j, i)] = c(0.0, s);
            out.push(e);
        }
    }
    out
}

/// Assembles `sum_k t_k basis_k`.
pub fn hermitian_from_coords(basis: &[CMat], t: &[f64]) -> CMat {
    let n = basis[0].nrows();
    let mut m = CMat::zeros(n, n);
    for (b, &tk) in basis.iter().zip(t) {
        m += b.scale(tk);
    }
    m
}

/// Real coordinates of a Hermitian matrix: diagonal, then real and imaginary
/// parts of the strict upper triangle (length n^2).
pub fn herm_to_real(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        v.push(m[(i, i)].re);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            v.push(m[(i, j)].re);
            v.push(m[(i, j)].im);
        }
    }
    v
}

/// Real and imaginary parts of every entry of a complex matrix, row-major.
pub fn complex_to_real(m: &CMat) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)].re);
            v.push(m[(i, j)].im);
        }
    }
    v
}

/// Thin singular value decomposition with singular values sorted in
/// descending order. Wide matrices are zero-padded to square so that the
/// full set of right singular vectors (and hence the null space) is available.
pub struct RealSvd {
    pub s: Vec<f64>,
    /// Right singular vectors as columns (n x n).
    pub v: RMat,
    /// Left singular vectors as columns (rows x min(rows, n) after padding).
    pub u: RMat,
}

pub fn real_svd(a: &RMat) -> RealSvd {
    let (m, n) = a.shape();
    let padded = if m < n {
        let mut p = RMat::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(true, true);
    let s = svd.singular_values;
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let k = s.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| s[y].total_cmp(&s[x]));
    let mut vs = RMat::zeros(n, k);
    let mut us = RMat::zeros(u.nrows(), k);
    for (dst, &src) in order.iter().enumerate() {
        vs.set_column(dst, &vt.row(src).transpose());
        us.set_column(dst, &u.column(src));
    }
    RealSvd {
        s: order.iter().map(|&k| s[k]).collect(),
        v: vs,
        u: us,
    }
}

/// Minimum-norm least-squares solution of `a x = b` and an orthonormal basis
/// (columns) of the null space of `a`, using relative threshold `rtol`.
///
/// Wide systems are decomposed through the SVD of `aᵀ`, which stays accurate
/// when many singular values vanish. The null space is then the eigenspace
/// of `𝟙 − V Vᵀ` with unit eigenvalue.
pub fn lstsq_with_null(a: &RMat, b: &RVec, rtol: f64) -> (RVec, RMat) {
    let (m, n) = a.shape();
    if m >= n {
        let svd = real_svd(a);
        let smax = svd.s.first().copied().unwrap_or(0.0);
        let rank = svd.s.iter().filter(|&&s| s > rtol * smax && s > 0.0).count();
        let mut x = RVec::zeros(n);
        for k in 0..rank {
            let coef = svd.u.column(k).dot(b) / svd.s[k];
            x += svd.v.column(k) * coef;
        }
        let null = if rank < n { svd.v.columns(rank, n - rank).into_owned() } else { RMat::zeros(n, 0) };
        return (x, null);
    }
    // aᵀ = U S Vᵀ, so a = V S Uᵀ: right singular vectors of a are U.
    let t = real_svd(&a.transpose());
    let smax = t.s.first().copied().unwrap_or(0.0);
    let rank = t.s.iter().filter(|&&s| s > rtol * smax && s > 0.0).count();
    let mut x = RVec::zeros(n);
    for k in 0..rank {
        let coef = t.v.column(k).dot(b) / t.s[k];
        x += t.u.column(k) * coef;
    }
    let range = t.u.columns(0, rank);
    let proj = RMat::identity(n, n) - &range * range.transpose();
    let (w, vecs) = eigh_real(&proj);
    let idx: Vec<usize> = (0..n).filter(|&k| w[k] > 0.5).collect();
    let mut null = RMat::zeros(n, idx.len());
    for (dst, &k) in idx.iter().enumerate() {
        null.set_column(dst, &vecs.column(k));
    }
    (x, null)
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &RMat, b: &RVec, rtol: f64) -> RVec {
    lstsq_with_null(a, b, rtol).0
}

/// Haar-random unitary via QR of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q.clone();
    for k in 0..n {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            out[(i, k)] = q[(i, k)] * ph;
        }
    }
    out
}

/// Haar-random normalised state vector.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(n, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let nrm = v.norm();
    v / cr(nrm)
}

/// Random full-rank density matrix `G G^dagger / Tr`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let rho = &g * g.adjoint();
    let t = rho.trace().re;
    rho.unscale(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..6 {
            let g = CMat::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let h = hermitian_part(&g);
            let (vals, vecs) = eigh(&h);
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            let rec = &vecs * CMat::from_diagonal(&CVec::from_iterator(n, vals.iter().map(|&v| cr(v)))) * vecs.adjoint();
            assert!(max_abs_diff(&rec, &h) < 1e-12);
        }
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(4, &mut rng);
        let s = sqrt_psd(&rho, 1e-10).unwrap();
        assert!(max_abs_diff(&(&s * &s), &rho) < 1e-12);
    }

    #[test]
    fn sqrt_psd_rejects_negative() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![cr(1.0), cr(-1e-3)]));
        assert!(matches!(sqrt_psd(&m, 1e-10), Err(MetroqError::NotPsd { .. })));
    }

    #[test]
    fn sqrt_psd_clamps_roundoff() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![cr(1.0), cr(-1e-12)]));
        let s = sqrt_psd(&m, 1e-10).unwrap();
        assert_eq!(s[(1, 1)], ZERO);
    }

    #[test]
    fn expm_matches_pauli_rotation() {
        let t = 0.37;
        let u = expm_i_herm(&sigma_z(), t);
        assert!((u[(0, 0)] - C64::from_polar(1.0, t)).norm() < 1e-14);
        assert!((u[(1, 1)] - C64::from_polar(1.0, -t)).norm() < 1e-14);
        assert!(is_unitary(&expm_i_herm(&sigma_x(), 1.3), 1e-12));
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let ip = (x.adjoint() * y).trace();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - cr(expect)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let a = RMat::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let b = RVec::from_vec(vec![2.0]);
        let (x, null) = lstsq_with_null(&a, &b, 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert_eq!(null.ncols(), 2);
        assert!((&a * &null).norm() < 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(is_unitary(&random_unitary(5, &mut rng), 1e-12));
    }

    #[test]
    fn polar_unitary_of_scaled_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_unitary(3, &mut rng);
        let p = polar_unitary(&u.scale(2.5));
        assert!(max_abs_diff(&p, &u) < 1e-12);
    }
}
