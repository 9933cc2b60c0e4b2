//! Classical and quantum Fisher information, the imperfect-measurement
//! coefficient γ and the moment hierarchy of lower bounds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{MetroqError, Result};
use crate::linalg::{self, CMat, CVec, RMat, RVec};
use crate::optim;
use crate::qcore::{self, Povm, StateVector, DetectionChannel};
use crate::tol::Tolerances;

/// How a Fisher-information value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiMethod {
    ClosedForm,
    Summation,
    Optimizer,
    Seesaw,
    MomentBound,
}

/// Fisher-information value with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FiReport {
    pub value: f64,
    pub method: FiMethod,
    /// `(iterate, objective)` pairs; objectives are nondecreasing.
    pub optimizer_trace: Option<Vec<(usize, f64)>>,
    pub tolerance: f64,
    pub converged: bool,
    /// Human-readable diagnostic, for example a singular moment matrix.
    pub note: Option<String>,
}

impl FiReport {
    pub fn closed_form(value: f64) -> Self {
        Self {
            value,
            method: FiMethod::ClosedForm,
            optimizer_trace: None,
            tolerance: 0.0,
            converged: true,
            note: None,
        }
    }
}

/// Pair of orthonormal pure states.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoPair {
    xi: StateVector,
    xi_perp: StateVector,
}

impl OrthoPair {
    pub fn new(xi: StateVector, xi_perp: StateVector) -> Result<Self> {
        if xi.dim() != xi_perp.dim() {
            return Err(MetroqError::DimensionMismatch("pair states differ in dimension".into()));
        }
        let ov = xi.inner(&xi_perp).norm();
        if ov > 1e-10 {
            return Err(MetroqError::InvalidState(format!("pair overlap {ov:e} is not zero")));
        }
        Ok(Self { xi, xi_perp })
    }

    pub fn xi(&self) -> &StateVector {
        &self.xi
    }

    pub fn xi_perp(&self) -> &StateVector {
        &self.xi_perp
    }
}

/// Classical Fisher information `Σ ṗ²/p`.
pub fn classical_fi(probs: &[f64], dprobs: &[f64]) -> Result<f64> {
    classical_fi_with_tol(probs, dprobs, &Tolerances::DEFAULT)
}

pub fn classical_fi_with_tol(probs: &[f64], dprobs: &[f64], tol: &Tolerances) -> Result<f64> {
    if probs.len() != dprobs.len() {
        return Err(MetroqError::DimensionMismatch("probabilities and derivatives differ in length".into()));
    }
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|p| !p.is_finite() || *p < -tol.zero_prob) || (total - 1.0).abs() > 1e-8 {
        return Err(MetroqError::InvalidParameter(format!("not a probability vector (sum {total})")));
    }
    let dsum: f64 = dprobs.iter().sum();
    if dsum.abs() > tol.dprob_sum {
        return Err(MetroqError::InvalidParameter(format!("derivatives sum to {dsum:e}, not zero")));
    }
    let mut f = 0.0;
    for (x, (&p, &dp)) in probs.iter().zip(dprobs).enumerate() {
        if p < tol.zero_prob {
            if dp * dp < tol.zero_prob {
                continue;
            }
            return Err(MetroqError::SupportMismatch { index: x });
        }
        f += dp * dp / p;
    }
    Ok(f)
}

/// Pure-state QFI `4(⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²)`.
pub fn qfi_pure(psi: &StateVector, dpsi: &CVec) -> Result<f64> {
    if dpsi.len() != psi.dim() {
        return Err(MetroqError::DimensionMismatch("state derivative".into()));
    }
    let a = psi.amplitudes();
    Ok((4.0 * (dpsi.norm_squared() - a.dotc(dpsi).norm_sqr())).max(0.0))
}

/// SLD quantum Fisher information and the SLD operator restricted to the
/// support of `ρ`.
pub fn qfi_sld(rho: &qcore::DensityMatrix, drho: &CMat) -> Result<(f64, CMat)> {
    let d = rho.dim();
    if drho.shape() != (d, d) {
        return Err(MetroqError::DimensionMismatch("state derivative".into()));
    }
    if !linalg::is_hermitian(drho, 1e-10) {
        return Err(MetroqError::NotHermitian("state derivative".into()));
    }
    if drho.trace().norm() > 1e-8 {
        return Err(MetroqError::InvalidParameter("state derivative is not traceless".into()));
    }
    let eps = Tolerances::DEFAULT.support;
    let (lam, u) = linalg::eigh(rho.matrix());
    let de = u.adjoint() * drho * &u;
    let mut l = CMat::zeros(d, d);
    let mut f = 0.0;
    for j in 0..d {
        for k in 0..d {
            let s = lam[j].max(0.0) + lam[k].max(0.0);
            if s > eps {
                l[(j, k)] = de[(j, k)].scale(2.0 / s);
                f += 2.0 * de[(j, k)].norm_sqr() / s;
            }
        }
    }
    Ok((f, &u * l * u.adjoint()))
}

/// Channel QFI of a unitary encoding, `(λ_max(h) − λ_min(h))²`.
pub fn channel_qfi_unitary(enc: &qcore::UnitaryEncoding) -> f64 {
    let ev = linalg::eigvalsh(enc.generator());
    (ev[ev.len() - 1] - ev[0]).powi(2)
}

/// Distribution `Tr{V ψ V† M_x}` and its derivative for a pure state.
pub fn imperfect_distribution(psi: &StateVector, dpsi: &CVec, m: &Povm, v: &CMat) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = psi.dim();
    if m.dim() != d || dpsi.len() != d {
        return Err(MetroqError::DimensionMismatch("state and POVM dimensions differ".into()));
    }
    qcore::check_unitary(v, d)?;
    let a = v * psi.amplitudes();
    let da = v * dpsi;
    let mut p = Vec::with_capacity(m.num_outcomes());
    let mut dp = Vec::with_capacity(m.num_outcomes());
    for e in m.elements() {
        let ea = e * &a;
        p.push(a.dotc(&ea).re.max(0.0));
        dp.push(2.0 * da.dotc(&ea).re);
    }
    Ok((p, dp))
}

/// Classical FI of the noisy outcome distribution for one control unitary.
pub fn imperfect_fi(psi: &StateVector, dpsi: &CVec, m: &Povm, v: &CMat) -> Result<f64> {
    let (p, dp) = imperfect_distribution(psi, dpsi, m, v)?;
    classical_fi(&p, &dp)
}

/// Settings for the γ multi-start search.
#[derive(Debug, Clone)]
pub struct GammaConfig {
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_iters: u64,
    /// Extra starting points tried before the random restarts.
    pub seed_states: Vec<CVec>,
}

impl Default for GammaConfig {
    fn default() -> Self {
        Self { restarts: 32, tol: 1e-9, seed: 0x6a6d, max_iters: 4000, seed_states: Vec::new() }
    }
}

/// The γ objective for an explicit pair.
pub fn gamma_pair_objective(m: &Povm, xi: &CVec, xi_perp: &CVec) -> f64 {
    let eps = Tolerances::DEFAULT.zero_prob;
    m.elements()
        .iter()
        .map(|e| {
            let w = xi.dotc(&(e * xi)).re;
            let num = xi_perp.dotc(&(e * xi)).re.powi(2);
            if w < eps {
                0.0
            } else {
                num / w
            }
        })
        .sum()
}

/// For fixed `ξ`, the optimal `ξ⊥` solves a real quadratic maximisation over
/// the orthogonal complement; returns the value and the maximiser.
fn best_partner(m: &Povm, xi: &CVec) -> (f64, CVec) {
    let d = xi.len();
    let eps = Tolerances::DEFAULT.zero_prob;
    let n = 2 * d;
    let mut q = RMat::zeros(n, n);
    for e in m.elements() {
        let v = e * xi;
        let w = xi.dotc(&v).re;
        if w < eps {
            continue;
        }
        let u = RVec::from_iterator(n, v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)));
        q += (&u * u.transpose()) / w;
    }
    let e1 = RVec::from_iterator(n, xi.iter().map(|z| z.re).chain(xi.iter().map(|z| z.im)));
    let e2 = RVec::from_iterator(n, xi.iter().map(|z| -z.im).chain(xi.iter().map(|z| z.re)));
    let proj = RMat::identity(n, n) - &e1 * e1.transpose() - &e2 * e2.transpose();
    let pq = &proj * q * &proj;
    let pq = (&pq + pq.transpose()) * 0.5;
    let (vals, vecs) = linalg::eigh_real(&pq);
    let r = vecs.column(n - 1);
    let mut perp = CVec::from_iterator(d, (0..d).map(|k| linalg::c(r[k], r[d + k])));
    // Remove residual overlap introduced by eigen-solver rounding.
    let ov = xi.dotc(&perp);
    perp -= xi * ov;
    let nn = perp.norm();
    if nn > 0.0 {
        perp.unscale_mut(nn);
    }
    (vals[n - 1].max(0.0), perp)
}

fn to_state(x: &[f64]) -> Option<CVec> {
    let d = x.len() / 2;
    let v = CVec::from_iterator(d, (0..d).map(|k| linalg::c(x[k], x[d + k])));
    let n = v.norm();
    (n > 1e-300 && n.is_finite()).then(|| v.unscale(n))
}

fn to_real(v: &CVec) -> Vec<f64> {
    v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect()
}

/// Starting states for commuting POVMs: balanced superpositions of pairs of
/// common eigenvectors.
fn commuting_seeds(m: &Povm) -> Vec<CVec> {
    if !m.is_commuting(1e-10) {
        return Vec::new();
    }
    let d = m.dim();
    let mut h = CMat::zeros(d, d);
    for (x, e) in m.elements().iter().enumerate() {
        h += e.scale(1.0 + 0.6180339887498949 * (x as f64 + 1.0).sqrt());
    }
    let (_, u) = linalg::eigh(&h);
    let mut seeds = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            let s = (u.column(i) + u.column(j)).unscale(std::f64::consts::SQRT_2);
            seeds.push(s);
        }
    }
    seeds
}

/// Maximal γ over orthonormal pairs, with the maximising pair.
pub fn gamma_coefficient(m: &Povm, cfg: &GammaConfig) -> Result<(FiReport, OrthoPair)> {
    let d = m.dim();
    if d < 2 {
        return Err(MetroqError::InvalidParameter("γ needs dimension at least 2".into()));
    }
    for s in &cfg.seed_states {
        if s.len() != d {
            return Err(MetroqError::DimensionMismatch("seed state dimension".into()));
        }
    }
    let cost = |x: &[f64]| match to_state(x) {
        Some(xi) => -best_partner(m, &xi).0,
        None => 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts: Vec<CVec> = cfg.seed_states.clone();
    starts.extend(commuting_seeds(m));
    for _ in 0..cfg.restarts {
        starts.push(linalg::random_state(d, &mut rng));
    }
    let mut best_val = f64::NEG_INFINITY;
    let mut best_x = to_real(&starts[0]);
    let mut trace = Vec::with_capacity(starts.len());
    let mut finals = Vec::with_capacity(starts.len());
    for (k, s) in starts.iter().enumerate() {
        let x0 = to_real(s);
        let r = optim::nelder_mead(&cost, &x0, 0.3, cfg.max_iters, cfg.tol * 1e-3);
        let r = optim::nelder_mead(&cost, &r.x, 0.02, cfg.max_iters, cfg.tol * 1e-3);
        let val = -r.f;
        finals.push(val);
        if val > best_val {
            best_val = val;
            best_x = r.x;
        }
        trace.push((k, best_val));
    }
    let xi = to_state(&best_x).expect("optimizer iterate is nonzero");
    let (val, perp) = best_partner(m, &xi);
    let agreeing = finals.iter().filter(|v| (best_val - **v).abs() <= 1e-6).count();
    let pair = OrthoPair::new(StateVector::normalized(xi)?, StateVector::normalized(perp)?)?;
    let report = FiReport {
        value: val.clamp(0.0, 1.0 + 1e-9),
        method: FiMethod::Optimizer,
        optimizer_trace: Some(trace),
        tolerance: cfg.tol,
        converged: agreeing >= 2 || !cfg.seed_states.is_empty(),
        note: None,
    };
    Ok((report, pair))
}

/// Settings for [`gamma_classical`].
#[derive(Debug, Clone)]
pub struct ClassicalGammaConfig {
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_iters: u64,
    pub seed_vectors: Vec<RVec>,
}

impl Default for ClassicalGammaConfig {
    fn default() -> Self {
        Self { restarts: 32, tol: 1e-9, seed: 0x6a6e, max_iters: 4000, seed_vectors: Vec::new() }
    }
}

/// Optimum of the classical γ together with the maximising real pair.
#[derive(Debug, Clone)]
pub struct ClassicalGamma {
    pub report: FiReport,
    pub a: RVec,
    pub b: RVec,
}

fn classical_partner(p: &RMat, a: &RVec) -> (f64, RVec) {
    let d = a.len();
    let eps = Tolerances::DEFAULT.zero_prob;
    let mut q = RMat::zeros(d, d);
    for x in 0..p.nrows() {
        let row = p.row(x).transpose();
        let w: f64 = row.iter().zip(a.iter()).map(|(pi, ai)| pi * ai * ai).sum();
        if w < eps {
            continue;
        }
        let u = row.component_mul(a);
        q += (&u * u.transpose()) / w;
    }
    let proj = RMat::identity(d, d) - a * a.transpose();
    let pq = &proj * q * &proj;
    let pq = (&pq + pq.transpose()) * 0.5;
    let (vals, vecs) = linalg::eigh_real(&pq);
    let mut b: RVec = vecs.column(d - 1).into_owned();
    b -= a * a.dot(&b);
    let nb = b.norm();
    if nb > 0.0 {
        b /= nb;
    }
    (vals[d - 1].max(0.0), b)
}

/// Optimal noisy classical FI of a detection channel, maximised over real
/// orthonormal pairs.
pub fn gamma_classical(p: &DetectionChannel, cfg: &ClassicalGammaConfig) -> Result<ClassicalGamma> {
    let d = p.num_inputs();
    if d < 2 {
        return Err(MetroqError::InvalidParameter("γ needs at least two inputs".into()));
    }
    let pm = p.matrix();
    let normalize = |x: &[f64]| {
        let v = RVec::from_column_slice(x);
        let n = v.norm();
        (n > 1e-300).then(|| v / n)
    };
    let cost = |x: &[f64]| match normalize(x) {
        Some(a) => -classical_partner(pm, &a).0,
        None => 0.0,
    };
    let mut starts: Vec<RVec> = cfg.seed_vectors.clone();
    for i in 0..d {
        for j in (i + 1)..d {
            let mut v = RVec::zeros(d);
            v[i] = std::f64::consts::FRAC_1_SQRT_2;
            v[j] = std::f64::consts::FRAC_1_SQRT_2;
            starts.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    use rand_distr::{Distribution, StandardNormal};
    for _ in 0..cfg.restarts {
        starts.push(RVec::from_fn(d, |_, _| StandardNormal.sample(&mut rng)));
    }
    let mut best_val = f64::NEG_INFINITY;
    let mut best_x = starts[0].as_slice().to_vec();
    let mut trace = Vec::with_capacity(starts.len());
    for (k, s) in starts.iter().enumerate() {
        if s.len() != d {
            return Err(MetroqError::DimensionMismatch("seed vector dimension".into()));
        }
        let r = optim::nelder_mead(&cost, s.as_slice(), 0.3, cfg.max_iters, cfg.tol * 1e-3);
        let r = optim::nelder_mead(&cost, &r.x, 0.02, cfg.max_iters, cfg.tol * 1e-3);
        if -r.f > best_val {
            best_val = -r.f;
            best_x = r.x;
        }
        trace.push((k, best_val));
    }
    let a = normalize(&best_x).expect("optimizer iterate is nonzero");
    let (val, b) = classical_partner(pm, &a);
    Ok(ClassicalGamma {
        report: FiReport {
            value: val.clamp(0.0, 1.0 + 1e-9),
            method: FiMethod::Optimizer,
            optimizer_trace: Some(trace),
            tolerance: cfg.tol,
            converged: true,
            note: None,
        },
        a,
        b,
    })
}

/// Result of [`perfectly_distinguishable_pair`].
#[derive(Debug, Clone, PartialEq)]
pub enum PairSearch {
    Found(OrthoPair),
    NotFound,
    /// The POVM is not commuting, so the common-eigenbasis search does not apply.
    NotDecidable,
}

/// Searches common-eigenbasis pairs of a commuting POVM for two orthogonal
/// states that no outcome confuses.
pub fn perfectly_distinguishable_pair(m: &Povm) -> PairSearch {
    if !m.is_commuting(1e-10) {
        return PairSearch::NotDecidable;
    }
    let d = m.dim();
    let mut h = CMat::zeros(d, d);
    for (x, e) in m.elements().iter().enumerate() {
        h += e.scale(1.0 + 0.6180339887498949 * (x as f64 + 1.0).sqrt());
    }
    let (_, u) = linalg::eigh(&h);
    let kills = |e: &CMat, v: &CVec| (e * v).norm() <= 1e-8;
    for i in 0..d {
        let a: CVec = u.column(i).into_owned();
        for j in (i + 1)..d {
            let b: CVec = u.column(j).into_owned();
            if m.elements().iter().all(|e| kills(e, &a) || kills(e, &b)) {
                if let (Ok(sa), Ok(sb)) = (StateVector::normalized(a.clone()), StateVector::normalized(b)) {
                    if let Ok(pair) = OrthoPair::new(sa, sb) {
                        return PairSearch::Found(pair);
                    }
                }
            }
        }
    }
    PairSearch::NotFound
}

/// Moment-hierarchy lower bound `bᵀ A⁻¹ b` built from the first `2K`
/// moments of the outcome values `w`.
pub fn moment_lower_bound(probs: &[f64], dprobs: &[f64], k: usize, w: &[f64]) -> Result<FiReport> {
    if k == 0 {
        return Err(MetroqError::InvalidParameter("K must be at least 1".into()));
    }
    if probs.len() != dprobs.len() || probs.len() != w.len() {
        return Err(MetroqError::DimensionMismatch("moment inputs differ in length".into()));
    }
    // Affine rescaling of w leaves the span of polynomials of degree ≤ K
    // unchanged but keeps the moment matrix well conditioned.
    let mean: f64 = probs.iter().zip(w).map(|(p, x)| p * x).sum();
    let var: f64 = probs.iter().zip(w).map(|(p, x)| p * (x - mean).powi(2)).sum();
    let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
    let z: Vec<f64> = w.iter().map(|x| (x - mean) / scale).collect();
    let n = k + 1;
    let mom = |j: usize, q: &[f64]| -> f64 { q.iter().zip(&z).map(|(p, x)| p * x.powi(j as i32)).sum() };
    let a = RMat::from_fn(n, n, |r, c| mom(r + c, probs));
    let b = RVec::from_fn(n, |r, _| if r == 0 { 0.0 } else { mom(r, dprobs) });
    let (vals, vecs) = linalg::eigh_real(&a);
    let vmax = vals[n - 1].max(0.0);
    let cond = if vals[0] > 0.0 { vmax / vals[0] } else { f64::INFINITY };
    let cutoff = vmax / Tolerances::DEFAULT.moment_cond;
    let coeffs = vecs.transpose() * &b;
    let value: f64 = vals
        .iter()
        .zip(coeffs.iter())
        .filter(|(l, _)| **l > cutoff)
        .map(|(l, c)| c * c / l)
        .sum();
    let singular = cond > Tolerances::DEFAULT.moment_cond;
    Ok(FiReport {
        value: value.max(0.0),
        method: FiMethod::MomentBound,
        optimizer_trace: None,
        tolerance: Tolerances::DEFAULT.moment_cond,
        converged: true,
        note: singular.then(|| format!("moment matrix is numerically singular (condition {cond:e}); pseudo-inverse used")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, hadamard, sigma_z, I};
    use crate::qcore::{povm_from_detection, ProjectiveMeasurement, UnitaryEncoding};

    fn equator(theta: f64) -> (StateVector, CVec) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = CVec::from_vec(vec![c(s, 0.0), linalg::C64::from_polar(s, theta)]);
        let dpsi = CVec::from_vec(vec![c(0.0, 0.0), linalg::C64::from_polar(s, theta) * I]);
        (StateVector::new(psi).unwrap(), dpsi)
    }

    fn bit_flip_povm(p: f64, q: f64) -> Povm {
        povm_from_detection(
            &DetectionChannel::bit_flip(p, q).unwrap(),
            &ProjectiveMeasurement::plus_minus(),
            &linalg::identity(2),
        )
        .unwrap()
    }

    fn bit_flip_gamma(p: f64, q: f64) -> f64 {
        1.0 - ((p * (1.0 - q)).sqrt() + (q * (1.0 - p)).sqrt()).powi(2)
    }

    #[test]
    fn classical_fi_examples() {
        assert!((classical_fi(&[0.5, 0.5], &[0.4, -0.4]).unwrap() - 0.64).abs() < 1e-14);
        let (q, dq) = (0.3, 0.2);
        let f = classical_fi(&[q, 1.0 - q], &[-dq, dq]).unwrap();
        assert!((f - dq * dq / (q * (1.0 - q))).abs() < 1e-14);
        assert_eq!(classical_fi(&[0.2, 0.8], &[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            classical_fi(&[0.0, 1.0], &[0.1, -0.1]),
            Err(MetroqError::SupportMismatch { index: 0 })
        ));
        assert!(classical_fi(&[0.5, 0.5], &[0.1, 0.1]).is_err());
    }

    #[test]
    fn qfi_pure_examples() {
        let (psi, dpsi) = equator(0.3);
        assert!((qfi_pure(&psi, &dpsi).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(qfi_pure(&psi, &CVec::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn qfi_pure_ghz() {
        for n in 1..=6usize {
            let dim = 1 << n;
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let mut psi = CVec::zeros(dim);
            psi[0] = c(s, 0.0);
            psi[dim - 1] = c(s, 0.0);
            // U = exp(iθ Σσ_z/2) gives the GHZ components phases ±Nθ/2.
            let mut dpsi = CVec::zeros(dim);
            dpsi[0] = c(0.0, s * n as f64 / 2.0);
            dpsi[dim - 1] = c(0.0, -s * n as f64 / 2.0);
            let f = qfi_pure(&StateVector::new(psi).unwrap(), &dpsi).unwrap();
            assert!((f - (n * n) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn qfi_sld_examples() {
        let (psi, dpsi) = equator(0.0);
        let rho = psi.density();
        let drho = linalg::outer(&dpsi, psi.amplitudes()) + linalg::outer(psi.amplitudes(), &dpsi);
        let (f, l) = qfi_sld(&rho, &drho).unwrap();
        assert!((f - qfi_pure(&psi, &dpsi).unwrap()).abs() < 1e-8);
        let recon = (&l * rho.matrix() + rho.matrix() * &l).scale(0.5);
        assert!(linalg::max_abs_diff(&recon, &drho) < 1e-10);

        let r = 0.8;
        let rho = qcore::DensityMatrix::new((linalg::identity(2) + linalg::sigma_x().scale(r)).scale(0.5)).unwrap();
        let drho = linalg::sigma_y().scale(r / 2.0);
        let (f, _) = qfi_sld(&rho, &drho).unwrap();
        assert!((f - 0.64).abs() < 1e-12);

        let (f, _) = qfi_sld(&qcore::DensityMatrix::maximally_mixed(2), &CMat::zeros(2, 2)).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn channel_qfi_examples() {
        assert!((channel_qfi_unitary(&UnitaryEncoding::qubit_phase()) - 1.0).abs() < 1e-14);
        assert_eq!(channel_qfi_unitary(&UnitaryEncoding::new(linalg::identity(3), 0.0).unwrap()), 0.0);
        let n = 4usize;
        let jz = CMat::from_diagonal(&CVec::from_fn(n + 1, |k, _| c(n as f64 / 2.0 - k as f64, 0.0)));
        let f = channel_qfi_unitary(&UnitaryEncoding::new(jz, 0.0).unwrap());
        assert!((f - 16.0).abs() < 1e-12);
    }

    #[test]
    fn imperfect_fi_examples() {
        let (psi, dpsi) = equator(0.0);
        let perfect = Povm::from(&ProjectiveMeasurement::plus_minus());
        // V rotating the equator state to the y axis puts the basis ⊥-aligned.
        let v = linalg::expm_i_herm(&sigma_z(), std::f64::consts::FRAC_PI_4);
        let f = imperfect_fi(&psi, &dpsi, &perfect, &v).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        let f0 = imperfect_fi(&psi, &dpsi, &Povm::from(&ProjectiveMeasurement::plus_minus()), &linalg::identity(2));
        assert!(matches!(f0, Err(MetroqError::SupportMismatch { .. })) || f0.unwrap() < 1e-12);
    }

    #[test]
    fn imperfect_fi_at_optimal_angle() {
        let (p, q) = (0.95f64, 0.9f64);
        let (eta, delta) = (p + q - 1.0, p - q);
        let a = 1.0 - delta * delta - eta * eta;
        let theta = (a - (a * a - 4.0 * delta * delta * eta * eta).sqrt()) / (2.0 * delta * eta);
        let phi = theta.asin();
        let m = bit_flip_povm(p, q);
        let (psi, dpsi) = equator(0.0);
        // The rotation angle that realises relative angle φ against |±⟩.
        let v = linalg::expm_i_herm(&sigma_z(), (std::f64::consts::FRAC_PI_2 - phi) / 2.0);
        let f = imperfect_fi(&psi, &dpsi, &m, &v).unwrap();
        let closed = eta * eta * phi.cos().powi(2) / (1.0 - (delta + eta * phi.sin()).powi(2));
        assert!((f - closed).abs() < 1e-12, "{f} vs {closed}");
        assert!((f - 0.729233).abs() < 1e-6, "{f}");
    }

    #[test]
    fn gamma_examples() {
        let cfg = GammaConfig::default();
        let (r, pair) = gamma_coefficient(&Povm::from(&ProjectiveMeasurement::plus_minus()), &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        assert!(pair.xi().inner(pair.xi_perp()).norm() < 1e-10);
        let (r, _) = gamma_coefficient(&bit_flip_povm(0.95, 0.9), &cfg).unwrap();
        assert!((r.value - bit_flip_gamma(0.95, 0.9)).abs() < 1e-8, "{}", r.value);
        assert!((r.value - 0.729233).abs() < 1e-6);
        let (r, _) = gamma_coefficient(&bit_flip_povm(0.9, 0.9), &cfg).unwrap();
        assert!((r.value - 0.64).abs() < 1e-8);
        let trace = r.optimizer_trace.unwrap();
        assert!(trace.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn gamma_classical_examples() {
        let cfg = ClassicalGammaConfig::default();
        assert!((gamma_classical(&DetectionChannel::identity(3), &cfg).unwrap().report.value - 1.0).abs() < 1e-9);
        let bf = DetectionChannel::bit_flip(0.95, 0.9).unwrap();
        let g = gamma_classical(&bf, &cfg).unwrap().report.value;
        assert!((g - bit_flip_gamma(0.95, 0.9)).abs() < 1e-9);
        let uniform = DetectionChannel::new(RMat::from_element(3, 3, 1.0 / 3.0)).unwrap();
        assert!(gamma_classical(&uniform, &cfg).unwrap().report.value < 1e-12);
    }

    #[test]
    fn gamma_classical_matches_commuting_povm() {
        let pm = RMat::from_row_slice(3, 3, &[0.8, 0.1, 0.2, 0.15, 0.7, 0.1, 0.05, 0.2, 0.7]);
        let p = DetectionChannel::new(pm).unwrap();
        let g = gamma_classical(&p, &ClassicalGammaConfig::default()).unwrap().report.value;
        let m = povm_from_detection(&p, &ProjectiveMeasurement::computational(3), &linalg::identity(3)).unwrap();
        let (r, _) = gamma_coefficient(&m, &GammaConfig::default()).unwrap();
        assert!((g - r.value).abs() < 1e-7, "{g} vs {}", r.value);
    }

    #[test]
    fn distinguishable_pairs() {
        let pm = Povm::from(&ProjectiveMeasurement::computational(2));
        assert!(matches!(perfectly_distinguishable_pair(&pm), PairSearch::Found(_)));
        assert_eq!(perfectly_distinguishable_pair(&bit_flip_povm(0.95, 0.9)), PairSearch::NotFound);
        let noncommuting = Povm::new(vec![
            linalg::projector(&linalg::basis(2, 0)).scale(0.5),
            linalg::projector(&linalg::basis(2, 1)).scale(0.5),
            linalg::projector(&hadamard().column(0).into_owned()).scale(0.5),
            linalg::projector(&hadamard().column(1).into_owned()).scale(0.5),
        ])
        .unwrap();
        assert_eq!(perfectly_distinguishable_pair(&noncommuting), PairSearch::NotDecidable);
    }

    #[test]
    fn moment_bound_examples() {
        let (q, dq) = (0.3, 0.2);
        let probs = [1.0 - q, q];
        let dprobs = [-dq, dq];
        let f1 = moment_lower_bound(&probs, &dprobs, 1, &[0.0, 1.0]).unwrap().value;
        assert!((f1 - classical_fi(&probs, &dprobs).unwrap()).abs() < 1e-12);

        let probs = [0.2, 0.5, 0.3];
        let dprobs = [0.1, -0.3, 0.2];
        let w = [0.0, 1.0, 2.0];
        let mean: f64 = probs.iter().zip(&w).map(|(p, x)| p * x).sum();
        let var: f64 = probs.iter().zip(&w).map(|(p, x)| p * (x - mean).powi(2)).sum();
        let dmean: f64 = dprobs.iter().zip(&w).map(|(p, x)| p * x).sum();
        let f1 = moment_lower_bound(&probs, &dprobs, 1, &w).unwrap().value;
        assert!((f1 - dmean * dmean / var).abs() < 1e-12);
        let f2 = moment_lower_bound(&probs, &dprobs, 2, &w).unwrap().value;
        assert!((f2 - classical_fi(&probs, &dprobs).unwrap()).abs() < 1e-10);
        assert_eq!(moment_lower_bound(&probs, &[0.0; 3], 2, &w).unwrap().value, 0.0);
    }

    #[test]
    fn moment_bound_flags_singular_matrix() {
        let r = moment_lower_bound(&[0.5, 0.5], &[0.1, -0.1], 3, &[0.0, 1.0]).unwrap();
        assert!(r.note.is_some());
        assert!(r.value <= classical_fi(&[0.5, 0.5], &[0.1, -0.1]).unwrap() + 1e-8);
    }
}
