//! Channel-extension bounds for noisy measurements with local control.
//!
//! The quantum-classical channel of a noisy measurement is written in a
//! canonical Kraus form `K_{x,j} = |x⟩⟨j| √M_{x,φ} U_θ`. Kraus gauges
//! generated by a Hermitian `g` shift the derivatives to
//! `K̃̇ = K̇ − i (g ⊗ 𝟙) K` in stacked form, which gives
//! `α(g) = K̃̇† K̃̇` and `β(g) = i K̃̇† K`.
//!
//! * The asymptotic bound minimises `‖α‖` on the affine set `β(g) = 0`.
//!   It is solved through its concave dual, `max_ρ min_g Tr{ρ α(g)}`, where
//!   the inner problem is linear least squares. A smoothed top-eigenvalue
//!   descent on the primal side then polishes the result, and the duality
//!   gap certifies convergence.
//! * The finite-`N` bound minimises `N‖α‖ + N(N−1)‖β‖²` over all `g`, with
//!   log-sum-exp smoothing and a decreasing smoothing schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{MetroqError, Result};
use crate::linalg::{self, c, CMat, RMat, RVec, I};
use crate::optim::{self, LbfgsOptions};
use crate::qcore::{self, DetectionChannel, Povm, ProjectiveMeasurement, UnitaryEncoding};

/// Canonical Kraus operators and their θ-derivatives at the reference point.
#[derive(Debug, Clone)]
pub struct CanonicalKraus {
    ops: Vec<CMat>,
    dops: Vec<CMat>,
    num_outcomes: usize,
    dim: usize,
    theta0: f64,
}

impl CanonicalKraus {
    pub fn operators(&self) -> &[CMat] {
        &self.ops
    }

    pub fn derivatives(&self) -> &[CMat] {
        &self.dops
    }

    pub fn num_outcomes(&self) -> usize {
        self.num_outcomes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// Number of Kraus operators `|X|·d`.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn stack(mats: &[CMat]) -> CMat {
        let (r, cols) = mats[0].shape();
        let mut out = CMat::zeros(r * mats.len(), cols);
        for (l, m) in mats.iter().enumerate() {
            out.view_mut((l * r, 0), (r, cols)).copy_from(m);
        }
        out
    }

    /// Vertically stacked operators, `(|X|·d·|X|) × d`.
    pub fn stacked(&self) -> CMat {
        Self::stack(&self.ops)
    }

    pub fn stacked_derivatives(&self) -> CMat {
        Self::stack(&self.dops)
    }
}

/// Hermitian generator of a first-order Kraus gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeGenerator {
    g: CMat,
}

impl GaugeGenerator {
    pub fn new(g: CMat) -> Result<Self> {
        if !g.is_square() || !linalg::is_hermitian(&g, 1e-12) {
            return Err(MetroqError::NotHermitian("gauge generator".into()));
        }
        Ok(Self { g })
    }

    pub fn zero(n: usize) -> Self {
        Self { g: CMat::zeros(n, n) }
    }

    pub fn matrix(&self) -> &CMat {
        &self.g
    }
}

/// Outcome of a CE-bound optimisation.
#[derive(Debug, Clone)]
pub struct CeResult {
    /// `‖α(g*)‖`.
    pub alpha_norm: f64,
    /// `‖β(g*)‖`.
    pub beta_norm: f64,
    /// Probe count of a finite bound; `None` for the asymptotic bound.
    pub n: Option<usize>,
    /// `4(N‖α‖ + N(N−1)‖β‖²)` for a finite bound, `4‖α‖` for the asymptotic one.
    pub bound: f64,
    /// Bound divided by `N` (equal to `bound` for the asymptotic case).
    pub per_probe: f64,
    /// Dual certificate `4 max_ρ min_g Tr{ρα}` when available.
    pub dual_per_probe: Option<f64>,
    pub g_opt: GaugeGenerator,
    pub converged: bool,
    pub iters: u64,
}

impl CeResult {
    /// `4 N ‖α‖`, the asymptotic bound for `N` probes.
    pub fn bound_asymptotic(&self, n: usize) -> f64 {
        4.0 * n as f64 * self.alpha_norm
    }
}

/// Solver settings shared by the CE bounds.
#[derive(Debug, Clone)]
pub struct CeConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: u64,
    /// Relative primal-dual gap accepted as converged.
    pub gap_tol: f64,
    /// Initial and final smoothing widths relative to the objective scale.
    pub mu0: f64,
    pub mu_min: f64,
}

impl Default for CeConfig {
    fn default() -> Self {
        Self { restarts: 4, seed: 0x4345, max_iters: 3000, gap_tol: 1e-6, mu0: 0.1, mu_min: 1e-9 }
    }
}

/// Canonical Kraus form of the quantum-classical channel of `V† M V`
/// after the encoding at its reference point.
pub fn canonical_kraus(m: &Povm, enc: &UnitaryEncoding, v: &CMat) -> Result<CanonicalKraus> {
    let d = m.dim();
    if enc.dim() != d {
        return Err(MetroqError::DimensionMismatch("encoding and POVM dimensions differ".into()));
    }
    let rotated = m.conjugated(v)?;
    let u = enc.unitary(enc.theta0());
    let du = u.clone() * enc.generator().map(|z| z * I);
    let nx = m.num_outcomes();
    let mut ops = Vec::with_capacity(nx * d);
    let mut dops = Vec::with_capacity(nx * d);
    for (x, e) in rotated.elements().iter().enumerate() {
        let s = linalg::sqrt_psd(e, crate::tol::Tolerances::DEFAULT.psd_clamp)?;
        let su = &s * &u;
        let sdu = &s * &du;
        for j in 0..d {
            let mut k = CMat::zeros(nx, d);
            k.set_row(x, &su.row(j));
            let mut dk = CMat::zeros(nx, d);
            dk.set_row(x, &sdu.row(j));
            ops.push(k);
            dops.push(dk);
        }
    }
    let mut sum = CMat::zeros(d, d);
    for k in &ops {
        sum += k.adjoint() * k;
    }
    if linalg::max_abs_diff(&sum, &linalg::identity(d)) > 1e-10 {
        return Err(MetroqError::InvalidKraus("canonical operators are not trace preserving".into()));
    }
    Ok(CanonicalKraus { ops, dops, num_outcomes: nx, dim: d, theta0: enc.theta0() })
}

/// `α(g)` and `β(g)` for a gauge generator.
pub fn alpha_beta(k: &CanonicalKraus, g: &GaugeGenerator) -> Result<(CMat, CMat)> {
    let n = k.len();
    if g.matrix().shape() != (n, n) {
        return Err(MetroqError::DimensionMismatch(format!("gauge must be {n}x{n}")));
    }
    let kst = k.stacked();
    let big = linalg::kron(g.matrix(), &linalg::identity(k.num_outcomes()));
    let kt = k.stacked_derivatives() - (big * &kst).map(|z| z * I);
    let alpha = linalg::hermitian_part(&(kt.adjoint() * &kt));
    let beta_raw = (kt.adjoint() * &kst).map(|z| z * I);
    Ok((alpha, linalg::hermitian_part(&beta_raw)))
}

/// Affine parametrisation `A(t) = K̇ + Σ t_k A_k`, `β(t) = β₀ + Σ t_k L_k`
/// over an orthonormal Hermitian basis of gauges.
struct GaugeProblem {
    basis: Vec<CMat>,
    a0: CMat,
    a_k: Vec<CMat>,
    beta0: CMat,
    l_k: Vec<CMat>,
}

impl GaugeProblem {
    fn new(k: &CanonicalKraus) -> Self {
        let n = k.len();
        let nx = k.num_outcomes();
        let kst = k.stacked();
        let kdst = k.stacked_derivatives();
        let basis = linalg::hermitian_basis(n);
        let id = linalg::identity(nx);
        let mut a_k = Vec::with_capacity(basis.len());
        let mut l_k = Vec::with_capacity(basis.len());
        for b in &basis {
            let bk = linalg::kron(b, &id) * &kst;
            l_k.push(-(kst.adjoint() * &bk));
            a_k.push(bk.map(|z| -z * I));
        }
        let beta0 = (kdst.adjoint() * &kst).map(|z| z * I);
        Self { basis, a0: kdst, a_k, beta0, l_k }
    }

    fn a_of(&self, t: &[f64]) -> CMat {
        let mut a = self.a0.clone();
        for (ak, &tk) in self.a_k.iter().zip(t) {
            if tk != 0.0 {
                a += ak.scale(tk);
            }
        }
        a
    }

    fn beta_of(&self, t: &[f64]) -> CMat {
        let mut b = self.beta0.clone();
        for (lk, &tk) in self.l_k.iter().zip(t) {
            if tk != 0.0 {
                b += lk.scale(tk);
            }
        }
        linalg::hermitian_part(&b)
    }

    fn gauge(&self, t: &[f64]) -> GaugeGenerator {
        GaugeGenerator { g: linalg::hermitian_part(&linalg::hermitian_from_coords(&self.basis, t)) }
    }

    fn alpha_norm(&self, t: &[f64]) -> f64 {
        let a = self.a_of(t);
        linalg::lambda_max(&linalg::hermitian_part(&(a.adjoint() * &a))).max(0.0)
    }

    fn beta_norm(&self, t: &[f64]) -> f64 {
        linalg::herm_op_norm(&self.beta_of(t))
    }
}

/// Log-sum-exp smoothing of the top eigenvalue: value and the gradient
/// weight matrix `Σ softmax_i v_i v_i†`.
fn smooth_lmax(m: &CMat, mu: f64) -> (f64, CMat) {
    let (w, v) = linalg::eigh(m);
    let top = w[w.len() - 1];
    let e: Vec<f64> = w.iter().map(|x| ((x - top) / mu).exp()).collect();
    let s: f64 = e.iter().sum();
    let mut scaled = v.clone();
    for (k, ek) in e.iter().enumerate() {
        scaled.column_mut(k).scale_mut(ek / s);
    }
    (top + mu * s.ln(), scaled * v.adjoint())
}

/// Smoothed operator norm `max(λ_max(β), λ_max(−β))` with its weight matrix.
fn smooth_abs_max(m: &CMat, mu: f64) -> (f64, CMat) {
    let (w, v) = linalg::eigh(m);
    let top = w.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let pos: Vec<f64> = w.iter().map(|x| ((x - top) / mu).exp()).collect();
    let neg: Vec<f64> = w.iter().map(|x| ((-x - top) / mu).exp()).collect();
    let s: f64 = pos.iter().sum::<f64>() + neg.iter().sum::<f64>();
    let mut scaled = v.clone();
    for k in 0..w.len() {
        scaled.column_mut(k).scale_mut((pos[k] - neg[k]) / s);
    }
    (top + mu * s.ln(), scaled * v.adjoint())
}

fn re_tr_prod(a: &CMat, b: &CMat) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

fn real_vec(m: &CMat) -> RVec {
    RVec::from_vec(linalg::complex_to_real(m))
}

/// Hermitian generator that cancels `β` for measurements built from a
/// nontrivial detection channel, or `None` when the channel is trivial.
pub fn beta_zero_feasible(
    p: &DetectionChannel,
    pi: &ProjectiveMeasurement,
    enc: &UnitaryEncoding,
    v: &CMat,
) -> Result<Option<GaugeGenerator>> {
    if !qcore::is_nontrivial(p) {
        return Ok(None);
    }
    let d = pi.dim();
    let nx = p.num_outcomes();
    let m = qcore::povm_from_detection(p, pi, &linalg::identity(d))?;
    let k = canonical_kraus(&m, enc, v)?;
    // Columns of b are the rotated measurement vectors V†|π_i⟩.
    let mut b = CMat::zeros(d, d);
    for (i, proj) in pi.projectors().iter().enumerate() {
        let col = (0..d)
            .map(|j| proj.column(j).into_owned())
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .expect("nonempty projector");
        let vec = col.unscale(col.norm());
        b.set_column(i, &(v.adjoint() * vec));
    }
    let cmat = b.adjoint() * enc.generator() * &b;
    let n = nx * d;
    let mut g = CMat::zeros(n, n);
    for x in 0..nx {
        let mut ax = CMat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let overlap: f64 = (0..nx).map(|y| p.prob(y, i) * p.prob(y, j)).sum();
                ax[(i, j)] = cmat[(i, j)] * (p.prob(x, i) * p.prob(x, j)).sqrt() / overlap;
            }
        }
        let gx = &b * ax * b.adjoint();
        g.view_mut((x * d, x * d), (d, d)).copy_from(&gx);
    }
    let gauge = GaugeGenerator::new(linalg::hermitian_part(&g))?;
    let (_, beta) = alpha_beta(&k, &gauge)?;
    let residual = linalg::max_abs(&beta);
    if residual > 1e-8 {
        return Err(MetroqError::BetaInfeasible { residual });
    }
    Ok(Some(gauge))
}

/// Asymptotic CE bound `4 min_{β(g)=0} ‖α(g)‖` per probe.
pub fn asymptotic_ce_bound(m: &Povm, enc: &UnitaryEncoding, v: &CMat, cfg: &CeConfig) -> Result<CeResult> {
    let k = canonical_kraus(m, enc, v)?;
    let prob = GaugeProblem::new(&k);
    let d = k.dim();
    let nt = prob.basis.len();

    // Affine solution set of β(t) = 0.
    let dims = 2 * d * d;
    let mut lmat = RMat::zeros(dims, nt);
    for (col, lk) in prob.l_k.iter().enumerate() {
        lmat.set_column(col, &real_vec(lk));
    }
    let rhs = -real_vec(&prob.beta0);
    let (t0, null) = linalg::lstsq_with_null(&lmat, &rhs, 1e-10);
    let residual = (&lmat * &t0 - &rhs).amax();
    if residual > 1e-8 {
        return Err(MetroqError::BetaInfeasible { residual });
    }
    let t0v: Vec<f64> = t0.iter().copied().collect();
    let base = prob.a_of(&t0v);
    let dirs: Vec<CMat> = (0..null.ncols())
        .map(|mcol| {
            let mut a = CMat::zeros(base.nrows(), base.ncols());
            for (kk, ak) in prob.a_k.iter().enumerate() {
                let w = null[(kk, mcol)];
                if w != 0.0 {
                    a += ak.scale(w);
                }
            }
            a
        })
        .collect();
    let ns = dirs.len();
    let a_of_s = |s: &[f64]| {
        let mut a = base.clone();
        for (dm, &sm) in dirs.iter().zip(s) {
            a += dm.scale(sm);
        }
        a
    };
    let t_of_s = |s: &[f64]| -> Vec<f64> {
        let mut t = t0.clone();
        for (mcol, &sm) in s.iter().enumerate() {
            t += null.column(mcol) * sm;
        }
        t.iter().copied().collect()
    };

    // Inner problem: min_s ‖A(s) Z‖²_F / Tr(Z Z†), linear least squares.
    let inner = |z: &CMat| -> (f64, Vec<f64>, CMat) {
        let tr = z.norm_squared();
        let rhs = -real_vec(&(&base * z));
        let mut cols = RMat::zeros(rhs.len(), ns);
        for (mcol, dm) in dirs.iter().enumerate() {
            cols.set_column(mcol, &real_vec(&(dm * z)));
        }
        let s: Vec<f64> = if ns > 0 { linalg::lstsq(&cols, &rhs, 1e-13).iter().copied().collect() } else { vec![] };
        let a = a_of_s(&s);
        let alpha = linalg::hermitian_part(&(a.adjoint() * &a));
        let val = (a * z).norm_squared() / tr;
        (val, s, alpha)
    };
    let unpack = |x: &[f64]| CMat::from_fn(d, d, |i, j| c(x[i * d + j], x[d * d + i * d + j]));
    let dual_obj = |x: &[f64]| -> (f64, Vec<f64>) {
        let z = unpack(x);
        let tr = z.norm_squared();
        if tr <= 1e-300 {
            return (0.0, vec![0.0; x.len()]);
        }
        let (val, _, alpha) = inner(&z);
        let gmat = (alpha * &z - z.scale(val)).scale(2.0 / tr);
        let mut g = vec![0.0; x.len()];
        for i in 0..d {
            for j in 0..d {
                g[i * d + j] = -gmat[(i, j)].re;
                g[d * d + i * d + j] = -gmat[(i, j)].im;
            }
        }
        (-val, g)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let opts = LbfgsOptions { max_iters: cfg.max_iters, ..Default::default() };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut iters = 0;
    for r in 0..cfg.restarts.max(1) {
        let x0: Vec<f64> = if r == 0 {
            // Maximally mixed start.
            (0..2 * d * d).map(|k| if k < d * d && k % (d + 1) == 0 { 1.0 } else { 0.0 }).collect()
        } else {
            (0..2 * d * d).map(|_| StandardNormal.sample(&mut rng)).collect()
        };
        let res = optim::lbfgs_robust(&dual_obj, &x0, opts);
        iters += res.iters;
        if best.as_ref().is_none_or(|(f, _)| res.f < *f) {
            best = Some((res.f, res.x));
        }
    }
    let (_, zbest) = best.expect("at least one restart");
    let (dual, s_star, _) = inner(&unpack(&zbest));

    // Primal polish over the null space.
    let scale = prob.alpha_norm(&t_of_s(&s_star)).max(1e-12);
    let primal_exact = |s: &[f64]| {
        let a = a_of_s(s);
        linalg::lambda_max(&linalg::hermitian_part(&(a.adjoint() * &a)))
    };
    let mut s_best = s_star.clone();
    let mut p_best = primal_exact(&s_best);
    if ns > 0 && (p_best - dual) > cfg.gap_tol * p_best {
        let mut s = s_best.clone();
        let mut mu = cfg.mu0 * scale;
        while mu > cfg.mu_min * scale {
            let obj = |x: &[f64]| -> (f64, Vec<f64>) {
                let a = a_of_s(x);
                let (f, w) = smooth_lmax(&linalg::hermitian_part(&(a.adjoint() * &a)), mu);
                let aw = &a * w;
                let g = dirs.iter().map(|dm| 2.0 * re_tr_prod(&aw.adjoint(), dm)).collect();
                (f, g)
            };
            let res = optim::lbfgs_robust(&obj, &s, opts);
            iters += res.iters;
            s = res.x;
            let pv = primal_exact(&s);
            if pv < p_best {
                p_best = pv;
                s_best = s.clone();
            }
            mu /= 4.0;
        }
    }
    let t_best = t_of_s(&s_best);
    let gap = (p_best - dual) / p_best.max(1e-300);
    Ok(CeResult {
        alpha_norm: p_best,
        beta_norm: prob.beta_norm(&t_best),
        n: None,
        bound: 4.0 * p_best,
        per_probe: 4.0 * p_best,
        dual_per_probe: Some(4.0 * dual),
        g_opt: prob.gauge(&t_best),
        converged: gap <= cfg.gap_tol.max(1e-9),
        iters,
    })
}

/// Finite-`N` CE bound `4 min_g {N‖α‖ + N(N−1)‖β‖²}`.
pub fn finite_ce_bound(m: &Povm, enc: &UnitaryEncoding, v: &CMat, n: usize, cfg: &CeConfig) -> Result<CeResult> {
    if n == 0 {
        return Err(MetroqError::InvalidParameter("N must be at least 1".into()));
    }
    let k = canonical_kraus(m, enc, v)?;
    let prob = GaugeProblem::new(&k);
    let nt = prob.basis.len();
    let nf = n as f64;
    let pair = nf * (nf - 1.0);
    let exact = |t: &[f64]| nf * prob.alpha_norm(t) + pair * prob.beta_norm(t).powi(2);

    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; nt]];
    if let Ok(asym) = asymptotic_ce_bound(m, enc, v, cfg) {
        starts.push(prob.basis.iter().map(|b| re_tr_prod(b, asym.g_opt.matrix())).collect());
    }

    let opts = LbfgsOptions { max_iters: cfg.max_iters, ..Default::default() };
    let mut best_t = starts[0].clone();
    let mut best_v = exact(&best_t);
    let mut iters = 0;
    for start in &starts {
        let v0 = exact(start);
        if v0 < best_v {
            best_v = v0;
            best_t = start.clone();
        }
        let scale = v0.max(1e-12);
        let mut t = start.clone();
        let mut mu = cfg.mu0 * scale / nf.max(1.0);
        while mu > cfg.mu_min * scale / nf.max(1.0) {
            let obj = |x: &[f64]| -> (f64, Vec<f64>) {
                let a = prob.a_of(x);
                let beta = prob.beta_of(x);
                let (fa, wa) = smooth_lmax(&linalg::hermitian_part(&(a.adjoint() * &a)), mu);
                let (fb, wb) = smooth_abs_max(&beta, mu);
                let aw = (&a * wa).adjoint();
                let g = prob
                    .a_k
                    .iter()
                    .zip(&prob.l_k)
                    .map(|(ak, lk)| nf * 2.0 * re_tr_prod(&aw, ak) + pair * 2.0 * fb * re_tr_prod(&wb, lk))
                    .collect();
                (nf * fa + pair * fb * fb, g)
            };
            let res = optim::lbfgs_robust(&obj, &t, opts);
            iters += res.iters;
            t = res.x;
            let v = exact(&t);
            if v < best_v {
                best_v = v;
                best_t = t.clone();
            }
            mu /= 4.0;
        }
    }
    Ok(CeResult {
        alpha_norm: prob.alpha_norm(&best_t),
        beta_norm: prob.beta_norm(&best_t),
        n: Some(n),
        bound: 4.0 * best_v,
        per_probe: 4.0 * best_v / nf,
        dual_per_probe: None,
        g_opt: prob.gauge(&best_t),
        converged: true,
        iters,
    })
}

/// Per-probe asymptotic bound for bit-flip readout,
/// `(√(p(1−p)) − √(q(1−q)))² / (p−q)²`, with its limit at `p = q`.
pub fn bitflip_ce_closed_form(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(MetroqError::InvalidParameter(format!("probabilities ({p}, {q}) outside [0, 1]")));
    }
    let delta = p - q;
    if delta.abs() < 1e-9 {
        let m = 0.5 * (p + q);
        let var = m * (1.0 - m);
        if var == 0.0 {
            return Ok(f64::INFINITY);
        }
        return Ok((1.0 - 2.0 * m).powi(2) / (4.0 * var));
    }
    let num = ((p * (1.0 - p)).sqrt() - (q * (1.0 - q)).sqrt()).powi(2);
    Ok(num / (delta * delta))
}

/// Per-probe asymptotic bound for single-photon interferometry with loss
/// `1 − η` and dark-count probability `p_dark`.
pub fn photonic_ce_closed_form(eta: f64, p_dark: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) || !(0.0..0.5).contains(&p_dark) {
        return Err(MetroqError::InvalidParameter(format!("η = {eta}, p_dark = {p_dark} out of range")));
    }
    let p = p_dark;
    let num = eta * (eta - 3.0 * p * eta + 2.0 * p * p);
    let den = 2.0 * p + eta * eta * (3.0 * p - 1.0) + eta * (1.0 - 4.0 * p - 2.0 * p * p);
    if den <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(num / den)
}
