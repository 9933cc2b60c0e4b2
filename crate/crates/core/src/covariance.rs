//! Conjugate-map decompositions and their symmetry.
//!
//! An imperfect measurement can be written as a channel `Λ` followed by a
//! projective measurement. When `Λ` is covariant under the group that
//! contains the optimal control, the channel QFI of `Λ∘U_θ` upper-bounds the
//! imperfect channel QFI. This module decides phase covariance for bit-flip
//! readout, constructs the phase-covariant decompositions, tests covariance
//! numerically and evaluates channel QFIs with a seesaw iteration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{MetroqError, Result};
use crate::fisher::{self, FiMethod, FiReport, GammaConfig};
use crate::linalg::{self, c, CMat, CVec, RMat, RVec, I, ONE};
use crate::optim;
use crate::qcore::{self, DensityMatrix, DetectionChannel, KrausSet, Povm, ProjectiveMeasurement};

const FEASIBILITY_GRID: usize = 10_000;

/// Phase covariance of bit-flip readout `(𝗉, 𝗊)` measured in the `|±⟩` basis.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseCovariance {
    /// `𝗉 = 𝗊`: the dephasing decomposition is covariant and its QFI is `η²`.
    Dephasing { qfi: f64 },
    /// Angles `φ ∈ [0, 2π)` admitting a covariant decomposition, as closed
    /// intervals, and the smallest resulting QFI `η²/sin²φ`.
    Intervals { intervals: Vec<(f64, f64)>, qfi_min: f64, phi_at_min: f64 },
}

fn eta_delta(p: f64, q: f64) -> (f64, f64) {
    (p + q - 1.0, p - q)
}

/// Slack of the complete-positivity constraints at angle `φ`; feasible iff `≥ 0`.
fn cp_slack(eta: f64, delta: f64, phi: f64) -> f64 {
    let (s, co) = phi.sin_cos();
    let s2 = s * s;
    let c2 = co * co;
    if s2 < 1e-300 || c2 < 1e-300 {
        return -1.0;
    }
    let first = co.abs() - delta.abs();
    let second = 1.0 - 4.0 * eta * eta / s2 - delta * delta / c2;
    first.min(second)
}

/// Angles at which a phase-covariant conjugate map of bit-flip readout exists.
pub fn phase_cov_feasible(p: f64, q: f64) -> Result<Option<PhaseCovariance>> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(MetroqError::InvalidParameter(format!("probabilities ({p}, {q}) outside [0, 1]")));
    }
    let (eta, delta) = eta_delta(p, q);
    if delta.abs() < 1e-12 {
        return Ok(Some(PhaseCovariance::Dephasing { qfi: eta * eta }));
    }
    let step = std::f64::consts::TAU / FEASIBILITY_GRID as f64;
    let ok = |k: usize| cp_slack(eta, delta, k as f64 * step) >= 0.0;
    let refine = |mut inside: f64, mut outside: f64| {
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if cp_slack(eta, delta, mid) >= 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let mut intervals = Vec::new();
    let mut k = 0;
    while k < FEASIBILITY_GRID {
        if ok(k) {
            let start = if k == 0 { 0.0 } else { refine(k as f64 * step, (k - 1) as f64 * step) };
            let mut end = k;
            while end + 1 < FEASIBILITY_GRID && ok(end + 1) {
                end += 1;
            }
            let stop = refine(end as f64 * step, (end + 1) as f64 * step);
            intervals.push((start, stop));
            k = end + 1;
        } else {
            k += 1;
        }
    }
    if intervals.is_empty() {
        return Ok(None);
    }
    // η²/sin²φ is smallest where |sin φ| is largest on the feasible set.
    let mut best = (f64::INFINITY, 0.0);
    for &(a, b) in &intervals {
        let (x, v) = optim::maximize_1d(&|phi: f64| phi.sin().powi(2), a, b, 65, 1e-12);
        for (phi, s2) in [(x, v), (a, a.sin().powi(2)), (b, b.sin().powi(2))] {
            let qfi = eta * eta / s2;
            if qfi < best.0 {
                best = (qfi, phi);
            }
        }
    }
    Ok(Some(PhaseCovariance::Intervals { intervals, qfi_min: best.0, phi_at_min: best.1 }))
}

/// QFI `η²/sin²φ` of an equatorial state after a phase-covariant decomposition.
pub fn phase_cov_qfi(eta: f64, phi: f64) -> Result<f64> {
    let s2 = phi.sin().powi(2);
    if s2 < 1e-14 {
        return Err(MetroqError::InvalidParameter("sin φ vanishes".into()));
    }
    Ok(eta * eta / s2)
}

/// Qubit channel with Bloch map `(x, y, z) ↦ (λx, λy, λ_z z + κ)`, built
/// from the eigendecomposition of its Choi matrix. Fails if not CP.
pub fn phase_covariant_channel(lambda: f64, kappa: f64, lambda_z: f64) -> Result<KrausSet> {
    // Images of the matrix units |i⟩⟨j| under the Bloch map.
    let image = |i: usize, j: usize| -> CMat {
        let (sx, sy, sz) = (linalg::sigma_x(), linalg::sigma_y(), linalg::sigma_z());
        match (i, j) {
            (0, 0) => (linalg::identity(2) + sz.scale(lambda_z + kappa)).unscale(2.0),
            (1, 1) => (linalg::identity(2) + sz.scale(kappa - lambda_z)).unscale(2.0),
            (0, 1) => (sx + sy.map(|z| z * I)).scale(lambda / 2.0),
            _ => (sx - sy.map(|z| z * I)).scale(lambda / 2.0),
        }
    };
    let mut choi = CMat::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let blk = image(i, j);
            choi.view_mut((2 * i, 2 * j), (2, 2)).copy_from(&blk);
        }
    }
    let (w, v) = linalg::eigh(&choi);
    if w[0] < -1e-10 {
        return Err(MetroqError::InvalidKraus(format!("Bloch map is not completely positive (Choi eigenvalue {:e})", w[0])));
    }
    let mut ops = Vec::new();
    for (k, &mu) in w.iter().enumerate() {
        if mu <= 1e-14 {
            continue;
        }
        // Choi vector Σ_i |i⟩⊗K|i⟩ gives K[a, i] = v[2i + a].
        let op = CMat::from_fn(2, 2, |a, i| v[(2 * i + a, k)] * mu.sqrt());
        ops.push(op);
    }
    KrausSet::new(ops)
}

/// Phase-covariant conjugate-map decomposition of bit-flip readout at angle
/// `φ`: the channel and the projective measurement `Π` with `Λ†[Π] = M`.
pub fn phase_covariant_decomposition(p: f64, q: f64, phi: f64) -> Result<(KrausSet, ProjectiveMeasurement)> {
    let (eta, delta) = eta_delta(p, q);
    let (s, co) = phi.sin_cos();
    if s.abs() < 1e-12 || co.abs() < 1e-12 {
        return Err(MetroqError::InvalidParameter("φ must avoid multiples of π/2".into()));
    }
    let channel = phase_covariant_channel(eta / s, delta / co, 0.0)?;
    let n_sigma = linalg::sigma_x().scale(s) + linalg::sigma_z().scale(co);
    let id = linalg::identity(2);
    let pi = ProjectiveMeasurement::new(vec![(&id + &n_sigma).unscale(2.0), (&id - &n_sigma).unscale(2.0)])?;
    Ok((channel, pi))
}

/// Dephasing decomposition `{√𝗉 𝟙, √(1−𝗉) σ_z}` of symmetric bit-flip readout
/// in the `|±⟩` basis.
pub fn dephasing_decomposition(p: f64) -> Result<KrausSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(MetroqError::InvalidParameter(format!("probability {p} outside [0, 1]")));
    }
    KrausSet::new(vec![linalg::identity(2).scale(p.sqrt()), linalg::sigma_z().scale((1.0 - p).sqrt())])
}

fn compose_unitary(l: &KrausSet, v: &CMat) -> CMat {
    // Stacked action X ↦ Λ(V X V†) evaluated on all matrix units.
    let d = l.d_in();
    let dout = l.d_out();
    let mut out = CMat::zeros(dout * d * d, dout);
    for i in 0..d {
        for j in 0..d {
            let x = linalg::outer(&linalg::basis(d, i), &linalg::basis(d, j));
            let y = l.apply(&(v * x * v.adjoint()));
            out.view_mut(((i * d + j) * dout, 0), (dout, dout)).copy_from(&y);
        }
    }
    out
}

/// Whether `Λ∘V_g = W_g∘Λ` holds with a unitary `W_g` for every sampled
/// group element `V_g = exp(i g G)`.
///
/// The intertwiners `W` with `Λ(V X V†) W = W Λ(X)` form a linear space; a
/// seeded random element of it is polar-decomposed and the candidate
/// unitary is verified on all matrix units.
pub fn check_g_covariance(l: &KrausSet, group_generator: &CMat, samples: &[f64]) -> Result<bool> {
    let d = l.d_in();
    if group_generator.shape() != (d, d) {
        return Err(MetroqError::DimensionMismatch("group generator".into()));
    }
    if !linalg::is_hermitian(group_generator, 1e-12) {
        return Err(MetroqError::NotHermitian("group generator".into()));
    }
    let dout = l.d_out();
    let base = compose_unitary(l, &linalg::identity(d));
    let mut rng = ChaCha8Rng::seed_from_u64(0x6376);
    for &g in samples {
        let v = linalg::expm_i_herm(group_generator, g);
        let moved = compose_unitary(l, &v);
        // Real linear system in the 2·dout² real coordinates of W.
        let nw = dout * dout;
        let blocks = d * d;
        let mut a = RMat::zeros(2 * nw * blocks, 2 * nw);
        for col in 0..2 * nw {
            let mut w = CMat::zeros(dout, dout);
            let (r, cc) = ((col / 2) / dout, (col / 2) % dout);
            w[(r, cc)] = if col % 2 == 0 { ONE } else { I };
            let mut stacked = Vec::with_capacity(2 * nw * blocks);
            for b in 0..blocks {
                let lhs = moved.view((b * dout, 0), (dout, dout)) * &w;
                let rhs = &w * base.view((b * dout, 0), (dout, dout));
                stacked.extend(linalg::complex_to_real(&(lhs - rhs)));
            }
            a.set_column(col, &RVec::from_vec(stacked));
        }
        let (_, null) = linalg::lstsq_with_null(&a, &RVec::zeros(a.nrows()), 1e-10);
        if null.ncols() == 0 {
            return Ok(false);
        }
        let mut found = false;
        for _ in 0..4 {
            let coeffs: Vec<f64> = (0..null.ncols()).map(|_| rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)).collect();
            let x = &null * RVec::from_vec(coeffs);
            let t = CMat::from_fn(dout, dout, |r, cc| c(x[2 * (r * dout + cc)], x[2 * (r * dout + cc) + 1]));
            let w = linalg::polar_unitary(&t);
            let mut resid: f64 = 0.0;
            for b in 0..blocks {
                let lhs = moved.view((b * dout, 0), (dout, dout)).into_owned();
                let rhs = &w * base.view((b * dout, 0), (dout, dout)) * w.adjoint();
                resid = resid.max(linalg::max_abs_diff(&lhs, &rhs));
            }
            if resid < 1e-8 {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Symmetric logarithmic derivative of `ρ` with derivative `∂ρ`.
pub fn sld_solve(rho: &DensityMatrix, drho: &CMat) -> Result<CMat> {
    Ok(fisher::qfi_sld(rho, drho)?.1)
}

/// Seesaw iteration settings.
#[derive(Debug, Clone)]
pub struct SeesawConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self { max_iters: 500, tol: 1e-9, restarts: 8, seed: 0x5353 }
    }
}

/// State of one seesaw run.
#[derive(Debug, Clone)]
pub struct SeesawState {
    sigma: DensityMatrix,
    x: CMat,
    value: f64,
    history: Vec<f64>,
    converged: bool,
}

impl SeesawState {
    pub fn sigma(&self) -> &DensityMatrix {
        &self.sigma
    }

    pub fn observable(&self) -> &CMat {
        &self.x
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    pub fn converged(&self) -> bool {
        self.converged
    }
}

/// QFI of `Λ(σ)` under the encoding `exp(−iθH)` and its SLD.
fn output_qfi(h: &CMat, l: &KrausSet, sigma: &CMat) -> Result<(f64, CMat, CMat)> {
    let comm = sigma * h - h * sigma;
    let drho = linalg::hermitian_part(&l.apply(&comm.map(|z| z * I)));
    let rho = DensityMatrix::new(linalg::hermitian_part(&l.apply(sigma)))?;
    let (f, sld) = fisher::qfi_sld(&rho, &drho)?;
    Ok((f, sld, rho.matrix().clone()))
}

/// One seesaw run from the input state `sigma0`.
pub fn seesaw_run(h: &CMat, l: &KrausSet, sigma0: &DensityMatrix, cfg: &SeesawConfig) -> Result<SeesawState> {
    let d = l.d_in();
    if h.shape() != (d, d) || sigma0.dim() != d {
        return Err(MetroqError::DimensionMismatch("seesaw generator, channel and state".into()));
    }
    if !linalg::is_hermitian(h, 1e-12) {
        return Err(MetroqError::NotHermitian("seesaw generator".into()));
    }
    let mut sigma = sigma0.matrix().clone();
    let mut history = Vec::new();
    let mut best_sigma = sigma.clone();
    let mut best_x = CMat::zeros(l.d_out(), l.d_out());
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        let (f, sld, rho) = output_qfi(h, l, &sigma)?;
        if let Some(&last) = history.last() {
            if f < last - 1e-10 {
                return Err(MetroqError::Degenerate(format!("seesaw decreased from {last} to {f}")));
            }
        }
        let improved = history.last().is_none_or(|&last: &f64| f > last);
        history.push(f);
        let shift = linalg::tr_prod_re(&rho, &sld);
        let x = &sld - linalg::identity(l.d_out()).scale(shift);
        if improved {
            best_sigma = sigma.clone();
            best_x = x.clone();
        }
        if history.len() >= 2 && history[history.len() - 1] - history[history.len() - 2] < cfg.tol {
            converged = true;
            break;
        }
        // Input-state update: top eigenvector of −Λ†[X²] + 2i[H, Λ†[X]].
        let y = l.apply_adjoint(&x);
        let comm = h * &y - &y * h;
        let omega = linalg::hermitian_part(&(-l.apply_adjoint(&(&x * &x)) + comm.map(|z| z * c(0.0, 2.0))));
        let (_, vecs) = linalg::eigh(&omega);
        let top: CVec = vecs.column(d - 1).into_owned();
        sigma = linalg::outer(&top, &top);
    }
    let value = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SeesawState { sigma: DensityMatrix::new(best_sigma)?, x: best_x, value, history, converged })
}

/// Channel QFI of `Λ∘U_θ` with `U_θ = exp(−iθH)`, as the best seesaw
/// lower bound over seeded restarts.
pub fn seesaw_channel_qfi(h: &CMat, l: &KrausSet, cfg: &SeesawConfig) -> Result<FiReport> {
    let d = l.d_in();
    if h.shape() != (d, d) {
        return Err(MetroqError::DimensionMismatch("seesaw generator".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = Vec::with_capacity(cfg.restarts.max(1));
    // Balanced superposition of the extreme eigenvectors of H.
    let (_, hv) = linalg::eigh(h);
    let balanced = (hv.column(0) + hv.column(d - 1)).unscale(std::f64::consts::SQRT_2);
    let mixed = linalg::outer(&balanced, &balanced).scale(0.9) + linalg::identity(d).scale(0.1 / d as f64);
    starts.push(DensityMatrix::new(mixed)?);
    while starts.len() < cfg.restarts.max(1) {
        starts.push(DensityMatrix::new(linalg::random_density(d, &mut rng))?);
    }
    let mut runs = Vec::with_capacity(starts.len());
    for s in &starts {
        runs.push(seesaw_run(h, l, s, cfg)?);
    }
    let (best_idx, best) = runs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .expect("at least one run");
    let agreeing = runs.iter().filter(|r| (r.value - best.value).abs() <= 1e-6).count();
    let note = (agreeing < 2 && runs.len() > 1).then(|| {
        format!("restarts disagree: only run {best_idx} reached {:.9}", best.value)
    });
    let mut trace = Vec::with_capacity(best.history.len());
    let mut running = f64::NEG_INFINITY;
    for (k, &v) in best.history.iter().enumerate() {
        running = running.max(v);
        trace.push((k, running));
    }
    Ok(FiReport {
        value: best.value,
        method: FiMethod::Seesaw,
        optimizer_trace: Some(trace),
        tolerance: cfg.tol,
        converged: best.converged,
        note,
    })
}

/// Two-qubit comparison of the imperfect channel QFI with channel QFIs of
/// local conjugate-map decompositions under symmetric bit flips.
#[derive(Debug, Clone)]
pub struct TwoQubitAudit {
    pub p: f64,
    /// `4 γ_{M⊗M}`, the two-qubit imperfect channel QFI.
    pub imperfect_qfi: f64,
    pub dephasing_qfi: f64,
    pub qc_qfi: f64,
    pub compact_qfi: f64,
}

impl TwoQubitAudit {
    /// Whether every decomposition's channel QFI lies at or below the
    /// imperfect channel QFI within `tol`.
    pub fn decompositions_below(&self, tol: f64) -> bool {
        [self.dephasing_qfi, self.qc_qfi, self.compact_qfi].iter().all(|&v| v <= self.imperfect_qfi + tol)
    }
}

/// Bit-flip readout in the `|±⟩` basis as a POVM.
pub fn bit_flip_povm(p: f64, q: f64) -> Result<Povm> {
    qcore::povm_from_detection(&DetectionChannel::bit_flip(p, q)?, &ProjectiveMeasurement::plus_minus(), &linalg::identity(2))
}

pub fn two_qubit_covariance_audit(p: f64) -> Result<TwoQubitAudit> {
    if !(0.0..=1.0).contains(&p) {
        return Err(MetroqError::InvalidParameter(format!("probability {p} outside [0, 1]")));
    }
    let m = bit_flip_povm(p, p)?;
    let m2 = qcore::tensor_povm(&m, 2, qcore::DEFAULT_TENSOR_CAP)?;
    let (gamma, _) = fisher::gamma_coefficient(&m2, &GammaConfig::default())?;
    let h1 = linalg::sigma_z().scale(0.5);
    let id = linalg::identity(2);
    let h = linalg::kron(&h1, &id) + linalg::kron(&id, &h1);
    let cfg = SeesawConfig::default();
    let two = |k: &KrausSet| k.tensor(k);
    let dephasing = seesaw_channel_qfi(&h, &two(&dephasing_decomposition(p)?), &cfg)?;
    let qc = seesaw_channel_qfi(&h, &two(&qcore::conjugate_map_qc(&m)?), &cfg)?;
    let compact = seesaw_channel_qfi(&h, &two(&qcore::conjugate_map_compact(&m)?), &cfg)?;
    Ok(TwoQubitAudit {
        p,
        imperfect_qfi: 4.0 * gamma.value,
        dephasing_qfi: dephasing.value,
        qc_qfi: qc.value,
        compact_qfi: compact.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::readout;

    fn hz() -> CMat {
        linalg::sigma_z().scale(0.5)
    }

    #[test]
    fn feasibility_examples() {
        assert_eq!(phase_cov_feasible(0.9, 0.9).unwrap(), Some(PhaseCovariance::Dephasing { qfi: 0.64000000000000012 }));
        assert!(phase_cov_feasible(0.9, 0.8).unwrap().is_none());
        match phase_cov_feasible(0.9, 0.05).unwrap() {
            Some(PhaseCovariance::Intervals { intervals, qfi_min, phi_at_min }) => {
                assert!(!intervals.is_empty());
                let (eta, delta) = eta_delta(0.9, 0.05);
                assert!(cp_slack(eta, delta, phi_at_min) >= -1e-12);
                assert!((qfi_min - phase_cov_qfi(eta, phi_at_min).unwrap()).abs() < 1e-12);
                // The covariant bound dominates the imperfect QFI.
                let fim = readout::f2bin_bar(0.9, 0.05).unwrap().0;
                assert!(qfi_min >= fim - 1e-9, "{qfi_min} < {fim}");
                for (a, b) in intervals {
                    assert!(b >= a);
                    assert!(cp_slack(eta, delta, 0.5 * (a + b)) >= 0.0);
                }
            }
            other => panic!("expected intervals, got {other:?}"),
        }
    }

    #[test]
    fn phase_cov_qfi_values() {
        assert!((phase_cov_qfi(0.8, std::f64::consts::FRAC_PI_2).unwrap() - 0.64).abs() < 1e-15);
        assert_eq!(phase_cov_qfi(0.0, 1.0).unwrap(), 0.0);
        assert!(phase_cov_qfi(0.5, 0.0).is_err());
    }

    #[test]
    fn covariant_decomposition_reproduces_measurement() {
        let (p, q) = (0.9, 0.05);
        let Some(PhaseCovariance::Intervals { phi_at_min, .. }) = phase_cov_feasible(p, q).unwrap() else {
            panic!("feasible");
        };
        let (l, pi) = phase_covariant_decomposition(p, q, phi_at_min).unwrap();
        let m = bit_flip_povm(p, q).unwrap();
        for (x, proj) in pi.projectors().iter().enumerate() {
            assert!(linalg::max_abs_diff(&l.apply_adjoint(proj), &m.elements()[x]) < 1e-9);
        }
        assert!(check_g_covariance(&l, &linalg::sigma_z(), &[0.3, 1.7]).unwrap());
        // Outside the feasible set the Bloch map fails complete positivity.
        assert!(phase_covariant_decomposition(0.9, 0.8, 0.7).is_err());
    }

    #[test]
    fn covariance_examples() {
        let samples = [0.4, 1.3, 2.9];
        assert!(check_g_covariance(&dephasing_decomposition(0.9).unwrap(), &linalg::sigma_z(), &samples).unwrap());
        assert!(check_g_covariance(&KrausSet::identity(2), &linalg::sigma_z(), &samples).unwrap());
        let qc = qcore::conjugate_map_qc(&bit_flip_povm(0.9, 0.7).unwrap()).unwrap();
        assert!(!check_g_covariance(&qc, &linalg::sigma_z(), &samples).unwrap());
    }

    #[test]
    fn sld_examples() {
        let psi = linalg::basis(2, 0) + linalg::basis(2, 1);
        let psi = psi.unscale(psi.norm());
        let rho = DensityMatrix::new(linalg::outer(&psi, &psi)).unwrap();
        let drho = linalg::hermitian_part(&(rho.matrix() * hz().map(|z| z * I) - hz().map(|z| z * I) * rho.matrix()));
        let l = sld_solve(&rho, &drho).unwrap();
        assert!(linalg::max_abs_diff(&l, &drho.scale(2.0)) < 1e-12);
        let zero = sld_solve(&rho, &CMat::zeros(2, 2)).unwrap();
        assert!(linalg::max_abs(&zero) < 1e-15);
        // Full-rank qubit against the eigenbasis formula 2⟨i|∂ρ|j⟩/(λ_i+λ_j).
        let r = DensityMatrix::new(CMat::from_fn(2, 2, |i, j| if i == j { c([0.7, 0.3][i], 0.0) } else { c(0.1, if i == 0 { -0.05 } else { 0.05 }) })).unwrap();
        let dr = CMat::from_fn(2, 2, |i, j| if i == j { c([0.2, -0.2][i], 0.0) } else { c(0.03, if i == 0 { 0.01 } else { -0.01 }) });
        let l = sld_solve(&r, &dr).unwrap();
        let anti = (r.matrix() * &l + &l * r.matrix()).scale(0.5);
        assert!(linalg::max_abs_diff(&anti, &dr) < 1e-12);
    }

    #[test]
    fn seesaw_examples() {
        let cfg = SeesawConfig::default();
        let dep = seesaw_channel_qfi(&hz(), &dephasing_decomposition(0.9).unwrap(), &cfg).unwrap();
        assert!((dep.value - 0.64).abs() < 1e-6, "{}", dep.value);
        let id = seesaw_channel_qfi(&hz(), &KrausSet::identity(2), &cfg).unwrap();
        assert!((id.value - 1.0).abs() < 1e-9);
        let trace = dep.optimizer_trace.unwrap();
        assert!(trace.windows(2).all(|w| w[1].1 >= w[0].1));
        for q in [0.05, 0.5, 0.8] {
            let fim = readout::f2bin_bar(0.9, q).unwrap().0;
            let m = bit_flip_povm(0.9, q).unwrap();
            let qc = seesaw_channel_qfi(&hz(), &qcore::conjugate_map_qc(&m).unwrap(), &cfg).unwrap();
            assert!((qc.value - fim).abs() < 1e-5, "qc q={q}: {} vs {fim}", qc.value);
            let compact = seesaw_channel_qfi(&hz(), &qcore::conjugate_map_compact(&m).unwrap(), &cfg).unwrap();
            assert!((compact.value - fim).abs() < 1e-5, "compact q={q}: {} vs {fim}", compact.value);
        }
    }

    #[test]
    fn seesaw_on_covariant_channel_matches_closed_form() {
        let (p, q) = (0.9, 0.05);
        let (eta, _) = eta_delta(p, q);
        for phi in [0.25, 0.3] {
            let Ok((l, _)) = phase_covariant_decomposition(p, q, phi) else { continue };
            let r = seesaw_channel_qfi(&hz(), &l, &SeesawConfig::default()).unwrap();
            assert!((r.value - phase_cov_qfi(eta, phi).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn two_qubit_audit_examples() {
        let perfect = two_qubit_covariance_audit(1.0).unwrap();
        for v in [perfect.imperfect_qfi, perfect.dephasing_qfi, perfect.qc_qfi, perfect.compact_qfi] {
            assert!((v - 4.0).abs() < 1e-6, "{perfect:?}");
        }
        let erased = two_qubit_covariance_audit(0.5).unwrap();
        for v in [erased.imperfect_qfi, erased.dephasing_qfi, erased.qc_qfi, erased.compact_qfi] {
            assert!(v.abs() < 1e-6, "{erased:?}");
        }
        let mid = two_qubit_covariance_audit(0.9).unwrap();
        assert!(mid.decompositions_below(1e-6), "{mid:?}");
        assert!(mid.qc_qfi < mid.imperfect_qfi - 1e-3);
    }
}
