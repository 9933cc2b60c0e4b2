//! `N`-qubit estimation with local control in the symmetric subspace.
//!
//! States are stored as amplitudes over Dicke states `|D_k⟩`, `k` being the
//! number of qubits in `|1⟩`, so that `J_z|D_k⟩ = (N/2 − k)|D_k⟩`. The
//! encoding is `exp(iθJ_z)`. Collective operators act through their
//! tridiagonal structure, so expectation values cost `O(N)` and the
//! squeezed-state construction is dominated by one `(N+1)`-dimensional
//! eigendecomposition.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{MetroqError, Result};
use crate::fisher::{FiMethod, FiReport};
use crate::linalg::{self, c, CMat, CVec, I, ONE, ZERO};
use crate::optim;
use crate::qcore::{DetectionChannel, ProjectiveMeasurement};
use crate::readout;

/// Largest `N` accepted by the brute-force search.
pub const BRUTE_FORCE_MAX_N: usize = 6;
/// Largest `N` for product-mode observables, whose symmetric powers use
/// binomial weights in double precision.
pub const PRODUCT_MODE_MAX_N: usize = 200;

/// Pure state of `N` qubits in the symmetric subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveState {
    amps: CVec,
    n: usize,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl CollectiveState {
    pub fn new(amps: CVec) -> Result<Self> {
        if amps.is_empty() {
            return Err(MetroqError::InvalidState("empty amplitude vector".into()));
        }
        let norm = amps.norm_squared();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(MetroqError::InvalidState(format!("squared norm {norm} differs from 1")));
        }
        let n = amps.len() - 1;
        Ok(Self { amps, n })
    }

    /// Normalises `amps` before validation.
    pub fn normalized(amps: CVec) -> Result<Self> {
        let norm = amps.norm();
        if norm < 1e-300 {
            return Err(MetroqError::InvalidState("zero amplitude vector".into()));
        }
        Self::new(amps.unscale(norm))
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`.
    pub fn ghz(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(MetroqError::InvalidParameter("N must be at least 1".into()));
        }
        let mut a = CVec::zeros(n + 1);
        a[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        a[n] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(a)
    }

    /// `|ψ⟩^{⊗N}` for a single-qubit state `ψ = (a₀, a₁)`.
    pub fn product(single: &CVec, n: usize) -> Result<Self> {
        if single.len() != 2 {
            return Err(MetroqError::DimensionMismatch("single-qubit state must have two amplitudes".into()));
        }
        let s = single.unscale(single.norm());
        let amps = CVec::from_fn(n + 1, |k, _| s[0].powu((n - k) as u32) * s[1].powu(k as u32) * binomial(n, k).sqrt());
        Self::normalized(amps)
    }

    /// Spin coherent state polarised along `+y`.
    pub fn coherent_y(n: usize) -> Result<Self> {
        let s = CVec::from_vec(vec![ONE, I]);
        Self::product(&s, n)
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `exp(i angle J_z)|ψ⟩`.
    pub fn rotated_z(&self, angle: f64) -> Self {
        let j = self.n as f64 / 2.0;
        let amps = CVec::from_fn(self.n + 1, |k, _| self.amps[k] * c(0.0, angle * (j - k as f64)).exp());
        Self { amps, n: self.n }
    }

    pub fn expect_jx(&self) -> f64 {
        self.amps.dotc(&apply_jx(&self.amps)).re
    }

    pub fn expect_jy(&self) -> f64 {
        self.amps.dotc(&apply_jy(&self.amps)).re
    }

    pub fn expect_jz(&self) -> f64 {
        self.amps.dotc(&apply_jz(&self.amps)).re
    }

    /// `⟨(n·J)²⟩ − ⟨n·J⟩²` for a real direction `n`.
    pub fn variance_along(&self, dir: [f64; 3]) -> f64 {
        let v = apply_dir(&self.amps, dir);
        let mean = self.amps.dotc(&v).re;
        v.norm_squared() - mean * mean
    }
}

/// Coupling `⟨D_k|J_x|D_{k+1}⟩ = √((k+1)(N−k))/2`.
fn coupling(n: usize, k: usize) -> f64 {
    (((k + 1) * (n - k)) as f64).sqrt() / 2.0
}

pub fn apply_jx(v: &CVec) -> CVec {
    let n = v.len() - 1;
    let mut out = CVec::zeros(n + 1);
    for k in 0..n {
        let ck = coupling(n, k);
        out[k] += v[k + 1] * ck;
        out[k + 1] += v[k] * ck;
    }
    out
}

pub fn apply_jy(v: &CVec) -> CVec {
    let n = v.len() - 1;
    let mut out = CVec::zeros(n + 1);
    for k in 0..n {
        let ck = coupling(n, k);
        out[k] += v[k + 1] * c(0.0, -ck);
        out[k + 1] += v[k] * c(0.0, ck);
    }
    out
}

pub fn apply_jz(v: &CVec) -> CVec {
    let n = v.len() - 1;
    let j = n as f64 / 2.0;
    CVec::from_fn(n + 1, |k, _| v[k] * (j - k as f64))
}

fn apply_dir(v: &CVec, dir: [f64; 3]) -> CVec {
    apply_jx(v).scale(dir[0]) + apply_jy(v).scale(dir[1]) + apply_jz(v).scale(dir[2])
}

/// Dense real `J_x` in the Dicke basis.
pub fn jx_matrix(n: usize) -> linalg::RMat {
    let mut m = linalg::RMat::zeros(n + 1, n + 1);
    for k in 0..n {
        let ck = coupling(n, k);
        m[(k, k + 1)] = ck;
        m[(k + 1, k)] = ck;
    }
    m
}

/// Convention for the rotation angle that aligns the squeezed quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TwistAngle {
    /// `Θ = π/2 − ½ arctan(b/a)`, the angle of minimal variance for one-axis twisting.
    #[default]
    HalfAngle,
    /// `Θ = π/2 − arctan(b/a)`.
    FullAngle,
}

/// Rotation angle `Θ_μ` with `a = 1 − cos^{N−2}μ`, `b = 4 sin(μ/2) cos^{N−2}(μ/2)`.
pub fn twist_angle(n: usize, mu: f64, kind: TwistAngle) -> f64 {
    let e = n as f64 - 2.0;
    let a = 1.0 - mu.cos().powf(e);
    let b = 4.0 * (mu / 2.0).sin() * (mu / 2.0).cos().powf(e);
    let eps = b.atan2(a);
    match kind {
        TwistAngle::HalfAngle => std::f64::consts::FRAC_PI_2 - 0.5 * eps,
        TwistAngle::FullAngle => std::f64::consts::FRAC_PI_2 - eps,
    }
}

/// One-axis twisted state `e^{−iΘJ_y} W_μ |j, m_y = j⟩` with
/// `W_μ = e^{−iμJ_z²/2}`, using the half-angle convention.
pub fn one_axis_squeezed(n: usize, mu: f64) -> Result<CollectiveState> {
    one_axis_squeezed_with(n, mu, TwistAngle::default())
}

pub fn one_axis_squeezed_with(n: usize, mu: f64, kind: TwistAngle) -> Result<CollectiveState> {
    if n < 2 {
        return Err(MetroqError::InvalidParameter("squeezing needs N ≥ 2".into()));
    }
    if !(mu > 0.0 && mu < std::f64::consts::PI) {
        return Err(MetroqError::InvalidParameter(format!("squeezing strength {mu} outside (0, π)")));
    }
    let theta = twist_angle(n, mu, kind);
    let y = CollectiveState::coherent_y(n)?;
    let j = n as f64 / 2.0;
    let twisted = CVec::from_fn(n + 1, |k, _| {
        let m = j - k as f64;
        y.amps[k] * c(0.0, -mu * m * m / 2.0).exp()
    });
    // e^{−iΘJ_y} = D e^{−iΘJ_x} D† with D = diag(i^k).
    let phase = |k: usize| [ONE, I, -ONE, -I][k % 4];
    let (w, v) = linalg::eigh_real(&jx_matrix(n));
    let dv = CVec::from_fn(n + 1, |k, _| twisted[k] * phase(k).conj());
    let mut coeffs = CVec::zeros(n + 1);
    for (col, &lam) in w.iter().enumerate() {
        let mut s = ZERO;
        for k in 0..=n {
            s += dv[k] * v[(k, col)];
        }
        coeffs[col] = s * c(0.0, -theta * lam).exp();
    }
    let mut out = CVec::zeros(n + 1);
    for k in 0..=n {
        let mut s = ZERO;
        for (col, coef) in coeffs.iter().enumerate() {
            s += coef * v[(k, col)];
        }
        out[k] = s * phase(k);
    }
    CollectiveState::normalized(out)
}

/// How single-probe outcome values combine into the joint observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableMode {
    Sum,
    Product,
}

/// Joint observable built from real values `f_x` of the observed outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct ImperfectObservable {
    values: Vec<f64>,
    mode: ObservableMode,
}

impl ImperfectObservable {
    pub fn new(values: Vec<f64>, mode: ObservableMode) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(MetroqError::InvalidParameter("outcome values must be finite and nonempty".into()));
        }
        Ok(Self { values, mode })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode(&self) -> ObservableMode {
        self.mode
    }
}

/// Single-qubit operator `Σ_x w_x M_x` with `M_x = V† (Σ_i p(x|i) |±_i⟩⟨±_i|) V`.
fn weighted_element(p: &DetectionChannel, v: &CMat, weights: &[f64]) -> CMat {
    let pm = ProjectiveMeasurement::plus_minus();
    let mut out = CMat::zeros(2, 2);
    for (x, &w) in weights.iter().enumerate() {
        for (i, proj) in pm.projectors().iter().enumerate() {
            out += proj.scale(w * p.prob(x, i));
        }
    }
    linalg::hermitian_part(&(v.adjoint() * out * v))
}

/// Bloch decomposition `A = α𝟙 + β·σ` of a Hermitian qubit operator.
fn bloch(a: &CMat) -> (f64, [f64; 3]) {
    let half = |m: CMat| linalg::tr_prod_re(a, &m) / 2.0;
    (half(linalg::identity(2)), [half(linalg::sigma_x()), half(linalg::sigma_y()), half(linalg::sigma_z())])
}

/// Restriction of `A^{⊗N}` to the symmetric subspace, for any 2×2 `A`.
pub fn symmetric_power(a: &CMat, n: usize) -> Result<CMat> {
    if a.shape() != (2, 2) {
        return Err(MetroqError::DimensionMismatch("symmetric power needs a 2x2 matrix".into()));
    }
    if n > PRODUCT_MODE_MAX_N {
        return Err(MetroqError::CapExceeded { required: n, cap: PRODUCT_MODE_MAX_N });
    }
    let (a00, a01, a10, a11) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let pw = |z: linalg::C64, e: usize| if e == 0 { ONE } else { z.powu(e as u32) };
    let mut out = CMat::zeros(n + 1, n + 1);
    for k in 0..=n {
        for l in 0..=n {
            let mut s = ZERO;
            let lo = (k + l).saturating_sub(n);
            for t in lo..=k.min(l) {
                let w = binomial(l, t) * binomial(n - l, k - t);
                s += pw(a11, t) * pw(a01, l - t) * pw(a10, k - t) * pw(a00, n + t - l - k) * w;
            }
            out[(k, l)] = s * (binomial(n, l) / binomial(n, k)).sqrt();
        }
    }
    Ok(out)
}

/// `ν·MSE` of the estimator inverting `⟨Ô⟩` for the joint observable `f`
/// measured through the detection channel `P` on the `|±⟩` basis rotated
/// by the local control `V`, for the state `exp(iθJ_z)|ψ⟩`.
///
/// Returns `+∞` when `∂_θ⟨Ô⟩` vanishes.
pub fn error_propagation_imperfect(
    state: &CollectiveState,
    theta: f64,
    f: &ImperfectObservable,
    p: &DetectionChannel,
    v: &CMat,
) -> Result<f64> {
    if p.num_inputs() != 2 || f.values.len() != p.num_outcomes() {
        return Err(MetroqError::DimensionMismatch("observable values must match the outcomes of a qubit channel".into()));
    }
    qcore_check_unitary(v)?;
    let n = state.n as f64;
    let chi = state.rotated_z(theta);
    let amps = &chi.amps;
    let squares: Vec<f64> = f.values.iter().map(|x| x * x).collect();
    let o1 = weighted_element(p, v, &f.values);
    let o2 = weighted_element(p, v, &squares);
    let (num, deriv) = match f.mode {
        ObservableMode::Sum => {
            let (alpha, beta) = bloch(&o1);
            let (alpha2, beta2) = bloch(&o2);
            let jx = apply_jx(amps);
            let jy = apply_jy(amps);
            let jz = apply_jz(amps);
            let mean_j = [amps.dotc(&jx).re, amps.dotc(&jy).re, amps.dotc(&jz).re];
            let dot = |b: [f64; 3], m: [f64; 3]| b[0] * m[0] + b[1] * m[1] + b[2] * m[2];
            let bj = jx.scale(beta[0]) + jy.scale(beta[1]) + jz.scale(beta[2]);
            let bj2 = bj.norm_squared();
            let beta_sq = dot(beta, beta);
            // Σ_j O_j = Nα + 2β·J, and O'² replaces Σ_j O_j² by Σ_j Σ_x f_x² M_x.
            let mean_o = n * alpha + 2.0 * dot(beta, mean_j);
            let mean_sum_sq = n * n * alpha * alpha + 4.0 * n * alpha * dot(beta, mean_j) + 4.0 * bj2;
            let mean_single_sq = n * (alpha * alpha + beta_sq) + 4.0 * alpha * dot(beta, mean_j);
            let mean_f2 = n * alpha2 + 2.0 * dot(beta2, mean_j);
            let o_prime_sq = mean_sum_sq - mean_single_sq + mean_f2;
            // ∂⟨J_x⟩ = ⟨J_y⟩, ∂⟨J_y⟩ = −⟨J_x⟩, ∂⟨J_z⟩ = 0.
            let deriv = 2.0 * (beta[0] * mean_j[1] - beta[1] * mean_j[0]);
            (o_prime_sq - mean_o * mean_o, deriv)
        }
        ObservableMode::Product => {
            let s1 = symmetric_power(&o1, state.n)?;
            let s2 = symmetric_power(&o2, state.n)?;
            let so = &s1 * amps;
            let mean_o = amps.dotc(&so).re;
            let mean_o2 = amps.dotc(&(&s2 * amps)).re;
            // ∂⟨O⟩ = i⟨[O, J_z]⟩ = −2 Im⟨χ|O J_z|χ⟩.
            let a = amps.dotc(&(&s1 * apply_jz(amps)));
            (mean_o2 - mean_o * mean_o, -2.0 * a.im)
        }
    };
    if deriv.abs() < 1e-14 {
        return Ok(f64::INFINITY);
    }
    Ok(num.max(0.0) / (deriv * deriv))
}

fn qcore_check_unitary(v: &CMat) -> Result<()> {
    if v.shape() != (2, 2) || !linalg::is_unitary(v, 1e-10) {
        return Err(MetroqError::NotUnitary("local control".into()));
    }
    Ok(())
}

/// Three-term error propagation for a bit-flip `J_x` readout of the state
/// `exp(i(θ+φ)J_z)|ψ⟩`, with `η = 𝗉+𝗊−1` and `δ = 𝗉−𝗊`.
pub fn jx_mse(state: &CollectiveState, theta: f64, p: f64, q: f64, phi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(MetroqError::InvalidParameter(format!("probabilities ({p}, {q}) outside [0, 1]")));
    }
    let eta = p + q - 1.0;
    let delta = p - q;
    if eta.abs() < 1e-15 {
        return Ok(f64::INFINITY);
    }
    let chi = state.rotated_z(theta + phi);
    let mean_x = chi.expect_jx();
    let var_x = chi.variance_along([1.0, 0.0, 0.0]);
    let deriv = chi.expect_jy();
    let d2 = deriv * deriv;
    if d2 < 1e-28 {
        return Ok(f64::INFINITY);
    }
    let n = state.n as f64;
    Ok(var_x / d2 - delta * mean_x / (eta * d2) + n / (4.0 * eta * eta) * (1.0 - eta * eta - delta * delta) / d2)
}

/// Optimal single-probe angle `φ = arcsin Θ` for bit-flip readout.
pub fn optimal_phi(p: f64, q: f64) -> Result<f64> {
    Ok(readout::f2bin_bar(p, q)?.1.asin())
}

/// `ν·MSE` of the imperfect parity estimator on a GHZ state,
/// `[1 − (δ^N + η^N cos Nφ)²] / (N² η^{2N} sin² Nφ)`.
pub fn parity_mse_ghz(n: usize, p: f64, q: f64, varphi: f64) -> Result<f64> {
    if n == 0 {
        return Err(MetroqError::InvalidParameter("N must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(MetroqError::InvalidParameter(format!("probabilities ({p}, {q}) outside [0, 1]")));
    }
    let nf = n as f64;
    let eta = p + q - 1.0;
    let delta = p - q;
    let s = (nf * varphi).sin();
    let den = nf * nf * eta.powi(2 * n as i32) * s * s;
    if den < 1e-300 {
        return Ok(f64::INFINITY);
    }
    let mean = delta.powi(n as i32) + eta.powi(n as i32) * (nf * varphi).cos();
    Ok((1.0 - mean * mean) / den)
}

/// Angle in `(0, π/N)` minimising [`parity_mse_ghz`] and the minimum.
pub fn optimal_parity_mse(n: usize, p: f64, q: f64) -> Result<(f64, f64)> {
    let period = std::f64::consts::PI / n.max(1) as f64;
    let f = |x: f64| parity_mse_ghz(n, p, q, x).map(|v| -v).unwrap_or(f64::NEG_INFINITY);
    let margin = period * 1e-6;
    let (x, v) = optim::maximize_1d(&f, margin, period - margin, 201, 1e-12);
    Ok((x, -v))
}

/// Transition matrix `T[w, l]`: probability of `w` occurrences of the
/// second outcome when `l` of `N` probes sit in the second eigenvector.
fn outcome_count_matrix(n: usize, p: &DetectionChannel) -> Vec<Vec<f64>> {
    let pmf = |m: usize, r: f64| -> Vec<f64> {
        (0..=m).map(|w| binomial(m, w) * r.powi(w as i32) * (1.0 - r).powi((m - w) as i32)).collect()
    };
    let r0 = p.prob(1, 0);
    let r1 = p.prob(1, 1);
    let mut t = vec![vec![0.0; n + 1]; n + 1];
    for l in 0..=n {
        let a = pmf(l, r1);
        let b = pmf(n - l, r0);
        for (i, ai) in a.iter().enumerate() {
            for (k, bk) in b.iter().enumerate() {
                t[i + k][l] += ai * bk;
            }
        }
    }
    t
}

fn lenient_fi(probs: &[f64], dprobs: &[f64]) -> f64 {
    probs.iter().zip(dprobs).filter(|(p, _)| **p > 1e-14).map(|(p, d)| d * d / p).sum()
}

/// Classical FI at `θ = 0` of the outcome-count distribution when every
/// probe is measured in the `|±⟩` basis rotated by the same control `V`
/// and read out through the binary channel `P`.
pub fn local_control_fi(state: &CollectiveState, v: &CMat, p: &DetectionChannel) -> Result<f64> {
    if p.num_inputs() != 2 || p.num_outcomes() != 2 {
        return Err(MetroqError::DimensionMismatch("local readout must be a 2x2 channel".into()));
    }
    qcore_check_unitary(v)?;
    if state.n > PRODUCT_MODE_MAX_N {
        return Err(MetroqError::CapExceeded { required: state.n, cap: PRODUCT_MODE_MAX_N });
    }
    let u = v.adjoint() * linalg::hadamard();
    let su = symmetric_power(&u, state.n)?.adjoint();
    let amps = &state.amps;
    let cvec = &su * amps;
    let dvec = &su * apply_jz(amps).map(|z| z * I);
    let t = outcome_count_matrix(state.n, p);
    let mut probs = vec![0.0; state.n + 1];
    let mut dprobs = vec![0.0; state.n + 1];
    for (w, row) in t.iter().enumerate() {
        for (l, &tw) in row.iter().enumerate() {
            probs[w] += tw * cvec[l].norm_sqr();
            dprobs[w] += tw * 2.0 * (cvec[l].conj() * dvec[l]).re;
        }
    }
    Ok(lenient_fi(&probs, &dprobs))
}

/// Settings of the brute-force local-control search.
#[derive(Debug, Clone)]
pub struct BruteForceConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: u64,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        Self { restarts: 64, seed: 0x4246, max_iters: 6000 }
    }
}

/// Local control `e^{iaσ_z} e^{ibσ_y} e^{icσ_z}`.
fn euler_unitary(a: f64, b: f64, cc: f64) -> CMat {
    linalg::expm_i_herm(&linalg::sigma_z(), a) * linalg::expm_i_herm(&linalg::sigma_y(), b) * linalg::expm_i_herm(&linalg::sigma_z(), cc)
}

/// Best local-control FI over symmetric input states and identical local
/// unitaries, by multi-start Nelder–Mead. The reported trace lists the
/// sorted restart values, whose spread quantifies the heuristic.
pub fn brute_force_imperfect_qfi(n: usize, p: &DetectionChannel, cfg: &BruteForceConfig) -> Result<FiReport> {
    if n == 0 {
        return Err(MetroqError::InvalidParameter("N must be at least 1".into()));
    }
    if n > BRUTE_FORCE_MAX_N {
        return Err(MetroqError::CapExceeded { required: n, cap: BRUTE_FORCE_MAX_N });
    }
    if p.num_inputs() != 2 || p.num_outcomes() != 2 {
        return Err(MetroqError::DimensionMismatch("local readout must be a 2x2 channel".into()));
    }
    let dim = n + 1;
    let objective = |x: &[f64]| -> f64 {
        let amps = CVec::from_fn(dim, |k, _| c(x[2 * k], x[2 * k + 1]));
        let Ok(state) = CollectiveState::normalized(amps) else { return 0.0 };
        let v = euler_unitary(x[2 * dim], x[2 * dim + 1], x[2 * dim + 2]);
        -local_control_fi(&state, &v, p).unwrap_or(0.0)
    };
    let pack = |state: &CollectiveState, angles: [f64; 3]| -> Vec<f64> {
        let mut x: Vec<f64> = state.amps.iter().flat_map(|z| [z.re, z.im]).collect();
        x.extend(angles);
        x
    };
    let mut seeds = Vec::new();
    for k in 0..8 {
        let phase = std::f64::consts::PI * k as f64 / (8.0 * n as f64);
        let mut a = CVec::zeros(dim);
        a[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        a[n] = c(0.0, phase).exp().scale(std::f64::consts::FRAC_1_SQRT_2);
        seeds.push(pack(&CollectiveState::new(a)?, [0.0, 0.0, 0.0]));
    }
    if let Ok(phi) = optimal_phi(p.prob(0, 0), p.prob(1, 1)) {
        for s in [phi, -phi, std::f64::consts::PI - phi] {
            let single = CVec::from_vec(vec![ONE, c(0.0, s).exp()]);
            seeds.push(pack(&CollectiveState::product(&single, n)?, [0.0, 0.0, 0.0]));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while seeds.len() < cfg.restarts.max(1) {
        let x: Vec<f64> = (0..2 * dim + 3).map(|_| StandardNormal.sample(&mut rng)).collect();
        seeds.push(x);
    }
    let mut values = Vec::with_capacity(seeds.len());
    let mut converged = true;
    for x0 in &seeds {
        let first = optim::nelder_mead(&objective, x0, 0.3, cfg.max_iters, 1e-13);
        let second = optim::nelder_mead(&objective, &first.x, 0.05, cfg.max_iters, 1e-14);
        converged &= second.converged;
        values.push(-second.f);
    }
    values.sort_by(|a, b| b.total_cmp(a));
    let best = values[0];
    let agreeing = values.iter().filter(|v| (best - **v).abs() <= 1e-6 * best.max(1.0)).count();
    Ok(FiReport {
        value: best,
        method: FiMethod::Optimizer,
        optimizer_trace: Some(values.iter().rev().enumerate().map(|(i, v)| (i, *v)).collect()),
        tolerance: 1e-6,
        converged,
        note: Some(format!("{agreeing} of {} restarts within 1e-6 of the best value", values.len())),
    })
}
