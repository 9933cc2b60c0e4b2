//! Many-probe protocols with a global control unitary: Hellinger overlap
//! constants, convergence rates, GHZ-type lower bounds, white-noise
//! robustness and exact Fisher information for bit-flip readout.
//!
//! Product distributions over `N` binary outcomes are reduced to Hamming
//! weights, so every sum runs over `N + 1` terms.

use statrs::function::factorial::ln_binomial;

use crate::error::{MetroqError, Result};
use crate::linalg::{self, CMat};
use crate::qcore::{Povm, StateVector};

/// Orthonormal pair of single-probe states.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaPair {
    zeta: StateVector,
    zeta_perp: StateVector,
}

impl ZetaPair {
    pub fn new(zeta: StateVector, zeta_perp: StateVector) -> Result<Self> {
        if zeta.dim() != zeta_perp.dim() {
            return Err(MetroqError::DimensionMismatch("pair states differ in dimension".into()));
        }
        if zeta.inner(&zeta_perp).norm() > 1e-10 {
            return Err(MetroqError::InvalidState("pair states are not orthogonal".into()));
        }
        Ok(Self { zeta, zeta_perp })
    }

    /// `|j⟩, |k⟩` of the computational basis.
    pub fn basis(d: usize, j: usize, k: usize) -> Result<Self> {
        Self::new(StateVector::basis(d, j), StateVector::basis(d, k))
    }

    pub fn zeta(&self) -> &StateVector {
        &self.zeta
    }

    pub fn zeta_perp(&self) -> &StateVector {
        &self.zeta_perp
    }
}

/// Bound and exact value for `N` probes.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalBoundReport {
    pub n: usize,
    pub c: f64,
    pub chi: f64,
    pub f_lower: f64,
    pub f_exact: Option<f64>,
}

/// Asymmetric bit-flip readout: `p = p(0|0)`, `q = p(1|1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitFlip {
    pub p: f64,
    pub q: f64,
}

impl BitFlip {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
            return Err(MetroqError::InvalidParameter(format!("bit-flip probabilities ({p}, {q}) outside [0, 1]")));
        }
        Ok(Self { p, q })
    }

    /// Single-probe Hellinger overlap for `ζ = |0⟩`, `ζ⊥ = |1⟩`.
    pub fn hellinger_c(&self) -> f64 {
        (self.p * (1.0 - self.q)).sqrt() + (self.q * (1.0 - self.p)).sqrt()
    }

    /// Probability of outcome 1 for inputs `|0⟩`, `|1⟩` and the maximally mixed state.
    fn one_probs(&self) -> (f64, f64, f64) {
        let a = 1.0 - self.p;
        let b = self.q;
        (a, b, 0.5 * (a + b))
    }
}

/// `Σ_x √(⟨ζ|M_x|ζ⟩⟨ζ⊥|M_x|ζ⊥⟩)`.
pub fn hellinger_c(m: &Povm, pair: &ZetaPair) -> Result<f64> {
    if pair.zeta().dim() != m.dim() {
        return Err(MetroqError::DimensionMismatch("pair and POVM dimensions differ".into()));
    }
    let (a, b) = (pair.zeta().amplitudes(), pair.zeta_perp().amplitudes());
    let c: f64 = m
        .elements()
        .iter()
        .map(|e| {
            let pa = a.dotc(&(e * a)).re.max(0.0);
            let pb = b.dotc(&(e * b)).re.max(0.0);
            (pa * pb).sqrt()
        })
        .sum();
    Ok(c.clamp(0.0, 1.0))
}

/// Convergence rate `χ = −ln c`; infinite when `c = 0`.
pub fn convergence_rate(c: f64) -> Result<f64> {
    if !(0.0..=1.0 + 1e-12).contains(&c) {
        return Err(MetroqError::InvalidParameter(format!("overlap {c} outside [0, 1]")));
    }
    Ok(if c == 0.0 { f64::INFINITY } else { -c.min(1.0).ln() })
}

/// Central-limit approximation `¼(μ₊−μ₋)²/(σ₊²+σ₋²)` of the rate for two
/// distributions over the outcome values `w`.
pub fn gaussian_rate(p_plus: &[f64], p_minus: &[f64], w: &[f64]) -> Result<f64> {
    if p_plus.len() != w.len() || p_minus.len() != w.len() {
        return Err(MetroqError::DimensionMismatch("distributions and outcome values differ in length".into()));
    }
    let stats = |p: &[f64]| {
        let mu: f64 = p.iter().zip(w).map(|(a, x)| a * x).sum();
        let var: f64 = p.iter().zip(w).map(|(a, x)| a * (x - mu).powi(2)).sum();
        (mu, var)
    };
    let (m1, v1) = stats(p_plus);
    let (m2, v2) = stats(p_minus);
    if v1 + v2 <= 0.0 {
        return Ok(if m1 == m2 { 0.0 } else { f64::INFINITY });
    }
    Ok(0.25 * (m1 - m2).powi(2) / (v1 + v2))
}

/// Exact rate `½(√λ₀ − √λ₁)²` for two Poisson distributions.
pub fn poisson_rate(lambda0: f64, lambda1: f64) -> f64 {
    0.5 * (lambda0.sqrt() - lambda1.sqrt()).powi(2)
}

/// Probes needed for `1 − c^N ≥ fraction`.
pub fn probes_for_fraction(chi: f64, fraction: f64) -> f64 {
    -(1.0 - fraction).ln() / chi
}

/// `N²[1 − c^N]` together with the exact FI of the same control.
pub fn ghz_lower_bound(n: usize, noise: BitFlip) -> Result<GlobalBoundReport> {
    if n == 0 {
        return Err(MetroqError::InvalidParameter("N must be at least 1".into()));
    }
    let c = noise.hellinger_c().min(1.0);
    let nn = (n * n) as f64;
    Ok(GlobalBoundReport {
        n,
        c,
        chi: convergence_rate(c)?,
        f_lower: nn * (1.0 - c.powi(n as i32)),
        f_exact: Some(exact_fn_ghz(n, noise, GhzControl::Standard)?),
    })
}

/// `k ln a` with the convention `0 ln 0 = 0`.
fn xlny(k: f64, a: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * a.ln()
    }
}

/// Log-probability of one particular string with `k` ones among `n`
/// independent outcomes, each equal to 1 with probability `a`.
fn ln_string(n: usize, k: usize, a: f64) -> f64 {
    xlny((n - k) as f64, 1.0 - a) + xlny(k as f64, a)
}

/// Hamming-weight distribution `C(n,k) a^k (1-a)^{n-k}`.
fn weight_dist(n: usize, a: f64) -> Vec<f64> {
    (0..=n).map(|k| (ln_binomial(n as u64, k as u64) + ln_string(n, k, a)).exp()).collect()
}

/// Choice of the global control for the GHZ protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GhzControl {
    /// `ψ± ↦ |0…0⟩, |1…1⟩`.
    Standard,
    /// `ψ± ↦ cos t|0…0⟩ + sin t|1…1⟩, −sin t|0…0⟩ + cos t|1…1⟩`.
    CatAngle(f64),
}

/// Observed weight distribution and its θ-derivative for the GHZ probe
/// under the given control, at the reference phase.
pub fn ghz_distribution(n: usize, noise: BitFlip, control: GhzControl) -> (Vec<f64>, Vec<f64>) {
    let t = match control {
        GhzControl::Standard => 0.0,
        GhzControl::CatAngle(t) => t,
    };
    let (a1, b1, _) = noise.one_probs();
    let p0 = weight_dist(n, a1);
    let p1 = weight_dist(n, b1);
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let (ct, st) = (t.cos(), t.sin());
    // Amplitudes on |0…0⟩ and |1…1⟩ at the reference point and their
    // derivatives; the probe rotates at rate N/2 inside the signal plane.
    let a = s2 * (ct - st);
    let b = s2 * (st + ct);
    let half_n = 0.5 * n as f64;
    let da = half_n * s2 * (ct + st);
    let db = half_n * s2 * (st - ct);
    let q = p0.iter().zip(&p1).map(|(x, y)| a * a * x + b * b * y).collect();
    let dq = p0.iter().zip(&p1).map(|(x, y)| 2.0 * a * da * x + 2.0 * b * db * y).collect();
    (q, dq)
}

/// Exact FI of the `N`-probe GHZ protocol with bit-flip readout.
pub fn exact_fn_ghz(n: usize, noise: BitFlip, control: GhzControl) -> Result<f64> {
    if n == 0 {
        return Err(MetroqError::InvalidParameter("N must be at least 1".into()));
    }
    let (q, dq) = ghz_distribution(n, noise, control);
    Ok(fi_sum(&q, &dq))
}

/// `Σ ṗ²/p` skipping outcomes with vanishing probability.
fn fi_sum(q: &[f64], dq: &[f64]) -> f64 {
    q.iter()
        .zip(dq)
        .map(|(p, d)| if *p > 1e-300 { d * d / p } else { 0.0 })
        .sum()
}

/// Discrimination errors `ε±` between the signal distributions and the
/// white-noise distribution with priors `r`, `1 − r`.
pub fn discrimination_errors(n: usize, noise: BitFlip, r: f64) -> (f64, f64) {
    let (a_plus, a_minus, a_mix) = noise.one_probs();
    let (lr, lnr) = (r.ln(), (1.0 - r).ln());
    let eps = |a: f64| -> f64 {
        (0..=n)
            .map(|k| {
                let lb = ln_binomial(n as u64, k as u64);
                let x = lr + ln_string(n, k, a);
                let y = lnr + ln_string(n, k, a_mix);
                (lb + x.min(y)).exp()
            })
            .sum()
    };
    (eps(a_plus), eps(a_minus))
}

/// `N²·max(0, r(1−c^N) − ε₊ − ε₋)` for a GHZ probe mixed with white noise.
pub fn werner_lower_bound(n: usize, noise: BitFlip, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(MetroqError::InvalidParameter(format!("mixing weight {r} must lie in (0, 1)")));
    }
    if n == 0 {
        return Err(MetroqError::InvalidParameter("N must be at least 1".into()));
    }
    let c = noise.hellinger_c().min(1.0);
    let (ep, em) = discrimination_errors(n, noise, r);
    Ok((n * n) as f64 * (r * (1.0 - c.powi(n as i32)) - ep - em).max(0.0))
}

/// Exact FI of the white-noise-mixed GHZ protocol with the standard control.
pub fn werner_exact(n: usize, noise: BitFlip, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) || n == 0 {
        return Err(MetroqError::InvalidParameter(format!("invalid N = {n} or r = {r}")));
    }
    let (q, dq) = ghz_distribution(n, noise, GhzControl::Standard);
    let mix = weight_dist(n, noise.one_probs().2);
    let qr: Vec<f64> = q.iter().zip(&mix).map(|(a, b)| r * a + (1.0 - r) * b).collect();
    let dqr: Vec<f64> = dq.iter().map(|d| r * d).collect();
    Ok(fi_sum(&qr, &dqr))
}

/// Common-eigenbasis pair of a commuting POVM with the smallest Hellinger
/// overlap, returned with that overlap.
pub fn optimal_zeta_search(m: &Povm) -> Result<(ZetaPair, f64)> {
    if !m.is_commuting(1e-10) {
        return Err(MetroqError::Unsupported("optimal pair search needs commuting POVM elements".into()));
    }
    let d = m.dim();
    if d < 2 {
        return Err(MetroqError::InvalidParameter("dimension must be at least 2".into()));
    }
    let mut h = CMat::zeros(d, d);
    for (x, e) in m.elements().iter().enumerate() {
        h += e.scale(1.0 + 0.6180339887498949 * (x as f64 + 1.0).sqrt());
    }
    // Prefer the computational basis when it already diagonalises every element.
    let diagonal = m.elements().iter().all(|e| {
        let mut off = e.clone();
        off.fill_diagonal(linalg::ZERO);
        linalg::max_abs(&off) <= 1e-12
    });
    let u = if diagonal { linalg::identity(d) } else { linalg::eigh(&h).1 };
    let mut best: Option<(ZetaPair, f64)> = None;
    for j in 0..d {
        for k in (j + 1)..d {
            let pair = ZetaPair::new(
                StateVector::normalized(u.column(j).into_owned())?,
                StateVector::normalized(u.column(k).into_owned())?,
            )?;
            let c = hellinger_c(m, &pair)?;
            if best.as_ref().is_none_or(|(_, bc)| c < *bc - 1e-15) {
                best = Some((pair, c));
            }
        }
    }
    Ok(best.expect("at least one pair"))
}

/// Grid scan of the cat-state lower-bound objective `1 − Σ√(p_ζ p_ζ⊥)`
/// over the mixing angle; returns `(best angle, best value, all values)`.
pub fn cat_state_scan(n: usize, noise: BitFlip, grid: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    if grid.is_empty() || n == 0 {
        return Err(MetroqError::InvalidParameter("empty angle grid or N = 0".into()));
    }
    let (a1, b1, _) = noise.one_probs();
    let p0 = weight_dist(n, a1);
    let p1 = weight_dist(n, b1);
    let objective = |t: f64| {
        let (c2, s2) = (t.cos().powi(2), t.sin().powi(2));
        let overlap: f64 = p0
            .iter()
            .zip(&p1)
            .map(|(x, y)| ((c2 * x + s2 * y) * (s2 * x + c2 * y)).max(0.0).sqrt())
            .sum();
        (1.0 - overlap).max(0.0)
    };
    let values: Vec<f64> = grid.iter().map(|&t| objective(t)).collect();
    let (mut bi, mut bv) = (0, f64::NEG_INFINITY);
    for (i, v) in values.iter().enumerate() {
        if *v > bv {
            bi = i;
            bv = *v;
        }
    }
    Ok((grid[bi], bv, values))
}

/// Brute-force FI over all `2^N` outcome strings for the GHZ protocol; used
/// to validate the Hamming-weight reduction at small `N`.
pub fn exact_fn_ghz_full(n: usize, noise: BitFlip, control: GhzControl) -> Result<f64> {
    if n == 0 || n > 16 {
        return Err(MetroqError::CapExceeded { required: n, cap: 16 });
    }
    let t = match control {
        GhzControl::Standard => 0.0,
        GhzControl::CatAngle(t) => t,
    };
    let (p, q) = (noise.p, noise.q);
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let amp = |eps: f64| {
        let half = 0.5 * n as f64 * eps;
        let (c, s) = (half.cos(), half.sin());
        let a = s2 * ((c + s) * t.cos() - (c - s) * t.sin());
        let b = s2 * ((c + s) * t.sin() + (c - s) * t.cos());
        (a, b)
    };
    let dist = |eps: f64| -> Vec<f64> {
        let (a, b) = amp(eps);
        (0..(1usize << n))
            .map(|x| {
                let ones = x.count_ones() as i32;
                let zeros = n as i32 - ones;
                let from0 = p.powi(zeros) * (1.0 - p).powi(ones);
                let from1 = (1.0 - q).powi(zeros) * q.powi(ones);
                a * a * from0 + b * b * from1
            })
            .collect()
    };
    let h = 1e-5;
    let (dp, dm, d0) = (dist(h), dist(-h), dist(0.0));
    let dq: Vec<f64> = dp.iter().zip(&dm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    Ok(fi_sum(&d0, &dq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{povm_from_detection, DetectionChannel, ProjectiveMeasurement};

    fn bf() -> BitFlip {
        BitFlip::new(0.95, 0.9).unwrap()
    }

    fn computational_povm(p: f64, q: f64) -> Povm {
        povm_from_detection(
            &DetectionChannel::bit_flip(p, q).unwrap(),
            &ProjectiveMeasurement::computational(2),
            &linalg::identity(2),
        )
        .unwrap()
    }

    #[test]
    fn hellinger_examples() {
        let c = hellinger_c(&computational_povm(0.95, 0.9), &ZetaPair::basis(2, 0, 1).unwrap()).unwrap();
        assert!((c - 0.520353).abs() < 1e-6 && (c - bf().hellinger_c()).abs() < 1e-15);
        let pm = Povm::from(&ProjectiveMeasurement::computational(2));
        assert_eq!(hellinger_c(&pm, &ZetaPair::basis(2, 0, 1).unwrap()).unwrap(), 0.0);
        let erasing = computational_povm(0.5, 0.5);
        assert!((hellinger_c(&erasing, &ZetaPair::basis(2, 0, 1).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_examples() {
        assert!((convergence_rate(0.5203527345044131).unwrap() - 0.6532483617868474).abs() < 1e-14);
        assert_eq!(convergence_rate(0.0).unwrap(), f64::INFINITY);
        let (p, q) = (0.95, 0.9);
        let g = gaussian_rate(&[p, 1.0 - p], &[1.0 - q, q], &[0.0, 1.0]).unwrap();
        assert!((g - 1.31364).abs() < 1e-5);
        let closed = 0.25 * (p + q - 1.0f64).powi(2) / (p * (1.0 - p) + q * (1.0 - q));
        assert!((g - closed).abs() < 1e-14);
    }

    #[test]
    fn poisson_rate_is_exact_log_overlap() {
        use statrs::distribution::{Discrete, Poisson};
        let (l0, l1) = (0.1, 0.07);
        let (d0, d1) = (Poisson::new(l0).unwrap(), Poisson::new(l1).unwrap());
        let c: f64 = (0..60u64).map(|x| (d0.pmf(x) * d1.pmf(x)).sqrt()).sum();
        let chi = poisson_rate(l0, l1);
        assert!((chi + c.ln()).abs() < 1e-14);
        let n95 = probes_for_fraction(chi, 0.95);
        assert!((1500.0..3000.0).contains(&n95), "{n95}");
    }

    #[test]
    fn ghz_bound_examples() {
        let r = ghz_lower_bound(10, bf()).unwrap();
        assert!((r.f_lower - 99.85446132670998).abs() < 1e-10, "{}", r.f_lower);
        let fe = r.f_exact.unwrap();
        assert!(fe >= r.f_lower - 1e-8 && fe <= 100.0 + 1e-9);
        let perfect = ghz_lower_bound(7, BitFlip::new(1.0, 1.0).unwrap()).unwrap();
        assert!((perfect.f_lower - 49.0).abs() < 1e-12 && (perfect.f_exact.unwrap() - 49.0).abs() < 1e-12);
        let mut last = 0.0;
        for n in 1..50 {
            let ratio = ghz_lower_bound(n, bf()).unwrap().f_lower / (n * n) as f64;
            assert!(ratio > last);
            last = ratio;
        }
        assert!(1.0 - last < 1e-12);
        assert_eq!(ghz_lower_bound(200, bf()).unwrap().f_lower, 40000.0);
    }

    #[test]
    fn exact_matches_full_enumeration() {
        for n in 1..=8 {
            for control in [GhzControl::Standard, GhzControl::CatAngle(0.3)] {
                let a = exact_fn_ghz(n, bf(), control).unwrap();
                let b = exact_fn_ghz_full(n, bf(), control).unwrap();
                assert!((a - b).abs() < 1e-6 * a.max(1.0), "N={n} {a} {b}");
            }
        }
        assert!(exact_fn_ghz(5, BitFlip::new(0.5, 0.5).unwrap(), GhzControl::Standard).unwrap() < 1e-12);
    }

    #[test]
    fn werner_bound_examples() {
        let r = 0.7;
        assert_eq!(werner_lower_bound(1, bf(), r).unwrap(), 0.0);
        let n = 400;
        let w = werner_lower_bound(n, bf(), r).unwrap() / (n * n) as f64;
        assert!((w - r).abs() < 0.01, "{w}");
        let near_one = werner_lower_bound(30, bf(), 1.0 - 1e-13).unwrap();
        let ghz = ghz_lower_bound(30, bf()).unwrap().f_lower;
        assert!((near_one - ghz).abs() < 1e-6 * ghz);
        for n in [5, 20, 80] {
            let lower = werner_lower_bound(n, bf(), r).unwrap();
            let exact = werner_exact(n, bf(), r).unwrap();
            assert!(lower <= exact + 1e-8 && exact <= r * (n * n) as f64 + 1e-8);
        }
    }

    #[test]
    fn zeta_search() {
        let (pair, c) = optimal_zeta_search(&computational_povm(0.95, 0.9)).unwrap();
        assert!((c - 0.520353).abs() < 1e-6);
        let a = pair.zeta().amplitudes();
        assert!((a[0].norm() - 1.0).abs() < 1e-12 || (a[1].norm() - 1.0).abs() < 1e-12);
        let p = DetectionChannel::new(linalg::RMat::from_row_slice(
            3,
            3,
            &[1.0, 0.0, 0.3, 0.0, 1.0, 0.3, 0.0, 0.0, 0.4],
        ))
        .unwrap();
        let m = povm_from_detection(&p, &ProjectiveMeasurement::computational(3), &linalg::identity(3)).unwrap();
        let (pair, c) = optimal_zeta_search(&m).unwrap();
        assert!(c < 1e-12);
        assert!((pair.zeta().amplitudes()[0].norm() - 1.0).abs() < 1e-12);
        assert!((pair.zeta_perp().amplitudes()[1].norm() - 1.0).abs() < 1e-12);
        let (_, c) = optimal_zeta_search(&computational_povm(0.5, 0.5)).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        let noncommuting = Povm::new(vec![
            linalg::projector(&linalg::basis(2, 0)).scale(0.5),
            linalg::projector(&linalg::basis(2, 1)).scale(0.5),
            linalg::projector(&linalg::hadamard().column(0).into_owned()).scale(0.5),
            linalg::projector(&linalg::hadamard().column(1).into_owned()).scale(0.5),
        ])
        .unwrap();
        assert!(matches!(optimal_zeta_search(&noncommuting), Err(MetroqError::Unsupported(_))));
    }

    #[test]
    fn cat_scan_symmetry_and_limits() {
        let grid: Vec<f64> = (0..=40).map(|k| k as f64 * std::f64::consts::FRAC_PI_2 / 40.0).collect();
        for noise in [BitFlip::new(0.9, 0.9).unwrap(), bf()] {
            let (_, _, vals) = cat_state_scan(6, noise, &grid).unwrap();
            for k in 0..=40 {
                assert!((vals[k] - vals[40 - k]).abs() < 1e-12);
            }
            assert!(vals[20].abs() < 1e-12);
        }
        let (_, _, vals) = cat_state_scan(5, BitFlip::new(0.5, 0.5).unwrap(), &grid).unwrap();
        assert!(vals.iter().all(|v| v.abs() < 1e-12));
        // With disjoint signal distributions the overlap reduces to sin 2t.
        let (t, _, vals) = cat_state_scan(400, bf(), &grid).unwrap();
        for (v, g) in vals.iter().zip(&grid) {
            assert!((v - (1.0 - (2.0 * g).sin())).abs() < 1e-6);
        }
        assert!(t == 0.0 || t == grid[40]);
    }
}
