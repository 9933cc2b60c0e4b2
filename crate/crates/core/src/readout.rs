//! Poissonian fluorescence readout of a spin qubit and threshold (binning)
//! strategies.
//!
//! Column 0 of every channel belongs to the bright state `|0⟩` with mean
//! count `lambda0`, column 1 to the dim state `|1⟩`.

use statrs::distribution::{Discrete, DiscreteCDF, Poisson};
use std::f64::consts::FRAC_PI_2;

use crate::error::{MetroqError, Result};
use crate::linalg::RMat;
use crate::optim;
use crate::qcore::DetectionChannel;

/// Tail mass beyond the cutoff that may be dropped by renormalisation.
pub const TAIL_TOL: f64 = 1e-10;

/// Largest number of bins handled by the exhaustive boundary search.
pub const MAX_BINS: usize = 4;

/// Two Poisson count distributions truncated at `cutoff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonReadout {
    lambda0: f64,
    lambda1: f64,
    cutoff: usize,
}

impl PoissonReadout {
    pub fn new(lambda0: f64, lambda1: f64, cutoff: usize) -> Result<Self> {
        Self::with_tail_tol(lambda0, lambda1, cutoff, TAIL_TOL)
    }

    /// As [`PoissonReadout::new`] with an explicit bound on the discarded tail mass.
    pub fn with_tail_tol(lambda0: f64, lambda1: f64, cutoff: usize, tail_tol: f64) -> Result<Self> {
        if !(lambda0 > 0.0 && lambda1 > 0.0 && lambda0.is_finite() && lambda1.is_finite()) {
            return Err(MetroqError::InvalidParameter(format!("Poisson means {lambda0}, {lambda1} must be positive")));
        }
        let tail = poisson_tail(lambda0, cutoff).max(poisson_tail(lambda1, cutoff));
        if tail > tail_tol {
            return Err(MetroqError::TailMass { tail, tol: tail_tol });
        }
        Ok(Self { lambda0, lambda1, cutoff })
    }

    /// Cutoff of 100 counts.
    pub fn with_default_cutoff(lambda0: f64, lambda1: f64) -> Result<Self> {
        Self::new(lambda0, lambda1, 100)
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Renormalised truncated count distributions for `|0⟩` and `|1⟩`.
    pub fn columns(&self) -> (Vec<f64>, Vec<f64>) {
        (truncated_pmf(self.lambda0, self.cutoff), truncated_pmf(self.lambda1, self.cutoff))
    }

    /// Count at which the two untruncated distributions cross.
    pub fn crossing_point(&self) -> f64 {
        (self.lambda0 - self.lambda1) / (self.lambda0 / self.lambda1).ln()
    }
}

fn poisson_tail(lambda: f64, cutoff: usize) -> f64 {
    Poisson::new(lambda).map(|p| p.sf(cutoff as u64)).unwrap_or(1.0)
}

fn truncated_pmf(lambda: f64, cutoff: usize) -> Vec<f64> {
    let dist = Poisson::new(lambda).expect("validated mean");
    let v: Vec<f64> = (0..=cutoff as u64).map(|x| dist.pmf(x)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|p| p / s).collect()
}

/// Strictly increasing bin boundaries; bin `j` collects counts in
/// `(b_{j-1}, b_j]` with `b_{-1} = -1` and the last bin open-ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinningScheme {
    boundaries: Vec<usize>,
}

impl BinningScheme {
    pub fn new(boundaries: Vec<usize>) -> Result<Self> {
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MetroqError::InvalidParameter("bin boundaries must be strictly increasing".into()));
        }
        Ok(Self { boundaries })
    }

    /// Threshold scheme `{0..=x_star}`, `{x_star+1..}`.
    pub fn threshold(x_star: usize) -> Self {
        Self { boundaries: vec![x_star] }
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn num_bins(&self) -> usize {
        self.boundaries.len() + 1
    }

    fn bin_of(&self, x: usize) -> usize {
        self.boundaries.partition_point(|&b| b < x)
    }
}

/// `(cutoff+1) × 2` count channel.
pub fn poisson_detection_channel(r: &PoissonReadout) -> Result<DetectionChannel> {
    let (c0, c1) = r.columns();
    let n = c0.len();
    let mut m = RMat::zeros(n, 2);
    for x in 0..n {
        m[(x, 0)] = c0[x];
        m[(x, 1)] = c1[x];
    }
    DetectionChannel::new(m)
}

/// Sums the rows of `P` falling in each bin.
pub fn bin_channel(p: &DetectionChannel, scheme: &BinningScheme) -> Result<DetectionChannel> {
    let nx = p.num_outcomes();
    if scheme.boundaries().last().is_some_and(|&b| b + 1 >= nx) {
        return Err(MetroqError::InvalidParameter(format!("bin boundary beyond the last outcome {}", nx - 1)));
    }
    let k = scheme.num_bins();
    let mut m = RMat::zeros(k, p.num_inputs());
    for x in 0..nx {
        let b = scheme.bin_of(x);
        for i in 0..p.num_inputs() {
            m[(b, i)] += p.prob(x, i);
        }
    }
    DetectionChannel::with_tol(m, &crate::tol::Tolerances { stochastic: 1e-10, ..Default::default() })
}

/// Threshold parameters `(p, q)`: `p` is the probability that `|0⟩` lands
/// above the threshold, `q` that `|1⟩` lands at or below it.
pub fn two_bin_pq(r: &PoissonReadout, x_star: usize) -> (f64, f64) {
    let (c0, c1) = r.columns();
    let p: f64 = c0[x_star + 1..].iter().sum();
    let q: f64 = c1[..=x_star].iter().sum();
    (p.clamp(0.0, 1.0), q.clamp(0.0, 1.0))
}

/// FI of a qubit on the equator measured in `|±⟩` whose outcomes pass
/// through a two-input channel with columns `p1`, `p2`, at relative angle φ.
pub fn binary_input_fi(p1: &[f64], p2: &[f64], varphi: f64) -> f64 {
    let (s, c2) = (varphi.sin(), varphi.cos().powi(2));
    p1.iter()
        .zip(p2)
        .map(|(a, b)| {
            let den = a + b + (a - b) * s;
            if den <= 1e-300 {
                0.0
            } else {
                0.5 * (a - b).powi(2) * c2 / den
            }
        })
        .sum()
}

/// Outcome distribution and its derivative for the same model.
pub fn binary_input_distribution(p1: &[f64], p2: &[f64], varphi: f64) -> (Vec<f64>, Vec<f64>) {
    let (s, c) = (varphi.sin(), varphi.cos());
    let q = p1.iter().zip(p2).map(|(a, b)| 0.5 * (1.0 + s) * a + 0.5 * (1.0 - s) * b).collect();
    let dq = p1.iter().zip(p2).map(|(a, b)| 0.5 * c * (a - b)).collect();
    (q, dq)
}

/// Exact single-shot FI of the Poissonian readout summed to the cutoff.
pub fn nv_exact_fi(r: &PoissonReadout, varphi: f64) -> f64 {
    let (c0, c1) = r.columns();
    binary_input_fi(&c0, &c1, varphi)
}

/// `max_φ` of [`binary_input_fi`] with the maximising angle.
pub fn max_over_angle(p1: &[f64], p2: &[f64]) -> (f64, f64) {
    let f = |phi: f64| binary_input_fi(p1, p2, phi);
    let (phi, v) = optim::maximize_1d(&f, -FRAC_PI_2, FRAC_PI_2, 65, 1e-10);
    (v, phi)
}

/// `max_φ` of [`nv_exact_fi`], returning `(value, φ)`.
pub fn nv_exact_fi_bar(r: &PoissonReadout) -> (f64, f64) {
    let (c0, c1) = r.columns();
    max_over_angle(&c0, &c1)
}

/// Two-outcome FI `η² cos²φ / (1 − (δ + η sin φ)²)`.
pub fn f2bin_star(eta: f64, delta: f64, varphi: f64) -> Result<f64> {
    if eta.abs() + delta.abs() > 1.0 + 1e-12 {
        return Err(MetroqError::InvalidParameter(format!("|η| + |δ| = {} exceeds 1", eta.abs() + delta.abs())));
    }
    let den = 1.0 - (delta + eta * varphi.sin()).powi(2);
    if den < 1e-14 {
        return Err(MetroqError::Degenerate(format!("denominator {den:e} vanishes")));
    }
    Ok(eta * eta * varphi.cos().powi(2) / den)
}

/// Maximum over φ of the two-outcome FI with `sin φ_opt`.
pub fn f2bin_bar(p: f64, q: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(MetroqError::InvalidParameter(format!("probabilities ({p}, {q}) outside [0, 1]")));
    }
    let value = 1.0 - ((p * (1.0 - q)).sqrt() + (q * (1.0 - p)).sqrt()).powi(2);
    let (eta, delta) = (p + q - 1.0, p - q);
    let theta = if delta.abs() < 1e-15 || eta.abs() < 1e-15 {
        0.0
    } else {
        let a = 1.0 - delta * delta - eta * eta;
        let disc = (a * a - 4.0 * delta * delta * eta * eta).max(0.0);
        ((a - disc.sqrt()) / (2.0 * delta * eta)).clamp(-1.0, 1.0)
    };
    Ok((value.max(0.0), theta))
}

/// Best `k`-bin scheme by exhaustive search over boundaries, returning the
/// scheme and `max_φ` FI of the binned channel.
pub fn optimize_binning(r: &PoissonReadout, k: usize) -> Result<(BinningScheme, f64)> {
    if k < 2 {
        return Err(MetroqError::InvalidParameter("at least two bins are required".into()));
    }
    if k > MAX_BINS {
        return Err(MetroqError::CapExceeded { required: k, cap: MAX_BINS });
    }
    let (c0, c1) = r.columns();
    let n = c0.len();
    let cum = |c: &[f64]| {
        let mut s = vec![0.0; c.len() + 1];
        for (x, v) in c.iter().enumerate() {
            s[x + 1] = s[x] + v;
        }
        s
    };
    let (s0, s1) = (cum(&c0), cum(&c1));
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut bounds: Vec<usize> = (0..k - 1).collect();
    loop {
        let mut p1 = Vec::with_capacity(k);
        let mut p2 = Vec::with_capacity(k);
        let mut lo = 0;
        for &b in bounds.iter().chain(std::iter::once(&(n - 1))) {
            p1.push(s0[b + 1] - s0[lo]);
            p2.push(s1[b + 1] - s1[lo]);
            lo = b + 1;
        }
        let (v, _) = max_over_angle(&p1, &p2);
        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((bounds.clone(), v));
        }
        // Next strictly increasing tuple with entries below n - 1.
        let mut j = k - 1;
        loop {
            if j == 0 {
                let (b, v) = best.expect("at least one scheme evaluated");
                return Ok((BinningScheme { boundaries: b }, v));
            }
            j -= 1;
            if bounds[j] < n - 2 - (k - 2 - j) {
                bounds[j] += 1;
                for t in j + 1..k - 1 {
                    bounds[t] = bounds[t - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher;

    fn nv() -> PoissonReadout {
        PoissonReadout::with_default_cutoff(27.0, 27.0 * 0.65).unwrap()
    }

    #[test]
    fn channel_is_valid_and_cutoff_guarded() {
        let p = poisson_detection_channel(&nv()).unwrap();
        assert_eq!(p.num_outcomes(), 101);
        assert!(matches!(PoissonReadout::new(27.0, 17.55, 30), Err(MetroqError::TailMass { .. })));
        assert!(PoissonReadout::new(0.0, 1.0, 100).is_err());
    }

    #[test]
    fn exact_fi_matches_classical_fi() {
        let r = nv();
        let (c0, c1) = r.columns();
        for phi in [-1.2, -0.3, 0.0, 0.4, 1.1] {
            let (q, dq) = binary_input_distribution(&c0, &c1, phi);
            let cf = fisher::classical_fi(&q, &dq).unwrap();
            assert!((cf - nv_exact_fi(&r, phi)).abs() < 1e-12);
        }
        assert!(nv_exact_fi(&r, FRAC_PI_2).abs() < 1e-30);
        let same = PoissonReadout::with_default_cutoff(20.0, 20.0).unwrap();
        assert_eq!(nv_exact_fi(&same, 0.3), 0.0);
    }

    #[test]
    fn threshold_pq_by_tail_sums() {
        let r = nv();
        let (p, q) = two_bin_pq(&r, 22);
        let d0 = Poisson::new(27.0).unwrap();
        let d1 = Poisson::new(17.55).unwrap();
        let p_direct: f64 = (23..=400).map(|x| d0.pmf(x)).sum();
        let q_direct: f64 = (0..=22).map(|x| d1.pmf(x)).sum();
        assert!((p - p_direct).abs() < 1e-10 && (q - q_direct).abs() < 1e-10);
        let b = bin_channel(&poisson_detection_channel(&r).unwrap(), &BinningScheme::threshold(22)).unwrap();
        assert!((b.prob(1, 0) - p).abs() < 1e-12 && (b.prob(0, 1) - q).abs() < 1e-12);
    }

    #[test]
    fn trivial_binnings() {
        let p = DetectionChannel::new(RMat::from_row_slice(3, 2, &[0.5, 0.1, 0.3, 0.2, 0.2, 0.7])).unwrap();
        let unit = bin_channel(&p, &BinningScheme::new(vec![0, 1]).unwrap()).unwrap();
        assert_eq!(unit.matrix(), p.matrix());
        let one = bin_channel(&p, &BinningScheme::new(vec![]).unwrap()).unwrap();
        assert_eq!(one.num_outcomes(), 1);
        assert!(BinningScheme::new(vec![3, 3]).is_err());
    }

    #[test]
    fn f2bin_examples() {
        assert!((f2bin_star(0.8, 0.0, 0.0).unwrap() - 0.64).abs() < 1e-15);
        assert_eq!(f2bin_star(0.0, 0.1, 0.3).unwrap(), 0.0);
        let (p, q) = (0.95, 0.9);
        let (v, theta) = f2bin_bar(p, q).unwrap();
        assert!((v - 0.729233).abs() < 1e-6);
        let (eta, delta) = (p + q - 1.0, p - q);
        assert!((f2bin_star(eta, delta, theta.asin()).unwrap() - v).abs() < 1e-12);
        assert!((eta * (eta + delta * theta) - v).abs() < 1e-12);
        let (v, theta) = f2bin_bar(0.9, 0.9).unwrap();
        assert!((v - 0.64).abs() < 1e-12 && theta == 0.0);
        assert!((f2bin_bar(1.0, 1.0).unwrap().0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn f2bin_bar_is_the_angle_maximum() {
        for (p, q) in [(0.95, 0.9), (0.7, 0.99), (0.6, 0.8)] {
            let (eta, delta) = (p + q - 1.0, p - q);
            let f = |phi: f64| f2bin_star(eta, delta, phi).unwrap_or(0.0);
            let (_, vmax) = optim::maximize_1d(&f, -FRAC_PI_2, FRAC_PI_2, 201, 1e-12);
            assert!((vmax - f2bin_bar(p, q).unwrap().0).abs() < 1e-9);
        }
    }

    #[test]
    fn optimal_threshold_near_crossing() {
        let r = nv();
        let (scheme, v2) = optimize_binning(&r, 2).unwrap();
        let xs = scheme.boundaries()[0] as f64;
        assert!((xs - r.crossing_point()).abs() <= 2.0, "{xs} vs {}", r.crossing_point());
        let (p, q) = two_bin_pq(&r, scheme.boundaries()[0]);
        assert!((f2bin_bar(p, q).unwrap().0 - v2).abs() < 1e-8);
    }

    #[test]
    fn enumeration_covers_all_tuples() {
        let r = PoissonReadout::new(2.0, 1.0, 20).unwrap();
        let (_, v3) = optimize_binning(&r, 3).unwrap();
        let mut best: f64 = 0.0;
        for a in 0..20 {
            for b in a + 1..20 {
                let scheme = BinningScheme::new(vec![a, b]).unwrap();
                let ch = bin_channel(&poisson_detection_channel(&r).unwrap(), &scheme).unwrap();
                let col = |i: usize| (0..3).map(|x| ch.prob(x, i)).collect::<Vec<_>>();
                best = best.max(max_over_angle(&col(0), &col(1)).0);
            }
        }
        assert!((best - v3).abs() < 1e-12);
        assert!(matches!(optimize_binning(&r, 5), Err(MetroqError::CapExceeded { .. })));
    }
}
