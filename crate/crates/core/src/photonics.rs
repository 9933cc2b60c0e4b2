//! Two-mode `N`-photon interferometry read out by lossy photodetectors with
//! dark counts.
//!
//! Fock states `|j, N−j⟩` are labelled by `j`, the number of photons in the
//! first mode. Detection maps `j` to a pair of registered counts `(x₁, x₂)`.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{MetroqError, Result};
use crate::linalg::RMat;
use crate::optim;
use crate::qcore::DetectionChannel;

/// Real superposition `Σ_j a_j |j, N−j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeSector {
    amps: Vec<f64>,
}

impl TwoModeSector {
    pub fn new(amps: Vec<f64>) -> Result<Self> {
        if amps.is_empty() || amps.iter().any(|a| !a.is_finite()) {
            return Err(MetroqError::InvalidState("amplitudes must be finite and nonempty".into()));
        }
        let norm: f64 = amps.iter().map(|a| a * a).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(MetroqError::InvalidState(format!("squared norm {norm} differs from 1")));
        }
        Ok(Self { amps })
    }

    /// `sin φ |N,0⟩ + cos φ |0,N⟩` and its orthogonal partner
    /// `cos φ |N,0⟩ − sin φ |0,N⟩`.
    pub fn noon_pair(n: usize, varphi: f64) -> Result<(Self, Self)> {
        if n == 0 {
            return Err(MetroqError::InvalidParameter("N must be at least 1".into()));
        }
        let (s, c) = varphi.sin_cos();
        let mut xi = vec![0.0; n + 1];
        let mut perp = vec![0.0; n + 1];
        xi[n] = s;
        xi[0] = c;
        perp[n] = c;
        perp[0] = -s;
        Ok((Self::new(xi)?, Self::new(perp)?))
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn n(&self) -> usize {
        self.amps.len() - 1
    }
}

/// Sparse conditional distribution `p(x₁, x₂ | j, N−j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountChannel {
    n: usize,
    rows: Vec<BTreeMap<(usize, usize), f64>>,
}

impl CountChannel {
    fn from_rows(n: usize, rows: Vec<BTreeMap<(usize, usize), f64>>) -> Result<Self> {
        let ch = Self { n, rows };
        let err = ch.stochasticity_error();
        if err > 1e-10 {
            return Err(MetroqError::NotStochastic(format!("row sums deviate from 1 by {err:e}")));
        }
        Ok(ch)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Probability of counts `(x₁, x₂)` given `j` photons in the first mode.
    pub fn prob(&self, x1: usize, x2: usize, j: usize) -> f64 {
        self.rows.get(j).and_then(|r| r.get(&(x1, x2))).copied().unwrap_or(0.0)
    }

    /// Nonzero entries of the row for input `j`, in key order.
    pub fn row(&self, j: usize) -> &BTreeMap<(usize, usize), f64> {
        &self.rows[j]
    }

    /// Union of all count pairs with nonzero probability.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut keys: Vec<(usize, usize)> = self.rows.iter().flat_map(|r| r.keys().copied()).collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }

    /// Largest deviation of a row sum from one.
    pub fn stochasticity_error(&self) -> f64 {
        self.rows.iter().map(|r| (r.values().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(MetroqError::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// `Binom(x; k, r)` for `x = 0..=k`.
fn binomial_pmf(k: usize, r: f64) -> Vec<f64> {
    // Log-space weights stay finite for large k.
    let mut out = vec![0.0; k + 1];
    if r <= 0.0 {
        out[0] = 1.0;
        return out;
    }
    if r >= 1.0 {
        out[k] = 1.0;
        return out;
    }
    let ln = |x: usize| -> f64 {
        let lc = statrs::function::factorial::ln_binomial(k as u64, x as u64);
        lc + x as f64 * r.ln() + (k - x) as f64 * (1.0 - r).ln()
    };
    for (x, o) in out.iter_mut().enumerate() {
        *o = ln(x).exp();
    }
    out
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (k, bk) in b.iter().enumerate() {
            out[i + k] += ai * bk;
        }
    }
    out
}

fn product_rows(n: usize, arm1: impl Fn(usize) -> Vec<f64>, arm2: impl Fn(usize) -> Vec<f64>) -> Vec<BTreeMap<(usize, usize), f64>> {
    (0..=n)
        .map(|j| {
            let a = arm1(j);
            let b = arm2(n - j);
            let mut row = BTreeMap::new();
            for (x1, pa) in a.iter().enumerate() {
                for (x2, pb) in b.iter().enumerate() {
                    let v = pa * pb;
                    if v > 0.0 {
                        row.insert((x1, x2), v);
                    }
                }
            }
            row
        })
        .collect()
}

/// Independent loss in each arm, each photon surviving with probability `η`.
pub fn loss_channel(eta: f64, n: usize) -> Result<CountChannel> {
    check_rate("η", eta)?;
    CountChannel::from_rows(n, product_rows(n, |k| binomial_pmf(k, eta), |k| binomial_pmf(k, eta)))
}

/// Added dark counts, at most one per detector per photon, independent of `j`.
pub fn dark_channel(p_dark: f64, n: usize) -> Result<CountChannel> {
    check_rate("dark-count rate", p_dark)?;
    let d = binomial_pmf(n, p_dark);
    CountChannel::from_rows(n, product_rows(n, |_| d.clone(), |_| d.clone()))
}

/// Loss followed by dark counts, convolved in each arm.
pub fn compose_loss_dark(eta: f64, p_dark: f64, n: usize) -> Result<CountChannel> {
    check_rate("η", eta)?;
    check_rate("dark-count rate", p_dark)?;
    let d = binomial_pmf(n, p_dark);
    let arm = |k: usize| convolve(&binomial_pmf(k, eta), &d);
    CountChannel::from_rows(n, product_rows(n, arm, arm))
}

/// `Σ_x Re⟨ξ⊥|M_x|ξ⟩² / ⟨ξ|M_x|ξ⟩` for the diagonal count POVM, skipping
/// outcomes that `ξ` never produces.
pub fn gamma_for_pair(ch: &CountChannel, xi: &TwoModeSector, xi_perp: &TwoModeSector) -> Result<f64> {
    if xi.n() != ch.n || xi_perp.n() != ch.n {
        return Err(MetroqError::DimensionMismatch("sector and channel photon numbers differ".into()));
    }
    let overlap: f64 = xi.amps.iter().zip(&xi_perp.amps).map(|(a, b)| a * b).sum();
    if overlap.abs() > 1e-10 {
        return Err(MetroqError::InvalidState(format!("pair overlap {overlap} is not zero")));
    }
    let mut total = 0.0;
    for key in ch.support() {
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..=ch.n {
            let p = ch.prob(key.0, key.1, j);
            num += p * xi.amps[j] * xi_perp.amps[j];
            den += p * xi.amps[j] * xi.amps[j];
        }
        if den > 1e-300 {
            total += num * num / den;
        }
    }
    Ok(total)
}

/// γ of `N` photons detected by lossy, dark-count-afflicted detectors,
/// evaluated on the N00N-sector pair of [`TwoModeSector::noon_pair`].
///
/// Where `sin φ` or `cos φ` vanishes the pair degenerates; the returned
/// value is then the limit approached from generic angles.
pub fn gamma_photonic(eta: f64, p_dark: f64, n: usize, varphi: f64) -> Result<f64> {
    if n == 0 {
        return Err(MetroqError::InvalidParameter("N must be at least 1".into()));
    }
    Ok(noon_sector_gamma(&compose_loss_dark(eta, p_dark, n)?, varphi))
}

fn noon_sector_gamma(ch: &CountChannel, varphi: f64) -> f64 {
    let n = ch.n;
    let (s2, c2) = (varphi.sin().powi(2), varphi.cos().powi(2));
    let mut keys: Vec<&(usize, usize)> = ch.rows[n].keys().chain(ch.rows[0].keys()).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut total = 0.0;
    for key in keys {
        let a = ch.prob(key.0, key.1, n);
        let b = ch.prob(key.0, key.1, 0);
        total += if s2 < 1e-30 {
            if b == 0.0 { a } else { 0.0 }
        } else if c2 < 1e-30 {
            if a == 0.0 { b } else { 0.0 }
        } else {
            let den = s2 * a + c2 * b;
            if den > 0.0 { s2 * c2 * (a - b).powi(2) / den } else { 0.0 }
        };
    }
    total
}

/// Angle in `(0, π/2)` maximising [`gamma_photonic`], and the maximum.
pub fn optimal_gamma_photonic(eta: f64, p_dark: f64, n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(MetroqError::InvalidParameter("N must be at least 1".into()));
    }
    let ch = compose_loss_dark(eta, p_dark, n)?;
    let f = |phi: f64| noon_sector_gamma(&ch, phi);
    let h = std::f64::consts::FRAC_PI_2;
    Ok(optim::maximize_1d(&f, 1e-6, h - 1e-6, 181, 1e-10))
}

/// Classical FI of a N00N probe under global control with pure loss,
/// `N²[1 − (1−η)^N]`.
pub fn noon_fi(n: usize, eta: f64) -> Result<f64> {
    check_rate("η", eta)?;
    let nf = n as f64;
    Ok(nf * nf * (1.0 - (1.0 - eta).powi(n as i32)))
}

/// Six-outcome detection channel of one dual-rail photon, to first order in
/// the dark-count rate. Outcome rows are the count pairs
/// `(2,0), (0,2), (1,1), (0,0), (1,0), (0,1)`; input columns are the photon
/// in the first and in the second mode.
pub fn single_photon_channel(eta: f64, p_dark: f64) -> Result<DetectionChannel> {
    check_rate("η", eta)?;
    check_rate("dark-count rate", p_dark)?;
    let pe = p_dark * eta;
    let none = 1.0 - 2.0 * p_dark - eta + 2.0 * pe;
    let hit = p_dark + eta - 3.0 * pe;
    let miss = p_dark - pe;
    let entries = [pe, 0.0, 0.0, pe, pe, pe, none, none, hit, miss, miss, hit];
    if entries.iter().any(|v| *v < 0.0) {
        return Err(MetroqError::InvalidParameter(format!(
            "dark-count rate {p_dark} too large for a first-order model at η = {eta}"
        )));
    }
    DetectionChannel::new(RMat::from_row_slice(6, 2, &entries))
}

/// Count pairs labelling the rows of [`single_photon_channel`].
pub const SINGLE_PHOTON_OUTCOMES: [(usize, usize); 6] = [(2, 0), (0, 2), (1, 1), (0, 0), (1, 0), (0, 1)];

/// Comparison of the N00N-sector pair with random real orthogonal pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzCheck {
    pub ansatz: f64,
    pub best_random: f64,
    pub samples: usize,
}

/// Samples random orthogonal pairs and polishes the best few by local
/// search, reporting the best value next to the optimised ansatz.
pub fn ansatz_check(eta: f64, p_dark: f64, n: usize, samples: usize, seed: u64) -> Result<AnsatzCheck> {
    if n > 6 {
        return Err(MetroqError::CapExceeded { required: n, cap: 6 });
    }
    let ch = compose_loss_dark(eta, p_dark, n)?;
    let ansatz = optimal_gamma_photonic(eta, p_dark, n)?.1;
    let dim = n + 1;
    let objective = |x: &[f64]| -> f64 {
        let (a, b) = x.split_at(dim);
        let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if na < 1e-12 {
            return 0.0;
        }
        let a: Vec<f64> = a.iter().map(|v| v / na).collect();
        let ov: f64 = a.iter().zip(b).map(|(u, v)| u * v).sum();
        let b: Vec<f64> = b.iter().zip(&a).map(|(v, u)| v - ov * u).collect();
        let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nb < 1e-12 {
            return 0.0;
        }
        let b: Vec<f64> = b.iter().map(|v| v / nb).collect();
        match (TwoModeSector::new(a), TwoModeSector::new(b)) {
            (Ok(xa), Ok(xb)) => -gamma_for_pair(&ch, &xa, &xb).unwrap_or(0.0),
            _ => 0.0,
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<(f64, Vec<f64>)> = (0..samples.max(1))
        .map(|_| {
            let x: Vec<f64> = (0..2 * dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            (objective(&x), x)
        })
        .collect();
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let best_random = starts
        .iter()
        .take(4)
        .map(|(_, x)| -optim::nelder_mead(&objective, x, 0.2, 4000, 1e-12).f)
        .fold(0.0, f64::max);
    Ok(AnsatzCheck { ansatz, best_random, samples: samples.max(1) })
}
