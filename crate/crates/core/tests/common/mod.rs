//! Random model generators shared by the property suites.
#![allow(dead_code)]

use metroq::linalg::{self, c, CMat, CVec, RMat};
use metroq::qcore::{DetectionChannel, KrausSet, Povm, ProjectiveMeasurement};
use proptest::test_runner::{Config, RngSeed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// Fixed-seed configuration so every run replays the same cases.
pub fn config(cases: u32, seed: u64) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Column-stochastic `outcomes × inputs` matrix with exponential weights.
pub fn random_stochastic(outcomes: usize, inputs: usize, rng: &mut ChaCha8Rng) -> DetectionChannel {
    let mut m = RMat::zeros(outcomes, inputs);
    for i in 0..inputs {
        let w: Vec<f64> = (0..outcomes).map(|_| Exp1.sample(rng)).collect();
        let s: f64 = w.iter().sum();
        for (x, v) in w.iter().enumerate() {
            m[(x, i)] = v / s;
        }
    }
    DetectionChannel::new(m).expect("normalised columns")
}

pub fn random_basis_measurement(d: usize, rng: &mut ChaCha8Rng) -> ProjectiveMeasurement {
    ProjectiveMeasurement::from_basis(&linalg::random_unitary(d, rng)).expect("unitary basis")
}

fn random_complex(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let (a, b): (f64, f64) = (StandardNormal.sample(rng), StandardNormal.sample(rng));
        c(a, b)
    })
}

/// Full-rank POVM `S^{-1/2} G_x G_x† S^{-1/2}` with `S = Σ_x G_x G_x†`.
pub fn random_povm(d: usize, outcomes: usize, rng: &mut ChaCha8Rng) -> Povm {
    let raw: Vec<CMat> = (0..outcomes)
        .map(|_| {
            let g = random_complex(d, d, rng);
            &g * g.adjoint()
        })
        .collect();
    let s = raw.iter().fold(CMat::zeros(d, d), |acc, a| acc + a);
    let inv_sqrt = linalg::herm_fn(&s, |w| 1.0 / w.sqrt());
    Povm::new(raw.iter().map(|a| linalg::hermitian_part(&(&inv_sqrt * a * &inv_sqrt))).collect()).expect("valid POVM")
}

/// Channel with `k` Kraus operators cut from a random isometry.
pub fn random_channel(d: usize, k: usize, rng: &mut ChaCha8Rng) -> KrausSet {
    let u = linalg::random_unitary(d * k, rng);
    let ops = (0..k).map(|j| u.view((j * d, 0), (d, d)).into_owned()).collect();
    KrausSet::new(ops).expect("isometry blocks")
}

pub fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = random_complex(d, d, rng);
    linalg::hermitian_part(&g)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub fn random_state(d: usize, rng: &mut ChaCha8Rng) -> CVec {
    linalg::random_state(d, rng)
}
