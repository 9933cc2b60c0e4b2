//! Randomised checks of γ, the single-probe factorisation and the moment
//! hierarchy.

mod common;

use metroq::fisher::{self, classical_fi, gamma_coefficient, imperfect_fi, moment_lower_bound, qfi_pure, GammaConfig};
use metroq::linalg::{self, CMat, I};
use metroq::qcore::{povm_from_detection, povm_with_ancilla, tensor_povm, StateVector, DEFAULT_TENSOR_CAP};
use metroq::readout::{self, PoissonReadout};
use proptest::prelude::*;

fn gamma(m: &metroq::qcore::Povm, cfg: &GammaConfig) -> (f64, StateVector) {
    let (report, pair) = gamma_coefficient(m, cfg).unwrap();
    (report.value, pair.xi().clone())
}

proptest! {
    #![proptest_config(common::config(200, 0x7201))]

    #[test]
    fn gamma_lies_in_unit_interval(seed in any::<u64>(), d in 2usize..=4, nx in 1usize..=6) {
        let mut rng = common::rng(seed);
        let m = common::random_povm(d, nx, &mut rng);
        let (g, _) = gamma(&m, &GammaConfig { restarts: 8, ..GammaConfig::default() });
        prop_assert!((-1e-12..=1.0 + 1e-9).contains(&g), "γ = {g}");
    }

    #[test]
    fn gamma_obeys_data_processing(seed in any::<u64>(), d in 2usize..=3, nx in 2usize..=4, ny in 1usize..=4) {
        let mut rng = common::rng(seed);
        let p1 = common::random_stochastic(nx, d, &mut rng);
        let p2 = common::random_stochastic(ny, nx, &mut rng);
        let pi = common::random_basis_measurement(d, &mut rng);
        let id = linalg::identity(d);
        let fine = povm_from_detection(&p1, &pi, &id).unwrap();
        let coarse = povm_from_detection(&p1.then(&p2).unwrap(), &pi, &id).unwrap();
        let cfg = GammaConfig::default();
        let (g_fine, _) = gamma(&fine, &cfg);
        let (g_coarse, _) = gamma(&coarse, &cfg);
        prop_assert!(g_coarse <= g_fine + 1e-6, "{g_coarse} > {g_fine}");
    }

    #[test]
    fn gamma_grows_with_probes(seed in any::<u64>(), nx in 2usize..=3) {
        let mut rng = common::rng(seed);
        let m = common::random_povm(2, nx, &mut rng);
        let cfg = GammaConfig::default();
        let (g1, xi) = gamma(&m, &cfg);
        let anc = povm_with_ancilla(&m, 2);
        let seed_state = linalg::kron_vec(xi.amplitudes(), &linalg::basis(2, 0));
        let (g_anc, _) = gamma(&anc, &GammaConfig { restarts: 8, seed_states: vec![seed_state.clone()], ..cfg.clone() });
        let two = tensor_povm(&m, 2, DEFAULT_TENSOR_CAP).unwrap();
        let (g2, _) = gamma(&two, &GammaConfig { restarts: 8, seed_states: vec![seed_state], ..cfg });
        prop_assert!(g1 <= g_anc + 1e-6, "{g1} > {g_anc}");
        prop_assert!(g_anc <= g2 + 1e-6, "{g_anc} > {g2}");
    }

    #[test]
    fn single_probe_fi_factorises(seed in any::<u64>(), nx in 2usize..=4) {
        let mut rng = common::rng(seed);
        let m = common::random_povm(2, nx, &mut rng);
        let psi = StateVector::new(common::random_state(2, &mut rng)).unwrap();
        let h = common::random_hermitian(2, &mut rng);
        let dpsi = (&h * psi.amplitudes()).map(|z| -z * I);
        let qfi = qfi_pure(&psi, &dpsi).unwrap();
        prop_assume!(qfi > 1e-3);
        let (report, pair) = gamma_coefficient(&m, &GammaConfig::default()).unwrap();
        // Control mapping ψ to ξ and the normalised orthogonal derivative to ξ⊥.
        let a = psi.amplitudes();
        let perp = &dpsi - a * a.dotc(&dpsi);
        let u = perp.unscale(perp.norm());
        let v: CMat = linalg::outer(pair.xi().amplitudes(), a) + linalg::outer(pair.xi_perp().amplitudes(), &u);
        let attained = imperfect_fi(&psi, &dpsi, &m, &v).unwrap();
        prop_assert!((attained - report.value * qfi).abs() < 1e-6 * qfi.max(1.0), "{attained} vs {}", report.value * qfi);
        let other = linalg::random_unitary(2, &mut rng);
        prop_assert!(imperfect_fi(&psi, &dpsi, &m, &other).unwrap() <= report.value * qfi + 1e-6);
    }

    #[test]
    fn two_outcome_gamma_matches_closed_form(p in 0.51f64..0.999, q in 0.51f64..0.999) {
        let m = metroq::covariance::bit_flip_povm(p, q).unwrap();
        let (g, _) = gamma(&m, &GammaConfig::default());
        let closed = readout::f2bin_bar(p, q).unwrap().0;
        prop_assert!((g - closed).abs() < 1e-6, "{g} vs {closed}");
    }

    #[test]
    fn moment_bounds_form_a_hierarchy(lambda0 in 5.0f64..60.0, ratio in 0.3f64..0.9, phi in -1.2f64..1.2) {
        let r = PoissonReadout::new(lambda0, ratio * lambda0, 200).unwrap();
        let (c0, c1) = r.columns();
        let (probs, dprobs) = readout::binary_input_distribution(&c0, &c1, phi);
        let w: Vec<f64> = (0..probs.len()).map(|x| x as f64).collect();
        let full = classical_fi(&probs, &dprobs).unwrap();
        let bounds: Vec<f64> = (1..=4).map(|k| moment_lower_bound(&probs, &dprobs, k, &w).unwrap().value).collect();
        for k in 0..3 {
            prop_assert!(bounds[k] <= bounds[k + 1] * (1.0 + 1e-9) + 1e-12, "K={}: {} > {}", k + 1, bounds[k], bounds[k + 1]);
        }
        prop_assert!(bounds[3] <= full * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn binning_never_adds_information(lambda0 in 5.0f64..60.0, ratio in 0.3f64..0.9, phi in -1.2f64..1.2, cut in 0.2f64..1.0) {
        let r = PoissonReadout::new(lambda0, ratio * lambda0, 200).unwrap();
        let (c0, c1) = r.columns();
        let x_star = (cut * lambda0) as usize;
        let (p, q) = readout::two_bin_pq(&r, x_star);
        let full = readout::binary_input_fi(&c0, &c1, phi);
        let binned = readout::binary_input_fi(&[1.0 - p, p], &[q, 1.0 - q], phi);
        prop_assert!(binned <= full + 1e-9);
    }
}

#[test]
fn lemma_helpers_are_consistent() {
    // Sanity link between the pair objective and the optimiser output.
    let m = metroq::covariance::bit_flip_povm(0.95, 0.9).unwrap();
    let (report, pair) = gamma_coefficient(&m, &GammaConfig::default()).unwrap();
    let direct = fisher::gamma_pair_objective(&m, pair.xi().amplitudes(), pair.xi_perp().amplitudes());
    assert!((direct - report.value).abs() < 1e-12);
}
