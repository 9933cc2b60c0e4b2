//! Randomised checks of measurement construction and conjugate maps.

mod common;

use metroq::linalg::{self, CMat};
use metroq::qcore::{
    conjugate_elements, conjugate_map_compact, conjugate_map_qc, outcome_distribution_pure, povm_from_detection,
    tensor_povm, DEFAULT_TENSOR_CAP,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(common::config(256, 0x7101))]

    #[test]
    fn detection_povms_are_psd_and_complete(seed in any::<u64>(), d in 2usize..=4, nx in 1usize..=6) {
        let mut rng = common::rng(seed);
        let p = common::random_stochastic(nx, d, &mut rng);
        let pi = common::random_basis_measurement(d, &mut rng);
        let v = linalg::random_unitary(d, &mut rng);
        let m = povm_from_detection(&p, &pi, &v).unwrap();
        let mut total = CMat::zeros(d, d);
        for e in m.elements() {
            prop_assert!(linalg::eigvalsh(e)[0] > -1e-12);
            total += e;
        }
        prop_assert!(linalg::max_abs_diff(&total, &linalg::identity(d)) < 1e-10);
    }

    #[test]
    fn conjugate_maps_reproduce_the_povm(seed in any::<u64>(), d in 2usize..=3, nx in 2usize..=5) {
        let mut rng = common::rng(seed);
        let m = common::random_povm(d, nx, &mut rng);
        for k in [conjugate_map_qc(&m).unwrap(), conjugate_map_compact(&m).unwrap()] {
            for (got, want) in conjugate_elements(&k).iter().zip(m.elements()) {
                prop_assert!(linalg::max_abs_diff(got, want) < 1e-10);
            }
        }
    }

    #[test]
    fn tensor_distribution_factorises(seed in any::<u64>(), d in 2usize..=3, nx in 2usize..=4) {
        let mut rng = common::rng(seed);
        let m = common::random_povm(d, nx, &mut rng);
        let a = common::random_state(d, &mut rng);
        let b = common::random_state(d, &mut rng);
        let joint = outcome_distribution_pure(&linalg::kron_vec(&a, &b), &tensor_povm(&m, 2, DEFAULT_TENSOR_CAP).unwrap()).unwrap();
        let pa = outcome_distribution_pure(&a, &m).unwrap();
        let pb = outcome_distribution_pure(&b, &m).unwrap();
        for (x1, u) in pa.iter().enumerate() {
            for (x2, w) in pb.iter().enumerate() {
                prop_assert!((joint[x1 * nx + x2] - u * w).abs() < 1e-12);
            }
        }
    }
}
