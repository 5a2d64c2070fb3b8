//! Property tests over seeded random instances: the handful of algebraic
//! invariants that hold for every input, not just the frozen examples.

use proptest::prelude::*;

use gibbslab::circuit;
use gibbslab::dense::{self, DensityMatrix};
use gibbslab::hamiltonian;
use gibbslab::linalg;
use gibbslab::pauli::PauliString;

fn pauli_strategy(n: usize) -> impl Strategy<Value = PauliString> {
    (
        proptest::collection::vec(0u8..4, n),
        proptest::collection::vec(any::<bool>(), 0),
    )
        .prop_map(move |(digits, _)| {
            let qubits: Vec<usize> = (0..n).collect();
            PauliString::from_digits(n, &qubits, &digits)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pauli_product_matches_dense(p in pauli_strategy(3), q in pauli_strategy(3)) {
        let dense = p.to_matrix() * q.to_matrix();
        let sym = p.mul(&q).to_matrix();
        prop_assert!(linalg::max_abs(&(dense - sym)) < 1e-12);
    }

    #[test]
    fn partial_trace_order_independent(seed in 0u64..10_000) {
        let rho = dense::random_density(3, seed);
        let both = dense::partial_trace(&rho, &[1]).unwrap();
        let stepwise =
            dense::partial_trace(&dense::partial_trace(&rho, &[0, 1]).unwrap(), &[1]).unwrap();
        prop_assert!(linalg::max_abs(&(both.matrix() - stepwise.matrix())) < 1e-12);
    }

    #[test]
    fn pinsker_holds(seed_a in 0u64..5_000, seed_b in 5_000u64..10_000) {
        let a = dense::random_density(2, seed_a);
        let b = dense::random_density(2, seed_b);
        let d = dense::divergences(&a, &b).unwrap();
        // TD ≤ √(D/2) in nats
        prop_assert!(d.trace_distance <= (d.relative_entropy / 2.0).sqrt() + 1e-10);
    }

    #[test]
    fn trace_distance_triangle(sa in 0u64..3_000, sb in 3_000u64..6_000, sc in 6_000u64..9_000) {
        let a = dense::random_density(2, sa);
        let b = dense::random_density(2, sb);
        let c = dense::random_density(2, sc);
        let ab = dense::divergences(&a, &b).unwrap().trace_distance;
        let bc = dense::divergences(&b, &c).unwrap().trace_distance;
        let ac = dense::divergences(&a, &c).unwrap().trace_distance;
        prop_assert!(ac <= ab + bc + 1e-10);
    }

    #[test]
    fn z_support_within_lightcone(seed in 0u64..2_000, n in 2usize..6, depth in 1usize..4) {
        let c = circuit::random_circuit(n, depth, seed);
        let s = circuit::supports(&c).unwrap();
        for i in 0..n {
            prop_assert!(s.z_support[i].is_subset(&s.lightcone[i]));
        }
    }

    #[test]
    fn parent_spectrum_is_integer(seed in 0u64..1_000) {
        let c = circuit::random_circuit(3, 2, seed);
        let hp = hamiltonian::build_parent(&c).unwrap();
        let (vals, _) = linalg::eigh(&hp.dense_hamiltonian()).unwrap();
        for v in vals.iter() {
            prop_assert!((v - v.round()).abs() < 1e-8);
            prop_assert!(*v > -1e-8 && *v < 3.0 + 1e-8);
        }
    }

    #[test]
    fn gibbs_state_valid(seed in 0u64..1_000, beta in 0.0f64..3.0) {
        let c = circuit::random_circuit(3, 2, seed);
        let hp = hamiltonian::build_parent(&c).unwrap();
        let (rho, z) = hamiltonian::gibbs_state(&hp, beta).unwrap();
        prop_assert!((z - hamiltonian::partition_function_formula(3, beta)).abs() < 1e-10 * z);
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        let _ = DensityMatrix::new(rho.matrix().clone()).unwrap();
    }
}
