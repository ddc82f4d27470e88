use proptest::prelude::*;

use synthbath::lindblad::{build_liouvillian_matrix, liouvillian_action, solve_steady_state};
use synthbath::operator::{hermitian_eig, kron, partial_trace, DensityMatrix, Keep, Operator, C64};
use synthbath::scenarios::{build_engine, build_two_qutrit, EngineParams, TwoQutritParams};
use synthbath::thermo::{hot_energy_for_synthetic_beta, synthetic_beta, von_neumann_entropy};

fn operator(dim: usize) -> impl Strategy<Value = Operator> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim * dim).prop_map(move |v| {
        let entries: Vec<C64> = v.into_iter().map(|(re, im)| C64::new(re, im)).collect();
        Operator::from_row_major(dim, &entries).unwrap()
    })
}

fn hermitian(dim: usize) -> impl Strategy<Value = Operator> {
    operator(dim).prop_map(|a| a.hermitian_part())
}

/// `A A† / Tr(A A†)` with a small identity admixture to stay full rank.
fn density(dim: usize) -> impl Strategy<Value = DensityMatrix> {
    operator(dim).prop_map(move |a| {
        let psd = &a * &a.adjoint() + Operator::identity(dim).scale_real(1e-3);
        DensityMatrix::normalized(&psd).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_is_associative(a in operator(2), b in operator(2), c in operator(3)) {
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(left.max_abs_diff(&right) < 1e-14);
    }

    #[test]
    fn kron_trace_factorizes(a in operator(3), b in operator(2)) {
        let t = kron(&a, &b).trace();
        prop_assert!((t - a.trace() * b.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_undoes_kron(a in density(3), b in density(2)) {
        let ab = kron(a.op(), b.op());
        let left = partial_trace(&ab, (3, 2), Keep::Left).unwrap();
        let right = partial_trace(&ab, (3, 2), Keep::Right).unwrap();
        prop_assert!(left.max_abs_diff(a.op()) < 1e-12);
        prop_assert!(right.max_abs_diff(b.op()) < 1e-12);
    }

    #[test]
    fn trace_product_is_cyclic(a in operator(3), b in operator(3)) {
        prop_assert!((a.trace_product(&b) - b.trace_product(&a)).norm() < 1e-12);
        prop_assert!((a.trace_product(&b) - (&a * &b).trace()).norm() < 1e-12);
    }

    #[test]
    fn spectral_decomposition_is_faithful(h in hermitian(4)) {
        let eig = hermitian_eig(&h).unwrap();
        let sum: f64 = eig.eigenvalues.iter().sum();
        prop_assert!((sum - h.trace().re).abs() < 1e-12);
        prop_assert!(eig.reconstruct().max_abs_diff(&h) < 1e-9);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn entropy_is_bounded(rho in density(4)) {
        let s = von_neumann_entropy(&rho);
        prop_assert!(s >= 0.0);
        prop_assert!(s <= 4f64.ln() + 1e-12);
    }

    #[test]
    fn liouvillian_matrix_matches_action(
        bl in -0.04..0.04f64,
        br in -0.04..0.04f64,
        rho in density(9),
    ) {
        let spec = build_two_qutrit(&TwoQutritParams::with_synthetic_betas(bl, br).unwrap()).unwrap();
        let l = build_liouvillian_matrix(&spec);
        let v = nalgebra::DVector::from_vec(rho.op().vectorize());
        let via_matrix = Operator::from_vectorized(9, (l * v).as_slice()).unwrap();
        let direct = liouvillian_action(&spec, rho.op()).unwrap();
        let scale = direct.max_abs().max(1.0);
        prop_assert!(via_matrix.max_abs_diff(&direct) <= 1e-12 * scale);
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity(bsl in -2.0..-0.2f64, rho in density(6)) {
        let mut p = EngineParams::default();
        p.set("beta_sl", bsl).unwrap();
        let spec = build_engine(&p).unwrap();
        let d = liouvillian_action(&spec, rho.op()).unwrap();
        prop_assert!(d.trace().norm() < 1e-12);
        prop_assert!(d.hermiticity_error() < 1e-12);
    }

    #[test]
    fn synthetic_beta_round_trips(beta_s in -3.0..0.049f64, e_s in 1.0..20.0f64) {
        let e_h = hot_energy_for_synthetic_beta(beta_s, e_s, 0.05, 1.0).unwrap();
        let back = synthetic_beta(0.05, e_h, 1.0, e_h - e_s).unwrap();
        prop_assert!((back - beta_s).abs() < 1e-10 * (1.0 + beta_s.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn two_qutrit_steady_states_are_physical(bl in -0.04..0.04f64, br in -0.04..0.04f64) {
        let spec = build_two_qutrit(&TwoQutritParams::with_synthetic_betas(bl, br).unwrap()).unwrap();
        let ss = solve_steady_state(&spec).unwrap();
        prop_assert!(ss.residual <= 1e-9);
        prop_assert!((ss.sigma.op().trace().re - 1.0).abs() < 1e-10);
        prop_assert!(ss.sigma.min_eigenvalue() >= -1e-10);
    }
}
