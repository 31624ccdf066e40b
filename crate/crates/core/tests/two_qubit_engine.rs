//! Two-qubit model: the elimination engine against oracles that do not
//! go through the engine (spectrum of the full generator, small-coupling
//! expansions, stationary states).

use aelim_core::elimination::{eliminate, EliminationResult, InversionMethod};
use aelim_core::liouville::{embed_product, identity_vec, steady_state, DensityVec, Space, VecOrdering};
use aelim_core::models::*;
use aelim_core::numkernel::{eigenvalues, ComplexMatrix};
use aelim_core::C64;

fn run(gamma: f64, chi: f64, method: InversionMethod, order: usize) -> EliminationResult {
    let p = TwoQubitParams::new(gamma, chi).unwrap();
    let bl = build_two_qubit(&p).unwrap();
    let rho_b = two_qubit_branch_state(&p, Branch::S0).unwrap();
    eliminate(&bl, &rho_b, method, order).unwrap()
}

/// Slowest nonzero eigenvalue of the full generator with positive imaginary part.
fn exact_slow_eigenvalue(gamma: f64, chi: f64) -> C64 {
    let bl = build_two_qubit(&TwoQubitParams::new(gamma, chi).unwrap()).unwrap();
    eigenvalues(bl.full().matrix())
        .unwrap()
        .into_iter()
        .filter(|z| z.norm() > 1e-10 && z.im > 0.0)
        .min_by(|a, b| a.re.abs().total_cmp(&b.re.abs()))
        .unwrap()
}

/// Lowest order in `chi`: `zeta ~ 128 chi^2 gamma (gamma^2+2)/(gamma^2+8)^3`,
/// `xi ~ 2 chi gamma^2/(gamma^2+8)`.
fn leading_order(gamma: f64, chi: f64) -> (f64, f64) {
    let g2 = gamma * gamma;
    (
        128.0 * chi * chi * gamma * (g2 + 2.0) / (g2 + 8.0).powi(3),
        2.0 * chi * g2 / (g2 + 8.0),
    )
}

#[test]
fn full_generator_has_two_dimensional_kernel() {
    let p = TwoQubitParams::new(1.0, 0.1).unwrap();
    let bl = build_two_qubit(&p).unwrap();
    assert_eq!(bl.full().matrix().shape(), (16, 16));
    assert_eq!(steady_state(&bl.full()).unwrap().kernel_dim(), 2);
    assert!(bl.full().trace_row_residual() < 1e-12);
}

#[test]
fn branch_states_pair_with_slow_populations() {
    for (gamma, chi) in [(1.0, 0.1), (0.4, 0.3), (3.0, -0.2)] {
        let p = TwoQubitParams::new(gamma, chi).unwrap();
        let l = build_two_qubit(&p).unwrap().full();
        for branch in [Branch::S0, Branch::S1] {
            let rho = embed_product(&two_qubit_kernel_partner(branch), &two_qubit_branch_state(&p, branch).unwrap())
                .unwrap();
            let image = l.matrix().matvec(rho.as_slice());
            assert!(image.iter().all(|z| z.norm() < 1e-14), "{branch:?} at ({gamma}, {chi})");
        }
    }
}

#[test]
fn uncoupled_model_factorizes() {
    let p = TwoQubitParams::new(1.0, 0.0).unwrap();
    let bl = build_two_qubit(&p).unwrap();
    assert_eq!(bl.coupling().matrix().max_abs(), 0.0);
    assert_eq!(bl.full(), bl.lifted_b());
}

#[test]
fn slow_generator_only_acts_on_coherences() {
    let g = run(1.0, 0.1, InversionMethod::Exact, 1).generator;
    for m in [&g.reduced_l0, &g.reduced_l1, &g.reduced_generator] {
        for i in 0..4 {
            for j in 0..4 {
                if i != j || i == 0 || i == 3 {
                    assert!(m[(i, j)].norm() < 1e-14, "entry ({i}, {j}) = {}", m[(i, j)]);
                }
            }
        }
        assert!((m[(2, 2)] - m[(1, 1)].conj()).norm() < 1e-14);
    }
    let alpha = g.reduced_l0[(1, 1)];
    assert!(alpha.re < 0.0 && alpha.im > 0.0);
}

#[test]
fn resolved_rates_track_exact_slow_eigenvalue() {
    // First-order elimination: the resolved generator is closer to the
    // exact spectrum than L0, with a relative error of order chi^2.
    for gamma in [0.5, 1.0, 2.0, 4.0] {
        for ratio in [0.01, 0.05, 0.1] {
            let chi = ratio * gamma;
            let lambda = exact_slow_eigenvalue(gamma, chi);
            let g = run(gamma, chi, InversionMethod::Exact, 1).generator;
            let l0 = g.reduced_l0[(1, 1)];
            let resolved = g.reduced_generator[(1, 1)];
            let err0 = (l0 - lambda).norm() / lambda.norm();
            let err1 = (resolved - lambda).norm() / lambda.norm();
            assert!(err1 < err0, "gamma={gamma} chi={chi}: {err1:e} vs {err0:e}");
            assert!(err1 < 0.05 * chi * chi, "gamma={gamma} chi={chi}: {err1:e}");
        }
    }
}

#[test]
fn slow_generator_error_shrinks_with_coupling() {
    let errs: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&chi| {
            let lambda = exact_slow_eigenvalue(1.0, chi);
            let r = run(1.0, chi, InversionMethod::Exact, 1).generator.reduced_generator[(1, 1)];
            (r - lambda).norm() / lambda.norm()
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0] / 3.0), "{errs:?}");
}

#[test]
fn leading_order_in_small_coupling() {
    for gamma in [0.5, 1.0, 2.0, 5.0] {
        let chi = 0.01 * gamma;
        let (zeta, xi) = leading_order(gamma, chi);
        for method in [InversionMethod::Exact, InversionMethod::Perturbative(1)] {
            let alpha = run(gamma, chi, method, 1).generator.reduced_l0[(1, 1)];
            assert!(((-alpha.re) - zeta).abs() / zeta < 1e-3, "{method:?} gamma={gamma}: {} vs {zeta}", -alpha.re);
            assert!((alpha.im - xi).abs() / xi < 1e-3, "{method:?} gamma={gamma}: {} vs {xi}", alpha.im);
        }
        // s = 16 chi^2 + gamma^2 shifts xi by ~1e-3 at this ratio already.
        let chi = 1e-3 * gamma;
        let (zeta, xi) = leading_order(gamma, chi);
        let cf = two_qubit_closed_form(&TwoQubitParams::new(gamma, chi).unwrap());
        assert!((cf.zeta - zeta).abs() / zeta < 1e-3, "gamma={gamma}");
        assert!((cf.xi - xi).abs() / xi < 1e-3, "gamma={gamma}");
    }
}

#[test]
fn perturbative_series_converges_to_exact() {
    let exact = run(1.0, 0.1, InversionMethod::Exact, 1);
    let pert = run(1.0, 0.1, InversionMethod::Perturbative(40), 1);
    assert!(!pert.inverse.diverging);
    assert!(pert.generator.reduced_l0.max_abs_diff(&exact.generator.reduced_l0) < 1e-12);
    assert!(pert.generator.reduced_l1.max_abs_diff(&exact.generator.reduced_l1) < 1e-12);
    let inc = &pert.inverse.series_increments;
    assert_eq!(inc.len(), 41);
    assert!(inc.last().unwrap() < &1e-12);
}

#[test]
fn factorized_is_lowest_perturbative_order() {
    let f = run(1.0, 0.1, InversionMethod::Factorized, 1);
    let p0 = run(1.0, 0.1, InversionMethod::Perturbative(0), 1);
    assert!(f.generator.reduced_l0.max_abs_diff(&p0.generator.reduced_l0) < 1e-15);
}

#[test]
fn engine_initial_state_rescales_coherences() {
    let g = run(1.0, 0.1, InversionMethod::Exact, 1).generator;
    let beta = -g.reduced_l1[(1, 1)];
    let via_engine = g.modified_initial_state(&phi_plus()).unwrap();
    let via_formula = modified_initial_state(&phi_plus(), beta).unwrap();
    let d = via_engine.as_slice().iter().zip(via_formula.as_slice()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(d < 1e-15);
    // alpha / (1 + beta) from L0 and L1 is the resolved rate.
    let resolved = g.reduced_l0[(1, 1)] / (C64::new(1.0, 0.0) + beta);
    assert!((resolved - g.reduced_generator[(1, 1)]).norm() < 1e-16);
}

#[test]
fn slow_steady_states_are_exact() {
    let p = TwoQubitParams::new(1.0, 0.1).unwrap();
    let res = run(1.0, 0.1, InversionMethod::Exact, 1);
    let l0 = &res.generator.reduced_l0;
    // Exact kernel: |1><1| ⊗ rho_s0 and |0><0| ⊗ rho_s1; P keeps the A factor.
    for branch in [Branch::S0, Branch::S1] {
        let a = two_qubit_kernel_partner(branch);
        let image = l0.matvec(a.as_slice());
        assert!(image.iter().all(|z| z.norm() < 1e-14));
        let full = embed_product(&a, &two_qubit_branch_state(&p, branch).unwrap()).unwrap();
        let projected = res.projectors.p().apply(&full).unwrap();
        let expected = embed_product(&a, &two_qubit_branch_state(&p, Branch::S0).unwrap()).unwrap();
        assert!(projected.trace_distance(&expected).unwrap() < 1e-14);
    }
}

#[test]
fn closed_form_rates_are_nonnegative() {
    for gamma in [0.1, 0.5, 1.0, 3.0, 10.0] {
        for chi in [-2.0, -0.3, 0.01, 0.1, 0.7, 5.0] {
            let cf = two_qubit_closed_form(&TwoQubitParams::new(gamma, chi).unwrap());
            assert!(cf.zeta >= 0.0, "zeta({gamma}, {chi}) = {}", cf.zeta);
            if chi.abs() <= gamma {
                assert!(cf.zeta_prime >= 0.0, "zeta'({gamma}, {chi}) = {}", cf.zeta_prime);
            }
        }
    }
}

#[test]
fn resolved_closed_form_rate_changes_sign_far_from_the_fast_regime() {
    // The phase of 1/(1 + beta) rotates part of the large xi into the
    // decay rate once chi >> gamma.
    let cf = two_qubit_closed_form(&TwoQubitParams::new(0.1, -2.0).unwrap());
    assert!(cf.zeta > 0.0);
    assert!(cf.zeta_prime < 0.0);
}

#[test]
fn dephasing_form_preserves_trace_and_populations() {
    let g = dephasing_generator(0.4, -1.3);
    let one = identity_vec(Space::Single(2), VecOrdering::Flat);
    assert!(g.vecmat(&one).iter().all(|z| z.norm() < 1e-15));
    let pop = DensityVec::from_matrix(&ComplexMatrix::from_real(&[&[0.3, 0.0], &[0.0, 0.7]])).unwrap();
    assert!(g.matvec(pop.as_slice()).iter().all(|z| z.norm() == 0.0));
}
