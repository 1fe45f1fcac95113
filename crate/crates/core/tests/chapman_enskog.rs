use balancelab_core::chapman_enskog::{
    closed_form_effective, effective_diffusion_matrix, entropy_matrix_min_eigenvalue, entropy_structure_residual,
    first_order_corrector,
};
use balancelab_core::models::{EulerFriction, EulerM1, RelaxationModel, ShallowWaterFriction, M1};
use balancelab_core::Error;
use nalgebra::{Vector1, Vector2};
use proptest::prelude::*;

#[test]
fn euler_corrector_example() {
    let c = first_order_corrector(&EulerFriction::default(), &Vector1::new(1.0), &Vector1::new(2.0)).unwrap();
    assert!((c.u1 - Vector2::new(0.0, -4.0)).amax() < 1e-12);
    assert!(c.constraint_residual < 1e-14 && c.equation_residual < 1e-12);
}

#[test]
fn nonlinear_relaxation_is_unsupported_for_assembly() {
    let err = effective_diffusion_matrix(&ShallowWaterFriction::default(), &Vector1::new(1.0)).unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)));
    assert!(closed_form_effective(&ShallowWaterFriction::default()).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn euler_matrix_is_pressure_derivative(rho in 0.1f64..3.0) {
        let m = effective_diffusion_matrix(&EulerFriction::default(), &Vector1::new(rho)).unwrap().m;
        prop_assert!((m[(0, 0)] - 2.0 * rho).abs() <= 1e-10 * rho.max(1.0));
    }

    #[test]
    fn corrector_is_linear_in_slope(rho in 0.1f64..3.0, s in -3.0f64..3.0) {
        let m = EulerFriction::default();
        let one = first_order_corrector(&m, &Vector1::new(rho), &Vector1::new(1.0)).unwrap().u1;
        let many = first_order_corrector(&m, &Vector1::new(rho), &Vector1::new(s)).unwrap().u1;
        prop_assert!((many - one * s).amax() <= 1e-10 * one.amax().max(1.0) * s.abs().max(1.0));
    }

    #[test]
    fn m1_matrix_matches_closed_form(tau in 0.2f64..2.0) {
        let u = Vector1::new(tau + tau.powi(4));
        let assembled = effective_diffusion_matrix(&M1, &u).unwrap().m;
        let closed = M1.target_diffusion(&u, &Vector1::zeros()).unwrap();
        prop_assert!((assembled - closed).amax() <= 1e-8 * closed.amax());
    }

    #[test]
    fn euler_m1_matrix_matches_closed_form(rho in 0.1f64..3.0, e in 0.1f64..3.0) {
        let m = EulerM1::default();
        let u = Vector2::new(rho, e);
        let assembled = effective_diffusion_matrix(&m, &u).unwrap().m;
        let closed = m.target_diffusion(&u, &Vector2::zeros()).unwrap();
        prop_assert!((assembled - closed).amax() <= 1e-8 * closed.amax());
    }

    #[test]
    fn euler_entropy_form_agrees(rho in 0.2f64..3.0, s in -2.0f64..2.0) {
        prop_assume!(s.abs() > 1e-3);
        let m = EulerFriction::default();
        prop_assert!(entropy_structure_residual(&m, &Vector1::new(rho), &Vector1::new(s)).unwrap() <= 1e-8);
        let eff = effective_diffusion_matrix(&m, &Vector1::new(rho)).unwrap();
        prop_assert!(entropy_matrix_min_eigenvalue(&eff.entropy.unwrap()) > 0.0);
    }
}
