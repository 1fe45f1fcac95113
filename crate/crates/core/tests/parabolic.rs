use balancelab_core::parabolic::{
    regularized_en2_flux, solve_parabolic, solve_parabolic_traced, ConstantDiffusion, NonlinearFriction,
    ParabolicProblem, PorousMedium, RadiativeHeat,
};
use balancelab_core::Error;
use nalgebra::{Matrix1, Vector1};
use proptest::prelude::*;
use std::f64::consts::PI;

fn grid(n: usize, f: impl Fn(f64) -> f64) -> (Vec<Vector1<f64>>, f64) {
    let dx = 1.0 / n as f64;
    ((0..n).map(|i| Vector1::new(f((i as f64 + 0.5) * dx))).collect(), dx)
}

fn fourier_error(n: usize) -> f64 {
    let d = 0.1;
    let t = 0.1;
    let (u0, dx) = grid(n, |x| 1.0 + 0.5 * (2.0 * PI * x).sin());
    let out = solve_parabolic(&ConstantDiffusion { m: Matrix1::new(d) }, &u0, t, dx).unwrap();
    let decay = (-4.0 * PI * PI * d * t).exp();
    out.iter()
        .enumerate()
        .map(|(i, u)| (u[0] - 1.0 - 0.5 * decay * (2.0 * PI * (i as f64 + 0.5) * dx).sin()).abs() * dx)
        .sum()
}

#[test]
fn fourier_mode_decays_at_exact_rate() {
    assert!(fourier_error(100) < 1e-4);
}

#[test]
fn grid_convergence_is_second_order() {
    let errors: Vec<f64> = [25, 50, 100].iter().map(|&n| fourier_error(n)).collect();
    for w in errors.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.8, "{errors:?}");
    }
}

#[test]
fn negative_density_is_rejected() {
    let u = vec![Vector1::new(1.0), Vector1::new(-0.1), Vector1::new(1.0)];
    assert!(matches!(solve_parabolic(&PorousMedium { kappa: 1.0, gamma: 2.0 }, &u, 0.1, 0.1), Err(Error::Domain(_))));
}

#[test]
fn en2_flux_rejects_bad_delta() {
    assert!(regularized_en2_flux(1.0, 1.0, |h| 1.0 / h, 0.0).is_err());
    let f = regularized_en2_flux(1.0, 4.0, |_| 1.0, 1e-6).unwrap();
    assert!((f - 2.0).abs() < 1e-14);
}

#[test]
fn radiative_diffusion_value() {
    let m = RadiativeHeat.diffusion(&Vector1::new(2.0), &Vector1::zeros()).unwrap();
    assert!((m[(0, 0)] - 4.0 / 15.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn porous_medium_keeps_maximum_and_mass(values in prop::collection::vec(0.2f64..2.0, 8..40)) {
        let u0: Vec<Vector1<f64>> = values.iter().map(|&v| Vector1::new(v)).collect();
        let dx = 1.0 / u0.len() as f64;
        let run = solve_parabolic_traced(&PorousMedium { kappa: 1.0, gamma: 2.0 }, &u0, 0.01, dx).unwrap();
        for w in run.max_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        let min0 = values.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(run.u.iter().all(|u| u[0] >= min0 - 1e-12));
        let before: f64 = values.iter().sum();
        let after: f64 = run.u.iter().map(|u| u[0]).sum();
        prop_assert!((after - before).abs() <= 1e-12 * before);
    }

    #[test]
    fn nonlinear_friction_conserves_height(values in prop::collection::vec(0.5f64..2.0, 8..24)) {
        let u0: Vec<Vector1<f64>> = values.iter().map(|&v| Vector1::new(v)).collect();
        let dx = 1.0 / u0.len() as f64;
        let out = solve_parabolic(&NonlinearFriction { kappa0: 1.0, delta: 1e-2 }, &u0, 0.002, dx).unwrap();
        let before: f64 = values.iter().sum();
        let after: f64 = out.iter().map(|u| u[0]).sum();
        prop_assert!((after - before).abs() <= 1e-12 * before);
    }
}
