use balancelab_core::ap_scheme::{
    alpha_matrix, ap_step, interface_matrices, modified_interface_states, run_ap, sigma_from_target_diffusion,
    ApConfig, ApRunOptions, SigmaRule, Stop, WaveSpeed,
};
use balancelab_core::hyperbolic_fv::{max_spectral_radius, step_homogeneous, DiscreteField, UniformGrid1D};
use balancelab_core::models::{EulerFriction, EulerM1, RelaxationModel, ShallowWaterFriction, M1};
use balancelab_core::Error;
use nalgebra::{Matrix2, SMatrix, Vector2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field_from(pairs: &[(f64, f64)]) -> DiscreteField<2> {
    let grid = UniformGrid1D::new(pairs.len(), 1.0).unwrap();
    DiscreteField::new(grid, pairs.iter().map(|&(a, v)| Vector2::new(a, a * v)).collect()).unwrap()
}

fn states() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.5f64..2.0, -1.0f64..1.0), 8..32)
}

fn late_dt(b: f64, eps: f64, dx: f64) -> f64 {
    0.9 * eps * dx / (2.0 * b)
}

#[test]
fn epsilon_out_of_range_is_configuration_error() {
    let m = EulerFriction::default();
    for eps in [0.0, -1.0, 1.5, f64::NAN] {
        match ApConfig::new(&m, eps, 1.0, SigmaRule::TargetDiffusion) {
            Err(Error::Configuration(msg)) => assert!(msg.contains("epsilon")),
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn wave_speed_below_radius_fails() {
    let m = EulerFriction::default();
    let f = field_from(&[(1.0, 0.5); 16]);
    let radius = max_spectral_radius(&m, &f.states);
    let mut opts = ApRunOptions::new(0.1);
    opts.wave_speed = WaveSpeed::Fixed(0.5 * radius);
    let err = run_ap(&m, f, &opts, Stop::Steps(3)).unwrap_err();
    assert!(matches!(err, Error::NumericalFailure(_)));
}

#[test]
fn alpha_is_identity_without_relaxation() {
    let s = Matrix2::new(0.3, 0.1, 0.0, 2.0);
    assert_eq!(alpha_matrix(0.0, 0.1, 1.0, &s).unwrap(), Matrix2::identity());
}

#[test]
fn euler_m1_sigma_matches_diffusion_on_conserved_block() {
    let m = EulerM1::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let (ul, ur) = (m.sample_state(&mut rng), m.sample_state(&mut rng));
        let cfg = ApConfig::new(&m, 0.1, 1.1 * m.spectral_radius(&ul).max(m.spectral_radius(&ur)), SigmaRule::TargetDiffusion)
            .unwrap();
        let s = sigma_from_target_diffusion(&m, &cfg, &ul, &ur, 0.05).unwrap();
        let q = m.q();
        let lhs = q * s.sinv;
        let rhs = s.diffusion * q / cfg.diffusion_scale();
        assert!((lhs - rhs).amax() <= 1e-10 * rhs.amax().max(1.0));
        assert!(s.commutation_residual <= 1e-10 * rhs.amax().max(1.0));
        let id = SMatrix::<f64, 4, 4>::identity();
        assert!(((id + s.sigma) * s.sinv - id).amax() < 1e-8);
    }
}

#[test]
fn equilibrium_is_fixed_point() {
    let m = M1;
    let u = m.lift(&nalgebra::Vector1::new(1.7)).unwrap();
    let grid = UniformGrid1D::new(12, 1.0).unwrap();
    let f = DiscreteField::new(grid, vec![u; 12]).unwrap();
    let b = 1.1 * max_spectral_radius(&m, &f.states);
    let cfg = ApConfig::new(&m, 1e-3, b, SigmaRule::TargetDiffusion).unwrap();
    let g = ap_step(&m, &f, &cfg, late_dt(b, 1e-3, grid.dx)).unwrap();
    for x in &g.states {
        assert!((x - u).amax() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn without_relaxation_matches_homogeneous_step_bitwise(pairs in states()) {
        let m = EulerFriction::default();
        let f = field_from(&pairs);
        let b = 1.1 * max_spectral_radius(&m, &f.states);
        let dt = late_dt(b, 1.0, f.grid.dx);
        let cfg = ApConfig::new(&m, 1.0, b, SigmaRule::TargetDiffusion).unwrap().with_relaxation(false);
        let a = ap_step(&m, &f, &cfg, dt).unwrap();
        let h = step_homogeneous(&m, &f, b, dt).unwrap();
        prop_assert_eq!(a.states, h.states);
    }

    #[test]
    fn constant_sigma_conserves_q_totals(pairs in states(), eps in 1e-4f64..1.0) {
        let m = ShallowWaterFriction::default();
        let f = field_from(&pairs);
        let b = 1.1 * max_spectral_radius(&m, &f.states);
        let cfg = ApConfig::new(&m, eps, b, SigmaRule::Zero).unwrap();
        let g = ap_step(&m, &f, &cfg, late_dt(b, eps, f.grid.dx)).unwrap();
        let q = m.q();
        let before = q * f.totals();
        let after = q * g.totals();
        prop_assert!((after - before).amax() <= 1e-13 * before.amax().max(1.0));
    }

    #[test]
    fn mass_defect_is_the_alpha_jump_term(pairs in states(), eps in 1e-4f64..1.0) {
        // The density update telescopes up to Σ λ(ᾱ₊−ᾱ₋)₀₀ m_i, which vanishes for constant σ.
        let m = EulerFriction::default();
        let f = field_from(&pairs);
        let b = 1.1 * max_spectral_radius(&m, &f.states);
        let cfg = ApConfig::new(&m, eps, b, SigmaRule::TargetDiffusion).unwrap();
        let dx = f.grid.dx;
        let dt = late_dt(b, eps, dx);
        let g = ap_step(&m, &f, &cfg, dt).unwrap();
        let n = f.states.len();
        let alphas: Vec<Matrix2<f64>> = (0..n)
            .map(|i| interface_matrices(&m, &cfg, &f.states[i], &f.states[(i + 1) % n], dx).unwrap().0)
            .collect();
        let predicted: f64 = (0..n)
            .map(|i| (alphas[i][(0, 0)] - alphas[(i + n - 1) % n][(0, 0)]) * f.states[i][1])
            .sum::<f64>()
            * dt / eps;
        let defect = g.totals()[0] - f.totals()[0];
        prop_assert!((defect - predicted).abs() <= 1e-12 * f.totals()[0]);
    }

    #[test]
    fn modified_states_match_direct_formula(a in (0.5f64..2.0, -1.0f64..1.0), c in (0.5f64..2.0, -1.0f64..1.0), eps in 1e-3f64..1.0) {
        let m = EulerFriction::default();
        let ul = Vector2::new(a.0, a.0 * a.1);
        let ur = Vector2::new(c.0, c.0 * c.1);
        let b = 1.1 * m.spectral_radius(&ul).max(m.spectral_radius(&ur));
        let dx = 0.02;
        let cfg = ApConfig::new(&m, eps, b, SigmaRule::TargetDiffusion).unwrap();
        let (alpha, sinv) = interface_matrices(&m, &cfg, &ul, &ur, dx).unwrap();
        let (sl, sr) = modified_interface_states(&m, &ul, &ur, &alpha, &sinv, b);
        // Direct evaluation: σ from its own inverse, ᾱ from its defining formula.
        let sigma = sinv.try_inverse().unwrap() - Matrix2::identity();
        let alpha_direct = alpha_matrix(cfg.gamma(), dx, b, &sigma).unwrap();
        prop_assert!((alpha_direct - alpha).amax() <= 1e-9 * alpha.amax().max(1.0));
        let star = (ul + ur) * 0.5 - (m.flux(&ur) - m.flux(&ul)) / (2.0 * b);
        let rest = Matrix2::identity() - alpha_direct;
        let l = alpha_direct * star + rest * (ul - sinv * m.relaxation(&ul));
        let r = alpha_direct * star + rest * (ur - sinv * m.relaxation(&ur));
        prop_assert!((l - sl).amax() <= 1e-9 * l.amax().max(1.0));
        prop_assert!((r - sr).amax() <= 1e-9 * r.amax().max(1.0));
    }

    #[test]
    fn entropy_does_not_increase_over_short_runs(pairs in states(), eps in 1e-3f64..1.0) {
        let m = EulerFriction::default();
        let mut opts = ApRunOptions::new(eps);
        opts.record_entropy = true;
        let run = run_ap(&m, field_from(&pairs), &opts, Stop::Steps(20)).unwrap();
        for w in run.entropy.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10);
        }
    }
}
