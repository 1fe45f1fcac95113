use super::{ensure_finite, Equilibrium, RelaxationModel, State, ADMISSIBILITY_GUARD};
use crate::chapman_enskog::EffectiveEquation;
use crate::error::{Error, Result};
use crate::parabolic::{ParabolicProblem, RadiativeHeat};
use crate::roots::solve_increasing;
use nalgebra::{Matrix1, Matrix1x3, Matrix3, Matrix3x1, Vector1, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Eddington factor `χ(ξ) = (3+4ξ²)/(5+2√(4−3ξ²))`.
pub fn eddington_factor(xi: f64) -> Result<f64> {
    if !(xi.abs() <= 1.0) {
        return Err(Error::Domain(format!("Eddington factor needs |xi| <= 1, got {xi}")));
    }
    Ok(chi(xi))
}

pub fn eddington_factor_derivative(xi: f64) -> Result<f64> {
    if !(xi.abs() <= 1.0) {
        return Err(Error::Domain(format!("Eddington factor needs |xi| <= 1, got {xi}")));
    }
    Ok(chi_prime(xi))
}

fn chi(xi: f64) -> f64 {
    (3.0 + 4.0 * xi * xi) / (5.0 + 2.0 * (4.0 - 3.0 * xi * xi).sqrt())
}

fn chi_prime(xi: f64) -> f64 {
    let s = (4.0 - 3.0 * xi * xi).sqrt();
    let ds = -3.0 * xi / s;
    let den = 5.0 + 2.0 * s;
    (8.0 * xi * den - (3.0 + 4.0 * xi * xi) * 2.0 * ds) / (den * den)
}

/// Inverts `u = τ + τ⁴` on `τ > 0`.
pub fn temperature_from_energy(u: f64) -> Result<f64> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("equilibrium energy u = {u} must be positive")));
    }
    let hi = u.min(u.powf(0.25));
    solve_increasing(|t| t + t.powi(4), |t| 1.0 + 4.0 * t.powi(3), u, 0.0, hi, 1e-15)
}

/// Grey M1 radiative transfer coupled to a temperature, `U = (e, f, τ)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct M1;

impl RelaxationModel<3, 1> for M1 {
    fn id(&self) -> &'static str {
        "m1"
    }

    fn q(&self) -> Matrix1x3<f64> {
        Matrix1x3::new(1.0, 0.0, 1.0)
    }

    fn check_state(&self, u: &State<3>) -> Result<()> {
        ensure_finite(u)?;
        let (e, f, tau) = (u[0], u[1], u[2]);
        if e <= ADMISSIBILITY_GUARD {
            return Err(Error::Domain(format!("radiative energy e = {e} must be positive")));
        }
        if f.abs() >= e * (1.0 - ADMISSIBILITY_GUARD) {
            return Err(Error::Domain(format!("flux ratio |f/e| = {} must stay below 1", (f / e).abs())));
        }
        if tau <= ADMISSIBILITY_GUARD {
            return Err(Error::Domain(format!("temperature tau = {tau} must be positive")));
        }
        Ok(())
    }

    fn check_equilibrium(&self, u: &Equilibrium<1>) -> Result<()> {
        if !(u[0] > ADMISSIBILITY_GUARD && u[0].is_finite()) {
            return Err(Error::Domain(format!("equilibrium energy u = {} must be positive", u[0])));
        }
        Ok(())
    }

    fn flux(&self, u: &State<3>) -> State<3> {
        let (e, f) = (u[0], u[1]);
        Vector3::new(f, chi(f / e) * e, 0.0)
    }

    fn relaxation(&self, u: &State<3>) -> State<3> {
        let t4 = u[2].powi(4);
        Vector3::new(u[0] - t4, u[1], t4 - u[0])
    }

    fn flux_jacobian(&self, u: &State<3>) -> Matrix3<f64> {
        let xi = u[1] / u[0];
        let dchi = chi_prime(xi);
        Matrix3::new(0.0, 1.0, 0.0, chi(xi) - xi * dchi, dchi, 0.0, 0.0, 0.0, 0.0)
    }

    fn relaxation_jacobian(&self, u: &State<3>) -> Matrix3<f64> {
        let d = 4.0 * u[2].powi(3);
        Matrix3::new(1.0, 0.0, -d, 0.0, 1.0, 0.0, -1.0, 0.0, d)
    }

    fn lift(&self, u: &Equilibrium<1>) -> Result<State<3>> {
        let tau = temperature_from_energy(u[0])?;
        Ok(Vector3::new(tau.powi(4), 0.0, tau))
    }

    fn lift_jacobian(&self, u: &Equilibrium<1>) -> Result<Matrix3x1<f64>> {
        let tau = temperature_from_energy(u[0])?;
        let d = 1.0 + 4.0 * tau.powi(3);
        Ok(Matrix3x1::new(4.0 * tau.powi(3) / d, 0.0, 1.0 / d))
    }

    fn spectral_radius(&self, _u: &State<3>) -> f64 {
        1.0
    }

    fn effective_equation(&self) -> Option<EffectiveEquation> {
        Some(EffectiveEquation::RadiativeHeat(RadiativeHeat))
    }

    fn target_diffusion(&self, u: &Equilibrium<1>, du_dx: &Equilibrium<1>) -> Result<Matrix1<f64>> {
        RadiativeHeat.diffusion(u, du_dx)
    }

    fn stiff_block_inverse(&self, ul: &State<3>, ur: &State<3>) -> Matrix3<f64> {
        let tau = ul[2].max(ur[2]).max(0.0);
        Matrix3::from_diagonal(&Vector3::new(1.0, 1.0 / (1.0 + 4.0 * tau.powi(3)), 1.0))
    }

    fn sample_state(&self, rng: &mut ChaCha8Rng) -> State<3> {
        let e = rng.random_range(0.1..3.0);
        let xi = rng.random_range(-0.95..0.95);
        let tau = rng.random_range(0.2..2.0);
        Vector3::new(e, xi * e, tau)
    }

    fn sample_equilibrium(&self, rng: &mut ChaCha8Rng) -> Equilibrium<1> {
        let tau: f64 = rng.random_range(0.2..2.0);
        Vector1::new(tau + tau.powi(4))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::evaluate_flux;

    #[test]
    fn eddington_values() {
        assert!((eddington_factor(0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((eddington_factor(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((eddington_factor(-1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(eddington_factor(1.01).is_err());
    }

    #[test]
    fn eddington_derivative_matches_difference_quotient() {
        for &xi in &[-0.9, -0.3, 0.0, 0.4, 0.8] {
            let h = 1e-5;
            let fd = (chi(xi + h) - chi(xi - h)) / (2.0 * h);
            assert!((fd - chi_prime(xi)).abs() < 1e-9);
        }
    }

    #[test]
    fn flux_at_isotropic_state() {
        let f = evaluate_flux(&M1, &Vector3::new(1.0, 0.0, 1.0)).unwrap();
        assert!((f - Vector3::new(0.0, 1.0 / 3.0, 0.0)).amax() < 1e-15);
    }

    #[test]
    fn lift_inverts_quartic() {
        let e = M1.lift(&Vector1::new(2.0)).unwrap();
        assert!((e - Vector3::new(1.0, 0.0, 1.0)).amax() < 1e-14);
        for &u in &[1e-6, 0.5, 3.0, 1e4] {
            let t = temperature_from_energy(u).unwrap();
            assert!(((t + t.powi(4)) - u).abs() <= 1e-14 * u);
        }
    }

    #[test]
    fn flux_ratio_bound_enforced() {
        assert!(M1.check_state(&Vector3::new(1.0, 1.0, 1.0)).is_err());
        assert!(M1.check_state(&Vector3::new(1.0, 0.99, 1.0)).is_ok());
    }
}
