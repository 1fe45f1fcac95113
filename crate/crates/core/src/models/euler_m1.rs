use super::{ensure_finite, Equilibrium, PowerLaw, RelaxationModel, State, ADMISSIBILITY_GUARD};
use crate::chapman_enskog::EffectiveEquation;
use crate::error::{Error, Result};
use crate::parabolic::{CoupledHeat, ParabolicProblem};
use nalgebra::{Matrix2, Matrix2x4, Matrix4, Matrix4x2, Vector2, Vector4};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Euler equations with friction coupled to M1 radiation, `U = (ρ, ρv, e, f)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerM1 {
    pub pressure: PowerLaw,
    pub kappa: f64,
    pub sigma: f64,
}

impl Default for EulerM1 {
    fn default() -> Self {
        Self::new(0.01, 1.5, 1.0, 1.0).expect("default parameters are valid")
    }
}

impl EulerM1 {
    pub fn new(cp: f64, eta: f64, kappa: f64, sigma: f64) -> Result<Self> {
        if !(cp > 0.0 && cp.is_finite()) {
            return Err(Error::Configuration(format!("cp must be positive, got {cp}")));
        }
        if !(eta > 1.0 && eta.is_finite()) {
            return Err(Error::Configuration(format!("eta must exceed 1, got {eta}")));
        }
        if !(kappa > 0.0 && sigma > 0.0) {
            return Err(Error::Configuration(format!(
                "kappa and sigma must be positive, got {kappa}, {sigma}"
            )));
        }
        Ok(Self { pressure: PowerLaw { kappa: cp, gamma: eta }, kappa, sigma })
    }

    fn closed_form(&self) -> CoupledHeat {
        CoupledHeat { cp: self.pressure.kappa, eta: self.pressure.gamma, kappa: self.kappa, sigma: self.sigma }
    }
}

fn chi_parts(e: f64, f: f64) -> (f64, f64) {
    let xi = f / e;
    let s = (4.0 - 3.0 * xi * xi).sqrt();
    let den = 5.0 + 2.0 * s;
    let chi = (3.0 + 4.0 * xi * xi) / den;
    let dchi = (8.0 * xi * den + (3.0 + 4.0 * xi * xi) * 6.0 * xi / s) / (den * den);
    (chi, dchi)
}

impl RelaxationModel<4, 2> for EulerM1 {
    fn id(&self) -> &'static str {
        "euler-m1"
    }

    fn q(&self) -> Matrix2x4<f64> {
        Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0)
    }

    fn check_state(&self, u: &State<4>) -> Result<()> {
        ensure_finite(u)?;
        if u[0] <= ADMISSIBILITY_GUARD {
            return Err(Error::Domain(format!("density rho = {} must be positive", u[0])));
        }
        if u[2] <= ADMISSIBILITY_GUARD {
            return Err(Error::Domain(format!("radiative energy e = {} must be positive", u[2])));
        }
        if u[3].abs() >= u[2] * (1.0 - ADMISSIBILITY_GUARD) {
            return Err(Error::Domain(format!("flux ratio |f/e| = {} must stay below 1", (u[3] / u[2]).abs())));
        }
        Ok(())
    }

    fn check_equilibrium(&self, u: &Equilibrium<2>) -> Result<()> {
        self.check_state(&Vector4::new(u[0], 0.0, u[1], 0.0))
    }

    fn flux(&self, u: &State<4>) -> State<4> {
        let (rho, m, e, f) = (u[0], u[1], u[2], u[3]);
        let (chi, _) = chi_parts(e, f);
        Vector4::new(m, m * m / rho + self.pressure.pressure(rho), f, chi * e)
    }

    fn relaxation(&self, u: &State<4>) -> State<4> {
        Vector4::new(0.0, self.kappa * u[1] - self.sigma * u[3], 0.0, self.sigma * u[3])
    }

    fn flux_jacobian(&self, u: &State<4>) -> Matrix4<f64> {
        let v = u[1] / u[0];
        let xi = u[3] / u[2];
        let (chi, dchi) = chi_parts(u[2], u[3]);
        Matrix4::new(
            0.0, 1.0, 0.0, 0.0,
            self.pressure.derivative(u[0]) - v * v, 2.0 * v, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, chi - xi * dchi, dchi,
        )
    }

    fn relaxation_jacobian(&self, _u: &State<4>) -> Matrix4<f64> {
        Matrix4::new(
            0.0, 0.0, 0.0, 0.0,
            0.0, self.kappa, 0.0, -self.sigma,
            0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, self.sigma,
        )
    }

    fn lift(&self, u: &Equilibrium<2>) -> Result<State<4>> {
        self.check_equilibrium(u)?;
        Ok(Vector4::new(u[0], 0.0, u[1], 0.0))
    }

    fn lift_jacobian(&self, u: &Equilibrium<2>) -> Result<Matrix4x2<f64>> {
        self.check_equilibrium(u)?;
        Ok(Matrix4x2::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0))
    }

    fn spectral_radius(&self, u: &State<4>) -> f64 {
        ((u[1] / u[0]).abs() + self.pressure.derivative(u[0]).sqrt()).max(1.0)
    }

    fn effective_equation(&self) -> Option<EffectiveEquation> {
        Some(EffectiveEquation::CoupledHeat(self.closed_form()))
    }

    fn target_diffusion(&self, u: &Equilibrium<2>, du_dx: &Equilibrium<2>) -> Result<Matrix2<f64>> {
        self.closed_form().diffusion(u, du_dx)
    }

    fn stiff_block_inverse(&self, _ul: &State<4>, _ur: &State<4>) -> Matrix4<f64> {
        let mut g = Matrix4::identity();
        g[(2, 2)] = 1.0 / self.kappa;
        g[(2, 3)] = 1.0 / self.kappa;
        g[(3, 3)] = 1.0 / self.sigma;
        g
    }

    fn sample_state(&self, rng: &mut ChaCha8Rng) -> State<4> {
        let rho = rng.random_range(0.1..3.0);
        let v = rng.random_range(-2.0..2.0);
        let e = rng.random_range(0.1..3.0);
        let xi = rng.random_range(-0.95..0.95);
        Vector4::new(rho, rho * v, e, xi * e)
    }

    fn sample_equilibrium(&self, rng: &mut ChaCha8Rng) -> Equilibrium<2> {
        Vector2::new(rng.random_range(0.1..3.0), rng.random_range(0.1..3.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lift_of_density_and_energy() {
        let m = EulerM1::default();
        assert_eq!(m.lift(&Vector2::new(1.0, 1.0)).unwrap(), Vector4::new(1.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn stiff_block_inverts_friction_block() {
        let m = EulerM1::new(0.01, 1.5, 2.0, 0.5).unwrap();
        let y = Matrix2::new(m.kappa, -m.sigma, 0.0, m.sigma);
        let g = m.stiff_block_inverse(&Vector4::zeros(), &Vector4::zeros());
        let g = g.fixed_view::<2, 2>(2, 2).into_owned();
        assert!((y * g - Matrix2::identity()).amax() < 1e-15);
    }
}
