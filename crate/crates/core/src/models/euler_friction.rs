use super::{ensure_finite, EntropyPair, Equilibrium, PowerLaw, RelaxationModel, State, ADMISSIBILITY_GUARD};
use crate::chapman_enskog::EffectiveEquation;
use crate::error::{Error, Result};
use crate::parabolic::{ParabolicProblem, PorousMedium};
use nalgebra::{Matrix1x2, Matrix2, Matrix2x1, SVector, Vector1, Vector2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Isentropic Euler equations with linear friction, `U = (ρ, ρv)`, `R = (0, ρv)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerFriction {
    pub pressure: PowerLaw,
}

impl Default for EulerFriction {
    fn default() -> Self {
        Self::new(1.0, 2.0).expect("default parameters are valid")
    }
}

impl EulerFriction {
    pub fn new(kappa: f64, gamma: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Configuration(format!("kappa must be positive, got {kappa}")));
        }
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::Configuration(format!("gamma must exceed 1, got {gamma}")));
        }
        Ok(Self { pressure: PowerLaw { kappa, gamma } })
    }
}

impl RelaxationModel<2, 1> for EulerFriction {
    fn id(&self) -> &'static str {
        "euler-friction"
    }

    fn q(&self) -> Matrix1x2<f64> {
        Matrix1x2::new(1.0, 0.0)
    }

    fn check_state(&self, u: &State<2>) -> Result<()> {
        ensure_finite(u)?;
        if u[0] <= ADMISSIBILITY_GUARD {
            return Err(Error::Domain(format!("density rho = {} must be positive", u[0])));
        }
        Ok(())
    }

    fn check_equilibrium(&self, u: &Equilibrium<1>) -> Result<()> {
        self.check_state(&Vector2::new(u[0], 0.0))
    }

    fn flux(&self, u: &State<2>) -> State<2> {
        let (rho, m) = (u[0], u[1]);
        Vector2::new(m, m * m / rho + self.pressure.pressure(rho))
    }

    fn relaxation(&self, u: &State<2>) -> State<2> {
        Vector2::new(0.0, u[1])
    }

    fn flux_jacobian(&self, u: &State<2>) -> Matrix2<f64> {
        let v = u[1] / u[0];
        Matrix2::new(0.0, 1.0, self.pressure.derivative(u[0]) - v * v, 2.0 * v)
    }

    fn relaxation_jacobian(&self, _u: &State<2>) -> Matrix2<f64> {
        Matrix2::new(0.0, 0.0, 0.0, 1.0)
    }

    fn lift(&self, u: &Equilibrium<1>) -> Result<State<2>> {
        self.check_equilibrium(u)?;
        Ok(Vector2::new(u[0], 0.0))
    }

    fn lift_jacobian(&self, u: &Equilibrium<1>) -> Result<Matrix2x1<f64>> {
        self.check_equilibrium(u)?;
        Ok(Matrix2x1::new(1.0, 0.0))
    }

    fn spectral_radius(&self, u: &State<2>) -> f64 {
        (u[1] / u[0]).abs() + self.pressure.derivative(u[0]).sqrt()
    }

    fn entropy(&self) -> Option<&dyn EntropyPair<2, 1>> {
        Some(self)
    }

    fn effective_equation(&self) -> Option<EffectiveEquation> {
        Some(EffectiveEquation::PorousMedium(PorousMedium {
            kappa: self.pressure.kappa,
            gamma: self.pressure.gamma,
        }))
    }

    fn target_diffusion(&self, u: &Equilibrium<1>, du_dx: &Equilibrium<1>) -> Result<nalgebra::Matrix1<f64>> {
        PorousMedium { kappa: self.pressure.kappa, gamma: self.pressure.gamma }.diffusion(u, du_dx)
    }

    fn stiff_block_inverse(&self, _ul: &State<2>, _ur: &State<2>) -> Matrix2<f64> {
        Matrix2::identity()
    }

    fn sample_state(&self, rng: &mut ChaCha8Rng) -> State<2> {
        let rho = rng.random_range(0.1..3.0);
        let v = rng.random_range(-2.0..2.0);
        Vector2::new(rho, rho * v)
    }

    fn sample_equilibrium(&self, rng: &mut ChaCha8Rng) -> Equilibrium<1> {
        Vector1::new(rng.random_range(0.1..3.0))
    }
}

impl EntropyPair<2, 1> for EulerFriction {
    fn entropy(&self, u: &State<2>) -> f64 {
        let (rho, m) = (u[0], u[1]);
        0.5 * m * m / rho + rho * self.pressure.internal_energy(rho)
    }

    fn entropy_flux(&self, u: &State<2>) -> f64 {
        let v = u[1] / u[0];
        (EntropyPair::entropy(self, u) + self.pressure.pressure(u[0])) * v
    }

    fn entropy_gradient(&self, u: &State<2>) -> State<2> {
        let rho = u[0];
        let v = u[1] / rho;
        Vector2::new(
            -0.5 * v * v + self.pressure.internal_energy(rho) + self.pressure.pressure(rho) / rho,
            v,
        )
    }

    fn entropy_hessian(&self, u: &State<2>) -> Matrix2<f64> {
        let rho = u[0];
        let v = u[1] / rho;
        Matrix2::new(
            v * v / rho + self.pressure.derivative(rho) / rho,
            -v / rho,
            -v / rho,
            1.0 / rho,
        )
    }

    fn multiplier(&self, u: &Equilibrium<1>) -> Result<Equilibrium<1>> {
        self.check_equilibrium(u)?;
        let p = self.pressure;
        Ok(SVector::<f64, 1>::new(p.kappa * p.gamma * u[0].powf(p.gamma - 1.0) / (p.gamma - 1.0)))
    }
}
