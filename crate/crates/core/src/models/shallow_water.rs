use super::{ensure_finite, EntropyPair, Equilibrium, RelaxationModel, State, ADMISSIBILITY_GUARD};
use crate::chapman_enskog::EffectiveEquation;
use crate::error::{Error, Result};
use crate::parabolic::{NonlinearFriction, ParabolicProblem};
use nalgebra::{Matrix1, Matrix1x2, Matrix2, Matrix2x1, Vector1, Vector2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Shallow water with quadratic friction `R = (0, κ(h)² g hv|hv|)`, `κ(h) = κ₀/h`,
/// in the scaling `q = 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShallowWaterFriction {
    pub g: f64,
    pub kappa0: f64,
    /// Regularization of `|∂x h|` in the effective flux.
    pub delta: f64,
}

impl Default for ShallowWaterFriction {
    fn default() -> Self {
        Self { g: 1.0, kappa0: 1.0, delta: 1e-8 }
    }
}

impl ShallowWaterFriction {
    pub fn new(g: f64, kappa0: f64, delta: f64) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Configuration(format!("g must be positive, got {g}")));
        }
        if !(kappa0 > 0.0 && kappa0.is_finite()) {
            return Err(Error::Configuration(format!("kappa0 must be positive, got {kappa0}")));
        }
        if !(delta > 0.0) {
            return Err(Error::Configuration(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { g, kappa0, delta })
    }

    pub fn friction(&self, h: f64) -> f64 {
        self.kappa0 / h
    }

    fn closed_form(&self) -> NonlinearFriction {
        NonlinearFriction { kappa0: self.kappa0, delta: self.delta }
    }
}

impl RelaxationModel<2, 1> for ShallowWaterFriction {
    fn id(&self) -> &'static str {
        "shallow-water-friction"
    }

    fn q(&self) -> Matrix1x2<f64> {
        Matrix1x2::new(1.0, 0.0)
    }

    fn check_state(&self, u: &State<2>) -> Result<()> {
        ensure_finite(u)?;
        if u[0] <= ADMISSIBILITY_GUARD {
            return Err(Error::Domain(format!("height h = {} must be positive", u[0])));
        }
        Ok(())
    }

    fn check_equilibrium(&self, u: &Equilibrium<1>) -> Result<()> {
        self.check_state(&Vector2::new(u[0], 0.0))
    }

    fn flux(&self, u: &State<2>) -> State<2> {
        let (h, m) = (u[0], u[1]);
        Vector2::new(m, m * m / h + 0.5 * self.g * h * h)
    }

    fn relaxation(&self, u: &State<2>) -> State<2> {
        let k = self.friction(u[0]);
        Vector2::new(0.0, k * k * self.g * u[1] * u[1].abs())
    }

    fn flux_jacobian(&self, u: &State<2>) -> Matrix2<f64> {
        let v = u[1] / u[0];
        Matrix2::new(0.0, 1.0, self.g * u[0] - v * v, 2.0 * v)
    }

    fn relaxation_jacobian(&self, u: &State<2>) -> Matrix2<f64> {
        let (h, m) = (u[0], u[1]);
        let k2 = self.kappa0 * self.kappa0 / (h * h);
        Matrix2::new(0.0, 0.0, -2.0 * k2 / h * self.g * m * m.abs(), 2.0 * k2 * self.g * m.abs())
    }

    fn lift(&self, u: &Equilibrium<1>) -> Result<State<2>> {
        self.check_equilibrium(u)?;
        Ok(Vector2::new(u[0], 0.0))
    }

    fn lift_jacobian(&self, u: &Equilibrium<1>) -> Result<Matrix2x1<f64>> {
        self.check_equilibrium(u)?;
        Ok(Matrix2x1::new(1.0, 0.0))
    }

    fn relaxation_exponent(&self) -> u32 {
        2
    }

    fn scaling_matrix(&self, eps: f64) -> Matrix2<f64> {
        Matrix2::new(eps, 0.0, 0.0, 1.0)
    }

    fn spectral_radius(&self, u: &State<2>) -> f64 {
        (u[1] / u[0]).abs() + (self.g * u[0]).sqrt()
    }

    fn entropy(&self) -> Option<&dyn EntropyPair<2, 1>> {
        Some(self)
    }

    fn effective_equation(&self) -> Option<EffectiveEquation> {
        Some(EffectiveEquation::NonlinearFriction(self.closed_form()))
    }

    fn target_diffusion(&self, u: &Equilibrium<1>, du_dx: &Equilibrium<1>) -> Result<Matrix1<f64>> {
        self.closed_form().diffusion(u, du_dx)
    }

    fn stiff_block_inverse(&self, ul: &State<2>, ur: &State<2>) -> Matrix2<f64> {
        let rate = |u: &State<2>| {
            let k = self.friction(u[0]);
            2.0 * k * k * self.g * u[1].abs()
        };
        let y = rate(ul).max(rate(ur)).max(1.0);
        Matrix2::new(1.0, 0.0, 0.0, 1.0 / y)
    }

    fn sample_state(&self, rng: &mut ChaCha8Rng) -> State<2> {
        let h = rng.random_range(0.1..3.0);
        let v = rng.random_range(-2.0..2.0);
        Vector2::new(h, h * v)
    }

    fn sample_equilibrium(&self, rng: &mut ChaCha8Rng) -> Equilibrium<1> {
        Vector1::new(rng.random_range(0.1..3.0))
    }

    fn sample_scaled_direction(&self, rng: &mut ChaCha8Rng) -> State<2> {
        let beta: f64 = rng.random_range(0.1..2.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        Vector2::new(0.0, sign * beta)
    }
}

impl EntropyPair<2, 1> for ShallowWaterFriction {
    fn entropy(&self, u: &State<2>) -> f64 {
        let (h, m) = (u[0], u[1]);
        0.5 * m * m / h + 0.5 * self.g * h * h
    }

    fn entropy_flux(&self, u: &State<2>) -> f64 {
        let (h, m) = (u[0], u[1]);
        (0.5 * m * m / h + self.g * h * h) * m / h
    }

    fn entropy_gradient(&self, u: &State<2>) -> State<2> {
        let v = u[1] / u[0];
        Vector2::new(-0.5 * v * v + self.g * u[0], v)
    }

    fn entropy_hessian(&self, u: &State<2>) -> Matrix2<f64> {
        let h = u[0];
        let v = u[1] / h;
        Matrix2::new(v * v / h + self.g, -v / h, -v / h, 1.0 / h)
    }

    fn multiplier(&self, u: &Equilibrium<1>) -> Result<Equilibrium<1>> {
        self.check_equilibrium(u)?;
        Ok(Vector1::new(self.g * u[0]))
    }
}
