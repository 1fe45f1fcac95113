//! Relaxation systems `ε∂tU + ∂xF(U) = −R(U)/ε^q` and their structural checks.

mod conditions;
mod euler_friction;
mod euler_m1;
mod m1;
mod shallow_water;

pub use conditions::{
    nonlinear_scaling_check, verify_structural_conditions, ConditionResult, StructuralReport,
};
pub use euler_friction::EulerFriction;
pub use euler_m1::EulerM1;
pub use m1::{eddington_factor, eddington_factor_derivative, temperature_from_energy, M1};
pub use shallow_water::ShallowWaterFriction;

use crate::chapman_enskog::EffectiveEquation;
use crate::error::Result;
use nalgebra::{SMatrix, SVector};
use rand_chacha::ChaCha8Rng;

pub type State<const N: usize> = SVector<f64, N>;
pub type Equilibrium<const C: usize> = SVector<f64, C>;

/// Guard band used to keep states strictly inside their admissible set.
pub const ADMISSIBILITY_GUARD: f64 = 1e-13;

/// One system of the form `ε∂tU + ∂xF(U) = −R(U)/ε^q` with `N` unknowns and `C`
/// conserved equilibrium variables `u = QU`.
///
/// `flux`, `relaxation` and the Jacobians do not validate their input; the free
/// functions [`evaluate_flux`] and [`evaluate_relaxation`] do.
pub trait RelaxationModel<const N: usize, const C: usize>: Send + Sync {
    fn id(&self) -> &'static str;
    fn q(&self) -> SMatrix<f64, C, N>;
    fn check_state(&self, u: &State<N>) -> Result<()>;
    fn check_equilibrium(&self, u: &Equilibrium<C>) -> Result<()>;
    fn flux(&self, u: &State<N>) -> State<N>;
    fn relaxation(&self, u: &State<N>) -> State<N>;
    fn flux_jacobian(&self, u: &State<N>) -> SMatrix<f64, N, N>;
    fn relaxation_jacobian(&self, u: &State<N>) -> SMatrix<f64, N, N>;
    fn lift(&self, u: &Equilibrium<C>) -> Result<State<N>>;
    fn lift_jacobian(&self, u: &Equilibrium<C>) -> Result<SMatrix<f64, N, C>>;

    fn relaxation_exponent(&self) -> u32 {
        1
    }

    /// `M(ε)` in `R(𝓔(u)+εU) = ε^q R(𝓔(u)+M(ε)U)`.
    fn scaling_matrix(&self, _eps: f64) -> SMatrix<f64, N, N> {
        SMatrix::identity()
    }

    /// Upper bound on the moduli of the eigenvalues of the flux Jacobian.
    fn spectral_radius(&self, u: &State<N>) -> f64;

    fn entropy(&self) -> Option<&dyn EntropyPair<N, C>> {
        None
    }

    /// The closed-form effective (parabolic) equation, when one is known.
    fn effective_equation(&self) -> Option<EffectiveEquation>;

    /// Closed-form diffusion matrix of the effective equation at `u` with slope `du_dx`.
    fn target_diffusion(&self, u: &Equilibrium<C>, du_dx: &Equilibrium<C>) -> Result<SMatrix<f64, C, C>>;

    /// Inverse of the stiff (non-conserved) block of the relaxation Jacobian, written
    /// in the coordinates of [`crate::linalg::adapted_basis`]. Only the trailing
    /// `(N−C)×(N−C)` block of the result is used.
    fn stiff_block_inverse(&self, ul: &State<N>, ur: &State<N>) -> SMatrix<f64, N, N>;

    fn sample_state(&self, rng: &mut ChaCha8Rng) -> State<N>;
    fn sample_equilibrium(&self, rng: &mut ChaCha8Rng) -> Equilibrium<C>;

    /// Nonzero direction `Ū` used to test Condition 4 when `q > 1`.
    fn sample_scaled_direction(&self, _rng: &mut ChaCha8Rng) -> State<N> {
        State::<N>::zeros()
    }
}

/// Entropy `Φ`, entropy flux `Ψ` and multiplier `ν` with `DΦ(𝓔(u)) = ν(u)Q`.
pub trait EntropyPair<const N: usize, const C: usize>: Send + Sync {
    fn entropy(&self, u: &State<N>) -> f64;
    fn entropy_flux(&self, u: &State<N>) -> f64;
    fn entropy_gradient(&self, u: &State<N>) -> State<N>;
    fn entropy_hessian(&self, u: &State<N>) -> SMatrix<f64, N, N>;
    fn multiplier(&self, u: &Equilibrium<C>) -> Result<Equilibrium<C>>;
}

pub fn evaluate_flux<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    u: &State<N>,
) -> Result<State<N>> {
    model.check_state(u)?;
    Ok(model.flux(u))
}

pub fn evaluate_relaxation<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    u: &State<N>,
) -> Result<State<N>> {
    model.check_state(u)?;
    Ok(model.relaxation(u))
}

pub fn equilibrium_lift<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    u: &Equilibrium<C>,
) -> Result<State<N>> {
    model.check_equilibrium(u)?;
    model.lift(u)
}

pub(crate) fn ensure_finite<const N: usize>(u: &State<N>) -> Result<()> {
    if u.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(crate::Error::Domain(format!("non-finite component in state {:?}", u.as_slice())))
    }
}

/// Pressure law `p(ρ) = κρ^γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub kappa: f64,
    pub gamma: f64,
}

impl PowerLaw {
    pub fn pressure(&self, rho: f64) -> f64 {
        self.kappa * rho.powf(self.gamma)
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        self.kappa * self.gamma * rho.powf(self.gamma - 1.0)
    }

    /// Internal energy with `e' = p/ρ²` and `e(0) = 0`.
    pub fn internal_energy(&self, rho: f64) -> f64 {
        self.kappa * rho.powf(self.gamma - 1.0) / (self.gamma - 1.0)
    }
}
