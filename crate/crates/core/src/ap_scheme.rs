//! Asymptotic-preserving finite volume scheme for `ε∂tU + ∂xF(U) = −R(U)/ε^q`.
//!
//! The interface matrices are assembled in the coordinates `V = PU` of
//! [`adapted_basis`], whose leading rows are those of `Q`. In those coordinates
//! `(I+σ)⁻¹ = blockdiag(𝓜/(b²ε^{q−1}), G)` where `𝓜` is the model's effective
//! diffusion at the interface and `G` the model's stiff block inverse.

use crate::error::{Error, Result};
use crate::hyperbolic_fv::{check_cfl, hll_from_fluxes, max_spectral_radius, DiscreteField};
use crate::linalg::{adapted_basis, inf_norm, min_real_eigenvalue};
use crate::models::{Equilibrium, RelaxationModel, State};
use nalgebra::SMatrix;

/// Lower bound imposed on the eigenvalues of the interface diffusion matrix.
pub const DIFFUSION_FLOOR: f64 = 1e-8;
/// Largest accepted condition number of `I+σ`.
pub const MAX_CONDITION: f64 = 1e12;
/// Tolerance of the commutation identity `Q(I+σ)⁻¹ = 𝓜Q/(b²ε^{q−1})`, relative to `‖𝓜‖`.
pub const COMMUTATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaRule {
    /// Block construction from the model's effective diffusion matrix.
    TargetDiffusion,
    /// `σ = 0`.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApConfig<const N: usize> {
    pub eps: f64,
    pub b: f64,
    pub sigma_rule: SigmaRule,
    /// With `false` the relaxation is switched off (`γ = 0`).
    pub relaxation_enabled: bool,
    exponent: i32,
    basis: SMatrix<f64, N, N>,
    basis_inv: SMatrix<f64, N, N>,
}

impl<const N: usize> ApConfig<N> {
    pub fn new<const C: usize, M: RelaxationModel<N, C> + ?Sized>(
        model: &M,
        eps: f64,
        b: f64,
        sigma_rule: SigmaRule,
    ) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Configuration(format!("epsilon must lie in (0, 1], got {eps}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Configuration(format!("wave speed b must be positive, got {b}")));
        }
        let basis = adapted_basis(&model.q());
        let basis_inv = basis
            .try_inverse()
            .ok_or_else(|| Error::Structure("rows of Q cannot be completed to a basis".into()))?;
        Ok(Self {
            eps,
            b,
            sigma_rule,
            relaxation_enabled: true,
            exponent: model.relaxation_exponent() as i32,
            basis,
            basis_inv,
        })
    }

    pub fn with_relaxation(mut self, enabled: bool) -> Self {
        self.relaxation_enabled = enabled;
        self
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    /// `γ = ε^{−q}`, or zero when relaxation is disabled.
    pub fn gamma(&self) -> f64 {
        if self.relaxation_enabled {
            self.eps.powi(-self.exponent)
        } else {
            0.0
        }
    }

    /// `b²ε^{q−1}`, the scale relating `(I+σ)⁻¹` to `𝓜` on the conserved block.
    pub fn diffusion_scale(&self) -> f64 {
        self.b * self.b * self.eps.powi(self.exponent - 1)
    }

    pub fn basis(&self) -> &SMatrix<f64, N, N> {
        &self.basis
    }
}

/// `ᾱ = (I + (γΔx/2b)(I+σ))⁻¹`.
pub fn alpha_matrix<const N: usize>(
    gamma: f64,
    dx: f64,
    b: f64,
    sigma: &SMatrix<f64, N, N>,
) -> Result<SMatrix<f64, N, N>> {
    if !(gamma >= 0.0 && dx > 0.0 && b > 0.0) {
        return Err(Error::Precondition(format!("need γ >= 0, Δx > 0, b > 0 (got {gamma}, {dx}, {b})")));
    }
    let k = gamma * dx / (2.0 * b);
    let id = SMatrix::<f64, N, N>::identity();
    (id + (id + sigma) * k)
        .try_inverse()
        .ok_or_else(|| Error::Configuration("matrix I + (γΔx/2b)(I+σ) is singular".into()))
}

/// Effective diffusion at an interface between conserved states `ql`, `qr`,
/// with eigenvalues lifted to at least [`DIFFUSION_FLOOR`].
pub fn interface_target_diffusion<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    ql: &Equilibrium<C>,
    qr: &Equilibrium<C>,
    dx: f64,
) -> Result<SMatrix<f64, C, C>> {
    let mean = (ql + qr) * 0.5;
    let slope = (qr - ql) / dx;
    let m = model.target_diffusion(&mean, &slope)?;
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure(format!(
            "non-finite effective diffusion at u = {:?}",
            mean.as_slice()
        )));
    }
    let lam = min_real_eigenvalue(&m);
    if lam < DIFFUSION_FLOOR {
        Ok(m + SMatrix::<f64, C, C>::identity() * (DIFFUSION_FLOOR - lam))
    } else {
        Ok(m)
    }
}

/// `(I+σ)⁻¹` written in adapted coordinates.
fn scaled_inverse_in_basis<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    cfg: &ApConfig<N>,
    ul: &State<N>,
    ur: &State<N>,
    dx: f64,
) -> Result<(SMatrix<f64, N, N>, SMatrix<f64, C, C>)> {
    let q = model.q();
    let m = interface_target_diffusion(model, &(q * ul), &(q * ur), dx)?;
    let mut d = model.stiff_block_inverse(ul, ur);
    let scale = cfg.diffusion_scale();
    for i in 0..N {
        for j in 0..N {
            if i < C && j < C {
                d[(i, j)] = m[(i, j)] / scale;
            } else if (i < C) != (j < C) {
                d[(i, j)] = 0.0;
            }
        }
    }
    Ok((d, m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaConstruction<const N: usize, const C: usize> {
    pub sigma: SMatrix<f64, N, N>,
    /// `(I+σ)⁻¹`.
    pub sinv: SMatrix<f64, N, N>,
    /// Interface diffusion `𝓜` after the eigenvalue floor.
    pub diffusion: SMatrix<f64, C, C>,
    pub commutation_residual: f64,
    pub condition: f64,
}

/// Builds `σ` at an interface so that `Q(I+σ)⁻¹ = 𝓜Q/(b²ε^{q−1})`.
pub fn sigma_from_target_diffusion<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    cfg: &ApConfig<N>,
    ul: &State<N>,
    ur: &State<N>,
    dx: f64,
) -> Result<SigmaConstruction<N, C>> {
    let (d, m) = scaled_inverse_in_basis(model, cfg, ul, ur, dx)?;
    let sinv = cfg.basis_inv * d * cfg.basis;
    let one_plus_sigma = sinv.try_inverse().ok_or_else(|| {
        Error::Configuration(format!(
            "I + σ is singular at the interface (b = {}); try a larger b",
            cfg.b
        ))
    })?;
    let condition = inf_norm(&one_plus_sigma) * inf_norm(&sinv);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Configuration(format!(
            "I + σ has condition number {condition:e} (b = {}); try a larger b",
            cfg.b
        )));
    }
    let q = model.q();
    let residual = inf_norm(&(q * sinv - m * q / cfg.diffusion_scale()));
    let scale = (inf_norm(&m) / cfg.diffusion_scale()).max(1.0);
    if !(residual <= COMMUTATION_TOLERANCE * scale) {
        return Err(Error::Structure(format!("commutation residual {residual:e} above tolerance")));
    }
    let sigma = one_plus_sigma - SMatrix::<f64, N, N>::identity();
    Ok(SigmaConstruction { sigma, sinv, diffusion: m, commutation_residual: residual, condition })
}

/// `ᾱ` and `(I+σ)⁻¹` at one interface.
pub fn interface_matrices<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    cfg: &ApConfig<N>,
    ul: &State<N>,
    ur: &State<N>,
    dx: f64,
) -> Result<(SMatrix<f64, N, N>, SMatrix<f64, N, N>)> {
    let id = SMatrix::<f64, N, N>::identity();
    let k = cfg.gamma() * dx / (2.0 * cfg.b);
    match cfg.sigma_rule {
        SigmaRule::Zero => Ok((id / (1.0 + k), id)),
        SigmaRule::TargetDiffusion => {
            let (d, _) = scaled_inverse_in_basis(model, cfg, ul, ur, dx)?;
            // ᾱ = D⁻¹(D⁻¹ + kI)⁻¹ in adapted coordinates, with D⁻¹ = d.
            let shifted = (d + id * k)
                .try_inverse()
                .ok_or_else(|| Error::Configuration("singular ᾱ at interface".into()))?;
            let alpha = cfg.basis_inv * (d * shifted) * cfg.basis;
            Ok((alpha, cfg.basis_inv * d * cfg.basis))
        }
    }
}

/// Starred states `U*L = ᾱŪ* + (I−ᾱ)(U_L − R̄(U_L))` and likewise for `U*R`,
/// with `R̄ = (I+σ)⁻¹R`.
pub fn modified_interface_states<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    ul: &State<N>,
    ur: &State<N>,
    alpha: &SMatrix<f64, N, N>,
    sinv: &SMatrix<f64, N, N>,
    b: f64,
) -> (State<N>, State<N>) {
    let star = crate::hyperbolic_fv::intermediate_state(model, ul, ur, b);
    let rest = SMatrix::<f64, N, N>::identity() - alpha;
    let left = alpha * star + rest * (ul - sinv * model.relaxation(ul));
    let right = alpha * star + rest * (ur - sinv * model.relaxation(ur));
    (left, right)
}

/// One update of the late-time scheme on the time step `Δt`.
///
/// Checks the hyperbolic CFL `bΔt/Δx ≤ ½` on `Δt`; the rescaled condition
/// `bΔt/(εΔx) ≤ ½` is the caller's responsibility (see [`run_ap`]).
pub fn ap_step<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    field: &DiscreteField<N>,
    cfg: &ApConfig<N>,
    dt: f64,
) -> Result<DiscreteField<N>> {
    let dx = field.grid.dx;
    let b = cfg.b;
    check_cfl(b, dt, dx)?;
    let u = &field.states;
    let n = u.len();
    let f: Vec<State<N>> = u.iter().map(|x| model.flux(x)).collect();
    let lambda = dt / (cfg.eps * dx);

    let states: Vec<State<N>> = if !cfg.relaxation_enabled {
        let fluxes: Vec<State<N>> = (0..n)
            .map(|i| {
                let r = (i + 1) % n;
                hll_from_fluxes(&u[i], &u[r], &f[i], &f[r], b)
            })
            .collect();
        (0..n)
            .map(|i| {
                let l = (i + n - 1) % n;
                u[i] - (fluxes[i] - fluxes[l]) * lambda
            })
            .collect()
    } else {
        let mut alphas = Vec::with_capacity(n);
        let mut weighted = Vec::with_capacity(n);
        for i in 0..n {
            let r = (i + 1) % n;
            let (alpha, _) = interface_matrices(model, cfg, &u[i], &u[r], dx)?;
            weighted.push(alpha * hll_from_fluxes(&u[i], &u[r], &f[i], &f[r], b));
            alphas.push(alpha);
        }
        let source = dt / (2.0 * cfg.eps) * cfg.gamma();
        (0..n)
            .map(|i| {
                let l = (i + n - 1) % n;
                let (ap, am) = (&alphas[i], &alphas[l]);
                u[i] - (weighted[i] - weighted[l]) * lambda + (ap - am) * f[i] * lambda
                    - (ap + am) * model.relaxation(&u[i]) * source
            })
            .collect()
    };
    let next = DiscreteField { grid: field.grid, states, time: field.time + dt };
    next.check_admissible(model)?;
    Ok(next)
}

/// One step of the limit scheme
/// `u⁺ = u + (Δt/Δx²)(𝓜₊(u_{i+1}−u_i) + 𝓜₋(u_{i−1}−u_i))` on a periodic grid.
pub fn discrete_asymptotic_step<const C: usize, F>(
    u: &[Equilibrium<C>],
    diffusion: F,
    dt: f64,
    dx: f64,
) -> Result<Vec<Equilibrium<C>>>
where
    F: Fn(&Equilibrium<C>, &Equilibrium<C>) -> Result<SMatrix<f64, C, C>>,
{
    let n = u.len();
    if n < 2 || !(dt > 0.0 && dx > 0.0) {
        return Err(Error::Precondition("need at least two cells and Δt, Δx > 0".into()));
    }
    let m: Vec<SMatrix<f64, C, C>> = (0..n).map(|i| diffusion(&u[i], &u[(i + 1) % n])).collect::<Result<_>>()?;
    let mmax = m.iter().map(inf_norm).fold(0.0, f64::max);
    let ratio = dt * mmax / (dx * dx);
    if !(ratio <= 0.5 + 1e-12) {
        return Err(Error::NumericalFailure(format!(
            "parabolic stability bound Δt·max‖𝓜‖/Δx² <= 1/2 violated (ratio {ratio})"
        )));
    }
    let mu = dt / (dx * dx);
    Ok((0..n)
        .map(|i| {
            let l = (i + n - 1) % n;
            let r = (i + 1) % n;
            u[i] + (m[i] * (u[r] - u[i]) + m[l] * (u[l] - u[i])) * mu
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarSide {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainViolation {
    /// Index `i` of the interface `x_{i+1/2}`.
    pub interface: usize,
    pub side: StarSide,
    pub reason: String,
}

/// Starred states of the current field that lie outside the admissible set.
pub fn ap_invariant_domain_check<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    field: &DiscreteField<N>,
    cfg: &ApConfig<N>,
) -> Result<Vec<DomainViolation>> {
    let u = &field.states;
    let n = u.len();
    let mut out = Vec::new();
    for i in 0..n {
        let r = (i + 1) % n;
        let (alpha, sinv) = interface_matrices(model, cfg, &u[i], &u[r], field.grid.dx)?;
        let (sl, sr) = modified_interface_states(model, &u[i], &u[r], &alpha, &sinv, cfg.b);
        for (side, s) in [(StarSide::Left, sl), (StarSide::Right, sr)] {
            if let Err(e) = model.check_state(&s) {
                out.push(DomainViolation { interface: i, side, reason: e.to_string() });
            }
        }
    }
    Ok(out)
}

/// `S = Δx Σ Φ(U_i)`.
pub fn entropy_total<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    field: &DiscreteField<N>,
) -> Result<f64> {
    let pair = model
        .entropy()
        .ok_or_else(|| Error::Unsupported(format!("model {} has no entropy pair", model.id())))?;
    Ok(field.grid.dx * field.states.iter().map(|u| pair.entropy(u)).sum::<f64>())
}

pub fn entropy_monotonicity_diagnostic<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    trajectory: &[DiscreteField<N>],
) -> Result<Vec<f64>> {
    trajectory.iter().map(|f| entropy_total(model, f)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveSpeed {
    /// `factor ×` the largest spectral radius, recomputed every step.
    Auto { factor: f64 },
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApRunOptions {
    pub eps: f64,
    pub wave_speed: WaveSpeed,
    pub sigma_rule: SigmaRule,
    /// Fraction of the rescaled CFL step `εΔx/(2b)`.
    pub safety: f64,
    pub record_entropy: bool,
    /// Abort with an invariant-domain error as soon as a starred state is inadmissible.
    pub monitor_invariant_domain: bool,
}

impl ApRunOptions {
    pub fn new(eps: f64) -> Self {
        Self {
            eps,
            wave_speed: WaveSpeed::Auto { factor: 1.1 },
            sigma_rule: SigmaRule::TargetDiffusion,
            safety: 0.9,
            record_entropy: false,
            monitor_invariant_domain: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    Time(f64),
    Steps(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApRun<const N: usize> {
    pub field: DiscreteField<N>,
    pub steps: usize,
    /// `S^m` for `m = 0..=steps` when recorded.
    pub entropy: Vec<f64>,
    pub max_b: f64,
}

/// Advances in late time with `Δt = safety·εΔx/(2b)`, shortening the last step
/// when stopping at a time.
pub fn run_ap<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    field: DiscreteField<N>,
    opts: &ApRunOptions,
    stop: Stop,
) -> Result<ApRun<N>> {
    if !(opts.safety > 0.0 && opts.safety <= 1.0) {
        return Err(Error::Configuration(format!("safety factor must lie in (0, 1], got {}", opts.safety)));
    }
    field.check_admissible(model)?;
    let initial_b = match opts.wave_speed {
        WaveSpeed::Auto { factor } => {
            if !(factor >= 1.0) {
                return Err(Error::Configuration(format!("wave speed factor must be >= 1, got {factor}")));
            }
            factor * max_spectral_radius(model, &field.states)
        }
        WaveSpeed::Fixed(b) => b,
    };
    let mut cfg = ApConfig::new(model, opts.eps, initial_b, opts.sigma_rule)?;
    let mut entropy = Vec::new();
    if opts.record_entropy {
        entropy.push(entropy_total(model, &field)?);
    }
    let t0 = field.time;
    let mut field = field;
    let mut steps = 0;
    let mut max_b: f64 = 0.0;
    loop {
        match stop {
            Stop::Time(t) if field.time >= t0 + t => break,
            Stop::Steps(s) if steps >= s => break,
            _ => {}
        }
        let radius = max_spectral_radius(model, &field.states);
        let b = match opts.wave_speed {
            WaveSpeed::Auto { factor } => factor * radius,
            WaveSpeed::Fixed(b) => {
                if b < radius {
                    return Err(Error::NumericalFailure(format!(
                        "fixed wave speed b = {b} is below the spectral radius {radius} at step {steps}"
                    )));
                }
                b
            }
        };
        cfg = cfg.with_b(b);
        max_b = max_b.max(b);
        let mut dt = opts.safety * opts.eps * field.grid.dx / (2.0 * b);
        let mut last = false;
        if let Stop::Time(t) = stop {
            let remaining = t0 + t - field.time;
            if dt >= remaining {
                dt = remaining;
                last = true;
            }
        }
        if opts.monitor_invariant_domain {
            if let Some(v) = ap_invariant_domain_check(model, &field, &cfg)?.first() {
                return Err(Error::InvariantDomain {
                    cell: v.interface,
                    reason: format!("starred state at step {steps}: {}", v.reason),
                });
            }
        }
        field = ap_step(model, &field, &cfg, dt)?;
        if last {
            if let Stop::Time(t) = stop {
                field.time = t0 + t;
            }
        }
        steps += 1;
        if opts.record_entropy {
            entropy.push(entropy_total(model, &field)?);
        }
    }
    Ok(ApRun { field, steps, entropy, max_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::EulerFriction;
    use nalgebra::{Matrix1, Matrix2, Vector1, Vector2};

    #[test]
    fn alpha_examples() {
        let z = Matrix2::zeros();
        assert_eq!(alpha_matrix(0.0, 0.1, 1.0, &z).unwrap(), Matrix2::identity());
        let a = alpha_matrix(1.0, 0.2, 1.0, &z).unwrap();
        assert!((a - Matrix2::identity() / 1.1).amax() < 1e-15);
        let a = alpha_matrix(4.0, 1.0, 2.0, &Matrix2::new(3.0, 0.0, 0.0, 0.0)).unwrap();
        assert!((a - Matrix2::new(0.2, 0.0, 0.0, 0.5)).amax() < 1e-15);
    }

    #[test]
    fn sigma_euler_example() {
        let m = EulerFriction::default();
        let cfg = ApConfig::new(&m, 1.0, 2.0, SigmaRule::TargetDiffusion).unwrap();
        let u = Vector2::new(1.0, 0.0);
        let s = sigma_from_target_diffusion(&m, &cfg, &u, &u, 0.1).unwrap();
        assert!((s.sigma - Matrix2::new(1.0, 0.0, 0.0, 0.0)).amax() < 1e-14);
        assert!((s.diffusion - Matrix1::new(2.0)).amax() < 1e-14);
        assert!(s.commutation_residual < 1e-14);
    }

    #[test]
    fn limit_step_hand_example() {
        let u = vec![Vector1::new(1.0), Vector1::new(0.0), Vector1::new(0.0)];
        let out = discrete_asymptotic_step(&u, |_, _| Ok(Matrix1::new(1.0)), 0.25, 1.0).unwrap();
        let got: Vec<f64> = out.iter().map(|x| x[0]).collect();
        assert_eq!(got, vec![0.5, 0.25, 0.25]);
        assert!(discrete_asymptotic_step(&u, |_, _| Ok(Matrix1::new(1.0)), 0.6, 1.0).is_err());
    }
}
