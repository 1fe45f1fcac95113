//! Explicit conservative solvers for the effective parabolic equations
//! `∂t u = ∂x(𝓜(u, ∂x u) ∂x u)` on a periodic grid.

use crate::error::{Error, Result};
use crate::linalg::inf_norm;
use crate::models::temperature_from_energy;
use nalgebra::{Matrix1, Matrix2, SMatrix, SVector, Vector1, Vector2};

/// Stability fraction of the explicit parabolic step `Δt = θ Δx² / max‖𝓜‖∞`.
pub const PARABOLIC_SAFETY: f64 = 0.45;

/// A divergence-form diffusion law. Interface fluxes use the coefficient at the
/// arithmetic mean of the neighbours and the one-sided slope.
pub trait ParabolicProblem<const C: usize>: Send + Sync {
    fn name(&self) -> &'static str;

    fn check(&self, u: &SVector<f64, C>) -> Result<()>;

    fn diffusion(&self, u: &SVector<f64, C>, du_dx: &SVector<f64, C>) -> Result<SMatrix<f64, C, C>>;

    fn interface_diffusion(
        &self,
        ul: &SVector<f64, C>,
        ur: &SVector<f64, C>,
        dx: f64,
    ) -> Result<SMatrix<f64, C, C>> {
        self.diffusion(&((ul + ur) * 0.5), &((ur - ul) / dx))
    }

    fn interface_flux(&self, ul: &SVector<f64, C>, ur: &SVector<f64, C>, dx: f64) -> Result<SVector<f64, C>> {
        Ok(self.interface_diffusion(ul, ur, dx)? * ((ur - ul) / dx))
    }
}

/// `∂tρ = ∂x² p(ρ)` with `p = κρ^γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PorousMedium {
    pub kappa: f64,
    pub gamma: f64,
}

impl ParabolicProblem<1> for PorousMedium {
    fn name(&self) -> &'static str {
        "porous-medium"
    }

    fn check(&self, u: &Vector1<f64>) -> Result<()> {
        if !(u[0] >= 0.0 && u[0].is_finite()) {
            return Err(Error::Domain(format!("density rho = {} must be nonnegative", u[0])));
        }
        Ok(())
    }

    fn diffusion(&self, u: &Vector1<f64>, _du_dx: &Vector1<f64>) -> Result<Matrix1<f64>> {
        self.check(u)?;
        Ok(Matrix1::new(self.kappa * self.gamma * u[0].powf(self.gamma - 1.0)))
    }
}

/// `∂t(τ+τ⁴) = ∂x((4/3)τ³ ∂xτ)`, advanced in `u = τ+τ⁴`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RadiativeHeat;

impl ParabolicProblem<1> for RadiativeHeat {
    fn name(&self) -> &'static str {
        "radiative-heat"
    }

    fn check(&self, u: &Vector1<f64>) -> Result<()> {
        if !(u[0] > 0.0 && u[0].is_finite()) {
            return Err(Error::Domain(format!("equilibrium energy u = {} must be positive", u[0])));
        }
        Ok(())
    }

    fn diffusion(&self, u: &Vector1<f64>, _du_dx: &Vector1<f64>) -> Result<Matrix1<f64>> {
        let tau = temperature_from_energy(u[0])?;
        let t3 = tau.powi(3);
        Ok(Matrix1::new(4.0 / 3.0 * t3 / (1.0 + 4.0 * t3)))
    }
}

/// `∂tρ = ∂x²(p(ρ)/κ + e/(3κ))`, `∂te = ∂x² e/(3σ)` with `p = C_p ρ^η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledHeat {
    pub cp: f64,
    pub eta: f64,
    pub kappa: f64,
    pub sigma: f64,
}

impl ParabolicProblem<2> for CoupledHeat {
    fn name(&self) -> &'static str {
        "coupled-heat"
    }

    fn check(&self, u: &Vector2<f64>) -> Result<()> {
        if !(u[0] >= 0.0 && u[0].is_finite() && u[1] > 0.0 && u[1].is_finite()) {
            return Err(Error::Domain(format!(
                "need rho >= 0 and e > 0, got ({}, {})",
                u[0], u[1]
            )));
        }
        Ok(())
    }

    fn diffusion(&self, u: &Vector2<f64>, _du_dx: &Vector2<f64>) -> Result<Matrix2<f64>> {
        self.check(u)?;
        let dp = self.cp * self.eta * u[0].powf(self.eta - 1.0);
        Ok(Matrix2::new(
            dp / self.kappa,
            1.0 / (3.0 * self.kappa),
            0.0,
            1.0 / (3.0 * self.sigma),
        ))
    }
}

/// `∂t h = ∂x((√h/κ(h)) ∂xh/√|∂xh|)` with `κ(h) = κ₀/h` and `|∂xh|` floored at `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearFriction {
    pub kappa0: f64,
    pub delta: f64,
}

impl ParabolicProblem<1> for NonlinearFriction {
    fn name(&self) -> &'static str {
        "nonlinear-friction"
    }

    fn check(&self, u: &Vector1<f64>) -> Result<()> {
        if !(u[0] > 0.0 && u[0].is_finite()) {
            return Err(Error::Domain(format!("height h = {} must be positive", u[0])));
        }
        Ok(())
    }

    fn diffusion(&self, u: &Vector1<f64>, du_dx: &Vector1<f64>) -> Result<Matrix1<f64>> {
        self.check(u)?;
        let h = u[0];
        let kappa = self.kappa0 / h;
        Ok(Matrix1::new(h.sqrt() / kappa / du_dx[0].abs().max(self.delta).sqrt()))
    }

    fn interface_flux(&self, ul: &Vector1<f64>, ur: &Vector1<f64>, dx: f64) -> Result<Vector1<f64>> {
        let k0 = self.kappa0;
        let f = regularized_en2_flux(0.5 * (ul[0] + ur[0]), (ur[0] - ul[0]) / dx, |h| k0 / h, self.delta)?;
        Ok(Vector1::new(f))
    }
}

/// Constant diffusion matrix, mainly for oracles with exact solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantDiffusion<const C: usize> {
    pub m: SMatrix<f64, C, C>,
}

impl<const C: usize> ParabolicProblem<C> for ConstantDiffusion<C> {
    fn name(&self) -> &'static str {
        "constant-diffusion"
    }

    fn check(&self, u: &SVector<f64, C>) -> Result<()> {
        if u.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Domain("non-finite value".into()))
        }
    }

    fn diffusion(&self, _u: &SVector<f64, C>, _du_dx: &SVector<f64, C>) -> Result<SMatrix<f64, C, C>> {
        Ok(self.m)
    }
}

/// `(√h/κ(h)) · s/√max(|s|, δ)`.
pub fn regularized_en2_flux<K: Fn(f64) -> f64>(h: f64, dh_dx: f64, kappa: K, delta: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("height h = {h} must be positive")));
    }
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!("regularization delta = {delta} must be positive")));
    }
    Ok(h.sqrt() / kappa(h) * dh_dx / dh_dx.abs().max(delta).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicRun<const C: usize> {
    pub u: Vec<SVector<f64, C>>,
    pub steps: usize,
    pub max_history: Vec<f64>,
}

/// Advances `u0` to time `t_final` with `Δt = 0.45Δx²/max‖𝓜‖∞`, the last step
/// shortened to land on `t_final`.
pub fn solve_parabolic<const C: usize, P: ParabolicProblem<C> + ?Sized>(
    problem: &P,
    u0: &[SVector<f64, C>],
    t_final: f64,
    dx: f64,
) -> Result<Vec<SVector<f64, C>>> {
    Ok(solve_parabolic_traced(problem, u0, t_final, dx)?.u)
}

/// As [`solve_parabolic`], also recording the step count and the running maximum of
/// the first component.
pub fn solve_parabolic_traced<const C: usize, P: ParabolicProblem<C> + ?Sized>(
    problem: &P,
    u0: &[SVector<f64, C>],
    t_final: f64,
    dx: f64,
) -> Result<ParabolicRun<C>> {
    if !(t_final >= 0.0) {
        return Err(Error::Precondition(format!("final time must be nonnegative, got {t_final}")));
    }
    if !(dx > 0.0) {
        return Err(Error::Precondition(format!("dx must be positive, got {dx}")));
    }
    if u0.len() < 3 {
        return Err(Error::Precondition("need at least three cells".into()));
    }
    for u in u0 {
        problem.check(u)?;
    }
    let n = u0.len();
    let mut u = u0.to_vec();
    let mut fluxes = vec![SVector::<f64, C>::zeros(); n];
    let mut t = 0.0;
    let mut steps = 0usize;
    let max_first = |u: &[SVector<f64, C>]| u.iter().map(|x| x[0]).fold(f64::NEG_INFINITY, f64::max);
    let mut max_history = vec![max_first(&u)];
    while t < t_final {
        let mut mmax = 0.0f64;
        for i in 0..n {
            let r = (i + 1) % n;
            let m = problem.interface_diffusion(&u[i], &u[r], dx)?;
            mmax = mmax.max(inf_norm(&m));
            fluxes[i] = problem.interface_flux(&u[i], &u[r], dx)?;
        }
        if !mmax.is_finite() {
            return Err(Error::NumericalFailure("diffusion coefficient overflow".into()));
        }
        let mut dt = if mmax > 0.0 { PARABOLIC_SAFETY * dx * dx / mmax } else { t_final - t };
        let last = t + dt >= t_final;
        if last {
            dt = t_final - t;
        }
        for i in 0..n {
            let l = (i + n - 1) % n;
            u[i] += (fluxes[i] - fluxes[l]) * (dt / dx);
            if !u[i].iter().all(|x| x.is_finite()) {
                return Err(Error::NumericalFailure(format!("non-finite value in cell {i}")));
            }
        }
        t = if last { t_final } else { t + dt };
        steps += 1;
        max_history.push(max_first(&u));
    }
    Ok(ParabolicRun { u, steps, max_history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn en2_flux_values() {
        assert_eq!(regularized_en2_flux(1.0, 0.0, |_| 1.0, 1e-8).unwrap(), 0.0);
        assert!((regularized_en2_flux(1.0, 4.0, |_| 1.0, 1e-8).unwrap() - 2.0).abs() < 1e-15);
        let a = regularized_en2_flux(2.0, 0.7, |h| 1.0 / h, 1e-8).unwrap();
        let b = regularized_en2_flux(2.0, -0.7, |h| 1.0 / h, 1e-8).unwrap();
        assert_eq!(a, -b);
        assert!(regularized_en2_flux(0.0, 1.0, |_| 1.0, 1e-8).is_err());
    }

    #[test]
    fn constant_data_is_fixed() {
        let u0 = vec![Vector1::new(1.3); 16];
        let u = solve_parabolic(&PorousMedium { kappa: 1.0, gamma: 2.0 }, &u0, 0.1, 0.05).unwrap();
        assert!(u.iter().all(|x| x[0] == 1.3));
    }

    #[test]
    fn three_point_stencil() {
        let p = ConstantDiffusion { m: Matrix1::new(1.0) };
        let u0 = vec![Vector1::new(1.0), Vector1::new(0.0), Vector1::new(0.0), Vector1::new(0.0)];
        let u = solve_parabolic(&p, &u0, 0.45, 1.0).unwrap();
        assert!((u[0][0] - 0.1).abs() < 1e-15);
        assert!((u[1][0] - 0.45).abs() < 1e-15);
        assert!((u[3][0] - 0.45).abs() < 1e-15);
    }
}
