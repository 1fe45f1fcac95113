//! First-order Chapman–Enskog corrector, effective diffusion matrices and their
//! entropy structure.

use crate::error::{Error, Result};
use crate::linalg::{fd_jacobian, from_dvector, min_symmetric_eigenvalue, qr_least_squares, to_dmatrix, to_dvector};
use crate::models::{Equilibrium, RelaxationModel, ShallowWaterFriction, State};
use crate::parabolic::{CoupledHeat, NonlinearFriction, ParabolicProblem, PorousMedium, RadiativeHeat};
use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use std::any::Any;

/// Closed-form effective equation of a registered model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EffectiveEquation {
    PorousMedium(PorousMedium),
    RadiativeHeat(RadiativeHeat),
    CoupledHeat(CoupledHeat),
    NonlinearFriction(NonlinearFriction),
}

impl EffectiveEquation {
    pub fn description(&self) -> &'static str {
        match self {
            Self::PorousMedium(_) => "∂tρ = ∂x²p(ρ)",
            Self::RadiativeHeat(_) => "∂t(τ+τ⁴) = ∂x((4/3)τ³∂xτ)",
            Self::CoupledHeat(_) => "∂tρ = ∂x²(p(ρ)/κ + e/(3κ)), ∂te = ∂x²e/(3σ)",
            Self::NonlinearFriction(_) => "∂t h = ∂x((√h/κ(h))·∂xh/√|∂xh|)",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::CoupledHeat(_) => 2,
            _ => 1,
        }
    }

    /// Effective diffusion matrix at `u` with slope `du_dx`.
    pub fn diffusion(&self, u: &[f64], du_dx: &[f64]) -> Result<DMatrix<f64>> {
        if u.len() != self.dimension() || du_dx.len() != self.dimension() {
            return Err(Error::Precondition(format!(
                "expected {} equilibrium components",
                self.dimension()
            )));
        }
        let s1 = |v: &[f64]| SVector::<f64, 1>::new(v[0]);
        let s2 = |v: &[f64]| SVector::<f64, 2>::new(v[0], v[1]);
        Ok(match self {
            Self::PorousMedium(p) => to_dmatrix(&p.diffusion(&s1(u), &s1(du_dx))?),
            Self::RadiativeHeat(p) => to_dmatrix(&p.diffusion(&s1(u), &s1(du_dx))?),
            Self::NonlinearFriction(p) => to_dmatrix(&p.diffusion(&s1(u), &s1(du_dx))?),
            Self::CoupledHeat(p) => to_dmatrix(&p.diffusion(&s2(u), &s2(du_dx))?),
        })
    }

    /// Diffusive flux `𝓜(u, ∂xu) ∂xu` of the effective equation.
    pub fn flux(&self, u: &[f64], du_dx: &[f64]) -> Result<DVector<f64>> {
        Ok(self.diffusion(u, du_dx)? * DVector::from_column_slice(du_dx))
    }
}

pub fn closed_form_effective<const N: usize, const C: usize, M>(model: &M) -> Result<EffectiveEquation>
where
    M: RelaxationModel<N, C> + ?Sized,
{
    model
        .effective_equation()
        .ok_or_else(|| Error::Unsupported(format!("no closed-form effective equation for model {}", model.id())))
}

/// Unique `V` with `C V = J` and `Q V = 0`, from the stacked system `[C; Q] V = (J, 0)`.
pub fn constrained_generalized_inverse(c: &DMatrix<f64>, q: &DMatrix<f64>, j: &DVector<f64>) -> Result<DVector<f64>> {
    let n = c.nrows();
    if c.ncols() != n || q.ncols() != n || j.len() != n {
        return Err(Error::Precondition("dimension mismatch in constrained solve".into()));
    }
    let scale = j.amax().max(1.0);
    let qj = (q * j).amax();
    if qj > 1e-12 * scale {
        return Err(Error::Precondition(format!("right-hand side violates QJ = 0 (residual {qj:e})")));
    }
    let k = q.nrows();
    let mut stacked = DMatrix::zeros(n + k, n);
    stacked.rows_mut(0, n).copy_from(c);
    stacked.rows_mut(n, k).copy_from(q);
    let mut rhs = DVector::zeros(n + k);
    rhs.rows_mut(0, n).copy_from(j);
    let v = qr_least_squares(&stacked, &rhs, 1e-12)
        .ok_or_else(|| Error::Structure("bordered system [C; Q] is singular".into()))?;
    let eq_res = (c * &v - j).amax();
    let con_res = (q * &v).amax();
    if eq_res > 1e-10 * scale || con_res > 1e-10 * scale {
        return Err(Error::Structure(format!(
            "no exact constrained solution (residuals {eq_res:e}, {con_res:e})"
        )));
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorSolution<const N: usize> {
    pub u1: State<N>,
    pub constraint_residual: f64,
    pub equation_residual: f64,
}

/// Solves `B(𝓔(u)) U₁ = −A(𝓔(u)) D𝓔(u) ∂xu` with `Q U₁ = 0`.
pub fn first_order_corrector<const N: usize, const C: usize, M>(
    model: &M,
    u: &Equilibrium<C>,
    du_dx: &Equilibrium<C>,
) -> Result<CorrectorSolution<N>>
where
    M: RelaxationModel<N, C> + ?Sized,
{
    model.check_equilibrium(u)?;
    let e = model.lift(u)?;
    let a = model.flux_jacobian(&e);
    let de = model.lift_jacobian(u)?;
    let dxf = a * de * du_dx;
    let b = model.relaxation_jacobian(&e);
    let q = model.q();
    let v = constrained_generalized_inverse(&to_dmatrix(&b), &to_dmatrix(&q), &to_dvector(&(-dxf)))?;
    let u1: State<N> = from_dvector(&v);
    Ok(CorrectorSolution {
        u1,
        constraint_residual: (q * u1).amax(),
        equation_residual: (b * u1 + dxf).amax(),
    })
}

/// Matrices of the entropy form `∂t u = ∂x(L(u) ∂x ν(u)ᵀ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyStructure<const N: usize, const C: usize> {
    pub l: SMatrix<f64, C, C>,
    pub s: SMatrix<f64, C, N>,
    pub lcal: SMatrix<f64, N, N>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveDiffusion<const N: usize, const C: usize> {
    pub u: Equilibrium<C>,
    pub m: SMatrix<f64, C, C>,
    pub entropy: Option<EntropyStructure<N, C>>,
}

/// Assembles `M(u)` column by column from correctors with unit slopes.
pub fn effective_diffusion_matrix<const N: usize, const C: usize, M>(
    model: &M,
    u: &Equilibrium<C>,
) -> Result<EffectiveDiffusion<N, C>>
where
    M: RelaxationModel<N, C> + ?Sized,
{
    if model.relaxation_exponent() > 1 {
        return Err(Error::Unsupported(format!(
            "model {} relaxes nonlinearly (q > 1); its effective equation is not of the form ∂x(M(u)∂xu), use closed_form_effective",
            model.id()
        )));
    }
    let e = model.lift(u)?;
    let a = model.flux_jacobian(&e);
    let q = model.q();
    let mut m = SMatrix::<f64, C, C>::zeros();
    for j in 0..C {
        let unit = Equilibrium::<C>::from_fn(|i, _| if i == j { 1.0 } else { 0.0 });
        let corr = first_order_corrector(model, u, &unit)?;
        m.set_column(j, &(-(q * a * corr.u1)));
    }
    let entropy = match model.entropy() {
        None => None,
        Some(ent) => {
            let s = q * a;
            let lcal = ent.entropy_hessian(&e) * model.relaxation_jacobian(&e);
            let lcal_d = to_dmatrix(&lcal);
            let qd = to_dmatrix(&q);
            let mut v = SMatrix::<f64, N, C>::zeros();
            for k in 0..C {
                let col = s.row(k).transpose();
                let sol = constrained_generalized_inverse(&lcal_d, &qd, &to_dvector(&col))?;
                v.set_column(k, &from_dvector::<N>(&sol));
            }
            Some(EntropyStructure { l: s * v, s, lcal })
        }
    };
    Ok(EffectiveDiffusion { u: *u, m, entropy })
}

/// Relative mismatch between `M(u)∂xu` and `L(u)∂x ν(u)ᵀ` at a state with slope `du_dx`.
pub fn entropy_structure_residual<const N: usize, const C: usize, M>(
    model: &M,
    u: &Equilibrium<C>,
    du_dx: &Equilibrium<C>,
) -> Result<f64>
where
    M: RelaxationModel<N, C> + ?Sized,
{
    let ent = model
        .entropy()
        .ok_or_else(|| Error::Unsupported(format!("model {} has no entropy pair", model.id())))?;
    let eff = effective_diffusion_matrix(model, u)?;
    let l = eff.entropy.expect("entropy structure is present when an entropy pair is").l;
    let dnu = fd_jacobian::<C, C, _>(
        |y| ent.multiplier(y).unwrap_or(Equilibrium::<C>::from_element(f64::NAN)),
        u,
        1e-3,
    );
    let lhs = eff.m * du_dx;
    let rhs = l * dnu * du_dx;
    Ok((lhs - rhs).amax() / lhs.amax().max(f64::MIN_POSITIVE))
}

/// Smallest eigenvalue of the symmetric part of `L(u)`.
pub fn entropy_matrix_min_eigenvalue<const N: usize, const C: usize>(s: &EntropyStructure<N, C>) -> f64 {
    min_symmetric_eigenvalue(&to_dmatrix(&s.l))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearCoefficient {
    pub c: f64,
    pub beta: f64,
    pub residual: f64,
}

/// `c(u) = gκ(h)√(h|∂xh|)` together with the residual of `R(𝓔(u)+M(0)Ū₁) = c(u)Ū₁`,
/// `Ū₁ = (0, β)`, `β = −sgn(∂xh)√(h|∂xh|)/κ(h)`.
pub fn nonlinear_relaxation_coefficient<const N: usize, const C: usize, M>(
    model: &M,
    u: &Equilibrium<C>,
    du_dx: &Equilibrium<C>,
) -> Result<NonlinearCoefficient>
where
    M: RelaxationModel<N, C> + Any,
{
    let sw = (model as &dyn Any)
        .downcast_ref::<ShallowWaterFriction>()
        .ok_or_else(|| Error::Unsupported(format!("c(u) is defined for the shallow water model only, not {}", model.id())))?;
    let h = u[0];
    let s = du_dx[0];
    sw.check_equilibrium(&SVector::<f64, 1>::new(h))?;
    let kappa = sw.friction(h);
    let root = (h * s.abs()).sqrt();
    let c = sw.g * kappa * root;
    let beta = -s.signum() * root / kappa;
    let beta = if s == 0.0 { 0.0 } else { beta };
    let ubar = SVector::<f64, 2>::new(0.0, beta);
    let e = sw.lift(&SVector::<f64, 1>::new(h))?;
    let lhs = sw.relaxation(&(e + sw.scaling_matrix(0.0) * ubar));
    let residual = (lhs - ubar * c).amax();
    Ok(NonlinearCoefficient { c, beta, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{EulerFriction, M1};
    use nalgebra::{Vector1, Vector2, Vector3};

    #[test]
    fn constrained_inverse_diagonal_case() {
        let c = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let q = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let v = constrained_generalized_inverse(&c, &q, &DVector::from_vec(vec![0.0, -4.0])).unwrap();
        assert_eq!(v, DVector::from_vec(vec![0.0, -4.0]));
        let z = constrained_generalized_inverse(&c, &q, &DVector::zeros(2)).unwrap();
        assert_eq!(z.amax(), 0.0);
    }

    #[test]
    fn constrained_inverse_radiative_case() {
        let c = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, -4.0, 0.0, 1.0, 0.0, -1.0, 0.0, 4.0]);
        let q = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 1.0]);
        let v = constrained_generalized_inverse(&c, &q, &DVector::from_vec(vec![0.0, 4.0 / 3.0, 0.0])).unwrap();
        assert!((v - DVector::from_vec(vec![0.0, 4.0 / 3.0, 0.0])).amax() < 1e-14);
    }

    #[test]
    fn constrained_inverse_rejects_bad_rhs() {
        let c = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let q = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let e = constrained_generalized_inverse(&c, &q, &DVector::from_vec(vec![1.0, 0.0])).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
        let zero = DMatrix::zeros(2, 2);
        let e = constrained_generalized_inverse(&zero, &q, &DVector::zeros(2)).unwrap_err();
        assert!(matches!(e, Error::Structure(_)));
    }

    #[test]
    fn euler_corrector() {
        let sol = first_order_corrector(&EulerFriction::default(), &Vector1::new(1.0), &Vector1::new(2.0)).unwrap();
        assert!((sol.u1 - Vector2::new(0.0, -4.0)).amax() < 1e-12);
        assert!(sol.constraint_residual <= 1e-12 && sol.equation_residual <= 1e-10);
    }

    #[test]
    fn radiative_corrector_sign() {
        let sol = first_order_corrector(&M1, &Vector1::new(2.0), &Vector1::new(5.0)).unwrap();
        assert!((sol.u1 - Vector3::new(0.0, -4.0 / 3.0, 0.0)).amax() < 1e-12);
    }

    #[test]
    fn zero_slope_gives_zero_corrector() {
        let sol = first_order_corrector(&M1, &Vector1::new(2.0), &Vector1::new(0.0)).unwrap();
        assert_eq!(sol.u1.amax(), 0.0);
    }

    #[test]
    fn coefficient_examples() {
        let sw = ShallowWaterFriction::default();
        let r = nonlinear_relaxation_coefficient(&sw, &Vector1::new(4.0), &Vector1::new(1.0)).unwrap();
        assert!((r.c - 0.5).abs() < 1e-15 && r.residual < 1e-10);
        let r = nonlinear_relaxation_coefficient(&sw, &Vector1::new(4.0), &Vector1::new(0.0)).unwrap();
        assert_eq!(r.c, 0.0);
        let sw = ShallowWaterFriction::new(9.81, 1.0, 1e-8).unwrap();
        let r = nonlinear_relaxation_coefficient(&sw, &Vector1::new(1.0), &Vector1::new(1.0)).unwrap();
        assert!((r.c - 9.81).abs() < 1e-12 && r.residual < 1e-10);
        let e = nonlinear_relaxation_coefficient(&EulerFriction::default(), &Vector1::new(1.0), &Vector1::new(1.0));
        assert!(matches!(e, Err(Error::Unsupported(_))));
    }
}
