use super::{Equilibrium, RelaxationModel, State};
use crate::error::{Error, Result};
use crate::linalg::{fd_gradient, fd_hessian_from_gradient, fd_jacobian, numerical_rank, qr_least_squares, to_dmatrix, to_dvector};
use nalgebra::SMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;

const CLOSED_FORM_TOL: f64 = 1e-10;
const FD_TOL: f64 = 1e-6;
const FD_STEP: f64 = 1e-4;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResult {
    pub name: String,
    pub applicable: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl ConditionResult {
    fn measured(name: &str, max_residual: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            applicable: true,
            max_residual,
            tolerance,
            passed: max_residual.is_finite() && max_residual <= tolerance,
            detail: detail.into(),
        }
    }

    fn not_applicable(name: &str, why: &str) -> Self {
        Self {
            name: name.to_string(),
            applicable: false,
            max_residual: 0.0,
            tolerance: 0.0,
            passed: true,
            detail: why.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuralReport {
    pub model: String,
    pub samples: usize,
    pub seed: u64,
    pub conditions: Vec<ConditionResult>,
}

impl StructuralReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for StructuralReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} ({} samples, seed {})", self.model, self.samples, self.seed)?;
        for c in &self.conditions {
            if c.applicable {
                writeln!(
                    f,
                    "  {:<28} {:<4} residual {:.3e} (tol {:.0e}) {}",
                    c.name,
                    if c.passed { "ok" } else { "FAIL" },
                    c.max_residual,
                    c.tolerance,
                    c.detail
                )?;
            } else {
                writeln!(f, "  {:<28} n/a  {}", c.name, c.detail)?;
            }
        }
        Ok(())
    }
}

fn rel_err<const R: usize, const C: usize>(a: &SMatrix<f64, R, C>, b: &SMatrix<f64, R, C>) -> f64 {
    (a - b).amax() / a.amax().max(1.0)
}

/// Seeded numerical verification of the structural conditions of a relaxation model.
/// Failures are reported, not returned as errors.
pub fn verify_structural_conditions<const N: usize, const C: usize, M>(
    model: &M,
    sample_count: usize,
    seed: u64,
) -> Result<StructuralReport>
where
    M: RelaxationModel<N, C> + ?Sized,
{
    if sample_count == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = model.q();
    let states: Vec<State<N>> = (0..sample_count).map(|_| model.sample_state(&mut rng)).collect();
    let equilibria: Vec<Equilibrium<C>> = (0..sample_count).map(|_| model.sample_equilibrium(&mut rng)).collect();
    let directions: Vec<State<N>> = (0..sample_count).map(|_| model.sample_scaled_direction(&mut rng)).collect();
    let mut lifted = Vec::with_capacity(sample_count);
    let mut lift_failures = 0usize;
    for u in &equilibria {
        match model.lift(u) {
            Ok(e) => lifted.push(e),
            Err(_) => {
                lift_failures += 1;
                lifted.push(State::<N>::from_element(f64::NAN));
            }
        }
    }

    let mut out = Vec::new();

    let qrank = numerical_rank(&to_dmatrix(&q), RANK_TOL);
    out.push(ConditionResult::measured(
        "rank Q",
        (qrank as f64 - C as f64).abs(),
        0.0,
        format!("rank {qrank} with n = {C} < N = {N}"),
    ));

    let c1 = states.iter().map(|u| (q * model.relaxation(u)).amax()).fold(0.0, f64::max);
    out.push(ConditionResult::measured("condition 1: QR(U)=0", c1, CLOSED_FORM_TOL, ""));

    let c2 = equilibria
        .iter()
        .zip(&lifted)
        .map(|(u, e)| model.relaxation(e).amax().max((q * e - u).amax() / u.amax().max(1.0)))
        .fold(0.0, f64::max);
    out.push(ConditionResult::measured(
        "condition 2: equilibria",
        if lift_failures > 0 { f64::INFINITY } else { c2 },
        CLOSED_FORM_TOL,
        format!("{lift_failures} lift failures"),
    ));

    let c3 = lifted.iter().map(|e| (q * model.flux(e)).amax()).fold(0.0, f64::max);
    out.push(ConditionResult::measured("condition 3: QF(E(u))=0", c3, CLOSED_FORM_TOL, ""));

    let scaled = model.relaxation_exponent() > 1;
    let m0 = model.scaling_matrix(0.0);
    let mut bad_kernel = 0usize;
    let mut bad_index = 0usize;
    for (e, d) in lifted.iter().zip(&directions) {
        let point = if scaled { e + m0 * d } else { *e };
        let b = to_dmatrix(&model.relaxation_jacobian(&point));
        let rank = numerical_rank(&b, RANK_TOL);
        if N - rank != C {
            bad_kernel += 1;
        }
        if numerical_rank(&(&b * &b), RANK_TOL) != rank {
            bad_index += 1;
        }
    }
    out.push(ConditionResult::measured(
        "condition 4: kernel of B",
        (bad_kernel + bad_index) as f64,
        0.0,
        format!(
            "{bad_kernel} samples with dim ker != n, {bad_index} with ker∩im != 0{}",
            if scaled { " (evaluated at E(u)+M(0)U)" } else { "" }
        ),
    ));

    let mut jac = 0.0f64;
    for u in &states {
        let a = model.flux_jacobian(u);
        let a_fd = fd_jacobian::<N, N, _>(|y| model.flux(y), u, FD_STEP);
        let b = model.relaxation_jacobian(u);
        let b_fd = fd_jacobian::<N, N, _>(|y| model.relaxation(y), u, FD_STEP);
        jac = jac.max(rel_err(&a, &a_fd)).max(rel_err(&b, &b_fd));
    }
    for u in &equilibria {
        if let Ok(dl) = model.lift_jacobian(u) {
            let dl_fd = fd_jacobian::<N, C, _>(|y| model.lift(y).unwrap_or(State::<N>::from_element(f64::NAN)), u, FD_STEP);
            jac = jac.max(rel_err(&dl, &dl_fd));
        } else {
            jac = f64::INFINITY;
        }
    }
    out.push(ConditionResult::measured("jacobians vs differences", jac, FD_TOL, ""));

    match model.entropy() {
        None => {
            let why = "no entropy pair is known for this model";
            out.push(ConditionResult::not_applicable("condition 5: entropy flux", why));
            out.push(ConditionResult::not_applicable("condition 6: dissipation", why));
            out.push(ConditionResult::not_applicable("condition 6: multiplier", why));
            out.push(ConditionResult::not_applicable("entropy hessian vs differences", why));
            out.push(ConditionResult::not_applicable("entropy hessian positive", why));
        }
        Some(ent) => {
            let mut c5 = 0.0f64;
            let mut min_diss = f64::INFINITY;
            for u in &states {
                let lhs = (ent.entropy_gradient(u).transpose() * model.flux_jacobian(u)).transpose();
                let rhs = fd_gradient(|y| ent.entropy_flux(y), u, FD_STEP);
                c5 = c5.max((lhs - rhs).amax() / lhs.amax().max(1.0));
                let grad_fd = fd_gradient(|y| ent.entropy(y), u, FD_STEP);
                c5 = c5.max((ent.entropy_gradient(u) - grad_fd).amax() / grad_fd.amax().max(1.0));
                min_diss = min_diss.min(ent.entropy_gradient(u).dot(&model.relaxation(u)));
            }
            out.push(ConditionResult::measured("condition 5: entropy flux", c5, FD_TOL, "DΦ·A vs DΨ"));
            out.push(ConditionResult::measured(
                "condition 6: dissipation",
                (-min_diss).max(0.0),
                CLOSED_FORM_TOL,
                format!("min DΦ·R = {min_diss:.3e}"),
            ));

            let mut c6 = 0.0f64;
            let mut min_eig = f64::INFINITY;
            let mut hess_err = 0.0f64;
            let qt = to_dmatrix(&q.transpose());
            for (u, e) in equilibria.iter().zip(&lifted) {
                let g = ent.entropy_gradient(e);
                let nu_ls = qr_least_squares(&qt, &to_dvector(&g), 1e-12);
                let ls_res = match nu_ls {
                    Some(nu) => (&qt * nu - to_dvector(&g)).amax(),
                    None => f64::INFINITY,
                };
                let model_res = match ent.multiplier(u) {
                    Ok(nu) => (q.transpose() * nu - g).amax(),
                    Err(_) => f64::INFINITY,
                };
                c6 = c6.max(ls_res / g.amax().max(1.0)).max(model_res / g.amax().max(1.0));
                let hess = fd_hessian_from_gradient(|y| ent.entropy_gradient(y), e, FD_STEP);
                let analytic = ent.entropy_hessian(e);
                hess_err = hess_err.max(rel_err(&analytic, &hess));
                min_eig = min_eig.min(crate::linalg::min_symmetric_eigenvalue(&to_dmatrix(&hess)));
            }
            out.push(ConditionResult::measured(
                "condition 6: multiplier",
                c6,
                CLOSED_FORM_TOL,
                "DΦ(E(u)) = ν(u)Q by least squares and closed form",
            ));
            out.push(ConditionResult::measured("entropy hessian vs differences", hess_err, FD_TOL, ""));
            out.push(ConditionResult::measured(
                "entropy hessian positive",
                if min_eig > 0.0 { 0.0 } else { -min_eig + f64::MIN_POSITIVE },
                0.0,
                format!("min eigenvalue {min_eig:.3e}"),
            ));
        }
    }

    Ok(StructuralReport { model: model.id().to_string(), samples: sample_count, seed, conditions: out })
}

/// `‖R(𝓔(u)+εU) − ε^q R(𝓔(u)+M(ε)U)‖∞`.
pub fn nonlinear_scaling_check<const N: usize, const C: usize, M>(
    model: &M,
    eps: f64,
    perturbation: &State<N>,
    u: &Equilibrium<C>,
) -> Result<f64>
where
    M: RelaxationModel<N, C> + ?Sized,
{
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Precondition(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    let e = model.lift(u)?;
    let perturbed = e + perturbation * eps;
    model.check_state(&perturbed)?;
    let scaled = e + model.scaling_matrix(eps) * perturbation;
    let lhs = model.relaxation(&perturbed);
    let rhs = model.relaxation(&scaled) * eps.powi(model.relaxation_exponent() as i32);
    Ok((lhs - rhs).amax())
}

