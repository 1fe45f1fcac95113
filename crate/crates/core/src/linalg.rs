//! Small dense linear-algebra helpers shared by the diagnostics.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};

/// Maximum absolute row sum.
pub fn inf_norm<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> f64 {
    (0..R)
        .map(|i| (0..C).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn vec_inf_norm<const R: usize>(v: &SVector<f64, R>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn to_dmatrix<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> DMatrix<f64> {
    DMatrix::from_fn(R, C, |i, j| m[(i, j)])
}

pub fn to_dvector<const R: usize>(v: &SVector<f64, R>) -> DVector<f64> {
    DVector::from_fn(R, |i, _| v[i])
}

pub fn from_dvector<const R: usize>(v: &DVector<f64>) -> SVector<f64, R> {
    SVector::from_fn(|i, _| v[i])
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// An invertible basis whose first `C` rows are the rows of `q`, completed greedily
/// with unit rows.
pub fn adapted_basis<const C: usize, const N: usize>(q: &SMatrix<f64, C, N>) -> SMatrix<f64, N, N> {
    let mut rows: Vec<SVector<f64, N>> = (0..C).map(|i| q.row(i).transpose()).collect();
    for k in 0..N {
        if rows.len() == N {
            break;
        }
        let mut cand = rows.clone();
        cand.push(SVector::<f64, N>::from_fn(|i, _| if i == k { 1.0 } else { 0.0 }));
        let m = DMatrix::from_fn(cand.len(), N, |i, j| cand[i][j]);
        if numerical_rank(&m, 1e-12) == cand.len() {
            rows = cand;
        }
    }
    SMatrix::<f64, N, N>::from_fn(|i, j| rows[i][j])
}

/// Jacobian of `f` by fourth-order central differences with relative step `h`.
pub fn fd_jacobian<const R: usize, const C: usize, F>(f: F, x: &SVector<f64, C>, h: f64) -> SMatrix<f64, R, C>
where
    F: Fn(&SVector<f64, C>) -> SVector<f64, R>,
{
    let mut jac = SMatrix::<f64, R, C>::zeros();
    for j in 0..C {
        let mut step = h * x[j].abs().max(1.0);
        // Keep the stencil on one side of zero, where |x| kinks typically sit.
        if x[j] != 0.0 && x[j].abs() < 2.5 * step {
            step = x[j].abs() / 2.5;
        }
        let shifted = |k: f64| {
            let mut y = *x;
            y[j] += k * step;
            f(&y)
        };
        let col = (shifted(-2.0) - 8.0 * shifted(-1.0) + 8.0 * shifted(1.0) - shifted(2.0)) / (12.0 * step);
        jac.set_column(j, &col);
    }
    jac
}

/// Gradient of a scalar function by fourth-order central differences.
pub fn fd_gradient<const C: usize, F>(f: F, x: &SVector<f64, C>, h: f64) -> SVector<f64, C>
where
    F: Fn(&SVector<f64, C>) -> f64,
{
    fd_jacobian::<1, C, _>(|y| SVector::<f64, 1>::new(f(y)), x, h).transpose()
}

/// Symmetrized finite-difference Hessian built from an analytic gradient.
pub fn fd_hessian_from_gradient<const C: usize, G>(grad: G, x: &SVector<f64, C>, h: f64) -> SMatrix<f64, C, C>
where
    G: Fn(&SVector<f64, C>) -> SVector<f64, C>,
{
    let j = fd_jacobian::<C, C, _>(grad, x, h);
    (j + j.transpose()) * 0.5
}

/// Smallest real part among the eigenvalues of a small square matrix.
pub fn min_real_eigenvalue<const C: usize>(m: &SMatrix<f64, C, C>) -> f64 {
    match C {
        1 => m[(0, 0)],
        2 => {
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let disc = 0.25 * tr * tr - det;
            if disc >= 0.0 {
                0.5 * tr - disc.sqrt()
            } else {
                0.5 * tr
            }
        }
        _ => to_dmatrix(m)
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min),
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Solves the tall system `a x = b` in the least-squares sense by Householder QR.
/// Returns `None` when `a` does not have full column rank.
pub fn qr_least_squares(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> Option<DVector<f64>> {
    let qr = a.clone().qr();
    let r = qr.r();
    let n = a.ncols();
    let rmax = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if rmax == 0.0 || (0..n).any(|i| r[(i, i)].abs() <= rel_tol * rmax) {
        return None;
    }
    let qtb = qr.q().transpose() * b;
    r.solve_upper_triangular(&qtb)
}
