use super::flux_field::{FluxField, SliceDiffeo};
use super::mesh::SpacetimeMesh;
use super::scheme::{slice_faces, SpacelikeFace, SpacetimeSolution, INITIAL_DATA_PANELS, MAX_PANEL};
use crate::error::{Error, Result};
use crate::quadrature::{composite_nodes, panels_for};
use std::f64::consts::TAU;

/// `I_t = Σ_{e⊂H_t} |e| sgn(u−v)(φ_e(u) − φ_e(v))` for every stored slice.
pub fn kruzkov_contraction(
    field: &dyn FluxField,
    mesh: &SpacetimeMesh,
    u: &SpacetimeSolution,
    v: &SpacetimeSolution,
) -> Result<Vec<f64>> {
    let expected = mesh.slabs() + 1;
    if u.slices.len() != expected || v.slices.len() != expected {
        return Err(Error::Precondition(format!(
            "contraction needs all {expected} slices of both solutions (got {} and {})",
            u.slices.len(),
            v.slices.len()
        )));
    }
    (0..expected)
        .map(|i| {
            let (a, b) = (&u.slices[i], &v.slices[i]);
            if a.len() != mesh.elements() || b.len() != mesh.elements() {
                return Err(Error::Precondition(format!("slice {i} does not match the triangulation")));
            }
            let faces = slice_faces(field, mesh, i)?;
            Ok(faces
                .iter()
                .zip(a.iter().zip(b))
                .map(|(f, (&x, &y))| f.measure * (f.phi(field, x) - f.phi(field, y)).abs())
                .sum())
        })
        .collect()
}

/// Quantities of the global dissipation estimate with the quadratic entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationBound {
    pub total: f64,
    /// `inf 1/∂ūφ_e`, the modulus of convexity of `φ^Ω∘φ⁻¹`.
    pub beta: f64,
    /// `inf ∂ūφ_e`.
    pub slope_min: f64,
    /// `Σ_{H_0} |e| φ^Ω_e(u_K)`.
    pub discrete_entropy: f64,
    /// `∫_{H_0} Ω⁰(u0)`.
    pub initial_entropy: f64,
    pub c: f64,
}

impl DissipationBound {
    pub fn bound(&self) -> f64 {
        self.c * self.initial_entropy
    }

    pub fn holds(&self) -> bool {
        self.total <= self.bound()
    }
}

/// Total entropy dissipation against `C·∫_{H_0}Ω(u0)`, with
/// `C = 2/(β·(inf φ')²) · Σ_{H_0}|e|φ^Ω_e(u_K) / ∫_{H_0}Ω(u0)`.
pub fn entropy_dissipation_bound<U: Fn(f64) -> f64>(
    field: &dyn FluxField,
    mesh: &SpacetimeMesh,
    u0: U,
    solution: &SpacetimeSolution,
) -> Result<DissipationBound> {
    let faces = slice_faces(field, mesh, 0)?;
    let initial = &solution.slices[0];
    let discrete_entropy: f64 = faces.iter().zip(initial).map(|(f, &u)| f.measure * f.entropy_phi(field, u)).sum();
    let initial_entropy: f64 = (0..mesh.elements())
        .map(|j| {
            let (a, b) = mesh.face(0, j);
            let panels = panels_for(b - a, MAX_PANEL).max(INITIAL_DATA_PANELS);
            composite_nodes(a, b, panels).into_iter().map(|(th, w)| w * field.entropy0(u0(th), 0.0, th)).sum::<f64>()
        })
        .sum();
    let (lo, hi) = initial.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let h0 = faces
        .iter()
        .map(|f: &SpacelikeFace| f.slope_bounds(field, lo, hi))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| (a.min(c), b.max(d)));
    let slope_min = solution.slope_bounds.0.min(h0.0);
    let slope_max = solution.slope_bounds.1.max(h0.1);
    if !(slope_min > 0.0 && initial_entropy > 0.0) {
        return Err(Error::Hyperbolicity(format!(
            "dissipation bound undefined (inf φ' = {slope_min}, initial entropy {initial_entropy})"
        )));
    }
    let beta = 1.0 / slope_max;
    let c = 2.0 / (beta * slope_min * slope_min) * discrete_entropy / initial_entropy;
    Ok(DissipationBound {
        total: solution.dissipation_total(),
        beta,
        slope_min,
        discrete_entropy,
        initial_entropy,
        c,
    })
}

fn check_breakpoints(breaks: &[f64], values: &[f64]) -> Result<()> {
    if breaks.is_empty() || breaks.len() != values.len() {
        return Err(Error::Precondition(format!(
            "{} breakpoints for {} values",
            breaks.len(),
            values.len()
        )));
    }
    if breaks.windows(2).any(|w| !(w[1] > w[0])) || !(breaks[breaks.len() - 1] < breaks[0] + TAU) {
        return Err(Error::Precondition("breakpoints must increase within one turn".into()));
    }
    Ok(())
}

/// Value at `θ` of the periodic piecewise-constant function equal to `values[j]` on
/// `[breaks[j], breaks[j+1])`.
pub fn evaluate_piecewise(breaks: &[f64], values: &[f64], theta: f64) -> f64 {
    let x = (theta - breaks[0]).rem_euclid(TAU) + breaks[0];
    let k = breaks.partition_point(|&b| b <= x);
    values[k.saturating_sub(1)]
}

/// Exact `L¹(S¹)` distance between two periodic piecewise-constant functions.
pub fn l1_distance_periodic(breaks_a: &[f64], values_a: &[f64], breaks_b: &[f64], values_b: &[f64]) -> Result<f64> {
    check_breakpoints(breaks_a, values_a)?;
    check_breakpoints(breaks_b, values_b)?;
    let origin = breaks_a[0];
    let mut pts: Vec<f64> = breaks_a
        .iter()
        .chain(breaks_b)
        .map(|&b| (b - origin).rem_euclid(TAU) + origin)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.push(pts[0] + TAU);
    Ok(pts
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let d = evaluate_piecewise(breaks_a, values_a, mid) - evaluate_piecewise(breaks_b, values_b, mid);
            d.abs() * (w[1] - w[0])
        })
        .sum())
}

/// `∫_{S¹} |u_h − f|` with `samples` midpoint samples per piece.
pub fn l1_distance_to<F: Fn(f64) -> f64>(breaks: &[f64], values: &[f64], f: F, samples: usize) -> Result<f64> {
    check_breakpoints(breaks, values)?;
    let n = breaks.len();
    let samples = samples.max(1);
    Ok((0..n)
        .map(|j| {
            let a = breaks[j];
            let b = if j + 1 == n { breaks[0] + TAU } else { breaks[j + 1] };
            let h = (b - a) / samples as f64;
            (0..samples).map(|k| (values[j] - f(a + (k as f64 + 0.5) * h)).abs() * h).sum::<f64>()
        })
        .sum())
}

/// Breakpoints `θ = Φ(t, θ')` of a function given on `θ'`-breakpoints.
pub fn push_forward_breakpoints(diffeo: &dyn SliceDiffeo, t: f64, breaks: &[f64]) -> Vec<f64> {
    breaks.iter().map(|&b| diffeo.map(t, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_distance_of_shifted_indicator() {
        let ba = vec![0.0, 1.0];
        let va = vec![1.0, 0.0];
        let bb = vec![0.5, 1.5];
        let vb = vec![1.0, 0.0];
        let d = l1_distance_periodic(&ba, &va, &bb, &vb).unwrap();
        assert!((d - 1.0).abs() < 1e-14);
        assert_eq!(l1_distance_periodic(&ba, &va, &ba, &va).unwrap(), 0.0);
    }

    #[test]
    fn piecewise_evaluation_wraps() {
        let b = vec![1.0, 3.0, 5.0];
        let v = vec![10.0, 20.0, 30.0];
        assert_eq!(evaluate_piecewise(&b, &v, 0.5), 30.0);
        assert_eq!(evaluate_piecewise(&b, &v, 2.0), 10.0);
        assert_eq!(evaluate_piecewise(&b, &v, 1.0 + TAU), 10.0);
    }
}
