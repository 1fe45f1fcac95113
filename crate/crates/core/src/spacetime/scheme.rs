use super::flux_field::FluxField;
use super::mesh::{SpacetimeMesh, FACES_PER_ELEMENT};
use crate::error::{Error, Result};
use crate::quadrature::{composite_nodes, panels_for};
use crate::roots::solve_increasing;

/// Longest quadrature panel, in coordinate length.
pub const MAX_PANEL: f64 = 0.25;
/// Minimum number of panels per face when discretizing initial data.
pub const INITIAL_DATA_PANELS: usize = 4;
/// Tolerance of the convex decomposition identity.
pub const CD_TOLERANCE: f64 = 1e-12;
/// Tolerance of the discrete entropy inequalities.
pub const DEI_TOLERANCE: f64 = 1e-12;
const LIPSCHITZ_SAMPLES: usize = 17;
const SLOPE_SAMPLES: usize = 9;
const INVERSION_TOL: f64 = 1e-15;
const LIPSCHITZ_SLACK: f64 = 1e-12;

/// A face `[a, b] ⊂ H_t` with precomputed quadrature and measure `|e| = ∫_e ∂ūω⁰(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacelikeFace {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub measure: f64,
    nodes: Vec<(f64, f64)>,
}

impl SpacelikeFace {
    pub fn new(field: &dyn FluxField, t: f64, a: f64, b: f64) -> Result<Self> {
        Self::with_panels(field, t, a, b, panels_for(b - a, MAX_PANEL))
    }

    pub fn with_panels(field: &dyn FluxField, t: f64, a: f64, b: f64, panels: usize) -> Result<Self> {
        let nodes = composite_nodes(a, b, panels);
        let measure: f64 = nodes.iter().map(|&(th, w)| w * field.d_omega0(0.0, t, th)).sum();
        if !(measure > 0.0 && measure.is_finite()) {
            return Err(Error::Hyperbolicity(format!(
                "face [{a}, {b}] at t = {t} has nonpositive measure {measure}"
            )));
        }
        Ok(Self { t, a, b, measure, nodes })
    }

    /// `∫_e ω⁰(ū)`.
    pub fn integral(&self, field: &dyn FluxField, u: f64) -> f64 {
        self.nodes.iter().map(|&(th, w)| w * field.omega0(u, self.t, th)).sum()
    }

    /// Averaged flux `φ_e(ū) = ∫_e ω⁰(ū) / |e|`.
    pub fn phi(&self, field: &dyn FluxField, u: f64) -> f64 {
        self.integral(field, u) / self.measure
    }

    pub fn dphi(&self, field: &dyn FluxField, u: f64) -> f64 {
        self.nodes.iter().map(|&(th, w)| w * field.d_omega0(u, self.t, th)).sum::<f64>() / self.measure
    }

    /// Face average of the quadratic entropy flux.
    pub fn entropy_phi(&self, field: &dyn FluxField, u: f64) -> f64 {
        self.nodes.iter().map(|&(th, w)| w * field.entropy0(u, self.t, th)).sum::<f64>() / self.measure
    }

    /// Solves `φ_e(ū) = target` in `[lo, hi]`.
    pub fn invert(&self, field: &dyn FluxField, target: f64, lo: f64, hi: f64) -> Result<f64> {
        solve_increasing(|u| self.phi(field, u), |u| self.dphi(field, u), target, lo, hi, INVERSION_TOL)
    }

    /// Sampled bounds of `∂ūφ_e` on `[lo, hi]`.
    pub fn slope_bounds(&self, field: &dyn FluxField, lo: f64, hi: f64) -> (f64, f64) {
        sample_range(lo, hi, SLOPE_SAMPLES)
            .map(|u| self.dphi(field, u))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), d| (a.min(d), b.max(d)))
    }
}

fn sample_range(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
}

pub fn face_measure(field: &dyn FluxField, t: f64, a: f64, b: f64) -> Result<f64> {
    Ok(SpacelikeFace::new(field, t, a, b)?.measure)
}

pub fn averaged_flux(field: &dyn FluxField, t: f64, a: f64, b: f64, u: f64) -> Result<f64> {
    Ok(SpacelikeFace::new(field, t, a, b)?.phi(field, u))
}

/// The face joining `(t0, θ0)` to `(t0+τ, θ0+Δθ)`, oriented towards the future.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalFace {
    pub t0: f64,
    pub theta0: f64,
    pub tau: f64,
    pub dtheta: f64,
    nodes: Vec<(f64, f64)>,
}

impl VerticalFace {
    pub fn new(t0: f64, theta0: f64, t1: f64, theta1: f64) -> Self {
        let (tau, dtheta) = (t1 - t0, theta1 - theta0);
        let nodes = composite_nodes(0.0, 1.0, panels_for(tau.hypot(dtheta), MAX_PANEL));
        Self { t0, theta0, tau, dtheta, nodes }
    }

    /// `I(ū) = ∫₀¹ (ω⁰Δθ + ω¹τ) ds`.
    pub fn integral(&self, field: &dyn FluxField, u: f64) -> f64 {
        self.nodes
            .iter()
            .map(|&(s, w)| {
                let (t, th) = (self.t0 + s * self.tau, self.theta0 + s * self.dtheta);
                w * (field.omega0(u, t, th) * self.dtheta + field.omega1(u, t, th) * self.tau)
            })
            .sum()
    }

    pub fn derivative(&self, field: &dyn FluxField, u: f64) -> f64 {
        self.nodes
            .iter()
            .map(|&(s, w)| {
                let (t, th) = (self.t0 + s * self.tau, self.theta0 + s * self.dtheta);
                w * (field.d_omega0(u, t, th) * self.dtheta + field.d_omega1(u, t, th) * self.tau)
            })
            .sum()
    }

    /// Sampled `sup |I'(ū)|` on `[lo, hi]`.
    pub fn lipschitz_bound(&self, field: &dyn FluxField, lo: f64, hi: f64) -> f64 {
        sample_range(lo, hi, LIPSCHITZ_SAMPLES).map(|u| self.derivative(field, u).abs()).fold(0.0, f64::max)
    }
}

/// Position of a vertical face relative to the element that owns the flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

#[inline]
fn lf_flux(side: Side, iu: f64, iv: f64, d: f64, u: f64, v: f64) -> f64 {
    side.sign() * 0.5 * (iu + iv) + 0.5 * d * (u - v)
}

/// Face-integrated Lax–Friedrichs flux `q_{K,e⁰}(u, v)` of element value `u` against neighbor `v`.
///
/// Errors when `D` is below the sampled Lipschitz bound of `I` between `u` and `v`.
pub fn numerical_flux(field: &dyn FluxField, face: &VerticalFace, side: Side, u: f64, v: f64, d: f64) -> Result<f64> {
    let bound = face.lipschitz_bound(field, u.min(v), u.max(v));
    if d < bound * (1.0 - LIPSCHITZ_SLACK) {
        return Err(Error::NumericalFailure(format!(
            "flux parameter D = {d} is below the Lipschitz bound {bound}; the flux is not monotone"
        )));
    }
    Ok(lf_flux(side, face.integral(field, u), face.integral(field, v), d, u, v))
}

/// Choice of the dissipation parameter `D` of the vertical faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DRule {
    /// `factor ×` the largest sampled Lipschitz bound over all faces of the slab.
    Global { factor: f64 },
    /// `factor ×` the sampled Lipschitz bound of each face.
    PerFace { factor: f64 },
    Fixed(f64),
}

impl Default for DRule {
    fn default() -> Self {
        DRule::Global { factor: 1.1 }
    }
}

/// Faces of one slab.
#[derive(Debug, Clone)]
pub struct SlabGeometry {
    pub bottom: Vec<SpacelikeFace>,
    pub top: Vec<SpacelikeFace>,
    /// Face `j` runs along node track `j`: the left face of element `j`
    /// and the right face of element `j−1`.
    pub vertical: Vec<VerticalFace>,
}

pub fn slice_faces(field: &dyn FluxField, mesh: &SpacetimeMesh, slice: usize) -> Result<Vec<SpacelikeFace>> {
    let t = mesh.times()[slice];
    (0..mesh.elements())
        .map(|j| {
            let (a, b) = mesh.face(slice, j);
            SpacelikeFace::new(field, t, a, b)
        })
        .collect()
}

impl SlabGeometry {
    pub fn new(field: &dyn FluxField, mesh: &SpacetimeMesh, slab: usize) -> Result<Self> {
        Self::with_bottom(field, mesh, slab, slice_faces(field, mesh, slab)?)
    }

    pub fn with_bottom(field: &dyn FluxField, mesh: &SpacetimeMesh, slab: usize, bottom: Vec<SpacelikeFace>) -> Result<Self> {
        let top = slice_faces(field, mesh, slab + 1)?;
        let (t0, t1) = (mesh.times()[slab], mesh.times()[slab + 1]);
        let (n0, n1) = (mesh.slice_nodes(slab), mesh.slice_nodes(slab + 1));
        let vertical = (0..mesh.elements()).map(|j| VerticalFace::new(t0, n0[j], t1, n1[j])).collect();
        Ok(Self { bottom, top, vertical })
    }

    pub fn elements(&self) -> usize {
        self.bottom.len()
    }
}

/// Result of one slab update.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabOutput {
    pub u_plus: Vec<f64>,
    /// Intermediate values `ũ` per element for its `[left, right]` vertical faces.
    pub intermediates: Vec<[f64; 2]>,
    /// `D` of vertical face `j`.
    pub d: Vec<f64>,
    pub max_cd_residual: f64,
    /// `|Σ|e+|φ+(u+) − Σ|e−|φ−(u−)|`, relative to `max(1, Σ|e−||φ−(u−)|)`.
    pub conservation_defect: f64,
    /// Sampled bounds of `∂ūφ_{e+}` over the data range.
    pub slope_bounds: (f64, f64),
}

fn data_range(u: &[f64]) -> (f64, f64) {
    u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

/// Data range widened by 10% (plus a small absolute pad) for root bracketing.
fn bracket(lo: f64, hi: f64) -> (f64, f64) {
    let pad = 0.1 * (hi - lo) + 1e-9 * (1.0 + lo.abs().max(hi.abs()));
    (lo - pad, hi + pad)
}

/// Per-face dissipation parameters for data `u` under `rule`.
pub fn dissipation_parameters(field: &dyn FluxField, geom: &SlabGeometry, u: &[f64], rule: DRule) -> Result<Vec<f64>> {
    let (lo, hi) = data_range(u);
    let bounds: Vec<f64> = geom.vertical.iter().map(|f| f.lipschitz_bound(field, lo, hi)).collect();
    match rule {
        DRule::Global { factor } | DRule::PerFace { factor } if !(factor >= 1.0) => Err(Error::Configuration(
            format!("D factor must be at least 1, got {factor}"),
        )),
        DRule::Global { factor } => {
            let m = bounds.iter().cloned().fold(0.0, f64::max);
            Ok(vec![factor * m; bounds.len()])
        }
        DRule::PerFace { factor } => Ok(bounds.iter().map(|b| factor * b).collect()),
        DRule::Fixed(d) => {
            if let Some((j, b)) = bounds.iter().enumerate().find(|(_, &b)| d < b * (1.0 - LIPSCHITZ_SLACK)) {
                return Err(Error::NumericalFailure(format!(
                    "fixed D = {d} is below the Lipschitz bound {b} of vertical face {j}; the flux is not monotone"
                )));
            }
            Ok(vec![d; bounds.len()])
        }
    }
}

/// `factor ×` the largest sampled Lipschitz bound on `[lo, hi]` over every vertical
/// face of the mesh. Used as a shared [`DRule::Fixed`] when two solutions are compared.
pub fn uniform_dissipation(field: &dyn FluxField, mesh: &SpacetimeMesh, lo: f64, hi: f64, factor: f64) -> f64 {
    let times = mesh.times();
    (0..mesh.slabs())
        .flat_map(|i| (0..mesh.elements()).map(move |j| (i, j)))
        .map(|(i, j)| {
            let face = VerticalFace::new(times[i], mesh.slice_nodes(i)[j], times[i + 1], mesh.slice_nodes(i + 1)[j]);
            face.lipschitz_bound(field, lo, hi)
        })
        .fold(0.0, f64::max)
        * factor
}

/// One slab of the scheme
/// `|e+|φ+(u+) = |e−|φ−(u−) − Σ q_{K,e⁰}(u−, u_{K_{e⁰}}−)` with intermediates
/// `φ+(ũ) = φ+(u−) − (N_K/|e+|)(q(u−, v) − q(u−, u−))`.
pub fn spacetime_step(field: &dyn FluxField, geom: &SlabGeometry, u_minus: &[f64], rule: DRule) -> Result<SlabOutput> {
    let n = geom.elements();
    if u_minus.len() != n {
        return Err(Error::Precondition(format!("{} values for {n} elements", u_minus.len())));
    }
    let d = dissipation_parameters(field, geom, u_minus, rule)?;
    let (lo, hi) = data_range(u_minus);
    let (blo, bhi) = bracket(lo, hi);
    let nk = FACES_PER_ELEMENT as f64;

    // own[j] = I_j(u_j), other[j] = I_j(u_{j−1}).
    let own: Vec<f64> = (0..n).map(|j| geom.vertical[j].integral(field, u_minus[j])).collect();
    let other: Vec<f64> = (0..n).map(|j| geom.vertical[j].integral(field, u_minus[(j + n - 1) % n])).collect();

    let mut u_plus = Vec::with_capacity(n);
    let mut intermediates = Vec::with_capacity(n);
    let mut max_cd: f64 = 0.0;
    let mut slope = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut before, mut after, mut scale) = (0.0, 0.0, 0.0);
    for j in 0..n {
        let r = (j + 1) % n;
        let l = (j + n - 1) % n;
        let u = u_minus[j];
        let top = &geom.top[j];
        let (smin, smax) = top.slope_bounds(field, lo, hi);
        slope = (slope.0.min(smin), slope.1.max(smax));
        let dmax = d[j].max(d[r]);
        if !(nk * dmax / top.measure < smin) {
            return Err(Error::NumericalFailure(format!(
                "CFL condition violated at element {j}: N_K·D/|e+| = {} >= inf φ' = {smin}",
                nk * dmax / top.measure
            )));
        }
        let q_left = lf_flux(Side::Left, own[j], other[j], d[j], u, u_minus[l]);
        let q_right = lf_flux(Side::Right, other[r], own[r], d[r], u, u_minus[r]);
        let bottom_mass = geom.bottom[j].integral(field, u);
        let target = (bottom_mass - q_left - q_right) / top.measure;
        let up = top.invert(field, target, blo, bhi).map_err(|e| {
            Error::NumericalFailure(format!("inversion failed at element {j}: {e}"))
        })?;

        let phi_u = top.phi(field, u);
        let t_left = phi_u - nk / top.measure * (q_left - own[j]);
        let t_right = phi_u - nk / top.measure * (q_right + other[r]);
        let ul = top.invert(field, t_left, blo, bhi).map_err(|e| {
            Error::NumericalFailure(format!("intermediate inversion failed at element {j}: {e}"))
        })?;
        let ur = top.invert(field, t_right, blo, bhi).map_err(|e| {
            Error::NumericalFailure(format!("intermediate inversion failed at element {j}: {e}"))
        })?;
        let phi_plus = top.phi(field, up);
        let cd = (phi_plus - 0.5 * (top.phi(field, ul) + top.phi(field, ur))).abs();
        let cd_scale = phi_plus.abs().max(1.0);
        if cd > CD_TOLERANCE * cd_scale {
            return Err(Error::InvariantViolation(format!(
                "convex decomposition residual {cd:e} at element {j}"
            )));
        }
        max_cd = max_cd.max(cd / cd_scale);
        before += bottom_mass;
        after += top.measure * phi_plus;
        scale += bottom_mass.abs();
        u_plus.push(up);
        intermediates.push([ul, ur]);
    }
    Ok(SlabOutput {
        u_plus,
        intermediates,
        d,
        max_cd_residual: max_cd,
        conservation_defect: (after - before).abs() / scale.max(1.0),
        slope_bounds: slope,
    })
}

fn kruzkov_flux(face: &VerticalFace, field: &dyn FluxField, side: Side, d: f64, u: f64, v: f64, c: f64) -> f64 {
    let (uh, vh, ul, vl) = (u.max(c), v.max(c), u.min(c), v.min(c));
    let hi = lf_flux(side, face.integral(field, uh), face.integral(field, vh), d, uh, vh);
    let lo = lf_flux(side, face.integral(field, ul), face.integral(field, vl), d, ul, vl);
    hi - lo
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Left sides of the discrete entropy inequalities for the Kruzkov parameter `c`,
/// two per element (left face, right face); each must be `≤ 0`.
pub fn entropy_residual(
    field: &dyn FluxField,
    geom: &SlabGeometry,
    u_minus: &[f64],
    out: &SlabOutput,
    c: f64,
) -> Vec<f64> {
    let n = geom.elements();
    let nk = FACES_PER_ELEMENT as f64;
    let mut res = Vec::with_capacity(2 * n);
    for j in 0..n {
        let top = &geom.top[j];
        let u = u_minus[j];
        let phi_c = top.phi(field, c);
        let entropy = |w: f64| sgn(w - c) * (top.phi(field, w) - phi_c);
        let base = entropy(u);
        let faces = [
            (Side::Left, &geom.vertical[j], u_minus[(j + n - 1) % n], out.d[j]),
            (Side::Right, &geom.vertical[(j + 1) % n], u_minus[(j + 1) % n], out.d[(j + 1) % n]),
        ];
        for (k, (side, face, v, d)) in faces.into_iter().enumerate() {
            let flux = kruzkov_flux(face, field, side, d, u, v, c) - kruzkov_flux(face, field, side, d, u, u, c);
            res.push(entropy(out.intermediates[j][k]) - base + nk / top.measure * flux);
        }
    }
    res
}

/// Cell values on `H_0` from `φ_e(u_K) = ∫_e ω⁰(u0) / |e|`.
pub fn discretize_initial_data<U: Fn(f64) -> f64>(field: &dyn FluxField, mesh: &SpacetimeMesh, u0: U) -> Result<Vec<f64>> {
    (0..mesh.elements())
        .map(|j| {
            let (a, b) = mesh.face(0, j);
            let panels = panels_for(b - a, MAX_PANEL).max(INITIAL_DATA_PANELS);
            let face = SpacelikeFace::with_panels(field, 0.0, a, b, panels)?;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut total = 0.0;
            for (th, w) in composite_nodes(a, b, panels) {
                let v = u0(th);
                lo = lo.min(v);
                hi = hi.max(v);
                total += w * field.omega0(v, 0.0, th);
            }
            let (blo, bhi) = bracket(lo, hi);
            face.invert(field, total / face.measure, blo, bhi)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeOptions {
    pub d_rule: DRule,
    /// Number of Kruzkov parameters `c` for the entropy inequalities (0 disables them).
    pub kruzkov_parameters: usize,
    /// Keep the values of every slice (otherwise only the first and last).
    pub store_slices: bool,
    /// Fail with an invariant violation when an entropy residual exceeds [`DEI_TOLERANCE`].
    pub enforce_dei: bool,
}

impl Default for SpacetimeOptions {
    fn default() -> Self {
        Self { d_rule: DRule::default(), kruzkov_parameters: 0, store_slices: true, enforce_dei: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabDiagnostics {
    /// `Σ_{K,e⁰} (|e+|/N_K)|ũ − u+|²` over the slab.
    pub dissipation: f64,
    pub max_entropy_residual: f64,
    pub max_cd_residual: f64,
    pub conservation_defect: f64,
    pub max_d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeSolution {
    /// Values per stored slice: all slices, or the first and last.
    pub slices: Vec<Vec<f64>>,
    pub slabs: Vec<SlabDiagnostics>,
    pub kruzkov_parameters: Vec<f64>,
    /// Sampled bounds of `∂ūφ` over all future faces and data ranges.
    pub slope_bounds: (f64, f64),
}

impl SpacetimeSolution {
    pub fn final_values(&self) -> &[f64] {
        self.slices.last().expect("at least the initial slice")
    }

    pub fn dissipation_total(&self) -> f64 {
        self.slabs.iter().map(|s| s.dissipation).sum()
    }

    pub fn max_entropy_residual(&self) -> f64 {
        self.slabs.iter().map(|s| s.max_entropy_residual).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Marches the scheme through every slab of `mesh`.
pub fn solve(field: &dyn FluxField, mesh: &SpacetimeMesh, u_init: &[f64], opts: &SpacetimeOptions) -> Result<SpacetimeSolution> {
    if u_init.len() != mesh.elements() {
        return Err(Error::Precondition(format!("{} initial values for {} elements", u_init.len(), mesh.elements())));
    }
    let (lo, hi) = data_range(u_init);
    let (clo, chi) = bracket(lo, hi);
    let cs: Vec<f64> = match opts.kruzkov_parameters {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        m => (0..m).map(|k| clo + (chi - clo) * k as f64 / (m - 1) as f64).collect(),
    };
    let mut slices = vec![u_init.to_vec()];
    let mut diags = Vec::with_capacity(mesh.slabs());
    let mut slope = (f64::INFINITY, f64::NEG_INFINITY);
    let mut bottom = slice_faces(field, mesh, 0)?;
    let mut current = u_init.to_vec();
    for slab in 0..mesh.slabs() {
        let geom = SlabGeometry::with_bottom(field, mesh, slab, bottom)?;
        let out = spacetime_step(field, &geom, &current, opts.d_rule)?;
        slope = (slope.0.min(out.slope_bounds.0), slope.1.max(out.slope_bounds.1));
        let nk = FACES_PER_ELEMENT as f64;
        let dissipation: f64 = (0..geom.elements())
            .map(|j| {
                let w = geom.top[j].measure / nk;
                out.intermediates[j].iter().map(|&ut| w * (ut - out.u_plus[j]).powi(2)).sum::<f64>()
            })
            .sum();
        let mut max_res = f64::NEG_INFINITY;
        for &c in &cs {
            let r = entropy_residual(field, &geom, &current, &out, c);
            max_res = r.into_iter().fold(max_res, f64::max);
        }
        if opts.enforce_dei && max_res > DEI_TOLERANCE {
            return Err(Error::InvariantViolation(format!(
                "discrete entropy inequality residual {max_res:e} in slab {slab}"
            )));
        }
        diags.push(SlabDiagnostics {
            dissipation,
            max_entropy_residual: if cs.is_empty() { 0.0 } else { max_res },
            max_cd_residual: out.max_cd_residual,
            conservation_defect: out.conservation_defect,
            max_d: out.d.iter().cloned().fold(0.0, f64::max),
        });
        current = out.u_plus;
        if opts.store_slices || slab + 1 == mesh.slabs() {
            slices.push(current.clone());
        }
        bottom = geom.top;
    }
    Ok(SpacetimeSolution { slices, slabs: diags, kruzkov_parameters: cs, slope_bounds: slope })
}
