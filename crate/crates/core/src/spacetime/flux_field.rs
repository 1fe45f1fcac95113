use crate::error::{Error, Result};
use crate::quadrature::{composite_gauss5, panels_for};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

/// A parametrized 1-form `ω(ū) = ω⁰(ū;t,θ)dθ + ω¹(ū;t,θ)dt` on `[0,T]×S¹`.
///
/// `d(ω(u)) = 0` reads `∂t ω⁰(u) − ∂θ ω¹(u) = 0` in coordinates.
pub trait FluxField: Send + Sync {
    fn name(&self) -> &str;
    fn omega0(&self, u: f64, t: f64, theta: f64) -> f64;
    fn omega1(&self, u: f64, t: f64, theta: f64) -> f64;
    fn d_omega0(&self, u: f64, t: f64, theta: f64) -> f64;
    fn d_omega1(&self, u: f64, t: f64, theta: f64) -> f64;

    /// `dθ`-coefficient of the entropy flux of `U(u) = u²/2`: `∫₀^u v ∂vω⁰(v) dv`.
    fn entropy0(&self, u: f64, t: f64, theta: f64) -> f64 {
        composite_gauss5(0.0, u, panels_for(u.abs(), 0.5), |v| v * self.d_omega0(v, t, theta))
    }

    /// `dt`-coefficient of the quadratic entropy flux: `∫₀^u v ∂vω¹(v) dv`.
    fn entropy1(&self, u: f64, t: f64, theta: f64) -> f64 {
        composite_gauss5(0.0, u, panels_for(u.abs(), 0.5), |v| v * self.d_omega1(v, t, theta))
    }
}

pub type Coefficient = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Flux field given by closures `(ū, t, θ) ↦ value`.
#[derive(Clone)]
pub struct ClosureField {
    name: String,
    omega0: Coefficient,
    omega1: Coefficient,
    d_omega0: Coefficient,
    d_omega1: Coefficient,
}

impl fmt::Debug for ClosureField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosureField").field("name", &self.name).finish_non_exhaustive()
    }
}

impl ClosureField {
    pub fn new(
        name: impl Into<String>,
        omega0: Coefficient,
        omega1: Coefficient,
        d_omega0: Coefficient,
        d_omega1: Coefficient,
    ) -> Self {
        Self { name: name.into(), omega0, omega1, d_omega0, d_omega1 }
    }

    /// `ω⁰ = w(θ)g(ū)`, `ω¹ = −f(ū)`; closed for any `w`, `g`, `f`.
    pub fn static_field(name: impl Into<String>, w: Scalar, g: Scalar, dg: Scalar, f: Scalar, df: Scalar) -> Self {
        let (w0, w1) = (w.clone(), w);
        Self::new(
            name,
            Arc::new(move |u, _, th| w0(th) * g(u)),
            Arc::new(move |u, _, _| -f(u)),
            Arc::new(move |u, _, th| w1(th) * dg(u)),
            Arc::new(move |u, _, _| -df(u)),
        )
    }

    /// `ω⁰ = ū`, `ω¹ = −ū²/2`: Burgers' equation `∂tu + ∂θ(u²/2) = 0`.
    pub fn flat_burgers() -> Self {
        Self::static_field(
            "flat-burgers",
            Arc::new(|_| 1.0),
            Arc::new(|u| u),
            Arc::new(|_| 1.0),
            Arc::new(|u| 0.5 * u * u),
            Arc::new(|u| u),
        )
    }

    /// `ω⁰ = (1 + ½ sin θ)ū`, `ω¹ = −ū²/2`.
    pub fn variable_coefficient() -> Self {
        Self::static_field(
            "variable-coefficient",
            Arc::new(|th: f64| 1.0 + 0.5 * th.sin()),
            Arc::new(|u| u),
            Arc::new(|_| 1.0),
            Arc::new(|u| 0.5 * u * u),
            Arc::new(|u| u),
        )
    }
}

impl FluxField for ClosureField {
    fn name(&self) -> &str {
        &self.name
    }
    fn omega0(&self, u: f64, t: f64, theta: f64) -> f64 {
        (self.omega0)(u, t, theta)
    }
    fn omega1(&self, u: f64, t: f64, theta: f64) -> f64 {
        (self.omega1)(u, t, theta)
    }
    fn d_omega0(&self, u: f64, t: f64, theta: f64) -> f64 {
        (self.d_omega0)(u, t, theta)
    }
    fn d_omega1(&self, u: f64, t: f64, theta: f64) -> f64 {
        (self.d_omega1)(u, t, theta)
    }
}

/// A diffeomorphism `(t, θ') ↦ (t, Φ(t, θ'))` of `[0,T]×S¹` that preserves slices.
pub trait SliceDiffeo: Send + Sync {
    fn map(&self, t: f64, theta: f64) -> f64;
    /// `∂θ'Φ`.
    fn d_theta(&self, t: f64, theta: f64) -> f64;
    /// `∂tΦ`.
    fn d_t(&self, t: f64, theta: f64) -> f64;
    fn inverse(&self, t: f64, theta: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Identity;

impl SliceDiffeo for Identity {
    fn map(&self, _: f64, theta: f64) -> f64 {
        theta
    }
    fn d_theta(&self, _: f64, _: f64) -> f64 {
        1.0
    }
    fn d_t(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn inverse(&self, _: f64, theta: f64) -> f64 {
        theta
    }
}

/// `θ = θ' + rate·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shear {
    pub rate: f64,
}

impl SliceDiffeo for Shear {
    fn map(&self, t: f64, theta: f64) -> f64 {
        theta + self.rate * t
    }
    fn d_theta(&self, _: f64, _: f64) -> f64 {
        1.0
    }
    fn d_t(&self, _: f64, _: f64) -> f64 {
        self.rate
    }
    fn inverse(&self, t: f64, theta: f64) -> f64 {
        theta - self.rate * t
    }
}

/// `θ = θ' + a sin θ'` with `|a| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reparametrization {
    pub amplitude: f64,
}

impl SliceDiffeo for Reparametrization {
    fn map(&self, _: f64, theta: f64) -> f64 {
        theta + self.amplitude * theta.sin()
    }
    fn d_theta(&self, _: f64, theta: f64) -> f64 {
        1.0 + self.amplitude * theta.cos()
    }
    fn d_t(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn inverse(&self, _: f64, theta: f64) -> f64 {
        let a = self.amplitude;
        let mut x = theta;
        for _ in 0..100 {
            let r = x + a * x.sin() - theta;
            let step = r / (1.0 + a * x.cos());
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        x
    }
}

/// Pullback `Φ*ω`: `ω'⁰ = ω⁰∘Φ·∂θ'Φ`, `ω'¹ = ω⁰∘Φ·∂tΦ + ω¹∘Φ`.
#[derive(Clone)]
pub struct Pullback<F, D> {
    name: String,
    field: F,
    diffeo: D,
}

impl<F: FluxField, D: SliceDiffeo> Pullback<F, D> {
    /// Checks orientation and the degree-one wrap of `Φ` on a sample grid over `t ∈ [0, t_max]`.
    pub fn new(field: F, diffeo: D, t_max: f64) -> Result<Self> {
        for i in 0..=16 {
            let t = t_max * i as f64 / 16.0;
            for j in 0..64 {
                let th = TAU * j as f64 / 64.0;
                let jac = diffeo.d_theta(t, th);
                if !(jac > 0.0 && jac.is_finite()) {
                    return Err(Error::Domain(format!(
                        "map is orientation reversing or degenerate at (t, θ) = ({t}, {th}), ∂θΦ = {jac}"
                    )));
                }
                let wrap = diffeo.map(t, th + TAU) - diffeo.map(t, th) - TAU;
                if wrap.abs() > 1e-10 {
                    return Err(Error::Domain(format!("map does not wrap the circle once at t = {t}")));
                }
            }
        }
        let name = format!("pullback({})", field.name());
        Ok(Self { name, field, diffeo })
    }

    pub fn diffeo(&self) -> &D {
        &self.diffeo
    }

    pub fn base(&self) -> &F {
        &self.field
    }
}

impl<F: FluxField, D: SliceDiffeo> FluxField for Pullback<F, D> {
    fn name(&self) -> &str {
        &self.name
    }
    fn omega0(&self, u: f64, t: f64, theta: f64) -> f64 {
        let th = self.diffeo.map(t, theta);
        self.field.omega0(u, t, th) * self.diffeo.d_theta(t, theta)
    }
    fn omega1(&self, u: f64, t: f64, theta: f64) -> f64 {
        let th = self.diffeo.map(t, theta);
        self.field.omega0(u, t, th) * self.diffeo.d_t(t, theta) + self.field.omega1(u, t, th)
    }
    fn d_omega0(&self, u: f64, t: f64, theta: f64) -> f64 {
        let th = self.diffeo.map(t, theta);
        self.field.d_omega0(u, t, th) * self.diffeo.d_theta(t, theta)
    }
    fn d_omega1(&self, u: f64, t: f64, theta: f64) -> f64 {
        let th = self.diffeo.map(t, theta);
        self.field.d_omega0(u, t, th) * self.diffeo.d_t(t, theta) + self.field.d_omega1(u, t, th)
    }
    fn entropy0(&self, u: f64, t: f64, theta: f64) -> f64 {
        let th = self.diffeo.map(t, theta);
        self.field.entropy0(u, t, th) * self.diffeo.d_theta(t, theta)
    }
    fn entropy1(&self, u: f64, t: f64, theta: f64) -> f64 {
        let th = self.diffeo.map(t, theta);
        self.field.entropy0(u, t, th) * self.diffeo.d_t(t, theta) + self.field.entropy1(u, t, th)
    }
}

impl<F: FluxField, D: SliceDiffeo> fmt::Debug for Pullback<F, D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pullback").field("name", &self.name).finish_non_exhaustive()
    }
}

/// Named flux fields available to the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxPreset {
    FlatBurgers,
    VariableCoefficient,
    /// Variable-coefficient field pulled back by the shear `θ = θ' + 0.3t`.
    PullbackShear,
}

pub const SHEAR_RATE: f64 = 0.3;

impl FluxPreset {
    pub const ALL: [FluxPreset; 3] = [FluxPreset::FlatBurgers, FluxPreset::VariableCoefficient, FluxPreset::PullbackShear];

    pub fn id(&self) -> &'static str {
        match self {
            FluxPreset::FlatBurgers => "flat-burgers",
            FluxPreset::VariableCoefficient => "variable-coefficient",
            FluxPreset::PullbackShear => "pullback-shear",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.id() == id)
    }

    pub fn build(&self, t_max: f64) -> Result<Arc<dyn FluxField>> {
        Ok(match self {
            FluxPreset::FlatBurgers => Arc::new(ClosureField::flat_burgers()),
            FluxPreset::VariableCoefficient => Arc::new(ClosureField::variable_coefficient()),
            FluxPreset::PullbackShear => {
                Arc::new(Pullback::new(ClosureField::variable_coefficient(), Shear { rate: SHEAR_RATE }, t_max)?)
            }
        })
    }
}

/// Seeded sample points `(ū, t, θ)` with `ū ∈ u_range`, `t ∈ [0, t_max]`, `θ ∈ [0, 2π)`.
pub fn sample_points(seed: u64, count: usize, u_range: (f64, f64), t_max: f64) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (
                rng.random_range(u_range.0..=u_range.1),
                rng.random_range(0.0..=t_max),
                rng.random_range(0.0..TAU),
            )
        })
        .collect()
}

/// Largest central-difference value of `|∂tω⁰ − ∂θω¹|` over the samples.
pub fn geometry_compatibility_check(field: &dyn FluxField, samples: &[(f64, f64, f64)]) -> f64 {
    let h = 1e-5;
    samples
        .iter()
        .map(|&(u, t, th)| {
            let dt = (field.omega0(u, t + h, th) - field.omega0(u, t - h, th)) / (2.0 * h);
            let dth = (field.omega1(u, t, th + h) - field.omega1(u, t, th - h)) / (2.0 * h);
            (dt - dth).abs()
        })
        .fold(0.0, f64::max)
}

/// Bounds of `∂ūω⁰(0;t,θ)` over a slice grid; errors when it is not positive.
pub fn check_hyperbolicity(field: &dyn FluxField, t_max: f64) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=16 {
        let t = t_max * i as f64 / 16.0;
        for j in 0..256 {
            let th = TAU * j as f64 / 256.0;
            let d = field.d_omega0(0.0, t, th);
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Hyperbolicity(format!(
                    "∂ω⁰(0) = {d} at (t, θ) = ({t}, {th}) is not positive"
                )));
            }
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_entropy_flux_for_burgers() {
        let f = ClosureField::flat_burgers();
        assert!((f.entropy0(0.7, 0.0, 1.0) - 0.245).abs() < 1e-15);
        assert!((f.entropy1(0.7, 0.0, 1.0) + 0.7f64.powi(3) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reparametrization_inverse() {
        let d = Reparametrization { amplitude: 0.2 };
        for k in 0..20 {
            let th = 0.3 * k as f64;
            assert!((d.map(0.0, d.inverse(0.0, th)) - th).abs() < 1e-14);
        }
    }

    #[test]
    fn reversing_map_rejected() {
        let r = Pullback::new(ClosureField::flat_burgers(), Reparametrization { amplitude: 1.5 }, 1.0);
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
