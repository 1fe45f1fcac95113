#![allow(dead_code)]

use balancelab_core::hyperbolic_fv::{DiscreteField, UniformGrid1D};
use balancelab_core::spacetime::{
    discretize_initial_data, solve, FluxField, SpacetimeMesh, SpacetimeOptions, SpacetimeSolution,
};
use nalgebra::Vector2;
use std::f64::consts::PI;

/// Classical Lax–Friedrichs step for `∂tu + ∂θ f(u) = 0` on a uniform periodic grid.
pub fn classical_lf_step(u: &[f64], f: impl Fn(f64) -> f64, dtheta: f64, tau: f64, alpha: f64) -> Vec<f64> {
    let n = u.len();
    let flux = |a: f64, b: f64| 0.5 * (f(a) + f(b)) - 0.5 * alpha * (b - a);
    (0..n)
        .map(|i| {
            let l = (i + n - 1) % n;
            let r = (i + 1) % n;
            u[i] - tau / dtheta * (flux(u[i], u[r]) - flux(u[l], u[i]))
        })
        .collect()
}

/// `u0 = 1` on `[π/2, 3π/2)`, `0` elsewhere.
pub fn box_data(theta: f64) -> f64 {
    let x = theta.rem_euclid(2.0 * PI);
    if (0.5 * PI..1.5 * PI).contains(&x) {
        1.0
    } else {
        0.0
    }
}

/// Entropy solution of Burgers' equation from [`box_data`] before the rarefaction meets the shock.
pub fn box_exact(theta: f64, t: f64) -> f64 {
    let x = theta.rem_euclid(2.0 * PI);
    let a = 0.5 * PI;
    let shock = 1.5 * PI + 0.5 * t;
    if x >= a && x < a + t {
        (x - a) / t
    } else if (x >= a + t && x < shock) || (shock > 2.0 * PI && x < shock - 2.0 * PI) {
        1.0
    } else {
        0.0
    }
}

pub fn smooth_data(theta: f64) -> f64 {
    0.5 + 0.25 * theta.sin()
}

/// Slab count so that `τ ≈ cfl·h/speed` on a mesh with `elements` faces.
pub fn slabs_for(elements: usize, t_final: f64, cfl: f64, speed: f64) -> usize {
    let h = 2.0 * PI / elements as f64;
    (t_final / (cfl * h / speed)).ceil() as usize
}

pub fn run_spacetime(
    field: &dyn FluxField,
    mesh: &SpacetimeMesh,
    u0: impl Fn(f64) -> f64,
    opts: &SpacetimeOptions,
) -> SpacetimeSolution {
    let init = discretize_initial_data(field, mesh, u0).expect("initial data");
    solve(field, mesh, &init, opts).expect("spacetime run")
}

/// Euler–friction equilibrium field `ρ(x)`, `m = 0`.
pub fn equilibrium_field(cells: usize, length: f64, rho: impl Fn(f64) -> f64) -> DiscreteField<2> {
    let grid = UniformGrid1D::new(cells, length).unwrap();
    let states = grid.centers().into_iter().map(|x| Vector2::new(rho(x), 0.0)).collect();
    DiscreteField::new(grid, states).unwrap()
}

pub fn gaussian_bump(x: f64) -> f64 {
    1.0 + 0.5 * (-(x - 2.0) * (x - 2.0) / 0.25).exp()
}
