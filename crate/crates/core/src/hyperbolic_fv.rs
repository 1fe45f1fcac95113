//! HLL finite volume scheme for `∂tU + ∂xF(U) = 0` on a periodic grid.

use crate::error::{Error, Result};
use crate::models::{RelaxationModel, State};

/// Slack allowed on the CFL ratio to absorb rounding in `Δt`.
pub(crate) const CFL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid1D {
    pub cells: usize,
    pub dx: f64,
    pub length: f64,
}

impl UniformGrid1D {
    pub fn new(cells: usize, length: f64) -> Result<Self> {
        if cells < 4 {
            return Err(Error::Configuration(format!("need at least 4 cells, got {cells}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Configuration(format!("domain length must be positive, got {length}")));
        }
        Ok(Self { cells, dx: length / cells as f64, length })
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.center(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField<const N: usize> {
    pub grid: UniformGrid1D,
    pub states: Vec<State<N>>,
    pub time: f64,
}

impl<const N: usize> DiscreteField<N> {
    pub fn new(grid: UniformGrid1D, states: Vec<State<N>>) -> Result<Self> {
        if states.len() != grid.cells {
            return Err(Error::Precondition(format!(
                "{} states for {} cells",
                states.len(),
                grid.cells
            )));
        }
        Ok(Self { grid, states, time: 0.0 })
    }

    /// Cell-sum of each component times `Δx`.
    pub fn totals(&self) -> State<N> {
        self.states.iter().fold(State::<N>::zeros(), |a, u| a + u) * self.grid.dx
    }

    pub fn check_admissible<const C: usize, M: RelaxationModel<N, C> + ?Sized>(&self, model: &M) -> Result<()> {
        for (i, u) in self.states.iter().enumerate() {
            model
                .check_state(u)
                .map_err(|e| Error::InvariantDomain { cell: i, reason: e.to_string() })?;
        }
        Ok(())
    }
}

/// `Ū* = ½(U_L+U_R) − (F(U_R)−F(U_L))/(2b)`.
pub fn intermediate_state<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    ul: &State<N>,
    ur: &State<N>,
    b: f64,
) -> State<N> {
    (ul + ur) * 0.5 - (model.flux(ur) - model.flux(ul)) / (2.0 * b)
}

/// `F^HLL = ½(F(U_L)+F(U_R)) − (b/2)(U_R−U_L)`.
pub fn hll_flux<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    ul: &State<N>,
    ur: &State<N>,
    b: f64,
) -> State<N> {
    hll_from_fluxes(ul, ur, &model.flux(ul), &model.flux(ur), b)
}

#[inline]
pub(crate) fn hll_from_fluxes<const N: usize>(
    ul: &State<N>,
    ur: &State<N>,
    fl: &State<N>,
    fr: &State<N>,
    b: f64,
) -> State<N> {
    (fl + fr) * 0.5 - (ur - ul) * (0.5 * b)
}

/// `Δt = safety · Δx / (2b)`.
pub fn cfl_timestep(b: f64, dx: f64, safety: f64) -> Result<f64> {
    if !(b > 0.0 && dx > 0.0) {
        return Err(Error::Precondition(format!("need b > 0 and dx > 0, got {b}, {dx}")));
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::Precondition(format!("safety factor must lie in (0, 1], got {safety}")));
    }
    Ok(safety * dx / (2.0 * b))
}

/// Largest spectral-radius bound over the cells.
pub fn max_spectral_radius<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    states: &[State<N>],
) -> f64 {
    states.iter().map(|u| model.spectral_radius(u)).fold(0.0, f64::max)
}

pub(crate) fn check_cfl(b: f64, dt: f64, dx: f64) -> Result<()> {
    let ratio = b * dt / dx;
    if !(ratio <= 0.5 + CFL_SLACK) || !(dt > 0.0) || !(b > 0.0) {
        return Err(Error::NumericalFailure(format!(
            "CFL condition b·Δt/Δx <= 1/2 violated (b = {b}, Δt = {dt}, Δx = {dx}, ratio {ratio})"
        )));
    }
    Ok(())
}

/// One forward-Euler HLL update with periodic wrap.
pub fn step_homogeneous<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    field: &DiscreteField<N>,
    b: f64,
    dt: f64,
) -> Result<DiscreteField<N>> {
    let dx = field.grid.dx;
    check_cfl(b, dt, dx)?;
    let n = field.states.len();
    let u = &field.states;
    let f: Vec<State<N>> = u.iter().map(|x| model.flux(x)).collect();
    let fluxes: Vec<State<N>> = (0..n)
        .map(|i| {
            let r = (i + 1) % n;
            hll_from_fluxes(&u[i], &u[r], &f[i], &f[r], b)
        })
        .collect();
    let lambda = dt / dx;
    let states: Vec<State<N>> = (0..n)
        .map(|i| {
            let l = (i + n - 1) % n;
            u[i] - (fluxes[i] - fluxes[l]) * lambda
        })
        .collect();
    let next = DiscreteField { grid: field.grid, states, time: field.time + dt };
    next.check_admissible(model)?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HllRun<const N: usize> {
    pub field: DiscreteField<N>,
    pub steps: usize,
}

/// Advances to `t_final` with `b = 1.1 × max spectral radius` recomputed every step.
pub fn run_hll<const N: usize, const C: usize, M: RelaxationModel<N, C> + ?Sized>(
    model: &M,
    field: DiscreteField<N>,
    t_final: f64,
    safety: f64,
) -> Result<HllRun<N>> {
    field.check_admissible(model)?;
    let mut field = field;
    let mut steps = 0;
    let t0 = field.time;
    while field.time < t0 + t_final {
        let b = 1.1 * max_spectral_radius(model, &field.states);
        let mut dt = cfl_timestep(b, field.grid.dx, safety)?;
        let remaining = t0 + t_final - field.time;
        let last = dt >= remaining;
        if last {
            dt = remaining;
        }
        field = step_homogeneous(model, &field, b, dt)?;
        if last {
            field.time = t0 + t_final;
        }
        steps += 1;
    }
    Ok(HllRun { field, steps })
}
