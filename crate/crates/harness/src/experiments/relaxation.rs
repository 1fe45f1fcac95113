use super::{equilibrium_field, equilibrium_profile, l1_distance, with_model, AnyModel, Profile, MODEL_IDS};
use crate::config::{
    cells, epsilon, positive, required, ApSection, CompareSection, ConvergenceSection, EffectiveSection, HllSection,
    ModelSection, ModelsCheckSection, ParabolicSection,
};
use crate::error::HarnessError;
use crate::output::{num, Table};
use crate::Outcome;
use balancelab_core::ap_scheme::{self, ApRunOptions, SigmaRule, Stop, WaveSpeed};
use balancelab_core::chapman_enskog::{
    closed_form_effective, effective_diffusion_matrix, entropy_structure_residual, first_order_corrector,
    EffectiveEquation,
};
use balancelab_core::hyperbolic_fv::{self, DiscreteField, UniformGrid1D};
use balancelab_core::models::{verify_structural_conditions, RelaxationModel};
use balancelab_core::parabolic::{solve_parabolic, ConstantDiffusion};
use balancelab_core::Error;
use nalgebra::{Matrix1, SVector, Vector1};
use serde_json::json;
use std::f64::consts::PI;

fn header_components(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |i| format!("{prefix}_{i}"))
}

fn field_table<const N: usize>(field: &DiscreteField<N>) -> Table {
    let mut t = Table::new(std::iter::once("x".to_string()).chain(header_components("component", N)));
    for (x, u) in field.grid.centers().into_iter().zip(&field.states) {
        t.push(std::iter::once(num(x)).chain(u.iter().map(|&v| num(v))).collect());
    }
    t
}

fn equilibrium_table<const C: usize>(grid: &UniformGrid1D, u: &[SVector<f64, C>]) -> Table {
    let mut t = Table::new(std::iter::once("x".to_string()).chain(header_components("u", C)));
    for (x, v) in grid.centers().into_iter().zip(u) {
        t.push(std::iter::once(num(x)).chain(v.iter().map(|&w| num(w))).collect());
    }
    t
}

fn conserved<const N: usize, const C: usize, M: RelaxationModel<N, C>>(
    model: &M,
    field: &DiscreteField<N>,
) -> Vec<SVector<f64, C>> {
    let q = model.q();
    field.states.iter().map(|u| q * u).collect()
}

fn convert<const A: usize, const B: usize>(v: &[SVector<f64, A>]) -> Vec<SVector<f64, B>> {
    v.iter().map(|x| SVector::<f64, B>::from_column_slice(x.as_slice())).collect()
}

/// Solves the closed-form effective equation of a model from equilibrium data.
fn parabolic_reference<const C: usize>(
    eq: EffectiveEquation,
    u0: &[SVector<f64, C>],
    t_final: f64,
    dx: f64,
) -> Result<Vec<SVector<f64, C>>, HarnessError> {
    Ok(match eq {
        EffectiveEquation::PorousMedium(p) => convert::<1, C>(&solve_parabolic(&p, &convert::<C, 1>(u0), t_final, dx)?),
        EffectiveEquation::RadiativeHeat(p) => convert::<1, C>(&solve_parabolic(&p, &convert::<C, 1>(u0), t_final, dx)?),
        EffectiveEquation::NonlinearFriction(p) => {
            convert::<1, C>(&solve_parabolic(&p, &convert::<C, 1>(u0), t_final, dx)?)
        }
        EffectiveEquation::CoupledHeat(p) => convert::<2, C>(&solve_parabolic(&p, &convert::<C, 2>(u0), t_final, dx)?),
    })
}

pub fn models_check(model: &ModelSection, s: &ModelsCheckSection, seed: u64) -> Result<Outcome, HarnessError> {
    let samples = s.samples.unwrap_or(1000);
    if samples == 0 {
        return Err(HarnessError::Config("`samples` in [models-check] must be at least 1".into()));
    }
    let models: Vec<AnyModel> = match &model.model {
        Some(_) => vec![AnyModel::from_section(model)?],
        None => MODEL_IDS
            .iter()
            .map(|id| AnyModel::from_section(&ModelSection { model: Some(id.to_string()), ..Default::default() }))
            .collect::<Result<_, _>>()?,
    };
    let mut t = Table::new(["model", "condition", "applicable", "passed", "max_residual", "tolerance", "detail"]);
    let mut failed = Vec::new();
    for m in &models {
        let report = with_model!(m, x => verify_structural_conditions(x, samples, seed))?;
        eprint!("{report}");
        for c in &report.conditions {
            if !c.passed {
                failed.push(format!("{}: {}", m.id(), c.name));
            }
            t.push(vec![
                m.id().into(),
                c.name.clone(),
                c.applicable.to_string(),
                c.passed.to_string(),
                num(c.max_residual),
                num(c.tolerance),
                c.detail.clone(),
            ]);
        }
    }
    let resolved = ModelsCheckSection { samples: Some(samples) };
    let mut out = Outcome::new("models-check", json!({ "model": model, "models-check": resolved }));
    out.add("models-check.csv", t);
    if !failed.is_empty() {
        out.failure = Some(HarnessError::Invariant(format!("structural conditions failed: {}", failed.join(", "))));
    }
    Ok(out)
}

fn effective_rows<const N: usize, const C: usize, M: RelaxationModel<N, C>>(
    model: &M,
    points: usize,
    lo: f64,
    hi: f64,
) -> Result<Table, HarnessError> {
    let has_entropy = model.entropy().is_some();
    let assembled = model.relaxation_exponent() == 1;
    let mut header: Vec<String> = header_components("u", C).collect();
    for i in 0..C {
        header.extend((0..C).map(|j| format!("m_{i}{j}")));
    }
    header.extend(["closed_form_rel_diff".into(), "corrector_residual".into()]);
    if has_entropy && assembled {
        for i in 0..C {
            header.extend((0..C).map(|j| format!("l_{i}{j}")));
        }
        for i in 0..C {
            header.extend((0..N).map(|j| format!("s_{i}{j}")));
        }
        for i in 0..N {
            header.extend((0..N).map(|j| format!("lcal_{i}{j}")));
        }
        header.push("entropy_residual".into());
    }
    let mut t = Table::new(header);
    let axis: Vec<f64> = (0..points)
        .map(|k| if points == 1 { lo } else { lo + (hi - lo) * k as f64 / (points - 1) as f64 })
        .collect();
    let total = points.pow(C as u32);
    let ones = SVector::<f64, C>::from_element(1.0);
    for idx in 0..total {
        let u = SVector::<f64, C>::from_fn(|i, _| axis[(idx / points.pow(i as u32)) % points]);
        let closed = model.target_diffusion(&u, &ones)?;
        let mut row: Vec<String> = u.iter().map(|&v| num(v)).collect();
        if assembled {
            let eff = effective_diffusion_matrix(model, &u)?;
            let mut residual: f64 = 0.0;
            for j in 0..C {
                let unit = SVector::<f64, C>::from_fn(|i, _| if i == j { 1.0 } else { 0.0 });
                let c = first_order_corrector(model, &u, &unit)?;
                residual = residual.max(c.equation_residual).max(c.constraint_residual);
            }
            for i in 0..C {
                row.extend((0..C).map(|j| num(eff.m[(i, j)])));
            }
            row.push(num((eff.m - closed).amax() / closed.amax().max(f64::MIN_POSITIVE)));
            row.push(num(residual));
            if let Some(e) = &eff.entropy {
                for i in 0..C {
                    row.extend((0..C).map(|j| num(e.l[(i, j)])));
                }
                for i in 0..C {
                    row.extend((0..N).map(|j| num(e.s[(i, j)])));
                }
                for i in 0..N {
                    row.extend((0..N).map(|j| num(e.lcal[(i, j)])));
                }
                row.push(num(entropy_structure_residual(model, &u, &ones)?));
            }
        } else {
            for i in 0..C {
                row.extend((0..C).map(|j| num(closed[(i, j)])));
            }
            row.extend([String::new(), String::new()]);
        }
        t.push(row);
    }
    Ok(t)
}

pub fn effective(model: &ModelSection, s: &EffectiveSection) -> Result<Outcome, HarnessError> {
    let m = AnyModel::from_section(model)?;
    let points = s.points.unwrap_or(5);
    if points == 0 {
        return Err(HarnessError::Config("`points` in [effective] must be at least 1".into()));
    }
    let lo = positive(s.u_min.unwrap_or(0.5), EffectiveSection::TITLE, "u-min")?;
    let hi = positive(s.u_max.unwrap_or(2.0), EffectiveSection::TITLE, "u-max")?;
    if hi < lo {
        return Err(HarnessError::Config("`u-max` in [effective] must not be below `u-min`".into()));
    }
    let t = with_model!(&m, x => effective_rows(x, points, lo, hi))?;
    let resolved = EffectiveSection { points: Some(points), u_min: Some(lo), u_max: Some(hi) };
    let mut out = Outcome::new("effective", json!({ "model": model, "effective": resolved }));
    out.add("effective.csv", t);
    Ok(out)
}

fn grid_for(cells_value: Option<usize>, length: Option<f64>, section: &str) -> Result<UniformGrid1D, HarnessError> {
    let n = cells(required(&cells_value, section, "cells")?, section, "cells")?;
    let l = positive(length.unwrap_or(1.0), section, "length")?;
    Ok(UniformGrid1D::new(n, l)?)
}

fn output_name(given: &Option<String>, default: &str) -> String {
    given.clone().unwrap_or_else(|| default.to_string())
}

pub fn run_hll(model: &ModelSection, s: &HllSection, seed: u64) -> Result<Outcome, HarnessError> {
    let title = HllSection::TITLE;
    let m = AnyModel::from_section(model)?;
    let grid = grid_for(s.cells, s.length, title)?;
    let t_final = positive(required(&s.t_final, title, "t-final")?, title, "t-final")?;
    let safety = s.safety.unwrap_or(0.9);
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(HarnessError::Config(format!("`safety` in [{title}] must lie in (0, 1], got {safety}")));
    }
    let initial = s.initial.clone().unwrap_or_else(|| "gaussian-bump".into());
    let profile = Profile::parse(&initial, title)?;
    let output = output_name(&s.output, "run-hll.csv");
    let (table, steps) = with_model!(&m, x => {
        let field = equilibrium_field(x, grid, profile, seed)?;
        let run = hyperbolic_fv::run_hll(x, field, t_final, safety)?;
        (field_table(&run.field), run.steps)
    });
    eprintln!("run-hll: {} steps", steps);
    let resolved = HllSection {
        cells: Some(grid.cells),
        length: Some(grid.length),
        t_final: Some(t_final),
        safety: Some(safety),
        initial: Some(initial),
        output: Some(output.clone()),
    };
    let mut out = Outcome::new("run-hll", json!({ "model": model, "run-hll": resolved }));
    out.add(output, table);
    Ok(out)
}

struct ApSettings {
    grid: UniformGrid1D,
    opts: ApRunOptions,
    t_final: f64,
    profile: Profile,
}

fn ap_options(
    eps: f64,
    b_factor: Option<f64>,
    b_fixed: Option<f64>,
    sigma_rule: &str,
    safety: f64,
    title: &str,
) -> Result<ApRunOptions, HarnessError> {
    let mut opts = ApRunOptions::new(epsilon(eps, title)?);
    opts.safety = safety;
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(HarnessError::Config(format!("`safety` in [{title}] must lie in (0, 1], got {safety}")));
    }
    opts.wave_speed = match (b_fixed, b_factor) {
        (Some(b), _) => WaveSpeed::Fixed(positive(b, title, "b-fixed")?),
        (None, f) => {
            let factor = f.unwrap_or(1.1);
            if !(factor >= 1.0) {
                return Err(HarnessError::Config(format!("`b-factor` in [{title}] must be at least 1, got {factor}")));
            }
            WaveSpeed::Auto { factor }
        }
    };
    opts.sigma_rule = match sigma_rule {
        "target-diffusion" => SigmaRule::TargetDiffusion,
        "zero" => SigmaRule::Zero,
        other => {
            return Err(HarnessError::Config(format!(
                "unknown `sigma-rule` \"{other}\" in [{title}]; expected target-diffusion or zero"
            )))
        }
    };
    Ok(opts)
}

pub fn run_ap(model: &ModelSection, s: &ApSection, seed: u64) -> Result<Outcome, HarnessError> {
    let title = ApSection::TITLE;
    let m = AnyModel::from_section(model)?;
    let grid = grid_for(s.cells, s.length, title)?;
    let eps = required(&s.epsilon, title, "epsilon")?;
    let t_final = positive(required(&s.t_final, title, "t-final")?, title, "t-final")?;
    let sigma_rule = s.sigma_rule.clone().unwrap_or_else(|| "target-diffusion".into());
    let safety = s.safety.unwrap_or(0.9);
    let mut opts = ap_options(eps, s.b_factor, s.b_fixed, &sigma_rule, safety, title)?;
    opts.monitor_invariant_domain = s.monitor_invariant_domain.unwrap_or(false);
    opts.record_entropy = s.record_entropy.unwrap_or(false);
    let initial = s.initial.clone().unwrap_or_else(|| "gaussian-bump".into());
    let settings = ApSettings { grid, opts, t_final, profile: Profile::parse(&initial, title)? };
    let output = output_name(&s.output, "run-ap.csv");
    let stem = output.trim_end_matches(".csv").to_string();
    let (eq_table, state_table, entropy, steps) = with_model!(&m, x => {
        if settings.opts.record_entropy && x.entropy().is_none() {
            return Err(HarnessError::Config(format!("`record-entropy` in [{title}]: model {} has no entropy pair", x.id())));
        }
        let field = equilibrium_field(x, settings.grid, settings.profile, seed)?;
        let run = ap_scheme::run_ap(x, field, &settings.opts, Stop::Time(settings.t_final))?;
        (
            equilibrium_table(&settings.grid, &conserved(x, &run.field)),
            field_table(&run.field),
            run.entropy,
            run.steps,
        )
    });
    eprintln!("run-ap: {steps} steps");
    let resolved = ApSection {
        cells: Some(grid.cells),
        length: Some(grid.length),
        epsilon: Some(eps),
        t_final: Some(t_final),
        b_factor: match opts.wave_speed {
            WaveSpeed::Auto { factor } => Some(factor),
            WaveSpeed::Fixed(_) => None,
        },
        b_fixed: s.b_fixed,
        sigma_rule: Some(sigma_rule),
        safety: Some(safety),
        initial: Some(initial),
        monitor_invariant_domain: Some(opts.monitor_invariant_domain),
        record_entropy: Some(opts.record_entropy),
        output: Some(output.clone()),
    };
    let mut out = Outcome::new("run-ap", json!({ "model": model, "run-ap": resolved }));
    out.add(output, eq_table);
    out.add(format!("{stem}-state.csv"), state_table);
    if !entropy.is_empty() {
        let mut t = Table::new(["step", "entropy"]);
        for (k, e) in entropy.iter().enumerate() {
            t.push(vec![k.to_string(), num(*e)]);
        }
        out.add(format!("{stem}-entropy.csv"), t);
    }
    Ok(out)
}

pub fn run_parabolic(model: &ModelSection, s: &ParabolicSection, seed: u64) -> Result<Outcome, HarnessError> {
    let title = ParabolicSection::TITLE;
    let m = AnyModel::from_section(model)?;
    let grid = grid_for(s.cells, s.length, title)?;
    let t_final = positive(required(&s.t_final, title, "t-final")?, title, "t-final")?;
    let initial = s.initial.clone().unwrap_or_else(|| "gaussian-bump".into());
    let profile = Profile::parse(&initial, title)?;
    let output = output_name(&s.output, "run-parabolic.csv");
    let table = with_model!(&m, x => {
        let eq = closed_form_effective(x)?;
        let field = equilibrium_field(x, grid, profile, seed)?;
        let u = parabolic_reference(eq, &conserved(x, &field), t_final, grid.dx)?;
        equilibrium_table(&grid, &u)
    });
    let resolved = ParabolicSection {
        cells: Some(grid.cells),
        length: Some(grid.length),
        t_final: Some(t_final),
        initial: Some(initial),
        output: Some(output.clone()),
    };
    let mut out = Outcome::new("run-parabolic", json!({ "model": model, "run-parabolic": resolved }));
    out.add(output, table);
    Ok(out)
}

struct Comparison {
    eps: f64,
    steps: usize,
    distance: f64,
    norm: f64,
}

fn compare_model<const N: usize, const C: usize, M: RelaxationModel<N, C>>(
    model: &M,
    grid: UniformGrid1D,
    profile: Profile,
    seed: u64,
    t_final: f64,
    options: &[ApRunOptions],
) -> Result<Vec<Comparison>, HarnessError> {
    let field = equilibrium_field(model, grid, profile, seed)?;
    let eq = closed_form_effective(model)?;
    let reference = parabolic_reference(eq, &conserved(model, &field), t_final, grid.dx)?;
    let norm = reference.iter().map(|u| u.abs().sum()).sum::<f64>() * grid.dx;
    std::thread::scope(|scope| {
        let handles: Vec<_> = options
            .iter()
            .map(|opts| {
                let field = field.clone();
                let reference = &reference;
                scope.spawn(move || -> Result<Comparison, HarnessError> {
                    let run = ap_scheme::run_ap(model, field, opts, Stop::Time(t_final))?;
                    let distance = l1_distance(&conserved(model, &run.field), reference, grid.dx);
                    Ok(Comparison { eps: opts.eps, steps: run.steps, distance, norm })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("comparison thread panicked")).collect()
    })
}

pub fn compare_asymptotic(model: &ModelSection, s: &CompareSection, seed: u64) -> Result<Outcome, HarnessError> {
    let title = CompareSection::TITLE;
    let m = AnyModel::from_section(model)?;
    let grid = grid_for(s.cells, s.length, title)?;
    let t_final = positive(required(&s.t_final, title, "t-final")?, title, "t-final")?;
    let epsilons = s.epsilons.clone().unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4]);
    if epsilons.is_empty() {
        return Err(HarnessError::Config(format!("`epsilons` in [{title}] must not be empty")));
    }
    let safety = s.safety.unwrap_or(0.9);
    let b_factor = s.b_factor.unwrap_or(1.1);
    let options = epsilons
        .iter()
        .map(|&e| ap_options(e, Some(b_factor), None, "target-diffusion", safety, title))
        .collect::<Result<Vec<_>, _>>()?;
    let initial = s.initial.clone().unwrap_or_else(|| "gaussian-bump".into());
    let profile = Profile::parse(&initial, title)?;
    let output = output_name(&s.output, "compare-asymptotic.csv");
    let rows = with_model!(&m, x => compare_model(x, grid, profile, seed, t_final, &options))?;
    let mut t = Table::new(["epsilon", "steps", "l1_distance", "relative_distance"]);
    for r in &rows {
        t.push(vec![num(r.eps), r.steps.to_string(), num(r.distance), num(r.distance / r.norm)]);
        eprintln!("eps = {:e}: L1 distance {:.4e} ({:.3}% of reference)", r.eps, r.distance, 100.0 * r.distance / r.norm);
    }
    let resolved = CompareSection {
        cells: Some(grid.cells),
        length: Some(grid.length),
        t_final: Some(t_final),
        epsilons: Some(epsilons),
        b_factor: Some(b_factor),
        safety: Some(safety),
        initial: Some(initial),
        output: Some(output.clone()),
    };
    let mut out = Outcome::new("compare-asymptotic", json!({ "model": model, "compare-asymptotic": resolved }));
    out.add(output, t);
    Ok(out)
}

/// Averages consecutive blocks of `factor` fine cells.
pub fn block_average<const C: usize>(fine: &[SVector<f64, C>], factor: usize) -> Vec<SVector<f64, C>> {
    fine.chunks(factor).map(|c| c.iter().sum::<SVector<f64, C>>() / factor as f64).collect()
}

/// `(cells, Δx, error, order)` rows; the order of the first row is `None`.
pub fn convergence_rows(cells: &[usize], dxs: &[f64], errors: &[f64]) -> Vec<(usize, f64, f64, Option<f64>)> {
    (0..cells.len())
        .map(|k| (cells[k], dxs[k], errors[k], (k > 0).then(|| (errors[k - 1] / errors[k]).log2())))
        .collect()
}

const HEAT_DIFFUSION: f64 = 0.1;

fn heat_errors(cells: &[usize], length: f64, t_final: f64) -> Result<Vec<f64>, HarnessError> {
    let k = 2.0 * PI / length;
    let problem = ConstantDiffusion { m: Matrix1::new(HEAT_DIFFUSION) };
    let decay = (-k * k * HEAT_DIFFUSION * t_final).exp();
    cells
        .iter()
        .map(|&n| {
            let dx = length / n as f64;
            // Cell averages of 1 + 0.5 sin(kx).
            let avg = |i: usize, amp: f64| {
                let (a, b) = (i as f64 * dx, (i + 1) as f64 * dx);
                1.0 + amp * ((k * a).cos() - (k * b).cos()) / (k * dx)
            };
            let u0: Vec<Vector1<f64>> = (0..n).map(|i| Vector1::new(avg(i, 0.5))).collect();
            let u = solve_parabolic(&problem, &u0, t_final, dx)?;
            Ok(u.iter().enumerate().map(|(i, v)| (v[0] - avg(i, 0.5 * decay)).abs()).sum::<f64>() * dx)
        })
        .collect()
}

struct ApStudy<'a> {
    cells: &'a [usize],
    reference_cells: usize,
    length: f64,
    t_final: f64,
    opts: ApRunOptions,
    profile: Profile,
    seed: u64,
}

fn ap_errors<const N: usize, const C: usize, M: RelaxationModel<N, C>>(
    model: &M,
    study: &ApStudy<'_>,
) -> Result<Vec<f64>, HarnessError> {
    let ApStudy { cells, reference_cells, length, t_final, ref opts, profile, seed } = *study;
    if let Some(&bad) = cells.iter().find(|&&n| n == 0 || reference_cells % n != 0 || n >= reference_cells) {
        return Err(Error::Precondition(format!(
            "mismatched domains: reference grid of {reference_cells} cells does not refine {bad} cells"
        ))
        .into());
    }
    let fine = UniformGrid1D::new(reference_cells, length)?;
    let fine0 = equilibrium_profile::<C>(&fine, profile, seed);
    let reference = parabolic_reference(closed_form_effective(model)?, &fine0, t_final, fine.dx)?;
    std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .iter()
            .map(|&n| {
                let (reference, fine0) = (&reference, &fine0);
                scope.spawn(move || -> Result<f64, HarnessError> {
                    let grid = UniformGrid1D::new(n, length)?;
                    let factor = reference_cells / n;
                    let states = block_average(fine0, factor)
                        .iter()
                        .map(|u| balancelab_core::models::equilibrium_lift(model, u))
                        .collect::<balancelab_core::Result<Vec<_>>>()?;
                    let run = ap_scheme::run_ap(model, DiscreteField::new(grid, states)?, opts, Stop::Time(t_final))?;
                    Ok(l1_distance(&conserved(model, &run.field), &block_average(reference, factor), grid.dx))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("convergence thread panicked")).collect()
    })
}

pub fn convergence(model: &ModelSection, s: &ConvergenceSection, seed: u64) -> Result<Outcome, HarnessError> {
    let title = ConvergenceSection::TITLE;
    let study = s.study.clone().unwrap_or_else(|| "heat".into());
    let cell_list = required(&s.cells, title, "cells")?;
    if cell_list.len() < 3 {
        return Err(HarnessError::Config(format!("`cells` in [{title}] needs at least 3 resolutions")));
    }
    for &n in &cell_list {
        cells(n, title, "cells")?;
    }
    let length = positive(s.length.unwrap_or(1.0), title, "length")?;
    let t_final = positive(s.t_final.unwrap_or(0.1), title, "t-final")?;
    let mut resolved = s.clone();
    resolved.study = Some(study.clone());
    resolved.length = Some(length);
    resolved.t_final = Some(t_final);
    let errors = match study.as_str() {
        "heat" => heat_errors(&cell_list, length, t_final)?,
        "ap" => {
            let m = AnyModel::from_section(model)?;
            let reference_cells = required(&s.reference_cells, title, "reference-cells")?;
            let eps = s.epsilon.unwrap_or(1e-5);
            let opts = ap_options(eps, None, None, "target-diffusion", 0.9, title)?;
            let initial = s.initial.clone().unwrap_or_else(|| "gaussian-bump".into());
            let profile = Profile::parse(&initial, title)?;
            resolved.epsilon = Some(eps);
            resolved.initial = Some(initial);
            let study = ApStudy { cells: &cell_list, reference_cells, length, t_final, opts, profile, seed };
            with_model!(&m, x => ap_errors(x, &study))?
        }
        other => {
            return Err(HarnessError::Config(format!("unknown `study` \"{other}\" in [{title}]; expected heat or ap")))
        }
    };
    let dxs: Vec<f64> = cell_list.iter().map(|&n| length / n as f64).collect();
    let mut t = Table::new(["cells", "dx", "l1_error", "order"]);
    for (n, dx, e, order) in convergence_rows(&cell_list, &dxs, &errors) {
        t.push(vec![n.to_string(), num(dx), num(e), order.map(num).unwrap_or_default()]);
    }
    let output = output_name(&s.output, "convergence.csv");
    resolved.output = Some(output.clone());
    let mut out = Outcome::new("convergence", json!({ "model": model, "convergence": resolved }));
    out.add(output, t);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_study_has_expected_order() {
        let e = heat_errors(&[16, 32, 64], 1.0, 0.1).unwrap();
        for r in convergence_rows(&[16, 32, 64], &[0.0; 3], &e).iter().skip(1) {
            let order = r.3.unwrap();
            assert!((0.8..=2.2).contains(&order), "{order}");
        }
    }

    #[test]
    fn identical_fields_have_zero_distance() {
        let u = vec![Vector1::new(1.0), Vector1::new(2.0)];
        assert_eq!(l1_distance(&u, &u, 0.5), 0.0);
    }

    #[test]
    fn block_average_of_constant() {
        let u = vec![Vector1::new(3.0); 8];
        assert_eq!(block_average(&u, 4), vec![Vector1::new(3.0); 2]);
    }
}
