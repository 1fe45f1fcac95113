use crate::config::{positive, required, SpacetimeSection};
use crate::error::HarnessError;
use crate::output::{num, Table};
use crate::Outcome;
use balancelab_core::spacetime::{
    discretize_initial_data, kruzkov_contraction, solve, uniform_dissipation, DRule, FluxField, FluxPreset,
    SpacetimeMesh, SpacetimeOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::f64::consts::PI;

fn box_data(theta: f64) -> f64 {
    if (0.5 * PI..1.5 * PI).contains(&theta.rem_euclid(2.0 * PI)) {
        1.0
    } else {
        0.0
    }
}

fn smooth_data(theta: f64) -> f64 {
    0.5 + 0.25 * theta.sin()
}

/// Element values of the initial data, optionally shifted by `shift` in `θ`.
fn initial_values(
    field: &dyn FluxField,
    mesh: &SpacetimeMesh,
    initial: &str,
    shift: f64,
    seed: u64,
) -> Result<Vec<f64>, HarnessError> {
    Ok(match initial {
        "box" => discretize_initial_data(field, mesh, |th| box_data(th - shift))?,
        "smooth" => discretize_initial_data(field, mesh, |th| smooth_data(th - shift))?,
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<f64> = (0..mesh.elements()).map(|_| rng.random_range(0.0..1.0)).collect();
            // A shift moves the random data by whole elements.
            let k = (shift / (2.0 * PI) * mesh.elements() as f64).round() as usize % mesh.elements();
            let n = values.len();
            (0..n).map(|j| values[(j + n - k) % n]).collect()
        }
        other => {
            return Err(HarnessError::Config(format!(
                "unknown `initial` \"{other}\" in [run-spacetime]; expected box, smooth or random"
            )))
        }
    })
}

pub fn run_spacetime(s: &SpacetimeSection, seed: u64) -> Result<Outcome, HarnessError> {
    let title = SpacetimeSection::TITLE;
    let preset_id = s.preset.clone().unwrap_or_else(|| "flat-burgers".into());
    let preset = FluxPreset::from_id(&preset_id).ok_or_else(|| {
        HarnessError::Config(format!(
            "unknown `preset` \"{preset_id}\" in [{title}]; expected flat-burgers, variable-coefficient or pullback-shear"
        ))
    })?;
    let elements = required(&s.elements, title, "elements")?;
    if elements < 3 {
        return Err(HarnessError::Config(format!("`elements` in [{title}] must be at least 3, got {elements}")));
    }
    let slabs = required(&s.slabs, title, "slabs")?;
    let t_final = positive(required(&s.t_final, title, "t-final")?, title, "t-final")?;
    let jitter = s.jitter.unwrap_or(0.0);
    let initial = s.initial.clone().unwrap_or_else(|| "box".into());
    let d_factor = s.d_factor.unwrap_or(1.1);
    let kruzkov = s.kruzkov_parameters.unwrap_or(5);
    let enforce_dei = s.enforce_dei.unwrap_or(false);
    let contraction = s.contraction.unwrap_or(false);
    let shift = s.contraction_shift.unwrap_or(0.1);
    let stride = s.slice_stride.unwrap_or(1).max(1);
    let output = s.output.clone().unwrap_or_else(|| "run-spacetime.csv".into());
    let stem = output.trim_end_matches(".csv").to_string();

    let field = preset.build(t_final)?;
    let mesh = SpacetimeMesh::jittered(elements, slabs, t_final, jitter, seed)?;
    let u_init = initial_values(field.as_ref(), &mesh, &initial, 0.0, seed)?;
    let mut opts = SpacetimeOptions {
        d_rule: DRule::Global { factor: d_factor },
        kruzkov_parameters: kruzkov,
        store_slices: true,
        enforce_dei,
    };
    let mut contraction_series = None;
    let solution = if contraction {
        let v_init = initial_values(field.as_ref(), &mesh, &initial, shift, seed)?;
        let (lo, hi) = u_init.iter().chain(&v_init).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
        let w = hi - lo;
        opts.d_rule = DRule::Fixed(uniform_dissipation(field.as_ref(), &mesh, lo - 0.5 * w, hi + 0.5 * w, d_factor));
        let u = solve(field.as_ref(), &mesh, &u_init, &opts)?;
        let v = solve(field.as_ref(), &mesh, &v_init, &opts)?;
        contraction_series = Some(kruzkov_contraction(field.as_ref(), &mesh, &u, &v)?);
        u
    } else {
        solve(field.as_ref(), &mesh, &u_init, &opts)?
    };

    let times = mesh.times();
    let mut slices = Table::new(["slice", "t", "theta_center", "u"]);
    for (i, values) in solution.slices.iter().enumerate() {
        if i % stride != 0 && i + 1 != solution.slices.len() {
            continue;
        }
        for (j, &u) in values.iter().enumerate() {
            let (a, b) = mesh.face(i, j);
            slices.push(vec![i.to_string(), num(times[i]), num(0.5 * (a + b)), num(u)]);
        }
    }
    let mut diag = Table::new(["slice", "t", "contraction_integral", "dissipation_total", "max_entropy_residual"]);
    let mut cumulative = 0.0;
    for i in 0..=mesh.slabs() {
        let residual = if i == 0 {
            String::new()
        } else {
            cumulative += solution.slabs[i - 1].dissipation;
            if kruzkov > 0 {
                num(solution.slabs[i - 1].max_entropy_residual)
            } else {
                String::new()
            }
        };
        let contraction_value = contraction_series.as_ref().map(|c| num(c[i])).unwrap_or_default();
        diag.push(vec![i.to_string(), num(times[i]), contraction_value, num(cumulative), residual]);
    }
    eprintln!(
        "run-spacetime: {} slabs, total dissipation {:.4e}, max entropy residual {:.3e}",
        mesh.slabs(),
        solution.dissipation_total(),
        solution.max_entropy_residual()
    );
    let resolved = SpacetimeSection {
        preset: Some(preset_id),
        elements: Some(elements),
        slabs: Some(slabs),
        t_final: Some(t_final),
        jitter: Some(jitter),
        initial: Some(initial),
        d_factor: Some(d_factor),
        kruzkov_parameters: Some(kruzkov),
        enforce_dei: Some(enforce_dei),
        contraction: Some(contraction),
        contraction_shift: Some(shift),
        slice_stride: Some(stride),
        output: Some(output.clone()),
    };
    let mut out = Outcome::new("run-spacetime", json!({ "run-spacetime": resolved }));
    out.add(output, slices);
    out.add(format!("{stem}-diagnostics.csv"), diag);
    Ok(out)
}
