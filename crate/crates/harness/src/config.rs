//! Experiment configuration: a TOML file of `[section]` tables with flat `key = value`
//! pairs, merged with command-line flags (flags win).

use crate::error::HarnessError;
use clap::Args;
use serde::{Deserialize, Serialize};
use std::path::Path;

macro_rules! section {
    ($(#[$m:meta])* $name:ident [$title:literal] { $($(#[$fm:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize, Args)]
        #[serde(deny_unknown_fields, rename_all = "kebab-case")]
        pub struct $name {
            $($(#[$fm])* #[arg(long)] pub $field: Option<$ty>,)*
        }

        impl $name {
            pub const TITLE: &'static str = $title;

            /// Values given on the command line take precedence over the file.
            pub fn merged(self, file: Option<&Self>) -> Self {
                let file = file.cloned().unwrap_or_default();
                Self { $($field: self.$field.or(file.$field),)* }
            }
        }
    };
}

section!(
    /// Model id and parameter overrides.
    ModelSection ["model"] {
        /// euler-friction, m1, euler-m1 or shallow-water-friction.
        model: String,
        kappa: f64,
        gamma: f64,
        cp: f64,
        eta: f64,
        sigma: f64,
        g: f64,
        kappa0: f64,
        delta: f64,
    }
);

section!(ModelsCheckSection ["models-check"] {
    samples: usize,
});

section!(EffectiveSection ["effective"] {
    /// Grid points per conserved component.
    points: usize,
    u_min: f64,
    u_max: f64,
});

section!(HllSection ["run-hll"] {
    cells: usize,
    length: f64,
    t_final: f64,
    safety: f64,
    /// gaussian-bump, sine, step or random.
    initial: String,
    output: String,
});

section!(ApSection ["run-ap"] {
    cells: usize,
    length: f64,
    epsilon: f64,
    t_final: f64,
    /// `b = factor × spectral radius`; ignored when `b-fixed` is set.
    b_factor: f64,
    b_fixed: f64,
    /// target-diffusion or zero.
    sigma_rule: String,
    safety: f64,
    initial: String,
    monitor_invariant_domain: bool,
    record_entropy: bool,
    output: String,
});

section!(ParabolicSection ["run-parabolic"] {
    cells: usize,
    length: f64,
    t_final: f64,
    initial: String,
    output: String,
});

section!(CompareSection ["compare-asymptotic"] {
    cells: usize,
    length: f64,
    t_final: f64,
    #[arg(value_delimiter = ',')]
    epsilons: Vec<f64>,
    b_factor: f64,
    safety: f64,
    initial: String,
    output: String,
});

section!(SpacetimeSection ["run-spacetime"] {
    /// flat-burgers, variable-coefficient or pullback-shear.
    preset: String,
    elements: usize,
    slabs: usize,
    t_final: f64,
    jitter: f64,
    /// box, smooth or random.
    initial: String,
    d_factor: f64,
    kruzkov_parameters: usize,
    enforce_dei: bool,
    /// Also evolve data shifted by `contraction-shift` and report the L¹ contraction integral.
    contraction: bool,
    contraction_shift: f64,
    /// Write every n-th slice.
    slice_stride: usize,
    output: String,
});

section!(ConvergenceSection ["convergence"] {
    /// heat (Fourier oracle) or ap (late-time scheme against a fine parabolic reference).
    study: String,
    #[arg(value_delimiter = ',')]
    cells: Vec<usize>,
    reference_cells: usize,
    length: f64,
    t_final: f64,
    epsilon: f64,
    initial: String,
    output: String,
});

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub model: Option<ModelSection>,
    pub models_check: Option<ModelsCheckSection>,
    pub effective: Option<EffectiveSection>,
    pub run_hll: Option<HllSection>,
    pub run_ap: Option<ApSection>,
    pub run_parabolic: Option<ParabolicSection>,
    pub compare_asymptotic: Option<CompareSection>,
    pub run_spacetime: Option<SpacetimeSection>,
    pub convergence: Option<ConvergenceSection>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

/// A required key.
pub fn required<T: Clone>(value: &Option<T>, section: &str, key: &str) -> Result<T, HarnessError> {
    value
        .clone()
        .ok_or_else(|| HarnessError::Config(format!("missing key `{key}` in [{section}]")))
}

pub fn positive(value: f64, section: &str, key: &str) -> Result<f64, HarnessError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(HarnessError::Config(format!("`{key}` in [{section}] must be positive, got {value}")))
    }
}

pub fn epsilon(value: f64, section: &str) -> Result<f64, HarnessError> {
    if value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(HarnessError::Config(format!("`epsilon` in [{section}] must lie in (0, 1], got {value}")))
    }
}

pub fn cells(value: usize, section: &str, key: &str) -> Result<usize, HarnessError> {
    if value >= 4 {
        Ok(value)
    } else {
        Err(HarnessError::Config(format!("`{key}` in [{section}] must be at least 4, got {value}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::parse("[run-ap]\ncells = 10\nepsilonn = 0.1\n").unwrap_err();
        assert!(err.to_string().contains("epsilonn"));
        assert!(ExperimentConfig::parse("[nonsense]\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = HllSection { cells: Some(10), length: Some(2.0), ..Default::default() };
        let cli = HllSection { cells: Some(20), ..Default::default() };
        let m = cli.merged(Some(&file));
        assert_eq!((m.cells, m.length), (Some(20), Some(2.0)));
    }

    #[test]
    fn epsilon_range() {
        assert!(epsilon(0.0, "run-ap").unwrap_err().to_string().contains("epsilon"));
        assert!(epsilon(1.0, "run-ap").is_ok());
    }
}
