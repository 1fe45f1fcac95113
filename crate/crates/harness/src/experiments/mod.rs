//! Drivers behind each subcommand.

mod relaxation;
mod spacetime;

pub use relaxation::{compare_asymptotic, convergence, effective, models_check, run_ap, run_hll, run_parabolic};
pub use spacetime::run_spacetime;

use crate::config::{required, ModelSection};
use crate::error::HarnessError;
use balancelab_core::hyperbolic_fv::{DiscreteField, UniformGrid1D};
use balancelab_core::models::{equilibrium_lift, EulerFriction, EulerM1, RelaxationModel, ShallowWaterFriction, M1};
use nalgebra::SVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One of the registered relaxation models.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    EulerFriction(EulerFriction),
    M1(M1),
    EulerM1(EulerM1),
    ShallowWater(ShallowWaterFriction),
}

pub const MODEL_IDS: [&str; 4] = ["euler-friction", "m1", "euler-m1", "shallow-water-friction"];

/// Runs `$body` with `$m` bound to the concrete model.
macro_rules! with_model {
    ($model:expr, $m:ident => $body:expr) => {
        match $model {
            $crate::experiments::AnyModel::EulerFriction($m) => $body,
            $crate::experiments::AnyModel::M1($m) => $body,
            $crate::experiments::AnyModel::EulerM1($m) => $body,
            $crate::experiments::AnyModel::ShallowWater($m) => $body,
        }
    };
}
pub(crate) use with_model;

impl AnyModel {
    pub fn from_section(s: &ModelSection) -> Result<Self, HarnessError> {
        let id = required(&s.model, ModelSection::TITLE, "model")?;
        let allowed: &[&str] = match id.as_str() {
            "euler-friction" => &["kappa", "gamma"],
            "m1" => &[],
            "euler-m1" => &["cp", "eta", "kappa", "sigma"],
            "shallow-water-friction" => &["g", "kappa0", "delta"],
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown `model` \"{other}\"; expected one of {}",
                    MODEL_IDS.join(", ")
                )))
            }
        };
        let given = [
            ("kappa", s.kappa),
            ("gamma", s.gamma),
            ("cp", s.cp),
            ("eta", s.eta),
            ("sigma", s.sigma),
            ("g", s.g),
            ("kappa0", s.kappa0),
            ("delta", s.delta),
        ];
        if let Some((key, _)) = given.iter().find(|(k, v)| v.is_some() && !allowed.contains(k)) {
            return Err(HarnessError::Config(format!("key `{key}` does not apply to model {id}")));
        }
        Ok(match id.as_str() {
            "euler-friction" => {
                let d = EulerFriction::default().pressure;
                Self::EulerFriction(EulerFriction::new(s.kappa.unwrap_or(d.kappa), s.gamma.unwrap_or(d.gamma))?)
            }
            "m1" => Self::M1(M1),
            "euler-m1" => {
                let d = EulerM1::default();
                Self::EulerM1(EulerM1::new(
                    s.cp.unwrap_or(d.pressure.kappa),
                    s.eta.unwrap_or(d.pressure.gamma),
                    s.kappa.unwrap_or(d.kappa),
                    s.sigma.unwrap_or(d.sigma),
                )?)
            }
            _ => {
                let d = ShallowWaterFriction::default();
                Self::ShallowWater(ShallowWaterFriction::new(
                    s.g.unwrap_or(d.g),
                    s.kappa0.unwrap_or(d.kappa0),
                    s.delta.unwrap_or(d.delta),
                )?)
            }
        })
    }

    pub fn id(&self) -> &'static str {
        with_model!(self, m => m.id())
    }
}

/// Shape of an initial equilibrium profile on `[0, L]`, applied to every conserved component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    GaussianBump,
    Sine,
    Step,
    Random,
}

impl Profile {
    pub fn parse(s: &str, section: &str) -> Result<Self, HarnessError> {
        match s {
            "gaussian-bump" => Ok(Self::GaussianBump),
            "sine" => Ok(Self::Sine),
            "step" => Ok(Self::Step),
            "random" => Ok(Self::Random),
            other => Err(HarnessError::Config(format!(
                "unknown `initial` \"{other}\" in [{section}]; expected gaussian-bump, sine, step or random"
            ))),
        }
    }
}

/// Equilibrium cell values `u(x)` for a profile.
pub fn equilibrium_profile<const C: usize>(
    grid: &UniformGrid1D,
    profile: Profile,
    seed: u64,
) -> Vec<SVector<f64, C>> {
    use rand::Rng;
    let l = grid.length;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grid.centers()
        .into_iter()
        .map(|x| {
            let s = match profile {
                Profile::GaussianBump => 1.0 + 0.5 * (-(x - 0.5 * l).powi(2) / 0.25).exp(),
                Profile::Sine => 1.0 + 0.2 * (2.0 * std::f64::consts::PI * x / l).sin(),
                Profile::Step => {
                    if x < 0.5 * l {
                        2.0
                    } else {
                        0.5
                    }
                }
                Profile::Random => rng.random_range(0.5..2.0),
            };
            SVector::<f64, C>::from_element(s)
        })
        .collect()
}

/// Lifted equilibrium field for a profile.
pub fn equilibrium_field<const N: usize, const C: usize, M: RelaxationModel<N, C>>(
    model: &M,
    grid: UniformGrid1D,
    profile: Profile,
    seed: u64,
) -> Result<DiscreteField<N>, HarnessError> {
    let states = equilibrium_profile::<C>(&grid, profile, seed)
        .iter()
        .map(|u| equilibrium_lift(model, u))
        .collect::<balancelab_core::Result<Vec<_>>>()?;
    Ok(DiscreteField::new(grid, states)?)
}

/// `Δx Σ |a_i − b_i|₁` over the conserved components.
pub fn l1_distance<const C: usize>(a: &[SVector<f64, C>], b: &[SVector<f64, C>], dx: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs().sum()).sum::<f64>() * dx
}
