use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Slab triangulation of `[0,T]×S¹`.
///
/// Slice `i` carries `J` nodes `θ_0 < … < θ_{J−1} < θ_0 + 2π`. Element `j` of slab `i`
/// is the trapezoid with spacelike faces `[θ_j, θ_{j+1}]` on slices `i` and `i+1`
/// and vertical faces along the node tracks `j` and `j+1`, which are affine in `t`.
/// Element `j` has neighbors `j ± 1 mod J`; the number of vertical faces per element is 2.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeMesh {
    times: Vec<f64>,
    nodes: Vec<Vec<f64>>,
}

/// Vertical faces per element.
pub const FACES_PER_ELEMENT: usize = 2;

impl SpacetimeMesh {
    pub fn new(times: Vec<f64>, nodes: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::Configuration("need at least one slab".into()));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Configuration("slice times must start at 0 and increase".into()));
        }
        if nodes.len() != times.len() {
            return Err(Error::Configuration(format!(
                "{} node sets for {} slices",
                nodes.len(),
                times.len()
            )));
        }
        let j = nodes[0].len();
        if j < 3 {
            return Err(Error::Configuration(format!("need at least 3 elements per slab, got {j}")));
        }
        for (i, s) in nodes.iter().enumerate() {
            if s.len() != j {
                return Err(Error::Configuration(format!("slice {i} has {} nodes, expected {j}", s.len())));
            }
            if s.windows(2).any(|w| !(w[1] > w[0])) || !(s[j - 1] < s[0] + TAU) {
                return Err(Error::Configuration(format!("nodes of slice {i} do not tile the circle")));
            }
        }
        Ok(Self { times, nodes })
    }

    /// `J` equal elements per slab and `slabs` equal slabs, the same nodes on every slice.
    pub fn uniform(elements: usize, slabs: usize, t_final: f64) -> Result<Self> {
        Self::jittered(elements, slabs, t_final, 0.0, 0)
    }

    /// Nodes `θ_j = (j + ξ_j)·2π/J` with `ξ_j` uniform in `[−a/2, a/2]`, shared by all slices.
    pub fn jittered(elements: usize, slabs: usize, t_final: f64, amplitude: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&amplitude) {
            return Err(Error::Configuration(format!("jitter amplitude must lie in [0, 1), got {amplitude}")));
        }
        if slabs == 0 || !(t_final > 0.0) {
            return Err(Error::Configuration("need slabs >= 1 and a positive final time".into()));
        }
        let d = TAU / elements as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base: Vec<f64> = (0..elements)
            .map(|j| {
                let xi = if amplitude > 0.0 { rng.random_range(-0.5 * amplitude..=0.5 * amplitude) } else { 0.0 };
                (j as f64 + xi) * d
            })
            .collect();
        let times: Vec<f64> = (0..=slabs)
            .map(|i| if i == slabs { t_final } else { t_final * i as f64 / slabs as f64 })
            .collect();
        Self::new(times, vec![base; slabs + 1])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slabs(&self) -> usize {
        self.times.len() - 1
    }

    pub fn elements(&self) -> usize {
        self.nodes[0].len()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("at least two slices")
    }

    pub fn slice_nodes(&self, slice: usize) -> &[f64] {
        &self.nodes[slice]
    }

    /// Angular extent `[θ_j, θ_{j+1}]` of face `j` on a slice, unwrapped.
    pub fn face(&self, slice: usize, j: usize) -> (f64, f64) {
        let s = &self.nodes[slice];
        let b = if j + 1 == s.len() { s[0] + TAU } else { s[j + 1] };
        (s[j], b)
    }

    /// Element breakpoints on a slice, for piecewise-constant comparisons.
    pub fn breakpoints(&self, slice: usize) -> Vec<f64> {
        self.nodes[slice].clone()
    }

    pub fn left_neighbor(&self, j: usize) -> usize {
        (j + self.elements() - 1) % self.elements()
    }

    pub fn right_neighbor(&self, j: usize) -> usize {
        (j + 1) % self.elements()
    }

    pub fn tau_max(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn tau_min(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Largest spacelike face length.
    pub fn h(&self) -> f64 {
        (0..self.times.len())
            .flat_map(|i| (0..self.elements()).map(move |j| (i, j)))
            .map(|(i, j)| {
                let (a, b) = self.face(i, j);
                b - a
            })
            .fold(0.0, f64::max)
    }

    /// `((τ_max² + h²)/τ_min, τ_max²/h)`.
    pub fn refinement_ratios(&self) -> (f64, f64) {
        let (tmax, tmin, h) = (self.tau_max(), self.tau_min(), self.h());
        ((tmax * tmax + h * h) / tmin, tmax * tmax / h)
    }
}

/// Checks that both mesh ratios decrease strictly along a refinement sequence.
pub fn check_refinement_sequence(meshes: &[&SpacetimeMesh]) -> Result<()> {
    for w in meshes.windows(2) {
        let (a, b) = (w[0].refinement_ratios(), w[1].refinement_ratios());
        if !(b.0 < a.0 && b.1 < a.1) {
            return Err(Error::Configuration(format!(
                "mesh ratios do not decrease under refinement: {a:?} -> {b:?}"
            )));
        }
    }
    Ok(())
}
