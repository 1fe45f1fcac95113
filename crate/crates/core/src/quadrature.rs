//! Composite Gauss–Legendre quadrature.

const NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss5<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for k in 0..5 {
        acc += WEIGHTS[k] * f(mid + half * NODES[k]);
    }
    acc * half
}

/// Composite five-point rule with `panels` equal panels.
pub fn composite_gauss5<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let hi = if p + 1 == panels { b } else { lo + h };
        acc += gauss5(lo, hi, &mut f);
    }
    acc
}

/// Nodes and weights of the composite rule, for repeated integration over a fixed interval.
pub fn composite_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(5 * panels);
    for p in 0..panels {
        let lo = a + h * p as f64;
        let hi = if p + 1 == panels { b } else { lo + h };
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for k in 0..5 {
            out.push((mid + half * NODES[k], WEIGHTS[k] * half));
        }
    }
    out
}

/// Number of panels so that each panel is at most `max_panel` long.
pub fn panels_for(length: f64, max_panel: f64) -> usize {
    ((length.abs() / max_panel).ceil() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_degree_nine() {
        let v = gauss5(-1.0, 2.0, |x| x.powi(9) - 3.0 * x.powi(4) + 1.0);
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (32.0 + 1.0) / 5.0 + 3.0;
        assert!((v - exact).abs() < 1e-11 * exact.abs().max(1.0));
    }

    #[test]
    fn composite_sine_on_half_period() {
        let v = composite_gauss5(0.0, std::f64::consts::PI, panels_for(std::f64::consts::PI, 0.25), f64::sin);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn node_list_matches_direct_rule() {
        let nodes = composite_nodes(0.3, 1.7, 3);
        let a: f64 = nodes.iter().map(|(x, w)| w * x.exp()).sum();
        let b = composite_gauss5(0.3, 1.7, 3, f64::exp);
        assert!((a - b).abs() < 1e-15);
    }
}
