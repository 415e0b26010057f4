//! Composite Gauss–Legendre rules on fixed panels.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// `panels` equal panels on [a, b], `degree` points each.
    pub fn composite(a: f64, b: f64, panels: usize, degree: usize) -> Rule {
        let gl = GaussLegendre::new(NonZeroUsize::new(degree.max(1)).unwrap());
        let pairs = gl.as_node_weight_pairs();
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * pairs.len());
        let mut weights = Vec::with_capacity(panels * pairs.len());
        for p in 0..panels {
            let lo = a + h * p as f64;
            for (x, w) in pairs {
                nodes.push(lo + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        Rule { nodes, weights }
    }

    /// Panels sized so a frequency `omega` gets about `per_wave` points per period.
    pub fn for_frequency(a: f64, b: f64, omega: f64, degree: usize) -> Rule {
        let waves = (b - a) * omega.abs() / (2.0 * std::f64::consts::PI);
        let panels = (2.0 * waves).ceil() as usize + 4;
        Rule::composite(a, b, panels, degree)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
