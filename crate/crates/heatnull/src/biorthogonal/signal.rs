use super::expsum::ExpSum;
use crate::error::{Error, Result};
use crate::spectral::ReductionSchedule;
use std::path::Path;
use std::sync::Arc;

/// Exact form of a control: an exponential sum in canonical (reduced,
/// centered) time plus the schedule that maps it back to the original window.
#[derive(Clone, Debug)]
pub struct ExactControl {
    pub sum: ExpSum,
    pub sched: ReductionSchedule,
}

impl ExactControl {
    /// The same control as an exponential sum in original time t ∈ [0, T].
    pub fn original(&self) -> ExpSum {
        let s = &self.sched;
        self.sum.affine(s.sigma, -s.t_reduced / 2.0, s.shift)
    }
}

/// Scalar control sampled on a uniform grid over `window`.
#[derive(Clone, Debug)]
pub struct ControlSignal {
    pub window: (f64, f64),
    pub samples: Vec<f64>,
    pub norm_cache: Option<f64>,
    pub exact: Option<Arc<ExactControl>>,
}

impl ControlSignal {
    pub fn new(window: (f64, f64), samples: Vec<f64>) -> Self {
        assert!(samples.len() >= 2, "a control needs at least two samples");
        ControlSignal { window, samples, norm_cache: None, exact: None }
    }

    pub fn zero(window: (f64, f64), count: usize) -> Self {
        let mut s = ControlSignal::new(window, vec![0.0; count.max(2)]);
        s.norm_cache = Some(0.0);
        s
    }

    pub fn from_fn(window: (f64, f64), count: usize, f: impl Fn(f64) -> f64) -> Self {
        let dt = (window.1 - window.0) / (count - 1) as f64;
        ControlSignal::new(window, (0..count).map(|i| f(window.0 + dt * i as f64)).collect())
    }

    /// Samples of an exact control on [0, T] in original time.
    pub fn from_exact(exact: ExactControl, count: usize, norm: Option<f64>) -> Self {
        let t = exact.sched.t_orig;
        let samples = exact.original().sample(0.0, t, count);
        ControlSignal { window: (0.0, t), samples, norm_cache: norm, exact: Some(Arc::new(exact)) }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.window.1 - self.window.0
    }

    pub fn dt(&self) -> f64 {
        self.duration() / (self.samples.len() - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.window.0 + self.dt() * i as f64
    }

    /// Piecewise-linear value; zero outside the window.
    pub fn value_at(&self, t: f64) -> f64 {
        if t < self.window.0 || t > self.window.1 {
            return 0.0;
        }
        let u = (t - self.window.0) / self.dt();
        let i = (u.floor() as usize).min(self.samples.len() - 2);
        let w = u - i as f64;
        self.samples[i] * (1.0 - w) + self.samples[i + 1] * w
    }

    /// Trapezoid L² norm of the samples.
    pub fn quadrature_norm(&self) -> f64 {
        let n = self.samples.len();
        let s: f64 = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, v)| if i == 0 || i == n - 1 { 0.5 * v * v } else { v * v })
            .sum();
        (s * self.dt()).sqrt()
    }

    /// Cached exact norm when known, otherwise quadrature.
    pub fn norm(&self) -> f64 {
        self.norm_cache.unwrap_or_else(|| self.quadrature_norm())
    }

    pub fn scaled(&self, w: f64) -> Self {
        let mut out = ControlSignal::new(self.window, self.samples.iter().map(|v| v * w).collect());
        out.norm_cache = self.norm_cache.map(|n| n * w.abs());
        if let Some(e) = &self.exact {
            let p = e.sum.prec;
            out.exact = Some(Arc::new(ExactControl { sum: e.sum.scaled(&rug::Float::with_val(p, w)), sched: e.sched }));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,value\n");
        for (i, v) in self.samples.iter().enumerate() {
            s.push_str(&format!("{:.17e},{:.17e}\n", self.time(i), v));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (ln == 0 && line.starts_with('t')) {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Usage(format!("line {}: expected t,value", ln + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Usage(format!("line {}: {e}", ln + 1)))
            };
            ts.push(parse(it.next())?);
            vs.push(parse(it.next())?);
        }
        if ts.len() < 2 {
            return Err(Error::Usage("control CSV needs at least two rows".into()));
        }
        let dt = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
        for (i, t) in ts.iter().enumerate() {
            if (t - (ts[0] + dt * i as f64)).abs() > 1e-9 * dt.abs().max(1.0) {
                return Err(Error::Usage(format!("control CSV row {} is off the uniform grid", i + 1)));
            }
        }
        Ok(ControlSignal::new((ts[0], ts[ts.len() - 1]), vs))
    }
}

/// Quadrature L² norm over the window.
pub fn control_cost(g: &ControlSignal) -> f64 {
    g.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn costs() {
        assert_eq!(control_cost(&ControlSignal::zero((0.0, 1.0), 10)), 0.0);
        let one = ControlSignal::from_fn((0.0, 2.5), 101, |_| 1.0);
        assert!((control_cost(&one) - 2.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn refinement_stable() {
        let f = |t: f64| (3.0 * t).sin() * (-t).exp();
        let a = ControlSignal::from_fn((0.0, 2.0), 401, f).quadrature_norm();
        let b = ControlSignal::from_fn((0.0, 2.0), 801, f).quadrature_norm();
        assert!((a - b).abs() < 1e-5 * b);
    }

    #[test]
    fn csv_round_trip() {
        let g = ControlSignal::from_fn((-0.5, 0.5), 33, |t| t * t - 0.1);
        let dir = std::env::temp_dir().join(format!("heatnull-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("g.csv");
        g.write_csv(&p).unwrap();
        let h = ControlSignal::read_csv(&p).unwrap();
        assert_eq!(h.samples, g.samples);
        assert!((h.window.0 + 0.5).abs() < 1e-15 && (h.window.1 - 0.5).abs() < 1e-15);
        assert!(ControlSignal::parse_csv("t,value\n0,1\n").is_err());
    }
}
