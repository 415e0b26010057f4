//! Symmetric tridiagonal eigensolver: Sturm bisection plus inverse iteration.

pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut cnt = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let e2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs() + 1.0);
            }
            if q < 0.0 {
                cnt += 1;
            }
        }
        cnt
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// k-th smallest eigenvalue (0-based).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * (lo.abs().max(hi.abs()).max(1e-300)) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit eigenvector for eigenvalue `lam` by inverse iteration.
    pub fn eigenvector(&self, lam: f64) -> Vec<f64> {
        let n = self.len();
        let shift = lam + 1e-13 * (lam.abs() + 1.0);
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * ((i * 7919) % 113) as f64 / 113.0).collect();
        for _ in 0..4 {
            v = self.solve_shifted(shift, &v);
            let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            for a in v.iter_mut() {
                *a /= nrm;
            }
        }
        v
    }

    /// Solve (T − s I) x = b with partial pivoting (band LU).
    fn solve_shifted(&self, s: f64, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            let d = self.diag[0] - s;
            return vec![b[0] / if d == 0.0 { f64::EPSILON } else { d }];
        }
        // rows stored as (l, d, u, u2) in the LAPACK gttrf layout
        let mut dl: Vec<f64> = self.off.clone();
        let mut d: Vec<f64> = self.diag.iter().map(|x| x - s).collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut piv = vec![false; n - 1];
        let tiny = f64::EPSILON * (self.diag.iter().fold(0.0f64, |m, x| m.max(x.abs())) + s.abs() + 1.0);
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                piv[i] = true;
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du[i + 1];
                }
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        let mut x = b.to_vec();
        for i in 0..n - 1 {
            if piv[i] {
                x.swap(i, i + 1);
                x[i + 1] -= dl[i] * x[i];
            } else {
                x[i + 1] -= dl[i] * x[i];
            }
        }
        x[n - 1] /= d[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        x
    }
}
