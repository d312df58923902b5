//! Dense-grid oracles and histogram distances shared by integration tests.

#![allow(dead_code)]

/// Equal-width bins on `[lo, hi)` plus one overflow bin for everything
/// outside.
#[derive(Debug, Clone, Copy)]
pub struct Bins {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Bins {
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        Bins { lo, hi, count }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn index(&self, x: f64) -> usize {
        if x >= self.lo && x < self.hi {
            (((x - self.lo) / self.width()) as usize).min(self.count - 1)
        } else {
            self.count
        }
    }

    /// Normalized histogram of weighted points.
    pub fn histogram(&self, points: impl IntoIterator<Item = (f64, f64)>) -> Vec<f64> {
        let mut h = vec![0.0; self.count + 1];
        for (x, w) in points {
            h[self.index(x)] += w;
        }
        normalize(h)
    }

    /// Normalized bin masses of the unnormalized density `f`, integrated by
    /// the midpoint rule over `support` with `steps` cells.
    pub fn grid_masses(&self, f: impl Fn(f64) -> f64, support: (f64, f64), steps: usize) -> Vec<f64> {
        let dx = (support.1 - support.0) / steps as f64;
        let mut h = vec![0.0; self.count + 1];
        for i in 0..steps {
            let x = support.0 + (i as f64 + 0.5) * dx;
            h[self.index(x)] += f(x) * dx;
        }
        normalize(h)
    }
}

pub fn normalize(mut h: Vec<f64>) -> Vec<f64> {
    let total: f64 = h.iter().sum();
    assert!(total > 0.0, "histogram has no mass");
    h.iter_mut().for_each(|v| *v /= total);
    h
}

/// Total variation distance between two normalized histograms.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn gaussian(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

/// `int_{a}^{b} f(x) dx` by the midpoint rule.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let dx = (b - a) / steps as f64;
    (0..steps).map(|i| f(a + (i as f64 + 0.5) * dx)).sum::<f64>() * dx
}

/// Spearman rank correlation (no tie correction needed for distinct values).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}
