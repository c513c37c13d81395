//! Reference implementations written without reusing library internals.

use std::collections::HashMap;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Natural cubic spline from the full 4(n-1) coefficient system.
pub struct DenseSpline {
    xs: Vec<f64>,
    coef: Vec<[f64; 4]>,
}

impl DenseSpline {
    pub fn new(xs: &[f64], ys: &[f64]) -> Self {
        let m = xs.len() - 1;
        let n = 4 * m;
        let mut a = vec![vec![0.0; n]; n];
        let mut b = vec![0.0; n];
        let mut r = 0;
        // S_i(t) = c0 + c1 t + c2 t^2 + c3 t^3 with t = x - x_i
        for i in 0..m {
            let h = xs[i + 1] - xs[i];
            a[r][4 * i] = 1.0;
            b[r] = ys[i];
            r += 1;
            a[r][4 * i..4 * i + 4].copy_from_slice(&[1.0, h, h * h, h * h * h]);
            b[r] = ys[i + 1];
            r += 1;
            if i + 1 < m {
                // first and second derivative continuity at x_{i+1}
                a[r][4 * i + 1] = 1.0;
                a[r][4 * i + 2] = 2.0 * h;
                a[r][4 * i + 3] = 3.0 * h * h;
                a[r][4 * (i + 1) + 1] = -1.0;
                r += 1;
                a[r][4 * i + 2] = 2.0;
                a[r][4 * i + 3] = 6.0 * h;
                a[r][4 * (i + 1) + 2] = -2.0;
                r += 1;
            }
        }
        a[r][2] = 2.0;
        r += 1;
        let h = xs[m] - xs[m - 1];
        a[r][4 * (m - 1) + 2] = 2.0;
        a[r][4 * (m - 1) + 3] = 6.0 * h;
        r += 1;
        assert_eq!(r, n);
        let c = solve_dense(a, b);
        DenseSpline {
            xs: xs.to_vec(),
            coef: c.chunks(4).map(|k| [k[0], k[1], k[2], k[3]]).collect(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = (0..self.coef.len())
            .rev()
            .find(|&i| self.xs[i] <= x)
            .unwrap_or(0);
        let t = x - self.xs[i];
        let [c0, c1, c2, c3] = self.coef[i];
        c0 + t * (c1 + t * (c2 + t * c3))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Observed,
    Cubic,
    Linear,
    Missing,
}

/// Expected imputation of one scalar series under window `w`, at least four
/// knots for the cubic branch, no extrapolation.
pub fn impute_scalar(series: &[Option<f64>], w: usize) -> Vec<(Option<f64>, Kind)> {
    let t = series.len();
    let mut out: Vec<(Option<f64>, Kind)> = series
        .iter()
        .map(|v| match v {
            Some(v) => (Some(*v), Kind::Observed),
            None => (None, Kind::Missing),
        })
        .collect();
    let observed: Vec<usize> = (0..t).filter(|&i| series[i].is_some()).collect();
    for pair in observed.windows(2) {
        let (l, r) = (pair[0], pair[1]);
        if r == l + 1 {
            continue;
        }
        let (a, b) = (l + 1, r - 1);
        let knots: Vec<usize> = if b - a + 1 > w {
            vec![]
        } else {
            observed
                .iter()
                .copied()
                .filter(|&f| (f + w >= a && f < a) || (f > b && f <= b + w))
                .collect()
        };
        for f in a..=b {
            out[f] = if knots.len() >= 4 {
                let xs: Vec<f64> = knots.iter().map(|&k| k as f64).collect();
                let ys: Vec<f64> = knots.iter().map(|&k| series[k].unwrap()).collect();
                let v = DenseSpline::new(&xs, &ys).eval(f as f64);
                (Some(v.clamp(0.0, 1.0)), Kind::Cubic)
            } else {
                let (y0, y1) = (series[l].unwrap(), series[r].unwrap());
                let s = (f - l) as f64 / (r - l) as f64;
                (Some((y0 + (y1 - y0) * s).clamp(0.0, 1.0)), Kind::Linear)
            };
        }
    }
    out
}

/// `round(v * 255)` with halves rounded up, after clamping to [0, 1].
pub fn quantize(v: f64) -> u8 {
    let v = if v < 0.0 {
        0.0
    } else if v > 1.0 {
        1.0
    } else {
        v
    };
    let scaled = v * 255.0;
    let lower = scaled.floor();
    (if scaled - lower >= 0.5 { lower + 1.0 } else { lower }) as u8
}

pub struct Scores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Direct per-class TP/FP/FN counting.
pub fn scores(truth: &[usize], pred: &[usize], k: usize) -> Scores {
    let n = truth.len() as f64;
    let correct = truth.iter().zip(pred).filter(|(t, p)| t == p).count() as f64;
    let mut tp: HashMap<usize, f64> = HashMap::new();
    let mut fp: HashMap<usize, f64> = HashMap::new();
    let mut fneg: HashMap<usize, f64> = HashMap::new();
    for (&t, &p) in truth.iter().zip(pred) {
        if t == p {
            *tp.entry(t).or_default() += 1.0;
        } else {
            *fp.entry(p).or_default() += 1.0;
            *fneg.entry(t).or_default() += 1.0;
        }
    }
    let (mut ps, mut rs, mut fs) = (0.0, 0.0, 0.0);
    for c in 0..k {
        let tp = tp.get(&c).copied().unwrap_or(0.0);
        let fp = fp.get(&c).copied().unwrap_or(0.0);
        let fneg = fneg.get(&c).copied().unwrap_or(0.0);
        let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let r = if tp + fneg > 0.0 { tp / (tp + fneg) } else { 0.0 };
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        ps += p;
        rs += r;
        fs += f;
    }
    let k = k as f64;
    Scores {
        accuracy: correct / n,
        precision: ps / k,
        recall: rs / k,
        f1: fs / k,
    }
}
