//! High-order derivatives, integrals and interpolation of uniformly sampled
//! functions on an interval, either open (endpoints sampled) or periodic.

use nalgebra::{DMatrix, DVector};

const DERIV_WIDTH: usize = 7;
const INTEGRAL_WIDTH: usize = 6;

/// Weights w with Σ w_j x_j^k = moments[k] for k < nodes.len().
fn stencil(nodes: &[f64], moments: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    let a = DMatrix::from_fn(m, m, |k, j| nodes[j].powi(k as i32));
    let b = DVector::from_column_slice(&moments[..m]);
    a.lu().solve(&b).expect("distinct stencil nodes").iter().copied().collect()
}

/// Window of `width` consecutive offsets containing [i, i + extra] inside 0..n.
fn window(i: usize, n: usize, width: usize, extra: usize, periodic: bool) -> Vec<isize> {
    let width = width.min(n);
    let left = (width - 1 - extra) / 2;
    if periodic {
        return (0..width).map(|j| j as isize - left as isize).collect();
    }
    let start = (i as isize - left as isize).clamp(0, (n - width) as isize);
    (0..width).map(|j| start + j as isize - i as isize).collect()
}

fn at(values: &[f64], i: usize, off: isize) -> f64 {
    let n = values.len() as isize;
    values[(i as isize + off).rem_euclid(n) as usize]
}

/// df/dt at every sample; `h` is the sample spacing.
pub fn derivative(values: &[f64], h: f64, periodic: bool) -> Vec<f64> {
    let n = values.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let offs = window(i, n, DERIV_WIDTH, 0, periodic);
            let nodes: Vec<f64> = offs.iter().map(|o| *o as f64).collect();
            let moments: Vec<f64> = (0..nodes.len()).map(|k| if k == 1 { 1.0 } else { 0.0 }).collect();
            let w = stencil(&nodes, &moments);
            offs.iter().zip(&w).map(|(o, wj)| wj * at(values, i, *o)).sum::<f64>() / h
        })
        .collect()
}

/// ∫ f over [t_i, t_{i+1}] for every interval (n of them when periodic, n − 1 otherwise).
pub fn interval_integrals(values: &[f64], h: f64, periodic: bool) -> Vec<f64> {
    let n = values.len();
    let count = if periodic { n } else { n.saturating_sub(1) };
    (0..count)
        .map(|i| {
            let offs = window(i, n, INTEGRAL_WIDTH, 1, periodic);
            let nodes: Vec<f64> = offs.iter().map(|o| *o as f64).collect();
            let moments: Vec<f64> = (0..nodes.len()).map(|k| 1.0 / (k + 1) as f64).collect();
            let w = stencil(&nodes, &moments);
            offs.iter().zip(&w).map(|(o, wj)| wj * at(values, i, *o)).sum::<f64>() * h
        })
        .collect()
}

/// Running integral from t_0: n + 1 entries when periodic (the last is the
/// full period), n otherwise.
pub fn cumulative(values: &[f64], h: f64, periodic: bool) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for v in interval_integrals(values, h, periodic) {
        acc += v;
        out.push(acc);
    }
    out
}

/// Lagrange interpolation at t, with samples at lo + i·h.
pub fn interpolate(values: &[f64], lo: f64, h: f64, periodic: bool, t: f64) -> f64 {
    let n = values.len();
    if n == 1 {
        return values[0];
    }
    let x = (t - lo) / h;
    let (i, frac) = if periodic {
        let x = x.rem_euclid(n as f64);
        (x.floor() as usize % n, x - x.floor())
    } else {
        let i = (x.floor().max(0.0) as usize).min(n - 2);
        (i, x - i as f64)
    };
    let offs = window(i, n, INTEGRAL_WIDTH, 1, periodic);
    offs.iter()
        .map(|o| {
            let basis: f64 = offs
                .iter()
                .filter(|p| *p != o)
                .map(|p| (frac - *p as f64) / (*o as f64 - *p as f64))
                .product();
            basis * at(values, i, *o)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn periodic_sine() {
        let n = 64;
        let h = 2.0 * PI / n as f64;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
        let d = derivative(&v, h, true);
        for (i, di) in d.iter().enumerate() {
            assert!((di - (i as f64 * h).cos()).abs() < 1e-8);
        }
        let c = cumulative(&v, h, true);
        assert!(c[n].abs() < 1e-12);
        assert!((c[n / 2] - 2.0).abs() < 1e-8);
        assert!((interpolate(&v, 0.0, h, true, 1.0) - 1f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn open_exponential() {
        let n = 41;
        let h = 1.0 / (n - 1) as f64;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * h).exp()).collect();
        let d = derivative(&v, h, false);
        assert!(d.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-9));
        let c = cumulative(&v, h, false);
        assert!((c[n - 1] - (1f64.exp() - 1.0)).abs() < 1e-10);
        assert!((interpolate(&v, 0.0, h, false, 0.987) - 0.987f64.exp()).abs() < 1e-10);
    }
}
