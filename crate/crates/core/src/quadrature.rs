//! Tensor-grid Gauss–Legendre quadrature over chart parameter boxes, with
//! adaptive subdivision of cells cut by a region boundary.

use crate::error::{Error, Result};
use crate::geometry::{wedge, Chart, ContactForm};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Controls chart quadrature and Monte-Carlo volume estimates.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Cells along each non-periodic axis of a 2-dimensional chart. Periodic
    /// axes get twice as many; higher-dimensional charts get fewer.
    pub resolution: usize,
    pub gauss_order: usize,
    /// Levels of bisection for cells cut by a region boundary.
    pub refine_depth: usize,
    pub mc_samples: usize,
    pub seed: u64,
    /// Relative tolerance on the Richardson error estimate.
    pub rel_tol: f64,
    /// Use Monte Carlo for vol_X even when a solid chart exists.
    pub force_monte_carlo: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            resolution: 32,
            gauss_order: 4,
            refine_depth: 6,
            mc_samples: 400_000,
            seed: 1,
            rel_tol: 1e-3,
            force_monte_carlo: false,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 8 {
            return Err(Error::Invalid(format!("resolution must be ≥ 8, got {}", self.resolution)));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Invalid("rel_tol must be positive".into()));
        }
        if self.gauss_order == 0 || self.gauss_order > 12 {
            return Err(Error::Invalid("gauss_order must be in 1..=12".into()));
        }
        Ok(())
    }

    /// Cells per axis for a box: the base count shrinks with dimension, and
    /// axes longer than π (azimuths) get proportionally more.
    pub fn cells_for(&self, lo: &[f64], hi: &[f64]) -> Vec<usize> {
        let dim = lo.len();
        let base = if dim <= 2 { self.resolution } else { (self.resolution >> (dim - 2)).max(4) };
        lo.iter()
            .zip(hi)
            .map(|(a, b)| base * (((b - a) / std::f64::consts::PI).round() as usize).max(1))
            .collect()
    }

    /// Gauss order for a chart of dimension `dim`.
    pub fn order_for(&self, dim: usize) -> usize {
        if dim <= 3 {
            self.gauss_order
        } else {
            self.gauss_order.min(3)
        }
    }
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<(f64, f64)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&order) {
        return v.clone();
    }
    let n = order;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Newton on P_n from the Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    cache.lock().unwrap().insert(order, out.clone());
    out
}

/// Integration result with a Richardson error estimate.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// ∫ |density| over the same region.
    pub abs_value: f64,
    pub error_estimate: f64,
}

struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn cell_nodes(cell: &Cell, rule: &[(f64, f64)]) -> Vec<(Vec<f64>, f64)> {
    let k = cell.lo.len();
    let g = rule.len();
    let total = g.pow(k as u32);
    let vol: f64 = cell.lo.iter().zip(&cell.hi).map(|(a, b)| b - a).product();
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut u = vec![0.0; k];
        let mut w = vol;
        for i in 0..k {
            let (x, wi) = rule[idx % g];
            idx /= g;
            u[i] = cell.lo[i] + x * (cell.hi[i] - cell.lo[i]);
            w *= wi;
        }
        out.push((u, w));
    }
    out
}

fn split(cell: &Cell) -> Vec<Cell> {
    let k = cell.lo.len();
    (0..(1usize << k))
        .map(|mask| {
            let mut lo = cell.lo.clone();
            let mut hi = cell.hi.clone();
            for i in 0..k {
                let mid = 0.5 * (cell.lo[i] + cell.hi[i]);
                if mask >> i & 1 == 1 {
                    lo[i] = mid;
                } else {
                    hi[i] = mid;
                }
            }
            Cell { lo, hi }
        })
        .collect()
}

/// Fraction of the cell where the least-squares linear fit of φ is negative.
fn linear_fraction(cell: &Cell, nodes: &[(Vec<f64>, f64)], phi: &[f64]) -> f64 {
    let k = cell.lo.len();
    let c: Vec<f64> = cell.lo.iter().zip(&cell.hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let mean = phi.iter().sum::<f64>() / phi.len() as f64;
    // Tensor nodes are symmetric about the center, so the fit decouples by
    // axis. In unit-cube coordinates s the fit is φ0 + Σ G_i s_i.
    let mut g = Vec::with_capacity(k);
    let mut phi0 = mean;
    for i in 0..k {
        let (num, den) = nodes.iter().zip(phi).fold((0.0, 0.0), |acc, ((u, _), f)| {
            let du = u[i] - c[i];
            (acc.0 + f * du, acc.1 + du * du)
        });
        let slope = if den > 0.0 { num / den } else { 0.0 };
        let width = cell.hi[i] - cell.lo[i];
        g.push(slope * width);
        phi0 -= 0.5 * slope * width;
    }
    halfspace_fraction(&g, -phi0)
}

/// Volume of {s ∈ [0,1]^k : Σ g_i s_i < t}.
pub fn halfspace_fraction(g: &[f64], t: f64) -> f64 {
    let scale: f64 = g.iter().map(|x| x.abs()).sum();
    let cut = if g.len() <= 2 { 1e-9 } else { 1e-3 };
    // Reflect negative slopes and drop negligible ones.
    let mut t = t;
    let mut w = Vec::new();
    for &gi in g {
        if gi.abs() <= cut * scale {
            t -= 0.5 * gi;
            continue;
        }
        if gi < 0.0 {
            t -= gi;
        }
        w.push(gi.abs());
    }
    let k = w.len();
    if k == 0 {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let sum: f64 = w.iter().sum();
    if t <= 0.0 {
        return 0.0;
    }
    if t >= sum {
        return 1.0;
    }
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    let prod: f64 = w.iter().product();
    let mut acc = 0.0;
    for mask in 0..(1usize << k) {
        let shift: f64 = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| w[i]).sum();
        let r = t - shift;
        if r > 0.0 {
            let sgn = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += sgn * r.powi(k as i32);
        }
    }
    (acc / (fact * prod)).clamp(0.0, 1.0)
}

fn integrate_cell(
    cell: &Cell,
    rule: &[(f64, f64)],
    density: &(dyn Fn(&[f64]) -> f64 + Sync),
    region: Option<&(dyn Fn(&[f64]) -> f64 + Sync)>,
    depth: usize,
) -> (f64, f64) {
    let nodes = cell_nodes(cell, rule);
    if let Some(level) = region {
        let phi: Vec<f64> = nodes.iter().map(|(u, _)| level(u)).collect();
        // Corners count for the decision too, so a cut near an edge is not missed.
        let corners: Vec<f64> = (0..(1usize << cell.lo.len()))
            .map(|mask| {
                let u: Vec<f64> =
                    (0..cell.lo.len()).map(|i| if mask >> i & 1 == 1 { cell.hi[i] } else { cell.lo[i] }).collect();
                level(&u)
            })
            .collect();
        let all = phi.iter().chain(&corners).all(|&f| f < 0.0);
        let none = phi.iter().chain(&corners).all(|&f| f >= 0.0);
        if none {
            return (0.0, 0.0);
        }
        if !all && depth > 0 {
            let mut acc = (0.0, 0.0);
            for c in split(cell) {
                let (v, a) = integrate_cell(&c, rule, density, region, depth - 1);
                acc.0 += v;
                acc.1 += a;
            }
            return acc;
        }
        let frac = if all { 1.0 } else { linear_fraction(cell, &nodes, &phi) };
        if frac == 0.0 {
            return (0.0, 0.0);
        }
        let mut v = 0.0;
        let mut a = 0.0;
        for (u, w) in &nodes {
            let d = density(u);
            v += w * d;
            a += w * d.abs();
        }
        return (frac * v, frac * a);
    }
    let mut v = 0.0;
    let mut a = 0.0;
    for (u, w) in &nodes {
        let d = density(u);
        v += w * d;
        a += w * d.abs();
    }
    (v, a)
}

fn grid_sum(
    lo: &[f64],
    hi: &[f64],
    cells: &[usize],
    rule: &[(f64, f64)],
    density: &(dyn Fn(&[f64]) -> f64 + Sync),
    region: Option<&(dyn Fn(&[f64]) -> f64 + Sync)>,
    depth: usize,
) -> (f64, f64) {
    let k = lo.len();
    let total: usize = cells.iter().product();
    let parts: Vec<(f64, f64)> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut clo = vec![0.0; k];
            let mut chi = vec![0.0; k];
            for i in (0..k).rev() {
                let c = idx % cells[i];
                idx /= cells[i];
                let w = (hi[i] - lo[i]) / cells[i] as f64;
                clo[i] = lo[i] + w * c as f64;
                chi[i] = lo[i] + w * (c + 1) as f64;
            }
            integrate_cell(&Cell { lo: clo, hi: chi }, rule, density, region, depth)
        })
        .collect();
    // Sequential sum keeps results independent of the thread count.
    parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1))
}

/// ∫ density(u) du over the box, restricted to {region < 0} when given.
///
/// The error estimate compares the grid with one of half the cells per axis.
pub fn integrate_box(
    lo: &[f64],
    hi: &[f64],
    cells: &[usize],
    order: usize,
    density: &(dyn Fn(&[f64]) -> f64 + Sync),
    region: Option<&(dyn Fn(&[f64]) -> f64 + Sync)>,
    refine_depth: usize,
) -> QuadResult {
    let rule = gauss_legendre(order);
    let (v, a) = grid_sum(lo, hi, cells, &rule, density, region, refine_depth);
    let coarse_cells: Vec<usize> = cells.iter().map(|&c| (c / 2).max(1)).collect();
    let (vc, _) = grid_sum(lo, hi, &coarse_cells, &rule, density, region, refine_depth);
    // Smooth cells converge like h^{2·order}; cut cells only like the
    // refinement depth allows, so the estimate is kept conservative.
    let err = (v - vc).abs() / 3.0;
    QuadResult { value: v, abs_value: a, error_estimate: err }
}

/// Fails with ResolutionTooLow when the estimate exceeds rel_tol·|value|
/// (with an absolute floor `abs_floor`).
pub fn check_tolerance(r: &QuadResult, rel_tol: f64, abs_floor: f64) -> Result<()> {
    let tol = rel_tol * r.abs_value.max(r.value.abs()).max(abs_floor);
    if r.error_estimate > tol {
        return Err(Error::ResolutionTooLow { estimate: r.error_estimate, tolerance: tol });
    }
    Ok(())
}

/// Which power of dβ (optionally wedged with β) a chart density pulls back.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormDegree {
    /// (dβ)^k on a 2k-dimensional chart.
    DBetaPower(usize),
    /// β∧(dβ)^k on a (2k+1)-dimensional chart.
    BetaDBetaPower(usize),
}

impl FormDegree {
    /// The degree matching a chart of dimension `dim`.
    pub fn for_dim(dim: usize) -> Self {
        if dim % 2 == 0 {
            FormDegree::DBetaPower(dim / 2)
        } else {
            FormDegree::BetaDBetaPower(dim / 2)
        }
    }
}

/// Coefficient of the pulled-back form in du_1∧…∧du_k, times the chart's
/// orientation sign.
pub fn chart_density(form: &ContactForm, chart: &Chart, u: &[f64]) -> f64 {
    let p = chart.map(u);
    let j = chart.jacobian(u);
    let w = j.transpose() * form.dbeta(&p) * &j;
    let v = match FormDegree::for_dim(chart.dim()) {
        FormDegree::DBetaPower(k) => wedge::omega_power_pulled(&w, k),
        FormDegree::BetaDBetaPower(k) => {
            let b = j.transpose() * form.beta(&p);
            wedge::beta_omega_power_pulled(b.as_slice(), &w, k)
        }
    };
    chart.orientation_sign * v
}

/// ∫ of the form of matching degree over a chart, restricted to the
/// parameters where `region` is negative.
pub fn integrate_form_on_chart(
    form: &ContactForm,
    chart: &Chart,
    spec: &QuadratureSpec,
    region: Option<&(dyn Fn(&[f64]) -> f64 + Sync)>,
) -> QuadResult {
    let cells = spec.cells_for(&chart.lo, &chart.hi);
    let density = |u: &[f64]| chart_density(form, chart, u);
    let depth = if chart.dim() <= 2 { spec.refine_depth } else { spec.refine_depth.min(2) };
    integrate_box(&chart.lo, &chart.hi, &cells, spec.order_for(chart.dim()), &density, region, depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials() {
        for order in 1..8 {
            let rule = gauss_legendre(order);
            let wsum: f64 = rule.iter().map(|r| r.1).sum();
            assert!((wsum - 1.0).abs() < 1e-14);
            let deg = 2 * order - 1;
            let val: f64 = rule.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((val - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "order {order}");
        }
    }

    #[test]
    fn disk_area_with_cut_cells() {
        let inside = |u: &[f64]| u[0] * u[0] + u[1] * u[1] - 1.0;
        let one = |_: &[f64]| 1.0;
        let r = integrate_box(&[-1.0, -1.0], &[1.0, 1.0], &[16, 16], 3, &one, Some(&inside), 6);
        assert!((r.value - std::f64::consts::PI).abs() < 1e-6, "{}", r.value);
    }
}
