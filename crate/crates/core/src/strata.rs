//! Tangency strata ∂_j^±X of the boundary: pointwise classification, traced
//! ∂_2 curves for n = 1, explicit ∂_2 charts for n = 2, positivity scans and
//! waterfall samples.

use crate::error::{Error, Result};
use crate::flow::trace;
use crate::geometry::{wedge, Chart, Point, Vector};
use crate::scene::ContactScene;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// ∂_j^+ when the first nonvanishing g_j is negative, ∂_j^- otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn of(g: f64) -> Self {
        if g < 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StratumPoint {
    pub point: Vec<f64>,
    /// The j with p ∈ ∂_jX \ ∂_{j+1}X.
    pub depth: usize,
    pub sign: Sign,
    pub tower: Vec<f64>,
}

/// Classifies a boundary point by its Lie tower.
pub fn classify(scene: &ContactScene, p: &Point) -> Result<StratumPoint> {
    let h = scene.h(p);
    if h.abs() > 1e-6 * scene.scale() {
        return Err(Error::Invalid(format!("point is not on the boundary (h = {h:e})")));
    }
    let tower = scene.lie_tower(p, scene.max_depth())?;
    let depth = scene.multiplicity(&tower).ok_or_else(|| Error::AmbiguousTangency {
        point: p.iter().copied().collect(),
        tower: tower.clone(),
    })?;
    Ok(StratumPoint { point: p.iter().copied().collect(), depth, sign: Sign::of(tower[depth]), tower })
}

/// A closed (or, on failure, open) component of ∂_2X for n = 1, sampled
/// uniformly in arc length and oriented as the boundary of ∂_1^+X.
#[derive(Clone, Debug, Serialize)]
pub struct StratumCurve {
    pub chart: String,
    pub params: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    pub closed: bool,
    /// None when the sampled vertices disagree or cannot be classified.
    pub sign: Option<Sign>,
    /// Largest |g_1| / |∇_u g_1| over the vertices, a distance to the true curve.
    pub residual: f64,
    pub length: f64,
}

impl StratumCurve {
    fn vertex(&self, i: usize) -> Point {
        Point::from_column_slice(&self.points[i])
    }

    fn segments(&self, stride: usize) -> Vec<(Point, Point)> {
        let m = self.points.len();
        let idx: Vec<usize> = (0..m).step_by(stride).collect();
        let mut segs: Vec<(Point, Point)> = idx.windows(2).map(|w| (self.vertex(w[0]), self.vertex(w[1]))).collect();
        if self.closed {
            segs.push((self.vertex(*idx.last().unwrap()), self.vertex(0)));
        } else if *idx.last().unwrap() != m - 1 {
            segs.push((self.vertex(*idx.last().unwrap()), self.vertex(m - 1)));
        }
        segs
    }

    /// ∮ β along the curve with a Richardson estimate (trapezoid on all
    /// vertices against every other vertex).
    pub fn beta_integral(&self, scene: &ContactScene) -> (f64, f64) {
        let trap = |stride: usize| -> f64 {
            self.segments(stride)
                .iter()
                .map(|(a, b)| 0.5 * (scene.form.beta(a) + scene.form.beta(b)).dot(&(b - a)))
                .sum()
        };
        let fine = trap(1);
        let coarse = trap(2);
        ((4.0 * fine - coarse) / 3.0, (fine - coarse).abs() / 3.0)
    }

    /// β(τ) per unit length at every vertex, τ the oriented unit tangent.
    pub fn beta_density(&self, scene: &ContactScene) -> Vec<f64> {
        let m = self.points.len();
        (0..m)
            .map(|i| {
                let prev = if i == 0 { if self.closed { m - 1 } else { 0 } } else { i - 1 };
                let next = if i + 1 == m { if self.closed { 0 } else { m - 1 } } else { i + 1 };
                let t = self.vertex(next) - self.vertex(prev);
                scene.form.beta(&self.vertex(i)).dot(&t) / t.norm().max(1e-300)
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StratumTrace {
    pub curves: Vec<StratumCurve>,
    pub warnings: Vec<String>,
}

impl StratumTrace {
    /// Σ ∮β over curves, restricted to one sign when given, with summed error.
    pub fn beta_integral(&self, scene: &ContactScene, sign: Option<Sign>) -> (f64, f64) {
        self.curves
            .iter()
            .filter(|c| sign.is_none() || c.sign == sign)
            .map(|c| c.beta_integral(scene))
            .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
    }
}

fn g1_on(scene: &ContactScene, chart: &Chart, u: &[f64]) -> Result<f64> {
    scene.g1(&chart.map(u))
}

/// Root of g_1 on the parameter segment a → b, where the end values differ in sign.
fn edge_root(scene: &ContactScene, chart: &Chart, a: &[f64], b: &[f64], ga: f64, gb: f64) -> Result<Vec<f64>> {
    let at = |t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    let (mut lo, mut hi, mut glo, mut ghi) = (0.0, 1.0, ga, gb);
    // Illinois false position: superlinear, bracketed.
    let mut side = 0i32;
    for _ in 0..100 {
        let t = (lo * ghi - hi * glo) / (ghi - glo);
        let gt = g1_on(scene, chart, &at(t))?;
        if gt == 0.0 || hi - lo < 1e-14 {
            return Ok(at(t));
        }
        if gt.signum() == glo.signum() {
            lo = t;
            glo = gt;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            ghi = gt;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(at(0.5 * (lo + hi)))
}

fn grad_u(scene: &ContactScene, chart: &Chart, u: &[f64]) -> Result<Vec<f64>> {
    let mut g = vec![0.0; u.len()];
    for i in 0..u.len() {
        let h = 1e-6 * (chart.hi[i] - chart.lo[i]);
        let mut up = u.to_vec();
        let mut um = u.to_vec();
        up[i] += h;
        um[i] -= h;
        g[i] = (g1_on(scene, chart, &up)? - g1_on(scene, chart, &um)?) / (2.0 * h);
    }
    Ok(g)
}

/// Newton steps along ∇_u g_1 back onto g_1 = 0.
fn project(scene: &ContactScene, chart: &Chart, u: &mut [f64]) -> Result<f64> {
    let mut dist = 0.0;
    for _ in 0..8 {
        let g = g1_on(scene, chart, u)?;
        let gr = grad_u(scene, chart, u)?;
        let n2: f64 = gr.iter().map(|x| x * x).sum();
        if n2 == 0.0 {
            break;
        }
        dist = g.abs() / n2.sqrt();
        for i in 0..u.len() {
            u[i] -= g * gr[i] / n2;
        }
        if dist < 1e-14 * scene.scale() {
            break;
        }
    }
    Ok(dist)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum EdgeKey {
    /// Between nodes (i, j) and (i + 1, j).
    Row(usize, usize),
    /// Between nodes (i, j) and (i, j + 1 mod N).
    Col(usize, usize),
}

/// Zero set of g_1 on one 2-dimensional boundary chart by marching squares.
fn march_chart(scene: &ContactScene, chart: &Chart, grid: usize) -> Result<(Vec<Vec<Vec<f64>>>, Vec<bool>)> {
    let ni = grid;
    let nj = if chart.periodic[1] { 2 * grid } else { grid };
    let wrap = chart.periodic[1];
    let node = |i: usize, j: usize| -> Vec<f64> {
        vec![
            chart.lo[0] + (chart.hi[0] - chart.lo[0]) * (i as f64 + 0.5) / ni as f64,
            chart.lo[1] + (chart.hi[1] - chart.lo[1]) * (j as f64 + 0.5) / nj as f64,
        ]
    };
    let vals: Vec<f64> = (0..ni * nj)
        .into_par_iter()
        .map(|k| g1_on(scene, chart, &node(k / nj, k % nj)).map(|g| if g == 0.0 { f64::MIN_POSITIVE } else { g }))
        .collect::<Result<_>>()?;
    let g = |i: usize, j: usize| vals[i * nj + j % nj];
    // Node (i, j + 1) in unwrapped parameters, so edges never jump across the seam.
    let node_next = |i: usize, j: usize| -> Vec<f64> {
        let mut u = node(i, j);
        u[1] += (chart.hi[1] - chart.lo[1]) / nj as f64;
        u
    };

    let mut roots: HashMap<EdgeKey, Vec<f64>> = HashMap::new();
    let mut edge_root_of = |key: EdgeKey| -> Result<Vec<f64>> {
        if let Some(r) = roots.get(&key) {
            return Ok(r.clone());
        }
        let (a, b, ga, gb) = match key {
            EdgeKey::Row(i, j) => (node(i, j), node(i + 1, j), g(i, j), g(i + 1, j)),
            EdgeKey::Col(i, j) => (node(i, j), node_next(i, j), g(i, j), g(i, j + 1)),
        };
        let r = edge_root(scene, chart, &a, &b, ga, gb)?;
        roots.insert(key, r.clone());
        Ok(r)
    };

    let jcells = if wrap { nj } else { nj - 1 };
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for i in 0..ni - 1 {
        for j in 0..jcells {
            let jn = (j + 1) % nj;
            let c = [g(i, j), g(i + 1, j), g(i + 1, jn), g(i, jn)];
            let e = [EdgeKey::Row(i, j), EdgeKey::Col(i + 1, j), EdgeKey::Row(i, jn), EdgeKey::Col(i, j)];
            let cut: Vec<usize> = (0..4).filter(|&k| (c[k] < 0.0) != (c[(k + 1) % 4] < 0.0)).collect();
            match cut.len() {
                2 => segments.push((e[cut[0]], e[cut[1]])),
                4 => {
                    let center = 0.25 * c.iter().sum::<f64>();
                    if (center < 0.0) == (c[0] < 0.0) {
                        segments.push((e[0], e[1]));
                        segments.push((e[2], e[3]));
                    } else {
                        segments.push((e[0], e[3]));
                        segments.push((e[1], e[2]));
                    }
                }
                _ => {}
            }
        }
    }

    // Link segments through shared edges.
    let mut adj: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (s, (a, b)) in segments.iter().enumerate() {
        adj.entry(*a).or_default().push(s);
        adj.entry(*b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();
    let mut closed = Vec::new();
    for s0 in 0..segments.len() {
        if used[s0] {
            continue;
        }
        used[s0] = true;
        let mut keys = std::collections::VecDeque::from([segments[s0].0, segments[s0].1]);
        let mut is_closed = false;
        // Forward from the back end, then backward from the front end.
        for forward in [true, false] {
            loop {
                let end = if forward { *keys.back().unwrap() } else { *keys.front().unwrap() };
                let Some(t) = adj[&end].iter().copied().find(|&t| !used[t]) else { break };
                used[t] = true;
                let (a, b) = segments[t];
                let other = if a == end { b } else { a };
                let start = if forward { *keys.front().unwrap() } else { *keys.back().unwrap() };
                if other == start {
                    is_closed = true;
                    break;
                }
                if forward {
                    keys.push_back(other);
                } else {
                    keys.push_front(other);
                }
            }
            if is_closed {
                break;
            }
        }
        let mut params = Vec::with_capacity(keys.len());
        for k in keys {
            params.push(edge_root_of(k)?);
        }
        chains.push(params);
        closed.push(is_closed);
    }
    Ok((chains, closed))
}

/// Lifts the periodic coordinates so that consecutive parameters are close.
fn unwrap_params(chart: &Chart, params: &mut [Vec<f64>]) {
    for i in 0..chart.dim() {
        if !chart.periodic[i] {
            continue;
        }
        let period = chart.hi[i] - chart.lo[i];
        for k in 1..params.len() {
            let d = params[k][i] - params[k - 1][i];
            params[k][i] -= period * (d / period).round();
        }
    }
}

fn resample(
    scene: &ContactScene,
    chart: &Chart,
    params: &[Vec<f64>],
    closed: bool,
    count: usize,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let mut pts: Vec<Point> = params.iter().map(|u| chart.map(u)).collect();
    let mut us = params.to_vec();
    if closed {
        // Close the parameter loop, allowing a shift by a period.
        let mut last = params[0].clone();
        for i in 0..chart.dim() {
            if chart.periodic[i] {
                let period = chart.hi[i] - chart.lo[i];
                let d = last[i] - params[params.len() - 1][i];
                last[i] -= period * (d / period).round();
            }
        }
        us.push(last);
        pts.push(pts[0].clone());
    }
    let mut cum = vec![0.0];
    for w in pts.windows(2) {
        cum.push(cum.last().unwrap() + (&w[1] - &w[0]).norm());
    }
    let total = *cum.last().unwrap();
    let m = if closed { count } else { count + 1 };
    let out: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|k| {
            let s = total * k as f64 / count as f64;
            let idx = cum.partition_point(|&c| c <= s).clamp(1, cum.len() - 1);
            let seg = (cum[idx] - cum[idx - 1]).max(1e-300);
            let t = ((s - cum[idx - 1]) / seg).clamp(0.0, 1.0);
            let mut u: Vec<f64> = us[idx - 1].iter().zip(&us[idx]).map(|(a, b)| a + t * (b - a)).collect();
            project(scene, chart, &mut u)?;
            Ok(u)
        })
        .collect::<Result<_>>()?;
    Ok((out, total))
}

/// Orientation of a chain as the boundary of {g_1 < 0} inside the oriented
/// boundary chart: +1 when (∇_u g_1, τ_u) is positive.
fn stokes_orientation(scene: &ContactScene, chart: &Chart, params: &[Vec<f64>]) -> Result<f64> {
    let m = params.len();
    let mut vote = 0.0;
    for k in (0..m).step_by((m / 16).max(1)) {
        let next = &params[(k + 1) % m];
        let tau = [next[0] - params[k][0], next[1] - params[k][1]];
        let gr = grad_u(scene, chart, &params[k])?;
        vote += (gr[0] * tau[1] - gr[1] * tau[0]).signum();
    }
    Ok(if vote >= 0.0 { chart.orientation_sign } else { -chart.orientation_sign })
}

/// Traces ∂_2X = {g_1 = 0} on every boundary chart (n = 1 only), with `grid`
/// nodes along the polar axis and twice as many along periodic axes.
pub fn trace_stratum_curves(scene: &ContactScene, grid: usize) -> Result<StratumTrace> {
    if scene.n() != 1 {
        return Err(Error::MissingChart("∂_2 curves are traced only for n = 1".into()));
    }
    let grid = grid.max(8) & !1;
    let mut curves = Vec::new();
    let mut warnings = Vec::new();
    for chart in scene.domain.boundary_charts() {
        let (chains, closed) = march_chart(scene, &chart, grid)?;
        for (mut params, is_closed) in chains.into_iter().zip(closed) {
            if params.len() < 4 {
                warnings.push(format!("dropped a {}-vertex fragment on {}", params.len(), chart.label));
                continue;
            }
            unwrap_params(&chart, &mut params);
            if !is_closed {
                warnings.push(format!("OpenCurve on {}", chart.label));
            }
            let count = params.len().next_power_of_two().max(64) * 2;
            let (mut params, length) = resample(scene, &chart, &params, is_closed, count)?;
            if stokes_orientation(scene, &chart, &params)? < 0.0 {
                params.reverse();
                if is_closed {
                    params.rotate_right(1);
                }
            }
            let mut residual: f64 = 0.0;
            for u in &params {
                let g = g1_on(scene, &chart, u)?;
                let gr = grad_u(scene, &chart, u)?;
                residual = residual.max(g.abs() / gr.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300));
            }
            let points: Vec<Vec<f64>> = params.iter().map(|u| chart.map(u).iter().copied().collect()).collect();
            let mut signs = Vec::new();
            for k in (0..points.len()).step_by((points.len() / 8).max(1)) {
                match classify(scene, &Point::from_column_slice(&points[k])) {
                    Ok(sp) if sp.depth >= 2 => signs.push(sp.sign),
                    _ => {}
                }
            }
            let sign = match signs.first() {
                Some(&s) if signs.iter().all(|&t| t == s) => Some(s),
                _ => {
                    warnings.push(format!("unclassified ∂_2 curve on {}", chart.label));
                    None
                }
            };
            curves.push(StratumCurve { chart: chart.label.clone(), params, points, closed: is_closed, sign, residual, length });
        }
    }
    Ok(StratumTrace { curves, warnings })
}

/// ∇g_1 in ambient coordinates by central differences.
pub fn grad_g1(scene: &ContactScene, p: &Point) -> Result<Vector> {
    let d = scene.dim();
    let h = 1e-5 * scene.scale();
    let mut g = Vector::zeros(d);
    for i in 0..d {
        let mut a = p.clone();
        let mut b = p.clone();
        a[i] += h;
        b[i] -= h;
        g[i] = (scene.g1(&a)? - scene.g1(&b)?) / (2.0 * h);
    }
    Ok(g)
}

/// Explicit chart of ∂_2X for n = 2, oriented as the boundary of ∂_1^+X.
///
/// Available for ellipsoids whose Reeb field is tangent to the equator.
pub fn stratum2_chart(scene: &ContactScene) -> Result<Chart> {
    let chart = scene
        .domain
        .equator_chart()
        .ok_or_else(|| Error::MissingChart(format!("∂_2 of {}", scene.domain.tag())))?;
    let tol = 1e-8 * scene.scale();
    let mut best: Option<(f64, f64)> = None;
    for t in [0.37, 0.61, 0.23, 0.79, 0.5] {
        let u: Vec<f64> = chart.lo.iter().zip(&chart.hi).map(|(a, b)| a + t * (b - a)).collect();
        let p = chart.map(&u);
        if scene.g1(&p)?.abs() > tol {
            return Err(Error::MissingChart(format!("equator is not tangent to the Reeb field on {}", scene.domain.tag())));
        }
        let j = chart.jacobian(&u);
        let d = scene.dim();
        let mut m = nalgebra::DMatrix::zeros(d, d);
        m.set_column(0, &(-scene.grad_h(&p)));
        m.set_column(1, &grad_g1(scene, &p)?);
        for i in 0..j.ncols() {
            m.set_column(i + 2, &j.column(i));
        }
        let det = m.determinant();
        let size = m.column_iter().map(|c| c.norm()).product::<f64>();
        if best.map_or(true, |(_, s)| det.abs() / size > s) {
            best = Some((det.signum(), det.abs() / size));
        }
    }
    let (sign, _) = best.unwrap();
    Ok(chart.with_orientation(sign))
}

/// True when |g_2| stays above τ_2 on the explicit ∂_2 chart, so ∂_3X = ∅.
pub fn stratum3_empty(scene: &ContactScene, chart: &Chart, per_axis: usize) -> Result<bool> {
    let cells = vec![per_axis; chart.dim()];
    let tau = scene.tau(2);
    let vals: Vec<f64> = chart
        .cell_centers(&cells)
        .par_iter()
        .map(|u| scene.lie_tower(&chart.map(u), 2).map(|t| t[2].abs()))
        .collect::<Result<_>>()?;
    Ok(vals.iter().all(|&g| g > tau))
}

/// Sign shared by all samples of a chart, if any.
pub fn chart_sign(scene: &ContactScene, chart: &Chart, per_axis: usize) -> Result<Option<Sign>> {
    let cells = vec![per_axis; chart.dim()];
    let mut sign = None;
    for u in chart.cell_centers(&cells) {
        let sp = classify(scene, &chart.map(&u))?;
        match sign {
            None => sign = Some(sp.sign),
            Some(s) if s != sp.sign => return Ok(None),
            _ => {}
        }
    }
    Ok(sign)
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub j: usize,
    pub samples: usize,
    /// None when the stratum is empty.
    pub min_value: Option<f64>,
    pub argmin: Option<Vec<f64>>,
    pub argmin_sign: Option<Sign>,
    pub passed: bool,
}

fn fold_min(vals: impl IntoIterator<Item = (f64, Vec<f64>, Option<Sign>)>) -> (usize, Option<(f64, Vec<f64>, Option<Sign>)>) {
    let mut count = 0;
    let mut best: Option<(f64, Vec<f64>, Option<Sign>)> = None;
    for v in vals {
        count += 1;
        if best.as_ref().map_or(true, |b| v.0 < b.0) {
            best = Some(v);
        }
    }
    (count, best)
}

/// Samples ±(β∧(dβ)^k)|_{∂_j^±X} (k = n − ⌊j/2⌋ with β for even j, (dβ)^k
/// alone for odd j), where ∂_j^± carries ± the orientation it inherits as the
/// boundary of ∂_{j−1}^+X. For j = 2 this is the density in the inherited
/// orientation itself; the scan passes when the minimum is ≥ −1e-10.
pub fn stratum_positivity_scan(scene: &ContactScene, j: usize, n_samples: usize) -> Result<PositivityReport> {
    let n = scene.n();
    if j == 0 || j > 2 * n {
        return Err(Error::Invalid(format!("stratum index j must be in 1..={}", 2 * n)));
    }
    let n_samples = n_samples.max(16);
    let (count, best) = match (n, j) {
        (_, 1) => {
            // ∂_1: −sign(g_1)·(dβ)^n in the inward-first orientation.
            let mut vals = Vec::new();
            for chart in scene.domain.boundary_charts() {
                let per = ((n_samples as f64 / 2.0).powf(1.0 / chart.dim() as f64)).ceil() as usize;
                let cells = chart.periodic.iter().map(|&p| if p { 2 * per } else { per }).collect::<Vec<_>>();
                let part: Vec<(f64, Vec<f64>, Option<Sign>)> = chart
                    .cell_centers(&cells)
                    .par_iter()
                    .map(|u| {
                        let p = chart.map(u);
                        let g1 = scene.g1(&p)?;
                        let dens = crate::quadrature::chart_density(&scene.form, &chart, u);
                        let s = Sign::of(g1);
                        let v = if s == Sign::Plus { dens } else { -dens };
                        Ok((v, p.iter().copied().collect(), Some(s)))
                    })
                    .collect::<Result<_>>()?;
                vals.extend(part);
            }
            fold_min(vals)
        }
        (1, 2) => {
            let tr = trace_stratum_curves(scene, 128)?;
            let mut vals = Vec::new();
            for c in &tr.curves {
                let dens = c.beta_density(scene);
                for (k, d) in dens.into_iter().enumerate() {
                    vals.push((d, c.points[k].clone(), c.sign));
                }
            }
            fold_min(vals)
        }
        (2, 2) => {
            let chart = stratum2_chart(scene)?;
            let per = ((n_samples as f64 / 2.0).cbrt()).ceil() as usize;
            let cells: Vec<usize> = chart.periodic.iter().map(|&p| if p { 2 * per } else { per }).collect();
            let vals: Vec<(f64, Vec<f64>, Option<Sign>)> = chart
                .cell_centers(&cells)
                .par_iter()
                .map(|u| {
                    let p = chart.map(u);
                    let jac = chart.jacobian(u);
                    let tangents: Vec<Vector> = (0..jac.ncols()).map(|i| jac.column(i).into_owned()).collect();
                    let d = chart.orientation_sign * wedge::beta_omega_power(&scene.form.beta(&p), &scene.form.dbeta(&p), &tangents);
                    (d, p.iter().copied().collect(), None)
                })
                .collect();
            fold_min(vals)
        }
        (2, _) => {
            let chart = stratum2_chart(scene)?;
            if !stratum3_empty(scene, &chart, 12)? {
                return Err(Error::MissingChart(format!("∂_{j} of {}", scene.domain.tag())));
            }
            (0, None)
        }
        _ => unreachable!(),
    };
    let passed = best.as_ref().map_or(true, |b| b.0 >= -1e-10);
    Ok(PositivityReport {
        j,
        samples: count,
        min_value: best.as_ref().map(|b| b.0),
        argmin: best.as_ref().map(|b| b.1.clone()),
        argmin_sign: best.and_then(|b| b.2),
        passed,
    })
}

/// A −v trajectory dropped from a point of ∂_2X until it leaves X.
#[derive(Clone, Debug, Serialize)]
pub struct Waterfall {
    pub start: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
    pub end: Vec<f64>,
    pub time: f64,
}

/// Drops −v_β from `count` points spread over ∂_2X.
pub fn waterfall_sample(scene: &ContactScene, count: usize) -> Result<Vec<Waterfall>> {
    let starts: Vec<Point> = if scene.n() == 1 {
        let tr = trace_stratum_curves(scene, 64)?;
        let total: usize = tr.curves.iter().map(|c| c.points.len()).sum();
        let stride = (total / count.max(1)).max(1);
        tr.curves.iter().flat_map(|c| c.points.iter().step_by(stride).map(|p| Point::from_column_slice(p))).collect()
    } else {
        let chart = stratum2_chart(scene)?;
        let per = ((count as f64 / 2.0).cbrt()).ceil() as usize;
        let cells: Vec<usize> = chart.periodic.iter().map(|&p| if p { 2 * per } else { per }).collect();
        chart.cell_centers(&cells).iter().map(|u| chart.map(u)).collect()
    };
    starts
        .par_iter()
        .map(|p| {
            let t = trace(scene, p, -1.0)?;
            Ok(Waterfall {
                start: p.iter().copied().collect(),
                samples: t.path.samples().into_iter().map(|(_, q)| q.iter().copied().collect()).collect(),
                end: t.exit.point.clone(),
                time: t.exit.time,
            })
        })
        .collect()
}
