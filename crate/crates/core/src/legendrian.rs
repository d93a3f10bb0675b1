//! Legendrian patches, their shadows on ∂_1^+X under the backward Reeb flow,
//! lifts of shadows back to Legendrians, and the sign of ∮β over shadows.
//!
//! Patches are sampled on uniform parameter grids; tangents and path
//! integrals use the high-order stencils of [`crate::sampled`].

use crate::error::{Error, Result};
use crate::flow::trace;
use crate::geometry::{Point, Vector};
use crate::holography::flow_for;
use crate::quadrature::gauss_legendre;
use crate::sampled;
use crate::scene::ContactScene;
use crate::strata::Sign;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Residual bound for the Legendrian and Lagrangian conditions.
pub const ISOTROPY_TOL: f64 = 1e-8;
/// Largest disagreement of the two path integrals in a 2-parameter lift.
pub const PATH_TOL: f64 = 1e-6;

/// A map from a parameter box to R^{2n+1}, sampled on a uniform grid.
/// Periodic axes omit the right endpoint; open axes include both ends.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Patch {
    pub label: String,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub shape: Vec<usize>,
    pub periodic: Vec<bool>,
    /// Row-major, last axis fastest.
    pub points: Vec<Vec<f64>>,
}

pub type LegendrianPatch = Patch;

impl Patch {
    pub fn sample(
        label: impl Into<String>,
        lo: Vec<f64>,
        hi: Vec<f64>,
        shape: Vec<usize>,
        periodic: Vec<bool>,
        f: impl Fn(&[f64]) -> Vec<f64> + Sync,
    ) -> Result<Self> {
        let mut p = Patch { label: label.into(), lo, hi, shape, periodic, points: vec![] };
        p.check_layout()?;
        let count: usize = p.shape.iter().product();
        p.points = (0..count).into_par_iter().map(|i| f(&p.param(i))).collect();
        p.validate()?;
        Ok(p)
    }

    fn check_layout(&self) -> Result<()> {
        let k = self.shape.len();
        if k == 0 || self.lo.len() != k || self.hi.len() != k || self.periodic.len() != k {
            return Err(Error::Invalid(format!("patch {}: inconsistent axis data", self.label)));
        }
        if self.shape.iter().any(|n| *n == 0) {
            return Err(Error::Invalid(format!("patch {}: empty axis", self.label)));
        }
        for a in 0..k {
            if self.shape[a] > 1 && !(self.hi[a] > self.lo[a]) {
                return Err(Error::Invalid(format!("patch {}: axis {a} has hi ≤ lo", self.label)));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_layout()?;
        let count: usize = self.shape.iter().product();
        if self.points.len() != count {
            return Err(Error::Invalid(format!("patch {}: {} points for shape {:?}", self.label, self.points.len(), self.shape)));
        }
        let d = self.points[0].len();
        if d % 2 == 0 || self.points.iter().any(|p| p.len() != d || p.iter().any(|c| !c.is_finite())) {
            return Err(Error::Invalid(format!("patch {}: points must be finite with odd common length", self.label)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_closed_curve(&self) -> bool {
        self.dim() == 1 && self.periodic[0]
    }

    pub fn step(&self, axis: usize) -> f64 {
        let n = self.shape[axis];
        let w = self.hi[axis] - self.lo[axis];
        if self.periodic[axis] {
            w / n as f64
        } else if n > 1 {
            w / (n - 1) as f64
        } else {
            0.0
        }
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for a in (0..self.dim().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.shape[a + 1];
        }
        s
    }

    fn multi(&self, mut i: usize) -> Vec<usize> {
        let s = self.strides();
        s.iter()
            .map(|st| {
                let m = i / st;
                i %= st;
                m
            })
            .collect()
    }

    pub fn param(&self, i: usize) -> Vec<f64> {
        self.multi(i).iter().enumerate().map(|(a, m)| self.lo[a] + *m as f64 * self.step(a)).collect()
    }

    pub fn point(&self, i: usize) -> Point {
        Point::from_column_slice(&self.points[i])
    }

    /// Index sequences along `axis`, one per grid line.
    pub fn lines(&self, axis: usize) -> Vec<Vec<usize>> {
        let st = self.strides();
        (0..self.len())
            .filter(|i| self.multi(*i)[axis] == 0)
            .map(|i0| (0..self.shape[axis]).map(|m| i0 + m * st[axis]).collect())
            .collect()
    }

    /// Derivative along `axis` of any per-sample vector field.
    pub fn differentiate(&self, values: &[Vec<f64>], axis: usize) -> Vec<Vector> {
        let d = values.first().map_or(0, |v| v.len());
        let mut out = vec![Vector::zeros(d); self.len()];
        if self.shape[axis] < 2 {
            return out;
        }
        let h = self.step(axis);
        for line in self.lines(axis) {
            for c in 0..d {
                let col: Vec<f64> = line.iter().map(|i| values[*i][c]).collect();
                for (k, dv) in sampled::derivative(&col, h, self.periodic[axis]).into_iter().enumerate() {
                    out[line[k]][c] = dv;
                }
            }
        }
        out
    }

    /// ∂/∂t_a at every sample, indexed [axis][sample].
    pub fn tangents(&self) -> Vec<Vec<Vector>> {
        (0..self.dim()).map(|a| self.differentiate(&self.points, a)).collect()
    }

    /// The curve at an arbitrary parameter, by local polynomial interpolation.
    pub fn interpolate_curve(&self, t: f64) -> Result<Point> {
        if self.dim() != 1 {
            return Err(Error::Invalid("interpolation is implemented for curves only".into()));
        }
        let d = self.points[0].len();
        let h = self.step(0);
        Ok(Point::from_iterator(
            d,
            (0..d).map(|c| {
                let col: Vec<f64> = self.points.iter().map(|p| p[c]).collect();
                sampled::interpolate(&col, self.lo[0], h, self.periodic[0], t)
            }),
        ))
    }

    fn is_degenerate(&self) -> bool {
        self.points.iter().all(|p| p == &self.points[0])
    }
}

/// Builtin Legendrian patches for the Darboux form dz + Σ x_i dy_i.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LegendrianSpec {
    /// x = r cos t, y = r sin t with ż = −x ẏ, for t ∈ [t0, t1].
    DarbouxArc { z0: f64, r: f64, t0: f64, t1: f64, samples: usize },
    /// x = cx + r cos t, y = cy + r sin 2t; ∮x dy = 0, so the lift closes.
    DarbouxEight { z0: f64, cx: f64, cy: f64, r: f64, samples: usize },
    /// In dimension 5: (x1, y1, x2, y2) = r(cos t, sin t, sin t, cos t).
    DarbouxCircle5 { z0: f64, r: f64, samples: usize },
    /// In dimension 5: the graph z = −G(y), x_i = ∂G/∂y_i of
    /// G = a y1²/2 + b y1 y2 + c y2²/2 over a square of half width w.
    DarbouxGraph5 { z0: f64, center: [f64; 2], half_width: f64, a: f64, b: f64, c: f64, samples: usize },
    Point { coords: Vec<f64> },
    Sampled { patch: Patch },
}

impl LegendrianSpec {
    pub fn build(&self) -> Result<Patch> {
        use std::f64::consts::TAU;
        match self.clone() {
            LegendrianSpec::DarbouxArc { z0, r, t0, t1, samples } => {
                let prim = move |t: f64| r * r * (t / 2.0 + (2.0 * t).sin() / 4.0);
                Patch::sample("darboux-arc", vec![t0], vec![t1], vec![samples], vec![false], move |u| {
                    let t = u[0];
                    vec![z0 - prim(t) + prim(t0), r * t.cos(), r * t.sin()]
                })
            }
            LegendrianSpec::DarbouxEight { z0, cx, cy, r, samples } => {
                Patch::sample("darboux-eight", vec![0.0], vec![TAU], vec![samples], vec![true], move |u| {
                    let t = u[0];
                    let z = z0 - cx * r * (2.0 * t).sin() - r * r * ((3.0 * t).sin() / 3.0 + t.sin());
                    vec![z, cx + r * t.cos(), cy + r * (2.0 * t).sin()]
                })
            }
            LegendrianSpec::DarbouxCircle5 { z0, r, samples } => {
                Patch::sample("darboux-circle5", vec![0.0], vec![TAU], vec![samples], vec![true], move |u| {
                    let (s, c) = u[0].sin_cos();
                    vec![z0 - r * r * (2.0 * u[0]).sin() / 2.0, r * c, r * s, r * s, r * c]
                })
            }
            LegendrianSpec::DarbouxGraph5 { z0, center, half_width, a, b, c, samples } => {
                let lo = vec![center[0] - half_width, center[1] - half_width];
                let hi = vec![center[0] + half_width, center[1] + half_width];
                Patch::sample("darboux-graph5", lo, hi, vec![samples, samples], vec![false, false], move |u| {
                    let (y1, y2) = (u[0], u[1]);
                    let g = 0.5 * a * y1 * y1 + b * y1 * y2 + 0.5 * c * y2 * y2;
                    vec![z0 - g, a * y1 + b * y2, y1, b * y1 + c * y2, y2]
                })
            }
            LegendrianSpec::Point { coords } => Patch::sample("point", vec![0.0], vec![0.0], vec![1], vec![false], move |_| coords.clone()),
            LegendrianSpec::Sampled { patch } => {
                patch.validate()?;
                Ok(patch)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IsotropyReport {
    /// max |β(τ_a)|
    pub beta: f64,
    /// max |dβ(τ_a, τ_b)|
    pub dbeta: f64,
    pub passed: bool,
}

pub fn isotropy(scene: &ContactScene, patch: &Patch) -> IsotropyReport {
    let tan = patch.tangents();
    let mut beta: f64 = 0.0;
    let mut dbeta: f64 = 0.0;
    for i in 0..patch.len() {
        let p = patch.point(i);
        let b = scene.form.beta(&p);
        let om = scene.form.dbeta(&p);
        for a in 0..patch.dim() {
            beta = beta.max(b.dot(&tan[a][i]).abs());
            for c in a + 1..patch.dim() {
                dbeta = dbeta.max(tan[a][i].dot(&(&om * &tan[c][i])).abs());
            }
        }
    }
    IsotropyReport { beta, dbeta, passed: beta < ISOTROPY_TOL && dbeta < ISOTROPY_TOL }
}

/// Where a family of backward trajectories jumps across the waterfall.
#[derive(Clone, Debug, Serialize)]
pub struct WaterfallCrossing {
    pub t: f64,
    /// The sample interval [t_i, t_{i+1}] containing t.
    pub interval: usize,
    pub drop_before: f64,
    pub drop_after: f64,
    /// Landing point on the grazing side; it converges to ∂_2X.
    pub graze: Vec<f64>,
    pub graze_g1: f64,
    /// Sign of g_2 at the grazing point, when |g_1| there is small.
    pub sign: Option<Sign>,
}

/// The backward-flow image of a patch on ∂_1^+X.
#[derive(Clone, Debug, Serialize)]
pub struct ShadowPatch {
    pub patch: Patch,
    /// s(t) ≥ 0: flow time from the shadow point up to L(t).
    pub drop: Vec<f64>,
    /// Samples next to a waterfall crossing or whose drop grazes ∂X.
    pub flags: Vec<bool>,
    pub crossings: Vec<WaterfallCrossing>,
    /// Unflagged samples that did not land on the inflow side.
    pub off_stratum: usize,
    /// β-length of the whole trajectory through each sample.
    pub chord_beta: Vec<f64>,
    pub source: Patch,
}

impl ShadowPatch {
    pub fn flagged_fraction(&self) -> f64 {
        self.flags.iter().filter(|f| **f).count() as f64 / self.flags.len().max(1) as f64
    }

    /// Lift back with s0 = s(t_0).
    pub fn lift(&self, scene: &ContactScene) -> Result<Lift> {
        if self.flags.iter().any(|f| *f) {
            return Err(Error::Invalid("shadow has waterfall flags; lift each smooth piece separately".into()));
        }
        lift_shadow(scene, &self.patch, self.drop[0])
    }
}

pub(crate) fn drop_point(scene: &ContactScene, p: &Point) -> Result<(Point, f64, bool)> {
    let tr = trace(scene, p, -1.0)?;
    Ok((tr.exit.point(), tr.exit.time, !tr.touches.is_empty()))
}

fn jump_candidates(drop: &[f64], periodic: bool, floor: f64) -> Vec<usize> {
    let n = drop.len();
    let count = if periodic { n } else { n.saturating_sub(1) };
    let d: Vec<f64> = (0..count).map(|i| (drop[(i + 1) % n] - drop[i]).abs()).collect();
    (0..count)
        .filter(|&i| {
            let prev = if i > 0 { d[i - 1] } else if periodic { d[count - 1] } else { 0.0 };
            let next = if i + 1 < count { d[i + 1] } else if periodic { d[0] } else { 0.0 };
            d[i] > floor && d[i] > 10.0 * prev.max(next)
        })
        .collect()
}

fn bisect_crossing(scene: &ContactScene, l: &Patch, i: usize, drop: &[f64]) -> Result<Option<WaterfallCrossing>> {
    let n = l.len();
    let h = l.step(0);
    let mut a = l.lo[0] + i as f64 * h;
    let mut b = a + h;
    let (mut sa, mut sb) = (drop[i], drop[(i + 1) % n]);
    let (mut ca, mut cb) = (l.point(i), l.point((i + 1) % n));
    ca = drop_point(scene, &ca)?.0;
    cb = drop_point(scene, &cb)?.0;
    for _ in 0..48 {
        let m = 0.5 * (a + b);
        let (cm, sm, _) = drop_point(scene, &l.interpolate_curve(m)?)?;
        if (sm - sa).abs() > (sb - sm).abs() {
            b = m;
            sb = sm;
            cb = cm;
        } else {
            a = m;
            sa = sm;
            ca = cm;
        }
    }
    if (sb - sa).abs() <= 1e-6 * scene.scale() {
        return Ok(None);
    }
    let (ga, gb) = (scene.g1(&ca)?, scene.g1(&cb)?);
    let (graze, g1) = if ga.abs() < gb.abs() { (ca, ga) } else { (cb, gb) };
    let sign = if g1.abs() <= 1e-4 * scene.scale() {
        let tower = scene.lie_tower(&graze, 2)?;
        (tower[2].abs() > scene.tau(2)).then(|| Sign::of(tower[2]))
    } else {
        None
    };
    Ok(Some(WaterfallCrossing {
        t: 0.5 * (a + b),
        interval: i,
        drop_before: sa,
        drop_after: sb,
        graze: graze.iter().copied().collect(),
        graze_g1: g1,
        sign,
    }))
}

/// Follows −v_β from every sample of `l` to ∂_1^+X and locates waterfall crossings.
pub fn shadow_project(scene: &ContactScene, l: &Patch) -> Result<ShadowPatch> {
    l.validate()?;
    if l.points[0].len() != scene.dim() {
        return Err(Error::Invalid(format!("patch lives in R^{}, scene in R^{}", l.points[0].len(), scene.dim())));
    }
    let rows: Vec<(Point, f64, bool, f64)> = (0..l.len())
        .into_par_iter()
        .map(|i| {
            let p = l.point(i);
            let (c, s, touched) = drop_point(scene, &p)?;
            let fwd = trace(scene, &p, 1.0)?.exit.time;
            Ok((c, s, touched, s + fwd))
        })
        .collect::<Result<_>>()?;
    let drop: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mut flags: Vec<bool> = rows.iter().map(|r| r.2).collect();
    let floor = 1e-6 * scene.scale();
    let mut crossings = Vec::new();
    for axis in 0..l.dim() {
        for line in l.lines(axis) {
            let d: Vec<f64> = line.iter().map(|i| drop[*i]).collect();
            for k in jump_candidates(&d, l.periodic[axis], floor) {
                if l.dim() == 1 {
                    match bisect_crossing(scene, l, k, &drop)? {
                        Some(c) => crossings.push(c),
                        None => continue,
                    }
                } else {
                    let curve = Patch {
                        label: l.label.clone(),
                        lo: vec![l.lo[axis]],
                        hi: vec![l.hi[axis]],
                        shape: vec![line.len()],
                        periodic: vec![l.periodic[axis]],
                        points: line.iter().map(|i| l.points[*i].clone()).collect(),
                    };
                    if bisect_crossing(scene, &curve, k, &d)?.is_none() {
                        continue;
                    }
                }
                flags[line[k]] = true;
                flags[line[(k + 1) % line.len()]] = true;
            }
        }
    }
    let mut off_stratum = 0;
    for (i, r) in rows.iter().enumerate() {
        if !flags[i] && scene.g1(&r.0)? >= 0.0 {
            off_stratum += 1;
        }
    }
    let patch = Patch {
        label: format!("shadow({})", l.label),
        lo: l.lo.clone(),
        hi: l.hi.clone(),
        shape: l.shape.clone(),
        periodic: l.periodic.clone(),
        points: rows.iter().map(|r| r.0.iter().copied().collect()).collect(),
    };
    Ok(ShadowPatch {
        patch,
        drop,
        flags,
        crossings,
        off_stratum,
        chord_beta: rows.iter().map(|r| r.3).collect(),
        source: l.clone(),
    })
}

/// ∮ β over a closed sampled curve.
pub fn loop_beta_integral(scene: &ContactScene, c: &Patch) -> Result<f64> {
    if !c.is_closed_curve() {
        return Err(Error::Invalid(format!("{} is not a closed curve", c.label)));
    }
    let f = pulled_beta(scene, c, 0);
    Ok(*sampled::cumulative(&f, c.step(0), true).last().unwrap_or(&0.0))
}

fn pulled_beta(scene: &ContactScene, c: &Patch, axis: usize) -> Vec<f64> {
    let tan = c.differentiate(&c.points, axis);
    (0..c.len()).map(|i| scene.form.beta(&c.point(i)).dot(&tan[i])).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ShadowIntegral {
    /// ∮_{L†} β summed over the smooth pieces of the shadow.
    pub value: f64,
    /// ∮_L β
    pub source_term: f64,
    /// Σ (s(t*+) − s(t*−)) over crossings, in loop order.
    pub jump_signed: f64,
    /// Σ |s(t*+) − s(t*−)|: the β-length of the trajectory segments that
    /// the shadow skips, each taken along v_β.
    pub jump_abs: f64,
    pub crossings: usize,
}

/// ∮_{L†}β for the shadow of a closed curve.
///
/// Along a smooth piece c = φ_{−s}∘L, and φ^*β = β gives c*β = L*β − ds.
/// The increments of s over the pieces cancel the jumps, so the total is
/// ∮_L β plus the signed sum of jumps.
pub fn shadow_beta_integral(scene: &ContactScene, sh: &ShadowPatch) -> Result<ShadowIntegral> {
    let source_term = loop_beta_integral(scene, &sh.source)?;
    let jump_signed: f64 = sh.crossings.iter().map(|c| c.drop_after - c.drop_before).sum();
    let jump_abs: f64 = sh.crossings.iter().map(|c| (c.drop_after - c.drop_before).abs()).sum();
    let value = if sh.crossings.is_empty() && !sh.flags.iter().any(|f| *f) {
        loop_beta_integral(scene, &sh.patch)?
    } else {
        source_term + jump_signed
    };
    Ok(ShadowIntegral { value, source_term, jump_signed, jump_abs, crossings: sh.crossings.len() })
}

/// A Legendrian lifted from a shadow.
#[derive(Clone, Debug, Serialize)]
pub struct Lift {
    pub patch: Patch,
    pub drop: Vec<f64>,
    /// ∮ c*β for closed curves; the lift closes iff it vanishes.
    pub closure_gap: Option<f64>,
    /// ‖φ_{s0 − ∮c*β}(c(t_0)) − L(t_0)‖
    pub closure_distance: Option<f64>,
    /// Largest disagreement between the two path integrals (2 parameters).
    pub path_mismatch: f64,
    pub isotropy: IsotropyReport,
}

/// L(t) = φ_{s(t)}(c(t)) with s(t) = s0 − ∫_{c[t_0, t]} β.
pub fn lift_shadow(scene: &ContactScene, c: &Patch, s0: f64) -> Result<Lift> {
    c.validate()?;
    let (s_int, path_mismatch) = match c.dim() {
        1 => {
            let f = pulled_beta(scene, c, 0);
            (sampled::cumulative(&f, c.step(0), c.periodic[0]), 0.0)
        }
        2 => lift_potential_2d(scene, c)?,
        k => return Err(Error::Invalid(format!("lifts of {k}-parameter shadows are not implemented"))),
    };
    let mut drop: Vec<f64> = (0..c.len()).map(|i| s0 - s_int[i]).collect();
    let points = (0..c.len())
        .into_par_iter()
        .map(|i| Ok(flow_for(scene, &c.point(i), drop[i])?.iter().copied().collect()))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut patch = Patch { label: format!("lift({})", c.label), points, ..c.clone() };
    let (closure_gap, closure_distance) = if c.is_closed_curve() {
        let gap = s_int[c.len()];
        let end = flow_for(scene, &c.point(0), s0 - gap)?;
        let dist = (&end - patch.point(0)).norm();
        if dist > PATH_TOL * scene.scale() {
            // The lift does not close: report it as an open curve over the full period.
            patch.points.push(end.iter().copied().collect());
            patch.shape[0] += 1;
            patch.periodic[0] = false;
            drop.push(s0 - gap);
        }
        (Some(gap), Some(dist))
    } else {
        (None, None)
    };
    let isotropy = isotropy(scene, &patch);
    Ok(Lift { patch, drop, closure_gap, closure_distance, path_mismatch, isotropy })
}

/// ∫ c*β from the corner along two staircase paths; they agree iff dβ
/// vanishes on the shadow.
fn lift_potential_2d(scene: &ContactScene, c: &Patch) -> Result<(Vec<f64>, f64)> {
    let (n0, n1) = (c.shape[0], c.shape[1]);
    let f0 = pulled_beta(scene, c, 0);
    let f1 = pulled_beta(scene, c, 1);
    let (h0, h1) = (c.step(0), c.step(1));
    let idx = |i: usize, j: usize| i * n1 + j;
    let col = |f: &[f64], j: usize| -> Vec<f64> { sampled::cumulative(&(0..n0).map(|i| f[idx(i, j)]).collect::<Vec<_>>(), h0, false) };
    let row = |f: &[f64], i: usize| -> Vec<f64> { sampled::cumulative(&(0..n1).map(|j| f[idx(i, j)]).collect::<Vec<_>>(), h1, false) };
    let first_col = col(&f0, 0);
    let first_row = row(&f1, 0);
    let mut s1 = vec![0.0; n0 * n1];
    let mut s2 = vec![0.0; n0 * n1];
    for i in 0..n0 {
        let r = row(&f1, i);
        for j in 0..n1 {
            s1[idx(i, j)] = first_col[i] + r[j];
        }
    }
    for j in 0..n1 {
        let cc = col(&f0, j);
        for i in 0..n0 {
            s2[idx(i, j)] = first_row[j] + cc[i];
        }
    }
    let mismatch = s1.iter().zip(&s2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if mismatch > PATH_TOL * scene.scale() {
        return Err(Error::NonLagrangianShadow { mismatch });
    }
    Ok((s1.iter().zip(&s2).map(|(a, b)| 0.5 * (a + b)).collect(), mismatch))
}

/// Residuals for a closed curve L: ∫ dβ over the swept surface L(v_β)
/// between L and its shadow, ∮_{L†}β, and the Legendrian defect ∮_L β.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroVolumeReport {
    pub k: usize,
    pub swept_dbeta: f64,
    pub shadow_beta: f64,
    pub legendrian_defect: f64,
    pub passed: bool,
}

pub fn zero_volume_checks(scene: &ContactScene, l: &Patch) -> Result<ZeroVolumeReport> {
    l.validate()?;
    if l.is_degenerate() {
        return Ok(ZeroVolumeReport { k: 0, swept_dbeta: 0.0, shadow_beta: 0.0, legendrian_defect: 0.0, passed: true });
    }
    if !l.is_closed_curve() {
        return Err(Error::Invalid("zero-volume checks need a closed curve".into()));
    }
    let sh = shadow_project(scene, l)?;
    if !sh.crossings.is_empty() {
        return Err(Error::Invalid("the swept surface crosses the waterfall".into()));
    }
    let shadow_beta = shadow_beta_integral(scene, &sh)?.value;
    let legendrian_defect = loop_beta_integral(scene, l)?;
    // Surface (t, ξ) ↦ φ_{−ξ s(t)}(L(t)), ξ ∈ [0, 1].
    let h = l.step(0);
    let mut swept = 0.0;
    for (xi, w) in gauss_legendre(6) {
        let layer = (0..l.len())
            .into_par_iter()
            .map(|i| Ok(flow_for(scene, &l.point(i), -xi * sh.drop[i])?.iter().copied().collect()))
            .collect::<Result<Vec<Vec<f64>>>>()?;
        let dt = l.differentiate(&layer, 0);
        let dens: Vec<f64> = (0..l.len())
            .map(|i| {
                let p = Point::from_column_slice(&layer[i]);
                let dxi = scene.reeb(&p).map(|v| v * -sh.drop[i])?;
                Ok(dt[i].dot(&(scene.form.dbeta(&p) * dxi)))
            })
            .collect::<Result<_>>()?;
        swept += w * sampled::cumulative(&dens, h, true)[l.len()];
    }
    let passed = swept.abs() < 1e-6 && shadow_beta.abs() < 1e-6;
    Ok(ZeroVolumeReport { k: 1, swept_dbeta: swept, shadow_beta, legendrian_defect, passed })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcavityReport {
    pub integral: ShadowIntegral,
    pub negative_integral: bool,
    pub trajectory_witness: bool,
    pub agree: bool,
    pub flagged_fraction: f64,
    pub general_position: bool,
    pub crossings: Vec<WaterfallCrossing>,
}

/// Compares sign(∮_{L†}β) < 0 with the direct search for a down-trajectory
/// from L through ∂_2^+X.
pub fn concavity_criterion(scene: &ContactScene, l: &Patch) -> Result<ConcavityReport> {
    if !l.is_closed_curve() {
        return Err(Error::Invalid("the concavity criterion needs a closed curve".into()));
    }
    let sh = shadow_project(scene, l)?;
    let integral = shadow_beta_integral(scene, &sh)?;
    let negative_integral = integral.value < -1e-6 * scene.scale();
    let trajectory_witness = sh.crossings.iter().any(|c| c.sign == Some(Sign::Plus));
    let flagged_fraction = sh.flagged_fraction();
    Ok(ConcavityReport {
        negative_integral,
        trajectory_witness,
        agree: negative_integral == trajectory_witness,
        flagged_fraction,
        general_position: flagged_fraction < 0.1,
        crossings: sh.crossings.clone(),
        integral,
    })
}
