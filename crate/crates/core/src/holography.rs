//! Boundary data of a traversing Reeb flow and reconstruction from it: the
//! Lyapunov function f• with df•(v_β) = 1, tabulated boundary data, and the
//! canonical extension of compatible boundary maps to X.

use crate::error::{Error, Result};
use crate::flow::{causality_map, integrate, trace};
use crate::flow::trajectory::boundary_grid;
use crate::geometry::{Point, Vector};
use crate::scene::ContactScene;
use crate::strata::{classify, Sign};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Compatibility residuals above this reject a boundary map.
pub const COMPATIBILITY_TOL: f64 = 1e-6;

/// How f• is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LyapunovMode {
    /// f• = z; valid when v_β = ∂_z.
    ExactZ,
    /// f•(x) = (τ_back − τ_fwd)/2: time since entry minus half the chord
    /// time. Jumps across the waterfall.
    ChordMidpoint,
}

impl LyapunovMode {
    pub fn for_scene(scene: &ContactScene) -> Self {
        if scene.form.has_vertical_reeb() {
            LyapunovMode::ExactZ
        } else {
            LyapunovMode::ChordMidpoint
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact-z" => Ok(LyapunovMode::ExactZ),
            "chord-midpoint" => Ok(LyapunovMode::ChordMidpoint),
            _ => Err(Error::Invalid(format!("unknown Lyapunov mode {s:?}"))),
        }
    }

    fn check(self, scene: &ContactScene) -> Result<()> {
        if self == LyapunovMode::ExactZ && !scene.form.has_vertical_reeb() {
            return Err(Error::Invalid(format!("f = z needs v_β = ∂z, not {}", scene.form.describe())));
        }
        Ok(())
    }
}

impl fmt::Display for LyapunovMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LyapunovMode::ExactZ => "exact-z",
            LyapunovMode::ChordMidpoint => "chord-midpoint",
        })
    }
}

/// f•(p) for p ∈ X.
pub fn lyapunov_bullet(scene: &ContactScene, mode: LyapunovMode, p: &Point) -> Result<f64> {
    mode.check(scene)?;
    match mode {
        LyapunovMode::ExactZ => Ok(p[0]),
        LyapunovMode::ChordMidpoint => {
            let back = trace(scene, p, -1.0)?.exit.time;
            let fwd = trace(scene, p, 1.0)?.exit.time;
            Ok(0.5 * (back - fwd))
        }
    }
}

/// Largest |(f•(φ_δ p) − f•(p))/δ − 1| over the given points, skipping those
/// that leave X within δ.
pub fn lyapunov_check(scene: &ContactScene, mode: LyapunovMode, points: &[Point], delta: f64) -> Result<f64> {
    let rows: Vec<Option<f64>> = points
        .par_iter()
        .map(|p| {
            let q = flow_for(scene, p, delta)?;
            if scene.h(&q) >= 0.0 {
                return Ok(None);
            }
            let d = lyapunov_bullet(scene, mode, &q)? - lyapunov_bullet(scene, mode, p)?;
            Ok(Some((d / delta - 1.0).abs()))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().fold(0.0, f64::max))
}

/// The Reeb flow for signed time t, ignoring ∂X.
pub fn flow_for(scene: &ContactScene, p: &Point, t: f64) -> Result<Point> {
    if t == 0.0 {
        return Ok(p.clone());
    }
    Ok(integrate(scene, p, t.signum(), t.abs())?.end())
}

/// One boundary sample with its stratum, f•^∂, β^∂ and causality partner.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryRecord {
    pub chart: usize,
    pub u: Vec<f64>,
    pub point: Vec<f64>,
    pub depth: usize,
    pub sign: Sign,
    pub f: f64,
    pub beta: Vec<f64>,
    /// C_v(point) for ∂_1^+ and tangential points; None on the outflow side.
    pub partner: Option<Vec<f64>>,
    pub f_partner: Option<f64>,
    pub chord_time: f64,
    pub word: Vec<usize>,
}

impl BoundaryRecord {
    pub fn is_inflow(&self) -> bool {
        self.partner.is_some()
    }
}

/// The boundary data (C_v, f•^∂, β^∂) tabulated on a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryData {
    pub domain: String,
    pub form: String,
    pub mode: LyapunovMode,
    pub per_axis: usize,
    pub records: Vec<BoundaryRecord>,
}

/// Worst deviation of f•^∂(C(x)) − f•^∂(x) from the chord time, and the
/// smallest increment among non-degenerate pairs.
#[derive(Clone, Debug, Serialize)]
pub struct Monotonicity {
    pub pairs: usize,
    pub max_residual: f64,
    pub min_increment: f64,
}

impl BoundaryData {
    pub fn monotonicity(&self) -> Monotonicity {
        let mut out = Monotonicity { pairs: 0, max_residual: 0.0, min_increment: f64::INFINITY };
        for r in &self.records {
            if let Some(fp) = r.f_partner {
                out.pairs += 1;
                out.max_residual = out.max_residual.max((fp - r.f - r.chord_time).abs());
                if r.chord_time > 0.0 {
                    out.min_increment = out.min_increment.min(fp - r.f);
                }
            }
        }
        out
    }

    pub fn inflow(&self) -> impl Iterator<Item = (usize, &BoundaryRecord)> {
        self.records.iter().enumerate().filter(|(_, r)| r.is_inflow())
    }
}

/// Classifies one boundary point and, on the inflow side, follows it to C_v.
pub fn boundary_record(scene: &ContactScene, mode: LyapunovMode, chart: usize, u: Vec<f64>, p: &Point) -> Result<BoundaryRecord> {
    let st = classify(scene, p)?;
    let inflow = st.sign == Sign::Plus || st.depth > 1;
    let (partner, f_partner, chord_time, word, f) = if inflow {
        let pair = causality_map(scene, p)?;
        let q = Point::from_vec(pair.x_minus.clone());
        let (f, fq) = match mode {
            LyapunovMode::ExactZ => (p[0], q[0]),
            LyapunovMode::ChordMidpoint => (-0.5 * pair.chord_time, 0.5 * pair.chord_time),
        };
        (Some(pair.x_minus), Some(fq), pair.chord_time, pair.word, f)
    } else {
        (None, None, 0.0, vec![st.depth], lyapunov_bullet(scene, mode, p)?)
    };
    Ok(BoundaryRecord {
        chart,
        u,
        point: st.point,
        depth: st.depth,
        sign: st.sign,
        f,
        beta: scene.form.beta(p).iter().copied().collect(),
        partner,
        f_partner,
        chord_time,
        word,
    })
}

/// Tabulates the boundary data on cell centers of the boundary charts.
pub fn extract_boundary_data(scene: &ContactScene, mode: LyapunovMode, per_axis: usize) -> Result<BoundaryData> {
    mode.check(scene)?;
    let grid = boundary_grid(scene, per_axis, None)?;
    let records = grid
        .into_par_iter()
        .map(|s| {
            let p = Point::from_vec(s.point);
            boundary_record(scene, mode, s.chart, s.u, &p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryData {
        domain: scene.domain.tag(),
        form: scene.form.describe(),
        mode,
        per_axis,
        records,
    })
}

/// The point on the trajectory entering at `entry` where f• takes `f`.
pub fn reconstruct_from_entry(scene: &ContactScene, mode: LyapunovMode, entry: &Point, f: f64) -> Result<Point> {
    mode.check(scene)?;
    let pair = causality_map(scene, entry)?;
    let f0 = match mode {
        LyapunovMode::ExactZ => entry[0],
        LyapunovMode::ChordMidpoint => -0.5 * pair.chord_time,
    };
    let slack = 1e-12 * scene.scale();
    if f < f0 - slack || f > f0 + pair.chord_time + slack {
        return Err(Error::OutOfChordRange { f, lo: f0, hi: f0 + pair.chord_time });
    }
    let t = (f - f0).clamp(0.0, pair.chord_time);
    flow_for(scene, entry, t)
}

/// Same as [`reconstruct_from_entry`] with the entry taken from a record.
pub fn reconstruct_point(scene: &ContactScene, data: &BoundaryData, index: usize, f: f64) -> Result<Point> {
    let r = data
        .records
        .get(index)
        .ok_or_else(|| Error::Invalid(format!("record {index} out of range ({} records)", data.records.len())))?;
    if !r.is_inflow() {
        return Err(Error::Invalid(format!("record {index} is not an entry point")));
    }
    let lo = r.f;
    let hi = r.f + r.chord_time;
    if f < lo - 1e-12 || f > hi + 1e-12 {
        return Err(Error::OutOfChordRange { f, lo, hi });
    }
    reconstruct_from_entry(scene, data.mode, &Point::from_vec(r.point.clone()), f)
}

/// The entry point of the trajectory through p and f•(p).
pub fn trajectory_coordinates(scene: &ContactScene, mode: LyapunovMode, p: &Point) -> Result<(Point, f64)> {
    let back = trace(scene, p, -1.0)?;
    let f = match mode {
        LyapunovMode::ExactZ => p[0],
        LyapunovMode::ChordMidpoint => 0.5 * (back.exit.time - trace(scene, p, 1.0)?.exit.time),
    };
    Ok((back.exit.point(), f))
}

/// A linear map of R^{2n+1} restricted to ∂X.
#[derive(Clone, Debug)]
pub struct BoundaryDiffeo {
    pub label: String,
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl BoundaryDiffeo {
    pub fn linear(label: impl Into<String>, matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Invalid("boundary map matrix must be square".into()));
        }
        let inverse = matrix.clone().try_inverse().ok_or_else(|| Error::Invalid("boundary map is singular".into()))?;
        Ok(Self { label: label.into(), matrix, inverse })
    }

    pub fn identity(dim: usize) -> Self {
        Self { label: "identity".into(), matrix: DMatrix::identity(dim, dim), inverse: DMatrix::identity(dim, dim) }
    }

    /// Rotation by θ in every (x_i, y_i) plane; z is fixed.
    pub fn rotation_z(dim: usize, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let mut m = DMatrix::identity(dim, dim);
        for i in (1..dim).step_by(2) {
            m[(i, i)] = c;
            m[(i, i + 1)] = -s;
            m[(i + 1, i)] = s;
            m[(i + 1, i + 1)] = c;
        }
        let inverse = m.transpose();
        Self { label: format!("rotation:{theta}"), matrix: m, inverse }
    }

    /// Parses "identity" or "rotation:θ".
    pub fn parse(s: &str, dim: usize) -> Result<Self> {
        if s == "identity" {
            return Ok(Self::identity(dim));
        }
        if let Some(t) = s.strip_prefix("rotation:") {
            let theta: f64 = t.parse().map_err(|_| Error::Invalid(format!("bad rotation angle {t:?}")))?;
            return Ok(Self::rotation_z(dim, theta));
        }
        Err(Error::Invalid(format!("unknown boundary map {s:?}")))
    }

    /// self ∘ inner
    pub fn compose(&self, inner: &BoundaryDiffeo) -> Self {
        Self {
            label: format!("{}∘{}", self.label, inner.label),
            matrix: &self.matrix * &inner.matrix,
            inverse: &inner.inverse * &self.inverse,
        }
    }

    pub fn inverse(&self) -> Self {
        Self { label: format!("{}⁻¹", self.label), matrix: self.inverse.clone(), inverse: self.matrix.clone() }
    }

    pub fn apply(&self, p: &Point) -> Point {
        &self.matrix * p
    }

    pub fn push(&self, v: &Vector) -> Vector {
        &self.matrix * v
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Residuals of Φ^∂ against the boundary data on the inflow records.
#[derive(Clone, Debug, Serialize)]
pub struct CompatibilityReport {
    pub samples: usize,
    /// max |h(Φx)|
    pub boundary: f64,
    /// max ‖Φ(C(x)) − C(Φ(x))‖
    pub causality: f64,
    /// max |f•^∂(Φx) − f•^∂(x)|
    pub lyapunov: f64,
    /// max |β(Φx)(DΦ·t) − β(x)(t)| over chart tangents t
    pub beta: f64,
    pub passed: bool,
}

impl CompatibilityReport {
    pub fn worst(&self) -> f64 {
        self.boundary.max(self.causality).max(self.lyapunov).max(self.beta)
    }
}

pub fn compatibility(scene: &ContactScene, data: &BoundaryData, map: &BoundaryDiffeo) -> Result<CompatibilityReport> {
    let charts = scene.domain.boundary_charts();
    let rows: Vec<[f64; 4]> = data
        .inflow()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(_, r)| {
            let x = Point::from_vec(r.point.clone());
            let y = map.apply(&x);
            let hb = scene.h(&y).abs();
            if hb > COMPATIBILITY_TOL {
                return Ok([hb, f64::INFINITY, f64::INFINITY, f64::INFINITY]);
            }
            let c_phi = Point::from_vec(causality_map(scene, &y)?.x_minus);
            let phi_c = map.apply(&Point::from_vec(r.partner.clone().unwrap_or_default()));
            let df = (lyapunov_bullet(scene, data.mode, &y)? - r.f).abs();
            let bx = scene.form.beta(&x);
            let by = scene.form.beta(&y);
            let db = charts[r.chart]
                .tangents(&r.u)
                .iter()
                .map(|t| (by.dot(&map.push(t)) - bx.dot(t)).abs())
                .fold(0.0, f64::max);
            Ok([hb, (phi_c - c_phi).norm(), df, db])
        })
        .collect::<Result<_>>()?;
    let max = |k: usize| rows.iter().map(|r| r[k]).fold(0.0, f64::max);
    let mut rep = CompatibilityReport {
        samples: rows.len(),
        boundary: max(0),
        causality: max(1),
        lyapunov: max(2),
        beta: max(3),
        passed: false,
    };
    rep.passed = rep.worst() < COMPATIBILITY_TOL;
    Ok(rep)
}

/// The extension Φ of a compatible boundary map: x ↦ the point with
/// f•-value f•(x) on the trajectory entering at Φ^∂(entry(x)).
#[derive(Clone, Debug)]
pub struct CanonicalExtension<'a> {
    pub scene: &'a ContactScene,
    pub mode: LyapunovMode,
    pub map: BoundaryDiffeo,
    pub report: CompatibilityReport,
}

impl<'a> CanonicalExtension<'a> {
    /// Checks Φ^∂ against freshly extracted boundary data on a `per_axis` grid.
    pub fn new(scene: &'a ContactScene, mode: LyapunovMode, map: BoundaryDiffeo, per_axis: usize) -> Result<Self> {
        let data = extract_boundary_data(scene, mode, per_axis)?;
        Self::with_data(scene, &data, map)
    }

    pub fn with_data(scene: &'a ContactScene, data: &BoundaryData, map: BoundaryDiffeo) -> Result<Self> {
        let report = compatibility(scene, data, &map)?;
        if !report.passed {
            return Err(Error::IncompatibleBoundaryMap(format!(
                "{}: boundary {:e}, causality {:e}, f {:e}, beta {:e}",
                map.label, report.boundary, report.causality, report.lyapunov, report.beta
            )));
        }
        Ok(Self { scene, mode: data.mode, map, report })
    }

    /// Skips the compatibility check; callers vouch for Φ^∂.
    pub fn unchecked(scene: &'a ContactScene, mode: LyapunovMode, map: BoundaryDiffeo) -> Self {
        let report = CompatibilityReport { samples: 0, boundary: 0.0, causality: 0.0, lyapunov: 0.0, beta: 0.0, passed: true };
        Self { scene, mode, map, report }
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        let (entry, f) = trajectory_coordinates(self.scene, self.mode, x)?;
        let y = self.map.apply(&entry);
        let f0 = lyapunov_bullet(self.scene, self.mode, &y)?;
        flow_for(self.scene, &y, f - f0)
    }
}

/// Φ(x) for a single point; runs the compatibility check on a `per_axis` grid.
pub fn extend_diffeo(scene: &ContactScene, map: &BoundaryDiffeo, x: &Point, per_axis: usize) -> Result<Point> {
    CanonicalExtension::new(scene, LyapunovMode::for_scene(scene), map.clone(), per_axis)?.apply(x)
}
