//! Embeddings Ψ: X → Y of contact domains with Ψ^*β_Y = β_X, the complexity
//! c• of an embedding (half the largest number of times a Y-trajectory
//! crosses Ψ(∂X)), and the volume, diameter and shadow inequalities that
//! such embeddings must satisfy.

use crate::error::{Error, Result};
use crate::flow::{causality_map, inflow_grid, trace};
use crate::geometry::{sample_boundary, sample_interior, wedge, AffineMap, Chart, Point, Vector};
use crate::invariants::{reeb_diameter, shadow_volume, volume_x};
use crate::legendrian::drop_point;
use crate::quadrature::{check_tolerance, integrate_form_on_chart, QuadResult, QuadratureSpec};
use crate::scene::ContactScene;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

/// Largest accepted |Aᵀβ_Y(Ψp) − β_X(p)|.
pub const PULLBACK_TOL: f64 = 1e-8;
const CHECK_SAMPLES: usize = 400;
/// Probes per dense-output step when counting crossings.
const PROBES: usize = 8;

/// An affine map Ψ between two scenes of the same dimension.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub label: String,
    pub source: ContactScene,
    pub target: ContactScene,
    pub map: AffineMap,
    /// max |Ψ^*β_Y − β_X| over the check samples.
    pub pullback_residual: f64,
    /// False when the map was declared non-contact and the residual was not enforced.
    pub contact: bool,
    /// max h_Y over Ψ of the check samples; negative when Ψ(X) ⊂ int Y.
    pub containment: f64,
}

impl Embedding {
    /// Checks containment always and Ψ^*β_Y = β_X when `contact` is set.
    pub fn new(
        source: ContactScene,
        target: ContactScene,
        map: AffineMap,
        label: impl Into<String>,
        contact: bool,
    ) -> Result<Self> {
        if source.dim() != target.dim() || map.dim() != source.dim() {
            return Err(Error::Invalid("source, target and map dimensions differ".into()));
        }
        let mut pts = sample_interior(&source.domain, CHECK_SAMPLES, 11)?;
        pts.extend(sample_boundary(&source.domain, CHECK_SAMPLES, 12)?);
        let mut residual: f64 = 0.0;
        let mut containment = f64::NEG_INFINITY;
        for p in &pts {
            let q = map.apply(p);
            let pulled = map.matrix.transpose() * target.form.beta(&q);
            residual = residual.max((pulled - source.form.beta(p)).amax());
            containment = containment.max(target.h(&q));
        }
        if containment >= 0.0 {
            return Err(Error::IncompatibleEmbedding(format!(
                "Ψ(X) leaves the interior of Y (max h_Y = {containment:e})"
            )));
        }
        if contact && residual >= PULLBACK_TOL {
            return Err(Error::IncompatibleEmbedding(format!("|Ψ^*β_Y − β_X| = {residual:e}")));
        }
        Ok(Self { label: label.into(), source, target, map, pullback_residual: residual, contact, containment })
    }

    /// Parses "identity", "z-translate:c", "translate:c0,c1,…" or
    /// "scale:λ,μ" (z by λ, horizontal coordinates by μ). Scalings are
    /// accepted as non-contact maps; with λ = μ² they pull β_Y back to λβ_X.
    pub fn parse(source: ContactScene, target: ContactScene, spec: &str) -> Result<Self> {
        let d = source.dim();
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let nums = || -> Result<Vec<f64>> {
            args.split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Invalid(format!("bad number in map '{spec}'"))))
                .collect()
        };
        let (map, contact) = match name.trim() {
            "identity" => (AffineMap::identity(d), true),
            "z-translate" => {
                let c = nums()?;
                if c.len() != 1 {
                    return Err(Error::Invalid("z-translate takes one value".into()));
                }
                let mut off = Vector::zeros(d);
                off[0] = c[0];
                (AffineMap::translation(off), true)
            }
            "translate" => {
                let c = nums()?;
                if c.len() != d {
                    return Err(Error::Invalid(format!("translate needs {d} values")));
                }
                (AffineMap::translation(Vector::from_vec(c)), true)
            }
            "scale" => {
                let c = nums()?;
                if c.len() != 2 || c[0] == 0.0 || c[1] == 0.0 {
                    return Err(Error::Invalid("scale takes two nonzero values λ,μ".into()));
                }
                let mut f = vec![c[1]; d];
                f[0] = c[0];
                (AffineMap::scaling(&f)?, false)
            }
            other => return Err(Error::Invalid(format!("unknown map '{other}'"))),
        };
        Self::new(source, target, map, spec.trim(), contact)
    }

    /// h_X ∘ Ψ⁻¹, negative on Ψ(int X).
    pub fn h_image(&self, q: &Point) -> f64 {
        self.source.h(&self.map.apply_inverse(q))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexityReport {
    pub c_bullet: usize,
    pub max_crossings: usize,
    pub trajectories: usize,
    /// Number of Y-trajectories by crossing count.
    pub histogram: BTreeMap<usize, usize>,
    /// max |ω|/2 over the causality words of X; a lower bound for c•.
    pub word_bound: usize,
}

/// Sign changes of h_X∘Ψ⁻¹ along the Y-trajectory from an inflow point.
fn crossings_along(emb: &Embedding, start: &Point) -> Result<usize> {
    let tr = trace(&emb.target, start, 1.0)?;
    let tol = 1e-7 * emb.source.scale();
    let mut vals = vec![emb.h_image(start)];
    for s in &tr.path.steps {
        for k in 1..=PROBES {
            vals.push(emb.h_image(&s.eval(s.t0 + s.h * k as f64 / PROBES as f64)));
        }
    }
    for w in vals.windows(3) {
        let same = w[0].signum() == w[1].signum() && w[1].signum() == w[2].signum();
        if same && w[1].abs() < tol && w[1].abs() <= w[0].abs() && w[1].abs() <= w[2].abs() {
            return Err(Error::AmbiguousTangency { point: start.iter().copied().collect(), tower: vec![w[1]] });
        }
    }
    Ok(vals.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count())
}

/// c• over an inflow grid of Y with `per_axis` cells per chart axis.
pub fn complexity(emb: &Embedding, per_axis: usize) -> Result<ComplexityReport> {
    let grid = inflow_grid(&emb.target, per_axis, None)?;
    if grid.is_empty() {
        return Err(Error::Invalid("∂_1^+Y grid is empty".into()));
    }
    let counts: Vec<usize> = grid
        .par_iter()
        .map(|s| crossings_along(emb, &Point::from_column_slice(&s.point)))
        .collect::<Result<_>>()?;
    let mut histogram = BTreeMap::new();
    for c in &counts {
        *histogram.entry(*c).or_insert(0) += 1;
    }
    let max_crossings = counts.iter().copied().max().unwrap_or(0);
    let words: Vec<usize> = inflow_grid(&emb.source, per_axis, None)?
        .par_iter()
        .map(|s| causality_map(&emb.source, &Point::from_column_slice(&s.point)).map(|c| c.word.iter().sum()))
        .collect::<Result<_>>()?;
    Ok(ComplexityReport {
        c_bullet: max_crossings / 2,
        max_crossings,
        trajectories: counts.len(),
        histogram,
        word_bound: words.into_iter().max().unwrap_or(0) / 2,
    })
}

/// Both sides of vol, diameter and shadow inequalities for an embedding.
/// Slacks are target side minus source side; all must be nonnegative
/// within the quadrature tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport {
    pub label: String,
    pub contact: bool,
    pub pullback_residual: f64,
    pub complexity: ComplexityReport,
    pub vol_x: f64,
    pub vol_y: f64,
    pub diam_x: f64,
    pub diam_y: f64,
    pub shadow_x: f64,
    pub shadow_y: f64,
    pub slack_volume: f64,
    pub slack_diameter: f64,
    /// c•·shadow_Y − shadow_X.
    pub slack_shadow: f64,
    pub passed: bool,
}

pub fn nonsqueezing_check(emb: &Embedding, spec: &QuadratureSpec, per_axis: usize) -> Result<EmbeddingReport> {
    let complexity = complexity(emb, per_axis)?;
    let vol_x = volume_x(&emb.source, spec)?.value;
    let vol_y = volume_x(&emb.target, spec)?.value;
    let diam_x = reeb_diameter(&emb.source, spec)?.value;
    let diam_y = reeb_diameter(&emb.target, spec)?.value;
    let shadow_x = shadow_volume(&emb.source, spec)?.value;
    let shadow_y = shadow_volume(&emb.target, spec)?.value;
    let slack_volume = vol_y - vol_x;
    let slack_diameter = diam_y - diam_x;
    let slack_shadow = complexity.c_bullet as f64 * shadow_y - shadow_x;
    let ok = |slack: f64, a: f64, b: f64| slack >= -spec.rel_tol * a.abs().max(b.abs());
    let passed = ok(slack_volume, vol_x, vol_y)
        && ok(slack_diameter, diam_x, diam_y)
        && ok(slack_shadow, shadow_x, shadow_y);
    Ok(EmbeddingReport {
        label: emb.label.clone(),
        contact: emb.contact,
        pullback_residual: emb.pullback_residual,
        complexity,
        vol_x,
        vol_y,
        diam_x,
        diam_y,
        shadow_x,
        shadow_y,
        slack_volume,
        slack_diameter,
        slack_shadow,
        passed,
    })
}

/// κ_j^+(X) computed on X and again on Y by dropping Ψ(∂_j^+X) along −v_Y
/// onto ∂Y and integrating dβ_Y there.
#[derive(Clone, Debug, Serialize)]
pub struct ShadowKappa {
    pub j: usize,
    pub intrinsic: f64,
    pub projected: f64,
    pub rel_diff: f64,
}

/// Every node of the projected integral costs nine flow traces (the drop and
/// its finite-difference Jacobian), so cut cells are refined at most twice.
pub fn shadow_kappa(emb: &Embedding, j: usize, spec: &QuadratureSpec) -> Result<ShadowKappa> {
    if j != 1 {
        return Err(Error::Invalid(format!("projected κ_{j}^+ is only available for j = 1")));
    }
    let intrinsic = shadow_volume(&emb.source, spec)?.value;
    let coarse = QuadratureSpec { refine_depth: spec.refine_depth.min(2), ..spec.clone() };
    let failure: Arc<Mutex<Option<Error>>> = Arc::new(Mutex::new(None));
    let record = |e: Error| {
        failure.lock().unwrap().get_or_insert(e);
    };
    let mut total = QuadResult { value: 0.0, abs_value: 0.0, error_estimate: 0.0 };
    for chart in emb.source.domain.boundary_charts() {
        let (c, e) = (chart.clone(), Arc::new(emb.clone()));
        let fail = failure.clone();
        let pushed = Chart::new(format!("drop({})", chart.label), chart.lo.clone(), chart.hi.clone(), move |u| {
            let q = e.map.apply(&c.map(u));
            match drop_point(&e.target, &q) {
                Ok((p, _, _)) => p,
                Err(err) => {
                    fail.lock().unwrap().get_or_insert(err);
                    q
                }
            }
        })
        .with_periodic(chart.periodic.clone())
        .with_orientation(chart.orientation_sign);
        let level = |u: &[f64]| match emb.source.g1(&chart.map(u)) {
            Ok(g) => g,
            Err(e) => {
                record(e);
                1.0
            }
        };
        let r = integrate_form_on_chart(&emb.target.form, &pushed, &coarse, Some(&level));
        total.value += r.value;
        total.abs_value += r.abs_value;
        total.error_estimate += r.error_estimate;
    }
    if let Some(e) = failure.lock().unwrap().take() {
        return Err(e);
    }
    check_tolerance(&total, spec.rel_tol, 0.0)?;
    let projected = total.value * wedge::liouville_scale(emb.source.n());
    let rel_diff = (projected.abs() - intrinsic.abs()).abs() / intrinsic.abs().max(f64::MIN_POSITIVE);
    Ok(ShadowKappa { j, intrinsic, projected, rel_diff })
}
