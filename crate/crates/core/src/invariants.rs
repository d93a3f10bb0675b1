//! Volume invariants of a contact domain: vol_X, the shadow volume
//! ∫_{∂_1^+X}(dβ)^n, the stratified κ_j and κ_j^+, the Reeb diameter, the
//! average Reeb length and the isoperimetric slacks.
//!
//! All volumes carry the Liouville factor 1/n!.

use crate::error::{Error, Result};
use crate::flow::{causality_map, inflow_grid};
use crate::geometry::{contact_check, wedge, ContactForm, Point, ScalarField};
use crate::quadrature::{check_tolerance, integrate_form_on_chart, QuadResult, QuadratureSpec};
use crate::scene::ContactScene;
use crate::strata::{chart_sign, stratum2_chart, stratum3_empty, trace_stratum_curves, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Mutex;

/// ∫_X β∧(dβ)^n / n!, by the solid chart when one exists, else Monte Carlo.
pub fn volume_x(scene: &ContactScene, spec: &QuadratureSpec) -> Result<QuadResult> {
    spec.validate()?;
    let scale = wedge::liouville_scale(scene.n());
    if !spec.force_monte_carlo {
        if let Some(chart) = scene.domain.solid_chart() {
            let r = integrate_form_on_chart(&scene.form, &chart, spec, None);
            check_tolerance(&r, spec.rel_tol, 0.0)?;
            return Ok(QuadResult { value: r.value * scale, abs_value: r.abs_value * scale, error_estimate: r.error_estimate * scale });
        }
    }
    volume_monte_carlo(scene, spec.mc_samples, spec.seed)
}

/// Uniform sampling of the bounding box; the error is one standard deviation.
pub fn volume_monte_carlo(scene: &ContactScene, samples: usize, seed: u64) -> Result<QuadResult> {
    if samples == 0 {
        return Err(Error::Invalid("Monte-Carlo volume needs samples".into()));
    }
    let (lo, hi) = scene.domain.bbox();
    let d = scene.dim();
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point> =
        (0..samples).map(|_| Point::from_iterator(d, (0..d).map(|k| rng.gen_range(lo[k]..hi[k])))).collect();
    let vals: Vec<f64> =
        pts.par_iter().map(|p| if scene.h(p) < 0.0 { scene.form.top_form(p) } else { 0.0 }).collect();
    let n = samples as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let abs_mean = vals.iter().map(|v| v.abs()).sum::<f64>() / n;
    let scale = wedge::liouville_scale(scene.n()) * box_vol;
    Ok(QuadResult { value: mean * scale, abs_value: abs_mean * scale, error_estimate: (var / n).sqrt() * scale })
}

/// ∫_{∂_1^+X}(dβ)^n / n! over every boundary chart, ∂_1^+ = {g_1 < 0}.
pub fn shadow_volume(scene: &ContactScene, spec: &QuadratureSpec) -> Result<QuadResult> {
    spec.validate()?;
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let mut total = QuadResult { value: 0.0, abs_value: 0.0, error_estimate: 0.0 };
    for chart in scene.domain.boundary_charts() {
        let level = |u: &[f64]| match scene.g1(&chart.map(u)) {
            Ok(g) => g,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                1.0
            }
        };
        let r = integrate_form_on_chart(&scene.form, &chart, spec, Some(&level));
        total.value += r.value;
        total.abs_value += r.abs_value;
        total.error_estimate += r.error_estimate;
    }
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    check_tolerance(&total, spec.rel_tol, 0.0)?;
    let s = wedge::liouville_scale(scene.n());
    Ok(QuadResult { value: total.value * s, abs_value: total.abs_value * s, error_estimate: total.error_estimate * s })
}

fn stratum2_integral(scene: &ContactScene, spec: &QuadratureSpec, sign: Option<Sign>) -> Result<QuadResult> {
    let s = wedge::liouville_scale(scene.n());
    if scene.n() == 1 {
        let tr = trace_stratum_curves(scene, 4 * spec.resolution)?;
        if let Some(w) = tr.warnings.iter().find(|w| w.starts_with("unclassified")) {
            if sign.is_some() {
                return Err(Error::MissingChart(w.clone()));
            }
        }
        let (v, err) = tr.beta_integral(scene, sign);
        let abs: f64 = tr
            .curves
            .iter()
            .filter(|c| sign.is_none() || c.sign == sign)
            .map(|c| c.beta_integral(scene).0.abs())
            .sum();
        let r = QuadResult { value: v, abs_value: abs, error_estimate: err };
        check_tolerance(&r, spec.rel_tol, 1e-12)?;
        return Ok(r);
    }
    let chart = stratum2_chart(scene)?;
    if let Some(want) = sign {
        match chart_sign(scene, &chart, 6)? {
            Some(s) if s == want => {}
            Some(_) => return Ok(QuadResult { value: 0.0, abs_value: 0.0, error_estimate: 0.0 }),
            None => return Err(Error::MissingChart("∂_2 chart with mixed signs".into())),
        }
    }
    let r = integrate_form_on_chart(&scene.form, &chart, spec, None);
    check_tolerance(&r, spec.rel_tol, 0.0)?;
    Ok(QuadResult { value: r.value * s, abs_value: r.abs_value * s, error_estimate: r.error_estimate * s })
}

fn check_j(scene: &ContactScene, j: usize) -> Result<()> {
    if j == 0 || j > 2 * scene.n() {
        return Err(Error::Invalid(format!("j must be in 1..={}", 2 * scene.n())));
    }
    Ok(())
}

/// κ_j: zero for odd j; ∫_{∂_jX} β∧(dβ)^{n−j/2} / n! for even j.
pub fn kappa(scene: &ContactScene, j: usize, spec: &QuadratureSpec) -> Result<f64> {
    check_j(scene, j)?;
    if j % 2 == 1 {
        return Ok(0.0);
    }
    if j == 2 {
        return Ok(stratum2_integral(scene, spec, None)?.value);
    }
    higher_stratum_empty(scene, j)
}

/// κ_j^+: the same densities over ∂_j^+X only (κ_1^+ is the shadow volume).
pub fn kappa_plus(scene: &ContactScene, j: usize, spec: &QuadratureSpec) -> Result<f64> {
    check_j(scene, j)?;
    match j {
        1 => Ok(shadow_volume(scene, spec)?.value),
        2 => Ok(stratum2_integral(scene, spec, Some(Sign::Plus))?.value),
        _ => higher_stratum_empty(scene, j),
    }
}

/// Integrals over ∂_j for j ≥ 3 (n = 2) are available only when the stratum
/// is shown to be empty.
fn higher_stratum_empty(scene: &ContactScene, j: usize) -> Result<f64> {
    let chart = stratum2_chart(scene)?;
    if stratum3_empty(scene, &chart, 12)? {
        Ok(0.0)
    } else {
        Err(Error::MissingChart(format!("∂_{j} of {}", scene.domain.tag())))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiameterReport {
    pub value: f64,
    /// Best chord from each restart; their spread bounds the local-search error.
    pub restarts: Vec<f64>,
    pub spread: f64,
    pub argmax: Vec<f64>,
}

/// Largest β-length of a chord, found on a ∂_1^+ grid and refined by
/// coordinate pattern search in chart parameters from the three best seeds.
pub fn reeb_diameter(scene: &ContactScene, spec: &QuadratureSpec) -> Result<DiameterReport> {
    let per_axis = if scene.n() == 1 { (spec.resolution / 2).max(8) } else { (spec.resolution / 4).max(6) };
    let grid = inflow_grid(scene, per_axis, None)?;
    if grid.is_empty() {
        return Err(Error::Invalid("∂_1^+ grid is empty".into()));
    }
    let charts = scene.domain.boundary_charts();
    let times: Vec<f64> = grid
        .par_iter()
        .map(|s| causality_map(scene, &Point::from_column_slice(&s.point)).map(|c| c.chord_time))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| times[b].total_cmp(&times[a]).then(a.cmp(&b)));
    let seeds: Vec<usize> = order.into_iter().take(3).collect();
    let tau = scene.tau(1);
    let results: Vec<(f64, Vec<f64>)> = seeds
        .par_iter()
        .map(|&i| {
            let chart = &charts[grid[i].chart];
            let objective = |u: &[f64]| -> f64 {
                let p = chart.map(u);
                match scene.g1(&p) {
                    Ok(g) if g < -tau => causality_map(scene, &p).map_or(f64::NEG_INFINITY, |c| c.chord_time),
                    _ => f64::NEG_INFINITY,
                }
            };
            let mut u = grid[i].u.clone();
            let mut best = times[i];
            let mut step: Vec<f64> =
                (0..u.len()).map(|k| 0.5 * (chart.hi[k] - chart.lo[k]) / per_axis as f64).collect();
            for _ in 0..60 {
                let mut improved = false;
                for k in 0..u.len() {
                    for dir in [1.0, -1.0] {
                        let mut c = u.clone();
                        c[k] += dir * step[k];
                        if !chart.periodic[k] {
                            c[k] = c[k].clamp(chart.lo[k], chart.hi[k]);
                        }
                        let v = objective(&c);
                        if v > best {
                            best = v;
                            u = c;
                            improved = true;
                            break;
                        }
                    }
                }
                if !improved {
                    step.iter_mut().for_each(|s| *s *= 0.5);
                    if step.iter().zip(&chart.lo).zip(&chart.hi).all(|((s, a), b)| *s < 1e-7 * (b - a)) {
                        break;
                    }
                }
            }
            (best, chart.map(&u).iter().copied().collect())
        })
        .collect();
    let (value, argmax) = results.iter().cloned().fold((f64::NEG_INFINITY, vec![]), |a, b| if b.0 > a.0 { b } else { a });
    let restarts: Vec<f64> = results.iter().map(|r| r.0).collect();
    let spread = restarts.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - restarts.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(DiameterReport { value, restarts, spread, argmax })
}

/// av_R = vol_X / shadow volume.
pub fn average_length(scene: &ContactScene, spec: &QuadratureSpec) -> Result<f64> {
    let shadow = shadow_volume(scene, spec)?.value;
    if shadow <= 0.0 {
        return Err(Error::Invalid(format!("shadow volume {shadow:e} is not positive")));
    }
    Ok(volume_x(scene, spec)?.value / shadow)
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoperimetricSlacks {
    /// diam·shadow_vol − vol_X
    pub slack_isoperimetric: f64,
    /// diam·κ_2 − vol_X
    pub slack_equatorial: f64,
    /// |shadow_vol − κ_2|
    pub stokes_residual: f64,
}

fn slacks(vol: f64, shadow: f64, kappa2: f64, diam: f64) -> IsoperimetricSlacks {
    IsoperimetricSlacks {
        slack_isoperimetric: diam * shadow - vol,
        slack_equatorial: diam * kappa2 - vol,
        stokes_residual: (shadow - kappa2).abs(),
    }
}

pub fn isoperimetric_check(scene: &ContactScene, spec: &QuadratureSpec) -> Result<IsoperimetricSlacks> {
    let vol = volume_x(scene, spec)?.value;
    let shadow = shadow_volume(scene, spec)?.value;
    let k2 = kappa(scene, 2, spec)?;
    let diam = reeb_diameter(scene, spec)?.value;
    Ok(slacks(vol, shadow, k2, diam))
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub n: usize,
    #[serde(rename = "vol_X")]
    pub vol_x: f64,
    #[serde(rename = "vol_X_error")]
    pub vol_x_error: f64,
    pub shadow_vol: f64,
    pub shadow_vol_error: f64,
    /// κ_j for j = 1..2n.
    pub kappa: Vec<f64>,
    /// κ_j^+ for j = 1..2n.
    pub kappa_plus: Vec<f64>,
    #[serde(rename = "diam_R")]
    pub diam_r: f64,
    #[serde(rename = "diam_R_spread")]
    pub diam_spread: f64,
    #[serde(rename = "av_R")]
    pub av_r: f64,
    pub slack_isoperimetric: f64,
    pub slack_equatorial: f64,
    pub stokes_residual: f64,
}

/// Every invariant of the scene in one pass.
pub fn compute_invariants(scene: &ContactScene, spec: &QuadratureSpec) -> Result<InvariantReport> {
    let vol = volume_x(scene, spec)?;
    let shadow = shadow_volume(scene, spec)?;
    let n = scene.n();
    let mut kap = Vec::with_capacity(2 * n);
    let mut kap_plus = Vec::with_capacity(2 * n);
    for j in 1..=2 * n {
        kap.push(kappa(scene, j, spec)?);
        kap_plus.push(if j == 1 { shadow.value } else { kappa_plus(scene, j, spec)? });
    }
    let diam = reeb_diameter(scene, spec)?;
    let sl = slacks(vol.value, shadow.value, kap[1], diam.value);
    let av = if shadow.value > 0.0 { vol.value / shadow.value } else { f64::NAN };
    Ok(InvariantReport {
        n,
        vol_x: vol.value,
        vol_x_error: vol.error_estimate,
        shadow_vol: shadow.value,
        shadow_vol_error: shadow.error_estimate,
        kappa: kap,
        kappa_plus: kap_plus,
        diam_r: diam.value,
        diam_spread: diam.spread,
        av_r: av,
        slack_isoperimetric: sl.slack_isoperimetric,
        slack_equatorial: sl.slack_equatorial,
        stokes_residual: sl.stokes_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformationRow {
    pub t: f64,
    pub contact_min: f64,
    pub kappa_2: f64,
    pub kappa_plus_1: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformationReport {
    pub rows: Vec<DeformationRow>,
    /// max − min of κ_2 over the rows.
    pub spread_kappa_2: f64,
    pub spread_kappa_plus_1: f64,
}

/// κ_2 and κ_1^+ along β + t·dη.
pub fn deformation_scan(
    scene: &ContactScene,
    eta: &ScalarField,
    t_values: &[f64],
    spec: &QuadratureSpec,
) -> Result<DeformationReport> {
    let mut rows = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let form = ContactForm::shifted(scene.form.clone(), eta.clone(), t);
        let check = contact_check(&form, &scene.domain, 500, spec.seed)?;
        if !check.accepted {
            return Err(Error::ContactViolated { t, min_value: check.min_value });
        }
        let s = scene.with_form(form)?;
        rows.push(DeformationRow {
            t,
            contact_min: check.min_value,
            kappa_2: kappa(&s, 2, spec)?,
            kappa_plus_1: shadow_volume(&s, spec)?.value,
        });
    }
    let spread = |f: fn(&DeformationRow) -> f64| {
        let hi = rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let lo = rows.iter().map(f).fold(f64::INFINITY, f64::min);
        if rows.is_empty() { 0.0 } else { hi - lo }
    };
    let spread_kappa_2 = spread(|r| r.kappa_2);
    let spread_kappa_plus_1 = spread(|r| r.kappa_plus_1);
    Ok(DeformationReport { rows, spread_kappa_2, spread_kappa_plus_1 })
}
