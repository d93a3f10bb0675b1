use super::trace::{classify_start, hit_at, trace, HitEvent, StartKind};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scene::ContactScene;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// A maximal Reeb trajectory in X. Times run from 0 at the entry event.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub entry: HitEvent,
    pub exit: HitEvent,
    pub interior_events: Vec<HitEvent>,
    pub samples: Vec<(f64, Vec<f64>)>,
    /// Multiplicities of all boundary events in flow order.
    pub word: Vec<usize>,
    pub beta_length: f64,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        self.exit.time - self.entry.time
    }

    pub fn is_singleton(&self) -> bool {
        self.word.len() == 1
    }

    /// |ω| = Σ ω_i
    pub fn word_norm(&self) -> usize {
        self.word.iter().sum()
    }

    /// |ω|′ = Σ (ω_i − 1)
    pub fn reduced_norm(&self) -> usize {
        self.word.iter().map(|m| m - 1).sum()
    }

    pub fn word_string(&self) -> String {
        format_word(&self.word)
    }
}

pub fn format_word(word: &[usize]) -> String {
    let parts: Vec<String> = word.iter().map(|m| m.to_string()).collect();
    format!("({})", parts.join(","))
}

/// The maximal trajectory through p ∈ X.
pub fn trajectory_through(scene: &ContactScene, p: &Point) -> Result<Trajectory> {
    let back = trace(scene, p, -1.0)?;
    let fwd = trace(scene, p, 1.0)?;
    let tb = back.exit.time;
    let tf = fwd.exit.time;

    if back.kind == StartKind::Leaves && fwd.kind == StartKind::Leaves {
        let ev = HitEvent { time: 0.0, ..fwd.exit.clone() };
        let sample = (0.0, p.iter().copied().collect());
        return Ok(Trajectory {
            entry: ev.clone(),
            exit: ev.clone(),
            interior_events: vec![],
            samples: vec![sample],
            word: vec![ev.multiplicity],
            beta_length: 0.0,
        });
    }

    let entry = HitEvent { time: 0.0, ..back.exit.clone() };
    let exit = HitEvent { time: tb + tf, ..fwd.exit.clone() };
    let mut interior: Vec<HitEvent> =
        back.touches.iter().rev().map(|e| HitEvent { time: tb - e.time, ..e.clone() }).collect();
    if back.kind == StartKind::Enters && fwd.kind == StartKind::Enters {
        interior.push(hit_at(scene, p, tb)?);
    }
    interior.extend(fwd.touches.iter().map(|e| HitEvent { time: tb + e.time, ..e.clone() }));

    let mut samples: Vec<(f64, Vec<f64>)> =
        back.path.samples().into_iter().rev().map(|(t, q)| (tb - t, q.iter().copied().collect())).collect();
    samples.extend(fwd.path.samples().into_iter().skip(1).map(|(t, q)| (tb + t, q.iter().copied().collect())));

    let mut word = vec![entry.multiplicity];
    word.extend(interior.iter().map(|e| e.multiplicity));
    word.push(exit.multiplicity);

    let beta_length = back.path.beta_length(&scene.form) + fwd.path.beta_length(&scene.form);
    Ok(Trajectory { entry, exit, interior_events: interior, samples, word, beta_length })
}

/// C_v(x_plus) and the chord time between them.
#[derive(Clone, Debug, Serialize)]
pub struct CausalityPair {
    pub x_plus: Vec<f64>,
    pub x_minus: Vec<f64>,
    pub chord_time: f64,
    pub word: Vec<usize>,
}

/// The next exit point downstream of an inflow point. Tangential points that
/// leave at once map to themselves with chord time 0.
pub fn causality_map(scene: &ContactScene, x_plus: &Point) -> Result<CausalityPair> {
    let (kind, tower) = classify_start(scene, x_plus, 1.0)?;
    let xp: Vec<f64> = x_plus.iter().copied().collect();
    match kind {
        StartKind::Interior => Err(Error::Invalid("causality map needs a boundary point".into())),
        StartKind::Leaves => {
            let m = scene.multiplicity(&tower).unwrap_or(1);
            if m == 1 {
                return Err(Error::Invalid(format!("{xp:?} is an outflow point (g_1 = {:e})", tower[1])));
            }
            Ok(CausalityPair { x_plus: xp.clone(), x_minus: xp, chord_time: 0.0, word: vec![m] })
        }
        StartKind::Enters => {
            let fwd = trace(scene, x_plus, 1.0)?;
            let m0 = scene.multiplicity(&tower).unwrap_or(1);
            let mut word = vec![m0];
            word.extend(fwd.touches.iter().map(|e| e.multiplicity));
            word.push(fwd.exit.multiplicity);
            Ok(CausalityPair { x_plus: xp, x_minus: fwd.exit.point.clone(), chord_time: fwd.exit.time, word })
        }
    }
}

/// A boundary sample with its chart of origin.
#[derive(Clone, Debug, Serialize)]
pub struct BoundarySample {
    pub chart: usize,
    pub u: Vec<f64>,
    pub point: Vec<f64>,
    pub g1: f64,
}

/// Cell centers of every boundary chart, `per_axis` cells along each chart
/// axis (twice as many along periodic axes), optionally jittered by `seed`.
pub fn boundary_grid(scene: &ContactScene, per_axis: usize, seed: Option<u64>) -> Result<Vec<BoundarySample>> {
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let mut out = Vec::new();
    for (ci, chart) in scene.domain.boundary_charts().iter().enumerate() {
        let cells: Vec<usize> = chart.periodic.iter().map(|&p| if p { 2 * per_axis } else { per_axis }).collect();
        for mut u in chart.cell_centers(&cells) {
            if let Some(r) = rng.as_mut() {
                for i in 0..u.len() {
                    let w = (chart.hi[i] - chart.lo[i]) / cells[i] as f64;
                    u[i] += w * (r.gen::<f64>() - 0.5) * 0.9;
                }
            }
            let p = chart.map(&u);
            let g1 = scene.g1(&p)?;
            out.push(BoundarySample { chart: ci, u, point: p.iter().copied().collect(), g1 });
        }
    }
    Ok(out)
}

/// Boundary grid points in ∂_1^+X (g_1 < −τ_1).
pub fn inflow_grid(scene: &ContactScene, per_axis: usize, seed: Option<u64>) -> Result<Vec<BoundarySample>> {
    let tau = scene.tau(1);
    Ok(boundary_grid(scene, per_axis, seed)?.into_iter().filter(|s| s.g1 < -tau).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyAReport {
    pub holds: bool,
    pub trajectories: usize,
    pub word_counts: BTreeMap<String, usize>,
    pub witnesses: Vec<(Vec<f64>, Vec<usize>)>,
}

/// Every sampled trajectory must contain a transversal event, or be the
/// quadratic singleton (2).
pub fn property_a_check(scene: &ContactScene, per_axis: usize, seed: u64) -> Result<PropertyAReport> {
    let grid = boundary_grid(scene, per_axis, Some(seed))?;
    let tau = scene.tau(1);
    let starts: Vec<&BoundarySample> = grid.iter().filter(|s| s.g1 <= tau).collect();
    let trajs: Vec<Result<Trajectory>> =
        starts.par_iter().map(|s| trajectory_through(scene, &Point::from_column_slice(&s.point))).collect();
    let mut word_counts = BTreeMap::new();
    let mut witnesses = Vec::new();
    let mut count = 0;
    for (s, t) in starts.iter().zip(trajs) {
        let t = t?;
        count += 1;
        *word_counts.entry(t.word_string()).or_insert(0) += 1;
        let ok = t.word.contains(&1) || t.word == [2];
        if !ok {
            witnesses.push((s.point.clone(), t.word.clone()));
        }
    }
    Ok(PropertyAReport { holds: witnesses.is_empty(), trajectories: count, word_counts, witnesses })
}
