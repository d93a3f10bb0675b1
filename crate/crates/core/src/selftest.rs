//! The acceptance suite: fourteen numbered checks against closed-form values
//! and structural identities, each run at a fixed tolerance.

use crate::contact_fields::{contact_field, solve_w};
use crate::error::Result;
use crate::flow::{causality_map, inflow_grid, trajectory_through};
use crate::geometry::{sample_interior, ContactForm, Domain, Point, ScalarField};
use crate::holography::{extract_boundary_data, trajectory_coordinates, reconstruct_from_entry, BoundaryDiffeo, CanonicalExtension, LyapunovMode};
use crate::invariants::{average_length, deformation_scan, isoperimetric_check, kappa, reeb_diameter, shadow_volume, volume_x};
use crate::legendrian::{concavity_criterion, lift_shadow, shadow_project, zero_volume_checks, LegendrianSpec, Patch};
use crate::nonsqueezing::{complexity, nonsqueezing_check, shadow_kappa, Embedding};
use crate::quadrature::QuadratureSpec;
use crate::scene::ContactScene;
use crate::strata::stratum_positivity_scan;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::time::Instant;

pub const TITLES: [&str; 14] = [
    "ellipsoid volume",
    "shadow and equator Stokes twin",
    "isoperimetric slack",
    "Reeb diameter and average length",
    "dimension 5 ball volume",
    "contact field solver",
    "S^3 equator stratum density",
    "ball causality map",
    "holographic reconstruction",
    "Legendrian round trip",
    "concavity criterion",
    "non-squeezing",
    "deformation invariance of kappa_2",
    "zero volumes in dimension 5",
];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("[{status}] {:>2} {}: {} ({:.1} s)", self.id, self.title, self.detail, self.seconds)
    }
}

/// Outcome of one check: pass flag and a one-line summary.
type Outcome = Result<(bool, String)>;

fn darboux(domain: Domain) -> ContactScene {
    let n = domain.n();
    ContactScene::new(domain, ContactForm::darboux(n)).expect("builtin scene")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn c1_volume() -> Outcome {
    let mut worst: f64 = 0.0;
    for axes in [[2.0, 2.0, 2.0], [1.0, 2.0, 3.0]] {
        let v = volume_x(&darboux(Domain::ellipsoid(1, &axes)?), &spec())?.value;
        worst = worst.max(rel(v, PI * axes.iter().product::<f64>() / 6.0));
    }
    Ok((worst < 5e-3, format!("max rel err {worst:.2e}")))
}

fn c2_stokes() -> Outcome {
    let mut worst: f64 = 0.0;
    for axes in [[2.0, 2.0, 2.0], [1.0, 2.0, 3.0]] {
        let s = darboux(Domain::ellipsoid(1, &axes)?);
        let want = PI * axes[0] * axes[1] / 4.0;
        let shadow = shadow_volume(&s, &spec())?.value;
        let eq = kappa(&s, 2, &spec())?;
        worst = worst.max(rel(shadow, want)).max(rel(eq, want)).max(rel(shadow, eq));
    }
    Ok((worst < 5e-3, format!("max rel err {worst:.2e}")))
}

fn c3_isoperimetric() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let q = QuadratureSpec { resolution: 16, ..spec() };
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let axes: Vec<f64> = (0..3).map(|_| rng.gen_range(0.5..3.0)).collect();
        let s = darboux(Domain::ellipsoid(1, &axes)?);
        let vol = volume_x(&s, &q)?.value;
        let sl = isoperimetric_check(&s, &q)?;
        worst = worst.min(sl.slack_isoperimetric / vol).min(sl.slack_equatorial / vol);
    }
    Ok((worst >= -5e-3, format!("min relative slack {worst:.4}")))
}

fn c4_diameter() -> Outcome {
    let (mut d_err, mut a_err): (f64, f64) = (0.0, 0.0);
    for axes in [[2.0, 2.0, 2.0], [1.0, 2.0, 3.0], [1.7, 0.6, 1.1]] {
        let s = darboux(Domain::ellipsoid(1, &axes)?);
        d_err = d_err.max((reeb_diameter(&s, &spec())?.value - axes[2]).abs());
        a_err = a_err.max(rel(average_length(&s, &spec())?, 2.0 * axes[2] / 3.0));
    }
    Ok((d_err < 1e-4 && a_err < 1e-2, format!("|diam − C| {d_err:.2e}, av rel err {a_err:.2e}")))
}

/// Γ(n + 3/2) for integer n.
fn gamma_half(n: usize) -> f64 {
    (0..=n).map(|k| k as f64 + 0.5).product::<f64>() * PI.sqrt()
}

fn c5_five_ball() -> Outcome {
    let mut worst: f64 = 0.0;
    for semi in [[1.0; 5], [0.5, 1.0, 0.75, 1.25, 0.9]] {
        let axes: Vec<f64> = semi.iter().map(|a| 2.0 * a).collect();
        let s = darboux(Domain::ellipsoid(2, &axes)?);
        let want = PI.powf(2.5) / gamma_half(2) * semi.iter().product::<f64>();
        worst = worst.max(rel(volume_x(&s, &spec())?.value, want));
    }
    Ok((worst < 1e-2, format!("max rel err {worst:.2e} (unit ball 8π²/15)")))
}

fn c6_contact_field() -> Outcome {
    let form = ContactForm::darboux(1);
    let h = ScalarField::sphere();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut exact: f64 = 0.0;
    for _ in 0..100 {
        let p = Point::from_iterator(3, (0..3).map(|_| rng.gen_range(-1.5..1.5)));
        let (z, x, y) = (p[0], p[1], p[2]);
        let w = solve_w(&form, &h, &p)?;
        let want = [-x * x, x * z - y, x];
        worst = worst.max(w.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let hz = contact_field(&form, &ScalarField::coordinate(0), &p)?;
        exact = exact.max(hz.w[0].abs()).max((hz.w[1] - x).abs()).max(hz.w[2].abs());
    }
    Ok((worst < 1e-9 && exact < 1e-15, format!("sphere residual {worst:.2e}, h = z residual {exact:.2e}")))
}

fn c7_s3_density() -> Outcome {
    let r = stratum_positivity_scan(&darboux(Domain::ball(2, 1.0)?), 2, 10_000)?;
    let min = r.min_value.unwrap_or(f64::NAN);
    Ok((r.samples >= 10_000 && min >= -1e-10, format!("min density {min:.3e} over {} samples", r.samples)))
}

fn c8_causality() -> Outcome {
    let s = darboux(Domain::ball(1, 1.0)?);
    let mut map_err: f64 = 0.0;
    let mut words = true;
    for g in inflow_grid(&s, 24, Some(8))? {
        let c = causality_map(&s, &Point::from_column_slice(&g.point))?;
        let want = [-g.point[0], g.point[1], g.point[2]];
        map_err = map_err.max(c.x_minus.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        words &= c.word == vec![1, 1];
    }
    for k in 0..16 {
        let t = TAU * k as f64 / 16.0;
        words &= causality_map(&s, &Point::from_vec(vec![0.0, t.cos(), t.sin()]))?.word == vec![2];
    }
    let mut len_err: f64 = 0.0;
    for p in sample_interior(&s.domain, 100, 8)? {
        let tr = trajectory_through(&s, &p)?;
        len_err = len_err.max((tr.beta_length - tr.duration()).abs());
    }
    let ok = map_err < 1e-8 && words && len_err < 1e-9;
    Ok((ok, format!("map err {map_err:.2e}, words ok: {words}, |∫β − t| {len_err:.2e}")))
}

fn c9_reconstruction() -> Outcome {
    let s = darboux(Domain::ball(1, 1.0)?);
    let mode = LyapunovMode::ExactZ;
    let mut trip: f64 = 0.0;
    for x in sample_interior(&s.domain, 1000, 9)? {
        let (e, f) = trajectory_coordinates(&s, mode, &x)?;
        let back = reconstruct_from_entry(&s, mode, &e, f)?;
        let (e2, f2) = trajectory_coordinates(&s, mode, &back)?;
        trip = trip.max((&back - &x).norm()).max((e2 - &e).norm()).max((f2 - f).abs());
    }
    let (mut rot, mut comp): (f64, f64) = (0.0, 0.0);
    for n in [1, 2] {
        let s = ContactScene::new(Domain::ball(n, 1.0)?, ContactForm::radial(n))?;
        let d = 2 * n + 1;
        let data = extract_boundary_data(&s, mode, if n == 1 { 12 } else { 4 })?;
        let (r1, r2) = (BoundaryDiffeo::rotation_z(d, 0.7), BoundaryDiffeo::rotation_z(d, -1.9));
        let e1 = CanonicalExtension::with_data(&s, &data, r1.clone())?;
        let e2 = CanonicalExtension::with_data(&s, &data, r2.clone())?;
        let e12 = CanonicalExtension::with_data(&s, &data, r1.compose(&r2))?;
        for x in sample_interior(&s.domain, 100, 5)? {
            rot = rot.max((e1.apply(&x)? - r1.apply(&x)).norm());
            comp = comp.max((e12.apply(&x)? - e1.apply(&e2.apply(&x)?)?).norm());
        }
    }
    let ok = trip < 1e-8 && rot < 1e-6 && comp < 1e-6;
    Ok((ok, format!("round trip {trip:.2e}, rotation {rot:.2e}, composition {comp:.2e}")))
}

fn c10_legendrian() -> Outcome {
    let s = darboux(Domain::ball(1, 1.0)?);
    let l = LegendrianSpec::DarbouxArc { z0: 0.2, r: 0.5, t0: 0.0, t1: 2.0, samples: 256 }.build()?;
    let lift = shadow_project(&s, &l)?.lift(&s)?;
    let trip = lift
        .patch
        .points
        .iter()
        .zip(&l.points)
        .map(|(p, q)| p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let r = 0.5;
    let zc = -(1.0 - r * r as f64).sqrt();
    let c = Patch::sample("circle", vec![0.0], vec![TAU], vec![256], vec![true], move |u| {
        vec![zc, r * u[0].cos(), r * u[0].sin()]
    })?;
    let gap = lift_shadow(&s, &c, 0.2 - zc)?.closure_gap.unwrap_or(f64::NAN);
    let gap_err = (gap - PI * r * r).abs();
    Ok((trip < 1e-6 && gap_err < 1e-6, format!("round trip {trip:.2e}, |gap − πr²| {gap_err:.2e}")))
}

fn c11_concavity() -> Outcome {
    let s = darboux(Domain::shell(1, 1.0, 2.0)?);
    let cases = [
        (1.4, 0.0, 0.0, 0.3),
        (0.0, 1.5, 0.0, 0.2),
        (-0.3, 0.0, 1.5, 0.25),
        (1.2, 0.9, 0.0, 0.3),
        (1.15, 0.0, 0.9, 0.3),
        (1.3, 1.0, 0.0, 0.2),
    ];
    let mut agree = 0;
    let mut summary = Vec::new();
    for (z0, cx, cy, r) in cases {
        let l = LegendrianSpec::DarbouxEight { z0, cx, cy, r, samples: 256 }.build()?;
        let c = concavity_criterion(&s, &l)?;
        agree += c.agree as usize;
        summary.push(format!("{}{:+.1e}", if c.trajectory_witness { "w" } else { "-" }, c.integral.value));
    }
    Ok((agree == cases.len(), format!("{agree}/6 agree [{}]", summary.join(" "))))
}

fn c12_nonsqueezing() -> Outcome {
    let sc = darboux(Domain::sand_clock(1, 1.0, 0.3, 0.8)?);
    let tall = darboux(Domain::ellipsoid(1, &[2.4, 2.4, 3.0])?);
    let c = complexity(&Embedding::parse(sc, tall, "identity")?, 12)?.c_bullet;
    let q = QuadratureSpec { resolution: 16, ..spec() };
    let ball = |r| darboux(Domain::ball(1, r).expect("ball"));
    let mut slacks = true;
    for (src, tgt, map) in [(1.0, 2.0, "identity"), (0.7, 1.0, "z-translate:0.2"), (1.0, 1.0 + 1e-3, "identity")] {
        slacks &= nonsqueezing_check(&Embedding::parse(ball(src), ball(tgt), map)?, &q, 12)?.passed;
    }
    let k = shadow_kappa(&Embedding::parse(ball(1.0), ball(2.0), "identity")?, 1, &QuadratureSpec { resolution: 8, ..q })?;
    let ok = c == 2 && slacks && k.rel_diff < 1e-2;
    Ok((ok, format!("sand clock c• = {c}, slacks ok: {slacks}, κ_1^+ rel diff {:.2e}", k.rel_diff)))
}

fn c13_deformation() -> Outcome {
    let s = darboux(Domain::ball(1, 1.0)?);
    let r = deformation_scan(&s, &ScalarField::gaussian_bump(0.1), &[0.0, 0.05, 0.1], &spec())?;
    let rel_spread = r.spread_kappa_2 / r.rows[0].kappa_2.abs();
    Ok((rel_spread < 5e-3, format!("κ_2 relative spread {rel_spread:.2e}")))
}

fn c14_zero_volumes() -> Outcome {
    let s = darboux(Domain::ball(2, 1.0)?);
    let l = LegendrianSpec::DarbouxCircle5 { z0: 0.1, r: 0.4, samples: 256 }.build()?;
    let z = zero_volume_checks(&s, &l)?;
    let ok = z.swept_dbeta.abs() < 1e-6 && z.shadow_beta.abs() < 1e-6;
    Ok((ok, format!("∫dβ {:.2e}, ∮β {:.2e}", z.swept_dbeta, z.shadow_beta)))
}

/// Runs criterion `id` (1-based); errors count as failures.
pub fn run_criterion(id: usize) -> CriterionResult {
    let start = Instant::now();
    let out = match id {
        1 => c1_volume(),
        2 => c2_stokes(),
        3 => c3_isoperimetric(),
        4 => c4_diameter(),
        5 => c5_five_ball(),
        6 => c6_contact_field(),
        7 => c7_s3_density(),
        8 => c8_causality(),
        9 => c9_reconstruction(),
        10 => c10_legendrian(),
        11 => c11_concavity(),
        12 => c12_nonsqueezing(),
        13 => c13_deformation(),
        14 => c14_zero_volumes(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
    let title = TITLES.get(id.wrapping_sub(1)).copied().unwrap_or("unknown").to_string();
    CriterionResult { id, title, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run(ids: &[usize]) -> Vec<CriterionResult> {
    ids.iter().map(|id| run_criterion(*id)).collect()
}

pub fn run_all() -> Vec<CriterionResult> {
    run(&(1..=TITLES.len()).collect::<Vec<_>>())
}
