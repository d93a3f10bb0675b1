//! Shadows and lifts of Legendrian curves in the Darboux ball. A Legendrian
//! arc survives the round trip; a closed horizontal circle lifts to a helix
//! whose gap is the enclosed area πr².

use reeb_holo::geometry::{ContactForm, Domain};
use reeb_holo::legendrian::{lift_shadow, shadow_project, LegendrianSpec, Patch};
use reeb_holo::scene::ContactScene;
use std::f64::consts::{PI, TAU};

fn main() -> reeb_holo::Result<()> {
    let scene = ContactScene::new(Domain::ball(1, 1.0)?, ContactForm::darboux(1))?;
    let arc = LegendrianSpec::DarbouxArc { z0: 0.2, r: 0.5, t0: 0.0, t1: 2.0, samples: 128 }.build()?;
    let shadow = shadow_project(&scene, &arc)?;
    let lift = shadow.lift(&scene)?;
    let err = lift
        .patch
        .points
        .iter()
        .zip(&arc.points)
        .map(|(p, q)| p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    println!("arc: {} samples, largest drop {:.4}, round trip error {err:.1e}", arc.len(), shadow.drop.iter().cloned().fold(0.0, f64::max));

    let r = 0.5;
    let z = -(1.0f64 - r * r).sqrt();
    let circle = Patch::sample("circle", vec![0.0], vec![TAU], vec![256], vec![true], move |u| {
        vec![z, r * u[0].cos(), r * u[0].sin()]
    })?;
    let helix = lift_shadow(&scene, &circle, 0.1)?;
    println!("helix gap {:.10} (πr² = {:.10})", helix.closure_gap.unwrap_or(f64::NAN), PI * r * r);
    Ok(())
}
