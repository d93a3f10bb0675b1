//! Embedding obstructions: the sand clock inside a taller ellipsoid has
//! trajectories that cross it twice, and a ball sits in a larger ball with
//! nonnegative volume, diameter and shadow slacks.

use reeb_holo::geometry::{ContactForm, Domain};
use reeb_holo::nonsqueezing::{complexity, nonsqueezing_check, Embedding};
use reeb_holo::quadrature::QuadratureSpec;
use reeb_holo::scene::ContactScene;

fn darboux(d: Domain) -> reeb_holo::Result<ContactScene> {
    ContactScene::new(d, ContactForm::darboux(1))
}

fn main() -> reeb_holo::Result<()> {
    let clock = darboux(Domain::sand_clock(1, 1.0, 0.3, 0.8)?)?;
    let tall = darboux(Domain::ellipsoid(1, &[2.4, 2.4, 3.0])?)?;
    let c = complexity(&Embedding::parse(clock, tall, "identity")?, 12)?;
    println!("sand clock: c• = {}, histogram {:?}", c.c_bullet, c.histogram);

    let small = darboux(Domain::ball(1, 0.7)?)?;
    let big = darboux(Domain::ball(1, 1.0)?)?;
    let emb = Embedding::parse(small, big, "z-translate:0.2")?;
    let q = QuadratureSpec { resolution: 16, ..QuadratureSpec::default() };
    let r = nonsqueezing_check(&emb, &q, 12)?;
    println!(
        "ball in ball: slacks vol {:.4} diam {:.4} shadow {:.4}, passed {}",
        r.slack_volume, r.slack_diameter, r.slack_shadow, r.passed
    );
    Ok(())
}
