//! Morse strata of the unit ball: boundary points are sorted by the depth and
//! sign of their Lie tower, then the density on the 3-sphere equator of the
//! 5-ball is scanned for positivity.

use reeb_holo::geometry::{ContactForm, Domain, Point};
use reeb_holo::scene::ContactScene;
use reeb_holo::strata::{classify, stratum_positivity_scan};

fn main() -> reeb_holo::Result<()> {
    let ball = ContactScene::new(Domain::ball(1, 1.0)?, ContactForm::darboux(1))?;
    for (label, p) in [
        ("south pole", vec![-1.0, 0.0, 0.0]),
        ("north pole", vec![1.0, 0.0, 0.0]),
        ("equator", vec![0.0, 0.6, 0.8]),
    ] {
        let s = classify(&ball, &Point::from_vec(p))?;
        println!("{label:<10} depth {} sign {}", s.depth, s.sign.symbol());
    }

    let five = ContactScene::new(Domain::ball(2, 1.0)?, ContactForm::darboux(2))?;
    let r = stratum_positivity_scan(&five, 2, 2000)?;
    println!("S^3 equator: {} samples, min density {:?}", r.samples, r.min_value);
    Ok(())
}
