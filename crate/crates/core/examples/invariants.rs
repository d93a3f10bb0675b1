//! Volume, shadow, κ and Reeb length invariants of a Darboux ellipsoid with
//! full axes (1, 2, 3). The closed forms are πABC/6, πAB/4, C and 2C/3.

use reeb_holo::geometry::{ContactForm, Domain};
use reeb_holo::invariants::compute_invariants;
use reeb_holo::quadrature::QuadratureSpec;
use reeb_holo::report::to_json;
use reeb_holo::scene::ContactScene;
use std::f64::consts::PI;

fn main() -> reeb_holo::Result<()> {
    let (a, b, c) = (1.0, 2.0, 3.0);
    let scene = ContactScene::new(Domain::ellipsoid(1, &[a, b, c])?, ContactForm::darboux(1))?;
    let r = compute_invariants(&scene, &QuadratureSpec::default())?;
    print!("{}", to_json(&r)?);
    println!("expected vol {:.12}, shadow {:.12}, diam {c}, av {:.12}", PI * a * b * c / 6.0, PI * a * b / 4.0, 2.0 * c / 3.0);
    Ok(())
}
