//! Causality map of the unit ball with the Darboux form: every inflow point
//! on the lower hemisphere exits at its mirror image (z ↦ −z).

use reeb_holo::flow::{causality_map, format_word, inflow_grid};
use reeb_holo::geometry::{ContactForm, Domain, Point};
use reeb_holo::scene::ContactScene;

fn main() -> reeb_holo::Result<()> {
    let scene = ContactScene::new(Domain::ball(1, 1.0)?, ContactForm::darboux(1))?;
    for g in inflow_grid(&scene, 4, None)? {
        let c = causality_map(&scene, &Point::from_column_slice(&g.point))?;
        println!(
            "{:>7.4?} -> {:>7.4?}  t = {:.6}  word {}",
            c.x_plus,
            c.x_minus,
            c.chord_time,
            format_word(&c.word)
        );
    }
    Ok(())
}
