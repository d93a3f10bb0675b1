//! Contact vector fields from a Hamiltonian: for the Darboux form and
//! h = z² + x² + y², the kernel part is w = (xz − y)∂x + x∂y − x²∂z.

use reeb_holo::contact_fields::{contact_field, verify_on_domain};
use reeb_holo::geometry::{ContactForm, Domain, Point, ScalarField};

fn main() -> reeb_holo::Result<()> {
    let form = ContactForm::darboux(1);
    let h = ScalarField::sphere();
    let p = Point::from_vec(vec![0.3, -0.5, 0.2]);
    let sol = contact_field(&form, &h, &p)?;
    println!("w = {:?}", sol.w);
    println!("u = {:?}, λ = {}", sol.u, sol.lambda);
    let check = verify_on_domain(&form, &h, &Domain::ball(1, 1.0)?, 500, 7)?;
    println!("residuals on the ball: equation {:.2e}, kernel {:.2e}", check.equation, check.kernel);
    Ok(())
}
