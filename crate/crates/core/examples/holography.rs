//! Holographic reconstruction: interior points are recovered from their
//! inflow boundary point and Lyapunov value, and a z-rotation of the boundary
//! of the radial-form ball extends canonically to the interior.

use reeb_holo::geometry::{sample_interior, ContactForm, Domain};
use reeb_holo::holography::{
    extract_boundary_data, reconstruct_from_entry, trajectory_coordinates, BoundaryDiffeo, CanonicalExtension,
    LyapunovMode,
};
use reeb_holo::scene::ContactScene;

fn main() -> reeb_holo::Result<()> {
    let scene = ContactScene::new(Domain::ball(1, 1.0)?, ContactForm::radial(1))?;
    let mode = LyapunovMode::for_scene(&scene);
    for x in sample_interior(&scene.domain, 3, 11)? {
        let (entry, f) = trajectory_coordinates(&scene, mode, &x)?;
        let back = reconstruct_from_entry(&scene, mode, &entry, f)?;
        println!("{:>7.4?}  entry {:>7.4?}  f {f:+.4}  error {:.1e}", x.as_slice(), entry.as_slice(), (&back - &x).norm());
    }

    let data = extract_boundary_data(&scene, mode, 12)?;
    let rot = BoundaryDiffeo::rotation_z(3, 0.7);
    let ext = CanonicalExtension::with_data(&scene, &data, rot.clone())?;
    for x in sample_interior(&scene.domain, 3, 12)? {
        println!("extension error {:.1e}", (ext.apply(&x)? - rot.apply(&x)).norm());
    }
    Ok(())
}
