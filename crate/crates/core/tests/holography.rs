use reeb_holo::error::Error;
use reeb_holo::geometry::{sample_interior, ContactForm, Domain, Point, ScalarField};
use reeb_holo::holography::{
    boundary_record, extend_diffeo, extract_boundary_data, flow_for, lyapunov_bullet, lyapunov_check,
    reconstruct_from_entry, reconstruct_point, trajectory_coordinates, BoundaryData, BoundaryDiffeo,
    CanonicalExtension, LyapunovMode,
};
use reeb_holo::ContactScene;

fn p3(z: f64, x: f64, y: f64) -> Point {
    Point::from_vec(vec![z, x, y])
}

fn ball(form: ContactForm) -> ContactScene {
    ContactScene::new(Domain::ball(form.n(), 1.0).unwrap(), form).unwrap()
}

/// e^{0.2 x}·(dz + x dy) on an ellipsoid: the Reeb field is not vertical.
fn tilted() -> ContactScene {
    let form = ContactForm::conformal(ContactForm::darboux(1), ScalarField::linear(vec![0.0, 0.2, 0.0]));
    ContactScene::new(Domain::ellipsoid(1, &[1.6, 2.0, 1.4]).unwrap(), form).unwrap()
}

#[test]
fn lyapunov_values() {
    let s = ball(ContactForm::darboux(1));
    assert_eq!(lyapunov_bullet(&s, LyapunovMode::ExactZ, &p3(0.3, 0.0, 0.0)).unwrap(), 0.3);
    let c = lyapunov_bullet(&s, LyapunovMode::ChordMidpoint, &p3(0.0, 0.0, 0.0)).unwrap();
    assert!(c.abs() < 1e-9);
    for p in sample_interior(&s.domain, 100, 8).unwrap() {
        let a = lyapunov_bullet(&s, LyapunovMode::ExactZ, &p).unwrap();
        let b = lyapunov_bullet(&s, LyapunovMode::ChordMidpoint, &p).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b} at {p}");
    }
    assert!(lyapunov_bullet(&tilted(), LyapunovMode::ExactZ, &p3(0.0, 0.0, 0.0)).is_err());
}

#[test]
fn chord_midpoint_grows_at_unit_rate() {
    let s = tilted();
    assert_eq!(LyapunovMode::for_scene(&s), LyapunovMode::ChordMidpoint);
    let pts = sample_interior(&s.domain, 40, 2).unwrap();
    let r = lyapunov_check(&s, LyapunovMode::ChordMidpoint, &pts, 0.01).unwrap();
    assert!(r < 1e-6, "{r}");
}

#[test]
fn ball_boundary_data_is_monotone() {
    let s = ball(ContactForm::darboux(1));
    let data = extract_boundary_data(&s, LyapunovMode::ExactZ, 32).unwrap();
    let inflow = data.inflow().count();
    assert_eq!(inflow * 2, data.records.len());
    let m = data.monotonicity();
    assert_eq!(m.pairs, inflow);
    assert!(m.max_residual < 1e-9, "{m:?}");
    assert!(m.min_increment > 0.0);
    for (_, r) in data.inflow() {
        // Vertical chords: the partner is the mirror point.
        let q = r.partner.as_ref().unwrap();
        assert!((q[0] + r.point[0]).abs() < 1e-9 && (q[1] - r.point[1]).abs() < 1e-9);
    }
}

#[test]
fn equator_points_map_to_themselves() {
    let s = ball(ContactForm::darboux(1));
    let p = p3(0.0, 0.6, 0.8);
    let r = boundary_record(&s, LyapunovMode::ExactZ, 0, vec![], &p).unwrap();
    assert_eq!(r.depth, 2);
    assert_eq!(r.partner.as_deref(), Some(&r.point[..]));
    assert_eq!(r.chord_time, 0.0);
    assert_eq!(r.f_partner.unwrap() - r.f, 0.0);
}

#[test]
fn shell_routing() {
    let s = ContactScene::new(Domain::shell(1, 1.0, 2.0).unwrap(), ContactForm::darboux(1)).unwrap();
    let data = extract_boundary_data(&s, LyapunovMode::ExactZ, 12).unwrap();
    let radius = |p: &[f64]| p.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut seen = [0usize; 3];
    for (_, r) in data.inflow() {
        let q = r.partner.as_ref().unwrap();
        let (ri, ro) = (radius(&r.point), radius(q));
        let rho = r.point[1].hypot(r.point[2]);
        if (ri - 2.0).abs() < 1e-9 && rho < 1.0 {
            // outer-lower → inner-lower
            assert!(r.point[0] < 0.0 && (ro - 1.0).abs() < 1e-8 && q[0] < 0.0, "{r:?}");
            seen[0] += 1;
        } else if (ri - 1.0).abs() < 1e-9 {
            // inner-upper → outer-upper
            assert!(r.point[0] > 0.0 && (ro - 2.0).abs() < 1e-8 && q[0] > 0.0, "{r:?}");
            seen[1] += 1;
        } else {
            // outer-lower beyond the inner shadow → outer-upper
            assert!((ro - 2.0).abs() < 1e-8 && q[0] > 0.0);
            seen[2] += 1;
        }
    }
    assert!(seen.iter().all(|c| *c > 0), "{seen:?}");
    assert!(data.monotonicity().max_residual < 1e-9);
}

#[test]
fn reconstruction_on_the_ball() {
    let s = ball(ContactForm::darboux(1));
    let mode = LyapunovMode::ExactZ;
    let entry = p3(-0.8, 0.6, 0.0);
    let mid = reconstruct_from_entry(&s, mode, &entry, 0.0).unwrap();
    assert!((mid - p3(0.0, 0.6, 0.0)).norm() < 1e-12);
    let same = reconstruct_from_entry(&s, mode, &entry, -0.8).unwrap();
    assert_eq!(same, entry);
    assert!(matches!(reconstruct_from_entry(&s, mode, &entry, 0.81), Err(Error::OutOfChordRange { .. })));

    for x in sample_interior(&s.domain, 1000, 17).unwrap() {
        let (e, f) = trajectory_coordinates(&s, mode, &x).unwrap();
        let back = reconstruct_from_entry(&s, mode, &e, f).unwrap();
        assert!((back - &x).norm() < 1e-8, "{x}");
    }
}

#[test]
fn reconstruction_with_chord_midpoint() {
    let s = tilted();
    let mode = LyapunovMode::ChordMidpoint;
    for x in sample_interior(&s.domain, 60, 21).unwrap() {
        let (e, f) = trajectory_coordinates(&s, mode, &x).unwrap();
        let back = reconstruct_from_entry(&s, mode, &e, f).unwrap();
        let err = (back - &x).norm();
        assert!(err < 1e-8, "{x}: {err}");
    }
}

#[test]
fn reconstruction_from_tabulated_data() {
    let s = ball(ContactForm::darboux(1));
    let data = extract_boundary_data(&s, LyapunovMode::ExactZ, 8).unwrap();
    let json = serde_json::to_string(&data).unwrap();
    let data: BoundaryData = serde_json::from_str(&json).unwrap();
    let (i, r) = data.inflow().next().unwrap();
    let f = r.f + 0.25 * r.chord_time;
    let p = reconstruct_point(&s, &data, i, f).unwrap();
    assert!((p[0] - f).abs() < 1e-12 && (p[1] - r.point[1]).abs() < 1e-12);
    assert!(matches!(reconstruct_point(&s, &data, i, r.f - 0.1), Err(Error::OutOfChordRange { .. })));
    let out = data.records.iter().position(|r| !r.is_inflow()).unwrap();
    assert!(reconstruct_point(&s, &data, out, 0.0).is_err());
}

#[test]
fn identity_extends_to_identity() {
    let s = ball(ContactForm::darboux(1));
    let ext = CanonicalExtension::new(&s, LyapunovMode::ExactZ, BoundaryDiffeo::identity(3), 8).unwrap();
    for x in sample_interior(&s.domain, 100, 3).unwrap() {
        assert!((ext.apply(&x).unwrap() - &x).norm() < 1e-8);
    }
}

#[test]
fn rotations_extend_to_rotations() {
    for n in [1, 2] {
        let s = ball(ContactForm::radial(n));
        let d = 2 * n + 1;
        let per_axis = if n == 1 { 12 } else { 4 };
        let data = extract_boundary_data(&s, LyapunovMode::ExactZ, per_axis).unwrap();
        let (r1, r2) = (BoundaryDiffeo::rotation_z(d, 0.7), BoundaryDiffeo::rotation_z(d, -1.9));
        let e1 = CanonicalExtension::with_data(&s, &data, r1.clone()).unwrap();
        let e2 = CanonicalExtension::with_data(&s, &data, r2.clone()).unwrap();
        let e12 = CanonicalExtension::with_data(&s, &data, r1.compose(&r2)).unwrap();
        for x in sample_interior(&s.domain, 100, 5).unwrap() {
            let y = e1.apply(&x).unwrap();
            assert!((&y - r1.apply(&x)).norm() < 1e-6);
            let lhs = e12.apply(&x).unwrap();
            let rhs = e1.apply(&e2.apply(&x).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-6);
        }
    }
}

#[test]
fn rotations_do_not_preserve_darboux_beta() {
    let s = ball(ContactForm::darboux(1));
    let r = BoundaryDiffeo::rotation_z(3, 0.7);
    let err = extend_diffeo(&s, &r, &p3(0.1, 0.2, 0.3), 8).unwrap_err();
    assert!(matches!(err, Error::IncompatibleBoundaryMap(_)), "{err}");
}

#[test]
fn flow_for_zero_time_is_the_identity() {
    let s = tilted();
    let p = p3(0.1, -0.2, 0.3);
    assert_eq!(flow_for(&s, &p, 0.0).unwrap(), p);
    let q = flow_for(&s, &flow_for(&s, &p, 0.4).unwrap(), -0.4).unwrap();
    assert!((q - p).norm() < 1e-10);
}
