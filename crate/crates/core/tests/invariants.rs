use reeb_holo::geometry::{ContactForm, Domain, ScalarField};
use reeb_holo::invariants::{
    average_length, compute_invariants, deformation_scan, kappa, kappa_plus, reeb_diameter, shadow_volume,
    volume_monte_carlo, volume_x,
};
use reeb_holo::quadrature::QuadratureSpec;
use reeb_holo::ContactScene;
use std::f64::consts::PI;

fn scene(domain: Domain) -> ContactScene {
    let n = domain.n();
    ContactScene::new(domain, ContactForm::darboux(n)).unwrap()
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn ellipsoid_volumes_match_closed_forms() {
    for axes in [[2.0, 2.0, 2.0], [1.0, 2.0, 3.0], [0.7, 1.9, 1.3]] {
        let s = scene(Domain::ellipsoid(1, &axes).unwrap());
        let (a, b, c) = (axes[0], axes[1], axes[2]);
        let vol = volume_x(&s, &spec()).unwrap().value;
        assert!(rel(vol, PI * a * b * c / 6.0) < 1e-6, "{vol}");
        let shadow = shadow_volume(&s, &spec()).unwrap().value;
        assert!(rel(shadow, PI * a * b / 4.0) < 1e-6, "{shadow}");
        let k2 = kappa(&s, 2, &spec()).unwrap();
        assert!(rel(k2, PI * a * b / 4.0) < 1e-6, "{k2}");
        assert_eq!(kappa(&s, 1, &spec()).unwrap(), 0.0);
        assert_eq!(kappa_plus(&s, 2, &spec()).unwrap(), 0.0);
        let av = average_length(&s, &spec()).unwrap();
        assert!(rel(av, 2.0 * c / 3.0) < 1e-6);
    }
}

#[test]
fn diameter_is_the_axis_chord() {
    for axes in [[2.0, 2.0, 2.0], [1.0, 2.0, 3.0], [1.7, 0.6, 1.1]] {
        let s = scene(Domain::ellipsoid(1, &axes).unwrap());
        let d = reeb_diameter(&s, &spec()).unwrap();
        assert!((d.value - axes[2]).abs() < 1e-4, "{:?}", d);
        assert!(d.spread < 1e-3);
    }
}

#[test]
fn shell_invariants() {
    let s = scene(Domain::shell(1, 1.0, 2.0).unwrap());
    let r = compute_invariants(&s, &spec()).unwrap();
    assert!(rel(r.vol_x, 28.0 * PI / 3.0) < 1e-6, "{}", r.vol_x);
    assert!(rel(r.shadow_vol, 5.0 * PI) < 1e-5, "{}", r.shadow_vol);
    assert!(rel(r.kappa[1], 5.0 * PI) < 1e-6);
    assert!(rel(r.kappa_plus[1], PI) < 1e-6);
    // Longest chords graze the inner equator: 2√(r_out² − r_in²).
    assert!((r.diam_r - 2.0 * 3f64.sqrt()).abs() < 1e-4, "{}", r.diam_r);
    assert!(r.slack_isoperimetric > 0.0 && r.slack_equatorial > 0.0);
    assert!(r.av_r <= r.diam_r);
}

#[test]
fn sand_clock_invariants() {
    let s = scene(Domain::sand_clock(1, 1.0, 0.3, 0.8).unwrap());
    let (a, b) = match s.domain.kind() {
        reeb_holo::geometry::DomainKind::SandClock { a, b, .. } => (*a, *b),
        _ => unreachable!(),
    };
    // ∫ π(1 − z²)(a + b z²) dz over [−1, 1]
    let exact = PI * (4.0 * a / 3.0 + 4.0 * b / 15.0);
    let vol = volume_x(&s, &spec()).unwrap().value;
    assert!(rel(vol, exact) < 1e-6, "{vol} vs {exact}");
    let mc = volume_monte_carlo(&s, 200_000, 5).unwrap();
    assert!((mc.value - exact).abs() < 4.0 * mc.error_estimate, "{:?}", mc);
    let shadow = shadow_volume(&s, &spec()).unwrap().value;
    let want = PI * (2.0 * 0.64 - 0.09);
    assert!(rel(shadow, want) < 1e-5, "{shadow} vs {want}");
    assert!(rel(kappa(&s, 2, &spec()).unwrap(), want) < 1e-6);
}

#[test]
fn five_ball() {
    let s = ContactScene::new(Domain::ball(2, 1.0).unwrap(), ContactForm::radial(2)).unwrap();
    let r = compute_invariants(&s, &spec()).unwrap();
    assert!(rel(r.vol_x, 8.0 * PI * PI / 15.0) < 1e-4, "{}", r.vol_x);
    assert!(rel(r.shadow_vol, PI * PI / 2.0) < 1e-4, "{}", r.shadow_vol);
    assert!(rel(r.kappa[1], PI * PI / 2.0) < 1e-4, "{}", r.kappa[1]);
    assert_eq!(r.kappa[2], 0.0);
    assert_eq!(r.kappa[3], 0.0);
    assert_eq!(r.kappa_plus[1], 0.0);
    assert!((r.diam_r - 2.0).abs() < 1e-4);
    assert!(rel(r.av_r, 16.0 / 15.0) < 1e-4);
}

#[test]
fn volume_invariance_under_exact_shift() {
    let s = scene(Domain::ball(1, 1.0).unwrap());
    let zero = deformation_scan(&s, &ScalarField::constant(0.0), &[0.0, 0.5], &spec()).unwrap();
    assert_eq!(zero.spread_kappa_2, 0.0);
    for eta in [ScalarField::gaussian_bump(0.1), ScalarField::coordinate(1)] {
        let eta = if eta.label() == "coord:1" { ScalarField::linear(vec![0.0, 0.1, 0.0]) } else { eta };
        let r = deformation_scan(&s, &eta, &[0.0, 0.05, 0.1], &spec()).unwrap();
        assert!(r.spread_kappa_2 < 1e-6, "{:?}", r);
        assert!(r.spread_kappa_plus_1 < 1e-5, "{:?}", r);
    }
}

#[test]
fn monte_carlo_agrees_with_charts() {
    let s = scene(Domain::ellipsoid(1, &[1.0, 2.0, 3.0]).unwrap());
    let q = QuadratureSpec { force_monte_carlo: true, mc_samples: 200_000, ..spec() };
    let mc = volume_x(&s, &q).unwrap();
    assert!((mc.value - PI).abs() < 4.0 * mc.error_estimate && mc.error_estimate < 0.01 * PI, "{:?}", mc);
}
