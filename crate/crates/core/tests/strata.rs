use reeb_holo::geometry::{point, ContactForm, Domain};
use reeb_holo::strata::{classify, stratum2_chart, stratum_positivity_scan, trace_stratum_curves, waterfall_sample, Sign};
use reeb_holo::ContactScene;
use std::f64::consts::PI;

fn scene(domain: Domain) -> ContactScene {
    let n = domain.n();
    ContactScene::new(domain, ContactForm::darboux(n)).unwrap()
}

#[test]
fn ball_points_by_stratum() {
    let s = scene(Domain::ball(1, 1.0).unwrap());
    let eq = classify(&s, &point(1, &[0.0, 0.6, 0.8]).unwrap()).unwrap();
    assert_eq!((eq.depth, eq.sign), (2, Sign::Minus));
    let low = classify(&s, &point(1, &[-0.6, 0.8, 0.0]).unwrap()).unwrap();
    assert_eq!((low.depth, low.sign), (1, Sign::Plus));
    let high = classify(&s, &point(1, &[0.6, 0.0, 0.8]).unwrap()).unwrap();
    assert_eq!((high.depth, high.sign), (1, Sign::Minus));
    assert!(classify(&s, &point(1, &[0.0, 0.1, 0.1]).unwrap()).is_err());
}

#[test]
fn shell_inner_equator_is_concave() {
    let s = scene(Domain::shell(1, 1.0, 2.0).unwrap());
    let p = classify(&s, &point(1, &[0.0, 0.0, 1.0]).unwrap()).unwrap();
    assert_eq!((p.depth, p.sign), (2, Sign::Plus));
    let q = classify(&s, &point(1, &[0.0, 2.0, 0.0]).unwrap()).unwrap();
    assert_eq!((q.depth, q.sign), (2, Sign::Minus));
}

#[test]
fn ellipsoid_equator_integral() {
    // ∮β over {z = 0} bounding ∂_1^+ is the area of the (x, y) ellipse πAB/4.
    let s = scene(Domain::ellipsoid(1, &[1.0, 2.0, 3.0]).unwrap());
    let tr = trace_stratum_curves(&s, 64).unwrap();
    assert_eq!(tr.curves.len(), 1, "{:?}", tr.warnings);
    let c = &tr.curves[0];
    assert!(c.closed);
    assert_eq!(c.sign, Some(Sign::Minus));
    assert!(c.residual < 1e-10, "{}", c.residual);
    let (v, err) = tr.beta_integral(&s, None);
    assert!((v - PI / 2.0).abs() < 1e-6, "{v} ± {err}");
    assert!(c.points.iter().all(|p| p[0].abs() < 1e-9));
}

#[test]
fn shell_has_two_equators() {
    let s = scene(Domain::shell(1, 1.0, 2.0).unwrap());
    let tr = trace_stratum_curves(&s, 64).unwrap();
    assert_eq!(tr.curves.len(), 2);
    let (plus, _) = tr.beta_integral(&s, Some(Sign::Plus));
    let (all, _) = tr.beta_integral(&s, None);
    assert!((plus - PI).abs() < 1e-6, "{plus}");
    assert!((all - 5.0 * PI).abs() < 1e-5, "{all}");
}

#[test]
fn positivity_on_ball_and_shell() {
    for d in [Domain::ball(1, 1.0).unwrap(), Domain::shell(1, 1.0, 2.0).unwrap()] {
        let s = scene(d);
        for j in [1, 2] {
            let r = stratum_positivity_scan(&s, j, 2000).unwrap();
            assert!(r.passed, "{} j={j}: {:?}", s.domain.tag(), r.min_value);
        }
    }
    // The inner equator density cos²θ vanishes somewhere.
    let r = stratum_positivity_scan(&scene(Domain::shell(1, 1.0, 2.0).unwrap()), 2, 2000).unwrap();
    assert!(r.min_value.unwrap().abs() < 1e-3);
}

#[test]
fn sand_clock_neck_has_negative_density() {
    // The neck circle (radius 0.3) bounds the band 0 < z < z_b of ∂_1^+ from
    // below, so its inherited orientation is clockwise seen from above.
    let s = scene(Domain::sand_clock(1, 1.0, 0.3, 0.8).unwrap());
    assert!(stratum_positivity_scan(&s, 1, 2000).unwrap().passed);
    let r = stratum_positivity_scan(&s, 2, 2000).unwrap();
    assert!(!r.passed);
    assert!((r.min_value.unwrap() + 0.3).abs() < 1e-4, "{:?}", r.min_value);
    assert_eq!(r.argmin_sign, Some(Sign::Plus));

    let tr = trace_stratum_curves(&s, 64).unwrap();
    assert_eq!(tr.curves.len(), 3);
    let (plus, _) = tr.beta_integral(&s, Some(Sign::Plus));
    let (all, _) = tr.beta_integral(&s, None);
    assert!((plus + PI * 0.09).abs() < 1e-6, "{plus}");
    assert!((all - PI * (2.0 * 0.64 - 0.09)).abs() < 1e-6, "{all}");
}

#[test]
fn s3_equator_density() {
    let s = scene(Domain::ball(2, 1.0).unwrap());
    let chart = stratum2_chart(&s).unwrap();
    // Explicit density in the chart angles (ψ, θ, φ).
    for u in [[0.3f64, 1.1, 2.0], [1.2, 0.4, 5.0], [2.5, 2.9, 0.7]] {
        let (ps, th, ph) = (u[0], u[1], u[2]);
        let expect = (ps.sin().powi(2) * ps.cos().powi(2) + ps.sin().powi(4) * th.sin().powi(2) * ph.cos().powi(2)) * th.sin();
        let p = chart.map(&u);
        let jac = chart.jacobian(&u);
        let t: Vec<_> = (0..3).map(|i| jac.column(i).into_owned()).collect();
        let got = chart.orientation_sign
            * reeb_holo::geometry::wedge::beta_omega_power(&s.form.beta(&p), &s.form.dbeta(&p), &t);
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }
    let r = stratum_positivity_scan(&s, 2, 10_000).unwrap();
    assert!(r.samples >= 10_000);
    assert!(r.min_value.unwrap() >= -1e-10);
    assert!(stratum_positivity_scan(&s, 4, 1000).unwrap().min_value.is_none());
}

#[test]
fn shell_waterfall_lands_on_outer_sphere() {
    let s = scene(Domain::shell(1, 1.0, 2.0).unwrap());
    let falls = waterfall_sample(&s, 16).unwrap();
    let inner: Vec<_> = falls.iter().filter(|w| w.time > 0.0).collect();
    assert!(!inner.is_empty());
    for w in inner {
        let r2: f64 = w.start[1] * w.start[1] + w.start[2] * w.start[2];
        assert!((r2 - 1.0).abs() < 1e-8);
        assert!((w.end[0] + 3f64.sqrt()).abs() < 1e-8, "{:?}", w.end);
    }
}
