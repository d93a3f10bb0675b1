use reeb_holo::error::Error;
use reeb_holo::geometry::{ContactForm, Domain};
use reeb_holo::legendrian::{
    concavity_criterion, isotropy, lift_shadow, shadow_beta_integral, shadow_project, zero_volume_checks,
    LegendrianSpec, Patch,
};
use reeb_holo::ContactScene;
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

fn ball(n: usize) -> ContactScene {
    ContactScene::new(Domain::ball(n, 1.0).unwrap(), ContactForm::darboux(n)).unwrap()
}

fn shell() -> ContactScene {
    ContactScene::new(Domain::shell(1, 1.0, 2.0).unwrap(), ContactForm::darboux(1)).unwrap()
}

fn max_dist(a: &Patch, b: &Patch) -> f64 {
    a.points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

fn eight(z0: f64, cx: f64, cy: f64, r: f64) -> Patch {
    LegendrianSpec::DarbouxEight { z0, cx, cy, r, samples: 256 }.build().unwrap()
}

#[test]
fn ball_arc_round_trip() {
    let s = ball(1);
    let l = LegendrianSpec::DarbouxArc { z0: 0.2, r: 0.5, t0: 0.0, t1: 2.0, samples: 256 }.build().unwrap();
    assert!(isotropy(&s, &l).passed);
    let sh = shadow_project(&s, &l).unwrap();
    assert!(sh.flags.iter().all(|f| !f) && sh.off_stratum == 0);
    for (p, d) in l.points.iter().zip(&sh.drop) {
        // Vertical drop to the lower hemisphere.
        let expect = p[0] + (1.0 - p[1] * p[1] - p[2] * p[2]).sqrt();
        assert!((d - expect).abs() < 1e-9);
    }
    let lift = sh.lift(&s).unwrap();
    assert!(max_dist(&lift.patch, &l) < 1e-6, "{}", max_dist(&lift.patch, &l));
    assert!(lift.isotropy.beta < 1e-8, "{:?}", lift.isotropy);
}

#[test]
fn boundary_patch_is_its_own_shadow() {
    let s = ball(1);
    let l = LegendrianSpec::DarbouxArc { z0: 0.1, r: 0.6, t0: -1.0, t1: 1.0, samples: 64 }.build().unwrap();
    let on = shadow_project(&s, &l).unwrap().patch;
    let again = shadow_project(&s, &on).unwrap();
    assert!(again.drop.iter().all(|d| d.abs() < 1e-12));
    assert!(max_dist(&again.patch, &on) < 1e-12);
}

#[test]
fn closed_loop_in_ball() {
    let s = ball(1);
    let l = eight(0.1, 0.1, -0.2, 0.35);
    let sh = shadow_project(&s, &l).unwrap();
    let int = shadow_beta_integral(&s, &sh).unwrap();
    assert!(int.value.abs() < 1e-6 && int.crossings == 0, "{int:?}");
    let lift = sh.lift(&s).unwrap();
    assert!(lift.closure_gap.unwrap().abs() < 1e-6);
    assert!(lift.closure_distance.unwrap() < 1e-6);
    assert!(max_dist(&lift.patch, &l) < 1e-6);
}

#[test]
fn helix_gap_is_enclosed_area() {
    let s = ball(1);
    let r = 0.5;
    let zc = -(1.0 - r * r as f64).sqrt();
    let c = Patch::sample("circle", vec![0.0], vec![TAU], vec![256], vec![true], move |u| {
        vec![zc, r * u[0].cos(), r * u[0].sin()]
    })
    .unwrap();
    let lift = lift_shadow(&s, &c, 0.2 - zc).unwrap();
    assert!((lift.closure_gap.unwrap() - PI * r * r).abs() < 1e-6);
    assert!((lift.closure_distance.unwrap() - PI * r * r).abs() < 1e-6);
    assert!(lift.isotropy.beta < 1e-8);
}

#[test]
fn shell_shadow_flags_the_inner_equator() {
    let s = shell();
    let sh = shadow_project(&s, &eight(1.2, 0.9, 0.0, 0.3)).unwrap();
    assert_eq!(sh.crossings.len(), 2);
    assert!(sh.flags.iter().any(|f| *f) && sh.flagged_fraction() < 0.1);
    for c in &sh.crossings {
        let g = &c.graze;
        assert!(g[0].abs() < 1e-3 && (g[1].hypot(g[2]) - 1.0).abs() < 1e-6, "{c:?}");
        assert_eq!(c.sign, Some(reeb_holo::strata::Sign::Plus));
        assert!(((c.drop_after - c.drop_before).abs() - 3f64.sqrt()).abs() < 1e-3);
    }
    assert_eq!(sh.off_stratum, 0);
}

#[test]
fn concavity_cases() {
    let s = shell();
    for (z0, cx, cy, r) in [(1.4, 0.0, 0.0, 0.3), (0.0, 1.5, 0.0, 0.2), (-0.3, 0.0, 1.5, 0.25)] {
        let c = concavity_criterion(&s, &eight(z0, cx, cy, r)).unwrap();
        assert!(!c.negative_integral && !c.trajectory_witness && c.agree, "{c:?}");
    }
    let b = concavity_criterion(&ball(1), &eight(0.1, 0.0, 0.0, 0.4)).unwrap();
    assert!(!b.negative_integral && !b.trajectory_witness && b.agree);
    // Grazing loops: the skipped segments cancel in pairs and ∮ stays 0.
    for (z0, cx, cy, r) in [(1.2, 0.9, 0.0, 0.3), (1.15, 0.0, 0.9, 0.3), (1.3, 1.0, 0.0, 0.2)] {
        let c = concavity_criterion(&s, &eight(z0, cx, cy, r)).unwrap();
        assert!(c.trajectory_witness && c.general_position);
        assert!(c.integral.value.abs() < 1e-6 && c.integral.jump_abs > 3.0, "{c:?}");
    }
}

#[test]
fn zero_volumes_in_dimension_five() {
    let s = ball(2);
    let l = LegendrianSpec::DarbouxCircle5 { z0: 0.1, r: 0.4, samples: 256 }.build().unwrap();
    assert!(isotropy(&s, &l).passed);
    let z = zero_volume_checks(&s, &l).unwrap();
    assert!(z.passed && z.swept_dbeta.abs() < 1e-6 && z.shadow_beta.abs() < 1e-6, "{z:?}");

    let pt = LegendrianSpec::Point { coords: vec![0.1, 0.2, 0.0, 0.0, 0.3] }.build().unwrap();
    let z = zero_volume_checks(&s, &pt).unwrap();
    assert_eq!((z.swept_dbeta, z.shadow_beta), (0.0, 0.0));

    // Horizontal circle in (x1, y1): not Legendrian, ∮β = πr².
    let bad = Patch::sample("flat", vec![0.0], vec![TAU], vec![256], vec![true], |u| {
        vec![0.1, 0.4 * u[0].cos(), 0.4 * u[0].sin(), 0.0, 0.0]
    })
    .unwrap();
    let z = zero_volume_checks(&s, &bad).unwrap();
    assert!(!z.passed);
    assert!((z.legendrian_defect - PI * 0.16).abs() < 1e-6);
    assert!((z.shadow_beta - PI * 0.16).abs() < 1e-6);
}

#[test]
fn lagrangian_shadow_in_dimension_five() {
    let s = ball(2);
    let spec = LegendrianSpec::DarbouxGraph5 { z0: 0.1, center: [0.1, 0.1], half_width: 0.2, a: 0.5, b: 0.2, c: -0.3, samples: 33 };
    let l = spec.build().unwrap();
    assert!(isotropy(&s, &l).passed);
    let sh = shadow_project(&s, &l).unwrap();
    let iso = isotropy(&s, &sh.patch);
    assert!(iso.dbeta < 1e-8, "{iso:?}");
    let lift = sh.lift(&s).unwrap();
    assert!(lift.path_mismatch < 1e-6);
    assert!(max_dist(&lift.patch, &l) < 1e-6);

    let flat = Patch::sample("flat", vec![-0.2, -0.2], vec![0.2, 0.2], vec![17, 17], vec![false, false], |u| {
        let w2 = u[0] * u[0] + u[1] * u[1];
        vec![-(1.0 - w2).sqrt(), u[0], u[1], 0.0, 0.0]
    })
    .unwrap();
    assert!(matches!(lift_shadow(&s, &flat, 0.5), Err(Error::NonLagrangianShadow { .. })));
}

#[test]
fn spec_json_round_trip() {
    let spec = LegendrianSpec::DarbouxEight { z0: 0.1, cx: 0.0, cy: 0.2, r: 0.3, samples: 64 };
    let text = serde_json::to_string(&spec).unwrap();
    assert!(text.contains("\"kind\":\"darboux-eight\""));
    let back: LegendrianSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back.build().unwrap().points, spec.build().unwrap().points);
    let sampled = LegendrianSpec::Sampled { patch: spec.build().unwrap() };
    let back: LegendrianSpec = serde_json::from_str(&serde_json::to_string(&sampled).unwrap()).unwrap();
    assert_eq!(back.build().unwrap().len(), 64);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn eights_lift_back(z0 in -0.2f64..0.2, cx in -0.2f64..0.2, cy in -0.2f64..0.2, r in 0.1f64..0.3) {
        let s = ball(1);
        let l = eight(z0, cx, cy, r);
        let sh = shadow_project(&s, &l).unwrap();
        let lift = sh.lift(&s).unwrap();
        prop_assert!(lift.closure_gap.unwrap().abs() < 1e-6);
        prop_assert!(max_dist(&lift.patch, &l) < 1e-6);
    }
}
