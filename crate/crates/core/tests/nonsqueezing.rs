use reeb_holo::error::Error;
use reeb_holo::nonsqueezing::{complexity, nonsqueezing_check, shadow_kappa, Embedding};
use reeb_holo::quadrature::QuadratureSpec;
use reeb_holo::{ContactForm, ContactScene, Domain};
use std::f64::consts::PI;

fn darboux(domain: Domain) -> ContactScene {
    let n = domain.n();
    ContactScene::new(domain, ContactForm::darboux(n)).unwrap()
}

fn ball(r: f64) -> ContactScene {
    darboux(Domain::ball(1, r).unwrap())
}

fn spec() -> QuadratureSpec {
    QuadratureSpec { resolution: 16, ..Default::default() }
}

#[test]
fn ball_in_a_larger_ball() {
    let emb = Embedding::parse(ball(1.0), ball(2.0), "identity").unwrap();
    assert!(emb.contact && emb.pullback_residual == 0.0);
    let r = nonsqueezing_check(&emb, &spec(), 12).unwrap();
    assert_eq!(r.complexity.c_bullet, 1);
    assert_eq!(r.complexity.word_bound, 1);
    // Vertical lines meet the unit sphere twice or miss it.
    assert!(r.complexity.histogram.keys().all(|k| *k == 0 || *k == 2), "{:?}", r.complexity.histogram);
    let close = |a: f64, b: f64| (a - b).abs() < 1e-3 * b;
    assert!(close(r.vol_x, 4.0 * PI / 3.0) && close(r.vol_y, 32.0 * PI / 3.0), "{r:?}");
    assert!(close(r.diam_x, 2.0) && close(r.diam_y, 4.0));
    assert!(close(r.shadow_x, PI) && close(r.shadow_y, 4.0 * PI));
    assert!(r.passed && r.slack_shadow > 0.0);
}

#[test]
fn vertical_translation_is_contact() {
    let emb = Embedding::parse(ball(1.0), ball(2.0), "z-translate:0.5").unwrap();
    assert_eq!(complexity(&emb, 8).unwrap().c_bullet, 1);
    // Horizontal shifts change x dy by a closed but nonzero term.
    let err = Embedding::parse(ball(1.0), ball(2.0), "translate:0,0.5,0").unwrap_err();
    assert!(matches!(err, Error::IncompatibleEmbedding(_)));
    let err = Embedding::parse(ball(1.0), ball(2.0), "z-translate:1.5").unwrap_err();
    assert!(matches!(err, Error::IncompatibleEmbedding(_)));
}

#[test]
fn scalings_are_not_contact() {
    // (z, x, y) ↦ (4z, 2x, 2y) pulls dz + x dy back to 4β; the residual
    // at a sample p is 3|β(p)|.
    let emb = Embedding::parse(ball(0.5), ball(2.0), "scale:4,2").unwrap();
    assert!(!emb.contact);
    assert!(emb.pullback_residual > 2.9 && emb.pullback_residual < 3.0 * 1.25, "{}", emb.pullback_residual);
    assert!(Embedding::parse(ball(0.5), ball(2.0), "scale:4").is_err());
    assert!(Embedding::parse(ball(0.5), ball(2.0), "squash").is_err());
}

#[test]
fn sand_clock_in_an_ellipsoid() {
    let x = darboux(Domain::sand_clock(1, 1.0, 0.3, 0.8).unwrap());
    let y = darboux(Domain::ellipsoid(1, &[2.4, 2.4, 3.0]).unwrap());
    let emb = Embedding::parse(x, y, "identity").unwrap();
    let c = complexity(&emb, 12).unwrap();
    assert_eq!(c.c_bullet, 2, "{c:?}");
    assert!(c.histogram.keys().all(|k| k % 2 == 0 && *k <= 4));
    assert!(c.c_bullet >= c.word_bound);
}

#[test]
fn shell_in_a_ball() {
    let x = darboux(Domain::shell(1, 1.0, 2.0).unwrap());
    let emb = Embedding::parse(x, ball(3.0), "identity").unwrap();
    let c = complexity(&emb, 12).unwrap();
    // ρ < 1: four crossings; 1 < ρ < 2: two; beyond: none.
    assert_eq!(c.c_bullet, 2);
    assert!(c.histogram.contains_key(&2) && c.histogram.contains_key(&0));
}

#[test]
fn projected_shadow_matches_intrinsic() {
    for (src, tgt) in [(1.0, 2.0), (0.7, 1.0)] {
        let emb = Embedding::parse(ball(src), ball(tgt), "identity").unwrap();
        let k = shadow_kappa(&emb, 1, &QuadratureSpec { resolution: 8, ..spec() }).unwrap();
        assert!((k.intrinsic - PI * src * src).abs() < 1e-3, "{k:?}");
        assert!(k.rel_diff < 0.01, "{k:?}");
    }
    let emb = Embedding::parse(ball(1.0), ball(2.0), "identity").unwrap();
    assert!(shadow_kappa(&emb, 2, &spec()).is_err());
}
