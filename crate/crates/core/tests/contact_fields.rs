use reeb_holo::contact_fields::{
    contact_field, kernel_basis, moser_velocity, solve_w, verify_on_domain, verify_solution,
};
use reeb_holo::geometry::{sample_boundary, sample_interior, ContactForm, Domain, Point, ScalarField, Vector};
use reeb_holo::Result;
use proptest::prelude::*;

fn p3(z: f64, x: f64, y: f64) -> Point {
    Point::from_vec(vec![z, x, y])
}

/// (xz − y)∂x + x∂y − x²∂z in (z, x, y) order.
fn sphere_w(p: &Point) -> Vector {
    let (z, x, y) = (p[0], p[1], p[2]);
    Vector::from_vec(vec![-x * x, x * z - y, x])
}

#[test]
fn sphere_hamiltonian_closed_form() {
    let form = ContactForm::darboux(1);
    let h = ScalarField::sphere();
    for p in [p3(0.1, 0.2, 0.3), p3(-0.7, 0.4, -1.2), p3(2.0, -1.5, 0.5)] {
        let w = solve_w(&form, &h, &p).unwrap();
        assert!((&w - sphere_w(&p)).norm() < 1e-12, "{w} at {p}");
    }
    let pts = sample_interior(&Domain::ball(1, 1.0).unwrap(), 500, 3).unwrap();
    let r = verify_solution(&form, &h, &|p: &Point| -> Result<Vector> { Ok(sphere_w(p)) }, &pts).unwrap();
    assert!(r.passed && r.equation < 1e-9, "{r:?}");
    let r = verify_on_domain(&form, &h, &Domain::ball(1, 1.0).unwrap(), 500, 3).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn height_hamiltonian() {
    let form = ContactForm::darboux(1);
    let h = ScalarField::coordinate(0);
    let p = p3(0.3, -0.8, 0.6);
    let sol = contact_field(&form, &h, &p).unwrap();
    assert!((sol.w[1] + 0.8).abs() < 1e-14 && sol.w[0].abs() < 1e-14 && sol.w[2].abs() < 1e-14);
    assert_eq!(sol.lambda, 1.0);
    // u = z∂z + x∂x
    assert!((sol.u[0] - 0.3).abs() < 1e-14 && (sol.u[1] + 0.8).abs() < 1e-14);
    let pts = sample_interior(&Domain::ball(1, 1.0).unwrap(), 200, 9).unwrap();
    let r = verify_solution(&form, &h, &|p: &Point| solve_w(&form, &h, p), &pts).unwrap();
    assert_eq!(r.tangency, 0.0);
}

#[test]
fn constant_hamiltonian_gives_zero() {
    for form in [ContactForm::darboux(2), ContactForm::radial(2)] {
        let p = Point::from_vec(vec![0.1, 0.5, -0.2, 0.3, 0.9]);
        let w = solve_w(&form, &ScalarField::constant(2.5), &p).unwrap();
        assert_eq!(w.norm(), 0.0);
    }
}

#[test]
fn reeb_shift_is_caught_by_kernel_residual() {
    // w + εv_β still satisfies the contraction equation since v_β⌋dβ = 0;
    // only β(w) = 0 rules it out.
    let form = ContactForm::darboux(1);
    let h = ScalarField::sphere();
    let pts = sample_interior(&Domain::ball(1, 1.0).unwrap(), 200, 4).unwrap();
    let shifted = |p: &Point| -> Result<Vector> {
        let mut w = sphere_w(p);
        w[0] += 1e-3;
        Ok(w)
    };
    let r = verify_solution(&form, &h, &shifted, &pts).unwrap();
    assert!(r.equation < 1e-12, "{r:?}");
    assert!((r.kernel - 1e-3).abs() < 1e-12);
    assert!(!r.passed);
}

#[test]
fn field_is_tangent_to_boundary() {
    let ball = Domain::ball(2, 1.0).unwrap();
    let h = ball.h_field();
    for form in [ContactForm::darboux(2), ContactForm::radial(2)] {
        for p in sample_boundary(&ball, 200, 6).unwrap() {
            let sol = contact_field(&form, &h, &p).unwrap();
            let u = Vector::from_vec(sol.u.clone());
            assert!(h.gradient(&p).dot(&u).abs() < 1e-8);
            assert!(form.beta(&p).dot(&Vector::from_vec(sol.w)).abs() < 1e-10);
        }
    }
}

#[test]
fn moser_constant_family() {
    let base = ContactForm::darboux(1);
    let zero = ContactForm::exact(1, ScalarField::constant(0.0));
    let m = moser_velocity(&base, &zero, 0.7, &p3(0.2, 0.4, -0.1)).unwrap();
    assert_eq!(m.mu, 0.0);
    assert!(m.w.iter().all(|c| *c == 0.0));
}

#[test]
fn moser_exact_family_residuals() {
    let base = ContactForm::darboux(2);
    let sigma = ContactForm::exact(2, ScalarField::gaussian_bump(0.1));
    let pts = sample_interior(&Domain::ball(2, 1.0).unwrap(), 200, 12).unwrap();
    for t in [0.0, 0.4, 1.0] {
        let bt = ContactForm::perturbed(base.clone(), sigma.clone(), t);
        for p in &pts {
            let m = moser_velocity(&base, &sigma, t, p).unwrap();
            // Oracle: plug w back into w⌋dβ_t − μβ_t + σ with μ from the Reeb field.
            let w = Vector::from_vec(m.w.clone());
            let s = sigma.beta(p);
            let mu = s.dot(&bt.reeb(p).unwrap());
            let res = bt.dbeta(p).transpose() * &w - bt.beta(p) * mu + &s;
            assert!(res.norm() < 1e-9 && m.residual < 1e-9);
            assert!((mu - m.mu).abs() < 1e-14);
            assert!(m.kernel < 1e-10);
        }
    }
}

#[test]
fn moser_velocity_tangent_to_boundary() {
    // σ = dh restricts to dh on ∂X.
    let ball = Domain::ball(1, 1.0).unwrap();
    let sigma = ContactForm::exact(1, ball.h_field());
    let base = ContactForm::darboux(1);
    for p in sample_boundary(&ball, 300, 2).unwrap() {
        let m = moser_velocity(&base, &sigma, 0.3, &p).unwrap();
        let w = Vector::from_vec(m.w);
        assert!(ball.grad_h(&p).dot(&w).abs() < 1e-8);
    }
}

fn rk4(form: &ContactForm, h: &ScalarField, p: &Point, t: f64, steps: usize) -> Point {
    let f = |q: &Point| Vector::from_vec(contact_field(form, h, q).unwrap().u);
    let dt = t / steps as f64;
    let mut q = p.clone();
    for _ in 0..steps {
        let k1 = f(&q);
        let k2 = f(&(&q + &k1 * (dt / 2.0)));
        let k3 = f(&(&q + &k2 * (dt / 2.0)));
        let k4 = f(&(&q + &k3 * dt));
        q += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    q
}

/// ‖(φ_Δ^*β − β)/Δ − λβ‖ with Dφ by central differences.
fn lie_residual(delta: f64) -> f64 {
    let form = ContactForm::darboux(1);
    let h = ScalarField::coordinate(0);
    let p = p3(0.3, 0.5, 0.2);
    let eps = 1e-5;
    let target = form.beta(&rk4(&form, &h, &p, delta, 64));
    let mut pull = Vector::zeros(3);
    for i in 0..3 {
        let mut a = p.clone();
        let mut b = p.clone();
        a[i] += eps;
        b[i] -= eps;
        let col = (rk4(&form, &h, &a, delta, 64) - rk4(&form, &h, &b, delta, 64)) / (2.0 * eps);
        pull[i] = target.dot(&col);
    }
    let lambda = contact_field(&form, &h, &p).unwrap().lambda;
    ((pull - form.beta(&p)) / delta - form.beta(&p) * lambda).norm()
}

#[test]
fn height_flow_rescales_beta() {
    let r: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|d| lie_residual(*d)).collect();
    for w in r.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 2.0).abs() < 0.1, "{r:?}");
    }
    // Exact flow gives ((e^Δ − 1)/Δ − 1)·|β(p)|.
    let beta = (1.0f64 + 0.25).sqrt();
    assert!((r[0] - ((0.1f64.exp() - 1.0) / 0.1 - 1.0) * beta).abs() < 1e-6, "{r:?}");
}

proptest! {
    #[test]
    fn linear_hamiltonians_solve_the_equation(
        coords in prop::collection::vec(-1.5f64..1.5, 5),
        coeffs in prop::collection::vec(-2.0f64..2.0, 5),
    ) {
        let p = Point::from_vec(coords);
        let h = ScalarField::linear(coeffs);
        for form in [ContactForm::darboux(2), ContactForm::radial(2)] {
            let r = verify_solution(&form, &h, &|q: &Point| solve_w(&form, &h, q), std::slice::from_ref(&p)).unwrap();
            prop_assert!(r.passed, "{:?}", r);
        }
    }

    #[test]
    fn w_vanishes_iff_dh_annihilates_kernel(
        coords in prop::collection::vec(-1.0f64..1.0, 3),
        c in -2.0f64..2.0,
        k in 0usize..2,
    ) {
        let form = ContactForm::darboux(1);
        let p = Point::from_vec(coords);
        let beta = form.beta(&p);
        let h = ScalarField::linear((&beta * c).iter().copied().collect());
        prop_assert!(solve_w(&form, &h, &p).unwrap().norm() < 1e-12);
        let e = &kernel_basis(&beta)[k];
        let h2 = ScalarField::linear((&beta * c + e * 0.5).iter().copied().collect());
        prop_assert!(solve_w(&form, &h2, &p).unwrap().norm() > 1e-3);
    }
}
