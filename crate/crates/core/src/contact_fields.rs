//! Contact vector fields u = h·v_β + w with L_u β = dh(v_β)·β, and the Moser
//! velocity of an affine family β + t·σ.

use crate::error::{Error, Result};
use crate::geometry::{sample_interior, ContactForm, Domain, Point, ScalarField, Vector};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

/// Below this |det| the restricted dβ counts as singular.
pub const SINGULAR_SYMPLECTIC: f64 = 1e-12;

/// An orthonormal basis of ker β(p): Gram–Schmidt of the coordinate vectors
/// against β's metric dual, taken in coordinate order.
pub fn kernel_basis(beta: &Vector) -> Vec<Vector> {
    let d = beta.len();
    let mut basis: Vec<Vector> = vec![beta.normalize()];
    for i in 0..d {
        if basis.len() == d {
            break;
        }
        let mut e = Vector::zeros(d);
        e[i] = 1.0;
        for b in &basis {
            e -= b * b.dot(&e);
        }
        // Second pass keeps the basis orthogonal to rounding.
        for b in &basis {
            e -= b * b.dot(&e);
        }
        if e.norm() > 0.25 {
            basis.push(e.normalize());
        }
    }
    basis.remove(0);
    basis
}

/// The unique w ∈ ker β with (w⌋dβ)|_{ker β} = −ζ|_{ker β}.
pub fn solve_in_kernel(beta: &Vector, omega: &DMatrix<f64>, zeta: &Vector, p: &Point) -> Result<Vector> {
    solve_in_basis(&kernel_basis(beta), omega, zeta, p)
}

fn solve_in_basis(basis: &[Vector], omega: &DMatrix<f64>, zeta: &Vector, p: &Point) -> Result<Vector> {
    let m = basis.len();
    // dβ(Σ c_a e_a, e_b) = Σ c_a A_ab = −ζ(e_b), i.e. Aᵀ c = −r.
    let a = DMatrix::from_fn(m, m, |i, j| basis[j].dot(&(omega * &basis[i])));
    let r = DVector::from_iterator(m, basis.iter().map(|e| -zeta.dot(e)));
    let lu = a.lu();
    let det = lu.determinant();
    if !det.is_finite() || det.abs() < SINGULAR_SYMPLECTIC {
        return Err(Error::SingularSymplectic { point: p.iter().copied().collect(), det });
    }
    let c = lu.solve(&r).ok_or_else(|| Error::SingularSymplectic { point: p.iter().copied().collect(), det })?;
    Ok(basis.iter().zip(c.iter()).fold(Vector::zeros(p.len()), |acc, (e, ci)| acc + e * *ci))
}

/// w ∈ ker β with (w⌋dβ)|_{ker β} = −dh|_{ker β}.
pub fn solve_w(form: &ContactForm, h: &ScalarField, p: &Point) -> Result<Vector> {
    solve_in_kernel(&form.beta(p), &form.dbeta(p), &h.gradient(p), p)
}

/// The contact field generated by h at a point.
#[derive(Clone, Debug, Serialize)]
pub struct ContactFieldSolution {
    pub point: Vec<f64>,
    pub w: Vec<f64>,
    /// u = h·v_β + w
    pub u: Vec<f64>,
    /// λ = dh(v_β), so that L_u β = λ·β.
    pub lambda: f64,
}

pub fn contact_field(form: &ContactForm, h: &ScalarField, p: &Point) -> Result<ContactFieldSolution> {
    let w = solve_w(form, h, p)?;
    let v = form.reeb(p)?;
    let lambda = h.gradient(p).dot(&v);
    let u = &v * h.value(p) + &w;
    Ok(ContactFieldSolution {
        point: p.iter().copied().collect(),
        w: w.iter().copied().collect(),
        u: u.iter().copied().collect(),
        lambda,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub samples: usize,
    /// max ‖w⌋dβ + dh − dh(v_β)·β‖
    pub equation: f64,
    /// max |β(w)|
    pub kernel: f64,
    /// max |dh(w)|
    pub tangency: f64,
    pub passed: bool,
}

/// Residuals of a candidate w at the given points.
pub fn verify_solution(
    form: &ContactForm,
    h: &ScalarField,
    w: &(dyn Fn(&Point) -> Result<Vector> + Sync),
    points: &[Point],
) -> Result<ResidualReport> {
    let rows: Vec<(f64, f64, f64)> = points
        .par_iter()
        .map(|p| {
            let wp = w(p)?;
            let beta = form.beta(p);
            let dh = h.gradient(p);
            let lam = dh.dot(&form.reeb(p)?);
            let eq = form.dbeta(p).transpose() * &wp + &dh - &beta * lam;
            Ok((eq.norm(), beta.dot(&wp).abs(), dh.dot(&wp).abs()))
        })
        .collect::<Result<_>>()?;
    let max = |f: fn(&(f64, f64, f64)) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let (equation, kernel, tangency) = (max(|r| r.0), max(|r| r.1), max(|r| r.2));
    Ok(ResidualReport {
        samples: rows.len(),
        equation,
        kernel,
        tangency,
        passed: equation < 1e-9 && kernel < 1e-10 && tangency < 1e-8,
    })
}

/// Residuals of solve_w on seeded interior samples of a domain.
pub fn verify_on_domain(form: &ContactForm, h: &ScalarField, domain: &Domain, n_samples: usize, seed: u64) -> Result<ResidualReport> {
    let pts = sample_interior(domain, n_samples, seed)?;
    verify_solution(form, h, &|p: &Point| solve_w(form, h, p), &pts)
}

/// Velocity of the Moser isotopy for β_t = β + t·σ at one point.
#[derive(Clone, Debug, Serialize)]
pub struct MoserVelocity {
    pub t: f64,
    pub w: Vec<f64>,
    /// μ_t = σ(v_{β_t})
    pub mu: f64,
    /// ‖w⌋dβ_t − μ·β_t + σ‖
    pub residual: f64,
    /// |β_t(w)|
    pub kernel: f64,
}

pub fn moser_velocity(base: &ContactForm, sigma: &ContactForm, t: f64, p: &Point) -> Result<MoserVelocity> {
    let bt = ContactForm::perturbed(base.clone(), sigma.clone(), t);
    let beta = bt.beta(p);
    let omega = bt.dbeta(p);
    let s = sigma.beta(p);
    let v = bt.reeb(p)?;
    let mu = s.dot(&v);
    // (w⌋dβ_t)|_{ker β_t} = (μβ_t − σ)|_{ker β_t} = −σ|_{ker β_t}
    let w = solve_in_kernel(&beta, &omega, &s, p)?;
    let residual = (omega.transpose() * &w - &beta * mu + &s).norm();
    Ok(MoserVelocity { t, w: w.iter().copied().collect(), mu, residual, kernel: beta.dot(&w).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_basis_is_orthonormal_and_annihilated() {
        let beta = Vector::from_vec(vec![1.0, -0.3, 0.7]);
        let b = kernel_basis(&beta);
        assert_eq!(b.len(), 2);
        for (i, e) in b.iter().enumerate() {
            assert!(e.dot(&beta).abs() < 1e-14);
            assert!((e.norm() - 1.0).abs() < 1e-14);
            for f in &b[i + 1..] {
                assert!(e.dot(f).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn solution_is_basis_independent() {
        let form = ContactForm::darboux(2);
        let h = ScalarField::sphere();
        let p = Point::from_vec(vec![0.2, -0.4, 0.3, 0.5, 0.1]);
        let w1 = solve_w(&form, &h, &p).unwrap();
        // A rotated basis of the same kernel.
        let b = kernel_basis(&form.beta(&p));
        let (c, s) = (0.6f64, 0.8f64);
        let mut rot = b.clone();
        rot[0] = &b[0] * c + &b[1] * s;
        rot[1] = &b[1] * c - &b[0] * s;
        rot.swap(2, 3);
        let w2 = solve_in_basis(&rot, &form.dbeta(&p), &h.gradient(&p), &p).unwrap();
        assert!((w1 - w2).norm() < 1e-10);
    }
}
