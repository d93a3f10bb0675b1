//! Points, contact forms, Reeb fields and implicit domains with boundary charts.

pub mod chart;
pub mod domain;
pub mod form;
pub mod wedge;

pub use chart::{sphere_box, sphere_jacobian, sphere_point, Chart};
pub use domain::{AffineMap, Domain, DomainKind};
pub use form::{ContactForm, FormKind, ScalarField};

use crate::error::{Error, Result};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// A point of R^{2n+1} in coordinates (z, x_1, y_1, …, x_n, y_n).
pub type Point = DVector<f64>;
/// A tangent vector or covector in the same coordinates.
pub type Vector = DVector<f64>;

/// Builds a point after checking length 2n + 1 and finiteness.
pub fn point(n: usize, coords: &[f64]) -> Result<Point> {
    if !(n == 1 || n == 2) {
        return Err(Error::Invalid(format!("n must be 1 or 2, got {n}")));
    }
    if coords.len() != 2 * n + 1 {
        return Err(Error::Invalid(format!("point needs {} coordinates, got {}", 2 * n + 1, coords.len())));
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::Invalid("point has non-finite coordinates".into()));
    }
    Ok(Point::from_column_slice(coords))
}

/// Standard basis vector e_i of R^d.
pub fn basis(d: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(d);
    e[i] = 1.0;
    e
}

#[derive(Clone, Debug, Serialize)]
pub struct ContactCheck {
    pub min_value: f64,
    pub argmin: Vec<f64>,
    pub samples: usize,
    pub accepted: bool,
}

/// Rejection-samples `count` interior points of `domain` with a seeded generator.
pub fn sample_interior(domain: &Domain, count: usize, seed: u64) -> Result<Vec<Point>> {
    const MAX_DRAWS: usize = 1_000_000;
    let (lo, hi) = domain.bbox();
    let d = domain.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0usize;
    while out.len() < count {
        if draws >= MAX_DRAWS && out.is_empty() {
            return Err(Error::EmptyDomain { draws });
        }
        draws += 1;
        let p = Point::from_iterator(d, (0..d).map(|k| rng.gen_range(lo[k]..=hi[k])));
        if domain.h(&p) < 0.0 {
            out.push(p);
        }
    }
    Ok(out)
}

/// Seeded boundary points: uniform chart parameters, cycling through the
/// boundary charts. Not area-uniform.
pub fn sample_boundary(domain: &Domain, count: usize, seed: u64) -> Result<Vec<Point>> {
    let charts = domain.boundary_charts();
    if charts.is_empty() {
        return Err(Error::MissingChart(format!("{} has no boundary charts", domain.tag())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|i| {
            let c = &charts[i % charts.len()];
            let u: Vec<f64> = c.lo.iter().zip(&c.hi).map(|(a, b)| rng.gen_range(*a..=*b)).collect();
            c.map(&u)
        })
        .collect())
}

/// Minimum of β∧(dβ)^n over interior samples; the form is accepted when it is positive.
pub fn contact_check(form: &ContactForm, domain: &Domain, n_samples: usize, seed: u64) -> Result<ContactCheck> {
    if n_samples == 0 {
        return Err(Error::Invalid("contact_check needs at least one sample".into()));
    }
    let pts = sample_interior(domain, n_samples, seed)?;
    let mut min_value = f64::INFINITY;
    let mut argmin = Vec::new();
    for p in &pts {
        let v = form.top_form(p);
        if v < min_value {
            min_value = v;
            argmin = p.iter().copied().collect();
        }
    }
    Ok(ContactCheck { min_value, argmin, samples: pts.len(), accepted: min_value > 0.0 })
}
