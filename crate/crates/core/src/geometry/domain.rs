use super::chart::{sphere_box, sphere_jacobian, sphere_point, Chart};
use super::form::ScalarField;
use super::{Point, Vector};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// p ↦ M p + b.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub matrix: DMatrix<f64>,
    pub offset: Vector,
    inverse: DMatrix<f64>,
}

impl AffineMap {
    pub fn new(matrix: DMatrix<f64>, offset: Vector) -> Result<Self> {
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Invalid("affine map is not invertible".into()))?;
        Ok(Self { matrix, offset, inverse })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim), offset: Vector::zeros(dim), inverse: DMatrix::identity(dim, dim) }
    }

    pub fn translation(offset: Vector) -> Self {
        let d = offset.len();
        Self { matrix: DMatrix::identity(d, d), offset, inverse: DMatrix::identity(d, d) }
    }

    /// Diagonal scaling; `factors` in coordinate order.
    pub fn scaling(factors: &[f64]) -> Result<Self> {
        let m = DMatrix::from_diagonal(&Vector::from_column_slice(factors));
        Self::new(m, Vector::zeros(factors.len()))
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, p: &Point) -> Point {
        &self.matrix * p + &self.offset
    }

    pub fn apply_inverse(&self, p: &Point) -> Point {
        &self.inverse * (p - &self.offset)
    }

    pub fn inverse_matrix(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            matrix: &self.matrix * &inner.matrix,
            offset: &self.matrix * &inner.offset + &self.offset,
            inverse: &inner.inverse * &self.inverse,
        }
    }
}

#[derive(Clone)]
pub enum DomainKind {
    /// Σ ((p_k − c_k)/s_k)² ≤ 1 with semi-axes `semi` in coordinate order.
    Ellipsoid { semi: Vec<f64>, center: Vec<f64> },
    /// r_in ≤ |p| ≤ r_out.
    Shell { r_in: f64, r_out: f64 },
    /// ρ² ≤ P(z) = (H² − z²)(a + b z²), ρ² = Σ x_i² + y_i².
    SandClock { half_height: f64, a: f64, b: f64 },
    /// Image of another domain under an affine map.
    Affine { base: Box<Domain>, map: AffineMap },
    Custom { label: String, h: ScalarField, lo: Vec<f64>, hi: Vec<f64>, witness: Vec<f64>, charts: Vec<Chart> },
}

/// A compact domain X = {h ≤ 0} in R^{2n+1}.
#[derive(Clone)]
pub struct Domain {
    n: usize,
    kind: DomainKind,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Domain(n={}, {})", self.n, self.tag())
    }
}

impl Domain {
    /// Ellipsoid from full axis lengths listed as (x_1, y_1, …, x_n, y_n, z).
    /// Axes (2, 2, 2) give the unit ball.
    pub fn ellipsoid(n: usize, axes: &[f64]) -> Result<Self> {
        let d = 2 * n + 1;
        if axes.len() != d {
            return Err(Error::Invalid(format!("ellipsoid needs {d} axes, got {}", axes.len())));
        }
        if axes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::Invalid("ellipsoid axes must be positive".into()));
        }
        let mut semi = vec![0.0; d];
        semi[0] = 0.5 * axes[d - 1];
        for k in 1..d {
            semi[k] = 0.5 * axes[k - 1];
        }
        Ok(Self { n, kind: DomainKind::Ellipsoid { semi, center: vec![0.0; d] } })
    }

    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        Self::ellipsoid(n, &vec![2.0 * radius; 2 * n + 1])
    }

    pub fn with_center(self, center: &[f64]) -> Result<Self> {
        match self.kind {
            DomainKind::Ellipsoid { semi, .. } if center.len() == semi.len() => {
                Ok(Self { n: self.n, kind: DomainKind::Ellipsoid { semi, center: center.to_vec() } })
            }
            _ => Err(Error::Invalid("center applies to ellipsoids of matching dimension".into())),
        }
    }

    pub fn shell(n: usize, r_in: f64, r_out: f64) -> Result<Self> {
        if !(r_in > 0.0 && r_out > r_in) {
            return Err(Error::Invalid(format!("shell needs 0 < r_in < r_out, got ({r_in}, {r_out})")));
        }
        Ok(Self { n, kind: DomainKind::Shell { r_in, r_out } })
    }

    /// Sand clock with caps at z = ±H, neck radius at z = 0 and maximal bulge radius.
    pub fn sand_clock(n: usize, half_height: f64, neck: f64, bulge: f64) -> Result<Self> {
        let h2 = half_height * half_height;
        if !(half_height > 0.0 && neck > 0.0 && bulge > neck) {
            return Err(Error::Invalid("sand clock needs H > 0 and 0 < neck < bulge".into()));
        }
        let a = neck * neck / h2;
        // Max of P over z² is (a + bH²)²/(4b); solve (a + bH²)² = 4b·bulge².
        let qa = h2 * h2;
        let qb = 2.0 * a * h2 - 4.0 * bulge * bulge;
        let qc = a * a;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return Err(Error::Invalid("sand clock profile has no real solution".into()));
        }
        let b = (-qb + disc.sqrt()) / (2.0 * qa);
        if b * h2 <= a {
            return Err(Error::Invalid("sand clock bulge too small for the neck".into()));
        }
        Ok(Self { n, kind: DomainKind::SandClock { half_height, a, b } })
    }

    pub fn sand_clock_raw(n: usize, half_height: f64, a: f64, b: f64) -> Result<Self> {
        if !(half_height > 0.0 && a > 0.0 && b * half_height * half_height > a) {
            return Err(Error::Invalid("sand clock needs H > 0, a > 0 and bH² > a".into()));
        }
        Ok(Self { n, kind: DomainKind::SandClock { half_height, a, b } })
    }

    pub fn transformed(base: Domain, map: AffineMap) -> Result<Self> {
        if map.dim() != base.dim() {
            return Err(Error::Invalid("affine map dimension mismatch".into()));
        }
        let n = base.n;
        Ok(Self { n, kind: DomainKind::Affine { base: Box::new(base), map } })
    }

    pub fn custom(
        n: usize,
        label: impl Into<String>,
        h: ScalarField,
        lo: Vec<f64>,
        hi: Vec<f64>,
        witness: Vec<f64>,
        charts: Vec<Chart>,
    ) -> Result<Self> {
        let d = 2 * n + 1;
        if lo.len() != d || hi.len() != d || witness.len() != d {
            return Err(Error::Invalid("custom domain box/witness dimension mismatch".into()));
        }
        let dom = Self { n, kind: DomainKind::Custom { label: label.into(), h, lo, hi, witness, charts } };
        let w = Vector::from_vec(dom.witness());
        if dom.h(&w) >= 0.0 {
            return Err(Error::Invalid("interior witness does not satisfy h < 0".into()));
        }
        Ok(dom)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn tag(&self) -> String {
        match &self.kind {
            DomainKind::Ellipsoid { semi, .. } => {
                let d = semi.len();
                let axes: Vec<String> = (1..d).chain(std::iter::once(0)).map(|k| format!("{}", 2.0 * semi[k])).collect();
                format!("ellipsoid({})", axes.join(","))
            }
            DomainKind::Shell { r_in, r_out } => format!("shell({r_in},{r_out})"),
            DomainKind::SandClock { half_height, a, b } => format!("sandclock({half_height},{a},{b})"),
            DomainKind::Affine { base, .. } => format!("affine({})", base.tag()),
            DomainKind::Custom { label, .. } => format!("custom({label})"),
        }
    }

    pub fn h(&self, p: &Point) -> f64 {
        match &self.kind {
            DomainKind::Ellipsoid { semi, center } => {
                p.iter().zip(semi).zip(center).map(|((x, s), c)| ((x - c) / s).powi(2)).sum::<f64>() - 1.0
            }
            DomainKind::Shell { r_in, r_out } => {
                let r2 = p.norm_squared();
                (r2 - r_out * r_out) * (r2 - r_in * r_in)
            }
            DomainKind::SandClock { half_height, a, b } => {
                let z = p[0];
                let rho2: f64 = p.iter().skip(1).map(|x| x * x).sum();
                rho2 - (half_height * half_height - z * z) * (a + b * z * z)
            }
            DomainKind::Affine { base, map } => base.h(&map.apply_inverse(p)),
            DomainKind::Custom { h, .. } => h.value(p),
        }
    }

    pub fn grad_h(&self, p: &Point) -> Vector {
        match &self.kind {
            DomainKind::Ellipsoid { semi, center } => Vector::from_iterator(
                p.len(),
                p.iter().zip(semi).zip(center).map(|((x, s), c)| 2.0 * (x - c) / (s * s)),
            ),
            DomainKind::Shell { r_in, r_out } => {
                let r2 = p.norm_squared();
                p * (2.0 * (2.0 * r2 - r_in * r_in - r_out * r_out))
            }
            DomainKind::SandClock { half_height, a, b } => {
                let z = p[0];
                let h2 = half_height * half_height;
                let mut g = p * 2.0;
                // −P'(z) with P = (H² − z²)(a + b z²)
                g[0] = 2.0 * z * (a + b * z * z) - 2.0 * b * z * (h2 - z * z);
                g
            }
            DomainKind::Affine { base, map } => map.inverse_matrix().transpose() * base.grad_h(&map.apply_inverse(p)),
            DomainKind::Custom { h, .. } => h.gradient(p),
        }
    }

    /// h as a [`ScalarField`] with analytic gradient.
    pub fn h_field(&self) -> ScalarField {
        let a = self.clone();
        let b = self.clone();
        ScalarField::new(format!("h[{}]", self.tag()), move |p| a.h(p)).with_gradient(move |p| b.grad_h(p))
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.h(p) < 0.0
    }

    /// Axis-aligned box containing X.
    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        match &self.kind {
            DomainKind::Ellipsoid { semi, center } => (
                (0..d).map(|k| center[k] - semi[k]).collect(),
                (0..d).map(|k| center[k] + semi[k]).collect(),
            ),
            DomainKind::Shell { r_out, .. } => (vec![-r_out; d], vec![*r_out; d]),
            DomainKind::SandClock { half_height, a, b } => {
                let h2 = half_height * half_height;
                let u = ((b * h2 - a) / (2.0 * b)).clamp(0.0, h2);
                let rmax = ((h2 - u) * (a + b * u)).max(a * h2).sqrt();
                let mut lo = vec![-rmax; d];
                let mut hi = vec![rmax; d];
                lo[0] = -half_height;
                hi[0] = *half_height;
                (lo, hi)
            }
            DomainKind::Affine { base, map } => {
                let (blo, bhi) = base.bbox();
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for mask in 0..(1usize << d) {
                    let corner = Vector::from_iterator(d, (0..d).map(|k| if mask >> k & 1 == 1 { bhi[k] } else { blo[k] }));
                    let q = map.apply(&corner);
                    for k in 0..d {
                        lo[k] = lo[k].min(q[k]);
                        hi[k] = hi[k].max(q[k]);
                    }
                }
                (lo, hi)
            }
            DomainKind::Custom { lo, hi, .. } => (lo.clone(), hi.clone()),
        }
    }

    /// A point declared to satisfy h < 0.
    pub fn witness(&self) -> Vec<f64> {
        match &self.kind {
            DomainKind::Ellipsoid { center, .. } => center.clone(),
            DomainKind::Shell { r_in, r_out } => {
                let mut w = vec![0.0; self.dim()];
                w[1] = 0.5 * (r_in + r_out);
                w
            }
            DomainKind::SandClock { .. } => vec![0.0; self.dim()],
            DomainKind::Affine { base, map } => map.apply(&Vector::from_vec(base.witness())).iter().copied().collect(),
            DomainKind::Custom { witness, .. } => witness.clone(),
        }
    }

    /// Half the largest bbox side: a length scale for tolerances.
    pub fn scale(&self) -> f64 {
        let (lo, hi) = self.bbox();
        lo.iter().zip(&hi).map(|(a, b)| 0.5 * (b - a)).fold(0.0, f64::max)
    }

    /// Charts covering ∂X, oriented so that (inward normal, chart frame) is
    /// positive in the coordinate order (z, x_1, y_1, …).
    pub fn boundary_charts(&self) -> Vec<Chart> {
        let d = self.dim();
        let raw: Vec<Chart> = match &self.kind {
            DomainKind::Ellipsoid { semi, center } => {
                vec![scaled_sphere_chart("ellipsoid", d, semi.clone(), center.clone())]
            }
            DomainKind::Shell { r_in, r_out } => vec![
                scaled_sphere_chart("shell-outer", d, vec![*r_out; d], vec![0.0; d]),
                scaled_sphere_chart("shell-inner", d, vec![*r_in; d], vec![0.0; d]),
            ],
            DomainKind::SandClock { half_height, a, b } => {
                vec![sand_clock_chart(self.n, *half_height, *a, *b)]
            }
            DomainKind::Affine { base, map } => {
                let m = map.clone();
                let m2 = map.matrix.clone();
                base.boundary_charts()
                    .into_iter()
                    .map(|c| {
                        let m = m.clone();
                        let m2 = m2.clone();
                        c.push_forward(format!("affine-{}", c.label), Arc::new(move |p| m.apply(p)), Arc::new(move |_| m2.clone()))
                    })
                    .collect()
            }
            DomainKind::Custom { charts, .. } => charts.clone(),
        };
        raw.into_iter().map(|c| self.orient_boundary_chart(c)).collect()
    }

    /// Sets the chart's orientation sign to the inward-normal-first convention.
    pub fn orient_boundary_chart(&self, chart: Chart) -> Chart {
        let s = self.boundary_frame_sign(&chart, &chart.center()).unwrap_or_else(|| {
            // Center may be degenerate; probe a few off-center parameters.
            let probes = [0.37, 0.61, 0.23, 0.79];
            probes
                .iter()
                .find_map(|&t| {
                    let u: Vec<f64> = chart.lo.iter().zip(&chart.hi).map(|(a, b)| a + t * (b - a)).collect();
                    self.boundary_frame_sign(&chart, &u)
                })
                .unwrap_or(1.0)
        });
        let sign = s * chart.orientation_sign.signum();
        let c = chart.clone();
        c.with_orientation(sign)
    }

    fn boundary_frame_sign(&self, chart: &Chart, u: &[f64]) -> Option<f64> {
        let p = chart.map(u);
        let j = chart.jacobian(u);
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        m.set_column(0, &(-self.grad_h(&p)));
        for i in 0..j.ncols() {
            m.set_column(i + 1, &j.column(i));
        }
        let det = m.determinant();
        let scale = m.column_iter().map(|c| c.norm()).product::<f64>();
        if det.abs() > 1e-8 * scale.max(1e-300) {
            Some(det.signum())
        } else {
            None
        }
    }

    /// A chart of X itself fibered over the boundary, when one is available.
    pub fn solid_chart(&self) -> Option<Chart> {
        let d = self.dim();
        match &self.kind {
            DomainKind::Ellipsoid { semi, center } => {
                let (mut lo, mut hi, _) = sphere_box(d - 1);
                lo.insert(0, 0.0);
                hi.insert(0, 1.0);
                let (s, c) = (semi.clone(), center.clone());
                let (s2, _c2) = (semi.clone(), center.clone());
                Some(
                    Chart::new("ellipsoid-solid", lo, hi, move |u| {
                        let w = sphere_point(&u[1..]);
                        Vector::from_iterator(d, (0..d).map(|k| c[k] + s[k] * u[0] * w[k]))
                    })
                    .with_jacobian(move |u| {
                        let w = sphere_point(&u[1..]);
                        let jw = sphere_jacobian(&u[1..]);
                        let mut j = DMatrix::zeros(d, d);
                        for k in 0..d {
                            j[(k, 0)] = s2[k] * w[k];
                            for a in 0..d - 1 {
                                j[(k, a + 1)] = s2[k] * u[0] * jw[(k, a)];
                            }
                        }
                        j
                    }),
                )
            }
            DomainKind::Shell { r_in, r_out } => {
                let (mut lo, mut hi, _) = sphere_box(d - 1);
                lo.insert(0, *r_in);
                hi.insert(0, *r_out);
                Some(
                    Chart::new("shell-solid", lo, hi, move |u| Vector::from_vec(sphere_point(&u[1..])) * u[0]).with_jacobian(
                        move |u| {
                            let w = sphere_point(&u[1..]);
                            let jw = sphere_jacobian(&u[1..]);
                            let mut j = DMatrix::zeros(d, d);
                            for k in 0..d {
                                j[(k, 0)] = w[k];
                                for a in 0..d - 1 {
                                    j[(k, a + 1)] = u[0] * jw[(k, a)];
                                }
                            }
                            j
                        },
                    ),
                )
            }
            DomainKind::SandClock { half_height, a, b } => {
                // (s, ρ, sphere angles) ↦ (−H cos s, ρ R(s) ω)
                let (hh, a, b) = (*half_height, *a, *b);
                let m = 2 * self.n - 1;
                let (mut lo, mut hi, _) = sphere_box(m);
                lo.insert(0, 0.0);
                hi.insert(0, 1.0);
                lo.insert(0, 0.0);
                hi.insert(0, PI);
                Some(Chart::new("sandclock-solid", lo, hi, move |u| {
                    let r = sand_clock_radius(hh, a, b, u[0]);
                    let w = sphere_point(&u[2..]);
                    let mut p = Vector::zeros(d);
                    p[0] = -hh * u[0].cos();
                    for k in 0..d - 1 {
                        p[k + 1] = u[1] * r * w[k];
                    }
                    p
                }))
            }
            DomainKind::Affine { base, map } => {
                let m = map.clone();
                let m2 = map.matrix.clone();
                base.solid_chart()
                    .map(|c| c.push_forward("affine-solid", Arc::new(move |p| m.apply(p)), Arc::new(move |_| m2.clone())))
            }
            DomainKind::Custom { .. } => None,
        }
        .map(|c| {
            let u: Vec<f64> = c.lo.iter().zip(&c.hi).map(|(a, b)| a + 0.37 * (b - a)).collect();
            let s = c.jacobian(&u).determinant().signum();
            c.with_orientation(s)
        })
    }

    /// The equator {z = center_z} of an ellipsoid, a chart of S^{2n−1}.
    /// It is the tangency locus ∂_2X for any vertical Reeb field.
    pub fn equator_chart(&self) -> Option<Chart> {
        match &self.kind {
            DomainKind::Ellipsoid { semi, center } => {
                let d = self.dim();
                let (lo, hi, periodic) = sphere_box(d - 2);
                let (s, c) = (semi.clone(), center.clone());
                let (s2, _) = (semi.clone(), center.clone());
                Some(
                    Chart::new("ellipsoid-equator", lo, hi, move |u| {
                        let w = sphere_point(u);
                        let mut p = Vector::from_vec(c.clone());
                        for k in 1..d {
                            p[k] += s[k] * w[k - 1];
                        }
                        p
                    })
                    .with_jacobian(move |u| {
                        let jw = sphere_jacobian(u);
                        let mut j = DMatrix::zeros(d, d - 2);
                        for k in 1..d {
                            for a in 0..d - 2 {
                                j[(k, a)] = s2[k] * jw[(k - 1, a)];
                            }
                        }
                        j
                    })
                    .with_periodic(periodic),
                )
            }
            _ => None,
        }
    }

    /// Checks that 0 is a regular value on boundary chart samples.
    pub fn regularity_check(&self, per_axis: usize) -> Result<f64> {
        let mut min_grad = f64::INFINITY;
        for c in self.boundary_charts() {
            let cells = vec![per_axis; c.dim()];
            for u in c.cell_centers(&cells) {
                let p = c.map(&u);
                min_grad = min_grad.min(self.grad_h(&p).norm());
            }
        }
        if min_grad <= 1e-10 {
            return Err(Error::Invalid(format!("0 is not a regular value of h (|∇h| = {min_grad:e})")));
        }
        Ok(min_grad)
    }
}

/// R(s) for the sand clock chart with z = −H cos s: R² = P(z).
pub(crate) fn sand_clock_radius(hh: f64, a: f64, b: f64, s: f64) -> f64 {
    let c = s.cos();
    hh * s.sin() * (a + b * hh * hh * c * c).sqrt()
}

fn scaled_sphere_chart(label: &str, d: usize, semi: Vec<f64>, center: Vec<f64>) -> Chart {
    let (lo, hi, periodic) = sphere_box(d - 1);
    let (s, c) = (semi.clone(), center);
    Chart::new(label, lo, hi, move |u| {
        let w = sphere_point(u);
        Vector::from_iterator(d, (0..d).map(|k| c[k] + s[k] * w[k]))
    })
    .with_jacobian(move |u| {
        let jw = sphere_jacobian(u);
        let mut j = DMatrix::zeros(d, d - 1);
        for k in 0..d {
            for a in 0..d - 1 {
                j[(k, a)] = semi[k] * jw[(k, a)];
            }
        }
        j
    })
    .with_periodic(periodic)
}

fn sand_clock_chart(n: usize, hh: f64, a: f64, b: f64) -> Chart {
    let d = 2 * n + 1;
    let m = 2 * n - 1;
    let (mut lo, mut hi, mut periodic) = sphere_box(m);
    lo.insert(0, 0.0);
    hi.insert(0, PI);
    periodic.insert(0, false);
    Chart::new("sandclock", lo, hi, move |u| {
        let r = sand_clock_radius(hh, a, b, u[0]);
        let w = sphere_point(&u[1..]);
        let mut p = Vector::zeros(d);
        p[0] = -hh * u[0].cos();
        for k in 0..d - 1 {
            p[k + 1] = r * w[k];
        }
        p
    })
    .with_periodic(periodic)
}
