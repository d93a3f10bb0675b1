use super::wedge;
use super::{Point, Vector};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::fmt;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Point) -> Vector + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&Point) -> DMatrix<f64> + Send + Sync>;

/// Below this |det(dβ + β⊗β)| the contact condition is treated as violated.
pub const SINGULAR_DET: f64 = 1e-12;

/// Central difference of `f` along `e_a`, extrapolated once (fourth order).
pub(crate) fn richardson_partial<T, F>(f: &F, p: &Point, a: usize, step: f64) -> T
where
    F: Fn(&Point) -> T,
    T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let diff = |h: f64| {
        let mut plus = p.clone();
        let mut minus = p.clone();
        plus[a] += h;
        minus[a] -= h;
        (f(&plus) - f(&minus)) * (0.5 / h)
    };
    let coarse = diff(step);
    let fine = diff(0.5 * step);
    fine * (4.0 / 3.0) - coarse * (1.0 / 3.0)
}

/// A smooth scalar function on the ambient space, with an optional analytic gradient.
#[derive(Clone)]
pub struct ScalarField {
    label: String,
    value: ScalarFn,
    gradient: Option<VectorFn>,
    fd_step: f64,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.label)
    }
}

impl ScalarField {
    pub fn new(label: impl Into<String>, value: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), value: Arc::new(value), gradient: None, fd_step: 1e-3 }
    }

    pub fn with_gradient(mut self, gradient: impl Fn(&Point) -> Vector + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, p: &Point) -> f64 {
        (self.value)(p)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn gradient(&self, p: &Point) -> Vector {
        match &self.gradient {
            Some(g) => g(p),
            None => self.gradient_fd(p),
        }
    }

    pub fn gradient_fd(&self, p: &Point) -> Vector {
        let f = |q: &Point| (self.value)(q);
        Vector::from_iterator(p.len(), (0..p.len()).map(|a| richardson_partial(&f, p, a, self.fd_step)))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const:{c}"), move |_| c).with_gradient(|p| Vector::zeros(p.len()))
    }

    /// The coordinate function p ↦ p[index].
    pub fn coordinate(index: usize) -> Self {
        Self::new(format!("coord:{index}"), move |p| p[index]).with_gradient(move |p| {
            let mut g = Vector::zeros(p.len());
            g[index] = 1.0;
            g
        })
    }

    /// p ↦ c·p.
    pub fn linear(coeffs: Vec<f64>) -> Self {
        let c2 = coeffs.clone();
        Self::new("linear", move |p| p.iter().zip(&coeffs).map(|(a, b)| a * b).sum())
            .with_gradient(move |_| Vector::from_vec(c2.clone()))
    }

    /// amp·exp(−|p|²).
    pub fn gaussian_bump(amp: f64) -> Self {
        Self::new(format!("bump:{amp}"), move |p| amp * (-p.norm_squared()).exp())
            .with_gradient(move |p| p * (-2.0 * amp * (-p.norm_squared()).exp()))
    }

    /// (|p|² − 1)/2.
    pub fn sphere() -> Self {
        Self::new("sphere", |p| 0.5 * (p.norm_squared() - 1.0)).with_gradient(|p| p.clone())
    }
}

#[derive(Clone)]
pub enum FormKind {
    /// dz + Σ x_i dy_i
    Darboux,
    /// dz + ½ Σ (x_i dy_i − y_i dx_i)
    Radial,
    /// dz; never contact, kept as a negative control.
    Vertical,
    Custom { label: String, beta: VectorFn, dbeta: Option<MatrixFn> },
    /// e^f · base
    Conformal { base: Box<ContactForm>, exponent: ScalarField },
    /// dη; closed, used as a deformation direction.
    Exact { potential: ScalarField },
    /// base + t·sigma
    Sum { base: Box<ContactForm>, sigma: Box<ContactForm>, t: f64 },
}

/// A 1-form β on R^{2n+1} in coordinates (z, x_1, y_1, …, x_n, y_n).
///
/// `dbeta(p)` is the matrix Ω with Ω_ab = ∂_a β_b − ∂_b β_a, so that
/// dβ(u, w) = uᵀ Ω w.
#[derive(Clone)]
pub struct ContactForm {
    n: usize,
    kind: FormKind,
    fd_step: f64,
}

impl fmt::Debug for ContactForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContactForm(n={}, {})", self.n, self.describe())
    }
}

impl ContactForm {
    fn from_kind(n: usize, kind: FormKind) -> Self {
        Self { n, kind, fd_step: 1e-3 }
    }

    pub fn darboux(n: usize) -> Self {
        Self::from_kind(n, FormKind::Darboux)
    }

    pub fn radial(n: usize) -> Self {
        Self::from_kind(n, FormKind::Radial)
    }

    pub fn vertical(n: usize) -> Self {
        Self::from_kind(n, FormKind::Vertical)
    }

    /// A form given by its coefficient functions. Without `dbeta`, dβ is taken
    /// by central differences with one Richardson step.
    pub fn custom(
        n: usize,
        label: impl Into<String>,
        beta: impl Fn(&Point) -> Vector + Send + Sync + 'static,
        dbeta: Option<MatrixFn>,
    ) -> Self {
        Self::from_kind(n, FormKind::Custom { label: label.into(), beta: Arc::new(beta), dbeta })
    }

    pub fn conformal(base: ContactForm, exponent: ScalarField) -> Self {
        let n = base.n;
        Self::from_kind(n, FormKind::Conformal { base: Box::new(base), exponent })
    }

    pub fn exact(n: usize, potential: ScalarField) -> Self {
        Self::from_kind(n, FormKind::Exact { potential })
    }

    /// base + t·sigma
    pub fn perturbed(base: ContactForm, sigma: ContactForm, t: f64) -> Self {
        let n = base.n;
        Self::from_kind(n, FormKind::Sum { base: Box::new(base), sigma: Box::new(sigma), t })
    }

    /// base + t·dη
    pub fn shifted(base: ContactForm, eta: ScalarField, t: f64) -> Self {
        let n = base.n;
        Self::perturbed(base, Self::exact(n, eta), t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn kind(&self) -> &FormKind {
        &self.kind
    }

    /// Builtin tag: "darboux", "radial", "vertical", or "custom".
    pub fn tag(&self) -> &'static str {
        match self.kind {
            FormKind::Darboux => "darboux",
            FormKind::Radial => "radial",
            FormKind::Vertical => "vertical",
            _ => "custom",
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            FormKind::Custom { label, .. } => format!("custom:{label}"),
            FormKind::Conformal { base, exponent } => format!("exp({})·{}", exponent.label(), base.describe()),
            FormKind::Exact { potential } => format!("d({})", potential.label()),
            FormKind::Sum { base, sigma, t } => format!("{} + {t}·{}", base.describe(), sigma.describe()),
            _ => self.tag().to_string(),
        }
    }

    /// True when the Reeb field is ∂_z and z itself satisfies dz(v) = 1.
    pub fn has_vertical_reeb(&self) -> bool {
        matches!(self.kind, FormKind::Darboux | FormKind::Radial)
    }

    /// True when every coefficient, including dβ, is closed-form.
    pub fn is_analytic(&self) -> bool {
        match &self.kind {
            FormKind::Darboux | FormKind::Radial | FormKind::Vertical => true,
            FormKind::Custom { dbeta, .. } => dbeta.is_some(),
            FormKind::Conformal { base, exponent } => base.is_analytic() && exponent.has_analytic_gradient(),
            FormKind::Exact { potential } => potential.has_analytic_gradient(),
            FormKind::Sum { base, sigma, .. } => base.is_analytic() && sigma.is_analytic(),
        }
    }

    pub fn beta(&self, p: &Point) -> Vector {
        let d = self.dim();
        match &self.kind {
            FormKind::Darboux => {
                let mut b = Vector::zeros(d);
                b[0] = 1.0;
                for i in 1..=self.n {
                    b[2 * i] = p[2 * i - 1];
                }
                b
            }
            FormKind::Radial => {
                let mut b = Vector::zeros(d);
                b[0] = 1.0;
                for i in 1..=self.n {
                    b[2 * i - 1] = -0.5 * p[2 * i];
                    b[2 * i] = 0.5 * p[2 * i - 1];
                }
                b
            }
            FormKind::Vertical => {
                let mut b = Vector::zeros(d);
                b[0] = 1.0;
                b
            }
            FormKind::Custom { beta, .. } => beta(p),
            FormKind::Conformal { base, exponent } => base.beta(p) * exponent.value(p).exp(),
            FormKind::Exact { potential } => potential.gradient(p),
            FormKind::Sum { base, sigma, t } => base.beta(p) + sigma.beta(p) * *t,
        }
    }

    pub fn dbeta(&self, p: &Point) -> DMatrix<f64> {
        let d = self.dim();
        match &self.kind {
            FormKind::Darboux | FormKind::Radial => {
                let mut m = DMatrix::zeros(d, d);
                for i in 1..=self.n {
                    m[(2 * i - 1, 2 * i)] = 1.0;
                    m[(2 * i, 2 * i - 1)] = -1.0;
                }
                m
            }
            FormKind::Vertical => DMatrix::zeros(d, d),
            FormKind::Custom { dbeta: Some(f), .. } => f(p),
            FormKind::Custom { dbeta: None, .. } => self.dbeta_fd(p),
            FormKind::Conformal { base, exponent } => {
                let g = exponent.gradient(p);
                let b = base.beta(p);
                let wedge = &g * b.transpose() - &b * g.transpose();
                (wedge + base.dbeta(p)) * exponent.value(p).exp()
            }
            FormKind::Exact { .. } => DMatrix::zeros(d, d),
            FormKind::Sum { base, sigma, t } => base.dbeta(p) + sigma.dbeta(p) * *t,
        }
    }

    /// dβ from central differences of the coefficients (one Richardson step).
    pub fn dbeta_fd(&self, p: &Point) -> DMatrix<f64> {
        let d = self.dim();
        let f = |q: &Point| self.beta(q);
        let mut jac = DMatrix::zeros(d, d);
        for a in 0..d {
            let col: Vector = richardson_partial(&f, p, a, self.fd_step);
            for b in 0..d {
                jac[(a, b)] = col[b];
            }
        }
        &jac - jac.transpose()
    }

    /// The Reeb field: the unique v with β(v) = 1 and dβ(v, ·) = 0.
    ///
    /// Solves (Ω + β βᵀ) v = β. The Reeb field solves this system, and the matrix
    /// is invertible exactly when β∧(dβ)^n ≠ 0 at p.
    pub fn reeb(&self, p: &Point) -> Result<Vector> {
        if self.has_vertical_reeb() {
            let mut v = Vector::zeros(self.dim());
            v[0] = 1.0;
            return Ok(v);
        }
        let b = self.beta(p);
        let omega = self.dbeta(p);
        solve_reeb(&b, &omega, p)
    }

    /// β∧(dβ)^n on the standard ordered basis.
    pub fn top_form(&self, p: &Point) -> f64 {
        let b = self.beta(p);
        let omega = self.dbeta(p);
        let basis: Vec<Vector> = (0..self.dim())
            .map(|i| {
                let mut e = Vector::zeros(self.dim());
                e[i] = 1.0;
                e
            })
            .collect();
        wedge::beta_omega_power(&b, &omega, &basis)
    }

    /// Evaluates β(u).
    pub fn apply(&self, p: &Point, u: &Vector) -> f64 {
        self.beta(p).dot(u)
    }
}

pub(crate) fn solve_reeb(b: &Vector, omega: &DMatrix<f64>, p: &Point) -> Result<Vector> {
    let m = omega + b * b.transpose();
    let lu = m.lu();
    let det = lu.determinant();
    if !det.is_finite() || det.abs() < SINGULAR_DET {
        return Err(Error::SingularForm { point: p.iter().copied().collect(), det });
    }
    lu.solve(b).ok_or_else(|| Error::SingularForm { point: p.iter().copied().collect(), det })
}
