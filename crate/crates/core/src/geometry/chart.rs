use super::{Point, Vector};
use nalgebra::DMatrix;
use std::fmt;
use std::sync::Arc;

pub type ChartMap = Arc<dyn Fn(&[f64]) -> Point + Send + Sync>;
pub type ChartJacobian = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// A parametrized piece of a submanifold: u in a box ↦ point in R^{2n+1}.
///
/// Boundary charts have dimension 2n, stratum charts 2n + 1 − j, solid
/// charts 2n + 1. `orientation_sign` multiplies pulled-back densities so that
/// integrals use the orientation declared for the piece.
#[derive(Clone)]
pub struct Chart {
    pub label: String,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub periodic: Vec<bool>,
    pub orientation_sign: f64,
    map: ChartMap,
    jacobian: Option<ChartJacobian>,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("label", &self.label)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("orientation_sign", &self.orientation_sign)
            .finish()
    }
}

impl Chart {
    pub fn new(
        label: impl Into<String>,
        lo: Vec<f64>,
        hi: Vec<f64>,
        map: impl Fn(&[f64]) -> Point + Send + Sync + 'static,
    ) -> Self {
        assert_eq!(lo.len(), hi.len());
        let k = lo.len();
        Self {
            label: label.into(),
            lo,
            hi,
            periodic: vec![false; k],
            orientation_sign: 1.0,
            map: Arc::new(map),
            jacobian: None,
        }
    }

    pub fn with_periodic(mut self, periodic: Vec<bool>) -> Self {
        assert_eq!(periodic.len(), self.dim());
        self.periodic = periodic;
        self
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn with_orientation(mut self, sign: f64) -> Self {
        self.orientation_sign = sign.signum();
        self
    }

    pub fn reversed(&self) -> Self {
        let mut c = self.clone();
        c.orientation_sign = -c.orientation_sign;
        c
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn map(&self, u: &[f64]) -> Point {
        (self.map)(u)
    }

    /// Columns are ∂map/∂u_i.
    pub fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        if let Some(j) = &self.jacobian {
            return j(u);
        }
        let k = self.dim();
        let p0 = self.map(u);
        let mut jac = DMatrix::zeros(p0.len(), k);
        for i in 0..k {
            let h = 1e-4 * (self.hi[i] - self.lo[i]).abs().max(1e-12);
            let diff = |h: f64| {
                let mut up = u.to_vec();
                let mut um = u.to_vec();
                up[i] += h;
                um[i] -= h;
                (self.map(&up) - self.map(&um)) / (2.0 * h)
            };
            let col: Vector = diff(0.5 * h) * (4.0 / 3.0) - diff(h) * (1.0 / 3.0);
            jac.set_column(i, &col);
        }
        jac
    }

    pub fn tangents(&self, u: &[f64]) -> Vec<Vector> {
        let j = self.jacobian(u);
        (0..j.ncols()).map(|i| j.column(i).into_owned()).collect()
    }

    /// Composes the chart with an ambient map `f` whose Jacobian is `df`.
    pub fn push_forward(
        &self,
        label: impl Into<String>,
        f: Arc<dyn Fn(&Point) -> Point + Send + Sync>,
        df: Arc<dyn Fn(&Point) -> DMatrix<f64> + Send + Sync>,
    ) -> Chart {
        let base = self.clone();
        let base2 = self.clone();
        Chart {
            label: label.into(),
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            periodic: self.periodic.clone(),
            orientation_sign: self.orientation_sign,
            map: Arc::new(move |u| f(&base.map(u))),
            jacobian: Some(Arc::new(move |u| df(&base2.map(u)) * base2.jacobian(u))),
        }
    }

    /// Parameter-space grid of cell centers, `cells[i]` cells along axis i.
    pub fn cell_centers(&self, cells: &[usize]) -> Vec<Vec<f64>> {
        let k = self.dim();
        assert_eq!(cells.len(), k);
        let total: usize = cells.iter().product();
        let mut out = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut u = vec![0.0; k];
            for i in (0..k).rev() {
                let c = idx % cells[i];
                idx /= cells[i];
                u[i] = self.lo[i] + (self.hi[i] - self.lo[i]) * (c as f64 + 0.5) / cells[i] as f64;
            }
            out.push(u);
        }
        out
    }
}

/// Unit vector on S^m from hyperspherical angles (θ_1, …, θ_{m−1} ∈ [0, π], φ ∈ [0, 2π]).
///
/// ω_0 = cos θ_1, ω_1 = sin θ_1 cos θ_2, …, ω_m = sin θ_1 ⋯ sin θ_{m−1} sin φ.
pub fn sphere_point(angles: &[f64]) -> Vec<f64> {
    let m = angles.len();
    let mut out = Vec::with_capacity(m + 1);
    let mut prod = 1.0;
    for (i, &a) in angles.iter().enumerate() {
        if i + 1 < m {
            out.push(prod * a.cos());
            prod *= a.sin();
        } else {
            out.push(prod * a.cos());
            out.push(prod * a.sin());
        }
    }
    if m == 0 {
        out.push(1.0);
    }
    out
}

/// Analytic Jacobian of [`sphere_point`], columns indexed by angle.
pub fn sphere_jacobian(angles: &[f64]) -> DMatrix<f64> {
    let m = angles.len();
    let mut jac = DMatrix::zeros(m + 1, m);
    // ω_i = Π_{l<i} sin a_l · cos a_i (i < m), ω_m = Π_{l<m} sin a_l
    for j in 0..m {
        for i in j..=m {
            let mut v = 1.0;
            for (l, &a) in angles.iter().enumerate().take(i.min(m)) {
                v *= if l == j { a.cos() } else { a.sin() };
            }
            if i < m {
                v *= if i == j { -angles[i].sin() } else { angles[i].cos() };
            }
            jac[(i, j)] = v;
        }
    }
    jac
}

/// Box of hyperspherical angles for S^m: m − 1 polar angles and one azimuth.
pub fn sphere_box(m: usize) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let mut lo = vec![0.0; m];
    let mut hi = vec![std::f64::consts::PI; m];
    let mut periodic = vec![false; m];
    if m > 0 {
        hi[m - 1] = 2.0 * std::f64::consts::PI;
        periodic[m - 1] = true;
    }
    lo.truncate(m);
    (lo, hi, periodic)
}
