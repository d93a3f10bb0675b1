//! A domain paired with a contact form, plus numerical tolerances for its Reeb flow.

use crate::error::{Error, Result};
use crate::geometry::{ContactForm, Domain, Point, Vector};
use serde::{Deserialize, Serialize};

/// Tolerances for integration and tangency decisions. Lengths are relative
/// to the domain scale.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct FlowConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Largest integration step, as a fraction of the scale.
    pub max_step: f64,
    /// Bail-out time, as a multiple of the scale.
    pub max_time: f64,
    /// Thresholds τ_k for |g_k|, k = 1, 2, …
    pub tau: Vec<f64>,
    /// Accepted |h| at a refined boundary hit.
    pub eps_hit: f64,
    /// A local maximum of h within this of 0 counts as a touch.
    pub eps_touch: f64,
    /// Base step for the Lie tower differences.
    pub lie_step: f64,
    /// Dense-output probes per accepted step for event scanning.
    pub probes: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            max_step: 0.05,
            max_time: 100.0,
            tau: vec![1e-7, 1e-7, 1e-6, 1e-4, 1e-3],
            eps_hit: 1e-10,
            eps_touch: 1e-9,
            lie_step: 1e-4,
            probes: 8,
        }
    }
}

/// X ⊂ R^{2n+1} with contact form β and its Reeb field v_β.
#[derive(Clone, Debug)]
pub struct ContactScene {
    pub domain: Domain,
    pub form: ContactForm,
    pub config: FlowConfig,
    scale: f64,
}

impl ContactScene {
    pub fn new(domain: Domain, form: ContactForm) -> Result<Self> {
        if domain.n() != form.n() {
            return Err(Error::Invalid(format!("domain n = {} but form n = {}", domain.n(), form.n())));
        }
        if !(domain.n() == 1 || domain.n() == 2) {
            return Err(Error::Invalid("only n = 1 and n = 2 are supported".into()));
        }
        let scale = domain.scale();
        Ok(Self { domain, form, config: FlowConfig::default(), scale })
    }

    pub fn with_config(mut self, config: FlowConfig) -> Self {
        self.config = config;
        self
    }

    /// Same domain and tolerances, different form.
    pub fn with_form(&self, form: ContactForm) -> Result<Self> {
        Ok(Self::new(self.domain.clone(), form)?.with_config(self.config.clone()))
    }

    pub fn n(&self) -> usize {
        self.domain.n()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn h(&self, p: &Point) -> f64 {
        self.domain.h(p)
    }

    pub fn grad_h(&self, p: &Point) -> Vector {
        self.domain.grad_h(p)
    }

    pub fn reeb(&self, p: &Point) -> Result<Vector> {
        self.form.reeb(p)
    }

    /// g_1 = dh(v_β).
    pub fn g1(&self, p: &Point) -> Result<f64> {
        Ok(self.grad_h(p).dot(&self.reeb(p)?))
    }

    /// Absolute threshold τ_k.
    pub fn tau(&self, k: usize) -> f64 {
        let t = &self.config.tau;
        let rel = if k == 0 { self.config.eps_hit } else { t[(k - 1).min(t.len() - 1)] };
        rel * self.scale
    }

    pub fn eps_hit(&self) -> f64 {
        self.config.eps_hit * self.scale
    }

    /// [h, L_v h, …, L_v^depth h] at p.
    pub fn lie_tower(&self, p: &Point, depth: usize) -> Result<Vec<f64>> {
        let field = |q: &Point| self.reeb(q);
        lie_tower(&self.domain, &field, p, depth, self.config.lie_step * self.scale)
    }

    /// Smallest k ≥ 1 with |g_k| > τ_k, or None when every level is below threshold.
    pub fn multiplicity(&self, tower: &[f64]) -> Option<usize> {
        (1..tower.len()).find(|&k| tower[k].abs() > self.tau(k))
    }

    pub fn max_depth(&self) -> usize {
        2 * self.n() + 1
    }
}

/// Iterated Lie derivatives [g_0, …, g_depth] of h along `field`.
///
/// g_1 uses the analytic gradient of h. Higher levels take central differences
/// of the previous level along the straight line p + s·v(p), extrapolated once.
/// The step grows tenfold per level so that roundoff from the level below stays
/// under control.
pub fn lie_tower(
    domain: &Domain,
    field: &dyn Fn(&Point) -> Result<Vector>,
    p: &Point,
    depth: usize,
    base_step: f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        out.push(tower_level(domain, field, p, k, base_step)?);
    }
    Ok(out)
}

fn tower_level(
    domain: &Domain,
    field: &dyn Fn(&Point) -> Result<Vector>,
    p: &Point,
    k: usize,
    base_step: f64,
) -> Result<f64> {
    match k {
        0 => Ok(domain.h(p)),
        1 => Ok(domain.grad_h(p).dot(&field(p)?)),
        _ => {
            let v = field(p)?;
            let step = (base_step * 10f64.powi(k as i32 - 2)).min(0.05 * domain.scale());
            let diff = |s: f64| -> Result<f64> {
                let plus = p + &v * s;
                let minus = p - &v * s;
                Ok((tower_level(domain, field, &plus, k - 1, base_step)?
                    - tower_level(domain, field, &minus, k - 1, base_step)?)
                    / (2.0 * s))
            };
            let coarse = diff(step)?;
            let fine = diff(0.5 * step)?;
            Ok((4.0 * fine - coarse) / 3.0)
        }
    }
}
