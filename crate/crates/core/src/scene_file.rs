//! JSON scene documents, e.g.
//! `{"n":1, "domain":{"kind":"ellipsoid","axes":[2,2,2]}, "form":{"kind":"darboux"}, "charts":"auto"}`.

use crate::error::{Error, Result};
use crate::geometry::{contact_check, ContactForm, Domain, ScalarField};
use crate::quadrature::QuadratureSpec;
use crate::scene::{ContactScene, FlowConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Interior samples for the load-time contact check.
const CHECK_SAMPLES: usize = 2000;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    /// Full axis lengths (x_1, y_1, …, z).
    Ellipsoid {
        axes: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    Ball { radius: f64 },
    Shell { r_in: f64, r_out: f64 },
    SandClock { half_height: f64, neck: f64, bulge: f64 },
}

impl DomainSpec {
    pub fn build(&self, n: usize) -> Result<Domain> {
        match self {
            DomainSpec::Ellipsoid { axes, center } => {
                let d = Domain::ellipsoid(n, axes)?;
                match center {
                    Some(c) => d.with_center(c),
                    None => Ok(d),
                }
            }
            DomainSpec::Ball { radius } => Domain::ball(n, *radius),
            DomainSpec::Shell { r_in, r_out } => Domain::shell(n, *r_in, *r_out),
            DomainSpec::SandClock { half_height, neck, bulge } => Domain::sand_clock(n, *half_height, *neck, *bulge),
        }
    }
}

/// Scalar fields are written as strings, see [`parse_field`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FormSpec {
    Darboux,
    Radial,
    Vertical,
    /// e^f·base
    Conformal { base: Box<FormSpec>, exponent: String },
    /// base + t·dη
    Shifted { base: Box<FormSpec>, eta: String, t: f64 },
}

impl FormSpec {
    pub fn build(&self, n: usize) -> Result<ContactForm> {
        Ok(match self {
            FormSpec::Darboux => ContactForm::darboux(n),
            FormSpec::Radial => ContactForm::radial(n),
            FormSpec::Vertical => ContactForm::vertical(n),
            FormSpec::Conformal { base, exponent } => ContactForm::conformal(base.build(n)?, parse_field(exponent, n)?),
            FormSpec::Shifted { base, eta, t } => ContactForm::shifted(base.build(n)?, parse_field(eta, n)?, *t),
        })
    }
}

/// "builtin:sphere", "builtin:z", "coordinate:i", "linear:a0,a1,…",
/// "constant:c" or "bump:amplitude"; the "builtin:" prefix is optional.
pub fn parse_field(spec: &str, n: usize) -> Result<ScalarField> {
    let s = spec.trim();
    let s = s.strip_prefix("builtin:").unwrap_or(s);
    let (name, args) = s.split_once(':').unwrap_or((s, ""));
    let nums = || -> Result<Vec<f64>> {
        args.split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| Error::Invalid(format!("bad number in field '{spec}'"))))
            .collect()
    };
    let one = || -> Result<f64> {
        match nums()?.as_slice() {
            [v] => Ok(*v),
            _ => Err(Error::Invalid(format!("field '{spec}' takes one value"))),
        }
    };
    let d = 2 * n + 1;
    match name {
        "sphere" => Ok(ScalarField::sphere()),
        "z" => Ok(ScalarField::coordinate(0)),
        "coordinate" => {
            let i = one()?;
            if i < 0.0 || i.fract() != 0.0 || i as usize >= d {
                return Err(Error::Invalid(format!("coordinate index must be in 0..{d}")));
            }
            Ok(ScalarField::coordinate(i as usize))
        }
        "linear" => {
            let c = nums()?;
            if c.len() != d {
                return Err(Error::Invalid(format!("linear field needs {d} coefficients")));
            }
            Ok(ScalarField::linear(c))
        }
        "constant" => Ok(ScalarField::constant(one()?)),
        "bump" => Ok(ScalarField::gaussian_bump(one()?)),
        _ => Err(Error::Invalid(format!("unknown scalar field '{spec}'"))),
    }
}

fn auto() -> String {
    "auto".into()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub n: usize,
    pub domain: DomainSpec,
    pub form: FormSpec,
    /// Only "auto" (spherical-coordinate charts of the builtin domains).
    #[serde(default = "auto")]
    pub charts: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SceneFile {
    pub fn new(n: usize, domain: DomainSpec, form: FormSpec) -> Self {
        Self { n, domain, form, charts: auto(), quadrature: None, flow: None, seed: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read scene {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Builds the scene; unless `skip_check`, the contact condition is
    /// sampled on the interior and a violation is an error.
    pub fn build(&self, skip_check: bool) -> Result<ContactScene> {
        if !(1..=2).contains(&self.n) {
            return Err(Error::Invalid(format!("n must be 1 or 2, got {}", self.n)));
        }
        if self.charts != "auto" {
            return Err(Error::Invalid(format!("unsupported chart spec '{}'", self.charts)));
        }
        let domain = self.domain.build(self.n)?;
        let form = self.form.build(self.n)?;
        if !skip_check {
            let c = contact_check(&form, &domain, CHECK_SAMPLES, self.seed.unwrap_or(1))?;
            if !c.accepted {
                return Err(Error::SingularForm { point: c.argmin, det: c.min_value });
            }
        }
        let scene = ContactScene::new(domain, form)?;
        Ok(match &self.flow {
            Some(cfg) => scene.with_config(cfg.clone()),
            None => scene,
        })
    }
}
