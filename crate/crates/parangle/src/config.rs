//! Flat key/value scenario configuration.
//!
//! Grammar: one `key = value` pair per line; keys use dotted sections
//! (`manifold.kind`, `object.theta`, `tol.lancret`); `#` starts a comment;
//! blank lines are ignored. Lists are comma-separated. Numbers accept the
//! symbolic fractions `pi/2`, `pi/3`, `pi/4`, `pi/6`, and `pi`.
//!
//! Recognized sections:
//!   manifold.kind       euclidean | sphere3 | hyperbolic3 | product | custom
//!   manifold.radius     radius of the curved kinds (default 1)
//!   manifold.factor     sphere2 | hyperbolic2 | euclidean2 (product only)
//!   manifold.custom     registry name (custom only)
//!   object.type         generalized_helix | slant_helix | cylinder |
//!                       rectifying | product_angle
//!   object.theta        constant angle
//!   object.kappa.profile  constant | sinusoidal | polynomial
//!   object.kappa.value / .base .amp .freq .phase / .coeffs
//!   object.c0, object.sign, object.length, object.phi0, object.radius
//!   grid.v_min, grid.v_max, grid.nv, grid.ds
//!   checks              comma-separated list of registry names
//!   output.dir, output.csv, output.obj, output.report
//!   tol.<check>         tolerance override
//!   seed                RNG seed for randomized checks
//!   integrator.rel_tol, integrator.abs_tol, integrator.max_step

use crate::error::{Error, Result};
use crate::helix::KappaProfile;
use crate::manifold::{custom_metric_registry, ManifoldDescriptor};
use crate::ode::IntegratorSettings;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::ConfigError(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::ConfigError(format!("line {}: empty key", lineno + 1)));
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::ConfigError(format!("missing key `{key}`")))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn f64_at(&self, key: &str) -> Result<f64> {
        parse_number(self.require(key)?)
            .ok_or_else(|| Error::ConfigError(format!("key `{key}` is not a number")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_number(v)
                .ok_or_else(|| Error::ConfigError(format!("key `{key}` is not a number"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::ConfigError(format!("key `{key}` is not an integer"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(Error::ConfigError(format!(
                "key `{key}` is not a boolean (got `{v}`)"
            ))),
        }
    }

    pub fn list(&self, key: &str) -> Vec<String> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            })
            .unwrap_or_default()
    }
}

pub fn parse_number(s: &str) -> Option<f64> {
    match s {
        "pi" => Some(PI),
        "pi/2" => Some(PI / 2.0),
        "pi/3" => Some(PI / 3.0),
        "pi/4" => Some(PI / 4.0),
        "pi/6" => Some(PI / 6.0),
        _ => s.parse().ok(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectType {
    GeneralizedHelix,
    SlantHelix,
    Cylinder,
    Rectifying,
    ProductAngle,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub raw: ConfigMap,
    pub manifold: ManifoldDescriptor,
    pub object: ObjectType,
    pub theta: f64,
    pub kappa: KappaProfile,
    pub c0: f64,
    pub sign: f64,
    /// arc length of the synthesized curve or directrix
    pub length: f64,
    pub phi0: f64,
    pub circle_radius: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub nv: usize,
    pub ds: f64,
    pub checks: Vec<String>,
    pub seed: u64,
    pub settings: IntegratorSettings,
}

impl ScenarioConfig {
    pub fn from_map(raw: ConfigMap) -> Result<Self> {
        let manifold = build_manifold(&raw)?;
        let object = match raw.require("object.type")? {
            "generalized_helix" => ObjectType::GeneralizedHelix,
            "slant_helix" => ObjectType::SlantHelix,
            "cylinder" => ObjectType::Cylinder,
            "rectifying" => ObjectType::Rectifying,
            "product_angle" => ObjectType::ProductAngle,
            other => {
                return Err(Error::ConfigError(format!(
                    "unknown object.type `{other}`"
                )))
            }
        };
        let theta = raw.f64_or("object.theta", PI / 4.0)?;
        let kappa = build_kappa(&raw)?;
        let c0 = raw.f64_or("object.c0", 0.0)?;
        let sign = raw.f64_or("object.sign", 1.0)?;
        let length = raw.f64_or("object.length", 10.0)?;
        let phi0 = raw.f64_or("object.phi0", 0.3)?;
        let circle_radius = raw.f64_or("object.radius", 1.0)?;
        let v_min = raw.f64_or("grid.v_min", -0.3)?;
        let v_max = raw.f64_or("grid.v_max", 0.3)?;
        let nv = raw.usize_or("grid.nv", 31)?;
        if nv < 8 {
            return Err(Error::ConfigError(format!(
                "grid.nv must be at least 8, got {nv}"
            )));
        }
        if v_max <= v_min {
            return Err(Error::ConfigError("grid.v_max must exceed grid.v_min".into()));
        }
        let ds = raw.f64_or("grid.ds", 0.01)?;
        let checks = raw.list("checks");
        let seed = raw.usize_or("seed", 42)? as u64;
        let settings = IntegratorSettings {
            rel_tol: raw.f64_or("integrator.rel_tol", 1e-9)?,
            abs_tol: raw.f64_or("integrator.abs_tol", 1e-11)?,
            max_step: raw.f64_or("integrator.max_step", 0.1)?,
        };
        settings.validate().map_err(|e| Error::ConfigError(e.to_string()))?;
        Ok(Self {
            raw,
            manifold,
            object,
            theta,
            kappa,
            c0,
            sign,
            length,
            phi0,
            circle_radius,
            v_min,
            v_max,
            nv,
            ds,
            checks,
            seed,
            settings,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_map(ConfigMap::load(path)?)
    }

    /// Tolerance override for a named check.
    pub fn tol_override(&self, check: &str) -> Result<Option<f64>> {
        match self.raw.get(&format!("tol.{check}")) {
            None => Ok(None),
            Some(v) => parse_number(v)
                .map(Some)
                .ok_or_else(|| Error::ConfigError(format!("tol.{check} is not a number"))),
        }
    }
}

fn build_manifold(raw: &ConfigMap) -> Result<ManifoldDescriptor> {
    let kind = raw.require("manifold.kind")?;
    let radius = raw.f64_or("manifold.radius", 1.0)?;
    match kind {
        "euclidean" | "euclidean3" => Ok(ManifoldDescriptor::euclidean3()),
        "sphere3" => ManifoldDescriptor::sphere3(radius),
        "hyperbolic3" => ManifoldDescriptor::hyperbolic3(radius),
        "product" => {
            let factor = match raw.require("manifold.factor")? {
                "sphere2" => ManifoldDescriptor::sphere2(radius)?,
                "hyperbolic2" => ManifoldDescriptor::hyperbolic2(radius)?,
                "euclidean2" => ManifoldDescriptor::euclidean2(),
                other => {
                    return Err(Error::ConfigError(format!(
                        "unknown manifold.factor `{other}`"
                    )))
                }
            };
            ManifoldDescriptor::product(factor)
        }
        "custom" => {
            let name = raw.require("manifold.custom")?;
            Ok(ManifoldDescriptor::custom(custom_metric_registry(name)?))
        }
        other => Err(Error::ConfigError(format!(
            "unknown manifold.kind `{other}` (expected euclidean, sphere3, hyperbolic3, product, custom)"
        ))),
    }
}

fn build_kappa(raw: &ConfigMap) -> Result<KappaProfile> {
    match raw.get("object.kappa.profile").unwrap_or("constant") {
        "constant" => Ok(KappaProfile::Constant(raw.f64_or("object.kappa.value", 1.0)?)),
        "sinusoidal" => Ok(KappaProfile::Sinusoidal {
            base: raw.f64_or("object.kappa.base", 1.0)?,
            amp: raw.f64_or("object.kappa.amp", 0.3)?,
            freq: raw.f64_or("object.kappa.freq", 1.0)?,
            phase: raw.f64_or("object.kappa.phase", 0.0)?,
        }),
        "polynomial" => {
            let coeffs: Vec<f64> = raw
                .list("object.kappa.coeffs")
                .iter()
                .map(|s| {
                    parse_number(s).ok_or_else(|| {
                        Error::ConfigError("object.kappa.coeffs entries must be numbers".into())
                    })
                })
                .collect::<Result<_>>()?;
            if coeffs.is_empty() {
                return Err(Error::ConfigError(
                    "object.kappa.coeffs must be a nonempty list".into(),
                ));
            }
            Ok(KappaProfile::Polynomial(coeffs))
        }
        other => Err(Error::ConfigError(format!(
            "unknown object.kappa.profile `{other}`"
        ))),
    }
}
