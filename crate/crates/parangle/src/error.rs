//! Error type shared across the crate.

use crate::transport::CurvePath;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the chart domain of `{manifold}`")]
    OutOfChart { manifold: String, point: [f64; 3] },

    #[error("bad manifold parameters: {0}")]
    BadParams(String),

    #[error("metric determinant {det:e} below the singularity threshold")]
    SingularMetric { det: f64 },

    #[error("tangent plane is degenerate (Gram determinant {gram:e})")]
    DegeneratePlane { gram: f64 },

    #[error("zero vector where a direction is required")]
    ZeroVector,

    #[error("trajectory left the chart domain at s = {s}; partial path retained")]
    LeftChart { s: f64, partial: Box<CurvePath> },

    #[error("adaptive step size underflow at s = {s} (h = {h:e})")]
    StepFailure { s: f64, h: f64 },

    #[error("loop endpoint misses start by {gap:e} in chart coordinates")]
    NotClosed { gap: f64 },

    #[error("curvature below {threshold:e} on s in [{s_lo}, {s_hi}]; Frenet frame undefined")]
    KappaVanishes { s_lo: f64, s_hi: f64, threshold: f64 },

    #[error("torsion below {threshold:e} on s in [{s_lo}, {s_hi}]; binormal indicatrix undefined")]
    TauVanishes { s_lo: f64, s_hi: f64, threshold: f64 },

    #[error("path is not unit speed: |T|_g deviates by {deviation:e} at s = {s}")]
    NonUnitSpeed { s: f64, deviation: f64 },

    #[error("slant torsion law admits no domain around u0 (margin bounds u in ({u_lo}, {u_hi}))")]
    DomainExhausted { u_lo: f64, u_hi: f64 },

    #[error("ruling direction degenerate against the directrix at u = {u} (Gram determinant {gram:e})")]
    DegenerateRuling { u: f64, gram: f64 },

    #[error("patch is degenerate: {0}")]
    DegeneratePatch(String),

    #[error("fundamental forms have not been computed for this patch")]
    MissingForms,

    #[error("surface geodesic left the patch grid at t = {t} (u = {u}, v = {v})")]
    LeftPatch { t: f64, u: f64, v: f64 },

    #[error("configuration error: {0}")]
    ConfigError(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
