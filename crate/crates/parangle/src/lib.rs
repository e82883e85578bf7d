//! parangle: a numerical laboratory for curves and surfaces that keep a
//! constant angle with a parallel-transported direction inside a Riemannian
//! 3-manifold.
//!
//! The crate integrates geodesics and Frenet systems on a family of ambient
//! manifolds (flat space, round spheres, hyperbolic spaces, products M^2 x R,
//! black-box metrics), synthesizes generalized and slant helices with their
//! transported axes, builds ruled patches (intrinsic cylinders, rectifying
//! surfaces, constant-angle surfaces over a 2-manifold factor), and measures
//! every quantity involved in the constant-angle story: curvature and torsion
//! profiles, the slant invariant sigma, fundamental forms, intrinsic and
//! extrinsic curvature, transport defects, and curvature-operator
//! obstructions. Each construction ships with tolerance-checked
//! verifications; the `checks` module exposes them as a named registry.

pub mod checks;
pub mod config;
pub mod error;
pub mod export;
pub mod fd;
pub mod frenet;
pub mod helix;
pub mod interp;
pub mod linalg;
pub mod manifold;
pub mod ode;
pub mod surface;
pub mod transport;

pub use error::{Error, Result};
pub use frenet::{FrenetData, IndicatrixCurve, IndicatrixKind};
pub use helix::{AxisField, AxisKind, Classification, HelixSpec, KappaProfile};
pub use manifold::{
    ChartDomain, ConnectionCoefficients, CurvatureTensor, CustomMetric, ManifoldDescriptor,
    MetricKind, MetricMatrix,
};
pub use ode::IntegratorSettings;
pub use surface::{PatchKind, RuledPatch, SurfaceAxisField};
pub use transport::{CurvePath, PathSample};
