//! Ambient Riemannian manifolds through fixed coordinate charts.
//!
//! Supported charts: Cartesian for flat space, geographic (phi, psi) for the
//! round 2-sphere, hyperspherical (chi, theta, phi) for the 3-sphere with
//! polar margins, the Poincare ball (restricted to |x| <= 0.95 r) for
//! hyperbolic space, and block charts (factor coordinates, t) for products
//! M^2 x R. Operations fail loudly at chart boundaries; there is no chart
//! switching.
//!
//! Curvature convention: the operator is R(X, Y)Z = nabla_Y nabla_X Z -
//! nabla_X nabla_Y Z + nabla_{[X,Y]} Z, and the mixed components are stored
//! as R^l_{kij} with R(d_i, d_j) d_k = R^l_{kij} d_l. Sectional curvature is
//! <R(X,Y)X, Y> over the Gram determinant, which makes the round sphere of
//! radius r come out at +1/r^2.

use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::{self, Mat3, Vec3};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

/// Determinant threshold below which the metric is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;
/// Polar-angle margin for the geographic and hyperspherical charts.
pub const CHART_MARGIN: f64 = 1e-3;
/// Fraction of the Poincare ball radius kept inside the chart.
pub const BALL_FRACTION: f64 = 0.95;

/// Chart domain: a coordinate box, optionally intersected with a ball on the
/// leading `ball_dims` coordinates, plus per-coordinate periods used only for
/// loop-closure tests.
#[derive(Debug, Clone)]
pub struct ChartDomain {
    pub lo: Vec3,
    pub hi: Vec3,
    pub ball: Option<(f64, usize)>,
    pub periodic: [Option<f64>; 3],
}

impl ChartDomain {
    fn unbounded() -> Self {
        Self {
            lo: [f64::NEG_INFINITY; 3],
            hi: [f64::INFINITY; 3],
            ball: None,
            periodic: [None; 3],
        }
    }

    pub fn contains(&self, p: Vec3, dim: usize) -> bool {
        for i in 0..dim {
            if !(p[i] > self.lo[i] && p[i] < self.hi[i]) && self.periodic[i].is_none() {
                return false;
            }
        }
        if let Some((r, nd)) = self.ball {
            let rho2: f64 = p[..nd].iter().map(|x| x * x).sum();
            if rho2 >= r * r {
                return false;
            }
        }
        true
    }

    /// Chart distance between two points, reducing periodic coordinates to
    /// their smallest representative.
    pub fn chart_distance(&self, a: Vec3, b: Vec3, dim: usize) -> f64 {
        let mut acc = 0.0;
        for i in 0..dim {
            let mut d = a[i] - b[i];
            if let Some(period) = self.periodic[i] {
                d = d.rem_euclid(period);
                if d > 0.5 * period {
                    d -= period;
                }
            }
            acc += d * d;
        }
        acc.sqrt()
    }
}

/// A named metric field for the custom-manifold route.
#[derive(Clone)]
pub struct CustomMetric {
    pub name: String,
    pub dim: usize,
    pub field: Arc<dyn Fn(Vec3) -> Mat3 + Send + Sync>,
    pub domain: ChartDomain,
}

impl fmt::Debug for CustomMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomMetric({}, dim {})", self.name, self.dim)
    }
}

#[derive(Debug, Clone)]
pub enum MetricKind {
    /// Flat space in Cartesian coordinates, dimension 2 or 3.
    Euclidean { dim: usize },
    /// Round 2-sphere, geographic chart (phi, psi), phi the latitude.
    Sphere2 { radius: f64 },
    /// Round 3-sphere, hyperspherical chart (chi, theta, phi).
    Sphere3 { radius: f64 },
    /// Hyperbolic plane, Poincare disk chart.
    Hyperbolic2 { radius: f64 },
    /// Hyperbolic 3-space, Poincare ball chart.
    Hyperbolic3 { radius: f64 },
    /// Product M^2 x R in coordinates (factor chart, t).
    Product { factor: Box<ManifoldDescriptor> },
    /// Black-box metric field; derivatives by finite differences.
    Custom(CustomMetric),
}

#[derive(Debug, Clone)]
pub struct ManifoldDescriptor {
    pub name: String,
    pub kind: MetricKind,
    domain: ChartDomain,
    dim: usize,
}

/// Symmetric positive-definite metric matrix at a point. For 2-manifolds the
/// third diagonal slot is padded with 1 so determinants and inverses remain
/// well defined on the shared 3-slot storage.
#[derive(Debug, Clone, Copy)]
pub struct MetricMatrix {
    pub g: Mat3,
    pub dim: usize,
}

/// Christoffel symbols Gamma^k_{ij}, symmetric in (i, j).
#[derive(Debug, Clone, Copy)]
pub struct ConnectionCoefficients {
    pub gamma: [[[f64; 3]; 3]; 3],
    pub dim: usize,
}

impl ConnectionCoefficients {
    /// Contraction Gamma^k_{ij} a^i b^j over all k.
    pub fn contract(&self, a: Vec3, b: Vec3) -> Vec3 {
        let mut out = [0.0; 3];
        for k in 0..self.dim {
            let mut acc = 0.0;
            for i in 0..self.dim {
                for j in 0..self.dim {
                    acc += self.gamma[k][i][j] * a[i] * b[j];
                }
            }
            out[k] = acc;
        }
        out
    }
}

/// Mixed curvature components R^l_{kij} in the operator convention of the
/// module header.
#[derive(Debug, Clone)]
pub struct CurvatureTensor {
    pub r: [[[[f64; 3]; 3]; 3]; 3],
    pub dim: usize,
}

impl CurvatureTensor {
    /// Apply the operator: (R(X, Y) Z)^l.
    pub fn apply(&self, x: Vec3, y: Vec3, z: Vec3) -> Vec3 {
        let mut out = [0.0; 3];
        for l in 0..self.dim {
            let mut acc = 0.0;
            for k in 0..self.dim {
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        acc += self.r[l][k][i][j] * x[i] * y[j] * z[k];
                    }
                }
            }
            out[l] = acc;
        }
        out
    }

    /// Fully covariant component <R(X, Y) Z, W>_g.
    pub fn component(&self, g: &Mat3, x: Vec3, y: Vec3, z: Vec3, w: Vec3) -> f64 {
        linalg::inner_g(g, self.apply(x, y, z), w)
    }
}

type Gamma = [[[f64; 3]; 3]; 3];
/// dgamma[m][k][i][j] = d_m Gamma^k_{ij}
type DGamma = [[[[f64; 3]; 3]; 3]; 3];

impl ManifoldDescriptor {
    pub fn euclidean3() -> Self {
        Self {
            name: "euclidean3".into(),
            kind: MetricKind::Euclidean { dim: 3 },
            domain: ChartDomain::unbounded(),
            dim: 3,
        }
    }

    pub fn euclidean2() -> Self {
        Self {
            name: "euclidean2".into(),
            kind: MetricKind::Euclidean { dim: 2 },
            domain: ChartDomain::unbounded(),
            dim: 2,
        }
    }

    pub fn sphere2(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        let mut domain = ChartDomain::unbounded();
        domain.lo[0] = -FRAC_PI_2 + CHART_MARGIN;
        domain.hi[0] = FRAC_PI_2 - CHART_MARGIN;
        domain.periodic[1] = Some(2.0 * PI);
        Ok(Self {
            name: format!("sphere2(r={radius})"),
            kind: MetricKind::Sphere2 { radius },
            domain,
            dim: 2,
        })
    }

    pub fn sphere3(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        let mut domain = ChartDomain::unbounded();
        domain.lo[0] = CHART_MARGIN;
        domain.hi[0] = PI - CHART_MARGIN;
        domain.lo[1] = CHART_MARGIN;
        domain.hi[1] = PI - CHART_MARGIN;
        domain.periodic[2] = Some(2.0 * PI);
        Ok(Self {
            name: format!("sphere3(r={radius})"),
            kind: MetricKind::Sphere3 { radius },
            domain,
            dim: 3,
        })
    }

    pub fn hyperbolic2(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        let mut domain = ChartDomain::unbounded();
        domain.ball = Some((BALL_FRACTION * radius, 2));
        Ok(Self {
            name: format!("hyperbolic2(r={radius})"),
            kind: MetricKind::Hyperbolic2 { radius },
            domain,
            dim: 2,
        })
    }

    pub fn hyperbolic3(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        let mut domain = ChartDomain::unbounded();
        domain.ball = Some((BALL_FRACTION * radius, 3));
        Ok(Self {
            name: format!("hyperbolic3(r={radius})"),
            kind: MetricKind::Hyperbolic3 { radius },
            domain,
            dim: 3,
        })
    }

    /// Product M^2 x R; the factor must be a 2-manifold.
    pub fn product(factor: ManifoldDescriptor) -> Result<Self> {
        if factor.dim != 2 {
            return Err(Error::BadParams(format!(
                "product factor must be 2-dimensional, got dim {}",
                factor.dim
            )));
        }
        let mut domain = factor.domain.clone();
        domain.lo[2] = f64::NEG_INFINITY;
        domain.hi[2] = f64::INFINITY;
        domain.periodic[2] = None;
        Ok(Self {
            name: format!("{} x R", factor.name),
            kind: MetricKind::Product {
                factor: Box::new(factor),
            },
            domain,
            dim: 3,
        })
    }

    pub fn custom(metric: CustomMetric) -> Self {
        let dim = metric.dim;
        let domain = metric.domain.clone();
        Self {
            name: format!("custom({})", metric.name),
            kind: MetricKind::Custom(metric),
            domain,
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn chart_domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn contains(&self, p: Vec3) -> bool {
        self.domain.contains(p, self.dim)
    }

    fn require_in_domain(&self, p: Vec3) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfChart {
                manifold: self.name.clone(),
                point: p,
            })
        }
    }

    /// A representative interior point, used as the default base point for
    /// constructions driven by configuration files.
    pub fn canonical_base_point(&self) -> Vec3 {
        match &self.kind {
            MetricKind::Euclidean { .. } => [0.0; 3],
            MetricKind::Sphere2 { .. } => [0.0, 0.0, 0.0],
            MetricKind::Sphere3 { .. } => [FRAC_PI_2, FRAC_PI_2, 0.0],
            MetricKind::Hyperbolic2 { .. } | MetricKind::Hyperbolic3 { .. } => [0.0; 3],
            MetricKind::Product { factor } => factor.canonical_base_point(),
            MetricKind::Custom { .. } => [0.0; 3],
        }
    }

    fn metric_raw(&self, p: Vec3) -> Mat3 {
        match &self.kind {
            MetricKind::Euclidean { .. } => linalg::identity(),
            MetricKind::Sphere2 { radius } => {
                let r2 = radius * radius;
                let c = p[0].cos();
                [[r2, 0.0, 0.0], [0.0, r2 * c * c, 0.0], [0.0, 0.0, 1.0]]
            }
            MetricKind::Sphere3 { radius } => {
                let r2 = radius * radius;
                let s_chi = p[0].sin();
                let s_th = p[1].sin();
                [
                    [r2, 0.0, 0.0],
                    [0.0, r2 * s_chi * s_chi, 0.0],
                    [0.0, 0.0, r2 * s_chi * s_chi * s_th * s_th],
                ]
            }
            MetricKind::Hyperbolic2 { radius } | MetricKind::Hyperbolic3 { radius } => {
                let nd = self.dim;
                let rho2: f64 = p[..nd].iter().map(|x| x * x).sum();
                let lam = 2.0 * radius * radius / (radius * radius - rho2);
                let l2 = lam * lam;
                let mut g = linalg::identity();
                for (i, row) in g.iter_mut().enumerate().take(nd) {
                    row[i] = l2;
                }
                g
            }
            MetricKind::Product { factor } => {
                let mut g = factor.metric_raw(p);
                g[2][2] = 1.0;
                g
            }
            MetricKind::Custom(c) => {
                let mut g = (c.field)(p);
                if c.dim == 2 {
                    g[2][2] = 1.0;
                    g[0][2] = 0.0;
                    g[2][0] = 0.0;
                    g[1][2] = 0.0;
                    g[2][1] = 0.0;
                }
                g
            }
        }
    }

    /// Metric matrix at an in-domain chart point.
    pub fn metric_at(&self, p: Vec3) -> Result<MetricMatrix> {
        self.require_in_domain(p)?;
        Ok(MetricMatrix {
            g: self.metric_raw(p),
            dim: self.dim,
        })
    }

    /// Metric together with inverse and determinant, singularity-checked.
    pub fn metric_data(&self, p: Vec3) -> Result<MetricData> {
        self.require_in_domain(p)?;
        let g = self.metric_raw(p);
        let det = linalg::det3(&g);
        if det < SINGULAR_DET {
            return Err(Error::SingularMetric { det });
        }
        Ok(MetricData {
            g,
            inv: linalg::inv3(&g, det),
            det,
        })
    }

    fn gamma_closed(&self, p: Vec3) -> Option<Gamma> {
        let mut gm: Gamma = [[[0.0; 3]; 3]; 3];
        match &self.kind {
            MetricKind::Euclidean { .. } => Some(gm),
            MetricKind::Sphere2 { .. } => {
                let phi = p[0];
                gm[0][1][1] = phi.sin() * phi.cos();
                let t = -phi.tan();
                gm[1][0][1] = t;
                gm[1][1][0] = t;
                Some(gm)
            }
            MetricKind::Sphere3 { .. } => {
                let (chi, th) = (p[0], p[1]);
                let (s_chi, c_chi) = chi.sin_cos();
                let (s_th, c_th) = th.sin_cos();
                let cot_chi = c_chi / s_chi;
                let cot_th = c_th / s_th;
                gm[0][1][1] = -s_chi * c_chi;
                gm[0][2][2] = -s_chi * c_chi * s_th * s_th;
                gm[1][0][1] = cot_chi;
                gm[1][1][0] = cot_chi;
                gm[1][2][2] = -s_th * c_th;
                gm[2][0][2] = cot_chi;
                gm[2][2][0] = cot_chi;
                gm[2][1][2] = cot_th;
                gm[2][2][1] = cot_th;
                Some(gm)
            }
            MetricKind::Hyperbolic2 { radius } | MetricKind::Hyperbolic3 { radius } => {
                let nd = self.dim;
                let rho2: f64 = p[..nd].iter().map(|x| x * x).sum();
                let denom = radius * radius - rho2;
                // u_i = d_i log(conformal factor)
                let u: Vec<f64> = (0..nd).map(|i| 2.0 * p[i] / denom).collect();
                for k in 0..nd {
                    for i in 0..nd {
                        for j in 0..nd {
                            let mut v = 0.0;
                            if i == k {
                                v += u[j];
                            }
                            if j == k {
                                v += u[i];
                            }
                            if i == j {
                                v -= u[k];
                            }
                            gm[k][i][j] = v;
                        }
                    }
                }
                Some(gm)
            }
            MetricKind::Product { factor } => factor.gamma_closed(p),
            MetricKind::Custom(_) => None,
        }
    }

    fn dgamma_closed(&self, p: Vec3) -> Option<DGamma> {
        let mut dg: DGamma = [[[[0.0; 3]; 3]; 3]; 3];
        match &self.kind {
            MetricKind::Euclidean { .. } => Some(dg),
            MetricKind::Sphere2 { .. } => {
                let phi = p[0];
                let c2 = (2.0 * phi).cos();
                let sec2 = 1.0 / (phi.cos() * phi.cos());
                dg[0][0][1][1] = c2;
                dg[0][1][0][1] = -sec2;
                dg[0][1][1][0] = -sec2;
                Some(dg)
            }
            MetricKind::Sphere3 { .. } => {
                let (chi, th) = (p[0], p[1]);
                let c2chi = (2.0 * chi).cos();
                let s2chi = (2.0 * chi).sin();
                let (s_th, c_th) = th.sin_cos();
                let c2th = (2.0 * th).cos();
                let s2th = (2.0 * th).sin();
                let csc2_chi = 1.0 / (chi.sin() * chi.sin());
                let csc2_th = 1.0 / (s_th * s_th);
                // d_chi Gamma^chi_{theta theta}
                dg[0][0][1][1] = -c2chi;
                // Gamma^chi_{phi phi} = -sin(chi)cos(chi) sin^2(theta)
                dg[0][0][2][2] = -c2chi * s_th * s_th;
                dg[1][0][2][2] = -0.5 * s2chi * s2th;
                // Gamma^theta_{chi theta} = cot(chi)
                dg[0][1][0][1] = -csc2_chi;
                dg[0][1][1][0] = -csc2_chi;
                // Gamma^theta_{phi phi} = -sin(theta)cos(theta)
                dg[1][1][2][2] = -c2th;
                // Gamma^phi_{chi phi} = cot(chi)
                dg[0][2][0][2] = -csc2_chi;
                dg[0][2][2][0] = -csc2_chi;
                // Gamma^phi_{theta phi} = cot(theta)
                dg[1][2][1][2] = -csc2_th;
                dg[1][2][2][1] = -csc2_th;
                let _ = c_th;
                Some(dg)
            }
            MetricKind::Hyperbolic2 { radius } | MetricKind::Hyperbolic3 { radius } => {
                let nd = self.dim;
                let rho2: f64 = p[..nd].iter().map(|x| x * x).sum();
                let denom = radius * radius - rho2;
                // du[m][i] = d_m u_i
                let mut du = [[0.0f64; 3]; 3];
                for m in 0..nd {
                    for i in 0..nd {
                        du[m][i] = 4.0 * p[i] * p[m] / (denom * denom)
                            + if i == m { 2.0 / denom } else { 0.0 };
                    }
                }
                for m in 0..nd {
                    for k in 0..nd {
                        for i in 0..nd {
                            for j in 0..nd {
                                let mut v = 0.0;
                                if i == k {
                                    v += du[m][j];
                                }
                                if j == k {
                                    v += du[m][i];
                                }
                                if i == j {
                                    v -= du[m][k];
                                }
                                dg[m][k][i][j] = v;
                            }
                        }
                    }
                }
                Some(dg)
            }
            MetricKind::Product { factor } => factor.dgamma_closed(p),
            MetricKind::Custom(_) => None,
        }
    }

    fn gamma_fd(&self, p: Vec3) -> Result<Gamma> {
        let dim = self.dim;
        let h = (1e-4f64).max(1e-4 * linalg::norm_euclid(p));
        // 4th-order central differences of the metric
        let mut dgdx = [[[0.0f64; 3]; 3]; 3]; // dgdx[l][i][j] = d_l g_ij
        for l in 0..dim {
            let shifted = |mult: f64| -> Result<Mat3> {
                let mut q = p;
                q[l] += mult * h;
                self.require_in_domain(q)?;
                Ok(self.metric_raw(q))
            };
            let m2 = shifted(-2.0)?;
            let m1 = shifted(-1.0)?;
            let p1 = shifted(1.0)?;
            let p2 = shifted(2.0)?;
            for i in 0..dim {
                for j in 0..dim {
                    dgdx[l][i][j] =
                        (m2[i][j] - 8.0 * m1[i][j] + 8.0 * p1[i][j] - p2[i][j]) / (12.0 * h);
                }
            }
        }
        let data = self.metric_data(p)?;
        let mut gm: Gamma = [[[0.0; 3]; 3]; 3];
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let mut acc = 0.0;
                    for l in 0..dim {
                        acc += data.inv[k][l] * (dgdx[i][j][l] + dgdx[j][i][l] - dgdx[l][i][j]);
                    }
                    gm[k][i][j] = 0.5 * acc;
                }
            }
        }
        Ok(gm)
    }

    /// Christoffel symbols of the Levi-Civita connection; closed form for
    /// built-in kinds, 4th-order finite differences for custom metrics.
    pub fn christoffel_at(&self, p: Vec3) -> Result<ConnectionCoefficients> {
        self.require_in_domain(p)?;
        // metric_data performs the singularity check
        let _ = self.metric_data(p)?;
        let gamma = match self.gamma_closed(p) {
            Some(g) => g,
            None => self.gamma_fd(p)?,
        };
        Ok(ConnectionCoefficients {
            gamma,
            dim: self.dim,
        })
    }

    fn dgamma_fd(&self, p: Vec3) -> Result<DGamma> {
        let dim = self.dim;
        let h = (3e-3f64).max(3e-3 * linalg::norm_euclid(p));
        let mut dg: DGamma = [[[[0.0; 3]; 3]; 3]; 3];
        for m in 0..dim {
            let shifted = |mult: f64| -> Result<Gamma> {
                let mut q = p;
                q[m] += mult * h;
                self.gamma_fd(q)
            };
            let g_m2 = shifted(-2.0)?;
            let g_m1 = shifted(-1.0)?;
            let g_p1 = shifted(1.0)?;
            let g_p2 = shifted(2.0)?;
            for k in 0..dim {
                for i in 0..dim {
                    for j in 0..dim {
                        dg[m][k][i][j] = (g_m2[k][i][j] - 8.0 * g_m1[k][i][j]
                            + 8.0 * g_p1[k][i][j]
                            - g_p2[k][i][j])
                            / (12.0 * h);
                    }
                }
            }
        }
        Ok(dg)
    }

    /// Curvature tensor in the convention of the module header, assembled
    /// from the Christoffel symbols and their first derivatives.
    pub fn riemann_at(&self, p: Vec3) -> Result<CurvatureTensor> {
        self.require_in_domain(p)?;
        let _ = self.metric_data(p)?;
        let (gamma, dgamma) = match (self.gamma_closed(p), self.dgamma_closed(p)) {
            (Some(g), Some(dg)) => (g, dg),
            _ => (self.gamma_fd(p)?, self.dgamma_fd(p)?),
        };
        let dim = self.dim;
        let mut r = [[[[0.0; 3]; 3]; 3]; 3];
        for l in 0..dim {
            for k in 0..dim {
                for i in 0..dim {
                    for j in 0..dim {
                        let mut v = dgamma[j][l][i][k] - dgamma[i][l][j][k];
                        for m in 0..dim {
                            v += gamma[l][j][m] * gamma[m][i][k] - gamma[l][i][m] * gamma[m][j][k];
                        }
                        r[l][k][i][j] = v;
                    }
                }
            }
        }
        Ok(CurvatureTensor { r, dim })
    }

    /// Sectional curvature of the plane spanned by X and Y.
    pub fn sectional_curvature(&self, p: Vec3, x: Vec3, y: Vec3) -> Result<f64> {
        let data = self.metric_data(p)?;
        let xx = linalg::inner_g(&data.g, x, x);
        let yy = linalg::inner_g(&data.g, y, y);
        let xy = linalg::inner_g(&data.g, x, y);
        let gram = xx * yy - xy * xy;
        if gram < 1e-12 {
            return Err(Error::DegeneratePlane { gram });
        }
        let r = self.riemann_at(p)?;
        Ok(r.component(&data.g, x, y, x, y) / gram)
    }

    pub fn inner(&self, p: Vec3, x: Vec3, y: Vec3) -> Result<f64> {
        let data = self.metric_data(p)?;
        Ok(linalg::inner_g(&data.g, x, y))
    }

    pub fn norm(&self, p: Vec3, x: Vec3) -> Result<f64> {
        Ok(self.inner(p, x, x)?.max(0.0).sqrt())
    }

    /// Angle between nonzero tangent vectors, clamped into [0, pi].
    pub fn angle(&self, p: Vec3, x: Vec3, y: Vec3) -> Result<f64> {
        let data = self.metric_data(p)?;
        let nx = linalg::norm_g(&data.g, x);
        let ny = linalg::norm_g(&data.g, y);
        if nx < 1e-12 || ny < 1e-12 {
            return Err(Error::ZeroVector);
        }
        let c = (linalg::inner_g(&data.g, x, y) / (nx * ny)).clamp(-1.0, 1.0);
        Ok(c.acos())
    }

    /// Positively oriented orthonormal frame at p obtained by Gram-Schmidt on
    /// the chart coordinate basis.
    pub fn orthonormal_frame(&self, p: Vec3) -> Result<[Vec3; 3]> {
        let data = self.metric_data(p)?;
        let mut frame = [[0.0; 3]; 3];
        for i in 0..self.dim {
            let mut v: Vec3 = [0.0; 3];
            v[i] = 1.0;
            let prev_frames: Vec<Vec3> = frame[..i].to_vec();
            for e in prev_frames {
                let c = linalg::inner_g(&data.g, v, e);
                v = linalg::axpy(v, -c, e);
            }
            let n = linalg::norm_g(&data.g, v);
            if n < 1e-12 {
                return Err(Error::SingularMetric { det: data.det });
            }
            frame[i] = linalg::scale(v, 1.0 / n);
        }
        if self.dim == 2 {
            frame[2] = [0.0, 0.0, 1.0];
        }
        Ok(frame)
    }
}

/// Metric with precomputed inverse and determinant.
#[derive(Debug, Clone, Copy)]
pub struct MetricData {
    pub g: Mat3,
    pub inv: Mat3,
    pub det: f64,
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParams(format!("radius must be positive, got {radius}")))
    }
}

/// Registry of named custom test metrics available to configuration files.
/// No runtime code loading: these are compiled-in fields.
pub fn custom_metric_registry(name: &str) -> Result<CustomMetric> {
    match name {
        // Smooth non-homogeneous SPD perturbation of flat space.
        "gaussian_bump" => Ok(CustomMetric {
            name: name.into(),
            dim: 3,
            field: Arc::new(|p: Vec3| {
                let w = 0.6 * (-linalg::dot(p, p)).exp();
                let v = [1.0, 0.5 * p[0], (0.7 * p[1]).sin()];
                let mut g = linalg::identity();
                for i in 0..3 {
                    for j in 0..3 {
                        g[i][j] += w * v[i] * v[j];
                    }
                }
                g
            }),
            domain: ChartDomain::unbounded(),
        }),
        // The 3-sphere chart metric routed through the black-box path;
        // useful for cross-checking finite differences against closed forms.
        "sphere3_chart" => {
            let reference = ManifoldDescriptor::sphere3(1.0)?;
            let domain = reference.chart_domain().clone();
            Ok(CustomMetric {
                name: name.into(),
                dim: 3,
                field: Arc::new(move |p: Vec3| reference.metric_raw(p)),
                domain,
            })
        }
        other => Err(Error::ConfigError(format!(
            "unknown custom metric `{other}` (registry offers: gaussian_bump, sphere3_chart)"
        ))),
    }
}

/// Finite-difference first derivative of the full Christoffel field, public
/// so diagnostics can re-derive curvature data for custom metrics.
pub fn fd_scalar_grid(values: &[f64], h: f64) -> Vec<f64> {
    fd::deriv1(values, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn builtin_manifolds() -> Vec<ManifoldDescriptor> {
        vec![
            ManifoldDescriptor::euclidean3(),
            ManifoldDescriptor::sphere3(1.0).unwrap(),
            ManifoldDescriptor::sphere3(2.5).unwrap(),
            ManifoldDescriptor::hyperbolic3(1.0).unwrap(),
            ManifoldDescriptor::hyperbolic3(2.0).unwrap(),
            ManifoldDescriptor::product(ManifoldDescriptor::sphere2(1.0).unwrap()).unwrap(),
            ManifoldDescriptor::product(ManifoldDescriptor::hyperbolic2(1.5).unwrap()).unwrap(),
            ManifoldDescriptor::product(ManifoldDescriptor::euclidean2()).unwrap(),
        ]
    }

    fn random_interior_point(m: &ManifoldDescriptor, rng: &mut StdRng) -> Vec3 {
        loop {
            let p = match &m.kind {
                MetricKind::Euclidean { .. } | MetricKind::Custom(_) => [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ],
                MetricKind::Sphere2 { .. } => {
                    [rng.gen_range(-1.2..1.2), rng.gen_range(0.0..6.0), 0.0]
                }
                MetricKind::Sphere3 { .. } => [
                    rng.gen_range(0.4..std::f64::consts::PI - 0.4),
                    rng.gen_range(0.4..std::f64::consts::PI - 0.4),
                    rng.gen_range(0.0..6.0),
                ],
                MetricKind::Hyperbolic2 { radius } => {
                    let s = 0.6 * radius;
                    [rng.gen_range(-s..s) * 0.7, rng.gen_range(-s..s) * 0.7, 0.0]
                }
                MetricKind::Hyperbolic3 { radius } => {
                    let s = 0.5 * radius;
                    [
                        rng.gen_range(-s..s),
                        rng.gen_range(-s..s),
                        rng.gen_range(-s..s),
                    ]
                }
                MetricKind::Product { factor } => {
                    let mut q = random_interior_point(factor, rng);
                    q[2] = rng.gen_range(-2.0..2.0);
                    q
                }
            };
            if m.contains(p) {
                return p;
            }
        }
    }

    /// Independent finite-difference Christoffel oracle (2nd order is enough
    /// for the 1e-6 agreement bound at this step size).
    fn gamma_fd_oracle(m: &ManifoldDescriptor, p: Vec3) -> Gamma {
        let dim = m.dim();
        let h = 1e-5;
        let mut dgdx = [[[0.0f64; 3]; 3]; 3];
        for l in 0..dim {
            let mut qp = p;
            qp[l] += h;
            let mut qm = p;
            qm[l] -= h;
            let gp = m.metric_at(qp).unwrap().g;
            let gm = m.metric_at(qm).unwrap().g;
            for i in 0..dim {
                for j in 0..dim {
                    dgdx[l][i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h);
                }
            }
        }
        let data = m.metric_data(p).unwrap();
        let mut gam: Gamma = [[[0.0; 3]; 3]; 3];
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let mut acc = 0.0;
                    for l in 0..dim {
                        acc += data.inv[k][l] * (dgdx[i][j][l] + dgdx[j][i][l] - dgdx[l][i][j]);
                    }
                    gam[k][i][j] = 0.5 * acc;
                }
            }
        }
        gam
    }

    #[test]
    fn euclidean_metric_is_identity() {
        let m = ManifoldDescriptor::euclidean3();
        let g = m.metric_at([0.3, -1.0, 2.0]).unwrap().g;
        assert_eq!(g, linalg::identity());
    }

    #[test]
    fn product_sphere_metric_matches_geographic_pullback() {
        let m = ManifoldDescriptor::product(ManifoldDescriptor::sphere2(1.0).unwrap()).unwrap();
        let p = [std::f64::consts::FRAC_PI_4, 0.0, 5.0];
        let g = m.metric_at(p).unwrap().g;
        let c = std::f64::consts::FRAC_PI_4.cos();
        assert!((g[0][0] - 1.0).abs() < 1e-15);
        assert!((g[1][1] - c * c).abs() < 1e-15);
        assert!((g[2][2] - 1.0).abs() < 1e-15);
        assert!(g[0][1].abs() + g[0][2].abs() + g[1][2].abs() < 1e-15);
    }

    #[test]
    fn hyperbolic_ball_metric_at_origin_is_four_identity() {
        let m = ManifoldDescriptor::hyperbolic3(1.0).unwrap();
        let g = m.metric_at([0.0; 3]).unwrap().g;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 4.0 } else { 0.0 };
                assert!((g[i][j] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn euclidean_christoffels_vanish() {
        let m = ManifoldDescriptor::euclidean3();
        let c = m.christoffel_at([0.4, 0.2, -0.7]).unwrap();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(c.gamma[k][i][j], 0.0);
                }
            }
        }
    }

    #[test]
    fn closed_form_christoffels_match_fd_oracle_on_random_points() {
        let mut rng = StdRng::seed_from_u64(7);
        for m in builtin_manifolds() {
            for _ in 0..100 {
                let p = random_interior_point(&m, &mut rng);
                let closed = m.christoffel_at(p).unwrap().gamma;
                let oracle = gamma_fd_oracle(&m, p);
                for k in 0..m.dim() {
                    for i in 0..m.dim() {
                        for j in 0..m.dim() {
                            let d = (closed[k][i][j] - oracle[k][i][j]).abs();
                            assert!(
                                d < 1e-6,
                                "{}: Gamma^{k}_{i}{j} closed {} vs fd {}",
                                m.name,
                                closed[k][i][j],
                                oracle[k][i][j]
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn custom_metric_christoffels_match_oracle() {
        let m = ManifoldDescriptor::custom(custom_metric_registry("gaussian_bump").unwrap());
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let p = random_interior_point(&m, &mut rng);
            let fd_route = m.christoffel_at(p).unwrap().gamma;
            let oracle = gamma_fd_oracle(&m, p);
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        assert!((fd_route[k][i][j] - oracle[k][i][j]).abs() < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn metric_compatibility_residual_small() {
        // nabla g = 0: d_k g_ij = Gamma^l_{ki} g_lj + Gamma^l_{kj} g_il
        // (4th-order differences keep the oracle's own error below the bound)
        let mut rng = StdRng::seed_from_u64(3);
        for m in builtin_manifolds() {
            for _ in 0..25 {
                let p = random_interior_point(&m, &mut rng);
                let dim = m.dim();
                let gamma = m.christoffel_at(p).unwrap().gamma;
                let h = 3e-4;
                for k in 0..dim {
                    let sample = |mult: f64| {
                        let mut q = p;
                        q[k] += mult * h;
                        m.metric_at(q).unwrap().g
                    };
                    let (g_m2, g_m1, g_p1, g_p2) =
                        (sample(-2.0), sample(-1.0), sample(1.0), sample(2.0));
                    let g = m.metric_at(p).unwrap().g;
                    for i in 0..dim {
                        for j in 0..dim {
                            let dg = (g_m2[i][j] - 8.0 * g_m1[i][j] + 8.0 * g_p1[i][j]
                                - g_p2[i][j])
                                / (12.0 * h);
                            let mut conn = 0.0;
                            for l in 0..dim {
                                conn += gamma[l][k][i] * g[l][j] + gamma[l][k][j] * g[i][l];
                            }
                            assert!(
                                (dg - conn).abs() < 1e-8,
                                "{}: metric compatibility residual {:e}",
                                m.name,
                                (dg - conn).abs()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn euclidean_curvature_vanishes() {
        let m = ManifoldDescriptor::euclidean3();
        let r = m.riemann_at([1.0, 2.0, 3.0]).unwrap();
        for l in 0..3 {
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        assert_eq!(r.r[l][k][i][j], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn space_form_curvature_matches_constant_curvature_oracle() {
        // oracle: R^l_{kij} = c (g_ik delta^l_j - g_jk delta^l_i), c = +-1/r^2
        let cases = [
            (ManifoldDescriptor::sphere3(1.0).unwrap(), 1.0),
            (ManifoldDescriptor::sphere3(2.0).unwrap(), 0.25),
            (ManifoldDescriptor::hyperbolic3(1.0).unwrap(), -1.0),
            (ManifoldDescriptor::hyperbolic3(2.0).unwrap(), -0.25),
        ];
        let mut rng = StdRng::seed_from_u64(19);
        for (m, c) in cases {
            for _ in 0..20 {
                let p = random_interior_point(&m, &mut rng);
                let g = m.metric_at(p).unwrap().g;
                let r = m.riemann_at(p).unwrap();
                for l in 0..3 {
                    for k in 0..3 {
                        for i in 0..3 {
                            for j in 0..3 {
                                let oracle = c
                                    * (g[i][k] * if l == j { 1.0 } else { 0.0 }
                                        - g[j][k] * if l == i { 1.0 } else { 0.0 });
                                assert!(
                                    (r.r[l][k][i][j] - oracle).abs() < 1e-9,
                                    "{}: R^{l}_{k}{i}{j} = {} vs oracle {}",
                                    m.name,
                                    r.r[l][k][i][j],
                                    oracle
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sectional_curvature_sign_calibration() {
        let mut rng = StdRng::seed_from_u64(23);
        let sphere = ManifoldDescriptor::sphere3(2.0).unwrap();
        let hyp = ManifoldDescriptor::hyperbolic3(1.0).unwrap();
        let flat = ManifoldDescriptor::euclidean3();
        for _ in 0..100 {
            let p = random_interior_point(&sphere, &mut rng);
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let y = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            if let Ok(k) = sphere.sectional_curvature(p, x, y) {
                assert!((k - 0.25).abs() < 1e-5, "sphere3(2): K = {k}");
            }
            let ph = random_interior_point(&hyp, &mut rng);
            if let Ok(k) = hyp.sectional_curvature(ph, x, y) {
                assert!((k + 1.0).abs() < 1e-5, "hyperbolic3(1): K = {k}");
            }
            let k0 = flat.sectional_curvature([0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
            assert_eq!(k0, 0.0);
        }
    }

    #[test]
    fn curvature_antisymmetry_and_first_bianchi() {
        let mut rng = StdRng::seed_from_u64(31);
        let mut manifolds = builtin_manifolds();
        manifolds.push(ManifoldDescriptor::custom(
            custom_metric_registry("gaussian_bump").unwrap(),
        ));
        for m in manifolds {
            for _ in 0..10 {
                let p = random_interior_point(&m, &mut rng);
                let r = m.riemann_at(p).unwrap();
                let d = m.dim();
                for l in 0..d {
                    for k in 0..d {
                        for i in 0..d {
                            for j in 0..d {
                                // antisymmetry in the operator slots (i, j)
                                assert!(
                                    (r.r[l][k][i][j] + r.r[l][k][j][i]).abs() < 1e-8,
                                    "{}: antisymmetry", m.name
                                );
                                // first Bianchi: cyclic sum over (k, i, j)
                                let b = r.r[l][k][i][j] + r.r[l][i][j][k] + r.r[l][j][k][i];
                                assert!(b.abs() < 1e-8, "{}: Bianchi residual {b:e}", m.name);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn product_curvature_annihilates_vertical_slots() {
        let mut rng = StdRng::seed_from_u64(37);
        for factor in [
            ManifoldDescriptor::sphere2(1.0).unwrap(),
            ManifoldDescriptor::hyperbolic2(1.0).unwrap(),
        ] {
            let m = ManifoldDescriptor::product(factor).unwrap();
            for _ in 0..20 {
                let p = random_interior_point(&m, &mut rng);
                let g = m.metric_at(p).unwrap().g;
                let r = m.riemann_at(p).unwrap();
                let vertical = [0.0, 0.0, 1.0];
                let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let y = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                // any slot holding d_t kills the component
                assert!(linalg::norm_euclid(r.apply(vertical, x, y)) < 1e-8);
                assert!(linalg::norm_euclid(r.apply(x, vertical, y)) < 1e-8);
                assert!(linalg::norm_euclid(r.apply(x, y, vertical)) < 1e-8);
                assert!(r.component(&g, x, y, x, vertical).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn inner_norm_angle_basics() {
        let e3 = ManifoldDescriptor::euclidean3();
        let p = [0.0; 3];
        assert_eq!(e3.inner(p, [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]).unwrap(), 1.0);
        let x = [0.3, -0.4, 0.2];
        // arccos near 1 resolves angles only to sqrt(eps)
        assert!(e3.angle(p, x, x).unwrap().abs() < 1e-6);
        assert!(matches!(
            e3.angle(p, x, [0.0; 3]),
            Err(Error::ZeroVector)
        ));

        let prod = ManifoldDescriptor::product(ManifoldDescriptor::sphere2(1.0).unwrap()).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let q = random_interior_point(&prod, &mut rng);
            let t = [0.0, 0.0, 1.0];
            assert!((prod.inner(q, t, t).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn chart_domain_errors() {
        let s3 = ManifoldDescriptor::sphere3(1.0).unwrap();
        assert!(matches!(
            s3.metric_at([0.0, 1.0, 0.0]),
            Err(Error::OutOfChart { .. })
        ));
        let h3 = ManifoldDescriptor::hyperbolic3(1.0).unwrap();
        assert!(matches!(
            h3.metric_at([0.96, 0.0, 0.0]),
            Err(Error::OutOfChart { .. })
        ));
        assert!(matches!(
            ManifoldDescriptor::sphere3(-1.0),
            Err(Error::BadParams(_))
        ));
        let e3 = ManifoldDescriptor::euclidean3();
        assert!(matches!(
            e3.sectional_curvature([0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]),
            Err(Error::DegeneratePlane { .. })
        ));
    }

    #[test]
    fn orthonormal_frame_is_orthonormal_and_oriented() {
        let mut rng = StdRng::seed_from_u64(41);
        for m in builtin_manifolds() {
            let p = random_interior_point(&m, &mut rng);
            let data = m.metric_data(p).unwrap();
            let frame = m.orthonormal_frame(p).unwrap();
            let gram = linalg::gram(&data.g, &frame);
            if m.dim() == 3 {
                assert!(linalg::gram_identity_deviation(&gram) < 1e-12);
                assert!(linalg::vol_g(&data.g, frame[0], frame[1], frame[2]) > 0.0);
            }
        }
    }
}
