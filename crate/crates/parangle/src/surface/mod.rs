//! Ruled patches: intrinsic cylinders, rectifying surfaces, constant-angle
//! surfaces over a 2-manifold factor, and chart-map patches for tests.
//!
//! A patch is a (u, v) grid of points with rulings shot as unit-speed
//! geodesics in the v direction (exact integrator tangents) and 4th-order
//! differences across columns in the u direction. The unit normal is fixed by
//! requiring (X_u, X_v, nu) positively oriented in the chart volume form; all
//! second-fundamental-form signs and the minus sign in the rectifying axis
//! V = sin(theta) X_v - cos(theta) nu hang off this choice.

pub mod analysis;
pub mod fields;
pub mod geodesic;

use crate::error::{Error, Result};
use crate::frenet::FrenetData;
use crate::linalg::{self, Vec3};
use crate::manifold::ManifoldDescriptor;
use crate::ode::{self, IntegratorSettings};
use crate::transport::{CurvePath, PathSample};
use rayon::prelude::*;
use std::sync::Arc;

pub use analysis::sphere_defect_oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchKind {
    Cylinder,
    Rectifying,
    ProductAngle,
    Custom,
}

/// First and second fundamental forms plus the covariant derivative fields of
/// the patch tangents (nabla_{Xu} Xu, nabla_{Xu} Xv, nabla_{Xv} Xv).
#[derive(Debug, Clone)]
pub struct Forms {
    pub g11: Vec<f64>,
    pub g12: Vec<f64>,
    pub g22: Vec<f64>,
    pub h11: Vec<f64>,
    pub h12: Vec<f64>,
    pub h22: Vec<f64>,
    pub normal: Vec<Vec3>,
    pub f1: Vec<Vec3>,
    pub f2: Vec<Vec3>,
    pub f3: Vec<Vec3>,
    /// principal curvature along the direction orthogonal to the ruling,
    /// reported only where the ruling rows of the form vanish
    pub lambda: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct RuledPatch {
    pub kind: PatchKind,
    manifold: Arc<ManifoldDescriptor>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// index of the v = 0 row (the directrix)
    pub j0: usize,
    pub p: Vec<Vec3>,
    pub xu: Vec<Vec3>,
    pub xv: Vec<Vec3>,
    pub forms: Option<Forms>,
    /// constant angle of the construction, when one defines it
    pub theta: Option<f64>,
}

/// Uniform unit axis field over a patch, extended from the directrix by
/// parallel transport along each ruling.
#[derive(Debug, Clone)]
pub struct SurfaceAxisField {
    pub theta: Option<f64>,
    pub v: Vec<Vec3>,
    /// |nabla_{Xv} V|_g per node; ~0 by construction, measured not assumed
    pub ruling_residual: Vec<f64>,
    /// |nabla_{Xu} V|_g per node: the full transport residual across rulings
    pub cross_residual: Vec<f64>,
}

impl SurfaceAxisField {
    pub fn sup_ruling_residual(&self) -> f64 {
        self.ruling_residual.iter().fold(0.0f64, |m, &r| m.max(r))
    }

    pub fn sup_cross_residual(&self) -> f64 {
        self.cross_residual.iter().fold(0.0f64, |m, &r| m.max(r))
    }
}

impl RuledPatch {
    pub fn manifold(&self) -> &ManifoldDescriptor {
        &self.manifold
    }

    pub fn nu(&self) -> usize {
        self.u.len()
    }

    pub fn nv(&self) -> usize {
        self.v.len()
    }

    pub fn du(&self) -> f64 {
        self.u[1] - self.u[0]
    }

    pub fn dv(&self) -> f64 {
        self.v[1] - self.v[0]
    }

    #[inline]
    pub fn idx(&self, iu: usize, iv: usize) -> usize {
        iu * self.v.len() + iv
    }

    pub fn forms(&self) -> Result<&Forms> {
        self.forms.as_ref().ok_or(Error::MissingForms)
    }

    /// Worst deviation of |X_v|_g from 1 over the grid.
    pub fn ruling_speed_deviation(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, &p) in self.p.iter().enumerate() {
            let n = self.manifold.norm(p, self.xv[i])?;
            worst = worst.max((n - 1.0).abs());
        }
        Ok(worst)
    }

    /// Worst ruling geodesic residual |nabla_{Xv} Xv|_g (forms required).
    pub fn ruling_geodesic_residual(&self) -> Result<f64> {
        let forms = self.forms()?;
        let mut worst: f64 = 0.0;
        for (i, &p) in self.p.iter().enumerate() {
            worst = worst.max(self.manifold.norm(p, forms.f3[i])?);
        }
        Ok(worst)
    }

    /// The ruling through column `iu` as a curve parametrized by v.
    pub fn ruling_curve(&self, iu: usize) -> CurvePath {
        let samples: Vec<PathSample> = (0..self.nv())
            .map(|iv| PathSample {
                s: self.v[iv],
                p: self.p[self.idx(iu, iv)],
                t: self.xv[self.idx(iu, iv)],
            })
            .collect();
        CurvePath::from_samples(samples)
    }
}

/// Build the v grid: uniform, containing 0 exactly (the directrix row).
fn v_grid(v_min: f64, v_max: f64, nv: usize) -> Result<(Vec<f64>, usize)> {
    if !(v_min <= 0.0 && v_max >= 0.0 && v_max > v_min) {
        return Err(Error::InvalidInput(format!(
            "v range must bracket 0, got ({v_min}, {v_max})"
        )));
    }
    if nv < 2 {
        return Err(Error::InvalidInput("need at least 2 ruling nodes".into()));
    }
    let dv = (v_max - v_min) / (nv - 1) as f64;
    let j0 = (-v_min / dv).round() as usize;
    let j0 = j0.min(nv - 1);
    let grid: Vec<f64> = (0..nv).map(|j| (j as f64 - j0 as f64) * dv).collect();
    Ok((grid, j0))
}

struct Column {
    p: Vec<Vec3>,
    xv: Vec<Vec3>,
}

/// Shoot one unit-speed geodesic ruling from `p0` in direction `w`,
/// recording points and exact tangents on the v grid.
fn shoot_column(
    m: &ManifoldDescriptor,
    p0: Vec3,
    w: Vec3,
    vgrid: &[f64],
    j0: usize,
    settings: &IntegratorSettings,
) -> Result<Column> {
    let dim = m.dim();
    let norm = m.norm(p0, w)?;
    if norm < 1e-12 {
        return Err(Error::ZeroVector);
    }
    let wn = linalg::scale(w, 1.0 / norm);
    let mut y0 = vec![0.0; 2 * dim];
    y0[..dim].copy_from_slice(&p0[..dim]);
    y0[dim..].copy_from_slice(&wn[..dim]);

    let mut p = vec![[0.0; 3]; vgrid.len()];
    let mut xv = vec![[0.0; 3]; vgrid.len()];
    p[j0] = p0;
    xv[j0] = wn;

    let rhs = |_s: f64, y: &[f64], dy: &mut [f64]| {
        let mut q = [0.0; 3];
        q[..dim].copy_from_slice(&y[..dim]);
        let mut vel = [0.0; 3];
        vel[..dim].copy_from_slice(&y[dim..2 * dim]);
        let acc = match m.christoffel_at(q) {
            Ok(c) => c.contract(vel, vel),
            Err(_) => [0.0; 3],
        };
        for i in 0..dim {
            dy[i] = vel[i];
            dy[dim + i] = -acc[i];
        }
    };
    let guard = |y: &[f64]| {
        let mut q = [0.0; 3];
        q[..dim].copy_from_slice(&y[..dim]);
        m.contains(q)
    };

    let mut run_arm = |grid: Vec<f64>, indices: Vec<usize>| -> Result<()> {
        if grid.len() < 2 {
            return Ok(());
        }
        let res = ode::integrate_on_grid(&rhs, &grid, &y0, settings, guard)?;
        if let Some(s) = res.truncated {
            return Err(Error::LeftChart {
                s,
                partial: Box::new(CurvePath::from_samples(vec![
                    PathSample { s: 0.0, p: p0, t: wn },
                    PathSample { s: s.abs().max(1e-12), p: p0, t: wn },
                ])),
            });
        }
        for (row, &idx) in indices.iter().enumerate() {
            let y = &res.states[row];
            let mut q = [0.0; 3];
            q[..dim].copy_from_slice(&y[..dim]);
            let mut vel = [0.0; 3];
            vel[..dim].copy_from_slice(&y[dim..2 * dim]);
            p[idx] = q;
            xv[idx] = vel;
        }
        Ok(())
    };

    // forward arm j0..nv-1, backward arm j0..0
    run_arm(
        vgrid[j0..].to_vec(),
        (j0..vgrid.len()).collect(),
    )?;
    run_arm(
        vgrid[..=j0].iter().rev().copied().collect(),
        (0..=j0).rev().collect(),
    )?;
    Ok(Column { p, xv })
}

fn assemble_patch(
    kind: PatchKind,
    m: &ManifoldDescriptor,
    u: Vec<f64>,
    vgrid: Vec<f64>,
    j0: usize,
    starts: Vec<Vec3>,
    directions: Vec<Vec3>,
    theta: Option<f64>,
    settings: &IntegratorSettings,
) -> Result<RuledPatch> {
    let nv = vgrid.len();
    let nu = u.len();
    let columns: Vec<Result<Column>> = starts
        .par_iter()
        .zip(directions.par_iter())
        .map(|(&p0, &w)| shoot_column(m, p0, w, &vgrid, j0, settings))
        .collect();
    let mut p = vec![[0.0; 3]; nu * nv];
    let mut xv = vec![[0.0; 3]; nu * nv];
    for (iu, col) in columns.into_iter().enumerate() {
        let col = col?;
        for iv in 0..nv {
            p[iu * nv + iv] = col.p[iv];
            xv[iu * nv + iv] = col.xv[iv];
        }
    }
    let du = u[1] - u[0];
    let xu = if nu >= 5 {
        fields::deriv_u_vec(&p, nu, nv, du)
    } else {
        vec![[0.0; 3]; nu * nv]
    };
    Ok(RuledPatch {
        kind,
        manifold: Arc::new(m.clone()),
        u,
        v: vgrid,
        j0,
        p,
        xu,
        xv,
        forms: None,
        theta,
    })
}

/// Intrinsic cylinder over directrix `beta`: rulings along the parallel
/// transport of `v0`.
pub fn build_cylinder(
    m: &ManifoldDescriptor,
    beta: &CurvePath,
    v0: Vec3,
    v_range: (f64, f64),
    nv: usize,
    settings: &IntegratorSettings,
) -> Result<RuledPatch> {
    beta.require_unit_speed(m, 1e-6)?;
    let (vgrid, j0) = v_grid(v_range.0, v_range.1, nv)?;
    let w = crate::transport::parallel_transport(m, beta, v0, settings)?;
    // linear independence of ruling against directrix tangent
    for (i, q) in beta.samples().iter().enumerate() {
        let g = m.metric_at(q.p)?.g;
        let tt = linalg::inner_g(&g, q.t, q.t);
        let tw = linalg::inner_g(&g, q.t, w[i]);
        let ww = linalg::inner_g(&g, w[i], w[i]);
        let gram = tt * ww - tw * tw;
        if gram < 1e-8 {
            return Err(Error::DegenerateRuling { u: q.s, gram });
        }
    }
    assemble_patch(
        PatchKind::Cylinder,
        m,
        beta.grid(),
        vgrid,
        j0,
        beta.points(),
        w,
        None,
        settings,
    )
}

/// Rectifying surface of a framed curve: rulings along the unit Darboux field.
pub fn build_rectifying_surface(
    m: &ManifoldDescriptor,
    gamma: &CurvePath,
    fdat: &FrenetData,
    v_range: (f64, f64),
    nv: usize,
    settings: &IntegratorSettings,
) -> Result<RuledPatch> {
    if fdat.len() != gamma.len() {
        return Err(Error::InvalidInput(
            "Frenet data does not match the directrix sampling".into(),
        ));
    }
    if let Some(lo) = fdat.kappa.iter().position(|&k| k < crate::frenet::KAPPA_MIN) {
        let hi = fdat
            .kappa
            .iter()
            .rposition(|&k| k < crate::frenet::KAPPA_MIN)
            .unwrap();
        return Err(Error::KappaVanishes {
            s_lo: fdat.s[lo],
            s_hi: fdat.s[hi],
            threshold: crate::frenet::KAPPA_MIN,
        });
    }
    let (vgrid, j0) = v_grid(v_range.0, v_range.1, nv)?;
    assemble_patch(
        PatchKind::Rectifying,
        m,
        gamma.grid(),
        vgrid,
        j0,
        gamma.points(),
        fdat.darboux.clone(),
        None,
        settings,
    )
}

/// pi/2 rotation on the tangent planes of a 2-manifold: J(w) is orthogonal to
/// w, same length, with (w, Jw) positively oriented.
pub fn rotate_quarter(m2: &ManifoldDescriptor, p: Vec3, w: Vec3) -> Result<Vec3> {
    if m2.dim() != 2 {
        return Err(Error::InvalidInput("J rotation needs a 2-manifold".into()));
    }
    let data = m2.metric_data(p)?;
    let det2 = data.g[0][0] * data.g[1][1] - data.g[0][1] * data.g[1][0];
    let sqrt_det = det2.max(0.0).sqrt();
    // lower the index, rotate covector components, raise by 1/sqrt(det)
    let w_low = [
        data.g[0][0] * w[0] + data.g[0][1] * w[1],
        data.g[1][0] * w[0] + data.g[1][1] * w[1],
    ];
    Ok([-w_low[1] / sqrt_det, w_low[0] / sqrt_det, 0.0])
}

/// Constant-angle surface over the factor of a product manifold M^2 x R:
/// horizontal geodesics shot along cos(theta) J(alpha') with vertical
/// coordinate v sin(theta). `alpha` is a unit-speed curve in the factor.
pub fn build_product_constant_angle_surface(
    m_product: &ManifoldDescriptor,
    alpha: &CurvePath,
    theta: f64,
    v_range: (f64, f64),
    nv: usize,
    settings: &IntegratorSettings,
) -> Result<RuledPatch> {
    let factor = match &m_product.kind {
        crate::manifold::MetricKind::Product { factor } => factor.as_ref(),
        _ => {
            return Err(Error::InvalidInput(
                "constant-angle product surfaces need a product manifold".into(),
            ))
        }
    };
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidInput(format!(
            "constant angle must lie strictly inside (0, pi/2), got {theta}"
        )));
    }
    alpha.require_unit_speed(factor, 1e-6)?;
    let (vgrid, j0) = v_grid(v_range.0, v_range.1, nv)?;
    let (cos_t, sin_t) = (theta.cos(), theta.sin());
    let mut starts = Vec::with_capacity(alpha.len());
    let mut dirs = Vec::with_capacity(alpha.len());
    for q in alpha.samples() {
        let j = rotate_quarter(factor, q.p, q.t)?;
        starts.push([q.p[0], q.p[1], 0.0]);
        dirs.push([cos_t * j[0], cos_t * j[1], sin_t]);
    }
    assemble_patch(
        PatchKind::ProductAngle,
        m_product,
        alpha.grid(),
        vgrid,
        j0,
        starts,
        dirs,
        Some(theta),
        settings,
    )
}

/// Chart-map patch for tests and exports: points from a closure, partials by
/// differencing in both directions.
pub fn build_chart_map_patch(
    m: &ManifoldDescriptor,
    f: impl Fn(f64, f64) -> Vec3,
    u_range: (f64, f64),
    nu: usize,
    v_range: (f64, f64),
    nv: usize,
) -> Result<RuledPatch> {
    if nu < 5 || nv < 5 {
        return Err(Error::InvalidInput("chart-map patch needs a 5x5 grid at least".into()));
    }
    let du = (u_range.1 - u_range.0) / (nu - 1) as f64;
    let dv = (v_range.1 - v_range.0) / (nv - 1) as f64;
    let u: Vec<f64> = (0..nu).map(|i| u_range.0 + i as f64 * du).collect();
    let v: Vec<f64> = (0..nv).map(|j| v_range.0 + j as f64 * dv).collect();
    let mut p = vec![[0.0; 3]; nu * nv];
    for iu in 0..nu {
        for iv in 0..nv {
            p[iu * nv + iv] = f(u[iu], v[iv]);
        }
    }
    let xu = fields::deriv_u_vec(&p, nu, nv, du);
    let xv = fields::deriv_v_vec(&p, nu, nv, dv);
    let j0 = v.iter().position(|&x| x.abs() < 0.5 * dv.abs()).unwrap_or(0);
    Ok(RuledPatch {
        kind: PatchKind::Custom,
        manifold: Arc::new(m.clone()),
        u,
        v,
        j0,
        p,
        xu,
        xv,
        forms: None,
        theta: None,
    })
}

/// Compute first and second fundamental forms, the unit normal, the covariant
/// tangent-derivative fields, and lambda where the constant-angle shape
/// structure is present.
pub fn fundamental_forms(mut patch: RuledPatch) -> Result<RuledPatch> {
    let (nu, nv) = (patch.nu(), patch.nv());
    if nu < 5 || nv < 5 {
        return Err(Error::DegeneratePatch(format!(
            "forms need at least a 5x5 grid, got {nu}x{nv}"
        )));
    }
    let m = patch.manifold.clone();
    let du = patch.du();
    let dv = patch.dv();
    let count = nu * nv;

    let mut g11 = vec![0.0; count];
    let mut g12 = vec![0.0; count];
    let mut g22 = vec![0.0; count];
    for i in 0..count {
        let data = m.metric_data(patch.p[i])?;
        g11[i] = linalg::inner_g(&data.g, patch.xu[i], patch.xu[i]);
        g12[i] = linalg::inner_g(&data.g, patch.xu[i], patch.xv[i]);
        g22[i] = linalg::inner_g(&data.g, patch.xv[i], patch.xv[i]);
        let det2 = g11[i] * g22[i] - g12[i] * g12[i];
        if det2 <= 1e-10 {
            return Err(Error::DegeneratePatch(format!(
                "first fundamental form degenerate (det {det2:e}) at node {i}"
            )));
        }
    }

    let du_xu = fields::deriv_u_vec(&patch.xu, nu, nv, du);
    let du_xv = fields::deriv_u_vec(&patch.xv, nu, nv, du);
    let dv_xv = fields::deriv_v_vec(&patch.xv, nu, nv, dv);

    let mut normal = vec![[0.0; 3]; count];
    let mut f1 = vec![[0.0; 3]; count];
    let mut f2 = vec![[0.0; 3]; count];
    let mut f3 = vec![[0.0; 3]; count];
    let mut h11 = vec![0.0; count];
    let mut h12 = vec![0.0; count];
    let mut h22 = vec![0.0; count];
    let mut lambda = vec![None; count];

    for i in 0..count {
        let data = m.metric_data(patch.p[i])?;
        let gamma = m.christoffel_at(patch.p[i])?;
        let raw = linalg::cross_g(&data.g, &data.inv, patch.xu[i], patch.xv[i]);
        let n = linalg::norm_g(&data.g, raw);
        if n < 1e-12 {
            return Err(Error::DegeneratePatch(format!("vanishing normal at node {i}")));
        }
        normal[i] = linalg::scale(raw, 1.0 / n);
        f1[i] = linalg::add(du_xu[i], gamma.contract(patch.xu[i], patch.xu[i]));
        f2[i] = linalg::add(du_xv[i], gamma.contract(patch.xu[i], patch.xv[i]));
        f3[i] = linalg::add(dv_xv[i], gamma.contract(patch.xv[i], patch.xv[i]));
        h11[i] = linalg::inner_g(&data.g, f1[i], normal[i]);
        h12[i] = linalg::inner_g(&data.g, f2[i], normal[i]);
        h22[i] = linalg::inner_g(&data.g, f3[i], normal[i]);

        // shape-operator structure: in the frame (ruling e1, transverse e2)
        // lambda = h(e2, e2) is only meaningful when h(e1, .) vanishes
        let a = g12[i] / g22[i];
        let q = g11[i] - g12[i] * g12[i] / g22[i];
        let h_e1e1 = h22[i] / g22[i];
        let h_e1e2 = (h12[i] - a * h22[i]) / (g22[i].sqrt() * q.sqrt());
        let cand = (h11[i] - 2.0 * a * h12[i] + a * a * h22[i]) / q;
        let gate = 1e-3 * (1.0 + cand.abs());
        if h_e1e1.abs() < gate && h_e1e2.abs() < gate {
            lambda[i] = Some(cand);
        }
    }

    patch.forms = Some(Forms {
        g11,
        g12,
        g22,
        h11,
        h12,
        h22,
        normal,
        f1,
        f2,
        f3,
        lambda,
    });
    Ok(patch)
}

/// Extend a directrix axis over the whole patch by parallel transport along
/// each ruling; residuals along and across rulings are measured.
pub fn extend_axis(
    patch: &RuledPatch,
    v0_row: &[Vec3],
    theta: Option<f64>,
    settings: &IntegratorSettings,
) -> Result<SurfaceAxisField> {
    let (nu, nv) = (patch.nu(), patch.nv());
    if v0_row.len() != nu {
        return Err(Error::InvalidInput(
            "directrix axis row length does not match the u grid".into(),
        ));
    }
    let m = patch.manifold.clone();
    let j0 = patch.j0;
    let columns: Vec<Result<Vec<Vec3>>> = (0..nu)
        .into_par_iter()
        .map(|iu| -> Result<Vec<Vec3>> {
            let mut field = vec![[0.0; 3]; nv];
            field[j0] = v0_row[iu];
            // forward arm
            if j0 + 1 < nv {
                let samples: Vec<PathSample> = (j0..nv)
                    .map(|iv| PathSample {
                        s: patch.v[iv],
                        p: patch.p[iu * nv + iv],
                        t: patch.xv[iu * nv + iv],
                    })
                    .collect();
                let arm = CurvePath::from_samples(samples);
                let moved = crate::transport::parallel_transport(&m, &arm, v0_row[iu], settings)?;
                for (k, w) in moved.into_iter().enumerate() {
                    field[j0 + k] = w;
                }
            }
            // backward arm: reverse the ruling (same curve, opposite tangent)
            if j0 >= 1 {
                let samples: Vec<PathSample> = (0..=j0)
                    .rev()
                    .map(|iv| PathSample {
                        s: -patch.v[iv],
                        p: patch.p[iu * nv + iv],
                        t: linalg::scale(patch.xv[iu * nv + iv], -1.0),
                    })
                    .collect();
                let arm = CurvePath::from_samples(samples);
                let moved = crate::transport::parallel_transport(&m, &arm, v0_row[iu], settings)?;
                for (k, w) in moved.into_iter().enumerate() {
                    field[j0 - k] = w;
                }
            }
            Ok(field)
        })
        .collect();

    let mut v_field = vec![[0.0; 3]; nu * nv];
    for (iu, col) in columns.into_iter().enumerate() {
        let col = col?;
        for (iv, w) in col.into_iter().enumerate() {
            v_field[iu * nv + iv] = w;
        }
    }

    // measured residuals in both directions
    let dv_v = fields::deriv_v_vec(&v_field, nu, nv, patch.dv());
    let du_v = fields::deriv_u_vec(&v_field, nu, nv, patch.du());
    let mut ruling_residual = vec![0.0; nu * nv];
    let mut cross_residual = vec![0.0; nu * nv];
    for i in 0..nu * nv {
        let gamma = m.christoffel_at(patch.p[i])?;
        let along = linalg::add(dv_v[i], gamma.contract(patch.xv[i], v_field[i]));
        let across = linalg::add(du_v[i], gamma.contract(patch.xu[i], v_field[i]));
        ruling_residual[i] = m.norm(patch.p[i], along)?;
        cross_residual[i] = m.norm(patch.p[i], across)?;
    }
    Ok(SurfaceAxisField {
        theta,
        v: v_field,
        ruling_residual,
        cross_residual,
    })
}

/// The rectifying-surface axis row sin(theta) X_v - cos(theta) nu along the
/// directrix; equals cos(theta) N + sin(theta) D of the slant directrix.
pub fn rectifying_axis_row(patch: &RuledPatch, theta: f64) -> Result<Vec<Vec3>> {
    let forms = patch.forms()?;
    let (nv, j0) = (patch.nv(), patch.j0);
    Ok((0..patch.nu())
        .map(|iu| {
            let i = iu * nv + j0;
            linalg::sub(
                linalg::scale(patch.xv[i], theta.sin()),
                linalg::scale(forms.normal[i], theta.cos()),
            )
        })
        .collect())
}
