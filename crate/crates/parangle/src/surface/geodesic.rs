//! Patch-intrinsic geodesics: the induced metric is interpolated from the
//! grid, the 2D geodesic equation integrated in patch coordinates, and the
//! solution lifted to an ambient curve. Curvature and torsion of the lift are
//! assembled from the patch's covariant derivative fields rather than by
//! re-differencing the lifted samples, so no noise is amplified along the
//! curve.

use super::fields;
use super::RuledPatch;
use crate::error::{Error, Result};
use crate::frenet::FrenetData;
use crate::interp::GridField;
use crate::linalg::{self, Vec3};
use crate::ode::{self, IntegratorSettings};
use crate::transport::{CurvePath, PathSample};

pub struct SurfaceGeodesic {
    pub t: Vec<f64>,
    pub uv: Vec<(f64, f64)>,
    pub velocity: Vec<(f64, f64)>,
    /// ambient lift of the patch geodesic
    pub path: CurvePath,
    /// |nabla_T T|_g of the lift (ambient geodesic residual; equals the
    /// normal curvature magnitude for a true surface geodesic)
    pub ambient_kappa: Vec<f64>,
    /// Frenet data of the lift where its curvature stays above the frame
    /// threshold; None when the lift is an ambient geodesic
    pub frenet: Option<FrenetData>,
}

struct VecGrid {
    comps: [GridField; 3],
}

impl VecGrid {
    fn new(patch: &RuledPatch, data: &[Vec3]) -> Self {
        let (nu, nv) = (patch.nu(), patch.nv());
        let (u0, v0) = (patch.u[0], patch.v[0]);
        let (du, dv) = (patch.du(), patch.dv());
        let comp = |c: usize| {
            GridField::new(
                nu,
                nv,
                u0,
                v0,
                du,
                dv,
                data.iter().map(|w| w[c]).collect(),
            )
        };
        Self {
            comps: [comp(0), comp(1), comp(2)],
        }
    }

    fn eval(&self, u: f64, v: f64) -> Vec3 {
        [
            self.comps[0].eval(u, v).0,
            self.comps[1].eval(u, v).0,
            self.comps[2].eval(u, v).0,
        ]
    }
}

struct ScalarGrid {
    field: GridField,
}

impl ScalarGrid {
    fn new(patch: &RuledPatch, data: &[f64]) -> Self {
        Self {
            field: GridField::new(
                patch.nu(),
                patch.nv(),
                patch.u[0],
                patch.v[0],
                patch.du(),
                patch.dv(),
                data.to_vec(),
            ),
        }
    }

    fn eval(&self, u: f64, v: f64) -> (f64, f64, f64) {
        self.field.eval(u, v)
    }
}

/// Integrate a geodesic of the patch metric from `start` in patch direction
/// `dir` (normalized in the induced metric) for the given arc length.
pub fn surface_geodesic(
    patch: &RuledPatch,
    start: (f64, f64),
    dir: (f64, f64),
    length: f64,
    settings: &IntegratorSettings,
    ds_out: f64,
) -> Result<SurfaceGeodesic> {
    let forms = patch.forms()?;
    let (nu, nv) = (patch.nu(), patch.nv());
    if nu < 5 || nv < 5 {
        return Err(Error::DegeneratePatch(
            "patch geodesics need at least a 5x5 grid".into(),
        ));
    }
    let (du, dv) = (patch.du(), patch.dv());

    // patch Christoffel symbols at the nodes from differenced metric fields
    let dg = {
        let du_g = [
            fields::deriv_u(&forms.g11, nu, nv, du),
            fields::deriv_u(&forms.g12, nu, nv, du),
            fields::deriv_u(&forms.g22, nu, nv, du),
        ];
        let dv_g = [
            fields::deriv_v(&forms.g11, nu, nv, dv),
            fields::deriv_v(&forms.g12, nu, nv, dv),
            fields::deriv_v(&forms.g22, nu, nv, dv),
        ];
        [du_g, dv_g]
    };
    // christoffel[a][b][c] as six independent node fields (b <= c)
    let g_at = |i: usize| {
        [
            [forms.g11[i], forms.g12[i]],
            [forms.g12[i], forms.g22[i]],
        ]
    };
    let dg_at = |m: usize, i: usize| {
        [
            [dg[m][0][i], dg[m][1][i]],
            [dg[m][1][i], dg[m][2][i]],
        ]
    };
    let n_nodes = nu * nv;
    let mut gamma_nodes = vec![[[0.0f64; 2]; 3]; n_nodes]; // [node][{11,12,22}][a]
    for i in 0..n_nodes {
        let g = g_at(i);
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let ginv = [
            [g[1][1] / det, -g[0][1] / det],
            [-g[1][0] / det, g[0][0] / det],
        ];
        let d0 = dg_at(0, i);
        let d1 = dg_at(1, i);
        let dgm = [d0, d1];
        for (slot, (b, c)) in [(0usize, 0usize), (0, 1), (1, 1)].iter().enumerate() {
            for a in 0..2 {
                let mut acc = 0.0;
                for d in 0..2 {
                    acc += ginv[a][d] * (dgm[*b][*c][d] + dgm[*c][*b][d] - dgm[d][*b][*c]);
                }
                gamma_nodes[i][slot][a] = 0.5 * acc;
            }
        }
    }
    let gamma_grid: Vec<ScalarGrid> = (0..6)
        .map(|k| {
            let (slot, a) = (k / 2, k % 2);
            let data: Vec<f64> = (0..n_nodes).map(|i| gamma_nodes[i][slot][a]).collect();
            ScalarGrid::new(patch, &data)
        })
        .collect();
    // gamma(u, v) -> values and (d/du, d/dv) of all six components
    let gamma_eval = |u: f64, v: f64| -> ([[f64; 2]; 3], [[f64; 2]; 3], [[f64; 2]; 3]) {
        let mut val = [[0.0; 2]; 3];
        let mut gu = [[0.0; 2]; 3];
        let mut gv = [[0.0; 2]; 3];
        for k in 0..6 {
            let (slot, a) = (k / 2, k % 2);
            let (f, d_u, d_v) = gamma_grid[k].eval(u, v);
            val[slot][a] = f;
            gu[slot][a] = d_u;
            gv[slot][a] = d_v;
        }
        (val, gu, gv)
    };
    let accel = |gam: &[[f64; 2]; 3], udot: f64, vdot: f64| -> (f64, f64) {
        let q = [
            udot * udot,
            2.0 * udot * vdot,
            vdot * vdot,
        ];
        let mut a0 = 0.0;
        let mut a1 = 0.0;
        for slot in 0..3 {
            a0 += gam[slot][0] * q[slot];
            a1 += gam[slot][1] * q[slot];
        }
        (-a0, -a1)
    };

    // normalize the initial direction in the interpolated induced metric
    let g11_grid = ScalarGrid::new(patch, &forms.g11);
    let g12_grid = ScalarGrid::new(patch, &forms.g12);
    let g22_grid = ScalarGrid::new(patch, &forms.g22);
    let speed2 = |u: f64, v: f64, ud: f64, vd: f64| {
        g11_grid.eval(u, v).0 * ud * ud
            + 2.0 * g12_grid.eval(u, v).0 * ud * vd
            + g22_grid.eval(u, v).0 * vd * vd
    };
    let s0 = speed2(start.0, start.1, dir.0, dir.1);
    if s0 < 1e-14 {
        return Err(Error::ZeroVector);
    }
    let inv = 1.0 / s0.sqrt();
    let y0 = [start.0, start.1, dir.0 * inv, dir.1 * inv];

    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let inside = gamma_grid[0].field.contains(y[0], y[1]);
        if !inside {
            dy.iter_mut().for_each(|d| *d = 0.0);
            dy[0] = y[2];
            dy[1] = y[3];
            return;
        }
        let (gam, _, _) = gamma_eval(y[0], y[1]);
        let (a0, a1) = accel(&gam, y[2], y[3]);
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = a0;
        dy[3] = a1;
    };
    let guard = |y: &[f64]| gamma_grid[0].field.contains(y[0], y[1]);

    let grid = ode::uniform_grid(0.0, length, ds_out);
    let res = ode::integrate_on_grid(rhs, &grid, &y0, settings, guard)?;
    if let Some(t_stop) = res.truncated {
        let last = res.states.last().unwrap();
        return Err(Error::LeftPatch { t: t_stop, u: last[0], v: last[1] });
    }

    // lift fields
    let p_grid = VecGrid::new(patch, &patch.p);
    let xu_grid = VecGrid::new(patch, &patch.xu);
    let xv_grid = VecGrid::new(patch, &patch.xv);
    let f1_grid = VecGrid::new(patch, &forms.f1);
    let f2_grid = VecGrid::new(patch, &forms.f2);
    let f3_grid = VecGrid::new(patch, &forms.f3);
    let du_f = [
        VecGrid::new(patch, &fields::deriv_u_vec(&forms.f1, nu, nv, du)),
        VecGrid::new(patch, &fields::deriv_u_vec(&forms.f2, nu, nv, du)),
        VecGrid::new(patch, &fields::deriv_u_vec(&forms.f3, nu, nv, du)),
    ];
    let dv_f = [
        VecGrid::new(patch, &fields::deriv_v_vec(&forms.f1, nu, nv, dv)),
        VecGrid::new(patch, &fields::deriv_v_vec(&forms.f2, nu, nv, dv)),
        VecGrid::new(patch, &fields::deriv_v_vec(&forms.f3, nu, nv, dv)),
    ];

    let m = patch.manifold();
    let npts = res.times.len();
    let mut uv = Vec::with_capacity(npts);
    let mut velocity = Vec::with_capacity(npts);
    let mut samples = Vec::with_capacity(npts);
    let mut kappa = vec![0.0; npts];
    let mut tau = vec![0.0; npts];
    let mut t_field = vec![[0.0; 3]; npts];
    let mut n_field = vec![[0.0; 3]; npts];
    let mut b_field = vec![[0.0; 3]; npts];
    let mut frame_ok = true;

    for (k, y) in res.states.iter().enumerate() {
        let (u, v, udot, vdot) = (y[0], y[1], y[2], y[3]);
        uv.push((u, v));
        velocity.push((udot, vdot));
        let p = p_grid.eval(u, v);
        let xu = xu_grid.eval(u, v);
        let xv = xv_grid.eval(u, v);
        let f1 = f1_grid.eval(u, v);
        let f2 = f2_grid.eval(u, v);
        let f3 = f3_grid.eval(u, v);
        let tangent = linalg::add(linalg::scale(xu, udot), linalg::scale(xv, vdot));
        samples.push(PathSample { s: res.times[k], p, t: tangent });

        let data = m.metric_data(p)?;
        let gamma_amb = m.christoffel_at(p)?;
        let (gam, gam_u, gam_v) = gamma_eval(u, v);
        let (uddot, vddot) = accel(&gam, udot, vdot);

        // A = nabla_T T
        let mut a_vec = linalg::scale(f1, udot * udot);
        a_vec = linalg::axpy(a_vec, 2.0 * udot * vdot, f2);
        a_vec = linalg::axpy(a_vec, vdot * vdot, f3);
        a_vec = linalg::axpy(a_vec, uddot, xu);
        a_vec = linalg::axpy(a_vec, vddot, xv);
        let k_amb = linalg::norm_g(&data.g, a_vec);
        kappa[k] = k_amb;
        t_field[k] = tangent;
        if k_amb < crate::frenet::KAPPA_MIN {
            frame_ok = false;
            continue;
        }

        // third u, v derivatives from the differentiated 2D geodesic equation
        let mut gam_dot = [[0.0; 2]; 3];
        for slot in 0..3 {
            for a in 0..2 {
                gam_dot[slot][a] = gam_u[slot][a] * udot + gam_v[slot][a] * vdot;
            }
        }
        let (da0, da1) = accel(&gam_dot, udot, vdot);
        // Gamma(q1, q2)^a = G^a_11 u1 u2 + G^a_12 (u1 v2 + v1 u2) + G^a_22 v1 v2
        let gamma_bl = |gm: &[[f64; 2]; 3], a_idx: usize, q1: (f64, f64), q2: (f64, f64)| {
            gm[0][a_idx] * q1.0 * q2.0
                + gm[1][a_idx] * (q1.0 * q2.1 + q1.1 * q2.0)
                + gm[2][a_idx] * q1.1 * q2.1
        };
        let udddot = da0 - 2.0 * gamma_bl(&gam, 0, (uddot, vddot), (udot, vdot));
        let vdddot = da1 - 2.0 * gamma_bl(&gam, 1, (uddot, vddot), (udot, vdot));

        // covariant derivative of the patch fields along the curve
        let nabla_t = |field_val: Vec3, duf: Vec3, dvf: Vec3| -> Vec3 {
            let mut out = linalg::scale(duf, udot);
            out = linalg::axpy(out, vdot, dvf);
            let gxu = gamma_amb.contract(xu, field_val);
            let gxv = gamma_amb.contract(xv, field_val);
            out = linalg::axpy(out, udot, gxu);
            out = linalg::axpy(out, vdot, gxv);
            out
        };
        let nt_f1 = nabla_t(f1, du_f[0].eval(u, v), dv_f[0].eval(u, v));
        let nt_f2 = nabla_t(f2, du_f[1].eval(u, v), dv_f[1].eval(u, v));
        let nt_f3 = nabla_t(f3, du_f[2].eval(u, v), dv_f[2].eval(u, v));

        // nabla_T A
        let mut na = linalg::scale(nt_f1, udot * udot);
        na = linalg::axpy(na, 2.0 * udot * vdot, nt_f2);
        na = linalg::axpy(na, vdot * vdot, nt_f3);
        na = linalg::axpy(na, 2.0 * udot * uddot, f1);
        na = linalg::axpy(na, 2.0 * (uddot * vdot + udot * vddot), f2);
        na = linalg::axpy(na, 2.0 * vdot * vddot, f3);
        na = linalg::axpy(na, udddot, xu);
        na = linalg::axpy(na, vdddot, xv);
        // nabla_T Xu = udot F1 + vdot F2; nabla_T Xv = udot F2 + vdot F3
        let ntxu = linalg::add(linalg::scale(f1, udot), linalg::scale(f2, vdot));
        let ntxv = linalg::add(linalg::scale(f2, udot), linalg::scale(f3, vdot));
        na = linalg::axpy(na, uddot, ntxu);
        na = linalg::axpy(na, vddot, ntxv);

        let n_vec = linalg::scale(a_vec, 1.0 / k_amb);
        n_field[k] = n_vec;
        b_field[k] = linalg::cross_g(&data.g, &data.inv, tangent, n_vec);
        tau[k] = linalg::vol_g(&data.g, tangent, a_vec, na) / (k_amb * k_amb);
    }

    let path = CurvePath::from_samples(samples);
    if npts < 5 {
        frame_ok = false;
    }
    let frenet = if frame_ok {
        Some(FrenetData::from_parts(
            res.times.clone(),
            t_field,
            n_field,
            b_field,
            kappa.clone(),
            tau,
        ))
    } else {
        None
    };
    Ok(SurfaceGeodesic {
        t: res.times,
        uv,
        velocity,
        path,
        ambient_kappa: kappa,
        frenet,
    })
}
