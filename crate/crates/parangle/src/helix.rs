//! Synthesis of curves with prescribed curvature and torsion, construction of
//! parallel generalized and slant helices with their transported axes, and
//! classification of measured curves.
//!
//! The coupled system gamma' = T, nabla_T T = kappa N, nabla_T N = -kappa T +
//! tau B, nabla_T B = -tau N is integrated as one ODE in chart components,
//! with initial conditions at s = 0 and the range split into a backward and a
//! forward arm on a shared uniform grid.

use crate::error::{Error, Result};
use crate::frenet::{self, FrenetData};
use crate::linalg::{self, Vec3};
use crate::manifold::ManifoldDescriptor;
use crate::ode::{self, IntegratorSettings};
use crate::transport::{CurvePath, PathSample};

/// Margin kept before the singular endpoints of the slant torsion law; the
/// achieved domain stops where |sigma K - c0| reaches 1 - MARGIN (up to one
/// grid cell of inward snapping).
pub const SLANT_STOP_MARGIN: f64 = 1.2e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    Generalized,
    Slant,
}

/// Named curvature profiles with exact antiderivatives, so the slant torsion
/// law can use the accumulated K(u) without interpolation error.
#[derive(Debug, Clone)]
pub enum KappaProfile {
    Constant(f64),
    Sinusoidal { base: f64, amp: f64, freq: f64, phase: f64 },
    Polynomial(Vec<f64>),
}

impl KappaProfile {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Self::Constant(a) => *a,
            Self::Sinusoidal { base, amp, freq, phase } => base + amp * (freq * u + phase).sin(),
            Self::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * u + ck),
        }
    }

    /// K(u) = integral of kappa from 0 to u, in closed form.
    pub fn integral(&self, u: f64) -> f64 {
        match self {
            Self::Constant(a) => a * u,
            Self::Sinusoidal { base, amp, freq, phase } => {
                base * u - amp / freq * ((freq * u + phase).cos() - phase.cos())
            }
            Self::Polynomial(c) => {
                let mut acc = 0.0;
                for (k, &ck) in c.iter().enumerate().rev() {
                    acc = acc * u + ck / (k as f64 + 1.0);
                }
                acc * u
            }
        }
    }

    pub fn max_on(&self, lo: f64, hi: f64) -> f64 {
        (0..=1000)
            .map(|i| self.eval(lo + (hi - lo) * i as f64 / 1000.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_on(&self, lo: f64, hi: f64) -> f64 {
        (0..=1000)
            .map(|i| self.eval(lo + (hi - lo) * i as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Specification of a helix construction, read from configuration or built
/// programmatically.
#[derive(Debug, Clone)]
pub struct HelixSpec {
    pub kind: AxisKind,
    pub theta: f64,
    pub kappa: KappaProfile,
    /// torsion offset constant of the slant law (|c0| < 1); ignored for
    /// generalized helices
    pub c0: f64,
    /// torsion sign branch of the slant law
    pub sign: f64,
    pub base: Option<Vec3>,
    pub frame0: Option<[Vec3; 3]>,
}

/// A unit axis field along a curve together with its transport residual.
#[derive(Debug, Clone)]
pub struct AxisField {
    pub kind: AxisKind,
    pub theta: f64,
    pub v: Vec<Vec3>,
    /// nabla_T V at every sample (measured, not assumed zero)
    pub nabla_t_v: Vec<Vec3>,
    /// |nabla_T V|_g at every sample
    pub residual: Vec<f64>,
}

impl AxisField {
    pub fn sup_residual(&self) -> f64 {
        self.residual.iter().fold(0.0f64, |m, &r| m.max(r))
    }
}

fn validate_frame(
    m: &ManifoldDescriptor,
    p0: Vec3,
    frame0: Option<&[Vec3; 3]>,
) -> Result<[Vec3; 3]> {
    let frame = match frame0 {
        Some(f) => *f,
        None => m.orthonormal_frame(p0)?,
    };
    let data = m.metric_data(p0)?;
    let gram = linalg::gram(&data.g, &frame);
    let dev = linalg::gram_identity_deviation(&gram);
    if dev > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "initial frame is not orthonormal (Gram deviation {dev:e})"
        )));
    }
    if linalg::vol_g(&data.g, frame[0], frame[1], frame[2]) <= 0.0 {
        return Err(Error::InvalidInput(
            "initial frame must be positively oriented".into(),
        ));
    }
    Ok(frame)
}

/// Integrate the Frenet system for prescribed kappa(s) and tau(s) over
/// `s_range = (lo, hi)` with lo <= 0 <= hi; initial conditions sit at s = 0.
/// Endpoints are snapped outward to multiples of `ds` so both arms share one
/// uniform grid.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_curve(
    m: &ManifoldDescriptor,
    p0: Vec3,
    frame0: Option<&[Vec3; 3]>,
    kappa: &dyn Fn(f64) -> f64,
    tau: &dyn Fn(f64) -> f64,
    s_range: (f64, f64),
    settings: &IntegratorSettings,
    ds: f64,
) -> Result<(CurvePath, FrenetData)> {
    let (lo, hi) = s_range;
    if lo > 0.0 || hi < 0.0 || hi <= lo {
        return Err(Error::InvalidInput(format!(
            "s range must satisfy lo <= 0 <= hi and lo < hi, got ({lo}, {hi})"
        )));
    }
    let frame = validate_frame(m, p0, frame0)?;
    let n_back = (-lo / ds).ceil() as usize;
    let n_fwd = (hi / ds).ceil().max(1.0) as usize;

    // positivity of the prescribed curvature over the whole range
    for i in 0..=(n_back + n_fwd) {
        let s = -(n_back as f64) * ds + i as f64 * ds;
        let k = kappa(s);
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidInput(format!(
                "prescribed curvature must be positive and finite, kappa({s}) = {k}"
            )));
        }
    }

    let dim = m.dim();
    let mut y0 = vec![0.0; 4 * dim];
    y0[..dim].copy_from_slice(&p0[..dim]);
    for (slot, vec) in frame.iter().enumerate() {
        y0[(slot + 1) * dim..(slot + 2) * dim].copy_from_slice(&vec[..dim]);
    }

    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| {
        let mut p = [0.0; 3];
        p[..dim].copy_from_slice(&y[..dim]);
        let mut t = [0.0; 3];
        t[..dim].copy_from_slice(&y[dim..2 * dim]);
        let mut nv = [0.0; 3];
        nv[..dim].copy_from_slice(&y[2 * dim..3 * dim]);
        let mut b = [0.0; 3];
        b[..dim].copy_from_slice(&y[3 * dim..4 * dim]);
        let k = kappa(s);
        let tt = tau(s);
        let gamma = m.christoffel_at(p).ok();
        let corr = |v: Vec3| -> Vec3 {
            match &gamma {
                Some(c) => c.contract(t, v),
                None => [0.0; 3],
            }
        };
        let ct = corr(t);
        let cn = corr(nv);
        let cb = corr(b);
        for i in 0..dim {
            dy[i] = t[i];
            dy[dim + i] = k * nv[i] - ct[i];
            dy[2 * dim + i] = -k * t[i] + tt * b[i] - cn[i];
            dy[3 * dim + i] = -tt * nv[i] - cb[i];
        }
    };
    let guard = |y: &[f64]| {
        let mut p = [0.0; 3];
        p[..dim].copy_from_slice(&y[..dim]);
        m.contains(p)
    };

    let mut fwd_arm: Option<ode::OdeResult> = None;
    let mut back_arm: Option<ode::OdeResult> = None;
    let mut truncated_at: Option<f64> = None;
    if n_fwd > 0 {
        let grid: Vec<f64> = (0..=n_fwd).map(|i| i as f64 * ds).collect();
        let res = ode::integrate_on_grid(&rhs, &grid, &y0, settings, guard)?;
        truncated_at = truncated_at.or(res.truncated);
        fwd_arm = Some(res);
    }
    if n_back > 0 {
        let grid: Vec<f64> = (0..=n_back).map(|i| -(i as f64) * ds).collect();
        let res = ode::integrate_on_grid(&rhs, &grid, &y0, settings, guard)?;
        truncated_at = truncated_at.or(res.truncated);
        back_arm = Some(res);
    }

    // merge: reversed backward arm (dropping its s = 0 node) + forward arm
    let mut samples: Vec<PathSample> = Vec::with_capacity(n_back + n_fwd + 1);
    let mut frames_n: Vec<Vec3> = Vec::new();
    let mut frames_b: Vec<Vec3> = Vec::new();
    let mut stats = ode::OdeStats::default();
    {
        let mut push_state = |s: f64, y: &[f64]| {
            let take = |a: usize| {
                let mut v = [0.0; 3];
                v[..dim].copy_from_slice(&y[a * dim..(a + 1) * dim]);
                v
            };
            samples.push(PathSample { s, p: take(0), t: take(1) });
            frames_n.push(take(2));
            frames_b.push(take(3));
        };
        if let Some(back) = &back_arm {
            for i in (1..back.times.len()).rev() {
                push_state(back.times[i], &back.states[i]);
            }
        }
        if let Some(fwd) = &fwd_arm {
            for i in 0..fwd.times.len() {
                push_state(fwd.times[i], &fwd.states[i]);
            }
        }
    }
    for arm in [&fwd_arm, &back_arm].into_iter().flatten() {
        stats.accepted += arm.stats.accepted;
        stats.rejected += arm.stats.rejected;
        stats.rhs_evals += arm.stats.rhs_evals;
    }

    if samples.len() < 2 {
        return Err(Error::StepFailure { s: 0.0, h: ds });
    }
    let mut path = CurvePath::from_samples(samples);
    path.stats = stats;
    if let Some(s) = truncated_at {
        path.left_chart = true;
        return Err(Error::LeftChart { s, partial: Box::new(path) });
    }

    let s_grid = path.grid();
    let kappa_samples: Vec<f64> = s_grid.iter().map(|&s| kappa(s)).collect();
    let tau_samples: Vec<f64> = s_grid.iter().map(|&s| tau(s)).collect();
    let fdat = FrenetData::from_parts(
        s_grid,
        path.tangents(),
        frames_n,
        frames_b,
        kappa_samples,
        tau_samples,
    );
    Ok((path, fdat))
}

/// Frame-formula axis with its measured transport residual.
pub fn axis_field(
    kind: AxisKind,
    m: &ManifoldDescriptor,
    path: &CurvePath,
    fdat: &FrenetData,
    theta: f64,
) -> Result<AxisField> {
    let n = fdat.len();
    if fdat.kappa.iter().any(|&k| k < frenet::KAPPA_MIN) {
        let lo = fdat.kappa.iter().position(|&k| k < frenet::KAPPA_MIN).unwrap();
        let hi = fdat.kappa.iter().rposition(|&k| k < frenet::KAPPA_MIN).unwrap();
        return Err(Error::KappaVanishes {
            s_lo: fdat.s[lo],
            s_hi: fdat.s[hi],
            threshold: frenet::KAPPA_MIN,
        });
    }
    let (c, s) = (theta.cos(), theta.sin());
    let v: Vec<Vec3> = (0..n)
        .map(|i| match kind {
            AxisKind::Generalized => linalg::add(
                linalg::scale(fdat.t[i], c),
                linalg::scale(fdat.b[i], s),
            ),
            AxisKind::Slant => linalg::add(
                linalg::scale(fdat.n[i], c),
                linalg::scale(fdat.darboux[i], s),
            ),
        })
        .collect();
    let nabla = frenet::covariant_derivative_along(m, path, &v)?;
    let mut residual = Vec::with_capacity(n);
    for (i, q) in path.samples().iter().enumerate() {
        residual.push(m.norm(q.p, nabla[i])?);
    }
    Ok(AxisField { kind, theta, v, nabla_t_v: nabla, residual })
}

/// Build a parallel generalized helix: torsion cot(theta) * kappa, axis
/// cos(theta) T + sin(theta) B.
#[allow(clippy::too_many_arguments)]
pub fn make_generalized_helix(
    m: &ManifoldDescriptor,
    p0: Vec3,
    frame0: Option<&[Vec3; 3]>,
    kappa: &dyn Fn(f64) -> f64,
    theta: f64,
    s_range: (f64, f64),
    settings: &IntegratorSettings,
    ds: f64,
) -> Result<(CurvePath, FrenetData, AxisField)> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::InvalidInput(format!(
            "generalized helix angle must lie in (0, pi), got {theta}"
        )));
    }
    let cot = theta.cos() / theta.sin();
    let tau = |s: f64| cot * kappa(s);
    let (path, fdat) = synthesize_curve(m, p0, frame0, kappa, &tau, s_range, settings, ds)?;
    let axis = axis_field(AxisKind::Generalized, m, &path, &fdat, theta)?;
    Ok((path, fdat, axis))
}

/// Result of a slant-helix synthesis: the achieved domain reports where the
/// torsion law stayed inside its margin.
#[derive(Debug)]
pub struct SlantHelix {
    pub path: CurvePath,
    pub frenet: FrenetData,
    pub axis: AxisField,
    pub domain: (f64, f64),
}

/// Build a parallel slant helix from a curvature profile, via the torsion law
/// tau = sign * kappa (sigma K - c0) / sqrt(1 - (sigma K - c0)^2) with
/// sigma = cot(theta). Integration stops one margin before the law's
/// singular endpoints; the achieved domain is returned.
pub fn make_slant_helix(
    m: &ManifoldDescriptor,
    spec: &HelixSpec,
    u_range: (f64, f64),
    settings: &IntegratorSettings,
    ds: f64,
) -> Result<SlantHelix> {
    let theta = spec.theta;
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidInput(format!(
            "slant helix angle must lie in (0, pi/2), got {theta}"
        )));
    }
    if spec.c0.abs() >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "slant offset must satisfy |c0| < 1, got {}",
            spec.c0
        )));
    }
    if spec.sign != 1.0 && spec.sign != -1.0 {
        return Err(Error::InvalidInput("slant sign branch must be +-1".into()));
    }
    let sigma = theta.cos() / theta.sin();
    let c0 = spec.c0;
    let kp = &spec.kappa;
    let (req_lo, req_hi) = u_range;
    if req_lo > 0.0 || req_hi < 0.0 || req_lo >= req_hi {
        return Err(Error::InvalidInput(format!(
            "u range must bracket 0, got ({req_lo}, {req_hi})"
        )));
    }
    if kp.min_on(req_lo, req_hi) <= 0.0 {
        return Err(Error::InvalidInput(
            "curvature profile must stay positive on the requested range".into(),
        ));
    }

    let x = |u: f64| sigma * kp.integral(u) - c0;
    let target = 1.0 - SLANT_STOP_MARGIN;

    // x is strictly increasing (sigma > 0, kappa > 0): bisect for x = +-target
    let solve = |value: f64, search_hi: f64| -> Option<f64> {
        let (mut a, mut b) = (0.0, search_hi);
        if (x(a) - value) * (x(b) - value) > 0.0 {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if (x(a) - value) * (x(mid) - value) <= 0.0 {
                b = mid;
            } else {
                a = mid;
            }
        }
        Some(0.5 * (a + b))
    };
    let search = 8.0 * (req_hi - req_lo).abs().max(1.0) + 64.0;
    let margin_hi = solve(target, search).unwrap_or(f64::INFINITY);
    let margin_lo = solve(-target, -search).unwrap_or(f64::NEG_INFINITY);

    if c0.abs() >= target {
        return Err(Error::DomainExhausted { u_lo: margin_lo, u_hi: margin_hi });
    }
    let ach_lo = req_lo.max(margin_lo);
    let ach_hi = req_hi.min(margin_hi);

    // Grid step: fine enough that differencing tau/kappa near the margin
    // keeps the measured sigma within ~1e-5 of its constant value.
    let x_max = x(ach_hi).abs().max(x(ach_lo).abs()).min(target);
    let kmax = kp.max_on(ach_lo, ach_hi);
    let h = ds
        .min(0.0316 * (1.0 - x_max * x_max) / (sigma * kmax))
        .max(1e-6);
    let n_back = (-ach_lo / h).floor() as usize;
    let n_fwd = (ach_hi / h).floor() as usize;
    if n_back + n_fwd < 8 {
        return Err(Error::DomainExhausted { u_lo: margin_lo, u_hi: margin_hi });
    }
    let lo = -(n_back as f64) * h;
    let hi = n_fwd as f64 * h;

    let kappa_fn = |u: f64| kp.eval(u);
    let tau_fn = |u: f64| {
        let xv = x(u).clamp(-target, target);
        spec.sign * kp.eval(u) * xv / (1.0 - xv * xv).sqrt()
    };
    let base = spec.base.unwrap_or_else(|| m.canonical_base_point());
    let (path, fdat) = synthesize_curve(
        m,
        base,
        spec.frame0.as_ref(),
        &kappa_fn,
        &tau_fn,
        (lo, hi),
        settings,
        h,
    )?;
    let axis = axis_field(AxisKind::Slant, m, &path, &fdat, theta)?;
    Ok(SlantHelix { path, frenet: fdat, axis, domain: (lo, hi) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveClass {
    Geodesic,
    GeneralizedHelix,
    SlantHelix,
    Generic,
}

/// Classification record; residuals are always reported.
#[derive(Debug, Clone)]
pub struct Classification {
    pub class: CurveClass,
    pub theta: Option<f64>,
    pub res_geodesic: f64,
    pub res_generalized: f64,
    pub res_slant: f64,
}

fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Classify measured Frenet data as geodesic, generalized helix, slant helix,
/// or generic, using median-based sup residuals.
pub fn classify_curve(fdat: &FrenetData, tol: f64) -> Classification {
    let sup_kappa = fdat.kappa.iter().fold(0.0f64, |m, &k| m.max(k.abs()));
    let ratio: Vec<f64> = fdat
        .kappa
        .iter()
        .zip(fdat.tau.iter())
        .map(|(&k, &t)| t / k.max(1e-300))
        .collect();
    let med_ratio = median(&ratio);
    let res_generalized = ratio
        .iter()
        .fold(0.0f64, |m, &r| m.max((r - med_ratio).abs()));
    let med_sigma = median(&fdat.sigma);
    let res_slant = fdat
        .sigma
        .iter()
        .fold(0.0f64, |m, &s| m.max((s - med_sigma).abs()));

    let (class, theta) = if sup_kappa < tol {
        (CurveClass::Geodesic, None)
    } else if res_generalized < tol {
        (CurveClass::GeneralizedHelix, Some(f64::atan2(1.0, med_ratio)))
    } else if res_slant < tol {
        (CurveClass::SlantHelix, Some(f64::atan2(1.0, med_sigma)))
    } else {
        (CurveClass::Generic, None)
    };
    Classification {
        class,
        theta,
        res_geodesic: sup_kappa,
        res_generalized,
        res_slant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frenet::frenet_apparatus;
    use crate::transport::parallel_transport;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn settings() -> IntegratorSettings {
        IntegratorSettings::default()
    }

    #[test]
    fn flat_constant_curvature_round_trip() {
        let m = ManifoldDescriptor::euclidean3();
        let (path, fdat) = synthesize_curve(
            &m,
            [0.0; 3],
            None,
            &|_| 0.5,
            &|_| 0.5,
            (0.0, 12.0),
            &settings(),
            0.005,
        )
        .unwrap();
        let measured = frenet_apparatus(&m, &path).unwrap();
        for i in 0..measured.len() {
            assert!((measured.kappa[i] - fdat.kappa[i]).abs() < 1e-5);
            assert!((measured.tau[i] - fdat.tau[i]).abs() < 1e-5);
        }
    }

    #[test]
    fn frame_gram_drift_stays_small_over_long_arcs() {
        let m = ManifoldDescriptor::sphere3(1.0).unwrap();
        let (path, fdat) = synthesize_curve(
            &m,
            m.canonical_base_point(),
            None,
            &|s: f64| 1.0 + 0.2 * s.sin(),
            &|s: f64| 0.3 * (0.5 * s).cos(),
            (0.0, 20.0),
            &settings(),
            0.01,
        )
        .unwrap();
        let dev = fdat.frame_gram_deviation(&m, &path).unwrap();
        assert!(dev < 1e-5, "gram drift {dev:e}");
    }

    #[test]
    fn generalized_helix_right_angle_degenerates_to_plane_curve() {
        let m = ManifoldDescriptor::euclidean3();
        let (path, fdat, axis) = make_generalized_helix(
            &m,
            [0.0; 3],
            None,
            &|_| 1.0,
            FRAC_PI_2,
            (0.0, 6.0),
            &settings(),
            0.005,
        )
        .unwrap();
        for i in 0..fdat.len() {
            assert!(fdat.tau[i].abs() < 1e-14);
            // V = B exactly at theta = pi/2
            assert!(linalg::norm_euclid(linalg::sub(axis.v[i], fdat.b[i])) < 1e-12);
            let g = m.metric_at(path.samples()[i].p).unwrap().g;
            assert!(linalg::inner_g(&g, axis.v[i], fdat.t[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn sphere_helix_keeps_constant_angle_with_transported_axis() {
        let m = ManifoldDescriptor::sphere3(1.0).unwrap();
        let (path, _fdat, axis) = make_generalized_helix(
            &m,
            m.canonical_base_point(),
            None,
            &|s: f64| 1.0 + 0.3 * s.sin(),
            FRAC_PI_3,
            (0.0, 10.0),
            &settings(),
            0.01,
        )
        .unwrap();
        assert!(axis.sup_residual() < 1e-5, "axis residual {}", axis.sup_residual());
        let transported = parallel_transport(&m, &path, axis.v[0], &settings()).unwrap();
        for (i, q) in path.samples().iter().enumerate() {
            let angle_cos = m.inner(q.p, q.t, transported[i]).unwrap();
            assert!(
                (angle_cos - 0.5).abs() < 1e-5,
                "<T,V> = {angle_cos} at s = {}",
                q.s
            );
            // transported axis equals the frame-formula axis
            let gap = linalg::norm_euclid(linalg::sub(transported[i], axis.v[i]));
            assert!(gap < 1e-5, "axis transport gap {gap:e}");
        }
    }

    fn slant_spec(theta: f64, c0: f64, sign: f64) -> HelixSpec {
        HelixSpec {
            kind: AxisKind::Slant,
            theta,
            kappa: KappaProfile::Constant(1.0),
            c0,
            sign,
            base: None,
            frame0: None,
        }
    }

    #[test]
    fn slant_torsion_law_matches_closed_form() {
        // kappa = 1, c0 = 0, theta = pi/4: sigma = 1, tau(u) = u/sqrt(1-u^2)
        let m = ManifoldDescriptor::euclidean3();
        let helix =
            make_slant_helix(&m, &slant_spec(FRAC_PI_4, 0.0, 1.0), (-2.0, 2.0), &settings(), 0.01)
                .unwrap();
        for (i, &u) in helix.frenet.s.iter().enumerate() {
            let expect = u / (1.0 - u * u).sqrt();
            assert!(
                (helix.frenet.tau[i] - expect).abs() < 1e-9,
                "tau({u}) = {} vs {expect}",
                helix.frenet.tau[i]
            );
        }
        // margin contract: |sigma K - c0| lands in [1 - 2e-3, 1 - 5e-4]
        let (lo, hi) = helix.domain;
        for endpoint in [lo.abs(), hi] {
            assert!(
                (0.998..=0.9995).contains(&endpoint),
                "achieved endpoint {endpoint}"
            );
        }
    }

    #[test]
    fn slant_sign_branches_mirror_torsion() {
        let m = ManifoldDescriptor::euclidean3();
        let plus =
            make_slant_helix(&m, &slant_spec(FRAC_PI_3, 0.2, 1.0), (-1.5, 1.5), &settings(), 0.01)
                .unwrap();
        let minus =
            make_slant_helix(&m, &slant_spec(FRAC_PI_3, 0.2, -1.0), (-1.5, 1.5), &settings(), 0.01)
                .unwrap();
        assert_eq!(plus.frenet.len(), minus.frenet.len());
        for i in 0..plus.frenet.len() {
            assert!((plus.frenet.tau[i] + minus.frenet.tau[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn measured_sigma_is_constant_over_achieved_domain() {
        let m = ManifoldDescriptor::euclidean3();
        let theta = FRAC_PI_4;
        let helix =
            make_slant_helix(&m, &slant_spec(theta, 0.0, 1.0), (-2.0, 2.0), &settings(), 0.01)
                .unwrap();
        let sig = crate::frenet::sigma(&helix.frenet).unwrap();
        let cot = theta.cos() / theta.sin();
        let sup = sig.iter().fold(0.0f64, |m, &s| m.max((s - cot).abs()));
        assert!(sup < 1e-4, "sigma deviation {sup:e}");
        // the axis is transported: residual small over the whole domain
        assert!(
            helix.axis.sup_residual() < 1e-5,
            "axis residual {}",
            helix.axis.sup_residual()
        );
    }

    #[test]
    fn classification_round_trips() {
        let m = ManifoldDescriptor::euclidean3();
        let (_, fdat, _) = make_generalized_helix(
            &m,
            [0.0; 3],
            None,
            &|s: f64| 1.0 + 0.2 * (0.7 * s).cos(),
            FRAC_PI_3,
            (0.0, 8.0),
            &settings(),
            0.005,
        )
        .unwrap();
        let c = classify_curve(&fdat, 1e-3);
        assert_eq!(c.class, CurveClass::GeneralizedHelix);
        assert!((c.theta.unwrap() - FRAC_PI_3).abs() < 1e-4);

        let helix =
            make_slant_helix(&m, &slant_spec(FRAC_PI_4, 0.1, 1.0), (-1.5, 1.5), &settings(), 0.01)
                .unwrap();
        let c = classify_curve(&helix.frenet, 1e-3);
        assert_eq!(c.class, CurveClass::SlantHelix);
        assert!((c.theta.unwrap() - FRAC_PI_4).abs() < 1e-4);
    }

    #[test]
    fn linear_torsion_curve_is_generic() {
        let m = ManifoldDescriptor::euclidean3();
        let (_, fdat) = synthesize_curve(
            &m,
            [0.0; 3],
            None,
            &|_| 1.0,
            &|s| s,
            (0.0, 3.0),
            &settings(),
            0.002,
        )
        .unwrap();
        let c = classify_curve(&fdat, 1e-3);
        assert_eq!(c.class, CurveClass::Generic);
        assert!(c.res_generalized > 1e-2);
        assert!(c.res_slant > 1e-2);
    }

    #[test]
    fn perturbed_torsion_flips_classification() {
        let m = ManifoldDescriptor::euclidean3();
        let theta = FRAC_PI_3;
        let cot = theta.cos() / theta.sin();
        let kappa = |_: f64| 1.0;
        let tau = move |s: f64| cot + 0.05 * (0.5 * (1.0 + ((s - 4.0) / 0.2).tanh()));
        let (_, fdat) = synthesize_curve(
            &m,
            [0.0; 3],
            None,
            &kappa,
            &tau,
            (0.0, 8.0),
            &settings(),
            0.005,
        )
        .unwrap();
        let c = classify_curve(&fdat, 1e-3);
        assert_eq!(c.class, CurveClass::Generic);
        assert!(c.res_generalized > 1e-2);
    }

    #[test]
    fn axis_residual_matches_closed_form_for_non_helix() {
        // kappa = 1, tau = s with the slant frame formula: the residual norm
        // is |cos(theta) - sigma(s) sin(theta)| * omega(s)
        let m = ManifoldDescriptor::euclidean3();
        let theta = FRAC_PI_4;
        let (path, fdat) = synthesize_curve(
            &m,
            [0.0; 3],
            None,
            &|_| 1.0,
            &|s| s,
            (0.0, 3.0),
            &settings(),
            0.002,
        )
        .unwrap();
        let axis = axis_field(AxisKind::Slant, &m, &path, &fdat, theta).unwrap();
        let sig = crate::frenet::sigma(&fdat).unwrap();
        for i in 0..fdat.len() {
            let expect = (theta.cos() - sig[i] * theta.sin()).abs() * fdat.omega[i];
            assert!(
                (axis.residual[i] - expect).abs() < 1e-4,
                "residual {} vs closed form {expect}",
                axis.residual[i]
            );
        }
        // the residual factor has a root where cot(theta) = sigma
        let root_sigma = theta.cos() / theta.sin();
        let closest = sig
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - root_sigma)
                    .abs()
                    .partial_cmp(&(b.1 - root_sigma).abs())
                    .unwrap()
            })
            .unwrap()
            .0;
        assert!(axis.residual[closest] < 5e-2);
    }

    #[test]
    fn slant_domain_exhausted_for_extreme_offset() {
        let m = ManifoldDescriptor::euclidean3();
        let spec = slant_spec(FRAC_PI_4, 0.9992, 1.0);
        assert!(matches!(
            make_slant_helix(&m, &spec, (-1.0, 1.0), &settings(), 0.01),
            Err(Error::DomainExhausted { .. })
        ));
    }

    #[test]
    fn sinusoidal_profile_integral_is_exact() {
        let p = KappaProfile::Sinusoidal { base: 1.0, amp: 0.3, freq: 0.8, phase: 0.4 };
        let quad = |u: f64| {
            let n = 20000;
            let h = u / n as f64;
            (0..n)
                .map(|i| 0.5 * h * (p.eval(i as f64 * h) + p.eval((i + 1) as f64 * h)))
                .sum::<f64>()
        };
        for u in [0.5, 1.7, -2.3f64] {
            assert!((p.integral(u) - quad(u)).abs() < 1e-8);
        }
        let poly = KappaProfile::Polynomial(vec![1.0, 0.2, 0.05]);
        for u in [0.5, 1.3, -0.8f64] {
            let expect = u + 0.1 * u * u + 0.05 * u * u * u / 3.0;
            assert!((poly.integral(u) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonpositive_curvature_and_bad_ranges() {
        let m = ManifoldDescriptor::euclidean3();
        assert!(synthesize_curve(
            &m,
            [0.0; 3],
            None,
            &|s: f64| 1.0 - s,
            &|_| 0.0,
            (0.0, 3.0),
            &settings(),
            0.01
        )
        .is_err());
        assert!(synthesize_curve(
            &m,
            [0.0; 3],
            None,
            &|_| 1.0,
            &|_| 0.0,
            (1.0, 3.0),
            &settings(),
            0.01
        )
        .is_err());
        assert!(matches!(
            make_generalized_helix(&m, [0.0; 3], None, &|_| 1.0, PI, (0.0, 1.0), &settings(), 0.01),
            Err(Error::InvalidInput(_))
        ));
    }
}
