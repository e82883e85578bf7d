//! Geodesic integration, exponential maps, and parallel transport along
//! discretized curves.
//!
//! Curves are stored on a uniform arc-length grid whose nodes the integrator
//! hits exactly; between nodes positions interpolate by cubic Hermite from
//! (point, tangent) pairs. Unit speed is enforced once at the start and never
//! silently corrected afterwards, so speed drift remains a measurable
//! diagnostic.

use crate::error::{Error, Result};
use crate::linalg::{self, Vec3};
use crate::manifold::ManifoldDescriptor;
use crate::ode::{self, IntegratorSettings, OdeStats};
use std::collections::BTreeMap;

/// Default spacing of the recorded arc-length grid.
pub const DEFAULT_OUTPUT_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy)]
pub struct PathSample {
    pub s: f64,
    pub p: Vec3,
    pub t: Vec3,
}

/// A discretized arc-length-parametrized curve with optional attached vector
/// fields (e.g. a transported axis).
#[derive(Debug, Clone)]
pub struct CurvePath {
    samples: Vec<PathSample>,
    fields: BTreeMap<String, Vec<Vec3>>,
    pub left_chart: bool,
    pub stats: OdeStats,
}

impl CurvePath {
    pub fn from_samples(samples: Vec<PathSample>) -> Self {
        assert!(samples.len() >= 2, "a path needs at least two samples");
        debug_assert!(samples.windows(2).all(|w| w[1].s > w[0].s));
        Self {
            samples,
            fields: BTreeMap::new(),
            left_chart: false,
            stats: OdeStats::default(),
        }
    }

    /// Sample an analytic curve s -> (p(s), T(s)) on a uniform grid.
    pub fn from_fn(
        s_start: f64,
        s_end: f64,
        ds: f64,
        f: impl Fn(f64) -> (Vec3, Vec3),
    ) -> Self {
        let grid = ode::uniform_grid(s_start, s_end, ds);
        let samples = grid
            .iter()
            .map(|&s| {
                let (p, t) = f(s);
                PathSample { s, p, t }
            })
            .collect();
        Self::from_samples(samples)
    }

    pub fn samples(&self) -> &[PathSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn s_start(&self) -> f64 {
        self.samples[0].s
    }

    pub fn s_end(&self) -> f64 {
        self.samples[self.samples.len() - 1].s
    }

    pub fn grid(&self) -> Vec<f64> {
        self.samples.iter().map(|q| q.s).collect()
    }

    pub fn points(&self) -> Vec<Vec3> {
        self.samples.iter().map(|q| q.p).collect()
    }

    pub fn tangents(&self) -> Vec<Vec3> {
        self.samples.iter().map(|q| q.t).collect()
    }

    /// Uniform grid spacing; panics if the grid is not uniform to 1e-9.
    pub fn ds(&self) -> f64 {
        let ds = self.samples[1].s - self.samples[0].s;
        debug_assert!(self
            .samples
            .windows(2)
            .all(|w| ((w[1].s - w[0].s) - ds).abs() < 1e-9 * (1.0 + ds.abs())));
        ds
    }

    pub fn attach_field(&mut self, name: &str, field: Vec<Vec3>) {
        assert_eq!(field.len(), self.samples.len());
        self.fields.insert(name.to_string(), field);
    }

    pub fn field(&self, name: &str) -> Option<&[Vec3]> {
        self.fields.get(name).map(|v| v.as_slice())
    }

    pub fn fields(&self) -> &BTreeMap<String, Vec<Vec3>> {
        &self.fields
    }

    fn segment_of(&self, s: f64) -> usize {
        let n = self.samples.len();
        match self
            .samples
            .binary_search_by(|q| q.s.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.clamp(1, n - 1) - 1,
        }
    }

    /// Dense-output position at arc length s (cubic Hermite per segment).
    pub fn position(&self, s: f64) -> Vec3 {
        let i = self.segment_of(s);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.s - a.s;
        let u = ((s - a.s) / h).clamp(0.0, 1.0);
        let mut out = [0.0; 3];
        for c in 0..3 {
            out[c] = ode::hermite_eval(a.p[c], a.t[c], b.p[c], b.t[c], h, u).0;
        }
        out
    }

    /// Dense-output tangent at arc length s.
    pub fn tangent(&self, s: f64) -> Vec3 {
        let i = self.segment_of(s);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.s - a.s;
        let u = ((s - a.s) / h).clamp(0.0, 1.0);
        let mut out = [0.0; 3];
        for c in 0..3 {
            out[c] = ode::hermite_eval(a.p[c], a.t[c], b.p[c], b.t[c], h, u).1;
        }
        out
    }

    /// Largest deviation of |T|_g from 1 across samples.
    pub fn unit_speed_deviation(&self, m: &ManifoldDescriptor) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for q in &self.samples {
            let n = m.norm(q.p, q.t)?;
            worst = worst.max((n - 1.0).abs());
        }
        Ok(worst)
    }

    pub fn require_unit_speed(&self, m: &ManifoldDescriptor, tol: f64) -> Result<()> {
        for q in &self.samples {
            let n = m.norm(q.p, q.t)?;
            if (n - 1.0).abs() > tol {
                return Err(Error::NonUnitSpeed {
                    s: q.s,
                    deviation: (n - 1.0).abs(),
                });
            }
        }
        Ok(())
    }

    /// Chart-coordinate gap between endpoint and start (periodic-aware).
    pub fn closure_gap(&self, m: &ManifoldDescriptor) -> f64 {
        let a = self.samples[0].p;
        let b = self.samples[self.samples.len() - 1].p;
        m.chart_domain().chart_distance(a, b, m.dim())
    }
}

/// Integrate the geodesic equation x'' + Gamma(x)(x', x') = 0 from `p0` in
/// direction `v0` (renormalized once) up to arc length `s_max`, recording on
/// a uniform grid of spacing `output_step`.
pub fn integrate_geodesic(
    m: &ManifoldDescriptor,
    p0: Vec3,
    v0: Vec3,
    s_max: f64,
    settings: &IntegratorSettings,
    output_step: f64,
) -> Result<CurvePath> {
    let dim = m.dim();
    let norm = m.norm(p0, v0)?;
    if norm < 1e-12 {
        return Err(Error::ZeroVector);
    }
    let v = linalg::scale(v0, 1.0 / norm);
    if s_max == 0.0 {
        let mut samples = vec![PathSample { s: 0.0, p: p0, t: v }; 2];
        samples[1].s = 1e-12;
        return Ok(CurvePath::from_samples(samples));
    }

    let mut y0 = vec![0.0; 2 * dim];
    y0[..dim].copy_from_slice(&p0[..dim]);
    y0[dim..].copy_from_slice(&v[..dim]);

    let grid = ode::uniform_grid(0.0, s_max, output_step);
    let rhs = geodesic_rhs(m);
    let guard = |y: &[f64]| m.contains(state_point(y, dim));
    let res = ode::integrate_on_grid(rhs, &grid, &y0, settings, guard)?;

    let samples: Vec<PathSample> = res
        .times
        .iter()
        .zip(res.states.iter())
        .map(|(&s, y)| PathSample {
            s,
            p: state_point(y, dim),
            t: state_velocity(y, dim),
        })
        .collect();
    let mut path = CurvePath::from_samples(samples);
    path.stats = res.stats;
    if let Some(s) = res.truncated {
        path.left_chart = true;
        return Err(Error::LeftChart {
            s,
            partial: Box::new(path),
        });
    }
    Ok(path)
}

fn state_point(y: &[f64], dim: usize) -> Vec3 {
    let mut p = [0.0; 3];
    p[..dim].copy_from_slice(&y[..dim]);
    p
}

fn state_velocity(y: &[f64], dim: usize) -> Vec3 {
    let mut v = [0.0; 3];
    v[..dim].copy_from_slice(&y[dim..2 * dim]);
    v
}

fn geodesic_rhs(m: &ManifoldDescriptor) -> impl FnMut(f64, &[f64], &mut [f64]) + '_ {
    let dim = m.dim();
    move |_s: f64, y: &[f64], dy: &mut [f64]| {
        let p = state_point(y, dim);
        let v = state_velocity(y, dim);
        // outside-domain states can appear transiently inside trial stages;
        // fall back to the nearest evaluable data by clamping failures to
        // zero acceleration (the guard rejects such steps anyway)
        let acc = match m.christoffel_at(p) {
            Ok(c) => c.contract(v, v),
            Err(_) => [0.0; 3],
        };
        for i in 0..dim {
            dy[i] = v[i];
            dy[dim + i] = -acc[i];
        }
    }
}

/// Endpoint of the geodesic from p with initial velocity v, run for time 1
/// (equivalently arc length |v|). exp_p(0) = p exactly.
pub fn exp_map(
    m: &ManifoldDescriptor,
    p: Vec3,
    v: Vec3,
    settings: &IntegratorSettings,
) -> Result<Vec3> {
    let norm = m.norm(p, v)?;
    if norm < 1e-14 {
        return Ok(p);
    }
    let path = integrate_geodesic(m, p, v, norm, settings, (norm / 8.0).min(0.05))?;
    Ok(path.samples()[path.len() - 1].p)
}

/// Parallel-transport `v0` from the start of `path` along it; returns the
/// transported field at every path sample.
pub fn parallel_transport(
    m: &ManifoldDescriptor,
    path: &CurvePath,
    v0: Vec3,
    settings: &IntegratorSettings,
) -> Result<Vec<Vec3>> {
    Ok(transport_many(m, path, &[v0], settings)?.pop().unwrap())
}

/// Transport several vectors simultaneously (one ODE solve).
pub fn transport_many(
    m: &ManifoldDescriptor,
    path: &CurvePath,
    vs: &[Vec3],
    settings: &IntegratorSettings,
) -> Result<Vec<Vec<Vec3>>> {
    let dim = m.dim();
    let nv = vs.len();
    let mut y0 = vec![0.0; dim * nv];
    for (a, v) in vs.iter().enumerate() {
        y0[a * dim..(a + 1) * dim].copy_from_slice(&v[..dim]);
    }
    let grid = path.grid();
    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| {
        let p = path.position(s);
        let t = path.tangent(s);
        let gamma = match m.christoffel_at(p) {
            Ok(c) => c,
            Err(_) => return dy.iter_mut().for_each(|d| *d = 0.0),
        };
        for a in 0..nv {
            let mut v = [0.0; 3];
            v[..dim].copy_from_slice(&y[a * dim..(a + 1) * dim]);
            let acc = gamma.contract(t, v);
            for i in 0..dim {
                dy[a * dim + i] = -acc[i];
            }
        }
    };
    let res = ode::integrate_on_grid(rhs, &grid, &y0, settings, |_| true)?;
    let mut out = vec![Vec::with_capacity(grid.len()); nv];
    for y in &res.states {
        for (a, field) in out.iter_mut().enumerate() {
            let mut v = [0.0; 3];
            v[..dim].copy_from_slice(&y[a * dim..(a + 1) * dim]);
            field.push(v);
        }
    }
    Ok(out)
}

/// Rotation angle picked up by the start tangent under transport around a
/// closed loop, in [0, pi]. Degenerate (zero-length) loops return 0.
pub fn loop_holonomy(
    m: &ManifoldDescriptor,
    loop_path: &CurvePath,
    settings: &IntegratorSettings,
) -> Result<f64> {
    let gap = loop_path.closure_gap(m);
    if gap > 1e-8 {
        return Err(Error::NotClosed { gap });
    }
    if (loop_path.s_end() - loop_path.s_start()).abs() < 1e-12 {
        return Ok(0.0);
    }
    let v0 = loop_path.samples()[0].t;
    let transported = parallel_transport(m, loop_path, v0, settings)?;
    let v_end = transported[transported.len() - 1];
    m.angle(loop_path.samples()[0].p, v0, v_end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ManifoldDescriptor;
    use std::f64::consts::PI;

    fn settings() -> IntegratorSettings {
        IntegratorSettings::default()
    }

    #[test]
    fn euclidean_geodesic_is_a_straight_segment() {
        let m = ManifoldDescriptor::euclidean3();
        let path =
            integrate_geodesic(&m, [0.0; 3], [1.0, 0.0, 0.0], 2.0, &settings(), 0.01).unwrap();
        let end = path.samples()[path.len() - 1].p;
        assert!(linalg::norm_euclid(linalg::sub(end, [2.0, 0.0, 0.0])) < 1e-12);
    }

    #[test]
    fn sphere2_equator_geodesic_closes_after_full_turn() {
        let m = ManifoldDescriptor::sphere2(1.0).unwrap();
        // start on the equator heading along psi; unit speed needs dpsi = 1
        let path = integrate_geodesic(
            &m,
            [0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            2.0 * PI,
            &settings(),
            0.01,
        )
        .unwrap();
        let end = path.samples()[path.len() - 1].p;
        assert!((end[0] - 0.0).abs() < 1e-5);
        assert!((end[1] - 2.0 * PI).abs() < 1e-5);
    }

    #[test]
    fn geodesic_speed_is_conserved() {
        // directions chosen to stay inside each chart for the whole length
        // (hyperbolic chart holds at most ~3.6 units of geodesic diameter)
        let cases = [
            (ManifoldDescriptor::sphere3(1.0).unwrap(), [0.15, 0.1, 1.0], 10.0),
            (ManifoldDescriptor::hyperbolic3(1.0).unwrap(), [1.0, 1.0, 1.0], 3.4),
            (
                ManifoldDescriptor::product(ManifoldDescriptor::sphere2(1.0).unwrap()).unwrap(),
                [1.0, 1.0, 1.0],
                10.0,
            ),
        ];
        for (m, combo, len) in cases {
            let p0 = m.canonical_base_point();
            let frame = m.orthonormal_frame(p0).unwrap();
            let mut dir = [0.0; 3];
            for (i, c) in combo.iter().enumerate() {
                dir = linalg::axpy(dir, *c, frame[i]);
            }
            let path = integrate_geodesic(&m, p0, dir, len, &settings(), 0.01).unwrap();
            let dev = path.unit_speed_deviation(&m).unwrap();
            assert!(dev < 1e-6 * len / 10.0, "{}: speed drift {dev:e}", m.name);
        }
    }

    #[test]
    fn exp_map_basics() {
        let m = ManifoldDescriptor::euclidean3();
        let p = [0.5, -0.25, 1.0];
        assert_eq!(exp_map(&m, p, [0.0; 3], &settings()).unwrap(), p);
        let q = exp_map(&m, p, [0.25, 0.5, -0.125], &settings()).unwrap();
        assert!(linalg::norm_euclid(linalg::sub(q, [0.75, 0.25, 0.875])) < 1e-10);
    }

    #[test]
    fn sphere3_exp_preserves_geodesic_distance() {
        // |v| < pi r: distance between p and exp_p(v) equals |v| on the round
        // sphere; measure via the ambient 4-space embedding angle
        let r = 1.0;
        let m = ManifoldDescriptor::sphere3(r).unwrap();
        let p = m.canonical_base_point();
        let frame = m.orthonormal_frame(p).unwrap();
        for len in [0.3, 1.0, 2.0] {
            // the phi direction circles the equatorial 2-torus of the chart
            let v = linalg::scale(frame[2], len);
            let q = exp_map(&m, p, v, &settings()).unwrap();
            let d = sphere3_distance(r, p, q);
            assert!((d - len).abs() < 1e-5, "len {len}: distance {d}");
        }
    }

    fn embed_s3(r: f64, p: Vec3) -> [f64; 4] {
        let (chi, th, ph) = (p[0], p[1], p[2]);
        [
            r * chi.cos(),
            r * chi.sin() * th.cos(),
            r * chi.sin() * th.sin() * ph.cos(),
            r * chi.sin() * th.sin() * ph.sin(),
        ]
    }

    fn sphere3_distance(r: f64, a: Vec3, b: Vec3) -> f64 {
        let x = embed_s3(r, a);
        let y = embed_s3(r, b);
        let dot: f64 = x.iter().zip(y.iter()).map(|(u, v)| u * v).sum();
        r * (dot / (r * r)).clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn euclidean_transport_keeps_components() {
        let m = ManifoldDescriptor::euclidean3();
        let path = integrate_geodesic(&m, [0.0; 3], [0.6, 0.8, 0.0], 3.0, &settings(), 0.01)
            .unwrap();
        let v = parallel_transport(&m, &path, [0.1, -0.2, 0.3], &settings()).unwrap();
        for w in &v {
            assert!(linalg::norm_euclid(linalg::sub(*w, [0.1, -0.2, 0.3])) < 1e-12);
        }
    }

    #[test]
    fn transport_preserves_gram_matrix() {
        let m = ManifoldDescriptor::sphere3(1.0).unwrap();
        let p0 = m.canonical_base_point();
        let frame = m.orthonormal_frame(p0).unwrap();
        let path = integrate_geodesic(
            &m,
            p0,
            linalg::scale(linalg::add(frame[0], frame[2]), 1.0 / 2.0f64.sqrt()),
            8.0,
            &settings(),
            0.01,
        )
        .unwrap();
        let moved = transport_many(&m, &path, &frame, &settings()).unwrap();
        let n = path.len() - 1;
        let p_end = path.samples()[n].p;
        let g_end = m.metric_at(p_end).unwrap().g;
        let triple = [moved[0][n], moved[1][n], moved[2][n]];
        let gram = linalg::gram(&g_end, &triple);
        assert!(linalg::gram_identity_deviation(&gram) < 1e-6);
    }

    #[test]
    fn latitude_loop_holonomy_matches_cap_formula() {
        // polar angle pi/3 (geographic latitude pi/6): holonomy 2 pi (1 - cos) = pi
        let m = ManifoldDescriptor::sphere2(1.0).unwrap();
        let polar = PI / 3.0;
        let lat = PI / 2.0 - polar;
        let radius = lat.cos(); // circle radius on the unit sphere
        let total = 2.0 * PI * radius;
        let loop_path = CurvePath::from_fn(0.0, total, 0.005, |s| {
            ([lat, s / radius, 0.0], [0.0, 1.0 / radius, 0.0])
        });
        let angle = loop_holonomy(&m, &loop_path, &settings()).unwrap();
        assert!((angle - PI).abs() < 1e-4, "holonomy {angle}");
    }

    #[test]
    fn euclidean_loop_holonomy_vanishes() {
        let m = ManifoldDescriptor::euclidean3();
        let loop_path = CurvePath::from_fn(0.0, 2.0 * PI, 0.01, |s| {
            ([s.cos(), s.sin(), 0.0], [-s.sin(), s.cos(), 0.0])
        });
        let angle = loop_holonomy(&m, &loop_path, &settings()).unwrap();
        assert!(angle < 1e-6);
    }

    #[test]
    fn point_loop_has_zero_holonomy() {
        let m = ManifoldDescriptor::sphere2(1.0).unwrap();
        let samples = vec![
            PathSample { s: 0.0, p: [0.3, 0.0, 0.0], t: [1.0, 0.0, 0.0] },
            PathSample { s: 1e-13, p: [0.3, 0.0, 0.0], t: [1.0, 0.0, 0.0] },
        ];
        let loop_path = CurvePath::from_samples(samples);
        assert_eq!(loop_holonomy(&m, &loop_path, &settings()).unwrap(), 0.0);
    }

    #[test]
    fn holonomy_shrinks_with_cap_area() {
        // halving the cap polar angle scales the holonomy like the enclosed
        // area: compare against the closed-form ratio within 5%
        let m = ManifoldDescriptor::sphere2(1.0).unwrap();
        let holonomy_of = |polar: f64| {
            let lat = PI / 2.0 - polar;
            let radius = lat.cos();
            let cap = CurvePath::from_fn(0.0, 2.0 * PI * radius, 0.002, move |s| {
                ([lat, s / radius, 0.0], [0.0, 1.0 / radius, 0.0])
            });
            loop_holonomy(&m, &cap, &settings()).unwrap()
        };
        let alpha = 0.4;
        let h_full = holonomy_of(alpha);
        let h_half = holonomy_of(alpha / 2.0);
        let expected_ratio = (1.0 - (alpha / 2.0).cos()) / (1.0 - alpha.cos());
        let measured = h_half / h_full;
        assert!(
            (measured / expected_ratio - 1.0).abs() < 0.05,
            "area ratio {measured} vs {expected_ratio}"
        );
    }

    #[test]
    fn open_path_is_rejected_as_loop() {
        let m = ManifoldDescriptor::euclidean3();
        let path = CurvePath::from_fn(0.0, 1.0, 0.01, |s| ([s, 0.0, 0.0], [1.0, 0.0, 0.0]));
        assert!(matches!(
            loop_holonomy(&m, &path, &settings()),
            Err(Error::NotClosed { .. })
        ));
    }

    #[test]
    fn left_chart_produces_partial_path() {
        let m = ManifoldDescriptor::hyperbolic3(1.0).unwrap();
        // shoot straight at the ball boundary
        let err = integrate_geodesic(&m, [0.0; 3], [0.5, 0.0, 0.0], 10.0, &settings(), 0.01);
        match err {
            Err(Error::LeftChart { s, partial }) => {
                assert!(s > 0.0);
                assert!(partial.len() > 10);
                let end = partial.samples()[partial.len() - 1].p;
                assert!(linalg::norm_euclid(end) <= 0.95 + 1e-6);
            }
            other => panic!("expected LeftChart, got {other:?}"),
        }
    }

    #[test]
    fn exp_semigroup_property() {
        let m = ManifoldDescriptor::sphere3(1.0).unwrap();
        let p = m.canonical_base_point();
        let frame = m.orthonormal_frame(p).unwrap();
        let dir = {
            let raw = linalg::axpy(frame[2], 0.3, frame[0]);
            linalg::scale(raw, 1.0 / (1.0 + 0.09f64).sqrt())
        };
        let t1 = 0.7;
        let t2 = 0.9;
        let q_direct = exp_map(&m, p, linalg::scale(dir, t1 + t2), &settings()).unwrap();
        // transport the tangent to the intermediate point, then continue
        let leg1 = integrate_geodesic(&m, p, dir, t1, &settings(), 0.01).unwrap();
        let mid = leg1.samples()[leg1.len() - 1];
        let q_chained = exp_map(&m, mid.p, linalg::scale(mid.t, t2), &settings()).unwrap();
        assert!(
            linalg::norm_euclid(linalg::sub(q_direct, q_chained)) < 1e-7,
            "semigroup gap {}",
            linalg::norm_euclid(linalg::sub(q_direct, q_chained))
        );
    }
}
