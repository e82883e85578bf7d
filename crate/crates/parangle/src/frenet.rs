//! Frenet apparatus of a unit-speed curve in an ambient 3-manifold: frames,
//! curvature, torsion, the slant invariant sigma, the normalized Darboux
//! field, and spherical indicatrices built through parallel transport.
//!
//! Covariant s-derivatives are taken by differencing the sampled frame
//! components on the uniform grid (4th order) and adding the Gamma terms.
//! The binormal is chosen so (T, N, B) is positively oriented with respect
//! to the chart volume form; the sign of tau depends on this choice.

use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::{self, Vec3};
use crate::manifold::ManifoldDescriptor;
use crate::ode::IntegratorSettings;
use crate::transport::{self, CurvePath};

/// Curvature floor separating the geodesic regime (frames refused) from the
/// framed regime.
pub const KAPPA_MIN: f64 = 1e-6;
/// Torsion floor below which the binormal indicatrix is refused.
pub const TAU_MIN: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct FrenetData {
    pub s: Vec<f64>,
    pub t: Vec<Vec3>,
    pub n: Vec<Vec3>,
    pub b: Vec<Vec3>,
    pub kappa: Vec<f64>,
    pub tau: Vec<f64>,
    /// omega = sqrt(kappa^2 + tau^2)
    pub omega: Vec<f64>,
    /// sigma = kappa^2 / omega^3 * (tau/kappa)'
    pub sigma: Vec<f64>,
    /// unit Darboux field (tau T + kappa B) / omega
    pub darboux: Vec<Vec3>,
}

impl FrenetData {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn ds(&self) -> f64 {
        self.s[1] - self.s[0]
    }

    /// Assemble from integrated frames and prescribed curvature/torsion
    /// samples; sigma is still measured by differentiation, not assumed.
    pub fn from_parts(
        s: Vec<f64>,
        t: Vec<Vec3>,
        n: Vec<Vec3>,
        b: Vec<Vec3>,
        kappa: Vec<f64>,
        tau: Vec<f64>,
    ) -> Self {
        let ds = s[1] - s[0];
        let omega: Vec<f64> = kappa
            .iter()
            .zip(tau.iter())
            .map(|(&k, &tt)| (k * k + tt * tt).sqrt())
            .collect();
        let sigma = sigma_from_profiles(&kappa, &tau, ds);
        let darboux = darboux_from_frames(&t, &b, &kappa, &tau, &omega);
        Self { s, t, n, b, kappa, tau, omega, sigma, darboux }
    }

    /// Largest deviation of the (T, N, B) Gram matrix from the identity.
    pub fn frame_gram_deviation(&self, m: &ManifoldDescriptor, path: &CurvePath) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, q) in path.samples().iter().enumerate() {
            let g = m.metric_at(q.p)?.g;
            let gram = linalg::gram(&g, &[self.t[i], self.n[i], self.b[i]]);
            worst = worst.max(linalg::gram_identity_deviation(&gram));
        }
        Ok(worst)
    }
}

fn sigma_from_profiles(kappa: &[f64], tau: &[f64], ds: f64) -> Vec<f64> {
    let ratio: Vec<f64> = kappa.iter().zip(tau.iter()).map(|(&k, &t)| t / k).collect();
    let dratio = fd::deriv1(&ratio, ds);
    kappa
        .iter()
        .zip(tau.iter())
        .zip(dratio.iter())
        .map(|((&k, &t), &dr)| {
            let w2 = k * k + t * t;
            k * k / w2.powf(1.5) * dr
        })
        .collect()
}

fn darboux_from_frames(
    t: &[Vec3],
    b: &[Vec3],
    kappa: &[f64],
    tau: &[f64],
    omega: &[f64],
) -> Vec<Vec3> {
    (0..t.len())
        .map(|i| {
            let mut d = linalg::scale(t[i], tau[i] / omega[i]);
            d = linalg::axpy(d, kappa[i] / omega[i], b[i]);
            d
        })
        .collect()
}

/// Covariant derivative along the path of a sampled vector field:
/// dV/ds (4th-order differences) plus Gamma(T, V).
pub fn covariant_derivative_along(
    m: &ManifoldDescriptor,
    path: &CurvePath,
    field: &[Vec3],
) -> Result<Vec<Vec3>> {
    let ds = path.ds();
    let dfield = fd::deriv1_vec(field, ds);
    let mut out = Vec::with_capacity(field.len());
    for (i, q) in path.samples().iter().enumerate() {
        let gamma = m.christoffel_at(q.p)?;
        out.push(linalg::add(dfield[i], gamma.contract(q.t, field[i])));
    }
    Ok(out)
}

/// Compute the full Frenet apparatus of a unit-speed path by measurement.
pub fn frenet_apparatus(m: &ManifoldDescriptor, path: &CurvePath) -> Result<FrenetData> {
    path.require_unit_speed(m, 1e-6)?;
    if path.len() < 5 {
        return Err(Error::InvalidInput(
            "need at least 5 samples for the Frenet apparatus".into(),
        ));
    }
    let tangents = path.tangents();
    let accel = covariant_derivative_along(m, path, &tangents)?;

    let npts = path.len();
    let mut kappa = vec![0.0; npts];
    let mut n_field = vec![[0.0; 3]; npts];
    let mut b_field = vec![[0.0; 3]; npts];

    for (i, q) in path.samples().iter().enumerate() {
        let data = m.metric_data(q.p)?;
        let k = linalg::norm_g(&data.g, accel[i]);
        kappa[i] = k;
    }
    // refuse the frame when curvature collapses anywhere
    if let Some(lo) = kappa.iter().position(|&k| k < KAPPA_MIN) {
        let hi = kappa.iter().rposition(|&k| k < KAPPA_MIN).unwrap();
        return Err(Error::KappaVanishes {
            s_lo: path.samples()[lo].s,
            s_hi: path.samples()[hi].s,
            threshold: KAPPA_MIN,
        });
    }
    for (i, q) in path.samples().iter().enumerate() {
        let data = m.metric_data(q.p)?;
        n_field[i] = linalg::scale(accel[i], 1.0 / kappa[i]);
        b_field[i] = linalg::cross_g(&data.g, &data.inv, q.t, n_field[i]);
    }

    let dn = covariant_derivative_along(m, path, &n_field)?;
    let mut tau = vec![0.0; npts];
    for (i, q) in path.samples().iter().enumerate() {
        let g = m.metric_at(q.p)?.g;
        tau[i] = linalg::inner_g(&g, dn[i], b_field[i]);
    }

    Ok(FrenetData::from_parts(
        path.grid(),
        tangents,
        n_field,
        b_field,
        kappa,
        tau,
    ))
}

/// The slant invariant sigma(s) of measured Frenet data.
pub fn sigma(fd_data: &FrenetData) -> Result<Vec<f64>> {
    require_kappa(fd_data)?;
    Ok(sigma_from_profiles(&fd_data.kappa, &fd_data.tau, fd_data.ds()))
}

fn require_kappa(fd_data: &FrenetData) -> Result<()> {
    if let Some(lo) = fd_data.kappa.iter().position(|&k| k < KAPPA_MIN) {
        let hi = fd_data.kappa.iter().rposition(|&k| k < KAPPA_MIN).unwrap();
        return Err(Error::KappaVanishes {
            s_lo: fd_data.s[lo],
            s_hi: fd_data.s[hi],
            threshold: KAPPA_MIN,
        });
    }
    Ok(())
}

/// Darboux field together with the residuals of the derivative identities
/// (kappa/omega)' = -tau sigma and (tau/omega)' = kappa sigma.
#[derive(Debug, Clone)]
pub struct DarbouxDiagnostics {
    pub d: Vec<Vec3>,
    pub res_kappa_ratio: Vec<f64>,
    pub res_tau_ratio: Vec<f64>,
}

pub fn darboux_field(fd_data: &FrenetData) -> Result<DarbouxDiagnostics> {
    require_kappa(fd_data)?;
    let ds = fd_data.ds();
    let n = fd_data.len();
    let k_ratio: Vec<f64> = (0..n).map(|i| fd_data.kappa[i] / fd_data.omega[i]).collect();
    let t_ratio: Vec<f64> = (0..n).map(|i| fd_data.tau[i] / fd_data.omega[i]).collect();
    let dk = fd::deriv1(&k_ratio, ds);
    let dt = fd::deriv1(&t_ratio, ds);
    let sig = sigma(fd_data)?;
    let res_kappa_ratio: Vec<f64> = (0..n).map(|i| dk[i] + fd_data.tau[i] * sig[i]).collect();
    let res_tau_ratio: Vec<f64> = (0..n).map(|i| dt[i] - fd_data.kappa[i] * sig[i]).collect();
    Ok(DarbouxDiagnostics {
        d: fd_data.darboux.clone(),
        res_kappa_ratio,
        res_tau_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndicatrixKind {
    Tangent,
    Normal,
    Binormal,
}

/// A frame vector transported to a fixed tangent space and read as a curve on
/// the unit sphere of that space.
#[derive(Debug, Clone)]
pub struct IndicatrixCurve {
    pub base_point: Vec3,
    pub s: Vec<f64>,
    /// chart components of the transported vectors at the base point
    pub vectors: Vec<Vec3>,
    /// geodesic curvature of the spherical curve, under the chain rule that
    /// reparametrizes its own arc length back to s
    pub kappa_g: Vec<f64>,
}

/// Build the tangent/normal/binormal indicatrix at the tangent space of
/// `path` sample `s0_index`.
pub fn indicatrix(
    m: &ManifoldDescriptor,
    path: &CurvePath,
    fd_data: &FrenetData,
    which: IndicatrixKind,
    s0_index: usize,
    settings: &IntegratorSettings,
) -> Result<IndicatrixCurve> {
    require_kappa(fd_data)?;
    if which == IndicatrixKind::Binormal {
        if let Some(lo) = fd_data.tau.iter().position(|&t| t.abs() < TAU_MIN) {
            let hi = fd_data.tau.iter().rposition(|&t| t.abs() < TAU_MIN).unwrap();
            return Err(Error::TauVanishes {
                s_lo: fd_data.s[lo],
                s_hi: fd_data.s[hi],
                threshold: TAU_MIN,
            });
        }
    }
    if s0_index >= path.len() {
        return Err(Error::InvalidInput(format!(
            "s0 index {s0_index} out of range (path has {} samples)",
            path.len()
        )));
    }

    // Transport one orthonormal frame along the whole path; coefficients of
    // a field in this parallel frame are invariant data, so transporting the
    // field back to s0 is just a change of anchor point.
    let p_start = path.samples()[0].p;
    let frame0 = m.orthonormal_frame(p_start)?;
    let frames = transport::transport_many(m, path, &frame0, settings)?;

    let field: &[Vec3] = match which {
        IndicatrixKind::Tangent => &fd_data.t,
        IndicatrixKind::Normal => &fd_data.n,
        IndicatrixKind::Binormal => &fd_data.b,
    };

    let npts = path.len();
    let mut coeffs: Vec<Vec3> = Vec::with_capacity(npts);
    for i in 0..npts {
        let g = m.metric_at(path.samples()[i].p)?.g;
        let mut c = [0.0; 3];
        for a in 0..3 {
            c[a] = linalg::inner_g(&g, field[i], frames[a][i]);
        }
        coeffs.push(c);
    }

    // spherical geodesic curvature with the chain rule s_alpha -> s:
    // kappa_g = n . (n' x n'') / |n'|^3
    let ds = path.ds();
    let d1 = fd::deriv1_vec(&coeffs, ds);
    let d2: Vec<Vec3> = {
        let comps: Vec<Vec<f64>> = (0..3)
            .map(|c| fd::deriv2(&coeffs.iter().map(|v| v[c]).collect::<Vec<_>>(), ds))
            .collect();
        (0..npts).map(|i| [comps[0][i], comps[1][i], comps[2][i]]).collect()
    };
    let kappa_g: Vec<f64> = (0..npts)
        .map(|i| {
            let speed = linalg::norm_euclid(d1[i]);
            linalg::dot(coeffs[i], linalg::cross(d1[i], d2[i])) / speed.powi(3)
        })
        .collect();

    // anchor the spherical curve in T_{p0} M
    let anchor = [frames[0][s0_index], frames[1][s0_index], frames[2][s0_index]];
    let vectors: Vec<Vec3> = coeffs
        .iter()
        .map(|c| {
            let mut v = [0.0; 3];
            for a in 0..3 {
                v = linalg::axpy(v, c[a], anchor[a]);
            }
            v
        })
        .collect();

    Ok(IndicatrixCurve {
        base_point: path.samples()[s0_index].p,
        s: path.grid(),
        vectors,
        kappa_g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::integrate_geodesic;

    fn settings() -> IntegratorSettings {
        IntegratorSettings::default()
    }

    /// Arc-length circular helix in flat space with kappa = tau = 1/2.
    fn circular_helix_path() -> (ManifoldDescriptor, CurvePath) {
        let m = ManifoldDescriptor::euclidean3();
        let a: f64 = 1.0;
        let b: f64 = 1.0;
        let c = (a * a + b * b).sqrt();
        let path = CurvePath::from_fn(0.0, 12.0, 0.005, |s| {
            let t = s / c;
            (
                [a * t.cos(), a * t.sin(), b * t],
                [-a * t.sin() / c, a * t.cos() / c, b / c],
            )
        });
        (m, path)
    }

    #[test]
    fn circular_helix_curvature_and_torsion() {
        let (m, path) = circular_helix_path();
        let fdat = frenet_apparatus(&m, &path).unwrap();
        for i in 0..fdat.len() {
            assert!((fdat.kappa[i] - 0.5).abs() < 1e-5, "kappa {}", fdat.kappa[i]);
            assert!((fdat.tau[i] - 0.5).abs() < 1e-5, "tau {}", fdat.tau[i]);
        }
        let dev = fdat.frame_gram_deviation(&m, &path).unwrap();
        assert!(dev < 1e-5, "gram deviation {dev:e}");
    }

    #[test]
    fn geodesics_are_refused() {
        let m = ManifoldDescriptor::sphere3(1.0).unwrap();
        let p0 = m.canonical_base_point();
        let frame = m.orthonormal_frame(p0).unwrap();
        let path = integrate_geodesic(&m, p0, frame[2], 3.0, &settings(), 0.01).unwrap();
        assert!(matches!(
            frenet_apparatus(&m, &path),
            Err(Error::KappaVanishes { .. })
        ));
    }

    #[test]
    fn generalized_helix_has_vanishing_sigma() {
        let (m, path) = circular_helix_path();
        let fdat = frenet_apparatus(&m, &path).unwrap();
        let sig = sigma(&fdat).unwrap();
        for (i, v) in sig.iter().enumerate() {
            assert!(v.abs() < 1e-6, "sigma[{i}] = {v:e}");
        }
    }

    #[test]
    fn sigma_closed_form_for_linear_torsion() {
        // kappa = 1, tau(s) = s in flat space: sigma = 1/(1+s^2)^{3/2}
        let m = ManifoldDescriptor::euclidean3();
        let (_path, fdat) = crate::helix::synthesize_curve(
            &m,
            [0.0; 3],
            None,
            &|_s| 1.0,
            &|s| s,
            (0.0, 3.0),
            &settings(),
            0.002,
        )
        .unwrap();
        let sig = sigma(&fdat).unwrap();
        for (i, &s) in fdat.s.iter().enumerate() {
            let expect = 1.0 / (1.0 + s * s).powf(1.5);
            assert!(
                (sig[i] - expect).abs() < 1e-6,
                "sigma({s}) = {} vs {expect}",
                sig[i]
            );
        }
    }

    #[test]
    fn sigma_is_stable_under_grid_refinement() {
        let m = ManifoldDescriptor::euclidean3();
        let kappa = |s: f64| 1.0 + 0.3 * s.sin();
        let tau = |s: f64| 0.4 + 0.2 * (0.6 * s).cos();
        let run = |ds: f64| {
            let (_p, fdat) = crate::helix::synthesize_curve(
                &m, [0.0; 3], None, &kappa, &tau, (0.0, 6.0), &settings(), ds,
            )
            .unwrap();
            (fdat.s.clone(), sigma(&fdat).unwrap())
        };
        let (s_coarse, sig_coarse) = run(0.01);
        let (s_fine, sig_fine) = run(0.005);
        // compare at shared nodes (every other fine node)
        for (i, &s) in s_coarse.iter().enumerate() {
            let j = 2 * i;
            assert!((s_fine[j] - s).abs() < 1e-12);
            assert!(
                (sig_coarse[i] - sig_fine[j]).abs() < 1e-4,
                "sigma refinement gap at s = {s}: {} vs {}",
                sig_coarse[i],
                sig_fine[j]
            );
        }
    }

    #[test]
    fn darboux_unit_orthogonal_to_normal_and_identities_hold() {
        let m = ManifoldDescriptor::euclidean3();
        // nonconstant curvature so sigma is nontrivial
        let (path, fdat) = crate::helix::synthesize_curve(
            &m,
            [0.0; 3],
            None,
            &|s: f64| 1.0 + 0.3 * s.sin(),
            &|s: f64| 0.5 + 0.2 * (0.7 * s).cos(),
            (0.0, 8.0),
            &settings(),
            0.004,
        )
        .unwrap();
        let diag = darboux_field(&fdat).unwrap();
        for i in 0..fdat.len() {
            let g = m.metric_at(path.samples()[i].p).unwrap().g;
            assert!((linalg::norm_g(&g, diag.d[i]) - 1.0).abs() < 1e-6);
            assert!(linalg::inner_g(&g, diag.d[i], fdat.n[i]).abs() < 1e-6);
            assert!(diag.res_kappa_ratio[i].abs() < 1e-4, "identity residual");
            assert!(diag.res_tau_ratio[i].abs() < 1e-4);
        }
    }

    #[test]
    fn tangent_indicatrix_curvature_is_tau_over_kappa() {
        let m = ManifoldDescriptor::euclidean3();
        let (path, fdat) = crate::helix::synthesize_curve(
            &m,
            [0.0; 3],
            None,
            &|s: f64| 1.0 + 0.25 * (0.5 * s).sin(),
            &|s: f64| 0.6 + 0.2 * (0.4 * s).cos(),
            (0.0, 6.0),
            &settings(),
            0.004,
        )
        .unwrap();
        let ind = indicatrix(&m, &path, &fdat, IndicatrixKind::Tangent, 0, &settings()).unwrap();
        for i in 0..fdat.len() {
            let expect = fdat.tau[i] / fdat.kappa[i];
            assert!(
                (ind.kappa_g[i] - expect).abs() < 1e-4,
                "kappa_g[{i}] = {} vs tau/kappa = {expect}",
                ind.kappa_g[i]
            );
        }
    }

    #[test]
    fn normal_indicatrix_curvature_matches_sigma_on_curved_ambient() {
        let m = ManifoldDescriptor::sphere3(1.0).unwrap();
        let (path, fdat) = crate::helix::synthesize_curve(
            &m,
            m.canonical_base_point(),
            None,
            &|s: f64| 1.0 + 0.2 * s.sin(),
            &|s: f64| 0.4 + 0.1 * (0.8 * s).cos(),
            (0.0, 5.0),
            &settings(),
            0.004,
        )
        .unwrap();
        let sig = sigma(&fdat).unwrap();
        let ind = indicatrix(&m, &path, &fdat, IndicatrixKind::Normal, 0, &settings()).unwrap();
        for i in 0..fdat.len() {
            assert!(
                (ind.kappa_g[i] - sig[i]).abs() < 1e-4,
                "kappa_g[{i}] = {} vs sigma = {}",
                ind.kappa_g[i],
                sig[i]
            );
            let g0 = m.metric_at(ind.base_point).unwrap().g;
            assert!((linalg::norm_g(&g0, ind.vectors[i]) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn binormal_indicatrix_duality() {
        let m = ManifoldDescriptor::euclidean3();
        let (path, fdat) = crate::helix::synthesize_curve(
            &m,
            [0.0; 3],
            None,
            &|s: f64| 1.0 + 0.25 * (0.5 * s).sin(),
            &|s: f64| 0.6 + 0.2 * (0.4 * s).cos(),
            (0.0, 6.0),
            &settings(),
            0.004,
        )
        .unwrap();
        let t_ind = indicatrix(&m, &path, &fdat, IndicatrixKind::Tangent, 0, &settings()).unwrap();
        let b_ind = indicatrix(&m, &path, &fdat, IndicatrixKind::Binormal, 0, &settings()).unwrap();
        for i in 0..fdat.len() {
            let product = t_ind.kappa_g[i] * b_ind.kappa_g[i];
            let expect = fdat.tau[i].signum();
            assert!(
                (product - expect).abs() < 1e-4,
                "duality product {product} vs {expect}"
            );
        }
    }

    #[test]
    fn binormal_indicatrix_refused_for_vanishing_torsion() {
        let (m, _) = circular_helix_path();
        // planar circle: tau = 0
        let path = CurvePath::from_fn(0.0, 5.0, 0.005, |s| {
            ([s.cos(), s.sin(), 0.0], [-s.sin(), s.cos(), 0.0])
        });
        let fdat = frenet_apparatus(&m, &path).unwrap();
        assert!(matches!(
            indicatrix(&m, &path, &fdat, IndicatrixKind::Binormal, 0, &settings()),
            Err(Error::TauVanishes { .. })
        ));
    }
}
