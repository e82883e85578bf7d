//! Property-based invariants: transport isometry, metric cross-product
//! algebra, and Lancret round trips under randomized inputs.

use parangle::helix;
use parangle::linalg;
use parangle::manifold::ManifoldDescriptor;
use parangle::transport;
use parangle::IntegratorSettings;
use proptest::prelude::*;

fn settings() -> IntegratorSettings {
    IntegratorSettings::default()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    /// Parallel transport preserves the full Gram matrix of a transported
    /// orthonormal triple along geodesics of the round 3-sphere.
    #[test]
    fn transport_preserves_gram(
        a in 0.2f64..1.4,
        b in -1.0f64..1.0,
        len in 1.0f64..6.0,
    ) {
        let m = ManifoldDescriptor::sphere3(1.0).unwrap();
        let p0 = m.canonical_base_point();
        let frame = m.orthonormal_frame(p0).unwrap();
        // direction dominated by the safe toroidal coordinate
        let mut dir = linalg::scale(frame[2], 1.0);
        dir = linalg::axpy(dir, 0.2 * b, frame[0]);
        dir = linalg::axpy(dir, 0.15 * a, frame[1]);
        let path = transport::integrate_geodesic(&m, p0, dir, len, &settings(), 0.01).unwrap();
        let moved = transport::transport_many(&m, &path, &frame, &settings()).unwrap();
        let k = path.len() - 1;
        let g_end = m.metric_at(path.samples()[k].p).unwrap().g;
        let gram = linalg::gram(&g_end, &[moved[0][k], moved[1][k], moved[2][k]]);
        prop_assert!(linalg::gram_identity_deviation(&gram) < 1e-6);
    }

    /// The metric cross product is unit, orthogonal to its arguments, and
    /// positively oriented for any SPD metric built from a random basis.
    #[test]
    fn metric_cross_product_properties(
        m00 in 0.5f64..2.0,
        m11 in 0.5f64..2.0,
        m22 in 0.5f64..2.0,
        off in -0.3f64..0.3,
        ax in -1.0f64..1.0,
        ay in -1.0f64..1.0,
        bz in -1.0f64..1.0,
    ) {
        let g = [
            [m00, off, 0.0],
            [off, m11, 0.1 * off],
            [0.0, 0.1 * off, m22],
        ];
        let det = linalg::det3(&g);
        prop_assume!(det > 1e-3);
        let gi = linalg::inv3(&g, det);
        let a = [ax, ay, 0.3];
        let b = [0.2, -0.4, bz];
        let gram = linalg::inner_g(&g, a, a) * linalg::inner_g(&g, b, b)
            - linalg::inner_g(&g, a, b).powi(2);
        prop_assume!(gram > 1e-3);
        let c = linalg::cross_g(&g, &gi, a, b);
        prop_assert!(linalg::inner_g(&g, c, a).abs() < 1e-12);
        prop_assert!(linalg::inner_g(&g, c, b).abs() < 1e-12);
        prop_assert!(linalg::vol_g(&g, a, b, c) > 0.0);
        // |c|^2 equals the Gram determinant of (a, b)
        prop_assert!((linalg::inner_g(&g, c, c) - gram).abs() < 1e-9 * (1.0 + gram));
    }

    /// Lancret round trip under randomized angle and curvature profile: the
    /// synthesized helix classifies back with the same angle.
    #[test]
    fn lancret_round_trip(
        theta in 0.5f64..1.3,
        base in 0.8f64..1.4,
        amp in 0.0f64..0.3,
        freq in 0.4f64..1.2,
    ) {
        let m = ManifoldDescriptor::euclidean3();
        let kappa = move |s: f64| base + amp * (freq * s).sin();
        let (_p, fdat, axis) = helix::make_generalized_helix(
            &m, [0.0; 3], None, &kappa, theta, (0.0, 6.0), &settings(), 0.01,
        ).unwrap();
        prop_assert!(axis.sup_residual() < 1e-5);
        let cls = helix::classify_curve(&fdat, 1e-3);
        prop_assert_eq!(cls.class, helix::CurveClass::GeneralizedHelix);
        prop_assert!((cls.theta.unwrap() - theta).abs() < 1e-4);
    }
}
