//! Small fixed-size linear algebra over chart components.
//!
//! Vectors are `[f64; 3]` regardless of the manifold dimension; 2-manifolds
//! use the first two slots and keep the third at zero. Metric matrices are
//! padded with a unit diagonal entry so determinants and inverses stay valid
//! for either dimension.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const ZERO3: Vec3 = [0.0; 3];

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: Vec3, c: f64) -> Vec3 {
    [a[0] * c, a[1] * c, a[2] * c]
}

pub fn axpy(y: Vec3, c: f64, x: Vec3) -> Vec3 {
    [y[0] + c * x[0], y[1] + c * x[1], y[2] + c * x[2]]
}

/// Euclidean dot product of raw components (no metric).
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm_euclid(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Inner product with respect to a metric matrix: a^T g b.
pub fn inner_g(g: &Mat3, a: Vec3, b: Vec3) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += a[i] * g[i][j] * b[j];
        }
    }
    acc
}

pub fn norm_g(g: &Mat3, a: Vec3) -> f64 {
    inner_g(g, a, a).max(0.0).sqrt()
}

pub fn identity() -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    let mut out = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse by adjugate; caller checks the determinant against its own
/// singularity threshold first.
pub fn inv3(m: &Mat3, det: f64) -> Mat3 {
    let inv_det = 1.0 / det;
    let mut c = [[0.0; 3]; 3];
    c[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det;
    c[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det;
    c[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det;
    c[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det;
    c[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det;
    c[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det;
    c[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det;
    c[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det;
    c[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det;
    c
}

/// Euclidean cross product of raw components.
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Metric cross product: the unique vector with <cross_g(a,b), w> = vol(a, b, w)
/// for all w, where vol is the Riemannian volume form of the chart. For
/// orthonormal (a, b) the result completes a positively oriented orthonormal
/// triple.
pub fn cross_g(g: &Mat3, g_inv: &Mat3, a: Vec3, b: Vec3) -> Vec3 {
    let sqrt_det = det3(g).max(0.0).sqrt();
    let c = cross(a, b);
    // lower index of the euclidean cross, then raise with g^{-1}
    scale(mat_vec(g_inv, c), sqrt_det)
}

/// Volume form applied to three vectors: sqrt(det g) * det[a b c].
pub fn vol_g(g: &Mat3, a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let m = [
        [a[0], b[0], c[0]],
        [a[1], b[1], c[1]],
        [a[2], b[2], c[2]],
    ];
    det3(g).max(0.0).sqrt() * det3(&m)
}

/// Gram matrix of a triple of vectors under g.
pub fn gram(g: &Mat3, vs: &[Vec3; 3]) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = inner_g(g, vs[i], vs[j]);
        }
    }
    out
}

/// Largest absolute deviation of a Gram matrix from the identity.
pub fn gram_identity_deviation(gram: &Mat3) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[i][j] - target).abs());
        }
    }
    dev
}

/// Rotation (as an orthonormal-coordinate operator) taking unit vector `from`
/// to unit vector `to`, via Rodrigues' formula. Inputs are coefficient
/// triples in some orthonormal basis.
pub fn rotation_between(from: Vec3, to: Vec3) -> Mat3 {
    let c = dot(from, to);
    let v = cross(from, to);
    let s2 = dot(v, v);
    if s2 < 1e-30 {
        if c > 0.0 {
            return identity();
        }
        // antipodal: rotate by pi around any axis orthogonal to `from`
        let helper = if from[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let axis = {
            let raw = cross(from, helper);
            scale(raw, 1.0 / norm_euclid(raw))
        };
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = 2.0 * axis[i] * axis[j] - if i == j { 1.0 } else { 0.0 };
            }
        }
        return r;
    }
    // R = I + [v]_x + [v]_x^2 (1 - c)/s^2
    let k = (1.0 - c) / s2;
    let vx = [
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ];
    let mut r = identity();
    for i in 0..3 {
        for j in 0..3 {
            let mut vx2 = 0.0;
            for m in 0..3 {
                vx2 += vx[i][m] * vx[m][j];
            }
            r[i][j] += vx[i][j] + k * vx2;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_g_is_euclidean_cross_for_identity_metric() {
        let g = identity();
        let c = cross_g(&g, &g, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert!(norm_euclid(sub(c, [0.0, 0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn cross_g_orthogonal_and_unit_for_scaled_metric() {
        // diag(4, 9, 1); orthonormal vectors (1/2,0,0), (0,1/3,0)
        let g = [[4.0, 0.0, 0.0], [0.0, 9.0, 0.0], [0.0, 0.0, 1.0]];
        let det = det3(&g);
        let gi = inv3(&g, det);
        let a = [0.5, 0.0, 0.0];
        let b = [0.0, 1.0 / 3.0, 0.0];
        let c = cross_g(&g, &gi, a, b);
        assert!((inner_g(&g, c, c) - 1.0).abs() < 1e-14);
        assert!(inner_g(&g, c, a).abs() < 1e-14);
        assert!(inner_g(&g, c, b).abs() < 1e-14);
        assert!(vol_g(&g, a, b, c) > 0.0);
    }

    #[test]
    fn rotation_between_maps_vectors() {
        let from = [0.6, 0.8, 0.0];
        let to = [0.0, 0.0, 1.0];
        let r = rotation_between(from, to);
        let image = mat_vec(&r, from);
        assert!(norm_euclid(sub(image, to)) < 1e-14);
        // determinant +1
        assert!((det3(&r) - 1.0).abs() < 1e-12);
    }
}
