//! Finite-difference stencils on uniform grids.
//!
//! Weights are generated from first principles (Fornberg-style Vandermonde
//! solve) so that interior and one-sided stencils share one code path. All
//! derivative routines are 4th-order accurate and need at least 5 (first
//! derivative) or 6 (second derivative) samples.

use crate::linalg::Vec3;

/// Solve for weights w such that sum_k w_k f(x0 + o_k h) ~ f^(m)(x0) / h^m.
/// `offsets` are integer node offsets, `m` the derivative order.
pub fn stencil_weights(offsets: &[i64], m: usize) -> Vec<f64> {
    let n = offsets.len();
    assert!(m < n, "need more nodes than the derivative order");
    // Vandermonde system: sum_k w_k o_k^p = p! * delta_{p,m}, p = 0..n-1
    let mut a = vec![vec![0.0f64; n + 1]; n];
    for (p, row) in a.iter_mut().enumerate() {
        for (k, &o) in offsets.iter().enumerate() {
            row[k] = (o as f64).powi(p as i32);
        }
        row[n] = if p == m {
            (1..=m).product::<usize>() as f64
        } else {
            0.0
        };
    }
    // Gaussian elimination with partial pivoting
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        a.swap(col, piv);
        let d = a[col][col];
        for c in col..=n {
            a[col][c] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in col..=n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    (0..n).map(|k| a[k][n]).collect()
}

fn offsets_for(i: usize, n: usize, width: usize) -> Vec<i64> {
    // Window of `width` nodes containing i, clamped to [0, n)
    let half = width / 2;
    let lo = if i < half {
        0
    } else if i + (width - half) > n {
        n - width
    } else {
        i - half
    };
    (0..width).map(|k| (lo + k) as i64 - i as i64).collect()
}

fn derivative_scalar(samples: &[f64], h: f64, m: usize, width: usize) -> Vec<f64> {
    let n = samples.len();
    assert!(
        n >= width,
        "need at least {width} samples for a 4th-order derivative, got {n}"
    );
    let hm = h.powi(m as i32);
    let mut out = vec![0.0; n];
    // interior stencil reused across nodes
    let interior = offsets_for(width / 2 + 1, width + 2, width);
    let w_interior = stencil_weights(&interior, m);
    for i in 0..n {
        let offs = offsets_for(i, n, width);
        let centered = offs == interior;
        let w;
        let weights: &[f64] = if centered {
            &w_interior
        } else {
            w = stencil_weights(&offs, m);
            &w
        };
        let mut acc = 0.0;
        for (k, &o) in offs.iter().enumerate() {
            acc += weights[k] * samples[(i as i64 + o) as usize];
        }
        out[i] = acc / hm;
    }
    out
}

/// 4th-order first derivative of scalar samples on a uniform grid.
pub fn deriv1(samples: &[f64], h: f64) -> Vec<f64> {
    derivative_scalar(samples, h, 1, 5)
}

/// 4th-order second derivative of scalar samples on a uniform grid.
pub fn deriv2(samples: &[f64], h: f64) -> Vec<f64> {
    derivative_scalar(samples, h, 2, 6)
}

/// Componentwise 4th-order first derivative of vector samples.
pub fn deriv1_vec(samples: &[Vec3], h: f64) -> Vec<Vec3> {
    let comps: Vec<Vec<f64>> = (0..3)
        .map(|c| deriv1(&samples.iter().map(|v| v[c]).collect::<Vec<_>>(), h))
        .collect();
    (0..samples.len())
        .map(|i| [comps[0][i], comps[1][i], comps[2][i]])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_derivative_exact_on_quartic() {
        let h = 0.1;
        let xs: Vec<f64> = (0..12).map(|i| i as f64 * h).collect();
        let f: Vec<f64> = xs.iter().map(|&x| 3.0 * x.powi(4) - x.powi(2) + 5.0).collect();
        let d = deriv1(&f, h);
        for (i, &x) in xs.iter().enumerate() {
            let expect = 12.0 * x.powi(3) - 2.0 * x;
            assert!((d[i] - expect).abs() < 1e-9, "node {i}: {} vs {expect}", d[i]);
        }
    }

    #[test]
    fn second_derivative_exact_on_quintic() {
        let h = 0.05;
        let xs: Vec<f64> = (0..14).map(|i| i as f64 * h).collect();
        let f: Vec<f64> = xs.iter().map(|&x| x.powi(5) - 2.0 * x.powi(3) + x).collect();
        let d = deriv2(&f, h);
        for (i, &x) in xs.iter().enumerate() {
            let expect = 20.0 * x.powi(3) - 12.0 * x;
            assert!((d[i] - expect).abs() < 1e-7, "node {i}: {} vs {expect}", d[i]);
        }
    }

    #[test]
    fn first_derivative_converges_at_fourth_order_on_sine() {
        let err = |h: f64| -> f64 {
            let n = (1.0 / h) as usize;
            let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
            let d = deriv1(&f, h);
            (0..n)
                .map(|i| (d[i] - (i as f64 * h).cos()).abs())
                .fold(0.0, f64::max)
        };
        let e1 = err(0.02);
        let e2 = err(0.01);
        let rate = (e1 / e2).log2();
        assert!(rate > 3.5, "observed rate {rate}");
    }
}
