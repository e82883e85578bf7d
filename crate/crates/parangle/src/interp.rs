//! Local cubic Lagrange interpolation on uniform grids (1D and tensor-product
//! 2D), with analytic partial derivatives inside each 4-node window. Used by
//! patch-intrinsic geodesic integration.

/// Cubic Lagrange basis at local coordinate x in node units, nodes at
/// offsets 0, 1, 2, 3. Returns (weights, d/dx weights).
fn cubic_basis(x: f64) -> ([f64; 4], [f64; 4]) {
    let mut w = [0.0; 4];
    let mut dw = [0.0; 4];
    for (i, (wi, dwi)) in w.iter_mut().zip(dw.iter_mut()).enumerate() {
        let mut num = 1.0;
        let mut den = 1.0;
        for j in 0..4 {
            if j != i {
                num *= x - j as f64;
                den *= (i as f64) - (j as f64);
            }
        }
        *wi = num / den;
        // derivative of the product
        let mut acc = 0.0;
        for k in 0..4 {
            if k == i {
                continue;
            }
            let mut term = 1.0;
            for j in 0..4 {
                if j != i && j != k {
                    term *= x - j as f64;
                }
            }
            acc += term;
        }
        *dwi = acc / den;
    }
    (w, dw)
}

/// Window base index for interpolation at fractional node index `xi` on a
/// grid with n nodes (clamped so the 4-node window stays inside).
fn window_base(xi: f64, n: usize) -> usize {
    debug_assert!(n >= 4);
    let i = xi.floor() as isize - 1;
    i.clamp(0, n as isize - 4) as usize
}

/// Scalar field on a uniform 2D grid, row-major with v fastest.
#[derive(Debug, Clone)]
pub struct GridField {
    pub nu: usize,
    pub nv: usize,
    pub u0: f64,
    pub v0: f64,
    pub du: f64,
    pub dv: f64,
    pub data: Vec<f64>,
}

impl GridField {
    pub fn new(nu: usize, nv: usize, u0: f64, v0: f64, du: f64, dv: f64, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), nu * nv);
        assert!(nu >= 4 && nv >= 4, "grid too small for cubic interpolation");
        Self { nu, nv, u0, v0, du, dv, data }
    }

    #[inline]
    pub fn at(&self, iu: usize, iv: usize) -> f64 {
        self.data[iu * self.nv + iv]
    }

    /// Interpolated value and gradient (d/du, d/dv) at (u, v).
    pub fn eval(&self, u: f64, v: f64) -> (f64, f64, f64) {
        let xi = (u - self.u0) / self.du;
        let eta = (v - self.v0) / self.dv;
        let bu = window_base(xi, self.nu);
        let bv = window_base(eta, self.nv);
        let (wu, dwu) = cubic_basis(xi - bu as f64);
        let (wv, dwv) = cubic_basis(eta - bv as f64);
        let mut val = 0.0;
        let mut d_u = 0.0;
        let mut d_v = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let f = self.at(bu + a, bv + b);
                val += wu[a] * wv[b] * f;
                d_u += dwu[a] * wv[b] * f;
                d_v += wu[a] * dwv[b] * f;
            }
        }
        (val, d_u / self.du, d_v / self.dv)
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        let eps_u = 1e-9 * self.du.abs();
        let eps_v = 1e-9 * self.dv.abs();
        let u_hi = self.u0 + self.du * (self.nu - 1) as f64;
        let v_hi = self.v0 + self.dv * (self.nv - 1) as f64;
        u >= self.u0 - eps_u && u <= u_hi + eps_u && v >= self.v0 - eps_v && v <= v_hi + eps_v
    }
}
