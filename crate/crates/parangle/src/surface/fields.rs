//! Finite differences for scalar and vector fields stored on a patch grid
//! (row-major, v fastest).

use crate::fd;
use crate::linalg::Vec3;

pub fn deriv_u(field: &[f64], nu: usize, nv: usize, du: f64) -> Vec<f64> {
    let mut out = vec![0.0; nu * nv];
    let mut line = vec![0.0; nu];
    for iv in 0..nv {
        for iu in 0..nu {
            line[iu] = field[iu * nv + iv];
        }
        let d = fd::deriv1(&line, du);
        for iu in 0..nu {
            out[iu * nv + iv] = d[iu];
        }
    }
    out
}

pub fn deriv_v(field: &[f64], nu: usize, nv: usize, dv: f64) -> Vec<f64> {
    let mut out = vec![0.0; nu * nv];
    for iu in 0..nu {
        let row = &field[iu * nv..(iu + 1) * nv];
        let d = fd::deriv1(row, dv);
        out[iu * nv..(iu + 1) * nv].copy_from_slice(&d);
    }
    out
}

pub fn deriv2_u(field: &[f64], nu: usize, nv: usize, du: f64) -> Vec<f64> {
    let mut out = vec![0.0; nu * nv];
    let mut line = vec![0.0; nu];
    for iv in 0..nv {
        for iu in 0..nu {
            line[iu] = field[iu * nv + iv];
        }
        let d = fd::deriv2(&line, du);
        for iu in 0..nu {
            out[iu * nv + iv] = d[iu];
        }
    }
    out
}

pub fn deriv2_v(field: &[f64], nu: usize, nv: usize, dv: f64) -> Vec<f64> {
    let mut out = vec![0.0; nu * nv];
    for iu in 0..nu {
        let row = &field[iu * nv..(iu + 1) * nv];
        let d = fd::deriv2(row, dv);
        out[iu * nv..(iu + 1) * nv].copy_from_slice(&d);
    }
    out
}

pub fn deriv_u_vec(field: &[Vec3], nu: usize, nv: usize, du: f64) -> Vec<Vec3> {
    let mut out = vec![[0.0; 3]; nu * nv];
    for c in 0..3 {
        let comp: Vec<f64> = field.iter().map(|v| v[c]).collect();
        let d = deriv_u(&comp, nu, nv, du);
        for (o, val) in out.iter_mut().zip(d) {
            o[c] = val;
        }
    }
    out
}

pub fn deriv_v_vec(field: &[Vec3], nu: usize, nv: usize, dv: f64) -> Vec<Vec3> {
    let mut out = vec![[0.0; 3]; nu * nv];
    for c in 0..3 {
        let comp: Vec<f64> = field.iter().map(|v| v[c]).collect();
        let d = deriv_v(&comp, nu, nv, dv);
        for (o, val) in out.iter_mut().zip(d) {
            o[c] = val;
        }
    }
    out
}
