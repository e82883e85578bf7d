//! Serialization: curve and patch CSV tables (17 significant digits,
//! RFC-4180-style quoting), ASCII OBJ meshes with per-manifold visualization
//! embeddings, and flat key/value reports.

use crate::error::Result;
use crate::frenet::FrenetData;
use crate::linalg::Vec3;
use crate::manifold::{ManifoldDescriptor, MetricKind};
use crate::surface::{analysis, RuledPatch, SurfaceAxisField};
use crate::transport::CurvePath;
use std::fmt::Write as _;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// RFC-4180 quoting: wrap fields containing separators or quotes, doubling
/// inner quotes.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(fields: &[String]) -> String {
    fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",")
}

/// Curve table: `s,x1,x2,x3,T1,T2,T3` plus three columns per attached field.
pub fn path_csv(path: &CurvePath) -> String {
    let mut header = vec![
        "s".into(),
        "x1".into(),
        "x2".into(),
        "x3".into(),
        "T1".into(),
        "T2".into(),
        "T3".into(),
    ];
    let field_names: Vec<&String> = path.fields().keys().collect();
    for name in &field_names {
        for c in 1..=3 {
            header.push(format!("{name}{c}"));
        }
    }
    let mut out = String::new();
    out.push_str(&csv_row(&header));
    out.push('\n');
    for (i, q) in path.samples().iter().enumerate() {
        let mut row = vec![num(q.s)];
        row.extend(q.p.iter().map(|&x| num(x)));
        row.extend(q.t.iter().map(|&x| num(x)));
        for name in &field_names {
            let field = path.field(name).unwrap();
            row.extend(field[i].iter().map(|&x| num(x)));
        }
        out.push_str(&csv_row(&row));
        out.push('\n');
    }
    out
}

/// Frenet table: `s,kappa,tau,sigma,T...,N...,B...,D...`.
pub fn frenet_csv(fdat: &FrenetData) -> String {
    let mut out = String::from("s,kappa,tau,sigma,T1,T2,T3,N1,N2,N3,B1,B2,B3,D1,D2,D3\n");
    for i in 0..fdat.len() {
        let mut row = vec![
            num(fdat.s[i]),
            num(fdat.kappa[i]),
            num(fdat.tau[i]),
            num(fdat.sigma[i]),
        ];
        for v in [fdat.t[i], fdat.n[i], fdat.b[i], fdat.darboux[i]] {
            row.extend(v.iter().map(|&x| num(x)));
        }
        out.push_str(&csv_row(&row));
        out.push('\n');
    }
    out
}

/// Patch field table: one row per node with forms, curvatures, lambda, and
/// the transport defect when an axis is attached. Missing per-node values
/// are written as `nan`.
pub fn patch_csv(patch: &RuledPatch, axis: Option<&SurfaceAxisField>) -> Result<String> {
    let forms = patch.forms()?;
    let kext = analysis::extrinsic_curvature(patch)?;
    let kint = analysis::intrinsic_curvature(patch)?;
    let defect = match axis {
        Some(a) if a.theta.is_some() => Some(analysis::parallel_angle_defect(patch, a)?),
        _ => None,
    };
    let mut out =
        String::from("u,v,g11,g12,g22,h11,h12,h22,Kext,Kint,lambda,defect\n");
    for iu in 0..patch.nu() {
        for iv in 0..patch.nv() {
            let i = patch.idx(iu, iv);
            let lambda = forms.lambda[i].map_or("nan".to_string(), num);
            let def = defect
                .as_ref()
                .map_or("nan".to_string(), |d| num(d.direct[i]));
            let row = vec![
                num(patch.u[iu]),
                num(patch.v[iv]),
                num(forms.g11[i]),
                num(forms.g12[i]),
                num(forms.g22[i]),
                num(forms.h11[i]),
                num(forms.h12[i]),
                num(forms.h22[i]),
                num(kext[i]),
                num(kint[i]),
                lambda,
                def,
            ];
            out.push_str(&csv_row(&row));
            out.push('\n');
        }
    }
    Ok(out)
}

/// Visualization embedding of a chart point into R^3, per manifold kind:
/// identity for flat space and the Poincare balls, stereographic projection
/// for the round 3-sphere, and planar-model-times-height for products.
pub fn embed_point(m: &ManifoldDescriptor, p: Vec3) -> Vec3 {
    match &m.kind {
        MetricKind::Sphere3 { radius } => {
            let (chi, th, ph) = (p[0], p[1], p[2]);
            let r = *radius;
            let x = [
                r * chi.cos(),
                r * chi.sin() * th.cos(),
                r * chi.sin() * th.sin() * ph.cos(),
                r * chi.sin() * th.sin() * ph.sin(),
            ];
            // stereographic from the antipode of the chart center
            let denom = r + x[0];
            [
                r * x[1] / denom,
                r * x[2] / denom,
                r * x[3] / denom,
            ]
        }
        MetricKind::Product { factor } => {
            let h = embed_factor(factor, p);
            [h[0], h[1], p[2]]
        }
        _ => p,
    }
}

fn embed_factor(factor: &ManifoldDescriptor, p: Vec3) -> [f64; 2] {
    match &factor.kind {
        MetricKind::Sphere2 { radius } => {
            // geographic to stereographic plane (projection from the south pole)
            let (phi, psi) = (p[0], p[1]);
            let r = *radius;
            let x = phi.cos() * psi.cos();
            let y = phi.cos() * psi.sin();
            let z = phi.sin();
            [r * x / (1.0 + z), r * y / (1.0 + z)]
        }
        _ => [p[0], p[1]],
    }
}

/// ASCII OBJ mesh of a patch: `v` records in the visualization embedding and
/// `f` records splitting each grid quad into two triangles.
pub fn patch_obj(patch: &RuledPatch) -> String {
    let m = patch.manifold();
    let (nu, nv) = (patch.nu(), patch.nv());
    let mut out = String::new();
    for iu in 0..nu {
        for iv in 0..nv {
            let q = embed_point(m, patch.p[patch.idx(iu, iv)]);
            let _ = writeln!(out, "v {} {} {}", num(q[0]), num(q[1]), num(q[2]));
        }
    }
    for iu in 0..nu - 1 {
        for iv in 0..nv - 1 {
            let a = iu * nv + iv + 1; // OBJ indices are 1-based
            let b = a + 1;
            let c = a + nv;
            let d = c + 1;
            let _ = writeln!(out, "f {a} {c} {d}");
            let _ = writeln!(out, "f {a} {d} {b}");
        }
    }
    out
}

/// Flat key/value report of check outcomes (the same grammar the scenario
/// configuration uses).
pub fn report_text(reports: &[crate::checks::VerificationReport]) -> String {
    let mut out = String::new();
    let all_pass = reports.iter().all(|r| r.pass);
    let _ = writeln!(out, "report.checks = {}", reports.len());
    let _ = writeln!(out, "report.pass = {all_pass}");
    for r in reports {
        let k = &r.check;
        let _ = writeln!(out, "check.{k}.sup = {}", num(r.sup_residual));
        let _ = writeln!(out, "check.{k}.mean = {}", num(r.mean_residual));
        let _ = writeln!(out, "check.{k}.tol = {}", num(r.tolerance));
        let _ = writeln!(out, "check.{k}.pass = {}", r.pass);
        let _ = writeln!(out, "check.{k}.property = {}", r.property);
        let _ = writeln!(out, "check.{k}.oracle = {}", r.oracle);
        let _ = writeln!(out, "check.{k}.wall_ms = {:.3}", r.wall_time_ms);
    }
    out
}

/// Aggregated sweep table: one row per parameter value with the sup residual
/// of every check.
pub fn sweep_csv(param: &str, rows: &[(f64, Vec<crate::checks::VerificationReport>)]) -> String {
    let mut out = String::new();
    if rows.is_empty() {
        return out;
    }
    let mut header = vec![param.to_string()];
    for r in &rows[0].1 {
        header.push(format!("{}_sup", r.check));
        header.push(format!("{}_pass", r.check));
    }
    out.push_str(&csv_row(&header));
    out.push('\n');
    for (value, reports) in rows {
        let mut row = vec![num(*value)];
        for r in reports {
            row.push(num(r.sup_residual));
            row.push(r.pass.to_string());
        }
        out.push_str(&csv_row(&row));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::CurvePath;

    #[test]
    fn csv_quoting_follows_rfc_4180() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn path_csv_has_17_significant_digits_and_field_columns() {
        let mut path = CurvePath::from_fn(0.0, 0.1, 0.05, |s| {
            ([s, 2.0 * s, 0.0], [1.0, 2.0, 0.0])
        });
        let n = path.len();
        path.attach_field("V", vec![[0.25, 0.5, 0.75]; n]);
        let csv = path_csv(&path);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "s,x1,x2,x3,T1,T2,T3,V1,V2,V3");
        let first = lines.next().unwrap();
        assert!(first.contains("2.5000000000000000e-1"));
        // 17 significant digits: mantissa with 16 decimals
        assert!(first.split(',').all(|f| f.contains('e')));
    }

    #[test]
    fn obj_export_produces_quads_as_triangles() {
        let m = crate::manifold::ManifoldDescriptor::euclidean3();
        let patch = crate::surface::build_chart_map_patch(
            &m,
            |u, v| [u, v, 0.0],
            (0.0, 1.0),
            5,
            (0.0, 1.0),
            5,
        )
        .unwrap();
        let obj = patch_obj(&patch);
        let verts = obj.lines().filter(|l| l.starts_with("v ")).count();
        let faces = obj.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(verts, 25);
        assert_eq!(faces, 2 * 16);
        assert!(obj.lines().all(|l| l.starts_with("v ") || l.starts_with("f ")));
    }

    #[test]
    fn sphere3_embedding_lands_near_the_chart_center_plane() {
        let m = crate::manifold::ManifoldDescriptor::sphere3(1.0).unwrap();
        let q = embed_point(&m, m.canonical_base_point());
        // chart center embeds off the projection pole with bounded norm
        assert!(q.iter().all(|x| x.is_finite()));
        assert!(crate::linalg::norm_euclid(q) < 2.0);
    }
}
