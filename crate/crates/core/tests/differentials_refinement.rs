//! Refinement behaviour of the numerical holomorphic bases: d-bar residuals
//! decrease, and the L2 norms are Cauchy in the sense that the discrepancy
//! between two consistent quadrature rules for the norm shrinks by at least
//! a factor 2 per level.

use hit3_core::differentials::{dbar_operator, DifferentialField};
use hit3_core::surface::{build_bolza_domain, build_mesh, Mesh};

/// Alternative norm quadrature: centroid-sampled density from the linear
/// interpolant, against the same chart measure as `DifferentialField::inner`.
fn norm_centroid_rule(f: &DifferentialField, mesh: &Mesh) -> f64 {
    let chart = f.chart_values(mesh);
    let p = 1 - f.weight as i32;
    let mut total = 0.0;
    for (t, tri) in mesh.tris.iter().enumerate() {
        let mean = (chart[tri[0] as usize] + chart[tri[1] as usize] + chart[tri[2] as usize]) / 3.0;
        total += mesh.chart_area(t) * mean.norm_sqr() * Mesh::lambda0(mesh.centroid(t)).powi(p);
    }
    total.sqrt()
}

#[test]
fn cubic_basis_residuals_and_norms_improve_under_refinement() {
    let dom = build_bolza_domain().unwrap();
    let mut max_resid = Vec::new();
    let mut max_norm_gap = Vec::new();
    for level in [2u32, 3] {
        let mesh = build_mesh(&dom, level).unwrap();
        let basis = hit3_core::differentials::holomorphic_basis(&mesh, 3).unwrap();
        assert_eq!(basis.len(), 5);
        let sys = dbar_operator(&mesh, 3).unwrap();
        let mut worst_r = 0.0f64;
        let mut worst_n = 0.0f64;
        for f in &basis {
            worst_r = worst_r.max(sys.residual(f).unwrap());
            // Fields are unit-norm in the vertex-sampled rule; compare with
            // the centroid rule to bound the quadrature tail of the norm.
            worst_n = worst_n.max((norm_centroid_rule(f, &mesh) - 1.0).abs());
        }
        max_resid.push(worst_r);
        max_norm_gap.push(worst_n);
    }
    assert!(
        max_resid[1] < max_resid[0],
        "residuals did not decrease: {max_resid:?}"
    );
    assert!(max_resid[1] <= 1e-3, "level 3 residual {:e}", max_resid[1]);
    assert!(
        max_norm_gap[1] * 2.0 <= max_norm_gap[0],
        "norm quadrature gaps {max_norm_gap:?}"
    );
}
