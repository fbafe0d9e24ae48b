use super::frame::{
    connection_jet, edge_transport, mat_id, mat_mul, mat_norm, mat_sub, DiscreteConnection,
};
use crate::error::Result;
use crate::surface::Mesh;
use crate::Error;

/// Per-triangle flatness defect: the norm of (holonomy around the triangle
/// minus identity) divided by the chart area, so a flat smooth connection
/// gives values shrinking with the mesh while a curved one plateaus at its
/// curvature density.
pub fn curvature_residual(conn: &DiscreteConnection, mesh: &Mesh) -> Result<Vec<f64>> {
    if conn.mesh_checksum != mesh.checksum() || conn.a_z.len() != mesh.n_verts() {
        return Err(Error::MeshMismatch);
    }
    let jet = connection_jet(conn, mesh)?;
    let mut out = Vec::with_capacity(mesh.tris.len());
    for (t, tri) in mesh.tris.iter().enumerate() {
        let [a, b, c] = [tri[0] as usize, tri[1] as usize, tri[2] as usize];
        let h = mat_mul(
            &edge_transport(conn, &jet, mesh, c, a),
            &mat_mul(
                &edge_transport(conn, &jet, mesh, b, c),
                &edge_transport(conn, &jet, mesh, a, b),
            ),
        );
        out.push(mat_norm(&mat_sub(&h, &mat_id())) / mesh.chart_area(t));
    }
    Ok(out)
}
