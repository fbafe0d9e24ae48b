use std::collections::{HashMap, VecDeque};

use super::frame::{
    connection_jet, edge_transport, mat_id, mat_mul, mat_zero, ConnectionJet, DiscreteConnection,
    Mat3,
};
use crate::error::Result;
use crate::surface::{FuchsianDomain, Mesh};
use crate::{cplx, Error};

/// Symmetric-square embedding of SL(2, R) into SL(3, R): the action of a
/// 2x2 matrix on the monomial basis (x^2, xy, y^2).
pub fn irr_embed(m: [[f64; 2]; 2]) -> [[f64; 3]; 3] {
    let [[a, b], [c, d]] = m;
    [
        [a * a, 2.0 * a * b, b * b],
        [a * c, a * d + b * c, b * d],
        [c * c, 2.0 * c * d, d * d],
    ]
}

/// 2x2 real product of a generator word, letters (k, +-1) multiplied left
/// to right.
pub fn sl2_word(dom: &FuchsianDomain, word: &[(usize, i32)]) -> [[f64; 2]; 2] {
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for &(k, e) in word {
        let g = if e > 0 {
            dom.real_generators[k]
        } else {
            dom.real_inverses[k]
        };
        let mut p = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                p[i][j] = m[i][0] * g[0][j] + m[i][1] * g[1][j];
            }
        }
        m = p;
    }
    m
}

/// The surface-group relation a b a^-1 b^-1 c d c^-1 d^-1 expanded in the
/// four side-pairing generators.
pub fn relation_word() -> Vec<(usize, i32)> {
    // a = g0, b = g1^-1, c = g2^-1 g3, d = g0 g1^-1 g2.
    vec![
        (0, 1),
        (1, -1),
        (0, -1),
        (1, 1),
        (2, -1),
        (3, 1),
        (0, 1),
        (1, -1),
        (2, 1),
        (3, -1),
        (2, 1),
        (2, -1),
        (1, 1),
        (0, -1),
    ]
}

#[derive(Debug, Clone)]
pub struct HolonomyMatrix {
    pub word: Vec<(usize, i32)>,
    /// Chart vertex the loops are based at.
    pub base: u32,
    pub mat: Mat3,
}

fn base_vertex(mesh: &Mesh) -> usize {
    let mut best = 0usize;
    for i in 1..mesh.n_verts() {
        if mesh.verts[i].norm() < mesh.verts[best].norm() {
            best = i;
        }
    }
    best
}

/// Breadth-first path over chart edges from `start` to the first accepted
/// vertex; adjacency lists are sorted, so the result is deterministic.
fn bfs_path(mesh: &Mesh, start: usize, accept: impl Fn(usize) -> bool) -> Result<Vec<usize>> {
    if accept(start) {
        return Ok(vec![start]);
    }
    let n = mesh.n_verts();
    let mut parent: Vec<i64> = vec![-1; n];
    parent[start] = start as i64;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &nb in &mesh.adj[v] {
            let nb = nb as usize;
            if parent[nb] >= 0 {
                continue;
            }
            parent[nb] = v as i64;
            if accept(nb) {
                let mut path = vec![nb];
                let mut cur = nb;
                while cur != start {
                    cur = parent[cur] as usize;
                    path.push(cur);
                }
                path.reverse();
                return Ok(path);
            }
            queue.push_back(nb);
        }
    }
    Err(Error::PathNotFound(format!(
        "no mesh path from vertex {start} to an accepted vertex"
    )))
}

fn path_transport(
    conn: &DiscreteConnection,
    jet: &ConnectionJet,
    mesh: &Mesh,
    path: &[usize],
) -> Mat3 {
    let mut t = mat_id();
    for w in path.windows(2) {
        t = mat_mul(&edge_transport(conn, jet, mesh, w[0], w[1]), &t);
    }
    t
}

/// Transport around the loop that leaves the base vertex, crosses the given
/// octagon side once, and returns through the identified copy. The frame
/// cocycle diag(1/g', 1, g') of the (dz, 1, 1/dz) frame is applied at the
/// crossing.
fn crossing_loop(
    conn: &DiscreteConnection,
    jet: &ConnectionJet,
    mesh: &Mesh,
    dom: &FuchsianDomain,
    side: usize,
    base: usize,
) -> Result<Mat3> {
    let s8 = side as u8;
    let out = bfs_path(mesh, base, |i| {
        mesh.side_of[i].len() == 1 && mesh.side_of[i][0] == s8
    })?;
    let p = *out.last().unwrap();
    let g = dom.side_map(side);
    let zp = mesh.verts[p];
    let zimg = g.apply(zp);
    let mut partner = None;
    for &j in &mesh.copies[mesh.dof[p] as usize] {
        if j as usize != p && (mesh.verts[j as usize] - zimg).norm() <= 1e-8 {
            partner = Some(j as usize);
            break;
        }
    }
    let p2 = partner.ok_or_else(|| {
        Error::PathNotFound(format!(
            "no identified copy of vertex {p} across side {side}"
        ))
    })?;
    let back = bfs_path(mesh, p2, |i| i == base)?;
    // Section components change by the stored frame factors across the
    // identification; for the mesh cocycle this equals diag(1/g', 1, g')
    // with g the side map.
    let ratio = conn.frame_cocycle[p2] / conn.frame_cocycle[p];
    let mut c = mat_zero();
    c[0][0] = ratio;
    c[1][1] = cplx(1.0, 0.0);
    c[2][2] = 1.0 / ratio;
    Ok(mat_mul(
        &path_transport(conn, jet, mesh, &back),
        &mat_mul(&c, &path_transport(conn, jet, mesh, &out)),
    ))
}

/// Discrete holonomy of the word (letters (k, +-1) for the four side-pairing
/// generators, multiplied left to right as group elements), based at the
/// chart vertex closest to the origin.
pub fn holonomy(
    conn: &DiscreteConnection,
    mesh: &Mesh,
    dom: &FuchsianDomain,
    word: &[(usize, i32)],
) -> Result<HolonomyMatrix> {
    if conn.mesh_checksum != mesh.checksum() {
        return Err(Error::MeshMismatch);
    }
    let base = base_vertex(mesh);
    let jet = connection_jet(conn, mesh)?;
    let mut cache: HashMap<usize, Mat3> = HashMap::new();
    let mut h = mat_id();
    for &(k, e) in word {
        if k >= 4 || (e != 1 && e != -1) {
            return Err(Error::InvalidInput(format!("bad holonomy letter ({k}, {e})")));
        }
        // Generator k pairs side k+3 with side k+7; the inverse letter
        // crosses the opposite side.
        let side = if e > 0 { k + 3 } else { (k + 7) % 8 };
        let l = match cache.get(&side) {
            Some(l) => *l,
            None => {
                let l = crossing_loop(conn, &jet, mesh, dom, side, base)?;
                cache.insert(side, l);
                l
            }
        };
        // Loop transports compose contravariantly to word order: the first
        // letter's loop is traversed first, so its matrix is applied first.
        h = mat_mul(&l, &h);
    }
    Ok(HolonomyMatrix {
        word: word.to_vec(),
        base: base as u32,
        mat: h,
    })
}
