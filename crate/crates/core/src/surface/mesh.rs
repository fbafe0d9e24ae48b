use std::collections::HashMap;
use std::collections::VecDeque;

use super::domain::FuchsianDomain;
use super::mobius::{hyperbolic_midpoint, Mobius};
use crate::error::Result;
use crate::{Cplx, Error};

/// Triangulation of the octagon with boundary identifications.
///
/// Chart vertices live in the Poincaré disk; vertices on paired sides are
/// glued into equivalence classes ("dofs"). `transport[i]` is the isometry
/// carrying the chart position of vertex i to the position of its class
/// representative, so a function value stored per dof is read at vertex i
/// through that map (with the appropriate cocycle factor for differentials).
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub level: u32,
    pub verts: Vec<Cplx>,
    pub tris: Vec<[u32; 3]>,
    /// Octagon sides (0..8) each vertex lies on; empty for interior vertices.
    pub side_of: Vec<Vec<u8>>,
    /// Representative chart vertex of each vertex's equivalence class.
    pub root: Vec<u32>,
    /// Dof index of each chart vertex (shared across a class).
    pub dof: Vec<u32>,
    /// Representative chart vertex per dof, ascending.
    pub roots: Vec<u32>,
    /// All chart vertices in each dof's class, ascending.
    pub copies: Vec<Vec<u32>>,
    pub transport: Vec<Mobius>,
    /// Sorted one-ring neighbours of each chart vertex.
    pub adj: Vec<Vec<u32>>,
    /// Chart edges lying on the octagon boundary, tagged with their side.
    pub boundary_edges: Vec<BoundaryEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: u32,
    pub b: u32,
    pub side: u8,
}

impl Mesh {
    pub fn n_verts(&self) -> usize {
        self.verts.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.roots.len()
    }

    /// Conformal factor of the hyperbolic metric at a disk point.
    pub fn lambda0(z: Cplx) -> f64 {
        let t = 1.0 - z.norm_sqr();
        4.0 / (t * t)
    }

    /// |T_i'(z_i)|^2: Jacobian relating a density at the chart position of
    /// vertex i to its value at the class representative.
    pub fn density_weight(&self, i: usize) -> f64 {
        self.transport[i].deriv(self.verts[i]).norm_sqr()
    }

    /// Expand a per-dof vector to all chart vertices (scalar transport).
    pub fn expand<T: Copy>(&self, dof_values: &[T]) -> Vec<T> {
        assert_eq!(dof_values.len(), self.n_dofs());
        self.dof.iter().map(|&d| dof_values[d as usize]).collect()
    }

    pub fn chart_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.tris[t];
        let (za, zb, zc) = (
            self.verts[a as usize],
            self.verts[b as usize],
            self.verts[c as usize],
        );
        0.5 * ((zb - za) * (zc - za).conj()).im.abs()
    }

    pub fn centroid(&self, t: usize) -> Cplx {
        let [a, b, c] = self.tris[t];
        (self.verts[a as usize] + self.verts[b as usize] + self.verts[c as usize]) / 3.0
    }

    pub fn hyperbolic_area(&self) -> f64 {
        (0..self.tris.len())
            .map(|t| self.chart_area(t) * Self::lambda0(self.centroid(t)))
            .sum()
    }

    pub fn min_corner_angle_deg(&self) -> f64 {
        let mut amin = 180.0f64;
        for t in &self.tris {
            let z = [
                self.verts[t[0] as usize],
                self.verts[t[1] as usize],
                self.verts[t[2] as usize],
            ];
            for p in 0..3 {
                let v1 = z[(p + 1) % 3] - z[p];
                let v2 = z[(p + 2) % 3] - z[p];
                let c = (v1 * v2.conj()).re / (v1.norm() * v2.norm());
                let ang = c.clamp(-1.0, 1.0).acos().to_degrees();
                amin = amin.min(ang);
            }
        }
        amin
    }

    /// FNV-1a hash over the exact bit patterns of the geometry, used to tie
    /// exported data files to the mesh they were computed on.
    pub fn checksum(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(&self.level.to_le_bytes());
        for v in &self.verts {
            eat(&v.re.to_bits().to_le_bytes());
            eat(&v.im.to_bits().to_le_bytes());
        }
        for t in &self.tris {
            for &i in t {
                eat(&i.to_le_bytes());
            }
        }
        for &r in &self.root {
            eat(&r.to_le_bytes());
        }
        h
    }
}

/// Builds the identified triangulation at the given refinement level.
///
/// The base mesh is the fan of 8 triangles from the center to the corners,
/// refined by hyperbolic midpoint subdivision 3 + level times. Subdivision
/// commutes with the side-pairing isometries, so boundary vertices match
/// their partners to machine precision.
pub fn build_mesh(dom: &FuchsianDomain, level: u32) -> Result<Mesh> {
    if level > 5 {
        return Err(Error::InvalidInput(format!(
            "refinement level {level} out of range 0..=5"
        )));
    }
    let mut verts: Vec<Cplx> = Vec::new();
    verts.push(Cplx::new(0.0, 0.0));
    verts.extend_from_slice(&dom.vertices);
    let mut side_of: Vec<Vec<u8>> = vec![Vec::new()];
    for j in 0..8u8 {
        // Corner j lies on sides j-1 and j.
        let mut s = vec![(j + 7) % 8, j];
        s.sort_unstable();
        side_of.push(s);
    }
    let mut tris: Vec<[u32; 3]> = (0..8u32).map(|k| [0, 1 + k, 1 + (k + 1) % 8]).collect();

    for _ in 0..(3 + level) {
        subdivide(&mut verts, &mut side_of, &mut tris);
    }

    let (root, rels) = identify(dom, &verts, &side_of)?;
    let transport = transports(&verts, &root, &rels)?;

    // Dof numbering by ascending representative index.
    let n = verts.len();
    let mut roots: Vec<u32> = (0..n as u32).filter(|&i| root[i as usize] == i).collect();
    roots.sort_unstable();
    let mut dof_of_root: HashMap<u32, u32> = HashMap::new();
    for (d, &r) in roots.iter().enumerate() {
        dof_of_root.insert(r, d as u32);
    }
    let dof: Vec<u32> = root.iter().map(|r| dof_of_root[r]).collect();
    let mut copies: Vec<Vec<u32>> = vec![Vec::new(); roots.len()];
    for i in 0..n {
        copies[dof[i] as usize].push(i as u32);
    }

    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for t in &tris {
        for p in 0..3 {
            adj[t[p] as usize].push(t[(p + 1) % 3]);
            adj[t[p] as usize].push(t[(p + 2) % 3]);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }

    let mut boundary_edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for t in &tris {
        for p in 0..3 {
            let (i, j) = (t[p], t[(p + 1) % 3]);
            let key = (i.min(j), i.max(j));
            if seen.contains(&key) {
                continue;
            }
            let common: Vec<u8> = side_of[i as usize]
                .iter()
                .filter(|s| side_of[j as usize].contains(s))
                .copied()
                .collect();
            if common.len() == 1 {
                seen.insert(key);
                boundary_edges.push(BoundaryEdge {
                    a: key.0,
                    b: key.1,
                    side: common[0],
                });
            }
        }
    }
    boundary_edges.sort_unstable_by_key(|e| (e.side, e.a, e.b));

    let mesh = Mesh {
        level,
        verts,
        tris,
        side_of,
        root,
        dof,
        roots,
        copies,
        transport,
        adj,
        boundary_edges,
    };

    let amin = mesh.min_corner_angle_deg();
    if amin < 15.0 {
        return Err(Error::MeshQualityFailure(format!(
            "minimum chart angle {amin:.2} below 15 degrees"
        )));
    }
    let area = mesh.hyperbolic_area();
    let target = 4.0 * std::f64::consts::PI;
    let rel = (area - target).abs() / target;
    let gate = 0.005 * 4.0f64.powi((3 - level as i32).max(0));
    if rel > gate {
        return Err(Error::MeshQualityFailure(format!(
            "hyperbolic area {area} off 4 pi by {rel:.2e} (gate {gate:.2e})"
        )));
    }
    Ok(mesh)
}

fn subdivide(verts: &mut Vec<Cplx>, side_of: &mut Vec<Vec<u8>>, tris: &mut Vec<[u32; 3]>) {
    let mut emid: HashMap<(u32, u32), u32> = HashMap::new();
    let mut midpoint = |i: u32, j: u32, verts: &mut Vec<Cplx>, side_of: &mut Vec<Vec<u8>>| -> u32 {
        let key = (i.min(j), i.max(j));
        if let Some(&m) = emid.get(&key) {
            return m;
        }
        let m = hyperbolic_midpoint(verts[i as usize], verts[j as usize]);
        let s: Vec<u8> = side_of[i as usize]
            .iter()
            .filter(|x| side_of[j as usize].contains(x))
            .copied()
            .collect();
        verts.push(m);
        side_of.push(s);
        let idx = (verts.len() - 1) as u32;
        emid.insert(key, idx);
        idx
    };
    let old = std::mem::take(tris);
    for [a, b, c] in old {
        let ab = midpoint(a, b, verts, side_of);
        let bc = midpoint(b, c, verts, side_of);
        let ca = midpoint(c, a, verts, side_of);
        tris.push([a, ab, ca]);
        tris.push([ab, b, bc]);
        tris.push([ca, bc, c]);
        tris.push([ab, bc, ca]);
    }
}

type Relation = (u32, u32, Mobius); // (i, j, M) with M(z_i) = z_j

fn identify(
    dom: &FuchsianDomain,
    verts: &[Cplx],
    side_of: &[Vec<u8>],
) -> Result<(Vec<u32>, Vec<Relation>)> {
    let n = verts.len();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &[u32], mut i: u32) -> u32 {
        while parent[i as usize] != i {
            i = parent[i as usize];
        }
        i
    }
    let byside: Vec<Vec<u32>> = (0..8u8)
        .map(|s| {
            (0..n as u32)
                .filter(|&i| side_of[i as usize].contains(&s))
                .collect()
        })
        .collect();
    let mut rels: Vec<Relation> = Vec::new();
    for s in 3..7usize {
        let g = dom.side_map(s);
        let t = dom.opposite_side(s);
        for &i in &byside[s] {
            let img = g.apply(verts[i as usize]);
            let mut best = f64::INFINITY;
            let mut jbest = 0u32;
            for &j in &byside[t] {
                let d = (img - verts[j as usize]).norm();
                if d < best {
                    best = d;
                    jbest = j;
                }
            }
            if best > 1e-9 {
                return Err(Error::MeshQualityFailure(format!(
                    "side {s} vertex misses its partner by {best:.2e}"
                )));
            }
            rels.push((i, jbest, g));
            rels.push((jbest, i, g.inverse()));
            let (ri, rj) = (find(&parent, i), find(&parent, jbest));
            if ri != rj {
                parent[ri.max(rj) as usize] = ri.min(rj);
            }
        }
    }
    let root: Vec<u32> = (0..n as u32).map(|i| find(&parent, i)).collect();
    Ok((root, rels))
}

fn transports(verts: &[Cplx], root: &[u32], rels: &[Relation]) -> Result<Vec<Mobius>> {
    let n = verts.len();
    // From j we can reach i with T_i = T_j compose M, since M(z_i) = z_j.
    let mut reach: Vec<Vec<(u32, Mobius)>> = vec![Vec::new(); n];
    for &(i, j, m) in rels {
        reach[j as usize].push((i, m));
    }
    let mut transport: Vec<Option<Mobius>> = vec![None; n];
    let mut queue = VecDeque::new();
    for i in 0..n {
        if root[i] == i as u32 {
            transport[i] = Some(Mobius::identity());
            queue.push_back(i as u32);
        }
    }
    while let Some(j) = queue.pop_front() {
        let tj = transport[j as usize].unwrap();
        for &(i, m) in &reach[j as usize] {
            if transport[i as usize].is_none() {
                transport[i as usize] = Some(tj.compose(&m));
                queue.push_back(i);
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = transport[i].ok_or_else(|| {
            Error::MeshQualityFailure(format!("vertex {i} unreachable from its class root"))
        })?;
        let err = (t.apply(verts[i]) - verts[root[i] as usize]).norm();
        if err > 1e-8 {
            return Err(Error::MeshQualityFailure(format!(
                "transport of vertex {i} misses root by {err:.2e}"
            )));
        }
        out.push(t);
    }
    Ok(out)
}
