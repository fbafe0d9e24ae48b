use std::io::{Read, Write};
use std::path::Path;

use super::mesh::{BoundaryEdge, Mesh};
use super::mobius::Mobius;
use crate::error::Result;
use crate::{cplx, Cplx, Error};

const MAGIC: u64 = 0x4d45_5348_4f43_5431; // "MESHOCT1"

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u32(&mut self, x: u32) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }
    fn f64(&mut self, x: f64) {
        self.u64(x.to_bits());
    }
    fn cplx(&mut self, z: Cplx) {
        self.f64(z.re);
        self.f64(z.im);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::InvalidInput("truncated mesh file".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn cplx(&mut self) -> Result<Cplx> {
        Ok(cplx(self.f64()?, self.f64()?))
    }
}

/// Serializes the mesh with exact floating-point bit patterns.
pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    let mut w = Writer { buf: Vec::new() };
    w.u64(MAGIC);
    w.u32(mesh.level);
    w.u64(mesh.verts.len() as u64);
    for &v in &mesh.verts {
        w.cplx(v);
    }
    w.u64(mesh.tris.len() as u64);
    for t in &mesh.tris {
        for &i in t {
            w.u32(i);
        }
    }
    for s in &mesh.side_of {
        w.u32(s.len() as u32);
        for &x in s {
            w.u32(x as u32);
        }
    }
    for &r in &mesh.root {
        w.u32(r);
    }
    for m in &mesh.transport {
        w.cplx(m.a);
        w.cplx(m.b);
        w.cplx(m.c);
        w.cplx(m.d);
    }
    w.u64(mesh.boundary_edges.len() as u64);
    for e in &mesh.boundary_edges {
        w.u32(e.a);
        w.u32(e.b);
        w.u32(e.side as u32);
    }
    w.u64(mesh.checksum());
    let mut f = std::fs::File::create(path)?;
    f.write_all(&w.buf)?;
    Ok(())
}

/// Reloads a mesh saved by `save_mesh`; the result is bit-identical.
pub fn load_mesh(path: &Path) -> Result<Mesh> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    let mut r = Reader { buf: &buf, pos: 0 };
    if r.u64()? != MAGIC {
        return Err(Error::InvalidInput("not a mesh file".into()));
    }
    let level = r.u32()?;
    let nv = r.u64()? as usize;
    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        verts.push(r.cplx()?);
    }
    let nt = r.u64()? as usize;
    let mut tris = Vec::with_capacity(nt);
    for _ in 0..nt {
        tris.push([r.u32()?, r.u32()?, r.u32()?]);
    }
    let mut side_of = Vec::with_capacity(nv);
    for _ in 0..nv {
        let k = r.u32()? as usize;
        let mut s = Vec::with_capacity(k);
        for _ in 0..k {
            s.push(r.u32()? as u8);
        }
        side_of.push(s);
    }
    let mut root = Vec::with_capacity(nv);
    for _ in 0..nv {
        root.push(r.u32()?);
    }
    let mut transport = Vec::with_capacity(nv);
    for _ in 0..nv {
        transport.push(Mobius {
            a: r.cplx()?,
            b: r.cplx()?,
            c: r.cplx()?,
            d: r.cplx()?,
        });
    }
    let ne = r.u64()? as usize;
    let mut boundary_edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        boundary_edges.push(BoundaryEdge {
            a: r.u32()?,
            b: r.u32()?,
            side: r.u32()? as u8,
        });
    }
    let stored_sum = r.u64()?;

    // Rebuild the derived indexing exactly as build_mesh does.
    let mut roots: Vec<u32> = (0..nv as u32).filter(|&i| root[i as usize] == i).collect();
    roots.sort_unstable();
    let mut dof_of_root = std::collections::HashMap::new();
    for (d, &rt) in roots.iter().enumerate() {
        dof_of_root.insert(rt, d as u32);
    }
    let dof: Vec<u32> = root.iter().map(|x| dof_of_root[x]).collect();
    let mut copies: Vec<Vec<u32>> = vec![Vec::new(); roots.len()];
    for i in 0..nv {
        copies[dof[i] as usize].push(i as u32);
    }
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); nv];
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
    if mesh.checksum() != stored_sum {
        return Err(Error::InvalidInput("mesh file checksum mismatch".into()));
    }
    Ok(mesh)
}
