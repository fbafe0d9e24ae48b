use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::Result;
use crate::surface::{integrate, Measure, Mesh};
use crate::{cplx, Cplx, Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chirality {
    /// Coefficient of dz^k.
    Dz,
    /// Coefficient of dzbar^k.
    Dzbar,
}

/// A k-differential stored as one complex coefficient per dof. The chart
/// value at any copy vertex i is obtained through the transition cocycle
/// (T_i'(z_i))^k (conjugated for dzbar chirality), so the identification
/// invariant alpha(gamma z) (gamma'(z))^k = alpha(z) holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialField {
    pub weight: u8,
    pub chirality: Chirality,
    pub values: Vec<Cplx>,
    pub mesh_checksum: u64,
}

impl DifferentialField {
    pub fn new(weight: u8, chirality: Chirality, values: Vec<Cplx>, mesh: &Mesh) -> Self {
        assert!(weight == 2 || weight == 3);
        assert_eq!(values.len(), mesh.n_dofs());
        DifferentialField {
            weight,
            chirality,
            values,
            mesh_checksum: mesh.checksum(),
        }
    }

    pub fn zero(weight: u8, chirality: Chirality, mesh: &Mesh) -> Self {
        Self::new(weight, chirality, vec![cplx(0.0, 0.0); mesh.n_dofs()], mesh)
    }

    /// Restriction of the global chart monomial z^m: sampled at class
    /// representatives. Not cocycle-compatible; used as a negative control.
    pub fn monomial_restriction(weight: u8, m: u32, mesh: &Mesh) -> Self {
        let values = mesh
            .roots
            .iter()
            .map(|&r| mesh.verts[r as usize].powu(m))
            .collect();
        Self::new(weight, Chirality::Dz, values, mesh)
    }

    /// Cocycle factor turning the dof coefficient into the chart coefficient
    /// at copy vertex i.
    pub fn cocycle(&self, mesh: &Mesh, i: usize) -> Cplx {
        let d = mesh.transport[i].deriv(mesh.verts[i]).powu(self.weight as u32);
        match self.chirality {
            Chirality::Dz => d,
            Chirality::Dzbar => d.conj(),
        }
    }

    /// Coefficient in the global chart at every copy vertex.
    pub fn chart_values(&self, mesh: &Mesh) -> Vec<Cplx> {
        (0..mesh.n_verts())
            .map(|i| self.values[mesh.dof[i] as usize] * self.cocycle(mesh, i))
            .collect()
    }

    /// L2 inner product with weight lambda0^(1-k) against the chart area
    /// measure; requires matching weight and chirality.
    pub fn inner(&self, other: &DifferentialField, mesh: &Mesh) -> Result<Cplx> {
        if self.weight != other.weight
            || self.chirality != other.chirality
            || self.mesh_checksum != mesh.checksum()
            || other.mesh_checksum != mesh.checksum()
        {
            return Err(Error::MeshMismatch);
        }
        let a = self.chart_values(mesh);
        let b = other.chart_values(mesh);
        let p = 1 - self.weight as i32;
        let dens: Vec<Cplx> = (0..mesh.n_verts())
            .map(|i| a[i] * b[i].conj() * Mesh::lambda0(mesh.verts[i]).powi(p))
            .collect();
        Ok(integrate(mesh, &dens, Measure::ChartArea))
    }

    pub fn norm(&self, mesh: &Mesh) -> Result<f64> {
        Ok(self.inner(self, mesh)?.re.max(0.0).sqrt())
    }
}

/// Conjugate differential: coefficients conjugated, chirality flipped.
pub fn conjugate(f: &DifferentialField) -> DifferentialField {
    DifferentialField {
        weight: f.weight,
        chirality: match f.chirality {
            Chirality::Dz => Chirality::Dzbar,
            Chirality::Dzbar => Chirality::Dz,
        },
        values: f.values.iter().map(|v| v.conj()).collect(),
        mesh_checksum: f.mesh_checksum,
    }
}

/// Writes the field as structured text; float bits are hex-encoded so a
/// reload reproduces the coefficients exactly.
pub fn save_field(f: &DifferentialField, path: &Path) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "kdifferential v1")?;
    writeln!(out, "weight {}", f.weight)?;
    writeln!(
        out,
        "chirality {}",
        match f.chirality {
            Chirality::Dz => "dz",
            Chirality::Dzbar => "dzbar",
        }
    )?;
    writeln!(out, "mesh_checksum {:016x}", f.mesh_checksum)?;
    writeln!(out, "count {}", f.values.len())?;
    for v in &f.values {
        writeln!(out, "{:016x} {:016x}", v.re.to_bits(), v.im.to_bits())?;
    }
    Ok(())
}

pub fn load_field(path: &Path) -> Result<DifferentialField> {
    let file = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(file).lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::InvalidInput("truncated field file".into()))?
            .map_err(Error::from)
    };
    let bad = |what: &str| Error::InvalidInput(format!("field file: bad {what}"));
    if next()? != "kdifferential v1" {
        return Err(bad("header"));
    }
    let weight: u8 = next()?
        .strip_prefix("weight ")
        .ok_or_else(|| bad("weight"))?
        .parse()
        .map_err(|_| bad("weight"))?;
    let chirality = match next()?.strip_prefix("chirality ") {
        Some("dz") => Chirality::Dz,
        Some("dzbar") => Chirality::Dzbar,
        _ => return Err(bad("chirality")),
    };
    let mesh_checksum = u64::from_str_radix(
        next()?
            .strip_prefix("mesh_checksum ")
            .ok_or_else(|| bad("checksum"))?,
        16,
    )
    .map_err(|_| bad("checksum"))?;
    let count: usize = next()?
        .strip_prefix("count ")
        .ok_or_else(|| bad("count"))?
        .parse()
        .map_err(|_| bad("count"))?;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let line = next()?;
        let (re, im) = line.split_once(' ').ok_or_else(|| bad("value"))?;
        values.push(cplx(
            f64::from_bits(u64::from_str_radix(re, 16).map_err(|_| bad("value"))?),
            f64::from_bits(u64::from_str_radix(im, 16).map_err(|_| bad("value"))?),
        ));
    }
    Ok(DifferentialField {
        weight,
        chirality,
        values,
        mesh_checksum,
    })
}
