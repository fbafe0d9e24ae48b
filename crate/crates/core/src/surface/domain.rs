use std::f64::consts::PI;

use super::mobius::Mobius;
use crate::error::Result;
use crate::{cplx, Cplx, Error};

/// Regular hyperbolic octagon centered at the origin of the Poincaré disk,
/// with all eight interior angles pi/4, together with the four isometries
/// pairing opposite sides.
///
/// Corner j sits at angle (j + 1/2) pi/4; side j joins corner j to corner
/// j+1 (mod 8). `side_map(s)` carries side s onto side s+4.
#[derive(Debug, Clone)]
pub struct FuchsianDomain {
    pub vertices: [Cplx; 8],
    /// The four independent side-pairing isometries; generator k maps side
    /// k+3 onto side k+7 (mod 8).
    pub generators: [Mobius; 4],
    /// Real SL(2, R) form of each generator (upper half-plane model).
    pub real_generators: [[[f64; 2]; 2]; 4],
    pub real_inverses: [[[f64; 2]; 2]; 4],
}

impl FuchsianDomain {
    /// Generator index and direction (+1 generator, -1 inverse) that carries
    /// side s onto the opposite side.
    pub fn side_pairing(&self, s: usize) -> (usize, i32) {
        assert!(s < 8);
        if (3..7).contains(&s) {
            (s - 3, 1)
        } else {
            ((s + 1) % 4, -1)
        }
    }

    /// Isometry mapping side s onto side (s + 4) mod 8.
    pub fn side_map(&self, s: usize) -> Mobius {
        let (k, dir) = self.side_pairing(s);
        if dir > 0 {
            self.generators[k]
        } else {
            self.generators[k].inverse()
        }
    }

    pub fn opposite_side(&self, s: usize) -> usize {
        (s + 4) % 8
    }

    /// Letters a, b, c, d with a b a^-1 b^-1 c d c^-1 d^-1 = +-identity.
    pub fn commutator_generators(&self) -> [Mobius; 4] {
        let [g0, g1, g2, g3] = &self.generators;
        [
            *g0,
            g1.inverse(),
            g2.inverse().compose(g3),
            g0.compose(&g1.inverse()).compose(g2),
        ]
    }

    /// Entrywise defect of the relation word from +-identity.
    pub fn relation_defect(&self) -> f64 {
        let [a, b, c, d] = self.commutator_generators();
        let w = a
            .compose(&b)
            .compose(&a.inverse())
            .compose(&b.inverse())
            .compose(&c)
            .compose(&d)
            .compose(&c.inverse())
            .compose(&d.inverse());
        w.dist(&Mobius::identity())
    }

    /// Interior angle at corner j, measured between the tangents of the two
    /// geodesic sides meeting there.
    pub fn interior_angle(&self, j: usize) -> f64 {
        let v = self.vertices[j];
        let prev = self.vertices[(j + 7) % 8];
        let next = self.vertices[(j + 1) % 8];
        // Translate the corner to the origin: geodesics through the origin
        // are Euclidean straight lines, so the angle is read off directly.
        let t = Mobius::translate_to_origin(v);
        let a = t.apply(prev).arg();
        let b = t.apply(next).arg();
        let mut d = (a - b).abs();
        if d > PI {
            d = 2.0 * PI - d;
        }
        d
    }

    /// Geodesic translation length shared by all four generators.
    pub fn translation_length(&self) -> f64 {
        // cosh(l/2) = |tr|/2 for a hyperbolic element of SL(2, R).
        let t = self.real_generators[0][0][0] + self.real_generators[0][1][1];
        2.0 * (t.abs() / 2.0).acosh()
    }
}

/// Builds the octagon domain. The circumradius R satisfies
/// cosh R = cot^2(pi/8), forced by requiring angle pi/4 at every corner.
pub fn build_bolza_domain() -> Result<FuchsianDomain> {
    let s2 = 2.0f64.sqrt();
    let cosh_r = 3.0 + 2.0 * s2; // cot^2(pi/8) = (1 + sqrt 2)^2
    let sinh_r = (cosh_r * cosh_r - 1.0).sqrt();
    let r = sinh_r / (1.0 + cosh_r); // tanh(R/2)

    let mut vertices = [cplx(0.0, 0.0); 8];
    for (j, v) in vertices.iter_mut().enumerate() {
        let th = (j as f64 + 0.5) * PI / 4.0;
        *v = cplx(r * th.cos(), r * th.sin());
    }

    // SU(1,1) generators: g_k = [[1+s2, b e^{i k pi/4}], [conj, 1+s2]] with
    // |b|^2 = 2 + 2 s2, so det = 1 exactly.
    let bmod = (2.0 + 2.0 * s2).sqrt();
    let mut generators = [Mobius::identity(); 4];
    for (k, g) in generators.iter_mut().enumerate() {
        let ph = cplx(0.0, k as f64 * PI / 4.0).exp();
        let b = ph * bmod;
        *g = Mobius::new(cplx(1.0 + s2, 0.0), b, b.conj(), cplx(1.0 + s2, 0.0));
    }

    let mut real_generators = [[[0.0; 2]; 2]; 4];
    let mut real_inverses = [[[0.0; 2]; 2]; 4];
    for k in 0..4 {
        real_generators[k] = generators[k].to_real_sl2();
        real_inverses[k] = generators[k].inverse().to_real_sl2();
    }

    let dom = FuchsianDomain {
        vertices,
        generators,
        real_generators,
        real_inverses,
    };

    // Consistency gates on the construction itself.
    let mut angle_sum = 0.0;
    for j in 0..8 {
        let a = dom.interior_angle(j);
        if (a - PI / 4.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "corner {j} angle {a} differs from pi/4"
            )));
        }
        angle_sum += a;
    }
    if (angle_sum - 2.0 * PI).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "angle sum {angle_sum} differs from 2 pi"
        )));
    }
    let defect = dom.relation_defect();
    if defect > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "relation word defect {defect:e}"
        )));
    }
    for s in 0..8 {
        let g = dom.side_map(s);
        let p = g.apply(dom.vertices[s]);
        let q = g.apply(dom.vertices[(s + 1) % 8]);
        let o = dom.opposite_side(s);
        let (e0, e1) = (dom.vertices[o], dom.vertices[(o + 1) % 8]);
        let matched = ((p - e0).norm() < 1e-9 && (q - e1).norm() < 1e-9)
            || ((p - e1).norm() < 1e-9 && (q - e0).norm() < 1e-9);
        if !matched {
            return Err(Error::InvalidInput(format!(
                "side {s} does not map onto side {o}"
            )));
        }
    }
    Ok(dom)
}
