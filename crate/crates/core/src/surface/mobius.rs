use crate::Cplx;

/// Möbius transformation z -> (a z + b) / (c z + d), kept with det = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub a: Cplx,
    pub b: Cplx,
    pub c: Cplx,
    pub d: Cplx,
}

impl Mobius {
    pub fn new(a: Cplx, b: Cplx, c: Cplx, d: Cplx) -> Self {
        let det = a * d - b * c;
        let s = det.sqrt();
        Mobius {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        }
    }

    pub fn identity() -> Self {
        Mobius {
            a: Cplx::new(1.0, 0.0),
            b: Cplx::new(0.0, 0.0),
            c: Cplx::new(0.0, 0.0),
            d: Cplx::new(1.0, 0.0),
        }
    }

    pub fn apply(&self, z: Cplx) -> Cplx {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Derivative of the map at z (det is 1 by construction).
    pub fn deriv(&self, z: Cplx) -> Cplx {
        let den = self.c * z + self.d;
        1.0 / (den * den)
    }

    /// self after other: (self * other)(z) = self(other(z)).
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// Disk automorphism sending p to 0: z -> (z - p) / (1 - conj(p) z).
    pub fn translate_to_origin(p: Cplx) -> Mobius {
        Mobius::new(
            Cplx::new(1.0, 0.0),
            -p,
            -p.conj(),
            Cplx::new(1.0, 0.0),
        )
    }

    /// Conjugate by the Cayley transform to a real SL(2, R) matrix acting on
    /// the upper half-plane. Panics if the imaginary residue exceeds 1e-10
    /// (i.e. the map was not a disk isometry commuting with the real form).
    pub fn to_real_sl2(&self) -> [[f64; 2]; 2] {
        // C = [[1, -i], [1, i]] maps H to D; R = C^-1 G C (det factors cancel).
        let i = Cplx::new(0.0, 1.0);
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let gc = [[a + b, -i * a + i * b], [c + d, -i * c + i * d]];
        // C^-1 = (1/(2i)) [[i, i], [-1, 1]]
        let inv = [[i, i], [Cplx::new(-1.0, 0.0), Cplx::new(1.0, 0.0)]];
        let two_i = Cplx::new(0.0, 2.0);
        let mut r = [[Cplx::new(0.0, 0.0); 2]; 2];
        for row in 0..2 {
            for col in 0..2 {
                let mut s = Cplx::new(0.0, 0.0);
                for k in 0..2 {
                    s += inv[row][k] * gc[k][col];
                }
                r[row][col] = s / two_i;
            }
        }
        let mut out = [[0.0f64; 2]; 2];
        for row in 0..2 {
            for col in 0..2 {
                assert!(
                    r[row][col].im.abs() < 1e-10,
                    "map is not conjugate to a real matrix"
                );
                out[row][col] = r[row][col].re;
            }
        }
        // Fix the overall sign so the trace convention is deterministic.
        let det = out[0][0] * out[1][1] - out[0][1] * out[1][0];
        debug_assert!((det - 1.0).abs() < 1e-9, "determinant {det}");
        out
    }

    pub fn from_real_sl2(m: [[f64; 2]; 2]) -> Mobius {
        let i = Cplx::new(0.0, 1.0);
        let a = Cplx::new(m[0][0], 0.0);
        let b = Cplx::new(m[0][1], 0.0);
        let c = Cplx::new(m[1][0], 0.0);
        let d = Cplx::new(m[1][1], 0.0);
        // G = C * R * C^-1 with C = [[1, -i], [1, i]].
        let rcinv = [
            [(a * i - b) / Cplx::new(0.0, 2.0), (a * i + b) / Cplx::new(0.0, 2.0)],
            [(c * i - d) / Cplx::new(0.0, 2.0), (c * i + d) / Cplx::new(0.0, 2.0)],
        ];
        let cm = [[Cplx::new(1.0, 0.0), -i], [Cplx::new(1.0, 0.0), i]];
        let mut g = [[Cplx::new(0.0, 0.0); 2]; 2];
        for row in 0..2 {
            for col in 0..2 {
                let mut s = Cplx::new(0.0, 0.0);
                for k in 0..2 {
                    s += cm[row][k] * rcinv[k][col];
                }
                g[row][col] = s;
            }
        }
        Mobius::new(g[0][0], g[0][1], g[1][0], g[1][1])
    }

    /// Max entry distance to another map, minimized over the +-1 lift.
    pub fn dist(&self, other: &Mobius) -> f64 {
        let d1 = (self.a - other.a)
            .norm()
            .max((self.b - other.b).norm())
            .max((self.c - other.c).norm())
            .max((self.d - other.d).norm());
        let d2 = (self.a + other.a)
            .norm()
            .max((self.b + other.b).norm())
            .max((self.c + other.c).norm())
            .max((self.d + other.d).norm());
        d1.min(d2)
    }
}

/// Hyperbolic distance between two points of the unit disk.
pub fn hyperbolic_distance(p: Cplx, q: Cplx) -> f64 {
    let t = ((q - p) / (1.0 - p.conj() * q)).norm();
    2.0 * t.atanh()
}

/// Hyperbolic midpoint of p and q in the unit disk.
pub fn hyperbolic_midpoint(p: Cplx, q: Cplx) -> Cplx {
    let t = Mobius::translate_to_origin(p);
    let qq = t.apply(q);
    let r = qq.norm();
    if r == 0.0 {
        return p;
    }
    let half = ((r.atanh()) * 0.5).tanh();
    let m = qq / r * half;
    t.inverse().apply(m)
}
