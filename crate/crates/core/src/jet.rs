//! Third-order forward-mode jets in three chart variables.
//!
//! A [`Jet3`] stores the value and all partial derivatives through total
//! order 3 of a scalar function of `(s, t, u)`, in the plain-derivative
//! convention: the coefficient at multi-index `(a, b, c)` is the partial
//! derivative `d^{a+b+c} f / ds^a dt^b du^c` itself (no factorial scaling).
//! Arithmetic propagates derivatives exactly (to round-off) via the Leibniz
//! rule and Faa di Bruno's formula, so downstream geometry never needs
//! finite differencing.
//!
//! The 20 multi-indices of order <= 3 are enumerated in [`ORDERS`]: order 0,
//! then the three first derivatives, six second, ten third, each block in
//! lexicographic order by decreasing `s`-degree.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use crate::GeomError;

/// Number of multi-indices in three variables with total order <= 3.
pub const JET_LEN: usize = 20;

/// Multi-index table: `ORDERS[i] = (a, b, c)` means slot `i` holds
/// `d^{a+b+c} f / ds^a dt^b du^c`.
pub const ORDERS: [(usize, usize, usize); JET_LEN] = [
    (0, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (2, 0, 0),
    (1, 1, 0),
    (1, 0, 1),
    (0, 2, 0),
    (0, 1, 1),
    (0, 0, 2),
    (3, 0, 0),
    (2, 1, 0),
    (2, 0, 1),
    (1, 2, 0),
    (1, 1, 1),
    (1, 0, 2),
    (0, 3, 0),
    (0, 2, 1),
    (0, 1, 2),
    (0, 0, 3),
];

/// Slot index for a multi-index, or `None` when the total order exceeds 3.
pub fn index_of(a: usize, b: usize, c: usize) -> Option<usize> {
    ORDERS.iter().position(|&o| o == (a, b, c))
}

fn binom(n: usize, k: usize) -> f64 {
    const TABLE: [[f64; 4]; 4] = [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0],
        [1.0, 3.0, 3.0, 1.0],
    ];
    TABLE[n][k]
}

/// Leibniz product table: entries `(k, i, j, w)` meaning
/// `out[k] += w * a[i] * b[j]`, with `w` the product of per-variable
/// binomial coefficients.
fn mul_table() -> &'static Vec<(usize, usize, usize, f64)> {
    static TABLE: OnceLock<Vec<(usize, usize, usize, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::new();
        for (k, &(ka, kb, kc)) in ORDERS.iter().enumerate() {
            for (i, &(ia, ib, ic)) in ORDERS.iter().enumerate() {
                if ia <= ka && ib <= kb && ic <= kc {
                    let j = index_of(ka - ia, kb - ib, kc - ic).unwrap();
                    let w = binom(ka, ia) * binom(kb, ib) * binom(kc, ic);
                    t.push((k, i, j, w));
                }
            }
        }
        t
    })
}

/// Value plus all partial derivatives through order 3 in `(s, t, u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    c: [f64; JET_LEN],
}

/// A point of Minkowski 4-space carried as four coordinate jets.
pub type JetPoint4 = [Jet3; 4];

impl Jet3 {
    pub const ZERO: Jet3 = Jet3 { c: [0.0; JET_LEN] };

    /// Constant jet: value `v`, all derivatives zero.
    pub fn constant(v: f64) -> Jet3 {
        let mut c = [0.0; JET_LEN];
        c[0] = v;
        Jet3 { c }
    }

    /// Coordinate jet for chart variable `var` (0 = s, 1 = t, 2 = u) with
    /// value `v`.
    pub fn variable(v: f64, var: usize) -> Jet3 {
        let mut c = [0.0; JET_LEN];
        c[0] = v;
        c[1 + var] = 1.0;
        Jet3 { c }
    }

    /// Coordinate jets for a chart point: `(s, t, u)` as jets.
    pub fn seed(s: f64, t: f64, u: f64) -> (Jet3, Jet3, Jet3) {
        (
            Jet3::variable(s, 0),
            Jet3::variable(t, 1),
            Jet3::variable(u, 2),
        )
    }

    /// Jet of a profile function `f(s)`: the four numbers are
    /// `[f, f', f'', f''']` at the seed point; all `t`/`u` derivatives are
    /// zero.
    pub fn univariate_s(vals: [f64; 4]) -> Jet3 {
        let mut c = [0.0; JET_LEN];
        c[0] = vals[0];
        c[index_of(1, 0, 0).unwrap()] = vals[1];
        c[index_of(2, 0, 0).unwrap()] = vals[2];
        c[index_of(3, 0, 0).unwrap()] = vals[3];
        Jet3 { c }
    }

    pub fn coeffs(&self) -> &[f64; JET_LEN] {
        &self.c
    }

    /// Partial derivative at multi-index `(a, b, c)`; `None` when the total
    /// order exceeds 3.
    pub fn extract(&self, a: usize, b: usize, c: usize) -> Option<f64> {
        index_of(a, b, c).map(|i| self.c[i])
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// First derivative with respect to chart variable `v`.
    #[inline]
    pub fn d1(&self, v: usize) -> f64 {
        self.c[1 + v]
    }

    /// Second derivative with respect to chart variables `v1`, `v2` (any
    /// order).
    pub fn d2(&self, v1: usize, v2: usize) -> f64 {
        let mut m = [0usize; 3];
        m[v1] += 1;
        m[v2] += 1;
        self.c[index_of(m[0], m[1], m[2]).unwrap()]
    }

    /// Third derivative with respect to chart variables `v1`, `v2`, `v3`.
    pub fn d3(&self, v1: usize, v2: usize, v3: usize) -> f64 {
        let mut m = [0usize; 3];
        m[v1] += 1;
        m[v2] += 1;
        m[v3] += 1;
        self.c[index_of(m[0], m[1], m[2]).unwrap()]
    }

    /// Largest absolute coefficient (used for relative guards).
    pub fn norm_inf(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Jet of the partial derivative with respect to chart variable `dir`.
    ///
    /// In the plain-derivative convention this shifts multi-indices by one in
    /// `dir`. The order-3 slots of the result are unknown (they would need
    /// order-4 data) and are set to zero, so one trusted order is lost.
    pub fn derivative(&self, dir: usize) -> Jet3 {
        let mut c = [0.0; JET_LEN];
        for (i, &(a, b, cc)) in ORDERS.iter().enumerate() {
            if a + b + cc >= 3 {
                continue;
            }
            let mut m = [a, b, cc];
            m[dir] += 1;
            c[i] = self.c[index_of(m[0], m[1], m[2]).unwrap()];
        }
        Jet3 { c }
    }

    /// Composition `F(g)` for a univariate outer function given by its
    /// derivative values `f = [F, F', F'', F''']` at `g.value()`, via Faa di
    /// Bruno's formula in variable-list form.
    pub fn compose(f: [f64; 4], g: &Jet3) -> Jet3 {
        let mut c = [0.0; JET_LEN];
        c[0] = f[0];
        for (slot, &(a, b, cc)) in ORDERS.iter().enumerate().skip(1) {
            // Expand the multi-index into its variable list, e.g. (2,0,1)
            // becomes [0,0,2].
            let mut vars = [0usize; 3];
            let mut n = 0;
            for (v, &count) in [a, b, cc].iter().enumerate() {
                for _ in 0..count {
                    vars[n] = v;
                    n += 1;
                }
            }
            c[slot] = match n {
                1 => f[1] * g.d1(vars[0]),
                2 => f[2] * g.d1(vars[0]) * g.d1(vars[1]) + f[1] * g.d2(vars[0], vars[1]),
                3 => {
                    let (i, j, k) = (vars[0], vars[1], vars[2]);
                    f[3] * g.d1(i) * g.d1(j) * g.d1(k)
                        + f[2]
                            * (g.d2(i, j) * g.d1(k)
                                + g.d2(i, k) * g.d1(j)
                                + g.d2(j, k) * g.d1(i))
                        + f[1] * g.d3(i, j, k)
                }
                _ => unreachable!(),
            };
        }
        Jet3 { c }
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.value().exp();
        Jet3::compose([e, e, e, e], self)
    }

    pub fn ln(&self) -> Result<Jet3, GeomError> {
        let v = self.value();
        if v <= 0.0 {
            return Err(GeomError::FunctionDomain {
                func: "ln",
                value: v,
            });
        }
        Ok(Jet3::compose(
            [v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)],
            self,
        ))
    }

    pub fn sqrt(&self) -> Result<Jet3, GeomError> {
        let v = self.value();
        if v <= 0.0 {
            return Err(GeomError::FunctionDomain {
                func: "sqrt",
                value: v,
            });
        }
        let r = v.sqrt();
        Ok(Jet3::compose(
            [
                r,
                0.5 / r,
                -0.25 / (r * v),
                0.375 / (r * v * v),
            ],
            self,
        ))
    }

    /// `sqrt(|g|)`, branched on the sign of the value; rejects values too
    /// close to the branch point.
    pub fn sqrt_abs(&self) -> Result<Jet3, GeomError> {
        let v = self.value();
        if v.abs() <= 1e-300 {
            return Err(GeomError::FunctionDomain {
                func: "sqrt_abs",
                value: v,
            });
        }
        if v > 0.0 {
            self.sqrt()
        } else {
            let w = -v;
            let r = w.sqrt();
            Ok(Jet3::compose(
                [r, -0.5 / r, -0.25 / (r * w), -0.375 / (r * w * w)],
                self,
            ))
        }
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.value().sin_cos();
        Jet3::compose([s, c, -s, -c], self)
    }

    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.value().sin_cos();
        Jet3::compose([c, -s, -c, s], self)
    }

    pub fn sinh(&self) -> Jet3 {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        Jet3::compose([s, c, s, c], self)
    }

    pub fn cosh(&self) -> Jet3 {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        Jet3::compose([c, s, c, s], self)
    }

    /// Multiplicative inverse; rejects denominators whose value is tiny
    /// relative to the jet's coefficient scale.
    pub fn recip(&self) -> Result<Jet3, GeomError> {
        let v = self.value();
        if v.abs() <= 1e-14 * (1.0 + self.norm_inf()) {
            return Err(GeomError::DivisionNearZero { value: v });
        }
        let iv = 1.0 / v;
        Ok(Jet3::compose(
            [iv, -iv * iv, 2.0 * iv * iv * iv, -6.0 * iv * iv * iv * iv],
            self,
        ))
    }

    /// Jet division `self / rhs`.
    pub fn div(&self, rhs: &Jet3) -> Result<Jet3, GeomError> {
        Ok(*self * rhs.recip()?)
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(mut self, rhs: Jet3) -> Jet3 {
        for i in 0..JET_LEN {
            self.c[i] += rhs.c[i];
        }
        self
    }
}

impl AddAssign for Jet3 {
    fn add_assign(&mut self, rhs: Jet3) {
        for i in 0..JET_LEN {
            self.c[i] += rhs.c[i];
        }
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(mut self, rhs: Jet3) -> Jet3 {
        for i in 0..JET_LEN {
            self.c[i] -= rhs.c[i];
        }
        self
    }
}

impl SubAssign for Jet3 {
    fn sub_assign(&mut self, rhs: Jet3) {
        for i in 0..JET_LEN {
            self.c[i] -= rhs.c[i];
        }
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(mut self) -> Jet3 {
        for x in self.c.iter_mut() {
            *x = -*x;
        }
        self
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        let mut c = [0.0; JET_LEN];
        for &(k, i, j, w) in mul_table().iter() {
            c[k] += w * self.c[i] * rhs.c[j];
        }
        Jet3 { c }
    }
}

impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(mut self, rhs: f64) -> Jet3 {
        for x in self.c.iter_mut() {
            *x *= rhs;
        }
        self
    }
}

impl Mul<Jet3> for f64 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        rhs * self
    }
}

impl Add<f64> for Jet3 {
    type Output = Jet3;
    fn add(mut self, rhs: f64) -> Jet3 {
        self.c[0] += rhs;
        self
    }
}

impl Add<Jet3> for f64 {
    type Output = Jet3;
    fn add(self, rhs: Jet3) -> Jet3 {
        rhs + self
    }
}

impl Sub<f64> for Jet3 {
    type Output = Jet3;
    fn sub(mut self, rhs: f64) -> Jet3 {
        self.c[0] -= rhs;
        self
    }
}

impl Sub<Jet3> for f64 {
    type Output = Jet3;
    fn sub(self, rhs: Jet3) -> Jet3 {
        -rhs + self
    }
}

/// Lorentzian inner product of two jet points, as a jet.
pub fn inner4_jet(a: &JetPoint4, b: &JetPoint4) -> Jet3 {
    a[1] * b[1] + a[2] * b[2] + a[3] * b[3] - a[0] * b[0]
}

/// Lorentzian cross product of three jet points (see
/// [`crate::minkowski::cross4`]), as a jet point.
pub fn cross4_jet(a: &JetPoint4, b: &JetPoint4, c: &JetPoint4) -> JetPoint4 {
    let minor = |i: usize, j: usize, k: usize| -> Jet3 {
        a[i] * (b[j] * c[k] - b[k] * c[j]) - a[j] * (b[i] * c[k] - b[k] * c[i])
            + a[k] * (b[i] * c[j] - b[j] * c[i])
    };
    let c0 = -minor(1, 2, 3);
    let c1 = minor(0, 2, 3);
    let c2 = -minor(0, 1, 3);
    let c3 = minor(0, 1, 2);
    [-c0, c1, c2, c3]
}
