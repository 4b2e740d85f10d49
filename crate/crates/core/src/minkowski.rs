//! Linear algebra over Minkowski 4-space and small dense 3x3 operators.
//!
//! The ambient inner product is `<a,b> = -a0*b0 + a1*b1 + a2*b2 + a3*b3`
//! (index 0 is the timelike coordinate). Everything here is deterministic:
//! given identical inputs the functions return bit-identical outputs, which
//! the report golden tests rely on.

use crate::config::Tolerances;
use crate::GeomError;

/// A vector in Minkowski 4-space; component 0 is the timelike coordinate.
pub type Vec4 = [f64; 4];

/// A 3x3 real matrix, row-major.
pub type Mat3 = [[f64; 3]; 3];

/// Causal character of a vector under the ambient inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalClass {
    Timelike,
    Spacelike,
    Null,
}

/// Lorentzian inner product `-a0*b0 + a1*b1 + a2*b2 + a3*b3`.
#[inline]
pub fn inner4(a: Vec4, b: Vec4) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Euclidean dot product of 4-vectors (used only for scale estimates).
#[inline]
pub fn dot_euclid4(a: Vec4, b: Vec4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[inline]
pub fn add4(a: Vec4, b: Vec4) -> Vec4 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

#[inline]
pub fn sub4(a: Vec4, b: Vec4) -> Vec4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

#[inline]
pub fn scale4(a: Vec4, c: f64) -> Vec4 {
    [a[0] * c, a[1] * c, a[2] * c, a[3] * c]
}

/// Classify the causal character of `v`. The null band is relative:
/// `|<v,v>|` is compared against `tol.null * ||v||^2` in the Euclidean norm,
/// so the classification is scale-invariant. The zero vector is Null.
pub fn causal_class(v: Vec4, tol: &Tolerances) -> CausalClass {
    let q = inner4(v, v);
    let scale = dot_euclid4(v, v);
    if q.abs() <= tol.null * scale.max(f64::MIN_POSITIVE) {
        CausalClass::Null
    } else if q < 0.0 {
        CausalClass::Timelike
    } else {
        CausalClass::Spacelike
    }
}

/// Normalize a non-null vector to unit causal norm.
///
/// Returns `(v / sqrt(|<v,v>|), sign <v,v>)`; the output `u` satisfies
/// `<u,u> = ±1`. Fails with [`GeomError::NullVector`] when `v` is null under
/// the relative tolerance (see [`causal_class`]).
pub fn normalize4(v: Vec4, tol: &Tolerances) -> Result<(Vec4, f64), GeomError> {
    let q = inner4(v, v);
    let scale = dot_euclid4(v, v);
    if q.abs() <= tol.null * scale.max(f64::MIN_POSITIVE) {
        return Err(GeomError::NullVector { value: q });
    }
    let inv = 1.0 / q.abs().sqrt();
    Ok((scale4(v, inv), q.signum()))
}

/// Lorentzian cross product: the unique `w` with `inner4(w, d) = det(a,b,c,d)`
/// (rows in that order) for every `d`. It is metric-orthogonal to `a`, `b`,
/// and `c`, and vanishes when they are linearly dependent.
///
/// Computed by cofactor expansion of the 4x4 determinant along the `d` row,
/// then raising the index (flipping the sign of the time component).
pub fn cross4(a: Vec4, b: Vec4, c: Vec4) -> Vec4 {
    let minor = |i: usize, j: usize, k: usize| -> f64 {
        a[i] * (b[j] * c[k] - b[k] * c[j]) - a[j] * (b[i] * c[k] - b[k] * c[i])
            + a[k] * (b[i] * c[j] - b[j] * c[i])
    };
    // Cofactors of the fourth row (indices are the retained columns).
    let c0 = -minor(1, 2, 3);
    let c1 = minor(0, 2, 3);
    let c2 = -minor(0, 1, 3);
    let c3 = minor(0, 1, 2);
    // inner4(w, d) = c0 d0 + c1 d1 + c2 d2 + c3 d3 requires w0 = -c0.
    [-c0, c1, c2, c3]
}

// ---------------------------------------------------------------------------
// 3-vector helpers
// ---------------------------------------------------------------------------

#[inline]
pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

// ---------------------------------------------------------------------------
// 3x3 matrices
// ---------------------------------------------------------------------------

#[inline]
pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[inline]
pub fn trace3(m: &Mat3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

/// Adjugate (transposed cofactor matrix): `m * adjugate3(m) = det3(m) * I`.
pub fn adjugate3(m: &Mat3) -> Mat3 {
    [
        [
            m[1][1] * m[2][2] - m[1][2] * m[2][1],
            m[0][2] * m[2][1] - m[0][1] * m[2][2],
            m[0][1] * m[1][2] - m[0][2] * m[1][1],
        ],
        [
            m[1][2] * m[2][0] - m[1][0] * m[2][2],
            m[0][0] * m[2][2] - m[0][2] * m[2][0],
            m[0][2] * m[1][0] - m[0][0] * m[1][2],
        ],
        [
            m[1][0] * m[2][1] - m[1][1] * m[2][0],
            m[0][1] * m[2][0] - m[0][0] * m[2][1],
            m[0][0] * m[1][1] - m[0][1] * m[1][0],
        ],
    ]
}

#[inline]
pub fn mat3_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [dot3(m[0], v), dot3(m[1], v), dot3(m[2], v)]
}

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn frobenius3(m: &Mat3) -> f64 {
    m.iter()
        .flat_map(|row| row.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
}

/// Solve `m * x = rhs` by the adjugate (Cramer) formula.
///
/// Fails with [`GeomError::SingularMatrix`] when `|det m|` falls below
/// `tol.det * ||m||_F^3`, the scale-invariant singularity threshold.
pub fn solve3(m: &Mat3, rhs: [f64; 3], tol: &Tolerances) -> Result<[f64; 3], GeomError> {
    let det = det3(m);
    let scale = frobenius3(m).max(f64::MIN_POSITIVE);
    if det.abs() <= tol.det * scale * scale * scale {
        return Err(GeomError::SingularMatrix { det });
    }
    let adj = adjugate3(m);
    let y = mat3_vec(&adj, rhs);
    Ok([y[0] / det, y[1] / det, y[2] / det])
}

// ---------------------------------------------------------------------------
// Symmetric-free 3x3 eigensolver (general real matrices)
// ---------------------------------------------------------------------------

/// Eigen-decomposition report for a real 3x3 matrix.
#[derive(Debug, Clone, Copy)]
pub struct SpectralResult {
    /// Eigenvalues sorted descending (real parts only when a complex pair is
    /// detected).
    pub eigenvalues: [f64; 3],
    /// Row `i` is the Euclidean-unit eigenvector for `eigenvalues[i]`, with a
    /// deterministic sign (largest-magnitude component positive). All zeros
    /// when the matrix has a complex eigenvalue pair.
    pub eigenvectors: [[f64; 3]; 3],
    /// True when the matrix has three real eigenvalues and the computed
    /// eigenvectors are linearly independent.
    pub is_real_diagonalizable: bool,
    /// `max_i ||M v_i - lambda_i v_i||` relative to `||M||_F`; infinite when a
    /// complex pair is detected.
    pub residual: f64,
}

/// Eigenvalues/eigenvectors of a general real 3x3 matrix.
///
/// The characteristic cubic is solved analytically (trigonometric method for
/// three real roots) on a Frobenius-normalized copy, each root is polished
/// with Newton steps, and eigenvectors come from null-space extraction via
/// row cross products with a rank-deficiency fallback for repeated
/// eigenvalues. A complex pair (normalized discriminant below `-tol.disc`)
/// is reported via `is_real_diagonalizable = false` rather than an error.
pub fn eig3(m: &Mat3, tol: &Tolerances) -> SpectralResult {
    let fro = frobenius3(m);
    if fro < 1e-150 {
        return SpectralResult {
            eigenvalues: [0.0; 3],
            eigenvectors: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            is_real_diagonalizable: true,
            residual: 0.0,
        };
    }
    let inv = 1.0 / fro;
    let mut a = *m;
    for row in a.iter_mut() {
        for x in row.iter_mut() {
            *x *= inv;
        }
    }

    // Characteristic polynomial p(l) = l^3 - c2 l^2 + c1 l - c0.
    let c2 = trace3(&a);
    let c1 = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let c0 = det3(&a);

    // Depressed cubic mu^3 + p mu + q with l = mu + c2/3.
    let p = c1 - c2 * c2 / 3.0;
    let q = -c0 + c1 * c2 / 3.0 - 2.0 * c2 * c2 * c2 / 27.0;
    let disc = -4.0 * p * p * p - 27.0 * q * q;

    if disc < -tol.disc {
        // One real root plus a complex-conjugate pair.
        let sq = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        let root = (-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt();
        let mut lam = [root + c2 / 3.0, -root / 2.0 + c2 / 3.0, -root / 2.0 + c2 / 3.0];
        lam.sort_by(|x, y| y.partial_cmp(x).unwrap());
        return SpectralResult {
            eigenvalues: [lam[0] * fro, lam[1] * fro, lam[2] * fro],
            eigenvectors: [[0.0; 3]; 3],
            is_real_diagonalizable: false,
            residual: f64::INFINITY,
        };
    }

    // Three real roots.
    let mut lam = if p < -1e-30 {
        let m2 = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m2)).clamp(-1.0, 1.0);
        let phi = arg.acos();
        let shift = c2 / 3.0;
        [
            m2 * (phi / 3.0).cos() + shift,
            m2 * ((phi - 2.0 * std::f64::consts::PI) / 3.0).cos() + shift,
            m2 * ((phi - 4.0 * std::f64::consts::PI) / 3.0).cos() + shift,
        ]
    } else {
        // p >= 0 with non-negative discriminant forces p ~ 0 and q ~ 0:
        // a (near-)triple root.
        let r = (-q).cbrt() + c2 / 3.0;
        [r, r, r]
    };

    // Newton polish on the normalized characteristic polynomial.
    for l in lam.iter_mut() {
        for _ in 0..3 {
            let f = ((*l - c2) * *l + c1) * *l - c0;
            let df = (3.0 * *l - 2.0 * c2) * *l + c1;
            if df.abs() < 1e-8 {
                break;
            }
            let step = f / df;
            *l -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
    }
    lam.sort_by(|x, y| y.partial_cmp(x).unwrap());

    // Group (near-)equal eigenvalues so repeated roots share one null-space
    // extraction; the threshold is on the normalized scale.
    const TAU_CLUSTER: f64 = 1e-7;
    let mut clusters: Vec<(usize, usize)> = Vec::new(); // (start, len)
    let mut start = 0;
    for i in 1..=3 {
        if i == 3 || (lam[i - 1] - lam[i]).abs() > TAU_CLUSTER {
            clusters.push((start, i - start));
            start = i;
        }
    }

    // Refine repeated roots through the trace identity. The closed form loses
    // half the working precision on a double root and two thirds on a triple
    // root (square/cube root of the rounding error), which would leave
    // `a - lambda I` too far from singular for the rank tests below. A triple
    // root is exactly trace/3; a double root is (trace - simple)/2 with the
    // simple root already polished to machine precision.
    if clusters.len() == 1 {
        let mean = c2 / 3.0;
        lam = [mean; 3];
    } else if clusters.len() == 2 {
        let simple = clusters
            .iter()
            .find(|c| c.1 == 1)
            .map(|&(lo, _)| lam[lo])
            .unwrap_or(lam[0]);
        for &(lo, len) in &clusters {
            if len == 2 {
                let mean = (c2 - simple) / 2.0;
                lam[lo] = mean;
                lam[lo + 1] = mean;
            }
        }
    }

    let mut vecs = [[0.0; 3]; 3];
    for &(lo, len) in &clusters {
        let found = null_space_vectors(&a, lam[lo], len);
        for (k, v) in found.iter().enumerate() {
            vecs[lo + k] = *v;
        }
    }

    // Deterministic sign: the largest-magnitude component is positive.
    for v in vecs.iter_mut() {
        let mut best = 0;
        for j in 1..3 {
            if v[j].abs() > v[best].abs() {
                best = j;
            }
        }
        if v[best] < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }

    let mut residual: f64 = 0.0;
    for i in 0..3 {
        let av = mat3_vec(&a, vecs[i]);
        let mut r2 = 0.0;
        for j in 0..3 {
            let d = av[j] - lam[i] * vecs[i][j];
            r2 += d * d;
        }
        residual = residual.max(r2.sqrt());
    }

    let vmat = [vecs[0], vecs[1], vecs[2]];
    let independent = det3(&vmat).abs() > 1e-6;

    SpectralResult {
        eigenvalues: [lam[0] * fro, lam[1] * fro, lam[2] * fro],
        eigenvectors: vecs,
        is_real_diagonalizable: independent,
        residual,
    }
}

/// Extract `count` unit vectors spanning (an estimate of) the null space of
/// `a - lambda I`. For `count` larger than the actual null-space dimension
/// the returned vectors repeat, which the caller detects as dependence.
fn null_space_vectors(a: &Mat3, lambda: f64, count: usize) -> Vec<[f64; 3]> {
    let b = [
        [a[0][0] - lambda, a[0][1], a[0][2]],
        [a[1][0], a[1][1] - lambda, a[1][2]],
        [a[2][0], a[2][1], a[2][2] - lambda],
    ];
    const TAU_RANK: f64 = 1e-8;

    // Rank-2 path: the null line is the largest cross product of two rows.
    let crosses = [
        cross3(b[0], b[1]),
        cross3(b[0], b[2]),
        cross3(b[1], b[2]),
    ];
    let mut best = 0;
    for j in 1..3 {
        if norm3(crosses[j]) > norm3(crosses[best]) {
            best = j;
        }
    }
    let best_norm = norm3(crosses[best]);
    if best_norm > TAU_RANK {
        let v = [
            crosses[best][0] / best_norm,
            crosses[best][1] / best_norm,
            crosses[best][2] / best_norm,
        ];
        // A defective repeated eigenvalue lands here with count > 1; the
        // duplicated vector makes the eigenvector matrix singular, which the
        // caller reports as non-diagonalizable.
        return vec![v; count];
    }

    // Rank-1 path: null space is the plane orthogonal to the largest row.
    let mut row = 0;
    for j in 1..3 {
        if norm3(b[j]) > norm3(b[row]) {
            row = j;
        }
    }
    let rn = norm3(b[row]);
    if rn > TAU_RANK {
        let r = [b[row][0] / rn, b[row][1] / rn, b[row][2] / rn];
        // Pick the coordinate axis least aligned with the row.
        let mut axis = 0;
        for j in 1..3 {
            if r[j].abs() < r[axis].abs() {
                axis = j;
            }
        }
        let mut e = [0.0; 3];
        e[axis] = 1.0;
        let v1 = cross3(r, e);
        let n1 = norm3(v1);
        let v1 = [v1[0] / n1, v1[1] / n1, v1[2] / n1];
        let v2 = cross3(r, v1);
        let basis = [v1, v2];
        return (0..count).map(|k| basis[k.min(1)]).collect();
    }

    // Rank-0 path: everything is an eigenvector.
    let basis = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    (0..count).map(|k| basis[k.min(2)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const E0: Vec4 = [1.0, 0.0, 0.0, 0.0];
    const E1: Vec4 = [0.0, 1.0, 0.0, 0.0];
    const E2: Vec4 = [0.0, 0.0, 1.0, 0.0];
    const E3: Vec4 = [0.0, 0.0, 0.0, 1.0];

    fn det4(rows: &[Vec4; 4]) -> f64 {
        let mut total = 0.0;
        for col in 0..4 {
            let mut minor = [[0.0; 3]; 3];
            for r in 1..4 {
                let mut cc = 0;
                for c in 0..4 {
                    if c != col {
                        minor[r - 1][cc] = rows[r][c];
                        cc += 1;
                    }
                }
            }
            let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * rows[0][col] * det3(&minor);
        }
        total
    }

    fn rand_vec4(rng: &mut ChaCha8Rng) -> Vec4 {
        [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ]
    }

    #[test]
    fn inner4_signature_examples() {
        assert_eq!(inner4(E0, E0), -1.0);
        assert_eq!(inner4(E1, E1), 1.0);
        assert_eq!(inner4(E0, E1), 0.0);
        assert_eq!(inner4([1.0, 1.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0]), 0.0);
        assert_eq!(inner4([3.0, 1.0, 2.0, 2.0], [3.0, 1.0, 2.0, 2.0]), 0.0);
    }

    #[test]
    fn inner4_is_symmetric_and_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = rand_vec4(&mut rng);
            let b = rand_vec4(&mut rng);
            let c = rand_vec4(&mut rng);
            let (al, be) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            assert_eq!(inner4(a, b), inner4(b, a));
            let lhs = inner4(add4(scale4(a, al), scale4(b, be)), c);
            let rhs = al * inner4(a, c) + be * inner4(b, c);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn cross4_of_spatial_basis_is_timelike_unit() {
        assert_eq!(cross4(E1, E2, E3), E0);
    }

    #[test]
    fn cross4_matches_determinant_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let a = rand_vec4(&mut rng);
            let b = rand_vec4(&mut rng);
            let c = rand_vec4(&mut rng);
            let d = rand_vec4(&mut rng);
            let w = cross4(a, b, c);
            let expected = det4(&[a, b, c, d]);
            assert!(
                (inner4(w, d) - expected).abs() < 1e-12,
                "pairing mismatch: {} vs {}",
                inner4(w, d),
                expected
            );
        }
    }

    #[test]
    fn cross4_is_orthogonal_to_arguments_and_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let a = rand_vec4(&mut rng);
            let b = rand_vec4(&mut rng);
            let c = rand_vec4(&mut rng);
            let w = cross4(a, b, c);
            assert!(inner4(w, a).abs() < 1e-13);
            assert!(inner4(w, b).abs() < 1e-13);
            assert!(inner4(w, c).abs() < 1e-13);
            let swapped = cross4(b, a, c);
            for i in 0..4 {
                assert!((w[i] + swapped[i]).abs() < 1e-13);
            }
        }
        let a = rand_vec4(&mut rng);
        let c = rand_vec4(&mut rng);
        assert_eq!(cross4(a, a, c), [0.0; 4]);
    }

    #[test]
    fn cross4_squared_norm_is_negative_gram_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let a = rand_vec4(&mut rng);
            let b = rand_vec4(&mut rng);
            let c = rand_vec4(&mut rng);
            let w = cross4(a, b, c);
            let gram = [
                [inner4(a, a), inner4(a, b), inner4(a, c)],
                [inner4(a, b), inner4(b, b), inner4(b, c)],
                [inner4(a, c), inner4(b, c), inner4(c, c)],
            ];
            assert!((inner4(w, w) + det3(&gram)).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize4_units_and_null_rejection() {
        let tol = Tolerances::default();
        let (u, eps) = normalize4([2.0, 0.0, 0.0, 0.0], &tol).unwrap();
        assert_eq!(u, E0);
        assert_eq!(eps, -1.0);
        let (u, eps) = normalize4([0.0, 0.0, 0.0, 5.0], &tol).unwrap();
        assert_eq!(u, E3);
        assert_eq!(eps, 1.0);
        assert!(normalize4([1.0, 1.0, 0.0, 0.0], &tol).is_err());
    }

    #[test]
    fn causal_class_examples() {
        let tol = Tolerances::default();
        assert_eq!(causal_class([2.0, 1.0, 0.0, 0.0], &tol), CausalClass::Timelike);
        assert_eq!(causal_class([1.0, 2.0, 0.0, 0.0], &tol), CausalClass::Spacelike);
        assert_eq!(causal_class([1.0, 1.0, 0.0, 0.0], &tol), CausalClass::Null);
        assert_eq!(causal_class([0.0; 4], &tol), CausalClass::Null);
    }

    #[test]
    fn solve3_reproduces_rhs() {
        let tol = Tolerances::default();
        assert_eq!(
            solve3(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], [1.0, 2.0, 3.0], &tol)
                .unwrap(),
            [1.0, 2.0, 3.0]
        );
        assert_eq!(
            solve3(&[[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]], [2.0, 4.0, 6.0], &tol)
                .unwrap(),
            [1.0, 2.0, 3.0]
        );
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..50 {
            let m: Mat3 = [
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            ];
            let rhs = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            match solve3(&m, rhs, &tol) {
                Ok(x) => {
                    let back = mat3_vec(&m, x);
                    let scale = rhs.iter().map(|v| v.abs()).fold(1.0, f64::max);
                    for j in 0..3 {
                        assert!((back[j] - rhs[j]).abs() < 1e-10 * scale);
                    }
                }
                Err(_) => {
                    assert!(det3(&m).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn solve3_rejects_singular() {
        let tol = Tolerances::default();
        let rank2 = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 0.0]];
        assert!(solve3(&rank2, [1.0, 1.0, 1.0], &tol).is_err());
    }

    #[test]
    fn adjugate_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..20 {
            let m: Mat3 = [
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            ];
            let prod = mat3_mul(&m, &adjugate3(&m));
            let det = det3(&m);
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == j { det } else { 0.0 };
                    assert!((prod[i][j] - expect).abs() < 1e-12);
                }
            }
        }
    }

    /// Independent eigenvalue oracle: sign-change scan plus bisection on the
    /// characteristic polynomial evaluated as a raw determinant.
    fn eigenvalues_by_bisection(m: &Mat3) -> Vec<f64> {
        let charpoly = |lam: f64| -> f64 {
            det3(&[
                [m[0][0] - lam, m[0][1], m[0][2]],
                [m[1][0], m[1][1] - lam, m[1][2]],
                [m[2][0], m[2][1], m[2][2] - lam],
            ])
        };
        let radius = 1.0
            + m.iter()
                .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0, f64::max);
        let n = 6000;
        let mut roots = Vec::new();
        let mut prev_x = -radius;
        let mut prev_f = charpoly(prev_x);
        for i in 1..=n {
            let x = -radius + 2.0 * radius * i as f64 / n as f64;
            let f = charpoly(x);
            if prev_f == 0.0 {
                roots.push(prev_x);
            } else if prev_f * f < 0.0 {
                let (mut lo, mut hi, mut flo) = (prev_x, x, prev_f);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    let fm = charpoly(mid);
                    if flo * fm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev_x = x;
            prev_f = f;
        }
        roots
    }

    #[test]
    fn eig3_matches_bisection_oracle_on_random_matrices() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        for trial in 0..60 {
            let m: Mat3 = if trial % 2 == 0 {
                // Random symmetric matrix.
                let (a, b, c) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let (d, e, f) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                [[a, d, e], [d, b, f], [e, f, c]]
            } else {
                // Similarity transform of a random diagonal: non-symmetric
                // but real-diagonalizable.
                let diag = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
                let p: Mat3 = [
                    [1.0, rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)],
                    [rng.gen_range(-0.5..0.5), 1.0, rng.gen_range(-0.5..0.5)],
                    [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), 1.0],
                ];
                let det = det3(&p);
                if det.abs() < 0.2 {
                    continue;
                }
                let adj = adjugate3(&p);
                let mut pinv = adj;
                for row in pinv.iter_mut() {
                    for x in row.iter_mut() {
                        *x /= det;
                    }
                }
                let d: Mat3 = [[diag[0], 0.0, 0.0], [0.0, diag[1], 0.0], [0.0, 0.0, diag[2]]];
                mat3_mul(&mat3_mul(&p, &d), &pinv)
            };
            let oracle = eigenvalues_by_bisection(&m);
            if oracle.len() != 3 {
                continue; // Repeated roots give no sign change; skip.
            }
            let mut expected = oracle.clone();
            expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let spec = eig3(&m, &tol);
            assert!(spec.is_real_diagonalizable);
            let scale = frobenius3(&m).max(1.0);
            for i in 0..3 {
                assert!(
                    (spec.eigenvalues[i] - expected[i]).abs() < 1e-10 * scale,
                    "eigenvalue {i}: {} vs oracle {}",
                    spec.eigenvalues[i],
                    expected[i]
                );
                let av = mat3_vec(&m, spec.eigenvectors[i]);
                for j in 0..3 {
                    let d = av[j] - spec.eigenvalues[i] * spec.eigenvectors[i][j];
                    assert!(d.abs() < 1e-8 * scale);
                }
            }
            checked += 1;
        }
        assert!(checked > 20, "too few oracle comparisons ran: {checked}");
    }

    #[test]
    fn eig3_trace_and_determinant_invariants() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..40 {
            let (a, b, c) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let (d, e, f) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let m: Mat3 = [[a, d, e], [d, b, f], [e, f, c]];
            let spec = eig3(&m, &tol);
            let sum: f64 = spec.eigenvalues.iter().sum();
            let prod: f64 = spec.eigenvalues.iter().product();
            assert!((sum - trace3(&m)).abs() < 1e-10);
            assert!((prod - det3(&m)).abs() < 1e-10);
        }
    }

    #[test]
    fn eig3_repeated_eigenvalue_known_spectrum() {
        let tol = Tolerances::default();
        // diag(2,1,1): the classic two-distinct case.
        let spec = eig3(&[[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], &tol);
        assert!(spec.is_real_diagonalizable);
        assert!((spec.eigenvalues[0] - 2.0).abs() < 1e-12);
        assert!((spec.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert!((spec.eigenvalues[2] - 1.0).abs() < 1e-12);
        assert!(spec.residual < 1e-10);

        // Rotated symmetric matrix with spectrum (5, 2, 2): eigenvectors of
        // the repeated pair must still satisfy the eigen equation.
        let angle: f64 = 0.7;
        let (s, c) = angle.sin_cos();
        let q: Mat3 = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let qt: Mat3 = [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]];
        let d: Mat3 = [[5.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]];
        let m = mat3_mul(&mat3_mul(&q, &d), &qt);
        let spec = eig3(&m, &tol);
        assert!(spec.is_real_diagonalizable);
        assert!((spec.eigenvalues[0] - 5.0).abs() < 1e-10);
        assert!((spec.eigenvalues[1] - 2.0).abs() < 1e-10);
        assert!((spec.eigenvalues[2] - 2.0).abs() < 1e-10);
        for i in 0..3 {
            let av = mat3_vec(&m, spec.eigenvectors[i]);
            for j in 0..3 {
                assert!((av[j] - spec.eigenvalues[i] * spec.eigenvectors[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn eig3_nonsymmetric_diagonalizable_known_spectrum() {
        let tol = Tolerances::default();
        // P diag(4,1,-3) P^{-1} with a fixed well-conditioned P.
        let p: Mat3 = [[1.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]];
        let det = det3(&p); // = 2
        let adj = adjugate3(&p);
        let mut pinv = adj;
        for row in pinv.iter_mut() {
            for x in row.iter_mut() {
                *x /= det;
            }
        }
        let d: Mat3 = [[4.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -3.0]];
        let m = mat3_mul(&mat3_mul(&p, &d), &pinv);
        let spec = eig3(&m, &tol);
        assert!(spec.is_real_diagonalizable);
        assert!((spec.eigenvalues[0] - 4.0).abs() < 1e-10);
        assert!((spec.eigenvalues[1] - 1.0).abs() < 1e-10);
        assert!((spec.eigenvalues[2] + 3.0).abs() < 1e-10);
    }

    #[test]
    fn eig3_flags_complex_pair() {
        let tol = Tolerances::default();
        // Planar rotation block: eigenvalues 2, +/- i.
        let m: Mat3 = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 2.0]];
        let spec = eig3(&m, &tol);
        assert!(!spec.is_real_diagonalizable);
        assert_eq!(spec.eigenvectors, [[0.0; 3]; 3]);
        assert!(spec.residual.is_infinite());
    }

    #[test]
    fn eig3_flags_defective_jordan_block() {
        let tol = Tolerances::default();
        let m: Mat3 = [[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]];
        let spec = eig3(&m, &tol);
        assert!(!spec.is_real_diagonalizable);
    }

    #[test]
    fn eig3_zero_and_scalar_matrices() {
        let tol = Tolerances::default();
        let spec = eig3(&[[0.0; 3]; 3], &tol);
        assert!(spec.is_real_diagonalizable);
        assert_eq!(spec.eigenvalues, [0.0; 3]);

        let spec = eig3(&[[7.0, 0.0, 0.0], [0.0, 7.0, 0.0], [0.0, 0.0, 7.0]], &tol);
        assert!(spec.is_real_diagonalizable);
        for i in 0..3 {
            assert!((spec.eigenvalues[i] - 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eig3_is_deterministic_with_positive_leading_signs() {
        let tol = Tolerances::default();
        let m: Mat3 = [[1.0, 0.3, -0.2], [0.3, -0.5, 0.1], [-0.2, 0.1, 2.0]];
        let a = eig3(&m, &tol);
        let b = eig3(&m, &tol);
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
        for v in a.eigenvectors.iter() {
            let mut best = 0;
            for j in 1..3 {
                if v[j].abs() > v[best].abs() {
                    best = j;
                }
            }
            assert!(v[best] > 0.0);
        }
    }
}
