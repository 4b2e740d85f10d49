//! Extrinsic geometry of a hypersurface patch in Minkowski 4-space.
//!
//! Everything is computed from third-order jets of the immersion
//! `x(s,t,u)`: tangents `x_i`, induced metric `g_ij = <x_i, x_j>`, unit
//! normal `N` (via the Lorentzian cross product), second fundamental form
//! `b_ij = <x_ij, N>`, shape operator `S = g^{-1} b`, mean curvature
//! `H = tr(S)/3` and its chart gradient, principal curvatures and
//! directions, connection forms of the principal frame, and residuals of
//! the Gauss and Codazzi equations (which any isometric immersion must
//! satisfy, making them an end-to-end integrity check of the pipeline).
//!
//! Derivative bookkeeping: the immersion jets carry order 3, so tangents
//! are trusted to order 2, second derivatives / fundamental forms / shape
//! operator to order 1, and Christoffel symbols to order 1 — exactly enough
//! for curvature tensors and connection forms at the point, with no finite
//! differencing anywhere.

use crate::config::Tolerances;
use crate::jet::{cross4_jet, inner4_jet, Jet3, JetPoint4};
use crate::minkowski::{det3, dot3, eig3, frobenius3, mat3_vec, solve3, Mat3, Vec4};
use crate::GeomError;

/// Evaluator: maps the three chart seed jets to the four coordinate jets of
/// the immersion.
pub type EvalFn = Box<dyn Fn(Jet3, Jet3, Jet3) -> Result<JetPoint4, GeomError> + Send + Sync>;

/// A parametrized hypersurface patch.
pub struct ImmersionPatch {
    /// Family identifier used in reports.
    pub label: String,
    /// Default verification box `[s0,s1] x [t0,t1] x [u0,u1]`.
    pub domain: [(f64, f64); 3],
    /// Named real parameters the patch was built with (report metadata).
    pub params: Vec<(String, f64)>,
    /// The sign `<N,N>` the construction is expected to realize, when the
    /// construction pins it.
    pub epsilon_expected: Option<f64>,
    /// Jet evaluator.
    pub eval: EvalFn,
}

impl ImmersionPatch {
    /// Immersion jets at a chart point.
    pub fn jets(&self, s: f64, t: f64, u: f64) -> Result<JetPoint4, GeomError> {
        let (js, jt, ju) = Jet3::seed(s, t, u);
        (self.eval)(js, jt, ju)
    }

    /// Full geometric data at a chart point.
    pub fn point(&self, s: f64, t: f64, u: f64, tol: &Tolerances) -> Result<PointData, GeomError> {
        PointData::from_jets(self.jets(s, t, u)?, s, t, u, tol)
    }
}

/// Signature of the induced metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricSignature {
    /// `<N,N> = -1`: timelike normal, spacelike tangent space.
    Riemannian,
    /// `<N,N> = +1`: spacelike normal, Lorentzian tangent space.
    Lorentzian,
}

/// First and second fundamental forms at a point.
#[derive(Debug, Clone)]
pub struct FrameData {
    /// Tangent vectors `x_s, x_t, x_u`.
    pub tangents: [Vec4; 3],
    /// Induced metric `g_ij = <x_i, x_j>`.
    pub metric: Mat3,
    pub metric_signature: MetricSignature,
    /// Unit normal, oriented so its first nonzero component is positive.
    pub normal: Vec4,
    /// `<N,N>`, -1 or +1.
    pub epsilon: f64,
    /// Second fundamental form `b_ij = <x_ij, N>`.
    pub second_form: Mat3,
    /// Shape operator `S = g^{-1} b`.
    pub shape: Mat3,
}

/// Principal curvatures and directions at a point.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    /// Principal curvature of the `grad H`-aligned direction when
    /// `grad H != 0`; otherwise just the largest.
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// Chart components of the (Euclidean-unit) principal directions, in
    /// the same order as `k1, k2, k3`.
    pub directions: [[f64; 3]; 3],
    /// Mean curvature `(k1+k2+k3)/3 = tr(S)/3`.
    pub h: f64,
    /// Chart components of `grad H` (index raised by `g^{-1}`).
    pub grad_h: [f64; 3],
    /// `sqrt(|dH(grad H)|)`, the metric norm of the gradient.
    pub grad_norm: f64,
    /// `<N,N>`.
    pub epsilon: f64,
    /// Number of distinct principal curvatures under the relative
    /// tolerance `tol.dist * max(1, |k|)`.
    pub distinct_count: usize,
    /// Smallest pairwise gap of the principal curvatures.
    pub min_separation: f64,
    pub diagonalizable: bool,
}

/// Connection forms `omega_ij(e_l) = <D_{e_l} E_i, E_j> * eps_j` of the
/// g-orthonormal principal frame (`D` the ambient flat connection).
#[derive(Debug, Clone)]
pub struct ConnectionData {
    /// `omega_12(e_1), omega_12(e_2), omega_12(e_3)`.
    pub omega12: [f64; 3],
    pub omega13: [f64; 3],
    /// Present only when `k2` and `k3` are distinct (otherwise `E_2, E_3`
    /// are determined only up to rotation and `omega_23` is not intrinsic).
    pub omega23: Option<[f64; 3]>,
    /// Chart components of the g-unit frame `e_1, e_2, e_3`.
    pub frame_chart: [[f64; 3]; 3],
    /// Ambient components of the same frame.
    pub frame_ambient: [Vec4; 3],
    /// Causal signs `<e_i, e_i> = ±1`.
    pub frame_eps: [f64; 3],
}

/// Everything the verification pipeline needs at one chart point.
#[derive(Debug, Clone)]
pub struct PointData {
    pub s: f64,
    pub t: f64,
    pub u: f64,
    pub position: Vec4,
    pub frame: FrameData,
    pub curvature: CurvatureReport,
    /// Chart partials `(dH/ds, dH/dt, dH/du)` — the covariant components of
    /// `grad H`.
    pub dh: [f64; 3],
    /// Causal sign of the `k1` principal direction, when that labeling is
    /// defined (`grad H` large enough and `S` diagonalizable).
    pub epsilon_e1: Option<f64>,
    pub det_g: f64,
    /// Max violation of the Gauss equation over all index combinations.
    pub gauss_residual: f64,
    /// Max violation of the Codazzi symmetry.
    pub codazzi_residual: f64,
    /// Principal-frame connection forms; `None` when `k1` is not separated
    /// from the other curvatures (frame underdetermined) or labeling failed.
    pub connection: Option<ConnectionData>,
    /// Eigensolver residual for the shape operator.
    pub spectral_residual: f64,
    /// Whether the orientation rule flipped the raw cross-product normal.
    pub orientation_flipped: bool,
}

fn det3_jet(m: &[[Jet3; 3]; 3]) -> Jet3 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn adjugate3_jet(m: &[[Jet3; 3]; 3]) -> [[Jet3; 3]; 3] {
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

fn cross3_jet(a: &[Jet3; 3], b: &[Jet3; 3]) -> [Jet3; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Minkowski inner product of plain 4-vectors of values.
fn ip4(a: Vec4, b: Vec4) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

impl PointData {
    /// Run the full pipeline on immersion jets at `(s, t, u)`.
    pub fn from_jets(
        x: JetPoint4,
        s: f64,
        t: f64,
        u: f64,
        tol: &Tolerances,
    ) -> Result<PointData, GeomError> {
        // Tangent jets T[i][c] = d x^c / d chart_i (trusted to order 2).
        let tj: [JetPoint4; 3] = [
            [
                x[0].derivative(0),
                x[1].derivative(0),
                x[2].derivative(0),
                x[3].derivative(0),
            ],
            [
                x[0].derivative(1),
                x[1].derivative(1),
                x[2].derivative(1),
                x[3].derivative(1),
            ],
            [
                x[0].derivative(2),
                x[1].derivative(2),
                x[2].derivative(2),
                x[3].derivative(2),
            ],
        ];

        // Metric jets (trusted to order 2) and the degeneracy guard.
        let mut g_jet = [[Jet3::ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g_jet[i][j] = inner4_jet(&tj[i], &tj[j]);
            }
        }
        let mut g_val = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g_val[i][j] = g_jet[i][j].value();
            }
        }
        let det_g = det3(&g_val);
        let g_scale = frobenius3(&g_val).max(f64::MIN_POSITIVE);
        if det_g.abs() <= tol.det * g_scale * g_scale * g_scale {
            return Err(GeomError::DegenerateMetric { s, t, u, det: det_g });
        }

        // Unit normal from the Lorentzian cross product. <w,w> = -det g, so
        // the degeneracy guard above already excludes a null normal.
        let w = cross4_jet(&tj[0], &tj[1], &tj[2]);
        let q = inner4_jet(&w, &w);
        let epsilon = if q.value() > 0.0 { 1.0 } else { -1.0 };
        let r_inv = q.sqrt_abs()?.recip()?;
        let mut n_jet: JetPoint4 = [w[0] * r_inv, w[1] * r_inv, w[2] * r_inv, w[3] * r_inv];

        // Deterministic orientation: first component of N that is clearly
        // nonzero must be positive.
        let mut orientation_flipped = false;
        for c in 0..4 {
            let v = n_jet[c].value();
            if v.abs() > 1e-8 {
                if v < 0.0 {
                    for comp in n_jet.iter_mut() {
                        *comp = -*comp;
                    }
                    orientation_flipped = true;
                }
                break;
            }
        }
        let normal = [
            n_jet[0].value(),
            n_jet[1].value(),
            n_jet[2].value(),
            n_jet[3].value(),
        ];

        // Second fundamental form b_ij = <x_ij, N> (jets trusted to order 1).
        let mut b_jet = [[Jet3::ZERO; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let xij: JetPoint4 = [
                    tj[i][0].derivative(j),
                    tj[i][1].derivative(j),
                    tj[i][2].derivative(j),
                    tj[i][3].derivative(j),
                ];
                let bij = inner4_jet(&xij, &n_jet);
                b_jet[i][j] = bij;
                b_jet[j][i] = bij;
            }
        }
        let mut b_val = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                b_val[i][j] = b_jet[i][j].value();
            }
        }

        // Inverse metric and shape operator as jets (trusted to order 1).
        let det_jet = det3_jet(&g_jet);
        let det_recip = det_jet.recip()?;
        let adj_jet = adjugate3_jet(&g_jet);
        let mut ginv_jet = [[Jet3::ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                ginv_jet[i][j] = adj_jet[i][j] * det_recip;
            }
        }
        let mut s_jet = [[Jet3::ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Jet3::ZERO;
                for m in 0..3 {
                    acc += ginv_jet[i][m] * b_jet[m][j];
                }
                s_jet[i][j] = acc;
            }
        }
        let mut s_val = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                s_val[i][j] = s_jet[i][j].value();
            }
        }

        // Mean curvature and its chart gradient.
        let h_jet = (s_jet[0][0] + s_jet[1][1] + s_jet[2][2]) * (1.0 / 3.0);
        let h = h_jet.value();
        let dh = [h_jet.d1(0), h_jet.d1(1), h_jet.d1(2)];
        let grad_h = solve3(&g_val, dh, tol)?;
        let grad_norm = dot3(dh, grad_h).abs().sqrt();

        // Principal curvatures.
        let spec = eig3(&s_val, tol);
        let diagonalizable = spec.is_real_diagonalizable;
        let kscale = spec
            .eigenvalues
            .iter()
            .fold(1.0f64, |m, k| m.max(k.abs()));
        let sep_tol = tol.dist * kscale;

        // Label k1 as the curvature of the eigendirection most aligned with
        // grad H (alignment measured by |dH(v)|, which vanishes for
        // eigendirections g-orthogonal to the gradient).
        let labeled = diagonalizable && grad_norm > tol.grad;
        let order: [usize; 3] = if labeled {
            let mut best = 0;
            let mut best_score = -1.0;
            for (i, v) in spec.eigenvectors.iter().enumerate() {
                let score = dot3(*v, dh).abs();
                if score > best_score {
                    best_score = score;
                    best = i;
                }
            }
            let mut rest = [0usize; 2];
            let mut n = 0;
            for i in 0..3 {
                if i != best {
                    rest[n] = i;
                    n += 1;
                }
            }
            [best, rest[0], rest[1]]
        } else {
            [0, 1, 2]
        };
        let k = [
            spec.eigenvalues[order[0]],
            spec.eigenvalues[order[1]],
            spec.eigenvalues[order[2]],
        ];
        let directions = [
            spec.eigenvectors[order[0]],
            spec.eigenvectors[order[1]],
            spec.eigenvectors[order[2]],
        ];

        // Distinct-count and separations from the sorted spectrum.
        let mut sorted = spec.eigenvalues;
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let gaps = [sorted[0] - sorted[1], sorted[1] - sorted[2]];
        let distinct_count = 1 + gaps.iter().filter(|g| **g > sep_tol).count();
        let min_separation = {
            let all = [
                (sorted[0] - sorted[1]).abs(),
                (sorted[1] - sorted[2]).abs(),
                (sorted[0] - sorted[2]).abs(),
            ];
            all.iter().cloned().fold(f64::INFINITY, f64::min)
        };

        let epsilon_e1 = if labeled {
            let v = directions[0];
            let gv = mat3_vec(&g_val, v);
            Some(dot3(v, gv).signum())
        } else {
            None
        };

        // Christoffel symbols Gamma^l_{jk} as jets (trusted to order 1).
        let mut gamma_jet = [[[Jet3::ZERO; 3]; 3]; 3];
        for l in 0..3 {
            for j in 0..3 {
                for kk in j..3 {
                    let mut acc = Jet3::ZERO;
                    for m in 0..3 {
                        let term = g_jet[m][kk].derivative(j) + g_jet[m][j].derivative(kk)
                            - g_jet[j][kk].derivative(m);
                        acc += ginv_jet[l][m] * term;
                    }
                    let val = acc * 0.5;
                    gamma_jet[l][j][kk] = val;
                    gamma_jet[l][kk][j] = val;
                }
            }
        }
        let mut gamma_val = [[[0.0; 3]; 3]; 3];
        for l in 0..3 {
            for j in 0..3 {
                for kk in 0..3 {
                    gamma_val[l][j][kk] = gamma_jet[l][j][kk].value();
                }
            }
        }

        // Gauss equation: R_{ijkm} = eps (b_jk b_im - b_ik b_jm), with the
        // curvature tensor of g from the Christoffel symbols.
        let mut gauss_residual: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for kk in 0..3 {
                    // R^l_{ijk}
                    let mut r_up = [0.0; 3];
                    for (l, slot) in r_up.iter_mut().enumerate() {
                        let mut v =
                            gamma_jet[l][j][kk].d1(i) - gamma_jet[l][i][kk].d1(j);
                        for p in 0..3 {
                            v += gamma_val[p][j][kk] * gamma_val[l][i][p]
                                - gamma_val[p][i][kk] * gamma_val[l][j][p];
                        }
                        *slot = v;
                    }
                    for m in 0..3 {
                        let mut r_low = 0.0;
                        for l in 0..3 {
                            r_low += g_val[m][l] * r_up[l];
                        }
                        let expected =
                            epsilon * (b_val[j][kk] * b_val[i][m] - b_val[i][kk] * b_val[j][m]);
                        gauss_residual = gauss_residual.max((r_low - expected).abs());
                    }
                }
            }
        }

        // Codazzi: (nabla_i b)_{jk} symmetric in i <-> j.
        let nabla_b = |i: usize, j: usize, kk: usize| -> f64 {
            let mut v = b_jet[j][kk].d1(i);
            for m in 0..3 {
                v -= gamma_val[m][i][j] * b_val[m][kk] + gamma_val[m][i][kk] * b_val[j][m];
            }
            v
        };
        let mut codazzi_residual: f64 = 0.0;
        for i in 0..3 {
            for j in (i + 1)..3 {
                for kk in 0..3 {
                    codazzi_residual =
                        codazzi_residual.max((nabla_b(i, j, kk) - nabla_b(j, i, kk)).abs());
                }
            }
        }

        // Connection forms of the principal frame: need k1 simple.
        let k1_simple = labeled
            && (k[0] - k[1]).abs() > sep_tol
            && (k[0] - k[2]).abs() > sep_tol;
        let connection = if k1_simple {
            let k23_separated = (k[1] - k[2]).abs() > sep_tol;
            connection_data(
                &s_jet, &g_jet, &g_val, &tj, k, &directions, k23_separated, tol,
            )
        } else {
            None
        };

        let metric_signature = if epsilon < 0.0 {
            MetricSignature::Riemannian
        } else {
            MetricSignature::Lorentzian
        };

        Ok(PointData {
            s,
            t,
            u,
            position: [x[0].value(), x[1].value(), x[2].value(), x[3].value()],
            frame: FrameData {
                tangents: [
                    [tj[0][0].value(), tj[0][1].value(), tj[0][2].value(), tj[0][3].value()],
                    [tj[1][0].value(), tj[1][1].value(), tj[1][2].value(), tj[1][3].value()],
                    [tj[2][0].value(), tj[2][1].value(), tj[2][2].value(), tj[2][3].value()],
                ],
                metric: g_val,
                metric_signature,
                normal,
                epsilon,
                second_form: b_val,
                shape: s_val,
            },
            curvature: CurvatureReport {
                k1: k[0],
                k2: k[1],
                k3: k[2],
                directions,
                h,
                grad_h,
                grad_norm,
                epsilon,
                distinct_count,
                min_separation,
                diagonalizable,
            },
            dh,
            epsilon_e1,
            det_g,
            gauss_residual,
            codazzi_residual,
            connection,
            spectral_residual: spec.residual,
            orientation_flipped,
        })
    }
}

/// Jet of a simple eigenvalue of the shape operator: Newton iteration on the
/// characteristic polynomial in jet arithmetic, seeded with the value-level
/// eigenvalue.
fn eigenvalue_jet(s_jet: &[[Jet3; 3]; 3], lam0: f64) -> Result<Jet3, GeomError> {
    let c2 = s_jet[0][0] + s_jet[1][1] + s_jet[2][2];
    let c1 = s_jet[0][0] * s_jet[1][1] - s_jet[0][1] * s_jet[1][0]
        + s_jet[0][0] * s_jet[2][2]
        - s_jet[0][2] * s_jet[2][0]
        + s_jet[1][1] * s_jet[2][2]
        - s_jet[1][2] * s_jet[2][1];
    let c0 = det3_jet(s_jet);
    let mut lam = Jet3::constant(lam0);
    for _ in 0..4 {
        let p = ((lam - c2) * lam + c1) * lam - c0;
        let dp = (3.0 * lam - 2.0 * c2) * lam + c1;
        lam -= p * dp.recip()?;
    }
    Ok(lam)
}

/// Jet of the (g-unit) eigenvector field for the eigenvalue jet `lam`,
/// sign-aligned with the value-level direction `hint`. Also returns the
/// causal sign of the direction.
fn eigenvector_jet(
    s_jet: &[[Jet3; 3]; 3],
    g_jet: &[[Jet3; 3]; 3],
    lam: &Jet3,
    hint: [f64; 3],
) -> Result<([Jet3; 3], f64), GeomError> {
    let mut b = [[Jet3::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = s_jet[i][j];
            if i == j {
                b[i][j] -= *lam;
            }
        }
    }
    // Pick the row pair with the largest value-level cross product.
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut best = 0;
    let mut best_norm = -1.0;
    for (idx, &(r1, r2)) in pairs.iter().enumerate() {
        let cr = cross3_jet(&b[r1], &b[r2]);
        let n = cr.iter().map(|j| j.value() * j.value()).sum::<f64>();
        if n > best_norm {
            best_norm = n;
            best = idx;
        }
    }
    let (r1, r2) = pairs[best];
    let v = cross3_jet(&b[r1], &b[r2]);

    // g-normalize as a jet.
    let mut n2 = Jet3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            n2 += v[i] * g_jet[i][j] * v[j];
        }
    }
    let eps = n2.value().signum();
    let inv = n2.sqrt_abs()?.recip()?;
    let mut vhat = [v[0] * inv, v[1] * inv, v[2] * inv];

    // Sign-align with the hint direction.
    let dot = vhat[0].value() * hint[0] + vhat[1].value() * hint[1] + vhat[2].value() * hint[2];
    if dot < 0.0 {
        for comp in vhat.iter_mut() {
            *comp = -*comp;
        }
    }
    Ok((vhat, eps))
}

#[allow(clippy::too_many_arguments)]
fn connection_data(
    s_jet: &[[Jet3; 3]; 3],
    g_jet: &[[Jet3; 3]; 3],
    g_val: &Mat3,
    tj: &[JetPoint4; 3],
    k: [f64; 3],
    dirs: &[[f64; 3]; 3],
    k23_separated: bool,
    _tol: &Tolerances,
) -> Option<ConnectionData> {
    // g-orthonormalize the frame at value level. Eigendirections of distinct
    // curvatures are automatically g-orthogonal; within a repeated pair we
    // Gram-Schmidt explicitly (the eigensolver's plane basis is
    // Euclidean-orthonormal, not g-orthonormal).
    let g_ip = |a: [f64; 3], b: [f64; 3]| dot3(a, mat3_vec(g_val, b));
    let normalize = |v: [f64; 3]| -> Option<([f64; 3], f64)> {
        let q = g_ip(v, v);
        if q.abs() < 1e-14 {
            return None;
        }
        let inv = 1.0 / q.abs().sqrt();
        Some(([v[0] * inv, v[1] * inv, v[2] * inv], q.signum()))
    };
    let (e1, eps1) = normalize(dirs[0])?;
    let (e2, eps2) = normalize(dirs[1])?;
    let mut v3 = dirs[2];
    if !k23_separated {
        let c = g_ip(v3, e2) * eps2;
        for i in 0..3 {
            v3[i] -= c * e2[i];
        }
    }
    let (e3, eps3) = normalize(v3)?;
    let frame_chart = [e1, e2, e3];
    let frame_eps = [eps1, eps2, eps3];

    // Ambient frame values, and E1 as an ambient jet (for its derivatives).
    let lam1 = eigenvalue_jet(s_jet, k[0]).ok()?;
    let (v1_jet, _) = eigenvector_jet(s_jet, g_jet, &lam1, dirs[0]).ok()?;
    let e1_amb_jet: JetPoint4 = {
        let mut out = [Jet3::ZERO; 4];
        for (c, slot) in out.iter_mut().enumerate() {
            let mut acc = Jet3::ZERO;
            for m in 0..3 {
                acc += v1_jet[m] * tj[m][c];
            }
            *slot = acc;
        }
        out
    };
    let amb_value = |v: [f64; 3]| -> Vec4 {
        let mut out = [0.0; 4];
        for (c, slot) in out.iter_mut().enumerate() {
            for m in 0..3 {
                *slot += v[m] * tj[m][c].value();
            }
        }
        out
    };
    let frame_ambient = [amb_value(e1), amb_value(e2), amb_value(e3)];

    // omega_1j(e_l) = eps_j * sum_k e_l^k <d_k E1, E_j>.
    let d_e1 = |kk: usize| -> Vec4 {
        [
            e1_amb_jet[0].d1(kk),
            e1_amb_jet[1].d1(kk),
            e1_amb_jet[2].d1(kk),
            e1_amb_jet[3].d1(kk),
        ]
    };
    let omega_from = |d_ei: &dyn Fn(usize) -> Vec4, ej_amb: Vec4, eps_j: f64| -> [f64; 3] {
        let mut out = [0.0; 3];
        for (l, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for kk in 0..3 {
                acc += frame_chart[l][kk] * ip4(d_ei(kk), ej_amb);
            }
            *slot = eps_j * acc;
        }
        out
    };
    let omega12 = omega_from(&d_e1, frame_ambient[1], eps2);
    let omega13 = omega_from(&d_e1, frame_ambient[2], eps3);

    let omega23 = if k23_separated {
        let lam2 = eigenvalue_jet(s_jet, k[1]).ok()?;
        let (v2_jet, _) = eigenvector_jet(s_jet, g_jet, &lam2, dirs[1]).ok()?;
        let e2_amb_jet: JetPoint4 = {
            let mut out = [Jet3::ZERO; 4];
            for (c, slot) in out.iter_mut().enumerate() {
                let mut acc = Jet3::ZERO;
                for m in 0..3 {
                    acc += v2_jet[m] * tj[m][c];
                }
                *slot = acc;
            }
            out
        };
        let d_e2 = |kk: usize| -> Vec4 {
            [
                e2_amb_jet[0].d1(kk),
                e2_amb_jet[1].d1(kk),
                e2_amb_jet[2].d1(kk),
                e2_amb_jet[3].d1(kk),
            ]
        };
        Some(omega_from(&d_e2, frame_ambient[2], eps3))
    } else {
        None
    };

    Some(ConnectionData {
        omega12,
        omega13,
        omega23,
        frame_chart,
        frame_ambient,
        frame_eps,
    })
}

// ---------------------------------------------------------------------------
// Named operation wrappers
// ---------------------------------------------------------------------------

/// Fundamental forms at a chart point.
pub fn frame_at(
    patch: &ImmersionPatch,
    s: f64,
    t: f64,
    u: f64,
    tol: &Tolerances,
) -> Result<FrameData, GeomError> {
    Ok(patch.point(s, t, u, tol)?.frame)
}

/// Principal curvature report; fails when the shape operator has a complex
/// pair or is defective.
pub fn principal_curvatures(
    patch: &ImmersionPatch,
    s: f64,
    t: f64,
    u: f64,
    tol: &Tolerances,
) -> Result<CurvatureReport, GeomError> {
    let p = patch.point(s, t, u, tol)?;
    if !p.curvature.diagonalizable {
        return Err(GeomError::NonDiagonalizable { s, t, u });
    }
    Ok(p.curvature)
}

/// Chart components of `grad H` (index raised by the inverse metric).
pub fn mean_curvature_gradient(
    patch: &ImmersionPatch,
    s: f64,
    t: f64,
    u: f64,
    tol: &Tolerances,
) -> Result<[f64; 3], GeomError> {
    Ok(patch.point(s, t, u, tol)?.curvature.grad_h)
}

/// Connection forms of the principal frame; fails at umbilic or unlabeled
/// points where the frame is underdetermined.
pub fn connection_forms(
    patch: &ImmersionPatch,
    s: f64,
    t: f64,
    u: f64,
    tol: &Tolerances,
) -> Result<ConnectionData, GeomError> {
    patch
        .point(s, t, u, tol)?
        .connection
        .ok_or(GeomError::UmbilicPoint { s, t, u })
}

/// Max violations of the Gauss and Codazzi equations at a point.
pub fn gauss_codazzi_residual(
    patch: &ImmersionPatch,
    s: f64,
    t: f64,
    u: f64,
    tol: &Tolerances,
) -> Result<(f64, f64), GeomError> {
    let p = patch.point(s, t, u, tol)?;
    Ok((p.gauss_residual, p.codazzi_residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::inner4;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Spacelike graph immersion x = (F(s,t,u), s, t, u) with small slope:
    /// timelike normal, Riemannian induced metric.
    fn graph_patch() -> ImmersionPatch {
        ImmersionPatch {
            label: "graph".into(),
            domain: [(-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5)],
            params: vec![],
            epsilon_expected: Some(-1.0),
            eval: Box::new(|s, t, u| {
                let f = 0.2 * s * s + 0.3 * s * t + 0.1 * u * u * u + 0.05 * t * u;
                Ok([f, s, t, u])
            }),
        }
    }

    fn hyperplane_patch() -> ImmersionPatch {
        ImmersionPatch {
            label: "hyperplane".into(),
            domain: [(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            params: vec![],
            epsilon_expected: Some(-1.0),
            eval: Box::new(|s, t, u| Ok([Jet3::constant(0.0), s, t, u])),
        }
    }

    fn de_sitter_patch() -> ImmersionPatch {
        ImmersionPatch {
            label: "de-sitter".into(),
            domain: [(-0.8, 0.8), (0.4, 1.2), (0.2, 1.4)],
            params: vec![],
            epsilon_expected: Some(1.0),
            eval: Box::new(|s, t, u| {
                Ok([
                    s.sinh(),
                    s.cosh() * t.sin() * u.cos(),
                    s.cosh() * t.sin() * u.sin(),
                    s.cosh() * t.cos(),
                ])
            }),
        }
    }

    #[test]
    fn hyperplane_frame_is_trivial() {
        let p = hyperplane_patch().point(0.3, -0.2, 0.7, &tol()).unwrap();
        assert_eq!(p.frame.normal, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.frame.epsilon, -1.0);
        assert_eq!(p.frame.metric_signature, MetricSignature::Riemannian);
        for i in 0..3 {
            for j in 0..3 {
                assert!(p.frame.shape[i][j].abs() < 1e-14);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((p.frame.metric[i][j] - expect).abs() < 1e-14);
            }
        }
        assert!(p.gauss_residual < 1e-12);
        assert!(p.codazzi_residual < 1e-12);
        assert!(p.curvature.grad_norm < 1e-14);
        assert!(p.connection.is_none());
    }

    #[test]
    fn de_sitter_is_umbilic_with_unit_position_norm() {
        let patch = de_sitter_patch();
        for (s, t, u) in [(0.2, 0.8, 0.5), (-0.4, 0.6, 1.1), (0.6, 1.0, 0.3)] {
            let p = patch.point(s, t, u, &tol()).unwrap();
            assert!((inner4(p.position, p.position) - 1.0).abs() < 1e-12);
            assert_eq!(p.frame.epsilon, 1.0);
            assert_eq!(p.frame.metric_signature, MetricSignature::Lorentzian);
            // Umbilic: S = c I with |c| = 1.
            let sgn = p.frame.shape[0][0].signum();
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == j { sgn } else { 0.0 };
                    assert!(
                        (p.frame.shape[i][j] - expect).abs() < 1e-9,
                        "S[{i}][{j}] = {}",
                        p.frame.shape[i][j]
                    );
                }
            }
            assert_eq!(p.curvature.distinct_count, 1);
            assert!(p.curvature.grad_norm < 1e-9);
            assert!(p.gauss_residual < 1e-8);
            assert!(p.codazzi_residual < 1e-8);
        }
    }

    #[test]
    fn frame_invariants_on_generic_graph() {
        let patch = graph_patch();
        for (s, t, u) in [(0.1, 0.2, -0.3), (-0.4, 0.3, 0.2), (0.25, -0.15, 0.4)] {
            let p = patch.point(s, t, u, &tol()).unwrap();
            // Normal orthogonal to tangents, unit causal norm.
            for i in 0..3 {
                assert!(inner4(p.frame.normal, p.frame.tangents[i]).abs() < 1e-10);
            }
            assert!((inner4(p.frame.normal, p.frame.normal) - p.frame.epsilon).abs() < 1e-10);
            assert_eq!(p.frame.epsilon, -1.0);
            // g S = b (relative).
            let scale = frobenius3(&p.frame.second_form).max(1e-30);
            for i in 0..3 {
                for j in 0..3 {
                    let mut gs = 0.0;
                    for m in 0..3 {
                        gs += p.frame.metric[i][m] * p.frame.shape[m][j];
                    }
                    assert!(
                        (gs - p.frame.second_form[i][j]).abs() < 1e-9 * scale,
                        "gS != b at [{i}][{j}]"
                    );
                }
            }
            // 3H = k1+k2+k3.
            let ksum = p.curvature.k1 + p.curvature.k2 + p.curvature.k3;
            assert!((3.0 * p.curvature.h - ksum).abs() < 1e-9);
            // Gauss and Codazzi hold for any immersion.
            assert!(p.gauss_residual < 1e-8, "gauss {}", p.gauss_residual);
            assert!(p.codazzi_residual < 1e-8, "codazzi {}", p.codazzi_residual);
        }
    }

    #[test]
    fn principal_directions_are_g_orthogonal_when_distinct() {
        let patch = graph_patch();
        let p = patch.point(0.2, 0.3, -0.25, &tol()).unwrap();
        if p.curvature.distinct_count == 3 {
            let g = &p.frame.metric;
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let gi = mat3_vec(g, p.curvature.directions[j]);
                    let ip = dot3(p.curvature.directions[i], gi);
                    assert!(ip.abs() < 1e-8, "directions {i},{j} not g-orthogonal: {ip}");
                }
            }
        }
    }

    #[test]
    fn gradient_partials_match_finite_differences_of_h() {
        let patch = graph_patch();
        let (s0, t0, u0) = (0.15, -0.2, 0.3);
        let p = patch.point(s0, t0, u0, &tol()).unwrap();
        let h_at = |s: f64, t: f64, u: f64| patch.point(s, t, u, &tol()).unwrap().curvature.h;
        let h = 1e-5;
        let fd = [
            (h_at(s0 + h, t0, u0) - h_at(s0 - h, t0, u0)) / (2.0 * h),
            (h_at(s0, t0 + h, u0) - h_at(s0, t0 - h, u0)) / (2.0 * h),
            (h_at(s0, t0, u0 + h) - h_at(s0, t0, u0 - h)) / (2.0 * h),
        ];
        for i in 0..3 {
            let scale = 1.0f64.max(fd[i].abs());
            assert!(
                (p.dh[i] - fd[i]).abs() < 1e-5 * scale,
                "dH[{i}]: jet {} vs fd {}",
                p.dh[i],
                fd[i]
            );
        }
        // grad_h is dh with the index raised.
        let back = mat3_vec(&p.frame.metric, p.curvature.grad_h);
        for i in 0..3 {
            assert!((back[i] - p.dh[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn reparametrization_leaves_invariants_unchanged() {
        let base = graph_patch();
        // Affine chart change: shifted and scaled coordinates.
        let shifted = ImmersionPatch {
            label: "graph-shifted".into(),
            domain: base.domain,
            params: vec![],
            epsilon_expected: None,
            eval: Box::new(move |s, t, u| {
                let s2 = s * 2.0 - 0.3;
                let t2 = t + 0.1;
                let u2 = u * 0.5 + 0.2;
                let f = 0.2 * s2 * s2 + 0.3 * s2 * t2 + 0.1 * u2 * u2 * u2 + 0.05 * t2 * u2;
                Ok([f, s2, t2, u2])
            }),
        };
        let (s, t, u) = (0.2, -0.1, 0.3);
        let p1 = base
            .point(2.0 * s - 0.3, t + 0.1, u * 0.5 + 0.2, &tol())
            .unwrap();
        let p2 = shifted.point(s, t, u, &tol()).unwrap();
        assert!((p1.curvature.h - p2.curvature.h).abs() < 1e-9);
        assert!((p1.curvature.grad_norm - p2.curvature.grad_norm).abs() < 1e-9);
        assert_eq!(p1.frame.epsilon, p2.frame.epsilon);
        let mut k1 = [p1.curvature.k1, p1.curvature.k2, p1.curvature.k3];
        let mut k2 = [p2.curvature.k1, p2.curvature.k2, p2.curvature.k3];
        k1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        k2.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for i in 0..3 {
            assert!((k1[i] - k2[i]).abs() < 1e-9, "k[{i}]: {} vs {}", k1[i], k2[i]);
        }
    }

    #[test]
    fn orientation_rule_is_chart_order_independent() {
        // Swapping two chart variables flips the raw cross product; the
        // orientation rule must restore the same normal.
        let base = hyperplane_patch();
        let swapped = ImmersionPatch {
            label: "hyperplane-swapped".into(),
            domain: base.domain,
            params: vec![],
            epsilon_expected: None,
            eval: Box::new(|s, t, u| Ok([Jet3::constant(0.0), t, s, u])),
        };
        let p1 = base.point(0.1, 0.2, 0.3, &tol()).unwrap();
        let p2 = swapped.point(0.2, 0.1, 0.3, &tol()).unwrap();
        assert_eq!(p1.frame.normal, p2.frame.normal);
        assert!(p2.orientation_flipped != p1.orientation_flipped);
    }

    #[test]
    fn degenerate_metric_is_reported() {
        // Graph with slope reaching 1: tangent x_s becomes null at s = 0.
        let patch = ImmersionPatch {
            label: "null-slope".into(),
            domain: [(-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5)],
            params: vec![],
            epsilon_expected: None,
            eval: Box::new(|s, t, u| Ok([s, s, t, u])),
        };
        match patch.point(0.0, 0.1, 0.2, &tol()) {
            Err(GeomError::DegenerateMetric { .. }) => {}
            other => panic!("expected DegenerateMetric, got {other:?}"),
        }
    }

    #[test]
    fn named_wrappers_agree_with_pointdata() {
        let patch = graph_patch();
        let (s, t, u) = (0.2, 0.1, -0.3);
        let p = patch.point(s, t, u, &tol()).unwrap();
        let f = frame_at(&patch, s, t, u, &tol()).unwrap();
        assert_eq!(f.normal, p.frame.normal);
        let c = principal_curvatures(&patch, s, t, u, &tol()).unwrap();
        assert_eq!(c.k1, p.curvature.k1);
        let g = mean_curvature_gradient(&patch, s, t, u, &tol()).unwrap();
        assert_eq!(g, p.curvature.grad_h);
        let (gr, cr) = gauss_codazzi_residual(&patch, s, t, u, &tol()).unwrap();
        assert_eq!(gr, p.gauss_residual);
        assert_eq!(cr, p.codazzi_residual);
    }

    #[test]
    fn umbilic_point_has_no_connection_frame() {
        let patch = de_sitter_patch();
        match connection_forms(&patch, 0.2, 0.8, 0.5, &tol()) {
            Err(GeomError::UmbilicPoint { .. }) => {}
            other => panic!("expected UmbilicPoint, got {other:?}"),
        }
    }
}
