//! Two-dimensional reference surfaces and slices of hypersurface patches.
//!
//! The catalog below lists the normal forms of surfaces in Minkowski 4-space
//! whose mean curvature vector is parallel in the normal bundle. Each comes
//! with constant shape operators in its chart, so a numerical sweep must see
//! vanishing off-diagonal entries, vanishing variation of the diagonal, and
//! a vanishing normal derivative of the mean curvature vector.
//!
//! Cases are indexed by the roman numerals `i` through `xi`:
//!
//! * `i`–`vii` are flat (products of lines, circles and hyperbolas, plus two
//!   graphs inside a degenerate hyperplane),
//! * `viii`–`x` are the round sphere, the one-sheeted pseudo-sphere and the
//!   hyperbolic plane, with curvature `+-1/r^2`,
//! * `xi` is the flat marginally trapped graph, whose mean curvature vector
//!   is lightlike everywhere.
//!
//! The same pointwise pipeline evaluates constant-`s` slices of hypersurface
//! patches via [`slice_of`].

use crate::config::Tolerances;
use crate::geometry::ImmersionPatch;
use crate::jet::{inner4_jet, Jet3, JetPoint4};
use crate::jsonfmt::{self, JsonObj};
use crate::minkowski::{cross4, dot_euclid4, inner4, scale4, sub4, Vec4};
use crate::GeomError;

/// Chart evaluator of a surface: jets in `(t, u)` using variable slots 0, 1.
pub type Eval2Fn = Box<dyn Fn(Jet3, Jet3) -> Result<JetPoint4, GeomError> + Send + Sync>;

/// Catalog index of a normal-form surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaCase {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
    IX,
    X,
    XI,
}

impl LemmaCase {
    pub fn parse(text: &str) -> Option<LemmaCase> {
        Some(match text {
            "i" => LemmaCase::I,
            "ii" => LemmaCase::II,
            "iii" => LemmaCase::III,
            "iv" => LemmaCase::IV,
            "v" => LemmaCase::V,
            "vi" => LemmaCase::VI,
            "vii" => LemmaCase::VII,
            "viii" => LemmaCase::VIII,
            "ix" => LemmaCase::IX,
            "x" => LemmaCase::X,
            "xi" => LemmaCase::XI,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaCase::I => "i",
            LemmaCase::II => "ii",
            LemmaCase::III => "iii",
            LemmaCase::IV => "iv",
            LemmaCase::V => "v",
            LemmaCase::VI => "vi",
            LemmaCase::VII => "vii",
            LemmaCase::VIII => "viii",
            LemmaCase::IX => "ix",
            LemmaCase::X => "x",
            LemmaCase::XI => "xi",
        }
    }

    pub fn all() -> [LemmaCase; 11] {
        [
            LemmaCase::I,
            LemmaCase::II,
            LemmaCase::III,
            LemmaCase::IV,
            LemmaCase::V,
            LemmaCase::VI,
            LemmaCase::VII,
            LemmaCase::VIII,
            LemmaCase::IX,
            LemmaCase::X,
            LemmaCase::XI,
        ]
    }
}

/// Free constants of the normal forms.
#[derive(Debug, Clone, Copy, Default)]
pub struct SurfaceParams {
    /// Hyperbolic radius `A`.
    pub a: Option<f64>,
    /// Circular radius `B`.
    pub b: Option<f64>,
    /// Curvature radius `r`.
    pub r: Option<f64>,
}

/// A two-dimensional chart patch.
pub struct SurfacePatch {
    pub label: String,
    pub domain: [(f64, f64); 2],
    pub params: Vec<(String, f64)>,
    pub eval: Eval2Fn,
}

/// Orthonormal or null-adapted basis of the normal plane.
///
/// When the mean curvature vector is non-null, `f3` points along it with
/// `eps3 = <f3,f3>`, and `f4` completes the normal plane. When it is null and
/// nonzero, no orthonormal frame contains it; instead `l` is the lightlike
/// mean-curvature direction and `n` the spacelike partner pinned by
/// `<n,n> = 1`, `<l,n> = -1`.
#[derive(Debug, Clone, Copy)]
pub enum NormalFrame {
    Orthonormal { f3: Vec4, f4: Vec4, eps3: f64, eps4: f64 },
    NullSpacelike { l: Vec4, n: Vec4 },
}

/// Pointwise report of the surface pipeline.
#[derive(Debug, Clone, Copy)]
pub struct SlicePoint {
    pub t: f64,
    pub u: f64,
    pub position: Vec4,
    pub metric: [[f64; 2]; 2],
    pub metric_lorentzian: bool,
    pub mean_curvature_vec: Vec4,
    /// `<H, H>`.
    pub hh: f64,
    /// Intrinsic curvature of the induced metric.
    pub gauss: f64,
    /// Largest Euclidean norm of the normal part of a derivative of `H`.
    pub pmc_residual: f64,
    pub frame: NormalFrame,
    /// Shape operator with respect to `f3` (or `l` for a null frame).
    pub shape_a: [[f64; 2]; 2],
    /// Shape operator with respect to `f4` (or `n` for a null frame).
    pub shape_b: [[f64; 2]; 2],
    /// Frame decomposition of the curvature, `eps3 c1 c2 + eps4 d1 d2`;
    /// `None` for null frames.
    pub combo: Option<f64>,
}

fn jet_vals(x: &JetPoint4) -> Vec4 {
    [x[0].value(), x[1].value(), x[2].value(), x[3].value()]
}

/// Solves the 2x2 system `g c = rhs`.
fn solve2(g: &[[f64; 2]; 2], rhs: [f64; 2], det: f64) -> [f64; 2] {
    [
        (g[1][1] * rhs[0] - g[0][1] * rhs[1]) / det,
        (g[0][0] * rhs[1] - g[0][1] * rhs[0]) / det,
    ]
}

/// Picks a sign so that the first component larger than `1e-8` is positive.
fn sign_fix(v: Vec4) -> Vec4 {
    for c in v {
        if c.abs() > 1e-8 {
            return if c < 0.0 { scale4(v, -1.0) } else { v };
        }
    }
    v
}

/// Picks the sign of the last frame vector so the full basis
/// `(t1, t2, f3, f4)` is positively oriented in the ambient space. Unlike a
/// component-sign rule this varies continuously over a connected patch, so
/// diagonal shape entries cannot jump sign between neighboring grid points.
fn orient_fix(t1: Vec4, t2: Vec4, f3: Vec4, f4: Vec4) -> Vec4 {
    if inner4(cross4(t1, t2, f3), f4) < 0.0 {
        scale4(f4, -1.0)
    } else {
        f4
    }
}

/// Runs the full pipeline at one chart point.
pub fn surface_point(
    patch: &SurfacePatch,
    t: f64,
    u: f64,
    tol: &Tolerances,
) -> Result<SlicePoint, GeomError> {
    let jt = Jet3::variable(t, 0);
    let ju = Jet3::variable(u, 1);
    let y = (patch.eval)(jt, ju)?;
    let position = jet_vals(&y);

    // Tangent jets (trusted to order 2) and second-derivative jets (order 1).
    let tj: [[Jet3; 4]; 2] = [
        [y[0].derivative(0), y[1].derivative(0), y[2].derivative(0), y[3].derivative(0)],
        [y[0].derivative(1), y[1].derivative(1), y[2].derivative(1), y[3].derivative(1)],
    ];
    let second = |i: usize, j: usize| -> [Jet3; 4] {
        [
            tj[i][0].derivative(j),
            tj[i][1].derivative(j),
            tj[i][2].derivative(j),
            tj[i][3].derivative(j),
        ]
    };
    let s00 = second(0, 0);
    let s01 = second(0, 1);
    let s11 = second(1, 1);

    let g00 = inner4_jet(&tj[0], &tj[0]);
    let g01 = inner4_jet(&tj[0], &tj[1]);
    let g11 = inner4_jet(&tj[1], &tj[1]);
    let det_jet = g00 * g11 - g01 * g01;
    let det = det_jet.value();
    let gv = [[g00.value(), g01.value()], [g01.value(), g11.value()]];
    let scale = gv
        .iter()
        .flatten()
        .fold(f64::MIN_POSITIVE, |m, e| m.max(e.abs()));
    if det.abs() <= tol.det * scale * scale {
        return Err(GeomError::DegenerateMetric { s: f64::NAN, t, u, det });
    }
    let metric_lorentzian = det < 0.0;
    let inv_det = det_jet.recip()?;

    // Second fundamental form jets: remove the tangential part.
    let tangential = |z: &[Jet3; 4]| -> [Jet3; 4] {
        let r0 = inner4_jet(z, &tj[0]);
        let r1 = inner4_jet(z, &tj[1]);
        let c0 = (g11 * r0 - g01 * r1) * inv_det;
        let c1 = (g00 * r1 - g01 * r0) * inv_det;
        let mut out = [Jet3::ZERO; 4];
        for c in 0..4 {
            out[c] = z[c] - c0 * tj[0][c] - c1 * tj[1][c];
        }
        out
    };
    let h00 = tangential(&s00);
    let h01 = tangential(&s01);
    let h11 = tangential(&s11);

    // Mean curvature vector as a jet (trusted to order 1).
    let ginv00 = g11 * inv_det;
    let ginv01 = -(g01 * inv_det);
    let ginv11 = g00 * inv_det;
    let mut h_jet = [Jet3::ZERO; 4];
    for c in 0..4 {
        h_jet[c] = (ginv00 * h00[c] + ginv01 * h01[c] * 2.0 + ginv11 * h11[c]) * 0.5;
    }
    let h_val = jet_vals(&h_jet);
    let hh = inner4(h_val, h_val);
    let he2 = dot_euclid4(h_val, h_val);

    // Intrinsic curvature from the second fundamental form.
    let h00v = jet_vals(&h00);
    let h01v = jet_vals(&h01);
    let h11v = jet_vals(&h11);
    let gauss = (inner4(h00v, h11v) - inner4(h01v, h01v)) / det;

    // Normal derivative of H: subtract the tangential motion.
    let tv = [jet_vals(&[tj[0][0], tj[0][1], tj[0][2], tj[0][3]]), {
        jet_vals(&[tj[1][0], tj[1][1], tj[1][2], tj[1][3]])
    }];
    let mut pmc_residual = 0.0f64;
    for m in 0..2 {
        let z = [h_jet[0].d1(m), h_jet[1].d1(m), h_jet[2].d1(m), h_jet[3].d1(m)];
        let c = solve2(&gv, [inner4(z, tv[0]), inner4(z, tv[1])], det);
        let normal_part = sub4(sub4(z, scale4(tv[0], c[0])), scale4(tv[1], c[1]));
        pmc_residual = pmc_residual.max(dot_euclid4(normal_part, normal_part).sqrt());
    }

    // Basis of the normal plane by cofactor expansion against the axes.
    let mut w = [[0.0; 4]; 4];
    for (a, slot) in w.iter_mut().enumerate() {
        let mut e = [0.0; 4];
        e[a] = 1.0;
        *slot = cross4(tv[0], tv[1], e);
    }
    let pick_max = |score: &dyn Fn(Vec4) -> f64| -> Vec4 {
        let mut best = w[0];
        let mut best_score = score(w[0]);
        for cand in w.iter().skip(1) {
            let sc = score(*cand);
            if sc > best_score {
                best_score = sc;
                best = *cand;
            }
        }
        best
    };
    let v1 = pick_max(&|v: Vec4| dot_euclid4(v, v));
    let v1n2 = dot_euclid4(v1, v1).max(f64::MIN_POSITIVE);
    let v2 = pick_max(&|v: Vec4| {
        let r = sub4(v, scale4(v1, dot_euclid4(v, v1) / v1n2));
        dot_euclid4(r, r)
    });

    // Frame selection: H-aligned orthonormal, null-adapted, or a fallback
    // frame when H vanishes.
    let frame = if he2 <= 1e-24 {
        gram_frame(&tv, v1, v2, tol)?
    } else if hh.abs() > tol.null * he2 {
        let eps3 = hh.signum();
        let f3 = scale4(h_val, 1.0 / hh.abs().sqrt());
        let complement = |v: Vec4| sub4(v, scale4(f3, eps3 * inner4(v, f3)));
        let w1 = complement(v1);
        let w2 = complement(v2);
        let wbest = if dot_euclid4(w1, w1) >= dot_euclid4(w2, w2) { w1 } else { w2 };
        let q = inner4(wbest, wbest);
        if q.abs() <= tol.null * dot_euclid4(wbest, wbest) {
            return Err(GeomError::NullVector { value: q });
        }
        let f4 = orient_fix(tv[0], tv[1], f3, scale4(wbest, 1.0 / q.abs().sqrt()));
        NormalFrame::Orthonormal { f3, f4, eps3, eps4: q.signum() }
    } else {
        // Null mean curvature: scale so that the Euclidean norm is sqrt(2),
        // matching the reference vector (1, 0, 0, 1).
        let l = scale4(h_val, 2f64.sqrt() / he2.sqrt());
        let (p1, p2) = (inner4(v1, l), inner4(v2, l));
        let v = if p1.abs() >= p2.abs() { v1 } else { v2 };
        let p = inner4(v, l);
        if p.abs() <= 1e-14 * dot_euclid4(v, v).sqrt() {
            return Err(GeomError::NullVector { value: p });
        }
        let vp = scale4(v, -1.0 / p);
        let lambda = (inner4(vp, vp) - 1.0) / (-2.0);
        let n = sub4(vp, scale4(l, lambda));
        NormalFrame::NullSpacelike { l, n }
    };

    let shape_of = |xi: Vec4| -> [[f64; 2]; 2] {
        let b = [
            [inner4(jet_vals(&s00), xi), inner4(jet_vals(&s01), xi)],
            [inner4(jet_vals(&s01), xi), inner4(jet_vals(&s11), xi)],
        ];
        let col = |j: usize| solve2(&gv, [b[0][j], b[1][j]], det);
        let c0 = col(0);
        let c1 = col(1);
        [[c0[0], c1[0]], [c0[1], c1[1]]]
    };
    let (shape_a, shape_b, combo) = match frame {
        NormalFrame::Orthonormal { f3, f4, eps3, eps4 } => {
            let a = shape_of(f3);
            let b = shape_of(f4);
            let combo = eps3 * a[0][0] * a[1][1] + eps4 * b[0][0] * b[1][1];
            (a, b, Some(combo))
        }
        NormalFrame::NullSpacelike { l, n } => (shape_of(l), shape_of(n), None),
    };

    Ok(SlicePoint {
        t,
        u,
        position,
        metric: gv,
        metric_lorentzian,
        mean_curvature_vec: h_val,
        hh,
        gauss,
        pmc_residual,
        frame,
        shape_a,
        shape_b,
        combo,
    })
}

/// Orthonormalizes two spanning vectors of the normal plane (used only when
/// the mean curvature vector vanishes). A Lorentzian plane lists its
/// spacelike vector first.
fn gram_frame(
    tv: &[Vec4; 2],
    v1: Vec4,
    v2: Vec4,
    tol: &Tolerances,
) -> Result<NormalFrame, GeomError> {
    let q1 = inner4(v1, v1);
    let (base, other) = if q1.abs() > tol.null * dot_euclid4(v1, v1) {
        (v1, v2)
    } else {
        (v2, v1)
    };
    let qb = inner4(base, base);
    if qb.abs() <= tol.null * dot_euclid4(base, base) {
        return Err(GeomError::NullVector { value: qb });
    }
    let ea = qb.signum();
    let a = scale4(base, 1.0 / qb.abs().sqrt());
    let wv = sub4(other, scale4(a, ea * inner4(other, a)));
    let qw = inner4(wv, wv);
    if qw.abs() <= tol.null * dot_euclid4(wv, wv).max(f64::MIN_POSITIVE) {
        return Err(GeomError::NullVector { value: qw });
    }
    let eb = qw.signum();
    let b = scale4(wv, 1.0 / qw.abs().sqrt());
    let (f3, f4, eps3, eps4) = if ea < eb {
        (sign_fix(b), a, eb, ea)
    } else {
        (sign_fix(a), b, ea, eb)
    };
    let f4 = orient_fix(tv[0], tv[1], f3, f4);
    Ok(NormalFrame::Orthonormal { f3, f4, eps3, eps4 })
}

/// Aggregated sweep over `20 x 20` cell centers of the patch domain.
#[derive(Debug, Clone)]
pub struct SliceReport {
    pub label: String,
    /// Shape operators at the first sampled point.
    pub shape_op_f3: [[f64; 2]; 2],
    pub shape_op_f4: [[f64; 2]; 2],
    /// Diagonal entries at the first sampled point.
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    /// Frame signs at the first sampled point; `None` for a null frame.
    pub eps3: Option<f64>,
    pub eps4: Option<f64>,
    /// Largest off-diagonal entry of either shape operator over the grid.
    pub max_offdiag: f64,
    /// Largest spread of any diagonal entry over the grid.
    pub diag_variance: f64,
    /// Largest `|K|` over the grid.
    pub gauss_curvature: f64,
    /// Signed curvature at the first sampled point.
    pub gauss_first: f64,
    /// Mean curvature vector at the first sampled point.
    pub mean_curvature_vec: Vec4,
    /// Largest normal derivative of `H` over the grid.
    pub pmc_residual: f64,
    pub is_flat: bool,
    /// Nonzero lightlike mean curvature vector at every sampled point.
    pub is_marginally_trapped: bool,
    /// First sampled point used the null-adapted frame.
    pub frame_null: bool,
    /// Largest `|eps3 c1 c2 + eps4 d1 d2|` over orthonormal-frame points.
    pub combo_max: Option<f64>,
}

/// Sweeps the patch over `n x n` cell centers.
pub fn slice_check_n(
    patch: &SurfacePatch,
    n: usize,
    tol: &Tolerances,
) -> Result<SliceReport, GeomError> {
    if n == 0 {
        return Err(GeomError::InvalidConfig(
            "slice grid resolution must be at least 1".to_string(),
        ));
    }
    let [(t_lo, t_hi), (u_lo, u_hi)] = patch.domain;
    let mut first: Option<SlicePoint> = None;
    let mut max_offdiag = 0.0f64;
    let mut gauss_max = 0.0f64;
    let mut pmc_max = 0.0f64;
    let mut combo_max: Option<f64> = None;
    let mut all_null = true;
    let mut diag_lo = [f64::INFINITY; 4];
    let mut diag_hi = [f64::NEG_INFINITY; 4];
    for i in 0..n {
        for j in 0..n {
            let t = t_lo + (i as f64 + 0.5) * (t_hi - t_lo) / n as f64;
            let u = u_lo + (j as f64 + 0.5) * (u_hi - u_lo) / n as f64;
            let p = surface_point(patch, t, u, tol)?;
            for m in [p.shape_a[0][1], p.shape_a[1][0], p.shape_b[0][1], p.shape_b[1][0]] {
                max_offdiag = max_offdiag.max(m.abs());
            }
            let diag = [p.shape_a[0][0], p.shape_a[1][1], p.shape_b[0][0], p.shape_b[1][1]];
            for (k, v) in diag.into_iter().enumerate() {
                diag_lo[k] = diag_lo[k].min(v);
                diag_hi[k] = diag_hi[k].max(v);
            }
            gauss_max = gauss_max.max(p.gauss.abs());
            pmc_max = pmc_max.max(p.pmc_residual);
            if let Some(c) = p.combo {
                combo_max = Some(combo_max.map_or(c.abs(), |m: f64| m.max(c.abs())));
            }
            if !matches!(p.frame, NormalFrame::NullSpacelike { .. }) {
                all_null = false;
            }
            if first.is_none() {
                first = Some(p);
            }
        }
    }
    let first = first.expect("grid has at least one point");
    let diag_variance = (0..4).fold(0.0f64, |m, k| m.max(diag_hi[k] - diag_lo[k]));
    let (eps3, eps4, frame_null) = match first.frame {
        NormalFrame::Orthonormal { eps3, eps4, .. } => (Some(eps3), Some(eps4), false),
        NormalFrame::NullSpacelike { .. } => (None, None, true),
    };
    Ok(SliceReport {
        label: patch.label.clone(),
        shape_op_f3: first.shape_a,
        shape_op_f4: first.shape_b,
        c1: first.shape_a[0][0],
        c2: first.shape_a[1][1],
        d1: first.shape_b[0][0],
        d2: first.shape_b[1][1],
        eps3,
        eps4,
        max_offdiag,
        diag_variance,
        gauss_curvature: gauss_max,
        gauss_first: first.gauss,
        mean_curvature_vec: first.mean_curvature_vec,
        pmc_residual: pmc_max,
        is_flat: gauss_max < 1e-8,
        is_marginally_trapped: all_null,
        frame_null,
        combo_max,
    })
}

/// Sweeps the patch over the standard `20 x 20` grid.
pub fn slice_check(patch: &SurfacePatch, tol: &Tolerances) -> Result<SliceReport, GeomError> {
    slice_check_n(patch, 20, tol)
}

impl SliceReport {
    /// Deterministic JSON rendering with a fixed key order.
    pub fn to_json(&self) -> String {
        let vec4_json = |v: Vec4| {
            let items: Vec<String> = v.iter().map(|&x| jsonfmt::fmt_f64(x)).collect();
            jsonfmt::array(&items)
        };
        let mat2_json = |m: [[f64; 2]; 2]| {
            let rows: Vec<String> = m
                .iter()
                .map(|row| {
                    let items: Vec<String> = row.iter().map(|&x| jsonfmt::fmt_f64(x)).collect();
                    jsonfmt::array(&items)
                })
                .collect();
            jsonfmt::array(&rows)
        };
        let mut o = JsonObj::new();
        o.str("label", &self.label)
            .num("c1", self.c1)
            .num("c2", self.c2)
            .num("d1", self.d1)
            .num("d2", self.d2)
            .num_opt("eps3", self.eps3)
            .num_opt("eps4", self.eps4)
            .num("max_offdiag", self.max_offdiag)
            .num("diag_variance", self.diag_variance)
            .num("gauss_curvature", self.gauss_curvature)
            .num("gauss_first", self.gauss_first)
            .num("pmc_residual", self.pmc_residual)
            .boolean("is_flat", self.is_flat)
            .boolean("is_marginally_trapped", self.is_marginally_trapped)
            .boolean("frame_null", self.frame_null)
            .num_opt("combo_max", self.combo_max)
            .raw("mean_curvature_vec", &vec4_json(self.mean_curvature_vec))
            .raw("shape_op_f3", &mat2_json(self.shape_op_f3))
            .raw("shape_op_f4", &mat2_json(self.shape_op_f4));
        o.finish()
    }
}

fn require_positive(name: &'static str, v: f64) -> Result<f64, GeomError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(GeomError::InvalidConfig(format!(
            "surface parameter {name} must be positive, got {v}"
        )))
    }
}

fn require_nonzero(name: &'static str, v: f64) -> Result<f64, GeomError> {
    if v != 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(GeomError::InvalidConfig(format!(
            "surface parameter {name} must be nonzero and finite, got {v}"
        )))
    }
}

/// Builds one of the eleven normal-form surfaces.
pub fn build_lemma_surface(
    case: LemmaCase,
    params: &SurfaceParams,
) -> Result<SurfacePatch, GeomError> {
    let label = format!("surface-{}", case.as_str());
    let patch = match case {
        // Line times circle inside a spacelike hyperplane.
        LemmaCase::I => {
            let b = require_nonzero("B", params.b.unwrap_or(1.0))?;
            SurfacePatch {
                label,
                domain: [(-1.0, 1.0), (0.0, 6.0)],
                params: vec![("B".to_string(), b)],
                eval: Box::new(move |jt, ju| {
                    Ok([Jet3::constant(1.0), jt, ju.cos() * b, ju.sin() * b])
                }),
            }
        }
        // Spacelike hyperbola times line.
        LemmaCase::II => {
            let a = require_nonzero("A", params.a.unwrap_or(1.0))?;
            SurfacePatch {
                label,
                domain: [(-1.0, 1.0), (-1.0, 1.0)],
                params: vec![("A".to_string(), a)],
                eval: Box::new(move |jt, ju| {
                    Ok([jt.cosh() * a, jt.sinh() * a, ju, Jet3::constant(1.0)])
                }),
            }
        }
        // Timelike line times circle.
        LemmaCase::III => {
            let b = require_nonzero("B", params.b.unwrap_or(1.0))?;
            SurfacePatch {
                label,
                domain: [(-1.0, 1.0), (0.0, 6.0)],
                params: vec![("B".to_string(), b)],
                eval: Box::new(move |jt, ju| {
                    Ok([jt, ju.cos() * b, ju.sin() * b, Jet3::constant(1.0)])
                }),
            }
        }
        // Timelike hyperbola times line.
        LemmaCase::IV => {
            let a = require_nonzero("A", params.a.unwrap_or(1.0))?;
            SurfacePatch {
                label,
                domain: [(-1.0, 1.0), (-1.0, 1.0)],
                params: vec![("A".to_string(), a)],
                eval: Box::new(move |jt, ju| {
                    Ok([jt.sinh() * a, jt.cosh() * a, ju, Jet3::constant(1.0)])
                }),
            }
        }
        // Spacelike hyperbola times circle (Lorentzian normal plane).
        LemmaCase::V => {
            let a = require_nonzero("A", params.a.unwrap_or(1.0))?;
            let b = require_nonzero("B", params.b.unwrap_or(2.0))?;
            SurfacePatch {
                label,
                domain: [(-1.0, 1.0), (0.0, 6.0)],
                params: vec![("A".to_string(), a), ("B".to_string(), b)],
                eval: Box::new(move |jt, ju| {
                    Ok([jt.cosh() * a, jt.sinh() * a, ju.cos() * b, ju.sin() * b])
                }),
            }
        }
        // Timelike hyperbola times circle (Riemannian normal plane).
        LemmaCase::VI => {
            let a = require_nonzero("A", params.a.unwrap_or(1.0))?;
            let b = require_nonzero("B", params.b.unwrap_or(2.0))?;
            SurfacePatch {
                label,
                domain: [(-1.0, 1.0), (0.0, 6.0)],
                params: vec![("A".to_string(), a), ("B".to_string(), b)],
                eval: Box::new(move |jt, ju| {
                    Ok([jt.sinh() * a, jt.cosh() * a, ju.cos() * b, ju.sin() * b])
                }),
            }
        }
        // Elliptic graph inside a degenerate hyperplane.
        LemmaCase::VII => {
            let a = require_nonzero("A", params.a.unwrap_or(1.0))?;
            let b = require_nonzero("B", params.b.unwrap_or(2.0))?;
            SurfacePatch {
                label,
                domain: [(-1.0, 1.0), (-1.0, 1.0)],
                params: vec![("A".to_string(), a), ("B".to_string(), b)],
                eval: Box::new(move |jt, ju| {
                    let q = jt * jt * a + ju * ju * b;
                    Ok([q, jt, ju, q])
                }),
            }
        }
        // Round sphere inside a spacelike hyperplane.
        LemmaCase::VIII => {
            let r = require_positive("r", params.r.unwrap_or(1.0))?;
            SurfacePatch {
                label,
                domain: [(0.3, 2.8), (0.0, 6.0)],
                params: vec![("r".to_string(), r)],
                eval: Box::new(move |jt, ju| {
                    let st = jt.sin();
                    Ok([
                        Jet3::constant(0.0),
                        st * ju.cos() * r,
                        st * ju.sin() * r,
                        jt.cos() * r,
                    ])
                }),
            }
        }
        // One-sheeted pseudo-sphere of curvature +1/r^2.
        LemmaCase::IX => {
            let r = require_positive("r", params.r.unwrap_or(1.0))?;
            SurfacePatch {
                label,
                domain: [(-1.0, 1.0), (0.0, 6.0)],
                params: vec![("r".to_string(), r)],
                eval: Box::new(move |jt, ju| {
                    let ch = jt.cosh();
                    Ok([
                        jt.sinh() * r,
                        ch * ju.sin() * r,
                        ch * ju.cos() * r,
                        Jet3::constant(0.0),
                    ])
                }),
            }
        }
        // Hyperbolic plane of curvature -1/r^2.
        LemmaCase::X => {
            let r = require_positive("r", params.r.unwrap_or(1.0))?;
            SurfacePatch {
                label,
                domain: [(0.3, 1.5), (0.0, 6.0)],
                params: vec![("r".to_string(), r)],
                eval: Box::new(move |jt, ju| {
                    let sh = jt.sinh();
                    Ok([
                        jt.cosh() * r,
                        sh * ju.cos() * r,
                        sh * ju.sin() * r,
                        Jet3::constant(0.0),
                    ])
                }),
            }
        }
        // Flat marginally trapped graph.
        LemmaCase::XI => {
            let a = require_nonzero("A", params.a.unwrap_or(1.0))?;
            SurfacePatch {
                label,
                domain: [(-1.0, 1.0), (-1.0, 1.0)],
                params: vec![("A".to_string(), a)],
                eval: Box::new(move |jt, ju| {
                    let q = (jt * jt + ju * ju) * a;
                    Ok([q, jt, ju, q])
                }),
            }
        }
    };
    Ok(patch)
}

/// The constant-`s` slice of a hypersurface patch, as a surface patch.
///
/// The profile term of a family evaluator is lifted by jet composition, so a
/// constant `s`-jet propagates exactly: the slice sees the true restricted
/// chart, including all `t`- and `u`-derivatives.
pub fn slice_of(patch: ImmersionPatch, s0: f64) -> SurfacePatch {
    let domain = [patch.domain[1], patch.domain[2]];
    let label = format!("{}-slice", patch.label);
    let params = patch.params.clone();
    let eval = patch.eval;
    SurfacePatch {
        label,
        domain,
        params,
        eval: Box::new(move |jt, ju| eval(Jet3::constant(s0), jt, ju)),
    }
}
