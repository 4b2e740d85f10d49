//! The conservation equation and its verification on sampled grids.
//!
//! A hypersurface with shape operator `S`, mean curvature `H = tr(S)/3` and
//! normal sign `eps = <N,N>` satisfies the conservation equation when
//!
//! ```text
//!     S(grad H) + eps * (3H/2) * grad H = 0.
//! ```
//!
//! Away from critical points of `H` this forces `grad H` to be a principal
//! direction with curvature `k1 = -(3 eps / 2) H`, which in turn pins one
//! scalar relation between the principal curvatures:
//!
//! * Riemannian metric (`eps = -1`):  `k1 = k2 + k3`,
//! * Lorentzian metric (`eps = +1`):  `3 k1 = -(k2 + k3)`.
//!
//! [`grid_verify`] samples a patch over a grid of cell centers, evaluates the
//! full vector residual together with both scalar relations and the
//! structural invariants (Gauss, Codazzi, connection-form constraints,
//! `H = H(s)`), and aggregates everything into a [`VerifySummary`] whose JSON
//! rendering is byte-identical for any thread count.

use rayon::prelude::*;

use crate::config::Tolerances;
use crate::geometry::{ImmersionPatch, PointData};
use crate::jsonfmt::{self, JsonObj};
use crate::GeomError;

/// Pointwise classification of the principal-curvature pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// The mean-curvature gradient vanishes (constant `H` locally).
    Cmc,
    /// Exactly two distinct principal curvatures.
    TwoDistinct,
    /// Three distinct principal curvatures.
    ThreeDistinct,
    /// All principal curvatures coincide but `H` is non-constant.
    Umbilic,
    /// The shape operator is not real-diagonalizable.
    NonDiagonalizable,
}

/// All cases, in report precedence order (used for modal tie-breaks).
const ALL_CASES: [Case; 5] = [
    Case::Cmc,
    Case::TwoDistinct,
    Case::ThreeDistinct,
    Case::Umbilic,
    Case::NonDiagonalizable,
];

impl Case {
    pub fn as_str(self) -> &'static str {
        match self {
            Case::Cmc => "CMC",
            Case::TwoDistinct => "TwoDistinct",
            Case::ThreeDistinct => "ThreeDistinct",
            Case::Umbilic => "Umbilic",
            Case::NonDiagonalizable => "NonDiagonalizable",
        }
    }
}

/// Pointwise verdict on the conservation equation.
#[derive(Debug, Clone, Copy)]
pub struct BiconservativeReport {
    /// Chart components of `S(grad H) + eps (3H/2) grad H`.
    pub residual_vec: [f64; 3],
    /// Metric norm `sqrt(|g(r, r)|)` of the residual vector.
    pub residual_norm: f64,
    /// `k1 - (k2 + k3)`.
    pub scalar_riemannian: f64,
    /// `3 k1 + (k2 + k3)`.
    pub scalar_lorentzian: f64,
    /// Normal sign `<N, N>`.
    pub epsilon: f64,
    /// Metric norm of `grad H`.
    pub grad_norm: f64,
    pub case: Case,
}

/// Classifies a point by shape-operator structure and `grad H`.
///
/// Precedence: non-diagonalizable before CMC before umbilic before the
/// distinct-count cases.
pub fn classify(p: &PointData, tol: &Tolerances) -> Case {
    if !p.curvature.diagonalizable {
        Case::NonDiagonalizable
    } else if p.curvature.grad_norm <= tol.grad {
        Case::Cmc
    } else {
        match p.curvature.distinct_count {
            1 => Case::Umbilic,
            2 => Case::TwoDistinct,
            _ => Case::ThreeDistinct,
        }
    }
}

/// Evaluates the conservation-equation residual at a prepared point.
pub fn residual_report(p: &PointData, tol: &Tolerances) -> BiconservativeReport {
    let grad = p.curvature.grad_h;
    let eps = p.frame.epsilon;
    let h = p.curvature.h;
    let mut r = [0.0; 3];
    for (i, slot) in r.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..3 {
            acc += p.frame.shape[i][j] * grad[j];
        }
        *slot = acc + eps * 1.5 * h * grad[i];
    }
    let mut q = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            q += p.frame.metric[i][j] * r[i] * r[j];
        }
    }
    let c = &p.curvature;
    BiconservativeReport {
        residual_vec: r,
        residual_norm: q.abs().sqrt(),
        scalar_riemannian: c.k1 - (c.k2 + c.k3),
        scalar_lorentzian: 3.0 * c.k1 + (c.k2 + c.k3),
        epsilon: eps,
        grad_norm: c.grad_norm,
        case: classify(p, tol),
    }
}

/// `|k1 + (3 eps / 2) H|`, the gradient-direction curvature relation.
///
/// Only meaningful when `grad H` is large enough to label `k1`.
pub fn check_k1_relation(p: &PointData, tol: &Tolerances) -> Result<f64, GeomError> {
    if p.curvature.grad_norm <= tol.grad {
        return Err(GeomError::GradTooSmall { grad_norm: p.curvature.grad_norm });
    }
    Ok((p.curvature.k1 + 1.5 * p.frame.epsilon * p.curvature.h).abs())
}

/// A rectangular sampling grid; points are the cell centers.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub s: (f64, f64),
    pub t: (f64, f64),
    pub u: (f64, f64),
    pub n: [usize; 3],
}

impl GridSpec {
    pub fn from_domain(domain: [(f64, f64); 3], n: [usize; 3]) -> GridSpec {
        GridSpec { s: domain[0], t: domain[1], u: domain[2], n }
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        for (axis, (lo, hi)) in [("s", self.s), ("t", self.t), ("u", self.u)] {
            if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
                return Err(GeomError::InvalidConfig(format!(
                    "grid range for {axis} must satisfy lo < hi and be finite, got [{lo}, {hi}]"
                )));
            }
        }
        if self.n.iter().any(|&n| n == 0) {
            return Err(GeomError::InvalidConfig(
                "grid resolution must be at least 1 in every direction".to_string(),
            ));
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    /// Cell center for a flattened index `(i_s * n_t + i_t) * n_u + i_u`.
    pub fn center(&self, idx: usize) -> (f64, f64, f64) {
        let iu = idx % self.n[2];
        let it = (idx / self.n[2]) % self.n[1];
        let is = idx / (self.n[2] * self.n[1]);
        let at = |lo: f64, hi: f64, i: usize, n: usize| lo + (i as f64 + 0.5) * (hi - lo) / n as f64;
        (
            at(self.s.0, self.s.1, is, self.n[0]),
            at(self.t.0, self.t.1, it, self.n[1]),
            at(self.u.0, self.u.1, iu, self.n[2]),
        )
    }
}

/// Extremes of the five connection-form components that must vanish for a
/// diagonal shape operator satisfying the conservation equation; a component
/// is `None` when no sampled point provided it.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConnectionMax {
    pub w12_e1: Option<f64>,
    pub w12_e3: Option<f64>,
    pub w13_e1: Option<f64>,
    pub w13_e2: Option<f64>,
    pub w23_e1: Option<f64>,
}

/// Aggregated verification result over a sampling grid.
#[derive(Debug, Clone)]
pub struct VerifySummary {
    pub family: String,
    pub max_residual: f64,
    pub mean_residual: f64,
    /// Normal sign at the first grid point.
    pub epsilon: f64,
    /// Causal sign of the gradient direction at the first labeled point.
    pub epsilon_e1: Option<f64>,
    /// All points share one normal sign, matching the expectation if pinned.
    pub epsilon_consistent: bool,
    /// Modal case over the grid.
    pub case: Case,
    /// Location of the largest residual.
    pub worst_point: (f64, f64, f64),
    pub grid: [usize; 3],
    pub points: usize,
    /// Points with one, two, three distinct principal curvatures.
    pub distinct_histogram: [usize; 3],
    /// Smallest gap between distinct curvature clusters over the grid.
    pub min_curvature_separation: Option<f64>,
    pub k1_relation_max: f64,
    pub scalar_riemannian_max: f64,
    pub scalar_lorentzian_max: f64,
    pub dh_dt_max: f64,
    pub dh_du_max: f64,
    pub gauss_max: f64,
    pub codazzi_max: f64,
    pub connection_max: ConnectionMax,
}

/// Per-point record collected in parallel, reduced sequentially.
struct Rec {
    residual: f64,
    scalar_r: f64,
    scalar_l: f64,
    eps: f64,
    eps_e1: Option<f64>,
    case: Case,
    distinct: usize,
    cluster_sep: Option<f64>,
    k1_rel: Option<f64>,
    dh_t: f64,
    dh_u: f64,
    gauss: f64,
    codazzi: f64,
    conn4: Option<[f64; 4]>,
    w23: Option<f64>,
}

fn record(p: &PointData, tol: &Tolerances) -> Rec {
    let rep = residual_report(p, tol);
    let c = &p.curvature;
    // Separation between distinct clusters: the smallest sorted-spectrum gap
    // that still counts as a genuine split.
    let mut ks = [c.k1, c.k2, c.k3];
    ks.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let kscale = ks.iter().fold(1.0f64, |m, k| m.max(k.abs()));
    let sep_tol = tol.dist * kscale;
    let cluster_sep = [ks[0] - ks[1], ks[1] - ks[2]]
        .into_iter()
        .filter(|g| *g > sep_tol)
        .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))));
    let k1_rel = check_k1_relation(p, tol).ok();
    let (conn4, w23) = match &p.connection {
        Some(cd) => (
            Some([
                cd.omega12[0].abs(),
                cd.omega12[2].abs(),
                cd.omega13[0].abs(),
                cd.omega13[1].abs(),
            ]),
            cd.omega23.map(|w| w[0].abs()),
        ),
        None => (None, None),
    };
    Rec {
        residual: rep.residual_norm,
        scalar_r: rep.scalar_riemannian.abs(),
        scalar_l: rep.scalar_lorentzian.abs(),
        eps: p.frame.epsilon,
        eps_e1: p.epsilon_e1,
        case: rep.case,
        distinct: c.distinct_count,
        cluster_sep,
        k1_rel,
        dh_t: p.dh[1].abs(),
        dh_u: p.dh[2].abs(),
        gauss: p.gauss_residual,
        codazzi: p.codazzi_residual,
        conn4,
        w23,
    }
}

/// Verifies a patch over the grid and aggregates the results.
///
/// Evaluation runs in parallel; the reduction is a sequential pass in grid
/// order, so the summary (and its JSON form) does not depend on the thread
/// count. The first failing point in grid order aborts the run.
pub fn grid_verify(
    patch: &ImmersionPatch,
    spec: &GridSpec,
    tol: &Tolerances,
) -> Result<VerifySummary, GeomError> {
    spec.validate()?;
    let total = spec.points();
    let results: Vec<Result<Rec, GeomError>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let (s, t, u) = spec.center(idx);
            patch.point(s, t, u, tol).map(|p| record(&p, tol))
        })
        .collect();

    let mut recs = Vec::with_capacity(total);
    for r in results {
        recs.push(r?);
    }

    let mut max_residual = f64::NEG_INFINITY;
    let mut worst_idx = 0usize;
    let mut sum_residual = 0.0;
    let first_eps = recs[0].eps;
    let mut eps_consistent = patch.epsilon_expected.map_or(true, |e| e == first_eps);
    let mut eps_e1 = None;
    let mut histogram = [0usize; 3];
    let mut case_counts = [0usize; 5];
    let mut min_sep: Option<f64> = None;
    let mut k1_rel_max = 0.0f64;
    let mut scalar_r_max = 0.0f64;
    let mut scalar_l_max = 0.0f64;
    let mut dh_t_max = 0.0f64;
    let mut dh_u_max = 0.0f64;
    let mut gauss_max = 0.0f64;
    let mut codazzi_max = 0.0f64;
    let mut conn = ConnectionMax::default();
    let fold_opt = |slot: &mut Option<f64>, v: f64| {
        *slot = Some(slot.map_or(v, |a| a.max(v)));
    };
    for (idx, r) in recs.iter().enumerate() {
        if r.residual > max_residual {
            max_residual = r.residual;
            worst_idx = idx;
        }
        sum_residual += r.residual;
        if r.eps != first_eps {
            eps_consistent = false;
        }
        if eps_e1.is_none() {
            eps_e1 = r.eps_e1;
        }
        histogram[(r.distinct - 1).min(2)] += 1;
        let ci = ALL_CASES.iter().position(|c| *c == r.case).unwrap();
        case_counts[ci] += 1;
        if let Some(sep) = r.cluster_sep {
            min_sep = Some(min_sep.map_or(sep, |m: f64| m.min(sep)));
        }
        if let Some(v) = r.k1_rel {
            k1_rel_max = k1_rel_max.max(v);
        }
        scalar_r_max = scalar_r_max.max(r.scalar_r);
        scalar_l_max = scalar_l_max.max(r.scalar_l);
        dh_t_max = dh_t_max.max(r.dh_t);
        dh_u_max = dh_u_max.max(r.dh_u);
        gauss_max = gauss_max.max(r.gauss);
        codazzi_max = codazzi_max.max(r.codazzi);
        if let Some(c4) = r.conn4 {
            fold_opt(&mut conn.w12_e1, c4[0]);
            fold_opt(&mut conn.w12_e3, c4[1]);
            fold_opt(&mut conn.w13_e1, c4[2]);
            fold_opt(&mut conn.w13_e2, c4[3]);
        }
        if let Some(w) = r.w23 {
            fold_opt(&mut conn.w23_e1, w);
        }
    }
    let mut case = ALL_CASES[0];
    let mut best = 0usize;
    for (i, c) in ALL_CASES.iter().enumerate() {
        if case_counts[i] > best {
            best = case_counts[i];
            case = *c;
        }
    }
    Ok(VerifySummary {
        family: patch.label.clone(),
        max_residual,
        mean_residual: sum_residual / total as f64,
        epsilon: first_eps,
        epsilon_e1: eps_e1,
        epsilon_consistent: eps_consistent,
        case,
        worst_point: spec.center(worst_idx),
        grid: spec.n,
        points: total,
        distinct_histogram: histogram,
        min_curvature_separation: min_sep,
        k1_relation_max: k1_rel_max,
        scalar_riemannian_max: scalar_r_max,
        scalar_lorentzian_max: scalar_l_max,
        dh_dt_max: dh_t_max,
        dh_du_max: dh_u_max,
        gauss_max,
        codazzi_max,
        connection_max: conn,
    })
}

impl VerifySummary {
    /// Whether the grid passes at the given residual tolerance.
    pub fn passes(&self, tau_bic: f64) -> bool {
        self.max_residual < tau_bic && self.epsilon_consistent
    }

    /// Deterministic JSON rendering with a fixed key order.
    pub fn to_json(&self) -> String {
        let worst = {
            let mut o = JsonObj::new();
            o.num("s", self.worst_point.0)
                .num("t", self.worst_point.1)
                .num("u", self.worst_point.2);
            o.finish()
        };
        let histogram = {
            let mut o = JsonObj::new();
            o.int("1", self.distinct_histogram[0] as i64)
                .int("2", self.distinct_histogram[1] as i64)
                .int("3", self.distinct_histogram[2] as i64);
            o.finish()
        };
        let connection = {
            let mut o = JsonObj::new();
            o.num_opt("w12_e1", self.connection_max.w12_e1)
                .num_opt("w12_e3", self.connection_max.w12_e3)
                .num_opt("w13_e1", self.connection_max.w13_e1)
                .num_opt("w13_e2", self.connection_max.w13_e2)
                .num_opt("w23_e1", self.connection_max.w23_e1);
            o.finish()
        };
        let grid: Vec<i64> = self.grid.iter().map(|&n| n as i64).collect();
        let mut o = JsonObj::new();
        o.str("family", &self.family)
            .num("max_residual", self.max_residual)
            .num("mean_residual", self.mean_residual)
            .num("epsilon", self.epsilon)
            .num_opt("epsilon_e1", self.epsilon_e1)
            .boolean("epsilon_consistent", self.epsilon_consistent)
            .str("case", self.case.as_str())
            .raw("worst_point", &worst)
            .raw("grid", &jsonfmt::int_array(&grid))
            .int("points", self.points as i64)
            .raw("distinct_count_histogram", &histogram)
            .num_opt("min_curvature_separation", self.min_curvature_separation)
            .num("k1_relation_max", self.k1_relation_max)
            .num("scalar_riemannian_max", self.scalar_riemannian_max)
            .num("scalar_lorentzian_max", self.scalar_lorentzian_max)
            .num("dh_dt_max", self.dh_dt_max)
            .num("dh_du_max", self.dh_du_max)
            .num("gauss_max", self.gauss_max)
            .num("codazzi_max", self.codazzi_max)
            .raw("connection_max", &connection);
        o.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::families::{
        build_family, profile_closed_form, FamilyConfig, FamilyId, FamilyParams, Signature,
    };
    use crate::catalog::profile::{ProfileSolution, Provenance};
    use crate::fixtures;

    fn tol() -> Tolerances {
        Tolerances::standard()
    }

    fn x1_shallow() -> crate::geometry::ImmersionPatch {
        let cfg = FamilyConfig::new(
            FamilyId::X1,
            Signature::Riemannian,
            FamilyParams { c1: Some(1.0), ..Default::default() },
        );
        let prof = profile_closed_form(&cfg, Some((0.5, 1.5)), &tol()).unwrap();
        build_family(&cfg, prof).unwrap()
    }

    #[test]
    fn hyperplane_grid_is_trivially_conservative() {
        let patch = fixtures::spacelike_hyperplane();
        let spec = GridSpec::from_domain(patch.domain, [4, 4, 4]);
        let summary = grid_verify(&patch, &spec, &tol()).unwrap();
        assert!(summary.max_residual < 1e-12, "{}", summary.max_residual);
        assert_eq!(summary.case, Case::Cmc);
        assert!(summary.epsilon_consistent);
        assert_eq!(summary.epsilon, -1.0);
        assert_eq!(summary.distinct_histogram, [64, 0, 0]);
        assert!(summary.passes(1e-6));
    }

    #[test]
    fn pseudo_sphere_grid_is_cmc() {
        let patch = fixtures::de_sitter_unit();
        let spec = GridSpec::from_domain(patch.domain, [4, 4, 4]);
        let summary = grid_verify(&patch, &spec, &tol()).unwrap();
        assert!(summary.max_residual < 1e-10);
        assert_eq!(summary.case, Case::Cmc);
        assert_eq!(summary.epsilon, 1.0);
        assert!(summary.epsilon_consistent);
    }

    #[test]
    fn genuine_family_passes_and_classifies_two_distinct() {
        // The orbit directions of the spherical skeleton share one principal
        // curvature, so the family realizes the two-distinct specialization
        // k1 = 2 k2 everywhere.
        let patch = x1_shallow();
        let spec = GridSpec::from_domain(patch.domain, [5, 5, 5]);
        let summary = grid_verify(&patch, &spec, &tol()).unwrap();
        assert!(summary.max_residual < 1e-6, "residual {}", summary.max_residual);
        assert_eq!(summary.case, Case::TwoDistinct);
        assert_eq!(summary.distinct_histogram, [0, 125, 0]);
        assert_eq!(summary.epsilon, -1.0);
        assert!(summary.epsilon_consistent);
        assert!(summary.scalar_riemannian_max < 1e-6);
        assert!(summary.scalar_lorentzian_max > 1e-2);
        assert!(summary.k1_relation_max < 1e-6);
        assert!(summary.dh_dt_max < 1e-8);
        assert!(summary.dh_du_max < 1e-8);
        assert!(summary.gauss_max < 1e-6);
        assert!(summary.codazzi_max < 1e-6);
        let cm = summary.connection_max;
        for w in [cm.w12_e1, cm.w12_e3, cm.w13_e1, cm.w13_e2] {
            assert!(w.unwrap() < 1e-6, "connection component {w:?}");
        }
        // The repeated eigenspace has no preferred basis, so the rotation
        // form between its two legs is reported as undefined.
        assert!(cm.w23_e1.is_none());
        assert!(summary.min_curvature_separation.unwrap() > 1e-3);
    }

    #[test]
    fn scalar_and_vector_residuals_agree_pointwise() {
        let patch = x1_shallow();
        for (s, t, u) in [(0.6, 0.3, 0.5), (1.0, 0.9, 1.1), (1.4, 0.5, 0.8)] {
            let p = patch.point(s, t, u, &tol()).unwrap();
            let rep = residual_report(&p, &tol());
            // The vector equation reduces to the Riemannian scalar relation
            // here, and both must vanish together.
            assert!(rep.residual_norm < 1e-7);
            assert!(rep.scalar_riemannian.abs() < 1e-7);
            assert!(rep.scalar_lorentzian.abs() > 1e-2);
            assert!(check_k1_relation(&p, &tol()).unwrap() < 1e-7);
        }
    }

    #[test]
    fn arbitrary_profile_fails_loudly() {
        // f = s^2 does not satisfy any curvature relation on this skeleton.
        let grid: Vec<f64> = (0..101).map(|i| 0.5 + 0.01 * i as f64).collect();
        let f: Vec<f64> = grid.iter().map(|s| s * s).collect();
        let fp: Vec<f64> = grid.iter().map(|s| 2.0 * s).collect();
        let fpp = vec![2.0; grid.len()];
        let prof = ProfileSolution::from_nodes(grid, f, fp, fpp, Provenance::Synthesized).unwrap();
        let cfg = FamilyConfig::new(
            FamilyId::X1,
            Signature::Riemannian,
            FamilyParams { c1: Some(1.0), ..Default::default() },
        );
        let patch = build_family(&cfg, prof).unwrap();
        let spec = GridSpec { s: (0.55, 1.45), t: (0.1, 1.2), u: (0.3, 1.2), n: [4, 4, 4] };
        let summary = grid_verify(&patch, &spec, &tol()).unwrap();
        assert!(summary.max_residual > 1e-2, "residual {}", summary.max_residual);
        assert!(!summary.passes(1e-6));
    }

    #[test]
    fn json_rendering_is_deterministic_across_thread_counts() {
        let patch = x1_shallow();
        let spec = GridSpec::from_domain(patch.domain, [4, 4, 4]);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| grid_verify(&patch, &spec, &tol()).unwrap().to_json())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        assert!(a.starts_with("{\"family\":\"x1\""));
        assert!(a.contains("\"distinct_count_histogram\":{\"1\":"));
        assert!(a.contains("\"connection_max\":{\"w12_e1\":"));
    }

    #[test]
    fn grid_spec_rejects_degenerate_input() {
        let bad_n = GridSpec { s: (0.0, 1.0), t: (0.0, 1.0), u: (0.0, 1.0), n: [0, 4, 4] };
        assert!(bad_n.validate().is_err());
        let bad_range = GridSpec { s: (1.0, 0.0), t: (0.0, 1.0), u: (0.0, 1.0), n: [4, 4, 4] };
        assert!(bad_range.validate().is_err());
        let spec = GridSpec { s: (0.0, 1.0), t: (0.0, 2.0), u: (0.0, 4.0), n: [2, 2, 2] };
        assert_eq!(spec.center(0), (0.25, 0.5, 1.0));
        assert_eq!(spec.center(7), (0.75, 1.5, 3.0));
    }

    #[test]
    fn first_failure_in_grid_order_aborts() {
        // A patch that fails for s beyond its profile interval.
        let patch = x1_shallow();
        let spec = GridSpec { s: (0.5, 5.0), t: (0.1, 1.2), u: (0.3, 1.2), n: [4, 2, 2] };
        match grid_verify(&patch, &spec, &tol()) {
            Err(GeomError::OutOfDomain { what, .. }) => {
                assert_eq!(what, "profile parameter s");
            }
            other => panic!("expected out-of-domain failure, got {other:?}"),
        }
    }
}
