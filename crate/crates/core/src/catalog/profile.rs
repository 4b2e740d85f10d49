//! Tabulated profile curves `s ↦ (f, f', f'', f''')` and their evaluation.
//!
//! A profile is stored as node values of `f`, `f'`, `f''` on a strictly
//! increasing grid. Between nodes:
//!
//! * `f` is the cubic Hermite interpolant of the `(f, f')` node data,
//! * `f'` is the cubic Hermite interpolant of the `(f', f'')` node data,
//! * `f''` and `f'''` are the first and second derivatives of the
//!   `f'`-interpolant (piecewise quadratic and linear respectively).
//!
//! This makes the reported third derivative a genuine derivative of the
//! reported second-derivative curve instead of a separately stored table.
//! When a profile comes from a closed-form expression, the exact evaluator is
//! attached and used instead of the tables; the tables are still populated so
//! that export and inspection work uniformly.

use std::sync::Arc;

use crate::GeomError;

/// How a profile solution was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Closed-form derivatives, with `f` recovered by quadrature where no
    /// elementary antiderivative exists.
    Quadrature,
    /// Numerical integration of an explicit second-order ODE.
    ExplicitOde,
    /// Curvature-residual root solving at every integration stage.
    Synthesized,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Quadrature => "quadrature",
            Provenance::ExplicitOde => "explicit-ode",
            Provenance::Synthesized => "synthesized",
        }
    }
}

/// Exact evaluator `s ↦ [f, f', f'', f''']` attached to closed-form profiles.
#[derive(Clone)]
pub struct AnalyticProfile {
    pub eval: Arc<dyn Fn(f64) -> Result<[f64; 4], GeomError> + Send + Sync>,
}

impl std::fmt::Debug for AnalyticProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("AnalyticProfile { .. }")
    }
}

/// A solved profile curve on a one-dimensional grid.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    /// Strictly increasing sample locations.
    pub grid: Vec<f64>,
    /// Node values of `f`.
    pub f: Vec<f64>,
    /// Node values of `f'`.
    pub fp: Vec<f64>,
    /// Node values of `f''`.
    pub fpp: Vec<f64>,
    /// How the table was produced.
    pub provenance: Provenance,
    /// Interval on which evaluation is defined.
    pub valid_interval: (f64, f64),
    /// Exact evaluator, present for closed-form profiles.
    pub analytic: Option<AnalyticProfile>,
}

/// Cubic Hermite basis values and derivatives at parameter `t ∈ [0, 1]`.
/// Returns `(h00, h10, h01, h11)` for the requested derivative order.
fn hermite_basis(t: f64, order: u32) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    match order {
        0 => (
            2.0 * t2 * t - 3.0 * t2 + 1.0,
            t2 * t - 2.0 * t2 + t,
            -2.0 * t2 * t + 3.0 * t2,
            t2 * t - t2,
        ),
        1 => (
            6.0 * t2 - 6.0 * t,
            3.0 * t2 - 4.0 * t + 1.0,
            -6.0 * t2 + 6.0 * t,
            3.0 * t2 - 2.0 * t,
        ),
        _ => (12.0 * t - 6.0, 6.0 * t - 4.0, -12.0 * t + 6.0, 6.0 * t - 2.0),
    }
}

fn hermite(v0: f64, d0: f64, v1: f64, d1: f64, h: f64, t: f64, order: u32) -> f64 {
    let (b00, b10, b01, b11) = hermite_basis(t, order);
    let raw = v0 * b00 + h * d0 * b10 + v1 * b01 + h * d1 * b11;
    raw / h.powi(order as i32)
}

impl ProfileSolution {
    /// Builds a solution from node tables, validating monotonicity and equal
    /// lengths.
    pub fn from_nodes(
        grid: Vec<f64>,
        f: Vec<f64>,
        fp: Vec<f64>,
        fpp: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self, GeomError> {
        if grid.len() < 2 {
            return Err(GeomError::InvalidConfig(
                "profile needs at least two grid nodes".into(),
            ));
        }
        if f.len() != grid.len() || fp.len() != grid.len() || fpp.len() != grid.len() {
            return Err(GeomError::InvalidConfig(
                "profile node tables must have equal lengths".into(),
            ));
        }
        for w in grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(GeomError::InvalidConfig(
                    "profile grid must be strictly increasing".into(),
                ));
            }
        }
        for (name, col) in [("f", &f), ("f'", &fp), ("f''", &fpp)] {
            if col.iter().any(|v| !v.is_finite()) {
                return Err(GeomError::InvalidConfig(format!(
                    "profile column {name} contains a non-finite value"
                )));
            }
        }
        let valid_interval = (grid[0], *grid.last().unwrap());
        Ok(ProfileSolution {
            grid,
            f,
            fp,
            fpp,
            provenance,
            valid_interval,
            analytic: None,
        })
    }

    /// Locates the segment index `i` with `grid[i] <= s <= grid[i+1]`,
    /// tolerating round-off just outside the boundary nodes.
    fn segment(&self, s: f64) -> Result<usize, GeomError> {
        let (lo, hi) = self.valid_interval;
        let slack = 1e-12 * (1.0 + hi.abs().max(lo.abs()));
        if s < lo - slack || s > hi + slack {
            return Err(GeomError::OutOfDomain {
                what: "profile parameter s",
                value: s,
                lo,
                hi,
            });
        }
        // partition_point returns the first index with grid[i] > s.
        let idx = self.grid.partition_point(|&g| g <= s);
        Ok(idx.clamp(1, self.grid.len() - 1) - 1)
    }

    /// Evaluates `[f, f', f'', f''']` at `s`.
    pub fn eval4(&self, s: f64) -> Result<[f64; 4], GeomError> {
        if let Some(exact) = &self.analytic {
            return (exact.eval)(s);
        }
        let i = self.segment(s)?;
        let (s0, s1) = (self.grid[i], self.grid[i + 1]);
        let h = s1 - s0;
        let t = ((s - s0) / h).clamp(0.0, 1.0);
        let f = hermite(self.f[i], self.fp[i], self.f[i + 1], self.fp[i + 1], h, t, 0);
        let args = (self.fp[i], self.fpp[i], self.fp[i + 1], self.fpp[i + 1]);
        let fp = hermite(args.0, args.1, args.2, args.3, h, t, 0);
        let fpp = hermite(args.0, args.1, args.2, args.3, h, t, 1);
        let fppp = hermite(args.0, args.1, args.2, args.3, h, t, 2);
        Ok([f, fp, fpp, fppp])
    }

    /// Maximum mismatch between the derivative of the `f`-interpolant and the
    /// `f'`-interpolant, sampled at all segment midpoints. The two cubics are
    /// built from consistent data, so this should be tiny on a fine grid.
    pub fn hermite_consistency(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.grid.len() - 1 {
            let (s0, s1) = (self.grid[i], self.grid[i + 1]);
            let h = s1 - s0;
            let t = 0.5;
            let df = hermite(self.f[i], self.fp[i], self.f[i + 1], self.fp[i + 1], h, t, 1);
            let fp = hermite(self.fp[i], self.fpp[i], self.fp[i + 1], self.fpp[i + 1], h, t, 0);
            worst = worst.max((df - fp).abs());
        }
        worst
    }

    /// Serializes the node tables as CSV with full float precision, so that a
    /// re-import reproduces the tables bit for bit.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,f,fp,fpp\n");
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.grid[i], self.f[i], self.fp[i], self.fpp[i]
            ));
        }
        out
    }

    /// Parses the CSV produced by [`to_csv`](Self::to_csv). The imported
    /// profile always evaluates through the node tables.
    pub fn from_csv(text: &str) -> Result<Self, GeomError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| GeomError::InvalidConfig("empty profile file".into()))?;
        if header.trim() != "s,f,fp,fpp" {
            return Err(GeomError::InvalidConfig(format!(
                "unexpected profile header {header:?}; expected \"s,f,fp,fpp\""
            )));
        }
        let mut grid = Vec::new();
        let mut f = Vec::new();
        let mut fp = Vec::new();
        let mut fpp = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(GeomError::InvalidConfig(format!(
                    "profile line {} has {} fields, expected 4",
                    lineno + 2,
                    fields.len()
                )));
            }
            let mut parsed = [0.0; 4];
            for (k, field) in fields.iter().enumerate() {
                parsed[k] = field.trim().parse::<f64>().map_err(|e| {
                    GeomError::InvalidConfig(format!(
                        "profile line {}: bad float {field:?}: {e}",
                        lineno + 2
                    ))
                })?;
            }
            grid.push(parsed[0]);
            f.push(parsed[1]);
            fp.push(parsed[2]);
            fpp.push(parsed[3]);
        }
        ProfileSolution::from_nodes(grid, f, fp, fpp, Provenance::Synthesized)
    }

    /// Checks that the profile covers `[lo, hi]`.
    pub fn require_interval(&self, lo: f64, hi: f64) -> Result<(), GeomError> {
        let slack = 1e-12 * (1.0 + hi.abs().max(lo.abs()));
        if self.valid_interval.0 > lo + slack || self.valid_interval.1 < hi - slack {
            return Err(GeomError::IntervalMismatch);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Tabulates a smooth function with exact derivative data.
    fn tabulate(
        lo: f64,
        hi: f64,
        n: usize,
        f: impl Fn(f64) -> f64,
        fp: impl Fn(f64) -> f64,
        fpp: impl Fn(f64) -> f64,
    ) -> ProfileSolution {
        let grid: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        let fv = grid.iter().map(|&s| f(s)).collect();
        let fpv = grid.iter().map(|&s| fp(s)).collect();
        let fppv = grid.iter().map(|&s| fpp(s)).collect();
        ProfileSolution::from_nodes(grid, fv, fpv, fppv, Provenance::ExplicitOde).unwrap()
    }

    #[test]
    fn cubic_data_is_reproduced_exactly_for_value_and_slope() {
        // f cubic: the Hermite interpolant of (f, f') is exact; the
        // interpolant of (f', f'') is a quadratic represented exactly by the
        // cubic basis, so f'' and f''' come out exact as well.
        let prof = tabulate(
            0.0,
            2.0,
            9,
            |s| s * s * s - 2.0 * s + 1.0,
            |s| 3.0 * s * s - 2.0,
            |s| 6.0 * s,
        );
        for &s in &[0.05, 0.333, 1.0, 1.77, 2.0] {
            let [f, fp, fpp, fppp] = prof.eval4(s).unwrap();
            assert!((f - (s * s * s - 2.0 * s + 1.0)).abs() < 1e-12, "f at {s}");
            assert!((fp - (3.0 * s * s - 2.0)).abs() < 1e-12, "f' at {s}");
            assert!((fpp - 6.0 * s).abs() < 1e-11, "f'' at {s}");
            assert!((fppp - 6.0).abs() < 1e-9, "f''' at {s}");
        }
    }

    #[test]
    fn generic_profile_converges_at_expected_order() {
        let prof = tabulate(1.0, 2.0, 1001, f64::ln, |s| 1.0 / s, |s| -1.0 / (s * s));
        for &s in &[1.0004, 1.2503, 1.911] {
            let [f, fp, fpp, fppp] = prof.eval4(s).unwrap();
            assert!((f - s.ln()).abs() < 1e-12);
            assert!((fp - 1.0 / s).abs() < 1e-12);
            assert!((fpp + 1.0 / (s * s)).abs() < 1e-7);
            assert!((fppp - 2.0 / (s * s * s)).abs() < 1e-3);
        }
    }

    #[test]
    fn hermite_consistency_is_small_on_fine_grids() {
        let prof = tabulate(1.0, 2.0, 1001, f64::ln, |s| 1.0 / s, |s| -1.0 / (s * s));
        assert!(prof.hermite_consistency() < 1e-8);
    }

    #[test]
    fn out_of_range_evaluation_is_rejected() {
        let prof = tabulate(1.0, 2.0, 11, |s| s, |_| 1.0, |_| 0.0);
        assert!(matches!(
            prof.eval4(0.5),
            Err(GeomError::OutOfDomain { .. })
        ));
        assert!(matches!(
            prof.eval4(2.5),
            Err(GeomError::OutOfDomain { .. })
        ));
        // Round-off just outside the boundary is tolerated.
        assert!(prof.eval4(1.0 - 1e-14).is_ok());
        assert!(prof.eval4(2.0 + 1e-14).is_ok());
    }

    #[test]
    fn csv_round_trip_is_bit_identical() {
        let prof = tabulate(1.0, 2.0, 37, f64::sin, f64::cos, |s| -s.sin());
        let text = prof.to_csv();
        let back = ProfileSolution::from_csv(&text).unwrap();
        assert_eq!(prof.grid, back.grid);
        assert_eq!(prof.f, back.f);
        assert_eq!(prof.fp, back.fp);
        assert_eq!(prof.fpp, back.fpp);
        for &s in &[1.0, 1.31, 1.9999] {
            let a = prof.eval4(s).unwrap();
            let b = back.eval4(s).unwrap();
            assert_eq!(a, b, "evaluation must match bit for bit at {s}");
        }
        // Second serialization is identical text.
        assert_eq!(text, back.to_csv());
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(ProfileSolution::from_csv("").is_err());
        assert!(ProfileSolution::from_csv("a,b,c\n1,2,3\n").is_err());
        assert!(ProfileSolution::from_csv("s,f,fp,fpp\n1,2,3\n").is_err());
        assert!(ProfileSolution::from_csv("s,f,fp,fpp\n1,2,nope,4\n").is_err());
        // Non-increasing grid.
        assert!(ProfileSolution::from_csv("s,f,fp,fpp\n1,0,0,0\n1,0,0,0\n").is_err());
    }

    #[test]
    fn interval_coverage_check() {
        let prof = tabulate(1.0, 2.0, 11, |s| s, |_| 1.0, |_| 0.0);
        assert!(prof.require_interval(1.2, 1.8).is_ok());
        assert!(prof.require_interval(1.0, 2.0).is_ok());
        assert!(matches!(
            prof.require_interval(0.8, 1.5),
            Err(GeomError::IntervalMismatch)
        ));
        assert!(matches!(
            prof.require_interval(1.5, 2.3),
            Err(GeomError::IntervalMismatch)
        ));
    }

    #[test]
    fn analytic_override_takes_precedence() {
        let mut prof = tabulate(1.0, 2.0, 5, |_| 0.0, |_| 0.0, |_| 0.0);
        prof.analytic = Some(AnalyticProfile {
            eval: Arc::new(|s| Ok([s * s, 2.0 * s, 2.0, 0.0])),
        });
        let got = prof.eval4(1.5).unwrap();
        assert_eq!(got, [2.25, 3.0, 2.0, 0.0]);
    }
}
