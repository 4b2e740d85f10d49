//! Centralized numerical tolerances.
//!
//! Every comparison against "numerically zero" in the crate goes through one
//! of the fields below so the thresholds live in a single place. The defaults
//! were chosen against the analytic test families: residuals of genuine
//! solutions sit many orders of magnitude below each threshold, while the
//! negative controls (deliberately wrong profiles) sit far above.

/// Tolerance bundle threaded through geometry evaluation and verification.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Relative threshold for treating a vector as null: `v` is null when
    /// `|<v, v>|` is at most `null * ||v||^2` in the Euclidean norm.
    pub null: f64,
    /// Relative threshold on `|det g|` (scaled by the metric's magnitude)
    /// below which the induced metric counts as degenerate.
    pub det: f64,
    /// Threshold on the normalized cubic discriminant below which the
    /// eigensolver declares a complex pair (non-diagonalizable operator).
    pub disc: f64,
    /// Absolute gap under which two principal curvatures count as equal when
    /// classifying a point as umbilic / two distinct / three distinct.
    pub dist: f64,
    /// Threshold on `||grad H||` under which a point counts as critical for
    /// the mean curvature (constant mean curvature case).
    pub grad: f64,
    /// Acceptance threshold on the biconservative residual norm.
    pub bic: f64,
    /// Safety margin kept between an ODE trajectory and the boundary of the
    /// region where its right-hand side is defined.
    pub guard_delta: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            null: 1e-9,
            det: 1e-12,
            disc: 1e-10,
            dist: 1e-6,
            grad: 1e-7,
            bic: 1e-6,
            guard_delta: 1e-4,
        }
    }
}

impl Tolerances {
    /// Default tolerances; identical to [`Default::default`] but usable in
    /// `const` position.
    pub const fn standard() -> Self {
        Tolerances {
            null: 1e-9,
            det: 1e-12,
            disc: 1e-10,
            dist: 1e-6,
            grad: 1e-7,
            bic: 1e-6,
            guard_delta: 1e-4,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matches_standard() {
        let d = Tolerances::default();
        let s = Tolerances::standard();
        assert_eq!(d.null, s.null);
        assert_eq!(d.det, s.det);
        assert_eq!(d.disc, s.disc);
        assert_eq!(d.dist, s.dist);
        assert_eq!(d.grad, s.grad);
        assert_eq!(d.bic, s.bic);
        assert_eq!(d.guard_delta, s.guard_delta);
    }

    #[test]
    fn thresholds_are_ordered_sensibly() {
        let t = Tolerances::default();
        assert!(t.det < t.disc);
        assert!(t.disc < t.dist);
        assert!(t.grad < t.bic);
    }
}
