//! Adaptive quadrature for profile functions that are defined as integrals of
//! a known derivative.
//!
//! The integrator is adaptive Simpson with the standard error estimate
//! `|S(a,m) + S(m,b) - S(a,b)| / 15` per subinterval and a fixed recursion
//! budget; it is fully deterministic for a given integrand and tolerance.

use crate::GeomError;

/// Description of a one-dimensional integral used when a profile component is
/// obtained by quadrature rather than in elementary closed form.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    /// Human-readable description of the integrand.
    pub integrand: String,
    /// Integration interval `[lo, hi]`.
    pub interval: (f64, f64),
    /// Absolute tolerance requested from the adaptive integrator.
    pub tolerance: f64,
    /// Whether the integrand is expected to blow up at an interval endpoint.
    pub singular_endpoint: bool,
}

/// Maximum recursion depth of the adaptive subdivision.
const MAX_DEPTH: u32 = 52;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    (h / 6.0) * (fa + 4.0 * fm + fb)
}

struct Adaptive<'f> {
    f: &'f dyn Fn(f64) -> f64,
}

impl Adaptive<'_> {
    fn sample(&self, x: f64) -> Result<f64, GeomError> {
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GeomError::NoConvergence)
        }
    }

    fn recurse(
        &self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, GeomError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.sample(lm)?;
        let frm = self.sample(rm)?;
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= MAX_DEPTH {
            return Err(GeomError::NoConvergence);
        }
        let half_tol = 0.5 * tol;
        let l = self.recurse(a, m, fa, flm, fm, left, half_tol, depth + 1)?;
        let r = self.recurse(m, b, fm, frm, fb, right, half_tol, depth + 1)?;
        Ok(l + r)
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Returns `SingularEndpoint` when the integrand is non-finite at an endpoint
/// and `NoConvergence` when a non-finite value is met in the interior or the
/// subdivision budget is exhausted before the error estimate drops below
/// `tol`.
pub fn integrate(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, GeomError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(GeomError::InvalidConfig(
            "quadrature interval must be finite".into(),
        ));
    }
    if tol <= 0.0 {
        return Err(GeomError::InvalidConfig(
            "quadrature tolerance must be positive".into(),
        ));
    }
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let flo = f(lo);
    if !flo.is_finite() {
        return Err(GeomError::SingularEndpoint { at: lo });
    }
    let fhi = f(hi);
    if !fhi.is_finite() {
        return Err(GeomError::SingularEndpoint { at: hi });
    }
    let driver = Adaptive { f };
    let m = 0.5 * (lo + hi);
    let fm = driver.sample(m)?;
    let whole = simpson(flo, fm, fhi, hi - lo);
    let value = driver.recurse(lo, hi, flo, fm, fhi, whole, tol, 0)?;
    Ok(sign * value)
}

/// Integrates the quadrature described by `spec`.
pub fn integrate_spec(
    f: &dyn Fn(f64) -> f64,
    spec: &QuadratureSpec,
) -> Result<f64, GeomError> {
    integrate(f, spec.interval.0, spec.interval.1, spec.tolerance)
}
