//! Reference hypersurfaces with constant mean curvature.
//!
//! Any hypersurface with constant `H` satisfies the conservation equation
//! trivially, because the mean-curvature gradient vanishes identically.
//! These two fixtures pin down both metric signatures: a spacelike hyperplane
//! (totally geodesic, Riemannian) and the unit pseudo-sphere of one sheet
//! (umbilic with `|k| = 1`, Lorentzian).

use crate::geometry::ImmersionPatch;
use crate::jet::Jet3;

/// The spacelike hyperplane `x0 = 0`, charted by `(s, t, u)`.
///
/// Its normal `(1, 0, 0, 0)` is timelike, the induced metric is Euclidean,
/// and the shape operator vanishes identically.
pub fn spacelike_hyperplane() -> ImmersionPatch {
    ImmersionPatch {
        label: "hyperplane".to_string(),
        domain: [(-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0)],
        params: Vec::new(),
        epsilon_expected: Some(-1.0),
        eval: Box::new(|js: Jet3, jt: Jet3, ju: Jet3| Ok([Jet3::constant(0.0), js, jt, ju])),
    }
}

/// The unit pseudo-sphere `<x, x> = 1` of curvature one, charted by a
/// hyperbolic-angle coordinate `s` and sphere angles `(t, u)`.
///
/// The position vector itself is the unit spacelike normal, so the shape
/// operator is `-I` (up to orientation), the metric is Lorentzian, and the
/// mean curvature is constant.
pub fn de_sitter_unit() -> ImmersionPatch {
    ImmersionPatch {
        label: "de-sitter".to_string(),
        domain: [(-1.0, 1.0), (0.3, 2.8), (0.0, 6.0)],
        params: Vec::new(),
        epsilon_expected: Some(1.0),
        eval: Box::new(|js: Jet3, jt: Jet3, ju: Jet3| {
            let ch = js.cosh();
            let st = jt.sin();
            Ok([
                js.sinh(),
                ch * st * ju.cos(),
                ch * st * ju.sin(),
                ch * jt.cos(),
            ])
        }),
    }
}
