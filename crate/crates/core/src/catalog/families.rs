//! The catalog of hypersurface families with diagonalizable shape operator
//! whose mean-curvature flow lines are curvature lines: rotational skeletons
//! over spherical, pseudo-spherical, hyperbolic and parabolic orbits,
//! cylinders, and the null-cone-offset construction.
//!
//! Every family is a skeleton (an explicit chart built from jets of `s, t, u`)
//! driven by a one-variable profile `f(s)`. Profiles come from three routes:
//!
//! * **closed form** — exact `f', f'', f'''` with `f` recovered by quadrature
//!   where no elementary antiderivative exists,
//! * **explicit ODE** — RK4 integration of the family's curvature ODE,
//! * **synthesis** — at every integration stage, solve "the scalar curvature
//!   condition holds at a probe point" for `f''` directly on the skeleton.
//!
//! The three routes cross-validate each other in the tests below.

use std::sync::Arc;

use super::ode;
use super::profile::{AnalyticProfile, ProfileSolution};
use crate::geometry::ImmersionPatch;
use crate::jet::{Jet3, JetPoint4};
use crate::minkowski::{adjugate3, cross4, det3, frobenius3, inner4, scale4, Mat3};
use crate::surface::LemmaCase;
use crate::{GeomError, Tolerances};

/// Requested signature of the induced metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    Riemannian,
    Lorentzian,
}

impl Signature {
    pub fn parse(text: &str) -> Result<Signature, GeomError> {
        match text {
            "riemannian" => Ok(Signature::Riemannian),
            "lorentzian" => Ok(Signature::Lorentzian),
            other => Err(GeomError::InvalidConfig(format!(
                "unknown signature {other:?}; expected riemannian or lorentzian"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Signature::Riemannian => "riemannian",
            Signature::Lorentzian => "lorentzian",
        }
    }

    /// The normal sign `<N,N>` realized by a genuine example of this
    /// signature: a Riemannian hypersurface has a timelike normal.
    pub fn epsilon(self) -> f64 {
        match self {
            Signature::Riemannian => -1.0,
            Signature::Lorentzian => 1.0,
        }
    }
}

/// Profile-slope branch for the `x1` family: `steep` means `|f'| > 1`
/// (timelike profile tangent, Lorentzian metric), `shallow` means `|f'| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Steep,
    Shallow,
}

impl Branch {
    pub fn parse(text: &str) -> Result<Branch, GeomError> {
        match text {
            "steep" => Ok(Branch::Steep),
            "shallow" => Ok(Branch::Shallow),
            other => Err(GeomError::InvalidConfig(format!(
                "unknown branch {other:?}; expected steep or shallow"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Steep => "steep",
            Branch::Shallow => "shallow",
        }
    }
}

/// Orbit skeleton for the cylinder families over a Lorentzian plane:
/// `rotational` uses a circular orbit, `parabolic` a null-direction graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkeletonKind {
    Rotational,
    Parabolic,
}

impl SkeletonKind {
    pub fn parse(text: &str) -> Result<SkeletonKind, GeomError> {
        match text {
            "rotational" => Ok(SkeletonKind::Rotational),
            "parabolic" => Ok(SkeletonKind::Parabolic),
            other => Err(GeomError::InvalidConfig(format!(
                "unknown skeleton {other:?}; expected rotational or parabolic"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SkeletonKind::Rotational => "rotational",
            SkeletonKind::Parabolic => "parabolic",
        }
    }
}

/// Identifier of a catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyId {
    /// Spherical-orbit rotational hypersurface, profile along the timelike axis.
    X1,
    /// Pseudo-spherical (de Sitter style) orbit, profile along a spacelike axis.
    X2,
    /// Hyperbolic-orbit rotational hypersurface, profile along a spacelike axis.
    X3,
    /// Parabolic-orbit hypersurface over a degenerate plane graph.
    X4,
    /// Cylinder with a timelike ruling over a Euclidean rotational profile.
    CylE3,
    /// Cylinder with spacelike ruling over a Lorentzian-plane profile, Riemannian.
    CylE31Riem,
    /// Cylinder with spacelike ruling over a Lorentzian-plane profile, Lorentzian.
    CylE31Lor,
    /// Rotational hypersurface with hyperbolic orbit `(cosh, sinh)` and circular radius.
    RotCoshSinh,
    /// Rotational hypersurface with hyperbolic orbit `(sinh, cosh)` and circular radius.
    RotSinhCosh,
    /// Null-cone parabolic skeleton with plane offset `a != 0`.
    NullCone,
    /// Two-dimensional normal-form surface; handled by the surface module.
    LemmaSurface(LemmaCase),
}

impl FamilyId {
    pub fn parse(text: &str) -> Option<FamilyId> {
        Some(match text {
            "x1" => FamilyId::X1,
            "x2" => FamilyId::X2,
            "x3" => FamilyId::X3,
            "x4" => FamilyId::X4,
            "cyl-e3" => FamilyId::CylE3,
            "cyl-e31-riem" => FamilyId::CylE31Riem,
            "cyl-e31-lor" => FamilyId::CylE31Lor,
            "rot-cosh" => FamilyId::RotCoshSinh,
            "rot-sinh" => FamilyId::RotSinhCosh,
            "nullcone" => FamilyId::NullCone,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyId::X1 => "x1",
            FamilyId::X2 => "x2",
            FamilyId::X3 => "x3",
            FamilyId::X4 => "x4",
            FamilyId::CylE3 => "cyl-e3",
            FamilyId::CylE31Riem => "cyl-e31-riem",
            FamilyId::CylE31Lor => "cyl-e31-lor",
            FamilyId::RotCoshSinh => "rot-cosh",
            FamilyId::RotSinhCosh => "rot-sinh",
            FamilyId::NullCone => "nullcone",
            FamilyId::LemmaSurface(_) => "lemma-surface",
        }
    }

    /// Families whose metric signature is forced by the skeleton, regardless
    /// of the profile.
    pub fn fixed_signature(self) -> Option<Signature> {
        match self {
            FamilyId::X2 | FamilyId::CylE3 | FamilyId::CylE31Lor | FamilyId::RotSinhCosh => {
                Some(Signature::Lorentzian)
            }
            FamilyId::CylE31Riem => Some(Signature::Riemannian),
            _ => None,
        }
    }
}

/// Free real parameters and variant switches of a family.
#[derive(Debug, Clone, Copy, Default)]
pub struct FamilyParams {
    /// Closed-form profile constant.
    pub c1: Option<f64>,
    /// Null-cone plane offset.
    pub a: Option<f64>,
    /// `x1` slope branch.
    pub branch: Option<Branch>,
    /// Cylinder orbit skeleton.
    pub skeleton: Option<SkeletonKind>,
}

/// A fully specified family: identifier, requested signature, parameters.
#[derive(Debug, Clone, Copy)]
pub struct FamilyConfig {
    pub id: FamilyId,
    pub signature: Signature,
    pub params: FamilyParams,
}

/// Internal skeleton tag carrying the values the chart formulas need.
#[derive(Debug, Clone, Copy)]
enum Sk {
    X1,
    X2,
    X3,
    X4,
    NullCone { a: f64 },
    CylE3,
    CylRot,
    CylParab,
    RotCosh,
    RotSinh,
}

impl FamilyConfig {
    pub fn new(id: FamilyId, signature: Signature, params: FamilyParams) -> FamilyConfig {
        FamilyConfig { id, signature, params }
    }

    fn bad(&self, msg: impl Into<String>) -> GeomError {
        GeomError::InvalidConfig(format!("{}: {}", self.id.as_str(), msg.into()))
    }

    fn forbid_c1(&self) -> Result<(), GeomError> {
        if self.params.c1.is_some() {
            Err(self.bad("parameter c1 does not apply; the profile comes from --init or a profile file"))
        } else {
            Ok(())
        }
    }

    fn forbid_a(&self) -> Result<(), GeomError> {
        if self.params.a.is_some() {
            Err(self.bad("parameter a only applies to the nullcone family"))
        } else {
            Ok(())
        }
    }

    fn forbid_branch(&self) -> Result<(), GeomError> {
        if self.params.branch.is_some() {
            Err(self.bad("parameter branch only applies to the x1 family"))
        } else {
            Ok(())
        }
    }

    fn forbid_skeleton(&self) -> Result<(), GeomError> {
        if self.params.skeleton.is_some() {
            Err(self.bad("parameter skeleton only applies to the cyl-e31 families"))
        } else {
            Ok(())
        }
    }

    fn require_c1(&self) -> Result<f64, GeomError> {
        match self.params.c1 {
            Some(c1) if c1 != 0.0 => Ok(c1),
            Some(_) => Err(self.bad("parameter c1 must be nonzero")),
            None => Err(self.bad("missing required parameter c1 (--c1)")),
        }
    }

    fn require_a(&self) -> Result<f64, GeomError> {
        match self.params.a {
            Some(a) if a != 0.0 => Ok(a),
            Some(_) => Err(self.bad(
                "parameter a must be nonzero; the a = 0 degeneration is the x4 family",
            )),
            None => Err(self.bad("missing required parameter a (--a)")),
        }
    }

    fn check_fixed_signature(&self) -> Result<(), GeomError> {
        if let Some(fixed) = self.id.fixed_signature() {
            if self.signature != fixed {
                return Err(self.bad(format!(
                    "this skeleton realizes a {} metric for every profile; pass --signature {}",
                    fixed.as_str(),
                    fixed.as_str()
                )));
            }
        }
        Ok(())
    }

    /// The `x1` slope branch, defaulting to the one whose realized normal
    /// sign matches the requested signature.
    pub fn branch(&self) -> Branch {
        self.params.branch.unwrap_or(match self.signature {
            Signature::Riemannian => Branch::Shallow,
            Signature::Lorentzian => Branch::Steep,
        })
    }

    /// The cylinder orbit skeleton, defaulting to rotational.
    pub fn skeleton(&self) -> SkeletonKind {
        self.params.skeleton.unwrap_or(SkeletonKind::Rotational)
    }

    /// Validates parameter presence, signs, and signature compatibility.
    pub fn validate(&self) -> Result<(), GeomError> {
        self.check_fixed_signature()?;
        match self.id {
            // The profile constant c1 parametrizes only the closed forms, so
            // its presence is enforced where those are built; a skeleton with
            // an externally supplied profile table needs no c1.
            FamilyId::X1 => {
                self.forbid_a()?;
                self.forbid_skeleton()?;
            }
            FamilyId::X2 | FamilyId::X3 => {
                self.forbid_a()?;
                self.forbid_branch()?;
                self.forbid_skeleton()?;
            }
            FamilyId::X4 => {
                self.forbid_a()?;
                self.forbid_branch()?;
                self.forbid_skeleton()?;
                if let Some(c1) = self.params.c1 {
                    match self.signature {
                        Signature::Riemannian if c1 >= 0.0 => {
                            return Err(self.bad("the riemannian closed form requires c1 < 0"));
                        }
                        Signature::Lorentzian if c1 <= 0.0 => {
                            return Err(self.bad("the lorentzian closed form requires c1 > 0"));
                        }
                        _ => {}
                    }
                }
            }
            FamilyId::CylE3 => {
                self.forbid_c1()?;
                self.forbid_a()?;
                self.forbid_branch()?;
                self.forbid_skeleton()?;
            }
            FamilyId::CylE31Riem | FamilyId::CylE31Lor => {
                self.forbid_a()?;
                self.forbid_branch()?;
                match self.skeleton() {
                    SkeletonKind::Rotational => self.forbid_c1()?,
                    SkeletonKind::Parabolic => {
                        if let Some(c1) = self.params.c1 {
                            match self.signature {
                                Signature::Riemannian if c1 >= 0.0 => {
                                    return Err(self.bad(
                                        "the riemannian parabolic closed form requires c1 < 0",
                                    ));
                                }
                                Signature::Lorentzian if c1 <= 0.0 => {
                                    return Err(self.bad(
                                        "the lorentzian parabolic closed form requires c1 > 0",
                                    ));
                                }
                                _ => {}
                            }
                        }
                    }
                }
            }
            FamilyId::RotCoshSinh | FamilyId::RotSinhCosh => {
                self.forbid_c1()?;
                self.forbid_a()?;
                self.forbid_branch()?;
                self.forbid_skeleton()?;
            }
            FamilyId::NullCone => {
                let a = self.require_a()?;
                self.forbid_branch()?;
                self.forbid_skeleton()?;
                if let Some(c1) = self.params.c1 {
                    if c1 == 0.0 {
                        return Err(self.bad("parameter c1 must be nonzero"));
                    }
                    match self.signature {
                        Signature::Riemannian if c1 * a.powi(3) >= 0.0 => {
                            return Err(self.bad(
                                "the riemannian closed form requires c1 * a^3 < 0",
                            ));
                        }
                        Signature::Lorentzian if c1 <= 0.0 => {
                            return Err(self.bad("the lorentzian closed form requires c1 > 0"));
                        }
                        _ => {}
                    }
                }
            }
            FamilyId::LemmaSurface(_) => {
                return Err(self.bad(
                    "normal-form surfaces are two-dimensional; use the surface API or the slice subcommand",
                ));
            }
        }
        Ok(())
    }

    /// The normal sign `<N,N>` this configuration realizes when built.
    /// For `x1` this is decided by the slope branch, not by the requested
    /// signature: a quartic profile on the steep branch still has `|f'| > 1`
    /// and therefore a Lorentzian metric.
    pub fn expected_epsilon(&self) -> f64 {
        match self.id {
            FamilyId::X1 => match self.branch() {
                Branch::Steep => 1.0,
                Branch::Shallow => -1.0,
            },
            FamilyId::X2 | FamilyId::CylE3 | FamilyId::CylE31Lor | FamilyId::RotSinhCosh => 1.0,
            FamilyId::CylE31Riem => -1.0,
            _ => self.signature.epsilon(),
        }
    }

    fn skeleton_spec(&self) -> Result<Sk, GeomError> {
        Ok(match self.id {
            FamilyId::X1 => Sk::X1,
            FamilyId::X2 => Sk::X2,
            FamilyId::X3 => Sk::X3,
            FamilyId::X4 => Sk::X4,
            FamilyId::NullCone => Sk::NullCone { a: self.require_a()? },
            FamilyId::CylE3 => Sk::CylE3,
            FamilyId::CylE31Riem | FamilyId::CylE31Lor => match self.skeleton() {
                SkeletonKind::Rotational => Sk::CylRot,
                SkeletonKind::Parabolic => Sk::CylParab,
            },
            FamilyId::RotCoshSinh => Sk::RotCosh,
            FamilyId::RotSinhCosh => Sk::RotSinh,
            FamilyId::LemmaSurface(_) => {
                return Err(self.bad("normal-form surfaces have no hypersurface skeleton"));
            }
        })
    }

    /// The maximal `s`-interval on which the closed-form profile is defined,
    /// shrunk by the guard margin. The upper end may be infinite.
    pub fn guard_interval(&self, tol: &Tolerances) -> Result<(f64, f64), GeomError> {
        self.validate()?;
        let d = tol.guard_delta;
        let inf = f64::INFINITY;
        let iv = match self.id {
            FamilyId::X1 => {
                let c1 = self.require_c1()?;
                match (self.signature, self.branch()) {
                    // quartic steep: c1^2 s^4 > 1
                    (Signature::Riemannian, Branch::Steep) => {
                        (((1.0 + d) / (c1 * c1)).powf(0.25), inf)
                    }
                    (Signature::Riemannian, Branch::Shallow) => (d, inf),
                    // cube-root steep: s^(4/3) < c1^2
                    (Signature::Lorentzian, Branch::Steep) => {
                        let cap = c1 * c1 - d;
                        if cap <= 0.0 {
                            return Err(GeomError::EmptyDomain);
                        }
                        (d, cap.powf(0.75))
                    }
                    (Signature::Lorentzian, Branch::Shallow) => (d, inf),
                }
            }
            FamilyId::X2 => {
                let c1 = self.require_c1()?;
                ((c1 * c1 + d).powf(0.75), inf)
            }
            FamilyId::X3 => {
                let c1 = self.require_c1()?;
                match self.signature {
                    Signature::Riemannian => ((c1 * c1 + d).powf(0.25), inf),
                    Signature::Lorentzian => (d, inf),
                }
            }
            FamilyId::NullCone => {
                let a = self.require_a()?;
                if a > 0.0 {
                    (d, inf)
                } else {
                    (-2.0 * a + d, inf)
                }
            }
            _ => (d, inf),
        };
        if iv.0 >= iv.1 {
            return Err(GeomError::EmptyDomain);
        }
        Ok(iv)
    }

    /// A deterministic default `s`-interval inside the guard interval.
    pub fn default_interval(&self, tol: &Tolerances) -> Result<(f64, f64), GeomError> {
        let (lo, hi) = self.guard_interval(tol)?;
        let (mut lo2, mut hi2);
        if hi.is_finite() {
            lo2 = if lo < 0.1 { 0.25 } else { lo + 0.25 };
            hi2 = hi - 0.15 * (hi - lo);
            if !(lo2 < hi2) {
                let w = hi - lo;
                lo2 = lo + 0.25 * w;
                hi2 = hi - 0.25 * w;
            }
        } else {
            lo2 = if lo < 0.1 { 0.25 } else { lo + 0.25 };
            hi2 = lo2 + 2.0;
        }
        if !(lo2 < hi2) {
            return Err(GeomError::EmptyDomain);
        }
        Ok((lo2, hi2))
    }

    /// Default `(t, u)` verification box.
    pub fn default_tu(&self) -> [(f64, f64); 2] {
        match self.id {
            FamilyId::X1 => [(0.1, 1.2), (0.3, 1.2)],
            FamilyId::X2 => [(0.4, 2.6), (-1.0, 1.0)],
            FamilyId::X3 => [(0.3, 1.5), (0.0, 2.0)],
            FamilyId::X4 | FamilyId::NullCone => [(-1.0, 1.0), (-1.0, 1.0)],
            FamilyId::CylE3 => [(0.2, 6.0), (-1.0, 1.0)],
            FamilyId::CylE31Riem | FamilyId::CylE31Lor => match self.skeleton() {
                SkeletonKind::Rotational => [(0.2, 6.0), (-1.0, 1.0)],
                SkeletonKind::Parabolic => [(-1.0, 1.0), (-1.0, 1.0)],
            },
            FamilyId::RotCoshSinh | FamilyId::RotSinhCosh => [(-1.0, 1.0), (0.2, 1.4)],
            FamilyId::LemmaSurface(_) => [(0.0, 1.0), (0.0, 1.0)],
        }
    }

    /// Whether a closed-form profile is available for this configuration.
    pub fn has_closed_form(&self) -> bool {
        match self.id {
            FamilyId::X1 | FamilyId::X2 | FamilyId::X3 => true,
            FamilyId::X4 | FamilyId::NullCone => self.params.c1.is_some(),
            FamilyId::CylE31Riem | FamilyId::CylE31Lor => {
                self.skeleton() == SkeletonKind::Parabolic && self.params.c1.is_some()
            }
            _ => false,
        }
    }
}

/// Chart point of the skeleton from a profile 4-jet value.
///
/// The profile enters through composition with the incoming `s`-jet, so the
/// same formulas serve full hypersurface evaluation (seed jets) and slice
/// extraction (constant `s`-jet).
fn skeleton_jets(
    sk: Sk,
    prof4: [f64; 4],
    js: Jet3,
    jt: Jet3,
    ju: Jet3,
) -> Result<JetPoint4, GeomError> {
    let fj = Jet3::compose(prof4, &js);
    Ok(match sk {
        Sk::X1 => {
            let (st, ct) = (jt.sin(), jt.cos());
            let (su, cu) = (ju.sin(), ju.cos());
            [fj, js * ct * su, js * st * su, js * cu]
        }
        Sk::X2 => {
            let st = jt.sin();
            [js * ju.sinh() * st, js * ju.cosh() * st, js * jt.cos(), fj]
        }
        Sk::X3 => {
            let sht = jt.sinh();
            [js * jt.cosh(), js * sht * ju.sin(), js * sht * ju.cos(), fj]
        }
        Sk::X4 => {
            let q = js * (jt * jt + ju * ju) * 0.5;
            [q + js + fj, js * jt, js * ju, q + fj]
        }
        Sk::NullCone { a } => {
            let q = js * (jt * jt + ju * ju) * 0.5 + ju * ju * a;
            [q + js + fj, js * jt, (js + 2.0 * a) * ju, q + fj]
        }
        Sk::CylE3 => [ju, js * jt.cos(), js * jt.sin(), fj],
        Sk::CylRot => [fj, js * jt.cos(), js * jt.sin(), ju],
        Sk::CylParab => {
            let q = js * jt * jt * 0.5;
            [q + js + fj, js * jt, q + fj, ju]
        }
        Sk::RotCosh => [js * jt.cosh(), js * jt.sinh(), fj * ju.cos(), fj * ju.sin()],
        Sk::RotSinh => [js * jt.sinh(), js * jt.cosh(), fj * ju.cos(), fj * ju.sin()],
    })
}

/// Probe chart point used when solving the scalar curvature condition for
/// `f''`; fixed per family, inside the default box.
fn probe_point(sk: Sk) -> (f64, f64) {
    match sk {
        Sk::X1 => (0.7, 0.8),
        Sk::X2 => (1.2, 0.3),
        Sk::X3 => (0.9, 1.0),
        Sk::X4 | Sk::NullCone { .. } => (0.3, 0.4),
        Sk::CylE3 | Sk::CylRot => (1.0, 0.5),
        Sk::CylParab => (0.7, 0.5),
        Sk::RotCosh | Sk::RotSinh => (0.5, 0.8),
    }
}

/// Diagonal of the shape operator at a chart point, from plain values.
///
/// The family charts are curvature-line coordinates, so the diagonal carries
/// the principal curvatures in chart order `(s, t, u)`; the `s`-slot is the
/// curvature of the mean-curvature-gradient direction.
fn shape_diagonal(
    sk: Sk,
    prof4: [f64; 4],
    s: f64,
    t: f64,
    u: f64,
    tol: &Tolerances,
) -> Result<[f64; 3], GeomError> {
    let (js, jt, ju) = Jet3::seed(s, t, u);
    let x = skeleton_jets(sk, prof4, js, jt, ju)?;
    let mut tv = [[0.0; 4]; 3];
    for (i, row) in tv.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            *slot = x[c].d1(i);
        }
    }
    let mut g: Mat3 = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = inner4(tv[i], tv[j]);
        }
    }
    let det = det3(&g);
    let fro = frobenius3(&g).max(f64::MIN_POSITIVE);
    if det.abs() <= tol.det * fro.powi(3) {
        return Err(GeomError::DegenerateMetric { s, t, u, det });
    }
    let w = cross4(tv[0], tv[1], tv[2]);
    let q = inner4(w, w);
    if q.abs() <= f64::MIN_POSITIVE {
        return Err(GeomError::NullVector { value: q });
    }
    let n = scale4(w, 1.0 / q.abs().sqrt());
    let mut b: Mat3 = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let xij = [
                x[0].d2(i, j),
                x[1].d2(i, j),
                x[2].d2(i, j),
                x[3].d2(i, j),
            ];
            b[i][j] = inner4(xij, n);
        }
    }
    let adj = adjugate3(&g);
    let mut diag = [0.0; 3];
    for (i, slot) in diag.iter_mut().enumerate() {
        let mut acc = 0.0;
        for m in 0..3 {
            acc += adj[i][m] * b[m][i];
        }
        *slot = acc / det;
    }
    Ok(diag)
}

/// The scalar curvature condition at a probe point, as a residual in the
/// profile jet. Riemannian: `k1 - (k2 + k3)`; Lorentzian: `3 k1 + (k2 + k3)`.
pub fn scalar_condition_residual(
    cfg: &FamilyConfig,
    s: f64,
    prof4: [f64; 4],
    tol: &Tolerances,
) -> Result<f64, GeomError> {
    let sk = cfg.skeleton_spec()?;
    let (t0, u0) = probe_point(sk);
    let diag = shape_diagonal(sk, prof4, s, t0, u0, tol)?;
    Ok(match cfg.signature {
        Signature::Riemannian => diag[0] - diag[1] - diag[2],
        Signature::Lorentzian => 3.0 * diag[0] + diag[1] + diag[2],
    })
}

type Deriv = Arc<dyn Fn(f64) -> Result<[f64; 3], GeomError> + Send + Sync>;
type ValueFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

fn dom(func: &'static str, value: f64) -> GeomError {
    GeomError::FunctionDomain { func, value }
}

/// Exact `[f', f'', f''']` closures and, where elementary, the exact `f`.
fn closed_form_parts(cfg: &FamilyConfig) -> Result<(Deriv, Option<ValueFn>), GeomError> {
    cfg.validate()?;
    match cfg.id {
        FamilyId::X1 => {
            let c1 = cfg.require_c1()?;
            match (cfg.signature, cfg.branch()) {
                (Signature::Riemannian, Branch::Steep) => Ok((
                    Arc::new(move |s: f64| {
                        let s4 = s.powi(4);
                        let a = c1 * c1 * s4 - 1.0;
                        if a <= 0.0 {
                            return Err(dom("sqrt(c1^2 s^4 - 1)", a));
                        }
                        let ra = a.sqrt();
                        Ok([
                            c1 * s * s / ra,
                            -2.0 * c1 * s / (a * ra),
                            2.0 * c1 * (5.0 * c1 * c1 * s4 + 1.0) / (a * a * ra),
                        ])
                    }),
                    None,
                )),
                (Signature::Riemannian, Branch::Shallow) => Ok((
                    Arc::new(move |s: f64| {
                        let s4 = s.powi(4);
                        let b = 1.0 + c1 * c1 * s4;
                        let rb = b.sqrt();
                        Ok([
                            c1 * s * s / rb,
                            2.0 * c1 * s / (b * rb),
                            2.0 * c1 * (1.0 - 5.0 * c1 * c1 * s4) / (b * b * rb),
                        ])
                    }),
                    None,
                )),
                (Signature::Lorentzian, Branch::Steep) => Ok((
                    Arc::new(move |s: f64| {
                        if s <= 0.0 {
                            return Err(dom("s^(1/3)", s));
                        }
                        let s13 = s.cbrt();
                        let a = c1 * c1 - s13.powi(4);
                        if a <= 0.0 {
                            return Err(dom("sqrt(c1^2 - s^(4/3))", a));
                        }
                        let ra = a.sqrt();
                        Ok([
                            c1 / ra,
                            (2.0 / 3.0) * c1 * s13 / (a * ra),
                            (2.0 / 9.0) * c1 / (s13 * s13) / (a * ra)
                                + (4.0 / 3.0) * c1 * s13 * s13 / (a * a * ra),
                        ])
                    }),
                    None,
                )),
                (Signature::Lorentzian, Branch::Shallow) => Ok((
                    Arc::new(move |s: f64| {
                        if s <= 0.0 {
                            return Err(dom("s^(1/3)", s));
                        }
                        let s13 = s.cbrt();
                        let a = c1 * c1 + s13.powi(4);
                        let ra = a.sqrt();
                        Ok([
                            c1 / ra,
                            -(2.0 / 3.0) * c1 * s13 / (a * ra),
                            -(2.0 / 9.0) * c1 / (s13 * s13) / (a * ra)
                                + (4.0 / 3.0) * c1 * s13 * s13 / (a * a * ra),
                        ])
                    }),
                    None,
                )),
            }
        }
        FamilyId::X2 => {
            let c1 = cfg.require_c1()?;
            Ok((
                Arc::new(move |s: f64| {
                    if s <= 0.0 {
                        return Err(dom("s^(1/3)", s));
                    }
                    let s13 = s.cbrt();
                    let d = s13.powi(4) - c1 * c1;
                    if d <= 0.0 {
                        return Err(dom("sqrt(s^(4/3) - c1^2)", d));
                    }
                    let rd = d.sqrt();
                    Ok([
                        c1 / rd,
                        -(2.0 / 3.0) * c1 * s13 / (d * rd),
                        -(2.0 / 9.0) * c1 / (s13 * s13) / (d * rd)
                            + (4.0 / 3.0) * c1 * s13 * s13 / (d * d * rd),
                    ])
                }),
                None,
            ))
        }
        FamilyId::X3 => {
            let c1 = cfg.require_c1()?;
            match cfg.signature {
                Signature::Riemannian => Ok((
                    Arc::new(move |s: f64| {
                        let s4 = s.powi(4);
                        let e = s4 - c1 * c1;
                        if e <= 0.0 {
                            return Err(dom("sqrt(s^4 - c1^2)", e));
                        }
                        let re = e.sqrt();
                        Ok([
                            s * s / re,
                            -2.0 * c1 * c1 * s / (e * re),
                            2.0 * c1 * c1 * (5.0 * s4 + c1 * c1) / (e * e * re),
                        ])
                    }),
                    None,
                )),
                Signature::Lorentzian => Ok((
                    Arc::new(move |s: f64| {
                        if s <= 0.0 {
                            return Err(dom("s^(1/3)", s));
                        }
                        let s13 = s.cbrt();
                        let f = s13.powi(4) + c1 * c1;
                        let rf = f.sqrt();
                        Ok([
                            c1 / rf,
                            -(2.0 / 3.0) * c1 * s13 / (f * rf),
                            -(2.0 / 9.0) * c1 / (s13 * s13) / (f * rf)
                                + (4.0 / 3.0) * c1 * s13 * s13 / (f * f * rf),
                        ])
                    }),
                    None,
                )),
            }
        }
        FamilyId::X4 => {
            let c1 = match cfg.params.c1 {
                Some(c1) => c1,
                None => {
                    return Err(cfg.bad(
                        "closed form requires c1 (--c1); or provide --init for synthesis",
                    ))
                }
            };
            match cfg.signature {
                Signature::Riemannian => Ok((
                    Arc::new(move |s: f64| {
                        if s <= 0.0 {
                            return Err(dom("1/s", s));
                        }
                        Ok([
                            0.5 * (c1 / s.powi(4) - 1.0),
                            -2.0 * c1 / s.powi(5),
                            10.0 * c1 / s.powi(6),
                        ])
                    }),
                    Some(Arc::new(move |s: f64| -c1 / (6.0 * s.powi(3)) - 0.5 * s)),
                )),
                Signature::Lorentzian => Ok((
                    Arc::new(move |s: f64| {
                        if s <= 0.0 {
                            return Err(dom("s^(1/3)", s));
                        }
                        let s13 = s.cbrt();
                        Ok([
                            0.5 * (c1 * s13.powi(4) - 1.0),
                            (2.0 / 3.0) * c1 * s13,
                            (2.0 / 9.0) * c1 / (s13 * s13),
                        ])
                    }),
                    Some(Arc::new(move |s: f64| {
                        (3.0 * c1 / 14.0) * s.cbrt().powi(7) - 0.5 * s
                    })),
                )),
            }
        }
        FamilyId::CylE31Riem | FamilyId::CylE31Lor => {
            if cfg.skeleton() != SkeletonKind::Parabolic {
                return Err(cfg.bad(
                    "the rotational cylinder has no closed-form profile; use --init",
                ));
            }
            let c1 = match cfg.params.c1 {
                Some(c1) => c1,
                None => {
                    return Err(cfg.bad(
                        "parabolic closed form requires c1 (--c1); or provide --init",
                    ))
                }
            };
            match cfg.signature {
                Signature::Riemannian => Ok((
                    Arc::new(move |s: f64| {
                        if s <= 0.0 {
                            return Err(dom("1/s", s));
                        }
                        Ok([
                            0.5 * (c1 / (s * s) - 1.0),
                            -c1 / s.powi(3),
                            3.0 * c1 / s.powi(4),
                        ])
                    }),
                    Some(Arc::new(move |s: f64| -c1 / (2.0 * s) - 0.5 * s)),
                )),
                Signature::Lorentzian => Ok((
                    Arc::new(move |s: f64| {
                        if s <= 0.0 {
                            return Err(dom("s^(1/3)", s));
                        }
                        let s13 = s.cbrt();
                        Ok([
                            0.5 * (c1 * s13 * s13 - 1.0),
                            (c1 / 3.0) / s13,
                            -(c1 / 9.0) / s13.powi(4),
                        ])
                    }),
                    Some(Arc::new(move |s: f64| {
                        (3.0 * c1 / 10.0) * s.cbrt().powi(5) - 0.5 * s
                    })),
                )),
            }
        }
        FamilyId::NullCone => {
            let a = cfg.require_a()?;
            let c1 = match cfg.params.c1 {
                Some(c1) => c1,
                None => {
                    return Err(cfg.bad(
                        "closed form requires c1 (--c1); or provide --init for synthesis",
                    ))
                }
            };
            match cfg.signature {
                Signature::Riemannian => Ok((
                    Arc::new(move |s: f64| {
                        let w = s + 2.0 * a;
                        if s <= 0.0 || w <= 0.0 {
                            return Err(dom("1/(s (s + 2a))", s.min(w)));
                        }
                        let p = s * w;
                        Ok([
                            4.0 * c1 * a.powi(3) / (p * p) - 0.5,
                            -16.0 * c1 * a.powi(3) * (s + a) / p.powi(3),
                            16.0 * c1
                                * a.powi(3)
                                * (5.0 * s * s + 10.0 * a * s + 6.0 * a * a)
                                / p.powi(4),
                        ])
                    }),
                    Some(Arc::new(move |s: f64| {
                        let w = s + 2.0 * a;
                        c1 * (w.ln() - s.ln() - a / s - a / w) - 0.5 * s
                    })),
                )),
                Signature::Lorentzian => Ok((
                    Arc::new(move |s: f64| {
                        let w = s + 2.0 * a;
                        if s <= 0.0 || w <= 0.0 {
                            return Err(dom("(s (s + 2a))^(1/3)", s.min(w)));
                        }
                        let p = s * w;
                        let p13 = p.cbrt();
                        Ok([
                            c1 * p13 * p13 - 0.5,
                            (4.0 / 3.0) * c1 * (s + a) / p13,
                            (4.0 / 3.0) * c1 / p13.powi(4)
                                * (p - (2.0 / 3.0) * (s + a) * (s + a)),
                        ])
                    }),
                    None,
                )),
            }
        }
        _ => Err(cfg.bad("this family has no closed-form profile; use --init")),
    }
}

/// Number of table nodes per unit of interval length (tables back up the
/// exact closures for export and consistency checks).
fn node_count(width: f64) -> usize {
    ((width / 2e-3).ceil() as usize).clamp(1000, 8000) + 1
}

/// Builds the closed-form profile on `interval` (or the family default).
pub fn profile_closed_form(
    cfg: &FamilyConfig,
    interval: Option<(f64, f64)>,
    tol: &Tolerances,
) -> Result<ProfileSolution, GeomError> {
    let guard = cfg.guard_interval(tol)?;
    let (lo, hi) = match interval {
        Some(iv) => iv,
        None => cfg.default_interval(tol)?,
    };
    if !(lo < hi) {
        return Err(GeomError::InvalidConfig(format!(
            "profile interval must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    if lo < guard.0 || hi > guard.1 {
        return Err(GeomError::OutOfDomain {
            what: "requested profile interval",
            value: if lo < guard.0 { lo } else { hi },
            lo: guard.0,
            hi: guard.1,
        });
    }
    let (deriv, explicit) = closed_form_parts(cfg)?;
    let n = node_count(hi - lo);
    let step = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect();
    let mut fp = Vec::with_capacity(n);
    let mut fpp = Vec::with_capacity(n);
    for &s in &grid {
        let d = deriv(s)?;
        fp.push(d[0]);
        fpp.push(d[1]);
    }
    // f-values: elementary antiderivative when available, cumulative Simpson
    // on the exact derivative otherwise.
    let mut fval = Vec::with_capacity(n);
    match &explicit {
        Some(value) => {
            for &s in &grid {
                fval.push(value(s));
            }
        }
        None => {
            let mut acc = 0.0;
            fval.push(0.0);
            for i in 1..n {
                let (a, b) = (grid[i - 1], grid[i]);
                let m = 0.5 * (a + b);
                acc += (b - a) / 6.0 * (fp[i - 1] + 4.0 * deriv(m)?[0] + fp[i]);
                fval.push(acc);
            }
        }
    }

    let mut sol = ProfileSolution::from_nodes(
        grid.clone(),
        fval.clone(),
        fp,
        fpp,
        super::profile::Provenance::Quadrature,
    )?;

    let d2 = deriv.clone();
    let grid2 = Arc::new(grid);
    let cum2 = Arc::new(fval);
    let explicit2 = explicit.clone();
    let slack = 1e-12 * (1.0 + hi.abs().max(lo.abs()));
    sol.analytic = Some(AnalyticProfile {
        eval: Arc::new(move |s: f64| {
            if s < lo - slack || s > hi + slack {
                return Err(GeomError::OutOfDomain {
                    what: "profile parameter s",
                    value: s,
                    lo,
                    hi,
                });
            }
            let d = d2(s)?;
            let f = match &explicit2 {
                Some(value) => value(s),
                None => {
                    // Base node below s plus one Simpson panel of the exact f'.
                    let idx = grid2.partition_point(|&g| g <= s).clamp(1, grid2.len()) - 1;
                    let a = grid2[idx];
                    let m = 0.5 * (a + s);
                    cum2[idx] + (s - a) / 6.0 * (d2(a)?[0] + 4.0 * d2(m)?[0] + d[0])
                }
            };
            Ok([f, d[0], d[1], d[2]])
        }),
    });
    Ok(sol)
}

/// The explicit curvature ODE `f'' = rhs(s, f, f')` of a family, with the
/// guard margin baked into the domain checks.
pub fn explicit_ode_rhs(
    cfg: &FamilyConfig,
    tol: &Tolerances,
) -> Result<Box<dyn Fn(f64, f64, f64) -> Result<f64, GeomError> + Send + Sync>, GeomError> {
    cfg.validate()?;
    let d = tol.guard_delta;
    let sig = cfg.signature;
    let guard_s = move |s: f64| -> Result<(), GeomError> {
        if s <= d {
            Err(dom("1/s", s))
        } else {
            Ok(())
        }
    };
    Ok(match cfg.id {
        FamilyId::X1 => match sig {
            // Both quartic branches satisfy the same equation.
            Signature::Riemannian => Box::new(move |s, _f, fp| {
                guard_s(s)?;
                Ok(-2.0 * fp * (fp * fp - 1.0) / s)
            }),
            Signature::Lorentzian => Box::new(move |s, _f, fp| {
                guard_s(s)?;
                Ok((2.0 / 3.0) * fp * (fp * fp - 1.0) / s)
            }),
        },
        FamilyId::X2 => Box::new(move |s, _f, fp| {
            guard_s(s)?;
            Ok(-2.0 * fp * (1.0 + fp * fp) / (3.0 * s))
        }),
        FamilyId::X3 => match sig {
            Signature::Riemannian => Box::new(move |s, _f, fp| {
                guard_s(s)?;
                Ok(-2.0 * fp * (fp * fp - 1.0) / s)
            }),
            Signature::Lorentzian => Box::new(move |s, _f, fp| {
                guard_s(s)?;
                Ok(-2.0 * fp * (1.0 - fp * fp) / (3.0 * s))
            }),
        },
        FamilyId::X4 => match sig {
            Signature::Riemannian => Box::new(move |s, _f, fp| {
                guard_s(s)?;
                Ok(-2.0 * (2.0 * fp + 1.0) / s)
            }),
            Signature::Lorentzian => Box::new(move |s, _f, fp| {
                guard_s(s)?;
                Ok(2.0 * (2.0 * fp + 1.0) / (3.0 * s))
            }),
        },
        FamilyId::CylE3 => Box::new(move |s, _f, fp| {
            guard_s(s)?;
            Ok(-fp * (1.0 + fp * fp) / (3.0 * s))
        }),
        FamilyId::CylE31Riem => match cfg.skeleton() {
            SkeletonKind::Rotational => Box::new(move |s, _f, fp| {
                guard_s(s)?;
                Ok(fp * (1.0 - fp * fp) / s)
            }),
            SkeletonKind::Parabolic => Box::new(move |s, _f, fp| {
                guard_s(s)?;
                Ok(-(2.0 * fp + 1.0) / s)
            }),
        },
        FamilyId::CylE31Lor => match cfg.skeleton() {
            SkeletonKind::Rotational => Box::new(move |s, _f, fp| {
                guard_s(s)?;
                if fp * fp > 1e12 {
                    return Err(dom("f' blow-up", fp));
                }
                Ok(fp * (fp * fp - 1.0) / (3.0 * s))
            }),
            SkeletonKind::Parabolic => Box::new(move |s, _f, fp| {
                guard_s(s)?;
                Ok((2.0 * fp + 1.0) / (3.0 * s))
            }),
        },
        FamilyId::RotCoshSinh => match sig {
            Signature::Riemannian => Box::new(move |s, f, fp| {
                guard_s(s)?;
                if f.abs() <= d {
                    return Err(dom("1/f", f));
                }
                Ok(-(fp * fp - 1.0) * (f * fp + s) / (s * f))
            }),
            Signature::Lorentzian => Box::new(move |s, f, fp| {
                guard_s(s)?;
                if f.abs() <= d {
                    return Err(dom("1/f", f));
                }
                Ok((fp * fp - 1.0) * (f * fp + s) / (3.0 * s * f))
            }),
        },
        FamilyId::RotSinhCosh => Box::new(move |s, f, fp| {
            guard_s(s)?;
            if f.abs() <= d {
                return Err(dom("1/f", f));
            }
            Ok((1.0 + fp * fp) * (s - f * fp) / (3.0 * s * f))
        }),
        FamilyId::NullCone => {
            let a = cfg.require_a()?;
            let rate = move |s: f64| -> Result<f64, GeomError> {
                let w = s + 2.0 * a;
                if s <= d || w <= d {
                    return Err(dom("1/(s (s + 2a))", s.min(w)));
                }
                Ok(1.0 / s + 1.0 / w)
            };
            match sig {
                Signature::Riemannian => Box::new(move |s, _f, fp| {
                    Ok(-(2.0 * fp + 1.0) * rate(s)?)
                }),
                Signature::Lorentzian => Box::new(move |s, _f, fp| {
                    Ok((2.0 * fp + 1.0) * rate(s)? / 3.0)
                }),
            }
        }
        FamilyId::LemmaSurface(_) => {
            return Err(cfg.bad("normal-form surfaces have no profile equation"));
        }
    })
}

/// Integrates the family's explicit curvature ODE from `init = (s0, f0, f0')`.
pub fn profile_from_ode(
    cfg: &FamilyConfig,
    init: (f64, f64, f64),
    step: f64,
    interval: Option<(f64, f64)>,
    tol: &Tolerances,
) -> Result<ProfileSolution, GeomError> {
    let rhs = explicit_ode_rhs(cfg, tol)?;
    let interval = interval.unwrap_or((init.0, init.0 + 1.0));
    ode::ode_rk4(&*rhs, init, step, interval)
}

/// Synthesizes the profile by enforcing the scalar curvature condition on the
/// skeleton itself at every integration stage.
pub fn profile_synthesize(
    cfg: &FamilyConfig,
    init: (f64, f64, f64),
    step: f64,
    interval: Option<(f64, f64)>,
    tol: &Tolerances,
) -> Result<ProfileSolution, GeomError> {
    cfg.validate()?;
    let cfg2 = *cfg;
    let tol2 = *tol;
    let residual =
        move |s: f64, prof4: [f64; 4]| scalar_condition_residual(&cfg2, s, prof4, &tol2);
    let interval = interval.unwrap_or((init.0, init.0 + 1.0));
    ode::synthesize_profile(&residual, init, step, interval)
}

/// Lifts a profile through the family skeleton into an immersion patch.
pub fn build_family(
    cfg: &FamilyConfig,
    profile: ProfileSolution,
) -> Result<ImmersionPatch, GeomError> {
    cfg.validate()?;
    let sk = cfg.skeleton_spec()?;
    let tu = cfg.default_tu();
    let domain = [profile.valid_interval, tu[0], tu[1]];
    let mut params: Vec<(String, f64)> = Vec::new();
    if let Some(c1) = cfg.params.c1 {
        params.push(("c1".into(), c1));
    }
    if let Some(a) = cfg.params.a {
        params.push(("a".into(), a));
    }
    let profile = Arc::new(profile);
    let eval = Box::new(move |js: Jet3, jt: Jet3, ju: Jet3| {
        let prof4 = profile.eval4(js.value())?;
        skeleton_jets(sk, prof4, js, jt, ju)
    });
    Ok(ImmersionPatch {
        label: cfg.id.as_str().to_string(),
        domain,
        params,
        epsilon_expected: Some(cfg.expected_epsilon()),
        eval,
    })
}

/// One row of the catalog listing.
#[derive(Debug, Clone, Copy)]
pub struct FamilyInfo {
    pub id: &'static str,
    pub description: &'static str,
    /// Accepted values of the signature switch.
    pub signatures: &'static str,
    /// Required parameters.
    pub required: &'static str,
    /// Optional switches and alternatives.
    pub optional: &'static str,
}

/// The ten hypersurface families, in catalog order.
pub fn registry() -> &'static [FamilyInfo] {
    &[
        FamilyInfo {
            id: "x1",
            description: "rotational hypersurface over a round 2-sphere orbit; profile height along the timelike axis",
            signatures: "riemannian | lorentzian",
            required: "c1",
            optional: "branch (steep | shallow; default realizes the requested signature)",
        },
        FamilyInfo {
            id: "x2",
            description: "rotational hypersurface over a pseudo-spherical orbit; Lorentzian for every profile",
            signatures: "lorentzian",
            required: "c1",
            optional: "",
        },
        FamilyInfo {
            id: "x3",
            description: "rotational hypersurface over a hyperbolic-plane orbit",
            signatures: "riemannian | lorentzian",
            required: "c1",
            optional: "",
        },
        FamilyInfo {
            id: "x4",
            description: "parabolic-orbit hypersurface graphed over a degenerate plane",
            signatures: "riemannian | lorentzian",
            required: "c1 (closed form) or init (synthesis)",
            optional: "",
        },
        FamilyInfo {
            id: "cyl-e3",
            description: "cylinder with a timelike ruling over a Euclidean rotational profile; Lorentzian",
            signatures: "lorentzian",
            required: "init",
            optional: "profile-file",
        },
        FamilyInfo {
            id: "cyl-e31-riem",
            description: "cylinder with a spacelike ruling over a Lorentzian-plane profile; Riemannian",
            signatures: "riemannian",
            required: "init (rotational) or c1 (parabolic)",
            optional: "skeleton (rotational | parabolic)",
        },
        FamilyInfo {
            id: "cyl-e31-lor",
            description: "cylinder with a spacelike ruling over a Lorentzian-plane profile; Lorentzian",
            signatures: "lorentzian",
            required: "init (rotational) or c1 (parabolic)",
            optional: "skeleton (rotational | parabolic)",
        },
        FamilyInfo {
            id: "rot-cosh",
            description: "hyperbolic-orbit rotational hypersurface with circular profile radius",
            signatures: "riemannian | lorentzian",
            required: "init",
            optional: "",
        },
        FamilyInfo {
            id: "rot-sinh",
            description: "hyperbolic-orbit rotational hypersurface with timelike orbit direction; Lorentzian for every profile",
            signatures: "lorentzian",
            required: "init",
            optional: "",
        },
        FamilyInfo {
            id: "nullcone",
            description: "parabolic skeleton offset along the null cone by a != 0; a -> 0 degenerates to x4",
            signatures: "riemannian | lorentzian",
            required: "a, c1 (closed form; init for synthesis)",
            optional: "",
        },
    ]
}
