//! Minimal library walkthrough: solve a closed-form profile, build the
//! hypersurface it generates, verify it on a grid, print the JSON report.

use bicons4::catalog::families::{profile_closed_form, FamilyConfig, FamilyParams};
use bicons4::{build_family, grid_verify, FamilyId, GeomError, GridSpec, Signature, Tolerances};

fn main() -> Result<(), GeomError> {
    let tol = Tolerances::standard();
    let cfg = FamilyConfig::new(
        FamilyId::X3,
        Signature::Riemannian,
        FamilyParams { c1: Some(1.0), ..FamilyParams::default() },
    );
    let profile = profile_closed_form(&cfg, None, &tol)?;
    let patch = build_family(&cfg, profile)?;
    let grid = GridSpec::from_domain(patch.domain, [6, 6, 6]);
    let summary = grid_verify(&patch, &grid, &tol)?;
    assert!(summary.passes(tol.bic));
    println!("{}", summary.to_json());
    Ok(())
}
