//! Constructors for the classified hypersurface families: profile curves
//! from closed-form expressions, explicit ODE integration, or residual-driven
//! synthesis, plus the family skeletons that lift a profile to an immersion.

pub mod families;
pub mod ode;
pub mod profile;
pub mod quad;
