//! Invisibility spaces of positive linear measurement maps.
//!
//! When a measurement is linear in nonnegative physical quantities, the
//! combinations it cannot see form its null space. Those combinations always
//! carry negative entries, so they are not physical on their own, but adding
//! them to a physical configuration produces every other configuration the
//! measurement confuses with it, as long as positivity survives. This crate
//! computes those spaces and the positivity-limited families for three cases:
//!
//! * [`colorimetry`]: illuminant mixtures that a set of receptors cannot tell
//!   apart (metamers), and diagnostic tables across receptor variants.
//! * [`rigid_body`]: point-mass distributions with identical mass, center of
//!   mass and inertia tensor (dynamically equivalent bodies).
//! * [`greybox`]: density matrices consistent with a finite suite of measured
//!   expectation values.
//!
//! [`linalg`] holds the shared null-space and interval machinery and [`io`]
//! the file formats.

pub mod colorimetry;
pub mod error;
pub mod greybox;
pub mod io;
pub mod linalg;
pub mod rigid_body;

pub use error::{Error, Result};
pub use linalg::{FeasibleInterval, KernelBasis, RealMatrix, Tolerance};
