//! Legendrian nets on the unit sphere `S³ ⊂ C²`.
//!
//! The crate is organised by layer:
//!
//! * [`s3`]: Hopf projection, the contact form `η`, Fubini–Study geometry,
//!   path quadrature and horizontal (Legendrian) lifting.
//! * [`chain`]: integer 1-chains with identity handles, 2-chains of spherical
//!   regions, and circuit extraction for transverse crossing curves.
//! * [`r3`]: the model contact space `(R³, dz − y dx)`.
//! * [`net`]: the ring-by-ring net construction and its verification.
//! * [`bounds`]: isoperimetric bounds and the lower bounds on component counts.
//! * [`sections`]: boundaries of complex curves cut by the sphere.
//!
//! Parallel loops go through [`par`], which falls back to plain iteration when
//! the `parallel` feature is off.

pub mod bounds;
pub mod chain;
pub mod config;
pub mod net;
pub mod par;
pub mod quad;
pub mod r3;
pub mod s3;
pub mod sections;
pub mod selftest;

mod error;

pub use config::{Sampling, Tolerances};
pub use error::{Error, Result};
pub use par::Exec;
