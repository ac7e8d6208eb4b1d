//! Pseudo-spectral solver and I-method diagnostics for the sixth-order
//! Boussinesq equation
//!
//! ```text
//! u_tt - u_xx - beta u_xxxx - u_xxxxxx = (f(u))_xx,   f(u) = sign |u|^{2k} u
//! ```
//!
//! on a periodic interval.

pub mod bourgain;
pub mod energy;
pub mod error;
pub mod evolution;
pub mod fit;
pub mod imethod;
pub mod initial_data;
pub mod linear;
pub mod params;
pub mod spectral;

pub use error::{Error, Result};
pub use params::{ModelParams, Sign};
