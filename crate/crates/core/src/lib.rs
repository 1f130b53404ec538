//! Two-species mosquito competition with larval competition and adult
//! dispersal: equilibria and stability, explicit invasion criteria,
//! stationary front profiles on half-lines, and a semi-implicit 1D
//! simulator for both the full four-equation system and its
//! strong-competition reduction.

pub mod cli;
pub mod criterion;
pub mod equilibria;
pub mod error;
pub mod numerics;
pub mod output;
pub mod params;
pub mod profiles;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
pub use params::{Habitat, SharedParams, SpeciesParams};
