//! Weakened pair-sum intersection conditions for uniform set families.
//!
//! The crate builds the candidate-extremal families for conditions of the
//! form "every ℓ distinct members have total pairwise intersection size at
//! least θ", certifies families against such conditions exactly, analyses
//! their sunflower and kernel structure, and searches for maximum families at
//! small parameters.
//!
//! ```
//! use ekrf_core::conditions::{check_condition, ConditionSpec, Variant};
//! use ekrf_core::constructions::construct_thm6;
//!
//! let family = construct_thm6(8, 3, 1, 3).unwrap();
//! let spec = ConditionSpec::new(1, 3, Variant::Eq4, 0).unwrap();
//! assert!(check_condition(&family, &spec).unwrap().is_satisfied());
//! ```

pub mod cli;
pub mod clique;
pub mod conditions;
pub mod constructions;
pub mod error;
mod orbits;
pub mod search;
pub mod setcore;
pub mod structure;
mod tuples;

pub use error::{Error, Result};
pub use setcore::{Family, GroundParams, KSet};
