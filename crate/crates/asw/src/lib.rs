//! Étale `Z/p^n` cohomology of curves over finite fields through Artin-Schreier-Witt theory.

// Points carry a lazily filled parameter cache; ordering only looks at coordinates.
#![allow(clippy::mutable_key_type)]
#![allow(clippy::needless_range_loop)]

pub mod adele;
pub mod bipoly;
pub mod cli;
pub mod cover;
pub mod curve;
pub mod error;
pub mod expr;
pub mod field;
pub mod fixtures;
pub mod intpoly;
pub mod io;
pub mod laurent;
pub mod linalg;
pub mod ring;
pub mod semilinear;
pub mod sheaf;
pub mod solvers;
pub mod upoly;
pub mod witt;
pub mod zmod;

pub use error::{AswError, Result};
pub use field::{Fe, Field, FieldLattice};
pub use witt::WittVector;
