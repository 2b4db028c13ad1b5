//! Polynomial models of diameter-four trees: counting, verification over
//! finite fields, Hensel lifting into local rings, reduction invariants and
//! closed-form families.

pub mod algebra;
pub mod error;

pub use error::{Error, Result};
pub mod equations;
pub mod families;
pub mod fqsolver;
pub mod lifting;
pub mod reduction;
pub mod trees;
