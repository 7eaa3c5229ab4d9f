//! Certified enclosures of multiple t-values
//! `t(k) = Σ_{m_1>…>m_d>0} Π (2m_i−1)^(−k_i)` and their tails, together with
//! certified ordering of the values and checks of identities among them.

pub mod error;
pub mod evaluator;
pub mod indices;
pub mod numerics;
pub mod order;
pub mod verify;
pub mod cli;

pub use error::TvError;
pub use indices::{parse_index, parse_spec, MultiIndex, ValueSpec};
pub use numerics::{Enclosure, PrecisionBudget};
