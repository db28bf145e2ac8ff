#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod output;
pub mod scenario;

pub use error::{Result, SimError};
pub use scenario::Scenario;
