//! Hard kernel-learning instances, a query-counting kernel oracle, budgeted
//! and low-rank learners, exact block solvers, and an experiment harness
//! that checks measured suboptimality gaps against explicit lower bounds.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod harness;
pub mod instance;
pub mod learners;
pub mod linalg;
pub mod losses;
pub mod oracle;
pub mod solvers;

pub use error::{Error, Result};
