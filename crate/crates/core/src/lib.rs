pub mod carbon;
pub mod cli;
pub mod cases;
pub mod error;
pub mod iccg;
pub mod instance;
pub mod milp;
pub mod operations;
pub mod report;
pub mod subproblem;
pub mod topology;
pub mod uncertainty;
pub mod validation;

pub use error::{Error, Result};
