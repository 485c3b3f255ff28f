//! Configuration, validation and task dispatch behind the `regenstab`
//! binary.

pub mod config;
pub mod error;
pub mod output;
pub mod plan;
pub mod run;

pub use config::{RunArgs, RunConfig, Task};
pub use error::{CliError, Issue, IssueKind};
pub use plan::{validate, Plan, Validation};
pub use run::{execute, run, Outcome};
