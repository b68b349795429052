//! Job documents, pipelines and JSON reports behind the `dreg` binary.

pub mod job;
pub mod report;
pub mod run;

pub use job::{parse_document, parse_input, print_job, Command, Flags, JobError, JobSpec};
pub use run::{batch_status, run, run_batch, ExitStatus, Outcome};
