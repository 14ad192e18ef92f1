//! Frontend for `symseek-core`: corpus files, run reports and the CLI.

pub mod cli;
pub mod clock;
pub mod corpus;
pub mod report;
