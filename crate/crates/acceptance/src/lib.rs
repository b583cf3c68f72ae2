//! Shared pieces of the acceptance suite: random input generators and
//! reference oracles. The suite itself is the `acceptance` test target.

pub mod gen;
pub mod oracle;
