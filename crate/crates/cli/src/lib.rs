//! Front end for `rotset`: run configuration, report format, SVG rendering
//! and the subcommand drivers used by the `rotset` binary.

pub mod commands;
pub mod config;
pub mod report;
pub mod svg;
