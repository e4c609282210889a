//! File formats, routing, fixtures and commands of the `conelab` tool.

pub mod cli;
pub mod fixtures;
pub mod plot;
pub mod route;
pub mod schema;
