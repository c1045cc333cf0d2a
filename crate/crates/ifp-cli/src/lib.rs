//! Library surface of the `ifp` command-line tool: config documents and
//! templates, run manifests, and the command implementations.

pub mod commands;
pub mod config;
pub mod manifest;
