//! Vortex extraction pipeline: dataset I/O, staged orchestration, export bundles and the
//! HTTP service behind the explorer.

pub mod bundle;
pub mod cli;
pub mod io;
pub mod pipeline;
pub mod scenarios;
pub mod service;
pub mod workdir;
