//! Command line and HTTP front ends over `glc-core`.
//!
//! Both front ends go through [`ops`], so a CLI run and an HTTP request with
//! the same inputs and seed produce byte-identical artifacts.

pub mod cli;
pub mod config;
pub mod error;
pub mod ops;
pub mod server;
