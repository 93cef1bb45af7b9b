//! Operator commands and the HTTP service for the oversight workbench.

pub mod commands;
pub mod model;
pub mod server;
