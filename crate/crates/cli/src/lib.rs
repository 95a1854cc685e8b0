//! Command line and HTTP service for the logical-form toolkit.

pub mod cli;
pub mod error;
pub mod ops;
pub mod service;
pub mod session;
