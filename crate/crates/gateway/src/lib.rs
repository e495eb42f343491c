//! Command line and game service for the contourbench toolkit.

pub mod boundary;
pub mod cli;
pub mod server;
pub mod submissions;
