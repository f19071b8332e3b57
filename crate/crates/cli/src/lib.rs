//! Command-line front end: configuration, CSV tables and SVG plots.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod svg;
pub mod table;
