//! Orchestration: configuration, geometry scans, the per-geometry chain and
//! the interaction-energy pipeline with its reports.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod scan;
pub mod stages;

pub use config::Config;
pub use pipeline::{Energy, Pipeline, RunReport};
pub use scan::{scan_geometries, GeometryScanSpec};
