//! Scenario files, CSV export and SVG figures.

pub mod config;
pub mod export;
pub mod render;

pub use config::{ConfigError, ScenarioConfig, StartSpec};
pub use export::{
    read_partition, read_trajectory, write_partition, write_retro_path, write_trajectory,
    TrajectoryRow,
};
pub use render::{render_partition, render_trajectory};
