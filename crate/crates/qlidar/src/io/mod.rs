//! Reproducible experiment runner: config parsing, scenario execution,
//! persistent frame-stack format, and CSV/PGM exports.

mod config;
mod export;
mod scenario;
mod stack_file;

pub use config::{
    AcquisitionConfig, Axis, BeamConfig, BuiltScenario, ClassicalSourceConfig, ConfigError,
    DetectorConfig, HotPixelConfig, MaskConfig, PairSourceConfig, PipelineConfig,
    PipelineSettings, ScenarioConfig, ScheduleConfig, SyncConfig,
};
pub use export::{export_csv, export_pgm_f64, export_pgm_intensity};
pub use scenario::{analyze_dataset, run_built_scenario, run_scenario, ScenarioError, ScenarioRun};
pub use stack_file::{read_frame_stack, write_frame_stack, StackFileError, HEADER_LEN, MAGIC, VERSION};
