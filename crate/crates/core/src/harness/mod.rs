//! Experiment pipeline: specimen ingestion, Monte-Carlo orchestration,
//! Table-style reports and weight-map artifacts.

pub mod experiment;
pub mod images;
pub mod io;
pub mod phantom;
pub mod weightmaps;

pub use experiment::{
    load_config, run_experiment, run_rows, trial_seed, ExperimentConfig, ExperimentReport, MethodName, ResultRow,
    TABLE_HEADER,
};
pub use images::ingest_image;
pub use phantom::{phantom, PHANTOM_NAMES};
pub use weightmaps::emit_weight_maps;
