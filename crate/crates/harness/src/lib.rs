//! Experiment orchestration, record persistence and power-law fitting for
//! the `proc-shadow` command-line tool.

pub mod config;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod records;

pub use config::{ChannelSpec, ExperimentConfig, ExperimentKind};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, write_outputs, ExperimentOutput};
pub use fit::{fit_power_law, PowerLawFit};
pub use records::{load_records, save_records, RecordHeader};
