//! Experiment pipeline behind the command line tool.

pub mod config;
pub mod metrics;
pub mod model_io;
pub mod plot;
mod run;
pub mod saliency;

pub use config::{DatasetSource, RunConfig, SyntheticParams};
pub use metrics::{EpochRecord, RunMetrics, CSV_HEADER};
pub use model_io::{decode_model, encode_model, load_model, save_model};
pub use run::{
    compare_initializers, dump_init, initial_network, load_dataset, network_spec, prepare,
    run_experiment, train_network, visualize, PreparedData, RunOutcome,
};
pub use saliency::saliency_map;
