//! Weight initializers: Xavier, He, block-PCA and data statistics, plus the
//! layer-by-layer network driver.

mod baseline;
mod blocks;
mod config;
mod datastats;
pub mod diagnostics;
mod driver;
mod filters;
mod pca;

pub use baseline::{init_he, init_xavier};
pub use blocks::{extract_blocks, extract_random_crops, extract_random_crops_with_offsets};
pub use config::{InitConfig, Scheme};
pub use datastats::{data_stats_init_layer, sample_filter_bank};
pub use driver::{initialize_network, layer_crops};
pub use filters::FilterBank;
pub use pca::pca_init;
