//! Files: `ROMB` matrices, experiment configs, artifact bundles and sweep tables.

pub mod bundle;
pub mod config;
pub mod matrix;
pub mod sweep;

pub use bundle::{bundle_hash, load_bundle, read_manifest, save_bundle, BundleInfo, Manifest};
pub use config::{ExperimentConfig, TestingConfig, ToleranceGrid, TrainingConfig};
pub use matrix::{columns_to_matrix, read_matrix, write_matrix};
pub use sweep::{read_csv, write_csv, SweepRow};
