//! Datasets, checkpoints, experiment orchestration and reports.
//!
//! Frames and checkpoints use the RHD1 block format (see [`format`]); a
//! dataset directory holds one `.rhd` file per trajectory plus a JSON
//! [`DatasetManifest`].

mod checkpoint;
mod config;
mod dataset;
mod experiment;
pub mod format;
mod record;
mod report;
mod verify;

pub use checkpoint::{Checkpoint, CheckpointMeta};
pub use config::{check_dims, DataConfig, EvalConfig, ExperimentConfig};
pub use dataset::{
    make_dataset, simulate_trajectory, DatasetManifest, DatasetSpec, Split, TrajectoryEntry, MANIFEST_FILE,
};
pub use experiment::{
    cfar_method_name, load_stack, loss_csv_path, run_eval, run_infer, run_saliency, run_training, EvalReport,
    FrameResult, MethodResult,
};
pub use record::{read_trajectory, trajectory_samples, trajectory_stacks, write_trajectory, FrameRecord};
pub use report::{parse_pgm, Gray};
pub use verify::{
    gradcheck_suite, unet_check, CheckResult, LINEAR_TOLERANCE, MIN_COORDS, NETWORK_TOLERANCE, OP_TOLERANCE,
};
