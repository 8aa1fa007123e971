//! Point clouds from polar images and the two cloud-to-cloud error metrics.

mod cloud;
mod metrics;
mod nn;

pub use cloud::{polar_to_points, threshold_image, PointCloud2D};
pub use metrics::{chamfer, median, mod_hausdorff, pair_metrics, percentile, MetricsReport, CDF_PERCENTILES};
pub use nn::{nn_accel, nn_brute, GridIndex};
