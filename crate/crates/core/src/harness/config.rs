use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autodiff::{AdamConfig, LossConfig};
use crate::dsp::{CfarConfig, DEFAULT_KEEP_FRACTION};
use crate::model::{TrainConfig, UNetConfig};
use crate::sim::SimConfig;
use crate::{Error, Result};

/// Dataset-side processing that is not part of the sensor model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    /// Fraction of radar pixels kept by the low-intensity threshold.
    pub keep_fraction: f64,
    /// Sensor displacement between frames, meters.
    pub step: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            keep_fraction: DEFAULT_KEEP_FRACTION,
            step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// Probability threshold applied to the network output.
    pub tau: f64,
    /// CFAR window; `threshold_db` is overridden by each sweep value.
    pub cfar: CfarConfig,
    pub cfar_thresholds_db: Vec<f64>,
    /// Frames written as PGM triptychs per split.
    pub n_triptychs: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tau: 0.5,
            cfar: CfarConfig {
                guard_cells: 2,
                train_cells: 4,
                threshold_db: 8.0,
            },
            cfar_thresholds_db: vec![1.0, 2.0, 4.0, 8.0],
            n_triptychs: 8,
        }
    }
}

/// Everything one experiment needs. JSON field names mirror the structs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    pub data: DataConfig,
    pub unet: UNetConfig,
    pub loss: LossConfig,
    pub adam: AdamConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::toy(),
            data: DataConfig::default(),
            unet: UNetConfig::toy(),
            loss: LossConfig::default(),
            adam: AdamConfig::default(),
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.unet.validate()?;
        self.loss.validate()?;
        self.adam.validate()?;
        self.train.validate()?;
        self.eval.cfar.validate()?;
        if !(self.data.keep_fraction > 0.0 && self.data.keep_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "data.keep_fraction={} must lie in (0, 1]",
                self.data.keep_fraction
            )));
        }
        if !(self.eval.tau > 0.0 && self.eval.tau < 1.0) {
            return Err(Error::Config(format!("eval.tau={} must lie in (0, 1)", self.eval.tau)));
        }
        check_dims(&self.sim, &self.unet)
    }
}

/// The network's input and output grids must match the sensor grids.
pub fn check_dims(sim: &SimConfig, unet: &UNetConfig) -> Result<()> {
    if sim.n_range_bins != unet.n_range || sim.n_radar_az_bins != unet.n_az_in || sim.n_lidar_az_bins != unet.n_az_out()
    {
        return Err(Error::Config(format!(
            "sim grids {}x{} -> {}x{} do not match network {}x{} -> {}x{}",
            sim.n_range_bins,
            sim.n_radar_az_bins,
            sim.n_range_bins,
            sim.n_lidar_az_bins,
            unet.n_range,
            unet.n_az_in,
            unet.n_range,
            unet.n_az_out()
        )));
    }
    Ok(())
}
