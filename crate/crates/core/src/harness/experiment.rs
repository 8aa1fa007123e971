use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::checkpoint::Checkpoint;
use super::config::{check_dims, EvalConfig, ExperimentConfig};
use super::dataset::{DatasetManifest, Split};
use super::record::{read_trajectory, trajectory_samples, trajectory_stacks, FrameRecord};
use super::report::{write_text, Gray};
use crate::dsp::{ca_cfar, PolarImage};
use crate::model::{predict, saliency, train_epoch, FrameStack, TrainState, UNet};
use crate::pointcloud::{pair_metrics, polar_to_points, threshold_image, MetricsReport};
use crate::{Error, Result};

/// `model.ckpt` -> `model.loss.csv`.
pub fn loss_csv_path(checkpoint: &Path) -> PathBuf {
    checkpoint.with_extension("loss.csv")
}

/// Train on every `train` trajectory of the dataset for `epochs` total
/// epochs, resuming from `resume` if given. Writes the checkpoint and its
/// loss curve CSV; `on_epoch` sees each `(epoch, mean_loss)`.
pub fn run_training(
    data_dir: &Path,
    cfg: &ExperimentConfig,
    epochs: usize,
    out: &Path,
    resume: Option<&Path>,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<Checkpoint> {
    cfg.unet.validate()?;
    cfg.loss.validate()?;
    cfg.adam.validate()?;
    cfg.train.validate()?;
    let manifest = DatasetManifest::load(data_dir)?;
    check_dims(&manifest.sim, &cfg.unet)?;
    let mut samples = Vec::new();
    for entry in manifest.split(Split::Train) {
        let records = manifest.load_trajectory(data_dir, entry)?;
        samples.extend(trajectory_samples(&records, cfg.unet.history)?);
    }
    if samples.is_empty() {
        return Err(Error::Data(format!("{}: no training frames", data_dir.display())));
    }
    let (mut net, mut state) = match resume {
        Some(path) => {
            let ck = Checkpoint::load(path)?;
            if ck.meta.unet != cfg.unet {
                return Err(Error::Config("resume checkpoint has a different network config".into()));
            }
            (ck.net, ck.state)
        }
        None => {
            let net = UNet::<f32>::new(cfg.unet.clone(), cfg.adam.seed)?;
            let state = TrainState::new(&net);
            (net, state)
        }
    };
    while state.epoch < epochs {
        let loss = train_epoch(&mut net, &samples, &mut state, &cfg.loss, &cfg.adam, &cfg.train)?;
        on_epoch(state.epoch, loss);
    }
    let ck = Checkpoint::new(net, state, &manifest.sim, &cfg.loss, &cfg.adam, &cfg.train);
    ck.save(out)?;
    let mut csv = String::from("epoch,mean_loss\n");
    for (i, l) in ck.state.loss_curve.iter().enumerate() {
        let _ = writeln!(csv, "{},{l}", i + 1);
    }
    write_text(&loss_csv_path(out), &csv)?;
    Ok(ck)
}

/// Scores of one method over an evaluation split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodResult {
    pub name: String,
    pub metrics: MetricsReport,
    /// Mean number of points per frame.
    pub mean_points: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameResult {
    pub trajectory: String,
    pub frame: usize,
    pub truth_points: usize,
    /// Per method, in [`EvalReport::methods`] order.
    pub points: Vec<usize>,
    pub scores: Vec<Option<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub split: Split,
    /// `model` first, then `cfar_<db>db` for each threshold.
    pub methods: Vec<MethodResult>,
    pub frames: Vec<FrameResult>,
}

impl EvalReport {
    pub fn method(&self, name: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn model(&self) -> &MethodResult {
        &self.methods[0]
    }

    pub fn cfar(&self) -> &[MethodResult] {
        &self.methods[1..]
    }

    /// Lowest CFAR median over the sweep, per metric: `(chamfer, mod_hausdorff)`.
    pub fn best_cfar(&self) -> (f64, f64) {
        let best = |f: fn(&MetricsReport) -> f64| {
            self.cfar()
                .iter()
                .map(|m| f(&m.metrics))
                .filter(|v| v.is_finite())
                .fold(f64::INFINITY, f64::min)
        };
        (best(|m| m.median_chamfer), best(|m| m.median_mod_hausdorff))
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("method,median_chamfer,median_mod_hausdorff,scored,missing,mean_points\n");
        for m in &self.methods {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                m.name,
                m.metrics.median_chamfer,
                m.metrics.median_mod_hausdorff,
                m.metrics.scored(),
                m.metrics.missing,
                m.mean_points
            );
        }
        s
    }

    pub fn cdf_csv(&self) -> String {
        let mut s = String::from("method,metric,percentile,value\n");
        for m in &self.methods {
            for (metric, cdf) in [
                ("chamfer", &m.metrics.cdf_chamfer),
                ("mod_hausdorff", &m.metrics.cdf_mod_hausdorff),
            ] {
                for (p, v) in cdf {
                    let _ = writeln!(s, "{},{metric},{p},{v}", m.name);
                }
            }
        }
        s
    }

    pub fn frames_csv(&self) -> String {
        let mut s = String::from("trajectory,frame,method,points,truth_points,chamfer,mod_hausdorff\n");
        for f in &self.frames {
            for (i, m) in self.methods.iter().enumerate() {
                let (c, h) = match f.scores[i] {
                    Some((c, h)) => (c.to_string(), h.to_string()),
                    None => (String::new(), String::new()),
                };
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{c},{h}",
                    f.trajectory, f.frame, m.name, f.points[i], f.truth_points
                );
            }
        }
        s
    }
}

pub fn cfar_method_name(db: f64) -> String {
    format!("cfar_{db}db")
}

struct FrameOutput {
    result: FrameResult,
    prediction: Option<PolarImage>,
}

fn eval_frame(
    net: &UNet<f32>,
    stack: &FrameStack,
    rec: &FrameRecord,
    label: &PolarImage,
    cfg: &EvalConfig,
    trajectory: &str,
    keep_prediction: bool,
) -> Result<FrameOutput> {
    let truth = polar_to_points(label);
    let prob = predict(net, stack, label.max_range)?;
    let mut clouds = vec![polar_to_points(&threshold_image(&prob, cfg.tau)?)];
    for &db in &cfg.cfar_thresholds_db {
        let det = ca_cfar(&rec.radar_magnitude, &cfg.cfar.with_threshold(db))?;
        clouds.push(polar_to_points(&det));
    }
    Ok(FrameOutput {
        result: FrameResult {
            trajectory: trajectory.to_string(),
            frame: rec.index,
            truth_points: truth.len(),
            points: clouds.iter().map(|c| c.len()).collect(),
            scores: clouds.iter().map(|c| pair_metrics(c, &truth)).collect(),
        },
        prediction: keep_prediction.then_some(prob),
    })
}

/// Score the model and the CFAR sweep on every frame of `split`.
///
/// With `labels_from`, ground truth is read from the same trajectory ids of
/// another dataset (used to score smoke runs against clear-air lidar).
/// With `report_dir`, writes `summary.csv`, `cdf.csv`, `frames.csv` and
/// PGM triptychs (radar input, prediction, lidar).
pub fn run_eval(
    data_dir: &Path,
    split: Split,
    ck: &Checkpoint,
    cfg: &EvalConfig,
    labels_from: Option<&Path>,
    report_dir: Option<&Path>,
) -> Result<EvalReport> {
    let manifest = DatasetManifest::load(data_dir)?;
    check_dims(&manifest.sim, &ck.meta.unet)?;
    let labels = labels_from
        .map(|d| DatasetManifest::load(d).map(|m| (d, m)))
        .transpose()?;
    let entries: Vec<_> = manifest.split(split).collect();
    let total: usize = entries.iter().map(|e| e.n_frames).sum();
    if total == 0 {
        return Err(Error::Data(format!("split {} is empty", split.name())));
    }
    let wanted: Vec<usize> = (0..cfg.n_triptychs.min(total))
        .map(|k| k * total / cfg.n_triptychs.min(total))
        .collect();

    let mut outputs = Vec::with_capacity(total);
    let mut inputs = Vec::new();
    let mut first = 0;
    for entry in entries {
        let records = manifest.load_trajectory(data_dir, entry)?;
        let label_records = match &labels {
            Some((dir, m)) => {
                let le = m
                    .entry(&entry.id)
                    .ok_or_else(|| Error::Data(format!("labels dataset has no trajectory {}", entry.id)))?;
                let l = m.load_trajectory(dir, le)?;
                if l.len() != records.len() {
                    return Err(Error::Data(format!("{}: label frame count differs", entry.id)));
                }
                Some(l)
            }
            None => None,
        };
        let stacks = trajectory_stacks(&records, ck.meta.unet.history)?;
        let out: Vec<FrameOutput> = (0..records.len())
            .into_par_iter()
            .map(|i| {
                let label = label_records.as_ref().map_or(&records[i].lidar, |l| &l[i].lidar);
                let keep = wanted.contains(&(first + i));
                eval_frame(&ck.net, &stacks[i], &records[i], label, cfg, &entry.id, keep)
            })
            .collect::<Result<_>>()?;
        for (i, o) in out.iter().enumerate() {
            if o.prediction.is_some() {
                let label = label_records.as_ref().map_or(&records[i].lidar, |l| &l[i].lidar);
                inputs.push((entry.id.clone(), i, records[i].radar.clone(), label.clone()));
            }
        }
        first += records.len();
        outputs.extend(out);
    }

    let mut names = vec!["model".to_string()];
    names.extend(cfg.cfar_thresholds_db.iter().map(|&d| cfar_method_name(d)));
    let methods = names
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            let pairs: Vec<_> = outputs.iter().map(|o| o.result.scores[i]).collect();
            let mean_points = outputs.iter().map(|o| o.result.points[i] as f64).sum::<f64>() / outputs.len() as f64;
            MethodResult {
                name,
                metrics: MetricsReport::from_pairs(&pairs),
                mean_points,
            }
        })
        .collect();
    let predictions: Vec<PolarImage> = outputs.iter().filter_map(|o| o.prediction.clone()).collect();
    let report = EvalReport {
        split,
        methods,
        frames: outputs.into_iter().map(|o| o.result).collect(),
    };

    if let Some(dir) = report_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_text(&dir.join("summary.csv"), &report.summary_csv())?;
        write_text(&dir.join("cdf.csv"), &report.cdf_csv())?;
        write_text(&dir.join("frames.csv"), &report.frames_csv())?;
        let factor = ck.meta.unet.az_upsample_factor;
        for ((id, frame, radar, lidar), pred) in inputs.iter().zip(&predictions) {
            let t = Gray::hstack(&[
                Gray::from_unit(radar).widen(factor),
                Gray::from_unit(pred),
                Gray::from_unit(lidar),
            ])?;
            t.write_pgm(&dir.join(format!("triptych_{id}_{frame:04}.pgm")))?;
        }
    }
    Ok(report)
}

/// Stack ending at frame `index` (default: last) of a trajectory file.
pub fn load_stack(ck: &Checkpoint, file: &Path, index: Option<usize>) -> Result<(FrameStack, FrameRecord)> {
    let records = read_trajectory(file, ck.meta.sim.max_range)?;
    let idx = index.unwrap_or(records.len().saturating_sub(1));
    let rec = records
        .get(idx)
        .cloned()
        .ok_or_else(|| Error::Data(format!("{}: no frame {idx} ({} frames)", file.display(), records.len())))?;
    let u = &ck.meta.unet;
    rec.validate(u.n_range, u.n_az_in, u.n_az_out())?;
    let start = (idx + 1).saturating_sub(u.history + 1);
    let mut stack = FrameStack::new(u.history, u.n_range, u.n_az_in);
    for r in &records[start..=idx] {
        stack.push(r.radar.clone())?;
    }
    Ok((stack, rec))
}

/// Predict one frame and write its probability image as a PGM.
pub fn run_infer(ck: &Checkpoint, file: &Path, index: Option<usize>, out: &Path) -> Result<PolarImage> {
    let (stack, _) = load_stack(ck, file, index)?;
    let prob = predict(&ck.net, &stack, ck.meta.sim.max_range)?;
    Gray::from_unit(&prob).write_pgm(out)?;
    Ok(prob)
}

/// Saliency of output `pixel` for one frame, evaluated in f64. Writes one
/// min-max scaled PGM per input channel and `saliency.csv` of raw values.
pub fn run_saliency(
    ck: &Checkpoint,
    file: &Path,
    index: Option<usize>,
    pixel: (usize, usize),
    out_dir: &Path,
) -> Result<Vec<Vec<f64>>> {
    let (stack, _) = load_stack(ck, file, index)?;
    let net = ck.net.cast::<f64>();
    let s = saliency(&net, &stack.to_tensor::<f64>(), pixel)?;
    if !s.is_finite() {
        return Err(Error::Numeric("saliency is not finite".into()));
    }
    let [c, h, w] = [s.shape()[0], s.shape()[1], s.shape()[2]];
    let maps: Vec<Vec<f64>> = s.data().chunks(h * w).map(<[f64]>::to_vec).collect();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut csv = String::from("channel,row,col,value\n");
    for (ch, map) in maps.iter().enumerate() {
        Gray::from_values(map, h, w).write_pgm(&out_dir.join(format!("saliency_ch{ch:02}.pgm")))?;
        for (i, v) in map.iter().enumerate() {
            let _ = writeln!(csv, "{ch},{},{},{v}", i / w, i % w);
        }
    }
    debug_assert_eq!(maps.len(), c);
    write_text(&out_dir.join("saliency.csv"), &csv)?;
    Ok(maps)
}
