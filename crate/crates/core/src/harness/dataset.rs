use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::DataConfig;
use super::record::{read_trajectory, write_trajectory, FrameRecord};
use crate::dsp::{heatmap, network_input};
use crate::sim::{frame_seed, gen_scene, gen_trajectory, lidar_scan, radar_snapshot, EnvironmentKind, SimConfig};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    TestSame,
    TestSimilar,
    TestDifferent,
}

impl Split {
    pub const ALL: [Split; 4] = [Self::Train, Self::TestSame, Self::TestSimilar, Self::TestDifferent];

    pub fn name(self) -> &'static str {
        match self {
            Self::Train => "train",
            Self::TestSame => "test_same",
            Self::TestSimilar => "test_similar",
            Self::TestDifferent => "test_different",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown split {s:?}")))
    }

    fn environment(self) -> EnvironmentKind {
        match self {
            Self::Train | Self::TestSame => EnvironmentKind::Same,
            Self::TestSimilar => EnvironmentKind::Similar,
            Self::TestDifferent => EnvironmentKind::Different,
        }
    }

    fn code(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEntry {
    pub id: String,
    pub split: Split,
    pub environment: EnvironmentKind,
    pub scene_seed: u64,
    pub trajectory_seed: u64,
    pub n_frames: usize,
    /// Relative to the dataset directory.
    pub file: String,
    /// Byte offset of each frame record within `file`.
    pub offsets: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub seed: u64,
    pub sim: SimConfig,
    pub data: DataConfig,
    pub trajectories: Vec<TrajectoryEntry>,
}

/// How many trajectories of each split to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetSpec {
    pub n_train: usize,
    pub n_test_same: usize,
    pub n_test_similar: usize,
    pub n_test_different: usize,
    pub frames_per_traj: usize,
    pub seed: u64,
}

impl DatasetSpec {
    fn count(&self, split: Split) -> usize {
        match split {
            Split::Train => self.n_train,
            Split::TestSame => self.n_test_same,
            Split::TestSimilar => self.n_test_similar,
            Split::TestDifferent => self.n_test_different,
        }
    }
}

/// Scene and trajectory seeds for trajectory `j` of `split`. Same-environment
/// test trajectories revisit the training scenes along new paths.
fn seeds(spec: &DatasetSpec, split: Split, j: usize) -> (u64, u64) {
    let scene_of = |split: Split, j: usize| frame_seed(spec.seed, (split.code() << 32) | j as u64);
    let scene = match split {
        Split::TestSame if spec.n_train > 0 => scene_of(Split::Train, j % spec.n_train),
        _ => scene_of(split, j),
    };
    let traj = frame_seed(spec.seed ^ 0x5452_414a, (split.code() << 32) | j as u64);
    (scene, traj)
}

/// Simulate one trajectory: poses, radar heatmaps, network inputs, lidar labels.
pub fn simulate_trajectory(
    environment: EnvironmentKind,
    scene_seed: u64,
    trajectory_seed: u64,
    n_frames: usize,
    sim: &SimConfig,
    data: &DataConfig,
) -> Result<Vec<FrameRecord>> {
    let scene = gen_scene(scene_seed, environment);
    let poses = gen_trajectory(&scene, n_frames, data.step, trajectory_seed)?;
    poses
        .par_iter()
        .enumerate()
        .map(|(i, pose)| {
            let snap = radar_snapshot(&scene, pose, sim, frame_seed(trajectory_seed, i as u64));
            let radar_magnitude = heatmap(&snap, sim)?;
            let radar = network_input(&radar_magnitude, data.keep_fraction)?;
            Ok(FrameRecord {
                index: i,
                pose: FrameRecord::pose_of(pose),
                radar,
                radar_magnitude,
                lidar: lidar_scan(&scene, pose, sim),
            })
        })
        .collect()
}

/// Generate every trajectory of `spec` under `out_dir` and write the manifest.
pub fn make_dataset(out_dir: &Path, spec: &DatasetSpec, sim: &SimConfig, data: &DataConfig) -> Result<DatasetManifest> {
    sim.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut trajectories = Vec::new();
    for split in Split::ALL {
        for j in 0..spec.count(split) {
            let id = format!("{}_{j:03}", split.name());
            let (scene_seed, trajectory_seed) = seeds(spec, split, j);
            let environment = split.environment();
            let records = simulate_trajectory(
                environment,
                scene_seed,
                trajectory_seed,
                spec.frames_per_traj,
                sim,
                data,
            )
            .map_err(|e| Error::Sim(format!("trajectory {id}: {e}")))?;
            let file = format!("{id}.rhd");
            let offsets = write_trajectory(&out_dir.join(&file), &records)?;
            trajectories.push(TrajectoryEntry {
                id,
                split,
                environment,
                scene_seed,
                trajectory_seed,
                n_frames: records.len(),
                file,
                offsets,
            });
        }
    }
    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        seed: spec.seed,
        sim: sim.clone(),
        data: data.clone(),
        trajectories,
    };
    manifest.save(out_dir)?;
    Ok(manifest)
}

impl DatasetManifest {
    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    /// Load and check: version, unique ids, disjoint splits, files present.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Data(format!("manifest version {} unsupported", m.version)));
        }
        let mut ids = HashSet::new();
        for t in &m.trajectories {
            if !ids.insert(&t.id) {
                return Err(Error::Data(format!("trajectory id {} appears twice", t.id)));
            }
            if t.offsets.len() != t.n_frames {
                return Err(Error::Data(format!(
                    "{}: {} offsets for {} frames",
                    t.id,
                    t.offsets.len(),
                    t.n_frames
                )));
            }
            let f = dir.join(&t.file);
            if !f.is_file() {
                return Err(Error::Data(format!("{}: missing file {}", t.id, f.display())));
            }
        }
        let train: HashSet<(u64, u64)> = m
            .split(Split::Train)
            .map(|t| (t.scene_seed, t.trajectory_seed))
            .collect();
        if let Some(t) = m
            .trajectories
            .iter()
            .find(|t| t.split != Split::Train && train.contains(&(t.scene_seed, t.trajectory_seed)))
        {
            return Err(Error::Data(format!(
                "test trajectory {} duplicates a training trajectory",
                t.id
            )));
        }
        Ok(m)
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &TrajectoryEntry> {
        self.trajectories.iter().filter(move |t| t.split == split)
    }

    pub fn entry(&self, id: &str) -> Option<&TrajectoryEntry> {
        self.trajectories.iter().find(|t| t.id == id)
    }

    pub fn path(dir: &Path, entry: &TrajectoryEntry) -> PathBuf {
        dir.join(&entry.file)
    }

    /// Read and shape-check every frame of `entry`.
    pub fn load_trajectory(&self, dir: &Path, entry: &TrajectoryEntry) -> Result<Vec<FrameRecord>> {
        let records = read_trajectory(&Self::path(dir, entry), self.sim.max_range)?;
        if records.len() != entry.n_frames {
            return Err(Error::Data(format!(
                "{}: file has {} frames, manifest says {}",
                entry.id,
                records.len(),
                entry.n_frames
            )));
        }
        for r in &records {
            r.validate(
                self.sim.n_range_bins,
                self.sim.n_radar_az_bins,
                self.sim.n_lidar_az_bins,
            )?;
        }
        Ok(records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_sim() -> SimConfig {
        SimConfig::toy()
    }

    fn spec() -> DatasetSpec {
        DatasetSpec {
            n_train: 2,
            n_test_same: 1,
            n_test_similar: 1,
            n_test_different: 1,
            frames_per_traj: 5,
            seed: 7,
        }
    }

    #[test]
    fn dataset_is_reproducible_and_disjoint() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let m = make_dataset(a.path(), &spec(), &tiny_sim(), &DataConfig::default()).unwrap();
        make_dataset(b.path(), &spec(), &tiny_sim(), &DataConfig::default()).unwrap();
        assert_eq!(m.trajectories.len(), 5);
        for name in std::iter::once(MANIFEST_FILE.to_string()).chain(m.trajectories.iter().map(|t| t.file.clone())) {
            let x = std::fs::read(a.path().join(&name)).unwrap();
            let y = std::fs::read(b.path().join(&name)).unwrap();
            assert_eq!(x, y, "{name} differs");
        }
        let loaded = DatasetManifest::load(a.path()).unwrap();
        assert_eq!(loaded, m);
        for t in &m.trajectories {
            assert_eq!(loaded.load_trajectory(a.path(), t).unwrap().len(), 5);
        }
        let same = m.split(Split::TestSame).next().unwrap();
        let train0 = m.split(Split::Train).next().unwrap();
        assert_eq!(same.scene_seed, train0.scene_seed);
        assert_ne!(same.trajectory_seed, train0.trajectory_seed);
    }

    #[test]
    fn load_rejects_missing_file_and_overlap() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = make_dataset(dir.path(), &spec(), &tiny_sim(), &DataConfig::default()).unwrap();
        let train0 = m.trajectories[0].clone();
        m.trajectories[2].scene_seed = train0.scene_seed;
        m.trajectories[2].trajectory_seed = train0.trajectory_seed;
        m.save(dir.path()).unwrap();
        assert!(DatasetManifest::load(dir.path()).is_err());
        std::fs::remove_file(dir.path().join(&train0.file)).unwrap();
        assert!(DatasetManifest::load(dir.path()).is_err());
    }

    #[test]
    fn split_names_roundtrip() {
        for s in Split::ALL {
            assert_eq!(Split::parse(s.name()).unwrap(), s);
        }
        assert!(Split::parse("bogus").is_err());
    }
}
