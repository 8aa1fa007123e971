use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::format::{block_image, image_block, kind, read_block, Block};
use crate::autodiff::Tensor;
use crate::dsp::{ImageKind, PolarImage};
use crate::model::{FrameStack, Sample};
use crate::sim::Pose;
use crate::{Error, Result};

/// One simulated frame after DSP: the network input, the magnitude heatmap
/// it came from, and the lidar label.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    /// Position within its trajectory.
    pub index: usize,
    /// `[x, y, heading]`, stored at f32 precision.
    pub pose: [f32; 3],
    /// Log-normalized, sparsified radar image.
    pub radar: PolarImage,
    /// Linear radar magnitude, the CFAR input.
    pub radar_magnitude: PolarImage,
    /// Binary lidar occupancy on the fine azimuth grid.
    pub lidar: PolarImage,
}

impl FrameRecord {
    pub fn pose_of(pose: &Pose) -> [f32; 3] {
        [pose.x as f32, pose.y as f32, pose.heading as f32]
    }

    pub fn validate(&self, n_range: usize, n_az_in: usize, n_az_out: usize) -> Result<()> {
        let ok = self.radar.shape() == (n_range, n_az_in)
            && self.radar_magnitude.shape() == (n_range, n_az_in)
            && self.lidar.shape() == (n_range, n_az_out)
            && self.radar.kind == ImageKind::Normalized
            && self.radar_magnitude.kind == ImageKind::Magnitude
            && self.lidar.kind == ImageKind::Binary;
        if !ok {
            return Err(Error::Data(format!(
                "frame {}: radar {:?}/{:?}, lidar {:?}/{:?}; expected {n_range}x{n_az_in} and {n_range}x{n_az_out}",
                self.index,
                self.radar.shape(),
                self.radar.kind,
                self.lidar.shape(),
                self.lidar.kind
            )));
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        Block::f32(kind::POSE, &[3], self.pose.to_vec()).write_to(w)?;
        image_block(&self.radar).write_to(w)?;
        image_block(&self.radar_magnitude).write_to(w)?;
        image_block(&self.lidar).write_to(w)
    }

    pub fn encoded_len(&self) -> usize {
        Block::f32(kind::POSE, &[3], vec![0.0; 3]).encoded_len()
            + image_block(&self.radar).encoded_len()
            + image_block(&self.radar_magnitude).encoded_len()
            + image_block(&self.lidar).encoded_len()
    }

    /// Next record, or `None` at a clean end of input.
    pub fn read_from<R: Read>(r: &mut R, index: usize, max_range: f64) -> Result<Option<Self>> {
        let Some(pose) = Block::read_from(r)? else {
            return Ok(None);
        };
        let pose = pose.expect_kind(kind::POSE)?.clone().into_f32()?;
        let [x, y, h] = pose[..] else {
            return Err(Error::Data(format!("frame {index}: pose has {} values", pose.len())));
        };
        let radar = block_image(read_block(r)?, max_range)?;
        let radar_magnitude = block_image(read_block(r)?, max_range)?;
        let lidar = block_image(read_block(r)?, max_range)?;
        Ok(Some(Self {
            index,
            pose: [x, y, h],
            radar,
            radar_magnitude,
            lidar,
        }))
    }
}

/// Write records back to back; returns each record's byte offset.
pub fn write_trajectory(path: &Path, records: &[FrameRecord]) -> Result<Vec<u64>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut offsets = Vec::with_capacity(records.len());
    let mut pos = 0u64;
    for r in records {
        offsets.push(pos);
        r.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        pos += r.encoded_len() as u64;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(offsets)
}

pub fn read_trajectory(path: &Path, max_range: f64) -> Result<Vec<FrameRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut out = Vec::new();
    while let Some(rec) = FrameRecord::read_from(&mut r, out.len(), max_range)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
    {
        out.push(rec);
    }
    Ok(out)
}

/// Input stacks for every frame of a trajectory, oldest history first.
pub fn trajectory_stacks(records: &[FrameRecord], history: usize) -> Result<Vec<FrameStack>> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    let (r, a) = first.radar.shape();
    let mut stack = FrameStack::new(history, r, a);
    let mut out = Vec::with_capacity(records.len());
    for rec in records {
        stack.push(rec.radar.clone())?;
        out.push(stack.clone());
    }
    Ok(out)
}

/// `(stack, lidar label)` training pairs for every frame of a trajectory.
pub fn trajectory_samples(records: &[FrameRecord], history: usize) -> Result<Vec<Sample<f32>>> {
    let stacks = trajectory_stacks(records, history)?;
    stacks
        .iter()
        .zip(records)
        .map(|(s, rec)| {
            Ok(Sample {
                input: s.to_tensor(),
                label: Tensor::from_vec(&[1, rec.lidar.n_range, rec.lidar.n_azimuth], rec.lidar.data.clone())?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::AzimuthGrid;

    fn sample_record(index: usize) -> FrameRecord {
        let mut radar = PolarImage::zeros(4, 2, 10.0, ImageKind::Normalized, AzimuthGrid::Beamspace);
        radar.data = vec![0.0, 1.0 / 255.0, 0.5, 1.0, 0.0, 0.2, 0.0, 0.0];
        let mut mag = PolarImage::zeros(4, 2, 10.0, ImageKind::Magnitude, AzimuthGrid::Beamspace);
        mag.data = vec![0.1, 3.3, 1e-7, 250.0, 0.0, 1.5, 2.5, 0.01];
        let mut lidar = PolarImage::zeros(4, 8, 10.0, ImageKind::Binary, AzimuthGrid::Uniform);
        lidar.set(2, 5, 1.0);
        FrameRecord {
            index,
            pose: [1.1, -2.7, 0.3],
            radar,
            radar_magnitude: mag,
            lidar,
        }
    }

    #[test]
    fn trajectory_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.rhd");
        let recs: Vec<_> = (0..3).map(sample_record).collect();
        let offsets = write_trajectory(&path, &recs).unwrap();
        assert_eq!(offsets[0], 0);
        assert_eq!(offsets[1] as usize, recs[0].encoded_len());
        let back = read_trajectory(&path, 10.0).unwrap();
        assert_eq!(back, recs);
        assert_eq!(
            std::fs::metadata(&path).unwrap().len() as usize,
            3 * recs[0].encoded_len()
        );
        for r in &back {
            r.validate(4, 2, 8).unwrap();
        }
        assert!(back[0].validate(4, 2, 16).is_err());
    }

    #[test]
    fn samples_zero_fill_history() {
        let recs: Vec<_> = (0..3).map(sample_record).collect();
        let s = trajectory_samples(&recs, 2).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].input.shape(), [3, 4, 2]);
        assert!(s[0].input.data()[..16].iter().all(|&v| v == 0.0));
        assert_eq!(s[2].input.data()[..8], s[2].input.data()[16..]);
        assert_eq!(s[0].label.shape(), [1, 4, 8]);
    }
}
