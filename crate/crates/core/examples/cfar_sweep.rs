//! CA-CFAR detections across thresholds versus low-threshold survivors on
//! the same frames, and the scores of both against the lidar.

use radarsr::dsp::{ca_cfar, heatmap, network_input, CfarConfig, DEFAULT_KEEP_FRACTION};
use radarsr::pointcloud::{pair_metrics, polar_to_points};
use radarsr::sim::{frame_seed, gen_scene, gen_trajectory, lidar_scan, radar_snapshot, EnvironmentKind, SimConfig};

fn main() -> radarsr::Result<()> {
    let cfg = SimConfig::default();
    let base = CfarConfig::default();
    let scene = gen_scene(5, EnvironmentKind::Same);
    let poses = gen_trajectory(&scene, 10, 0.2, 5)?;
    let thresholds = [1.0, 2.0, 4.0, 8.0, 12.0];

    println!(
        "frame  survivors  {}",
        thresholds.map(|t| format!("{t:>6} dB")).join(" ")
    );
    for (i, pose) in poses.iter().enumerate() {
        let mag = heatmap(&radar_snapshot(&scene, pose, &cfg, frame_seed(5, i as u64)), &cfg)?;
        let survivors = network_input(&mag, DEFAULT_KEEP_FRACTION)?.count_nonzero();
        let counts = thresholds
            .iter()
            .map(|&db| ca_cfar(&mag, &base.with_threshold(db)).map(|d| format!("{:>9}", d.count_nonzero())))
            .collect::<radarsr::Result<Vec<_>>>()?;
        println!("{i:>5}  {survivors:>9}  {}", counts.join(" "));
    }

    let pose = &poses[0];
    let mag = heatmap(&radar_snapshot(&scene, pose, &cfg, frame_seed(5, 0)), &cfg)?;
    let truth = polar_to_points(&lidar_scan(&scene, pose, &cfg));
    println!("\nframe 0 against lidar ({} points):", truth.len());
    for db in thresholds {
        let det = polar_to_points(&ca_cfar(&mag, &base.with_threshold(db))?);
        match pair_metrics(&det, &truth) {
            Some((c, h)) => println!(
                "  {db:>4} dB: {:>4} points, Chamfer {c:.3} m, mod-Hausdorff {h:.3} m",
                det.len()
            ),
            None => println!("  {db:>4} dB: no detections"),
        }
    }
    Ok(())
}
