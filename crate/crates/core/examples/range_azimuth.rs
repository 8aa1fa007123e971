//! Range-azimuth heatmap of one simulated frame: strongest peaks, the
//! normalized network input, and PGM renderings next to the lidar.
//!
//! Usage: `cargo run --example range_azimuth [OUT_DIR]`

use std::path::PathBuf;

use radarsr::dsp::{heatmap, network_input, DEFAULT_KEEP_FRACTION};
use radarsr::harness::Gray;
use radarsr::sim::{gen_scene, gen_trajectory, lidar_scan, radar_snapshot, EnvironmentKind, SimConfig};

fn main() -> radarsr::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("radarsr_heatmap"), PathBuf::from);
    let cfg = SimConfig::default();
    let scene = gen_scene(3, EnvironmentKind::Same);
    let pose = gen_trajectory(&scene, 30, 0.1, 3)?[29];
    let magnitude = heatmap(&radar_snapshot(&scene, &pose, &cfg, 0), &cfg)?;
    let input = network_input(&magnitude, DEFAULT_KEEP_FRACTION)?;

    let (rows, cols) = magnitude.shape();
    let mut cells: Vec<(usize, usize)> = (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect();
    cells.sort_by(|a, b| magnitude.get(b.0, b.1).total_cmp(&magnitude.get(a.0, a.1)));
    println!("{rows} range bins x {cols} beamspace bins; five strongest cells:");
    for &(r, c) in &cells[..5] {
        println!(
            "  range {:5.2} m  bearing {:6.1} deg  magnitude {:.3e}",
            magnitude.range_of(r),
            magnitude.azimuth_of(c).to_degrees(),
            magnitude.get(r, c)
        );
    }
    println!(
        "network input keeps {} of {} pixels (keep fraction {DEFAULT_KEEP_FRACTION})",
        input.count_nonzero(),
        rows * cols
    );

    std::fs::create_dir_all(&out).map_err(|e| radarsr::Error::io(&out, e))?;
    let log: Vec<f64> = magnitude.data.iter().map(|&m| f64::from(m).ln_1p()).collect();
    Gray::from_values(&log, rows, cols).write_pgm(&out.join("magnitude.pgm"))?;
    Gray::from_unit(&input).write_pgm(&out.join("input.pgm"))?;
    Gray::from_unit(&lidar_scan(&scene, &pose, &cfg)).write_pgm(&out.join("lidar.pgm"))?;
    println!("wrote magnitude.pgm, input.pgm, lidar.pgm to {}", out.display());
    Ok(())
}
