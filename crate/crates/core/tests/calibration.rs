//! Low-threshold keep fraction against the CA-CFAR(8 dB) detection count.

use radarsr::dsp::{ca_cfar, heatmap, network_input, CfarConfig, DEFAULT_KEEP_FRACTION};
use radarsr::sim::{frame_seed, gen_scene, gen_trajectory, radar_snapshot, EnvironmentKind, SimConfig};

/// Survivor-to-detection ratio of every frame in the calibration set.
fn ratios(keep_fraction: f64) -> Vec<f64> {
    let cfg = SimConfig::default();
    let cfar = CfarConfig::default();
    let mut out = Vec::new();
    for kind in [
        EnvironmentKind::Same,
        EnvironmentKind::Similar,
        EnvironmentKind::Different,
    ] {
        for seed in 0..10 {
            let scene = gen_scene(seed, kind);
            for (i, pose) in gen_trajectory(&scene, 4, 0.3, seed).unwrap().iter().enumerate() {
                let snap = radar_snapshot(&scene, pose, &cfg, frame_seed(seed, i as u64));
                let mag = heatmap(&snap, &cfg).unwrap();
                let detections = ca_cfar(&mag, &cfar).unwrap().count_nonzero();
                let survivors = network_input(&mag, keep_fraction).unwrap().count_nonzero();
                assert!(detections > 0);
                out.push(survivors as f64 / detections as f64);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn default_keep_fraction_gives_median_ratio_between_10_and_25() {
    let r = ratios(DEFAULT_KEEP_FRACTION);
    let median = r[r.len() / 2];
    assert!((10.0..=25.0).contains(&median), "median ratio {median}");
}

#[test]
fn survivors_grow_with_keep_fraction() {
    let lo = ratios(0.05);
    let hi = ratios(0.5);
    assert!(lo.iter().zip(&hi).all(|(a, b)| a <= b));
}
