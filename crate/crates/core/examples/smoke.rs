//! Smoke blanks the lidar and leaves the radar untouched, so a model driven
//! by radar alone produces the same output with or without it.

use radarsr::dsp::{heatmap, network_input, DEFAULT_KEEP_FRACTION};
use radarsr::model::{predict, FrameStack, UNet, UNetConfig};
use radarsr::sim::{frame_seed, gen_scene, gen_trajectory, lidar_scan, radar_snapshot, EnvironmentKind, SimConfig};

fn main() -> radarsr::Result<()> {
    let clear = SimConfig::toy();
    let smoky = SimConfig {
        smoke: true,
        ..clear.clone()
    };
    let scene = gen_scene(4, EnvironmentKind::Same);
    let poses = gen_trajectory(&scene, 8, 0.1, 4)?;
    let unet = UNet::<f32>::new(UNetConfig::toy(), 0)?;
    let cfg = unet.config().clone();
    let mut stacks = [
        FrameStack::new(cfg.history, cfg.n_range, cfg.n_az_in),
        FrameStack::new(cfg.history, cfg.n_range, cfg.n_az_in),
    ];

    for (i, pose) in poses.iter().enumerate() {
        let seed = frame_seed(4, i as u64);
        let mut lidar_points = [0; 2];
        for (k, sim) in [&clear, &smoky].into_iter().enumerate() {
            let input = network_input(
                &heatmap(&radar_snapshot(&scene, pose, sim, seed), sim)?,
                DEFAULT_KEEP_FRACTION,
            )?;
            stacks[k].push(input)?;
            lidar_points[k] = lidar_scan(&scene, pose, sim).count_nonzero();
        }
        let a = predict(&unet, &stacks[0], clear.max_range)?;
        let b = predict(&unet, &stacks[1], clear.max_range)?;
        println!(
            "frame {i}: lidar cells {:>3} clear / {} smoke, model output identical: {}",
            lidar_points[0],
            lidar_points[1],
            a == b
        );
    }
    Ok(())
}
