//! Generate one scene per environment family, walk a trajectory through it,
//! and summarize what each sensor sees on the first frame.

use radarsr::sim::{
    gen_scene, gen_trajectory, lidar_scan, visible_reflectors, EnvironmentKind, ReflectorSource, SimConfig,
};

fn main() -> radarsr::Result<()> {
    let cfg = SimConfig::default();
    for kind in [
        EnvironmentKind::Same,
        EnvironmentKind::Similar,
        EnvironmentKind::Different,
    ] {
        let scene = gen_scene(7, kind);
        let poses = gen_trajectory(&scene, 20, 0.1, 7)?;
        let first = &poses[0];
        let lidar = lidar_scan(&scene, first, &cfg);
        let reflectors = visible_reflectors(&scene, first, &cfg);
        let count = |f: fn(&ReflectorSource) -> bool| reflectors.iter().filter(|r| f(&r.source)).count();
        println!("{kind:?} ({:?})", scene.family);
        println!("  {} walls, {} scatterers", scene.walls.len(), scene.scatterers.len());
        println!(
            "  trajectory: {} poses from ({:.2}, {:.2}) to ({:.2}, {:.2})",
            poses.len(),
            first.x,
            first.y,
            poses[poses.len() - 1].x,
            poses[poses.len() - 1].y
        );
        println!(
            "  lidar: {} of {} columns hit a wall",
            lidar.count_nonzero(),
            cfg.n_lidar_az_bins
        );
        println!(
            "  radar reflectors: {} wall samples, {} scatterers, {} ghosts",
            count(|s| matches!(s, ReflectorSource::Wall(_))),
            count(|s| matches!(s, ReflectorSource::Scatterer(_))),
            count(|s| matches!(s, ReflectorSource::Ghost { .. })),
        );
    }
    Ok(())
}
