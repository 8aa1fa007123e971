//! Chamfer and modified-Hausdorff distances, and the grid-bucket nearest
//! neighbor search against brute force.

use std::time::Instant;

use radarsr::pointcloud::{chamfer, mod_hausdorff, nn_accel, nn_brute, PointCloud2D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> radarsr::Result<()> {
    let line = PointCloud2D::new(vec![[0.0, 0.0], [2.0, 0.0], [4.0, 0.0]]);
    let origin = PointCloud2D::new(vec![[0.0, 0.0]]);
    println!(
        "line vs origin: Chamfer {:.4}, mod-Hausdorff {:.4}",
        chamfer(&line, &origin)?,
        mod_hausdorff(&line, &origin)?
    );

    // A single far outlier moves Chamfer but not the median-based distance.
    let mut wall: Vec<[f64; 2]> = (0..200).map(|i| [i as f64 * 0.02, 3.0]).collect();
    let noisy = PointCloud2D::new(wall.iter().map(|p| [p[0], p[1] + 0.05]).collect());
    let clean = PointCloud2D::new(wall.clone());
    println!(
        "offset 5 cm: Chamfer {:.4}, mod-Hausdorff {:.4}",
        chamfer(&noisy, &clean)?,
        mod_hausdorff(&noisy, &clean)?
    );
    wall.push([0.0, 9.0]);
    let outlier = PointCloud2D::new(wall);
    println!(
        "one outlier: Chamfer {:.4}, mod-Hausdorff {:.4}",
        chamfer(&outlier, &clean)?,
        mod_hausdorff(&outlier, &clean)?
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cloud = |n: usize| -> Vec<[f64; 2]> {
        (0..n)
            .map(|_| [rng.gen_range(-10.0..10.0), rng.gen_range(0.0..10.0)])
            .collect()
    };
    let (a, b) = (cloud(4000), cloud(4000));
    let t = Instant::now();
    let fast = nn_accel(&a, &b);
    let t_fast = t.elapsed();
    let t = Instant::now();
    let slow = nn_brute(&a, &b);
    let t_slow = t.elapsed();
    let diff = fast.iter().zip(&slow).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    println!("4000 x 4000 nearest neighbors: grid {t_fast:?}, brute force {t_slow:?}, max difference {diff:e}");
    Ok(())
}
