//! Simulate a small dataset, train the toy U-Net for a few epochs, and
//! compare it with the CFAR sweep on held-out frames from the same scenes.
//!
//! Usage: `cargo run --release --example train_toy [EPOCHS]`

use radarsr::harness::{make_dataset, run_eval, run_training, Checkpoint, DatasetSpec, ExperimentConfig, Split};
use radarsr::model::{Network, UNet};

fn main() -> radarsr::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let dir = tempfile::tempdir().map_err(|e| radarsr::Error::io(std::env::temp_dir(), e))?;
    let cfg = ExperimentConfig::default();
    let spec = DatasetSpec {
        n_train: 4,
        n_test_same: 2,
        n_test_similar: 0,
        n_test_different: 0,
        frames_per_traj: 40,
        seed: 9,
    };
    let data = dir.path().join("data");
    make_dataset(&data, &spec, &cfg.sim, &cfg.data)?;
    let n_params = UNet::<f32>::new(cfg.unet.clone(), cfg.adam.seed)?.n_params();
    println!(
        "{n_params} parameters, input {:?} -> output {:?}",
        cfg.unet.in_shape(),
        cfg.unet.out_shape()
    );

    let ckpt = dir.path().join("model.ckpt");
    run_training(&data, &cfg, epochs, &ckpt, None, |e, loss| {
        println!("epoch {e}: loss {loss:.4}")
    })?;

    let report = run_eval(&data, Split::TestSame, &Checkpoint::load(&ckpt)?, &cfg.eval, None, None)?;
    println!("\nmedian errors on test_same (m):");
    for m in &report.methods {
        println!(
            "  {:<9} Chamfer {:.3}  mod-Hausdorff {:.3}  ({:.0} points/frame)",
            m.name, m.metrics.median_chamfer, m.metrics.median_mod_hausdorff, m.mean_points
        );
    }
    Ok(())
}
