use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use radarsr::harness::{
    gradcheck_suite, make_dataset, run_eval, run_infer, run_saliency, run_training, Checkpoint, DatasetSpec,
    ExperimentConfig, Split,
};
use radarsr::{Error, Result};

#[derive(Parser)]
#[command(name = "radarsr", version, about = "Radar-to-lidar super-resolution toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a dataset of simulated trajectories.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        train: usize,
        #[arg(long, default_value_t = 4)]
        test_same: usize,
        #[arg(long, default_value_t = 4)]
        test_similar: usize,
        #[arg(long, default_value_t = 4)]
        test_different: usize,
        #[arg(long, default_value_t = 100)]
        frames: usize,
        /// Blank the lidar; radar is unaffected.
        #[arg(long)]
        smoke: bool,
        /// Experiment config whose `sim` and `data` sections are used.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train the network on a dataset's training split.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Continue from this checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Score the model and the CFAR sweep on one split.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "test_same")]
        split: String,
        #[arg(long)]
        ckpt: PathBuf,
        /// CFAR thresholds in dB, comma separated.
        #[arg(long, value_delimiter = ',')]
        cfar: Option<Vec<f64>>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        report: PathBuf,
        /// Score against the lidar of this dataset instead.
        #[arg(long)]
        labels_from: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Predict one frame of a trajectory file.
    Infer {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        frame: PathBuf,
        /// Frame index within the file; defaults to the last.
        #[arg(long)]
        index: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Input attribution maps for one output pixel.
    Saliency {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        index: Option<usize>,
        /// Output pixel as ROW,COL.
        #[arg(long, value_delimiter = ',', required = true)]
        pixel: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the autodiff finite-difference verification suite.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn config(path: Option<&PathBuf>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Simulate {
            out,
            seed,
            train,
            test_same,
            test_similar,
            test_different,
            frames,
            smoke,
            config: cfg,
        } => {
            let mut cfg = config(cfg.as_ref())?;
            cfg.sim.smoke |= smoke;
            let spec = DatasetSpec {
                n_train: train,
                n_test_same: test_same,
                n_test_similar: test_similar,
                n_test_different: test_different,
                frames_per_traj: frames,
                seed,
            };
            let m = make_dataset(&out, &spec, &cfg.sim, &cfg.data)?;
            println!("wrote {} trajectories to {}", m.trajectories.len(), out.display());
        }
        Cmd::Train {
            data,
            config: cfg,
            epochs,
            out,
            resume,
        } => {
            let cfg = config(cfg.as_ref())?;
            let epochs = epochs.unwrap_or(cfg.train.epochs);
            let ck = run_training(&data, &cfg, epochs, &out, resume.as_deref(), |e, l| {
                println!("epoch {e}: loss {l:.6}");
            })?;
            println!("checkpoint {} after {} epochs", out.display(), ck.state.epoch);
        }
        Cmd::Eval {
            data,
            split,
            ckpt,
            cfar,
            tau,
            report,
            labels_from,
            config: cfg,
        } => {
            let mut cfg = config(cfg.as_ref())?;
            if let Some(c) = cfar {
                cfg.eval.cfar_thresholds_db = c;
            }
            if let Some(t) = tau {
                cfg.eval.tau = t;
            }
            cfg.validate()?;
            let split = Split::parse(&split)?;
            let ck = Checkpoint::load(&ckpt)?;
            let r = run_eval(&data, split, &ck, &cfg.eval, labels_from.as_deref(), Some(&report))?;
            print!("{}", r.summary_csv());
        }
        Cmd::Infer {
            ckpt,
            frame,
            index,
            out,
        } => {
            let ck = Checkpoint::load(&ckpt)?;
            let img = run_infer(&ck, &frame, index, &out)?;
            println!("wrote {} ({}x{})", out.display(), img.n_range, img.n_azimuth);
        }
        Cmd::Saliency {
            ckpt,
            frame,
            index,
            pixel,
            out,
        } => {
            let [r, c] = pixel[..] else {
                return Err(Error::Config("--pixel takes ROW,COL".into()));
            };
            let ck = Checkpoint::load(&ckpt)?;
            let maps = run_saliency(&ck, &frame, index, (r, c), &out)?;
            for (i, m) in maps.iter().enumerate() {
                println!("channel {i}: attribution sum {:.6e}", m.iter().sum::<f64>());
            }
        }
        Cmd::Gradcheck { seed } => {
            let results = gradcheck_suite(seed)?;
            let mut ok = true;
            for r in &results {
                let status = if r.passed() { "PASS" } else { "FAIL" };
                ok &= r.passed();
                println!(
                    "{status} {:<16} max_rel_error={:.3e} (< {:.0e}) checked={} excluded={}",
                    r.name, r.report.max_rel_error, r.tolerance, r.report.checked, r.report.excluded
                );
                if let Some((input, index, analytic, numeric)) = r.report.worst.filter(|_| !r.passed()) {
                    println!("     worst: input {input} index {index} analytic {analytic:.9e} numeric {numeric:.9e}");
                }
            }
            if !ok {
                return Err(Error::Numeric("gradient check failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
