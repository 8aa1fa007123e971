//! The autodiff verification suite behind `radarsr gradcheck`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::autodiff::{grad_check, grad_check_projected, Coords, GradCheckReport, Graph, LossConfig, Tensor, Var};
use crate::model::{Network, UNet, UNetConfig};
use crate::Result;

pub const STEP: f64 = 1e-5;
/// Step for maps that are affine in every single coordinate, where central
/// differences carry no truncation error and a wider step only reduces
/// cancellation.
pub const AFFINE_STEP: f64 = 1e-3;
pub const OP_TOLERANCE: f64 = 1e-6;
pub const LINEAR_TOLERANCE: f64 = 1e-9;
pub const NETWORK_TOLERANCE: f64 = 1e-5;
pub const MIN_COORDS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub report: GradCheckReport,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.report.max_rel_error < self.tolerance && self.report.checked >= MIN_COORDS
    }
}

fn uniform(rng: &mut ChaCha8Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.gen_range(lo..hi)).collect()).expect("length matches")
}

fn binary(rng: &mut ChaCha8Rng, shape: &[usize], p: f64) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| f64::from(u8::from(rng.gen_bool(p)))).collect()).expect("length matches")
}

type Build = Box<dyn Fn(&mut Graph<f64>, &[Var]) -> Result<Var>>;

/// Every op checked against central differences on random inputs, then the
/// toy U-Net under the combined loss at random parameter coordinates.
pub fn gradcheck_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = |k: u64| Coords::Random {
        count: 40,
        seed: seed.wrapping_add(k),
    };
    let proj = |rng: &mut ChaCha8Rng, shape: &[usize]| uniform(rng, shape, -1.0, 1.0);

    let mut cases: Vec<(&str, Vec<Tensor<f64>>, Build, f64)> = Vec::new();
    let mut affine = Vec::new();

    let p = proj(&mut rng, &[3, 5, 6]);
    cases.push((
        "conv2d 3x3",
        vec![
            proj(&mut rng, &[2, 5, 6]),
            proj(&mut rng, &[3, 2, 3, 3]),
            proj(&mut rng, &[3]),
        ],
        Box::new(move |g, v| {
            let y = g.conv2d(v[0], v[1], v[2])?;
            g.weighted_sum(y, &p)
        }),
        OP_TOLERANCE,
    ));
    let p = proj(&mut rng, &[2, 4, 7]);
    cases.push((
        "conv2d 1x3",
        vec![
            proj(&mut rng, &[3, 4, 7]),
            proj(&mut rng, &[2, 3, 1, 3]),
            proj(&mut rng, &[2]),
        ],
        Box::new(move |g, v| {
            let y = g.conv2d(v[0], v[1], v[2])?;
            g.weighted_sum(y, &p)
        }),
        OP_TOLERANCE,
    ));
    let p = proj(&mut rng, &[5]);
    cases.push((
        "linear",
        vec![proj(&mut rng, &[7]), proj(&mut rng, &[5, 7]), proj(&mut rng, &[5])],
        Box::new(move |g, v| {
            let y = g.linear(v[0], v[1], v[2])?;
            g.weighted_sum(y, &p)
        }),
        LINEAR_TOLERANCE,
    ));
    affine.push(cases.len() - 1);
    let p = proj(&mut rng, &[2, 4, 6]);
    cases.push((
        "relu",
        vec![proj(&mut rng, &[2, 4, 6])],
        Box::new(move |g, v| {
            let y = g.relu(v[0]);
            g.weighted_sum(y, &p)
        }),
        OP_TOLERANCE,
    ));
    let p = proj(&mut rng, &[2, 4, 6]);
    cases.push((
        "sigmoid",
        vec![uniform(&mut rng, &[2, 4, 6], -4.0, 4.0)],
        Box::new(move |g, v| {
            let y = g.sigmoid(v[0]);
            g.weighted_sum(y, &p)
        }),
        OP_TOLERANCE,
    ));
    for (name, window) in [("maxpool 2x2", (2, 2)), ("maxpool 1x2", (1, 2))] {
        let p = proj(&mut rng, &[2, 4 / window.0, 6 / window.1]);
        cases.push((
            name,
            vec![proj(&mut rng, &[2, 4, 6])],
            Box::new(move |g, v| {
                let y = g.maxpool2d(v[0], window)?;
                g.weighted_sum(y, &p)
            }),
            OP_TOLERANCE,
        ));
    }
    for (name, factor) in [("upsample 2x2", (2, 2)), ("upsample 1x2", (1, 2))] {
        let p = proj(&mut rng, &[2, 4 * factor.0, 5 * factor.1]);
        cases.push((
            name,
            vec![proj(&mut rng, &[2, 4, 5])],
            Box::new(move |g, v| {
                let y = g.upsample_nearest(v[0], factor)?;
                g.weighted_sum(y, &p)
            }),
            OP_TOLERANCE,
        ));
    }
    let p = proj(&mut rng, &[3, 3, 4]);
    cases.push((
        "concat_channels",
        vec![proj(&mut rng, &[1, 3, 4]), proj(&mut rng, &[2, 3, 4])],
        Box::new(move |g, v| {
            let y = g.concat_channels(v[0], v[1])?;
            g.weighted_sum(y, &p)
        }),
        OP_TOLERANCE,
    ));
    let p = proj(&mut rng, &[24]);
    cases.push((
        "add and scale",
        vec![proj(&mut rng, &[24]), proj(&mut rng, &[24])],
        Box::new(move |g, v| {
            let s = g.scale(v[1], -1.5);
            let y = g.add(v[0], s)?;
            g.weighted_sum(y, &p)
        }),
        OP_TOLERANCE,
    ));
    let target = binary(&mut rng, &[1, 6, 8], 0.3);
    let t = target.clone();
    cases.push((
        "bce_loss",
        vec![uniform(&mut rng, &[1, 6, 8], 0.02, 0.98)],
        Box::new(move |g, v| g.bce_loss(v[0], &t)),
        OP_TOLERANCE,
    ));
    let t = target.clone();
    cases.push((
        "dice_loss",
        vec![uniform(&mut rng, &[1, 6, 8], 0.0, 1.0)],
        Box::new(move |g, v| g.dice_loss(v[0], &t, 1e-6)),
        OP_TOLERANCE,
    ));
    let t = target;
    cases.push((
        "combined_loss",
        vec![uniform(&mut rng, &[1, 6, 8], 0.02, 0.98)],
        Box::new(move |g, v| g.combined_loss(v[0], &t, &LossConfig::default())),
        OP_TOLERANCE,
    ));

    let mut results = Vec::with_capacity(cases.len() + 1);
    for (k, (name, inputs, build, tolerance)) in cases.into_iter().enumerate() {
        let h = if affine.contains(&k) { AFFINE_STEP } else { STEP };
        let report = grad_check(build, &inputs, h, coords(k as u64))?;
        results.push(CheckResult {
            name: name.to_string(),
            report,
            tolerance,
        });
    }
    results.push(unet_check(seed, 20)?);
    Ok(results)
}

/// Toy U-Net on a sparse random input, checked at `count` random
/// parameter coordinates of a Gaussian projection of its
/// output. Differencing the output image before projecting keeps
/// cancellation error below the tolerance even for small gradients.
pub fn unet_check(seed: u64, count: usize) -> Result<CheckResult> {
    let cfg = UNetConfig::toy();
    let net = UNet::<f64>::new(cfg.clone(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x554e4554);
    let [c, h, w] = cfg.in_shape();
    let input: Vec<f64> = (0..c * h * w)
        .map(|_| {
            if rng.gen_bool(0.15) {
                rng.gen_range(0.3..1.0)
            } else {
                0.0
            }
        })
        .collect();
    let input = Tensor::from_vec(&[c, h, w], input)?;
    let n: usize = cfg.out_shape().iter().product();
    let projection = Tensor::from_vec(
        &cfg.out_shape(),
        (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
    )?;
    let report = grad_check_projected(
        |g, v| {
            let x = g.leaf(input.clone());
            net.build(g, v, x)
        },
        net.params(),
        &projection,
        STEP,
        Coords::Random {
            count,
            seed: seed ^ 0x434f4f52,
        },
    )?;
    Ok(CheckResult {
        name: "toy U-Net".to_string(),
        report,
        tolerance: NETWORK_TOLERANCE,
    })
}
