//! Saliency of one output pixel: exact on a 1x1 linear model, and checked
//! against finite differences on a freshly initialized toy U-Net.

use radarsr::autodiff::Tensor;
use radarsr::model::{saliency, saliency_fd_check, PointwiseLinear, UNet, UNetConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> radarsr::Result<()> {
    let weights = [0.5, -1.25, 2.0];
    let linear = PointwiseLinear::new(&weights, 0.1, 4, 4)?;
    let s = saliency(&linear, &Tensor::full(&[3, 4, 4], 0.3), (1, 2))?;
    let at_pixel: Vec<f64> = (0..3).map(|c| s.data()[(c * 4 + 1) * 4 + 2]).collect();
    println!("linear model weights {weights:?} -> saliency at the pixel {at_pixel:?}");
    println!(
        "total saliency elsewhere: {}",
        s.data().iter().sum::<f64>() - at_pixel.iter().sum::<f64>()
    );

    let cfg = UNetConfig::toy();
    let net = UNet::<f64>::new(cfg.clone(), 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n: usize = cfg.in_shape().iter().product();
    let input = Tensor::from_vec(
        &cfg.in_shape(),
        (0..n)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    rng.gen_range(0.0..1.0)
                } else {
                    0.0
                }
            })
            .collect(),
    )?;
    let [_, h, w] = cfg.out_shape();
    for pixel in [(h / 2, w / 2), (5, 10), (h - 3, w - 20)] {
        let s = saliency(&net, &input, pixel)?;
        let per_channel: Vec<String> = s
            .data()
            .chunks(cfg.n_range * cfg.n_az_in)
            .map(|c| format!("{:.2e}", c.iter().sum::<f64>()))
            .collect();
        let (err, checked) = saliency_fd_check(&net, &input, pixel, 20, 1e-4, 0)?;
        println!(
            "pixel {pixel:?}: mass per channel [{}], FD rel err {err:.1e} over {checked} coords",
            per_channel.join(", ")
        );
    }
    Ok(())
}
