use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::{record, Network};
use crate::autodiff::{relative_error, Real, Tensor};
use crate::{Error, Result};

fn check_pixel(out_shape: [usize; 3], pixel: (usize, usize)) -> Result<()> {
    if pixel.0 >= out_shape[1] || pixel.1 >= out_shape[2] {
        return Err(Error::Shape(format!(
            "pixel {pixel:?} outside output {}x{}",
            out_shape[1], out_shape[2]
        )));
    }
    Ok(())
}

/// Signed `d output[pixel] / d input`, shaped like the input.
pub fn input_gradient<T: Real, N: Network<T>>(net: &N, input: &Tensor<T>, pixel: (usize, usize)) -> Result<Tensor<T>> {
    check_pixel(net.out_shape(), pixel)?;
    let (g, _, x, out) = record(net, input)?;
    let [c, h, w] = net.out_shape();
    let mut seed = Tensor::zeros(&[c, h, w]);
    seed.data_mut()[pixel.0 * w + pixel.1] = T::one();
    let grads = g.backward_with(out, seed)?;
    Ok(grads.get_or_zeros(x, input.shape()))
}

/// `|d output[pixel] / d input|` for every input pixel of every channel.
pub fn saliency<T: Real, N: Network<T>>(net: &N, input: &Tensor<T>, pixel: (usize, usize)) -> Result<Tensor<T>> {
    Ok(input_gradient(net, input, pixel)?.map(|v| v.abs()))
}

/// Compare saliency against central differences of the output pixel at
/// `count` input coordinates inside the pixel's receptive field. Returns
/// the largest relative error and the number of coordinates compared.
pub fn saliency_fd_check<N: Network<f64>>(
    net: &N,
    input: &Tensor<f64>,
    pixel: (usize, usize),
    count: usize,
    h: f64,
    seed: u64,
) -> Result<(f64, usize)> {
    let analytic = saliency(net, input, pixel)?;
    let w_out = net.out_shape()[2];
    let probe = |x: &Tensor<f64>| -> Result<(f64, u64)> {
        let (g, _, _, out) = record(net, x)?;
        Ok((g.value(out).data()[pixel.0 * w_out + pixel.1], g.kink_signature()))
    };
    let (_, base_sig) = probe(input)?;
    let mut coords: Vec<usize> = (0..input.len()).filter(|&i| analytic.data()[i] > 0.0).collect();
    if coords.is_empty() {
        coords = (0..input.len()).collect();
    }
    coords.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut work = input.clone();
    let (mut worst, mut checked) = (0.0f64, 0);
    for i in coords {
        if checked == count {
            break;
        }
        let orig = work.data()[i];
        work.data_mut()[i] = orig + h;
        let (plus, sp) = probe(&work)?;
        work.data_mut()[i] = orig - h;
        let (minus, sm) = probe(&work)?;
        work.data_mut()[i] = orig;
        if sp != base_sig || sm != base_sig {
            continue;
        }
        let numeric = ((plus - minus) / (2.0 * h)).abs();
        worst = worst.max(relative_error(analytic.data()[i], numeric));
        checked += 1;
    }
    Ok((worst, checked))
}
