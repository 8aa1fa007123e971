use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{conv_specs, ConvSpec, UNetConfig};
use super::stack::FrameStack;
use crate::autodiff::{Graph, Real, Tensor, Var};
use crate::dsp::{AzimuthGrid, ImageKind, PolarImage};
use crate::{Error, Result};

/// A differentiable image-to-image model with a flat parameter list.
pub trait Network<T: Real>: Sync {
    fn in_shape(&self) -> [usize; 3];
    fn out_shape(&self) -> [usize; 3];
    fn params(&self) -> &[Tensor<T>];
    fn params_mut(&mut self) -> &mut [Tensor<T>];

    /// Record the forward pass on `g`; `params` are leaves in `params()` order.
    fn build(&self, g: &mut Graph<T>, params: &[Var], input: Var) -> Result<Var>;

    fn check_input(&self, input: &Tensor<T>) -> Result<()> {
        if input.shape() != self.in_shape() {
            return Err(Error::Shape(format!(
                "network expects input {:?}, got {:?}",
                self.in_shape(),
                input.shape()
            )));
        }
        Ok(())
    }

    fn n_params(&self) -> usize {
        self.params().iter().map(Tensor::len).sum()
    }

    fn forward_tensor(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        let (g, _, _, out) = record(self, input)?;
        Ok(g.value(out).clone())
    }
}

/// Build a fresh graph with parameters and input as leaves.
pub(crate) fn record<T: Real, N: Network<T> + ?Sized>(
    net: &N,
    input: &Tensor<T>,
) -> Result<(Graph<T>, Vec<Var>, Var, Var)> {
    net.check_input(input)?;
    let mut g = Graph::new();
    let params: Vec<Var> = net.params().iter().map(|p| g.leaf(p.clone())).collect();
    let x = g.leaf(input.clone());
    let out = net.build(&mut g, &params, x)?;
    Ok((g, params, x, out))
}

/// Occupancy probability image for the current frame of `stack`.
pub fn predict<N: Network<f32>>(net: &N, stack: &FrameStack, max_range: f64) -> Result<PolarImage> {
    let out = net.forward_tensor(&stack.to_tensor())?;
    let [_, r, a] = net.out_shape();
    PolarImage::from_data(
        r,
        a,
        out.into_data(),
        max_range,
        ImageKind::Probability,
        AzimuthGrid::Uniform,
    )
}

/// Asymmetric U-Net: a symmetric encoder/decoder with skip connections
/// followed by azimuth-only upsampling stages and a 1x1 sigmoid head.
#[derive(Debug, Clone, PartialEq)]
pub struct UNet<T> {
    config: UNetConfig,
    specs: Vec<ConvSpec>,
    /// Weight then bias for each entry of `specs`.
    params: Vec<Tensor<T>>,
}

impl<T: Real> UNet<T> {
    /// He-uniform weights (bound `sqrt(6 / fan_in)`) and zero biases, drawn
    /// in f64 so the same seed gives the same network at any precision.
    pub fn new(config: UNetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let specs = conv_specs(&config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(2 * specs.len());
        for s in &specs {
            let bound = (6.0 / s.fan_in() as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound);
            let n = s.weight_shape().iter().product();
            let w = (0..n).map(|_| T::lit(dist.sample(&mut rng))).collect();
            params.push(Tensor::from_vec(&s.weight_shape(), w)?);
            params.push(Tensor::zeros(&[s.c_out]));
        }
        Ok(Self { config, specs, params })
    }

    pub fn from_params(config: UNetConfig, params: Vec<Tensor<T>>) -> Result<Self> {
        config.validate()?;
        let specs = conv_specs(&config);
        if params.len() != 2 * specs.len() {
            return Err(Error::Shape(format!(
                "unet needs {} parameter tensors, got {}",
                2 * specs.len(),
                params.len()
            )));
        }
        for (s, pair) in specs.iter().zip(params.chunks(2)) {
            if pair[0].shape() != s.weight_shape() || pair[1].shape() != [s.c_out] {
                return Err(Error::Shape(format!(
                    "{}: expected weight {:?} and bias [{}], got {:?} and {:?}",
                    s.name,
                    s.weight_shape(),
                    s.c_out,
                    pair[0].shape(),
                    pair[1].shape()
                )));
            }
            if !pair[0].is_finite() || !pair[1].is_finite() {
                return Err(Error::Numeric(format!("{}: non-finite parameters", s.name)));
            }
        }
        Ok(Self { config, specs, params })
    }

    pub fn config(&self) -> &UNetConfig {
        &self.config
    }

    pub fn specs(&self) -> &[ConvSpec] {
        &self.specs
    }

    /// `(weight, bias)` of the named convolution.
    pub fn layer(&self, name: &str) -> Option<(&Tensor<T>, &Tensor<T>)> {
        let i = self.specs.iter().position(|s| s.name == name)?;
        Some((&self.params[2 * i], &self.params[2 * i + 1]))
    }

    pub fn cast<U: Real>(&self) -> UNet<U> {
        UNet {
            config: self.config.clone(),
            specs: self.specs.clone(),
            params: self.params.iter().map(Tensor::cast).collect(),
        }
    }
}

impl<T: Real> Network<T> for UNet<T> {
    fn in_shape(&self) -> [usize; 3] {
        self.config.in_shape()
    }

    fn out_shape(&self) -> [usize; 3] {
        self.config.out_shape()
    }

    fn params(&self) -> &[Tensor<T>] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.params
    }

    fn build(&self, g: &mut Graph<T>, params: &[Var], input: Var) -> Result<Var> {
        let mut layers = params.chunks(2);
        let mut conv = |g: &mut Graph<T>, x: Var| -> Result<Var> {
            let p = layers.next().expect("one parameter pair per conv spec");
            g.conv2d(x, p[0], p[1])
        };
        let levels = self.config.levels;
        let mut x = input;
        let mut skips = Vec::with_capacity(levels - 1);
        for i in 0..levels {
            let y = conv(g, x)?;
            x = g.relu(y);
            let y = conv(g, x)?;
            x = g.relu(y);
            if i + 1 < levels {
                skips.push(x);
                x = g.maxpool2d(x, (2, 2))?;
            }
        }
        while let Some(skip) = skips.pop() {
            let up = g.upsample_nearest(x, (2, 2))?;
            let cat = g.concat_channels(skip, up)?;
            let y = conv(g, cat)?;
            x = g.relu(y);
            let y = conv(g, x)?;
            x = g.relu(y);
        }
        for _ in 0..self.config.asymmetric_stages() {
            let up = g.upsample_nearest(x, (1, 2))?;
            let y = conv(g, up)?;
            x = g.relu(y);
        }
        let logits = conv(g, x)?;
        Ok(g.sigmoid(logits))
    }
}

/// One 1x1 convolution from the stacked channels to a single output,
/// with no activation. Its input gradient is the weight vector itself.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseLinear<T> {
    n_range: usize,
    n_azimuth: usize,
    params: Vec<Tensor<T>>,
}

impl<T: Real> PointwiseLinear<T> {
    pub fn new(weights: &[T], bias: T, n_range: usize, n_azimuth: usize) -> Result<Self> {
        let c = weights.len();
        Ok(Self {
            n_range,
            n_azimuth,
            params: vec![
                Tensor::from_vec(&[1, c, 1, 1], weights.to_vec())?,
                Tensor::from_vec(&[1], vec![bias])?,
            ],
        })
    }
}

impl<T: Real> Network<T> for PointwiseLinear<T> {
    fn in_shape(&self) -> [usize; 3] {
        [self.params[0].shape()[1], self.n_range, self.n_azimuth]
    }

    fn out_shape(&self) -> [usize; 3] {
        [1, self.n_range, self.n_azimuth]
    }

    fn params(&self) -> &[Tensor<T>] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.params
    }

    fn build(&self, g: &mut Graph<T>, params: &[Var], input: Var) -> Result<Var> {
        g.conv2d(input, params[0], params[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_parameter_count_matches_hand_tally() {
        // weights c_out * c_in * k * k plus c_out biases per conv:
        // enc0  5->8: 368,  8->8: 584
        // enc1  8->16: 1168, 16->16: 2320
        // enc2  16->32: 4640, 32->32: 9248
        // dec1  (16+32)->16: 6928, 16->16: 2320
        // dec0  (8+16)->8: 1736, 8->8: 584
        // asym  3 x (8->8): 1752
        // head  1x1 8->1: 9
        let expected = 368 + 584 + 1168 + 2320 + 4640 + 9248 + 6928 + 2320 + 1736 + 584 + 1752 + 9;
        let net = UNet::<f32>::new(UNetConfig::toy(), 0).unwrap();
        assert_eq!(net.n_params(), expected);
        assert_eq!(expected, 31657);
    }

    #[test]
    fn same_seed_same_params() {
        let a = UNet::<f32>::new(UNetConfig::toy(), 5).unwrap();
        let b = UNet::<f32>::new(UNetConfig::toy(), 5).unwrap();
        let c = UNet::<f32>::new(UNetConfig::toy(), 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn init_respects_fan_in_bound() {
        let net = UNet::<f64>::new(UNetConfig::toy(), 1).unwrap();
        for (s, pair) in net.specs().iter().zip(net.params().chunks(2)) {
            let bound = (6.0 / s.fan_in() as f64).sqrt();
            assert!(pair[0].data().iter().all(|w| w.abs() <= bound));
            assert!(pair[1].data().iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn output_shape_and_range() {
        let net = UNet::<f32>::new(UNetConfig::toy(), 2).unwrap();
        let stack = FrameStack::new(4, 64, 16);
        let out = predict(&net, &stack, 10.0).unwrap();
        assert_eq!(out.shape(), (64, 128));
        assert!(out.data.iter().all(|&v| v > 0.0 && v < 1.0));
        // zero input and zero biases: every relu output is 0, so the
        // head sees zeros and emits sigmoid(0) everywhere
        assert!(out.data.iter().all(|&v| v == 0.5));
        let again = predict(&net, &stack, 10.0).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn from_params_checks_shapes() {
        let net = UNet::<f32>::new(UNetConfig::toy(), 0).unwrap();
        let mut p = net.params().to_vec();
        assert!(UNet::from_params(UNetConfig::toy(), p.clone()).is_ok());
        p.swap(0, 2);
        assert!(UNet::from_params(UNetConfig::toy(), p).is_err());
    }

    #[test]
    fn layer_lookup() {
        let net = UNet::<f32>::new(UNetConfig::toy(), 0).unwrap();
        let (w, b) = net.layer("dec1.conv1").unwrap();
        assert_eq!(w.shape(), [16, 48, 3, 3]);
        assert_eq!(b.shape(), [16]);
        assert!(net.layer("nope").is_none());
    }

    #[test]
    fn rejects_wrong_input_shape() {
        let net = UNet::<f32>::new(UNetConfig::toy(), 0).unwrap();
        assert!(net.forward_tensor(&Tensor::zeros(&[5, 64, 8])).is_err());
    }
}
