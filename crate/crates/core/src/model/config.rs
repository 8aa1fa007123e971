use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Shape of the asymmetric U-Net.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct UNetConfig {
    pub levels: usize,
    /// Output channels of each encoder level, shallowest first.
    pub encoder_filters: Vec<usize>,
    /// Past frames stacked with the current one; the input has `history + 1` channels.
    pub history: usize,
    pub n_range: usize,
    pub n_az_in: usize,
    pub az_upsample_factor: usize,
}

impl Default for UNetConfig {
    fn default() -> Self {
        Self::toy()
    }
}

impl UNetConfig {
    /// Desk-scale network: 5 x 64 x 16 in, 1 x 64 x 128 out.
    pub fn toy() -> Self {
        Self {
            levels: 3,
            encoder_filters: vec![8, 16, 32],
            history: 4,
            n_range: 64,
            n_az_in: 16,
            az_upsample_factor: 8,
        }
    }

    /// Full-size network: 41 x 256 x 64 in, 1 x 256 x 512 out.
    pub fn full() -> Self {
        Self {
            levels: 5,
            encoder_filters: vec![64, 128, 256, 512, 512],
            history: 40,
            n_range: 256,
            n_az_in: 64,
            az_upsample_factor: 8,
        }
    }

    pub fn in_channels(&self) -> usize {
        self.history + 1
    }

    pub fn n_az_out(&self) -> usize {
        self.n_az_in * self.az_upsample_factor
    }

    pub fn in_shape(&self) -> [usize; 3] {
        [self.in_channels(), self.n_range, self.n_az_in]
    }

    pub fn out_shape(&self) -> [usize; 3] {
        [1, self.n_range, self.n_az_out()]
    }

    /// Number of azimuth-only (1, 2) upsampling stages.
    pub fn asymmetric_stages(&self) -> usize {
        self.az_upsample_factor.trailing_zeros() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::Config("unet: levels must be >= 1".into()));
        }
        if self.encoder_filters.len() != self.levels {
            return Err(Error::Config(format!(
                "unet: {} encoder filter counts for {} levels",
                self.encoder_filters.len(),
                self.levels
            )));
        }
        if self.encoder_filters.contains(&0) {
            return Err(Error::Config("unet: filter counts must be positive".into()));
        }
        if !self.az_upsample_factor.is_power_of_two() {
            return Err(Error::Config(format!(
                "unet: az_upsample_factor {} is not a power of two",
                self.az_upsample_factor
            )));
        }
        let div = 1usize << (self.levels - 1);
        for (name, n) in [("n_range", self.n_range), ("n_az_in", self.n_az_in)] {
            if n == 0 || n % div != 0 {
                return Err(Error::Config(format!(
                    "unet: {name}={n} must be a positive multiple of {div} for {} levels",
                    self.levels
                )));
            }
        }
        Ok(())
    }
}

/// One convolution of the network, in parameter order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvSpec {
    pub name: String,
    pub c_in: usize,
    pub c_out: usize,
    pub kernel: usize,
}

impl ConvSpec {
    fn new(name: String, c_in: usize, c_out: usize, kernel: usize) -> Self {
        Self {
            name,
            c_in,
            c_out,
            kernel,
        }
    }

    pub fn weight_shape(&self) -> [usize; 4] {
        [self.c_out, self.c_in, self.kernel, self.kernel]
    }

    pub fn fan_in(&self) -> usize {
        self.c_in * self.kernel * self.kernel
    }

    pub fn n_params(&self) -> usize {
        self.c_out * self.fan_in() + self.c_out
    }
}

/// Every convolution in forward order: encoder, decoder, azimuth stages, head.
pub fn conv_specs(cfg: &UNetConfig) -> Vec<ConvSpec> {
    let f = &cfg.encoder_filters;
    let mut specs = Vec::new();
    let mut ch = cfg.in_channels();
    for (i, &fi) in f.iter().enumerate() {
        specs.push(ConvSpec::new(format!("enc{i}.conv1"), ch, fi, 3));
        specs.push(ConvSpec::new(format!("enc{i}.conv2"), fi, fi, 3));
        ch = fi;
    }
    for i in (0..cfg.levels - 1).rev() {
        specs.push(ConvSpec::new(format!("dec{i}.conv1"), f[i] + ch, f[i], 3));
        specs.push(ConvSpec::new(format!("dec{i}.conv2"), f[i], f[i], 3));
        ch = f[i];
    }
    for j in 0..cfg.asymmetric_stages() {
        specs.push(ConvSpec::new(format!("asym{j}.conv"), ch, ch, 3));
    }
    specs.push(ConvSpec::new("head".into(), ch, 1, 1));
    specs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_shapes() {
        let cfg = UNetConfig::toy();
        cfg.validate().unwrap();
        assert_eq!(cfg.in_shape(), [5, 64, 16]);
        assert_eq!(cfg.out_shape(), [1, 64, 128]);
        assert_eq!(cfg.asymmetric_stages(), 3);
    }

    #[test]
    fn full_encoder_filters_sum_to_1472() {
        let cfg = UNetConfig::full();
        cfg.validate().unwrap();
        assert_eq!(cfg.encoder_filters.iter().sum::<usize>(), 1472);
        assert_eq!(cfg.in_channels(), 41);
        assert_eq!(cfg.n_az_out(), 512);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = UNetConfig::toy();
        c.az_upsample_factor = 6;
        assert!(c.validate().is_err());
        let mut c = UNetConfig::toy();
        c.n_az_in = 10;
        assert!(c.validate().is_err());
        let mut c = UNetConfig::toy();
        c.encoder_filters.pop();
        assert!(c.validate().is_err());
    }

    #[test]
    fn factor_one_has_no_azimuth_stages() {
        let mut c = UNetConfig::toy();
        c.az_upsample_factor = 1;
        c.validate().unwrap();
        assert!(conv_specs(&c).iter().all(|s| !s.name.starts_with("asym")));
    }
}
