use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use super::kernels::{self, ConvDims};
use super::loss::{LossConfig, BCE_CLAMP};
use super::tensor::{Real, Tensor};
use crate::{Error, Result};

/// Handle to a node in a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op<T> {
    Leaf,
    Conv2d {
        x: Var,
        w: Var,
        b: Var,
        dims: ConvDims,
        cols: Vec<T>,
    },
    Linear {
        x: Var,
        w: Var,
        b: Var,
    },
    Relu(Var),
    Sigmoid(Var),
    MaxPool {
        x: Var,
        argmax: Vec<usize>,
    },
    Upsample {
        x: Var,
        factor: (usize, usize),
    },
    Concat(Var, Var),
    Add(Var, Var),
    Scale(Var, T),
    WeightedSum {
        x: Var,
        weights: Tensor<T>,
    },
    Bce {
        o: Var,
        target: Tensor<T>,
    },
    Dice {
        o: Var,
        target: Tensor<T>,
        eps: T,
    },
}

#[derive(Debug)]
struct Node<T> {
    op: Op<T>,
    value: Tensor<T>,
}

/// Tape of operations recorded during a forward pass.
///
/// Nodes are appended in evaluation order, so index order is a topological
/// order and the backward sweep visits each node once in reverse.
#[derive(Debug, Default)]
pub struct Graph<T> {
    nodes: Vec<Node<T>>,
}

/// Gradients of one backward sweep, indexed by [`Var`].
#[derive(Debug)]
pub struct Grads<T> {
    grads: Vec<Option<Tensor<T>>>,
}

impl<T: Real> Grads<T> {
    pub fn get(&self, v: Var) -> Option<&Tensor<T>> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient of `v`, or zeros of `shape` if nothing flowed into it.
    pub fn get_or_zeros(&self, v: Var, shape: &[usize]) -> Tensor<T> {
        self.get(v).cloned().unwrap_or_else(|| Tensor::zeros(shape))
    }

    pub fn take(&mut self, v: Var) -> Option<Tensor<T>> {
        self.grads.get_mut(v.0).and_then(Option::take)
    }
}

fn check_finite<T: Real>(name: &str, t: &Tensor<T>) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{name} produced a non-finite value")))
    }
}

impl<T: Real> Graph<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op: Op<T>, value: Tensor<T>) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    /// Register an input or parameter.
    pub fn leaf(&mut self, value: Tensor<T>) -> Var {
        self.push(Op::Leaf, value)
    }

    /// "Same"-padded 2D cross-correlation plus bias.
    /// `x: [C_in, H, W]`, `w: [C_out, C_in, kh, kw]`, `b: [C_out]`.
    pub fn conv2d(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let (c_in, h, wd) = self.value(x).chw()?;
        let ws = self.value(w).shape().to_vec();
        let [c_out, wc_in, kh, kw] = ws[..] else {
            return Err(Error::Shape(format!("conv weight must be 4-D, got {ws:?}")));
        };
        if wc_in != c_in {
            return Err(Error::Shape(format!(
                "conv weight expects {wc_in} input channels, input has {c_in}"
            )));
        }
        if kh % 2 == 0 || kw % 2 == 0 {
            return Err(Error::Shape(format!("conv kernel {kh}x{kw} must be odd")));
        }
        if self.value(b).shape() != [c_out] {
            return Err(Error::Shape(format!(
                "conv bias shape {:?} != [{c_out}]",
                self.value(b).shape()
            )));
        }
        let dims = ConvDims {
            c_in,
            c_out,
            h,
            w: wd,
            kh,
            kw,
        };
        let (out, cols) =
            kernels::conv2d_forward(self.value(x).data(), self.value(w).data(), self.value(b).data(), &dims);
        let value = Tensor::from_vec(&[c_out, h, wd], out)?;
        check_finite("conv2d", &value)?;
        Ok(self.push(Op::Conv2d { x, w, b, dims, cols }, value))
    }

    /// Dense layer `y = W x + b` with `x: [n_in]`, `W: [n_out, n_in]`.
    pub fn linear(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let n_in = self.value(x).len();
        let ws = self.value(w).shape().to_vec();
        let [n_out, w_in] = ws[..] else {
            return Err(Error::Shape(format!("linear weight must be 2-D, got {ws:?}")));
        };
        if w_in != n_in || self.value(b).len() != n_out {
            return Err(Error::Shape(format!(
                "linear {ws:?} incompatible with input {n_in} / bias {}",
                self.value(b).len()
            )));
        }
        let mut out = self.value(b).data().to_vec();
        T::gemm(
            n_out,
            n_in,
            1,
            (self.value(w).data(), n_in as isize, 1),
            (self.value(x).data(), 1, 1),
            T::one(),
            (&mut out, 1, 1),
        );
        let value = Tensor::from_vec(&[n_out], out)?;
        check_finite("linear", &value)?;
        Ok(self.push(Op::Linear { x, w, b }, value))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let value = self.value(x).map(|v| if v > T::zero() { v } else { T::zero() });
        self.push(Op::Relu(x), value)
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let value = self.value(x).map(|v| {
            if v >= T::zero() {
                T::one() / (T::one() + (-v).exp())
            } else {
                let e = v.exp();
                e / (T::one() + e)
            }
        });
        self.push(Op::Sigmoid(x), value)
    }

    /// Non-overlapping max pooling with a `(ph, pw)` window.
    pub fn maxpool2d(&mut self, x: Var, window: (usize, usize)) -> Result<Var> {
        let (c, h, w) = self.value(x).chw()?;
        let (ph, pw) = window;
        if ph == 0 || pw == 0 || h % ph != 0 || w % pw != 0 {
            return Err(Error::Shape(format!(
                "{h}x{w} is not divisible by pooling window {ph}x{pw}"
            )));
        }
        let (out, argmax) = kernels::maxpool_forward(self.value(x).data(), (c, h, w), window);
        let value = Tensor::from_vec(&[c, h / ph, w / pw], out)?;
        Ok(self.push(Op::MaxPool { x, argmax }, value))
    }

    /// Nearest-neighbour upsampling by `(fh, fw)`.
    pub fn upsample_nearest(&mut self, x: Var, factor: (usize, usize)) -> Result<Var> {
        let (c, h, w) = self.value(x).chw()?;
        if factor.0 == 0 || factor.1 == 0 {
            return Err(Error::Shape("upsample factor must be nonzero".into()));
        }
        let out = kernels::upsample_forward(self.value(x).data(), (c, h, w), factor);
        let value = Tensor::from_vec(&[c, h * factor.0, w * factor.1], out)?;
        Ok(self.push(Op::Upsample { x, factor }, value))
    }

    /// Stack `a` then `b` along the channel axis.
    pub fn concat_channels(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ca, ha, wa) = self.value(a).chw()?;
        let (cb, hb, wb) = self.value(b).chw()?;
        if (ha, wa) != (hb, wb) {
            return Err(Error::Shape(format!("cannot concat {ha}x{wa} with {hb}x{wb}")));
        }
        let mut data = self.value(a).data().to_vec();
        data.extend_from_slice(self.value(b).data());
        let value = Tensor::from_vec(&[ca + cb, ha, wa], data)?;
        Ok(self.push(Op::Concat(a, b), value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::Shape(format!(
                "cannot add {:?} and {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        let mut value = self.value(a).clone();
        value.add_assign(self.value(b));
        Ok(self.push(Op::Add(a, b), value))
    }

    pub fn scale(&mut self, x: Var, s: T) -> Var {
        let value = self.value(x).map(|v| v * s);
        self.push(Op::Scale(x, s), value)
    }

    /// Scalar `sum(weights * x)`.
    pub fn weighted_sum(&mut self, x: Var, weights: &Tensor<T>) -> Result<Var> {
        self.check_target(x, weights)?;
        let value = Tensor::scalar(self.value(x).dot(weights));
        Ok(self.push(
            Op::WeightedSum {
                x,
                weights: weights.clone(),
            },
            value,
        ))
    }

    /// Mean binary cross-entropy of probabilities `o` against `target`,
    /// with `o` clamped to `[1e-7, 1 - 1e-7]`.
    pub fn bce_loss(&mut self, o: Var, target: &Tensor<T>) -> Result<Var> {
        self.check_target(o, target)?;
        let (lo, hi) = (T::lit(BCE_CLAMP), T::one() - T::lit(BCE_CLAMP));
        let n = T::from_usize(target.len()).expect("count");
        let total: T = self
            .value(o)
            .data()
            .iter()
            .zip(target.data())
            .map(|(&o, &g)| {
                let o = o.max(lo).min(hi);
                g * o.ln() + (T::one() - g) * (T::one() - o).ln()
            })
            .sum();
        let value = Tensor::scalar(-total / n);
        check_finite("bce_loss", &value)?;
        Ok(self.push(
            Op::Bce {
                o,
                target: target.clone(),
            },
            value,
        ))
    }

    /// `1 - (2 sum(o g) + eps) / (sum(o^2) + sum(g^2) + eps)`.
    pub fn dice_loss(&mut self, o: Var, target: &Tensor<T>, eps: T) -> Result<Var> {
        self.check_target(o, target)?;
        let (num, den) = dice_terms(self.value(o).data(), target.data(), eps);
        let value = Tensor::scalar(T::one() - num / den);
        check_finite("dice_loss", &value)?;
        Ok(self.push(
            Op::Dice {
                o,
                target: target.clone(),
                eps,
            },
            value,
        ))
    }

    /// `bce_weight * BCE + dice_weight * Dice`.
    pub fn combined_loss(&mut self, o: Var, target: &Tensor<T>, cfg: &LossConfig) -> Result<Var> {
        cfg.validate()?;
        let bce = self.bce_loss(o, target)?;
        let dice = self.dice_loss(o, target, T::lit(cfg.dice_epsilon))?;
        let bce = self.scale(bce, T::lit(cfg.bce_weight));
        let dice = self.scale(dice, T::lit(cfg.dice_weight));
        self.add(bce, dice)
    }

    fn check_target(&self, o: Var, target: &Tensor<T>) -> Result<()> {
        if self.value(o).shape() != target.shape() {
            return Err(Error::Shape(format!(
                "prediction {:?} vs target {:?}",
                self.value(o).shape(),
                target.shape()
            )));
        }
        Ok(())
    }

    /// Backward sweep from a scalar `root`.
    pub fn backward(&self, root: Var) -> Result<Grads<T>> {
        if self.value(root).len() != 1 {
            return Err(Error::Shape(format!(
                "backward needs a scalar root, got {:?}",
                self.value(root).shape()
            )));
        }
        let seed = Tensor::full(self.value(root).shape(), T::one());
        self.backward_with(root, seed)
    }

    /// Backward sweep from `root` with an explicit upstream gradient.
    pub fn backward_with(&self, root: Var, seed: Tensor<T>) -> Result<Grads<T>> {
        if seed.shape() != self.value(root).shape() {
            return Err(Error::Shape(format!(
                "seed {:?} does not match root {:?}",
                seed.shape(),
                self.value(root).shape()
            )));
        }
        let mut grads: Vec<Option<Tensor<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root.0] = Some(seed);
        for idx in (0..=root.0).rev() {
            let Some(dy) = grads[idx].take() else {
                continue;
            };
            check_finite("backward", &dy)?;
            self.propagate(idx, &dy, &mut grads)?;
            grads[idx] = Some(dy);
        }
        Ok(Grads { grads })
    }

    fn propagate(&self, idx: usize, dy: &Tensor<T>, grads: &mut [Option<Tensor<T>>]) -> Result<()> {
        let node = &self.nodes[idx];
        let mut acc = |v: Var, g: Tensor<T>| match &mut grads[v.0] {
            Some(existing) => existing.add_assign(&g),
            slot @ None => *slot = Some(g),
        };
        match &node.op {
            Op::Leaf => {}
            Op::Conv2d { x, w, b, dims, cols } => {
                let (dx, dw, db) =
                    kernels::conv2d_backward(self.value(*x).data(), self.value(*w).data(), cols, dy.data(), dims);
                acc(*x, Tensor::from_vec(self.value(*x).shape(), dx)?);
                acc(*w, Tensor::from_vec(self.value(*w).shape(), dw)?);
                acc(*b, Tensor::from_vec(self.value(*b).shape(), db)?);
            }
            Op::Linear { x, w, b } => {
                let xs = self.value(*x);
                let ws = self.value(*w);
                let (n_out, n_in) = (ws.shape()[0], ws.shape()[1]);
                let mut dw = vec![T::zero(); n_out * n_in];
                for o in 0..n_out {
                    for i in 0..n_in {
                        dw[o * n_in + i] = dy.data()[o] * xs.data()[i];
                    }
                }
                let mut dx = vec![T::zero(); n_in];
                T::gemm(
                    n_in,
                    n_out,
                    1,
                    (ws.data(), 1, n_in as isize),
                    (dy.data(), 1, 1),
                    T::zero(),
                    (&mut dx, 1, 1),
                );
                acc(*x, Tensor::from_vec(xs.shape(), dx)?);
                acc(*w, Tensor::from_vec(ws.shape(), dw)?);
                acc(*b, dy.clone());
            }
            Op::Relu(x) => {
                let xs = self.value(*x);
                let data = dy
                    .data()
                    .iter()
                    .zip(xs.data())
                    .map(|(&g, &v)| if v > T::zero() { g } else { T::zero() })
                    .collect();
                acc(*x, Tensor::from_vec(xs.shape(), data)?);
            }
            Op::Sigmoid(x) => {
                let data = dy
                    .data()
                    .iter()
                    .zip(node.value.data())
                    .map(|(&g, &s)| g * s * (T::one() - s))
                    .collect();
                acc(*x, Tensor::from_vec(self.value(*x).shape(), data)?);
            }
            Op::MaxPool { x, argmax } => {
                let mut dx = Tensor::zeros(self.value(*x).shape());
                let d = dx.data_mut();
                for (&g, &i) in dy.data().iter().zip(argmax) {
                    d[i] = d[i] + g;
                }
                acc(*x, dx);
            }
            Op::Upsample { x, factor } => {
                let chw = self.value(*x).chw()?;
                let dx = kernels::upsample_backward(dy.data(), chw, *factor);
                acc(*x, Tensor::from_vec(self.value(*x).shape(), dx)?);
            }
            Op::Concat(a, b) => {
                let na = self.value(*a).len();
                let (da, db) = dy.data().split_at(na);
                acc(*a, Tensor::from_vec(self.value(*a).shape(), da.to_vec())?);
                acc(*b, Tensor::from_vec(self.value(*b).shape(), db.to_vec())?);
            }
            Op::Add(a, b) => {
                acc(*a, dy.clone());
                acc(*b, dy.clone());
            }
            Op::Scale(x, s) => {
                acc(*x, dy.map(|g| g * *s));
            }
            Op::WeightedSum { x, weights } => {
                let g0 = dy.item();
                acc(*x, weights.map(|w| w * g0));
            }
            Op::Bce { o, target } => {
                let g0 = dy.item();
                let (lo, hi) = (T::lit(BCE_CLAMP), T::one() - T::lit(BCE_CLAMP));
                let n = T::from_usize(target.len()).expect("count");
                let data = self
                    .value(*o)
                    .data()
                    .iter()
                    .zip(target.data())
                    .map(|(&o, &g)| {
                        if o < lo || o > hi {
                            T::zero()
                        } else {
                            g0 * ((T::one() - g) / (T::one() - o) - g / o) / n
                        }
                    })
                    .collect();
                acc(*o, Tensor::from_vec(target.shape(), data)?);
            }
            Op::Dice { o, target, eps } => {
                let g0 = dy.item();
                let os = self.value(*o);
                let (num, den) = dice_terms(os.data(), target.data(), *eps);
                let two = T::lit(2.0);
                let data = os
                    .data()
                    .iter()
                    .zip(target.data())
                    .map(|(&o, &g)| -g0 * (two * g * den - num * two * o) / (den * den))
                    .collect();
                acc(*o, Tensor::from_vec(target.shape(), data)?);
            }
        }
        Ok(())
    }

    /// Hash of every piecewise-linear branch decision (ReLU activity and
    /// max-pool winners). Two evaluations with equal signatures lie on the
    /// same smooth piece of the function.
    pub fn kink_signature(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for node in &self.nodes {
            match &node.op {
                Op::Relu(x) => {
                    for v in self.value(*x).data() {
                        (*v > T::zero()).hash(&mut h);
                    }
                }
                Op::MaxPool { argmax, .. } => argmax.hash(&mut h),
                Op::Bce { o, .. } => {
                    let (lo, hi) = (T::lit(BCE_CLAMP), T::one() - T::lit(BCE_CLAMP));
                    for v in self.value(*o).data() {
                        (*v < lo || *v > hi).hash(&mut h);
                    }
                }
                _ => {}
            }
        }
        h.finish()
    }
}

fn dice_terms<T: Real>(o: &[T], g: &[T], eps: T) -> (T, T) {
    let two = T::lit(2.0);
    let (mut og, mut oo, mut gg) = (T::zero(), T::zero(), T::zero());
    for (&o, &g) in o.iter().zip(g) {
        og = og + o * g;
        oo = oo + o * o;
        gg = gg + g * g;
    }
    (two * og + eps, oo + gg + eps)
}
