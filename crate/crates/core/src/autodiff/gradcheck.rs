use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::{Graph, Var};
use super::tensor::Tensor;
use crate::{Error, Result};

/// Which input coordinates to perturb.
#[derive(Debug, Clone, Copy)]
pub enum Coords {
    All,
    /// `count` coordinates drawn without replacement across all inputs.
    Random {
        count: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates skipped because the perturbation crossed a kink
    /// (ReLU at zero, a max-pool tie flip, or the BCE clamp edge).
    pub excluded: usize,
    /// `(input, flat index, analytic, numeric)` of the worst coordinate.
    pub worst: Option<(usize, usize, f64, f64)>,
}

/// `|a - n| / max(|a|, |n|, 1e-12)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12)
}

fn evaluate<F>(f: &F, inputs: &[Tensor<f64>]) -> Result<(Tensor<f64>, u64)>
where
    F: Fn(&mut Graph<f64>, &[Var]) -> Result<Var>,
{
    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|t| g.leaf(t.clone())).collect();
    let root = f(&mut g, &vars)?;
    Ok((g.value(root).clone(), g.kink_signature()))
}

/// Compare reverse-mode gradients of the scalar built by `f` against
/// central differences with step `h`, in f64.
pub fn grad_check<F>(f: F, inputs: &[Tensor<f64>], h: f64, coords: Coords) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph<f64>, &[Var]) -> Result<Var>,
{
    check(f, inputs, h, coords, None)
}

/// [`grad_check`] of the scalar `sum(projection * y)` for a tensor-valued
/// `y = f(inputs)`. The central difference is taken elementwise on `y`
/// before projecting, which avoids cancellation in a large scalar sum.
pub fn grad_check_projected<F>(
    f: F,
    inputs: &[Tensor<f64>],
    projection: &Tensor<f64>,
    h: f64,
    coords: Coords,
) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph<f64>, &[Var]) -> Result<Var>,
{
    check(f, inputs, h, coords, Some(projection))
}

fn check<F>(
    f: F,
    inputs: &[Tensor<f64>],
    h: f64,
    coords: Coords,
    projection: Option<&Tensor<f64>>,
) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph<f64>, &[Var]) -> Result<Var>,
{
    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|t| g.leaf(t.clone())).collect();
    let root = f(&mut g, &vars)?;
    let base_sig = g.kink_signature();
    let grads = match projection {
        None => g.backward(root)?,
        Some(p) => {
            if p.shape() != g.value(root).shape() {
                return Err(Error::Shape(format!(
                    "projection {:?} does not match output {:?}",
                    p.shape(),
                    g.value(root).shape()
                )));
            }
            g.backward_with(root, p.clone())?
        }
    };
    let analytic: Vec<Tensor<f64>> = vars
        .iter()
        .zip(inputs)
        .map(|(&v, t)| grads.get_or_zeros(v, t.shape()))
        .collect();
    drop(g);

    let mut all: Vec<(usize, usize)> = inputs
        .iter()
        .enumerate()
        .flat_map(|(i, t)| (0..t.len()).map(move |j| (i, j)))
        .collect();
    let want = match coords {
        Coords::All => all.len(),
        Coords::Random { count, seed } => {
            all.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            count
        }
    };

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        excluded: 0,
        worst: None,
    };
    let mut work = inputs.to_vec();
    for (i, j) in all {
        if report.checked == want {
            break;
        }
        let orig = work[i].data()[j];
        work[i].data_mut()[j] = orig + h;
        let (plus, sig_p) = evaluate(&f, &work)?;
        work[i].data_mut()[j] = orig - h;
        let (minus, sig_m) = evaluate(&f, &work)?;
        work[i].data_mut()[j] = orig;
        if sig_p != base_sig || sig_m != base_sig {
            report.excluded += 1;
            continue;
        }
        let delta = match projection {
            None => plus.item() - minus.item(),
            Some(p) => plus
                .data()
                .iter()
                .zip(minus.data())
                .zip(p.data())
                .map(|((a, b), w)| (a - b) * w)
                .sum(),
        };
        let numeric = delta / (2.0 * h);
        let a = analytic[i].data()[j];
        let err = relative_error(a, numeric);
        if !err.is_finite() {
            return Err(Error::Numeric(format!("gradient check produced {err}")));
        }
        report.checked += 1;
        if report.worst.is_none() || err > report.max_rel_error {
            report.max_rel_error = err;
            report.worst = Some((i, j, a, numeric));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random(shape: &[usize], seed: u64, lo: f64, hi: f64) -> Tensor<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = shape.iter().product();
        Tensor::from_vec(shape, (0..n).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
    }

    #[test]
    fn linear_layer_is_exact() {
        let x = random(&[6], 1, -1.0, 1.0);
        let w = random(&[4, 6], 2, -1.0, 1.0);
        let b = random(&[4], 3, -1.0, 1.0);
        let proj = random(&[4], 4, -1.0, 1.0);
        let report = grad_check(
            |g, v| {
                let y = g.linear(v[0], v[1], v[2])?;
                g.weighted_sum(y, &proj)
            },
            &[x, w, b],
            1e-3,
            Coords::All,
        )
        .unwrap();
        assert_eq!(report.checked, 6 + 24 + 4);
        assert!(report.max_rel_error < 1e-9, "{report:?}");
    }

    #[test]
    fn relu_at_zero_is_excluded() {
        let x = Tensor::from_vec(&[4], vec![-0.5, 0.0, 0.7, 1.2]).unwrap();
        let proj = Tensor::from_vec(&[4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let report = grad_check(
            |g, v| {
                let y = g.relu(v[0]);
                g.weighted_sum(y, &proj)
            },
            &[x],
            1e-6,
            Coords::All,
        )
        .unwrap();
        assert_eq!(report.excluded, 1);
        assert_eq!(report.checked, 3);
        assert!(report.max_rel_error < 1e-9);
    }

    #[test]
    fn relative_error_hand_values() {
        assert!(relative_error(1.0, 1.1) > 0.05);
        assert_eq!(relative_error(0.0, 0.0), 0.0);
    }

    #[test]
    fn conv_input_map_is_adjoint() {
        // <A x, y> == <x, A^T y> for the linear map x -> conv(x, w, 0).
        let x = random(&[2, 5, 6], 10, -1.0, 1.0);
        let w = random(&[3, 2, 3, 3], 11, -1.0, 1.0);
        let y = random(&[3, 5, 6], 12, -1.0, 1.0);
        let mut g = Graph::new();
        let xv = g.leaf(x.clone());
        let wv = g.leaf(w);
        let bv = g.leaf(Tensor::zeros(&[3]));
        let out = g.conv2d(xv, wv, bv).unwrap();
        let lhs = g.value(out).dot(&y);
        let grads = g.backward_with(out, y).unwrap();
        let rhs = x.dot(grads.get(xv).unwrap());
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn upsample_and_concat_are_adjoint() {
        let x = random(&[2, 3, 4], 20, -1.0, 1.0);
        let z = random(&[1, 6, 8], 21, -1.0, 1.0);
        let y = random(&[3, 6, 8], 22, -1.0, 1.0);
        let mut g = Graph::new();
        let xv = g.leaf(x.clone());
        let zv = g.leaf(z.clone());
        let up = g.upsample_nearest(xv, (2, 2)).unwrap();
        let cat = g.concat_channels(up, zv).unwrap();
        let lhs = g.value(cat).dot(&y);
        let grads = g.backward_with(cat, y).unwrap();
        let rhs = x.dot(grads.get(xv).unwrap()) + z.dot(grads.get(zv).unwrap());
        assert!((lhs - rhs).abs() < 1e-10);
    }
}
