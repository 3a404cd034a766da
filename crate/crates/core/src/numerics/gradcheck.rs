//! Central finite differences against the reverse-mode gradient.

use crate::error::Result;
use crate::numerics::graph::{Graph, NodeId};
use crate::numerics::tensor::Tensor;

/// Relative errors below this magnitude of both gradients are measured absolutely.
pub const GRAD_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(GRAD_FLOOR);
    (analytic - numeric).abs() / denom
}

/// Max relative error over every coordinate of `x`.
pub fn grad_check<F>(f: F, x: &Tensor<f64>, eps: f64) -> Result<f64>
where
    F: Fn(&mut Graph<f64>, NodeId) -> Result<NodeId>,
{
    let coords: Vec<usize> = (0..x.len()).collect();
    grad_check_at(f, x, eps, &coords)
}

/// Max relative error over the listed coordinates of `x`.
pub fn grad_check_at<F>(f: F, x: &Tensor<f64>, eps: f64, coords: &[usize]) -> Result<f64>
where
    F: Fn(&mut Graph<f64>, NodeId) -> Result<NodeId>,
{
    let mut g = Graph::new();
    let leaf = g.param(x.clone());
    let out = f(&mut g, leaf)?;
    let analytic = g.backward(out)?.get(leaf);

    let eval = |probe: Tensor<f64>| -> Result<f64> {
        let mut g = Graph::new();
        let leaf = g.param(probe);
        let out = f(&mut g, leaf)?;
        Ok(g.value(out).data()[0])
    };

    let mut worst = 0.0f64;
    for &i in coords {
        let mut plus = x.clone();
        plus.data_mut()[i] += eps;
        let mut minus = x.clone();
        minus.data_mut()[i] -= eps;
        let numeric = (eval(plus)? - eval(minus)?) / (2.0 * eps);
        worst = worst.max(relative_error(analytic.data()[i], numeric));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f64> {
        Tensor::from_fn(shape.to_vec(), |_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn sum_of_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random(&[5, 3], &mut rng);
        let err = grad_check(
            |g, x| {
                let sq = g.mul(x, x)?;
                Ok(g.sum(sq))
            },
            &x,
            1e-5,
        )
        .unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn dense_leaky_relu_stack() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random(&[4, 6], &mut rng);
        let w1 = random(&[6, 5], &mut rng);
        let b1 = random(&[5], &mut rng);
        let w2 = random(&[5, 1], &mut rng);
        let b2 = random(&[1], &mut rng);
        let net = |g: &mut Graph<f64>, w: NodeId| -> Result<NodeId> {
            let x = g.constant(x.clone());
            let b1 = g.constant(b1.clone());
            let h = g.dense(x, w, b1)?;
            let h = g.leaky_relu(h, 0.2);
            let w2 = g.constant(w2.clone());
            let b2 = g.constant(b2.clone());
            let y = g.dense(h, w2, b2)?;
            let y = g.sigmoid(y);
            Ok(g.mean(y))
        };
        let err = grad_check(net, &w1, 1e-6).unwrap();
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        let x = Tensor::<f64>::full(vec![3], 2.0);
        let mut g = Graph::new();
        let leaf = g.param(x.clone());
        let c = g.constant(Tensor::scalar(7.0));
        let zero = g.scale(leaf, 0.0);
        let s = g.sum(zero);
        let out = g.add(s, c).unwrap();
        assert!(g.backward(out).unwrap().get(leaf).data().iter().all(|&v| v == 0.0));
        let err = grad_check(
            |g, x| {
                let z = g.scale(x, 0.0);
                Ok(g.sum(z))
            },
            &x,
            1e-5,
        )
        .unwrap();
        assert_eq!(err, 0.0);
    }
}
