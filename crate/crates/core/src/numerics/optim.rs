use crate::error::{Error, Result};
use crate::numerics::params::ParamStore;
use crate::numerics::tensor::{Real, Tensor};

pub const DEFAULT_LR: f64 = 5e-5;
pub const DEFAULT_DECAY: f64 = 0.9;
pub const DEFAULT_EPS: f64 = 1e-8;

/// RMSProp without momentum.
///
/// `acc ← decay·acc + (1−decay)·g²`, then `p ← p − lr·g / (√acc + ε)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RmsProp<T = f32> {
    pub lr: T,
    pub decay: T,
    pub eps: T,
    /// Running mean squares, keyed by parameter name.
    accumulators: Vec<(String, Vec<T>)>,
}

impl<T: Real> RmsProp<T> {
    pub fn new(lr: T, decay: T, eps: T) -> Self {
        Self {
            lr,
            decay,
            eps,
            accumulators: Vec::new(),
        }
    }

    pub fn accumulators(&self) -> &[(String, Vec<T>)] {
        &self.accumulators
    }

    pub fn set_accumulator(&mut self, name: &str, values: Vec<T>) {
        match self.accumulators.iter_mut().find(|(n, _)| n == name) {
            Some((_, acc)) => *acc = values,
            None => self.accumulators.push((name.to_string(), values)),
        }
    }

    /// Applies one update for the given `(store index, gradient)` pairs.
    ///
    /// All gradients are checked before any parameter changes.
    pub fn step(&mut self, store: &mut ParamStore<T>, grads: &[(usize, Tensor<T>)]) -> Result<()> {
        for (index, g) in grads {
            let entry = store.entry(*index);
            if g.shape() != entry.tensor.shape() {
                return Err(Error::dim(format!(
                    "gradient for `{}` has shape {:?}, parameter {:?}",
                    entry.name,
                    g.shape(),
                    entry.tensor.shape()
                )));
            }
            if !g.is_finite() {
                return Err(Error::NonFiniteGradient(entry.name.clone()));
            }
        }
        let one = T::one();
        for (index, g) in grads {
            let name = store.entry(*index).name.clone();
            let pos = match self.accumulators.iter().position(|(n, _)| *n == name) {
                Some(p) => p,
                None => {
                    self.accumulators.push((name, vec![T::zero(); g.len()]));
                    self.accumulators.len() - 1
                }
            };
            let acc = &mut self.accumulators[pos].1;
            let p = store.tensor_mut(*index).data_mut();
            for ((pv, a), &gv) in p.iter_mut().zip(acc.iter_mut()).zip(g.data()) {
                *a = self.decay * *a + (one - self.decay) * gv * gv;
                *pv = *pv - self.lr * gv / (a.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

impl Default for RmsProp<f32> {
    fn default() -> Self {
        Self::new(DEFAULT_LR as f32, DEFAULT_DECAY as f32, DEFAULT_EPS as f32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::params::ParamKind;

    fn store(v: f64) -> ParamStore<f64> {
        let mut s = ParamStore::new();
        s.push("p", Tensor::full(vec![2], v), ParamKind::Trainable);
        s
    }

    #[test]
    fn zero_gradient_is_identity() {
        let mut s = store(1.5);
        let before = s.clone();
        let mut opt = RmsProp::new(0.1, 0.9, 1e-8);
        opt.step(&mut s, &[(0, Tensor::zeros(vec![2]))]).unwrap();
        assert_eq!(s, before);
        assert!(opt.accumulators()[0].1.iter().all(|&a| a >= 0.0));
    }

    #[test]
    fn first_step_matches_hand_update() {
        let mut s = store(0.0);
        let mut opt = RmsProp::new(0.1, 0.9, 0.0);
        opt.step(&mut s, &[(0, Tensor::full(vec![2], 1.0))]).unwrap();
        // acc = 0.1, Δp = −0.1/√0.1
        let expected = -0.1 / 0.1f64.sqrt();
        assert!((s.tensor(0).data()[0] - expected).abs() < 1e-12);
        assert!((expected + 0.316_227_766).abs() < 1e-9);
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut s = store(0.0);
        let mut opt = RmsProp::new(0.1, 0.9, 1e-8);
        let g = Tensor::new(vec![2], vec![1.0, f64::NAN]).unwrap();
        match opt.step(&mut s, &[(0, g)]) {
            Err(Error::NonFiniteGradient(name)) => assert_eq!(name, "p"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(s.tensor(0).data(), &[0.0, 0.0]);
    }

    #[test]
    fn default_learning_rate() {
        assert_eq!(RmsProp::default().lr, 5e-5f32);
    }
}
