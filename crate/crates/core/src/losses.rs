//! Reconstruction, generator and discriminator losses.
//!
//! The plain functions take discriminator outputs and evaluate the losses
//! directly. The `*_term` functions build the same quantities on a graph from
//! discriminator logits, using `softplus` so that `−log σ(l)` never overflows.

use crate::error::{Error, Result};
use crate::nets::{GanMode, ImageBatch};
use crate::numerics::{Graph, NodeId, Real};

/// Probabilities are clamped to `[PROB_FLOOR, 1 − PROB_FLOOR]` before taking logs.
pub const PROB_FLOOR: f64 = 1e-7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ClampPolicy {
    #[default]
    Clamp,
    /// Out-of-domain probabilities are errors.
    Strict,
}

/// Which label bit the generator loss scores each crossbreed under.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GenConditioning {
    /// A₂ under bit 0 and B₂ under bit 1, the classes they imitate (consistent with L_D1/L_D0).
    #[default]
    Matched,
    /// A₂ under bit 1 and B₂ under bit 0, as the generator loss is printed.
    Literal,
}

impl GenConditioning {
    /// `(bit for A₂, bit for B₂)`.
    pub fn bits(self) -> (bool, bool) {
        match self {
            GenConditioning::Matched => (false, true),
            GenConditioning::Literal => (true, false),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossReport {
    pub l_reconstruct: f64,
    pub l_gan: f64,
    pub l_g: f64,
    pub l_d1: f64,
    pub l_d0: f64,
    pub l_d: f64,
}

impl LossReport {
    pub fn new(l_reconstruct: f64, l_gan: f64, lambda_gan: f64, l_d1: f64, l_d0: f64) -> Self {
        Self {
            l_reconstruct,
            l_gan,
            l_g: l_reconstruct + lambda_gan * l_gan,
            l_d1,
            l_d0,
            l_d: l_d1 + l_d0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscLosses {
    pub l_d1: f64,
    pub l_d0: f64,
    pub l_d: f64,
}

fn mean_l1(x: &ImageBatch, y: &ImageBatch) -> Result<f64> {
    if x.tensor().shape() != y.tensor().shape() {
        return Err(Error::dim(format!(
            "reconstruction of {:?} against {:?}",
            x.tensor().shape(),
            y.tensor().shape()
        )));
    }
    let n = x.tensor().len().max(1) as f64;
    Ok(x.tensor()
        .data()
        .iter()
        .zip(y.tensor().data())
        .map(|(&p, &q)| (p as f64 - q as f64).abs())
        .sum::<f64>()
        / n)
}

/// `mean|A − A₁| + mean|B − B₁|`, averaged over pixels and batch.
pub fn reconstruction_loss(a: &ImageBatch, a1: &ImageBatch, b: &ImageBatch, b1: &ImageBatch) -> Result<f64> {
    Ok(mean_l1(a, a1)? + mean_l1(b, b1)?)
}

fn neg_log(p: f64, policy: ClampPolicy) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        match policy {
            ClampPolicy::Strict => {
                return Err(Error::Domain(format!("probability {p} outside (0, 1]")))
            }
            ClampPolicy::Clamp if p.is_nan() => {
                return Err(Error::Domain("probability is NaN".into()))
            }
            ClampPolicy::Clamp => {}
        }
    }
    let p = match policy {
        ClampPolicy::Clamp => p.clamp(PROB_FLOOR, 1.0),
        ClampPolicy::Strict => p,
    };
    Ok(-p.ln())
}

fn mean_of(values: &[f64], f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::dim("loss over an empty batch"));
    }
    let mut total = 0.0;
    for &v in values {
        total += f(v)?;
    }
    Ok(total / values.len() as f64)
}

fn plain_mean(values: &[f64]) -> Result<f64> {
    mean_of(values, Ok)
}

/// Generator adversarial loss over the crossbreeds' discriminator outputs.
///
/// Probability mode: `−E[log d_a2] − E[log d_b2]`. Critic mode: `−E[d_a2] − E[d_b2]`.
pub fn generator_gan_loss(d_a2: &[f64], d_b2: &[f64], mode: GanMode, policy: ClampPolicy) -> Result<f64> {
    match mode {
        GanMode::Probability => Ok(mean_of(d_a2, |p| neg_log(p, policy))? + mean_of(d_b2, |p| neg_log(p, policy))?),
        GanMode::Critic => Ok(-plain_mean(d_a2)? - plain_mean(d_b2)?),
    }
}

/// `L_D1` tells A from B₂ under bit 1, `L_D0` tells B from A₂ under bit 0.
pub fn discriminator_loss(
    d_real_a: &[f64],
    d_fake_b2: &[f64],
    d_real_b: &[f64],
    d_fake_a2: &[f64],
    mode: GanMode,
    policy: ClampPolicy,
) -> Result<DiscLosses> {
    let (l_d1, l_d0) = match mode {
        GanMode::Probability => {
            let real = |v: &[f64]| mean_of(v, |p| neg_log(p, policy));
            let fake = |v: &[f64]| {
                mean_of(v, |p| {
                    if policy == ClampPolicy::Strict && !(0.0..1.0).contains(&p) {
                        return Err(Error::Domain(format!("probability {p} outside [0, 1)")));
                    }
                    neg_log(1.0 - p, policy)
                })
            };
            (real(d_real_a)? + fake(d_fake_b2)?, real(d_real_b)? + fake(d_fake_a2)?)
        }
        GanMode::Critic => (
            plain_mean(d_fake_b2)? - plain_mean(d_real_a)?,
            plain_mean(d_fake_a2)? - plain_mean(d_real_b)?,
        ),
    };
    Ok(DiscLosses {
        l_d1,
        l_d0,
        l_d: l_d1 + l_d0,
    })
}

/// Mean absolute difference of two equally shaped nodes.
pub fn l1_term<T: Real>(g: &mut Graph<T>, x: NodeId, y: NodeId) -> Result<NodeId> {
    let d = g.sub(x, y)?;
    let a = g.abs(d);
    Ok(g.mean(a))
}

/// Loss for logits that should score as real: `−E[log σ(l)]`, or `−E[l]` for a critic.
pub fn real_term<T: Real>(g: &mut Graph<T>, logits: NodeId, mode: GanMode) -> NodeId {
    match mode {
        GanMode::Probability => {
            let neg = g.scale(logits, -T::one());
            let sp = g.softplus(neg);
            g.mean(sp)
        }
        GanMode::Critic => {
            let m = g.mean(logits);
            g.scale(m, -T::one())
        }
    }
}

/// Loss for logits that should score as fake: `−E[log(1 − σ(l))]`, or `E[l]` for a critic.
pub fn fake_term<T: Real>(g: &mut Graph<T>, logits: NodeId, mode: GanMode) -> NodeId {
    match mode {
        GanMode::Probability => {
            let sp = g.softplus(logits);
            g.mean(sp)
        }
        GanMode::Critic => g.mean(logits),
    }
}
