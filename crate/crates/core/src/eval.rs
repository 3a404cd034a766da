//! Oracle-based evaluation of attribute swaps on synthetic data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{nuisance_features, oracle_attr, AttrDataset};
use crate::error::Result;
use crate::nets::Model;
use crate::sampler::IterativeSampler;

#[derive(Clone, Debug, PartialEq)]
pub struct SwapEval {
    pub attribute: usize,
    pub pairs: usize,
    /// Fraction of pairs where the oracle sees attribute `i` absent in A₂ and present in B₂.
    pub swap_success: f64,
    /// Mean per-pixel `|A₁ − A|` and `|B₁ − B|`.
    pub recon_l1: f64,
    /// Fraction of pairs whose A₂ is closer in identity features to B than to A.
    pub identity_transfer: f64,
}

fn dist(x: [f32; 2], y: [f32; 2]) -> f32 {
    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()
}

fn mean_abs(x: &[f32], y: &[f32]) -> f64 {
    x.iter().zip(y).map(|(p, q)| (p - q).abs() as f64).sum::<f64>() / x.len() as f64
}

/// Draws `pairs` useful pairs per attribute from `data` and scores the children.
///
/// Attributes with an empty side are skipped.
pub fn evaluate_swaps(
    model: &Model,
    data: &AttrDataset,
    pairs: usize,
    seed: u64,
    annihilate: bool,
) -> Result<Vec<SwapEval>> {
    let labels = data.labels();
    let sampler = IterativeSampler::new(data.n(), &labels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for s in 0..data.n() {
        let Ok(census) = data.census() else { continue };
        let (ones, zeros) = census.sides(s)?;
        if ones == 0 || zeros == 0 || pairs == 0 {
            continue;
        }
        let drawn: Vec<_> = (0..pairs).map(|_| sampler.draw_for(s, &mut rng)).collect();
        let a_idx: Vec<usize> = drawn.iter().map(|p| p.a).collect();
        let b_idx: Vec<usize> = drawn.iter().map(|p| p.b).collect();
        let a = data.batch(&a_idx)?;
        let b = data.batch(&b_idx)?;
        let ch = model.forward_children_with(&a, &b, s, annihilate)?;
        let (mut ok, mut transfer, mut recon) = (0usize, 0usize, 0.0f64);
        for k in 0..pairs {
            if !oracle_attr(ch.a2.image(k), s)? && oracle_attr(ch.b2.image(k), s)? {
                ok += 1;
            }
            let fa = nuisance_features(a.image(k))?;
            let fb = nuisance_features(b.image(k))?;
            let f2 = nuisance_features(ch.a2.image(k))?;
            if dist(f2, fa) > dist(f2, fb) {
                transfer += 1;
            }
            recon += 0.5 * (mean_abs(ch.a1.image(k), a.image(k)) + mean_abs(ch.b1.image(k), b.image(k)));
        }
        out.push(SwapEval {
            attribute: s,
            pairs,
            swap_success: ok as f64 / pairs as f64,
            recon_l1: recon / pairs as f64,
            identity_transfer: transfer as f64 / pairs as f64,
        });
    }
    Ok(out)
}
