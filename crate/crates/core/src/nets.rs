//! Encoder, decoder and the label-conditioned discriminators.
//!
//! All three are multilayer perceptrons over flattened images. Hidden layers
//! are `dense → batch norm → leaky ReLU`; the encoder ends in a linear head of
//! `layout.total_len()` units, the decoder in a sigmoid over the pixels, and
//! each discriminator in a single logit. There is one discriminator per
//! attribute; each sees the image plus that attribute's label bit.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::genome::{crossbreed, swap_piece, ChildQuad, GenomeLayout, LatentCode};
use crate::numerics::{
    BatchStats, Binding, BnMode, Graph, NodeId, ParamKind, ParamStore, Real, Tensor, BN_EPS,
    BN_MOMENTUM, LEAKY_SLOPE,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GanMode {
    /// Sigmoid output and log losses.
    Probability,
    /// Unbounded critic output with weight clipping.
    Critic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Train,
    Eval,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArchConfig {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub enc_hidden: Vec<usize>,
    pub dec_hidden: Vec<usize>,
    pub disc_hidden: Vec<usize>,
    pub leaky_slope: f64,
    pub disc_batch_norm: bool,
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self {
            channels: 1,
            height: 16,
            width: 16,
            enc_hidden: vec![256, 128],
            dec_hidden: vec![128, 256],
            disc_hidden: vec![128],
            leaky_slope: LEAKY_SLOPE,
            disc_batch_norm: false,
        }
    }
}

impl ArchConfig {
    pub fn pixels(&self) -> usize {
        self.channels * self.height * self.width
    }
}

/// Images as `[batch, channels, height, width]` with values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBatch<T = f32> {
    tensor: Tensor<T>,
}

impl<T: Real> ImageBatch<T> {
    pub fn new(tensor: Tensor<T>) -> Result<Self> {
        if tensor.shape().len() != 4 {
            return Err(Error::dim(format!(
                "image batch must be 4-D, got {:?}",
                tensor.shape()
            )));
        }
        if let Some(v) = tensor
            .data()
            .iter()
            .find(|v| !v.is_finite() || **v < T::zero() || **v > T::one())
        {
            return Err(Error::Domain(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(Self { tensor })
    }

    /// Stacks flat images of identical size.
    pub fn from_images<I: AsRef<[T]>>(images: &[I], c: usize, h: usize, w: usize) -> Result<Self> {
        let flat = Tensor::from_rows(images)?;
        if flat.cols() != c * h * w && !images.is_empty() {
            return Err(Error::dim(format!(
                "images of {} values for {c}x{h}x{w}",
                flat.cols()
            )));
        }
        Self::new(flat.reshape(vec![images.len(), c, h, w])?)
    }

    pub fn batch(&self) -> usize {
        self.tensor.shape()[0]
    }

    pub fn image_shape(&self) -> (usize, usize, usize) {
        let s = self.tensor.shape();
        (s[1], s[2], s[3])
    }

    pub fn image(&self, k: usize) -> &[T] {
        let (c, h, w) = self.image_shape();
        let n = c * h * w;
        &self.tensor.data()[k * n..(k + 1) * n]
    }

    pub fn tensor(&self) -> &Tensor<T> {
        &self.tensor
    }

    /// `[batch, pixels]` view for dense layers.
    pub fn flat(&self) -> Tensor<T> {
        let (c, h, w) = self.image_shape();
        self.tensor
            .clone()
            .reshape(vec![self.batch(), c * h * w])
            .expect("same length")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Head {
    Linear,
    Sigmoid,
}

#[derive(Clone, Debug)]
struct MlpSpec {
    prefix: String,
    dims: Vec<usize>,
    batch_norm: bool,
    head: Head,
}

/// Running-statistic update produced by a train-mode batch-norm layer.
#[derive(Clone, Debug)]
pub struct StatUpdate<T> {
    mean_index: usize,
    var_index: usize,
    stats: BatchStats<T>,
}

/// Decoded children of a batch of pairs, as graph nodes.
#[derive(Clone, Copy, Debug)]
pub struct ChildNodes {
    pub enc_a: NodeId,
    pub enc_b: NodeId,
    pub a1: NodeId,
    pub b1: NodeId,
    pub a2: NodeId,
    pub b2: NodeId,
}

/// Decoded children of a batch of pairs, as values.
#[derive(Clone, Debug)]
pub struct Children {
    pub a1: ImageBatch,
    pub b1: ImageBatch,
    pub a2: ImageBatch,
    pub b2: ImageBatch,
    pub quads: Vec<ChildQuad>,
}

#[derive(Debug, Default)]
struct Counters {
    encoded: AtomicUsize,
    decoded: AtomicUsize,
}

/// Encoder, decoder and per-attribute discriminators with their parameters.
#[derive(Debug)]
pub struct Model<T = f32> {
    arch: ArchConfig,
    layout: Arc<GenomeLayout>,
    params: ParamStore<T>,
    encoder: MlpSpec,
    decoder: MlpSpec,
    discs: Vec<MlpSpec>,
    counters: Counters,
}

impl<T: Real> Clone for Model<T> {
    fn clone(&self) -> Self {
        Self {
            arch: self.arch.clone(),
            layout: Arc::clone(&self.layout),
            params: self.params.clone(),
            encoder: self.encoder.clone(),
            decoder: self.decoder.clone(),
            discs: self.discs.clone(),
            counters: Counters::default(),
        }
    }
}

fn specs(arch: &ArchConfig, layout: &GenomeLayout) -> (MlpSpec, MlpSpec, Vec<MlpSpec>) {
    let px = arch.pixels();
    let mut enc = vec![px];
    enc.extend(&arch.enc_hidden);
    enc.push(layout.total_len());
    let mut dec = vec![layout.total_len()];
    dec.extend(&arch.dec_hidden);
    dec.push(px);
    let encoder = MlpSpec {
        prefix: "enc".into(),
        dims: enc,
        batch_norm: true,
        head: Head::Linear,
    };
    let decoder = MlpSpec {
        prefix: "dec".into(),
        dims: dec,
        batch_norm: true,
        head: Head::Sigmoid,
    };
    let discs = (0..layout.n())
        .map(|s| {
            let mut dims = vec![px + 1];
            dims.extend(&arch.disc_hidden);
            dims.push(1);
            MlpSpec {
                prefix: format!("disc{s}"),
                dims,
                batch_norm: arch.disc_batch_norm,
                head: Head::Linear,
            }
        })
        .collect();
    (encoder, decoder, discs)
}

impl<T: Real> Model<T> {
    /// Glorot-uniform weights, zero biases, unit batch-norm scale.
    pub fn new(arch: ArchConfig, layout: GenomeLayout, rng: &mut impl Rng) -> Self {
        let (encoder, decoder, discs) = specs(&arch, &layout);
        let mut params = ParamStore::new();
        for spec in std::iter::once(&encoder).chain([&decoder]).chain(&discs) {
            let layers = spec.dims.len() - 1;
            for l in 0..layers {
                let (fan_in, fan_out) = (spec.dims[l], spec.dims[l + 1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let w = Tensor::from_fn(vec![fan_in, fan_out], |_| {
                    T::lit(rng.random_range(-limit..limit))
                });
                let p = format!("{}.{l}", spec.prefix);
                params.push(format!("{p}.w"), w, ParamKind::Trainable);
                params.push(format!("{p}.b"), Tensor::zeros(vec![fan_out]), ParamKind::Trainable);
                if spec.batch_norm && l + 1 < layers {
                    params.push(format!("{p}.gamma"), Tensor::full(vec![fan_out], T::one()), ParamKind::Trainable);
                    params.push(format!("{p}.beta"), Tensor::zeros(vec![fan_out]), ParamKind::Trainable);
                    params.push(format!("{p}.mean"), Tensor::zeros(vec![fan_out]), ParamKind::Buffer);
                    params.push(format!("{p}.var"), Tensor::full(vec![fan_out], T::one()), ParamKind::Buffer);
                }
            }
        }
        Self {
            arch,
            layout: Arc::new(layout),
            params,
            encoder,
            decoder,
            discs,
            counters: Counters::default(),
        }
    }

    /// Rebuilds a model around an existing parameter store, checking names and shapes.
    pub fn from_params(arch: ArchConfig, layout: GenomeLayout, params: ParamStore<T>) -> Result<Self> {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        let template = Model::<T>::new(arch, layout, &mut rng);
        if template.params.len() != params.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} parameters, found {}",
                template.params.len(),
                params.len()
            )));
        }
        for (want, got) in template.params.entries().iter().zip(params.entries()) {
            if want.name != got.name || want.tensor.shape() != got.tensor.shape() {
                return Err(Error::Checkpoint(format!(
                    "parameter `{}` {:?} does not match `{}` {:?}",
                    got.name,
                    got.tensor.shape(),
                    want.name,
                    want.tensor.shape()
                )));
            }
        }
        Ok(Self { params, ..template })
    }

    pub fn arch(&self) -> &ArchConfig {
        &self.arch
    }

    pub fn layout(&self) -> &Arc<GenomeLayout> {
        &self.layout
    }

    pub fn params(&self) -> &ParamStore<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.params
    }

    /// Images encoded and decoded since construction.
    pub fn call_counts(&self) -> (usize, usize) {
        (
            self.counters.encoded.load(Ordering::Relaxed),
            self.counters.decoded.load(Ordering::Relaxed),
        )
    }

    pub fn is_generator_param(name: &str) -> bool {
        name.starts_with("enc.") || name.starts_with("dec.")
    }

    pub fn is_disc_param(name: &str) -> bool {
        name.starts_with("disc")
    }

    pub fn disc_prefix(attr: usize) -> String {
        format!("disc{attr}.")
    }

    fn idx(&self, name: &str) -> usize {
        self.params
            .index_of(name)
            .unwrap_or_else(|| panic!("missing parameter {name}"))
    }

    fn mlp(
        &self,
        spec: &MlpSpec,
        g: &mut Graph<T>,
        bound: &Binding,
        mut x: NodeId,
        phase: Phase,
        stats: &mut Vec<StatUpdate<T>>,
    ) -> Result<NodeId> {
        let layers = spec.dims.len() - 1;
        let eps = T::lit(BN_EPS);
        for l in 0..layers {
            let p = format!("{}.{l}", spec.prefix);
            let w = bound.id(self.idx(&format!("{p}.w")));
            let b = bound.id(self.idx(&format!("{p}.b")));
            x = g.dense(x, w, b)?;
            if l + 1 == layers {
                break;
            }
            if spec.batch_norm {
                let gamma = bound.id(self.idx(&format!("{p}.gamma")));
                let beta = bound.id(self.idx(&format!("{p}.beta")));
                let mean_index = self.idx(&format!("{p}.mean"));
                let var_index = self.idx(&format!("{p}.var"));
                let mode = match phase {
                    Phase::Train => BnMode::Train { eps },
                    Phase::Eval => BnMode::Eval {
                        mean: self.params.tensor(mean_index).data(),
                        var: self.params.tensor(var_index).data(),
                        eps,
                    },
                };
                let (y, batch) = g.batch_norm(x, gamma, beta, mode)?;
                if let Some(batch) = batch {
                    stats.push(StatUpdate {
                        mean_index,
                        var_index,
                        stats: batch,
                    });
                }
                x = y;
            }
            x = g.leaky_relu(x, T::lit(self.arch.leaky_slope));
        }
        Ok(match spec.head {
            Head::Linear => x,
            Head::Sigmoid => g.sigmoid(x),
        })
    }

    /// `[batch, pixels] -> [batch, total_len]`.
    pub fn encode_graph(
        &self,
        g: &mut Graph<T>,
        bound: &Binding,
        images: NodeId,
        phase: Phase,
        stats: &mut Vec<StatUpdate<T>>,
    ) -> Result<NodeId> {
        let v = g.value(images);
        if v.cols() != self.arch.pixels() {
            return Err(Error::dim(format!(
                "encoder expects {} pixels per image, got {}",
                self.arch.pixels(),
                v.cols()
            )));
        }
        self.counters.encoded.fetch_add(v.rows(), Ordering::Relaxed);
        self.mlp(&self.encoder, g, bound, images, phase, stats)
    }

    /// `[batch, total_len] -> [batch, pixels]` in `(0, 1)`.
    pub fn decode_graph(
        &self,
        g: &mut Graph<T>,
        bound: &Binding,
        codes: NodeId,
        phase: Phase,
        stats: &mut Vec<StatUpdate<T>>,
    ) -> Result<NodeId> {
        let v = g.value(codes);
        if v.cols() != self.layout.total_len() {
            return Err(Error::dim(format!(
                "decoder expects codes of length {}, got {}",
                self.layout.total_len(),
                v.cols()
            )));
        }
        self.counters.decoded.fetch_add(v.rows(), Ordering::Relaxed);
        self.mlp(&self.decoder, g, bound, codes, phase, stats)
    }

    /// Logits of attribute `attr`'s discriminator, `[batch, 1]`.
    #[allow(clippy::too_many_arguments)]
    pub fn disc_logits_graph(
        &self,
        g: &mut Graph<T>,
        bound: &Binding,
        attr: usize,
        images: NodeId,
        bit: bool,
        phase: Phase,
        stats: &mut Vec<StatUpdate<T>>,
    ) -> Result<NodeId> {
        self.layout.check_index(attr)?;
        let rows = g.value(images).rows();
        let b = if bit { T::one() } else { T::zero() };
        let bits = g.constant(Tensor::full(vec![rows, 1], b));
        let input = g.concat_cols(images, bits)?;
        self.mlp(&self.discs[attr], g, bound, input, phase, stats)
    }

    /// Encodes `[A; B]` once, forms the four child latents with masks, and
    /// decodes `[A1; B1; A2; B2]` once.
    ///
    /// With `annihilate == false` the recessive piece is kept and swapped instead
    /// of zeroed, which admits the trivial solution.
    #[allow(clippy::too_many_arguments)]
    pub fn children_graph(
        &self,
        g: &mut Graph<T>,
        bound: &Binding,
        images_a: NodeId,
        images_b: NodeId,
        attr: usize,
        annihilate: bool,
        phase: Phase,
        stats: &mut Vec<StatUpdate<T>>,
    ) -> Result<ChildNodes> {
        let batch = g.value(images_a).rows();
        if g.value(images_b).rows() != batch {
            return Err(Error::dim("A and B batches differ in size"));
        }
        let both = g.concat_rows(&[images_a, images_b])?;
        let enc = self.encode_graph(g, bound, both, phase, stats)?;
        let enc_a = g.slice_rows(enc, 0, batch)?;
        let enc_b = g.slice_rows(enc, batch, batch)?;

        let to_t = |m: Vec<f32>| m.into_iter().map(|v| T::lit(v as f64)).collect::<Vec<T>>();
        let keep = to_t(self.layout.keep_mask(attr)?);
        let piece = to_t(self.layout.piece_mask(attr)?);

        let a_keep = g.mul_const(enc_a, keep.clone())?;
        let b_keep = g.mul_const(enc_b, keep)?;
        let a_piece = g.mul_const(enc_a, piece.clone())?;
        let b2 = g.add(b_keep, a_piece)?;
        let (b1, a2) = if annihilate {
            (b_keep, a_keep)
        } else {
            let b_piece = g.mul_const(enc_b, piece)?;
            (enc_b, g.add(a_keep, b_piece)?)
        };

        let codes = g.concat_rows(&[enc_a, b1, a2, b2])?;
        let dec = self.decode_graph(g, bound, codes, phase, stats)?;
        Ok(ChildNodes {
            enc_a,
            enc_b,
            a1: g.slice_rows(dec, 0, batch)?,
            b1: g.slice_rows(dec, batch, batch)?,
            a2: g.slice_rows(dec, 2 * batch, batch)?,
            b2: g.slice_rows(dec, 3 * batch, batch)?,
        })
    }

    /// Folds train-mode batch statistics into the running averages.
    pub fn apply_stats(&mut self, updates: &[StatUpdate<T>]) {
        let m = T::lit(BN_MOMENTUM);
        let one = T::one();
        for u in updates {
            for (r, &b) in self.params.tensor_mut(u.mean_index).data_mut().iter_mut().zip(&u.stats.mean) {
                *r = m * *r + (one - m) * b;
            }
            for (r, &b) in self.params.tensor_mut(u.var_index).data_mut().iter_mut().zip(&u.stats.var) {
                *r = m * *r + (one - m) * b;
            }
        }
    }

    fn check_images(&self, x: &ImageBatch<T>) -> Result<()> {
        let want = (self.arch.channels, self.arch.height, self.arch.width);
        if x.image_shape() != want {
            return Err(Error::dim(format!(
                "images are {:?}, model expects {want:?}",
                x.image_shape()
            )));
        }
        Ok(())
    }
}

impl Model<f32> {
    /// Eval-mode encoding, one code per image.
    pub fn encode(&self, x: &ImageBatch) -> Result<Vec<LatentCode>> {
        self.check_images(x)?;
        let mut g = Graph::new();
        let bound = self.params.bind(&mut g, |_| false);
        let input = g.constant(x.flat());
        let out = self.encode_graph(&mut g, &bound, input, Phase::Eval, &mut Vec::new())?;
        let v = g.value(out);
        (0..v.rows())
            .map(|r| LatentCode::new(Arc::clone(&self.layout), v.row(r).to_vec()))
            .collect()
    }

    /// Eval-mode decoding.
    pub fn decode(&self, codes: &[LatentCode]) -> Result<ImageBatch> {
        for c in codes {
            if **c.layout() != *self.layout {
                return Err(Error::Layout(format!(
                    "code layout `{}` differs from model layout `{}`",
                    c.layout(),
                    self.layout
                )));
            }
        }
        let rows: Vec<&[f32]> = codes.iter().map(|c| c.values()).collect();
        let flat = Tensor::from_rows(&rows)?.reshape(vec![codes.len(), self.layout.total_len()])?;
        let mut g = Graph::new();
        let bound = self.params.bind(&mut g, |_| false);
        let input = g.constant(flat);
        let out = self.decode_graph(&mut g, &bound, input, Phase::Eval, &mut Vec::new())?;
        let a = &self.arch;
        ImageBatch::new(g.value(out).clone().reshape(vec![codes.len(), a.channels, a.height, a.width])?)
    }

    /// Discriminator output per image: a probability in `(0, 1)` or a raw critic score.
    pub fn discriminate(&self, x: &ImageBatch, attr: usize, bit: bool, mode: GanMode) -> Result<Vec<f64>> {
        self.check_images(x)?;
        let mut g = Graph::new();
        let bound = self.params.bind(&mut g, |_| false);
        let input = g.constant(x.flat());
        let logits =
            self.disc_logits_graph(&mut g, &bound, attr, input, bit, Phase::Eval, &mut Vec::new())?;
        let out = match mode {
            GanMode::Probability => g.sigmoid(logits),
            GanMode::Critic => logits,
        };
        Ok(g.value(out).data().iter().map(|&v| v as f64).collect())
    }

    /// Eval-mode children of dominant `a` and recessive `b` at attribute `attr`.
    ///
    /// Runs the encoder on `a` and `b` and the decoder on the four child latents.
    pub fn forward_children(&self, a: &ImageBatch, b: &ImageBatch, attr: usize) -> Result<Children> {
        self.forward_children_with(a, b, attr, true)
    }

    /// As [`Model::forward_children`]; without annihilation the recessive piece
    /// is swapped rather than zeroed, matching training with the ablation.
    pub fn forward_children_with(
        &self,
        a: &ImageBatch,
        b: &ImageBatch,
        attr: usize,
        annihilate: bool,
    ) -> Result<Children> {
        self.layout.check_index(attr)?;
        if a.batch() != b.batch() {
            return Err(Error::dim("A and B batches differ in size"));
        }
        let enc_a = self.encode(a)?;
        let enc_b = self.encode(b)?;
        let quads = enc_a
            .iter()
            .zip(&enc_b)
            .map(|(ea, eb)| {
                if annihilate {
                    crossbreed(ea, eb, attr)
                } else {
                    let (a2, b2) = swap_piece(ea, eb, attr)?;
                    Ok(ChildQuad {
                        a1: ea.clone(),
                        b1: eb.clone(),
                        a2,
                        b2,
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut all = Vec::with_capacity(4 * quads.len());
        all.extend(quads.iter().map(|q| q.a1.clone()));
        all.extend(quads.iter().map(|q| q.b1.clone()));
        all.extend(quads.iter().map(|q| q.a2.clone()));
        all.extend(quads.iter().map(|q| q.b2.clone()));
        let decoded = self.decode(&all)?;
        let k = quads.len();
        let (c, h, w) = decoded.image_shape();
        let part = |p: usize| -> Result<ImageBatch> {
            let imgs: Vec<&[f32]> = (p * k..(p + 1) * k).map(|j| decoded.image(j)).collect();
            ImageBatch::from_images(&imgs, c, h, w)
        };
        Ok(Children {
            a1: part(0)?,
            b1: part(1)?,
            a2: part(2)?,
            b2: part(3)?,
            quads,
        })
    }
}
