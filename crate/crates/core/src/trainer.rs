//! Alternating discriminator/generator training, metrics and checkpoints.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::AttrDataset;
use crate::error::{Error, Result};
use crate::genome::{GenomeLayout, DEFAULT_PIECE_SIZE, DEFAULT_Z_SIZE};
use crate::losses::{fake_term, l1_term, real_term, GenConditioning, LossReport};
use crate::nets::{ArchConfig, GanMode, ImageBatch, Model, Phase};
use crate::numerics::optim::{DEFAULT_DECAY, DEFAULT_EPS, DEFAULT_LR};
use crate::numerics::{Checkpoint, Graph, ParamKind, ParamStore, RmsProp, Tensor};
use crate::sampler::{orient_random, random_pair, IterativeSampler, Strategy, UsefulPair};

pub const METRICS_FILE: &str = "metrics.csv";
pub const FINAL_CHECKPOINT: &str = "final.ckpt";
pub const DIAGNOSTIC_CHECKPOINT: &str = "diagnostic.ckpt";

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub steps: usize,
    /// Pairs per iterative step; random pairing always uses one pair.
    pub batch: usize,
    pub lr: f64,
    pub decay: f64,
    pub eps: f64,
    pub lambda_gan: f64,
    /// Discriminator updates per generator update; `None` picks 1 for
    /// probability mode and 5 for critic mode.
    pub d_steps: Option<usize>,
    pub gan_mode: GanMode,
    pub clip_bound: f64,
    pub seed: u64,
    pub strategy: Strategy,
    pub annihilate: bool,
    pub conditioning: GenConditioning,
    /// Write `step_<k>.ckpt` every this many steps; 0 disables.
    pub checkpoint_every: usize,
    pub arch: ArchConfig,
    pub piece_size: usize,
    pub z_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 2000,
            batch: 16,
            lr: DEFAULT_LR,
            decay: DEFAULT_DECAY,
            eps: DEFAULT_EPS,
            lambda_gan: 1.0,
            d_steps: None,
            gan_mode: GanMode::Probability,
            clip_bound: 0.01,
            seed: 0,
            strategy: Strategy::Iterative,
            annihilate: true,
            conditioning: GenConditioning::Matched,
            checkpoint_every: 0,
            arch: ArchConfig::default(),
            piece_size: DEFAULT_PIECE_SIZE,
            z_size: DEFAULT_Z_SIZE,
        }
    }
}

impl TrainConfig {
    pub fn d_steps(&self) -> usize {
        self.d_steps.unwrap_or(match self.gan_mode {
            GanMode::Probability => 1,
            GanMode::Critic => 5,
        })
    }

    pub fn layout(&self, n: usize) -> Result<GenomeLayout> {
        GenomeLayout::uniform(n, self.piece_size, self.z_size)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.steps == 0 {
            return fail("steps must be at least 1".into());
        }
        if self.batch == 0 {
            return fail("batch must be at least 1".into());
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return fail(format!("learning rate {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.decay) || self.eps.is_nan() || self.eps <= 0.0 {
            return fail(format!("decay {} / eps {}", self.decay, self.eps));
        }
        if !(self.lambda_gan >= 0.0 && self.lambda_gan.is_finite()) {
            return fail(format!("lambda_gan {}", self.lambda_gan));
        }
        if self.d_steps == Some(0) {
            return fail("d_steps must be at least 1".into());
        }
        if self.gan_mode == GanMode::Critic && (self.clip_bound.is_nan() || self.clip_bound <= 0.0) {
            return fail(format!("clip bound {} must be positive in critic mode", self.clip_bound));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// 1-based index of the completed step.
    pub step: usize,
    pub attribute: usize,
    pub losses: LossReport,
    /// Pair draws this step, useless random draws included.
    pub draws: u64,
    pub wall_ms: f64,
}

pub const METRICS_HEADER: &str = "step,attribute,l_reconstruct,l_gan,l_g,l_d1,l_d0,l_d,draws";

impl StepRecord {
    /// CSV row with a 1-based attribute; wall time is left out so that reruns compare equal.
    pub fn csv_row(&self) -> String {
        let l = &self.losses;
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.step,
            self.attribute + 1,
            l.l_reconstruct,
            l.l_gan,
            l.l_g,
            l.l_d1,
            l.l_d0,
            l.l_d,
            self.draws
        )
    }
}

fn scalar(g: &Graph<f32>, id: crate::numerics::NodeId) -> f64 {
    g.value(id).data()[0] as f64
}

pub struct Trainer {
    cfg: TrainConfig,
    data: AttrDataset,
    model: Model,
    opt: RmsProp,
    rng: ChaCha8Rng,
    sampler: IterativeSampler,
    labels: Vec<Vec<bool>>,
    step: usize,
    usage: Vec<u64>,
    history: Vec<StepRecord>,
}

impl Trainer {
    pub fn new(cfg: TrainConfig, data: AttrDataset) -> Result<Self> {
        cfg.validate()?;
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let (c, h, w) = data.image_shape();
        if (c, h, w) != (cfg.arch.channels, cfg.arch.height, cfg.arch.width) {
            return Err(Error::Config(format!(
                "dataset images are {c}x{h}x{w}, architecture expects {}x{}x{}",
                cfg.arch.channels, cfg.arch.height, cfg.arch.width
            )));
        }
        let layout = cfg.layout(data.n())?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let model = Model::new(cfg.arch.clone(), layout, &mut rng);
        let labels: Vec<Vec<bool>> = data.images().iter().map(|i| i.label.clone()).collect();
        let sampler = IterativeSampler::new(data.n(), &labels)?;
        let opt = RmsProp::new(cfg.lr as f32, cfg.decay as f32, cfg.eps as f32);
        let mut t = Self {
            usage: vec![0; data.n()],
            cfg,
            data,
            model,
            opt,
            rng,
            sampler,
            labels,
            step: 0,
            history: Vec::new(),
        };
        if t.cfg.gan_mode == GanMode::Critic {
            t.clip("disc");
        }
        Ok(t)
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Steps spent on each attribute so far.
    pub fn usage(&self) -> &[u64] {
        &self.usage
    }

    /// Records of the steps run by this instance (not those before a resume).
    pub fn history(&self) -> &[StepRecord] {
        &self.history
    }

    fn next_pairs(&mut self) -> Result<(usize, Vec<UsefulPair>, u64)> {
        match self.cfg.strategy {
            Strategy::Iterative => {
                let pairs = self.sampler.next_batch(self.cfg.batch, &mut self.rng)?;
                Ok((pairs[0].attribute, pairs, self.cfg.batch as u64))
            }
            Strategy::Random => {
                // every image label identical: no draw can ever be useful
                if self.labels.iter().all(|l| *l == self.labels[0]) {
                    return Err(Error::SchedulerExhausted);
                }
                let mut draws = 0;
                loop {
                    draws += 1;
                    let d = random_pair(&self.labels, &mut self.rng)?;
                    if let Some(p) = orient_random(&self.labels, d, &mut self.rng) {
                        return Ok((p.attribute, vec![p], draws));
                    }
                }
            }
        }
    }

    fn batches(&self, pairs: &[UsefulPair]) -> Result<(ImageBatch, ImageBatch)> {
        let a: Vec<usize> = pairs.iter().map(|p| p.a).collect();
        let b: Vec<usize> = pairs.iter().map(|p| p.b).collect();
        Ok((self.data.batch(&a)?, self.data.batch(&b)?))
    }

    /// One discriminator phase followed by one generator update on `pairs`.
    pub fn train_step_on(&mut self, attr: usize, pairs: &[UsefulPair]) -> Result<LossReport> {
        let (a, b) = self.batches(pairs)?;
        let mode = self.cfg.gan_mode;
        let k = pairs.len();

        // generator forward; its values also serve as the discriminator's fakes
        let mut g = Graph::<f32>::new();
        let gen_bound = self.model.params().bind(&mut g, Model::<f32>::is_generator_param);
        let xa = g.constant(a.flat());
        let xb = g.constant(b.flat());
        let mut gen_stats = Vec::new();
        let ch = self.model.children_graph(
            &mut g,
            &gen_bound,
            xa,
            xb,
            attr,
            self.cfg.annihilate,
            Phase::Train,
            &mut gen_stats,
        )?;
        let fake_a2 = g.value(ch.a2).clone();
        let fake_b2 = g.value(ch.b2).clone();

        let prefix = Model::<f32>::disc_prefix(attr);
        let mut l_d1 = 0.0;
        let mut l_d0 = 0.0;
        for _ in 0..self.cfg.d_steps() {
            let mut dg = Graph::<f32>::new();
            let bound = self.model.params().bind(&mut dg, |n| n.starts_with(&prefix));
            let mut stats = Vec::new();
            let real_a_in = dg.constant(a.flat());
            let fake_b2_in = dg.constant(fake_b2.clone());
            let real_b_in = dg.constant(b.flat());
            let fake_a2_in = dg.constant(fake_a2.clone());
            let pos = dg.concat_rows(&[real_a_in, fake_b2_in])?;
            let neg = dg.concat_rows(&[real_b_in, fake_a2_in])?;
            let pos_logits = self.model.disc_logits_graph(&mut dg, &bound, attr, pos, true, Phase::Train, &mut stats)?;
            let neg_logits = self.model.disc_logits_graph(&mut dg, &bound, attr, neg, false, Phase::Train, &mut stats)?;
            let real_a = dg.slice_rows(pos_logits, 0, k)?;
            let fake_b = dg.slice_rows(pos_logits, k, k)?;
            let real_b = dg.slice_rows(neg_logits, 0, k)?;
            let fake_a = dg.slice_rows(neg_logits, k, k)?;
            let ra = real_term(&mut dg, real_a, mode);
            let fb = fake_term(&mut dg, fake_b, mode);
            let rb = real_term(&mut dg, real_b, mode);
            let fa = fake_term(&mut dg, fake_a, mode);
            let d1 = dg.add(ra, fb)?;
            let d0 = dg.add(rb, fa)?;
            let loss = dg.add(d1, d0)?;
            l_d1 = scalar(&dg, d1);
            l_d0 = scalar(&dg, d0);
            if !(l_d1 + l_d0).is_finite() {
                return Err(Error::NonFinite(format!("discriminator loss at step {}", self.step + 1)));
            }
            let grads = dg.backward(loss)?;
            let updates = self.trainable_grads(&bound, &grads, |n| n.starts_with(&prefix));
            self.opt.step(self.model.params_mut(), &updates)?;
            if mode == GanMode::Critic {
                self.clip(&prefix);
            }
            self.model.apply_stats(&stats);
        }

        // generator loss against the updated discriminator, on the same graph
        let disc_bound = self.model.params().bind(&mut g, |_| false);
        let (bit_a2, bit_b2) = self.cfg.conditioning.bits();
        let mut unused = Vec::new();
        let la2 = self.model.disc_logits_graph(&mut g, &disc_bound, attr, ch.a2, bit_a2, Phase::Train, &mut unused)?;
        let lb2 = self.model.disc_logits_graph(&mut g, &disc_bound, attr, ch.b2, bit_b2, Phase::Train, &mut unused)?;
        let ga = real_term(&mut g, la2, mode);
        let gb = real_term(&mut g, lb2, mode);
        let l_gan = g.add(ga, gb)?;
        let ra = l1_term(&mut g, ch.a1, xa)?;
        let rb = l1_term(&mut g, ch.b1, xb)?;
        let l_rec = g.add(ra, rb)?;
        let weighted = g.scale(l_gan, self.cfg.lambda_gan as f32);
        let l_g = g.add(l_rec, weighted)?;
        let report = LossReport::new(scalar(&g, l_rec), scalar(&g, l_gan), self.cfg.lambda_gan, l_d1, l_d0);
        if !report.l_g.is_finite() {
            return Err(Error::NonFinite(format!("generator loss at step {}", self.step + 1)));
        }
        let grads = g.backward(l_g)?;
        let updates = self.trainable_grads(&gen_bound, &grads, Model::<f32>::is_generator_param);
        self.opt.step(self.model.params_mut(), &updates)?;
        self.model.apply_stats(&gen_stats);
        Ok(report)
    }

    fn trainable_grads(
        &self,
        bound: &crate::numerics::Binding,
        grads: &crate::numerics::Gradients<f32>,
        select: impl Fn(&str) -> bool,
    ) -> Vec<(usize, Tensor<f32>)> {
        self.model
            .params()
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind == ParamKind::Trainable && select(&e.name))
            .map(|(i, _)| (i, grads.get(bound.id(i))))
            .collect()
    }

    fn clip(&mut self, prefix: &str) {
        let c = self.cfg.clip_bound as f32;
        let idx: Vec<usize> = self
            .model
            .params()
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind == ParamKind::Trainable && e.name.starts_with(prefix))
            .map(|(i, _)| i)
            .collect();
        for i in idx {
            for v in self.model.params_mut().tensor_mut(i).data_mut() {
                *v = v.clamp(-c, c);
            }
        }
    }

    /// Schedules the next pairs and runs one step.
    pub fn train_step(&mut self) -> Result<StepRecord> {
        let started = Instant::now();
        let (attr, pairs, draws) = self.next_pairs()?;
        let losses = self.train_step_on(attr, &pairs)?;
        self.step += 1;
        self.usage[attr] += 1;
        let rec = StepRecord {
            step: self.step,
            attribute: attr,
            losses,
            draws,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        };
        self.history.push(rec.clone());
        Ok(rec)
    }

    /// Trains until `cfg.steps` steps have completed in total.
    ///
    /// With an output directory, metrics are appended to `metrics.csv`,
    /// periodic and final checkpoints are written, and a failing step leaves
    /// `diagnostic.ckpt` behind.
    pub fn run(&mut self, out: Option<&Path>) -> Result<Option<PathBuf>> {
        let mut csv = match out {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                Some(MetricsWriter::open(&dir.join(METRICS_FILE), self.step)?)
            }
            None => None,
        };
        while self.step < self.cfg.steps {
            let rec = match self.train_step() {
                Ok(r) => r,
                Err(e) => {
                    if let Some(dir) = out {
                        let path = dir.join(DIAGNOSTIC_CHECKPOINT);
                        match self.checkpoint().and_then(|c| c.save(&path)) {
                            Ok(()) => warn!("training failed; state saved to {}", path.display()),
                            Err(save_err) => warn!("could not write diagnostic checkpoint: {save_err}"),
                        }
                    }
                    return Err(e);
                }
            };
            if let Some(w) = csv.as_mut() {
                w.push(&rec)?;
            }
            if rec.step % 100 == 0 {
                info!(
                    "step {} attr {} rec {:.4} gan {:.4} d {:.4}",
                    rec.step,
                    rec.attribute + 1,
                    rec.losses.l_reconstruct,
                    rec.losses.l_gan,
                    rec.losses.l_d
                );
            }
            if let Some(dir) = out {
                if self.cfg.checkpoint_every > 0 && self.step.is_multiple_of(self.cfg.checkpoint_every) {
                    self.checkpoint()?.save(&dir.join(format!("step_{:06}.ckpt", self.step)))?;
                }
            }
        }
        if let Some(w) = csv.as_mut() {
            w.flush()?;
        }
        match out {
            Some(dir) => {
                let path = dir.join(FINAL_CHECKPOINT);
                self.checkpoint()?.save(&path)?;
                Ok(Some(path))
            }
            None => Ok(None),
        }
    }

    /// Full training state: parameters, optimizer accumulators, RNG position,
    /// scheduler position and attribute usage.
    pub fn checkpoint(&self) -> Result<Checkpoint> {
        let mut ck = model_checkpoint(&self.model, self.data.attr_names())?;
        let seed: String = self.rng.get_seed().iter().map(|b| format!("{b:02x}")).collect();
        let usage: Vec<String> = self.usage.iter().map(u64::to_string).collect();
        ck.meta.extend([
            ("step".to_string(), self.step.to_string()),
            ("train.annihilate".to_string(), self.cfg.annihilate.to_string()),
            ("train.gan_mode".to_string(), gan_mode_name(self.cfg.gan_mode).to_string()),
            ("rng.seed".to_string(), seed),
            ("rng.stream".to_string(), self.rng.get_stream().to_string()),
            ("rng.word_pos".to_string(), self.rng.get_word_pos().to_string()),
            ("sampler.next".to_string(), self.sampler.next_attribute().to_string()),
            ("usage".to_string(), usage.join(",")),
        ]);
        for (name, acc) in self.opt.accumulators() {
            ck.arrays.push((format!("rms/{name}"), Tensor::new(vec![acc.len()], acc.clone())?));
        }
        Ok(ck)
    }

    /// Restores a [`Trainer::checkpoint`] for continued training under `cfg`.
    pub fn resume(cfg: TrainConfig, data: AttrDataset, ck: &Checkpoint) -> Result<Self> {
        let mut t = Self::new(cfg, data)?;
        let (model, _) = model_from_checkpoint(ck)?;
        if model.arch() != t.model.arch() || model.layout() != t.model.layout() {
            return Err(Error::Checkpoint("architecture or layout differs from the configuration".into()));
        }
        t.model = model;
        let meta = |k: &str| ck.meta(k).ok_or_else(|| Error::Checkpoint(format!("missing meta `{k}`")));
        t.step = parse_meta(meta("step")?, "step")?;
        let seed_hex = meta("rng.seed")?;
        let mut seed = [0u8; 32];
        if seed_hex.len() != 64 {
            return Err(Error::Checkpoint("rng seed must be 64 hex digits".into()));
        }
        for (k, byte) in seed.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&seed_hex[2 * k..2 * k + 2], 16)
                .map_err(|_| Error::Checkpoint("bad rng seed".into()))?;
        }
        t.rng = ChaCha8Rng::from_seed(seed);
        t.rng.set_stream(parse_meta(meta("rng.stream")?, "rng.stream")?);
        t.rng.set_word_pos(parse_meta(meta("rng.word_pos")?, "rng.word_pos")?);
        t.sampler.set_next_attribute(parse_meta(meta("sampler.next")?, "sampler.next")?)?;
        t.usage = meta("usage")?
            .split(',')
            .map(|v| parse_meta(v, "usage"))
            .collect::<Result<_>>()?;
        if t.usage.len() != t.data.n() {
            return Err(Error::Checkpoint("usage counts do not match the attribute count".into()));
        }
        for (name, arr) in &ck.arrays {
            if let Some(p) = name.strip_prefix("rms/") {
                t.opt.set_accumulator(p, arr.data().to_vec());
            }
        }
        Ok(t)
    }
}

fn parse_meta<V: FromStr>(v: &str, key: &str) -> Result<V> {
    v.parse()
        .map_err(|_| Error::Checkpoint(format!("bad value `{v}` for `{key}`")))
}

pub fn gan_mode_name(m: GanMode) -> &'static str {
    match m {
        GanMode::Probability => "probability",
        GanMode::Critic => "critic",
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn split_usizes(v: &str, key: &str) -> Result<Vec<usize>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_meta(s, key)).collect()
}

/// Parameters plus what is needed to rebuild the model.
pub fn model_checkpoint(model: &Model, attr_names: &[String]) -> Result<Checkpoint> {
    let a = model.arch();
    let meta = vec![
        ("arch.channels".to_string(), a.channels.to_string()),
        ("arch.height".to_string(), a.height.to_string()),
        ("arch.width".to_string(), a.width.to_string()),
        ("arch.enc_hidden".to_string(), join(&a.enc_hidden)),
        ("arch.dec_hidden".to_string(), join(&a.dec_hidden)),
        ("arch.disc_hidden".to_string(), join(&a.disc_hidden)),
        ("arch.leaky_slope".to_string(), a.leaky_slope.to_string()),
        ("arch.disc_batch_norm".to_string(), a.disc_batch_norm.to_string()),
        ("attributes".to_string(), attr_names.join(",")),
    ];
    let arrays = model
        .params()
        .entries()
        .iter()
        .map(|e| (format!("param/{}", e.name), e.tensor.clone()))
        .collect();
    Ok(Checkpoint {
        layout: Some((**model.layout()).clone()),
        meta,
        arrays,
    })
}

/// Rebuilds the model stored in a checkpoint and returns it with the attribute names.
pub fn model_from_checkpoint(ck: &Checkpoint) -> Result<(Model, Vec<String>)> {
    let layout = ck
        .layout
        .clone()
        .ok_or_else(|| Error::Checkpoint("no layout line".into()))?;
    let meta = |k: &str| ck.meta(k).ok_or_else(|| Error::Checkpoint(format!("missing meta `{k}`")));
    let arch = ArchConfig {
        channels: parse_meta(meta("arch.channels")?, "arch.channels")?,
        height: parse_meta(meta("arch.height")?, "arch.height")?,
        width: parse_meta(meta("arch.width")?, "arch.width")?,
        enc_hidden: split_usizes(meta("arch.enc_hidden")?, "arch.enc_hidden")?,
        dec_hidden: split_usizes(meta("arch.dec_hidden")?, "arch.dec_hidden")?,
        disc_hidden: split_usizes(meta("arch.disc_hidden")?, "arch.disc_hidden")?,
        leaky_slope: parse_meta(meta("arch.leaky_slope")?, "arch.leaky_slope")?,
        disc_batch_norm: parse_meta(meta("arch.disc_batch_norm")?, "arch.disc_batch_norm")?,
    };
    let mut params = ParamStore::new();
    let template = Model::<f32>::new(arch.clone(), layout.clone(), &mut ChaCha8Rng::seed_from_u64(0));
    for e in template.params().entries() {
        let t = ck
            .array(&format!("param/{}", e.name))
            .ok_or_else(|| Error::Checkpoint(format!("missing parameter `{}`", e.name)))?;
        params.push(e.name.clone(), t.clone(), e.kind);
    }
    let model = Model::from_params(arch, layout, params)?;
    let names = meta("attributes")?.split(',').map(String::from).collect();
    Ok((model, names))
}

/// Whether a checkpoint was trained with annihilation; absent means yes.
pub fn checkpoint_annihilates(ck: &Checkpoint) -> bool {
    ck.meta("train.annihilate") != Some("false")
}

struct MetricsWriter {
    path: PathBuf,
    buf: String,
}

impl MetricsWriter {
    /// Starts a fresh file at step 0; on resume keeps the rows up to `step`.
    fn open(path: &Path, step: usize) -> Result<Self> {
        let mut buf = String::new();
        if step > 0 {
            if let Ok(old) = fs::read_to_string(path) {
                for line in old.lines().take(step + 1) {
                    buf.push_str(line);
                    buf.push('\n');
                }
            }
        }
        if buf.is_empty() {
            buf.push_str(METRICS_HEADER);
            buf.push('\n');
        }
        let w = Self {
            path: path.to_path_buf(),
            buf,
        };
        w.write()?;
        Ok(w)
    }

    fn push(&mut self, rec: &StepRecord) -> Result<()> {
        let _ = writeln!(self.buf, "{}", rec.csv_row());
        if rec.step.is_multiple_of(100) {
            self.write()?;
        }
        Ok(())
    }

    fn write(&self) -> Result<()> {
        fs::write(&self.path, &self.buf).map_err(|e| Error::io(&self.path, e))
    }

    fn flush(&mut self) -> Result<()> {
        self.write()
    }
}
