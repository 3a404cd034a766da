//! Flat `key = value` configuration with `#` comments.
//!
//! Every key has a default. Values from a file override the defaults, and
//! environment variables named `DNAGAN_<KEY>` (upper case) override the file.

use std::path::{Path, PathBuf};

use crate::data::{SynthSpec, DEFAULT_SPLIT_RATIO};
use crate::error::{Error, Result};
use crate::losses::GenConditioning;
use crate::nets::{ArchConfig, GanMode};
use crate::sampler::{LabelCensus, Strategy};
use crate::trainer::TrainConfig;

pub const ENV_PREFIX: &str = "DNAGAN_";

/// `(key, default, description)` for every accepted key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("seed", "0", "seed for data generation, initialization and sampling"),
    ("steps", "2000", "training steps"),
    ("batch", "16", "pairs per iterative training step"),
    ("lr", "5e-5", "RMSProp learning rate"),
    ("decay", "0.9", "RMSProp squared-gradient decay"),
    ("rms_eps", "1e-8", "RMSProp denominator epsilon"),
    ("lambda_gan", "1", "weight of the adversarial term in the generator loss"),
    ("d_steps", "0", "discriminator updates per generator update; 0 = 1 (probability) or 5 (critic)"),
    ("gan_mode", "probability", "probability | critic"),
    ("clip_bound", "0.01", "critic weight clipping bound"),
    ("strategy", "iterative", "iterative | random pair scheduling"),
    ("annihilate", "true", "zero the recessive attribute piece; false reproduces the trivial-solution ablation"),
    ("conditioning", "matched", "generator label bits: matched (A2 as 0, B2 as 1) | literal (A2 as 1, B2 as 0)"),
    ("checkpoint_every", "0", "write a checkpoint every k steps; 0 = final only"),
    ("attributes", "2", "number of synthetic attributes (1-4)"),
    ("resolution", "16", "synthetic image side in pixels (multiple of 16)"),
    ("census", "", "comma-separated image count per label pattern; empty = per_pattern for every pattern"),
    ("per_pattern", "64", "images per label pattern when census is empty"),
    ("noise", "0.02", "synthetic pixel noise standard deviation"),
    ("piece_size", "8", "latent units per attribute piece"),
    ("z_size", "32", "latent units of the attribute-irrelevant part"),
    ("enc_hidden", "256,128", "encoder hidden widths"),
    ("dec_hidden", "128,256", "decoder hidden widths"),
    ("disc_hidden", "128", "discriminator hidden widths"),
    ("leaky_slope", "0.2", "leaky ReLU negative slope"),
    ("disc_batch_norm", "false", "batch normalization in discriminator hidden layers"),
    ("split_ratio", "0.9", "train fraction of the train/test split"),
    ("data_dir", "", "directory of external images; empty = synthetic data"),
    ("attr_file", "", "attribute list for data_dir; empty = data_dir/list_attr.txt"),
    ("attr_select", "", "comma-separated attribute names to keep, in order; empty = all"),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub train: TrainConfig,
    pub attributes: usize,
    pub resolution: usize,
    pub census: Vec<u64>,
    pub per_pattern: u64,
    pub noise: f32,
    pub split_ratio: f64,
    pub data_dir: Option<PathBuf>,
    pub attr_file: Option<PathBuf>,
    pub attr_select: Vec<String>,
}

fn bad(key: &str, value: &str, want: &str) -> Error {
    Error::Config(format!("`{key}` expects {want}, got `{value}`"))
}

fn num<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value.parse().map_err(|_| bad(key, value, "a number"))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value, "true or false")),
    }
}

fn list<V: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<V>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| bad(key, value, "a comma-separated list of numbers")))
        .collect()
}

fn path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

pub fn parse_gan_mode(v: &str) -> Result<GanMode> {
    match v {
        "probability" => Ok(GanMode::Probability),
        "critic" => Ok(GanMode::Critic),
        _ => Err(bad("gan_mode", v, "probability or critic")),
    }
}

pub fn parse_strategy(v: &str) -> Result<Strategy> {
    match v {
        "iterative" => Ok(Strategy::Iterative),
        "random" => Ok(Strategy::Random),
        _ => Err(bad("strategy", v, "iterative or random")),
    }
}

impl Default for Config {
    fn default() -> Self {
        let mut c = Config {
            train: TrainConfig::default(),
            attributes: 0,
            resolution: 0,
            census: Vec::new(),
            per_pattern: 0,
            noise: 0.0,
            split_ratio: DEFAULT_SPLIT_RATIO,
            data_dir: None,
            attr_file: None,
            attr_select: Vec::new(),
        };
        for (k, v, _) in KEYS {
            c.set(k, v).expect("defaults parse");
        }
        c
    }
}

impl Config {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let t = &mut self.train;
        match key {
            "seed" => t.seed = num(key, value)?,
            "steps" => t.steps = num(key, value)?,
            "batch" => t.batch = num(key, value)?,
            "lr" => t.lr = num(key, value)?,
            "decay" => t.decay = num(key, value)?,
            "rms_eps" => t.eps = num(key, value)?,
            "lambda_gan" => t.lambda_gan = num(key, value)?,
            "d_steps" => {
                let d: usize = num(key, value)?;
                t.d_steps = (d > 0).then_some(d);
            }
            "gan_mode" => t.gan_mode = parse_gan_mode(value)?,
            "clip_bound" => t.clip_bound = num(key, value)?,
            "strategy" => t.strategy = parse_strategy(value)?,
            "annihilate" => t.annihilate = flag(key, value)?,
            "conditioning" => {
                t.conditioning = match value {
                    "matched" => GenConditioning::Matched,
                    "literal" => GenConditioning::Literal,
                    _ => return Err(bad(key, value, "matched or literal")),
                }
            }
            "checkpoint_every" => t.checkpoint_every = num(key, value)?,
            "piece_size" => t.piece_size = num(key, value)?,
            "z_size" => t.z_size = num(key, value)?,
            "enc_hidden" => t.arch.enc_hidden = list(key, value)?,
            "dec_hidden" => t.arch.dec_hidden = list(key, value)?,
            "disc_hidden" => t.arch.disc_hidden = list(key, value)?,
            "leaky_slope" => t.arch.leaky_slope = num(key, value)?,
            "disc_batch_norm" => t.arch.disc_batch_norm = flag(key, value)?,
            "attributes" => self.attributes = num(key, value)?,
            "resolution" => {
                self.resolution = num(key, value)?;
                t.arch.height = self.resolution;
                t.arch.width = self.resolution;
            }
            "census" => self.census = list(key, value)?,
            "per_pattern" => self.per_pattern = num(key, value)?,
            "noise" => self.noise = num(key, value)?,
            "split_ratio" => self.split_ratio = num(key, value)?,
            "data_dir" => self.data_dir = path(value),
            "attr_file" => self.attr_file = path(value),
            "attr_select" => {
                self.attr_select = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_path_buf(),
                line: k + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text, path)
    }

    /// Applies `DNAGAN_<KEY>` overrides from `vars`; unknown `DNAGAN_` names are rejected.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<()> {
        for (name, value) in vars {
            if let Some(key) = name.strip_prefix(ENV_PREFIX) {
                self.set(&key.to_ascii_lowercase(), &value)?;
            }
        }
        Ok(())
    }

    /// Defaults, then the optional file, then the process environment.
    pub fn load(file: Option<&Path>) -> Result<Self> {
        let mut c = Config::default();
        if let Some(p) = file {
            c.apply_file(p)?;
        }
        c.apply_env(std::env::vars())?;
        Ok(c)
    }

    pub fn census(&self) -> Result<LabelCensus> {
        if self.census.is_empty() {
            LabelCensus::uniform(self.attributes, self.per_pattern)
        } else {
            let c = LabelCensus::from_counts(self.census.clone())?;
            if c.n() != self.attributes {
                return Err(Error::Config(format!(
                    "census has {} counts, {} attributes need {}",
                    self.census.len(),
                    self.attributes,
                    1usize << self.attributes.min(16)
                )));
            }
            Ok(c)
        }
    }

    pub fn synth_spec(&self) -> Result<SynthSpec> {
        let spec = SynthSpec {
            n: self.attributes,
            resolution: self.resolution,
            census: self.census()?,
            noise_level: self.noise,
            seed: self.train.seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn arch(&self) -> &ArchConfig {
        &self.train.arch
    }

    /// Markdown table of keys, defaults and descriptions.
    pub fn reference_table() -> String {
        let mut s = String::from("| key | default | meaning |\n|---|---|---|\n");
        for (k, v, d) in KEYS {
            s.push_str(&format!("| `{k}` | `{v}` | {d} |\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_values() {
        let c = Config::default();
        assert_eq!(c.train.lr, 5e-5);
        assert_eq!(c.train.d_steps(), 1);
        assert_eq!(c.train.arch, ArchConfig::default());
        assert_eq!(c.census().unwrap().counts(), &[64; 4]);
        assert_eq!(c.split_ratio, 0.9);
    }

    #[test]
    fn file_values_and_comments() {
        let mut c = Config::default();
        c.apply_text("# run\nsteps = 10  # short\n\ngan_mode=critic\ncensus = 1, 1, 100, 100\n", Path::new("x"))
            .unwrap();
        assert_eq!(c.train.steps, 10);
        assert_eq!(c.train.d_steps(), 5);
        assert_eq!(c.census().unwrap().counts(), &[1, 1, 100, 100]);
    }

    #[test]
    fn unknown_keys_and_bad_lines_are_rejected() {
        let mut c = Config::default();
        match c.apply_text("stepz = 3", Path::new("x")) {
            Err(Error::UnknownKey(k)) => assert_eq!(k, "stepz"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            c.apply_text("\nsteps 3", Path::new("x")),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(c.set("lr", "fast"), Err(Error::Config(_))));
    }

    #[test]
    fn environment_overrides() {
        let mut c = Config::default();
        c.apply_env([
            ("DNAGAN_STEPS".to_string(), "7".to_string()),
            ("HOME".to_string(), "/".to_string()),
        ])
        .unwrap();
        assert_eq!(c.train.steps, 7);
        assert!(c
            .apply_env([("DNAGAN_NOPE".to_string(), "1".to_string())])
            .is_err());
    }

    #[test]
    fn census_must_match_attribute_count() {
        let mut c = Config::default();
        c.set("census", "1,1").unwrap();
        assert!(c.census().is_err());
    }
}
