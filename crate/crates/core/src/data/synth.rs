//! Procedural images with up to four independently rendered attributes.
//!
//! Geometry is laid out on a 16-unit square and scaled to the requested
//! resolution. Attribute 0 is a horizontal bar near the top, 1 a disc in the
//! lower right quadrant, 2 a one-unit border frame and 3 a global brightness
//! shift. Each image also carries identity: background level, a horizontal
//! background gradient, bar thickness and disc radius.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::data::{AttrDataset, LabeledImage};
use crate::error::{Error, Result};
use crate::sampler::LabelCensus;

pub const MAX_SYNTH_ATTRIBUTES: usize = 4;
pub const SYNTH_ATTRIBUTE_NAMES: [&str; MAX_SYNTH_ATTRIBUTES] = ["Bar", "Disc", "Frame", "Bright"];

const UNITS: f32 = 16.0;
const SHAPE_VALUE: f32 = 1.0;
const BRIGHTNESS_SHIFT: f32 = 0.35;
const BACKGROUND_MAX: f32 = 0.15;
const SLOPE_MAX: f32 = 0.05;

const BAR_TOP: f32 = 2.0;
const BAR_COLS: (f32, f32) = (2.0, 14.0);
const DISC_CENTER: (f32, f32) = (10.5, 10.5);
const RADIUS_RANGE: (f32, f32) = (2.0, 3.0);
const FRAME: f32 = 1.0;

/// Rows 6..14, columns 1..5: clear of every shape.
const REFERENCE: ((f32, f32), (f32, f32)) = ((6.0, 14.0), (1.0, 5.0));
const CONTRAST_THRESHOLD: f32 = 0.25;
const BRIGHTNESS_THRESHOLD: f32 = 0.27;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    /// Square side in pixels; a positive multiple of 16.
    pub resolution: usize,
    pub census: LabelCensus,
    pub noise_level: f32,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(census: LabelCensus, noise_level: f32, seed: u64) -> Self {
        Self {
            n: census.n(),
            resolution: 16,
            census,
            noise_level,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_SYNTH_ATTRIBUTES {
            return Err(Error::Spec(format!(
                "synthetic data supports 1..={MAX_SYNTH_ATTRIBUTES} attributes, got {}",
                self.n
            )));
        }
        if self.census.n() != self.n {
            return Err(Error::Spec(format!(
                "census has {} attributes, spec has {}",
                self.census.n(),
                self.n
            )));
        }
        if self.resolution == 0 || !self.resolution.is_multiple_of(16) {
            return Err(Error::Spec(format!(
                "resolution {} is not a positive multiple of 16",
                self.resolution
            )));
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return Err(Error::Spec(format!("noise level {}", self.noise_level)));
        }
        Ok(())
    }
}

/// Per-image identity, independent of the labels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nuisance {
    pub background: f32,
    /// Background change from the left edge to the image centre.
    pub slope: f32,
    pub bar_thickness: f32,
    pub disc_radius: f32,
}

impl Nuisance {
    pub fn sample(rng: &mut impl Rng) -> Self {
        Self {
            background: rng.random_range(0.0..=BACKGROUND_MAX),
            slope: rng.random_range(-SLOPE_MAX..=SLOPE_MAX),
            bar_thickness: if rng.random_bool(0.5) { 2.0 } else { 3.0 },
            disc_radius: rng.random_range(RADIUS_RANGE.0..=RADIUS_RANGE.1),
        }
    }
}

/// Centre of pixel `k` in unit coordinates.
fn unit(k: usize, side: usize) -> f32 {
    (k as f32 + 0.5) * UNITS / side as f32
}

fn in_bar(u: f32, v: f32, thickness: f32) -> bool {
    (BAR_TOP..BAR_TOP + thickness).contains(&u) && (BAR_COLS.0..BAR_COLS.1).contains(&v)
}

fn in_disc(u: f32, v: f32, radius: f32) -> bool {
    let (du, dv) = (u - DISC_CENTER.0, v - DISC_CENTER.1);
    du * du + dv * dv <= radius * radius
}

fn in_frame(u: f32, v: f32) -> bool {
    u < FRAME || v < FRAME || u >= UNITS - FRAME || v >= UNITS - FRAME
}

fn in_reference(u: f32, v: f32) -> bool {
    let ((u0, u1), (v0, v1)) = REFERENCE;
    (u0..u1).contains(&u) && (v0..v1).contains(&v)
}

/// Noise-free rendering of one image.
pub fn render(label: &[bool], nuisance: &Nuisance, side: usize) -> Vec<f32> {
    let on = |s: usize| label.get(s).copied().unwrap_or(false);
    let mut out = Vec::with_capacity(side * side);
    for y in 0..side {
        let u = unit(y, side);
        for x in 0..side {
            let v = unit(x, side);
            let shape = (on(0) && in_bar(u, v, nuisance.bar_thickness))
                || (on(1) && in_disc(u, v, nuisance.disc_radius))
                || (on(2) && in_frame(u, v));
            let value = if shape {
                SHAPE_VALUE
            } else {
                let mut bg = nuisance.background + nuisance.slope * (v - UNITS / 2.0) / (UNITS / 2.0);
                if on(3) {
                    bg += BRIGHTNESS_SHIFT;
                }
                bg
            };
            out.push(value.clamp(0.0, 1.0));
        }
    }
    out
}

pub fn synth_dataset(spec: &SynthSpec) -> Result<AttrDataset> {
    spec.validate()?;
    let side = spec.resolution;
    let labels = spec.census.expand_labels();
    let noise = Normal::new(0.0f32, spec.noise_level).map_err(|e| Error::Spec(e.to_string()))?;
    let images: Vec<LabeledImage> = labels
        .into_par_iter()
        .enumerate()
        .map(|(k, label)| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(k as u64);
            let nuisance = Nuisance::sample(&mut rng);
            let mut pixels = render(&label, &nuisance, side);
            if spec.noise_level > 0.0 {
                for p in &mut pixels {
                    *p = (*p + noise.sample(&mut rng)).clamp(0.0, 1.0);
                }
            }
            LabeledImage {
                name: format!("synth_{k:05}.pgm"),
                pixels,
                label,
            }
        })
        .collect();
    let names = SYNTH_ATTRIBUTE_NAMES[..spec.n]
        .iter()
        .map(|s| s.to_string())
        .collect();
    AttrDataset::new(names, 1, side, side, images)
}

fn square_side(pixels: &[f32]) -> Result<usize> {
    let side = (pixels.len() as f64).sqrt().round() as usize;
    if side * side != pixels.len() || side == 0 {
        return Err(Error::dim(format!(
            "oracle needs a square single-channel image, got {} pixels",
            pixels.len()
        )));
    }
    Ok(side)
}

fn region_mean(pixels: &[f32], side: usize, keep: impl Fn(f32, f32) -> bool) -> f32 {
    let (mut sum, mut count) = (0.0f32, 0usize);
    for y in 0..side {
        for x in 0..side {
            if keep(unit(y, side), unit(x, side)) {
                sum += pixels[y * side + x];
                count += 1;
            }
        }
    }
    sum / count as f32
}

fn reference_median(pixels: &[f32], side: usize) -> f32 {
    let mut vals = Vec::new();
    for y in 0..side {
        for x in 0..side {
            if in_reference(unit(y, side), unit(x, side)) {
                vals.push(pixels[y * side + x]);
            }
        }
    }
    vals.sort_by(f32::total_cmp);
    let mid = vals.len() / 2;
    if vals.len() % 2 == 0 {
        0.5 * (vals[mid - 1] + vals[mid])
    } else {
        vals[mid]
    }
}

/// Detector response for attribute `s` of a square grayscale image.
///
/// For the shape attributes this is the mean over the region every rendering
/// covers minus the background reference; for brightness it is the
/// background reference itself.
pub fn oracle_score(pixels: &[f32], s: usize) -> Result<f32> {
    let side = square_side(pixels)?;
    let reference = reference_median(pixels, side);
    let region = match s {
        0 => region_mean(pixels, side, |u, v| in_bar(u, v, 2.0)),
        1 => region_mean(pixels, side, |u, v| in_disc(u, v, RADIUS_RANGE.0)),
        2 => region_mean(pixels, side, in_frame),
        3 => return Ok(reference),
        _ => {
            return Err(Error::Index {
                index: s,
                n: MAX_SYNTH_ATTRIBUTES,
            })
        }
    };
    Ok(region - reference)
}

pub fn oracle_threshold(s: usize) -> f32 {
    if s == 3 {
        BRIGHTNESS_THRESHOLD
    } else {
        CONTRAST_THRESHOLD
    }
}

pub fn oracle_attr(pixels: &[f32], s: usize) -> Result<bool> {
    Ok(oracle_score(pixels, s)? > oracle_threshold(s))
}

/// Identity estimate: background level at the reference patch and the
/// left-to-right background gradient along the rows just inside the frame.
pub fn nuisance_features(pixels: &[f32]) -> Result<[f32; 2]> {
    let side = square_side(pixels)?;
    let level = reference_median(pixels, side);
    let band = |u: f32| (1.0..2.0).contains(&u) || (14.0..15.0).contains(&u);
    let left = region_mean(pixels, side, |u, v| band(u) && (1.0..6.0).contains(&v));
    let right = region_mean(pixels, side, |u, v| band(u) && (10.0..15.0).contains(&v));
    Ok([level, right - left])
}
