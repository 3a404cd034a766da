//! Labelled image collections: synthetic generation, attribute-list I/O and splitting.

mod attrlist;
pub mod pgm;
pub mod synth;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use attrlist::{load_attr_list, load_image, read_attr_list, save_dataset, AttrList, ATTR_LIST_FILE};
pub use synth::{nuisance_features, oracle_attr, oracle_score, synth_dataset, Nuisance, SynthSpec};

use crate::error::{Error, Result};
use crate::nets::ImageBatch;
use crate::sampler::LabelCensus;

pub const DEFAULT_SPLIT_RATIO: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledImage {
    pub name: String,
    /// Channel-major pixels in `[0, 1]`.
    pub pixels: Vec<f32>,
    pub label: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttrDataset {
    attr_names: Vec<String>,
    channels: usize,
    height: usize,
    width: usize,
    images: Vec<LabeledImage>,
}

impl AttrDataset {
    pub fn new(
        attr_names: Vec<String>,
        channels: usize,
        height: usize,
        width: usize,
        images: Vec<LabeledImage>,
    ) -> Result<Self> {
        let n = attr_names.len();
        if n == 0 {
            return Err(Error::Spec("dataset needs at least one attribute".into()));
        }
        let px = channels * height * width;
        for img in &images {
            if img.label.len() != n {
                return Err(Error::Spec(format!(
                    "{} has {} label bits, expected {n}",
                    img.name,
                    img.label.len()
                )));
            }
            if img.pixels.len() != px {
                return Err(Error::dim(format!(
                    "{} has {} pixels, expected {px}",
                    img.name,
                    img.pixels.len()
                )));
            }
        }
        Ok(Self {
            attr_names,
            channels,
            height,
            width,
            images,
        })
    }

    pub fn n(&self) -> usize {
        self.attr_names.len()
    }

    pub fn attr_names(&self) -> &[String] {
        &self.attr_names
    }

    pub fn image_shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn images(&self) -> &[LabeledImage] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn labels(&self) -> Vec<&[bool]> {
        self.images.iter().map(|i| i.label.as_slice()).collect()
    }

    pub fn census(&self) -> Result<LabelCensus> {
        LabelCensus::from_labels(self.n(), &self.labels())
    }

    /// Stacks the images at `indices` in order.
    pub fn batch(&self, indices: &[usize]) -> Result<ImageBatch> {
        let imgs: Vec<&[f32]> = indices
            .iter()
            .map(|&k| {
                self.images
                    .get(k)
                    .map(|i| i.pixels.as_slice())
                    .ok_or(Error::Index {
                        index: k,
                        n: self.images.len(),
                    })
            })
            .collect::<Result<_>>()?;
        ImageBatch::from_images(&imgs, self.channels, self.height, self.width)
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            images: indices.iter().map(|&k| self.images[k].clone()).collect(),
            ..self.clone_empty()
        }
    }

    fn clone_empty(&self) -> Self {
        Self {
            attr_names: self.attr_names.clone(),
            channels: self.channels,
            height: self.height,
            width: self.width,
            images: Vec::new(),
        }
    }
}

/// Deterministic shuffled partition; the train part gets `round(ratio · len)` images.
pub fn split_train_test(ds: &AttrDataset, ratio: f64, seed: u64) -> Result<(AttrDataset, AttrDataset)> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Domain(format!("split ratio {ratio} not in (0, 1)")));
    }
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (ratio * ds.len() as f64).round() as usize;
    let (train, test) = order.split_at(cut);
    let (mut train, mut test) = (train.to_vec(), test.to_vec());
    train.sort_unstable();
    test.sort_unstable();
    Ok((ds.subset(&train), ds.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(m: usize) -> AttrDataset {
        let images = (0..m)
            .map(|k| LabeledImage {
                name: format!("{k}.pgm"),
                pixels: vec![k as f32 / m as f32; 4],
                label: vec![k % 2 == 0],
            })
            .collect();
        AttrDataset::new(vec!["A".into()], 1, 2, 2, images).unwrap()
    }

    #[test]
    fn nine_to_one_split() {
        let ds = tiny(10);
        let (train, test) = split_train_test(&ds, DEFAULT_SPLIT_RATIO, 3).unwrap();
        assert_eq!((train.len(), test.len()), (9, 1));
        let mut names: Vec<_> = train
            .images()
            .iter()
            .chain(test.images())
            .map(|i| i.name.clone())
            .collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 10);
        assert_eq!(split_train_test(&ds, 0.9, 3).unwrap(), (train, test));
    }

    #[test]
    fn split_rejects_bad_input() {
        assert!(split_train_test(&tiny(4), 1.0, 0).is_err());
        assert!(matches!(split_train_test(&tiny(0), 0.5, 0), Err(Error::EmptyDataset)));
    }

    #[test]
    fn batch_stacks_in_order() {
        let ds = tiny(3);
        let b = ds.batch(&[2, 0]).unwrap();
        assert_eq!(b.batch(), 2);
        assert_eq!(b.image(0)[0], 2.0 / 3.0);
        assert!(ds.batch(&[3]).is_err());
    }

    #[test]
    fn rejects_inconsistent_images() {
        let bad = LabeledImage {
            name: "x".into(),
            pixels: vec![0.0; 3],
            label: vec![true],
        };
        assert!(AttrDataset::new(vec!["A".into()], 1, 2, 2, vec![bad]).is_err());
    }
}
