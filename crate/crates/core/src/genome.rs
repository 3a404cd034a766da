//! DNA-like latent codes.
//!
//! A latent vector is split into one contiguous piece per attribute followed
//! by an attribute-irrelevant remainder `z`. Attribute indices are 0-based.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const DEFAULT_PIECE_SIZE: usize = 8;
pub const DEFAULT_Z_SIZE: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenomeLayout {
    piece_sizes: Vec<usize>,
    z_size: usize,
    offsets: Vec<usize>,
}

impl GenomeLayout {
    pub fn new(piece_sizes: Vec<usize>, z_size: usize) -> Result<Self> {
        if piece_sizes.is_empty() {
            return Err(Error::Layout("at least one attribute piece is required".into()));
        }
        if piece_sizes.contains(&0) {
            return Err(Error::Layout("attribute pieces must be non-empty".into()));
        }
        if z_size == 0 {
            return Err(Error::Layout(
                "the attribute-irrelevant part needs at least one coordinate".into(),
            ));
        }
        let mut offsets = Vec::with_capacity(piece_sizes.len());
        let mut at = 0;
        for &s in &piece_sizes {
            offsets.push(at);
            at += s;
        }
        Ok(Self {
            piece_sizes,
            z_size,
            offsets,
        })
    }

    /// `n` pieces of equal size.
    pub fn uniform(n: usize, piece_size: usize, z_size: usize) -> Result<Self> {
        Self::new(vec![piece_size; n], z_size)
    }

    pub fn n(&self) -> usize {
        self.piece_sizes.len()
    }

    pub fn piece_sizes(&self) -> &[usize] {
        &self.piece_sizes
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    pub fn total_len(&self) -> usize {
        self.attribute_len() + self.z_size
    }

    fn attribute_len(&self) -> usize {
        self.piece_sizes.iter().sum()
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n() {
            Ok(())
        } else {
            Err(Error::Index { index: i, n: self.n() })
        }
    }

    pub fn piece_range(&self, i: usize) -> Result<Range<usize>> {
        self.check_index(i)?;
        Ok(self.offsets[i]..self.offsets[i] + self.piece_sizes[i])
    }

    pub fn z_range(&self) -> Range<usize> {
        self.attribute_len()..self.total_len()
    }

    /// 1 inside piece `i`, 0 elsewhere.
    pub fn piece_mask(&self, i: usize) -> Result<Vec<f32>> {
        let r = self.piece_range(i)?;
        Ok((0..self.total_len())
            .map(|k| if r.contains(&k) { 1.0 } else { 0.0 })
            .collect())
    }

    /// 0 inside piece `i`, 1 elsewhere: the annihilation mask.
    pub fn keep_mask(&self, i: usize) -> Result<Vec<f32>> {
        Ok(self.piece_mask(i)?.into_iter().map(|v| 1.0 - v).collect())
    }
}

impl fmt::Display for GenomeLayout {
    /// `n sizes z`, e.g. `2 8,8 32`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<String> = self.piece_sizes.iter().map(|s| s.to_string()).collect();
        write!(f, "{} {} {}", self.n(), sizes.join(","), self.z_size)
    }
}

impl FromStr for GenomeLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Layout(format!("cannot parse layout `{s}`"));
        let mut it = s.split_whitespace();
        let n: usize = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let sizes: Vec<usize> = it
            .next()
            .ok_or_else(bad)?
            .split(',')
            .map(|v| v.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let z: usize = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        if it.next().is_some() || sizes.len() != n {
            return Err(bad());
        }
        Self::new(sizes, z)
    }
}

/// A flat latent vector read through a [`GenomeLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct LatentCode {
    layout: Arc<GenomeLayout>,
    values: Vec<f32>,
}

impl LatentCode {
    pub fn new(layout: Arc<GenomeLayout>, values: Vec<f32>) -> Result<Self> {
        if values.len() != layout.total_len() {
            return Err(Error::dim(format!(
                "latent code of length {} for layout of length {}",
                values.len(),
                layout.total_len()
            )));
        }
        Ok(Self { layout, values })
    }

    pub fn layout(&self) -> &Arc<GenomeLayout> {
        &self.layout
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn piece(&self, i: usize) -> Result<&[f32]> {
        Ok(&self.values[self.layout.piece_range(i)?])
    }

    pub fn z(&self) -> &[f32] {
        &self.values[self.layout.z_range()]
    }

    fn same_layout(&self, other: &LatentCode) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::Layout(format!(
                "codes use layouts `{}` and `{}`",
                self.layout, other.layout
            )));
        }
        Ok(())
    }

    fn with_piece(&self, i: usize, piece: &[f32]) -> Result<LatentCode> {
        let r = self.layout.piece_range(i)?;
        let mut values = self.values.clone();
        values[r].copy_from_slice(piece);
        Ok(LatentCode {
            layout: Arc::clone(&self.layout),
            values,
        })
    }

    /// Copy with piece `i` replaced by zeros.
    pub fn annihilate(&self, i: usize) -> Result<LatentCode> {
        let len = self.layout.piece_range(i)?.len();
        self.with_piece(i, &vec![0.0; len])
    }

    /// Interpolates piece `i` toward `direction`: `(1−alpha)·piece + alpha·direction`.
    pub fn interpolate_piece(&self, i: usize, direction: &[f32], alpha: f32) -> Result<LatentCode> {
        let piece = self.piece(i)?;
        if direction.len() != piece.len() {
            return Err(Error::Layout(format!(
                "direction of length {} for piece of length {}",
                direction.len(),
                piece.len()
            )));
        }
        let mixed: Vec<f32> = piece
            .iter()
            .zip(direction)
            .map(|(&p, &d)| (1.0 - alpha) * p + alpha * d)
            .collect();
        self.with_piece(i, &mixed)
    }
}

/// Exchanges piece `i` between two codes.
pub fn swap_piece(a: &LatentCode, b: &LatentCode, i: usize) -> Result<(LatentCode, LatentCode)> {
    a.same_layout(b)?;
    let pa = a.piece(i)?.to_vec();
    let pb = b.piece(i)?.to_vec();
    Ok((a.with_piece(i, &pb)?, b.with_piece(i, &pa)?))
}

/// Latents of the four children of a pair at attribute `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChildQuad {
    /// `Enc(A)` unchanged.
    pub a1: LatentCode,
    /// `Enc(B)` with piece `i` annihilated.
    pub b1: LatentCode,
    /// `Enc(A)` with piece `i` annihilated.
    pub a2: LatentCode,
    /// `Enc(B)` carrying A's piece `i`.
    pub b2: LatentCode,
}

impl ChildQuad {
    /// Checks every structural relation between the children and their parents.
    pub fn satisfies_invariants(&self, enc_a: &LatentCode, enc_b: &LatentCode, i: usize) -> bool {
        let Ok(r) = enc_a.layout.piece_range(i) else {
            return false;
        };
        let zero = |c: &LatentCode| c.values[r.clone()].iter().all(|&v| v == 0.0);
        let rest_eq = |c: &LatentCode, parent: &LatentCode| {
            c.values
                .iter()
                .zip(&parent.values)
                .enumerate()
                .all(|(k, (x, y))| r.contains(&k) || x.to_bits() == y.to_bits())
        };
        let bits = |x: &[f32], y: &[f32]| x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits());
        bits(&self.a1.values, &enc_a.values)
            && zero(&self.b1)
            && zero(&self.a2)
            && bits(&self.b2.values[r.clone()], &enc_a.values[r.clone()])
            && rest_eq(&self.b1, enc_b)
            && rest_eq(&self.a2, enc_a)
            && rest_eq(&self.b2, enc_b)
    }
}

/// Builds the four child latents for dominant `enc_a` and recessive `enc_b`.
pub fn crossbreed(enc_a: &LatentCode, enc_b: &LatentCode, i: usize) -> Result<ChildQuad> {
    enc_a.same_layout(enc_b)?;
    let b1 = enc_b.annihilate(i)?;
    let (b2, a2) = swap_piece(&b1, enc_a, i)?;
    let quad = ChildQuad {
        a1: enc_a.clone(),
        b1,
        a2,
        b2,
    };
    debug_assert!(quad.satisfies_invariants(enc_a, enc_b, i));
    Ok(quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn code(sizes: &[usize], z: usize, values: &[f32]) -> LatentCode {
        let layout = Arc::new(GenomeLayout::new(sizes.to_vec(), z).unwrap());
        LatentCode::new(layout, values.to_vec()).unwrap()
    }

    #[test]
    fn layout_rejects_missing_z() {
        assert!(GenomeLayout::new(vec![2], 0).is_err());
        assert!(GenomeLayout::new(vec![], 3).is_err());
        let l = GenomeLayout::new(vec![2, 3], 4).unwrap();
        assert_eq!(l.total_len(), 9);
        assert_eq!(l.piece_range(1).unwrap(), 2..5);
        assert_eq!(l.z_range(), 5..9);
        assert_eq!(l.to_string().parse::<GenomeLayout>().unwrap(), l);
    }

    #[test]
    fn annihilate_definition() {
        let c = code(&[2], 2, &[3.0, 4.0, 5.0, 6.0]);
        assert_eq!(c.annihilate(0).unwrap().values(), &[0.0, 0.0, 5.0, 6.0]);
        assert_eq!(c.values(), &[3.0, 4.0, 5.0, 6.0]);
        assert!(matches!(c.annihilate(1), Err(Error::Index { index: 1, n: 1 })));
        let z = c.annihilate(0).unwrap();
        assert_eq!(z.annihilate(0).unwrap(), z);
    }

    #[test]
    fn swap_definition_and_layout_mismatch() {
        let a = code(&[2], 1, &[1.0, 2.0, 9.0]);
        let b = code(&[2], 1, &[3.0, 4.0, 8.0]);
        let (a2, b2) = swap_piece(&a, &b, 0).unwrap();
        assert_eq!(a2.values(), &[3.0, 4.0, 9.0]);
        assert_eq!(b2.values(), &[1.0, 2.0, 8.0]);

        let two = code(&[1, 1], 1, &[0.0; 3]);
        let three = code(&[1, 1, 1], 1, &[0.0; 4]);
        assert!(matches!(swap_piece(&two, &three, 0), Err(Error::Layout(_))));
    }

    #[test]
    fn crossbreed_single_attribute() {
        let a = code(&[1], 1, &[2.0, 7.0]);
        let b = code(&[1], 1, &[3.0, 8.0]);
        let q = crossbreed(&a, &b, 0).unwrap();
        assert_eq!(q.a1.values(), &[2.0, 7.0]);
        assert_eq!(q.b1.values(), &[0.0, 8.0]);
        assert_eq!(q.a2.values(), &[0.0, 7.0]);
        assert_eq!(q.b2.values(), &[2.0, 8.0]);
    }

    #[test]
    fn crossbreed_two_attributes() {
        let a = code(&[1, 1], 1, &[5.0, 6.0, 7.0]);
        let b = code(&[1, 1], 1, &[8.0, 9.0, 1.0]);
        let q = crossbreed(&a, &b, 1).unwrap();
        assert_eq!(q.a1.values(), &[5.0, 6.0, 7.0]);
        assert_eq!(q.b1.values(), &[8.0, 0.0, 1.0]);
        assert_eq!(q.a2.values(), &[5.0, 0.0, 7.0]);
        assert_eq!(q.b2.values(), &[8.0, 6.0, 1.0]);
    }

    #[test]
    fn crossbreed_with_zero_dominant_piece() {
        let a = code(&[2], 1, &[0.0, 0.0, 4.0]);
        let b = code(&[2], 1, &[1.0, 1.0, 5.0]);
        let q = crossbreed(&a, &b, 0).unwrap();
        assert_eq!(q.a2, a);
        assert_eq!(q.b2.piece(0).unwrap(), &[0.0, 0.0]);
    }

    #[test]
    fn interpolation_endpoints() {
        let c = code(&[1], 1, &[2.0, 5.0]);
        assert_eq!(c.interpolate_piece(0, &[4.0], 0.0).unwrap(), c);
        assert_eq!(c.interpolate_piece(0, &[4.0], 1.0).unwrap().values(), &[4.0, 5.0]);
        assert_eq!(c.interpolate_piece(0, &[4.0], 0.5).unwrap().values(), &[3.0, 5.0]);
        assert!(matches!(
            c.interpolate_piece(0, &[4.0, 1.0], 0.5),
            Err(Error::Layout(_))
        ));
    }

    fn pair() -> impl Strategy<Value = (Vec<usize>, usize, Vec<f32>, Vec<f32>, usize)> {
        (prop::collection::vec(1usize..4, 1..4), 1usize..4).prop_flat_map(|(sizes, z)| {
            let len = sizes.iter().sum::<usize>() + z;
            let n = sizes.len();
            (
                Just(sizes),
                Just(z),
                prop::collection::vec(-10.0f32..10.0, len),
                prop::collection::vec(-10.0f32..10.0, len),
                0..n,
            )
        })
    }

    proptest! {
        #[test]
        fn crossbreed_preserves_outside_piece((sizes, z, va, vb, i) in pair()) {
            let a = code(&sizes, z, &va);
            let b = code(&sizes, z, &vb);
            let q = crossbreed(&a, &b, i).unwrap();
            prop_assert!(q.satisfies_invariants(&a, &b, i));
            prop_assert_eq!(q.a2.z(), a.z());
            prop_assert_eq!(q.b2.z(), b.z());
        }

        #[test]
        fn swap_is_an_involution((sizes, z, va, vb, i) in pair()) {
            let a = code(&sizes, z, &va);
            let b = code(&sizes, z, &vb);
            let (a2, b2) = swap_piece(&a, &b, i).unwrap();
            let (a3, b3) = swap_piece(&a2, &b2, i).unwrap();
            prop_assert_eq!(a3, a);
            prop_assert_eq!(b3, b);
        }

        #[test]
        fn annihilate_is_idempotent((sizes, z, va, _vb, i) in pair()) {
            let a = code(&sizes, z, &va);
            let once = a.annihilate(i).unwrap();
            prop_assert_eq!(once.annihilate(i).unwrap(), once);
        }
    }
}
