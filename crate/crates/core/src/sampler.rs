//! Pair scheduling and its analysis.
//!
//! Label patterns are enumerated in binary order with attribute 0 as the most
//! significant bit, so for two attributes the order is `(0,0), (0,1), (1,0), (1,1)`.
//! Attribute indices are 0-based throughout.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest harmonic index summed term by term; beyond it the asymptotic expansion is used.
const DIRECT_HARMONIC_LIMIT: u128 = 10_000_000;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `H_k = 1 + 1/2 + … + 1/k`, summed smallest term first.
pub fn harmonic(k: u128) -> f64 {
    if k <= DIRECT_HARMONIC_LIMIT {
        (1..=k).rev().map(|j| 1.0 / j as f64).sum()
    } else {
        let x = k as f64;
        let x2 = x * x;
        x.ln() + EULER_GAMMA + 1.0 / (2.0 * x) - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2)
    }
}

/// Label of pattern `p` over `n` attributes.
pub fn label_of(p: usize, n: usize) -> Vec<bool> {
    (0..n).map(|s| bit(p, s, n)).collect()
}

/// Pattern index of a label.
pub fn pattern_of(label: &[bool]) -> usize {
    label.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

fn bit(p: usize, s: usize, n: usize) -> bool {
    (p >> (n - 1 - s)) & 1 == 1
}

/// Image counts per label pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelCensus {
    n: usize,
    counts: Vec<u64>,
}

impl LabelCensus {
    pub const MAX_ATTRIBUTES: usize = 16;

    pub fn new(n: usize, counts: Vec<u64>) -> Result<Self> {
        if n == 0 || n > Self::MAX_ATTRIBUTES {
            return Err(Error::Spec(format!(
                "attribute count {n} outside 1..={}",
                Self::MAX_ATTRIBUTES
            )));
        }
        if counts.len() != 1 << n {
            return Err(Error::Spec(format!(
                "{n} attributes need {} pattern counts, got {}",
                1usize << n,
                counts.len()
            )));
        }
        Ok(Self { n, counts })
    }

    /// Infers `n` from the number of counts, which must be a power of two ≥ 2.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let len = counts.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Spec(format!(
                "census needs 2^n counts for some n ≥ 1, got {len}"
            )));
        }
        Self::new(len.trailing_zeros() as usize, counts)
    }

    pub fn uniform(n: usize, k: u64) -> Result<Self> {
        Self::new(n, vec![k; 1 << n.min(Self::MAX_ATTRIBUTES + 1)])
    }

    pub fn from_labels<L: AsRef<[bool]>>(n: usize, labels: &[L]) -> Result<Self> {
        let mut counts = vec![0u64; 1 << n];
        for l in labels {
            let l = l.as_ref();
            if l.len() != n {
                return Err(Error::Spec(format!(
                    "label of length {} in a {n}-attribute census",
                    l.len()
                )));
            }
            counts[pattern_of(l)] += 1;
        }
        Self::new(n, counts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Images with attribute `s` present and absent.
    pub fn sides(&self, s: usize) -> Result<(u64, u64)> {
        if s >= self.n {
            return Err(Error::Index { index: s, n: self.n });
        }
        let mut ones = 0;
        let mut zeros = 0;
        for (p, &c) in self.counts.iter().enumerate() {
            if bit(p, s, self.n) {
                ones += c;
            } else {
                zeros += c;
            }
        }
        Ok((ones, zeros))
    }

    /// One label per image, patterns in canonical order.
    pub fn expand_labels(&self) -> Vec<Vec<bool>> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(p, &c)| std::iter::repeat_n(label_of(p, self.n), c as usize))
            .collect()
    }

    fn square_sum(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128 * c as u128).sum()
    }
}

/// `ρ_s`: images having attribute `s` over images lacking it.
pub fn balancedness(census: &LabelCensus, s: usize) -> Result<f64> {
    let (ones, zeros) = census.sides(s)?;
    if zeros == 0 {
        return Err(Error::DegenerateAttribute(s));
    }
    Ok(ones as f64 / zeros as f64)
}

/// `(ρ + 1)² / (2ρ)`; symmetric under `ρ ↦ 1/ρ` with minimum 2 at `ρ = 1`.
pub fn criterion_value(rho: f64) -> f64 {
    (rho + 1.0) * (rho + 1.0) / (2.0 * rho)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Criterion {
    /// `min_s (ρ_s + 1)² / (2ρ_s)`.
    pub value: f64,
    /// Whether `n ≤ value`, i.e. iterative scheduling is guaranteed no slower.
    pub holds_for_n: bool,
    pub per_attribute: Vec<f64>,
}

pub fn criterion_margin(census: &LabelCensus) -> Result<Criterion> {
    let per_attribute = (0..census.n())
        .map(|s| balancedness(census, s).map(criterion_value))
        .collect::<Result<Vec<_>>>()?;
    let value = per_attribute.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Criterion {
        value,
        holds_for_n: census.n() as f64 <= value,
        per_attribute,
    })
}

/// Expected uniform draws with replacement from `m` items until a fixed `k`-subset is seen: `m·H_k`.
pub fn coupon_expectation(m: u64, k: u64) -> Result<f64> {
    if k < 1 || k > m {
        return Err(Error::Domain(format!("subset size {k} not in 1..={m}")));
    }
    Ok(m as f64 * harmonic(k as u128))
}

/// Ordered pairs of images whose labels differ: `m² − Σ mᵢ²`.
pub fn useful_ordered_pairs(census: &LabelCensus) -> u128 {
    let m = census.total() as u128;
    m * m - census.square_sum()
}

/// `E₁ = m²·H(m² − Σ mᵢ²)`: expected random ordered draws until every useful pair is seen.
pub fn expected_random_pairs(census: &LabelCensus) -> Result<f64> {
    let useful = useful_ordered_pairs(census);
    if useful == 0 {
        return Err(Error::NoUsefulPairs);
    }
    let m = census.total() as f64;
    Ok(m * m * harmonic(useful))
}

/// Per-attribute terms `2·(Σ_{I_s} mᵢ)(Σ_{J_s} mⱼ)·H(m² − Σ_k (m_{i_k} + m_{j_k})²)`, where
/// `i_k` and `j_k` are the labels that agree everywhere except at `s`.
pub fn iterative_terms(census: &LabelCensus) -> Vec<f64> {
    let n = census.n();
    let m = census.total() as u128;
    (0..n)
        .map(|s| {
            let (ones, zeros) = census.sides(s).expect("index in range");
            let merged: u128 = census
                .counts
                .iter()
                .enumerate()
                .filter(|&(p, _)| bit(p, s, n))
                .map(|(p, &c)| {
                    let partner = p & !(1 << (n - 1 - s));
                    let sum = c as u128 + census.counts[partner] as u128;
                    sum * sum
                })
                .sum();
            2.0 * ones as f64 * zeros as f64 * harmonic(m * m - merged)
        })
        .collect()
}

/// Upper bound on `E₂`: `n · max_s` of [`iterative_terms`].
pub fn expected_iterative_bound(census: &LabelCensus) -> Result<f64> {
    if census.n() == 1 {
        return Err(Error::DegenerateBound(
            "with one attribute every merged class covers the whole dataset".into(),
        ));
    }
    let worst = iterative_terms(census)
        .into_iter()
        .fold(0.0f64, f64::max);
    if worst == 0.0 {
        return Err(Error::DegenerateBound(
            "no attribute has useful pairs outside its own position".into(),
        ));
    }
    Ok(census.n() as f64 * worst)
}

/// `a` has attribute `attribute`, `b` lacks it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UsefulPair {
    pub a: usize,
    pub b: usize,
    pub attribute: usize,
}

impl UsefulPair {
    pub fn is_valid<L: AsRef<[bool]>>(&self, labels: &[L]) -> bool {
        let (Some(a), Some(b)) = (labels.get(self.a), labels.get(self.b)) else {
            return false;
        };
        let (a, b) = (a.as_ref(), b.as_ref());
        a.get(self.attribute) == Some(&true) && b.get(self.attribute) == Some(&false)
    }
}

/// Cycles the attribute index and draws `A` uniformly from images having it and
/// `B` uniformly from images lacking it.
#[derive(Clone, Debug)]
pub struct IterativeSampler {
    ones: Vec<Vec<usize>>,
    zeros: Vec<Vec<usize>>,
    next_attribute: usize,
    warned: Vec<bool>,
}

impl IterativeSampler {
    pub fn new<L: AsRef<[bool]>>(n: usize, labels: &[L]) -> Result<Self> {
        let mut ones = vec![Vec::new(); n];
        let mut zeros = vec![Vec::new(); n];
        for (k, l) in labels.iter().enumerate() {
            let l = l.as_ref();
            if l.len() != n {
                return Err(Error::Spec(format!(
                    "image {k} has {} label bits, expected {n}",
                    l.len()
                )));
            }
            for s in 0..n {
                if l[s] {
                    ones[s].push(k);
                } else {
                    zeros[s].push(k);
                }
            }
        }
        Ok(Self {
            ones,
            zeros,
            next_attribute: 0,
            warned: vec![false; n],
        })
    }

    pub fn n(&self) -> usize {
        self.ones.len()
    }

    pub fn next_attribute(&self) -> usize {
        self.next_attribute
    }

    pub fn set_next_attribute(&mut self, s: usize) -> Result<()> {
        if s >= self.n() {
            return Err(Error::Index { index: s, n: self.n() });
        }
        self.next_attribute = s;
        Ok(())
    }

    /// Advances to the next attribute with both sides populated.
    pub fn next_usable_attribute(&mut self) -> Result<usize> {
        for _ in 0..self.n() {
            let s = self.next_attribute;
            self.next_attribute = (s + 1) % self.n();
            if self.ones[s].is_empty() || self.zeros[s].is_empty() {
                if !self.warned[s] {
                    warn!("attribute {} has an empty side; skipping it", s + 1);
                    self.warned[s] = true;
                }
                continue;
            }
            return Ok(s);
        }
        Err(Error::SchedulerExhausted)
    }

    /// A uniformly drawn pair opposite at attribute `s`.
    pub fn draw_for(&self, s: usize, rng: &mut impl Rng) -> UsefulPair {
        let (ones, zeros) = (&self.ones[s], &self.zeros[s]);
        UsefulPair {
            a: ones[rng.random_range(0..ones.len())],
            b: zeros[rng.random_range(0..zeros.len())],
            attribute: s,
        }
    }

    pub fn next_pair(&mut self, rng: &mut impl Rng) -> Result<UsefulPair> {
        let s = self.next_usable_attribute()?;
        Ok(self.draw_for(s, rng))
    }

    /// `batch` pairs for one attribute; the attribute counter advances once.
    pub fn next_batch(&mut self, batch: usize, rng: &mut impl Rng) -> Result<Vec<UsefulPair>> {
        let s = self.next_usable_attribute()?;
        Ok((0..batch).map(|_| self.draw_for(s, rng)).collect())
    }
}

/// Two independent uniform draws, ordered and with replacement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomDraw {
    pub first: usize,
    pub second: usize,
    pub useful: bool,
}

pub fn random_pair<L: AsRef<[bool]>>(labels: &[L], rng: &mut impl Rng) -> Result<RandomDraw> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let first = rng.random_range(0..labels.len());
    let second = rng.random_range(0..labels.len());
    Ok(RandomDraw {
        first,
        second,
        useful: labels[first].as_ref() != labels[second].as_ref(),
    })
}

/// Turns a useful random draw into an oriented pair, choosing uniformly among
/// the attributes where the labels differ.
pub fn orient_random<L: AsRef<[bool]>>(labels: &[L], draw: RandomDraw, rng: &mut impl Rng) -> Option<UsefulPair> {
    if !draw.useful {
        return None;
    }
    let (x, y) = (labels[draw.first].as_ref(), labels[draw.second].as_ref());
    let differing: Vec<usize> = (0..x.len()).filter(|&s| x[s] != y[s]).collect();
    let s = differing[rng.random_range(0..differing.len())];
    let (a, b) = if x[s] {
        (draw.first, draw.second)
    } else {
        (draw.second, draw.first)
    };
    Some(UsefulPair { a, b, attribute: s })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Random,
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimStats {
    pub mean: f64,
    /// Standard error of the mean; NaN for a single run.
    pub stderr: f64,
    pub runs: usize,
}

impl SimStats {
    fn from_samples(samples: &[u64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().map(|&v| v as f64).sum::<f64>() / n;
        let var = samples
            .iter()
            .map(|&v| (v as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        Self {
            mean,
            stderr: (var / n).sqrt(),
            runs: samples.len(),
        }
    }
}

/// Independent stream for run `run`, so results do not depend on scheduling.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

fn simulate<F>(runs: usize, seed: u64, one_run: F) -> Result<SimStats>
where
    F: Fn(&mut ChaCha8Rng) -> u64 + Sync,
{
    if runs == 0 {
        return Err(Error::Domain("at least one run is required".into()));
    }
    let samples: Vec<u64> = (0..runs as u64)
        .into_par_iter()
        .map(|r| one_run(&mut run_rng(seed, r)))
        .collect();
    Ok(SimStats::from_samples(&samples))
}

/// Monte Carlo estimate of [`coupon_expectation`].
pub fn simulate_coupon(m: u64, k: u64, runs: usize, seed: u64) -> Result<SimStats> {
    coupon_expectation(m, k)?;
    simulate(runs, seed, |rng| {
        let mut seen = vec![false; k as usize];
        let mut left = k;
        let mut draws = 0;
        while left > 0 {
            draws += 1;
            let x = rng.random_range(0..m) as usize;
            if x < k as usize && !seen[x] {
                seen[x] = true;
                left -= 1;
            }
        }
        draws
    })
}

/// Draws pairs by `strategy` until every useful pair has been seen and reports
/// the mean number of draws.
///
/// Random pairing collects ordered pairs of differently labelled images. An
/// iterative draw is oriented by construction, so it collects the unordered
/// pair; every draw counts, whichever attribute it was made for.
pub fn simulate_collection(census: &LabelCensus, strategy: Strategy, runs: usize, seed: u64) -> Result<SimStats> {
    let useful = useful_ordered_pairs(census);
    if useful == 0 {
        return Err(Error::NoUsefulPairs);
    }
    let labels = census.expand_labels();
    let m = labels.len();
    let patterns: Vec<usize> = labels.iter().map(|l| pattern_of(l)).collect();
    match strategy {
        Strategy::Random => simulate(runs, seed, |rng| {
            let mut seen = vec![false; m * m];
            let mut left = useful;
            let mut draws = 0;
            while left > 0 {
                draws += 1;
                let a = rng.random_range(0..m);
                let b = rng.random_range(0..m);
                if patterns[a] != patterns[b] && !seen[a * m + b] {
                    seen[a * m + b] = true;
                    left -= 1;
                }
            }
            draws
        }),
        Strategy::Iterative => {
            let sampler = IterativeSampler::new(census.n(), &labels)?;
            simulate(runs, seed, |rng| {
                let mut sampler = sampler.clone();
                let mut seen = vec![false; m * m];
                let mut left = useful / 2;
                let mut draws = 0;
                while left > 0 {
                    draws += 1;
                    let pair = sampler.next_pair(rng).expect("useful pairs exist");
                    let key = pair.a.min(pair.b) * m + pair.a.max(pair.b);
                    if !seen[key] {
                        seen[key] = true;
                        left -= 1;
                    }
                }
                draws
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest};
    use super::Strategy;

    fn table1(m: u64) -> LabelCensus {
        LabelCensus::new(2, vec![1, 1, m, m]).unwrap()
    }

    /// Harmonic numbers as exact rationals folded into f64 only at the end.
    fn harmonic_oracle(k: u64) -> f64 {
        let (mut num, mut den) = (0u128, 1u128);
        for j in 1..=k as u128 {
            num = num * j + den;
            den *= j;
            let g = gcd(num, den);
            num /= g;
            den /= g;
        }
        num as f64 / den as f64
    }

    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn harmonic_matches_exact_rationals() {
        for k in 1..=20 {
            assert!((harmonic(k as u128) - harmonic_oracle(k)).abs() < 1e-15);
        }
        assert!((harmonic_oracle(6) - 2.45).abs() < 1e-15);
        let direct = harmonic(DIRECT_HARMONIC_LIMIT);
        let x = DIRECT_HARMONIC_LIMIT as f64;
        let asym = x.ln() + EULER_GAMMA + 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x);
        assert!((direct - asym).abs() < 1e-9);
    }

    #[test]
    fn census_enumeration() {
        let c = table1(100);
        assert_eq!(c.total(), 202);
        assert_eq!(label_of(2, 2), vec![true, false]);
        assert_eq!(pattern_of(&[true, false]), 2);
        assert_eq!(c.sides(0).unwrap(), (200, 2));
        assert_eq!(c.sides(1).unwrap(), (101, 101));
        assert!(LabelCensus::new(2, vec![1, 2, 3]).is_err());
        assert_eq!(LabelCensus::from_counts(vec![1, 1]).unwrap().n(), 1);
        let labels = c.expand_labels();
        assert_eq!(LabelCensus::from_labels(2, &labels).unwrap(), c);
    }

    #[test]
    fn balancedness_examples() {
        let c = LabelCensus::new(1, vec![5, 5]).unwrap();
        assert_eq!(balancedness(&c, 0).unwrap(), 1.0);
        assert_eq!(balancedness(&table1(100), 0).unwrap(), 100.0);
        assert_eq!(balancedness(&table1(100), 1).unwrap(), 1.0);
        let all_ones = LabelCensus::new(1, vec![0, 4]).unwrap();
        assert!(matches!(balancedness(&all_ones, 0), Err(Error::DegenerateAttribute(0))));
    }

    #[test]
    fn criterion_examples() {
        let c = criterion_margin(&LabelCensus::uniform(2, 3).unwrap()).unwrap();
        assert_eq!(c.value, 2.0);
        assert!(c.holds_for_n);
        let c = criterion_margin(&LabelCensus::uniform(3, 3).unwrap()).unwrap();
        assert_eq!(c.value, 2.0);
        assert!(!c.holds_for_n);
        let c = criterion_margin(&table1(100)).unwrap();
        assert!((c.per_attribute[0] - 51.005).abs() < 1e-12);
        assert_eq!(c.value, 2.0);
        assert!(c.holds_for_n);
    }

    #[test]
    fn coupon_examples() {
        assert_eq!(coupon_expectation(1, 1).unwrap(), 1.0);
        assert!((coupon_expectation(6, 6).unwrap() - 14.7).abs() < 1e-12);
        assert!((coupon_expectation(10, 5).unwrap() - 22.833_333_333_333_33).abs() < 1e-9);
        assert!(coupon_expectation(3, 4).is_err());
        assert!(coupon_expectation(3, 0).is_err());
    }

    #[test]
    fn random_pair_expectation_examples() {
        let c = LabelCensus::new(1, vec![1, 1]).unwrap();
        assert!((expected_random_pairs(&c).unwrap() - 6.0).abs() < 1e-12);
        let c = LabelCensus::new(1, vec![2, 2]).unwrap();
        assert!((expected_random_pairs(&c).unwrap() - 16.0 * harmonic_oracle(8)).abs() < 1e-9);
        assert!((expected_random_pairs(&c).unwrap() - 43.4857).abs() < 1e-4);
        let c = LabelCensus::new(1, vec![3, 0]).unwrap();
        assert!(matches!(expected_random_pairs(&c), Err(Error::NoUsefulPairs)));
    }

    #[test]
    fn iterative_bound_examples() {
        let c = LabelCensus::uniform(2, 1).unwrap();
        let terms = iterative_terms(&c);
        assert!((terms[0] - 8.0 * harmonic_oracle(8)).abs() < 1e-9);
        let bound = expected_iterative_bound(&c).unwrap();
        assert!((bound - 43.4857).abs() < 1e-4);
        let e1 = expected_random_pairs(&c).unwrap();
        assert!((e1 - 16.0 * harmonic_oracle(12)).abs() < 1e-9);
        assert!((e1 - 49.6514).abs() < 1e-4);
        assert!(bound <= e1);

        // (0,1) and (1,1) absent: the merged class for s = 0 pairs (1,1) with (0,1), both empty.
        let c = LabelCensus::new(2, vec![2, 0, 3, 0]).unwrap();
        let terms = iterative_terms(&c);
        assert!((terms[0] - 2.0 * 3.0 * 2.0 * harmonic(25 - 25)).abs() < 1e-12);
        assert!(matches!(expected_iterative_bound(&c), Err(Error::DegenerateBound(_))));

        let c = LabelCensus::new(1, vec![2, 2]).unwrap();
        assert!(matches!(expected_iterative_bound(&c), Err(Error::DegenerateBound(_))));
    }

    fn labels_of(c: &LabelCensus) -> Vec<Vec<bool>> {
        c.expand_labels()
    }

    #[test]
    fn iterative_sampler_cycles() {
        let labels = labels_of(&LabelCensus::uniform(2, 3).unwrap());
        let mut s = IterativeSampler::new(2, &labels).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let attrs: Vec<usize> = (0..4).map(|_| s.next_pair(&mut rng).unwrap().attribute).collect();
        assert_eq!(attrs, vec![0, 1, 0, 1]);
    }

    #[test]
    fn iterative_sampler_skips_degenerate_attributes() {
        let labels = vec![vec![true, true], vec![false, true]];
        let mut s = IterativeSampler::new(2, &labels).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..4 {
            assert_eq!(s.next_pair(&mut rng).unwrap().attribute, 0);
        }
        let labels = vec![vec![true], vec![true]];
        let mut s = IterativeSampler::new(1, &labels).unwrap();
        assert!(matches!(s.next_pair(&mut rng), Err(Error::SchedulerExhausted)));
    }

    #[test]
    fn rare_side_is_drawn_uniformly() {
        let labels = labels_of(&table1(100));
        let mut s = IterativeSampler::new(2, &labels).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut hits = [0usize; 2];
        let draws = 20_000;
        for _ in 0..draws {
            s.set_next_attribute(0).unwrap();
            let p = s.next_pair(&mut rng).unwrap();
            assert!(p.b < 2, "B must be one of the two rare images");
            hits[p.b] += 1;
        }
        let frac = hits[0] as f64 / draws as f64;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    #[test]
    fn random_pair_usefulness() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let single = vec![vec![true]];
        for _ in 0..50 {
            assert!(!random_pair(&single, &mut rng).unwrap().useful);
        }
        let empty: Vec<Vec<bool>> = vec![];
        assert!(random_pair(&empty, &mut rng).is_err());

        // counts (1,1): 2 of the 4 ordered pairs are useful.
        let ones = labels_of(&LabelCensus::new(1, vec![1, 1]).unwrap());
        let useful = (0..2)
            .flat_map(|a| (0..2).map(move |b| (a, b)))
            .filter(|&(a, b)| ones[a] != ones[b])
            .count();
        assert_eq!(useful, 2);

        let labels = labels_of(&LabelCensus::new(1, vec![2, 2]).unwrap());
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| random_pair(&labels, &mut rng).unwrap().useful)
            .count();
        let frac = hits as f64 / draws as f64;
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
    }

    #[test]
    fn simulated_random_collection_matches_closed_form() {
        for counts in [vec![1, 1], vec![2, 1], vec![1, 2, 0, 1], vec![2, 0, 1, 1], vec![1, 1, 1, 1]] {
            let c = LabelCensus::from_counts(counts.clone()).unwrap();
            let exact = expected_random_pairs(&c).unwrap();
            let sim = simulate_collection(&c, Strategy::Random, 20_000, 17).unwrap();
            assert!(
                (sim.mean - exact).abs() < 3.0 * sim.stderr,
                "{counts:?}: {} vs {exact} (se {})",
                sim.mean,
                sim.stderr
            );
        }
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let c = table1(3);
        let a = simulate_collection(&c, Strategy::Iterative, 200, 9).unwrap();
        let b = simulate_collection(&c, Strategy::Iterative, 200, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn orient_random_respects_labels() {
        let labels = vec![vec![false, true], vec![true, true]];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draw = RandomDraw { first: 0, second: 1, useful: true };
        let p = orient_random(&labels, draw, &mut rng).unwrap();
        assert_eq!(p, UsefulPair { a: 1, b: 0, attribute: 0 });
        let useless = RandomDraw { first: 1, second: 1, useful: false };
        assert!(orient_random(&labels, useless, &mut rng).is_none());
    }

    proptest! {
        #[test]
        fn sampler_pairs_are_valid_and_fair(counts in prop::collection::vec(1u64..4, 8), k in 1usize..6, seed in any::<u64>()) {
            let c = LabelCensus::new(3, counts).unwrap();
            let labels = c.expand_labels();
            let mut s = IterativeSampler::new(3, &labels).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut uses = [0usize; 3];
            for _ in 0..3 * k {
                let p = s.next_pair(&mut rng).unwrap();
                prop_assert!(p.is_valid(&labels));
                uses[p.attribute] += 1;
            }
            prop_assert_eq!(uses, [k; 3]);
        }

        #[test]
        fn criterion_is_reciprocal_symmetric(rho in 1e-3f64..1e3) {
            prop_assert!((criterion_value(rho) - criterion_value(1.0 / rho)).abs() < 1e-12);
            prop_assert!(criterion_value(rho) >= 2.0);
        }

        #[test]
        fn two_attribute_bound_never_exceeds_random(counts in prop::collection::vec(1u64..20, 4)) {
            let c = LabelCensus::new(2, counts).unwrap();
            prop_assert!(expected_iterative_bound(&c).unwrap() <= expected_random_pairs(&c).unwrap());
        }
    }
}
