//! Trainable string encoder: hashed character n-grams through a two-layer
//! map to a fixed-dimension, optionally unit-normalised embedding.
//!
//! Features are hashed with 64-bit FNV-1a over the UTF-8 bytes of each
//! n-gram (offset basis `0xcbf29ce484222325`, prime `0x100000001b3`), taken
//! modulo the bucket count. The n-grams are drawn from the text wrapped in
//! `^` and `$` boundary markers.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, Matrix};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("mention is empty after trimming and cannot be encoded")]
    Unencodable,
    #[error("invalid encoder dimensions: {0}")]
    Dimensions(&'static str),
}

/// Shape and featurisation settings of an encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub buckets: usize,
    pub hidden: usize,
    pub dim: usize,
    pub normalize_output: bool,
    /// Case-fold text before extracting n-grams. Off by default.
    pub lowercase: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            n_min: 2,
            n_max: 4,
            buckets: 1 << 14,
            hidden: 256,
            dim: 256,
            normalize_output: true,
            lowercase: false,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), EncodeError> {
        if self.n_min == 0 || self.n_max < self.n_min {
            return Err(EncodeError::Dimensions("n-gram bounds must satisfy 1 <= n_min <= n_max"));
        }
        if self.buckets == 0 || self.hidden == 0 || self.dim == 0 {
            return Err(EncodeError::Dimensions("buckets, hidden and dim must be >= 1"));
        }
        if self.buckets > u32::MAX as usize {
            return Err(EncodeError::Dimensions("bucket count must fit in 32 bits"));
        }
        Ok(())
    }
}

/// Sparse n-gram count vector, indices strictly increasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseFeatures {
    pub indices: Vec<u32>,
    pub counts: Vec<f64>,
}

impl SparseFeatures {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().map(|&i| i as usize).zip(self.counts.iter().copied())
    }
}

pub fn featurize(
    text: &str,
    n_min: usize,
    n_max: usize,
    buckets: usize,
    lowercase: bool,
) -> Result<SparseFeatures, EncodeError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(EncodeError::Unencodable);
    }
    let mut padded = String::with_capacity(trimmed.len() + 2);
    padded.push('^');
    if lowercase {
        padded.extend(trimmed.chars().flat_map(char::to_lowercase));
    } else {
        padded.push_str(trimmed);
    }
    padded.push('$');

    // byte offsets of every char boundary, including the end
    let bounds: Vec<usize> = padded
        .char_indices()
        .map(|(i, _)| i)
        .chain(core::iter::once(padded.len()))
        .collect();
    let n_chars = bounds.len() - 1;

    let mut hits: Vec<u32> = Vec::new();
    for n in n_min..=n_max {
        if n > n_chars {
            break;
        }
        for start in 0..=n_chars - n {
            let gram = &padded.as_bytes()[bounds[start]..bounds[start + n]];
            hits.push((fnv1a64(gram) % buckets as u64) as u32);
        }
    }
    hits.sort_unstable();

    let mut features = SparseFeatures::default();
    for idx in hits {
        match features.indices.last() {
            Some(&last) if last == idx => *features.counts.last_mut().unwrap() += 1.0,
            _ => {
                features.indices.push(idx);
                features.counts.push(1.0);
            }
        }
    }
    Ok(features)
}

/// Encoder weights.
///
/// `w1` is stored feature-major: row `j` holds column `j` of the h×V input
/// matrix, so a sparse input touches contiguous memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderParams {
    pub config: EncoderConfig,
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

/// Cached intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct Activation {
    pub features: SparseFeatures,
    pub pre_hidden: Vec<f64>,
    pub hidden: Vec<f64>,
    pub raw: Vec<f64>,
    pub raw_norm: f64,
    pub output: Vec<f64>,
}

impl Activation {
    fn normalized(&self, config: &EncoderConfig) -> bool {
        config.normalize_output && self.raw_norm >= 1e-12
    }
}

impl EncoderParams {
    /// Weights uniform in `[-s, s]` with `s = 1/sqrt(fan_in)`, biases zero.
    pub fn init(config: EncoderConfig, seed: u64) -> Result<Self, EncodeError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s1 = 1.0 / linalg::sqrt(config.buckets as f64);
        let s2 = 1.0 / linalg::sqrt(config.hidden as f64);
        let mut w1 = Matrix::zeros(config.buckets, config.hidden);
        for w in w1.as_mut_slice() {
            *w = rng.random_range(-s1..=s1);
        }
        let mut w2 = Matrix::zeros(config.dim, config.hidden);
        for w in w2.as_mut_slice() {
            *w = rng.random_range(-s2..=s2);
        }
        Ok(EncoderParams {
            config,
            w1,
            b1: vec![0.0; config.hidden],
            w2,
            b2: vec![0.0; config.dim],
        })
    }

    pub fn zeros(config: EncoderConfig) -> Result<Self, EncodeError> {
        config.validate()?;
        Ok(EncoderParams {
            config,
            w1: Matrix::zeros(config.buckets, config.hidden),
            b1: vec![0.0; config.hidden],
            w2: Matrix::zeros(config.dim, config.hidden),
            b2: vec![0.0; config.dim],
        })
    }

    /// Checks that every tensor agrees with `config` and is finite.
    pub fn validate(&self) -> Result<(), EncodeError> {
        let c = &self.config;
        c.validate()?;
        if self.w1.rows() != c.buckets || self.w1.cols() != c.hidden {
            return Err(EncodeError::Dimensions("w1 shape does not match buckets x hidden"));
        }
        if self.w2.rows() != c.dim || self.w2.cols() != c.hidden {
            return Err(EncodeError::Dimensions("w2 shape does not match dim x hidden"));
        }
        if self.b1.len() != c.hidden || self.b2.len() != c.dim {
            return Err(EncodeError::Dimensions("bias length mismatch"));
        }
        let finite = self.w1.is_finite()
            && self.w2.is_finite()
            && self.b1.iter().chain(&self.b2).all(|x| x.is_finite());
        if !finite {
            return Err(EncodeError::Dimensions("parameters contain non-finite values"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn featurize(&self, text: &str) -> Result<SparseFeatures, EncodeError> {
        let c = &self.config;
        featurize(text, c.n_min, c.n_max, c.buckets, c.lowercase)
    }

    pub fn forward(&self, text: &str) -> Result<Activation, EncodeError> {
        Ok(self.forward_features(self.featurize(text)?))
    }

    pub fn forward_features(&self, features: SparseFeatures) -> Activation {
        let mut pre_hidden = self.b1.clone();
        for (j, x) in features.iter() {
            for (h, w) in pre_hidden.iter_mut().zip(self.w1.row(j)) {
                *h += w * x;
            }
        }
        let hidden: Vec<f64> = pre_hidden.iter().map(|&v| v.max(0.0)).collect();
        let mut raw = self.w2.mul_vec(&hidden);
        for (r, b) in raw.iter_mut().zip(&self.b2) {
            *r += b;
        }
        let raw_norm = linalg::norm(&raw);
        let mut output = raw.clone();
        if self.config.normalize_output && raw_norm >= 1e-12 {
            for o in output.iter_mut() {
                *o /= raw_norm;
            }
        }
        Activation { features, pre_hidden, hidden, raw, raw_norm, output }
    }

    pub fn encode(&self, text: &str) -> Result<Vec<f64>, EncodeError> {
        Ok(self.forward(text)?.output)
    }

    /// Gradient of `upstream · output` with respect to every parameter.
    pub fn encode_backward(&self, text: &str, upstream: &[f64]) -> Result<Gradients, EncodeError> {
        let act = self.forward(text)?;
        let mut grads = Gradients::zeros(&self.config);
        self.backward_into(&act, upstream, 1.0, &mut grads);
        Ok(grads)
    }

    /// Accumulates `scale * d(upstream · output)/dθ` into `grads`.
    pub fn backward_into(&self, act: &Activation, upstream: &[f64], scale: f64, grads: &mut Gradients) {
        assert_eq!(upstream.len(), self.config.dim, "upstream gradient has wrong length");
        // d/d raw
        let d_raw: Vec<f64> = if act.normalized(&self.config) {
            let proj = linalg::dot(&act.output, upstream);
            upstream
                .iter()
                .zip(&act.output)
                .map(|(u, o)| scale * (u - o * proj) / act.raw_norm)
                .collect()
        } else {
            upstream.iter().map(|u| scale * u).collect()
        };

        for (gb, d) in grads.b2.iter_mut().zip(&d_raw) {
            *gb += d;
        }
        for (i, &d) in d_raw.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            for (g, a) in grads.w2.row_mut(i).iter_mut().zip(&act.hidden) {
                *g += d * a;
            }
        }

        let mut d_pre = self.w2.tmul_vec(&d_raw);
        for (d, &p) in d_pre.iter_mut().zip(&act.pre_hidden) {
            if p <= 0.0 {
                *d = 0.0;
            }
        }
        for (gb, d) in grads.b1.iter_mut().zip(&d_pre) {
            *gb += d;
        }
        for (j, x) in act.features.iter() {
            for (g, d) in grads.w1.row_mut(j).iter_mut().zip(&d_pre) {
                *g += d * x;
            }
        }
    }

    /// `w ← w − lr·(g + weight_decay·w)` applied to every parameter.
    pub fn apply_update(&mut self, grads: &Gradients, learning_rate: f64, weight_decay: f64) {
        fn step(w: &mut [f64], g: &[f64], lr: f64, wd: f64) {
            for (w, g) in w.iter_mut().zip(g) {
                *w -= lr * (g + wd * *w);
            }
        }
        step(self.w1.as_mut_slice(), grads.w1.as_slice(), learning_rate, weight_decay);
        step(&mut self.b1, &grads.b1, learning_rate, weight_decay);
        step(self.w2.as_mut_slice(), grads.w2.as_slice(), learning_rate, weight_decay);
        step(&mut self.b2, &grads.b2, learning_rate, weight_decay);
    }
}

/// Parameter-shaped gradient buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

impl Gradients {
    pub fn zeros(config: &EncoderConfig) -> Self {
        Gradients {
            w1: Matrix::zeros(config.buckets, config.hidden),
            b1: vec![0.0; config.hidden],
            w2: Matrix::zeros(config.dim, config.hidden),
            b2: vec![0.0; config.dim],
        }
    }

    pub fn clear(&mut self) {
        self.w1.as_mut_slice().fill(0.0);
        self.b1.fill(0.0);
        self.w2.as_mut_slice().fill(0.0);
        self.b2.fill(0.0);
    }

    pub fn is_zero(&self) -> bool {
        self.w1.as_slice().iter().chain(&self.b1).chain(self.w2.as_slice()).chain(&self.b2).all(|&g| g == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> EncoderConfig {
        EncoderConfig { n_min: 2, n_max: 3, buckets: 64, hidden: 8, dim: 5, normalize_output: true, lowercase: false }
    }

    #[test]
    fn fnv_reference_values() {
        // published FNV-1a 64 test vectors
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn trigram_features_of_ab() {
        let f = featurize("ab", 3, 3, 1 << 20, false).unwrap();
        let expected: u32 = f.counts.iter().map(|&c| c as u32).sum();
        assert_eq!(expected, 2);
        let a = (fnv1a64("^ab".as_bytes()) % (1 << 20)) as u32;
        let b = (fnv1a64("ab$".as_bytes()) % (1 << 20)) as u32;
        let mut want = vec![a, b];
        want.sort();
        assert_eq!(f.indices, want);
    }

    #[test]
    fn single_char_gives_one_trigram() {
        let f = featurize("a", 3, 3, 1 << 20, false).unwrap();
        assert_eq!(f.nnz(), 1);
        assert_eq!(f.counts, vec![1.0]);
        assert_eq!(f.indices[0], (fnv1a64("^a$".as_bytes()) % (1 << 20)) as u32);
    }

    #[test]
    fn empty_text_is_unencodable() {
        assert_eq!(featurize("   ", 2, 4, 16, false), Err(EncodeError::Unencodable));
        let p = EncoderParams::init(small_config(), 1).unwrap();
        assert_eq!(p.encode(""), Err(EncodeError::Unencodable));
    }

    #[test]
    fn case_folding_is_opt_in() {
        let kept = featurize("POS", 2, 3, 1 << 16, false).unwrap();
        let folded = featurize("POS", 2, 3, 1 << 16, true).unwrap();
        assert_ne!(kept, folded);
        assert_eq!(folded, featurize("pos", 2, 3, 1 << 16, false).unwrap());
    }

    #[test]
    fn featurize_is_order_sensitive() {
        let ab = featurize("ab", 2, 4, 1 << 16, false).unwrap();
        let ba = featurize("ba", 2, 4, 1 << 16, false).unwrap();
        assert_ne!(ab, ba);
    }

    #[test]
    fn zero_params_give_zero_vector() {
        let p = EncoderParams::zeros(small_config()).unwrap();
        let e = p.encode("koorts").unwrap();
        assert!(e.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn output_is_unit_norm() {
        let p = EncoderParams::init(small_config(), 3).unwrap();
        for t in ["koorts", "hartinfarct", "MI"] {
            let e = p.encode(t).unwrap();
            assert!((linalg::norm(&e) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let c = small_config();
        let a = EncoderParams::init(c, 7).unwrap();
        let b = EncoderParams::init(c, 7).unwrap();
        let other = EncoderParams::init(c, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
        let s1 = 1.0 / (c.buckets as f64).sqrt();
        let s2 = 1.0 / (c.hidden as f64).sqrt();
        assert!(a.w1.as_slice().iter().all(|w| w.abs() <= s1));
        assert!(a.w2.as_slice().iter().all(|w| w.abs() <= s2));
        assert!(a.b1.iter().chain(&a.b2).all(|&b| b == 0.0));
    }

    #[test]
    fn encode_is_bitwise_deterministic() {
        let p = EncoderParams::init(small_config(), 11).unwrap();
        let a = p.encode("myocardinfarct").unwrap();
        let b = p.encode("myocardinfarct").unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let p = EncoderParams::init(small_config(), 5).unwrap();
        let g = p.encode_backward("griep", &[0.0; 5]).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn unnormalized_gradient_has_outer_product_form() {
        let mut c = small_config();
        c.normalize_output = false;
        let mut p = EncoderParams::init(c, 9).unwrap();
        // push biases positive so every hidden unit is active
        p.b1.iter_mut().for_each(|b| *b = 10.0);
        let u = [0.3, -0.2, 0.5, 1.0, -0.7];
        let act = p.forward("insomnie").unwrap();
        let g = p.encode_backward("insomnie", &u).unwrap();
        for i in 0..c.dim {
            for k in 0..c.hidden {
                assert!((g.w2[(i, k)] - u[i] * act.hidden[k]).abs() < 1e-12);
            }
        }
        assert_eq!(g.b2, u.to_vec());
        let w2t_u = p.w2.tmul_vec(&u);
        for (j, x) in act.features.iter() {
            for k in 0..c.hidden {
                assert!((g.w1[(j, k)] - w2t_u[k] * x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decoupled_decay_shrinks_weights() {
        let c = small_config();
        let mut p = EncoderParams::init(c, 2).unwrap();
        let before = p.clone();
        let g = Gradients::zeros(&c);
        p.apply_update(&g, 0.1, 0.01);
        for (a, b) in p.w1.as_slice().iter().zip(before.w1.as_slice()) {
            let want = b * (1.0 - 0.1 * 0.01);
            assert!((a - want).abs() <= 1e-15 * b.abs().max(1e-300));
        }
    }
}
