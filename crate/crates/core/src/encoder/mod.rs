//! A toy transformer encoder: the standard forward-pass equations
//! (self-attention, multi-head projection, feed-forward, add & norm) at desk
//! scale, with loadable weights.
//!
//! The module verifies the architecture, it does not ship pre-trained
//! weights; production-quality accuracy comes from a full model served
//! remotely through [`remote::RemoteClassifier`]. Weights live in a flat
//! little-endian f64 blob plus a JSON shape manifest, so round trips are
//! byte-exact.

pub mod kernels;
pub mod matrix;
pub mod remote;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{softmax, EmotionClassifier, EmotionDistribution};

pub use kernels::{
    apply_attention, attention, attention_logits, attention_weights, ffn, layer_norm_residual,
    multi_head, LAYER_NORM_EPS,
};
pub use matrix::Matrix;
pub use remote::RemoteClassifier;

/// Encoder shape. `d_model = n_heads * d_k` is enforced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub vocab_size: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub d_k: usize,
    pub d_ff: usize,
    pub n_layers: usize,
    pub n_labels: usize,
    /// Maximum sequence length; longer inputs are tail-truncated.
    pub max_len: usize,
}

pub const DEFAULT_MAX_LEN: usize = 128;

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("vocab_size", self.vocab_size),
            ("d_model", self.d_model),
            ("n_heads", self.n_heads),
            ("d_k", self.d_k),
            ("d_ff", self.d_ff),
            ("n_labels", self.n_labels),
            ("max_len", self.max_len),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be >= 1")));
            }
        }
        if self.d_model != self.n_heads * self.d_k {
            return Err(Error::InvalidParameter(format!(
                "d_model ({}) must equal n_heads * d_k ({} * {})",
                self.d_model, self.n_heads, self.d_k
            )));
        }
        Ok(())
    }
}

/// One encoder layer's parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerWeights {
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
    pub wo: Matrix,
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
    pub ln1_scale: Vec<f64>,
    pub ln1_shift: Vec<f64>,
    pub ln2_scale: Vec<f64>,
    pub ln2_shift: Vec<f64>,
}

/// Full encoder parameters: embeddings, per-layer weights, classification
/// head mapping the mean-pooled state to label logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderWeights {
    pub token_embedding: Matrix,
    pub position_embedding: Matrix,
    pub layers: Vec<LayerWeights>,
    pub head: Matrix,
}

impl EncoderWeights {
    /// Random initialization in [-0.1, 0.1] (layer-norm scale 1, shift 0),
    /// deterministic for a seed.
    pub fn init_random(config: &EncoderConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mat = |rows: usize, cols: usize| {
            let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-0.1..0.1)).collect();
            Matrix::from_vec(rows, cols, data).expect("sized data")
        };
        let token_embedding = mat(config.vocab_size, config.d_model);
        let position_embedding = mat(config.max_len, config.d_model);
        let layers = (0..config.n_layers)
            .map(|_| LayerWeights {
                wq: mat(config.d_model, config.d_model),
                wk: mat(config.d_model, config.d_model),
                wv: mat(config.d_model, config.d_model),
                wo: mat(config.d_model, config.d_model),
                w1: mat(config.d_model, config.d_ff),
                b1: vec![0.0; config.d_ff],
                w2: mat(config.d_ff, config.d_model),
                b2: vec![0.0; config.d_model],
                ln1_scale: vec![1.0; config.d_model],
                ln1_shift: vec![0.0; config.d_model],
                ln2_scale: vec![1.0; config.d_model],
                ln2_shift: vec![0.0; config.d_model],
            })
            .collect();
        let head = mat(config.d_model, config.n_labels);
        Ok(Self { token_embedding, position_embedding, layers, head })
    }

    pub fn validate(&self, config: &EncoderConfig) -> Result<()> {
        config.validate()?;
        let check = |name: &str, m: &Matrix, rows: usize, cols: usize| -> Result<()> {
            if m.rows() != rows || m.cols() != cols {
                return Err(Error::ShapeMismatch {
                    context: format!("weights `{name}`"),
                    expected: format!("{rows}x{cols}"),
                    actual: format!("{}x{}", m.rows(), m.cols()),
                });
            }
            if !m.is_finite() {
                return Err(Error::InvalidParameter(format!("weights `{name}` contain non-finite values")));
            }
            Ok(())
        };
        let check_vec = |name: &str, v: &[f64], len: usize| -> Result<()> {
            if v.len() != len {
                return Err(Error::ShapeMismatch {
                    context: format!("weights `{name}`"),
                    expected: format!("length {len}"),
                    actual: format!("{}", v.len()),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!("weights `{name}` contain non-finite values")));
            }
            Ok(())
        };
        let d = config.d_model;
        check("token_embedding", &self.token_embedding, config.vocab_size, d)?;
        check("position_embedding", &self.position_embedding, config.max_len, d)?;
        if self.layers.len() != config.n_layers {
            return Err(Error::ShapeMismatch {
                context: "layer count".into(),
                expected: format!("{}", config.n_layers),
                actual: format!("{}", self.layers.len()),
            });
        }
        for (i, l) in self.layers.iter().enumerate() {
            check(&format!("layer{i}.wq"), &l.wq, d, d)?;
            check(&format!("layer{i}.wk"), &l.wk, d, d)?;
            check(&format!("layer{i}.wv"), &l.wv, d, d)?;
            check(&format!("layer{i}.wo"), &l.wo, d, d)?;
            check(&format!("layer{i}.w1"), &l.w1, d, config.d_ff)?;
            check_vec(&format!("layer{i}.b1"), &l.b1, config.d_ff)?;
            check(&format!("layer{i}.w2"), &l.w2, config.d_ff, d)?;
            check_vec(&format!("layer{i}.b2"), &l.b2, d)?;
            check_vec(&format!("layer{i}.ln1_scale"), &l.ln1_scale, d)?;
            check_vec(&format!("layer{i}.ln1_shift"), &l.ln1_shift, d)?;
            check_vec(&format!("layer{i}.ln2_scale"), &l.ln2_scale, d)?;
            check_vec(&format!("layer{i}.ln2_shift"), &l.ln2_shift, d)?;
        }
        check("head", &self.head, d, config.n_labels)?;
        Ok(())
    }
}

/// Token ids after the truncation policy (keep the head, drop the tail
/// beyond `max_len`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    ids: Vec<usize>,
}

impl TokenSequence {
    pub fn new(ids: Vec<usize>, config: &EncoderConfig) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::InvalidParameter("token sequence must not be empty".into()));
        }
        for &id in &ids {
            if id >= config.vocab_size {
                return Err(Error::InvalidTokenId { id, vocab_size: config.vocab_size });
            }
        }
        let mut ids = ids;
        ids.truncate(config.max_len);
        Ok(Self { ids })
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Full forward pass: embed (token + position), `n_layers` of
/// (multi-head + add&norm, FFN + add&norm), mean-pool over positions, apply
/// the classification head. Returns the label logits.
pub fn forward(tokens: &TokenSequence, weights: &EncoderWeights, config: &EncoderConfig) -> Result<Vec<f64>> {
    weights.validate(config)?;
    let n = tokens.len();
    let d = config.d_model;
    let mut x = Matrix::zeros(n, d);
    for (pos, &id) in tokens.ids().iter().enumerate() {
        let tok = weights.token_embedding.row(id);
        let pe = weights.position_embedding.row(pos);
        let row = x.row_mut(pos);
        for ((r, &t), &p) in row.iter_mut().zip(tok).zip(pe) {
            *r = t + p;
        }
    }

    for layer in &weights.layers {
        let attended = multi_head(&x, layer, config)?;
        let mut after_attn = Matrix::zeros(n, d);
        for i in 0..n {
            let normed = layer_norm_residual(x.row(i), attended.row(i), &layer.ln1_scale, &layer.ln1_shift)?;
            after_attn.row_mut(i).copy_from_slice(&normed);
        }
        let mut after_ffn = Matrix::zeros(n, d);
        for i in 0..n {
            let f = ffn(after_attn.row(i), &layer.w1, &layer.b1, &layer.w2, &layer.b2)?;
            let normed = layer_norm_residual(after_attn.row(i), &f, &layer.ln2_scale, &layer.ln2_shift)?;
            after_ffn.row_mut(i).copy_from_slice(&normed);
        }
        x = after_ffn;
    }

    let pooled = x.column_mean();
    let mut logits = vec![0.0; config.n_labels];
    for (j, l) in logits.iter_mut().enumerate() {
        for (i, &p) in pooled.iter().enumerate() {
            *l += p * weights.head.get(i, j);
        }
    }
    Ok(logits)
}

// ---------------------------------------------------------------------------
// Weight files: little-endian f64 blob + JSON manifest (name, shape, offset).

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    /// Byte offset into the blob.
    offset: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct WeightManifest {
    dtype: String,
    config: EncoderConfig,
    tensors: Vec<TensorEntry>,
}

pub const WEIGHTS_DTYPE: &str = "f64-le";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const BLOB_FILE: &str = "weights.bin";

fn tensor_list(weights: &EncoderWeights) -> Vec<(String, Vec<usize>, Vec<f64>)> {
    let mat = |m: &Matrix| (vec![m.rows(), m.cols()], m.data().to_vec());
    let mut out = Vec::new();
    let (shape, data) = mat(&weights.token_embedding);
    out.push(("token_embedding".to_string(), shape, data));
    let (shape, data) = mat(&weights.position_embedding);
    out.push(("position_embedding".to_string(), shape, data));
    for (i, l) in weights.layers.iter().enumerate() {
        for (suffix, m) in [("wq", &l.wq), ("wk", &l.wk), ("wv", &l.wv), ("wo", &l.wo), ("w1", &l.w1), ("w2", &l.w2)] {
            let (shape, data) = mat(m);
            out.push((format!("layer{i}.{suffix}"), shape, data));
        }
        for (suffix, v) in [
            ("b1", &l.b1),
            ("b2", &l.b2),
            ("ln1_scale", &l.ln1_scale),
            ("ln1_shift", &l.ln1_shift),
            ("ln2_scale", &l.ln2_scale),
            ("ln2_shift", &l.ln2_shift),
        ] {
            out.push((format!("layer{i}.{suffix}"), vec![v.len()], v.clone()));
        }
    }
    let (shape, data) = mat(&weights.head);
    out.push(("head".to_string(), shape, data));
    out
}

/// Writes `manifest.json` and `weights.bin` into `dir`.
pub fn save_weights(weights: &EncoderWeights, config: &EncoderConfig, dir: &Path) -> Result<()> {
    weights.validate(config)?;
    std::fs::create_dir_all(dir)?;
    let mut blob: Vec<u8> = Vec::new();
    let mut tensors = Vec::new();
    for (name, shape, data) in tensor_list(weights) {
        tensors.push(TensorEntry { name, shape, offset: blob.len() });
        for v in data {
            blob.extend_from_slice(&v.to_le_bytes());
        }
    }
    let manifest = WeightManifest {
        dtype: WEIGHTS_DTYPE.to_string(),
        config: config.clone(),
        tensors,
    };
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest)?;
    manifest_bytes.push(b'\n');
    std::fs::write(dir.join(MANIFEST_FILE), manifest_bytes)?;
    std::fs::write(dir.join(BLOB_FILE), blob)?;
    Ok(())
}

/// Loads weights back from a directory written by [`save_weights`].
pub fn load_weights(dir: &Path) -> Result<(EncoderWeights, EncoderConfig)> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.exists() {
        return Err(Error::MissingFile(manifest_path.display().to_string()));
    }
    let manifest: WeightManifest = serde_json::from_slice(&std::fs::read(&manifest_path)?)
        .map_err(|e| Error::WeightManifest(e.to_string()))?;
    if manifest.dtype != WEIGHTS_DTYPE {
        return Err(Error::WeightManifest(format!("unsupported dtype `{}`", manifest.dtype)));
    }
    let blob = std::fs::read(dir.join(BLOB_FILE))?;
    let read_tensor = |name: &str| -> Result<(Vec<usize>, Vec<f64>)> {
        let entry = manifest
            .tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::WeightManifest(format!("missing tensor `{name}`")))?;
        let count: usize = entry.shape.iter().product();
        let end = entry.offset + count * 8;
        if end > blob.len() {
            return Err(Error::WeightManifest(format!("tensor `{name}` reaches past the blob")));
        }
        let data = blob[entry.offset..end]
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
            .collect();
        Ok((entry.shape.clone(), data))
    };
    let read_mat = |name: &str| -> Result<Matrix> {
        let (shape, data) = read_tensor(name)?;
        if shape.len() != 2 {
            return Err(Error::WeightManifest(format!("tensor `{name}` is not 2-D")));
        }
        Matrix::from_vec(shape[0], shape[1], data)
    };
    let read_vec = |name: &str| -> Result<Vec<f64>> {
        let (_, data) = read_tensor(name)?;
        Ok(data)
    };

    let config = manifest.config.clone();
    let mut layers = Vec::with_capacity(config.n_layers);
    for i in 0..config.n_layers {
        layers.push(LayerWeights {
            wq: read_mat(&format!("layer{i}.wq"))?,
            wk: read_mat(&format!("layer{i}.wk"))?,
            wv: read_mat(&format!("layer{i}.wv"))?,
            wo: read_mat(&format!("layer{i}.wo"))?,
            w1: read_mat(&format!("layer{i}.w1"))?,
            b1: read_vec(&format!("layer{i}.b1"))?,
            w2: read_mat(&format!("layer{i}.w2"))?,
            b2: read_vec(&format!("layer{i}.b2"))?,
            ln1_scale: read_vec(&format!("layer{i}.ln1_scale"))?,
            ln1_shift: read_vec(&format!("layer{i}.ln1_shift"))?,
            ln2_scale: read_vec(&format!("layer{i}.ln2_scale"))?,
            ln2_shift: read_vec(&format!("layer{i}.ln2_shift"))?,
        });
    }
    let weights = EncoderWeights {
        token_embedding: read_mat("token_embedding")?,
        position_embedding: read_mat("position_embedding")?,
        layers,
        head: read_mat("head")?,
    };
    weights.validate(&config)?;
    Ok((weights, config))
}

/// Wraps the encoder as a label-distribution classifier. Text maps to token
/// ids by hashing word tokens into the vocabulary (toy plumbing; the real
/// tokenizer of a served model lives behind [`RemoteClassifier`]).
pub struct EncoderClassifier {
    weights: EncoderWeights,
    config: EncoderConfig,
    labels: Vec<String>,
}

impl EncoderClassifier {
    pub fn new(weights: EncoderWeights, config: EncoderConfig, labels: Vec<String>) -> Result<Self> {
        weights.validate(&config)?;
        if labels.len() != config.n_labels {
            return Err(Error::LabelSetMismatch {
                expected: vec![format!("{} labels", config.n_labels)],
                actual: labels.clone(),
            });
        }
        Ok(Self { weights, config, labels })
    }

    fn token_ids(&self, text: &str) -> Vec<usize> {
        let tokens = crate::text::tokenize(text);
        if tokens.is_empty() {
            return vec![0];
        }
        tokens
            .iter()
            .map(|t| {
                // FNV-1a, stable across platforms
                let mut h: u64 = 0xcbf29ce484222325;
                for b in t.bytes() {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x100000001b3);
                }
                (h % self.config.vocab_size as u64) as usize
            })
            .collect()
    }
}

impl EmotionClassifier for EncoderClassifier {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn classify(&self, text: &str) -> Result<EmotionDistribution> {
        let tokens = TokenSequence::new(self.token_ids(text), &self.config)?;
        let logits = forward(&tokens, &self.weights, &self.config)?;
        softmax(&self.labels, &logits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_config(n_layers: usize) -> EncoderConfig {
        EncoderConfig {
            vocab_size: 11,
            d_model: 4,
            n_heads: 2,
            d_k: 2,
            d_ff: 8,
            n_layers,
            n_labels: 3,
            max_len: 6,
        }
    }

    #[test]
    fn config_validation() {
        let mut c = toy_config(1);
        assert!(c.validate().is_ok());
        c.d_k = 3;
        assert!(c.validate().is_err());
        c.d_k = 2;
        c.n_labels = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn token_sequence_checks_ids_and_truncates() {
        let c = toy_config(1);
        assert!(matches!(
            TokenSequence::new(vec![0, 11], &c),
            Err(Error::InvalidTokenId { id: 11, .. })
        ));
        assert!(TokenSequence::new(vec![], &c).is_err());
        let t = TokenSequence::new(vec![1; 10], &c).unwrap();
        assert_eq!(t.len(), 6);
    }

    #[test]
    fn zero_layers_pools_the_embedding() {
        let c = toy_config(0);
        let mut w = EncoderWeights::init_random(&c, 1).unwrap();
        // head = identity on the first 3 of 4 pooled dims
        let mut head = Matrix::zeros(4, 3);
        for i in 0..3 {
            head.set(i, i, 1.0);
        }
        w.head = head;
        let tokens = TokenSequence::new(vec![2, 5], &c).unwrap();
        let logits = forward(&tokens, &w, &c).unwrap();

        let mut pooled = vec![0.0; 4];
        for (pos, &id) in [2usize, 5].iter().enumerate() {
            for d in 0..4 {
                pooled[d] += w.token_embedding.get(id, d) + w.position_embedding.get(pos, d);
            }
        }
        for p in &mut pooled {
            *p /= 2.0;
        }
        for i in 0..3 {
            assert!((logits[i] - pooled[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn permuting_head_columns_permutes_logits() {
        let c = toy_config(2);
        let w = EncoderWeights::init_random(&c, 9).unwrap();
        let tokens = TokenSequence::new(vec![1, 4, 7], &c).unwrap();
        let base = forward(&tokens, &w, &c).unwrap();

        // swap label columns 0 and 2 of the head
        let mut permuted = w.clone();
        let mut head = Matrix::zeros(4, 3);
        for i in 0..4 {
            head.set(i, 0, w.head.get(i, 2));
            head.set(i, 1, w.head.get(i, 1));
            head.set(i, 2, w.head.get(i, 0));
        }
        permuted.head = head;
        let swapped = forward(&tokens, &permuted, &c).unwrap();
        assert!((swapped[0] - base[2]).abs() < 1e-12);
        assert!((swapped[1] - base[1]).abs() < 1e-12);
        assert!((swapped[2] - base[0]).abs() < 1e-12);
    }

    #[test]
    fn forward_is_deterministic() {
        let c = toy_config(2);
        let w = EncoderWeights::init_random(&c, 33).unwrap();
        let tokens = TokenSequence::new(vec![3, 3, 9, 0], &c).unwrap();
        let a = forward(&tokens, &w, &c).unwrap();
        let b = forward(&tokens, &w, &c).unwrap();
        assert_eq!(a, b);
        let w2 = EncoderWeights::init_random(&c, 33).unwrap();
        assert_eq!(w, w2);
    }

    #[test]
    fn single_head_with_identity_output_equals_plain_attention() {
        let c = EncoderConfig {
            vocab_size: 5,
            d_model: 3,
            n_heads: 1,
            d_k: 3,
            d_ff: 4,
            n_layers: 1,
            n_labels: 2,
            max_len: 4,
        };
        let mut w = EncoderWeights::init_random(&c, 2).unwrap();
        w.layers[0].wo = Matrix::identity(3);
        let x = Matrix::from_rows(&[vec![0.1, 0.2, 0.3], vec![-0.2, 0.4, 0.0]]).unwrap();
        let got = multi_head(&x, &w.layers[0], &c).unwrap();
        let q = x.matmul(&w.layers[0].wq).unwrap();
        let k = x.matmul(&w.layers[0].wk).unwrap();
        let v = x.matmul(&w.layers[0].wv).unwrap();
        let want = attention(&q, &k, &v).unwrap();
        for (a, b) in got.data().iter().zip(want.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn multi_head_preserves_shape() {
        let c = toy_config(1);
        let w = EncoderWeights::init_random(&c, 4).unwrap();
        for n in [1, 3, 6] {
            let x = Matrix::from_vec(n, 4, (0..n * 4).map(|i| (i as f64).sin()).collect()).unwrap();
            let out = multi_head(&x, &w.layers[0], &c).unwrap();
            assert_eq!((out.rows(), out.cols()), (n, 4));
        }
    }

    #[test]
    fn weight_files_round_trip_byte_exactly() {
        let c = toy_config(2);
        let w = EncoderWeights::init_random(&c, 77).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_weights(&w, &c, dir.path()).unwrap();
        let (loaded, loaded_config) = load_weights(dir.path()).unwrap();
        assert_eq!(loaded_config, c);
        assert_eq!(loaded, w);

        // saving the loaded copy reproduces identical bytes
        let dir2 = tempfile::tempdir().unwrap();
        save_weights(&loaded, &loaded_config, dir2.path()).unwrap();
        let blob1 = std::fs::read(dir.path().join(BLOB_FILE)).unwrap();
        let blob2 = std::fs::read(dir2.path().join(BLOB_FILE)).unwrap();
        assert_eq!(blob1, blob2);
        let m1 = std::fs::read(dir.path().join(MANIFEST_FILE)).unwrap();
        let m2 = std::fs::read(dir2.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn encoder_classifier_produces_distributions() {
        let c = toy_config(1);
        let w = EncoderWeights::init_random(&c, 5).unwrap();
        let labels = vec!["anger".to_string(), "joy".to_string(), "sadness".to_string()];
        let clf = EncoderClassifier::new(w, c, labels).unwrap();
        use crate::fusion::EmotionClassifier as _;
        let d = clf.classify("we shipped the feature today").unwrap();
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let d2 = clf.classify("we shipped the feature today").unwrap();
        assert_eq!(d.probs(), d2.probs());
    }
}
