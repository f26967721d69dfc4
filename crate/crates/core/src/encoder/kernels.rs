//! The encoder's building blocks: scaled dot-product attention, multi-head
//! attention, the position-wise feed-forward block, and layer norm with a
//! residual connection.

use crate::error::{Error, Result};

use super::matrix::Matrix;
use super::{EncoderConfig, LayerWeights};

/// Pre-softmax attention logits `Q K^T / sqrt(d_k)` where `d_k` is the key
/// width (number of columns of `K`).
pub fn attention_logits(q: &Matrix, k: &Matrix) -> Result<Matrix> {
    if q.cols() != k.cols() || k.cols() == 0 {
        return Err(Error::ShapeMismatch {
            context: "attention logits".into(),
            expected: format!("key width {}", q.cols()),
            actual: format!("{}", k.cols()),
        });
    }
    let scale = 1.0 / (k.cols() as f64).sqrt();
    let mut logits = q.matmul_transpose(k)?;
    for i in 0..logits.rows() {
        for v in logits.row_mut(i) {
            *v *= scale;
        }
    }
    Ok(logits)
}

/// Row-wise stable softmax of attention logits: each row becomes a
/// probability vector over the keys.
pub fn attention_weights(logits: &Matrix) -> Matrix {
    let mut weights = logits.clone();
    for i in 0..weights.rows() {
        let row = weights.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    weights
}

/// Applies already-computed logits to the values: `softmax(logits) V`.
pub fn apply_attention(logits: &Matrix, v: &Matrix) -> Result<Matrix> {
    if logits.cols() != v.rows() {
        return Err(Error::ShapeMismatch {
            context: "attention values".into(),
            expected: format!("{} value rows", logits.cols()),
            actual: format!("{}", v.rows()),
        });
    }
    attention_weights(logits).matmul(v)
}

/// Scaled dot-product attention `softmax(Q K^T / sqrt(d_k)) V`.
pub fn attention(q: &Matrix, k: &Matrix, v: &Matrix) -> Result<Matrix> {
    apply_attention(&attention_logits(q, k)?, v)
}

/// Multi-head attention over `x` (self-attention: queries, keys and values
/// all project from `x`). Heads are column blocks of the fused projection
/// matrices; their outputs concatenate and pass through the output
/// projection.
pub fn multi_head(x: &Matrix, layer: &LayerWeights, config: &EncoderConfig) -> Result<Matrix> {
    if x.cols() != config.d_model {
        return Err(Error::ShapeMismatch {
            context: "multi-head input".into(),
            expected: format!("width {}", config.d_model),
            actual: format!("{}", x.cols()),
        });
    }
    let q_all = x.matmul(&layer.wq)?;
    let k_all = x.matmul(&layer.wk)?;
    let v_all = x.matmul(&layer.wv)?;
    let mut concat = Matrix::zeros(x.rows(), config.d_model);
    for h in 0..config.n_heads {
        let start = h * config.d_k;
        let q = q_all.column_block(start, config.d_k);
        let k = k_all.column_block(start, config.d_k);
        let v = v_all.column_block(start, config.d_k);
        let head = attention(&q, &k, &v)?;
        concat.set_column_block(start, &head);
    }
    concat.matmul(&layer.wo)
}

/// Position-wise feed-forward: `relu(x W1 + b1) W2 + b2` for one vector.
pub fn ffn(x: &[f64], w1: &Matrix, b1: &[f64], w2: &Matrix, b2: &[f64]) -> Result<Vec<f64>> {
    if x.len() != w1.rows() || w1.cols() != b1.len() || w1.cols() != w2.rows() || w2.cols() != b2.len() {
        return Err(Error::ShapeMismatch {
            context: "ffn".into(),
            expected: format!("{}->{}->{}", w1.rows(), w1.cols(), w2.cols()),
            actual: format!("x:{} b1:{} b2:{}", x.len(), b1.len(), b2.len()),
        });
    }
    let mut hidden = b1.to_vec();
    for (j, h) in hidden.iter_mut().enumerate() {
        for (i, &xi) in x.iter().enumerate() {
            *h += xi * w1.get(i, j);
        }
        *h = h.max(0.0);
    }
    let mut out = b2.to_vec();
    for (j, o) in out.iter_mut().enumerate() {
        for (i, &hi) in hidden.iter().enumerate() {
            *o += hi * w2.get(i, j);
        }
    }
    Ok(out)
}

pub const LAYER_NORM_EPS: f64 = 1e-5;

/// Layer norm over the residual sum: normalizes `x + sublayer` to zero mean
/// and unit variance (epsilon inside the square root), then applies the
/// learned scale and shift.
pub fn layer_norm_residual(
    x: &[f64],
    sublayer: &[f64],
    scale: &[f64],
    shift: &[f64],
) -> Result<Vec<f64>> {
    let n = x.len();
    if sublayer.len() != n || scale.len() != n || shift.len() != n {
        return Err(Error::ShapeMismatch {
            context: "layer norm".into(),
            expected: format!("length {n}"),
            actual: format!("{}/{}/{}", sublayer.len(), scale.len(), shift.len()),
        });
    }
    let summed: Vec<f64> = x.iter().zip(sublayer).map(|(a, b)| a + b).collect();
    let mean = summed.iter().sum::<f64>() / n as f64;
    let var = summed.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let inv_std = 1.0 / (var + LAYER_NORM_EPS).sqrt();
    Ok(summed
        .iter()
        .zip(scale.iter().zip(shift))
        .map(|(&v, (&g, &b))| g * (v - mean) * inv_std + b)
        .collect())
}
