//! From-scratch trainable text encoder: tokenizer, vocabulary, token
//! embedding table, mean pooling and a linear projection, with exact
//! analytic gradients.

mod checkpoint;
mod vocab;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC};
pub use vocab::{Vocabulary, UNK_TOKEN};

/// Inputs longer than this are truncated before pooling.
pub const MAX_TOKENS: usize = 128;
pub const DEFAULT_DIM: usize = 64;
pub const DEFAULT_TOKEN_DIM: usize = 64;
/// Half-width of the uniform initialisation interval.
pub const INIT_BOUND: f64 = 0.05;

/// Lowercases and splits on every run of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Latent representation of one context or review string.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(pub Vec<f64>);

impl EmbeddingVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &EmbeddingVector) -> f64 {
        crate::matrix::dot(&self.0, &other.0)
    }
}

/// Parameters of one encoder tower.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    /// `vocab_size x token_dim`
    pub embeddings: Matrix,
    /// `dim x token_dim`; output = projection * pooled + bias
    pub projection: Matrix,
    pub bias: Vec<f64>,
}

/// Gradient buffers shaped like [`EncoderParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderGrads {
    pub embeddings: Matrix,
    pub projection: Matrix,
    pub bias: Vec<f64>,
}

impl EncoderParams {
    /// Entries uniform in `[-INIT_BOUND, INIT_BOUND]`, bias zero.
    pub fn init(dim: usize, token_dim: usize, vocab_size: usize, seed: u64) -> Result<Self> {
        if dim == 0 || token_dim == 0 || vocab_size == 0 {
            return Err(Error::Config(format!(
                "encoder dimensions must be positive (dim={dim}, token_dim={token_dim}, vocab={vocab_size})"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| rng.gen_range(-INIT_BOUND..=INIT_BOUND))
                .collect()
        };
        let embeddings = Matrix::from_vec(vocab_size, token_dim, draw(vocab_size * token_dim))?;
        let projection = Matrix::from_vec(dim, token_dim, draw(dim * token_dim))?;
        Ok(EncoderParams {
            embeddings,
            projection,
            bias: vec![0.0; dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.projection.rows()
    }

    pub fn token_dim(&self) -> usize {
        self.embeddings.cols()
    }

    pub fn vocab_size(&self) -> usize {
        self.embeddings.rows()
    }

    pub fn zero_grads(&self) -> EncoderGrads {
        EncoderGrads {
            embeddings: Matrix::zeros(self.vocab_size(), self.token_dim()),
            projection: Matrix::zeros(self.dim(), self.token_dim()),
            bias: vec![0.0; self.dim()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.embeddings.is_finite()
            && self.projection.is_finite()
            && self.bias.iter().all(|b| b.is_finite())
    }

    fn check_ids(&self, ids: &[usize]) -> Result<()> {
        if ids.is_empty() {
            return Err(Error::Empty("cannot encode an empty token list".into()));
        }
        if let Some(&bad) = ids.iter().find(|&&i| i >= self.vocab_size()) {
            return Err(Error::Shape(format!(
                "token id {bad} outside vocabulary of size {}",
                self.vocab_size()
            )));
        }
        Ok(())
    }

    fn pool(&self, ids: &[usize]) -> Vec<f64> {
        let mut pooled = vec![0.0; self.token_dim()];
        for &id in ids {
            for (p, e) in pooled.iter_mut().zip(self.embeddings.row(id)) {
                *p += e;
            }
        }
        let inv = 1.0 / ids.len() as f64;
        pooled.iter_mut().for_each(|p| *p *= inv);
        pooled
    }

    /// `projection * mean(embedding rows) + bias`.
    pub fn encode(&self, ids: &[usize]) -> Result<EmbeddingVector> {
        self.check_ids(ids)?;
        let pooled = self.pool(ids);
        let out = (0..self.dim())
            .map(|k| crate::matrix::dot(self.projection.row(k), &pooled) + self.bias[k])
            .collect();
        Ok(EmbeddingVector(out))
    }

    /// Adds the gradient of `upstream . encode(ids)` with respect to every
    /// parameter into `grads`. Rows of tokens absent from `ids` are untouched.
    pub fn accumulate_backward(
        &self,
        ids: &[usize],
        upstream: &[f64],
        grads: &mut EncoderGrads,
    ) -> Result<()> {
        self.check_ids(ids)?;
        if upstream.len() != self.dim() {
            return Err(Error::Shape(format!(
                "upstream gradient has length {}, encoder dim is {}",
                upstream.len(),
                self.dim()
            )));
        }
        if grads.embeddings.rows() != self.vocab_size()
            || grads.embeddings.cols() != self.token_dim()
            || grads.projection.rows() != self.dim()
        {
            return Err(Error::Shape(
                "gradient buffers do not match parameters".into(),
            ));
        }
        let pooled = self.pool(ids);
        for (k, &g) in upstream.iter().enumerate() {
            grads.bias[k] += g;
            if g != 0.0 {
                for (gp, &h) in grads.projection.row_mut(k).iter_mut().zip(&pooled) {
                    *gp += g * h;
                }
            }
        }
        // d pooled = projection^T upstream, spread evenly over the token occurrences
        let inv = 1.0 / ids.len() as f64;
        let mut grad_pooled = vec![0.0; self.token_dim()];
        for (k, &g) in upstream.iter().enumerate() {
            if g != 0.0 {
                for (gp, &p) in grad_pooled.iter_mut().zip(self.projection.row(k)) {
                    *gp += g * p;
                }
            }
        }
        grad_pooled.iter_mut().for_each(|g| *g *= inv);
        for &id in ids {
            for (ge, &g) in grads.embeddings.row_mut(id).iter_mut().zip(&grad_pooled) {
                *ge += g;
            }
        }
        Ok(())
    }

    /// Gradients for a single forward pass.
    pub fn encode_backward(&self, ids: &[usize], upstream: &[f64]) -> Result<EncoderGrads> {
        let mut grads = self.zero_grads();
        self.accumulate_backward(ids, upstream, &mut grads)?;
        Ok(grads)
    }
}

impl EncoderGrads {
    pub fn is_finite(&self) -> bool {
        self.embeddings.is_finite()
            && self.projection.is_finite()
            && self.bias.iter().all(|b| b.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.embeddings.as_slice().iter().all(|&v| v == 0.0)
            && self.projection.as_slice().iter().all(|&v| v == 0.0)
            && self.bias.iter().all(|&v| v == 0.0)
    }
}

/// Shared vocabulary plus the two independent towers: one for context
/// strings and one for review strings.
#[derive(Debug, Clone, PartialEq)]
pub struct DualEncoder {
    pub vocab: Vocabulary,
    pub context: EncoderParams,
    pub review: EncoderParams,
    /// Seed the towers were initialised from.
    pub seed: u64,
}

impl DualEncoder {
    pub fn init(vocab: Vocabulary, dim: usize, token_dim: usize, seed: u64) -> Result<Self> {
        let context = EncoderParams::init(dim, token_dim, vocab.len(), seed)?;
        let review = EncoderParams::init(dim, token_dim, vocab.len(), seed.wrapping_add(1))?;
        Ok(DualEncoder {
            vocab,
            context,
            review,
            seed,
        })
    }

    /// The same architecture freshly initialised from the stored seed.
    pub fn untrained(&self) -> Result<Self> {
        DualEncoder::init(
            self.vocab.clone(),
            self.context.dim(),
            self.context.token_dim(),
            self.seed,
        )
    }

    /// Token ids of a text, OOV mapped to UNK, truncated to [`MAX_TOKENS`].
    pub fn ids(&self, text: &str) -> Vec<usize> {
        self.vocab.ids(&tokenize(text))
    }

    pub fn encode_context(&self, text: &str) -> Result<EmbeddingVector> {
        self.context.encode(&self.ids(text))
    }

    pub fn encode_review(&self, text: &str) -> Result<EmbeddingVector> {
        self.review.encode(&self.ids(text))
    }

    /// `sigmoid(encode(context) . encode(review))`: the estimated likelihood
    /// that the review was written by a guest with this context.
    pub fn score_pair(&self, context_text: &str, review_text: &str) -> Result<f64> {
        let c = self.encode_context(context_text)?;
        let r = self.encode_review(review_text)?;
        Ok(crate::contrastive::sigmoid(
            crate::contrastive::clamp_logit(c.dot(&r)),
        ))
    }
}
