//! Batch interaction matrix `F[i][j] = sigmoid(c_i . r_j)` and the two
//! contrastive objectives against the identity target, with exact gradients
//! with respect to both embedding batches.
//!
//! The InfoNCE objective is applied to the sigmoid outputs themselves (no
//! temperature). Since every entry lies in (0, 1), the loss is bounded below
//! by `ln(1 + (N - 1) / e)`.

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Dot products are clamped to this magnitude before the sigmoid.
pub const LOGIT_CLAMP: f64 = 30.0;
/// Probabilities entering a log in the BCE loss are clamped to `[EPS, 1 - EPS]`.
pub const BCE_EPS: f64 = 1e-12;

pub fn clamp_logit(x: f64) -> f64 {
    x.clamp(-LOGIT_CLAMP, LOGIT_CLAMP)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    InfoNce,
    Bce,
}

impl LossKind {
    pub fn compute(self, f: &InteractionMatrix) -> Result<LossOutput> {
        match self {
            LossKind::InfoNce => info_nce_loss(f),
            LossKind::Bce => bce_loss(f),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LossKind::InfoNce => "infonce",
            LossKind::Bce => "bce",
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "infonce" | "info_nce" | "info-nce" => Ok(LossKind::InfoNce),
            "bce" => Ok(LossKind::Bce),
            _ => Err(Error::value(
                "loss",
                format!("`{s}` is not one of infonce, bce"),
            )),
        }
    }
}

/// Sigmoid similarities of a batch plus the forward intermediates needed
/// for backpropagation.
#[derive(Debug, Clone)]
pub struct InteractionMatrix {
    contexts: Matrix,
    reviews: Matrix,
    logits: Matrix,
    values: Matrix,
}

impl InteractionMatrix {
    /// `contexts` and `reviews` are `N x d`; row `i` of each forms the positive pair.
    pub fn new(contexts: Matrix, reviews: Matrix) -> Result<Self> {
        if contexts.rows() != reviews.rows() || contexts.cols() != reviews.cols() {
            return Err(Error::Shape(format!(
                "contexts are {}x{} but reviews are {}x{}",
                contexts.rows(),
                contexts.cols(),
                reviews.rows(),
                reviews.cols()
            )));
        }
        if !contexts.is_finite() || !reviews.is_finite() {
            return Err(Error::NonFinite("embedding batch".into()));
        }
        let n = contexts.rows();
        let mut logits = Matrix::zeros(n, n);
        let mut values = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let s = dot(contexts.row(i), reviews.row(j));
                logits[(i, j)] = s;
                values[(i, j)] = sigmoid(clamp_logit(s));
            }
        }
        Ok(InteractionMatrix {
            contexts,
            reviews,
            logits,
            values,
        })
    }

    pub fn size(&self) -> usize {
        self.values.rows()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Raw (unclamped) dot product `c_i . r_j`.
    pub fn logit(&self, i: usize, j: usize) -> f64 {
        self.logits[(i, j)]
    }

    /// Chain rule from `dL/dF` to the two embedding batches. Entries whose dot
    /// product was clamped pass no gradient.
    fn backprop(&self, grad_f: &Matrix) -> (Matrix, Matrix) {
        let n = self.size();
        let d = self.contexts.cols();
        let mut grad_c = Matrix::zeros(n, d);
        let mut grad_r = Matrix::zeros(n, d);
        for i in 0..n {
            for j in 0..n {
                let s = self.logits[(i, j)];
                if s.abs() > LOGIT_CLAMP {
                    continue;
                }
                let f = self.values[(i, j)];
                let g = grad_f[(i, j)] * f * (1.0 - f);
                if g == 0.0 {
                    continue;
                }
                for k in 0..d {
                    grad_c[(i, k)] += g * self.reviews[(j, k)];
                    grad_r[(j, k)] += g * self.contexts[(i, k)];
                }
            }
        }
        (grad_c, grad_r)
    }
}

/// Loss value and its gradients with respect to the context and review batches.
#[derive(Debug, Clone)]
pub struct LossOutput {
    pub loss: f64,
    pub grad_contexts: Matrix,
    pub grad_reviews: Matrix,
}

/// Row-wise softmax of a square matrix.
fn softmax_rows(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for i in 0..m.rows() {
        let row = out.row_mut(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    out
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Symmetric InfoNCE over the probabilities of `f`, averaged over rows and columns.
pub fn info_nce_value(f: &Matrix) -> Result<f64> {
    let n = f.rows();
    if n < 2 || f.cols() != n {
        return Err(Error::Shape(format!(
            "InfoNCE needs a square matrix with N >= 2, got {}x{}",
            f.rows(),
            f.cols()
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        total += log_sum_exp(f.row(i).iter().copied()) - f[(i, i)];
        total += log_sum_exp((0..n).map(|r| f[(r, i)])) - f[(i, i)];
    }
    Ok(total / (2.0 * n as f64))
}

pub fn info_nce_loss(f: &InteractionMatrix) -> Result<LossOutput> {
    let n = f.size();
    let loss = info_nce_value(f.values())?;
    let rows = softmax_rows(f.values());
    let cols = softmax_rows(&f.values().transpose()).transpose();
    let scale = 1.0 / (2.0 * n as f64);
    let mut grad_f = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 2.0 } else { 0.0 };
            grad_f[(i, j)] = scale * (rows[(i, j)] + cols[(i, j)] - target);
        }
    }
    let (grad_contexts, grad_reviews) = f.backprop(&grad_f);
    Ok(LossOutput {
        loss,
        grad_contexts,
        grad_reviews,
    })
}

/// Binary cross-entropy of probabilities `f` against the identity target.
pub fn bce_value(f: &Matrix) -> Result<f64> {
    let n = f.rows();
    if n == 0 || f.cols() != n {
        return Err(Error::Shape(format!(
            "BCE needs a non-empty square matrix, got {}x{}",
            f.rows(),
            f.cols()
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = f[(i, j)].clamp(BCE_EPS, 1.0 - BCE_EPS);
            total -= if i == j { p.ln() } else { (1.0 - p).ln() };
        }
    }
    Ok(total / (n * n) as f64)
}

pub fn bce_loss(f: &InteractionMatrix) -> Result<LossOutput> {
    let n = f.size();
    if n == 0 {
        return Err(Error::Shape("BCE needs a non-empty batch".into()));
    }
    let inv = 1.0 / (n * n) as f64;
    let mut total = 0.0;
    let mut grad_f = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let p = f.get(i, j);
            let s = clamp_logit(f.logit(i, j));
            let clamped = !(BCE_EPS..=1.0 - BCE_EPS).contains(&p);
            let pc = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
            if i == j {
                // -ln sigmoid(s) = softplus(-s)
                total += if clamped { -pc.ln() } else { softplus(-s) };
                if !clamped {
                    grad_f[(i, j)] = -inv / p;
                }
            } else {
                // -ln(1 - sigmoid(s)) = softplus(s)
                total += if clamped {
                    -(1.0 - pc).ln()
                } else {
                    softplus(s)
                };
                if !clamped {
                    grad_f[(i, j)] = inv / (1.0 - p);
                }
            }
        }
    }
    let (grad_contexts, grad_reviews) = f.backprop(&grad_f);
    Ok(LossOutput {
        loss: total * inv,
        grad_contexts,
        grad_reviews,
    })
}
