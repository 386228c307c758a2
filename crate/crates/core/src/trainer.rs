//! Fine-tuning loop: epoch plans, batch losses, AdamW with linear warmup,
//! per-epoch validation MRR, best/final checkpoints and the training log.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_value, read_key_values};
use crate::contrastive::{InteractionMatrix, LossKind};
use crate::dataset::{flatten_groups, AccommodationGroup};
use crate::encoder::{
    save_checkpoint, tokenize, DualEncoder, EncoderGrads, EncoderParams, Vocabulary, DEFAULT_DIM,
    DEFAULT_TOKEN_DIM,
};
use crate::error::{Error, Result};
use crate::eval::{mrr, rankable, Method};
use crate::matrix::Matrix;
use crate::sampling::{in_accommodation_epoch, random_epoch, EpochPlan, SamplerKind};
use crate::textualize::serialize_record;

pub const FINAL_CHECKPOINT: &str = "final.ckpt";
pub const BEST_CHECKPOINT: &str = "best.ckpt";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const CONFIG_FILE: &str = "config.txt";
pub const LOG_FILE: &str = "train_log.tsv";

/// Named hyperparameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Hyperparameters for fine-tuning a pre-trained sentence encoder.
    Paper,
    /// Larger steps, smaller batches and more epochs for from-scratch
    /// embeddings, which sit on a constant-score plateau for several epochs
    /// under the BCE loss before they start to separate pairs.
    Desk,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            _ => Err(Error::Config(format!(
                "unknown preset `{s}` (expected paper or desk)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub warmup_fraction: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub loss: LossKind,
    pub sampler: SamplerKind,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Output embedding size of each tower.
    pub dim: usize,
    /// Token embedding size before projection.
    pub token_dim: usize,
    pub min_frequency: usize,
    pub max_vocab_size: usize,
}

pub const CONFIG_KEYS: [&str; 15] = [
    "learning_rate",
    "weight_decay",
    "warmup_fraction",
    "epochs",
    "batch_size",
    "loss",
    "sampler",
    "seed",
    "beta1",
    "beta2",
    "epsilon",
    "dim",
    "token_dim",
    "min_frequency",
    "max_vocab_size",
];

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::preset(Preset::Paper)
    }
}

impl TrainConfig {
    pub fn preset(preset: Preset) -> Self {
        let base = TrainConfig {
            learning_rate: 3e-5,
            weight_decay: 0.01,
            warmup_fraction: 0.05,
            epochs: 4,
            batch_size: 64,
            loss: LossKind::Bce,
            sampler: SamplerKind::InAccommodation,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            dim: DEFAULT_DIM,
            token_dim: DEFAULT_TOKEN_DIM,
            min_frequency: 1,
            max_vocab_size: 20_000,
        };
        match preset {
            Preset::Paper => base,
            Preset::Desk => TrainConfig {
                learning_rate: 1e-2,
                batch_size: 16,
                epochs: 8,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.check(false)
    }

    fn check(&self, allow_zero_epochs: bool) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return fail(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            ));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return fail(format!(
                "weight_decay must be >= 0, got {}",
                self.weight_decay
            ));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return fail(format!(
                "warmup_fraction must be in [0, 1), got {}",
                self.warmup_fraction
            ));
        }
        if self.epochs == 0 && !allow_zero_epochs {
            return fail("epochs must be at least 1".into());
        }
        if self.batch_size < 2 {
            return fail(format!(
                "batch_size must be at least 2, got {}",
                self.batch_size
            ));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return fail(format!("{name} must be in [0, 1), got {b}"));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return fail(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if self.dim == 0 || self.token_dim == 0 {
            return fail("dim and token_dim must be positive".into());
        }
        if self.max_vocab_size == 0 {
            return fail("max_vocab_size must be positive".into());
        }
        Ok(())
    }

    /// Sets one field by its key name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "learning_rate" => self.learning_rate = parse_value(key, value)?,
            "weight_decay" => self.weight_decay = parse_value(key, value)?,
            "warmup_fraction" => self.warmup_fraction = parse_value(key, value)?,
            "epochs" => self.epochs = parse_value(key, value)?,
            "batch_size" => self.batch_size = parse_value(key, value)?,
            "loss" => self.loss = value.parse()?,
            "sampler" => self.sampler = value.parse()?,
            "seed" => self.seed = parse_value(key, value)?,
            "beta1" => self.beta1 = parse_value(key, value)?,
            "beta2" => self.beta2 = parse_value(key, value)?,
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "dim" => self.dim = parse_value(key, value)?,
            "token_dim" => self.token_dim = parse_value(key, value)?,
            "min_frequency" => self.min_frequency = parse_value(key, value)?,
            "max_vocab_size" => self.max_vocab_size = parse_value(key, value)?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<()> {
        pairs.iter().try_for_each(|(k, v)| self.set(k, v))
    }

    /// Reads a config file on top of `base`.
    pub fn from_file(path: impl AsRef<Path>, base: TrainConfig) -> Result<Self> {
        let mut config = base;
        config.apply(&read_key_values(path)?)?;
        Ok(config)
    }

    /// Every field as `key = value`, in [`CONFIG_KEYS`] order.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let values: [String; 15] = [
            self.learning_rate.to_string(),
            self.weight_decay.to_string(),
            self.warmup_fraction.to_string(),
            self.epochs.to_string(),
            self.batch_size.to_string(),
            self.loss.name().to_string(),
            self.sampler.name().to_string(),
            self.seed.to_string(),
            self.beta1.to_string(),
            self.beta2.to_string(),
            self.epsilon.to_string(),
            self.dim.to_string(),
            self.token_dim.to_string(),
            self.min_frequency.to_string(),
            self.max_vocab_size.to_string(),
        ];
        for (k, v) in CONFIG_KEYS.iter().zip(values) {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    fn optimizer(&self) -> AdamW {
        AdamW {
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            weight_decay: self.weight_decay,
        }
    }
}

/// Linear ramp from 0 to `base_lr` over the first
/// `ceil(warmup_fraction * total_steps)` steps, constant afterwards.
pub fn lr_schedule(step: usize, total_steps: usize, base_lr: f64, warmup_fraction: f64) -> f64 {
    let warmup = (warmup_fraction * total_steps as f64).ceil() as usize;
    if warmup == 0 || step >= warmup {
        base_lr
    } else {
        base_lr * step as f64 / warmup as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamW {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

/// First and second moment estimates for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Moments {
    pub fn zeros(len: usize) -> Self {
        Moments {
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }
}

/// One bias-corrected AdamW update at 1-based step `t`:
/// `p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + wd * p)`.
pub fn optimizer_step(
    params: &mut [f64],
    grads: &[f64],
    moments: &mut Moments,
    t: u64,
    lr: f64,
    opt: &AdamW,
) -> Result<()> {
    if params.len() != grads.len()
        || moments.m.len() != params.len()
        || moments.v.len() != params.len()
    {
        return Err(Error::Shape(format!(
            "optimizer step over {} parameters with {} gradients and {} moments",
            params.len(),
            grads.len(),
            moments.m.len()
        )));
    }
    if t == 0 {
        return Err(Error::Config("optimizer steps are counted from 1".into()));
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!(
            "gradient entry {i} is {}",
            grads[i]
        )));
    }
    let c1 = 1.0 - opt.beta1.powf(t as f64);
    let c2 = 1.0 - opt.beta2.powf(t as f64);
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(&mut moments.m)
        .zip(&mut moments.v)
    {
        *m = opt.beta1 * *m + (1.0 - opt.beta1) * g;
        *v = opt.beta2 * *v + (1.0 - opt.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * (m_hat / (v_hat.sqrt() + opt.epsilon) + opt.weight_decay * *p);
    }
    Ok(())
}

fn tensors_mut(p: &mut EncoderParams) -> [&mut [f64]; 3] {
    [
        p.embeddings.as_mut_slice(),
        p.projection.as_mut_slice(),
        &mut p.bias,
    ]
}

fn grad_tensors(g: &EncoderGrads) -> [&[f64]; 3] {
    [g.embeddings.as_slice(), g.projection.as_slice(), &g.bias]
}

/// Optimizer state for both towers of a [`DualEncoder`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    /// Number of optimizer steps taken so far.
    pub step: u64,
    pub learning_rate: f64,
    /// Context tower (embeddings, projection, bias) then review tower.
    pub moments: Vec<Moments>,
    pub loss_sum: f64,
    pub loss_batches: usize,
}

impl TrainState {
    pub fn new(model: &DualEncoder) -> Self {
        let sizes = |p: &EncoderParams| {
            [
                p.embeddings.as_slice().len(),
                p.projection.as_slice().len(),
                p.bias.len(),
            ]
        };
        let moments = sizes(&model.context)
            .into_iter()
            .chain(sizes(&model.review))
            .map(Moments::zeros)
            .collect();
        TrainState {
            step: 0,
            learning_rate: 0.0,
            moments,
            loss_sum: 0.0,
            loss_batches: 0,
        }
    }

    /// Applies one update to both towers at learning rate `lr`.
    pub fn apply(
        &mut self,
        model: &mut DualEncoder,
        grads: &BatchGradients,
        lr: f64,
        opt: &AdamW,
    ) -> Result<()> {
        self.step += 1;
        self.learning_rate = lr;
        let mut moments = self.moments.iter_mut();
        for (params, g) in [
            (&mut model.context, &grads.context),
            (&mut model.review, &grads.review),
        ] {
            for (p, g) in tensors_mut(params).into_iter().zip(grad_tensors(g)) {
                let m = moments
                    .next()
                    .ok_or_else(|| Error::Shape("optimizer state has too few tensors".into()))?;
                optimizer_step(p, g, m, self.step, lr, opt)?;
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.moments
            .iter()
            .all(|m| m.m.iter().chain(&m.v).all(|x| x.is_finite()))
    }
}

/// Loss of one batch and its gradients with respect to both towers.
#[derive(Debug, Clone)]
pub struct BatchGradients {
    pub loss: f64,
    pub context: EncoderGrads,
    pub review: EncoderGrads,
}

/// Encodes the batch, builds the interaction matrix and backpropagates the
/// loss through both towers. `contexts[i]` and `reviews[i]` are a true pair.
pub fn batch_gradients(
    model: &DualEncoder,
    contexts: &[&[usize]],
    reviews: &[&[usize]],
    loss: LossKind,
) -> Result<BatchGradients> {
    if contexts.len() != reviews.len() {
        return Err(Error::Shape(format!(
            "{} contexts but {} reviews in batch",
            contexts.len(),
            reviews.len()
        )));
    }
    let encode_all = |tower: &EncoderParams, items: &[&[usize]]| -> Result<Matrix> {
        let rows = items
            .iter()
            .map(|ids| tower.encode(ids).map(|e| e.0))
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(&rows)
    };
    let c = encode_all(&model.context, contexts)?;
    let r = encode_all(&model.review, reviews)?;
    let out = loss.compute(&InteractionMatrix::new(c, r)?)?;
    let mut context = model.context.zero_grads();
    let mut review = model.review.zero_grads();
    for (i, ids) in contexts.iter().enumerate() {
        model
            .context
            .accumulate_backward(ids, out.grad_contexts.row(i), &mut context)?;
    }
    for (i, ids) in reviews.iter().enumerate() {
        model
            .review
            .accumulate_backward(ids, out.grad_reviews.row(i), &mut review)?;
    }
    Ok(BatchGradients {
        loss: out.loss,
        context,
        review,
    })
}

/// Vocabulary over the serialized contexts and reviews of the training split.
pub fn build_vocabulary(groups: &[AccommodationGroup], config: &TrainConfig) -> Result<Vocabulary> {
    let corpus: Vec<Vec<String>> = groups
        .iter()
        .flat_map(|g| &g.records)
        .flat_map(|r| {
            let (c, v) = serialize_record(r);
            [tokenize(&c), tokenize(&v)]
        })
        .collect();
    Vocabulary::build(&corpus, config.min_frequency, config.max_vocab_size)
}

/// Fresh model over the training vocabulary, seeded from `config.seed`.
pub fn init_model(train: &[AccommodationGroup], config: &TrainConfig) -> Result<DualEncoder> {
    DualEncoder::init(
        build_vocabulary(train, config)?,
        config.dim,
        config.token_dim,
        config.seed,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub mean_loss: f64,
    /// `None` when the validation split has no rankable accommodation.
    pub val_mrr: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
}

impl TrainLog {
    pub const HEADER: &'static str = "epoch\tmean_loss\tval_mrr\tseconds";

    pub fn to_tsv(&self) -> String {
        let mut out = format!("{}\n", Self::HEADER);
        for e in &self.epochs {
            let _ = writeln!(out, "{e}\t{:.3}", e.seconds);
        }
        out
    }

    /// The log without the wall-clock column, which is the only part that
    /// differs between identical runs.
    pub fn deterministic_tsv(&self) -> String {
        let mut out = String::from("epoch\tmean_loss\tval_mrr\n");
        for e in &self.epochs {
            let _ = writeln!(out, "{e}");
        }
        out
    }
}

impl fmt::Display for EpochRecord {
    /// Epoch, loss and validation MRR, tab separated.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{:.6}\t", self.epoch, self.mean_loss)?;
        match self.val_mrr {
            Some(v) => write!(f, "{v:.6}"),
            None => write!(f, "-"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub final_model: DualEncoder,
    /// Highest validation MRR; the earliest epoch wins ties. Equals the final
    /// model when there is no validation signal.
    pub best_model: DualEncoder,
    /// Epoch the best model comes from (0 = initialization).
    pub best_epoch: usize,
    pub log: TrainLog,
    pub state: TrainState,
}

fn validation_mrr(model: &DualEncoder, valid: &[AccommodationGroup]) -> Result<Option<f64>> {
    if valid.is_empty() {
        return Ok(None);
    }
    Ok(Some(mrr(&Method::Model(model).rank_all(valid)?)))
}

/// Trains a freshly initialized model. See [`train_from`].
pub fn train(
    train: &[AccommodationGroup],
    valid: &[AccommodationGroup],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    let model = init_model(train, config)?;
    train_from(model, train, valid, config)
}

/// Runs `config.epochs` epochs of the configured sampler and loss starting
/// from `model`. Validation MRR is computed after every epoch. With zero
/// epochs the initialization is returned unchanged.
pub fn train_from(
    mut model: DualEncoder,
    train: &[AccommodationGroup],
    valid: &[AccommodationGroup],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.check(true)?;
    let records = flatten_groups(train);
    if records.is_empty() {
        return Err(Error::Empty("training split has no records".into()));
    }
    let valid = rankable(valid);
    let mut pairs = Vec::with_capacity(records.len());
    for r in &records {
        let (c, v) = serialize_record(r);
        pairs.push((model.ids(&c), model.ids(&v)));
    }

    let mut plan_rng = ChaCha8Rng::seed_from_u64(config.seed);
    plan_rng.set_stream(1);
    let plan_for = |seed: u64| -> Result<EpochPlan> {
        match config.sampler {
            SamplerKind::Random => random_epoch(records.len(), config.batch_size, seed),
            SamplerKind::InAccommodation => in_accommodation_epoch(train, config.batch_size, seed),
        }
    };
    let plans = (0..config.epochs)
        .map(|_| plan_for(plan_rng.next_u64()))
        .collect::<Result<Vec<_>>>()?;
    let total_steps: usize = plans.iter().map(|p| p.batches.len()).sum();
    let opt = config.optimizer();

    let mut state = TrainState::new(&model);
    let mut log = TrainLog::default();
    let mut best: Option<(f64, usize, DualEncoder)> = None;
    for (e, plan) in plans.iter().enumerate() {
        let started = Instant::now();
        let mut epoch_loss = 0.0;
        for (b, batch) in plan.batches.iter().enumerate() {
            let contexts: Vec<&[usize]> = batch
                .records
                .iter()
                .map(|&i| pairs[i].0.as_slice())
                .collect();
            let reviews: Vec<&[usize]> = batch
                .records
                .iter()
                .map(|&i| pairs[i].1.as_slice())
                .collect();
            let diverged = || Error::Diverged {
                epoch: e + 1,
                batch: b,
                manifest: format!(
                    "accommodation {}, records {:?}",
                    batch.accommodation_id.as_deref().unwrap_or("-"),
                    batch.records
                ),
            };
            let grads = batch_gradients(&model, &contexts, &reviews, config.loss)?;
            if !grads.loss.is_finite() || !grads.context.is_finite() || !grads.review.is_finite() {
                return Err(diverged());
            }
            let lr = lr_schedule(
                state.step as usize + 1,
                total_steps,
                config.learning_rate,
                config.warmup_fraction,
            );
            state.apply(&mut model, &grads, lr, &opt)?;
            if !model.context.is_finite() || !model.review.is_finite() {
                return Err(diverged());
            }
            epoch_loss += grads.loss;
            state.loss_sum += grads.loss;
            state.loss_batches += 1;
        }
        let val_mrr = validation_mrr(&model, &valid)?;
        log.epochs.push(EpochRecord {
            epoch: e + 1,
            mean_loss: epoch_loss / plan.batches.len() as f64,
            val_mrr,
            seconds: started.elapsed().as_secs_f64(),
        });
        if let Some(v) = val_mrr {
            if best.as_ref().is_none_or(|(b, _, _)| v > *b) {
                best = Some((v, e + 1, model.clone()));
            }
        }
    }
    let (best_epoch, best_model) = match best {
        Some((_, epoch, m)) => (epoch, m),
        None => (config.epochs, model.clone()),
    };
    Ok(TrainOutcome {
        final_model: model,
        best_model,
        best_epoch,
        log,
        state,
    })
}

/// Writes the checkpoint directory: both checkpoints, the vocabulary (one
/// token per line), the config echo and the training log.
pub fn write_training_outputs(
    dir: impl AsRef<Path>,
    outcome: &TrainOutcome,
    config: &TrainConfig,
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_checkpoint(dir.join(FINAL_CHECKPOINT), &outcome.final_model)?;
    save_checkpoint(dir.join(BEST_CHECKPOINT), &outcome.best_model)?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(path, e))
    };
    let mut vocab = outcome.final_model.vocab.tokens().join("\n");
    vocab.push('\n');
    write(VOCAB_FILE, vocab)?;
    write(CONFIG_FILE, config.to_key_values())?;
    write(LOG_FILE, outcome.log.to_tsv())
}
