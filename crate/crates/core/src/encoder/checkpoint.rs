//! Plain-text checkpoint format.
//!
//! ```text
//! revrank-checkpoint v1
//! seed <u64>
//! dim <d>
//! token_dim <d_e>
//! vocab <V>
//! <token>                      (V lines, UNK last)
//! context.embeddings           (V lines of d_e values)
//! context.projection           (d lines of d_e values)
//! context.bias                 (1 line of d values)
//! review.embeddings / review.projection / review.bias
//! end
//! ```
//!
//! Reals are written in shortest round-trip form, so a loaded checkpoint
//! reproduces encoder outputs bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::{DualEncoder, EncoderParams, Vocabulary};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const CHECKPOINT_MAGIC: &str = "revrank-checkpoint v1";

impl DualEncoder {
    pub fn to_checkpoint_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{CHECKPOINT_MAGIC}");
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "dim {}", self.context.dim());
        let _ = writeln!(out, "token_dim {}", self.context.token_dim());
        let _ = writeln!(out, "vocab {}", self.vocab.len());
        for t in self.vocab.tokens() {
            let _ = writeln!(out, "{t}");
        }
        write_tower(&mut out, "context", &self.context);
        write_tower(&mut out, "review", &self.review);
        out.push_str("end\n");
        out
    }

    pub fn from_checkpoint_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let lines = &mut lines;
        if take(lines, "header")? != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("unrecognised checkpoint header".into()));
        }
        let seed: u64 = keyed(take(lines, "seed")?, "seed")?;
        let dim: usize = keyed(take(lines, "dim")?, "dim")?;
        let token_dim: usize = keyed(take(lines, "token_dim")?, "token_dim")?;
        let vocab_size: usize = keyed(take(lines, "vocab")?, "vocab")?;
        let mut tokens = Vec::with_capacity(vocab_size);
        for _ in 0..vocab_size {
            tokens.push(take(lines, "vocabulary token")?.to_string());
        }
        let vocab = Vocabulary::from_tokens(tokens)?;
        let context = read_tower(lines, "context", vocab_size, dim, token_dim)?;
        let review = read_tower(lines, "review", vocab_size, dim, token_dim)?;
        if take(lines, "end")? != "end" {
            return Err(Error::Checkpoint("missing end marker".into()));
        }
        let model = DualEncoder {
            vocab,
            context,
            review,
            seed,
        };
        if !model.context.is_finite() || !model.review.is_finite() {
            return Err(Error::Checkpoint("non-finite parameter".into()));
        }
        Ok(model)
    }
}

fn take<'a>(lines: &mut std::str::Lines<'a>, what: &str) -> Result<&'a str> {
    lines
        .next()
        .ok_or_else(|| Error::Checkpoint(format!("truncated checkpoint, expected {what}")))
}

fn read_tower(
    lines: &mut std::str::Lines<'_>,
    name: &str,
    vocab_size: usize,
    dim: usize,
    token_dim: usize,
) -> Result<EncoderParams> {
    let embeddings = read_block(lines, &format!("{name}.embeddings"), vocab_size, token_dim)?;
    let projection = read_block(lines, &format!("{name}.projection"), dim, token_dim)?;
    let bias = read_block(lines, &format!("{name}.bias"), 1, dim)?;
    Ok(EncoderParams {
        embeddings,
        projection,
        bias: bias.as_slice().to_vec(),
    })
}

fn write_tower(out: &mut String, name: &str, p: &EncoderParams) {
    let _ = writeln!(out, "{name}.embeddings");
    write_rows(out, &p.embeddings);
    let _ = writeln!(out, "{name}.projection");
    write_rows(out, &p.projection);
    let _ = writeln!(out, "{name}.bias");
    write_values(out, &p.bias);
}

fn write_rows(out: &mut String, m: &Matrix) {
    for i in 0..m.rows() {
        write_values(out, m.row(i));
    }
}

fn write_values(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v:e}");
    }
    out.push('\n');
}

fn keyed<T: std::str::FromStr>(line: &str, key: &str) -> Result<T> {
    line.strip_prefix(key)
        .and_then(|rest| rest.trim().parse().ok())
        .ok_or_else(|| Error::Checkpoint(format!("expected `{key} <value>`, found `{line}`")))
}

fn read_block(
    lines: &mut std::str::Lines<'_>,
    name: &str,
    rows: usize,
    cols: usize,
) -> Result<Matrix> {
    if take(lines, name)? != name {
        return Err(Error::Checkpoint(format!("expected block `{name}`")));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let line = take(lines, name)?;
        let before = data.len();
        for tok in line.split_ascii_whitespace() {
            data.push(
                tok.parse::<f64>()
                    .map_err(|_| Error::Checkpoint(format!("bad number `{tok}` in {name}")))?,
            );
        }
        if data.len() - before != cols {
            return Err(Error::Checkpoint(format!("row of {name} has wrong width")));
        }
    }
    Matrix::from_vec(rows, cols, data)
}

pub fn save_checkpoint(path: impl AsRef<Path>, model: &DualEncoder) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model.to_checkpoint_string()).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<DualEncoder> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DualEncoder::from_checkpoint_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::tokenize;

    #[test]
    fn round_trip_is_bit_exact() {
        let vocab =
            Vocabulary::build(&[tokenize("quiet room great location staff")], 1, 100).unwrap();
        let mut model = DualEncoder::init(vocab, 6, 5, 77).unwrap();
        model.review.bias = vec![1e-300, -2.5, 0.1 + 0.2, 3.0, f64::MIN_POSITIVE, 7.0];
        let text = model.to_checkpoint_string();
        let back = DualEncoder::from_checkpoint_str(&text).unwrap();
        assert_eq!(back, model);
        let a = model.encode_review("great staff unknownword").unwrap();
        let b = back.encode_review("great staff unknownword").unwrap();
        assert!(a
            .0
            .iter()
            .zip(&b.0)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(back.to_checkpoint_string(), text);
    }

    #[test]
    fn corrupt_checkpoints_fail() {
        let vocab = Vocabulary::build(&[tokenize("a b")], 1, 100).unwrap();
        let model = DualEncoder::init(vocab, 2, 2, 1).unwrap();
        let text = model.to_checkpoint_string();
        assert!(DualEncoder::from_checkpoint_str("nonsense").is_err());
        assert!(DualEncoder::from_checkpoint_str(&text.replace("end\n", "")).is_err());
        assert!(DualEncoder::from_checkpoint_str(&text.replacen("dim 2", "dim 3", 1)).is_err());
    }
}
