//! Friedman test over blocks x methods and the pairwise Dunn post-hoc test.
//! Blocks are accommodations; each cell holds a per-accommodation metric.

use std::fmt::Write as _;

use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use super::MethodScores;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Mean within-block rank of each method (1 = lowest score).
    pub mean_ranks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DunnResult {
    /// `z[(a, b)] = (mean_rank[a] - mean_rank[b]) / se`
    pub z: Matrix,
    pub p_value: Matrix,
    /// Bonferroni-adjusted over the `M (M - 1) / 2` pairs, capped at 1.
    pub p_adjusted: Matrix,
}

fn check_shape(scores: &Matrix) -> Result<()> {
    if scores.rows() < 2 || scores.cols() < 2 {
        return Err(Error::Shape(format!(
            "significance tests need at least 2 blocks and 2 methods, got {}x{}",
            scores.rows(),
            scores.cols()
        )));
    }
    if !scores.is_finite() {
        return Err(Error::NonFinite("significance test input".into()));
    }
    Ok(())
}

/// Ascending ranks within each row; tied values share their average rank.
pub fn within_block_ranks(scores: &Matrix) -> Matrix {
    let (b, m) = (scores.rows(), scores.cols());
    let mut ranks = Matrix::zeros(b, m);
    for i in 0..b {
        let row = scores.row(i);
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&x, &y| row[x].total_cmp(&row[y]));
        let mut start = 0;
        while start < m {
            let mut end = start + 1;
            while end < m && row[idx[end]] == row[idx[start]] {
                end += 1;
            }
            // positions start..end hold 1-based ranks start+1..=end
            let avg = (start + 1 + end) as f64 / 2.0;
            for &k in &idx[start..end] {
                ranks[(i, k)] = avg;
            }
            start = end;
        }
    }
    ranks
}

fn mean_ranks(ranks: &Matrix) -> Vec<f64> {
    let b = ranks.rows() as f64;
    (0..ranks.cols())
        .map(|k| (0..ranks.rows()).map(|i| ranks[(i, k)]).sum::<f64>() / b)
        .collect()
}

/// `chi2 = 12 / (B M (M + 1)) * sum_m R_m^2 - 3 B (M + 1)`, p-value from the
/// chi-square survival function with `M - 1` degrees of freedom.
pub fn friedman_test(scores: &Matrix) -> Result<FriedmanResult> {
    check_shape(scores)?;
    let (b, m) = (scores.rows() as f64, scores.cols() as f64);
    let ranks = within_block_ranks(scores);
    let mean = mean_ranks(&ranks);
    let sum_sq: f64 = mean.iter().map(|r| (r * b).powi(2)).sum();
    let statistic = (12.0 / (b * m * (m + 1.0)) * sum_sq - 3.0 * b * (m + 1.0)).max(0.0);
    let df = scores.cols() - 1;
    Ok(FriedmanResult {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
        mean_ranks: mean,
    })
}

/// Upper tail of the chi-square distribution via the regularized upper
/// incomplete gamma function.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df as f64 / 2.0, x / 2.0).clamp(0.0, 1.0)
}

/// Two-sided standard normal tail probability.
pub fn normal_two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Pairwise comparisons of mean ranks with standard error `sqrt(M (M + 1) / (6 B))`.
pub fn dunn_posthoc(scores: &Matrix) -> Result<DunnResult> {
    check_shape(scores)?;
    let (b, m) = (scores.rows() as f64, scores.cols());
    let mean = mean_ranks(&within_block_ranks(scores));
    let se = ((m * (m + 1)) as f64 / (6.0 * b)).sqrt();
    let pairs = (m * (m - 1) / 2) as f64;
    let mut z = Matrix::zeros(m, m);
    let mut p = Matrix::zeros(m, m);
    let mut adj = Matrix::zeros(m, m);
    for a in 0..m {
        for c in 0..m {
            let zv = (mean[a] - mean[c]) / se;
            z[(a, c)] = zv;
            p[(a, c)] = normal_two_sided_p(zv);
            adj[(a, c)] = (p[(a, c)] * pairs).min(1.0);
        }
    }
    Ok(DunnResult {
        z,
        p_value: p,
        p_adjusted: adj,
    })
}

/// Friedman and Dunn results over the per-accommodation MRR of several methods.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceReport {
    pub methods: Vec<String>,
    pub friedman: FriedmanResult,
    pub dunn: DunnResult,
}

impl SignificanceReport {
    pub fn from_methods(methods: &[MethodScores]) -> Result<Self> {
        let blocks = methods.first().map_or(0, |m| m.mrr.len());
        if methods.iter().any(|m| m.mrr.len() != blocks) {
            return Err(Error::Shape(
                "methods were evaluated on different accommodations".into(),
            ));
        }
        let mut scores = Matrix::zeros(blocks, methods.len());
        for (k, m) in methods.iter().enumerate() {
            for (i, &v) in m.mrr.iter().enumerate() {
                scores[(i, k)] = v;
            }
        }
        Ok(SignificanceReport {
            methods: methods.iter().map(|m| m.name.clone()).collect(),
            friedman: friedman_test(&scores)?,
            dunn: dunn_posthoc(&scores)?,
        })
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let f = &self.friedman;
        let _ = writeln!(out, "# friedman");
        let _ = writeln!(out, "statistic\tdf\tp_value");
        let _ = writeln!(out, "{:.6}\t{}\t{:.6e}", f.statistic, f.df, f.p_value);
        let _ = writeln!(out, "# mean_ranks");
        for (name, r) in self.methods.iter().zip(&f.mean_ranks) {
            let _ = writeln!(out, "{name}\t{r:.6}");
        }
        let _ = writeln!(out, "# dunn");
        let _ = writeln!(out, "method_a\tmethod_b\tz\tp_value\tp_bonferroni");
        for a in 0..self.methods.len() {
            for b in a + 1..self.methods.len() {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{:.6}\t{:.6e}\t{:.6e}",
                    self.methods[a],
                    self.methods[b],
                    self.dunn.z[(a, b)],
                    self.dunn.p_value[(a, b)],
                    self.dunn.p_adjusted[(a, b)]
                );
            }
        }
        out
    }
}
