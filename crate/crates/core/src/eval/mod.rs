//! Per-accommodation ranking, MRR / Precision@k, baselines and the
//! method comparison report with a significance appendix.

mod stats;
mod topics;

use std::fmt::Write as _;

use crate::dataset::AccommodationGroup;
use crate::encoder::DualEncoder;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::textualize::serialize_record;

pub use stats::{
    chi_square_sf, dunn_posthoc, friedman_test, normal_two_sided_p, within_block_ranks, DunnResult,
    FriedmanResult, SignificanceReport,
};
pub use topics::{
    sample_contexts, topic_overlap_report, topic_table, ContextRef, Lexicon, TopicComparison,
};

/// Largest k reported for Precision@k (one page of reviews).
pub const MAX_PRECISION_K: usize = 10;

/// Scores a (context string, review string) pair; higher ranks first.
pub trait PairScorer {
    fn score(&self, context: &str, review: &str) -> Result<f64>;

    /// `scores[j][i]` = score of review `i` for context `j`.
    fn score_matrix(&self, contexts: &[String], reviews: &[String]) -> Result<Matrix> {
        let mut m = Matrix::zeros(contexts.len(), reviews.len());
        for (j, c) in contexts.iter().enumerate() {
            for (i, r) in reviews.iter().enumerate() {
                m[(j, i)] = self.score(c, r)?;
            }
        }
        Ok(m)
    }
}

impl<F: Fn(&str, &str) -> f64> PairScorer for F {
    fn score(&self, context: &str, review: &str) -> Result<f64> {
        Ok(self(context, review))
    }
}

/// Ranks by the logit `c . r`. The deployed score `sigmoid(clamp(c . r))` is
/// monotone in it, but clamping and floating-point saturation would turn
/// distinct large-magnitude logits into ties.
impl PairScorer for DualEncoder {
    fn score(&self, context: &str, review: &str) -> Result<f64> {
        Ok(self
            .encode_context(context)?
            .dot(&self.encode_review(review)?))
    }

    fn score_matrix(&self, contexts: &[String], reviews: &[String]) -> Result<Matrix> {
        let cs = contexts
            .iter()
            .map(|c| self.encode_context(c))
            .collect::<Result<Vec<_>>>()?;
        let rs = reviews
            .iter()
            .map(|r| self.encode_review(r))
            .collect::<Result<Vec<_>>>()?;
        let mut m = Matrix::zeros(cs.len(), rs.len());
        for (j, c) in cs.iter().enumerate() {
            for (i, r) in rs.iter().enumerate() {
                m[(j, i)] = c.dot(r);
            }
        }
        Ok(m)
    }
}

/// Ranking of a group's reviews for one of its contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedList {
    pub context: usize,
    /// Review indices, best first.
    pub order: Vec<usize>,
    /// 1-based position of the context's own review.
    pub rank_of_own: usize,
}

/// Ranks every row of a context x review score matrix. Ties go to the lower
/// review index.
pub fn rank_scores(scores: &Matrix) -> Result<Vec<RankedList>> {
    if scores.rows() != scores.cols() {
        return Err(Error::Shape(format!(
            "score matrix must be square, got {}x{}",
            scores.rows(),
            scores.cols()
        )));
    }
    if !scores.is_finite() {
        return Err(Error::NonFinite(
            "scorer returned a non-finite score".into(),
        ));
    }
    let n = scores.rows();
    Ok((0..n)
        .map(|j| {
            let row = scores.row(j);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            let rank_of_own = order.iter().position(|&i| i == j).unwrap() + 1;
            RankedList {
                context: j,
                order,
                rank_of_own,
            }
        })
        .collect())
}

fn check_group(group: &AccommodationGroup) -> Result<()> {
    if group.len() < 2 {
        return Err(Error::Config(format!(
            "accommodation {} has {} review(s); ranking needs at least 2",
            group.accommodation_id,
            group.len()
        )));
    }
    Ok(())
}

/// Scores every (context, review) pair of the group and ranks the group's
/// reviews for each context, own review included.
pub fn rank_group<S: PairScorer + ?Sized>(
    scorer: &S,
    group: &AccommodationGroup,
) -> Result<Vec<RankedList>> {
    check_group(group)?;
    let (contexts, reviews): (Vec<String>, Vec<String>) =
        group.records.iter().map(serialize_record).unzip();
    rank_scores(&scorer.score_matrix(&contexts, &reviews)?)
}

/// One shared ordering by descending helpful votes for every context.
pub fn helpful_votes_ranking(group: &AccommodationGroup) -> Result<Vec<RankedList>> {
    check_group(group)?;
    let n = group.len();
    let votes: Vec<f64> = group
        .records
        .iter()
        .map(|r| r.review.review_helpful_votes as f64)
        .collect();
    let mut scores = Matrix::zeros(n, n);
    for j in 0..n {
        scores.row_mut(j).copy_from_slice(&votes);
    }
    rank_scores(&scores)
}

/// Mean reciprocal rank of the own review within one accommodation.
pub fn accommodation_mrr(ranked: &[RankedList]) -> f64 {
    ranked
        .iter()
        .map(|r| 1.0 / r.rank_of_own as f64)
        .sum::<f64>()
        / ranked.len() as f64
}

pub fn accommodation_precision(ranked: &[RankedList], k: usize) -> f64 {
    ranked.iter().filter(|r| r.rank_of_own <= k).count() as f64 / ranked.len() as f64
}

/// Macro average over accommodations of the per-accommodation MRR.
pub fn mrr(ranked: &[Vec<RankedList>]) -> f64 {
    ranked.iter().map(|a| accommodation_mrr(a)).sum::<f64>() / ranked.len() as f64
}

/// Macro average over accommodations of the fraction of contexts whose own
/// review is in the top `k`.
pub fn precision_at_k(ranked: &[Vec<RankedList>], k: usize) -> f64 {
    ranked
        .iter()
        .map(|a| accommodation_precision(a, k))
        .sum::<f64>()
        / ranked.len() as f64
}

/// Expected reciprocal rank of a uniformly random ranking of `m` items: `H_m / m`.
pub fn random_expected_rr(m: usize) -> f64 {
    (1..=m).map(|i| 1.0 / i as f64).sum::<f64>() / m as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation across accommodations.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanStd {
            mean,
            std: var.sqrt(),
        }
    }

    /// Standard error of the mean (sample standard deviation / sqrt(n)).
    pub fn standard_error(values: &[f64]) -> f64 {
        let n = values.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    }
}

/// Per-accommodation metrics of one ranking method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodScores {
    pub name: String,
    pub accommodations: Vec<String>,
    pub mrr: Vec<f64>,
    /// `precision[a][k - 1]` = Precision@k of accommodation `a`.
    pub precision: Vec<[f64; MAX_PRECISION_K]>,
}

impl MethodScores {
    pub fn from_rankings(
        name: &str,
        groups: &[AccommodationGroup],
        ranked: &[Vec<RankedList>],
    ) -> Self {
        MethodScores {
            name: name.to_string(),
            accommodations: groups.iter().map(|g| g.accommodation_id.clone()).collect(),
            mrr: ranked.iter().map(|a| accommodation_mrr(a)).collect(),
            precision: ranked
                .iter()
                .map(|a| std::array::from_fn(|k| accommodation_precision(a, k + 1)))
                .collect(),
        }
    }

    pub fn mrr_summary(&self) -> MeanStd {
        MeanStd::of(&self.mrr)
    }

    pub fn precision_summary(&self, k: usize) -> MeanStd {
        let values: Vec<f64> = self.precision.iter().map(|p| p[k - 1]).collect();
        MeanStd::of(&values)
    }
}

/// A ranking method evaluated on held-out accommodations.
pub enum Method<'a> {
    HelpfulVotes,
    Model(&'a DualEncoder),
}

impl Method<'_> {
    pub fn rank(&self, group: &AccommodationGroup) -> Result<Vec<RankedList>> {
        match self {
            Method::HelpfulVotes => helpful_votes_ranking(group),
            Method::Model(m) => rank_group(*m, group),
        }
    }

    pub fn rank_all(&self, groups: &[AccommodationGroup]) -> Result<Vec<Vec<RankedList>>> {
        groups.iter().map(|g| self.rank(g)).collect()
    }
}

/// Groups with at least two reviews; smaller ones cannot be ranked.
pub fn rankable(groups: &[AccommodationGroup]) -> Vec<AccommodationGroup> {
    groups.iter().filter(|g| g.len() >= 2).cloned().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub methods: Vec<MethodScores>,
    /// Present when at least two methods were evaluated.
    pub significance: Option<SignificanceReport>,
}

/// Evaluates each named method on the same groups, in the given order.
pub fn evaluate(
    groups: &[AccommodationGroup],
    methods: &[(&str, Method<'_>)],
) -> Result<EvalReport> {
    if groups.is_empty() {
        return Err(Error::Empty(
            "no accommodation with at least 2 reviews to evaluate".into(),
        ));
    }
    let mut scores = Vec::with_capacity(methods.len());
    for (name, method) in methods {
        let ranked = method.rank_all(groups)?;
        scores.push(MethodScores::from_rankings(name, groups, &ranked));
    }
    EvalReport::from_scores(scores)
}

impl EvalReport {
    pub fn from_scores(methods: Vec<MethodScores>) -> Result<Self> {
        let significance = if methods.len() >= 2 && methods[0].mrr.len() >= 2 {
            Some(SignificanceReport::from_methods(&methods)?)
        } else {
            None
        };
        Ok(EvalReport {
            methods,
            significance,
        })
    }

    pub fn method(&self, name: &str) -> Option<&MethodScores> {
        self.methods.iter().find(|m| m.name == name)
    }

    /// Tab-separated table (method x metric x mean/std) followed by the
    /// significance appendix as `#`-prefixed sections.
    pub fn to_tsv(&self) -> String {
        let mut out =
            String::from("method\tmrr_mean\tmrr_std\tp1_mean\tp1_std\tp10_mean\tp10_std\n");
        for m in &self.methods {
            let mrr = m.mrr_summary();
            let p1 = m.precision_summary(1);
            let p10 = m.precision_summary(MAX_PRECISION_K);
            let _ = writeln!(
                out,
                "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
                m.name, mrr.mean, mrr.std, p1.mean, p1.std, p10.mean, p10.std
            );
        }
        let _ = writeln!(out, "# precision_at_k");
        let header: Vec<String> = (1..=MAX_PRECISION_K).map(|k| format!("p{k}")).collect();
        let _ = writeln!(out, "method\t{}", header.join("\t"));
        for m in &self.methods {
            let row: Vec<String> = (1..=MAX_PRECISION_K)
                .map(|k| format!("{:.6}", m.precision_summary(k).mean))
                .collect();
            let _ = writeln!(out, "{}\t{}", m.name, row.join("\t"));
        }
        if let Some(sig) = &self.significance {
            out.push_str(&sig.to_tsv());
        }
        out
    }
}
