//! Keyword-lexicon topic tagging and the side-by-side topic comparison of two
//! rankers. The context's own review is excluded from the candidates: each
//! ranker contributes its best *other* review.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::RankedList;
use crate::dataset::{AccommodationGroup, GuestType};
use crate::encoder::tokenize;
use crate::error::{Error, Result};

/// Topic name to keyword phrases. Phrases match as contiguous,
/// case-insensitive token sequences.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Lexicon {
    topics: Vec<(String, Vec<Vec<String>>)>,
}

impl Lexicon {
    pub fn new<S: AsRef<str>>(topics: &[(S, &[S])]) -> Self {
        Lexicon {
            topics: topics
                .iter()
                .map(|(name, kws)| {
                    let phrases = kws
                        .iter()
                        .map(|k| tokenize(k.as_ref()))
                        .filter(|p| !p.is_empty())
                        .collect();
                    (name.as_ref().trim().to_string(), phrases)
                })
                .collect(),
        }
    }

    /// Parses `topic_name: keyword, keyword, ...` lines. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut topics = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, kws) = line.split_once(':').ok_or_else(|| Error::InvalidRow {
                row: i + 1,
                reason: "expected `topic: keyword, keyword, ...`".into(),
            })?;
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::InvalidRow {
                    row: i + 1,
                    reason: "empty topic name".into(),
                });
            }
            let phrases: Vec<Vec<String>> = kws
                .split(',')
                .map(tokenize)
                .filter(|p| !p.is_empty())
                .collect();
            topics.push((name.to_string(), phrases));
        }
        Ok(Lexicon { topics })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let lexicon = Lexicon::parse(&text)?;
        if lexicon.is_empty() {
            return Err(Error::Empty(format!(
                "lexicon {} defines no topics",
                path.display()
            )));
        }
        Ok(lexicon)
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn detect(&self, text: &str) -> BTreeSet<String> {
        let tokens = tokenize(text);
        self.topics
            .iter()
            .filter(|(_, phrases)| {
                phrases
                    .iter()
                    .any(|p| tokens.windows(p.len()).any(|w| w == p.as_slice()))
            })
            .map(|(name, _)| name.clone())
            .collect()
    }
}

/// A context identified by its group and position within the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextRef {
    pub group: usize,
    pub context: usize,
}

/// Draws `n` contexts without replacement. With `stratify`, `n / 4` come
/// from each guest type (as far as available).
pub fn sample_contexts(
    groups: &[AccommodationGroup],
    n: usize,
    stratify: bool,
    seed: u64,
) -> Vec<ContextRef> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<ContextRef> = groups
        .iter()
        .enumerate()
        .filter(|(_, g)| g.len() >= 2)
        .flat_map(|(gi, g)| {
            (0..g.len()).map(move |c| ContextRef {
                group: gi,
                context: c,
            })
        })
        .collect();
    if !stratify {
        let mut pool = all;
        pool.shuffle(&mut rng);
        pool.truncate(n);
        return pool;
    }
    let per_type = n / GuestType::ALL.len();
    let mut out = Vec::with_capacity(n);
    for gt in GuestType::ALL {
        let mut pool: Vec<ContextRef> = all
            .iter()
            .copied()
            .filter(|r| groups[r.group].records[r.context].guest.guest_type == gt)
            .collect();
        pool.shuffle(&mut rng);
        out.extend(pool.into_iter().take(per_type));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicComparison {
    pub accommodation_id: String,
    pub context: usize,
    pub guest_type: GuestType,
    pub original_review: String,
    pub model_review: usize,
    pub model_review_text: String,
    pub baseline_review: usize,
    pub baseline_review_text: String,
    pub original_topics: BTreeSet<String>,
    pub model_topics: BTreeSet<String>,
    pub baseline_topics: BTreeSet<String>,
    /// Topics shared by the original review and the model's pick.
    pub model_overlap: BTreeSet<String>,
    pub baseline_overlap: BTreeSet<String>,
    /// Topics shared by the two picks.
    pub picks_overlap: BTreeSet<String>,
}

fn top_other(ranked: &RankedList) -> Option<usize> {
    ranked.order.iter().copied().find(|&i| i != ranked.context)
}

/// Compares, for each sampled context, the topics of its original review
/// with the topics of each ranker's top-ranked other review.
pub fn topic_overlap_report(
    samples: &[ContextRef],
    model: &[Vec<RankedList>],
    baseline: &[Vec<RankedList>],
    groups: &[AccommodationGroup],
    lexicon: &Lexicon,
) -> Result<Vec<TopicComparison>> {
    let mut out = Vec::with_capacity(samples.len());
    for s in samples {
        let group = groups
            .get(s.group)
            .ok_or_else(|| Error::Shape(format!("sample refers to missing group {}", s.group)))?;
        let lookup = |rankings: &[Vec<RankedList>]| -> Result<usize> {
            rankings
                .get(s.group)
                .and_then(|g| g.get(s.context))
                .and_then(top_other)
                .ok_or_else(|| {
                    Error::Shape(format!(
                        "no ranking for context {} of group {}",
                        s.context, s.group
                    ))
                })
        };
        let m = lookup(model)?;
        let b = lookup(baseline)?;
        let text = |i: usize| group.records[i].review.text();
        let original = text(s.context);
        let original_topics = lexicon.detect(&original);
        let model_topics = lexicon.detect(&text(m));
        let baseline_topics = lexicon.detect(&text(b));
        out.push(TopicComparison {
            accommodation_id: group.accommodation_id.clone(),
            context: s.context,
            guest_type: group.records[s.context].guest.guest_type,
            model_overlap: &original_topics & &model_topics,
            baseline_overlap: &original_topics & &baseline_topics,
            picks_overlap: &model_topics & &baseline_topics,
            original_review: original,
            model_review: m,
            model_review_text: text(m),
            baseline_review: b,
            baseline_review_text: text(b),
            original_topics,
            model_topics,
            baseline_topics,
        });
    }
    Ok(out)
}

/// Topics joined by `, `; topics shared with the original review carry a `*`.
fn marked(topics: &BTreeSet<String>, shared: &BTreeSet<String>) -> String {
    topics
        .iter()
        .map(|t| {
            if shared.contains(t) {
                format!("{t}*")
            } else {
                t.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn cell(text: &str) -> String {
    text.replace(['\t', '\n', '\r'], " ")
}

/// Tab-separated comparison table.
pub fn topic_table(rows: &[TopicComparison]) -> String {
    let mut out = String::from(
        "accommodation_id\tguest_type\toriginal_review\tmodel_review\tbaseline_review\t\
         original_topics\tmodel_topics\tbaseline_topics\tmodel_overlap\tbaseline_overlap\tpicks_overlap\n",
    );
    let join = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(", ");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.accommodation_id,
            r.guest_type,
            cell(&r.original_review),
            cell(&r.model_review_text),
            cell(&r.baseline_review_text),
            join(&r.original_topics),
            marked(&r.model_topics, &r.model_overlap),
            marked(&r.baseline_topics, &r.baseline_overlap),
            r.model_overlap.len(),
            r.baseline_overlap.len(),
            r.picks_overlap.len()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::tests::record;

    fn lexicon() -> Lexicon {
        Lexicon::parse(
            "# topics\n\
             location: location, central\n\
             staff: staff, host\n\
             breakfast: breakfast\n\
             quiet: quiet, calm\n\
             view: sea view\n",
        )
        .unwrap()
    }

    #[test]
    fn keyword_hits() {
        let lex = lexicon();
        let topics = lex.detect("Great LOCATION and friendly staff");
        assert_eq!(
            topics.into_iter().collect::<Vec<_>>(),
            ["location", "staff"]
        );
        assert!(lex.detect("the view of the sea").is_empty());
        assert_eq!(lex.detect("Sea view!").len(), 1);
        assert!(lex.detect("staffing").is_empty());
    }

    #[test]
    fn empty_lexicon_detects_nothing() {
        let lex = Lexicon::parse("").unwrap();
        assert!(lex.is_empty());
        assert!(lex.detect("great location").is_empty());
        assert!(Lexicon::parse("no colon here").is_err());
    }

    #[test]
    fn overlap_counts_and_own_review_excluded() {
        let texts = [
            "location staff breakfast quiet",
            "location staff breakfast",
            "quiet nights",
        ];
        let group = AccommodationGroup {
            accommodation_id: "A".into(),
            records: texts
                .iter()
                .map(|t| {
                    let mut r = record("A", "", 0);
                    r.review.review_positive = t.to_string();
                    r
                })
                .collect(),
        };
        // both rankers put the own review first; the second entry is reported
        let model = vec![vec![RankedList {
            context: 0,
            order: vec![0, 1, 2],
            rank_of_own: 1,
        }]];
        let baseline = vec![vec![RankedList {
            context: 0,
            order: vec![0, 2, 1],
            rank_of_own: 1,
        }]];
        let samples = [ContextRef {
            group: 0,
            context: 0,
        }];
        let rows = topic_overlap_report(&samples, &model, &baseline, &[group], &lexicon()).unwrap();
        assert_eq!(rows[0].model_review, 1);
        assert_eq!(rows[0].baseline_review, 2);
        assert_eq!(rows[0].model_overlap.len(), 3);
        assert_eq!(rows[0].baseline_overlap.len(), 1);
        assert_eq!(rows[0].picks_overlap.len(), 0);
        let table = topic_table(&rows);
        assert!(table.contains("breakfast*, location*, staff*"));
        assert_eq!(table.lines().count(), 2);
    }

    #[test]
    fn stratified_sampling() {
        let groups: Vec<AccommodationGroup> = (0..5)
            .map(|g| AccommodationGroup {
                accommodation_id: format!("a{g}"),
                records: GuestType::ALL
                    .iter()
                    .flat_map(|&gt| {
                        (0..2).map(move |_| {
                            let mut r = record("x", "t", 0);
                            r.guest.guest_type = gt;
                            r
                        })
                    })
                    .collect(),
            })
            .collect();
        let s = sample_contexts(&groups, 8, true, 3);
        assert_eq!(s.len(), 8);
        for gt in GuestType::ALL {
            let n = s
                .iter()
                .filter(|r| groups[r.group].records[r.context].guest.guest_type == gt)
                .count();
            assert_eq!(n, 2);
        }
        assert_eq!(s, sample_contexts(&groups, 8, true, 3));
        assert_eq!(sample_contexts(&groups, 5, false, 1).len(), 5);
    }
}
