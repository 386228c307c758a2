use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::{ReviewRecord, MIN_REVIEWS_PER_ACCOMMODATION};
use crate::error::{Error, Result};

/// One row of the per-field statistics table. Numeric fields carry mean, min
/// and max; categorical fields only unique count and mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldStatistics {
    pub field: &'static str,
    pub unique: usize,
    pub mean: Option<f64>,
    pub mode: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatisticsReport {
    pub records: usize,
    pub accommodations: usize,
    /// Accommodations below the 10-review threshold (flagged, not removed).
    pub small_accommodations: usize,
    /// Accommodations whose records disagree on accommodation context.
    pub inconsistent_accommodations: usize,
    /// Fraction of reviews with at least one helpful vote.
    pub voted_fraction: f64,
    pub fields: Vec<FieldStatistics>,
}

pub fn validate_statistics(records: &[ReviewRecord]) -> Result<StatisticsReport> {
    if records.is_empty() {
        return Err(Error::Empty("statistics need at least one record".into()));
    }
    let num = |field: &'static str, f: &dyn Fn(&ReviewRecord) -> f64| {
        numeric(field, records.iter().map(f).collect())
    };
    let cat = |field: &'static str, f: &dyn Fn(&ReviewRecord) -> String| {
        categorical(field, records.iter().map(f).collect())
    };
    let flag = |b: bool| if b { 1.0 } else { 0.0 };

    let fields = vec![
        num("review_score", &|r| r.review.review_score),
        num("review_helpful_votes", &|r| {
            r.review.review_helpful_votes as f64
        }),
        cat("guest_type", &|r| r.guest.guest_type.label().to_string()),
        cat("guest_country", &|r| r.guest.guest_country.clone()),
        num("room_nights", &|r| r.guest.room_nights as f64),
        cat("month", &|r| r.guest.month.name().to_string()),
        cat("accommodation_type", &|r| {
            r.accommodation.accommodation_type.clone()
        }),
        num("accommodation_score", &|r| {
            r.accommodation.accommodation_score
        }),
        cat("accommodation_country", &|r| {
            r.accommodation.accommodation_country.clone()
        }),
        num("accommodation_star_rating", &|r| {
            r.accommodation.accommodation_star_rating
        }),
        num("location_is_beach", &|r| {
            flag(r.accommodation.location_is_beach)
        }),
        num("location_is_ski", &|r| {
            flag(r.accommodation.location_is_ski)
        }),
        num("location_is_city_center", &|r| {
            flag(r.accommodation.location_is_city_center)
        }),
    ];

    let mut by_acc: HashMap<&str, Vec<&ReviewRecord>> = HashMap::new();
    for r in records {
        by_acc.entry(r.accommodation_id()).or_default().push(r);
    }
    let small = by_acc
        .values()
        .filter(|g| g.len() < MIN_REVIEWS_PER_ACCOMMODATION)
        .count();
    let inconsistent = by_acc
        .values()
        .filter(|g| {
            g.windows(2)
                .any(|w| w[0].accommodation != w[1].accommodation)
        })
        .count();
    let voted = records
        .iter()
        .filter(|r| r.review.review_helpful_votes > 0)
        .count();

    Ok(StatisticsReport {
        records: records.len(),
        accommodations: by_acc.len(),
        small_accommodations: small,
        inconsistent_accommodations: inconsistent,
        voted_fraction: voted as f64 / records.len() as f64,
        fields,
    })
}

fn numeric(field: &'static str, mut values: Vec<f64>) -> FieldStatistics {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.sort_by(f64::total_cmp);
    // run-length over the sorted values; ties for the mode go to the smallest value
    let mut unique = 0;
    let mut mode = values[0];
    let mut best = 0;
    let mut i = 0;
    while i < values.len() {
        let mut j = i;
        while j < values.len() && values[j] == values[i] {
            j += 1;
        }
        unique += 1;
        if j - i > best {
            best = j - i;
            mode = values[i];
        }
        i = j;
    }
    FieldStatistics {
        field,
        unique,
        mean: Some(mean),
        mode: format_number(mode),
        min: values.first().copied(),
        max: values.last().copied(),
    }
}

fn categorical(field: &'static str, values: Vec<String>) -> FieldStatistics {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    let mut mode = String::new();
    let mut best = 0;
    for (v, &c) in &counts {
        if c > best {
            best = c;
            mode = v.clone();
        }
    }
    FieldStatistics {
        field,
        unique: counts.len(),
        mean: None,
        mode,
        min: None,
        max: None,
    }
}

fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

impl StatisticsReport {
    pub fn field(&self, name: &str) -> Option<&FieldStatistics> {
        self.fields.iter().find(|f| f.field == name)
    }

    /// Human-readable table: field, unique values, mean, mode, min, max.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<28} {:>8} {:>10} {:>22} {:>8} {:>8}",
            "field", "unique", "mean", "mode", "min", "max"
        );
        let opt = |v: Option<f64>, prec: usize| match v {
            Some(x) => format!("{x:.prec$}"),
            None => "-".to_string(),
        };
        for f in &self.fields {
            let _ = writeln!(
                out,
                "{:<28} {:>8} {:>10} {:>22} {:>8} {:>8}",
                f.field,
                f.unique,
                opt(f.mean, 2),
                f.mode,
                opt(f.min, 1),
                opt(f.max, 1)
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "records: {}", self.records);
        let _ = writeln!(out, "accommodations: {}", self.accommodations);
        let _ = writeln!(
            out,
            "accommodations below {} reviews: {}",
            MIN_REVIEWS_PER_ACCOMMODATION, self.small_accommodations
        );
        let _ = writeln!(
            out,
            "inconsistent accommodations: {}",
            self.inconsistent_accommodations
        );
        let _ = writeln!(out, "voted fraction: {:.4}", self.voted_fraction);
        out
    }

    /// Machine-readable `key = value` lines.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "records = {}", self.records);
        let _ = writeln!(out, "accommodations = {}", self.accommodations);
        let _ = writeln!(out, "small_accommodations = {}", self.small_accommodations);
        let _ = writeln!(
            out,
            "inconsistent_accommodations = {}",
            self.inconsistent_accommodations
        );
        let _ = writeln!(out, "voted_fraction = {}", self.voted_fraction);
        for f in &self.fields {
            let _ = writeln!(out, "{}.unique = {}", f.field, f.unique);
            if let Some(m) = f.mean {
                let _ = writeln!(out, "{}.mean = {}", f.field, m);
            }
            let _ = writeln!(out, "{}.mode = {}", f.field, f.mode);
            if let (Some(lo), Some(hi)) = (f.min, f.max) {
                let _ = writeln!(out, "{}.min = {}", f.field, lo);
                let _ = writeln!(out, "{}.max = {}", f.field, hi);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::tests::record;

    #[test]
    fn single_record() {
        let report = validate_statistics(&[record("A", "t", 3)]).unwrap();
        assert!(report.fields.iter().all(|f| f.unique == 1));
        let votes = report.field("review_helpful_votes").unwrap();
        assert_eq!(votes.mean, Some(3.0));
        assert_eq!(report.field("review_score").unwrap().mean, Some(9.0));
        assert_eq!(report.field("guest_type").unwrap().mode, "Couple");
        assert_eq!(report.field("month").unwrap().mode, "July");
        assert_eq!(report.small_accommodations, 1);
    }

    #[test]
    fn two_vote_values() {
        let report = validate_statistics(&[record("A", "t", 0), record("A", "u", 4)]).unwrap();
        let votes = report.field("review_helpful_votes").unwrap();
        assert_eq!(votes.mean, Some(2.0));
        assert_eq!(votes.min, Some(0.0));
        assert_eq!(votes.max, Some(4.0));
        assert_eq!(votes.unique, 2);
        assert_eq!(votes.mode, "0.0");
        assert_eq!(report.voted_fraction, 0.5);
        assert_eq!(report.inconsistent_accommodations, 0);
    }

    #[test]
    fn inconsistent_context_is_counted() {
        let mut b = record("A", "u", 0);
        b.accommodation.accommodation_score = 7.0;
        let report = validate_statistics(&[record("A", "t", 0), b]).unwrap();
        assert_eq!(report.inconsistent_accommodations, 1);
        assert!(report
            .to_key_values()
            .contains("inconsistent_accommodations = 1"));
        assert!(report.to_table().contains("review_helpful_votes"));
    }

    #[test]
    fn empty_is_error() {
        assert!(validate_statistics(&[]).is_err());
    }
}
