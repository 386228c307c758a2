//! Typed review records, CSV ingestion, grouping by accommodation and
//! accommodation-level splitting.

mod csv_io;
mod stats;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use csv_io::{
    load_csv, read_csv, write_csv, write_csv_to, LoadOutcome, Rejection, SchemaMode, COLUMNS,
};
pub use stats::{validate_statistics, FieldStatistics, StatisticsReport};

/// Accommodations with fewer reviews than this are flagged by validation.
pub const MIN_REVIEWS_PER_ACCOMMODATION: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GuestType {
    SoloTraveller,
    Couple,
    Group,
    FamilyWithChildren,
}

impl GuestType {
    pub const ALL: [GuestType; 4] = [
        GuestType::SoloTraveller,
        GuestType::Couple,
        GuestType::Group,
        GuestType::FamilyWithChildren,
    ];

    pub fn label(self) -> &'static str {
        match self {
            GuestType::SoloTraveller => "Solo traveller",
            GuestType::Couple => "Couple",
            GuestType::Group => "Group",
            GuestType::FamilyWithChildren => "Family with children",
        }
    }

    /// Snake-case key used in configuration files.
    pub fn key(self) -> &'static str {
        match self {
            GuestType::SoloTraveller => "solo_traveller",
            GuestType::Couple => "couple",
            GuestType::Group => "group",
            GuestType::FamilyWithChildren => "family_with_children",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for GuestType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GuestType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .trim()
            .chars()
            .map(|c| {
                if c == '_' || c == '-' {
                    ' '
                } else {
                    c.to_ascii_lowercase()
                }
            })
            .collect();
        match norm.as_str() {
            "solo traveller" | "solo traveler" => Ok(GuestType::SoloTraveller),
            "couple" => Ok(GuestType::Couple),
            "group" => Ok(GuestType::Group),
            "family with children" => Ok(GuestType::FamilyWithChildren),
            _ => Err(Error::value(
                "guest_type",
                format!("`{s}` is not one of the 4 traveller types"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Month {
    January = 1,
    February,
    March,
    April,
    May,
    June,
    July,
    August,
    September,
    October,
    November,
    December,
}

impl Month {
    pub const ALL: [Month; 12] = [
        Month::January,
        Month::February,
        Month::March,
        Month::April,
        Month::May,
        Month::June,
        Month::July,
        Month::August,
        Month::September,
        Month::October,
        Month::November,
        Month::December,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Month::January => "January",
            Month::February => "February",
            Month::March => "March",
            Month::April => "April",
            Month::May => "May",
            Month::June => "June",
            Month::July => "July",
            Month::August => "August",
            Month::September => "September",
            Month::October => "October",
            Month::November => "November",
            Month::December => "December",
        }
    }

    pub fn number(self) -> u32 {
        self as u32
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Month {
    type Err = Error;

    /// Accepts English month names (any case, 3-letter abbreviations allowed) or 1..=12.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Ok(n) = t.parse::<usize>() {
            if (1..=12).contains(&n) {
                return Ok(Month::ALL[n - 1]);
            }
        }
        let lower = t.to_ascii_lowercase();
        Month::ALL
            .iter()
            .copied()
            .find(|m| {
                let name = m.name().to_ascii_lowercase();
                name == lower || (lower.len() == 3 && name.starts_with(&lower))
            })
            .ok_or_else(|| Error::value("month", format!("`{s}` is not a calendar month")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuestContext {
    pub guest_type: GuestType,
    pub guest_country: String,
    pub room_nights: u32,
    pub month: Month,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccommodationContext {
    pub accommodation_id: String,
    pub accommodation_type: String,
    pub accommodation_score: f64,
    pub accommodation_country: String,
    pub accommodation_star_rating: f64,
    pub location_is_beach: bool,
    pub location_is_ski: bool,
    pub location_is_city_center: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Review {
    pub review_title: String,
    pub review_positive: String,
    pub review_negative: String,
    pub review_score: f64,
    pub review_helpful_votes: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReviewRecord {
    pub review: Review,
    pub guest: GuestContext,
    pub accommodation: AccommodationContext,
}

impl GuestContext {
    pub fn validate(&self) -> Result<()> {
        if self.room_nights < 1 {
            return Err(Error::value("room_nights", "must be at least 1"));
        }
        Ok(())
    }
}

impl AccommodationContext {
    pub fn validate(&self) -> Result<()> {
        if self.accommodation_id.trim().is_empty() {
            return Err(Error::value("accommodation_id", "must not be empty"));
        }
        check_range("accommodation_score", self.accommodation_score, 1.0, 10.0)?;
        check_range(
            "accommodation_star_rating",
            self.accommodation_star_rating,
            0.0,
            5.0,
        )
    }
}

impl Review {
    pub fn validate(&self) -> Result<()> {
        check_range("review_score", self.review_score, 1.0, 10.0)?;
        if self.review_title.trim().is_empty()
            && self.review_positive.trim().is_empty()
            && self.review_negative.trim().is_empty()
        {
            return Err(Error::value("review", "all three text sections are empty"));
        }
        Ok(())
    }

    /// Title, positive and negative sections joined by single spaces, empty ones skipped.
    pub fn text(&self) -> String {
        [
            &self.review_title,
            &self.review_positive,
            &self.review_negative,
        ]
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
    }
}

impl ReviewRecord {
    pub fn validate(&self) -> Result<()> {
        self.review.validate()?;
        self.guest.validate()?;
        self.accommodation.validate()
    }

    pub fn accommodation_id(&self) -> &str {
        &self.accommodation.accommodation_id
    }
}

fn check_range(field: &str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !value.is_finite() || value < lo || value > hi {
        return Err(Error::value(field, format!("{value} outside [{lo}, {hi}]")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccommodationGroup {
    pub accommodation_id: String,
    pub records: Vec<ReviewRecord>,
}

impl AccommodationGroup {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Whether the group reaches the 10-review selection threshold.
    pub fn meets_minimum(&self) -> bool {
        self.records.len() >= MIN_REVIEWS_PER_ACCOMMODATION
    }

    /// True when every record carries the same accommodation context.
    pub fn is_consistent(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[0].accommodation == w[1].accommodation)
    }
}

/// Partitions records by accommodation id. Groups appear in order of first
/// occurrence and keep the input order of their records.
pub fn group_by_accommodation(records: Vec<ReviewRecord>) -> Result<Vec<AccommodationGroup>> {
    if records.is_empty() {
        return Err(Error::Empty("cannot group an empty record list".into()));
    }
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut groups: Vec<AccommodationGroup> = Vec::new();
    for record in records {
        let id = record.accommodation_id().to_string();
        let slot = *index.entry(id.clone()).or_insert_with(|| {
            groups.push(AccommodationGroup {
                accommodation_id: id,
                records: Vec::new(),
            });
            groups.len() - 1
        });
        groups[slot].records.push(record);
    }
    Ok(groups)
}

/// Flattens groups back into a record list, group by group.
pub fn flatten_groups(groups: &[AccommodationGroup]) -> Vec<ReviewRecord> {
    groups
        .iter()
        .flat_map(|g| g.records.iter().cloned())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<AccommodationGroup>,
    pub valid: Vec<AccommodationGroup>,
    pub test: Vec<AccommodationGroup>,
}

/// Default 80/10/10 accommodation-level split fractions.
pub const DEFAULT_SPLIT: (f64, f64, f64) = (0.8, 0.1, 0.1);

/// Splits groups by accommodation into train/validation/test. Each split
/// keeps the original relative order of its groups.
pub fn split_dataset(
    groups: Vec<AccommodationGroup>,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<DatasetSplit> {
    let fr = [fractions.0, fractions.1, fractions.2];
    if fr.iter().any(|f| !f.is_finite() || *f < 0.0) {
        return Err(Error::Config(format!(
            "split fractions must be non-negative: {fr:?}"
        )));
    }
    if (fr.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split fractions must sum to 1: {fr:?}"
        )));
    }
    let n = groups.len();
    let nonzero = fr.iter().filter(|f| **f > 0.0).count();
    if n < nonzero {
        return Err(Error::Config(format!(
            "{n} accommodation groups cannot fill {nonzero} non-empty splits"
        )));
    }
    let counts = split_counts(n, fr);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0usize; n];
    let mut cursor = 0;
    for (split, &count) in counts.iter().enumerate() {
        for &g in &order[cursor..cursor + count] {
            assignment[g] = split;
        }
        cursor += count;
    }

    let mut out = DatasetSplit {
        train: Vec::new(),
        valid: Vec::new(),
        test: Vec::new(),
    };
    for (g, group) in groups.into_iter().enumerate() {
        match assignment[g] {
            0 => out.train.push(group),
            1 => out.valid.push(group),
            _ => out.test.push(group),
        }
    }
    Ok(out)
}

/// Largest-remainder apportionment; every non-zero fraction gets at least one group.
fn split_counts(n: usize, fr: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = fr.iter().map(|f| f * n as f64).collect();
    let mut counts = [0usize; 3];
    for i in 0..3 {
        counts[i] = (exact[i] + 1e-9).floor() as usize;
    }
    let mut remaining = n - counts.iter().sum::<usize>();
    let mut by_remainder: Vec<usize> = (0..3).collect();
    by_remainder.sort_by(|&a, &b| {
        let ra = exact[a] - counts[a] as f64;
        let rb = exact[b] - counts[b] as f64;
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in by_remainder.iter().cycle() {
        if remaining == 0 {
            break;
        }
        if fr[i] > 0.0 {
            counts[i] += 1;
            remaining -= 1;
        }
    }
    for i in 0..3 {
        if fr[i] > 0.0 && counts[i] == 0 {
            let donor = (0..3)
                .max_by_key(|&j| (counts[j], std::cmp::Reverse(j)))
                .unwrap();
            counts[donor] -= 1;
            counts[i] += 1;
        }
    }
    counts
}
