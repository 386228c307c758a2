//! Synthetic corpora with a planted guest-type signal in the review text,
//! plus the ideal-scorer MRR that bounds what any model can reach on them.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_list, parse_range, parse_value, read_key_values};
use crate::dataset::{
    group_by_accommodation, AccommodationContext, AccommodationGroup, GuestContext, GuestType,
    Month, Review, ReviewRecord,
};
use crate::encoder::tokenize;
use crate::error::{Error, Result};
use crate::eval::random_expected_rr;

/// Fraction of reviews with at least one helpful vote.
pub const VOTED_FRACTION: f64 = 0.087;
/// Largest helpful-vote count generated.
pub const MAX_VOTES: u32 = 91;
const VOTE_TAIL_INDEX: f64 = 1.3;

const SOLO: [&str; 24] = [
    "backpack",
    "laptop",
    "wifi",
    "desk",
    "single",
    "locker",
    "earplugs",
    "podcast",
    "journal",
    "commute",
    "cowork",
    "meetup",
    "walking",
    "tour",
    "cafe",
    "bookshop",
    "gallery",
    "solitude",
    "headphones",
    "novel",
    "jogging",
    "workspace",
    "charger",
    "sketchbook",
];
const COUPLE: [&str; 24] = [
    "romantic",
    "candle",
    "anniversary",
    "honeymoon",
    "champagne",
    "sunset",
    "jacuzzi",
    "wine",
    "dinner",
    "roses",
    "intimate",
    "cosy",
    "bathtub",
    "massage",
    "balcony",
    "proposal",
    "dessert",
    "terrace",
    "moonlight",
    "spa",
    "vineyard",
    "date",
    "privacy",
    "chocolate",
];
const GROUP: [&str; 24] = [
    "friends",
    "party",
    "bar",
    "pub",
    "nightlife",
    "karaoke",
    "bunk",
    "dormitory",
    "shared",
    "crowd",
    "games",
    "barbecue",
    "drinks",
    "club",
    "dancing",
    "loud",
    "lounge",
    "billiards",
    "football",
    "festival",
    "brewery",
    "hangout",
    "reunion",
    "squad",
];
const FAMILY: [&str; 24] = [
    "kids",
    "children",
    "toddler",
    "crib",
    "playground",
    "stroller",
    "pool",
    "babysitter",
    "cartoons",
    "nursery",
    "toys",
    "highchair",
    "slide",
    "zoo",
    "picnic",
    "parents",
    "grandparents",
    "diapers",
    "playroom",
    "aquarium",
    "puppets",
    "trampoline",
    "sandbox",
    "carousel",
];
const BACKGROUND: [&str; 40] = [
    "clean",
    "room",
    "bed",
    "staff",
    "breakfast",
    "location",
    "shower",
    "towel",
    "check",
    "reception",
    "price",
    "value",
    "comfortable",
    "friendly",
    "helpful",
    "parking",
    "noise",
    "view",
    "elevator",
    "stairs",
    "coffee",
    "tea",
    "kettle",
    "fridge",
    "heating",
    "window",
    "door",
    "key",
    "carpet",
    "pillow",
    "air",
    "conditioning",
    "bathroom",
    "lobby",
    "garden",
    "street",
    "station",
    "airport",
    "shuttle",
    "restaurant",
];

const ACCOMMODATION_TYPES: [(&str, [&str; 2]); 6] = [
    ("Hotel", ["concierge", "housekeeping"]),
    ("Apartment", ["kitchenette", "laundry"]),
    ("Hostel", ["backpackers", "hammocks"]),
    ("Guest house", ["landlady", "homely"]),
    ("Resort", ["allinclusive", "animation"]),
    ("Villa", ["gated", "secluded"]),
];
const BEACH: [&str; 3] = ["beach", "seaside", "waves"];
const SKI: [&str; 3] = ["slopes", "skipass", "snow"];
const CITY: [&str; 3] = ["downtown", "metro", "museums"];
const RURAL: [&str; 2] = ["countryside", "tranquil"];
const LUXURY: [&str; 2] = ["luxurious", "elegant"];
const BUDGET: [&str; 2] = ["basic", "budget"];

const COUNTRIES: [&str; 12] = [
    "Australia",
    "Brazil",
    "Canada",
    "France",
    "Germany",
    "India",
    "Italy",
    "Japan",
    "Netherlands",
    "Spain",
    "United Kingdom",
    "United States",
];
const STAR_RATINGS: [f64; 9] = [0.0, 1.0, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_accommodations: usize,
    /// Inclusive range of reviews per accommodation.
    pub reviews_per_accommodation: (usize, usize),
    /// Probability that a review token comes from the author's guest-type lexicon.
    pub signal_strength: f64,
    /// Probability that a non-segment token describes the accommodation
    /// (type, beach, ski, downtown, star level) instead of coming from the
    /// background lexicon. Tokens of this kind separate accommodations but
    /// carry nothing about the guest.
    pub accommodation_signal: f64,
    pub voted_fraction: f64,
    /// Indexed by [`GuestType::index`].
    pub segment_lexicons: [Vec<String>; 4],
    pub background_lexicon: Vec<String>,
    pub seed: u64,
}

fn owned(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_accommodations: 300,
            reviews_per_accommodation: (12, 12),
            signal_strength: 0.9,
            accommodation_signal: 0.5,
            voted_fraction: VOTED_FRACTION,
            segment_lexicons: [owned(&SOLO), owned(&COUPLE), owned(&GROUP), owned(&FAMILY)],
            background_lexicon: owned(&BACKGROUND),
            seed: 0,
        }
    }
}

fn attribute_vocabulary() -> impl Iterator<Item = &'static str> {
    ACCOMMODATION_TYPES
        .iter()
        .flat_map(|(_, w)| w.iter().copied())
        .chain(BEACH)
        .chain(SKI)
        .chain(CITY)
        .chain(RURAL)
        .chain(LUXURY)
        .chain(BUDGET)
}

fn in_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Config(format!("{name} must be in [0, 1], got {v}")));
    }
    Ok(())
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_accommodations == 0 {
            return Err(Error::Config("n_accommodations must be positive".into()));
        }
        let (lo, hi) = self.reviews_per_accommodation;
        if lo == 0 || lo > hi {
            return Err(Error::Config(format!(
                "invalid reviews_per_accommodation {lo}..{hi}"
            )));
        }
        in_unit("signal_strength", self.signal_strength)?;
        in_unit("accommodation_signal", self.accommodation_signal)?;
        in_unit("voted_fraction", self.voted_fraction)?;
        let mut owner: HashMap<&str, String> = HashMap::new();
        let named = GuestType::ALL
            .iter()
            .map(|g| {
                (
                    format!("lexicon.{}", g.key()),
                    &self.segment_lexicons[g.index()],
                )
            })
            .chain(std::iter::once((
                "background_lexicon".to_string(),
                &self.background_lexicon,
            )));
        for (name, lexicon) in named {
            if lexicon.is_empty() {
                return Err(Error::Empty(format!("{name} has no tokens")));
            }
            for t in lexicon {
                if tokenize(t) != [t.clone()] {
                    return Err(Error::Config(format!(
                        "{name}: `{t}` is not a single lowercase token"
                    )));
                }
                if let Some(prev) = owner.insert(t, name.clone()) {
                    return Err(Error::Config(format!(
                        "`{t}` appears in both {prev} and {name}"
                    )));
                }
            }
        }
        for t in attribute_vocabulary() {
            if let Some(prev) = owner.get(t) {
                return Err(Error::Config(format!(
                    "`{t}` in {prev} is reserved for accommodation attributes"
                )));
            }
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n_accommodations" => self.n_accommodations = parse_value(key, value)?,
            "reviews_per_accommodation" => {
                self.reviews_per_accommodation = parse_range(key, value)?
            }
            "signal_strength" => self.signal_strength = parse_value(key, value)?,
            "accommodation_signal" => self.accommodation_signal = parse_value(key, value)?,
            "voted_fraction" => self.voted_fraction = parse_value(key, value)?,
            "background_lexicon" => self.background_lexicon = parse_list(value),
            "seed" => self.seed = parse_value(key, value)?,
            _ => {
                let guest = key
                    .strip_prefix("lexicon.")
                    .and_then(|g| g.parse::<GuestType>().ok())
                    .ok_or_else(|| Error::UnknownKey(key.to_string()))?;
                self.segment_lexicons[guest.index()] = parse_list(value);
            }
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>, base: SynthConfig) -> Result<Self> {
        let mut config = base;
        for (k, v) in read_key_values(path)? {
            config.set(&k, &v)?;
        }
        Ok(config)
    }

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let (lo, hi) = self.reviews_per_accommodation;
        let _ = writeln!(out, "n_accommodations = {}", self.n_accommodations);
        let _ = writeln!(out, "reviews_per_accommodation = {lo}..{hi}");
        let _ = writeln!(out, "signal_strength = {}", self.signal_strength);
        let _ = writeln!(out, "accommodation_signal = {}", self.accommodation_signal);
        let _ = writeln!(out, "voted_fraction = {}", self.voted_fraction);
        let _ = writeln!(out, "seed = {}", self.seed);
        for g in GuestType::ALL {
            let _ = writeln!(
                out,
                "lexicon.{} = {}",
                g.key(),
                self.segment_lexicons[g.index()].join(", ")
            );
        }
        let _ = writeln!(
            out,
            "background_lexicon = {}",
            self.background_lexicon.join(", ")
        );
        out
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Attribute words describing an accommodation.
pub fn attribute_tokens(acc: &AccommodationContext) -> Vec<&'static str> {
    let mut out: Vec<&'static str> = ACCOMMODATION_TYPES
        .iter()
        .find(|(t, _)| *t == acc.accommodation_type)
        .map(|(_, w)| w.to_vec())
        .unwrap_or_default();
    if acc.location_is_beach {
        out.extend(BEACH);
    }
    if acc.location_is_ski {
        out.extend(SKI);
    }
    out.extend(if acc.location_is_city_center {
        &CITY[..]
    } else {
        &RURAL[..]
    });
    if acc.accommodation_star_rating >= 4.0 {
        out.extend(LUXURY);
    } else if acc.accommodation_star_rating <= 2.0 {
        out.extend(BUDGET);
    }
    out
}

fn accommodation(index: usize, rng: &mut ChaCha8Rng) -> AccommodationContext {
    let beach = rng.gen_bool(0.25);
    AccommodationContext {
        accommodation_id: format!("acc{index:05}"),
        accommodation_type: ACCOMMODATION_TYPES.choose(rng).unwrap().0.to_string(),
        accommodation_score: round1(rng.gen_range(6.0..9.8)),
        accommodation_country: COUNTRIES.choose(rng).unwrap().to_string(),
        accommodation_star_rating: *STAR_RATINGS.choose(rng).unwrap(),
        location_is_beach: beach,
        location_is_ski: !beach && rng.gen_bool(0.1),
        location_is_city_center: rng.gen_bool(0.4),
    }
}

fn guest(rng: &mut ChaCha8Rng) -> GuestContext {
    // geometric stay length, mostly short
    let mut nights = 1;
    while nights < 30 && rng.gen_bool(0.55) {
        nights += 1;
    }
    GuestContext {
        guest_type: *GuestType::ALL.choose(rng).unwrap(),
        guest_country: COUNTRIES.choose(rng).unwrap().to_string(),
        room_nights: nights,
        month: *Month::ALL.choose(rng).unwrap(),
    }
}

fn votes(rng: &mut ChaCha8Rng, voted_fraction: f64) -> u32 {
    if !rng.gen_bool(voted_fraction) {
        return 0;
    }
    // Pareto tail with minimum 1
    let u: f64 = 1.0 - rng.gen::<f64>();
    (u.powf(-1.0 / VOTE_TAIL_INDEX).floor() as u32).clamp(1, MAX_VOTES)
}

struct TextSampler<'a> {
    config: &'a SynthConfig,
    segment: &'a [String],
    attributes: Vec<&'static str>,
}

impl TextSampler<'_> {
    fn token(&self, rng: &mut ChaCha8Rng) -> String {
        let c = self.config;
        if rng.gen::<f64>() < c.signal_strength {
            self.segment.choose(rng).unwrap().clone()
        } else if !self.attributes.is_empty() && rng.gen::<f64>() < c.accommodation_signal {
            self.attributes.choose(rng).unwrap().to_string()
        } else {
            c.background_lexicon.choose(rng).unwrap().clone()
        }
    }

    fn section(&self, rng: &mut ChaCha8Rng, len: usize) -> String {
        let words: Vec<String> = (0..len).map(|_| self.token(rng)).collect();
        let mut text = words.join(" ");
        if let Some(first) = text.get_mut(0..1) {
            first.make_ascii_uppercase();
        }
        text
    }
}

/// Generates the corpus accommodation by accommodation. Each accommodation
/// draws from its own RNG streams, so its records do not depend on the others.
pub fn generate(config: &SynthConfig) -> Result<Vec<ReviewRecord>> {
    config.validate()?;
    let (lo, hi) = config.reviews_per_accommodation;
    let mut records = Vec::new();
    for a in 0..config.n_accommodations {
        let base = 3 * a as u64;
        let mut meta = stream(config.seed, base);
        let mut text_rng = stream(config.seed, base + 1);
        let mut vote_rng = stream(config.seed, base + 2);
        let acc = accommodation(a, &mut meta);
        let attributes = attribute_tokens(&acc);
        let m = meta.gen_range(lo..=hi);
        for _ in 0..m {
            let guest = guest(&mut meta);
            let sampler = TextSampler {
                config,
                segment: &config.segment_lexicons[guest.guest_type.index()],
                attributes: attributes.clone(),
            };
            let title_len = text_rng.gen_range(2..=4);
            let positive_len = text_rng.gen_range(5..=10);
            let negative_len = if text_rng.gen_bool(0.4) {
                0
            } else {
                text_rng.gen_range(2..=6)
            };
            let noise: f64 = (0..3).map(|_| meta.gen_range(-1.0..1.0)).sum();
            let review = Review {
                review_title: sampler.section(&mut text_rng, title_len),
                review_positive: sampler.section(&mut text_rng, positive_len),
                review_negative: sampler.section(&mut text_rng, negative_len),
                review_score: round1((acc.accommodation_score + noise).clamp(1.0, 10.0)),
                review_helpful_votes: votes(&mut vote_rng, config.voted_fraction),
            };
            records.push(ReviewRecord {
                review,
                guest,
                accommodation: acc.clone(),
            });
        }
    }
    Ok(records)
}

fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

/// Expected reciprocal rank of the target when it sits among `tied` equally
/// scored items (itself included) below `above` strictly better ones and
/// ties are broken uniformly at random.
pub fn expected_tied_rr(above: usize, tied: usize) -> f64 {
    (harmonic(above + tied) - harmonic(above)) / tied as f64
}

/// Mean of `H_m / m` over groups: the MRR of a uniformly random scorer.
pub fn random_expectation(groups: &[AccommodationGroup]) -> f64 {
    let groups: Vec<_> = groups.iter().filter(|g| g.len() >= 2).collect();
    groups
        .iter()
        .map(|g| random_expected_rr(g.len()))
        .sum::<f64>()
        / groups.len() as f64
}

/// MRR of the ideal scorer on `groups` generated under `config`. Each review
/// is scored for a context by the posterior probability that its author has
/// the context's guest type. Lexicons are disjoint, so one segment token pins
/// the author's type and a review without any keeps the uniform prior.
/// Ties count at their expected reciprocal rank.
pub fn oracle_mrr(groups: &[AccommodationGroup], config: &SynthConfig) -> f64 {
    let owner: HashMap<&str, usize> = config
        .segment_lexicons
        .iter()
        .enumerate()
        .flat_map(|(g, lex)| lex.iter().map(move |t| (t.as_str(), g)))
        .collect();
    let n_types = GuestType::ALL.len();
    let groups: Vec<_> = groups.iter().filter(|g| g.len() >= 2).collect();
    let mut total = 0.0;
    for group in &groups {
        let posteriors: Vec<Vec<f64>> = group
            .records
            .iter()
            .map(|r| {
                let mut hits = vec![false; n_types];
                for t in tokenize(&r.review.text()) {
                    if let Some(&g) = owner.get(t.as_str()) {
                        hits[g] = true;
                    }
                }
                let k = hits.iter().filter(|&&h| h).count();
                match k {
                    0 => vec![1.0 / n_types as f64; n_types],
                    _ => hits
                        .iter()
                        .map(|&h| if h { 1.0 / k as f64 } else { 0.0 })
                        .collect(),
                }
            })
            .collect();
        let mut rr = 0.0;
        for (j, context) in group.records.iter().enumerate() {
            let g = context.guest.guest_type.index();
            let own = posteriors[j][g];
            let above = posteriors.iter().filter(|p| p[g] > own).count();
            let tied = posteriors.iter().filter(|p| p[g] == own).count();
            rr += expected_tied_rr(above, tied);
        }
        total += rr / group.len() as f64;
    }
    total / groups.len() as f64
}

/// Generates the corpus for `config` and returns its ideal-scorer MRR.
pub fn bayes_optimal_mrr(config: &SynthConfig) -> Result<f64> {
    let groups = group_by_accommodation(generate(config)?)?;
    Ok(oracle_mrr(&groups, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{read_csv, write_csv_to, SchemaMode};
    use crate::eval::chi_square_sf;

    fn config(signal: f64, n: usize, seed: u64) -> SynthConfig {
        SynthConfig {
            n_accommodations: n,
            signal_strength: signal,
            seed,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn default_lexicons_are_valid_and_disjoint() {
        SynthConfig::default().validate().unwrap();
        let mut c = SynthConfig::default();
        c.segment_lexicons[1].push("kids".into());
        assert!(c.validate().is_err());
        let mut c = SynthConfig::default();
        c.background_lexicon.push("beach".into());
        assert!(c.validate().is_err());
        let mut c = SynthConfig::default();
        c.segment_lexicons[2].clear();
        assert!(matches!(c.validate(), Err(Error::Empty(_))));
        assert!(generate(&c).is_err());
        assert!(SynthConfig {
            signal_strength: 1.5,
            ..SynthConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn deterministic_and_schema_valid() {
        let c = config(0.9, 30, 5);
        let a = generate(&c).unwrap();
        assert_eq!(a, generate(&c).unwrap());
        assert_ne!(a, generate(&config(0.9, 30, 6)).unwrap());
        assert_eq!(a.len(), 30 * 12);
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &a).unwrap();
        let back = read_csv(buf.as_slice(), SchemaMode::Strict).unwrap();
        assert!(back.rejections.is_empty());
        assert_eq!(back.records, a);
    }

    #[test]
    fn accommodations_are_independent_streams() {
        let small = generate(&config(0.9, 5, 9)).unwrap();
        let large = generate(&config(0.9, 8, 9)).unwrap();
        assert_eq!(small[..], large[..small.len()]);
    }

    #[test]
    fn full_signal_uses_only_segment_tokens() {
        let c = config(1.0, 20, 1);
        for r in generate(&c).unwrap() {
            let lex = &c.segment_lexicons[r.guest.guest_type.index()];
            for t in tokenize(&r.review.text()) {
                assert!(
                    lex.contains(&t),
                    "{t} not in the {} lexicon",
                    r.guest.guest_type
                );
            }
        }
    }

    #[test]
    fn vote_sparsity_matches_planted_fraction() {
        let c = SynthConfig {
            n_accommodations: 5000,
            reviews_per_accommodation: (10, 10),
            ..config(0.5, 0, 3)
        };
        let records = generate(&c).unwrap();
        assert_eq!(records.len(), 50_000);
        let voted = records
            .iter()
            .filter(|r| r.review.review_helpful_votes > 0)
            .count() as f64
            / 50_000.0;
        assert!((voted - 0.087).abs() < 0.02, "{voted}");
        assert!(records
            .iter()
            .all(|r| r.review.review_helpful_votes <= MAX_VOTES));
        assert!(records.iter().any(|r| r.review.review_helpful_votes > 5));
    }

    #[test]
    fn zero_signal_tokens_independent_of_guest_type() {
        let c = config(0.0, 1500, 11);
        let records = generate(&c).unwrap();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut counts: Vec<[f64; 4]> = Vec::new();
        // one token per review keeps observations independent: tokens of the
        // same review share a guest type and attribute tokens cluster by accommodation
        for r in &records {
            let t = tokenize(&r.review.review_title).swap_remove(0);
            let next = index.len();
            let k = *index.entry(t).or_insert(next);
            if k == counts.len() {
                counts.push([0.0; 4]);
            }
            counts[k][r.guest.guest_type.index()] += 1.0;
        }
        let total: f64 = counts.iter().flatten().sum();
        let col: Vec<f64> = (0..4).map(|g| counts.iter().map(|c| c[g]).sum()).collect();
        let mut chi2 = 0.0;
        for row in &counts {
            let rs: f64 = row.iter().sum();
            for g in 0..4 {
                let e = rs * col[g] / total;
                chi2 += (row[g] - e).powi(2) / e;
            }
        }
        let df = (counts.len() - 1) * 3;
        let p = chi_square_sf(chi2, df);
        assert!(p > 0.01, "chi2 {chi2} df {df} p {p}");
        // a planted signal is detected by the same test
        let planted = generate(&config(0.3, 300, 11)).unwrap();
        let seg = &c.segment_lexicons[0];
        let solo = planted
            .iter()
            .filter(|r| tokenize(&r.review.text()).iter().any(|t| seg.contains(t)))
            .all(|r| r.guest.guest_type == GuestType::SoloTraveller);
        assert!(solo);
    }

    #[test]
    fn tied_rr_closed_form() {
        // three tied items at the top: (1 + 1/2 + 1/3) / 3
        assert!((expected_tied_rr(0, 3) - 11.0 / 18.0).abs() < 1e-15);
        assert!((expected_tied_rr(2, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((expected_tied_rr(0, 10) - 0.292_896_825_4).abs() < 1e-9);
    }

    #[test]
    fn oracle_without_signal_is_random_expectation() {
        let c = SynthConfig {
            reviews_per_accommodation: (10, 10),
            ..config(0.0, 40, 2)
        };
        let v = bayes_optimal_mrr(&c).unwrap();
        assert!((v - 0.292_896_825_4).abs() < 1e-9, "{v}");
        let groups = group_by_accommodation(generate(&c).unwrap()).unwrap();
        assert!((random_expectation(&groups) - v).abs() < 1e-12);
    }

    #[test]
    fn oracle_monotone_in_signal() {
        let values: Vec<f64> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&s| bayes_optimal_mrr(&config(s, 100, 4)).unwrap())
            .collect();
        assert!(
            values[0] <= values[1] && values[1] <= values[2],
            "{values:?}"
        );
        assert!(values[2] > values[0] + 0.2, "{values:?}");
    }

    #[test]
    fn config_file_round_trip() {
        let mut c = config(0.7, 12, 99);
        c.reviews_per_accommodation = (8, 14);
        c.segment_lexicons[3] = vec!["kids".into(), "crib".into()];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("synth.txt");
        std::fs::write(&path, c.to_key_values()).unwrap();
        assert_eq!(
            SynthConfig::from_file(&path, SynthConfig::default()).unwrap(),
            c
        );
        assert!(matches!(
            SynthConfig::default().set("lexicon.pets", "dog"),
            Err(Error::UnknownKey(_))
        ));
    }
}
