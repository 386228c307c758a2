//! Epoch plans for contrastive training: global random batches, or batches
//! drawn from a single accommodation so every negative is a review of the
//! same property.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{AccommodationGroup, ReviewRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Random,
    InAccommodation,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Random => "random",
            SamplerKind::InAccommodation => "in-accommodation",
        }
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "random" => Ok(SamplerKind::Random),
            "in-accommodation" | "inaccommodation" => Ok(SamplerKind::InAccommodation),
            _ => Err(Error::value(
                "sampler",
                format!("`{s}` is not one of random, in-accommodation"),
            )),
        }
    }
}

/// Indices into the flattened record list (group by group, in group order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub records: Vec<usize>,
    /// Present iff every record comes from this accommodation by construction.
    pub accommodation_id: Option<String>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochPlan {
    pub batches: Vec<Batch>,
    /// Records left out because they could not form a batch of two.
    pub dropped: Vec<usize>,
    /// Accommodations skipped for having fewer than two records: (id, size).
    pub skipped_groups: Vec<(String, usize)>,
}

impl EpochPlan {
    pub fn eligible_records(&self) -> usize {
        self.batches.iter().map(Batch::len).sum()
    }

    /// Text manifest: one `batch<TAB>accommodation_id<TAB>indices` line per batch.
    pub fn manifest(&self) -> String {
        let mut out = String::from("batch\taccommodation_id\trecords\n");
        for (i, b) in self.batches.iter().enumerate() {
            let ids: Vec<String> = b.records.iter().map(usize::to_string).collect();
            let _ = writeln!(
                out,
                "{i}\t{}\t{}",
                b.accommodation_id.as_deref().unwrap_or("-"),
                ids.join(",")
            );
        }
        for r in &self.dropped {
            let _ = writeln!(out, "# dropped record {r}");
        }
        for (id, n) in &self.skipped_groups {
            let _ = writeln!(out, "# skipped accommodation {id} ({n} records)");
        }
        out
    }
}

/// Shuffles all records and cuts them into consecutive batches. A final
/// chunk of one record is dropped and reported.
pub fn random_epoch(n_records: usize, batch_size: usize, seed: u64) -> Result<EpochPlan> {
    if n_records < 2 {
        return Err(Error::Config(format!(
            "random sampling needs at least 2 records, got {n_records}"
        )));
    }
    check_batch_size(batch_size)?;
    let mut order: Vec<usize> = (0..n_records).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut plan = EpochPlan {
        batches: Vec::new(),
        dropped: Vec::new(),
        skipped_groups: Vec::new(),
    };
    for chunk in order.chunks(batch_size) {
        if chunk.len() >= 2 {
            plan.batches.push(Batch {
                records: chunk.to_vec(),
                accommodation_id: None,
            });
        } else {
            plan.dropped.extend_from_slice(chunk);
        }
    }
    Ok(plan)
}

/// Chunks each accommodation's shuffled records into batches of up to
/// `batch_size`, then shuffles batch order across accommodations. A trailing
/// single record is merged into the previous batch of the same group; groups
/// with fewer than two records are skipped.
pub fn in_accommodation_epoch(
    groups: &[AccommodationGroup],
    batch_size: usize,
    seed: u64,
) -> Result<EpochPlan> {
    check_batch_size(batch_size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plan = EpochPlan {
        batches: Vec::new(),
        dropped: Vec::new(),
        skipped_groups: Vec::new(),
    };
    let mut offset = 0;
    for group in groups {
        let n = group.len();
        if n < 2 {
            plan.skipped_groups
                .push((group.accommodation_id.clone(), n));
            plan.dropped.extend(offset..offset + n);
            offset += n;
            continue;
        }
        let mut order: Vec<usize> = (offset..offset + n).collect();
        order.shuffle(&mut rng);
        let mut chunks: Vec<Vec<usize>> = order.chunks(batch_size).map(<[usize]>::to_vec).collect();
        if chunks.len() > 1 && chunks.last().is_some_and(|c| c.len() == 1) {
            let tail = chunks.pop().unwrap();
            chunks.last_mut().unwrap().extend(tail);
        }
        plan.batches.extend(chunks.into_iter().map(|records| Batch {
            records,
            accommodation_id: Some(group.accommodation_id.clone()),
        }));
        offset += n;
    }
    if plan.batches.is_empty() {
        return Err(Error::Config(
            "no accommodation has at least 2 records".into(),
        ));
    }
    plan.batches.shuffle(&mut rng);
    Ok(plan)
}

fn check_batch_size(batch_size: usize) -> Result<()> {
    if batch_size < 2 {
        return Err(Error::Config(format!(
            "batch size must be at least 2, got {batch_size}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanViolation {
    /// A record appears neither in a batch nor in the dropped list.
    Missing {
        record: usize,
    },
    /// A record appears more than once.
    Duplicate {
        batch: usize,
        record: usize,
    },
    OutOfRange {
        batch: usize,
        record: usize,
    },
    TooSmall {
        batch: usize,
        size: usize,
    },
    /// A tagged batch contains a record from another accommodation.
    Mixed {
        batch: usize,
        record: usize,
    },
}

impl fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanViolation::Missing { record } => write!(f, "record {record} is not covered"),
            PlanViolation::Duplicate { batch, record } => {
                write!(f, "batch {batch}: record {record} repeated")
            }
            PlanViolation::OutOfRange { batch, record } => {
                write!(f, "batch {batch}: record {record} out of range")
            }
            PlanViolation::TooSmall { batch, size } => {
                write!(f, "batch {batch}: size {size} below 2")
            }
            PlanViolation::Mixed { batch, record } => {
                write!(
                    f,
                    "batch {batch}: record {record} from a different accommodation"
                )
            }
        }
    }
}

/// Checks coverage, minimum batch size and homogeneity of tagged batches.
pub fn verify_plan(plan: &EpochPlan, records: &[ReviewRecord]) -> Vec<PlanViolation> {
    let mut violations = Vec::new();
    let mut seen = vec![false; records.len()];
    for &r in &plan.dropped {
        if r < seen.len() {
            seen[r] = true;
        }
    }
    for (b, batch) in plan.batches.iter().enumerate() {
        if batch.len() < 2 {
            violations.push(PlanViolation::TooSmall {
                batch: b,
                size: batch.len(),
            });
        }
        for &r in &batch.records {
            if r >= records.len() {
                violations.push(PlanViolation::OutOfRange {
                    batch: b,
                    record: r,
                });
                continue;
            }
            if std::mem::replace(&mut seen[r], true) {
                violations.push(PlanViolation::Duplicate {
                    batch: b,
                    record: r,
                });
            }
            if let Some(id) = &batch.accommodation_id {
                if records[r].accommodation_id() != id {
                    violations.push(PlanViolation::Mixed {
                        batch: b,
                        record: r,
                    });
                }
            }
        }
    }
    for (r, covered) in seen.iter().enumerate() {
        if !covered {
            violations.push(PlanViolation::Missing { record: r });
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::tests::record;
    use crate::dataset::{flatten_groups, group_by_accommodation};
    use proptest::prelude::*;

    fn groups(sizes: &[usize]) -> Vec<AccommodationGroup> {
        sizes
            .iter()
            .enumerate()
            .map(|(g, &n)| AccommodationGroup {
                accommodation_id: format!("acc{g}"),
                records: (0..n)
                    .map(|i| record(&format!("acc{g}"), &format!("r{i}"), 0))
                    .collect(),
            })
            .collect()
    }

    fn sizes(plan: &EpochPlan) -> Vec<usize> {
        let mut s: Vec<_> = plan.batches.iter().map(Batch::len).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    #[test]
    fn random_chunking() {
        let plan = random_epoch(10, 4, 1).unwrap();
        assert_eq!(
            plan.batches.iter().map(Batch::len).collect::<Vec<_>>(),
            [4, 4, 2]
        );
        assert!(plan.dropped.is_empty());
        let plan = random_epoch(9, 4, 1).unwrap();
        assert_eq!(
            plan.batches.iter().map(Batch::len).collect::<Vec<_>>(),
            [4, 4]
        );
        assert_eq!(plan.dropped.len(), 1);
        assert_eq!(random_epoch(9, 4, 1).unwrap(), plan);
        assert_ne!(random_epoch(9, 4, 2).unwrap(), plan);
        assert!(random_epoch(1, 4, 1).is_err());
        assert!(random_epoch(5, 1, 1).is_err());
    }

    #[test]
    fn in_accommodation_chunking() {
        let g = groups(&[10]);
        let plan = in_accommodation_epoch(&g, 4, 3).unwrap();
        assert_eq!(sizes(&plan), [4, 4, 2]);
        assert!(plan
            .batches
            .iter()
            .all(|b| b.accommodation_id.as_deref() == Some("acc0")));

        let plan = in_accommodation_epoch(&groups(&[5]), 4, 3).unwrap();
        assert_eq!(sizes(&plan), [5]);

        let g = groups(&[3, 1]);
        let plan = in_accommodation_epoch(&g, 4, 3).unwrap();
        assert_eq!(sizes(&plan), [3]);
        assert_eq!(plan.skipped_groups, [("acc1".to_string(), 1)]);
        assert!(verify_plan(&plan, &flatten_groups(&g)).is_empty());

        assert!(in_accommodation_epoch(&groups(&[1, 1]), 4, 3).is_err());
    }

    #[test]
    fn violations_are_detected() {
        let g = groups(&[4, 4]);
        let records = flatten_groups(&g);
        let good = in_accommodation_epoch(&g, 4, 0).unwrap();
        assert!(verify_plan(&good, &records).is_empty());

        let mut mixed = good.clone();
        let other = mixed.batches[1].records[0];
        mixed.batches[0].records[0] = other;
        let v = verify_plan(&mixed, &records);
        assert!(v
            .iter()
            .any(|x| matches!(x, PlanViolation::Mixed { batch: 0, .. })));
        assert!(v.iter().any(|x| matches!(x, PlanViolation::Missing { .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, PlanViolation::Duplicate { .. })));

        let mut missing = good.clone();
        missing.batches[0].records.pop();
        let v = verify_plan(&missing, &records);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], PlanViolation::Missing { .. }));

        let mut tiny = good;
        tiny.batches[0].records.truncate(1);
        assert!(verify_plan(&tiny, &records)
            .iter()
            .any(|x| matches!(x, PlanViolation::TooSmall { batch: 0, size: 1 })));
    }

    #[test]
    fn manifest_lists_every_batch() {
        let plan = random_epoch(5, 2, 0).unwrap();
        let m = plan.manifest();
        assert_eq!(m.lines().filter(|l| !l.starts_with('#')).count(), 3);
        assert!(m.contains("# dropped record"));
    }

    #[test]
    fn random_batches_mix_accommodations() {
        // within-batch pairs sharing an accommodation: random << in-accommodation (= 1)
        let g = groups(&[20; 10]);
        let records = flatten_groups(&g);
        let regrouped = group_by_accommodation(records.clone()).unwrap();
        let frac = |plan: &EpochPlan| {
            let (mut same, mut total) = (0usize, 0usize);
            for b in &plan.batches {
                for i in 0..b.len() {
                    for j in i + 1..b.len() {
                        total += 1;
                        same += (records[b.records[i]].accommodation_id()
                            == records[b.records[j]].accommodation_id())
                            as usize;
                    }
                }
            }
            same as f64 / total as f64
        };
        let mut random_frac = 0.0;
        for seed in 0..10 {
            random_frac += frac(&random_epoch(records.len(), 8, seed).unwrap()) / 10.0;
        }
        let in_acc = frac(&in_accommodation_epoch(&regrouped, 8, 0).unwrap());
        assert_eq!(in_acc, 1.0);
        // expected (20 - 1) / (200 - 1) under uniform shuffling
        assert!(random_frac < 0.2, "{random_frac}");
    }

    proptest! {
        #[test]
        fn plans_cover_and_are_homogeneous(
            group_sizes in proptest::collection::vec(0usize..15, 1..8),
            batch_size in 2usize..7,
            seed in any::<u64>(),
        ) {
            let g = groups(&group_sizes);
            let records = flatten_groups(&g);
            if records.len() >= 2 {
                let plan = random_epoch(records.len(), batch_size, seed).unwrap();
                prop_assert!(verify_plan(&plan, &records).is_empty());
                prop_assert_eq!(plan.eligible_records() + plan.dropped.len(), records.len());
                prop_assert_eq!(&plan, &random_epoch(records.len(), batch_size, seed).unwrap());
            }
            match in_accommodation_epoch(&g, batch_size, seed) {
                Ok(plan) => {
                    prop_assert!(verify_plan(&plan, &records).is_empty());
                    let eligible: usize = group_sizes.iter().filter(|&&n| n >= 2).sum();
                    prop_assert_eq!(plan.eligible_records(), eligible);
                    prop_assert!(plan.batches.iter().all(|b| b.len() <= batch_size + 1));
                }
                Err(_) => prop_assert!(group_sizes.iter().all(|&n| n < 2)),
            }
        }
    }
}
