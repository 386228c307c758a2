use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::StringRecord;

use super::{AccommodationContext, GuestContext, Review, ReviewRecord};
use crate::error::{Error, Result};

/// Column names of the review dataset, in canonical order.
pub const COLUMNS: [&str; 17] = [
    "review_title",
    "review_positive",
    "review_negative",
    "review_score",
    "review_helpful_votes",
    "guest_type",
    "guest_country",
    "room_nights",
    "month",
    "accommodation_id",
    "accommodation_type",
    "accommodation_score",
    "accommodation_country",
    "accommodation_star_rating",
    "location_is_beach",
    "location_is_ski",
    "location_is_city_center",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaMode {
    /// Header must be exactly the dataset columns; the first bad row aborts.
    Strict,
    /// Extra columns are ignored; bad rows are skipped and reported.
    Lenient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    /// 1-based data row number (the header is not counted).
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadOutcome {
    pub records: Vec<ReviewRecord>,
    pub rejections: Vec<Rejection>,
}

pub fn load_csv(path: impl AsRef<Path>, mode: SchemaMode) -> Result<LoadOutcome> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, mode)
}

pub fn read_csv<R: Read>(reader: R, mode: SchemaMode) -> Result<LoadOutcome> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let positions = column_positions(&header, mode)?;

    let mut outcome = LoadOutcome {
        records: Vec::new(),
        rejections: Vec::new(),
    };
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let parsed = row
            .map_err(|e| Error::value("row", e.to_string()))
            .and_then(|row| parse_row(&row, &positions));
        match parsed {
            Ok(record) => outcome.records.push(record),
            Err(e) => match mode {
                SchemaMode::Strict => {
                    return Err(Error::InvalidRow {
                        row: row_no,
                        reason: e.to_string(),
                    })
                }
                SchemaMode::Lenient => {
                    outcome.rejections.push(Rejection {
                        row: row_no,
                        reason: e.to_string(),
                    });
                }
            },
        }
    }
    Ok(outcome)
}

fn column_positions(header: &StringRecord, mode: SchemaMode) -> Result<[usize; 17]> {
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if mode == SchemaMode::Strict {
        if let Some(extra) = names.iter().find(|n| !COLUMNS.contains(n)) {
            return Err(Error::UnexpectedColumn(extra.to_string()));
        }
    }
    let mut pos = [0usize; 17];
    for (slot, col) in COLUMNS.iter().enumerate() {
        pos[slot] = names
            .iter()
            .position(|n| n == col)
            .ok_or_else(|| Error::MissingColumn(col.to_string()))?;
    }
    Ok(pos)
}

fn parse_row(row: &StringRecord, pos: &[usize; 17]) -> Result<ReviewRecord> {
    let cell = |i: usize| row.get(pos[i]).unwrap_or("");
    let record = ReviewRecord {
        review: Review {
            review_title: cell(0).trim().to_string(),
            review_positive: cell(1).trim().to_string(),
            review_negative: cell(2).trim().to_string(),
            review_score: parse_real(COLUMNS[3], cell(3))?,
            review_helpful_votes: parse_count(COLUMNS[4], cell(4))?,
        },
        guest: GuestContext {
            guest_type: cell(5).parse()?,
            guest_country: cell(6).trim().to_string(),
            room_nights: parse_count(COLUMNS[7], cell(7))?,
            month: cell(8).parse()?,
        },
        accommodation: AccommodationContext {
            accommodation_id: cell(9).trim().to_string(),
            accommodation_type: cell(10).trim().to_string(),
            accommodation_score: parse_real(COLUMNS[11], cell(11))?,
            accommodation_country: cell(12).trim().to_string(),
            accommodation_star_rating: parse_real(COLUMNS[13], cell(13))?,
            location_is_beach: parse_bool(COLUMNS[14], cell(14))?,
            location_is_ski: parse_bool(COLUMNS[15], cell(15))?,
            location_is_city_center: parse_bool(COLUMNS[16], cell(16))?,
        },
    };
    record.validate()?;
    Ok(record)
}

fn parse_real(field: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| Error::value(field, format!("`{raw}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::value(field, "not finite"));
    }
    Ok(v)
}

fn parse_count(field: &str, raw: &str) -> Result<u32> {
    raw.trim()
        .parse()
        .map_err(|_| Error::value(field, format!("`{raw}` is not a non-negative integer")))
}

fn parse_bool(field: &str, raw: &str) -> Result<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        _ => Err(Error::value(field, format!("`{raw}` is not a boolean"))),
    }
}

pub fn write_csv(path: impl AsRef<Path>, records: &[ReviewRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(file, records)
}

/// Writes records with the canonical header. Booleans are written as 0/1,
/// months by English name and reals in shortest round-trip form.
pub fn write_csv_to<W: Write>(writer: W, records: &[ReviewRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COLUMNS)?;
    let flag = |b: bool| if b { "1" } else { "0" };
    for r in records {
        w.write_record([
            r.review.review_title.as_str(),
            r.review.review_positive.as_str(),
            r.review.review_negative.as_str(),
            &r.review.review_score.to_string(),
            &r.review.review_helpful_votes.to_string(),
            r.guest.guest_type.label(),
            r.guest.guest_country.as_str(),
            &r.guest.room_nights.to_string(),
            r.guest.month.name(),
            r.accommodation.accommodation_id.as_str(),
            r.accommodation.accommodation_type.as_str(),
            &r.accommodation.accommodation_score.to_string(),
            r.accommodation.accommodation_country.as_str(),
            &r.accommodation.accommodation_star_rating.to_string(),
            flag(r.accommodation.location_is_beach),
            flag(r.accommodation.location_is_ski),
            flag(r.accommodation.location_is_city_center),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::tests::record;
    use crate::dataset::GuestType;

    const HEADER: &str = "review_title,review_positive,review_negative,review_score,review_helpful_votes,guest_type,guest_country,room_nights,month,accommodation_id,accommodation_type,accommodation_score,accommodation_country,accommodation_star_rating,location_is_beach,location_is_ski,location_is_city_center";

    fn csv_with(rows: &[&str]) -> String {
        let mut s = String::from(HEADER);
        for r in rows {
            s.push('\n');
            s.push_str(r);
        }
        s.push('\n');
        s
    }

    const GOOD: &str = "Exceptional,Great location,,9.0,0,Couple,Cobra Island,4,July,a1,Hotel,8.5,Australia,4.0,0,0,1";

    #[test]
    fn valid_row_parses() {
        let out = read_csv(csv_with(&[GOOD]).as_bytes(), SchemaMode::Strict).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert_eq!(r.guest.guest_type, GuestType::Couple);
        assert_eq!(r.guest.room_nights, 4);
        assert_eq!(r.review.review_score, 9.0);
        assert_eq!(r.review.review_negative, "");
        assert!(r.accommodation.location_is_city_center);
    }

    #[test]
    fn out_of_range_score_rejected() {
        let bad = GOOD.replace(",9.0,", ",0.5,");
        let err = read_csv(csv_with(&[&bad]).as_bytes(), SchemaMode::Strict).unwrap_err();
        assert!(err.to_string().contains("review_score"), "{err}");
        let out = read_csv(csv_with(&[&bad]).as_bytes(), SchemaMode::Lenient).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.rejections.len(), 1);
    }

    #[test]
    fn lenient_skips_bad_guest_type() {
        let bad = GOOD.replace("Couple", "Business");
        let text = csv_with(&[GOOD, &bad, GOOD]);
        let out = read_csv(text.as_bytes(), SchemaMode::Lenient).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.rejections.len(), 1);
        assert_eq!(out.rejections[0].row, 2);
        assert!(out.rejections[0].reason.contains("guest_type"));
        let err = read_csv(text.as_bytes(), SchemaMode::Strict).unwrap_err();
        assert!(matches!(err, Error::InvalidRow { row: 2, .. }));
    }

    #[test]
    fn missing_column_is_named() {
        let text = "review_title,review_score\nx,9\n";
        match read_csv(text.as_bytes(), SchemaMode::Strict).unwrap_err() {
            Error::MissingColumn(c) => assert_eq!(c, "review_positive"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn empty_numeric_cell_rejected() {
        let bad = GOOD.replace(",4,July", ",,July");
        let out = read_csv(csv_with(&[&bad]).as_bytes(), SchemaMode::Lenient).unwrap();
        assert_eq!(out.rejections.len(), 1);
        assert!(out.rejections[0].reason.contains("room_nights"));
    }

    #[test]
    fn strict_rejects_extra_column_lenient_ignores_it() {
        let text = format!("{HEADER},extra\n{GOOD},zzz\n");
        assert!(matches!(
            read_csv(text.as_bytes(), SchemaMode::Strict),
            Err(Error::UnexpectedColumn(_))
        ));
        let out = read_csv(text.as_bytes(), SchemaMode::Lenient).unwrap();
        assert_eq!(out.records.len(), 1);
    }

    #[test]
    fn round_trip_with_quoting() {
        let mut a = record("A", "Nice, \"quiet\"", 3);
        a.review.review_negative = "Thin walls\nand noisy".into();
        a.accommodation.accommodation_score = 8.25;
        let b = record("B", "Okay", 0);
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &[a.clone(), b.clone()]).unwrap();
        let back = read_csv(buf.as_slice(), SchemaMode::Strict).unwrap();
        assert_eq!(back.records, vec![a, b]);
    }
}
