//! Renders records into the two encoder input strings.
//!
//! Every field becomes one `"<field_name>: <field_value>\n"` line. Empty
//! values are skipped and lines follow a fixed order: review fields for the
//! review string, guest fields then accommodation fields for the context.

use crate::dataset::{AccommodationContext, GuestContext, Review, ReviewRecord};

/// How a field value is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueFormat {
    /// Verbatim text with surrounding whitespace trimmed.
    Text,
    /// Real number with one decimal place.
    Real1,
    /// Plain integer.
    Integer,
    /// `true` / `false`.
    Boolean,
    /// Enum label (guest type, English month name).
    Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldTemplate {
    pub field_name: &'static str,
    pub render_order: u8,
    pub format: ValueFormat,
}

const fn field(field_name: &'static str, render_order: u8, format: ValueFormat) -> FieldTemplate {
    FieldTemplate {
        field_name,
        render_order,
        format,
    }
}

pub const REVIEW_TEMPLATE: [FieldTemplate; 4] = [
    field("review_title", 0, ValueFormat::Text),
    field("review_positive", 1, ValueFormat::Text),
    field("review_negative", 2, ValueFormat::Text),
    field("review_score", 3, ValueFormat::Real1),
];

pub const CONTEXT_TEMPLATE: [FieldTemplate; 10] = [
    field("guest_country", 0, ValueFormat::Text),
    field("guest_type", 1, ValueFormat::Label),
    field("room_nights", 2, ValueFormat::Integer),
    field("month", 3, ValueFormat::Label),
    field("accommodation_type", 4, ValueFormat::Text),
    field("accommodation_star_rating", 5, ValueFormat::Real1),
    field("accommodation_score", 6, ValueFormat::Real1),
    field("location_is_beach", 7, ValueFormat::Boolean),
    field("location_is_ski", 8, ValueFormat::Boolean),
    field("location_is_city_center", 9, ValueFormat::Boolean),
];

enum Value<'a> {
    Text(&'a str),
    Real(f64),
    Integer(u32),
    Flag(bool),
    Label(&'static str),
}

impl Value<'_> {
    fn render(&self, format: ValueFormat) -> Option<String> {
        let s = match (self, format) {
            (Value::Text(t), ValueFormat::Text) => single_line(t),
            (Value::Real(x), ValueFormat::Real1) => format!("{x:.1}"),
            (Value::Integer(n), ValueFormat::Integer) => n.to_string(),
            (Value::Flag(b), ValueFormat::Boolean) => b.to_string(),
            (Value::Label(l), ValueFormat::Label) => l.to_string(),
            _ => unreachable!("template format does not match field value"),
        };
        (!s.is_empty()).then_some(s)
    }
}

/// Trims surrounding whitespace; interior line breaks become single spaces so
/// each field stays on one line.
fn single_line(text: &str) -> String {
    let trimmed = text.trim();
    if !trimmed.contains(['\n', '\r']) {
        return trimmed.to_string();
    }
    trimmed
        .split(['\n', '\r'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn render<'a>(template: &[FieldTemplate], lookup: impl Fn(&str) -> Value<'a>) -> String {
    let mut ordered: Vec<&FieldTemplate> = template.iter().collect();
    ordered.sort_by_key(|t| t.render_order);
    let mut out = String::new();
    for t in ordered {
        if let Some(v) = lookup(t.field_name).render(t.format) {
            out.push_str(t.field_name);
            out.push_str(": ");
            out.push_str(&v);
            out.push('\n');
        }
    }
    out
}

pub fn serialize_review(review: &Review) -> String {
    render(&REVIEW_TEMPLATE, |name| match name {
        "review_title" => Value::Text(&review.review_title),
        "review_positive" => Value::Text(&review.review_positive),
        "review_negative" => Value::Text(&review.review_negative),
        "review_score" => Value::Real(review.review_score),
        other => unreachable!("no review field {other}"),
    })
}

pub fn serialize_context(guest: &GuestContext, accommodation: &AccommodationContext) -> String {
    render(&CONTEXT_TEMPLATE, |name| match name {
        "guest_country" => Value::Text(&guest.guest_country),
        "guest_type" => Value::Label(guest.guest_type.label()),
        "room_nights" => Value::Integer(guest.room_nights),
        "month" => Value::Label(guest.month.name()),
        "accommodation_type" => Value::Text(&accommodation.accommodation_type),
        "accommodation_star_rating" => Value::Real(accommodation.accommodation_star_rating),
        "accommodation_score" => Value::Real(accommodation.accommodation_score),
        "location_is_beach" => Value::Flag(accommodation.location_is_beach),
        "location_is_ski" => Value::Flag(accommodation.location_is_ski),
        "location_is_city_center" => Value::Flag(accommodation.location_is_city_center),
        other => unreachable!("no context field {other}"),
    })
}

/// Context and review strings for one record.
pub fn serialize_record(record: &ReviewRecord) -> (String, String) {
    (
        serialize_context(&record.guest, &record.accommodation),
        serialize_review(&record.review),
    )
}
