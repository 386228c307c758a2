//! Renders one record into the context and review strings the two encoder
//! towers read. Empty fields produce no line.

use revrank::dataset::{
    AccommodationContext, GuestContext, GuestType, Month, Review, ReviewRecord,
};
use revrank::textualize::serialize_record;

fn main() {
    let record = ReviewRecord {
        review: Review {
            review_title: "Exceptional".into(),
            review_positive: "Great location".into(),
            review_negative: String::new(),
            review_score: 10.0,
            review_helpful_votes: 0,
        },
        guest: GuestContext {
            guest_type: GuestType::Couple,
            guest_country: "United Kingdom".into(),
            room_nights: 4,
            month: Month::July,
        },
        accommodation: AccommodationContext {
            accommodation_id: "h1".into(),
            accommodation_type: "Hotel".into(),
            accommodation_score: 8.5,
            accommodation_country: "Spain".into(),
            accommodation_star_rating: 4.0,
            location_is_beach: false,
            location_is_ski: false,
            location_is_city_center: true,
        },
    };
    let (context, review) = serialize_record(&record);
    print!("--- context\n{context}--- review\n{review}");

    let mut solo = record.clone();
    solo.guest.guest_type = GuestType::SoloTraveller;
    solo.guest.guest_country.clear();
    print!("--- solo, no country\n{}", serialize_record(&solo).0);
}
