mod common;

use common::*;
use proptest::prelude::*;
use sur_assoc::classifiers::{
    distance_score, score_point_in_polygon, Classifier, ClassifierBank, IndoorOutdoor, ScoreContext,
};
use sur_assoc::dataset::SurObservation;
use sur_assoc::geometry::{GeoPoint, PlanarPoint};
use sur_assoc::osm::{CandidatePolygon, Provenance};
use sur_assoc::tags::Tags;

const TAG_POOL: &[(&str, &str)] = &[
    ("leisure", "park"),
    ("natural", "water"),
    ("amenity", "restaurant"),
    ("amenity", "bank"),
    ("railway", "station"),
    ("building", "yes"),
    ("shop", "bakery"),
    ("landuse", "forest"),
    ("highway", "pedestrian"),
    ("name", "Anything"),
];

const SUR_POOL: &[&str] = &[
    "no_swimming",
    "no_dogs",
    "no_smoking",
    "no_motorcycle_helmets",
    "no_begging",
    "no_boating",
    "no_cycling",
    "no_yodeling",
];

fn candidate() -> impl Strategy<Value = CandidatePolygon> {
    (
        any::<u64>(),
        -600.0..600.0f64,
        -600.0..600.0f64,
        1.0..300.0f64,
        proptest::sample::subsequence(TAG_POOL, 0..4),
        0i64..1000,
    )
        .prop_map(|(seed, x, y, s, tags, id)| CandidatePolygon {
            geometry: random_polygon(&mut rng(seed), (x, y), s, true),
            tags: tags.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect::<Tags>(),
            provenance: Provenance::Way { id },
        })
}

fn observation() -> impl Strategy<Value = SurObservation> {
    (
        -60.0..60.0f64,
        -179.0..179.0f64,
        proptest::sample::subsequence(SUR_POOL, 1..4),
        proptest::option::of(0.0..360.0f64),
    )
        .prop_map(|(lat, lon, surs, heading)| {
            let o = SurObservation::new("p", GeoPoint::new(lat, lon).unwrap(), surs.iter().map(|s| s.to_string()).collect())
                .unwrap();
            match heading {
                Some(h) => o.with_heading(h).unwrap(),
                None => o,
            }
        })
}

fn io() -> impl Strategy<Value = IndoorOutdoor> {
    prop_oneof![Just(IndoorOutdoor::Inside), Just(IndoorOutdoor::Outside), Just(IndoorOutdoor::Unknown)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn scores_in_range_and_deterministic(o in observation(), c in candidate(), io in io()) {
        let bank = ClassifierBank::default();
        let ctx = ScoreContext::new(&o).with_indoor_outdoor(io);
        let first = bank.score_all(&ctx, &c);
        prop_assert_eq!(first, bank.score_all(&ctx, &c));
        for s in first {
            prop_assert!((-100.0..=100.0).contains(&s.value()));
        }
    }

    #[test]
    fn point_in_polygon_is_two_valued(o in observation(), c in candidate()) {
        let ctx = ScoreContext::new(&o);
        let v = score_point_in_polygon(&ctx, &c, &ClassifierBank::default().constants).value();
        prop_assert!(v == 100.0 || v == -75.0);
        prop_assert_eq!(v == 100.0, c.geometry.contains(&PlanarPoint::default()));
    }

    #[test]
    fn distance_mapping_monotone(d1 in 0.0..2000.0f64, d2 in 0.0..2000.0f64, r in 1.0..1000.0f64) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(distance_score(lo, r).value() >= distance_score(hi, r).value());
    }

    #[test]
    fn distance_classifiers_monotone_when_moving_away(o in observation(), c in candidate(), k in 1.0..5.0f64) {
        // push the candidate radially away from the observation
        let bank = ClassifierBank::default();
        let ctx = ScoreContext::new(&o);
        let cen = c.geometry.centroid();
        let far = CandidatePolygon {
            geometry: c.geometry.translate(cen.x * (k - 1.0), cen.y * (k - 1.0)),
            ..c.clone()
        };
        let near_s = bank.score(Classifier::DistCentroid, &ctx, &c).value();
        let far_s = bank.score(Classifier::DistCentroid, &ctx, &far).value();
        prop_assert!(far_s <= near_s + 1e-9);
    }

    #[test]
    fn translation_invariant(o in observation(), c in candidate(), io in io(),
                             dx in -1e4..1e4f64, dy in -1e4..1e4f64) {
        let bank = ClassifierBank::default();
        let ctx = ScoreContext::new(&o).with_indoor_outdoor(io);
        let moved_ctx = ctx.clone().with_position(PlanarPoint::new(dx, dy));
        let moved = CandidatePolygon { geometry: c.geometry.translate(dx, dy), ..c.clone() };
        let a = bank.score_all(&ctx, &c);
        let b = bank.score_all(&moved_ctx, &moved);
        for (cl, (x, y)) in Classifier::ALL.iter().zip(a.iter().zip(&b)) {
            if *cl == Classifier::PointInPolygon && sur_boundary_near(&c) {
                continue;
            }
            prop_assert!((x.value() - y.value()).abs() <= 1e-6, "{}: {} vs {}", cl, x.value(), y.value());
        }
    }

    #[test]
    fn neutral_without_heading_or_image(o in observation(), c in candidate()) {
        let bank = ClassifierBank::default();
        let o = SurObservation::new("n", o.location(), o.sur_types().to_vec()).unwrap();
        let ctx = ScoreContext::new(&o).with_indoor_outdoor(bank.indoor_outdoor(None));
        prop_assert_eq!(bank.score(Classifier::Orientation, &ctx, &c).value(), 0.0);
        prop_assert_eq!(bank.score(Classifier::ComputerVision, &ctx, &c).value(), 0.0);
    }
}

fn sur_boundary_near(c: &CandidatePolygon) -> bool {
    boundary_distance(&c.geometry, (0.0, 0.0)) < 1e-6
}
