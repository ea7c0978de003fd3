use proptest::prelude::*;

use betti_core::noise::{apply_level, NoiseLevel, PresetTable, Profile};
use betti_core::persistence::{persistence_fast, persistence_reduce, PersistenceDiagram};
use betti_core::raster::{betti_labels, euler_characteristic};
use betti_core::sedt::{empty_phase_sentinel, sedt};
use betti_core::{BinaryImage, ScalarField};

fn image(max: usize) -> impl Strategy<Value = BinaryImage> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<bool>(), w * h)
            .prop_map(move |bits| BinaryImage::from_fn(w, h, |x, y| bits[y * w + x]))
    })
}

fn field(max: usize) -> impl Strategy<Value = ScalarField> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| {
        proptest::collection::vec(-5i64..=5, w * h).prop_map(move |v| ScalarField::new(w, h, v).unwrap())
    })
}

fn level() -> impl Strategy<Value = NoiseLevel> {
    proptest::sample::select(NoiseLevel::ALL.to_vec())
}

fn profile() -> impl Strategy<Value = Profile> {
    proptest::sample::select(Profile::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sedt_sign_follows_phase(img in image(24)) {
        let f = sedt(&img);
        let cap = empty_phase_sentinel(img.width(), img.height());
        for y in 0..img.height() {
            for x in 0..img.width() {
                let v = f.get(x, y);
                prop_assert!(v != 0 && v.abs() <= cap);
                prop_assert_eq!(v < 0, img.get(x, y));
            }
        }
    }

    #[test]
    fn sedt_of_inverse_is_negated(img in image(24)) {
        prop_assert_eq!(sedt(&img.invert()), sedt(&img).negate());
    }

    #[test]
    fn engines_agree_on_integer_fields(f in field(12)) {
        prop_assert_eq!(persistence_fast("a", &f), persistence_reduce("a", &f));
    }

    #[test]
    fn engines_agree_on_distance_fields(img in image(20)) {
        let f = sedt(&img);
        prop_assert_eq!(persistence_fast("a", &f), persistence_reduce("a", &f));
    }

    #[test]
    fn diagram_reads_off_labels(img in image(32)) {
        let d = persistence_fast("a", &sedt(&img));
        let labels = betti_labels(&img);
        prop_assert_eq!(d.alive_at(0, -1), labels.beta0 as usize);
        prop_assert_eq!(d.alive_at(1, -1), labels.beta1 as usize);
        prop_assert_eq!(i64::from(labels.beta0) - i64::from(labels.beta1), euler_characteristic(&img));
        // exactly one essential H0 class on a nonempty complex
        prop_assert_eq!(d.pairs_of_dim(0).filter(|p| p.lifespan().is_none()).count(), 1);
    }

    #[test]
    fn diagram_csv_round_trips(img in image(20)) {
        let d = persistence_fast("a", &sedt(&img));
        prop_assert_eq!(PersistenceDiagram::from_csv("a", &d.to_csv()).unwrap(), d);
    }

    #[test]
    fn noise_is_seeded_and_shape_preserving(img in image(40), p in profile(), l in level(), s in any::<u64>()) {
        let preset = PresetTable::builtin().get(p, l).unwrap();
        let a = apply_level(&img, &preset, s).unwrap();
        prop_assert_eq!((a.width(), a.height()), (img.width(), img.height()));
        prop_assert_eq!(&a, &apply_level(&img, &preset, s).unwrap());
        if l == NoiseLevel::N0 {
            prop_assert_eq!(a, img);
        }
    }
}
