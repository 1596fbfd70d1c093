//! Property tests for the patch engine's round-trip and empty-diff laws.

use kghist_core::{apply, diff};
use proptest::prelude::*;
use serde_json::Value;

fn arb_json(depth: u32) -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::Bool),
        any::<i32>().prop_map(|n| serde_json::json!(n)),
        "[a-z]{0,6}".prop_map(Value::String),
        // Keys that need pointer escaping.
        Just(Value::String("a/b~c".to_owned())),
    ];
    leaf.prop_recursive(depth, 48, 6, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..6).prop_map(Value::Array),
            prop::collection::btree_map("[a-z~/]{1,4}", inner, 0..6).prop_map(|m| {
                Value::Object(m.into_iter().collect())
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn apply_diff_round_trips((a, b) in (arb_json(3), arb_json(3))) {
        let patch = diff(&a, &b);
        let rebuilt = apply(&a, &patch).expect("diff output must always apply");
        prop_assert_eq!(rebuilt, b);
    }

    #[test]
    fn diff_is_empty_iff_equal((a, b) in (arb_json(3), arb_json(3))) {
        prop_assert_eq!(diff(&a, &b).is_empty(), a == b);
        prop_assert!(diff(&a, &a).is_empty());
    }

    #[test]
    fn patch_serialization_round_trips(a in arb_json(2), b in arb_json(2)) {
        let patch = diff(&a, &b);
        let text = serde_json::to_string(&patch).unwrap();
        let back: Vec<kghist_core::PatchOperation> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, patch);
    }

    #[test]
    fn entity_ids_round_trip(is_property in proptest::bool::ANY, number in 1u64..=u64::MAX) {
        let id = if is_property {
            kghist_core::EntityId::property(number)
        } else {
            kghist_core::EntityId::item(number)
        };
        let text = id.to_string();
        prop_assert_eq!(kghist_core::parse_entity_id(&text).unwrap(), id);
    }
}
