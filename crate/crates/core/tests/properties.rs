mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use common::*;
use hhamt::hash::{ConstantHashBuilder, TruncatedHashBuilder};
use hhamt::{DefaultHashBuilder, PersistentMap, PersistentMultiMap, PersistentSet, StoragePolicy};

#[derive(Clone, Debug)]
enum Op {
    Insert(u32, u32),
    Remove(u32, u32),
    RemoveKey(u32),
    SetValues(u32, Vec<u32>),
}

fn op(keys: u32, values: u32) -> impl Strategy<Value = Op> {
    prop_oneof![
        5 => (0..keys, 0..values).prop_map(|(k, v)| Op::Insert(k, v)),
        3 => (0..keys, 0..values).prop_map(|(k, v)| Op::Remove(k, v)),
        1 => (0..keys).prop_map(Op::RemoveKey),
        1 => (0..keys, prop::collection::vec(0..values, 0..5)).prop_map(|(k, vs)| Op::SetValues(k, vs)),
    ]
}

fn apply<S: std::hash::BuildHasher + Clone>(
    m: &PersistentMultiMap<u32, u32, S>,
    model: &mut Model,
    op: &Op,
) -> PersistentMultiMap<u32, u32, S> {
    match *op {
        Op::Insert(k, v) => {
            model_insert(model, k, v);
            m.insert(k, v)
        }
        Op::Remove(k, v) => {
            model_remove(model, k, v);
            m.remove(&k, &v)
        }
        Op::RemoveKey(k) => {
            model.remove(&k);
            m.remove_key(&k)
        }
        Op::SetValues(k, ref vs) => {
            let set: PersistentSet<u32, S> = vs
                .iter()
                .fold(PersistentSet::with_hasher(m.hasher().clone()), |s, v| {
                    s.insert(*v)
                });
            let want: BTreeSet<u32> = vs.iter().copied().collect();
            if want.is_empty() {
                model.remove(&k);
            } else {
                model.insert(k, want);
            }
            m.with_values(k, &set)
        }
    }
}

/// Every version produced along the way must still match its snapshot.
fn check_persistent_history<S: std::hash::BuildHasher + Clone>(
    hasher: S,
    ops: &[Op],
) -> Result<(), TestCaseError> {
    let mut m = PersistentMultiMap::with_hasher(hasher);
    let mut model = Model::new();
    let mut history = vec![(m.clone(), model.clone())];
    for op in ops {
        m = apply(&m, &mut model, op);
        m.validate()
            .map_err(|e| TestCaseError::fail(format!("{op:?}: {e}")))?;
        history.push((m.clone(), model.clone()));
    }
    for (version, snapshot) in &history {
        agrees(version, snapshot).map_err(TestCaseError::fail)?;
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn multimap_versions_match_model(ops in prop::collection::vec(op(48, 6), 0..200)) {
        check_persistent_history(DefaultHashBuilder::default(), &ops)?;
    }

    #[test]
    fn multimap_with_prefix_collisions(ops in prop::collection::vec(op(64, 4), 0..200), bits in 0u32..12) {
        check_persistent_history(TruncatedHashBuilder::new(DefaultHashBuilder::default(), bits), &ops)?;
    }

    #[test]
    fn multimap_with_full_collisions(ops in prop::collection::vec(op(12, 4), 0..120)) {
        check_persistent_history(ConstantHashBuilder::new(0x0bad_f00d), &ops)?;
    }

    #[test]
    fn in_place_and_persistent_updates_agree(ops in prop::collection::vec(op(32, 4), 0..150)) {
        let mut persistent = PersistentMultiMap::<u32, u32>::new();
        let mut in_place = PersistentMultiMap::<u32, u32>::new();
        let mut model = Model::new();
        for op in &ops {
            persistent = apply(&persistent, &mut model, op);
            match *op {
                Op::Insert(k, v) => { in_place.insert_mut(k, v); }
                Op::Remove(k, v) => { in_place.remove_mut(&k, &v); }
                Op::RemoveKey(k) => { in_place.remove_key_mut(&k); }
                Op::SetValues(k, ref vs) => {
                    let set: PersistentSet<u32> = vs.iter().copied().collect();
                    in_place.set_values_mut(k, &set);
                }
            }
            prop_assert_eq!(&persistent, &in_place);
        }
    }

    #[test]
    fn build_order_does_not_matter(entries in prop::collection::btree_set((0u32..200, 0u32..5), 0..400), seed in any::<u64>()) {
        let sorted: Vec<(u32, u32)> = entries.iter().copied().collect();
        let mut shuffled = sorted.clone();
        // Deterministic Fisher-Yates driven by the seed.
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let a: PersistentMultiMap<u32, u32> = sorted.iter().copied().collect();
        let b: PersistentMultiMap<u32, u32> = shuffled.iter().copied().collect();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.footprint(), b.footprint());
        prop_assert_eq!(a.stats(), b.stats());
    }

    #[test]
    fn deleting_down_to_a_subset_is_canonical(
        keep in prop::collection::btree_set((0u32..100, 0u32..4), 0..150),
        extra in prop::collection::btree_set((0u32..150, 0u32..8), 0..150),
    ) {
        let extra: Vec<(u32, u32)> = extra.difference(&keep).copied().collect();
        let direct: PersistentMultiMap<u32, u32> = keep.iter().copied().collect();
        let mut pruned: PersistentMultiMap<u32, u32> = keep.iter().chain(&extra).copied().collect();
        for (k, v) in extra.iter().rev() {
            prop_assert!(pruned.remove_mut(k, v));
        }
        pruned.validate().unwrap();
        prop_assert_eq!(pruned, direct);
    }

    #[test]
    fn value_views_survive_later_updates(ops in prop::collection::vec(op(16, 6), 1..120), probe in 0u32..16) {
        let mut m = PersistentMultiMap::<u32, u32>::new();
        let mut model = Model::new();
        for op in &ops {
            let before: BTreeSet<u32> = model.get(&probe).cloned().unwrap_or_default();
            let view = m.get(&probe).to_set();
            m = apply(&m, &mut model, op);
            let still: BTreeSet<u32> = view.iter().copied().collect();
            prop_assert_eq!(still, before);
            view.validate().unwrap();
        }
    }

    #[test]
    fn with_values_round_trips_the_set(values in prop::collection::btree_set(0u32..1000, 0..40), key in 0u32..8) {
        let base: PersistentMultiMap<u32, u32> = (0..8).flat_map(|k| [(k, k), (k, k + 100)]).collect();
        let set: PersistentSet<u32> = values.iter().copied().collect();
        let m = base.with_values(key, &set);
        m.validate().unwrap();
        let got: BTreeSet<u32> = m.get(&key).iter().copied().collect();
        prop_assert_eq!(&got, &values);
        let expected = base.tuple_count() - 2 + values.len();
        prop_assert_eq!(m.tuple_count(), expected);
        if values.len() >= 2 {
            prop_assert!(m.get(&key).to_set().ptr_eq(&set));
        }
    }

    #[test]
    fn layouts_are_observationally_identical(ops in prop::collection::vec(op(64, 4), 0..200)) {
        let mut a = PersistentMultiMap::<u32, u32>::with_policy(StoragePolicy::Specialized);
        let mut b = PersistentMultiMap::<u32, u32>::with_policy(StoragePolicy::GenericOnly);
        let (mut ma, mut mb) = (Model::new(), Model::new());
        for op in &ops {
            a = apply(&a, &mut ma, op);
            b = apply(&b, &mut mb, op);
        }
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(sorted_entries(&a), sorted_entries(&b));
        b.validate().unwrap();
        // Each fixed-arity node saves exactly its indirection word.
        let (fa, fb) = (a.footprint(), b.footprint());
        prop_assert_eq!(fa.nodes, fb.nodes);
        let fixed = fb.indirections - fa.indirections;
        prop_assert_eq!(fb.words_total - fa.words_total, fixed);
        // At most four tuples: the root has at most eight slots.
        if !a.is_empty() && a.tuple_count() <= 4 {
            prop_assert!(fixed > 0);
        }
    }

    #[test]
    fn set_matches_btreeset(ops in prop::collection::vec((any::<bool>(), 0u32..300), 0..400)) {
        let mut s = PersistentSet::<u32>::new();
        let mut model = BTreeSet::new();
        for (add, v) in ops {
            if add {
                prop_assert_eq!(s.insert_mut(v), model.insert(v));
            } else {
                prop_assert_eq!(s.remove_mut(&v), model.remove(&v));
            }
            prop_assert_eq!(s.len(), model.len());
        }
        s.validate().unwrap();
        let mut got: Vec<u32> = s.iter().copied().collect();
        got.sort_unstable();
        prop_assert!(got.iter().eq(model.iter()));
        for v in 0..300 {
            prop_assert_eq!(s.contains(&v), model.contains(&v));
        }
    }

    #[test]
    fn set_intersection_matches_btreeset(
        a in prop::collection::btree_set(0u32..200, 0..120),
        b in prop::collection::btree_set(0u32..200, 0..120),
    ) {
        let sa: PersistentSet<u32> = a.iter().copied().collect();
        let sb: PersistentSet<u32> = b.iter().copied().collect();
        let both = sa.intersection(&sb);
        both.validate().unwrap();
        let want: PersistentSet<u32> = a.intersection(&b).copied().collect();
        prop_assert_eq!(&both, &want);
        if a.is_subset(&b) {
            prop_assert!(both.ptr_eq(&sa));
        }
    }

    #[test]
    fn map_matches_btreemap(ops in prop::collection::vec((0u8..3, 0u32..200, any::<u16>()), 0..400)) {
        let mut m = PersistentMap::<u32, u16>::new();
        let mut model = BTreeMap::new();
        for (kind, k, v) in ops {
            match kind {
                0 | 1 => prop_assert_eq!(m.insert_mut(k, v), model.insert(k, v).is_none()),
                _ => prop_assert_eq!(m.remove_mut(&k), model.remove(&k).is_some()),
            }
            prop_assert_eq!(m.len(), model.len());
            prop_assert_eq!(m.get(&k), model.get(&k));
        }
        m.validate().unwrap();
        let mut got: Vec<(u32, u16)> = m.iter().map(|(k, v)| (*k, *v)).collect();
        got.sort_unstable();
        prop_assert!(got.iter().map(|(k, v)| (k, v)).eq(model.iter()));
    }

    #[test]
    fn one_to_one_multimap_is_a_map(entries in prop::collection::btree_map(any::<u32>(), any::<u32>(), 0..300)) {
        let mm: PersistentMultiMap<u32, u32> = entries.iter().map(|(k, v)| (*k, *v)).collect();
        let map: PersistentMap<u32, u32> = entries.iter().map(|(k, v)| (*k, *v)).collect();
        prop_assert_eq!(mm.footprint(), map.footprint());
        prop_assert_eq!(mm.footprint().nested_sets, 0);
        prop_assert_eq!(mm.stats(), map.stats());
    }
}
