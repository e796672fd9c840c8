mod common;

use codemapper::store::{parse_store, to_store_json, StoreError};
use codemapper::synthesis::{resolve_concept, SynthesisErrorKind};
use common::{brute_force_mu, kahn_acyclic, random_hierarchy};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mu_picks_the_deepest_implemented_descendant(seed in any::<u64>()) {
        let h = random_hierarchy(&mut StdRng::seed_from_u64(seed), 50);
        for root in 0..h.ids.len() {
            let got = match resolve_concept(&h.store, &h.ids[root]) {
                Ok(id) => Some(id),
                Err(e) => {
                    let expected = SynthesisErrorKind::NoImplementation { id: h.ids[root].clone() };
                    prop_assert_eq!(e.kind, expected);
                    None
                }
            };
            prop_assert_eq!(got, brute_force_mu(&h, root), "root {}", h.ids[root]);
        }
    }

    #[test]
    fn accepted_links_never_close_a_cycle(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut h = random_hierarchy(&mut rng, 20);
        let n = h.ids.len();
        for _ in 0..40 {
            let (c, p) = (rng.random_range(0..n), rng.random_range(0..n));
            let before: Vec<_> = h.store.isa_edges().cloned().collect();
            match h.store.link_specialization(&h.ids[c], &h.ids[p]) {
                Ok(()) => {
                    let edges: Vec<_> = h.store.isa_edges().cloned().collect();
                    prop_assert!(kahn_acyclic(&edges));
                }
                Err(StoreError::CycleRejected(path)) => {
                    let mut with = before.clone();
                    with.push((h.ids[c].clone(), h.ids[p].clone()));
                    prop_assert!(!kahn_acyclic(&with));
                    prop_assert_eq!(path.first(), path.last());
                    prop_assert_eq!(&path[0], &h.ids[c]);
                    let after: Vec<_> = h.store.isa_edges().cloned().collect();
                    prop_assert_eq!(after, before);
                }
                Err(StoreError::DuplicateEdge(..)) => {
                    prop_assert!(before.contains(&(h.ids[c].clone(), h.ids[p].clone())));
                }
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }
    }

    #[test]
    fn store_json_round_trips(seed in any::<u64>()) {
        let h = random_hierarchy(&mut StdRng::seed_from_u64(seed), 30);
        let text = to_store_json(&h.store);
        let back = parse_store(&text).unwrap();
        prop_assert_eq!(to_store_json(&back), text);
        prop_assert_eq!(back.len(), h.store.len());
    }
}

#[test]
fn example_store_round_trips() {
    let store = codemapper::demo::fig6_store();
    let text = to_store_json(&store);
    assert_eq!(to_store_json(&parse_store(&text).unwrap()), text);
}
