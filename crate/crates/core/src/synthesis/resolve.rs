use std::collections::BTreeMap;

use super::{Stage, SynthesisError, SynthesisErrorKind};
use crate::graph::topo_order;
use crate::store::{ConceptId, Store};

/// Longest isa-path length from `root` down to each of its descendants
/// (`root` itself at depth 0).
pub fn specialization_depths(store: &Store, root: &ConceptId) -> BTreeMap<ConceptId, usize> {
    let descendants = store.descendants(root);
    let mut members: Vec<&str> = descendants.iter().map(ConceptId::as_str).collect();
    members.push(root.as_str());
    // parent -> child edges restricted to the sub-DAG below root
    let edges: Vec<(&str, &str)> = store
        .isa_edges()
        .filter(|(c, p)| descendants.contains(c) && (p == root || descendants.contains(p)))
        .map(|(c, p)| (p.as_str(), c.as_str()))
        .collect();
    let order = topo_order(members.iter().copied(), edges.iter().copied())
        .expect("store hierarchy is acyclic");
    let mut depth: BTreeMap<&str, usize> = BTreeMap::from([(root.as_str(), 0)]);
    for node in &order {
        let Some(&d) = depth.get(node.as_str()) else {
            continue;
        };
        for &(p, c) in &edges {
            if p == node.as_str() {
                let entry = depth.entry(c).or_insert(0);
                *entry = (*entry).max(d + 1);
            }
        }
    }
    depth
        .into_iter()
        .map(|(id, d)| (id.parse().expect("valid id"), d))
        .collect()
}

/// The mapper: the implemented concept at maximum specialization depth
/// below `id` (ties broken by ascending id), or `id` itself when it is
/// implemented and none of its descendants is.
pub fn resolve_concept(store: &Store, id: &ConceptId) -> Result<ConceptId, SynthesisError> {
    if !store.contains(id) {
        return Err(SynthesisError::new(
            Stage::Resolve,
            SynthesisErrorKind::UnknownId { id: id.clone() },
        ));
    }
    specialization_depths(store, id)
        .into_iter()
        .filter(|(c, _)| store.get(c).is_some_and(|c| c.is_implemented()))
        // deepest first, then the smallest id
        .max_by(|(a, da), (b, db)| da.cmp(db).then_with(|| b.cmp(a)))
        .map(|(c, _)| c)
        .ok_or_else(|| {
            SynthesisError::new(
                Stage::Resolve,
                SynthesisErrorKind::NoImplementation { id: id.clone() },
            )
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Concept;

    fn id(s: &str) -> ConceptId {
        s.parse().unwrap()
    }

    fn store(implemented: &[&str], all: &[&str], isa: &[(&str, &str)]) -> Store {
        let mut s = Store::new();
        for name in all {
            let c = if implemented.contains(name) {
                Concept::terminal(id(name), *name, "func f() {}")
            } else {
                Concept::abstract_concept(id(name), *name)
            };
            s.add_concept(c).unwrap();
        }
        for (c, p) in isa {
            s.link_specialization(&id(c), &id(p)).unwrap();
        }
        s
    }

    #[test]
    fn picks_the_deepest_implemented_descendant() {
        let s = store(
            &["merge-sort"],
            &["ascending-sort", "heap-sort", "merge-sort", "radix-sort"],
            &[
                ("heap-sort", "ascending-sort"),
                ("merge-sort", "ascending-sort"),
                ("radix-sort", "ascending-sort"),
            ],
        );
        assert_eq!(resolve_concept(&s, &id("ascending-sort")).unwrap(), id("merge-sort"));
    }

    #[test]
    fn self_resolution_and_ties() {
        let s = store(
            &["counter-loop", "for-counter-loop", "while-counter-loop"],
            &["counter-loop", "for-counter-loop", "while-counter-loop"],
            &[
                ("for-counter-loop", "counter-loop"),
                ("while-counter-loop", "counter-loop"),
            ],
        );
        assert_eq!(
            resolve_concept(&s, &id("counter-loop")).unwrap(),
            id("for-counter-loop")
        );
        assert_eq!(
            resolve_concept(&s, &id("while-counter-loop")).unwrap(),
            id("while-counter-loop")
        );
    }

    #[test]
    fn depth_is_the_longest_path() {
        // a <- b <- c and a <- c: c sits at depth 2, not 1
        let s = store(
            &["b", "c"],
            &["a", "b", "c"],
            &[("b", "a"), ("c", "b"), ("c", "a")],
        );
        let depths = specialization_depths(&s, &id("a"));
        assert_eq!(depths[&id("c")], 2);
        assert_eq!(resolve_concept(&s, &id("a")).unwrap(), id("c"));
    }

    #[test]
    fn errors() {
        let s = store(&[], &["a"], &[]);
        assert_eq!(
            resolve_concept(&s, &id("a")).unwrap_err().kind,
            SynthesisErrorKind::NoImplementation { id: id("a") }
        );
        assert_eq!(
            resolve_concept(&s, &id("zzz")).unwrap_err().kind,
            SynthesisErrorKind::UnknownId { id: id("zzz") }
        );
    }
}
