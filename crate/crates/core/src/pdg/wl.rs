use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use super::{EdgeKind, Pdg, PdgError, PdgNode};

/// What a node's initial label is made of.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LabelOptions {
    /// Append the statement's operator symbols to its kind.
    pub ops: bool,
}

/// Per-round label multiplicities. Round 0 labels are statement kinds;
/// later rounds hold refined labels as hex hashes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WlSignature {
    pub rounds: usize,
    pub counts: Vec<BTreeMap<String, usize>>,
}

fn initial_label(node: &PdgNode, opts: LabelOptions) -> String {
    if opts.ops && !node.ops.is_empty() {
        format!("{}[{}]", node.kind.as_str(), node.ops.join(" "))
    } else {
        node.kind.as_str().to_string()
    }
}

pub fn wl_signature(pdg: &Pdg, rounds: usize) -> WlSignature {
    wl_signature_with(pdg, rounds, LabelOptions::default())
}

/// Weisfeiler-Lehman refinement: a node's next label hashes its current
/// label with the sorted (direction, edge kind, neighbor label) triples of
/// all incident edges. Variable names never enter a label.
pub fn wl_signature_with(pdg: &Pdg, rounds: usize, opts: LabelOptions) -> WlSignature {
    let mut labels: Vec<String> = pdg.nodes.iter().map(|n| initial_label(n, opts)).collect();
    let mut counts = vec![multiset(&labels)];
    for _ in 0..rounds {
        let mut neighborhoods: Vec<Vec<(u8, EdgeKind, &str)>> = vec![Vec::new(); labels.len()];
        for e in &pdg.edges {
            neighborhoods[e.from].push((1, e.kind, &labels[e.to]));
            neighborhoods[e.to].push((0, e.kind, &labels[e.from]));
        }
        let next: Vec<String> = labels
            .iter()
            .zip(neighborhoods.iter_mut())
            .map(|(label, hood)| {
                hood.sort_unstable();
                let mut h = DefaultHasher::new();
                label.hash(&mut h);
                hood.hash(&mut h);
                format!("{:016x}", h.finish())
            })
            .collect();
        labels = next;
        counts.push(multiset(&labels));
    }
    WlSignature { rounds, counts }
}

fn multiset(labels: &[String]) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for l in labels {
        *m.entry(l.clone()).or_insert(0) += 1;
    }
    m
}

/// Cosine similarity of the concatenated per-round count vectors.
pub fn similarity(a: &WlSignature, b: &WlSignature) -> Result<f64, PdgError> {
    if a.rounds != b.rounds {
        return Err(PdgError::RoundsMismatch {
            left: a.rounds,
            right: b.rounds,
        });
    }
    if a == b {
        return Ok(1.0);
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (ra, rb) in a.counts.iter().zip(&b.counts) {
        for (label, &x) in ra {
            let x = x as f64;
            na += x * x;
            if let Some(&y) = rb.get(label) {
                dot += x * y as f64;
            }
        }
        nb += rb.values().map(|&y| (y * y) as f64).sum::<f64>();
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::parse_function;
    use crate::pdg::build_pdg;

    fn sig(src: &str, rounds: usize) -> WlSignature {
        wl_signature(&build_pdg(&parse_function(src).unwrap()), rounds)
    }

    #[test]
    fn round_zero_is_the_kind_multiset() {
        let s = sig(
            "func f(a: int) { let b = a; b = b + 1; print(b); if b > 0 { return; } }",
            0,
        );
        let expected: BTreeMap<String, usize> = [
            ("entry", 1),
            ("let", 1),
            ("assign", 1),
            ("print", 1),
            ("if", 1),
            ("return", 1),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        assert_eq!(s.counts, vec![expected]);
    }

    #[test]
    fn every_round_counts_every_node() {
        let s = sig("func f(n: int) { for i in range(0, n) { print(i); } }", 4);
        assert_eq!(s.counts.len(), 5);
        assert!(s.counts.iter().all(|c| c.values().sum::<usize>() == 3));
    }

    #[test]
    fn similarity_basics() {
        let a = sig("func f(x: int) -> int { return x; }", 2);
        let b = sig("func g(y: int) -> int { return y; }", 2);
        let c = sig("func h(x: int) { print(x); print(x); }", 2);
        assert_eq!(similarity(&a, &b).unwrap(), 1.0);
        let ac = similarity(&a, &c).unwrap();
        assert!((0.0..1.0).contains(&ac));
        assert_eq!(ac, similarity(&c, &a).unwrap());
        assert!(matches!(
            similarity(&a, &sig("func f() {}", 1)),
            Err(PdgError::RoundsMismatch { left: 2, right: 1 })
        ));
    }

    #[test]
    fn operator_labels_are_opt_in() {
        let f1 = parse_function("func f(x: int) -> int { return x + 1; }").unwrap();
        let f2 = parse_function("func f(x: int) -> int { return x * 1; }").unwrap();
        let (p1, p2) = (build_pdg(&f1), build_pdg(&f2));
        assert_eq!(wl_signature(&p1, 2), wl_signature(&p2, 2));
        let ops = LabelOptions { ops: true };
        assert_ne!(wl_signature_with(&p1, 2, ops), wl_signature_with(&p2, 2, ops));
    }
}
