use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ConceptId, Store};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub id: ConceptId,
    pub score: f64,
}

/// Lowercased alphanumeric runs of `text`.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Bag-of-tokens keyword search.
///
/// A concept scores one point per distinct query token found among its name
/// tokens, keyword tokens and description tokens. Concepts scoring zero are
/// omitted; the rest are ordered by descending score, then ascending id.
pub fn search_concepts(store: &Store, query: &str) -> Vec<SearchHit> {
    let query: BTreeSet<String> = tokenize(query).collect();
    let mut hits: Vec<SearchHit> = store
        .concepts()
        .filter_map(|c| {
            let vocabulary: BTreeSet<String> = tokenize(&c.name)
                .chain(c.annotation.keywords.iter().flat_map(|k| tokenize(k)))
                .chain(tokenize(&c.description))
                .collect();
            let matched = query.iter().filter(|t| vocabulary.contains(*t)).count();
            (matched > 0).then(|| SearchHit {
                id: c.id.clone(),
                score: matched as f64,
            })
        })
        .collect();
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
    hits
}
