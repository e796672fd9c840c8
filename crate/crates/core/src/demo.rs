//! The bundled example data: a sorting and counting hierarchy, the
//! read-sort-print concept graph, and the snippet corpus behind them.

use crate::graph::{ConceptGraph, GraphNode};
use crate::minilang::Dtype;
use crate::store::{Concept, ConceptId, Store, TypedVar};

/// Every bundled snippet as `(file stem, source)`.
pub const SNIPPETS: &[(&str, &str)] = &[
    ("divide_list", include_str!("../fixtures/snippets/divide_list.mini")),
    ("fib", include_str!("../fixtures/snippets/fib.mini")),
    ("for_counter_loop", include_str!("../fixtures/snippets/for_counter_loop.mini")),
    ("gcd", include_str!("../fixtures/snippets/gcd.mini")),
    ("insertion_sort", include_str!("../fixtures/snippets/insertion_sort.mini")),
    ("max_list", include_str!("../fixtures/snippets/max_list.mini")),
    ("mean", include_str!("../fixtures/snippets/mean.mini")),
    ("merge_sort", include_str!("../fixtures/snippets/merge_sort.mini")),
    ("merge_sort_halves", include_str!("../fixtures/snippets/merge_sort_halves.mini")),
    ("merge_sorted_lists", include_str!("../fixtures/snippets/merge_sorted_lists.mini")),
    ("print_list", include_str!("../fixtures/snippets/print_list.mini")),
    ("read_list", include_str!("../fixtures/snippets/read_list.mini")),
    ("reverse_list", include_str!("../fixtures/snippets/reverse_list.mini")),
    ("selection_sort", include_str!("../fixtures/snippets/selection_sort.mini")),
    ("sum_list", include_str!("../fixtures/snippets/sum_list.mini")),
    ("while_counter_loop", include_str!("../fixtures/snippets/while_counter_loop.mini")),
];

/// Three `for` counters followed by three `while` counters.
pub const COUNTERS: &[(&str, &str)] = &[
    ("for_count_evens", include_str!("../fixtures/counters/for_count_evens.mini")),
    ("for_count_squares", include_str!("../fixtures/counters/for_count_squares.mini")),
    ("for_count_up", include_str!("../fixtures/counters/for_count_up.mini")),
    ("while_count_evens", include_str!("../fixtures/counters/while_count_evens.mini")),
    ("while_count_squares", include_str!("../fixtures/counters/while_count_squares.mini")),
    ("while_count_up", include_str!("../fixtures/counters/while_count_up.mini")),
];

/// The list `read-list` produces.
pub const FIXTURE_LIST: [i64; 4] = [5, 2, 9, 1];

pub fn snippet(stem: &str) -> &'static str {
    SNIPPETS
        .iter()
        .find(|(s, _)| *s == stem)
        .map(|(_, src)| *src)
        .unwrap_or_else(|| panic!("no bundled snippet `{stem}`"))
}

fn id(s: &str) -> ConceptId {
    s.parse().expect("demo ids are valid")
}

fn list(name: &str, description: &str) -> TypedVar {
    TypedVar {
        description: description.to_string(),
        ..TypedVar::new(name, Dtype::List)
    }
}

fn int(name: &str, description: &str) -> TypedVar {
    TypedVar {
        description: description.to_string(),
        ..TypedVar::new(name, Dtype::Int)
    }
}

fn terminal(cid: &str, name: &str, stem: &str) -> Concept {
    Concept::terminal(id(cid), name, snippet(stem))
}

fn abstract_concept(cid: &str, name: &str) -> Concept {
    Concept::abstract_concept(id(cid), name)
}

/// The three-step merge sort: split, sort both halves, merge.
pub fn merge_sort_parts() -> ConceptGraph {
    ConceptGraph {
        nodes: vec![
            GraphNode::new("n1", id("divide-list")),
            GraphNode::new("n2", id("merge-sort-half")),
            GraphNode::new("n3", id("merge-sorted-lists")),
        ],
        edges: vec![("n1".into(), "n2".into()), ("n2".into(), "n3".into())],
    }
}

/// Concepts of the example hierarchy, in insertion order.
pub fn fig6_concepts(include_insertion_sort: bool) -> Vec<Concept> {
    let mut concepts = vec![
        terminal("read-list", "Read list", "read_list")
            .with_description("Produces the fixed example list")
            .with_keywords(["input", "list"])
            .with_output(list("xs", "the list read")),
        terminal("print-list", "Print list", "print_list")
            .with_description("Prints a list on one line")
            .with_keywords(["output", "list"])
            .with_inputs(vec![list("xs", "the list to print")]),
        terminal("divide-list", "Divide list", "divide_list")
            .with_description("Divides the list in half")
            .with_keywords(["split", "halves"])
            .with_inputs(vec![list("xs", "the list to divide")])
            .with_output(list("halves", "[first half, second half]")),
        terminal("merge-sort-half", "Merge sort each half", "merge_sort_halves")
            .with_description("Merge sorts both halves of a divided list")
            .with_keywords(["merge", "halves"])
            .with_inputs(vec![list("halves", "[first half, second half]")])
            .with_output(list("halves", "both halves, sorted")),
        terminal("merge-sorted-lists", "Merge sorted lists", "merge_sorted_lists")
            .with_description("Merges two sorted halves into one sorted list")
            .with_keywords(["merge"])
            .with_inputs(vec![list("halves", "[sorted half, sorted half]")])
            .with_output(list("sorted", "the merged list")),
        abstract_concept("ascending-sort", "Ascending sort")
            .with_description("Orders a list from smallest to largest")
            .with_keywords(["sorting", "order"])
            .with_inputs(vec![list("xs", "the list to sort")])
            .with_output(list("sorted", "the sorted list")),
        abstract_concept("heap-sort", "Heap sort")
            .with_keywords(["heap"])
            .with_inputs(vec![list("xs", "the list to sort")])
            .with_output(list("sorted", "the sorted list")),
        abstract_concept("radix-sort", "Radix sort")
            .with_keywords(["radix", "digits"])
            .with_inputs(vec![list("xs", "the list to sort")])
            .with_output(list("sorted", "the sorted list")),
        Concept::complex(id("merge-sort"), "Merge sort", merge_sort_parts())
            .with_description("Divide the list in half, sort each half, merge")
            .with_keywords(["merge", "divide and conquer"])
            .with_inputs(vec![list("xs", "the list to sort")])
            .with_output(list("sorted", "the sorted list")),
        abstract_concept("counter-loop", "Counter loop")
            .with_description("Repeats a body for a counter running up to a bound")
            .with_keywords(["iteration"])
            .with_inputs(vec![int("n", "number of iterations")]),
        terminal("for-counter-loop", "For counter loop", "for_counter_loop")
            .with_keywords(["for"])
            .with_inputs(vec![int("n", "number of iterations")]),
        terminal("while-counter-loop", "While counter loop", "while_counter_loop")
            .with_keywords(["while"])
            .with_inputs(vec![int("n", "number of iterations")]),
    ];
    if include_insertion_sort {
        concepts.push(
            terminal("insertion-sort", "Insertion sort", "insertion_sort")
                .with_description("Inserts each element into the sorted prefix")
                .with_keywords(["insertion"])
                .with_inputs(vec![list("xs", "the list to sort")])
                .with_output(list("sorted", "the sorted list")),
        );
    }
    concepts
}

/// `(child, parent)` specialization edges of the example hierarchy.
pub fn fig6_isa(include_insertion_sort: bool) -> Vec<(ConceptId, ConceptId)> {
    let mut edges = vec![
        ("heap-sort", "ascending-sort"),
        ("merge-sort", "ascending-sort"),
        ("radix-sort", "ascending-sort"),
        ("for-counter-loop", "counter-loop"),
        ("while-counter-loop", "counter-loop"),
    ];
    if include_insertion_sort {
        edges.push(("insertion-sort", "ascending-sort"));
    }
    edges.into_iter().map(|(c, p)| (id(c), id(p))).collect()
}

/// The example hierarchy. Without insertion sort, merge sort is the only
/// implemented ascending sort.
pub fn build_fig6(include_insertion_sort: bool) -> Store {
    let mut store = Store::new();
    for concept in fig6_concepts(include_insertion_sort) {
        store.add_concept(concept).expect("demo concept is valid");
    }
    for (child, parent) in fig6_isa(include_insertion_sort) {
        store
            .link_specialization(&child, &parent)
            .expect("demo hierarchy is acyclic");
    }
    store
}

pub fn fig6_store() -> Store {
    build_fig6(true)
}

/// read-list, then ascending-sort, then print-list.
pub fn fig4_graph() -> ConceptGraph {
    ConceptGraph {
        nodes: vec![
            GraphNode::new("read", id("read-list")),
            GraphNode::new("sort", id("ascending-sort")),
            GraphNode::new("show", id("print-list")),
        ],
        edges: vec![
            ("read".into(), "sort".into()),
            ("sort".into(), "show".into()),
        ],
    }
}
