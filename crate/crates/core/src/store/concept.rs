use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::StoreError;
use crate::graph::ConceptGraph;
use crate::minilang::{self, Dtype, FuncDef};

/// Kebab-case concept identifier, `[a-z0-9][a-z0-9-]*`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ConceptId(String);

impl ConceptId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_valid(s: &str) -> bool {
        let mut chars = s.chars();
        matches!(chars.next(), Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit())
            && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
    }
}

impl FromStr for ConceptId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if ConceptId::is_valid(s) {
            Ok(ConceptId(s.to_string()))
        } else {
            Err(format!("`{s}` is not a valid concept id ([a-z0-9][a-z0-9-]*)"))
        }
    }
}

impl TryFrom<String> for ConceptId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ConceptId> for String {
    fn from(id: ConceptId) -> String {
        id.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ConceptId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypedVar {
    pub name: String,
    pub dtype: Dtype,
    #[serde(default)]
    pub description: String,
}

impl TypedVar {
    pub fn new(name: impl Into<String>, dtype: Dtype) -> Self {
        TypedVar {
            name: name.into(),
            dtype,
            description: String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Curation {
    pub author: String,
    pub created: DateTime<Utc>,
    #[serde(default)]
    pub notes: String,
}

impl Default for Curation {
    fn default() -> Self {
        Curation {
            author: String::new(),
            created: DateTime::UNIX_EPOCH,
            notes: String::new(),
        }
    }
}

/// The crowd-supplied description of a concept's interface.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    #[serde(default)]
    pub inputs: Vec<TypedVar>,
    #[serde(default)]
    pub outputs: Vec<TypedVar>,
    #[serde(default)]
    pub keywords: BTreeSet<String>,
    #[serde(default)]
    pub curation: Curation,
}

impl Annotation {
    pub fn output(&self) -> Option<&TypedVar> {
        self.outputs.first()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptKind {
    /// Backed by one MiniImp function.
    Terminal,
    /// An aggregation of other concepts with precedence edges.
    Complex,
    /// A placeholder in the hierarchy with no implementation of its own.
    Abstract,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: ConceptId,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub kind: ConceptKind,
    #[serde(flatten)]
    pub annotation: Annotation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snippet: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parts: Option<ConceptGraph>,
}

impl Concept {
    pub fn terminal(id: ConceptId, name: impl Into<String>, snippet: impl Into<String>) -> Self {
        Concept {
            id,
            name: name.into(),
            description: String::new(),
            kind: ConceptKind::Terminal,
            annotation: Annotation::default(),
            snippet: Some(snippet.into()),
            parts: None,
        }
    }

    pub fn complex(id: ConceptId, name: impl Into<String>, parts: ConceptGraph) -> Self {
        Concept {
            id,
            name: name.into(),
            description: String::new(),
            kind: ConceptKind::Complex,
            annotation: Annotation::default(),
            snippet: None,
            parts: Some(parts),
        }
    }

    pub fn abstract_concept(id: ConceptId, name: impl Into<String>) -> Self {
        Concept {
            id,
            name: name.into(),
            description: String::new(),
            kind: ConceptKind::Abstract,
            annotation: Annotation::default(),
            snippet: None,
            parts: None,
        }
    }

    pub fn with_inputs(mut self, inputs: Vec<TypedVar>) -> Self {
        self.annotation.inputs = inputs;
        self
    }

    pub fn with_output(mut self, output: TypedVar) -> Self {
        self.annotation.outputs = vec![output];
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn with_keywords<'a>(mut self, keywords: impl IntoIterator<Item = &'a str>) -> Self {
        self.annotation.keywords = keywords.into_iter().map(str::to_string).collect();
        self
    }

    /// Terminal and complex concepts carry an implementation.
    pub fn is_implemented(&self) -> bool {
        self.kind != ConceptKind::Abstract
    }

    /// The parsed snippet of a terminal concept.
    pub fn function(&self) -> Option<Result<FuncDef, minilang::ParseError>> {
        self.snippet.as_deref().map(minilang::parse_function)
    }

    /// Checks everything about a concept that does not need the rest of the
    /// store: kind/body agreement, annotation shape, and for terminals that
    /// the snippet parses to one function matching the annotation.
    pub fn validate_standalone(&self) -> Result<(), StoreError> {
        let invalid = |reason: String| StoreError::InvalidConcept {
            concept: self.id.clone(),
            reason,
        };
        let a = &self.annotation;
        for (what, vars) in [("input", &a.inputs), ("output", &a.outputs)] {
            let mut names = BTreeSet::new();
            for v in vars {
                if !minilang::is_identifier(&v.name) {
                    return Err(invalid(format!("{what} `{}` is not an identifier", v.name)));
                }
                if !names.insert(v.name.as_str()) {
                    return Err(invalid(format!("{what} `{}` is declared twice", v.name)));
                }
            }
        }
        if a.outputs.len() > 1 {
            return Err(invalid("at most one output is allowed".into()));
        }
        match (self.kind, &self.snippet, &self.parts) {
            (ConceptKind::Terminal, Some(_), None) => {
                let func = self
                    .function()
                    .expect("snippet present")
                    .map_err(|error| StoreError::SnippetParse {
                        concept: self.id.clone(),
                        error: Box::new(error),
                    })?;
                check_signature(&func, a).map_err(invalid)?;
                let program = minilang::Program {
                    functions: vec![func],
                };
                match minilang::unbound_identifiers(&program).first() {
                    Some(u) => Err(invalid(format!(
                        "snippet refers to unbound {} `{}` at {}",
                        if u.is_call { "function" } else { "variable" },
                        u.name,
                        u.span
                    ))),
                    None => Ok(()),
                }
            }
            (ConceptKind::Complex, None, Some(parts)) => parts
                .validate()
                .map_err(|e| invalid(format!("part graph: {e}"))),
            (ConceptKind::Abstract, None, None) => Ok(()),
            (kind, _, _) => Err(invalid(format!(
                "a {} concept needs {}",
                format!("{kind:?}").to_lowercase(),
                match kind {
                    ConceptKind::Terminal => "a snippet and no parts",
                    ConceptKind::Complex => "parts and no snippet",
                    ConceptKind::Abstract => "neither snippet nor parts",
                }
            ))),
        }
    }
}

fn check_signature(func: &FuncDef, a: &Annotation) -> Result<(), String> {
    if func.params.len() != a.inputs.len() {
        return Err(format!(
            "function `{}` takes {} parameter(s) but the annotation lists {} input(s)",
            func.name,
            func.params.len(),
            a.inputs.len()
        ));
    }
    for (i, (p, v)) in func.params.iter().zip(&a.inputs).enumerate() {
        if p.dtype != v.dtype {
            return Err(format!(
                "parameter {} (`{}`) is {} but input `{}` is {}",
                i + 1,
                p.name,
                p.dtype,
                v.name,
                v.dtype
            ));
        }
    }
    match (func.return_dtype, a.output()) {
        (None, None) => Ok(()),
        (Some(r), Some(o)) if r == o.dtype => Ok(()),
        (Some(r), Some(o)) => Err(format!("returns {r} but output `{}` is {}", o.name, o.dtype)),
        (Some(r), None) => Err(format!("returns {r} but the annotation has no output")),
        (None, Some(o)) => Err(format!(
            "returns nothing but the annotation lists output `{}`",
            o.name
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> ConceptId {
        s.parse().unwrap()
    }

    #[test]
    fn concept_ids() {
        assert!(ConceptId::is_valid("merge-sort"));
        assert!(ConceptId::is_valid("2d-array"));
        assert!(!ConceptId::is_valid("-x"));
        assert!(!ConceptId::is_valid("Merge"));
        assert!(!ConceptId::is_valid(""));
        assert!(serde_json::from_str::<ConceptId>("\"Bad Id\"").is_err());
    }

    #[test]
    fn signature_must_match_annotation() {
        let c = Concept::terminal(id("inc"), "Inc", "func inc(x: int) -> int { return x + 1; }")
            .with_inputs(vec![TypedVar::new("x", Dtype::Int)])
            .with_output(TypedVar::new("y", Dtype::Int));
        c.validate_standalone().unwrap();

        let wrong = c.clone().with_inputs(vec![TypedVar::new("x", Dtype::Real)]);
        assert!(matches!(
            wrong.validate_standalone(),
            Err(StoreError::InvalidConcept { .. })
        ));
        let mut no_out = c.clone();
        no_out.annotation.outputs.clear();
        assert!(no_out.validate_standalone().is_err());
    }

    #[test]
    fn snippet_errors_are_reported_with_position() {
        let c = Concept::terminal(id("bad"), "Bad", "func f() { let x = ; }");
        match c.validate_standalone() {
            Err(StoreError::SnippetParse { error, .. }) => assert_eq!(error.span.column, 20),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kind_and_body_agree() {
        let mut c = Concept::abstract_concept(id("sort"), "Sort");
        c.validate_standalone().unwrap();
        c.snippet = Some("func f() {}".into());
        assert!(c.validate_standalone().is_err());
    }

    #[test]
    fn at_most_one_output() {
        let mut c = Concept::abstract_concept(id("pair"), "Pair");
        c.annotation.outputs = vec![TypedVar::new("a", Dtype::Int), TypedVar::new("b", Dtype::Int)];
        assert!(c.validate_standalone().is_err());
    }
}
