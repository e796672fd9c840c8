use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Concept, ConceptId, Store, StoreError};

pub const STORE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreFile {
    version: u32,
    concepts: Vec<Concept>,
    isa: Vec<(ConceptId, ConceptId)>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

/// Canonical JSON for a store: concepts and isa edges sorted by id.
pub fn to_store_json(store: &Store) -> String {
    let file = StoreFile {
        version: STORE_VERSION,
        concepts: store.concepts().cloned().collect(),
        isa: store.isa_edges().cloned().collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("store serializes");
    out.push('\n');
    out
}

/// Parses and validates store file contents.
pub fn parse_store(text: &str) -> Result<Store, StoreError> {
    let format = |e: serde_json::Error| StoreError::Format {
        line: e.line(),
        message: e.to_string(),
    };
    let probe: VersionProbe = serde_json::from_str(text).map_err(format)?;
    if probe.version != STORE_VERSION {
        let line = text
            .lines()
            .position(|l| l.contains("\"version\""))
            .map_or(1, |i| i + 1);
        return Err(StoreError::Format {
            line,
            message: format!(
                "unsupported store version {} (expected {STORE_VERSION})",
                probe.version
            ),
        });
    }
    let file: StoreFile = serde_json::from_str(text).map_err(format)?;
    Store::from_parts(file.concepts, file.isa)
}

pub fn load_store(path: impl AsRef<Path>) -> Result<Store, StoreError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| StoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_store(&text)
}

/// Writes the store through a temporary file and a rename, so readers never
/// observe a half-written store.
pub fn save_store(store: &Store, path: impl AsRef<Path>) -> Result<(), StoreError> {
    let path = path.as_ref();
    let io = |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    };
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "store".into());
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(to_store_json(store).as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsupported_version() {
        let err = parse_store("{\n  \"version\": 999,\n  \"concepts\": [],\n  \"isa\": []\n}")
            .unwrap_err();
        match err {
            StoreError::Format { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("999"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dangling_isa_edge() {
        let text = r#"{"version": 1, "concepts": [], "isa": [["a", "b"]]}"#;
        assert!(matches!(
            parse_store(text),
            Err(StoreError::InvariantViolation(_))
        ));
    }

    #[test]
    fn malformed_json_reports_a_line() {
        let err = parse_store("{\n  \"version\": 1,\n  \"concepts\": [,\n}").unwrap_err();
        assert!(matches!(err, StoreError::Format { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn missing_file_is_io() {
        assert!(matches!(
            load_store("/nonexistent/x.cmdb.json"),
            Err(StoreError::Io { .. })
        ));
    }
}
