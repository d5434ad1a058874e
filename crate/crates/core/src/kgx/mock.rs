use std::path::Path;

use super::{KgxError, Triple};

/// Deterministic offline extractor: reads `head|relation|tail` lines from a
/// sidecar file, skipping blank lines and `#` comments. `_text` is accepted
/// so the call site matches the LLM path; the sidecar alone decides output.
pub fn mock_extract(_text: &str, sidecar: &Path) -> Result<Vec<Triple>, KgxError> {
    let content = std::fs::read_to_string(sidecar).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            KgxError::MissingSidecar(sidecar.to_path_buf())
        } else {
            KgxError::Io {
                path: sidecar.to_path_buf(),
                source,
            }
        }
    })?;
    let mut triples = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(KgxError::SidecarLine {
                path: sidecar.to_path_buf(),
                line: i + 1,
                fields: fields.len(),
            });
        }
        if fields[0].is_empty() || fields[2].is_empty() {
            return Err(KgxError::SidecarEmptyNode {
                path: sidecar.to_path_buf(),
                line: i + 1,
            });
        }
        triples.push(Triple::new(fields[0], fields[1], fields[2]));
    }
    Ok(triples)
}
