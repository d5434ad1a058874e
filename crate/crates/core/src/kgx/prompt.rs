use std::path::Path;

use super::KgxError;

const PLACEHOLDER: &str = "{chunk}";

/// Bundled one-shot extraction prompt.
pub const DEFAULT_TEMPLATE: &str = r#"You are building a knowledge graph from a passage of an academic article.
Extract the key concepts in the passage and the relations that connect them.

Rules:
- Disregard direct citations: ignore reference markers such as "[12]" or "(Smith et al., 2020)", names that only appear as part of a citation, and bibliography entries.
- Each concept is a short noun phrase of one to four words.
- Each relation is a short verb phrase describing how the two concepts are connected.
- Respond only with a JSON list. Every element is an object with exactly the keys "node_1", "edge" and "node_2".

Example
Passage:
Rising atmospheric CO2 concentrations drive global warming (Hansen et al., 1988), which in turn accelerates sea level rise [4].
Output:
[{"node_1": "atmospheric CO2", "edge": "drives", "node_2": "global warming"}, {"node_1": "global warming", "edge": "accelerates", "node_2": "sea level rise"}]

Passage:
{chunk}
Output:
"#;

/// Prompt text with a `{chunk}` placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate(String);

impl PromptTemplate {
    pub fn new(template: impl Into<String>) -> Result<Self, KgxError> {
        let template = template.into();
        if !template.contains(PLACEHOLDER) {
            return Err(KgxError::MissingPlaceholder);
        }
        Ok(PromptTemplate(template))
    }

    pub fn from_file(path: &Path) -> Result<Self, KgxError> {
        let text = std::fs::read_to_string(path).map_err(|source| KgxError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::new(text)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate(DEFAULT_TEMPLATE.to_string())
    }
}

/// Substitute `chunk` for the placeholder. The chunk is inserted literally;
/// braces inside it are not re-scanned.
pub fn build_prompt(chunk: &str, template: &PromptTemplate) -> String {
    template.0.replace(PLACEHOLDER, chunk)
}
