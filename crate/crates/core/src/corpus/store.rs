use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Corpus, CorpusError, Document};

pub const DOCUMENTS_FILE: &str = "documents.jsonl";

/// Read `documents.jsonl` from `dir`. A directory without the file holds an
/// empty corpus.
pub fn load_corpus(dir: &Path) -> Result<Corpus, CorpusError> {
    if !dir.is_dir() {
        return Err(CorpusError::MissingDirectory(dir.to_path_buf()));
    }
    let path = dir.join(DOCUMENTS_FILE);
    if !path.exists() {
        return Ok(Corpus::default());
    }
    let io_err = |source| CorpusError::Io { path: path.clone(), source };
    let reader = BufReader::new(fs::File::open(&path).map_err(io_err)?);
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|source| CorpusError::Parse {
            path: path.clone(),
            line: i + 1,
            source,
        })?;
        docs.push(doc);
    }
    Corpus::from_documents(docs)
}

/// Write the corpus as one JSON record per line, in id order, so repeated
/// saves of the same corpus are byte-identical.
pub fn save_corpus(corpus: &Corpus, dir: &Path) -> Result<(), CorpusError> {
    let path = dir.join(DOCUMENTS_FILE);
    let io_err = |source| CorpusError::Io { path: path.clone(), source };
    fs::create_dir_all(dir).map_err(io_err)?;
    let mut out = BufWriter::new(fs::File::create(&path).map_err(io_err)?);
    for doc in corpus.documents() {
        let line = serde_json::to_string(doc).expect("documents always serialize");
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
