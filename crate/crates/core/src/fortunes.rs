//! Percent-delimited adage corpus, used as rewards and as plaintext for the
//! signing and man-in-the-middle exercises.

use std::path::Path;

use thiserror::Error;

use crate::seedgen::{lcg48_next, Lcg48State};

const BUNDLED: &str = include_str!("../data/fortunes.txt");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus {0} has no entries")]
    Empty(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FortuneCorpus {
    entries: Vec<String>,
    source_path: String,
}

impl FortuneCorpus {
    /// Parses the classic format: entries separated by lines that are
    /// exactly `%`.
    pub fn parse(text: &str, source_path: impl Into<String>) -> Result<Self, CorpusError> {
        let source_path = source_path.into();
        let mut entries = Vec::new();
        let mut current: Vec<&str> = Vec::new();
        for line in text.lines() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line == "%" {
                push_entry(&mut entries, &current);
                current.clear();
            } else {
                current.push(line);
            }
        }
        push_entry(&mut entries, &current);
        if entries.is_empty() {
            return Err(CorpusError::Empty(source_path));
        }
        Ok(FortuneCorpus {
            entries,
            source_path,
        })
    }

    /// The corpus shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED, "<bundled>").expect("bundled corpus is valid")
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    pub fn contains(&self, text: &str) -> bool {
        self.entries.iter().any(|e| e == text)
    }

    /// Uniform pick driven by the 48-bit generator. Draws 31-bit values and
    /// rejects the truncated tail so every index is equally likely.
    pub fn pick(&self, state: Lcg48State) -> (Lcg48State, &str) {
        let n = self.entries.len() as u32;
        let limit = (1u32 << 31) - (1u32 << 31) % n;
        let mut state = state;
        loop {
            let (next, draw) = lcg48_next(state, 31).expect("31 bits");
            state = next;
            if draw < limit {
                return (state, &self.entries[(draw % n) as usize]);
            }
        }
    }
}

fn push_entry(entries: &mut Vec<String>, lines: &[&str]) {
    let start = lines.iter().position(|l| !l.trim().is_empty());
    let end = lines.iter().rposition(|l| !l.trim().is_empty());
    if let (Some(start), Some(end)) = (start, end) {
        entries.push(lines[start..=end].join("\n"));
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<FortuneCorpus, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    FortuneCorpus::parse(&text, path.display().to_string())
}
