//! Parsing and windowing of sequential trajectory data.
//!
//! The on-disk format is one trajectory per line: single-space-separated
//! entity tokens, with an optional leading trajectory-id token. Entity tokens
//! may not contain `|`, `,` or whitespace; those characters are reserved for
//! node-label encoding.

use crate::error::{HonError, Result};
use rustc_hash::FxHashMap;
use std::fmt::Write as _;

/// Interned entity identifier. Ids are assigned in first-occurrence order.
pub type EntityId = u32;

/// Bidirectional map between entity tokens and interned ids.
#[derive(Debug, Clone, Default)]
pub struct Vocab {
    labels: Vec<String>,
    index: FxHashMap<String, EntityId>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, token: &str) -> EntityId {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.labels.len() as EntityId;
        self.labels.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    pub fn get(&self, token: &str) -> Option<EntityId> {
        self.index.get(token).copied()
    }

    pub fn label(&self, id: EntityId) -> &str {
        &self.labels[id as usize]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub id: Option<String>,
    pub entities: Vec<EntityId>,
}

/// A parsed trajectory file: interned entities plus the trajectories
/// themselves, in input order.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub vocab: Vocab,
    pub trajectories: Vec<Trajectory>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Treat the first token of each line as the trajectory id.
    pub has_id: bool,
    /// Collapse runs of identical consecutive entities into one.
    pub dedup_consecutive: bool,
    /// Drop trajectories with more entities than this (crawler filter).
    pub max_trajectory_len: Option<usize>,
}

fn valid_token(token: &str) -> bool {
    !token.is_empty() && !token.contains('|') && !token.contains(',')
}

/// Parse trajectories from text. Lines that contain no entities (after the
/// optional id token) are skipped; blank lines are skipped. CRLF is accepted.
pub fn parse_trajectories(text: &str, options: ParseOptions) -> Result<Corpus> {
    let mut vocab = Vocab::new();
    let mut trajectories = Vec::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        let mut tokens = line.split_whitespace();
        let id = if options.has_id {
            match tokens.next() {
                Some(t) => Some(t.to_string()),
                None => continue,
            }
        } else {
            None
        };
        let mut entities = Vec::new();
        for token in tokens {
            if !valid_token(token) {
                return Err(HonError::MalformedLine(line_no + 1));
            }
            let eid = vocab.intern(token);
            if options.dedup_consecutive && entities.last() == Some(&eid) {
                continue;
            }
            entities.push(eid);
        }
        if entities.is_empty() {
            continue;
        }
        if let Some(max) = options.max_trajectory_len {
            if entities.len() > max {
                continue;
            }
        }
        trajectories.push(Trajectory { id, entities });
    }
    if trajectories.is_empty() {
        return Err(HonError::EmptyInput);
    }
    Ok(Corpus { vocab, trajectories })
}

/// Serialize a corpus back to the trajectory file format (LF line endings).
pub fn serialize_trajectories(corpus: &Corpus) -> String {
    let mut out = String::new();
    for t in &corpus.trajectories {
        if let Some(id) = &t.id {
            out.push_str(id);
            if !t.entities.is_empty() {
                out.push(' ');
            }
        }
        for (i, &e) in t.entities.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", corpus.vocab.label(e));
        }
        out.push('\n');
    }
    out
}

/// All contiguous windows of length `len` of a trajectory, in order.
/// Empty when the trajectory is shorter than `len`.
pub fn extract_subsequences(entities: &[EntityId], len: usize) -> impl Iterator<Item = &[EntityId]> {
    debug_assert!(len >= 2);
    entities.windows(len)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(has_id: bool, dedup: bool) -> ParseOptions {
        ParseOptions {
            has_id,
            dedup_consecutive: dedup,
            max_trajectory_len: None,
        }
    }

    #[test]
    fn parses_with_id() {
        let c = parse_trajectories("s1 a b c\n", opts(true, false)).unwrap();
        assert_eq!(c.trajectories.len(), 1);
        assert_eq!(c.trajectories[0].id.as_deref(), Some("s1"));
        let labels: Vec<_> = c.trajectories[0]
            .entities
            .iter()
            .map(|&e| c.vocab.label(e))
            .collect();
        assert_eq!(labels, ["a", "b", "c"]);
    }

    #[test]
    fn single_entity_kept() {
        let c = parse_trajectories("a\n", opts(false, false)).unwrap();
        assert_eq!(c.trajectories[0].entities.len(), 1);
    }

    #[test]
    fn dedup_consecutive() {
        let c = parse_trajectories("s2 a a b\n", opts(true, true)).unwrap();
        let labels: Vec<_> = c.trajectories[0]
            .entities
            .iter()
            .map(|&e| c.vocab.label(e))
            .collect();
        assert_eq!(labels, ["a", "b"]);
    }

    #[test]
    fn reserved_characters_rejected() {
        let err = parse_trajectories("a b|c\n", opts(false, false)).unwrap_err();
        assert!(matches!(err, HonError::MalformedLine(1)));
        let err = parse_trajectories("ok\na,b\n", opts(false, false)).unwrap_err();
        assert!(matches!(err, HonError::MalformedLine(2)));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            parse_trajectories("\n\n", opts(false, false)),
            Err(HonError::EmptyInput)
        ));
    }

    #[test]
    fn crlf_accepted_and_blank_lines_skipped() {
        let c = parse_trajectories("a b\r\n\r\nc d\r\n", opts(false, false)).unwrap();
        assert_eq!(c.trajectories.len(), 2);
    }

    #[test]
    fn max_len_filter() {
        let mut o = opts(false, false);
        o.max_trajectory_len = Some(2);
        let c = parse_trajectories("a b\na b c\n", o).unwrap();
        assert_eq!(c.trajectories.len(), 1);
    }

    #[test]
    fn windows() {
        let v = vec![0u32, 1, 2];
        let w: Vec<_> = extract_subsequences(&v, 2).collect();
        assert_eq!(w, vec![&[0, 1][..], &[1, 2][..]]);
        assert_eq!(extract_subsequences(&v, 4).count(), 0);
        let v = vec![0u32, 1, 0, 1];
        let w: Vec<_> = extract_subsequences(&v, 3).collect();
        assert_eq!(w, vec![&[0, 1, 0][..], &[1, 0, 1][..]]);
    }

    #[test]
    fn round_trip() {
        let text = "s1 a b c\ns2 d e\n";
        let c = parse_trajectories(text, opts(true, false)).unwrap();
        assert_eq!(serialize_trajectories(&c), text);
    }
}
