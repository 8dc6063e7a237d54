//! Text formats: the letter-sequence notation for 2-element block systems,
//! integer block lists, the canonical JSON document and bound-table CSV.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::{BlockError, BlockSystem};
use crate::gf::{Field, FieldElement, FieldError, FieldSpec};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("unknown letter {letter:?} at position {position}")]
    UnknownLetter { letter: String, position: usize },
    #[error("expected {expected} blocks, found {got}")]
    TokenCount { expected: usize, got: usize },
    #[error("block {label} is not representable in alphabet {alphabet}")]
    NotRepresentable { label: usize, alphabet: String },
    #[error("block {block}: invalid integer {token:?}")]
    BadInteger { block: usize, token: String },
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("document field mismatch: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Block(#[from] BlockError),
}

/// Letters naming fixed 2-element blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LetterAlphabet {
    name: String,
    letters: Vec<(char, [u32; 2])>,
    /// Number of leading letters that make up the core alphabet; any later
    /// letter counts as an "extra".
    base: usize,
}

impl LetterAlphabet {
    /// `A={0,1} B={1,2} C={2,3} D={3,4} E={0,4}` plus
    /// `F={1,4} G={0,2} H={2,4} I={1,3} J={0,3}`.
    pub fn t5x() -> Self {
        LetterAlphabet {
            name: "t5x".into(),
            letters: vec![
                ('A', [0, 1]),
                ('B', [1, 2]),
                ('C', [2, 3]),
                ('D', [3, 4]),
                ('E', [0, 4]),
                ('F', [1, 4]),
                ('G', [0, 2]),
                ('H', [2, 4]),
                ('I', [1, 3]),
                ('J', [0, 3]),
            ],
            base: 5,
        }
    }

    /// `A={0,1} B={1,2} C={2,3} D={3,4} E={4,5} F={0,5}`.
    pub fn t6c() -> Self {
        LetterAlphabet {
            name: "t6c".into(),
            letters: vec![
                ('A', [0, 1]),
                ('B', [1, 2]),
                ('C', [2, 3]),
                ('D', [3, 4]),
                ('E', [4, 5]),
                ('F', [0, 5]),
            ],
            base: 6,
        }
    }

    pub fn custom(letters: Vec<(char, [u32; 2])>) -> Result<Self, CodecError> {
        let mut seen_sets = BTreeSet::new();
        let mut seen_letters = BTreeSet::new();
        for &(c, [x, y]) in &letters {
            if x == y {
                return Err(CodecError::Inconsistent(format!(
                    "letter {c} maps to a 1-element set"
                )));
            }
            if !seen_letters.insert(c) || !seen_sets.insert([x.min(y), x.max(y)]) {
                return Err(CodecError::Inconsistent(format!(
                    "letter {c} is not unique"
                )));
            }
        }
        let base = letters.len();
        let letters = letters
            .into_iter()
            .map(|(c, [x, y])| (c, [x.min(y), x.max(y)]))
            .collect();
        Ok(LetterAlphabet {
            name: "custom".into(),
            letters,
            base,
        })
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "t5x" => Some(Self::t5x()),
            "t6c" => Some(Self::t6c()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn letters(&self) -> &[(char, [u32; 2])] {
        &self.letters
    }

    pub fn lookup(&self, letter: char) -> Option<[u32; 2]> {
        self.letters
            .iter()
            .find(|(c, _)| *c == letter)
            .map(|&(_, set)| set)
    }

    pub fn letter_for(&self, block: &[FieldElement]) -> Option<char> {
        match block {
            [x, y] => self
                .letters
                .iter()
                .find(|(_, set)| set[0] == x.code() && set[1] == y.code())
                .map(|&(c, _)| c),
            _ => None,
        }
    }

    /// Letters outside the core alphabet used in a letter sequence, in
    /// alphabet order.
    pub fn extras(&self, text: &str) -> String {
        let used: BTreeSet<char> = text.split_whitespace().filter_map(single_char).collect();
        self.letters[self.base..]
            .iter()
            .map(|&(c, _)| c)
            .filter(|c| used.contains(c))
            .collect()
    }
}

fn single_char(tok: &str) -> Option<char> {
    let mut chars = tok.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

/// Whitespace-separated letters; token `i` becomes `B_i`.
pub fn parse_letters(
    text: &str,
    alphabet: &LetterAlphabet,
    q: u64,
) -> Result<BlockSystem, CodecError> {
    let field = Arc::new(Field::new(q)?);
    parse_letters_in(text, alphabet, field)
}

pub fn parse_letters_in(
    text: &str,
    alphabet: &LetterAlphabet,
    field: Arc<Field>,
) -> Result<BlockSystem, CodecError> {
    let mut blocks = Vec::new();
    for (position, tok) in text.split_whitespace().enumerate() {
        let set = single_char(tok)
            .and_then(|c| alphabet.lookup(c))
            .ok_or_else(|| CodecError::UnknownLetter {
                letter: tok.to_string(),
                position,
            })?;
        blocks.push(set.to_vec());
    }
    let expected = field.order() as usize;
    if blocks.len() != expected {
        return Err(CodecError::TokenCount {
            expected,
            got: blocks.len(),
        });
    }
    Ok(BlockSystem::from_codes(field, blocks)?)
}

/// Inverse of [`parse_letters`], single-space separated.
pub fn emit_letters(system: &BlockSystem, alphabet: &LetterAlphabet) -> Result<String, CodecError> {
    let letters = system
        .blocks()
        .iter()
        .enumerate()
        .map(|(label, block)| {
            alphabet
                .letter_for(block)
                .ok_or_else(|| CodecError::NotRepresentable {
                    label,
                    alphabet: alphabet.name.clone(),
                })
        })
        .collect::<Result<Vec<char>, _>>()?;
    let mut out = String::with_capacity(letters.len() * 2);
    for (i, c) in letters.into_iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push(c);
    }
    Ok(out)
}

/// Comma-separated blocks of space-separated integers, e.g. `"0 3, 0 2, 2 4"`.
/// A trailing comma is tolerated.
pub fn parse_int_blocks(text: &str, q: u64) -> Result<BlockSystem, CodecError> {
    let field = Arc::new(Field::new(q)?);
    let mut pieces: Vec<&str> = text.split(',').collect();
    if pieces.last().is_some_and(|p| p.trim().is_empty()) {
        pieces.pop();
    }
    let mut blocks = Vec::with_capacity(pieces.len());
    for (block, piece) in pieces.iter().enumerate() {
        let members = piece
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u32>().map_err(|_| CodecError::BadInteger {
                    block,
                    token: tok.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        blocks.push(members);
    }
    if blocks.len() != q as usize {
        return Err(CodecError::TokenCount {
            expected: q as usize,
            got: blocks.len(),
        });
    }
    Ok(BlockSystem::from_codes(field, blocks)?)
}

pub fn emit_int_blocks(system: &BlockSystem) -> String {
    system
        .codes()
        .iter()
        .map(|b| b.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    q: u32,
    p: u32,
    m: u32,
    modulus: Vec<u32>,
    blocks: Vec<Vec<u32>>,
}

/// Canonical single-line JSON: fixed key order, sorted members.
pub fn write_json(system: &BlockSystem) -> String {
    let spec = system.field().spec();
    let doc = SystemDoc {
        q: spec.order(),
        p: spec.characteristic(),
        m: spec.degree(),
        modulus: spec.modulus().to_vec(),
        blocks: system.codes(),
    };
    serde_json::to_string(&doc).expect("document serializes")
}

pub fn read_json(text: &str) -> Result<BlockSystem, CodecError> {
    let doc: SystemDoc = serde_json::from_str(text)?;
    let spec = FieldSpec::from_parts(doc.p, doc.m, doc.modulus)?;
    if spec.order() != doc.q {
        return Err(CodecError::Inconsistent(format!(
            "q = {} but p^m = {}",
            doc.q,
            spec.order()
        )));
    }
    let field = Arc::new(Field::from_spec(spec));
    Ok(BlockSystem::from_codes(field, doc.blocks)?)
}

/// One line of a bound table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundRow {
    pub q: u64,
    pub k: Option<u64>,
    pub v: u64,
    pub bound: Option<u128>,
}

/// CSV with header `q,k,v,bound`; missing values are left empty.
pub fn bound_csv(rows: &[BoundRow]) -> String {
    let mut out = String::from("q,k,v,bound\n");
    for row in rows {
        let k = row.k.map(|k| k.to_string()).unwrap_or_default();
        let bound = row.bound.map(|b| b.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{}", row.q, k, row.v, bound).unwrap();
    }
    out
}
