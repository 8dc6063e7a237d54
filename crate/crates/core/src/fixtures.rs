//! The bundled corpus of published tables and its re-verification.
//!
//! A fixture file holds `# key: value` metadata lines followed by the row
//! text exactly as published. Letter rows (tables 1 and 2, and the q = 13
//! sequence stored as table 0) carry `q`, `k`, `t`, `alphabet` and the
//! listed `extras`; integer rows (table 3) carry `q` and `k`; bound rows
//! (table 4) carry `q`, `k` and `bound`, where `-` marks an entry for which
//! no bound is given.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::blocks::{stats, verify, BlockSystem};
use crate::bounds::{bound_for_uniform, BoundError};
use crate::codec::{parse_int_blocks, parse_letters, CodecError, LetterAlphabet};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("reading fixtures: {0}")]
    Io(#[from] io::Error),
    #[error("{file}: {message}")]
    Malformed { file: String, message: String },
    #[error("no fixtures for table {0}")]
    Empty(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub meta: BTreeMap<String, String>,
    pub body: String,
}

impl Fixture {
    pub fn parse(name: &str, text: &str) -> Self {
        let mut meta = BTreeMap::new();
        let mut body = Vec::new();
        for line in text.lines() {
            match line.strip_prefix('#') {
                Some(rest) => {
                    if let Some((k, v)) = rest.split_once(':') {
                        meta.insert(k.trim().to_string(), v.trim().to_string());
                    }
                }
                None => body.push(line),
            }
        }
        Fixture {
            name: name.to_string(),
            meta,
            body: body.join("\n").trim().to_string(),
        }
    }

    fn get(&self, key: &str) -> Result<&str, FixtureError> {
        self.meta
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| FixtureError::Malformed {
                file: self.name.clone(),
                message: format!("missing `{key}`"),
            })
    }

    fn number(&self, key: &str) -> Result<u64, FixtureError> {
        let raw = self.get(key)?;
        raw.replace(',', "")
            .parse()
            .map_err(|_| FixtureError::Malformed {
                file: self.name.clone(),
                message: format!("`{key}` is not a number: {raw}"),
            })
    }

    pub fn table(&self) -> Result<u32, FixtureError> {
        Ok(self.number("table")? as u32)
    }

    pub fn q(&self) -> Result<u64, FixtureError> {
        self.number("q")
    }

    /// The system described by a letter or integer row.
    pub fn system(&self) -> Result<BlockSystem, RowError> {
        let q = self.q()?;
        match self.table()? {
            3 => Ok(parse_int_blocks(&self.body, q)?),
            4 => Err(RowError::Fixture(FixtureError::Malformed {
                file: self.name.clone(),
                message: "bound rows carry no system".into(),
            })),
            _ => Ok(parse_letters(&self.body, &self.alphabet()?, q)?),
        }
    }

    pub fn alphabet(&self) -> Result<LetterAlphabet, FixtureError> {
        let name = self
            .meta
            .get("alphabet")
            .map(String::as_str)
            .unwrap_or("t5x");
        LetterAlphabet::by_name(name).ok_or_else(|| FixtureError::Malformed {
            file: self.name.clone(),
            message: format!("unknown alphabet {name}"),
        })
    }
}

#[derive(Debug, Error)]
pub enum RowError {
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// All fixtures in `dir`, ordered by table and then q.
pub fn load_dir(dir: &Path) -> Result<Vec<Fixture>, FixtureError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let name = path
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        let text = fs::read_to_string(&path)?;
        out.push(Fixture::parse(&name, &text));
    }
    let mut keyed = out
        .into_iter()
        .map(|f| Ok(((f.table()?, f.q()?), f)))
        .collect::<Result<Vec<_>, FixtureError>>()?;
    keyed.sort_by_key(|(key, _)| *key);
    Ok(keyed.into_iter().map(|(_, f)| f).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowReport {
    pub file: String,
    pub table: u32,
    pub q: u64,
    pub passed: bool,
    pub detail: String,
}

/// Re-checks one fixture row against what it claims.
pub fn check_fixture(fixture: &Fixture) -> RowReport {
    let outcome = match fixture.table() {
        Ok(4) => check_bound_row(fixture),
        Ok(3) => check_int_row(fixture),
        Ok(_) => check_letter_row(fixture),
        Err(e) => Err(e.to_string()),
    };
    let (passed, detail) = match outcome {
        Ok(detail) => (true, detail),
        Err(detail) => (false, detail),
    };
    RowReport {
        file: fixture.name.clone(),
        table: fixture.table().unwrap_or(u32::MAX),
        q: fixture.q().unwrap_or(0),
        passed,
        detail,
    }
}

fn system_summary(fixture: &Fixture) -> Result<(BlockSystem, usize, Vec<String>), String> {
    let system = fixture.system().map_err(|e| format!("parse error: {e}"))?;
    let report = verify(&system);
    let mut problems = Vec::new();
    if !report.is_empty() {
        let shown: Vec<String> = report
            .conflicts
            .iter()
            .take(4)
            .map(|c| c.to_string())
            .collect();
        problems.push(format!(
            "{} conflicts, first {}; suspected transcription issue",
            report.count(),
            shown.join(" ")
        ));
    }
    let st = stats(&system);
    let k = fixture.number("k").map_err(|e| e.to_string())? as usize;
    if st.uniform_k != Some(k) {
        problems.push(format!(
            "block sizes {}..{} but k = {k}",
            st.k_min, st.k_max
        ));
    }
    Ok((system, report.count(), problems))
}

fn check_letter_row(fixture: &Fixture) -> Result<String, String> {
    let (system, _, mut problems) = system_summary(fixture)?;
    let st = stats(&system);
    let t = fixture.number("t").map_err(|e| e.to_string())? as usize;
    if st.t != t {
        problems.push(format!("uses {} symbols but t = {t}", st.t));
    }
    let alphabet = fixture.alphabet().map_err(|e| e.to_string())?;
    let listed = fixture
        .meta
        .get("extras")
        .map(String::as_str)
        .unwrap_or("-");
    let listed = if listed == "-" { "" } else { listed };
    let used = alphabet.extras(&fixture.body);
    if used != listed {
        problems.push(format!("extra letters used {used:?} but listed {listed:?}"));
    }
    if problems.is_empty() {
        Ok(format!(
            "0 conflicts, k={}, t={}, extras {:?}",
            st.k_max, st.t, used
        ))
    } else {
        Err(problems.join("; "))
    }
}

fn check_int_row(fixture: &Fixture) -> Result<String, String> {
    let (system, _, problems) = system_summary(fixture)?;
    if problems.is_empty() {
        let st = stats(&system);
        Ok(format!("0 conflicts, k={}, v={}", st.k_max, st.v))
    } else {
        Err(problems.join("; "))
    }
}

fn check_bound_row(fixture: &Fixture) -> Result<String, String> {
    let q = fixture.q().map_err(|e| e.to_string())?;
    let k = fixture.number("k").map_err(|e| e.to_string())?;
    let published = fixture.get("bound").map_err(|e| e.to_string())?;
    let computed = bound_for_uniform(q, k);
    match (published, computed) {
        ("-", Err(e @ (BoundError::WrongResidue(_) | BoundError::NotPrime(_)))) => {
            Ok(format!("rejected: {e}"))
        }
        ("-", Ok(r)) => Err(format!("published no bound but computed {}", r.lower_bound)),
        (_, Err(e)) => Err(format!(
            "published {published} but computation rejected: {e}"
        )),
        (p, Ok(r)) => {
            let expected: u128 = p
                .replace(',', "")
                .parse()
                .map_err(|_| format!("bad bound {p}"))?;
            let closed = (q as u128 - 1) * q as u128 * (k as u128 + 1);
            if r.lower_bound == expected && closed == expected {
                Ok(format!("bound {expected}"))
            } else {
                Err(format!(
                    "published {expected} but computed {}",
                    r.lower_bound
                ))
            }
        }
    }
}

/// Checks every fixture of table `which` found in `dir`.
pub fn check_table(which: u32, dir: &Path) -> Result<Vec<RowReport>, FixtureError> {
    let rows: Vec<RowReport> = load_dir(dir)?
        .iter()
        .filter(|f| f.table().ok() == Some(which))
        .map(check_fixture)
        .collect();
    if rows.is_empty() {
        return Err(FixtureError::Empty(which));
    }
    Ok(rows)
}
