//! Correspondence interchange as CSV with a `src_idx,tgt_idx` header, so
//! external matchers can feed the solver directly.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatchesCsvError {
    #[error("line 1: expected header 'src_idx,tgt_idx', found {0:?}")]
    BadHeader(String),
    #[error("line {line}: {message}")]
    BadRow { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parses `src_idx,tgt_idx` CSV text into index pairs (order preserved).
pub fn parse_matches_csv(text: &str) -> Result<Vec<(usize, usize)>, MatchesCsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "src_idx,tgt_idx" => {}
        Some((_, header)) => return Err(MatchesCsvError::BadHeader(header.to_string())),
        None => return Err(MatchesCsvError::BadHeader(String::new())),
    }
    let mut pairs = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (src, tgt) = trimmed
            .split_once(',')
            .ok_or_else(|| MatchesCsvError::BadRow {
                line: line_no,
                message: "expected two comma-separated indices".into(),
            })?;
        let parse = |token: &str| {
            token
                .trim()
                .parse::<usize>()
                .map_err(|e| MatchesCsvError::BadRow {
                    line: line_no,
                    message: format!("{e} at {token:?}"),
                })
        };
        pairs.push((parse(src)?, parse(tgt)?));
    }
    Ok(pairs)
}

/// Reads a correspondence CSV file.
pub fn read_matches(path: impl AsRef<Path>) -> Result<Vec<(usize, usize)>, MatchesCsvError> {
    parse_matches_csv(&fs::read_to_string(path)?)
}

/// Writes correspondences with the standard header.
pub fn write_matches_to(pairs: &[(usize, usize)], out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "src_idx,tgt_idx")?;
    for (s, t) in pairs {
        writeln!(out, "{s},{t}")?;
    }
    Ok(())
}

/// Writes a correspondence CSV file.
pub fn write_matches(
    pairs: &[(usize, usize)],
    path: impl AsRef<Path>,
) -> Result<(), MatchesCsvError> {
    let mut buf = Vec::new();
    write_matches_to(pairs, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}
