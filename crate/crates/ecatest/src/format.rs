//! On-disk environment formats.
//!
//! Text: a header line `n m rule=<code>` followed by `m` lines of `n` digits.
//! Binary: the 8-byte magic `ECAENV1\0`, `n` and `m` as little-endian `u32`,
//! then each row packed into `ceil(n / 8)` bytes, location `i` in bit
//! `i % 8` of byte `i / 8`.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use crate::{Configuration, CoreError, Environment, Rule};

pub const MAGIC: &[u8; 8] = b"ECAENV1\0";

/// An environment together with the rule recorded in its header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvFile {
    pub env: Environment,
    pub rule: Option<Rule>,
}

pub fn write_text<W: Write>(mut w: W, env: &Environment, rule: Option<Rule>) -> Result<(), CoreError> {
    match rule {
        Some(r) => writeln!(w, "{} {} rule={}", env.n(), env.m(), r.wolfram_code())?,
        None => writeln!(w, "{} {}", env.n(), env.m())?,
    }
    for row in env.rows() {
        writeln!(w, "{row}")?;
    }
    Ok(())
}

pub fn read_text<R: BufRead>(r: R) -> Result<EnvFile, CoreError> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::Format("missing header".into()))??;
    let mut parts = header.split_whitespace();
    let mut num = |what: &str| -> Result<usize, CoreError> {
        parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CoreError::Format(format!("header lacks {what}")))
    };
    let n = num("n")?;
    let m = num("m")?;
    let rule = match parts.next() {
        Some(tok) => {
            let code = tok
                .strip_prefix("rule=")
                .and_then(|c| c.parse::<u8>().ok())
                .ok_or_else(|| CoreError::Format(format!("bad rule field {tok:?}")))?;
            Some(Rule::from_wolfram(code))
        }
        None => None,
    };
    let mut rows = Vec::with_capacity(m);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Configuration = line.parse()?;
        if row.len() != n {
            return Err(CoreError::Format(format!(
                "row {} has length {}, expected {n}",
                rows.len(),
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.len() != m {
        return Err(CoreError::Format(format!("expected {m} rows, found {}", rows.len())));
    }
    Ok(EnvFile {
        env: Environment::from_rows(rows)?,
        rule,
    })
}

pub fn write_binary<W: Write>(mut w: W, env: &Environment) -> Result<(), CoreError> {
    w.write_all(MAGIC)?;
    w.write_all(&(env.n() as u32).to_le_bytes())?;
    w.write_all(&(env.m() as u32).to_le_bytes())?;
    let row_bytes = env.n().div_ceil(8);
    for row in env.rows() {
        let bytes: Vec<u8> = row
            .words()
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(row_bytes)
            .collect();
        w.write_all(&bytes)?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Environment, CoreError> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[..8] != MAGIC {
        return Err(CoreError::Format("bad magic".into()));
    }
    let n = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as usize;
    let m = u32::from_le_bytes(header[12..16].try_into().expect("4 bytes")) as usize;
    let row_bytes = n.div_ceil(8);
    let mut rows = Vec::with_capacity(m);
    let mut buf = vec![0u8; row_bytes];
    for _ in 0..m {
        r.read_exact(&mut buf)?;
        let words = buf
            .chunks(8)
            .map(|chunk| {
                let mut b = [0u8; 8];
                b[..chunk.len()].copy_from_slice(chunk);
                u64::from_le_bytes(b)
            })
            .collect();
        rows.push(Configuration::from_words(n, words)?);
    }
    Environment::from_rows(rows)
}

/// Reads either format, sniffing the magic bytes.
pub fn load(path: &Path) -> Result<EnvFile, CoreError> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        Ok(EnvFile {
            env: read_binary(bytes.as_slice())?,
            rule: None,
        })
    } else {
        read_text(bytes.as_slice())
    }
}
