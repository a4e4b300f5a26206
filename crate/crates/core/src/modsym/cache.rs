//! Canonical-text cache of eigensymbols, one file per (level, sign, eigenvalues).
//!
//! ```text
//! PADICLF-SYMBOL v1
//! level 11
//! sign 1
//! eigenvalues 2=-2,3=-1
//! fricke -1
//! free 0 1 5
//! symbols 12
//! 0 1 0
//! ...
//! ```
//! Symbol lines are `c d value`, in canonical P^1 order. Writes go through a
//! temporary file followed by a rename.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_rational::BigRational;

use super::{EigenSymbol, ModsymError, P1Index};

pub const FORMAT_VERSION: &str = "PADICLF-SYMBOL v1";

fn err<E: std::fmt::Display>(e: E) -> ModsymError {
    ModsymError::Cache(e.to_string())
}

pub fn eigen_key(eigenvalues: &BTreeMap<u64, i64>) -> String {
    eigenvalues.iter().map(|(q, a)| format!("{q}={a}")).collect::<Vec<_>>().join(",")
}

pub fn cache_path(dir: &Path, level: u64, sign: i8, eigenvalues: &BTreeMap<u64, i64>) -> PathBuf {
    let tag = eigen_key(eigenvalues).replace(['=', ','], "_");
    let s = if sign > 0 { "plus" } else { "minus" };
    dir.join(format!("symbol-N{level}-{s}-{tag}.txt"))
}

pub fn encode(symbol: &EigenSymbol, free: &[usize]) -> String {
    let p1 = P1Index::new(symbol.level);
    let mut out = String::new();
    out.push_str(FORMAT_VERSION);
    out.push('\n');
    out.push_str(&format!("level {}\n", symbol.level));
    out.push_str(&format!("sign {}\n", symbol.sign));
    out.push_str(&format!("eigenvalues {}\n", eigen_key(&symbol.eigenvalues)));
    out.push_str(&format!("fricke {}\n", symbol.fricke_sign));
    let free: Vec<String> = free.iter().map(|f| f.to_string()).collect();
    out.push_str(&format!("free {}\n", free.join(" ")));
    out.push_str(&format!("symbols {}\n", p1.len()));
    for (&(c, d), v) in p1.representatives().iter().zip(symbol.values.iter()) {
        out.push_str(&format!("{c} {d} {v}\n"));
    }
    out
}

fn field<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str, ModsymError> {
    let line = line.ok_or_else(|| err(format!("missing `{key}`")))?;
    line.strip_prefix(key)
        .map(str::trim)
        .ok_or_else(|| err(format!("expected `{key}`, found `{line}`")))
}

pub fn decode(text: &str) -> Result<EigenSymbol, ModsymError> {
    let mut lines = text.lines();
    if lines.next() != Some(FORMAT_VERSION) {
        return Err(err("format version mismatch"));
    }
    let level: u64 = field(lines.next(), "level")?.parse().map_err(err)?;
    let sign: i8 = field(lines.next(), "sign")?.parse().map_err(err)?;
    let ev_text = field(lines.next(), "eigenvalues")?;
    let mut eigenvalues = BTreeMap::new();
    for item in ev_text.split(',').filter(|s| !s.is_empty()) {
        let (q, a) = item.split_once('=').ok_or_else(|| err(format!("bad eigenvalue `{item}`")))?;
        eigenvalues.insert(q.parse().map_err(err)?, a.parse().map_err(err)?);
    }
    let fricke: i8 = field(lines.next(), "fricke")?.parse().map_err(err)?;
    field(lines.next(), "free")?;
    let count: usize = field(lines.next(), "symbols")?.parse().map_err(err)?;
    let p1 = P1Index::new(level);
    if count != p1.len() {
        return Err(err("symbol count does not match P^1"));
    }
    let mut values = Vec::with_capacity(count);
    for &(c, d) in p1.representatives() {
        let line = lines.next().ok_or_else(|| err("truncated symbol table"))?;
        let mut it = line.split_whitespace();
        let lc: u64 = it.next().ok_or_else(|| err("bad line"))?.parse().map_err(err)?;
        let ld: u64 = it.next().ok_or_else(|| err("bad line"))?.parse().map_err(err)?;
        if (lc, ld) != (c, d) {
            return Err(err(format!("representative ({lc}:{ld}) out of canonical order")));
        }
        let v: BigRational = it.next().ok_or_else(|| err("bad line"))?.parse().map_err(err)?;
        values.push(v);
    }
    let symbol = EigenSymbol::from_values(&p1, sign, values, eigenvalues);
    if symbol.fricke_sign != fricke {
        return Err(err("stored Fricke sign disagrees with the symbol"));
    }
    Ok(symbol)
}

pub fn load(path: &Path) -> Result<Option<EigenSymbol>, ModsymError> {
    match fs::read_to_string(path) {
        Ok(text) => decode(&text).map(Some),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(err(e)),
    }
}

pub fn store(path: &Path, symbol: &EigenSymbol, free: &[usize]) -> Result<(), ModsymError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(err)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, encode(symbol, free)).map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}
