//! CSV formats.
//!
//! * counts: `x,y,a,b,count`, one row per cell; repeated cells are summed.
//! * trials: `participant_id,x,y,a,b`, one row per trial.
//! * rank tables: `rank,count` or `token,count`.
//!
//! Outcomes are `+1`/`-1`, or `0`/`1` bits (mapped as `(-1)^bit`) when
//! reading with `bit_outcomes`.

use std::fs;
use std::io::Write;
use std::path::Path;

use bellrank_core::behavior::{Outcome, OutcomeCountTable, CELLS, SETTING_PAIRS};
use bellrank_core::corpus::{rank_token_counts, RankedCorpus};
use bellrank_core::inference::TrialRecord;
use bellrank_core::rankfit::RankTable;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const COUNTS_HEADER: [&str; 5] = ["x", "y", "a", "b", "count"];
pub const TRIALS_HEADER: [&str; 5] = ["participant_id", "x", "y", "a", "b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChshInput {
    Counts,
    Trials,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChshData {
    Counts(OutcomeCountTable),
    Trials(Vec<TrialRecord>),
}

/// Reads a whole file, mapping failures to [`CliError::Io`].
pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).has_headers(true).from_reader(bytes)
}

fn header(path: &Path, rdr: &mut csv::Reader<&[u8]>) -> Result<Vec<String>> {
    let h = rdr.headers().map_err(|e| csv_error(path, e))?;
    Ok(h.iter().map(|s| s.to_ascii_lowercase()).collect())
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line());
    CliError::schema(path, line, e.to_string())
}

fn field<'a>(path: &Path, rec: &'a csv::StringRecord, i: usize, name: &str) -> Result<&'a str> {
    let line = rec.position().map(|p| p.line());
    match rec.get(i) {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::schema(path, line, format!("missing value for column `{name}`"))),
    }
}

fn parse<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    let raw = field(path, rec, i, name)?;
    raw.parse().map_err(|_| {
        CliError::schema(path, rec.position().map(|p| p.line()), format!("column `{name}`: cannot parse `{raw}`"))
    })
}

fn setting(path: &Path, rec: &csv::StringRecord, i: usize, name: &str) -> Result<usize> {
    let v: i64 = parse(path, rec, i, name)?;
    match v {
        0 | 1 => Ok(v as usize),
        _ => Err(CliError::schema(
            path,
            rec.position().map(|p| p.line()),
            format!("column `{name}`: setting must be 0 or 1, got {v}"),
        )),
    }
}

fn outcome(path: &Path, rec: &csv::StringRecord, i: usize, name: &str, bits: bool) -> Result<Outcome> {
    let v: i64 = parse(path, rec, i, name)?;
    let o = if bits { Outcome::from_bit(v) } else { Outcome::from_value(v) };
    o.ok_or_else(|| {
        let expected = if bits { "0 or 1" } else { "+1 or -1" };
        CliError::schema(
            path,
            rec.position().map(|p| p.line()),
            format!("column `{name}`: outcome must be {expected}, got {v}"),
        )
    })
}

fn expect_header(path: &Path, got: &[String], want: &[&str]) -> Result<()> {
    if got.iter().map(String::as_str).eq(want.iter().copied()) {
        Ok(())
    } else {
        Err(CliError::schema(path, Some(1), format!("expected header `{}`, got `{}`", want.join(","), got.join(","))))
    }
}

/// Reads CHSH input, detecting counts or trials by the header unless `kind` is given.
pub fn read_chsh_input(path: &Path, bytes: &[u8], kind: Option<ChshInput>, bits: bool) -> Result<ChshData> {
    let mut rdr = reader(bytes);
    let h = header(path, &mut rdr)?;
    let kind = match kind {
        Some(k) => k,
        None if h.first().map(String::as_str) == Some("participant_id") => ChshInput::Trials,
        None => ChshInput::Counts,
    };
    match kind {
        ChshInput::Counts => {
            expect_header(path, &h, &COUNTS_HEADER)?;
            let mut counts = OutcomeCountTable::new();
            for rec in rdr.records() {
                let rec = rec.map_err(|e| csv_error(path, e))?;
                let (x, y) = (setting(path, &rec, 0, "x")?, setting(path, &rec, 1, "y")?);
                let (a, b) = (outcome(path, &rec, 2, "a", bits)?, outcome(path, &rec, 3, "b", bits)?);
                let n: u64 = parse(path, &rec, 4, "count")?;
                counts.add(x, y, a, b, n)?;
            }
            Ok(ChshData::Counts(counts))
        }
        ChshInput::Trials => {
            expect_header(path, &h, &TRIALS_HEADER)?;
            let mut trials = Vec::new();
            for rec in rdr.records() {
                let rec = rec.map_err(|e| csv_error(path, e))?;
                let id = field(path, &rec, 0, "participant_id")?;
                let (x, y) = (setting(path, &rec, 1, "x")?, setting(path, &rec, 2, "y")?);
                let (a, b) = (outcome(path, &rec, 3, "a", bits)?, outcome(path, &rec, 4, "b", bits)?);
                trials.push(TrialRecord::new(id, x, y, a, b)?);
            }
            if trials.is_empty() {
                return Err(CliError::schema(path, None, "no trial rows"));
            }
            Ok(ChshData::Trials(trials))
        }
    }
}

/// A rank table read from disk, with the token map when tokens were given.
pub enum RankInput {
    Ranks(RankTable),
    Tokens(RankedCorpus),
}

pub fn read_rank_input(path: &Path, bytes: &[u8]) -> Result<RankInput> {
    let mut rdr = reader(bytes);
    let h = header(path, &mut rdr)?;
    match h.first().map(String::as_str) {
        Some("rank") => {
            expect_header(path, &h, &["rank", "count"])?;
            let mut entries = Vec::new();
            for rec in rdr.records() {
                let rec = rec.map_err(|e| csv_error(path, e))?;
                let rank: u64 = parse(path, &rec, 0, "rank")?;
                let count: u64 = parse(path, &rec, 1, "count")?;
                entries.push((rank, count));
            }
            let table = RankTable::new(entries, None).map_err(|e| CliError::schema(path, None, e.to_string()))?;
            Ok(RankInput::Ranks(table))
        }
        Some("token") => {
            expect_header(path, &h, &["token", "count"])?;
            let mut pairs = Vec::new();
            for rec in rdr.records() {
                let rec = rec.map_err(|e| csv_error(path, e))?;
                let token = field(path, &rec, 0, "token")?.to_string();
                let count: u64 = parse(path, &rec, 1, "count")?;
                pairs.push((token, count));
            }
            Ok(RankInput::Tokens(rank_token_counts(pairs)))
        }
        _ => Err(CliError::schema(
            path,
            Some(1),
            format!("expected header `rank,count` or `token,count`, got `{}`", h.join(",")),
        )),
    }
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn csv_bytes(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::io(path, std::io::Error::other(e.to_string())))
}

/// Writes a counts CSV with `±1` outcomes, every cell listed in canonical order.
pub fn write_counts_csv(path: &Path, counts: &OutcomeCountTable) -> Result<()> {
    let rows = SETTING_PAIRS.iter().flat_map(|&(x, y)| {
        CELLS.iter().map(move |&(a, b)| {
            vec![
                x.to_string(),
                y.to_string(),
                a.value().to_string(),
                b.value().to_string(),
                counts.get(x, y, a, b).to_string(),
            ]
        })
    });
    let bytes = csv_bytes(path, &COUNTS_HEADER, rows)?;
    write_file(path, &bytes)
}

pub fn write_rank_table_csv(path: &Path, table: &RankTable) -> Result<()> {
    let rows = table.entries().iter().map(|&(r, n)| vec![r.to_string(), n.to_string()]);
    let bytes = csv_bytes(path, &["rank", "count"], rows)?;
    write_file(path, &bytes)
}

pub fn write_token_map_csv(path: &Path, corpus: &RankedCorpus) -> Result<()> {
    let rows = corpus.tokens.iter().map(|t| vec![t.token.clone(), t.rank.to_string(), t.count.to_string()]);
    let bytes = csv_bytes(path, &["token", "rank", "count"], rows)?;
    write_file(path, &bytes)
}

/// Plot-ready table: one row per rank, one column per series.
pub fn write_series_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = rows.iter().map(|r| r.iter().map(|v| format_number(*v)).collect());
    let bytes = csv_bytes(path, &header, rows)?;
    write_file(path, &bytes)
}

fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:e}")
    }
}

/// JSON Lines: one serialized record per line.
pub fn write_jsonl<T: serde::Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| CliError::io(path, e.into()))?;
        out.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    }
    write_file(path, &out)
}
