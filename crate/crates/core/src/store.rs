//! On-disk formats: sequence, series and extrema CSV files, their JSON
//! sidecars, and run manifests.
//!
//! Every CSV is UTF-8 with LF line endings. Floating-point values are written
//! in shortest round-trip form, so reading a file back reproduces the exact
//! doubles that were written.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::extrema::{ExtremaKind, ExtremaRow};
use crate::oracle;
use crate::sequence::{SeedSet, StanleySequence, Strategy};
use crate::series::IndexedSeries;

pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SEQUENCE_HEADER: &str = "k,a_k";
pub const SERIES_HEADER: &str = "k,value";
pub const EXTREMA_HEADER: &str = "kind,k,r_smooth,r_raw";

/// Prefix length re-verified on load unless configured otherwise.
pub const DEFAULT_VERIFY_PREFIX: usize = 2000;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Shortest decimal that parses back to exactly `v`.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// `<file>.json` next to a data file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

fn read_text(path: &Path) -> Result<String> {
    let mut text = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    Ok(text)
}

/// Splits LF-terminated text into lines after checking the header.
/// A missing final newline is reported as truncation.
fn data_lines<'a>(text: &'a str, header: &str, path: &Path) -> Result<Vec<&'a str>> {
    if text.is_empty() {
        return Err(Error::parse(path, "file is empty"));
    }
    if !text.ends_with('\n') {
        return Err(Error::parse(path, "file is truncated (no final newline)"));
    }
    let mut lines = text[..text.len() - 1].split('\n');
    let first = lines.next().unwrap_or_default().trim_end_matches('\r');
    if first != header {
        return Err(Error::parse(
            path,
            format!("expected header '{header}', found '{first}'"),
        ));
    }
    Ok(lines.map(|l| l.trim_end_matches('\r')).collect())
}

fn parse_field<T: std::str::FromStr>(field: &str, what: &str, line: usize, path: &Path) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    field
        .trim()
        .parse()
        .map_err(|e| Error::parse(path, format!("line {line}: bad {what} '{field}': {e}")))
}

// ---------------------------------------------------------------------------
// sequences

/// Sidecar for a sequence CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub format_version: u32,
    pub seed: SeedSet,
    pub length: usize,
    pub strategy: Strategy,
    pub tool_version: String,
    pub wall_clock_seconds: Option<f64>,
    pub sha256: String,
}

pub fn sequence_csv(seq: &StanleySequence) -> String {
    let mut out = String::with_capacity(16 * seq.len() + 8);
    out.push_str(SEQUENCE_HEADER);
    out.push('\n');
    for (i, t) in seq.terms().iter().enumerate() {
        out.push_str(&format!("{},{t}\n", i + 1));
    }
    out
}

/// Writes the CSV and its sidecar. Returns the sidecar that was written.
pub fn save_sequence(
    seq: &StanleySequence,
    path: &Path,
    wall_clock_seconds: Option<f64>,
) -> Result<SequenceMeta> {
    let csv = sequence_csv(seq);
    write_file(path, csv.as_bytes())?;
    let meta = SequenceMeta {
        format_version: FORMAT_VERSION,
        seed: seq.seed().clone(),
        length: seq.len(),
        strategy: seq.strategy(),
        tool_version: TOOL_VERSION.to_string(),
        wall_clock_seconds,
        sha256: sha256_hex(csv.as_bytes()),
    };
    write_json(&sidecar_path(path), &meta)?;
    Ok(meta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// Number of leading terms whose AP-freeness and greedy minimality are
    /// re-verified.
    pub verify_prefix: usize,
    pub mode: ExecMode,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            verify_prefix: DEFAULT_VERIFY_PREFIX,
            mode: ExecMode::default(),
        }
    }
}

fn parse_sequence_terms(text: &str, path: &Path) -> Result<Vec<u64>> {
    let lines = data_lines(text, SEQUENCE_HEADER, path)?;
    let mut terms = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let lineno = i + 2;
        let (k, a) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(path, format!("line {lineno}: expected 'k,a_k'")))?;
        let k: usize = parse_field(k, "k", lineno, path)?;
        if k != i + 1 {
            return Err(Error::parse(
                path,
                format!("line {lineno}: expected k = {}, found {k}", i + 1),
            ));
        }
        terms.push(parse_field(a, "a_k", lineno, path)?);
    }
    Ok(terms)
}

/// Reads a sequence CSV, checking it against its sidecar when present and
/// re-verifying the defining properties of a prefix. Without a sidecar the
/// first two terms are taken as the seed.
pub fn load_sequence(path: &Path, options: LoadOptions) -> Result<StanleySequence> {
    let text = read_text(path)?;
    let terms = parse_sequence_terms(&text, path)?;
    let meta_path = sidecar_path(path);
    let (seed, strategy) = if meta_path.exists() {
        let meta: SequenceMeta = read_json(&meta_path)?;
        let actual = sha256_hex(text.as_bytes());
        if actual != meta.sha256 {
            return Err(Error::Checksum {
                path: path.to_path_buf(),
                expected: meta.sha256,
                actual,
            });
        }
        if meta.length != terms.len() {
            return Err(Error::parse(
                path,
                format!(
                    "sidecar records {} terms, file has {}",
                    meta.length,
                    terms.len()
                ),
            ));
        }
        (meta.seed, meta.strategy)
    } else {
        if terms.len() < 2 {
            return Err(Error::parse(path, "need at least 2 terms"));
        }
        let seed = SeedSet::new(terms[..2].to_vec())
            .map_err(|e| Error::Invariant(format!("{}: {e}", path.display())))?;
        (seed, Strategy::default())
    };
    if !terms.starts_with(seed.elements()) {
        return Err(Error::Invariant(format!(
            "{}: terms do not start with the seed {seed}",
            path.display()
        )));
    }
    verify_prefix(&terms, seed.len(), options, path)?;
    Ok(StanleySequence::from_parts(seed, terms, strategy))
}

fn verify_prefix(terms: &[u64], seed_len: usize, options: LoadOptions, path: &Path) -> Result<()> {
    let prefix = &terms[..terms.len().min(options.verify_prefix)];
    if let Some(i) = prefix.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::Invariant(format!(
            "{}: terms not strictly increasing at k = {}",
            path.display(),
            i + 2
        )));
    }
    if let Some((a, b, c)) = oracle::find_ap_triple_with(options.mode, prefix)? {
        return Err(Error::Invariant(format!(
            "{}: 3-term arithmetic progression {a}, {b}, {c} in the first {} terms",
            path.display(),
            prefix.len()
        )));
    }
    if let Some(m) = oracle::find_greedy_violation_with(options.mode, prefix, seed_len)? {
        return Err(Error::Invariant(format!(
            "{}: {m} was skipped although it closes no 3-term progression",
            path.display()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// series

/// Sidecar for a series CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub format_version: u32,
    pub label: String,
    pub n_points: usize,
    pub source_sha256: Option<String>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub tool_version: String,
}

pub fn series_csv(series: &IndexedSeries) -> String {
    let mut out = String::with_capacity(28 * series.len() + 8);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for (k, v) in series.points() {
        out.push_str(&format!("{k},{}\n", format_f64(v)));
    }
    out
}

pub fn save_series(
    series: &IndexedSeries,
    path: &Path,
    source_sha256: Option<String>,
    parameters: BTreeMap<String, serde_json::Value>,
) -> Result<SeriesMeta> {
    write_file(path, series_csv(series).as_bytes())?;
    let meta = SeriesMeta {
        format_version: FORMAT_VERSION,
        label: series.label().to_string(),
        n_points: series.len(),
        source_sha256,
        parameters,
        tool_version: TOOL_VERSION.to_string(),
    };
    write_json(&sidecar_path(path), &meta)?;
    Ok(meta)
}

pub fn load_series(path: &Path) -> Result<IndexedSeries> {
    let text = read_text(path)?;
    let lines = data_lines(&text, SERIES_HEADER, path)?;
    if lines.is_empty() {
        return Err(Error::parse(path, "series has no rows"));
    }
    let mut ks = Vec::with_capacity(lines.len());
    let mut values = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let lineno = i + 2;
        let (k, v) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(path, format!("line {lineno}: expected 'k,value'")))?;
        ks.push(parse_field::<u64>(k, "k", lineno, path)?);
        values.push(parse_field::<f64>(v, "value", lineno, path)?);
    }
    let label = match read_json::<SeriesMeta>(&sidecar_path(path)) {
        Ok(meta) => meta.label,
        Err(_) => path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    IndexedSeries::new(label, ks, values).map_err(|e| Error::parse(path, e.to_string()))
}

// ---------------------------------------------------------------------------
// extrema

pub fn extrema_csv(rows: &[ExtremaRow]) -> String {
    let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    let mut out = String::from(EXTREMA_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.kind,
            row.k,
            opt(row.r_smooth),
            opt(row.r_raw)
        ));
    }
    out
}

pub fn save_extrema(rows: &[ExtremaRow], path: &Path) -> Result<()> {
    write_file(path, extrema_csv(rows).as_bytes())
}

/// Parses an extrema table; `r_smooth` and `r_raw` may be left empty.
pub fn parse_extrema_table(bytes: &[u8], name: impl AsRef<Path>) -> Result<Vec<ExtremaRow>> {
    let path = name.as_ref();
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(path, e.to_string()))?;
    let lines = data_lines(text, EXTREMA_HEADER, path)?;
    let opt = |field: &str, what: &str, lineno: usize| -> Result<Option<f64>> {
        if field.trim().is_empty() {
            Ok(None)
        } else {
            parse_field(field, what, lineno, path).map(Some)
        }
    };
    lines
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let lineno = i + 2;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::parse(
                    path,
                    format!("line {lineno}: expected 4 fields, found {}", fields.len()),
                ));
            }
            let kind: ExtremaKind = fields[0]
                .parse()
                .map_err(|e: Error| Error::parse(path, format!("line {lineno}: {e}")))?;
            Ok(ExtremaRow {
                kind,
                k: parse_field(fields[1], "k", lineno, path)?,
                r_smooth: opt(fields[2], "r_smooth", lineno)?,
                r_raw: opt(fields[3], "r_raw", lineno)?,
            })
        })
        .collect()
}

pub fn load_extrema(path: &Path) -> Result<Vec<ExtremaRow>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_extrema_table(&bytes, path)
}

// ---------------------------------------------------------------------------
// run manifests

/// Record of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub input_hashes: BTreeMap<String, String>,
    pub output_files: Vec<String>,
    pub output_hashes: BTreeMap<String, String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>) -> Self {
        RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            command: command.into(),
            parameters: BTreeMap::new(),
            input_hashes: BTreeMap::new(),
            output_files: Vec::new(),
            output_hashes: BTreeMap::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let value = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let hash = sha256_file(path)?;
        self.input_hashes.insert(path.display().to_string(), hash);
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) -> Result<()> {
        let hash = sha256_file(path)?;
        let key = path.display().to_string();
        self.output_hashes.insert(key.clone(), hash);
        if !self.output_files.contains(&key) {
            self.output_files.push(key);
        }
        Ok(())
    }

    /// Checks that every listed output exists and that all recorded hashes
    /// still match the files on disk.
    pub fn verify(&self) -> Result<()> {
        for file in &self.output_files {
            if !Path::new(file).exists() {
                return Err(Error::Invariant(format!(
                    "manifest output {file} is missing"
                )));
            }
        }
        for (file, expected) in self.input_hashes.iter().chain(&self.output_hashes) {
            let actual = sha256_file(Path::new(file))?;
            if &actual != expected {
                return Err(Error::Checksum {
                    path: PathBuf::from(file),
                    expected: expected.clone(),
                    actual,
                });
            }
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.verify()?;
        write_json(path, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{generate, GenerateOptions};

    fn seven() -> StanleySequence {
        generate(
            &SeedSet::pair(4).unwrap(),
            7,
            GenerateOptions::default().quiet(),
        )
        .unwrap()
    }

    #[test]
    fn sequence_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.csv");
        let seq = seven();
        save_sequence(&seq, &path, Some(0.5)).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("k,a_k\n1,0\n2,4\n3,5\n"));
        assert!(text.ends_with("7,16\n"));
        let back = load_sequence(&path, LoadOptions::default()).unwrap();
        assert_eq!(back, seq);
    }

    #[test]
    fn load_detects_ap() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "k,a_k\n1,0\n2,1\n3,2\n4,3\n").unwrap();
        let err = load_sequence(&path, LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)), "{err}");
        assert!(err.to_string().contains("0, 1, 2"), "{err}");
    }

    #[test]
    fn load_detects_non_greedy() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gap.csv");
        fs::write(&path, "k,a_k\n1,0\n2,4\n3,5\n4,11\n").unwrap();
        let err = load_sequence(&path, LoadOptions::default()).unwrap_err();
        assert!(err.to_string().contains("7 was skipped"), "{err}");
    }

    #[test]
    fn load_detects_truncation_and_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.csv");
        save_sequence(&seven(), &path, None).unwrap();
        let text = fs::read_to_string(&path).unwrap();

        fs::write(&path, &text[..text.len() - 3]).unwrap();
        assert!(matches!(
            load_sequence(&path, LoadOptions::default()),
            Err(Error::Parse { .. })
        ));

        fs::write(&path, text.replace("7,16\n", "7,17\n")).unwrap();
        assert!(matches!(
            load_sequence(&path, LoadOptions::default()),
            Err(Error::Checksum { .. })
        ));

        fs::write(&path, "k,a_k\n1,0\n3,4\n").unwrap();
        fs::remove_file(sidecar_path(&path)).unwrap();
        assert!(matches!(
            load_sequence(&path, LoadOptions::default()),
            Err(Error::Parse { .. })
        ));
        fs::write(&path, "").unwrap();
        assert!(matches!(
            load_sequence(&path, LoadOptions::default()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn series_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let values = vec![0.1, 1.0 / 3.0, -2.5e-17, 1.4249660470681528, 1e300];
        let s = IndexedSeries::contiguous("r_k", 2, values).unwrap();
        save_series(&s, &path, None, BTreeMap::new()).unwrap();
        let back = load_series(&path).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn empty_series_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        fs::write(&path, "").unwrap();
        assert!(matches!(load_series(&path), Err(Error::Parse { .. })));
        fs::write(&path, "k,value\n").unwrap();
        assert!(matches!(load_series(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn extrema_table_with_blanks() {
        let rows =
            parse_extrema_table(b"kind,k,r_smooth,r_raw\npeak,293,,\ntrough,365,1.5,\n", "t")
                .unwrap();
        assert_eq!(rows[0].r_smooth, None);
        assert_eq!(rows[1].r_smooth, Some(1.5));
        assert_eq!(rows[1].kind, ExtremaKind::Trough);
        assert!(parse_extrema_table(b"kind,k,r_smooth,r_raw\nvalley,3,,\n", "t").is_err());
        assert_eq!(
            parse_extrema_table(extrema_csv(&rows).as_bytes(), "t").unwrap(),
            rows
        );
    }

    #[test]
    fn manifest_verifies_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out.txt");
        fs::write(&out, "hello\n").unwrap();
        let mut m = RunManifest::new("test");
        m.param("n", 4);
        m.add_output(&out).unwrap();
        m.verify().unwrap();
        fs::write(&out, "changed\n").unwrap();
        assert!(matches!(m.verify(), Err(Error::Checksum { .. })));
        fs::remove_file(&out).unwrap();
        assert!(m.verify().is_err());
    }
}
