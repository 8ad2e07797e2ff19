use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::sim::MetricRecord;

pub const CSV_HEADER: &str =
    "policy,ebn0_db,ber,bler,effective_rate,est_error_variance,blocks_run,bit_errors,block_errors,crc_accept_rate";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" | "jsonlines" => Ok(OutputFormat::Jsonl),
            other => Err(Error::config(format!("unknown output format `{other}`"))),
        }
    }
}

/// 17 significant digits: enough to round-trip every f64.
fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Serialises records; the bytes depend only on the records.
pub fn render_results(records: &[MetricRecord], format: OutputFormat) -> Result<String> {
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in records {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    csv_field(&r.policy),
                    float(r.ebn0_db),
                    float(r.ber),
                    float(r.bler),
                    float(r.effective_rate),
                    float(r.est_error_variance),
                    r.blocks_run,
                    r.bit_errors,
                    r.block_errors,
                    r.crc_accept_rate.map(float).unwrap_or_default(),
                );
            }
        }
        OutputFormat::Jsonl => {
            for r in records {
                let line = serde_json::to_string(r).map_err(|e| Error::Parse(e.to_string()))?;
                out.push_str(&line);
                out.push('\n');
            }
        }
    }
    Ok(out)
}

pub fn emit_results(records: &[MetricRecord], format: OutputFormat, path: &Path) -> Result<()> {
    let text = render_results(records, format)?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Serialises auxiliary tables (capacity curves, rate sweeps) with the
/// field names of `T` as the CSV header.
pub fn render_table<T: Serialize>(rows: &[T], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(|e| Error::Parse(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
        }
        OutputFormat::Jsonl => rows
            .iter()
            .map(|r| {
                serde_json::to_string(r)
                    .map(|l| l + "\n")
                    .map_err(|e| Error::Parse(e.to_string()))
            })
            .collect(),
    }
}

pub fn parse_results(text: &str, format: OutputFormat) -> Result<Vec<MetricRecord>> {
    match format {
        OutputFormat::Csv => {
            let mut reader = csv::Reader::from_reader(text.as_bytes());
            let header: Vec<String> = reader
                .headers()
                .map_err(|e| Error::Parse(e.to_string()))?
                .iter()
                .map(str::to_string)
                .collect();
            if header.join(",") != CSV_HEADER {
                return Err(Error::Parse(format!(
                    "unexpected header `{}`",
                    header.join(",")
                )));
            }
            reader
                .deserialize()
                .map(|row| row.map_err(|e| Error::Parse(e.to_string())))
                .collect()
        }
        OutputFormat::Jsonl => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| Error::Parse(e.to_string())))
            .collect(),
    }
}

pub fn read_results(path: &Path, format: OutputFormat) -> Result<Vec<MetricRecord>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_results(&text, format)
}

/// Sidecar describing how a results file was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
    pub command: String,
    pub format: OutputFormat,
    pub records: usize,
}

impl RunManifest {
    pub fn new(
        config_text: &str,
        seed: u64,
        command: &str,
        format: OutputFormat,
        records: usize,
    ) -> Self {
        let digest = Sha256::digest(config_text.as_bytes());
        let config_sha256 = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Self {
            config_sha256,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            format,
            records,
        }
    }
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_manifest(manifest: &RunManifest, out: &Path) -> Result<PathBuf> {
    let path = manifest_path(out);
    let text = serde_json::to_string_pretty(manifest).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<MetricRecord> {
        vec![
            MetricRecord {
                policy: "decoder".into(),
                ebn0_db: 6.0,
                ber: 1.0 / 3.0,
                bler: 0.125,
                effective_rate: 0.653_554_687_5,
                est_error_variance: 1e-7,
                blocks_run: 2000,
                bit_errors: 12,
                block_errors: 3,
                crc_accept_rate: Some(0.99),
            },
            MetricRecord {
                policy: "threshold(5)".into(),
                ebn0_db: -1.5,
                ber: 0.0,
                bler: 0.0,
                effective_rate: 0.1,
                est_error_variance: 0.0,
                blocks_run: 1,
                bit_errors: 0,
                block_errors: 0,
                crc_accept_rate: None,
            },
        ]
    }

    #[test]
    fn csv_round_trip() {
        let text = render_results(&sample(), OutputFormat::Csv).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(parse_results(&text, OutputFormat::Csv).unwrap(), sample());
        assert!(text.lines().nth(2).unwrap().ends_with(','));
    }

    #[test]
    fn jsonl_round_trip() {
        let text = render_results(&sample(), OutputFormat::Jsonl).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("\"crc_accept_rate\":null"));
        assert_eq!(parse_results(&text, OutputFormat::Jsonl).unwrap(), sample());
    }

    #[test]
    fn empty_is_header_only() {
        let text = render_results(&[], OutputFormat::Csv).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\n"));
        assert!(parse_results(&text, OutputFormat::Csv).unwrap().is_empty());
    }

    #[test]
    fn bad_header_rejected() {
        assert!(parse_results("a,b\n1,2\n", OutputFormat::Csv).is_err());
        assert!("xml".parse::<OutputFormat>().is_err());
    }

    #[test]
    fn table_header_from_fields() {
        let rows = [crate::analysis::CapacityPoint {
            snr_db: 0.0,
            capacity_state1: 0.5,
            capacity_state3: 0.25,
        }];
        let text = render_table(&rows, OutputFormat::Csv).unwrap();
        assert_eq!(
            text,
            "snr_db,capacity_state1,capacity_state3\n0.0,0.5,0.25\n"
        );
    }

    #[test]
    fn manifest_hash() {
        let m = RunManifest::new("abc", 1, "sweep", OutputFormat::Csv, 0);
        assert_eq!(
            m.config_sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(
            manifest_path(Path::new("out/r.csv")),
            PathBuf::from("out/r.csv.manifest.json")
        );
    }
}
