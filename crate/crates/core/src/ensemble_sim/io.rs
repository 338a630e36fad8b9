//! Persistence: a binary sample container (JSON header, little-endian `f64` payload in
//! row-major order), a JSON sidecar summary, and CSV exports of per-sample statistics.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::concentration::ConcentrationTable;
use super::config::{Configuration, EnsembleConfig, SampleBatch, SamplerDiagnostics};
use super::edge::EdgeStats;
use super::fluctuation::FluctuationStats;
use crate::error::{Error, Result};

pub const BATCH_SCHEMA_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"LGSBATCH";

#[derive(Serialize, Deserialize)]
struct BatchHeader {
    schema_version: u32,
    kind: String,
    config: EnsembleConfig,
    acceptance_rate: Option<f64>,
    diagnostics: SamplerDiagnostics,
    n_configs: usize,
    n_particles: usize,
}

fn format_err(m: impl Into<String>) -> Error {
    Error::Format(m.into())
}

pub fn encode_batch(batch: &SampleBatch) -> Vec<u8> {
    let header = BatchHeader {
        schema_version: BATCH_SCHEMA_VERSION,
        kind: "sample_batch".into(),
        config: batch.config.clone(),
        acceptance_rate: batch.acceptance_rate,
        diagnostics: batch.diagnostics.clone(),
        n_configs: batch.len(),
        n_particles: batch.n_particles(),
    };
    let json = serde_json::to_vec(&header).expect("header serialises");
    let mut out = Vec::with_capacity(16 + json.len() + 8 * batch.len() * batch.n_particles());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for c in &batch.configs {
        for x in c.positions() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn decode_batch(bytes: &[u8]) -> Result<SampleBatch> {
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(format_err("not a sample batch container"));
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = bytes.get(16..16 + hlen).ok_or_else(|| format_err("truncated header"))?;
    let header: BatchHeader = serde_json::from_slice(body).map_err(|e| format_err(format!("batch header: {e}")))?;
    if header.schema_version != BATCH_SCHEMA_VERSION || header.kind != "sample_batch" {
        return Err(format_err(format!("unsupported batch schema {} ({})", header.schema_version, header.kind)));
    }
    let payload = &bytes[16 + hlen..];
    let (m, n) = (header.n_configs, header.n_particles);
    if payload.len() != 8 * m * n {
        return Err(format_err(format!("payload has {} bytes, expected {}", payload.len(), 8 * m * n)));
    }
    let values: Vec<f64> = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let configs = values.chunks(n.max(1)).take(m).map(|c| Configuration::new(c.to_vec())).collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch {
        configs,
        config: header.config,
        acceptance_rate: header.acceptance_rate,
        diagnostics: header.diagnostics,
    })
}

pub fn write_batch(batch: &SampleBatch, path: &Path) -> Result<()> {
    std::fs::File::create(path)?.write_all(&encode_batch(batch))?;
    Ok(())
}

pub fn read_batch(path: &Path) -> Result<SampleBatch> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_batch(&bytes)
}

/// Sidecar summary: provenance, acceptance and pooled moments.
pub fn batch_summary_json(batch: &SampleBatch) -> String {
    let pooled = batch.pooled();
    let k = pooled.len().max(1) as f64;
    let mean = pooled.iter().sum::<f64>() / k;
    let second = pooled.iter().map(|x| x * x).sum::<f64>() / k;
    let value = serde_json::json!({
        "schema_version": BATCH_SCHEMA_VERSION,
        "kind": "sample_batch_summary",
        "config": batch.config,
        "n_configs": batch.len(),
        "n_particles": batch.n_particles(),
        "acceptance_rate": batch.acceptance_rate,
        "diagnostics": batch.diagnostics,
        "pooled_mean": mean,
        "pooled_second_moment": second,
        "pooled_min": pooled.iter().cloned().fold(f64::INFINITY, f64::min),
        "pooled_max": pooled.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    });
    serde_json::to_string_pretty(&value).expect("summary serialises")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct FluctuationRow {
    sample: usize,
    fluctuation: f64,
}

/// One row per sample: `sample, fluctuation`.
pub fn write_fluctuation_csv(stats: &FluctuationStats, path: &Path) -> Result<()> {
    write_rows(path, stats.values.iter().enumerate().map(|(sample, &fluctuation)| FluctuationRow { sample, fluctuation }))
}

#[derive(Serialize)]
struct EdgeRow {
    sample: usize,
    rescaled_max: f64,
    rescaled_min: f64,
}

/// One row per sample: `sample, rescaled_max, rescaled_min`.
pub fn write_edge_csv(stats: &EdgeStats, path: &Path) -> Result<()> {
    write_rows(
        path,
        stats.rescaled_max.iter().zip(&stats.rescaled_min).enumerate().map(|(sample, (&a, &b))| EdgeRow {
            sample,
            rescaled_max: a,
            rescaled_min: b,
        }),
    )
}

/// One row per `(N, r)`.
pub fn write_concentration_csv(table: &ConcentrationTable, path: &Path) -> Result<()> {
    write_rows(path, table.rows.iter())
}
