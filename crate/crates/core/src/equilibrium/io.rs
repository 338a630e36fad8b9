use serde::{Deserialize, Serialize};

use super::measure::{EquilibriumMeasure, SolverReport};
use super::Potential;
use crate::error::{Error, Result};
use crate::grid_numerics::{build_uniform_grid, GridSpec};

pub const MEASURE_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct MeasureDoc {
    schema_version: u32,
    kind: String,
    potential: Potential,
    coupling: f64,
    grid: GridSpec,
    lambda: f64,
    support_threshold: f64,
    report: SolverReport,
    nodes: Vec<f64>,
    log_density: Vec<f64>,
    density: Vec<f64>,
    log_potential: Vec<f64>,
    density_d1: Vec<f64>,
    density_d2: Vec<f64>,
}

/// Versioned JSON document holding the measure and its derived arrays.
pub fn measure_to_json(eq: &EquilibriumMeasure) -> String {
    let doc = MeasureDoc {
        schema_version: MEASURE_SCHEMA_VERSION,
        kind: "equilibrium_measure".into(),
        potential: eq.potential.clone(),
        coupling: eq.coupling,
        grid: eq.grid.spec(),
        lambda: eq.lambda,
        support_threshold: eq.support_threshold,
        report: eq.report.clone(),
        nodes: eq.grid.nodes().to_vec(),
        log_density: eq.log_density.clone(),
        density: eq.density.clone(),
        log_potential: eq.log_potential.clone(),
        density_d1: eq.density_d1.clone(),
        density_d2: eq.density_d2.clone(),
    };
    serde_json::to_string(&doc).expect("measure serialises")
}

/// Rebuild a measure from [`measure_to_json`] output. Derived arrays are recomputed.
pub fn measure_from_json(text: &str) -> Result<EquilibriumMeasure> {
    let doc: MeasureDoc =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("measure json: {e}")))?;
    if doc.schema_version != MEASURE_SCHEMA_VERSION || doc.kind != "equilibrium_measure" {
        return Err(Error::Format(format!(
            "unsupported measure document (kind {}, schema {})",
            doc.kind, doc.schema_version
        )));
    }
    let grid = build_uniform_grid(doc.grid.half_width, doc.grid.n_points)?;
    if doc.log_density.len() != grid.len() || doc.log_potential.len() != grid.len() {
        return Err(Error::Format("array length does not match grid".into()));
    }
    Ok(EquilibriumMeasure::assemble(
        doc.potential,
        doc.coupling,
        grid,
        doc.lambda,
        doc.log_density,
        doc.log_potential,
        doc.support_threshold,
        doc.report,
    ))
}
