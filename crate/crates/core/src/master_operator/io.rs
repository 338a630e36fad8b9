use serde::{Deserialize, Serialize};

use super::spectral::{diagonalize_a, SpectralBasis, SpectralOptions};
use crate::equilibrium::{measure_from_json, measure_to_json};
use crate::error::{Error, Result};

pub const BASIS_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct BasisDoc {
    schema_version: u32,
    kind: String,
    measure: serde_json::Value,
    ground_eigenvalue: f64,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    potential_minimum: f64,
    eigenfunctions: Vec<Vec<f64>>,
}

/// Versioned JSON holding the measure, the eigenvalues and the nodal eigenfunctions.
pub fn basis_to_json(basis: &SpectralBasis) -> String {
    let measure: serde_json::Value =
        serde_json::from_str(&measure_to_json(&basis.measure)).expect("measure json is valid");
    let doc = BasisDoc {
        schema_version: BASIS_SCHEMA_VERSION,
        kind: "spectral_basis".into(),
        measure,
        ground_eigenvalue: basis.ground_eigenvalue,
        eigenvalues: basis.eigenvalues.clone(),
        residuals: basis.residuals.clone(),
        potential_minimum: basis.potential_minimum,
        eigenfunctions: basis.eigenfunctions.clone(),
    };
    serde_json::to_string(&doc).expect("basis serialises")
}

/// Reload a basis. The eigenpairs are recomputed from the stored measure and checked
/// against the stored eigenvalues, so a document cannot silently disagree with its measure.
pub fn basis_from_json(text: &str) -> Result<SpectralBasis> {
    let doc: BasisDoc = serde_json::from_str(text).map_err(|e| Error::Format(format!("basis json: {e}")))?;
    if doc.schema_version != BASIS_SCHEMA_VERSION || doc.kind != "spectral_basis" {
        return Err(Error::Format(format!(
            "unsupported basis document (kind {}, schema {})",
            doc.kind, doc.schema_version
        )));
    }
    let eq = measure_from_json(&doc.measure.to_string())?;
    let opts = SpectralOptions { n_modes: doc.eigenvalues.len(), ..SpectralOptions::default() };
    let basis = diagonalize_a(&eq, &opts)?;
    let drift = basis
        .eigenvalues
        .iter()
        .zip(&doc.eigenvalues)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max);
    if drift > 1e-9 {
        return Err(Error::Format(format!("stored eigenvalues disagree with the stored measure ({drift:.2e})")));
    }
    Ok(basis)
}
