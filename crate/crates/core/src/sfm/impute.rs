//! Single-draw mean/mode imputation.
//!
//! Deliberately simple: continuous cells get the column mean of observed
//! values, discrete cells get the column mode with ties broken by declared
//! level order. The pipeline only applies it behind an explicit opt-in flag.

use super::dataset::{Column, Dataset};
use super::schema::Kind;
use crate::error::{Error, Result};

fn observed(col: &Column) -> impl Iterator<Item = f64> + '_ {
    col.values
        .iter()
        .zip(&col.missing)
        .filter(|(_, &m)| !m)
        .map(|(&v, _)| v)
}

fn mode_by_level_order(col: &Column, n_levels: usize) -> Option<f64> {
    let mut counts = vec![0usize; n_levels];
    let mut any = false;
    for v in observed(col) {
        let idx = v as usize;
        if idx < n_levels {
            counts[idx] += 1;
            any = true;
        }
    }
    if !any {
        return None;
    }
    let best = counts.iter().enumerate().max_by(|a, b| {
        // ties resolve to the earlier level
        a.1.cmp(b.1).then(b.0.cmp(&a.0))
    });
    best.map(|(idx, _)| idx as f64)
}

/// Fill every missing cell; the input dataset is left untouched.
///
/// Errors with `AllMissingColumn` when a column has no observed value to
/// derive a fill from.
pub fn simple_impute(data: &Dataset) -> Result<Dataset> {
    let mut columns = Vec::with_capacity(data.columns.len());
    for (var, col) in data.schema.variables.iter().zip(&data.columns) {
        if col.n_missing() == 0 {
            columns.push(col.clone());
            continue;
        }
        let fill = match &var.kind {
            Kind::Continuous => {
                let vals: Vec<f64> = observed(col).collect();
                if vals.is_empty() {
                    return Err(Error::AllMissingColumn(var.name.clone()));
                }
                vals.iter().sum::<f64>() / vals.len() as f64
            }
            kind => {
                let n_levels = kind.n_levels().expect("discrete kind");
                mode_by_level_order(col, n_levels)
                    .ok_or_else(|| Error::AllMissingColumn(var.name.clone()))?
            }
        };
        let values = col
            .values
            .iter()
            .zip(&col.missing)
            .map(|(&v, &m)| if m { fill } else { v })
            .collect();
        columns.push(Column::complete(values));
    }
    Ok(Dataset::new(data.schema.clone(), data.n, columns))
}
