//! Role-aware design-matrix construction with reference-level dummy coding.

use ndarray::Array2;

use super::dataset::Dataset;
use super::schema::{Kind, Role, VariableSpec};
use crate::error::{Error, Result};

/// Design matrices split by causal role.
#[derive(Debug, Clone)]
pub struct Encoded {
    /// Protected indicator, one entry per row.
    pub x: Vec<u8>,
    /// Confounder block, one row per observation.
    pub z: Array2<f64>,
    /// Mediator block.
    pub w: Array2<f64>,
    /// Outcome.
    pub y: Vec<f64>,
    pub z_names: Vec<String>,
    pub w_names: Vec<String>,
}

impl Encoded {
    /// Mediator and confounder blocks side by side (W first), the feature
    /// layout consumed by outcome and mediator-odds models.
    pub fn wz(&self) -> Array2<f64> {
        let n = self.x.len();
        let p = self.w.ncols() + self.z.ncols();
        let mut out = Array2::zeros((n, p));
        for i in 0..n {
            for j in 0..self.w.ncols() {
                out[[i, j]] = self.w[[i, j]];
            }
            for j in 0..self.z.ncols() {
                out[[i, self.w.ncols() + j]] = self.z[[i, j]];
            }
        }
        out
    }
}

fn encoded_width(kind: &Kind) -> usize {
    match kind {
        Kind::Binary | Kind::Continuous => 1,
        Kind::Categorical { levels, .. } => levels.len() - 1,
    }
}

/// Column names produced by one variable: the variable name itself, or
/// `name=level` for each non-reference level in declared order.
pub fn encoded_names(var: &VariableSpec) -> Vec<String> {
    match &var.kind {
        Kind::Binary | Kind::Continuous => vec![var.name.clone()],
        Kind::Categorical { levels, reference } => levels
            .iter()
            .filter(|l| *l != reference)
            .map(|l| format!("{}={}", var.name, l))
            .collect(),
    }
}

fn fill_block(data: &Dataset, role: Role) -> (Array2<f64>, Vec<String>) {
    let vars: Vec<(usize, &VariableSpec)> = data
        .schema
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.role == role)
        .collect();
    let width: usize = vars.iter().map(|(_, v)| encoded_width(&v.kind)).sum();
    let mut out = Array2::zeros((data.n, width));
    let mut names = Vec::with_capacity(width);
    let mut col = 0usize;
    for (idx, var) in vars {
        let column = &data.columns[idx];
        match &var.kind {
            Kind::Binary | Kind::Continuous => {
                for i in 0..data.n {
                    out[[i, col]] = column.values[i];
                }
                col += 1;
            }
            Kind::Categorical { levels, reference } => {
                let ref_idx = levels.iter().position(|l| l == reference).expect("checked");
                let mut k = 0usize;
                for (li, _) in levels.iter().enumerate() {
                    if li == ref_idx {
                        continue;
                    }
                    for i in 0..data.n {
                        out[[i, col + k]] =
                            if column.values[i] as usize == li { 1.0 } else { 0.0 };
                    }
                    k += 1;
                }
                col += levels.len() - 1;
            }
        }
        names.extend(encoded_names(var));
    }
    (out, names)
}

/// Build the {X, Z, W, Y} design matrices.
///
/// Requires a valid, complete dataset: every categorical with L levels yields
/// L-1 indicators omitting the reference; binary and continuous pass through.
/// Column order is schema order, then declared level order.
pub fn encode(data: &Dataset) -> Result<Encoded> {
    if let Some((variable, row)) = data.first_missing() {
        return Err(Error::MissingData { variable, row });
    }
    let (z, z_names) = fill_block(data, Role::Confounder);
    let (w, w_names) = fill_block(data, Role::Mediator);
    Ok(Encoded {
        x: data.protected_values(),
        z,
        w,
        y: data.outcome_values(),
        z_names,
        w_names,
    })
}
