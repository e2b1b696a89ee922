//! Tabular container for role-tagged data with a missingness mask.

use serde::{Deserialize, Serialize};

use super::schema::{Kind, SfmSchema};

/// One observed column: values plus a per-cell missingness mask.
///
/// Binary cells store 0/1, categorical cells store the level index as f64,
/// continuous cells store the raw value. Masked cells hold an arbitrary value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
}

impl Column {
    pub fn complete(values: Vec<f64>) -> Self {
        let n = values.len();
        Column { values, missing: vec![false; n] }
    }

    pub fn with_mask(values: Vec<f64>, missing: Vec<bool>) -> Self {
        assert_eq!(values.len(), missing.len());
        Column { values, missing }
    }

    pub fn n_missing(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }
}

/// A dataset bound to its schema. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: SfmSchema,
    pub n: usize,
    /// One column per schema variable, in schema order.
    pub columns: Vec<Column>,
}

/// A violated dataset invariant, with enough context to locate the cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub variable: String,
    pub row: Option<usize>,
    pub rule: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.row {
            Some(r) => write!(f, "{} (row {}): {}", self.variable, r, self.rule),
            None => write!(f, "{}: {}", self.variable, self.rule),
        }
    }
}

impl Dataset {
    /// Bundle columns with a schema. Structural requirements (one column per
    /// variable) are enforced here; value-level invariants are reported by
    /// [`Dataset::validate`].
    pub fn new(schema: SfmSchema, n: usize, columns: Vec<Column>) -> Self {
        assert_eq!(
            columns.len(),
            schema.variables.len(),
            "one column per schema variable required"
        );
        Dataset { schema, n, columns }
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.schema.index_of(name).map(|i| &self.columns[i])
    }

    /// Check every value-level invariant; empty result means the dataset is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (var, col) in self.schema.variables.iter().zip(&self.columns) {
            if col.values.len() != self.n || col.missing.len() != self.n {
                out.push(Violation {
                    variable: var.name.clone(),
                    row: None,
                    rule: format!("column length {} != dataset n {}", col.values.len(), self.n),
                });
                continue;
            }
            for row in 0..self.n {
                if col.missing[row] {
                    continue;
                }
                let v = col.values[row];
                match &var.kind {
                    Kind::Binary => {
                        if v != 0.0 && v != 1.0 {
                            out.push(Violation {
                                variable: var.name.clone(),
                                row: Some(row),
                                rule: format!("binary value {v} not in {{0,1}}"),
                            });
                        }
                    }
                    Kind::Categorical { levels, .. } => {
                        let ok = v.fract() == 0.0 && v >= 0.0 && (v as usize) < levels.len();
                        if !ok {
                            out.push(Violation {
                                variable: var.name.clone(),
                                row: Some(row),
                                rule: format!(
                                    "categorical index {v} outside declared {} levels",
                                    levels.len()
                                ),
                            });
                        }
                    }
                    Kind::Continuous => {
                        if !v.is_finite() {
                            out.push(Violation {
                                variable: var.name.clone(),
                                row: Some(row),
                                rule: "non-finite continuous value".into(),
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.columns.iter().all(|c| c.n_missing() == 0)
    }

    /// First missing cell, if any — used to surface `MissingData` errors.
    pub fn first_missing(&self) -> Option<(String, usize)> {
        for (var, col) in self.schema.variables.iter().zip(&self.columns) {
            if let Some(row) = col.missing.iter().position(|&m| m) {
                return Some((var.name.clone(), row));
            }
        }
        None
    }

    /// Protected-attribute column as 0/1 integers.
    pub fn protected_values(&self) -> Vec<u8> {
        let col = self.column(&self.schema.protected().name).expect("protected exists");
        col.values.iter().map(|&v| v as u8).collect()
    }

    /// Outcome column.
    pub fn outcome_values(&self) -> Vec<f64> {
        self.column(&self.schema.outcome().name).expect("outcome exists").values.clone()
    }

    /// New dataset containing only the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                values: rows.iter().map(|&r| c.values[r]).collect(),
                missing: rows.iter().map(|&r| c.missing[r]).collect(),
            })
            .collect();
        Dataset { schema: self.schema.clone(), n: rows.len(), columns }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sfm::schema::{Role, VariableSpec};

    fn schema() -> SfmSchema {
        SfmSchema::new(
            vec![
                VariableSpec::new("x", Role::Protected, Kind::Binary).unwrap(),
                VariableSpec::new(
                    "z",
                    Role::Confounder,
                    Kind::Categorical {
                        levels: vec!["q1".into(), "q2".into(), "q3".into()],
                        reference: "q1".into(),
                    },
                )
                .unwrap(),
                VariableSpec::new("w", Role::Mediator, Kind::Binary).unwrap(),
                VariableSpec::new("y", Role::Outcome, Kind::Continuous).unwrap(),
            ],
            "0",
            "1",
        )
        .unwrap()
    }

    fn well_formed() -> Dataset {
        let n = 10;
        Dataset::new(
            schema(),
            n,
            vec![
                Column::complete(vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]),
                Column::complete(vec![0.0, 1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 1.0, 2.0, 0.0]),
                Column::complete(vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]),
                Column::complete(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]),
            ],
        )
    }

    #[test]
    fn well_formed_dataset_validates_clean() {
        assert!(well_formed().validate().is_empty());
    }

    #[test]
    fn binary_out_of_range_is_reported_with_cell() {
        let mut d = well_formed();
        d.columns[0].values[3] = 2.0;
        let v = d.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].variable, "x");
        assert_eq!(v[0].row, Some(3));
    }

    #[test]
    fn categorical_out_of_range_is_reported() {
        let mut d = well_formed();
        // index 5 stands for an undeclared level like "q6"
        d.columns[1].values[7] = 5.0;
        let v = d.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].variable, "z");
        assert_eq!(v[0].row, Some(7));
    }

    #[test]
    fn select_rows_reorders() {
        let d = well_formed();
        let s = d.select_rows(&[9, 0]);
        assert_eq!(s.n, 2);
        assert_eq!(s.columns[3].values, vec![1.0, 0.1]);
    }
}
