//! Parametric data-generating model on the four-node fairness graph.
//!
//! Confounders are drawn first, then the protected attribute from a logistic
//! model on encoded confounders, then binary mediators in a fixed chain order,
//! then a Gaussian-noise linear outcome. Optional protected-by-confounder
//! interaction terms in the outcome create effect heterogeneity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sfm::encode::encoded_names;
use crate::sfm::schema::{Kind, Role, SfmSchema, VariableSpec};
use crate::stats::sigmoid;

/// Independent generator for one confounder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "dist")]
pub enum ConfounderGen {
    Bernoulli { name: String, p: f64 },
    Categorical { name: String, levels: Vec<String>, reference: String, probs: Vec<f64> },
    Gaussian { name: String, mean: f64, sd: f64 },
}

impl ConfounderGen {
    pub fn name(&self) -> &str {
        match self {
            ConfounderGen::Bernoulli { name, .. }
            | ConfounderGen::Categorical { name, .. }
            | ConfounderGen::Gaussian { name, .. } => name,
        }
    }

    fn to_variable(&self) -> Result<VariableSpec> {
        match self {
            ConfounderGen::Bernoulli { name, .. } => {
                VariableSpec::new(name.clone(), Role::Confounder, Kind::Binary)
            }
            ConfounderGen::Categorical { name, levels, reference, .. } => VariableSpec::new(
                name.clone(),
                Role::Confounder,
                Kind::Categorical { levels: levels.clone(), reference: reference.clone() },
            ),
            ConfounderGen::Gaussian { name, .. } => {
                VariableSpec::new(name.clone(), Role::Confounder, Kind::Continuous)
            }
        }
    }
}

/// A discrete confounder inside a finite joint table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteVar {
    pub name: String,
    #[serde(flatten)]
    pub kind: Kind,
}

/// Confounder distribution: a finite joint table or independent generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum ConfounderDist {
    /// Joint table over the cartesian product of discrete variables; the last
    /// variable varies fastest in `probs`.
    Finite {
        #[serde(default)]
        probs: Vec<f64>,
        #[serde(default, rename = "variable")]
        variables: Vec<DiscreteVar>,
    },
    Independent {
        #[serde(rename = "generator")]
        generators: Vec<ConfounderGen>,
    },
}

/// Logistic model: intercept plus coefficients keyed by encoded column name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitModel {
    pub intercept: f64,
    #[serde(default)]
    pub coefs: BTreeMap<String, f64>,
}

/// Logistic model for one binary mediator given (x, z, earlier mediators).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediatorModel {
    pub name: String,
    pub intercept: f64,
    /// Coefficient on the protected attribute.
    #[serde(default)]
    pub x: f64,
    /// Coefficients on encoded confounder columns.
    #[serde(default)]
    pub z: BTreeMap<String, f64>,
    /// Coefficients on earlier mediators in the chain.
    #[serde(default)]
    pub w: BTreeMap<String, f64>,
}

/// Linear conditional-mean model for the outcome with Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeModel {
    pub intercept: f64,
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub z: BTreeMap<String, f64>,
    #[serde(default)]
    pub w: BTreeMap<String, f64>,
    /// Interaction coefficients on x * encoded confounder columns.
    #[serde(default)]
    pub xz: BTreeMap<String, f64>,
    pub sigma: f64,
}

/// Full generative specification plus its sampling seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmSpec {
    pub name: String,
    pub seed: u64,
    #[serde(default = "default_x_name")]
    pub x_name: String,
    #[serde(default = "default_y_name")]
    pub y_name: String,
    pub confounders: ConfounderDist,
    pub x_model: LogitModel,
    #[serde(default, rename = "mediator")]
    pub mediators: Vec<MediatorModel>,
    pub outcome: OutcomeModel,
}

fn default_x_name() -> String {
    "x".into()
}

fn default_y_name() -> String {
    "y".into()
}

impl ScmSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ScmSpec =
            toml::from_str(text).map_err(|e| Error::Parse(format!("scm spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scm spec serializes")
    }

    /// Confounder variables in declaration order.
    pub fn confounder_vars(&self) -> Result<Vec<VariableSpec>> {
        match &self.confounders {
            ConfounderDist::Finite { variables, .. } => variables
                .iter()
                .map(|v| VariableSpec::new(v.name.clone(), Role::Confounder, v.kind.clone()))
                .collect(),
            ConfounderDist::Independent { generators } => {
                generators.iter().map(|g| g.to_variable()).collect()
            }
        }
    }

    /// Schema of emitted datasets: protected, confounders, mediators, outcome.
    pub fn schema(&self) -> Result<SfmSchema> {
        let mut variables =
            vec![VariableSpec::new(self.x_name.clone(), Role::Protected, Kind::Binary)?];
        variables.extend(self.confounder_vars()?);
        for m in &self.mediators {
            variables.push(VariableSpec::new(m.name.clone(), Role::Mediator, Kind::Binary)?);
        }
        variables.push(VariableSpec::new(self.y_name.clone(), Role::Outcome, Kind::Continuous)?);
        SfmSchema::new(variables, "0", "1")
    }

    pub fn validate(&self) -> Result<()> {
        let compiled = CompiledScm::new(self)?;
        if let ConfounderDist::Finite { probs, variables } = &self.confounders {
            let mut expect = 1usize;
            for v in variables {
                expect *= v
                    .kind
                    .n_levels()
                    .ok_or_else(|| Error::InvalidSchema("finite table needs discrete kinds".into()))?;
            }
            if probs.len() != expect {
                return Err(Error::InvalidSchema(format!(
                    "finite table: {} probabilities given, {} strata declared",
                    probs.len(),
                    expect
                )));
            }
            if probs.iter().any(|&p| p <= 0.0) {
                return Err(Error::InvalidSchema("stratum probabilities must be positive".into()));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidSchema(format!(
                    "stratum probabilities sum to {total}, expected 1"
                )));
            }
        }
        if let ConfounderDist::Independent { generators } = &self.confounders {
            for g in generators {
                match g {
                    ConfounderGen::Bernoulli { name, p } => {
                        if !(0.0..=1.0).contains(p) {
                            return Err(Error::InvalidSchema(format!(
                                "generator '{name}': p out of [0,1]"
                            )));
                        }
                    }
                    ConfounderGen::Categorical { name, levels, probs, .. } => {
                        if probs.len() != levels.len() || probs.iter().any(|&p| p <= 0.0) {
                            return Err(Error::InvalidSchema(format!(
                                "generator '{name}': bad level probabilities"
                            )));
                        }
                        let total: f64 = probs.iter().sum();
                        if (total - 1.0).abs() > 1e-9 {
                            return Err(Error::InvalidSchema(format!(
                                "generator '{name}': probabilities sum to {total}"
                            )));
                        }
                    }
                    ConfounderGen::Gaussian { name, sd, .. } => {
                        if *sd < 0.0 {
                            return Err(Error::InvalidSchema(format!(
                                "generator '{name}': negative sd"
                            )));
                        }
                    }
                }
            }
        }
        if self.outcome.sigma < 0.0 {
            return Err(Error::InvalidSchema("outcome sigma must be non-negative".into()));
        }
        drop(compiled);
        self.schema()?;
        Ok(())
    }
}

/// Positional form of the spec: every coefficient map resolved to indices over
/// the encoded confounder columns and the mediator chain.
#[derive(Debug, Clone)]
pub struct CompiledScm {
    pub z_vars: Vec<VariableSpec>,
    pub z_names: Vec<String>,
    pub x_intercept: f64,
    pub x_coefs: Vec<f64>,
    pub w: Vec<CompiledMediator>,
    pub y_intercept: f64,
    pub y_x: f64,
    pub y_z: Vec<f64>,
    pub y_w: Vec<f64>,
    pub y_xz: Vec<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct CompiledMediator {
    pub name: String,
    pub intercept: f64,
    pub x: f64,
    pub z: Vec<f64>,
    /// One coefficient per earlier mediator.
    pub w_prev: Vec<f64>,
}

fn align(map: &BTreeMap<String, f64>, names: &[String], what: &str) -> Result<Vec<f64>> {
    let mut out = vec![0.0; names.len()];
    for (key, &value) in map {
        let idx = names
            .iter()
            .position(|n| n == key)
            .ok_or_else(|| Error::InvalidSchema(format!("{what}: unknown column '{key}'")))?;
        out[idx] = value;
    }
    Ok(out)
}

impl CompiledScm {
    pub fn new(spec: &ScmSpec) -> Result<Self> {
        let z_vars = spec.confounder_vars()?;
        let z_names: Vec<String> = z_vars.iter().flat_map(|v| encoded_names(v)).collect();
        let mut w = Vec::with_capacity(spec.mediators.len());
        let mut seen: Vec<String> = Vec::new();
        for m in &spec.mediators {
            let w_prev = align(&m.w, &seen, &format!("mediator '{}'", m.name))?;
            w.push(CompiledMediator {
                name: m.name.clone(),
                intercept: m.intercept,
                x: m.x,
                z: align(&m.z, &z_names, &format!("mediator '{}'", m.name))?,
                w_prev,
            });
            seen.push(m.name.clone());
        }
        Ok(CompiledScm {
            w,
            x_coefs: align(&spec.x_model.coefs, &z_names, "x model")?,
            x_intercept: spec.x_model.intercept,
            y_intercept: spec.outcome.intercept,
            y_x: spec.outcome.x,
            y_z: align(&spec.outcome.z, &z_names, "outcome")?,
            y_w: align(&spec.outcome.w, &seen, "outcome")?,
            y_xz: align(&spec.outcome.xz, &z_names, "outcome interactions")?,
            sigma: spec.outcome.sigma,
            z_vars,
            z_names,
        })
    }

    /// Dummy-encode one confounder value vector.
    pub fn encode_z(&self, z_values: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.z_names.len());
        for (var, &v) in self.z_vars.iter().zip(z_values) {
            match &var.kind {
                Kind::Binary | Kind::Continuous => out.push(v),
                Kind::Categorical { levels, reference } => {
                    let ref_idx = levels.iter().position(|l| l == reference).expect("checked");
                    for (li, _) in levels.iter().enumerate() {
                        if li != ref_idx {
                            out.push(if v as usize == li { 1.0 } else { 0.0 });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn p_x1(&self, z_enc: &[f64]) -> f64 {
        let lin = self.x_intercept + dot(&self.x_coefs, z_enc);
        sigmoid(lin)
    }

    /// P(W_j = 1 | x, z, earlier mediators).
    pub fn p_w1(&self, j: usize, x: f64, z_enc: &[f64], w_prev: &[f64]) -> f64 {
        let m = &self.w[j];
        let lin = m.intercept
            + m.x * x
            + dot(&m.z, z_enc)
            + m.w_prev.iter().zip(w_prev).map(|(c, w)| c * w).sum::<f64>();
        sigmoid(lin)
    }

    /// Conditional outcome mean E[Y | x, w, z].
    pub fn mu(&self, x: f64, w: &[f64], z_enc: &[f64]) -> f64 {
        self.y_intercept
            + self.y_x * x
            + dot(&self.y_z, z_enc)
            + dot(&self.y_w, w)
            + x * dot(&self.y_xz, z_enc)
    }

    /// Probability of a full mediator vector under the chain, P(w | x, z).
    pub fn p_w_vector(&self, w: &[f64], x: f64, z_enc: &[f64]) -> f64 {
        let mut p = 1.0;
        for j in 0..self.w.len() {
            let p1 = self.p_w1(j, x, z_enc, &w[..j]);
            p *= if w[j] == 1.0 { p1 } else { 1.0 - p1 };
        }
        p
    }

    /// All 2^m mediator vectors in a fixed order (last mediator fastest).
    pub fn w_combinations(&self) -> Vec<Vec<f64>> {
        let m = self.w.len();
        let mut out = Vec::with_capacity(1 << m);
        for bits in 0..(1usize << m) {
            let combo: Vec<f64> =
                (0..m).map(|j| if bits >> (m - 1 - j) & 1 == 1 { 1.0 } else { 0.0 }).collect();
            out.push(combo);
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::reference::desk_1;

    #[test]
    fn toml_round_trip() {
        let spec = desk_1();
        let text = spec.to_toml();
        let back = ScmSpec::from_toml(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn unknown_coefficient_key_is_rejected() {
        let mut spec = desk_1();
        spec.outcome.z.insert("nonexistent".into(), 1.0);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn mediator_cannot_reference_later_mediator() {
        let mut spec = desk_1();
        let later = spec.mediators.last().unwrap().name.clone();
        spec.mediators[0].w.insert(later, 0.5);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn probability_table_must_sum_to_one() {
        let mut spec = desk_1();
        if let ConfounderDist::Finite { probs, .. } = &mut spec.confounders {
            probs[0] += 0.1;
        }
        assert!(spec.validate().is_err());
    }

    #[test]
    fn encode_z_matches_dummy_coding() {
        let spec = desk_1();
        let c = CompiledScm::new(&spec).unwrap();
        // z1=1, ses=level 2
        let enc = c.encode_z(&[1.0, 2.0]);
        assert_eq!(enc, vec![1.0, 0.0, 1.0]);
    }
}
