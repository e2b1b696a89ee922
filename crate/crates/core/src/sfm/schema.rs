//! Variable roles and the four-block fairness-model schema.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Causal role of a variable in the four-node fairness template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Binary group attribute X whose disparity is decomposed.
    Protected,
    /// Pre-treatment covariate Z, possibly associated with X.
    Confounder,
    /// Post-treatment variable W on the X -> W -> Y path.
    Mediator,
    /// Continuous outcome Y.
    Outcome,
}

/// Measurement kind of a variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Kind {
    /// Values in {0, 1}.
    Binary,
    /// Finite set of labels; `reference` is omitted by dummy coding.
    Categorical { levels: Vec<String>, reference: String },
    /// Real-valued.
    Continuous,
}

impl Kind {
    pub fn is_discrete(&self) -> bool {
        !matches!(self, Kind::Continuous)
    }

    /// Number of distinct levels for discrete kinds.
    pub fn n_levels(&self) -> Option<usize> {
        match self {
            Kind::Binary => Some(2),
            Kind::Categorical { levels, .. } => Some(levels.len()),
            Kind::Continuous => None,
        }
    }
}

/// A named variable with a role and a measurement kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub role: Role,
    #[serde(flatten)]
    pub kind: Kind,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, role: Role, kind: Kind) -> Result<Self> {
        let spec = VariableSpec { name: name.into(), role, kind };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::InvalidSchema("variable name is empty".into()));
        }
        if let Kind::Categorical { levels, reference } = &self.kind {
            let mut uniq = levels.clone();
            uniq.sort();
            uniq.dedup();
            if uniq.len() != levels.len() || levels.len() < 2 {
                return Err(Error::InvalidSchema(format!(
                    "categorical '{}' needs >=2 distinct levels",
                    self.name
                )));
            }
            if !levels.contains(reference) {
                return Err(Error::InvalidSchema(format!(
                    "categorical '{}': reference '{}' not among levels",
                    self.name, reference
                )));
            }
        }
        match self.role {
            Role::Protected if self.kind != Kind::Binary => Err(Error::InvalidSchema(format!(
                "protected '{}' must be binary",
                self.name
            ))),
            Role::Outcome if self.kind != Kind::Continuous => Err(Error::InvalidSchema(format!(
                "outcome '{}' must be continuous",
                self.name
            ))),
            _ => Ok(()),
        }
    }
}

/// Role-tagged variable list plus the display labels for the two protected levels.
///
/// `x0_label` names the baseline level (stored value 0), `x1_label` the
/// comparison level (stored value 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfmSchema {
    pub variables: Vec<VariableSpec>,
    pub x0_label: String,
    pub x1_label: String,
}

impl SfmSchema {
    pub fn new(
        variables: Vec<VariableSpec>,
        x0_label: impl Into<String>,
        x1_label: impl Into<String>,
    ) -> Result<Self> {
        let schema =
            SfmSchema { variables, x0_label: x0_label.into(), x1_label: x1_label.into() };
        schema.check()?;
        Ok(schema)
    }

    fn check(&self) -> Result<()> {
        for v in &self.variables {
            v.check()?;
        }
        let n_protected = self.count_role(Role::Protected);
        let n_outcome = self.count_role(Role::Outcome);
        if n_protected != 1 {
            return Err(Error::InvalidSchema(format!(
                "need exactly one protected variable, found {n_protected}"
            )));
        }
        if n_outcome != 1 {
            return Err(Error::InvalidSchema(format!(
                "need exactly one outcome variable, found {n_outcome}"
            )));
        }
        let mut names: Vec<&str> = self.variables.iter().map(|v| v.name.as_str()).collect();
        names.sort();
        names.dedup();
        if names.len() != self.variables.len() {
            return Err(Error::InvalidSchema("variable names must be unique".into()));
        }
        if self.x0_label == self.x1_label {
            return Err(Error::InvalidSchema("x0/x1 labels must differ".into()));
        }
        Ok(())
    }

    fn count_role(&self, role: Role) -> usize {
        self.variables.iter().filter(|v| v.role == role).count()
    }

    pub fn protected(&self) -> &VariableSpec {
        self.variables.iter().find(|v| v.role == Role::Protected).expect("checked")
    }

    pub fn outcome(&self) -> &VariableSpec {
        self.variables.iter().find(|v| v.role == Role::Outcome).expect("checked")
    }

    pub fn confounders(&self) -> impl Iterator<Item = &VariableSpec> {
        self.variables.iter().filter(|v| v.role == Role::Confounder)
    }

    pub fn mediators(&self) -> impl Iterator<Item = &VariableSpec> {
        self.variables.iter().filter(|v| v.role == Role::Mediator)
    }

    pub fn variable(&self, name: &str) -> Option<&VariableSpec> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Parse a schema from its TOML representation.
    pub fn from_toml(text: &str) -> Result<Self> {
        let parsed: SchemaFile =
            toml::from_str(text).map_err(|e| Error::Parse(format!("schema: {e}")))?;
        SfmSchema::new(parsed.variable, parsed.x0_label, parsed.x1_label)
    }

    /// Serialize to TOML.
    pub fn to_toml(&self) -> String {
        let file = SchemaFile {
            x0_label: self.x0_label.clone(),
            x1_label: self.x1_label.clone(),
            variable: self.variables.clone(),
        };
        toml::to_string_pretty(&file).expect("schema serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct SchemaFile {
    x0_label: String,
    x1_label: String,
    variable: Vec<VariableSpec>,
}
