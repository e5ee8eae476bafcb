//! JSON network documents.
//!
//! ```json
//! {
//!   "format_version": "1",
//!   "name": "two-node-deterministic",
//!   "variables": [{"name": "A", "states": ["0", "1"], "parents": []}, ...],
//!   "cpts": [{"child": "A", "values": [0.5, 0.5]}, ...]
//! }
//! ```
//!
//! CPT values are listed column by column in mixed-radix parent order (last
//! parent fastest), child state fastest within a column. Floats are written in
//! shortest round-trip form, so parsing a serialized network reproduces every
//! value bit for bit.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Assignment, Cpt, Network, Variable, NORMALIZATION_TOLERANCE};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub format_version: String,
    pub name: String,
    pub variables: Vec<VariableBlock>,
    pub cpts: Vec<ProbabilityBlock>,
    /// Column-sum tolerance, present only when the network needs a looser one
    /// than the default (e.g. after importing a file with rounded tables).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization_tolerance: Option<f64>,
    /// Observed states of evidence variables whose CPTs are stored reduced.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub evidence: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableBlock {
    pub name: String,
    pub states: Vec<String>,
    #[serde(default)]
    pub parents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilityBlock {
    pub child: String,
    pub values: Vec<f64>,
}

impl NetworkDocument {
    pub fn from_network(net: &Network) -> Self {
        let vars = net.variables();
        NetworkDocument {
            format_version: FORMAT_VERSION.to_string(),
            name: net.name().to_string(),
            variables: vars
                .iter()
                .map(|v| VariableBlock {
                    name: v.name.clone(),
                    states: v.states.clone(),
                    parents: v.parents.iter().map(|&p| vars[p].name.clone()).collect(),
                })
                .collect(),
            cpts: net
                .cpts()
                .iter()
                .map(|c| ProbabilityBlock {
                    child: vars[c.child()].name.clone(),
                    values: c.values().to_vec(),
                })
                .collect(),
            normalization_tolerance: required_tolerance(net),
            evidence: net
                .evidence()
                .assigned()
                .map(|(v, s)| (vars[v].name.clone(), vars[v].states[s].clone()))
                .collect(),
        }
    }

    pub fn into_network(self) -> Result<Network> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::InvalidNetwork(format!(
                "unsupported format_version `{}`",
                self.format_version
            )));
        }
        let ids: HashMap<&str, usize> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect();
        let lookup = |name: &str| {
            ids.get(name)
                .copied()
                .ok_or_else(|| Error::InvalidNetwork(format!("unknown variable `{name}`")))
        };
        let mut variables = Vec::with_capacity(self.variables.len());
        for (i, block) in self.variables.iter().enumerate() {
            let parents = block
                .parents
                .iter()
                .map(|p| lookup(p))
                .collect::<Result<Vec<_>>>()?;
            variables.push(Variable::new(i, block.name.clone(), block.states.clone(), parents));
        }
        let mut cpts = Vec::with_capacity(self.cpts.len());
        for block in self.cpts {
            let child = lookup(&block.child)?;
            let var = &variables[child];
            cpts.push(Cpt::new(child, var.parents.clone(), var.cardinality(), block.values));
        }
        let mut evidence = Assignment::empty(variables.len());
        for (name, state) in &self.evidence {
            let var = lookup(name)?;
            let s = variables[var].state_index(state).ok_or_else(|| {
                Error::InvalidNetwork(format!("unknown state `{state}` of `{name}`"))
            })?;
            evidence.set(var, s);
        }
        let tolerance = match self.normalization_tolerance {
            None => NORMALIZATION_TOLERANCE,
            Some(t) if t > 0.0 && t <= MAX_DECLARED_TOLERANCE => t,
            Some(t) => {
                return Err(Error::InvalidNetwork(format!(
                    "normalization_tolerance {t} outside (0, {MAX_DECLARED_TOLERANCE}]"
                )))
            }
        };
        Network::from_parts(self.name, variables, cpts, evidence, tolerance)
    }
}

/// Largest tolerance a document may declare.
pub const MAX_DECLARED_TOLERANCE: f64 = 1e-6;

/// The loosest tolerance the non-evidence columns of `net` need, if the default
/// does not suffice.
fn required_tolerance(net: &Network) -> Option<f64> {
    let worst = net
        .cpts()
        .iter()
        .filter(|c| !net.is_evidence(c.child()))
        .flat_map(|c| c.columns().map(|col| (col.iter().sum::<f64>() - 1.0).abs()))
        .fold(0.0, f64::max);
    (worst > NORMALIZATION_TOLERANCE).then_some(MAX_DECLARED_TOLERANCE)
}

pub fn parse_native(text: &str) -> Result<Network> {
    let doc: NetworkDocument = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    doc.into_network()
}

pub fn serialize_native(net: &Network) -> String {
    let mut text = serde_json::to_string_pretty(&NetworkDocument::from_network(net))
        .expect("network documents always serialize");
    text.push('\n');
    text
}
