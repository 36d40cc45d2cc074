//! Reading and writing networks, graphs and result tables.
//!
//! Grammars for every format live in `docs/formats.md`.

mod bif;
mod json;
mod text;

use std::path::Path;

use crate::asgn::AsgnNetwork;
use crate::discrete::DiscreteCbn;
use crate::error::{Error, Result};
use crate::graph::Dag;

pub use bif::{parse_bif, write_bif};
pub use json::{parse_network, serialize_network, serialize_network_as, WeightEncoding, SCHEMA_VERSION};
pub use text::{
    cpt_csv, export_dot, parse_edge_list, write_curve_csv, write_edge_list, CurveRow,
};

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkPayload {
    Discrete(DiscreteCbn),
    Asgn(AsgnNetwork),
}

impl NetworkPayload {
    pub fn dag(&self) -> &Dag {
        match self {
            NetworkPayload::Discrete(c) => c.dag(),
            NetworkPayload::Asgn(a) => a.dag(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            NetworkPayload::Discrete(_) => "discrete",
            NetworkPayload::Asgn(_) => "asgn",
        }
    }
}

/// A network with human-readable labels.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedNetwork {
    pub name: String,
    pub node_names: Vec<String>,
    /// Value labels per node; discrete networks only, optional.
    pub state_names: Option<Vec<Vec<String>>>,
    pub payload: NetworkPayload,
}

impl NamedNetwork {
    /// Labels nodes `X0, X1, ...`.
    pub fn new(name: impl Into<String>, payload: NetworkPayload) -> Self {
        let n = payload.dag().n();
        NamedNetwork {
            name: name.into(),
            node_names: (0..n).map(|v| format!("X{v}")).collect(),
            state_names: None,
            payload,
        }
    }

    pub fn dag(&self) -> &Dag {
        self.payload.dag()
    }

    pub fn n(&self) -> usize {
        self.dag().n()
    }

    pub fn discrete(&self) -> Option<&DiscreteCbn> {
        match &self.payload {
            NetworkPayload::Discrete(c) => Some(c),
            NetworkPayload::Asgn(_) => None,
        }
    }

    pub fn asgn(&self) -> Option<&AsgnNetwork> {
        match &self.payload {
            NetworkPayload::Asgn(a) => Some(a),
            NetworkPayload::Discrete(_) => None,
        }
    }

    pub fn validate_labels(&self) -> Result<()> {
        let n = self.n();
        if self.node_names.len() != n {
            return Err(Error::MalformedModel(format!(
                "{} node names for {n} nodes",
                self.node_names.len()
            )));
        }
        let mut sorted: Vec<&str> = self.node_names.iter().map(String::as_str).collect();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::MalformedModel(format!("duplicate node name {:?}", w[0])));
        }
        if let Some(states) = &self.state_names {
            let Some(cbn) = self.discrete() else {
                return Err(Error::MalformedModel("state names on a continuous network".into()));
            };
            if states.len() != n || states.iter().zip(cbn.domain_sizes()).any(|(s, &d)| s.len() != d) {
                return Err(Error::MalformedModel("state names disagree with domain sizes".into()));
            }
        }
        Ok(())
    }
}

/// Loads a `.bif` or `.json` network by extension.
pub fn load_network(path: &Path) -> Result<NamedNetwork> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("bif") => {
            let mut net = parse_bif(&text)?;
            if net.name == "unknown" || net.name.is_empty() {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    net.name = stem.to_string();
                }
            }
            Ok(net)
        }
        Some("json") => parse_network(&text),
        _ => Err(Error::Unsupported(format!(
            "cannot infer the format of {}; expected .bif or .json",
            path.display()
        ))),
    }
}
