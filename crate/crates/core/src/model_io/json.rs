//! Native JSON schema, versioned.

use serde::{Deserialize, Serialize};

use super::{NamedNetwork, NetworkPayload};
use crate::asgn::{AsgnNetwork, NoiseKind};
use crate::discrete::{Cpt, DiscreteCbn};
use crate::error::{Error, Result};
use crate::graph::Dag;

pub const SCHEMA_VERSION: u32 = 1;

/// Storage for the weight matrix of a continuous network.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum WeightEncoding {
    /// `[parent, child, weight]` per edge.
    #[default]
    Sparse,
    /// `n x n` rows, row = child.
    Dense,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum Weights {
    Sparse(Vec<(usize, usize, f64)>),
    Dense(Vec<Vec<f64>>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum Doc {
    Discrete {
        schema_version: u32,
        name: String,
        node_names: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state_names: Option<Vec<Vec<String>>>,
        edges: Vec<(usize, usize)>,
        domain_sizes: Vec<usize>,
        /// Per node, one row per parent configuration, lowest-id parent
        /// varying fastest.
        cpts: Vec<Vec<Vec<f64>>>,
    },
    Asgn {
        schema_version: u32,
        name: String,
        node_names: Vec<String>,
        edges: Vec<(usize, usize)>,
        weights: Weights,
        noise_variances: Vec<f64>,
        noise_kind: NoiseKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intervention_variances: Option<Vec<f64>>,
    },
}

pub fn serialize_network(net: &NamedNetwork) -> Result<String> {
    serialize_network_as(net, WeightEncoding::default())
}

pub fn serialize_network_as(net: &NamedNetwork, encoding: WeightEncoding) -> Result<String> {
    net.validate_labels()?;
    let doc = match &net.payload {
        NetworkPayload::Discrete(cbn) => Doc::Discrete {
            schema_version: SCHEMA_VERSION,
            name: net.name.clone(),
            node_names: net.node_names.clone(),
            state_names: net.state_names.clone(),
            edges: cbn.dag().edges(),
            domain_sizes: cbn.domain_sizes().to_vec(),
            cpts: cbn
                .cpts()
                .iter()
                .map(|c| c.rows().map(<[f64]>::to_vec).collect())
                .collect(),
        },
        NetworkPayload::Asgn(a) => {
            let n = a.n();
            let weights = match encoding {
                WeightEncoding::Sparse => {
                    Weights::Sparse(a.dag().edges().into_iter().map(|(u, v)| (u, v, a.weight(v, u))).collect())
                }
                WeightEncoding::Dense => Weights::Dense(a.weights().chunks(n.max(1)).map(<[f64]>::to_vec).collect()),
            };
            Doc::Asgn {
                schema_version: SCHEMA_VERSION,
                name: net.name.clone(),
                node_names: net.node_names.clone(),
                edges: a.dag().edges(),
                weights,
                noise_variances: a.noise_variances().to_vec(),
                noise_kind: a.noise_kind(),
                intervention_variances: a.intervention_variances().map(<[f64]>::to_vec),
            }
        }
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

pub fn parse_network(text: &str) -> Result<NamedNetwork> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let found = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::MalformedModel("missing schema_version".into()))?;
    if found != u64::from(SCHEMA_VERSION) {
        return Err(Error::SchemaVersion {
            found: u32::try_from(found).unwrap_or(u32::MAX),
            expected: SCHEMA_VERSION,
        });
    }
    let doc: Doc = serde_json::from_value(value)?;
    let net = match doc {
        Doc::Discrete {
            name,
            node_names,
            state_names,
            edges,
            domain_sizes,
            cpts,
            ..
        } => {
            let n = node_names.len();
            let dag = Dag::new(n, edges)?;
            if cpts.len() != n || domain_sizes.len() != n {
                return Err(Error::MalformedModel(format!(
                    "{} CPTs and {} domain sizes for {n} nodes",
                    cpts.len(),
                    domain_sizes.len()
                )));
            }
            let cpts = cpts
                .into_iter()
                .zip(&domain_sizes)
                .map(|(rows, &d)| Cpt::new(d, rows.concat()))
                .collect::<Result<Vec<_>>>()?;
            NamedNetwork {
                name,
                node_names,
                state_names,
                payload: NetworkPayload::Discrete(DiscreteCbn::new(dag, domain_sizes, cpts)?),
            }
        }
        Doc::Asgn {
            name,
            node_names,
            edges,
            weights,
            noise_variances,
            noise_kind,
            intervention_variances,
            ..
        } => {
            let n = node_names.len();
            let dag = Dag::new(n, edges)?;
            let dense = match weights {
                Weights::Dense(rows) => {
                    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                        return Err(Error::MalformedModel(format!("dense weights must be {n}x{n}")));
                    }
                    rows.concat()
                }
                Weights::Sparse(triples) => {
                    let mut w = vec![0.0; n * n];
                    for (u, v, x) in triples {
                        if u >= n || v >= n {
                            return Err(Error::MalformedModel(format!("weight on ({u}, {v}) out of range")));
                        }
                        w[v * n + u] = x;
                    }
                    w
                }
            };
            let net = AsgnNetwork::new(dag, dense, noise_variances, noise_kind)?
                .with_intervention_variances(intervention_variances)?;
            NamedNetwork {
                name,
                node_names,
                state_names: None,
                payload: NetworkPayload::Asgn(net),
            }
        }
    };
    net.validate_labels()?;
    Ok(net)
}
