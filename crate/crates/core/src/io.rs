//! JSON formats for instances and partitions.
//!
//! An instance file looks like
//! `{"n": 3, "edges": [[0, 1], [1, 2]], "weights": [[0, 2, 1.5]], "constraint": "independent-set"}`.
//! The constraint may be omitted and supplied separately. A partition file
//! looks like `{"parts": [[0], [1, 2]]}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GcmcError, Result};
use crate::graph::{Constraint, ConstraintGraph, Instance, Vertex, VertexSet, WeightFunction};
use crate::minor::VertexPartition;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    #[serde(default)]
    pub edges: Vec<(Vertex, Vertex)>,
    #[serde(default)]
    pub weights: Vec<(Vertex, Vertex, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub parts: Vec<Vec<Vertex>>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| GcmcError::Io { path: path.display().to_string(), source })
}

impl InstanceFile {
    /// Build the instance. `constraint` overrides the file's own field.
    pub fn into_instance(self, constraint: Option<Constraint>) -> Result<Instance> {
        let c = constraint
            .or(self.constraint)
            .ok_or_else(|| GcmcError::Parse("no constraint in the file or on the command line".into()))?;
        let graph = ConstraintGraph::new(self.n, self.edges)?;
        let weights = WeightFunction::new(self.n, self.weights)?;
        Instance::new(graph, weights, c)
    }

    pub fn from_instance(instance: &Instance) -> Self {
        InstanceFile {
            n: instance.n(),
            edges: instance.graph.edges().to_vec(),
            weights: instance.weights.entries().map(|((u, v), w)| (u, v, w)).collect(),
            constraint: Some(instance.constraint),
        }
    }
}

pub fn parse_instance(text: &str, constraint: Option<Constraint>) -> Result<Instance> {
    serde_json::from_str::<InstanceFile>(text)?.into_instance(constraint)
}

pub fn load_instance(path: &Path, constraint: Option<Constraint>) -> Result<Instance> {
    parse_instance(&read(path)?, constraint)
}

pub fn instance_to_json(instance: &Instance) -> String {
    serde_json::to_string(&InstanceFile::from_instance(instance)).expect("instance serializes")
}

pub fn parse_partition(text: &str, n: usize) -> Result<VertexPartition> {
    let file: PartitionFile = serde_json::from_str(text)?;
    let mut parts = Vec::with_capacity(file.parts.len());
    for p in file.parts {
        if let Some(&v) = p.iter().find(|&&v| v >= n) {
            return Err(GcmcError::VertexOutOfRange { vertex: v, n });
        }
        let set: VertexSet = p.iter().copied().collect();
        if set.len() != p.len() {
            return Err(GcmcError::InvalidPartition("a part lists a vertex twice".into()));
        }
        parts.push(set);
    }
    VertexPartition::new(n, parts)
}

pub fn load_partition(path: &Path, n: usize) -> Result<VertexPartition> {
    parse_partition(&read(path)?, n)
}
