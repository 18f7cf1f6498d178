//! Report schemas. Every report embeds its configuration and seeds so a run
//! can be replayed byte-for-byte, and negative verdicts always carry a
//! machine-checkable certificate.

use serde::{Deserialize, Serialize};

use parity_matching::graph::Color;
use parity_matching::labeling::ParityTarget;
use parity_matching::matching::Matching;
use parity_matching::partition::Partition;
use parity_matching::{Edge, Side};

pub const SCHEMA_VERSION: u32 = 1;

/// Edges serialize as 1-based `[u, v, color]` triples.
pub fn edges_out(m: &Matching) -> Vec<(usize, usize, Color)> {
    m.edges()
        .iter()
        .map(|e| (e.u + 1, e.v + 1, e.color))
        .collect()
}

pub fn edges_in(edges: &[(usize, usize, Color)]) -> Vec<Edge> {
    edges
        .iter()
        .map(|&(u, v, color)| Edge::new(u - 1, v - 1, color))
        .collect()
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct SolveConfig {
    pub parity: ParityTarget,
    pub input: String,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct SolveStatsOut {
    pub components: usize,
    pub relevant_edges: usize,
    pub rotations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pm_micros: Option<u128>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct HallOut {
    pub side: String,
    pub set: Vec<usize>,
    pub neighborhood: Vec<usize>,
}

impl HallOut {
    pub fn side(&self) -> Option<Side> {
        match self.side.as_str() {
            "left" => Some(Side::Left),
            "right" => Some(Side::Right),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct SolveReport {
    pub schema_version: u32,
    pub command: String,
    pub config: SolveConfig,
    /// The input graph in `.cbg` text form, making the report
    /// self-contained for `verify`.
    pub graph: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matching: Option<Vec<(usize, usize, Color)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hall_witness: Option<HallOut>,
    pub stats: SolveStatsOut,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ExactConfig {
    pub k: usize,
    pub input: String,
    pub cap: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ExactReport {
    pub schema_version: u32,
    pub command: String,
    pub config: ExactConfig,
    pub graph: String,
    pub exists: bool,
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<Vec<(usize, usize, Color)>>,
    /// For negatives: how exhaustion was established.
    pub checked: String,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct RelaxConfig {
    pub parity: ParityTarget,
    pub input: String,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct WitnessCoordinate {
    pub u: usize,
    pub v: usize,
    pub color: Color,
    pub value: String,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct RelaxReport {
    pub schema_version: u32,
    pub command: String,
    pub config: RelaxConfig,
    pub graph: String,
    pub feasible: bool,
    pub variables: usize,
    pub degree_rows: usize,
    pub labeling_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<WitnessCoordinate>>,
    /// Infeasible verdicts carry the labeling certificate that no matching
    /// of the requested parity exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    /// Or, when no perfect matching exists at all, a Hall violator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hall_witness: Option<HallOut>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct PartitionOut {
    pub k: usize,
    pub m: usize,
    pub a_blocks: Vec<Vec<usize>>,
    pub b_blocks: Vec<Vec<usize>>,
    pub core: Vec<usize>,
}

impl PartitionOut {
    pub fn from(p: &Partition) -> Self {
        PartitionOut {
            k: p.k(),
            m: p.m(),
            a_blocks: p.a_blocks().to_vec(),
            b_blocks: p.b_blocks().to_vec(),
            core: p.core_pairs().to_vec(),
        }
    }

    pub fn to_partition(&self) -> Option<Partition> {
        Partition::new(
            self.k,
            self.m,
            self.a_blocks.clone(),
            self.b_blocks.clone(),
            self.core.clone(),
        )
        .ok()
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct SampleLine {
    pub schema_version: u32,
    pub command: String,
    pub mu: String,
    pub k: usize,
    pub m: usize,
    /// The exact seed this draw was made with.
    pub seed: u64,
    pub partition: PartitionOut,
    /// Three-violation samples: the violation core (sorted pairs).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core: Option<Vec<usize>>,
    /// Three-violation samples: the ordered tail.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<Vec<usize>>,
    /// Full-violation samples: the ordered core.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core_order: Option<Vec<usize>>,
    pub matching: Vec<(usize, usize, Color)>,
    pub labeling: String,
    pub violations: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct BoundsReport {
    pub schema_version: u32,
    pub command: String,
    pub bound_name: String,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_num: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_den: Option<String>,
    pub witness: serde_json::Value,
}
