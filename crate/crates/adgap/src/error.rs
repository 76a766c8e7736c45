//! Crate-wide error type.

use crate::sets::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),

    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: NodeId, n: u32 },

    #[error("exact enumeration over {edges} edges exceeds the cap of {cap} (2^{edges} live-edge graphs)")]
    EnumerationCap { edges: u32, cap: u32 },

    #[error("subset search over {needed} candidate sets exceeds the cap of {cap}")]
    SearchCap { needed: u128, cap: u64 },

    #[error("budget {k} exceeds the node count {n}")]
    BudgetTooLarge { k: u32, n: u32 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("partial realization is inconsistent with every positive-probability live-edge graph")]
    InconsistentRealization,

    #[error("policy violated its contract: {0}")]
    PolicyContract(String),

    #[error("marginal vector sums to {sum} but the budget is {k}")]
    MarginalBudget { sum: f64, k: u32 },

    #[error("bound undefined for these inputs: {0}")]
    BoundDomain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
