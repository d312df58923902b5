use std::collections::BTreeMap;

use crate::graph::NodeId;
use crate::particle::StateVector;

/// Euclidean `(x, y)` distance per node present in `truth`; missing
/// estimates count as infinitely far.
pub fn node_position_errors(
    estimates: &BTreeMap<NodeId, StateVector>,
    truth: &BTreeMap<NodeId, StateVector>,
) -> BTreeMap<NodeId, f64> {
    truth
        .iter()
        .map(|(id, t)| {
            let e = estimates.get(id).map_or(f64::INFINITY, |e| {
                ((e[0] - t[0]).powi(2) + (e[1] - t[1]).powi(2)).sqrt()
            });
            (*id, e)
        })
        .collect()
}

/// Mean `(x, y)` error over all nodes in `truth`.
pub fn mle_position_error(estimates: &BTreeMap<NodeId, StateVector>, truth: &BTreeMap<NodeId, StateVector>) -> f64 {
    let errors = node_position_errors(estimates, truth);
    errors.values().sum::<f64>() / errors.len().max(1) as f64
}
