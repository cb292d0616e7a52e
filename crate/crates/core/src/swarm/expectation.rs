use super::{check_seeds, EnergyVector, SeedMultiset, SwarmConfig};
use crate::error::Result;
use crate::graph::{CoauthorGraph, NodeId};

/// Exact expected deposits of the swarm seeded by `seeds`.
///
/// Tracks the particle mass on every node. Step `t` deposits
/// `(1 - decay)^(t - 1)` times the current mass, then pushes the mass along
/// the transition probabilities; mass sitting on a sink is dropped after it
/// deposits.
pub fn propagate_expectation(
    seeds: &SeedMultiset,
    graph: &CoauthorGraph,
    config: &SwarmConfig,
) -> Result<EnergyVector> {
    config.validate()?;
    check_seeds(seeds, graph)?;
    let per_seed = config.particles_per_reference as f64 * config.initial_energy;
    Ok(expected_deposits(
        seeds
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(&n, &c)| (n, c as f64 * per_seed)),
        graph,
        config.decay,
        config.max_steps,
    ))
}

/// `initial` gives starting energy mass per node (particle count times
/// initial particle energy).
pub(crate) fn expected_deposits(
    initial: impl IntoIterator<Item = (NodeId, f64)>,
    graph: &CoauthorGraph,
    decay: f64,
    steps: usize,
) -> EnergyVector {
    let n = graph.node_count();
    let mut mass = vec![0.0f64; n];
    let mut next = vec![0.0f64; n];
    let mut queued = vec![false; n];
    let mut acc = vec![0.0f64; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut touched_flag = vec![false; n];

    let mut active: Vec<u32> = Vec::new();
    for (node, m) in initial {
        let i = node.index();
        if !queued[i] {
            queued[i] = true;
            active.push(node.0);
        }
        mass[i] += m;
    }
    for &v in &active {
        queued[v as usize] = false;
    }

    let retain = 1.0 - decay;
    let mut factor = 1.0;
    let mut next_active: Vec<u32> = Vec::new();
    for t in 1..=steps {
        for &v in &active {
            let i = v as usize;
            if !touched_flag[i] {
                touched_flag[i] = true;
                touched.push(v);
            }
            acc[i] += factor * mass[i];
        }
        factor *= retain;
        if t == steps || factor == 0.0 {
            break;
        }
        next_active.clear();
        for &v in &active {
            let m = std::mem::take(&mut mass[v as usize]);
            let (targets, prob) = graph.row(NodeId(v));
            for (&target, &p) in targets.iter().zip(prob) {
                let j = target.index();
                if !queued[j] {
                    queued[j] = true;
                    next_active.push(target.0);
                }
                next[j] += m * p;
            }
        }
        std::mem::swap(&mut mass, &mut next);
        std::mem::swap(&mut active, &mut next_active);
        for &v in &active {
            queued[v as usize] = false;
        }
        if active.is_empty() {
            break;
        }
    }

    touched
        .into_iter()
        .map(|v| (NodeId(v), acc[v as usize]))
        .collect()
}
