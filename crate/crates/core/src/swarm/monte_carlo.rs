use std::collections::HashMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{EnergyVector, Particle, SwarmConfig};
use crate::error::Result;
use crate::graph::CoauthorGraph;
use crate::numeric::CompensatedSum;

/// Particles per work unit. Fixed so that merge order never depends on the
/// number of threads.
const BLOCK: usize = 256;

/// Negative swarms draw from streams `BLACKOUT_STREAM_BASE + i`, disjoint
/// from the positive swarm's `0..|P|`.
pub(crate) const BLACKOUT_STREAM_BASE: u64 = 1 << 63;

/// Runs every particle for `config.max_steps` steps and returns the summed
/// deposits.
pub fn propagate(
    particles: &[Particle],
    graph: &CoauthorGraph,
    config: &SwarmConfig,
) -> Result<EnergyVector> {
    config.validate()?;
    Ok(run(particles, graph, config.max_steps, config.rng_seed, 0))
}

type BlockSums = Vec<(u32, CompensatedSum)>;

fn run_block(
    block: &[Particle],
    first: u64,
    graph: &CoauthorGraph,
    steps: usize,
    base_rng: &ChaCha8Rng,
) -> BlockSums {
    let mut deposits: Vec<(u32, f64)> = Vec::with_capacity(block.len() * steps.min(64));
    for (offset, particle) in block.iter().enumerate() {
        let mut rng = base_rng.clone();
        rng.set_stream(first + offset as u64);
        let mut p = *particle;
        for _ in 0..steps {
            match p.step(graph, &mut rng) {
                Some((node, energy)) => deposits.push((node.0, energy)),
                None => break,
            }
        }
    }
    // stable: keeps particle-then-step order within a node
    deposits.sort_by_key(|d| d.0);
    let mut sums: BlockSums = Vec::new();
    for (node, energy) in deposits {
        match sums.last_mut() {
            Some((n, s)) if *n == node => s.add(energy),
            _ => {
                let mut s = CompensatedSum::default();
                s.add(energy);
                sums.push((node, s));
            }
        }
    }
    sums
}

pub(crate) fn run(
    particles: &[Particle],
    graph: &CoauthorGraph,
    steps: usize,
    seed: u64,
    stream_base: u64,
) -> EnergyVector {
    let base_rng = ChaCha8Rng::seed_from_u64(seed);
    let work = |(i, block): (usize, &[Particle])| {
        run_block(
            block,
            stream_base + (i * BLOCK) as u64,
            graph,
            steps,
            &base_rng,
        )
    };

    #[cfg(feature = "parallel")]
    let blocks: Vec<BlockSums> = particles.par_chunks(BLOCK).enumerate().map(work).collect();
    #[cfg(not(feature = "parallel"))]
    let blocks: Vec<BlockSums> = particles.chunks(BLOCK).enumerate().map(work).collect();

    let mut totals: HashMap<u32, CompensatedSum> = HashMap::new();
    for block in &blocks {
        for (node, sum) in block {
            totals.entry(*node).or_default().merge(sum);
        }
    }
    totals
        .into_iter()
        .map(|(n, s)| (crate::graph::NodeId(n), s.value()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::tests::graph;
    use super::super::{seed_particles, Mode, SeedMultiset};
    use super::*;
    use crate::graph::NodeId;

    #[test]
    fn forced_two_node_path() {
        let g = graph(2, &[(0, 1, 1.0)]);
        let cfg = SwarmConfig {
            decay: 0.0,
            max_steps: 2,
            particles_per_reference: 1,
            ..Default::default()
        };
        let p = seed_particles(&SeedMultiset::from([(NodeId(0), 1)]), &g, &cfg).unwrap();
        assert_eq!(p.len(), 1);
        let e = propagate(&p, &g, &cfg).unwrap();
        assert_eq!(e.get(NodeId(0)), 1.0);
        assert_eq!(e.get(NodeId(1)), 1.0);
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let g = graph(
            5,
            &[
                (0, 1, 1.0),
                (1, 2, 2.0),
                (2, 3, 1.0),
                (3, 4, 1.0),
                (4, 0, 3.0),
                (1, 3, 1.0),
            ],
        );
        let cfg = SwarmConfig {
            rng_seed: 99,
            ..Default::default()
        };
        let p = seed_particles(
            &SeedMultiset::from([(NodeId(0), 3), (NodeId(2), 1)]),
            &g,
            &cfg,
        )
        .unwrap();
        let a = propagate(&p, &g, &cfg).unwrap();
        let b = propagate(&p, &g, &cfg).unwrap();
        assert_eq!(a, b);
        let other = propagate(
            &p,
            &g,
            &SwarmConfig {
                rng_seed: 100,
                ..cfg.clone()
            },
        )
        .unwrap();
        assert_ne!(a, other);
        assert_eq!(cfg.mode, Mode::MonteCarlo);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn thread_count_does_not_change_output() {
        let g = crate::synth::random_graph(300, 5.0, 3);
        let cfg = SwarmConfig {
            rng_seed: 5,
            ..Default::default()
        };
        let seeds: SeedMultiset = (0..20)
            .map(|i| (NodeId(i * 7), 1 + (i as usize % 3)))
            .collect();
        let p = seed_particles(&seeds, &g, &cfg).unwrap();
        let run_with = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| propagate(&p, &g, &cfg).unwrap())
        };
        let one = run_with(1);
        for t in [2, 3, 8] {
            let other = run_with(t);
            assert!(one
                .iter()
                .zip(other.iter())
                .all(|(a, b)| a.0 == b.0 && a.1.to_bits() == b.1.to_bits()));
            assert_eq!(one.len(), other.len());
        }
    }

    #[test]
    fn energy_magnitude_never_increases() {
        let g = graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for decay in [0.0, 0.15, 0.7, 1.0] {
            for start in [1.0, -1000.0] {
                let mut p = Particle {
                    energy: start,
                    decay,
                    location: NodeId(1),
                };
                let mut prev = p.energy.abs();
                for _ in 0..200 {
                    let Some((_, e)) = p.step(&g, &mut rng) else {
                        break;
                    };
                    assert!(e.abs() <= prev);
                    assert!(p.energy.abs() <= e.abs());
                    prev = p.energy.abs();
                }
            }
        }
    }
}
