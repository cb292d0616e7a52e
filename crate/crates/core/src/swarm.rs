//! Decaying particle swarms over the co-authorship network.
//!
//! Each particle carries an energy value, a decay rate, and a location. On
//! every step a live particle adds its current energy to its location's
//! accumulator, multiplies its energy by `1 - decay`, and then moves along an
//! outgoing edge chosen with the edge's transition probability. A particle at
//! a node with no edges dies after depositing. After `k` steps a particle that
//! started with energy `e` has deposited `e * (1 - decay)^(t - 1)` at the node
//! it occupied before step `t`, for `t = 1..=k`.
//!
//! Two engines compute the accumulated energy vector:
//!
//! * [`propagate`] simulates the particles. Particle `i` draws from its own
//!   ChaCha stream keyed by `(rng_seed, i)`, so results do not depend on how
//!   the work is scheduled across threads.
//! * [`propagate_expectation`] advances the exact mass distribution instead,
//!   which is the infinite-population limit of the simulation.

mod expectation;
mod monte_carlo;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CoauthorGraph, NodeId};
use crate::numeric::CompensatedSum;

pub use expectation::propagate_expectation;
pub use monte_carlo::propagate;

/// Node to multiplicity. Iteration order fixes particle numbering.
pub type SeedMultiset = BTreeMap<NodeId, usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    MonteCarlo,
    Expectation,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monte_carlo" | "monte-carlo" | "mc" => Ok(Mode::MonteCarlo),
            "expectation" | "exact" => Ok(Mode::Expectation),
            other => Err(Error::InvalidConfig(format!(
                "unknown propagation mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmConfig {
    pub particles_per_reference: usize,
    pub initial_energy: f64,
    pub decay: f64,
    pub max_steps: usize,
    pub rng_seed: u64,
    pub mode: Mode,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            particles_per_reference: 100,
            initial_energy: 1.0,
            decay: 0.15,
            max_steps: 100,
            rng_seed: 0,
            mode: Mode::MonteCarlo,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.particles_per_reference == 0 {
            return bad("particles_per_reference must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.decay) {
            return bad(format!("decay {} outside [0, 1]", self.decay));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        if !self.initial_energy.is_finite() || self.initial_energy == 0.0 {
            return bad(format!(
                "initial_energy {} must be finite and nonzero",
                self.initial_energy
            ));
        }
        Ok(())
    }

    /// Energy deposited by one particle that survives all `max_steps` steps.
    pub fn lifetime_energy(&self) -> f64 {
        if self.decay == 0.0 {
            self.initial_energy * self.max_steps as f64
        } else {
            self.initial_energy * (1.0 - (1.0 - self.decay).powi(self.max_steps as i32))
                / self.decay
        }
    }
}

/// Negative-energy swarm launched from a manuscript's own authors.
///
/// With `steps = k_b >= 1` the particles make `k_b` moves and deposit at the
/// author nodes and at every node they reach, so zero decay and a dominant
/// energy wipe out exactly the `k_b`-hop neighborhood. `k_b = 0` disables it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlackoutConfig {
    pub enabled: bool,
    pub energy: f64,
    pub decay: f64,
    pub steps: usize,
    pub particles_per_author: usize,
}

impl Default for BlackoutConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            energy: -1000.0,
            decay: 0.0,
            steps: 2,
            particles_per_author: 100,
        }
    }
}

impl BlackoutConfig {
    pub fn with_steps(steps: usize) -> Self {
        Self {
            enabled: true,
            steps,
            ..Self::default()
        }
    }

    pub fn is_active(&self) -> bool {
        self.enabled && self.steps > 0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.energy.is_finite() && self.energy < 0.0) {
            return Err(Error::InvalidConfig(format!(
                "blackout energy {} must be negative",
                self.energy
            )));
        }
        if !(0.0..=1.0).contains(&self.decay) {
            return Err(Error::InvalidConfig(format!(
                "blackout decay {} outside [0, 1]",
                self.decay
            )));
        }
        if self.particles_per_author == 0 {
            return Err(Error::InvalidConfig(
                "particles_per_author must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub energy: f64,
    pub decay: f64,
    pub location: NodeId,
}

impl Particle {
    pub fn is_live(&self) -> bool {
        self.energy != 0.0
    }

    /// One step: returns the deposit `(node, energy)`, or `None` if the
    /// particle is already dead.
    #[inline]
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        graph: &CoauthorGraph,
        rng: &mut R,
    ) -> Option<(NodeId, f64)> {
        if self.energy == 0.0 {
            return None;
        }
        let deposit = (self.location, self.energy);
        self.energy *= 1.0 - self.decay;
        if graph.out_degree(self.location) == 0 {
            self.energy = 0.0;
        } else if self.energy != 0.0 {
            // sample_neighbor only returns None at sinks
            self.location = graph.sample_neighbor(self.location, rng.random()).unwrap();
        }
        Some(deposit)
    }
}

/// One particle group per seed node, `multiplicity * particles_per_reference`
/// particles each, in ascending node order.
pub fn seed_particles(
    seeds: &SeedMultiset,
    graph: &CoauthorGraph,
    config: &SwarmConfig,
) -> Result<Vec<Particle>> {
    config.validate()?;
    check_seeds(seeds, graph)?;
    let mut particles =
        Vec::with_capacity(seeds.values().sum::<usize>() * config.particles_per_reference);
    for (&node, &count) in seeds {
        let p = Particle {
            energy: config.initial_energy,
            decay: config.decay,
            location: node,
        };
        particles.extend(std::iter::repeat_n(
            p,
            count * config.particles_per_reference,
        ));
    }
    Ok(particles)
}

fn check_seeds(seeds: &SeedMultiset, graph: &CoauthorGraph) -> Result<()> {
    if seeds.values().all(|&c| c == 0) {
        return Err(Error::EmptySeed);
    }
    match seeds.keys().find(|n| !graph.contains(**n)) {
        Some(&n) => Err(Error::UnknownNode(n)),
        None => Ok(()),
    }
}

/// Sparse accumulated energy per node. Never holds an explicit zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyVector {
    entries: BTreeMap<NodeId, f64>,
}

impl EnergyVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, node: NodeId) -> f64 {
        self.entries.get(&node).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.entries.iter().map(|(&n, &e)| (n, e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> BTreeSet<NodeId> {
        self.entries.keys().copied().collect()
    }

    /// Compensated sum of all entries.
    pub fn total(&self) -> f64 {
        self.entries
            .values()
            .copied()
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn max(&self) -> Option<f64> {
        self.entries.values().copied().reduce(f64::max)
    }

    /// Entries sorted by energy descending, ties by author key ascending.
    pub fn ranked(&self, graph: &CoauthorGraph) -> Vec<(NodeId, f64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| graph.key(a.0).cmp(graph.key(b.0)))
        });
        v
    }

    /// Writes `author_key<TAB>energy` lines in [`ranked`](Self::ranked) order.
    pub fn write_tsv<W: Write>(&self, graph: &CoauthorGraph, mut out: W) -> std::io::Result<()> {
        for (node, energy) in self.ranked(graph) {
            writeln!(out, "{}\t{}", graph.key(node), energy)?;
        }
        Ok(())
    }

    fn clamp_nonpositive(mut self) -> Self {
        self.entries.retain(|_, e| *e > 0.0);
        self
    }
}

impl FromIterator<(NodeId, f64)> for EnergyVector {
    /// Later entries for the same node are added to earlier ones.
    fn from_iter<I: IntoIterator<Item = (NodeId, f64)>>(iter: I) -> Self {
        let mut entries = BTreeMap::new();
        for (n, e) in iter {
            *entries.entry(n).or_insert(0.0) += e;
        }
        entries.retain(|_, e: &mut f64| *e != 0.0);
        Self { entries }
    }
}

/// Divides every entry by the largest one.
pub fn normalize_energy(energy: &EnergyVector) -> Result<EnergyVector> {
    let max = energy.max().filter(|m| *m > 0.0).ok_or(Error::NoEnergy)?;
    Ok(EnergyVector {
        entries: energy.entries.iter().map(|(&n, &e)| (n, e / max)).collect(),
    })
}

/// Adds the negative swarm from `authors` to `base` and clamps every
/// nonpositive total away.
pub fn apply_blackout(
    base: &EnergyVector,
    authors: &BTreeSet<NodeId>,
    blackout: &BlackoutConfig,
    graph: &CoauthorGraph,
    config: &SwarmConfig,
) -> Result<EnergyVector> {
    if !blackout.is_active() {
        return Ok(base.clone());
    }
    blackout.validate()?;
    let mut seeds = SeedMultiset::new();
    for &a in authors {
        if graph.contains(a) {
            seeds.insert(a, 1);
        } else {
            warn!("skipping blackout author {a}: not in graph");
        }
    }
    if seeds.is_empty() {
        return Ok(base.clone());
    }
    let steps = blackout.steps + 1;
    let negative = match config.mode {
        Mode::Expectation => expectation::expected_deposits(
            seeds
                .keys()
                .map(|&n| (n, blackout.particles_per_author as f64 * blackout.energy)),
            graph,
            blackout.decay,
            steps,
        ),
        Mode::MonteCarlo => {
            let particles: Vec<Particle> = seeds
                .keys()
                .flat_map(|&n| {
                    std::iter::repeat_n(
                        Particle {
                            energy: blackout.energy,
                            decay: blackout.decay,
                            location: n,
                        },
                        blackout.particles_per_author,
                    )
                })
                .collect();
            monte_carlo::run(
                &particles,
                graph,
                steps,
                config.rng_seed,
                monte_carlo::BLACKOUT_STREAM_BASE,
            )
        }
    };
    let combined: EnergyVector = base.iter().chain(negative.iter()).collect();
    Ok(combined.clamp_nonpositive())
}
