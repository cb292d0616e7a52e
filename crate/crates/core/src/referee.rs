//! Manuscript to ranked referee list.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorKey, ManuscriptRecord};
use crate::error::{Error, Result};
use crate::graph::{CoauthorGraph, NodeId};
use crate::swarm::{
    apply_blackout, normalize_energy, propagate, propagate_expectation, seed_particles,
    BlackoutConfig, EnergyVector, Mode, SeedMultiset, SwarmConfig,
};

/// Referenced authors split by whether the graph knows them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSet {
    pub resolved: SeedMultiset,
    pub missing: Vec<AuthorKey>,
}

pub fn build_seed_set(manuscript: &ManuscriptRecord, graph: &CoauthorGraph) -> Result<SeedSet> {
    let mut resolved = SeedMultiset::new();
    let mut missing = Vec::new();
    for (key, &count) in &manuscript.referenced_authors {
        match graph.node(key) {
            Some(node) => *resolved.entry(node).or_insert(0) += count,
            None => missing.push(key.clone()),
        }
    }
    if resolved.is_empty() {
        return Err(Error::NoSeeds {
            manuscript: manuscript.id.clone(),
        });
    }
    Ok(SeedSet { resolved, missing })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedReferee {
    pub author: AuthorKey,
    pub raw_energy: f64,
    pub membership: f64,
}

/// Parameters that produced a ranking. `blackout` is `None` whenever no
/// negative swarm actually ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub swarm: SwarmConfig,
    pub blackout: Option<BlackoutConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefereeRanking {
    pub manuscript_id: String,
    pub config: ConfigSnapshot,
    pub missing: Vec<AuthorKey>,
    pub entries: Vec<RankedReferee>,
}

impl RefereeRanking {
    pub fn membership_of(&self, author: &AuthorKey) -> f64 {
        self.entries
            .iter()
            .find(|e| &e.author == author)
            .map_or(0.0, |e| e.membership)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ranking serializes")
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(self.to_json().as_bytes())?;
        out.write_all(b"\n")
    }

    fn renormalize(&mut self) {
        let max = self
            .entries
            .iter()
            .map(|e| e.raw_energy)
            .fold(0.0, f64::max);
        for e in &mut self.entries {
            e.membership = e.raw_energy / max;
        }
    }
}

/// Energy vector for one manuscript before normalization; exposed for callers
/// that want the raw field (exports, plots).
pub fn manuscript_energy(
    manuscript: &ManuscriptRecord,
    graph: &CoauthorGraph,
    config: &SwarmConfig,
    blackout: &BlackoutConfig,
) -> Result<(SeedSet, EnergyVector)> {
    config.validate()?;
    let seeds = build_seed_set(manuscript, graph)?;
    let base = match config.mode {
        Mode::MonteCarlo => propagate(
            &seed_particles(&seeds.resolved, graph, config)?,
            graph,
            config,
        )?,
        Mode::Expectation => propagate_expectation(&seeds.resolved, graph, config)?,
    };
    let energy = if blackout.is_active() {
        let authors: BTreeSet<NodeId> = manuscript
            .authors
            .iter()
            .filter_map(|a| {
                let node = graph.node(a);
                if node.is_none() {
                    log::warn!(
                        "manuscript {}: author {a} not in graph, no blackout from it",
                        manuscript.id
                    );
                }
                node
            })
            .collect();
        apply_blackout(&base, &authors, blackout, graph, config)?
    } else {
        base
    };
    Ok((seeds, energy))
}

pub fn rank_referees(
    manuscript: &ManuscriptRecord,
    graph: &CoauthorGraph,
    config: &SwarmConfig,
    blackout: &BlackoutConfig,
) -> Result<RefereeRanking> {
    let (seeds, energy) = manuscript_energy(manuscript, graph, config, blackout)?;
    assemble_ranking(manuscript, graph, config, blackout, seeds, &energy)
}

/// Builds the ranking from a field already computed by [`manuscript_energy`].
pub fn assemble_ranking(
    manuscript: &ManuscriptRecord,
    graph: &CoauthorGraph,
    config: &SwarmConfig,
    blackout: &BlackoutConfig,
    seeds: SeedSet,
    energy: &EnergyVector,
) -> Result<RefereeRanking> {
    let membership = normalize_energy(energy)?;
    let entries = energy
        .ranked(graph)
        .into_iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(node, raw_energy)| RankedReferee {
            author: graph.key(node).clone(),
            raw_energy,
            membership: membership.get(node),
        })
        .collect();
    Ok(RefereeRanking {
        manuscript_id: manuscript.id.clone(),
        config: ConfigSnapshot {
            swarm: config.clone(),
            blackout: blackout.is_active().then(|| blackout.clone()),
        },
        missing: seeds.missing,
        entries,
    })
}

/// Drops the manuscript's own authors and rescales memberships so the new
/// maximum is 1.
pub fn exclude_authors(ranking: &RefereeRanking, manuscript: &ManuscriptRecord) -> RefereeRanking {
    let own: BTreeSet<&AuthorKey> = manuscript.authors.iter().collect();
    let mut out = ranking.clone();
    let before = out.entries.len();
    out.entries.retain(|e| !own.contains(&e.author));
    if out.entries.len() != before {
        out.renormalize();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::normalize_author_name;

    fn k(s: &str) -> AuthorKey {
        normalize_author_name(s).unwrap()
    }

    fn named_graph(names: &[&str], edges: &[(usize, usize, f64)]) -> CoauthorGraph {
        CoauthorGraph::from_edges(names.iter().map(|n| k(n)).collect(), edges.iter().copied())
            .unwrap()
    }

    fn manuscript(authors: &[&str], refs: &[&str]) -> ManuscriptRecord {
        ManuscriptRecord::new(
            "sub",
            authors.iter().map(|a| k(a)),
            refs.iter().map(|r| k(r)),
        )
    }

    fn expectation(decay: f64, steps: usize) -> SwarmConfig {
        SwarmConfig {
            decay,
            max_steps: steps,
            mode: Mode::Expectation,
            ..Default::default()
        }
    }

    fn triangle() -> CoauthorGraph {
        named_graph(&["a", "b", "c"], &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
    }

    #[test]
    fn seed_set_keeps_multiplicity_and_reports_missing() {
        let g = named_graph(&["x", "y"], &[(0, 1, 1.0)]);
        let s = build_seed_set(&manuscript(&["p"], &["x", "x", "y", "ghost"]), &g).unwrap();
        assert_eq!(
            s.resolved,
            SeedMultiset::from([(NodeId(0), 2), (NodeId(1), 1)])
        );
        assert_eq!(s.missing, vec![k("ghost")]);
    }

    #[test]
    fn seed_set_errors() {
        let g = named_graph(&["x", "y"], &[(0, 1, 1.0)]);
        assert!(matches!(
            build_seed_set(&manuscript(&["p"], &["ghost"]), &g),
            Err(Error::NoSeeds { .. })
        ));
        assert!(matches!(
            build_seed_set(&manuscript(&["p"], &[]), &g),
            Err(Error::NoSeeds { .. })
        ));
    }

    #[test]
    fn triangle_ranking() {
        let r = rank_referees(
            &manuscript(&["z"], &["a"]),
            &triangle(),
            &expectation(0.15, 3),
            &BlackoutConfig::default(),
        )
        .unwrap();
        assert_eq!(r.entries.len(), 3);
        assert_eq!(r.entries[0].author, k("a"));
        assert_eq!(r.entries[0].membership, 1.0);
        assert!((r.entries[0].raw_energy - 136.125).abs() < 1e-12);
        assert_eq!(r.entries[1].author, k("b"));
        assert_eq!(r.entries[2].author, k("c"));
        assert!((r.entries[1].membership - 60.5625 / 136.125).abs() < 1e-12);
        assert!(r.config.blackout.is_none());
    }

    #[test]
    fn triangle_blackout_leaves_nothing() {
        let out = rank_referees(
            &manuscript(&["a"], &["a"]),
            &triangle(),
            &expectation(0.15, 3),
            &BlackoutConfig::with_steps(1),
        );
        assert!(matches!(out, Err(Error::NoEnergy)));
    }

    #[test]
    fn path_locality() {
        let g = named_graph(
            &["a", "b", "c", "d", "e"],
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)],
        );
        for mode in [Mode::Expectation, Mode::MonteCarlo] {
            let cfg = SwarmConfig {
                max_steps: 2,
                mode,
                ..Default::default()
            };
            let r = rank_referees(
                &manuscript(&["q"], &["a"]),
                &g,
                &cfg,
                &BlackoutConfig::default(),
            )
            .unwrap();
            let names: Vec<_> = r.entries.iter().map(|e| e.author.clone()).collect();
            assert_eq!(names, vec![k("a"), k("b")]);
        }
    }

    #[test]
    fn zero_step_blackout_equals_disabled() {
        let g = triangle();
        let m = manuscript(&["b"], &["a", "a", "c"]);
        let cfg = SwarmConfig::default();
        let off = rank_referees(&m, &g, &cfg, &BlackoutConfig::default()).unwrap();
        let zero = rank_referees(&m, &g, &cfg, &BlackoutConfig::with_steps(0)).unwrap();
        assert_eq!(off, zero);
        assert_eq!(off.to_json(), zero.to_json());
    }

    #[test]
    fn scaling_particles_preserves_order_in_expectation() {
        let g = crate::synth::random_graph(60, 3.0, 8);
        let m = ManuscriptRecord::new(
            "s",
            [g.key(NodeId(1)).clone()],
            [5, 9, 9, 30].iter().map(|&i| g.key(NodeId(i)).clone()),
        );
        let base = expectation(0.15, 30);
        let scaled = SwarmConfig {
            particles_per_reference: 700,
            ..base.clone()
        };
        let a = rank_referees(&m, &g, &base, &BlackoutConfig::default()).unwrap();
        let b = rank_referees(&m, &g, &scaled, &BlackoutConfig::default()).unwrap();
        let order = |r: &RefereeRanking| {
            r.entries
                .iter()
                .map(|e| e.author.clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(order(&a), order(&b));
        assert!(a
            .entries
            .iter()
            .all(|e| e.raw_energy > 0.0 && (0.0..=1.0).contains(&e.membership)));
    }

    #[test]
    fn exclusion_removes_authors_and_renormalizes() {
        let r = rank_referees(
            &manuscript(&["z"], &["a"]),
            &triangle(),
            &expectation(0.15, 3),
            &BlackoutConfig::default(),
        )
        .unwrap();

        let untouched = exclude_authors(&r, &manuscript(&["nobody"], &[]));
        assert_eq!(untouched, r);

        let without_a = exclude_authors(&r, &manuscript(&["a"], &[]));
        assert_eq!(without_a.entries.len(), 2);
        assert!(without_a.entries.iter().all(|e| e.author != k("a")));
        assert_eq!(without_a.entries[0].membership, 1.0);
        assert_eq!(without_a.membership_of(&k("a")), 0.0);
    }
}
