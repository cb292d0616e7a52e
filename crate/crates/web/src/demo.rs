//! Everything the page needs, as plain Rust so it can be tested natively.

use std::collections::{BTreeMap, BTreeSet};

use refswarm::corpus::AuthorKey;
use refswarm::eval::{aggregate_energies, check_ordering, ks_two_sample, recall_table, BidCode};
use refswarm::graph::{build_graph, CoauthorGraph};
use refswarm::referee::{build_seed_set, rank_referees, RefereeRanking};
use refswarm::swarm::{BlackoutConfig, Mode, SwarmConfig};
use refswarm::synth::{planted_bundle, PlantedBundle, PlantedConfig};
use serde::Serialize;

/// Remaining energy of one particle at each step `1..=steps`.
pub fn decay_curve(decay: f64, steps: usize) -> Result<Vec<f64>, String> {
    SwarmConfig {
        decay,
        max_steps: steps,
        ..SwarmConfig::default()
    }
    .validate()
    .map_err(|e| e.to_string())?;
    Ok((0..steps).map(|t| (1.0 - decay).powi(t as i32)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Researcher,
    Committee,
    SubmissionAuthor,
}

/// Knobs exposed on the page.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub decay: f64,
    pub steps: usize,
    pub expectation: bool,
    pub blackout_steps: usize,
}

impl Params {
    fn configs(&self) -> (SwarmConfig, BlackoutConfig) {
        let mode = if self.expectation {
            Mode::Expectation
        } else {
            Mode::MonteCarlo
        };
        (
            SwarmConfig {
                decay: self.decay,
                max_steps: self.steps,
                mode,
                ..SwarmConfig::default()
            },
            BlackoutConfig::with_steps(self.blackout_steps),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankView {
    /// Membership per node id, 0 where no energy arrived.
    pub membership: Vec<f64>,
    pub seeds: Vec<u32>,
    pub authors: Vec<u32>,
    pub top: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalView {
    pub counts: [usize; 4],
    pub means: [f64; 4],
    pub recall: [f64; 4],
    pub p12: f64,
    pub p13: f64,
    pub p23: f64,
    pub verdict: String,
    pub unranked: usize,
}

pub struct Demo {
    bundle: PlantedBundle,
    graph: CoauthorGraph,
    roles: Vec<Role>,
    positions: Vec<[f64; 2]>,
}

pub fn demo_config() -> PlantedConfig {
    PlantedConfig {
        topics: 5,
        core_per_topic: 12,
        pc_per_topic: 4,
        papers_per_topic: 30,
        bridge_papers: 8,
        submissions: 10,
        authors_per_submission: 2,
        references_per_submission: 6,
        self_citations: 1,
        max_conflicts: 2,
    }
}

impl Demo {
    pub fn new(seed: u64) -> Self {
        let bundle = planted_bundle(&demo_config(), seed);
        let graph = build_graph(&bundle.background);
        let committee: BTreeSet<&AuthorKey> = bundle.pc_members.iter().collect();
        let submitters: BTreeSet<&AuthorKey> = bundle
            .submissions
            .manuscripts()
            .iter()
            .flat_map(|m| m.authors.iter())
            .collect();
        let roles = graph
            .keys()
            .iter()
            .map(|k| {
                if committee.contains(k) {
                    Role::Committee
                } else if submitters.contains(k) {
                    Role::SubmissionAuthor
                } else {
                    Role::Researcher
                }
            })
            .collect();
        let positions = layout(&graph, 300);
        Self {
            bundle,
            graph,
            roles,
            positions,
        }
    }

    pub fn graph(&self) -> &CoauthorGraph {
        &self.graph
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    /// Coordinates in `[0, 1]^2`.
    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    /// Undirected edges as `(a, b, raw_weight)` with `a < b`.
    pub fn edges(&self) -> Vec<(u32, u32, f64)> {
        self.graph
            .nodes()
            .flat_map(|a| {
                self.graph
                    .neighbors(a)
                    .filter(move |e| a < e.target)
                    .map(move |e| (a.0, e.target.0, e.raw_weight))
            })
            .collect()
    }

    pub fn submission_ids(&self) -> Vec<String> {
        self.bundle
            .submissions
            .manuscripts()
            .iter()
            .map(|m| m.id.clone())
            .collect()
    }

    fn ids(&self, keys: impl Iterator<Item = AuthorKey>) -> Vec<u32> {
        let set: BTreeSet<u32> = keys
            .filter_map(|k| self.graph.node(&k))
            .map(|n| n.0)
            .collect();
        set.into_iter().collect()
    }

    pub fn rank(&self, submission: usize, params: Params) -> Result<RankView, String> {
        let m = self
            .bundle
            .submissions
            .manuscripts()
            .get(submission)
            .ok_or("no such submission")?;
        let (swarm, blackout) = params.configs();
        let seeds = build_seed_set(m, &self.graph).map_err(|e| e.to_string())?;
        let mut membership = vec![0.0; self.graph.node_count()];
        let top = match rank_referees(m, &self.graph, &swarm, &blackout) {
            Ok(r) => {
                for e in &r.entries {
                    membership[self.graph.node(&e.author).unwrap().index()] = e.membership;
                }
                r.entries
                    .iter()
                    .take(10)
                    .map(|e| (e.author.to_string(), e.membership))
                    .collect()
            }
            Err(refswarm::Error::NoEnergy) => Vec::new(),
            Err(e) => return Err(e.to_string()),
        };
        Ok(RankView {
            membership,
            seeds: seeds.resolved.keys().map(|n| n.0).collect(),
            authors: self.ids(m.authors.iter().cloned()),
            top,
        })
    }

    pub fn evaluate(&self, params: Params) -> Result<EvalView, String> {
        let (swarm, blackout) = params.configs();
        let mut rankings: BTreeMap<String, RefereeRanking> = BTreeMap::new();
        let mut unranked = BTreeSet::new();
        for m in self.bundle.submissions.manuscripts() {
            match rank_referees(m, &self.graph, &swarm, &blackout) {
                Ok(r) => {
                    rankings.insert(m.id.clone(), r);
                }
                Err(refswarm::Error::NoSeeds { .. } | refswarm::Error::NoEnergy) => {
                    unranked.insert(m.id.clone());
                }
                Err(e) => return Err(e.to_string()),
            }
        }
        let samples = aggregate_energies(&rankings, &unranked, &self.bundle.bids, &self.graph)
            .map_err(|e| e.to_string())?;
        let recall = recall_table(&samples);
        let p = |a: usize, b: usize| {
            ks_two_sample(
                samples.sample(BidCode::ALL[a]),
                samples.sample(BidCode::ALL[b]),
            )
            .map_or(f64::NAN, |r| r.p_value)
        };
        Ok(EvalView {
            counts: BidCode::ALL.map(|b| samples.sample(b).len()),
            means: BidCode::ALL.map(|b| samples.mean(b).unwrap_or(0.0)),
            recall: recall.map(|r| r.unwrap_or(0.0)),
            p12: p(0, 1),
            p13: p(0, 2),
            p23: p(1, 2),
            verdict: check_ordering(&samples, 0.05).to_string(),
            unranked: unranked.len(),
        })
    }
}

/// Deterministic Fruchterman-Reingold layout scaled into the unit square.
fn layout(graph: &CoauthorGraph, iterations: usize) -> Vec<[f64; 2]> {
    let n = graph.node_count();
    if n == 0 {
        return Vec::new();
    }
    // golden-angle spiral start
    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let r = ((i as f64 + 0.5) / n as f64).sqrt();
            let a = i as f64 * 2.399_963_229_728_653;
            [r * a.cos(), r * a.sin()]
        })
        .collect();
    let k = (1.0 / n as f64).sqrt() * 1.5;
    let mut temp = 0.1;
    for _ in 0..iterations {
        let mut disp = vec![[0.0f64; 2]; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = [pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]];
                let dist2 = (d[0] * d[0] + d[1] * d[1]).max(1e-9);
                let f = k * k / dist2;
                for c in 0..2 {
                    disp[i][c] += d[c] * f;
                    disp[j][c] -= d[c] * f;
                }
            }
        }
        for a in graph.nodes() {
            for e in graph.neighbors(a) {
                let (i, j) = (a.index(), e.target.index());
                let d = [pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]];
                let dist = (d[0] * d[0] + d[1] * d[1]).sqrt();
                // each undirected edge is seen from both ends
                let f = dist / k * e.raw_weight.min(3.0) / 2.0;
                for c in 0..2 {
                    disp[i][c] -= d[c] * f;
                }
            }
        }
        for i in 0..n {
            let len = (disp[i][0] * disp[i][0] + disp[i][1] * disp[i][1])
                .sqrt()
                .max(1e-12);
            let step = len.min(temp);
            for c in 0..2 {
                pos[i][c] += disp[i][c] / len * step;
            }
        }
        temp *= 0.985;
    }
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for p in &pos {
        for c in 0..2 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    pos.iter()
        .map(|p| {
            let s = |c: usize| {
                if hi[c] > lo[c] {
                    (p[c] - lo[c]) / (hi[c] - lo[c])
                } else {
                    0.5
                }
            };
            [s(0), s(1)]
        })
        .collect()
}
