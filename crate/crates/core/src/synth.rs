//! Synthetic inputs: random graphs, random corpora, and a planted-community
//! bundle with known expert, non-expert, and conflict-of-interest structure.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AuthorKey, Corpus, ManuscriptRecord};
use crate::eval::{BidCode, BidRecord};
use crate::graph::CoauthorGraph;

fn synthetic_key(prefix: &str, i: usize) -> AuthorKey {
    let first = char::from(b'a' + (i % 26) as u8);
    AuthorKey::new(&format!("{prefix}{i}"), Some(first), None)
        .expect("synthetic names are well formed")
}

/// Connected random graph: a random recursive spanning tree plus uniformly
/// placed extra edges up to `mean_degree`, weights in `[0.2, 3)`.
pub fn random_graph(nodes: usize, mean_degree: f64, seed: u64) -> CoauthorGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys = (0..nodes).map(|i| synthetic_key("node", i)).collect();
    let target = ((mean_degree * nodes as f64) / 2.0).round() as usize;
    let mut edges = Vec::with_capacity(target.max(nodes));
    for v in 1..nodes {
        edges.push((rng.random_range(0..v), v, rng.random_range(0.2..3.0)));
    }
    while edges.len() < target && nodes > 1 {
        let a = rng.random_range(0..nodes);
        let b = rng.random_range(0..nodes);
        if a != b {
            edges.push((a, b, rng.random_range(0.2..3.0)));
        }
    }
    CoauthorGraph::from_edges(keys, edges).expect("generated edges are valid")
}

/// `manuscripts` records over an author pool of `authors`, each with
/// `1..=max_authors` authors drawn from a local window so that the pool forms
/// communities, and a few references.
pub fn random_corpus(manuscripts: usize, authors: usize, max_authors: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = 40.min(authors);
    let records = (0..manuscripts)
        .map(|i| {
            let centre = rng.random_range(0..authors);
            let count = rng.random_range(1..=max_authors.min(window));
            let byline: Vec<AuthorKey> = (0..count)
                .map(|_| synthetic_key("author", (centre + rng.random_range(0..window)) % authors))
                .collect();
            let refs: Vec<AuthorKey> = (0..rng.random_range(0..6))
                .map(|_| synthetic_key("author", rng.random_range(0..authors)))
                .collect();
            ManuscriptRecord::new(format!("paper{i}"), byline, refs)
        })
        .collect();
    Corpus::new(records).expect("ids are unique")
}

/// Shape of the planted-community bundle.
#[derive(Debug, Clone)]
pub struct PlantedConfig {
    pub topics: usize,
    /// Non-PC researchers per topic; submissions cite these.
    pub core_per_topic: usize,
    pub pc_per_topic: usize,
    pub papers_per_topic: usize,
    /// Papers joining core researchers of two different topics.
    pub bridge_papers: usize,
    pub submissions: usize,
    pub authors_per_submission: usize,
    pub references_per_submission: usize,
    /// Times each submission author cites themselves.
    pub self_citations: usize,
    pub max_conflicts: usize,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            topics: 8,
            core_per_topic: 30,
            pc_per_topic: 7,
            papers_per_topic: 120,
            bridge_papers: 24,
            submissions: 48,
            authors_per_submission: 2,
            references_per_submission: 12,
            self_citations: 2,
            max_conflicts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedBundle {
    /// Published record the co-authorship graph is built from.
    pub background: Corpus,
    /// Manuscripts under review, with their references.
    pub submissions: Corpus,
    pub bids: Vec<BidRecord>,
    pub pc_members: Vec<AuthorKey>,
}

/// Topic communities of core researchers and PC members. Each submission
/// cites cores of its own topic. Its authors sit outside that topic and have
/// published only with one or two PC members from other topics, who bid
/// "conflict of interest". PC members of the submission's topic bid 1 or 2
/// at random, everyone else bids 3.
pub fn planted_bundle(cfg: &PlantedConfig, seed: u64) -> PlantedBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let core = |t: usize, i: usize| synthetic_key(&format!("t{t}core"), i);
    let pc: Vec<Vec<AuthorKey>> = (0..cfg.topics)
        .map(|t| {
            (0..cfg.pc_per_topic)
                .map(|i| synthetic_key(&format!("t{t}pc"), i))
                .collect()
        })
        .collect();

    let mut papers = Vec::new();
    let mut next_id = 0usize;
    let mut add_paper = |authors: Vec<AuthorKey>, papers: &mut Vec<ManuscriptRecord>| {
        papers.push(ManuscriptRecord::new(format!("pub{next_id}"), authors, []));
        next_id += 1;
    };

    for (t, members) in pc.iter().enumerate() {
        for _ in 0..cfg.papers_per_topic {
            let size = rng.random_range(2..=4);
            let mut authors: Vec<AuthorKey> = (0..size)
                .map(|_| core(t, rng.random_range(0..cfg.core_per_topic)))
                .collect();
            if rng.random_bool(0.5) {
                authors[0] = members.choose(&mut rng).unwrap().clone();
            }
            add_paper(authors, &mut papers);
        }
    }
    for b in 0..cfg.bridge_papers {
        let t1 = b % cfg.topics;
        let t2 = (t1 + 1 + rng.random_range(0..cfg.topics - 1)) % cfg.topics;
        let authors = vec![
            core(t1, rng.random_range(0..cfg.core_per_topic)),
            core(t2, rng.random_range(0..cfg.core_per_topic)),
        ];
        add_paper(authors, &mut papers);
    }

    let mut submissions = Vec::new();
    let mut bids = Vec::new();
    for s in 0..cfg.submissions {
        let topic = s % cfg.topics;
        let authors: Vec<AuthorKey> = (0..cfg.authors_per_submission)
            .map(|i| synthetic_key(&format!("s{s}author"), i))
            .collect();

        let n_conflicts = rng.random_range(1..=cfg.max_conflicts);
        let mut conflicts: Vec<AuthorKey> = Vec::new();
        while conflicts.len() < n_conflicts {
            let other = (topic + 1 + rng.random_range(0..cfg.topics - 1)) % cfg.topics;
            let member = pc[other].choose(&mut rng).unwrap().clone();
            if !conflicts.contains(&member) {
                conflicts.push(member);
            }
        }
        for c in &conflicts {
            let mut byline = authors.clone();
            byline.push(c.clone());
            add_paper(byline, &mut papers);
        }

        let mut cited: Vec<usize> = (0..cfg.core_per_topic).collect();
        cited.shuffle(&mut rng);
        let mut refs: Vec<AuthorKey> = cited[..cfg.references_per_submission]
            .iter()
            .map(|&i| core(topic, i))
            .collect();
        for &i in &cited[..cfg.references_per_submission / 3] {
            refs.push(core(topic, i));
        }
        for a in &authors {
            refs.extend(std::iter::repeat_n(a.clone(), cfg.self_citations));
        }
        let id = format!("sub{s}");
        submissions.push(ManuscriptRecord::new(id.clone(), authors, refs));

        for (t, members) in pc.iter().enumerate() {
            for m in members {
                let code = if conflicts.contains(m) {
                    4
                } else if t == topic {
                    // experts split between "want" and "willing" by coin flip
                    if rng.random_bool(0.5) {
                        1
                    } else {
                        2
                    }
                } else {
                    3
                };
                bids.push(BidRecord {
                    member: m.clone(),
                    manuscript_id: id.clone(),
                    bid: BidCode::new(code).unwrap(),
                });
            }
        }
    }

    PlantedBundle {
        background: Corpus::new(papers).expect("ids are unique"),
        submissions: Corpus::new(submissions).expect("ids are unique"),
        bids,
        pc_members: pc.into_iter().flatten().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn random_graph_is_connected_and_deterministic() {
        let g = random_graph(500, 4.0, 1);
        assert_eq!(
            g.neighborhood([crate::graph::NodeId(0)], usize::MAX)
                .unwrap()
                .len(),
            500
        );
        assert_eq!(g, random_graph(500, 4.0, 1));
        assert!(g.edge_count() >= 499);
    }

    #[test]
    fn planted_bundle_shape() {
        let cfg = PlantedConfig::default();
        let b = planted_bundle(&cfg, 7);
        assert_eq!(b.submissions.len(), cfg.submissions);
        assert_eq!(b.pc_members.len(), cfg.topics * cfg.pc_per_topic);
        assert_eq!(b.bids.len(), cfg.submissions * b.pc_members.len());
        for code in 1..=4 {
            assert!(b.bids.iter().any(|x| x.bid.value() == code));
        }
        let g = build_graph(&b.background);
        for s in b.submissions.manuscripts() {
            assert!(s.authors.iter().all(|a| g.node(a).is_some()));
        }
    }
}
