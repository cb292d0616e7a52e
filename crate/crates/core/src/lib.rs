//! Referee identification over co-authorship networks.
//!
//! A manuscript is represented by the authors it cites. Particles start at
//! those authors' nodes in a co-authorship network and diffuse along weighted
//! collaboration ties, leaving decaying energy behind. The normalized energy
//! of every reached author is their weight as a potential referee. An optional
//! negative-energy swarm launched from the manuscript's own authors clears
//! their immediate collaborators, who tend to be conflicts of interest.
//!
//! ```
//! use refswarm::corpus::parse_corpus_str;
//! use refswarm::graph::build_graph;
//! use refswarm::referee::rank_referees;
//! use refswarm::swarm::{BlackoutConfig, Mode, SwarmConfig};
//!
//! let background = parse_corpus_str(
//!     r#"{"id":"p1","authors":["Ada Lovelace","Charles Babbage"]}
//! {"id":"p2","authors":["Charles Babbage","Mary Somerville"]}"#,
//! ).unwrap();
//! let graph = build_graph(&background);
//! let submission = parse_corpus_str(
//!     r#"{"id":"s1","authors":["Someone Else"],"references":["A. Lovelace"]}"#,
//! ).unwrap();
//! let config = SwarmConfig { mode: Mode::Expectation, ..SwarmConfig::default() };
//! let ranking = rank_referees(&submission.manuscripts()[0], &graph, &config, &BlackoutConfig::default()).unwrap();
//! assert_eq!(ranking.entries.len(), 3);
//! assert_eq!(ranking.entries[0].membership, 1.0);
//! ```

pub mod corpus;
pub mod error;
pub mod eval;
pub mod graph;
pub mod numeric;
pub mod referee;
pub mod swarm;
pub mod synth;

pub use error::{Error, Result};
