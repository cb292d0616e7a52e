//! Corpus text to ranking through the public API.

use refswarm::corpus::{normalize_author_name, parse_corpus_str, ManuscriptRecord};
use refswarm::graph::{build_graph, load_graph, save_graph};
use refswarm::referee::{exclude_authors, rank_referees};
use refswarm::swarm::{BlackoutConfig, Mode, SwarmConfig};
use refswarm::Error;

const CORPUS: &str = r#"
{"id":"p1","authors":["Ada Lovelace","Charles Babbage"]}
{"id":"p2","authors":["Charles Babbage","Mary Somerville","John Herschel"]}
{"id":"p3","authors":["John Herschel","Caroline Herschel"]}
{"id":"p4","authors":["Alan Turing","Alonzo Church"]}
{"id":"p5","authors":["Alonzo Church","Stephen C Kleene"]}
"#;

fn key(name: &str) -> refswarm::corpus::AuthorKey {
    normalize_author_name(name).unwrap()
}

fn expectation() -> SwarmConfig {
    SwarmConfig {
        mode: Mode::Expectation,
        ..SwarmConfig::default()
    }
}

fn submission() -> ManuscriptRecord {
    ManuscriptRecord::new(
        "sub",
        [key("Alan Turing")],
        [
            key("Charles Babbage"),
            key("Charles Babbage"),
            key("Nobody Known"),
        ],
    )
}

#[test]
fn saved_graph_ranks_identically() {
    let graph = build_graph(&parse_corpus_str(CORPUS).unwrap());
    assert_eq!(graph.node_count(), 8);
    assert_eq!(graph.edge_count(), 7);

    let mut bytes = Vec::new();
    save_graph(&graph, &mut bytes).unwrap();
    let loaded = load_graph(bytes.as_slice()).unwrap();

    let blackout = BlackoutConfig::default();
    let a = rank_referees(&submission(), &graph, &expectation(), &blackout).unwrap();
    let b = rank_referees(&submission(), &loaded, &expectation(), &blackout).unwrap();
    assert_eq!(a.to_json(), b.to_json());

    // Only the cited component receives energy; the citing author does not.
    assert_eq!(a.missing, vec![key("Nobody Known")]);
    assert_eq!(a.entries[0].author, key("Charles Babbage"));
    assert_eq!(a.entries[0].membership, 1.0);
    assert_eq!(a.membership_of(&key("Alan Turing")), 0.0);
    assert!(a.membership_of(&key("Caroline Herschel")) > 0.0);
}

#[test]
fn blackout_clears_the_authors_neighbourhood() {
    let graph = build_graph(&parse_corpus_str(CORPUS).unwrap());
    let manuscript = ManuscriptRecord::new(
        "sub",
        [key("Mary Somerville")],
        [key("Ada Lovelace"), key("Caroline Herschel")],
    );
    let base = rank_referees(
        &manuscript,
        &graph,
        &expectation(),
        &BlackoutConfig::default(),
    )
    .unwrap();
    assert!(base.membership_of(&key("Mary Somerville")) > 0.0);

    let cleared = rank_referees(
        &manuscript,
        &graph,
        &expectation(),
        &BlackoutConfig::with_steps(1),
    )
    .unwrap();
    for gone in ["Mary Somerville", "Charles Babbage", "John Herschel"] {
        assert_eq!(cleared.membership_of(&key(gone)), 0.0, "{gone}");
    }
    for kept in ["Ada Lovelace", "Caroline Herschel"] {
        assert!(cleared.membership_of(&key(kept)) > 0.0, "{kept}");
    }
}

#[test]
fn excluding_authors_renormalises() {
    let graph = build_graph(&parse_corpus_str(CORPUS).unwrap());
    let manuscript = ManuscriptRecord::new(
        "sub",
        [key("Charles Babbage")],
        [key("Charles Babbage"), key("Mary Somerville")],
    );
    let ranking = rank_referees(
        &manuscript,
        &graph,
        &expectation(),
        &BlackoutConfig::default(),
    )
    .unwrap();
    let trimmed = exclude_authors(&ranking, &manuscript);
    assert!(trimmed
        .entries
        .iter()
        .all(|e| e.author != key("Charles Babbage")));
    assert_eq!(trimmed.entries[0].membership, 1.0);
}

#[test]
fn unresolvable_references_are_reported() {
    let graph = build_graph(&parse_corpus_str(CORPUS).unwrap());
    let manuscript = ManuscriptRecord::new("sub", [], [key("Nobody Known")]);
    let err = rank_referees(
        &manuscript,
        &graph,
        &expectation(),
        &BlackoutConfig::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::NoSeeds { .. }), "{err:?}");
}
