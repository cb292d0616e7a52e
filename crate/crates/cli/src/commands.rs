use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use refswarm::corpus::{parse_corpus, write_corpus, AuthorKey, Corpus};
use refswarm::eval::{
    aggregate_energies, parse_bids, write_bids, write_histograms, BidCode, EvaluationReport,
};
use refswarm::graph::{build_graph as build, load_graph, save_graph, CoauthorGraph};
use refswarm::referee::{
    assemble_ranking, exclude_authors, manuscript_energy, rank_referees, RefereeRanking,
};
use refswarm::swarm::{BlackoutConfig, SwarmConfig};
use refswarm::synth::{planted_bundle, PlantedConfig};
use refswarm::Error;

use crate::config::FileConfig;
use crate::SwarmArgs;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::File { .. } => 7,
            CliError::Core(e) => match e {
                Error::MalformedName(_)
                | Error::Parse { .. }
                | Error::DuplicateManuscript { .. }
                | Error::Format(_)
                | Error::Corrupt(_) => 3,
                Error::NoSeeds { .. } | Error::EmptySeed => 4,
                Error::NoEnergy => 5,
                Error::UnknownManuscripts(_)
                | Error::NoBids
                | Error::EmptySample
                | Error::UnknownNode(_) => 6,
                Error::InvalidConfig(_) => 2,
                Error::Io(_) => 7,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::File {
            path: path.into(),
            source,
        })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::File {
            path: path.into(),
            source,
        })
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| CliError::File {
        path: path.into(),
        source,
    })
}

fn load(path: &Path) -> Result<CoauthorGraph> {
    let graph = load_graph(open(path)?)?;
    log::info!(
        "{}: {} nodes, {} edges",
        path.display(),
        graph.node_count(),
        graph.edge_count()
    );
    Ok(graph)
}

fn read_corpus(path: &Path) -> Result<Corpus> {
    Ok(parse_corpus(open(path)?)?)
}

/// Swarm parameters after layering flags over the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub swarm: SwarmConfig,
    pub blackout: BlackoutConfig,
    pub exclude_authors: bool,
}

impl SwarmArgs {
    pub fn resolve(&self, file: &FileConfig) -> Result<Settings> {
        let mut swarm = file.swarm.clone();
        if let Some(m) = self.mode {
            swarm.mode = m;
        }
        if let Some(p) = self.particles {
            swarm.particles_per_reference = p;
        }
        if let Some(e) = self.energy {
            swarm.initial_energy = e;
        }
        if let Some(d) = self.decay {
            swarm.decay = d;
        }
        if let Some(s) = self.steps {
            swarm.max_steps = s;
        }
        if let Some(s) = self.seed {
            swarm.rng_seed = s;
        }
        swarm.validate()?;

        let mut blackout = file.blackout.clone();
        if self.blackout {
            blackout.enabled = true;
        }
        if let Some(k) = self.blackout_steps {
            blackout.enabled = true;
            blackout.steps = k;
        }
        if let Some(e) = self.blackout_energy {
            blackout.energy = e;
        }
        if let Some(d) = self.blackout_decay {
            blackout.decay = d;
        }
        if let Some(p) = self.blackout_particles {
            blackout.particles_per_author = p;
        }
        if blackout.enabled {
            blackout.validate()?;
        }
        Ok(Settings {
            swarm,
            blackout,
            exclude_authors: self.exclude_authors || file.evaluate.exclude_authors.unwrap_or(false),
        })
    }
}

pub fn build_graph(corpus_path: &Path, output: &Path) -> Result<()> {
    let corpus = read_corpus(corpus_path)?;
    let graph = build(&corpus);
    let mut out = create(output)?;
    save_graph(&graph, &mut out)?;
    finish(out, output)?;

    let referenced: BTreeSet<&AuthorKey> = corpus
        .manuscripts()
        .iter()
        .flat_map(|m| m.referenced_authors.keys())
        .collect();
    let found = referenced
        .iter()
        .filter(|k| graph.node(k).is_some())
        .count();
    let isolated = graph.nodes().filter(|&n| graph.out_degree(n) == 0).count();
    println!("manuscripts\t{}", corpus.len());
    println!("nodes\t{}", graph.node_count());
    println!("edges\t{}", graph.edge_count());
    println!("directed_edges\t{}", graph.directed_edge_count());
    println!("isolated_nodes\t{isolated}");
    println!("referenced_authors\t{}", referenced.len());
    println!("referenced_in_graph\t{found}");
    println!("referenced_missing\t{}", referenced.len() - found);
    Ok(())
}

pub struct RankJob {
    pub graph: PathBuf,
    pub manuscripts: PathBuf,
    pub id: Option<String>,
    pub top: Option<usize>,
    pub output: Option<PathBuf>,
    pub energy_out: Option<PathBuf>,
    pub settings: Settings,
}

pub fn rank(job: &RankJob) -> Result<()> {
    let graph = load(&job.graph)?;
    let corpus = read_corpus(&job.manuscripts)?;
    let manuscript = match &job.id {
        Some(id) => corpus
            .get(id)
            .ok_or_else(|| Error::UnknownManuscripts(vec![id.clone()]))?,
        None if corpus.len() == 1 => &corpus.manuscripts()[0],
        None => {
            return Err(CliError::Config(format!(
                "{} holds {} manuscripts; choose one with --id",
                job.manuscripts.display(),
                corpus.len()
            )))
        }
    };

    let s = &job.settings;
    let (seeds, energy) = manuscript_energy(manuscript, &graph, &s.swarm, &s.blackout)?;
    if !seeds.missing.is_empty() {
        log::warn!(
            "{} referenced author(s) not in the graph",
            seeds.missing.len()
        );
    }
    if let Some(path) = &job.energy_out {
        let mut out = create(path)?;
        energy
            .write_tsv(&graph, &mut out)
            .map_err(|source| CliError::File {
                path: path.clone(),
                source,
            })?;
        finish(out, path)?;
    }
    let mut ranking = assemble_ranking(manuscript, &graph, &s.swarm, &s.blackout, seeds, &energy)?;
    if s.exclude_authors {
        ranking = exclude_authors(&ranking, manuscript);
    }
    if let Some(n) = job.top {
        ranking.entries.truncate(n);
    }
    emit(&ranking.to_json(), job.output.as_deref())
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let mut out = create(p)?;
            writeln!(out, "{text}").map_err(|source| CliError::File {
                path: p.into(),
                source,
            })?;
            finish(out, p)
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

pub struct EvaluateJob {
    pub graph: PathBuf,
    pub submissions: PathBuf,
    pub bids: PathBuf,
    pub alpha: f64,
    pub json: bool,
    pub output: Option<PathBuf>,
    pub emit_distributions: Option<PathBuf>,
    pub settings: Settings,
}

pub fn evaluate(job: &EvaluateJob) -> Result<()> {
    if !(job.alpha > 0.0 && job.alpha < 1.0) {
        return Err(CliError::Config(format!(
            "alpha {} outside (0, 1)",
            job.alpha
        )));
    }
    let graph = load(&job.graph)?;
    let submissions = read_corpus(&job.submissions)?;
    let bids = parse_bids(open(&job.bids)?)?;
    if bids.is_empty() {
        return Err(Error::NoBids.into());
    }
    let wanted: BTreeSet<&str> = bids.iter().map(|b| b.manuscript_id.as_str()).collect();
    let unknown: Vec<String> = wanted
        .iter()
        .filter(|id| submissions.get(id).is_none())
        .map(|id| id.to_string())
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownManuscripts(unknown).into());
    }

    let s = &job.settings;
    let mut rankings: BTreeMap<String, RefereeRanking> = BTreeMap::new();
    let mut unranked = BTreeSet::new();
    for m in submissions
        .manuscripts()
        .iter()
        .filter(|m| wanted.contains(m.id.as_str()))
    {
        match rank_referees(m, &graph, &s.swarm, &s.blackout) {
            Ok(r) => {
                let r = if s.exclude_authors {
                    exclude_authors(&r, m)
                } else {
                    r
                };
                rankings.insert(m.id.clone(), r);
            }
            Err(e @ (Error::NoSeeds { .. } | Error::NoEnergy)) => {
                log::warn!("{}: {e}; its bids are skipped", m.id);
                unranked.insert(m.id.clone());
            }
            Err(e) => return Err(e.into()),
        }
    }
    log::info!(
        "ranked {} manuscript(s), {} unranked",
        rankings.len(),
        unranked.len()
    );

    let samples = aggregate_energies(&rankings, &unranked, &bids, &graph)?;
    let report = EvaluationReport::new(&samples, unranked.into_iter().collect(), job.alpha);
    if job.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.render_table());
    }
    if let Some(path) = &job.output {
        emit(&report.to_json(), Some(path))?;
    }
    if let Some(dir) = &job.emit_distributions {
        std::fs::create_dir_all(dir).map_err(|source| CliError::File {
            path: dir.clone(),
            source,
        })?;
        let path = dir.join("histograms.tsv");
        let mut out = create(&path)?;
        write_histograms(&samples, &mut out).map_err(|source| CliError::File {
            path: path.clone(),
            source,
        })?;
        finish(out, &path)?;

        let path = dir.join("samples.tsv");
        let mut out = create(&path)?;
        let io = |source| CliError::File {
            path: path.clone(),
            source,
        };
        writeln!(out, "bid\tmembership").map_err(io)?;
        for bid in BidCode::ALL {
            for e in samples.sample(bid) {
                writeln!(out, "{bid}\t{e}").map_err(io)?;
            }
        }
        finish(out, &path)?;
    }
    Ok(())
}

pub fn synth(dir: &Path, seed: u64) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::File {
        path: dir.into(),
        source,
    })?;
    let bundle = planted_bundle(&PlantedConfig::default(), seed);
    for (name, corpus) in [
        ("background.jsonl", &bundle.background),
        ("submissions.jsonl", &bundle.submissions),
    ] {
        let path = dir.join(name);
        let mut out = create(&path)?;
        write_corpus(corpus, &mut out)?;
        finish(out, &path)?;
    }
    let path = dir.join("bids.tsv");
    let mut out = create(&path)?;
    write_bids(&bundle.bids, &mut out).map_err(|source| CliError::File {
        path: path.clone(),
        source,
    })?;
    finish(out, &path)?;
    println!(
        "wrote {} background manuscripts, {} submissions, {} bids to {}",
        bundle.background.len(),
        bundle.submissions.len(),
        bundle.bids.len(),
        dir.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use refswarm::swarm::Mode;

    #[test]
    fn flag_defaults_are_the_published_parameters() {
        let s = SwarmArgs::default()
            .resolve(&FileConfig::default())
            .unwrap();
        let w = &s.swarm;
        assert_eq!(
            (
                w.particles_per_reference,
                w.initial_energy,
                w.decay,
                w.max_steps,
                w.mode
            ),
            (100, 1.0, 0.15, 100, Mode::MonteCarlo)
        );
        let b = &s.blackout;
        assert!(!b.enabled);
        assert_eq!(
            (b.energy, b.decay, b.steps, b.particles_per_author),
            (-1000.0, 0.0, 2, 100)
        );
        assert!(!s.exclude_authors);
    }

    #[test]
    fn blackout_steps_flag_enables_blackout() {
        let args = SwarmArgs {
            blackout_steps: Some(3),
            ..SwarmArgs::default()
        };
        let s = args.resolve(&FileConfig::default()).unwrap();
        assert!(s.blackout.enabled && s.blackout.steps == 3);
        let bad = SwarmArgs {
            blackout: true,
            blackout_energy: Some(5.0),
            ..SwarmArgs::default()
        };
        assert_eq!(
            bad.resolve(&FileConfig::default()).unwrap_err().exit_code(),
            2
        );
    }
}
