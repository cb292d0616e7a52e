//! Bid-code validation harness.
//!
//! Program-committee members bid on each submission with one of four codes:
//! 1 expert who wants to review, 2 expert, 3 not an expert, 4 conflict of
//! interest. For every bid the member's normalized energy on that submission
//! goes into the bid's category sample. A useful ranking puts experts
//! (1 and 2) well above non-experts (3), while 1 and 2 stay
//! indistinguishable from each other.
//!
//! Bid files are tab-separated: `member_name<TAB>manuscript_id<TAB>bid_code`.

mod ks;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::corpus::{normalize_author_name, AuthorKey};
use crate::error::{Error, Result};
use crate::graph::CoauthorGraph;
use crate::referee::RefereeRanking;

pub use ks::{kolmogorov_survival, ks_two_sample, KsResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct BidCode(u8);

impl BidCode {
    pub const ALL: [BidCode; 4] = [BidCode(1), BidCode(2), BidCode(3), BidCode(4)];

    pub fn new(value: u8) -> Result<Self> {
        match value {
            1..=4 => Ok(Self(value)),
            other => Err(Error::InvalidConfig(format!(
                "bid code {other} not in 1..=4"
            ))),
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    fn index(self) -> usize {
        usize::from(self.0 - 1)
    }
}

impl fmt::Display for BidCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BidRecord {
    pub member: AuthorKey,
    pub manuscript_id: String,
    pub bid: BidCode,
}

/// Reads a bid file. Blank lines and `#` comments are skipped; a second bid
/// for the same (member, manuscript) pair is an error.
pub fn parse_bids<R: BufRead>(reader: R) -> Result<Vec<BidRecord>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim_end_matches(['\r', '\n']);
        if text.trim().is_empty() || text.trim_start().starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = text.split('\t').collect();
        let [member, manuscript_id, code] = fields[..] else {
            return Err(err(format!(
                "expected 3 tab-separated fields, found {}",
                fields.len()
            )));
        };
        let member = normalize_author_name(member).map_err(|e| err(e.to_string()))?;
        let manuscript_id = manuscript_id.trim().to_string();
        if manuscript_id.is_empty() {
            return Err(err("empty manuscript id".into()));
        }
        let bid = code
            .trim()
            .parse::<u8>()
            .map_err(|e| err(format!("bad bid code {code:?}: {e}")))
            .and_then(|v| BidCode::new(v).map_err(|e| err(e.to_string())))?;
        if !seen.insert((member.clone(), manuscript_id.clone())) {
            return Err(err(format!("second bid by {member} on {manuscript_id}")));
        }
        out.push(BidRecord {
            member,
            manuscript_id,
            bid,
        });
    }
    Ok(out)
}

pub fn write_bids<W: Write>(bids: &[BidRecord], mut out: W) -> std::io::Result<()> {
    for b in bids {
        writeln!(out, "{}\t{}\t{}", b.member, b.manuscript_id, b.bid)?;
    }
    Ok(())
}

/// Per-category energy samples plus bookkeeping on what was left out.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CategorySamples {
    pub samples: [Vec<f64>; 4],
    /// Members who bid but are not graph nodes; all their bids are dropped.
    pub excluded_members: Vec<AuthorKey>,
    pub excluded_member_bids: usize,
    /// Bids on manuscripts that could not be ranked (no seeds, no energy).
    pub unranked_bids: usize,
}

impl CategorySamples {
    pub fn sample(&self, bid: BidCode) -> &[f64] {
        &self.samples[bid.index()]
    }

    pub fn push(&mut self, bid: BidCode, energy: f64) {
        self.samples[bid.index()].push(energy);
    }

    pub fn total(&self, bid: BidCode) -> f64 {
        self.sample(bid).iter().sum()
    }

    pub fn mean(&self, bid: BidCode) -> Option<f64> {
        let s = self.sample(bid);
        (!s.is_empty()).then(|| self.total(bid) / s.len() as f64)
    }
}

/// Collects each bid's membership value into its category.
///
/// `unranked` lists manuscripts that exist but produced no ranking; their
/// bids are counted and dropped. Bids naming any other unknown manuscript are
/// an error.
pub fn aggregate_energies(
    rankings: &BTreeMap<String, RefereeRanking>,
    unranked: &BTreeSet<String>,
    bids: &[BidRecord],
    graph: &CoauthorGraph,
) -> Result<CategorySamples> {
    if bids.is_empty() {
        return Err(Error::NoBids);
    }
    let unknown: BTreeSet<String> = bids
        .iter()
        .filter(|b| {
            !rankings.contains_key(&b.manuscript_id) && !unranked.contains(&b.manuscript_id)
        })
        .map(|b| b.manuscript_id.clone())
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownManuscripts(unknown.into_iter().collect()));
    }

    let lookup: HashMap<&str, HashMap<&AuthorKey, f64>> = rankings
        .iter()
        .map(|(id, r)| {
            (
                id.as_str(),
                r.entries
                    .iter()
                    .map(|e| (&e.author, e.membership))
                    .collect(),
            )
        })
        .collect();

    let mut out = CategorySamples::default();
    let mut excluded = BTreeSet::new();
    for bid in bids {
        if graph.node(&bid.member).is_none() {
            excluded.insert(bid.member.clone());
            out.excluded_member_bids += 1;
            continue;
        }
        match lookup.get(bid.manuscript_id.as_str()) {
            Some(energies) => out.push(bid.bid, energies.get(&bid.member).copied().unwrap_or(0.0)),
            None => out.unranked_bids += 1,
        }
    }
    out.excluded_members = excluded.into_iter().collect();
    Ok(out)
}

/// Fraction of each category's bids with strictly positive energy; `None`
/// for an empty category.
pub fn recall_table(samples: &CategorySamples) -> [Option<f64>; 4] {
    BidCode::ALL.map(|b| {
        let s = samples.sample(b);
        (!s.is_empty()).then(|| s.iter().filter(|&&x| x > 0.0).count() as f64 / s.len() as f64)
    })
}

/// Largest `n` energies per category after dropping entries equal to 1.0.
pub fn top_energies(samples: &CategorySamples, n: usize) -> [Vec<f64>; 4] {
    BidCode::ALL.map(|b| {
        let mut v: Vec<f64> = samples
            .sample(b)
            .iter()
            .copied()
            .filter(|&x| x != 1.0)
            .collect();
        v.sort_by(|x, y| y.total_cmp(x));
        v.truncate(n);
        v
    })
}

/// Pairwise KS results; `None` where either category is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsMatrix(pub [[Option<KsResult>; 4]; 4]);

impl KsMatrix {
    pub fn compute(samples: &CategorySamples) -> Self {
        let mut m = [[None; 4]; 4];
        for a in BidCode::ALL {
            for b in BidCode::ALL {
                m[a.index()][b.index()] = ks_two_sample(samples.sample(a), samples.sample(b)).ok();
            }
        }
        Self(m)
    }

    pub fn get(&self, a: BidCode, b: BidCode) -> Option<KsResult> {
        self.0[a.index()][b.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails { reasons: Vec<String> },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => f.write_str("holds"),
            Verdict::Fails { reasons } => write!(f, "fails ({})", reasons.join("; ")),
            Verdict::Inconclusive { reason } => write!(f, "inconclusive ({reason})"),
        }
    }
}

/// Tests `e1 ~ e2 > e3 ~ e4`: categories 1 and 2 not separable at `alpha`,
/// both separable from 3, and both means above category 3's.
pub fn check_ordering(samples: &CategorySamples, alpha: f64) -> Verdict {
    let empty: Vec<String> = BidCode::ALL
        .iter()
        .filter(|b| samples.sample(**b).is_empty())
        .map(|b| b.to_string())
        .collect();
    if !empty.is_empty() {
        return Verdict::Inconclusive {
            reason: format!(
                "no bids in categor{} {}",
                if empty.len() == 1 { "y" } else { "ies" },
                empty.join(", ")
            ),
        };
    }
    let [one, two, three, _] = BidCode::ALL;
    let p = |a, b| {
        ks_two_sample(samples.sample(a), samples.sample(b))
            .unwrap()
            .p_value
    };
    let mut reasons = Vec::new();
    let p12 = p(one, two);
    if p12 <= alpha {
        reasons.push(format!("KS(1,2) p = {p12:.4} <= {alpha}"));
    }
    for b in [one, two] {
        let pb3 = p(b, three);
        if pb3 >= alpha {
            reasons.push(format!("KS({b},3) p = {pb3:.4} >= {alpha}"));
        }
        let (mb, m3) = (samples.mean(b).unwrap(), samples.mean(three).unwrap());
        if mb <= m3 {
            reasons.push(format!("mean(e{b}) = {mb:.4} <= mean(e3) = {m3:.4}"));
        }
    }
    if reasons.is_empty() {
        Verdict::Holds
    } else {
        Verdict::Fails { reasons }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryStats {
    pub bid: BidCode,
    pub count: usize,
    pub total: f64,
    pub mean: Option<f64>,
    pub recall: Option<f64>,
    pub top: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub alpha: f64,
    pub categories: Vec<CategoryStats>,
    pub ks: KsMatrix,
    pub verdict: Verdict,
    pub excluded_members: Vec<AuthorKey>,
    pub excluded_member_bids: usize,
    pub unranked_bids: usize,
    pub unranked_manuscripts: Vec<String>,
}

pub const TOP_N: usize = 5;

impl EvaluationReport {
    pub fn new(samples: &CategorySamples, unranked_manuscripts: Vec<String>, alpha: f64) -> Self {
        let recall = recall_table(samples);
        let top = top_energies(samples, TOP_N);
        let categories = BidCode::ALL
            .iter()
            .map(|&b| CategoryStats {
                bid: b,
                count: samples.sample(b).len(),
                total: samples.total(b),
                mean: samples.mean(b),
                recall: recall[b.index()],
                top: top[b.index()].clone(),
            })
            .collect();
        Self {
            alpha,
            categories,
            ks: KsMatrix::compute(samples),
            verdict: check_ordering(samples, alpha),
            excluded_members: samples.excluded_members.clone(),
            excluded_member_bids: samples.excluded_member_bids,
            unranked_bids: samples.unranked_bids,
            unranked_manuscripts,
        }
    }

    pub fn category(&self, bid: BidCode) -> &CategoryStats {
        &self.categories[bid.index()]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_table(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let pval = |r: Option<KsResult>| match r {
            None => "-".to_string(),
            Some(r) if r.p_value < 0.001 => "<0.001".to_string(),
            Some(r) => format!("{:.4}", r.p_value),
        };
        let mut s = String::new();
        let _ = writeln!(s, "energy by bid category");
        let _ = writeln!(
            s,
            "{:>4} {:>7} {:>12} {:>10} {:>8}",
            "bid", "count", "total", "mean", "recall"
        );
        for c in &self.categories {
            let _ = writeln!(
                s,
                "{:>4} {:>7} {:>12.4} {:>10} {:>8}",
                c.bid,
                c.count,
                c.total,
                opt(c.mean),
                opt(c.recall)
            );
        }
        let _ = writeln!(s, "\nKolmogorov-Smirnov p-values");
        let _ = writeln!(s, "{:>4} {:>8} {:>8} {:>8} {:>8}", "bid", 1, 2, 3, 4);
        for a in BidCode::ALL {
            let row: Vec<String> = BidCode::ALL
                .iter()
                .map(|&b| format!("{:>8}", pval(self.ks.get(a, b))))
                .collect();
            let _ = writeln!(s, "{:>4} {}", a, row.join(" "));
        }
        let _ = writeln!(s, "\ntop {TOP_N} energies below 1.0");
        for c in &self.categories {
            let row: Vec<String> = c.top.iter().map(|v| format!("{v:.3}")).collect();
            let _ = writeln!(s, "{:>4} {}", c.bid, row.join(" "));
        }
        let _ = writeln!(
            s,
            "\nordering e1 ~ e2 > e3 ~ e4 at alpha {}: {}",
            self.alpha, self.verdict
        );
        if !self.excluded_members.is_empty() {
            let _ = writeln!(
                s,
                "excluded {} members not in graph ({} bids)",
                self.excluded_members.len(),
                self.excluded_member_bids
            );
        }
        if !self.unranked_manuscripts.is_empty() {
            let _ = writeln!(
                s,
                "skipped {} unrankable manuscripts ({} bids)",
                self.unranked_manuscripts.len(),
                self.unranked_bids
            );
        }
        s
    }
}

pub const HISTOGRAM_BINS: usize = 20;

/// Writes `bid<TAB>lower<TAB>upper<TAB>count` rows: one zero-energy row
/// (`0 0`) per category, then `HISTOGRAM_BINS` equal-width bins over `(0, 1]`.
pub fn write_histograms<W: Write>(samples: &CategorySamples, mut out: W) -> std::io::Result<()> {
    writeln!(out, "bid\tlower\tupper\tcount")?;
    for b in BidCode::ALL {
        let s = samples.sample(b);
        let mut counts = [0usize; HISTOGRAM_BINS];
        let mut zeros = 0;
        for &x in s {
            if x <= 0.0 {
                zeros += 1;
            } else {
                let bin =
                    ((x * HISTOGRAM_BINS as f64).ceil() as usize).clamp(1, HISTOGRAM_BINS) - 1;
                counts[bin] += 1;
            }
        }
        writeln!(out, "{b}\t0\t0\t{zeros}")?;
        for (i, c) in counts.iter().enumerate() {
            let lo = i as f64 / HISTOGRAM_BINS as f64;
            let hi = (i + 1) as f64 / HISTOGRAM_BINS as f64;
            writeln!(out, "{b}\t{lo}\t{hi}\t{c}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::referee::{ConfigSnapshot, RankedReferee};
    use crate::swarm::SwarmConfig;
    use proptest::prelude::*;

    fn k(s: &str) -> AuthorKey {
        normalize_author_name(s).unwrap()
    }

    fn graph() -> CoauthorGraph {
        CoauthorGraph::from_edges(
            vec![k("A Alpha"), k("B Beta"), k("C Gamma")],
            [(0, 1, 1.0), (1, 2, 1.0)],
        )
        .unwrap()
    }

    fn ranking(id: &str, entries: &[(&str, f64)]) -> RefereeRanking {
        RefereeRanking {
            manuscript_id: id.into(),
            config: ConfigSnapshot {
                swarm: SwarmConfig::default(),
                blackout: None,
            },
            missing: vec![],
            entries: entries
                .iter()
                .map(|(n, m)| RankedReferee {
                    author: k(n),
                    raw_energy: *m,
                    membership: *m,
                })
                .collect(),
        }
    }

    fn bid(member: &str, id: &str, code: u8) -> BidRecord {
        BidRecord {
            member: k(member),
            manuscript_id: id.into(),
            bid: BidCode::new(code).unwrap(),
        }
    }

    fn samples(cats: [&[f64]; 4]) -> CategorySamples {
        CategorySamples {
            samples: cats.map(|c| c.to_vec()),
            ..Default::default()
        }
    }

    #[test]
    fn bid_codes() {
        assert!(BidCode::new(0).is_err());
        assert!(BidCode::new(5).is_err());
        assert_eq!(BidCode::new(3).unwrap().value(), 3);
    }

    #[test]
    fn parses_bid_file() {
        let text = "# header\nA Alpha\tm1\t2\n\nB. Beta\tm1\t4\n";
        let bids = parse_bids(text.as_bytes()).unwrap();
        assert_eq!(bids, vec![bid("A Alpha", "m1", 2), bid("B Beta", "m1", 4)]);
        let mut buf = Vec::new();
        write_bids(&bids, &mut buf).unwrap();
        assert_eq!(parse_bids(buf.as_slice()).unwrap(), bids);
    }

    #[test]
    fn bid_parse_errors() {
        assert!(matches!(
            parse_bids("A B\tm1\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_bids("A B\tm1\t7\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_bids("A B\tm1\t1\nA B\tm1\t2\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn aggregation_rules() {
        let rankings = BTreeMap::from([(
            "m1".to_string(),
            ranking("m1", &[("A Alpha", 0.4), ("B Beta", 1.0)]),
        )]);
        let bids = vec![
            bid("A Alpha", "m1", 2),
            bid("C Gamma", "m1", 3),
            bid("Zed Nobody", "m1", 1),
            bid("B Beta", "m2", 4),
        ];
        let unranked = BTreeSet::from(["m2".to_string()]);
        let s = aggregate_energies(&rankings, &unranked, &bids, &graph()).unwrap();
        assert_eq!(s.sample(BidCode(2)), &[0.4]);
        assert_eq!(s.sample(BidCode(3)), &[0.0]);
        assert!(s.sample(BidCode(1)).is_empty());
        assert!(s.sample(BidCode(4)).is_empty());
        assert_eq!(s.excluded_members, vec![k("Zed Nobody")]);
        assert_eq!(s.unranked_bids, 1);
    }

    #[test]
    fn aggregation_errors() {
        let rankings = BTreeMap::from([("m1".to_string(), ranking("m1", &[("A Alpha", 1.0)]))]);
        let err = aggregate_energies(
            &rankings,
            &BTreeSet::new(),
            &[bid("A Alpha", "nope", 1)],
            &graph(),
        )
        .unwrap_err();
        match err {
            Error::UnknownManuscripts(ids) => assert_eq!(ids, vec!["nope".to_string()]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            aggregate_energies(&rankings, &BTreeSet::new(), &[], &graph()),
            Err(Error::NoBids)
        ));
    }

    #[test]
    fn recall_examples() {
        let r = recall_table(&samples([&[0.5, 0.0, 0.2], &[0.0, 0.0], &[0.1, 1.0], &[]]));
        assert!((r[0].unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r[1], Some(0.0));
        assert_eq!(r[2], Some(1.0));
        assert_eq!(r[3], None);
    }

    #[test]
    fn top_examples() {
        let t = top_energies(&samples([&[1.0, 0.9, 0.8], &[0.3], &[], &[1.0, 1.0]]), 2);
        assert_eq!(t[0], vec![0.9, 0.8]);
        let t5 = top_energies(&samples([&[1.0, 0.9, 0.8], &[0.3], &[], &[1.0]]), 5);
        assert_eq!(t5[1], vec![0.3]);
        assert!(t5[2].is_empty());
        assert!(t5[3].is_empty());
    }

    #[test]
    fn ordering_verdicts() {
        let high: Vec<f64> = (0..60).map(|i| 0.5 + (i as f64) / 200.0).collect();
        let high2: Vec<f64> = (0..60).map(|i| 0.5025 + (i as f64) / 200.0).collect();
        let low: Vec<f64> = (0..60).map(|i| (i as f64) / 1000.0).collect();
        let v = check_ordering(&samples([&high, &high2, &low, &low]), 0.05);
        assert_eq!(v, Verdict::Holds);

        let v = check_ordering(&samples([&low, &low, &low, &low]), 0.05);
        assert!(matches!(v, Verdict::Fails { .. }));

        let v = check_ordering(&samples([&high, &high2, &low, &[]]), 0.05);
        assert!(matches!(v, Verdict::Inconclusive { .. }));
    }

    #[test]
    fn report_shapes() {
        let s = samples([&[1.0, 0.5], &[0.25, 0.0], &[0.0], &[0.75]]);
        let r = EvaluationReport::new(&s, vec![], 0.05);
        for a in BidCode::ALL {
            assert_eq!(r.ks.get(a, a).unwrap().p_value, 1.0);
            for b in BidCode::ALL {
                assert_eq!(r.ks.get(a, b), r.ks.get(b, a));
            }
        }
        assert_eq!(r.category(BidCode(1)).total, 1.5);
        assert!(r.render_table().contains("Kolmogorov-Smirnov"));
        assert!(r.to_json().contains("\"verdict\""));

        let mut buf = Vec::new();
        write_histograms(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 * (HISTOGRAM_BINS + 1));
        assert!(text.contains("2\t0\t0\t1"));
        assert!(text.contains("1\t0.95\t1\t1"));
    }

    proptest! {
        #[test]
        fn zero_bid_never_raises_mean_or_recall(values in prop::collection::vec(0.0f64..1.0, 1..30)) {
            let before = samples([&values, &[], &[], &[]]);
            let mut after = before.clone();
            after.push(BidCode(1), 0.0);
            prop_assert_eq!(after.total(BidCode(1)), before.total(BidCode(1)));
            prop_assert!(after.mean(BidCode(1)).unwrap() <= before.mean(BidCode(1)).unwrap());
            prop_assert!(recall_table(&after)[0].unwrap() <= recall_table(&before)[0].unwrap());
            let naive: f64 = values.iter().fold(0.0, |a, b| a + b);
            prop_assert_eq!(before.total(BidCode(1)), naive);
        }
    }
}
