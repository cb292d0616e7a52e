//! Bibliographic records and author-name normalization.
//!
//! Authors are identified by last name plus first and middle initial, with no
//! further disambiguation. Two raw names that agree on those three parts after
//! case-folding are the same author.
//!
//! Corpus files are JSON lines, one manuscript per line:
//!
//! ```text
//! {"id": "m1", "authors": ["Marko A. Rodriguez", "Johan Bollen"], "references": ["J. Bollen", "J. Bollen", "M. Newman"]}
//! ```
//!
//! `references` holds one entry per citing reference, so an author cited twice
//! appears twice.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical author identity: `(last name, first initial, middle initial)`.
///
/// Ordering is lexicographic over the three parts and is the tie-break order
/// used by every ranked output.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AuthorKey {
    last_name: String,
    first_initial: Option<char>,
    middle_initial: Option<char>,
}

impl AuthorKey {
    pub fn new(
        last_name: &str,
        first_initial: Option<char>,
        middle_initial: Option<char>,
    ) -> Result<Self> {
        let last_name = clean_last_name(last_name.split_whitespace());
        if last_name.is_empty() {
            return Err(Error::MalformedName(last_name));
        }
        let fold = |c: char| c.to_lowercase().next().unwrap_or(c);
        Ok(Self {
            last_name,
            first_initial: first_initial.map(fold),
            middle_initial: first_initial.and(middle_initial.map(fold)),
        })
    }

    pub fn last_name(&self) -> &str {
        &self.last_name
    }

    pub fn first_initial(&self) -> Option<char> {
        self.first_initial
    }

    pub fn middle_initial(&self) -> Option<char> {
        self.middle_initial
    }
}

/// Renders as `last, f m`; parsing the rendered form yields the same key.
impl fmt::Display for AuthorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.last_name)?;
        if let Some(first) = self.first_initial {
            write!(f, ", {first}")?;
            if let Some(middle) = self.middle_initial {
                write!(f, " {middle}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for AuthorKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        normalize_author_name(s)
    }
}

impl Serialize for AuthorKey {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AuthorKey {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        normalize_author_name(&raw).map_err(serde::de::Error::custom)
    }
}

fn has_content(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}

fn initial(token: &str) -> Option<char> {
    token
        .chars()
        .find(|c| c.is_alphanumeric())
        .and_then(|c| c.to_lowercase().next())
}

fn clean_last_name<'a>(words: impl Iterator<Item = &'a str>) -> String {
    words
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Maps a raw author string onto its [`AuthorKey`].
///
/// `"First [Middle...] Last"`: the last token is the last name, the first
/// token gives the first initial, and the second-to-last token (when there are
/// at least three) gives the middle initial. `"Last, First [Middle...]"` is
/// also accepted; everything before the comma is the last name and the given
/// names follow the same first/second-to-last rule.
pub fn normalize_author_name(raw: &str) -> Result<AuthorKey> {
    let trimmed = raw.trim();
    let malformed = || Error::MalformedName(raw.to_string());
    if trimmed.is_empty() {
        return Err(malformed());
    }

    let (last_name, given): (String, Vec<&str>) = match trimmed.split_once(',') {
        Some((last, rest)) => (
            clean_last_name(last.split_whitespace()),
            rest.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| has_content(t))
                .collect(),
        ),
        None => {
            let mut tokens: Vec<&str> = trimmed
                .split_whitespace()
                .filter(|t| has_content(t))
                .collect();
            let last = tokens.pop().ok_or_else(malformed)?;
            (clean_last_name(std::iter::once(last)), tokens)
        }
    };
    if last_name.is_empty() {
        return Err(malformed());
    }

    let first_initial = given.first().and_then(|t| initial(t));
    let middle_initial = if given.len() >= 2 {
        given.last().and_then(|t| initial(t))
    } else {
        None
    };
    Ok(AuthorKey {
        last_name,
        first_initial,
        middle_initial,
    })
}

/// One manuscript: its authors and the multiset of authors it references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManuscriptRecord {
    pub id: String,
    /// Distinct authors in byline order.
    pub authors: Vec<AuthorKey>,
    /// Referenced author to number of citing references.
    pub referenced_authors: BTreeMap<AuthorKey, usize>,
}

impl ManuscriptRecord {
    pub fn new(
        id: impl Into<String>,
        authors: impl IntoIterator<Item = AuthorKey>,
        references: impl IntoIterator<Item = AuthorKey>,
    ) -> Self {
        let mut seen = HashSet::new();
        let authors = authors
            .into_iter()
            .filter(|a| seen.insert(a.clone()))
            .collect();
        let mut referenced_authors = BTreeMap::new();
        for r in references {
            *referenced_authors.entry(r).or_insert(0) += 1;
        }
        Self {
            id: id.into(),
            authors,
            referenced_authors,
        }
    }

    /// Number of distinct authors.
    pub fn author_count(&self) -> usize {
        self.authors.len()
    }

    /// Total number of citing references, counting multiplicity.
    pub fn reference_count(&self) -> usize {
        self.referenced_authors.values().sum()
    }
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    id: String,
    authors: Vec<String>,
    #[serde(default)]
    references: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    manuscripts: Vec<ManuscriptRecord>,
}

impl Corpus {
    /// Fails on a repeated manuscript id; `line` in the error is the 1-based
    /// position of the offending record.
    pub fn new(manuscripts: Vec<ManuscriptRecord>) -> Result<Self> {
        let mut ids = HashSet::new();
        for (i, m) in manuscripts.iter().enumerate() {
            if !ids.insert(m.id.as_str()) {
                return Err(Error::DuplicateManuscript {
                    id: m.id.clone(),
                    line: i + 1,
                });
            }
        }
        Ok(Self { manuscripts })
    }

    pub fn manuscripts(&self) -> &[ManuscriptRecord] {
        &self.manuscripts
    }

    pub fn get(&self, id: &str) -> Option<&ManuscriptRecord> {
        self.manuscripts.iter().find(|m| m.id == id)
    }

    pub fn len(&self) -> usize {
        self.manuscripts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manuscripts.is_empty()
    }

    pub fn into_manuscripts(self) -> Vec<ManuscriptRecord> {
        self.manuscripts
    }
}

fn parse_line(text: &str, line: usize) -> Result<ManuscriptRecord> {
    let parse_err = |message: String| Error::Parse { line, message };
    let raw: RecordLine = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    if raw.id.is_empty() {
        return Err(parse_err("empty manuscript id".into()));
    }
    if raw.authors.is_empty() {
        return Err(parse_err(format!("manuscript {:?} has no authors", raw.id)));
    }
    let normalize =
        |name: &String| normalize_author_name(name).map_err(|e| parse_err(e.to_string()));
    let authors = raw
        .authors
        .iter()
        .map(normalize)
        .collect::<Result<Vec<_>>>()?;
    let references = raw
        .references
        .iter()
        .map(normalize)
        .collect::<Result<Vec<_>>>()?;
    Ok(ManuscriptRecord::new(raw.id, authors, references))
}

/// Reads a line-delimited corpus. Blank lines are skipped.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<Corpus> {
    let mut manuscripts = Vec::new();
    let mut ids = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_line(&line, line_no)?;
        if !ids.insert(record.id.clone()) {
            return Err(Error::DuplicateManuscript {
                id: record.id,
                line: line_no,
            });
        }
        manuscripts.push(record);
    }
    Ok(Corpus { manuscripts })
}

pub fn parse_corpus_str(text: &str) -> Result<Corpus> {
    parse_corpus(text.as_bytes())
}

/// Writes the corpus in the same line format [`parse_corpus`] reads, with
/// every name in its canonical rendering.
pub fn write_corpus<W: Write>(corpus: &Corpus, mut writer: W) -> Result<()> {
    for m in &corpus.manuscripts {
        let line = RecordLine {
            id: m.id.clone(),
            authors: m.authors.iter().map(ToString::to_string).collect(),
            references: m
                .referenced_authors
                .iter()
                .flat_map(|(k, &n)| std::iter::repeat_n(k.to_string(), n))
                .collect(),
        };
        serde_json::to_writer(&mut writer, &line).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key(s: &str) -> AuthorKey {
        normalize_author_name(s).unwrap()
    }

    #[test]
    fn normalizes_full_name_with_middle_initial() {
        let k = key("Marko A. Rodriguez");
        assert_eq!(k.last_name(), "rodriguez");
        assert_eq!(k.first_initial(), Some('m'));
        assert_eq!(k.middle_initial(), Some('a'));
    }

    #[test]
    fn normalizes_two_token_name() {
        let k = key("Johan Bollen");
        assert_eq!(
            (k.last_name(), k.first_initial(), k.middle_initial()),
            ("bollen", Some('j'), None)
        );
        assert_eq!(key("JOHAN BOLLEN"), k);
        assert_eq!(key("  J.   Bollen "), k);
    }

    #[test]
    fn long_names_use_second_to_last_token_as_middle() {
        let k = key("Anna Maria Luisa Beatrix Smith");
        assert_eq!(k.first_initial(), Some('a'));
        assert_eq!(k.middle_initial(), Some('b'));
    }

    #[test]
    fn comma_form_matches_natural_order() {
        assert_eq!(key("Rodriguez, Marko A."), key("Marko A. Rodriguez"));
        let k = key("van der Berg, J.");
        assert_eq!(k.last_name(), "van der berg");
        assert_eq!(key(&k.to_string()), k);
    }

    #[test]
    fn single_token_name_has_no_initials() {
        let k = key("Plato");
        assert_eq!(k.to_string(), "plato");
        assert_eq!(k.first_initial(), None);
    }

    #[test]
    fn rejects_empty_names() {
        for raw in ["", "   ", "\t", " - . ", ", John"] {
            assert!(
                matches!(normalize_author_name(raw), Err(Error::MalformedName(_))),
                "{raw:?}"
            );
        }
    }

    #[test]
    fn parses_two_records() {
        let text = r#"{"id":"a","authors":["X Y"],"references":[]}
{"id":"b","authors":["P Q","R S"],"references":["X Y"]}
"#;
        let c = parse_corpus_str(text).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.get("b").unwrap().author_count(), 2);
    }

    #[test]
    fn empty_author_list_reports_line() {
        let text = "{\"id\":\"a\",\"authors\":[\"X Y\"]}\n\n{\"id\":\"b\",\"authors\":[]}\n";
        match parse_corpus_str(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_line() {
        let text = "{\"id\":\"a\",\"authors\":[\"X Y\"]}\nnot json\n";
        assert!(matches!(
            parse_corpus_str(text),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn duplicate_id_rejected() {
        let text = "{\"id\":\"a\",\"authors\":[\"X Y\"]}\n{\"id\":\"a\",\"authors\":[\"Z W\"]}\n";
        assert!(matches!(
            parse_corpus_str(text),
            Err(Error::DuplicateManuscript { line: 2, .. })
        ));
    }

    #[test]
    fn repeated_reference_has_multiplicity_two() {
        let text =
            r#"{"id":"a","authors":["X Y"],"references":["Johan Bollen","J. Bollen","M Newman"]}"#;
        let c = parse_corpus_str(text).unwrap();
        let m = &c.manuscripts()[0];
        assert_eq!(m.referenced_authors[&key("johan bollen")], 2);
        assert_eq!(m.reference_count(), 3);
    }

    #[test]
    fn duplicate_authors_collapse() {
        let m = ManuscriptRecord::new("m", [key("J Smith"), key("John Smith"), key("A B")], []);
        assert_eq!(m.author_count(), 2);
    }

    fn name_strategy() -> impl Strategy<Value = String> {
        prop::collection::vec("[A-Za-z][a-z.\\-']{0,6}", 1..5).prop_map(|t| t.join(" "))
    }

    fn record_strategy() -> impl Strategy<Value = (Vec<String>, Vec<String>)> {
        (
            prop::collection::vec(name_strategy(), 1..5),
            prop::collection::vec(name_strategy(), 0..8),
        )
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(raw in name_strategy()) {
            let k = key(&raw);
            prop_assert_eq!(key(&k.to_string()), k);
        }

        #[test]
        fn corpus_round_trips(records in prop::collection::vec(record_strategy(), 1..6)) {
            let manuscripts: Vec<_> = records
                .iter()
                .enumerate()
                .map(|(i, (a, r))| ManuscriptRecord::new(
                    format!("m{i}"),
                    a.iter().map(|s| key(s)),
                    r.iter().map(|s| key(s)),
                ))
                .collect();
            let total_refs: usize = records.iter().map(|(_, r)| r.len()).sum();
            let corpus = Corpus::new(manuscripts).unwrap();
            prop_assert_eq!(corpus.manuscripts().iter().map(|m| m.reference_count()).sum::<usize>(), total_refs);

            let mut buf = Vec::new();
            write_corpus(&corpus, &mut buf).unwrap();
            let back = parse_corpus(buf.as_slice()).unwrap();
            prop_assert_eq!(back, corpus);
        }
    }
}
