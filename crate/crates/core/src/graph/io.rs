//! Binary graph file.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic          8 bytes   "RSWGRAPH"
//! version        u32       1
//! node_count     u64
//! edge_count     u64       undirected edges
//! node table     node_count x { len: u32, last_name: len bytes UTF-8,
//!                              first_initial: u32, middle_initial: u32 }
//!                          initials are Unicode scalar values, 0 = absent
//! adjacency      node_count x { degree: u32,
//!                              degree x { neighbor: u32, raw_weight: f64, probability: f64 } }
//! ```
//!
//! The adjacency holds `2 * edge_count` entries in total, rows sorted by
//! neighbor id.

use std::io::{Read, Write};

use crate::corpus::AuthorKey;
use crate::error::{Error, Result};

use super::{CoauthorGraph, NodeId};

pub const MAGIC: &[u8; 8] = b"RSWGRAPH";
pub const FORMAT_VERSION: u32 = 1;

pub fn save_graph<W: Write>(graph: &CoauthorGraph, mut sink: W) -> Result<()> {
    let (offsets, targets, raw, prob) = graph.csr();
    let mut buf = Vec::with_capacity(32 + graph.node_count() * 24 + targets.len() * 20);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(graph.node_count() as u64).to_le_bytes());
    buf.extend_from_slice(&(graph.edge_count() as u64).to_le_bytes());
    for key in graph.keys() {
        let name = key.last_name().as_bytes();
        buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
        buf.extend_from_slice(name);
        for initial in [key.first_initial(), key.middle_initial()] {
            buf.extend_from_slice(&initial.map_or(0, u32::from).to_le_bytes());
        }
    }
    for node in 0..graph.node_count() {
        let range = offsets[node]..offsets[node + 1];
        buf.extend_from_slice(&(range.len() as u32).to_le_bytes());
        for i in range {
            buf.extend_from_slice(&targets[i].0.to_le_bytes());
            buf.extend_from_slice(&raw[i].to_le_bytes());
            buf.extend_from_slice(&prob[i].to_le_bytes());
        }
    }
    sink.write_all(&buf)?;
    sink.flush()?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Corrupt(format!(
                "unexpected end of file at byte {}",
                self.bytes.len()
            )));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn initial(code: u32) -> Result<Option<char>> {
    match code {
        0 => Ok(None),
        c => char::from_u32(c)
            .map(Some)
            .ok_or_else(|| Error::Corrupt(format!("invalid initial code point {c}"))),
    }
}

pub fn load_graph<R: Read>(mut source: R) -> Result<CoauthorGraph> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Format("missing graph file magic".into()));
    }
    let mut r = Reader {
        bytes: &bytes,
        pos: MAGIC.len(),
    };
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let node_count = r.u64()? as usize;
    let edge_count = r.u64()? as usize;
    // Each node needs at least 16 bytes; reject absurd counts before allocating.
    if node_count > bytes.len() / 16 + 1 {
        return Err(Error::Corrupt(format!(
            "node count {node_count} exceeds file size"
        )));
    }

    let mut keys = Vec::with_capacity(node_count);
    for _ in 0..node_count {
        let len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|e| Error::Corrupt(format!("author name is not UTF-8: {e}")))?;
        let first = initial(r.u32()?)?;
        let middle = initial(r.u32()?)?;
        let key = AuthorKey::new(name, first, middle).map_err(|e| Error::Corrupt(e.to_string()))?;
        if key.last_name() != name {
            return Err(Error::Corrupt(format!(
                "non-canonical author name {name:?}"
            )));
        }
        keys.push(key);
    }

    let mut offsets = Vec::with_capacity(node_count + 1);
    offsets.push(0usize);
    let mut targets = Vec::new();
    let mut raw = Vec::new();
    let mut prob = Vec::new();
    for node in 0..node_count {
        let degree = r.u32()? as usize;
        let mut prev: Option<u32> = None;
        for _ in 0..degree {
            let t = r.u32()?;
            let w = r.f64()?;
            let p = r.f64()?;
            if t as usize >= node_count || t as usize == node {
                return Err(Error::Corrupt(format!(
                    "node {node} has invalid neighbor {t}"
                )));
            }
            if prev.is_some_and(|q| q >= t) {
                return Err(Error::Corrupt(format!(
                    "adjacency of node {node} is not strictly sorted"
                )));
            }
            if !(w.is_finite() && w > 0.0) || !(0.0..=1.0).contains(&p) {
                return Err(Error::Corrupt(format!(
                    "node {node} has invalid edge weight"
                )));
            }
            prev = Some(t);
            targets.push(NodeId(t));
            raw.push(w);
            prob.push(p);
        }
        offsets.push(targets.len());
    }
    if r.pos != bytes.len() {
        return Err(Error::Corrupt(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    if targets.len() != 2 * edge_count {
        return Err(Error::Corrupt(format!(
            "adjacency holds {} entries, header declares {edge_count} edges",
            targets.len()
        )));
    }

    let graph = CoauthorGraph::from_parts(keys, offsets, targets, raw, prob);
    if graph.index.len() != graph.node_count() {
        return Err(Error::Corrupt("duplicate author key in node table".into()));
    }
    for v in graph.nodes() {
        for e in graph.neighbors(v) {
            if graph.raw_weight(e.target, v) != Some(e.raw_weight) {
                return Err(Error::Corrupt(format!(
                    "asymmetric edge {v} - {}",
                    e.target
                )));
            }
        }
    }
    Ok(graph)
}
