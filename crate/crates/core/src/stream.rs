//! Two-pass stream sources over bipartite graphs, plus the on-disk formats.
//!
//! Input files come in two flavors:
//!
//! * adjacency: one line per left vertex (its id is the line order), holding
//!   whitespace-separated right ids; a blank line is a degree-0 vertex.
//! * edge list: one `left right` pair per line, with all edges of a left
//!   vertex contiguous.
//!
//! Either may start with a `%sofa n=<n> [m=<m>]` header line.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Lines, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vector::SparseBinaryVector;

/// One left vertex together with all of its incident edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub id: usize,
    pub vector: SparseBinaryVector,
}

impl Record {
    pub fn new(id: usize, vector: SparseBinaryVector) -> Self {
        Self { id, vector }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamFormat {
    Adjacency,
    EdgeList,
}

impl FromStr for StreamFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjacency" | "adj" => Ok(Self::Adjacency),
            "edge-list" | "edges" => Ok(Self::EdgeList),
            other => Err(Error::InvalidParameter(format!(
                "unknown stream format `{other}`"
            ))),
        }
    }
}

/// Deterministic, random-access producer of records, used for synthetic
/// streams that are regenerated on every pass instead of being stored.
pub trait RecordGenerator: Send + Sync {
    fn universe(&self) -> usize;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// The record at stream position `position`.
    fn record(&self, position: usize) -> Record;
}

enum Backing {
    Memory(Arc<Vec<Record>>),
    File { path: PathBuf, format: StreamFormat },
    Generated(Arc<dyn RecordGenerator>),
}

/// A replayable left-vertex stream that permits exactly two passes.
pub struct StreamSource {
    backing: Backing,
    n: usize,
    m: Option<usize>,
    header_m: Option<usize>,
    passes_taken: u8,
}

impl fmt::Debug for StreamSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.backing {
            Backing::Memory(_) => "memory".to_string(),
            Backing::File { path, .. } => path.display().to_string(),
            Backing::Generated(_) => "generated".to_string(),
        };
        f.debug_struct("StreamSource")
            .field("source", &kind)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("passes_taken", &self.passes_taken)
            .finish()
    }
}

pub const MAX_PASSES: u8 = 2;

impl StreamSource {
    /// In-memory stream; every record must share universe `n`.
    pub fn from_records(n: usize, records: Vec<Record>) -> Result<Self> {
        for r in &records {
            if r.vector.universe() != n {
                return Err(Error::UniverseMismatch {
                    left: n,
                    right: r.vector.universe(),
                });
            }
        }
        let m = records.len();
        Ok(Self {
            backing: Backing::Memory(Arc::new(records)),
            n,
            m: Some(m),
            header_m: None,
            passes_taken: 0,
        })
    }

    /// Convenience: records with ids `0..` from raw neighbor lists.
    pub fn from_rows(n: usize, rows: &[Vec<u32>]) -> Result<Self> {
        let records = rows
            .iter()
            .enumerate()
            .map(|(i, row)| Ok(Record::new(i, SparseBinaryVector::from_unsorted(n, row.clone())?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_records(n, records)
    }

    pub fn from_generator(generator: Arc<dyn RecordGenerator>) -> Self {
        let n = generator.universe();
        let m = generator.len();
        Self {
            backing: Backing::Generated(generator),
            n,
            m: Some(m),
            header_m: None,
            passes_taken: 0,
        }
    }

    /// Fresh source over the same data with an unused pass budget.
    pub fn reopen(&self) -> Self {
        let backing = match &self.backing {
            Backing::Memory(v) => Backing::Memory(Arc::clone(v)),
            Backing::File { path, format } => Backing::File {
                path: path.clone(),
                format: *format,
            },
            Backing::Generated(g) => Backing::Generated(Arc::clone(g)),
        };
        Self {
            backing,
            n: self.n,
            m: self.m,
            header_m: self.header_m,
            passes_taken: 0,
        }
    }

    /// Right universe size.
    pub fn universe(&self) -> usize {
        self.n
    }

    /// Left vertex count, once known.
    pub fn len_hint(&self) -> Option<usize> {
        self.m
    }

    pub fn passes_taken(&self) -> u8 {
        self.passes_taken
    }

    /// Starts the next pass. A third request fails.
    pub fn next_pass(&mut self) -> Result<Pass<'_>> {
        if self.passes_taken >= MAX_PASSES {
            return Err(Error::PassBudgetExhausted);
        }
        self.passes_taken += 1;
        let n = self.n;
        let iter: Box<dyn Iterator<Item = Result<Record>> + '_> = match &self.backing {
            Backing::Memory(v) => {
                let v = Arc::clone(v);
                Box::new((0..v.len()).map(move |i| Ok(v[i].clone())))
            }
            Backing::Generated(g) => {
                let g = Arc::clone(g);
                Box::new((0..g.len()).map(move |i| Ok(g.record(i))))
            }
            Backing::File { path, format } => Box::new(FilePass::open(path, *format, n)?),
        };
        Ok(Pass {
            iter,
            count: 0,
            m_slot: &mut self.m,
            expected_m: self.header_m,
            finished: false,
        })
    }
}

/// One sweep over a [`StreamSource`].
pub struct Pass<'a> {
    iter: Box<dyn Iterator<Item = Result<Record>> + 'a>,
    count: usize,
    m_slot: &'a mut Option<usize>,
    expected_m: Option<usize>,
    finished: bool,
}

impl Iterator for Pass<'_> {
    type Item = Result<Record>;

    fn next(&mut self) -> Option<Result<Record>> {
        if self.finished {
            return None;
        }
        match self.iter.next() {
            Some(Ok(r)) => {
                self.count += 1;
                Some(Ok(r))
            }
            Some(Err(e)) => {
                self.finished = true;
                Some(Err(e))
            }
            None => {
                self.finished = true;
                if let Some(m) = self.expected_m {
                    if m != self.count {
                        return Some(Err(Error::InvalidParameter(format!(
                            "header declares m={m} but the stream holds {} records",
                            self.count
                        ))));
                    }
                }
                *self.m_slot = Some(self.count);
                None
            }
        }
    }
}

struct Header {
    n: Option<usize>,
    m: Option<usize>,
}

fn parse_header(line: &str, path: &Path) -> Result<Option<Header>> {
    let Some(rest) = line.strip_prefix("%sofa") else {
        return Ok(None);
    };
    let mut header = Header { n: None, m: None };
    for tok in rest.split_whitespace() {
        let (key, value) = tok.split_once('=').ok_or_else(|| malformed(path, 1, "bad header token"))?;
        let value: usize = value
            .parse()
            .map_err(|_| malformed(path, 1, "header value is not an integer"))?;
        match key {
            "n" => header.n = Some(value),
            "m" => header.m = Some(value),
            _ => return Err(malformed(path, 1, &format!("unknown header key `{key}`"))),
        }
    }
    Ok(Some(header))
}

fn malformed(path: &Path, line: usize, reason: &str) -> Error {
    Error::Malformed {
        path: path.to_path_buf(),
        line,
        reason: reason.to_string(),
    }
}

/// Opens a file-backed stream. `n` may come from the header or the caller;
/// if both are given they must agree.
pub fn open_stream(path: impl AsRef<Path>, format: StreamFormat, n: Option<usize>) -> Result<StreamSource> {
    let path = path.as_ref();
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    let header = parse_header(first.trim_end_matches(['\n', '\r']), path)?;
    let (header_n, header_m) = header.map(|h| (h.n, h.m)).unwrap_or((None, None));
    let n = match (header_n, n) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::InvalidParameter(format!(
                "header says n={a} but n={b} was requested"
            )))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(Error::MissingUniverse),
    };
    Ok(StreamSource {
        backing: Backing::File {
            path: path.to_path_buf(),
            format,
        },
        n,
        m: header_m,
        header_m,
        passes_taken: 0,
    })
}

struct FilePass {
    lines: Lines<BufReader<File>>,
    path: PathBuf,
    format: StreamFormat,
    n: usize,
    line_no: usize,
    next_id: usize,
    // edge-list grouping state
    current: Option<(usize, Vec<u32>)>,
    seen: HashSet<usize>,
    replay: Option<String>,
    done: bool,
}

impl FilePass {
    fn open(path: &Path, format: StreamFormat, n: usize) -> Result<Self> {
        let mut lines = BufReader::new(File::open(path)?).lines();
        let mut line_no = 0;
        // Peek the first line to skip a header.
        let mut pending_first = None;
        if let Some(first) = lines.next() {
            let first = first?;
            line_no = 1;
            if parse_header(&first, path)?.is_none() {
                pending_first = Some(first);
            }
        }
        let mut pass = Self {
            lines,
            path: path.to_path_buf(),
            format,
            n,
            line_no,
            next_id: 0,
            current: None,
            seen: HashSet::new(),
            replay: None,
            done: false,
        };
        if let Some(first) = pending_first {
            pass.line_no = 0;
            pass.replay = Some(first);
        }
        Ok(pass)
    }
}

impl FilePass {
    fn parse_right(&self, tok: &str) -> Result<u32> {
        let v: u64 = tok
            .parse()
            .map_err(|_| malformed(&self.path, self.line_no, &format!("`{tok}` is not a vertex id")))?;
        if v >= self.n as u64 {
            return Err(malformed(
                &self.path,
                self.line_no,
                &format!("right id {v} out of range for n={}", self.n),
            ));
        }
        Ok(v as u32)
    }

    fn finish_vector(&self, mut ids: Vec<u32>) -> Result<SparseBinaryVector> {
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(malformed(&self.path, self.line_no, "duplicate right id"));
        }
        SparseBinaryVector::new(self.n, ids)
    }

    fn next_line(&mut self) -> Option<Result<String>> {
        if let Some(line) = self.replay.take() {
            self.line_no += 1;
            return Some(Ok(line));
        }
        let line = self.lines.next()?;
        self.line_no += 1;
        Some(line.map_err(Error::from))
    }

    fn next_adjacency(&mut self) -> Option<Result<Record>> {
        let line = match self.next_line()? {
            Ok(l) => l,
            Err(e) => return Some(Err(e)),
        };
        let ids = line
            .split_whitespace()
            .map(|t| self.parse_right(t))
            .collect::<Result<Vec<_>>>();
        let rec = ids
            .and_then(|ids| self.finish_vector(ids))
            .map(|v| Record::new(self.next_id, v));
        self.next_id += 1;
        Some(rec)
    }

    fn next_edge_group(&mut self) -> Option<Result<Record>> {
        loop {
            let line = match self.next_line() {
                Some(Ok(l)) => l,
                Some(Err(e)) => return Some(Err(e)),
                None => {
                    let (id, ids) = self.current.take()?;
                    return Some(self.finish_vector(ids).map(|v| Record::new(id, v)));
                }
            };
            let mut toks = line.split_whitespace();
            let (Some(u), Some(v)) = (toks.next(), toks.next()) else {
                if line.trim().is_empty() {
                    continue;
                }
                return Some(Err(malformed(&self.path, self.line_no, "expected `left right`")));
            };
            if toks.next().is_some() {
                return Some(Err(malformed(&self.path, self.line_no, "expected `left right`")));
            }
            let u: usize = match u.parse() {
                Ok(u) => u,
                Err(_) => {
                    return Some(Err(malformed(
                        &self.path,
                        self.line_no,
                        &format!("`{u}` is not a vertex id"),
                    )))
                }
            };
            let v = match self.parse_right(v) {
                Ok(v) => v,
                Err(e) => return Some(Err(e)),
            };
            match &mut self.current {
                Some((cur, ids)) if *cur == u => ids.push(v),
                _ => {
                    if !self.seen.insert(u) {
                        return Some(Err(Error::UngroupedEdgeList {
                            path: self.path.clone(),
                            line: self.line_no,
                            id: u,
                        }));
                    }
                    let finished = self.current.replace((u, vec![v]));
                    if let Some((id, ids)) = finished {
                        return Some(self.finish_vector(ids).map(|v| Record::new(id, v)));
                    }
                }
            }
        }
    }
}

impl Iterator for FilePass {
    type Item = Result<Record>;

    fn next(&mut self) -> Option<Result<Record>> {
        if self.done {
            return None;
        }
        let item = match self.format {
            StreamFormat::Adjacency => self.next_adjacency(),
            StreamFormat::EdgeList => self.next_edge_group(),
        };
        match &item {
            None | Some(Err(_)) => self.done = true,
            _ => {}
        }
        item
    }
}

/// Writes records in adjacency format with a `%sofa` header.
pub fn write_adjacency<W, I>(out: &mut W, n: usize, m: Option<usize>, records: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = Record>,
{
    match m {
        Some(m) => writeln!(out, "%sofa n={n} m={m}")?,
        None => writeln!(out, "%sofa n={n}")?,
    }
    let mut line = String::new();
    for r in records {
        line.clear();
        for (i, j) in r.vector.indices().iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&j.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub use crate::artifact::{read_artifact, write_artifact, ArtifactFormat, ClusteringArtifact, LeftAssignment, RunParams};
