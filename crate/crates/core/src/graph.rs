//! Undirected simple graphs, edge-list/GML ingestion and the
//! shared-neighbor similarity used to weigh label evidence.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Immutable undirected simple graph.
///
/// External node identifiers are kept verbatim and mapped to dense indices
/// `0..n` in first-appearance order. Adjacency lists are sorted so that
/// neighbor intersections are a linear merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
    /// Deduplicated edges in insertion order, oriented as first seen.
    edges: Vec<(usize, usize)>,
}

/// Dissimilarity between two nodes. Pairs with zero similarity have no
/// finite dissimilarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dissimilarity {
    Finite(f64),
    Infinite,
}

impl Dissimilarity {
    pub fn from_similarity(s: f64) -> Self {
        if s > 0.0 {
            Dissimilarity::Finite((1.0 - s) / s)
        } else {
            Dissimilarity::Infinite
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Dissimilarity::Finite(d) => Some(d),
            Dissimilarity::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Dissimilarity::Infinite)
    }
}

impl Graph {
    /// Builds a graph over `ids` from index pairs. Duplicate and reversed
    /// edges collapse; self-loops are rejected.
    pub fn from_edges<I>(ids: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = ids.len();
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::InputMismatch(format!("duplicate node id `{id}`")));
            }
        }
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        let mut adjacency = vec![Vec::new(); n];
        let mut kept = Vec::new();
        for (a, b) in edges {
            for &x in &[a, b] {
                if x >= n {
                    return Err(Error::NodeIndex { index: x, len: n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop {
                    line: 0,
                    node: ids[a].clone(),
                });
            }
            if seen.insert((a.min(b), a.max(b))) {
                adjacency[a].push(b);
                adjacency[b].push(a);
                kept.push((a, b));
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            ids,
            index,
            adjacency,
            edges: kept,
        })
    }

    /// Builds a graph from pairs of external IDs; node order is first
    /// appearance.
    pub fn from_id_pairs<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<Self> {
        let mut ids = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |s: &str| -> usize {
            if let Some(&i) = index.get(s) {
                return i;
            }
            ids.push(s.to_string());
            index.insert(s.to_string(), ids.len() - 1);
            ids.len() - 1
        };
        let mut edges = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let (a, b) = (a.as_ref(), b.as_ref());
            if a == b {
                return Err(Error::SelfLoop {
                    line: 0,
                    node: a.to_string(),
                });
            }
            edges.push((intern(a), intern(b)));
        }
        Graph::from_edges(ids, edges)
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require_index(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// Sorted neighbor indices of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn are_adjacent(&self, i: usize, j: usize) -> bool {
        i < self.node_count() && self.adjacency[i].binary_search(&j).is_ok()
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let len = self.node_count();
        for &x in &[i, j] {
            if x >= len {
                return Err(Error::NodeIndex { index: x, len });
            }
        }
        if i == j {
            return Err(Error::param("j", "similarity needs two distinct nodes"));
        }
        Ok(())
    }

    /// |N(i) ∩ N(j)| by sorted merge.
    pub fn shared_neighbor_count(&self, i: usize, j: usize) -> usize {
        let (a, b) = (&self.adjacency[i], &self.adjacency[j]);
        let (mut x, mut y, mut count) = (0, 0, 0);
        while x < a.len() && y < b.len() {
            match a[x].cmp(&b[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    x += 1;
                    y += 1;
                }
            }
        }
        count
    }

    /// Shared-neighbor similarity: `|N(i) ∩ N(j)| / (d_i + d_j)` for
    /// adjacent nodes, zero otherwise. Always in `[0, 1/2]`.
    pub fn similarity(&self, i: usize, j: usize) -> Result<f64> {
        self.check_pair(i, j)?;
        Ok(self.similarity_unchecked(i, j))
    }

    pub(crate) fn similarity_unchecked(&self, i: usize, j: usize) -> f64 {
        if !self.are_adjacent(i, j) {
            return 0.0;
        }
        let shared = self.shared_neighbor_count(i, j);
        shared as f64 / (self.degree(i) + self.degree(j)) as f64
    }

    /// `(1 - s) / s`, or [`Dissimilarity::Infinite`] when `s = 0`.
    pub fn dissimilarity(&self, i: usize, j: usize) -> Result<Dissimilarity> {
        Ok(Dissimilarity::from_similarity(self.similarity(i, j)?))
    }

    /// Dissimilarity for every entry of every adjacency list, laid out
    /// parallel to [`Graph::neighbors`].
    pub fn neighbor_dissimilarities(&self) -> Vec<Vec<Dissimilarity>> {
        (0..self.node_count())
            .map(|i| {
                self.adjacency[i]
                    .iter()
                    .map(|&j| Dissimilarity::from_similarity(self.similarity_unchecked(i, j)))
                    .collect()
            })
            .collect()
    }

    /// Component id per node, numbered in order of lowest member index.
    pub fn connected_components(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &w in &self.adjacency[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

/// Splits edge-list text into validated ID pairs, keeping line numbers in
/// errors. Blank lines and `#` comments are skipped.
pub(crate) fn parse_edge_pairs<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = n + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected two node IDs, found {} tokens", tokens.len()),
            });
        }
        if tokens[0] == tokens[1] {
            return Err(Error::SelfLoop {
                line: line_no,
                node: tokens[0].to_string(),
            });
        }
        pairs.push((tokens[0].to_string(), tokens[1].to_string()));
    }
    Ok(pairs)
}

/// Reads a whitespace-separated edge list.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    Graph::from_id_pairs(&parse_edge_pairs(reader)?)
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    load_edge_list(text.as_bytes())
}

/// Writes edges in insertion order, so that reloading reproduces the same
/// node order. Isolated nodes are not representable in this format.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    for &(a, b) in g.edges() {
        writeln!(out, "{} {}", g.id(a), g.id(b))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum GmlToken {
    Open,
    Close,
    Word(String),
}

fn gml_tokens(text: &str) -> Result<Vec<(usize, GmlToken)>> {
    let mut tokens = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let mut chars = line.char_indices().peekable();
        while let Some(&(_, ch)) = chars.peek() {
            match ch {
                c if c.is_whitespace() => {
                    chars.next();
                }
                '#' => break,
                '[' => {
                    chars.next();
                    tokens.push((n + 1, GmlToken::Open));
                }
                ']' => {
                    chars.next();
                    tokens.push((n + 1, GmlToken::Close));
                }
                '"' => {
                    chars.next();
                    let mut s = String::new();
                    let mut closed = false;
                    for (_, c) in chars.by_ref() {
                        if c == '"' {
                            closed = true;
                            break;
                        }
                        s.push(c);
                    }
                    if !closed {
                        return Err(Error::Parse {
                            line: n + 1,
                            message: "unterminated string".into(),
                        });
                    }
                    tokens.push((n + 1, GmlToken::Word(s)));
                }
                _ => {
                    let mut s = String::new();
                    while let Some(&(_, c)) = chars.peek() {
                        if c.is_whitespace() || c == '[' || c == ']' {
                            break;
                        }
                        s.push(c);
                        chars.next();
                    }
                    tokens.push((n + 1, GmlToken::Word(s)));
                }
            }
        }
    }
    Ok(tokens)
}

/// Reads the node/edge subset of GML. Node order follows `node` records;
/// every other key is ignored.
pub fn parse_gml(text: &str) -> Result<Graph> {
    let tokens = gml_tokens(text)?;
    let mut node_ids: Vec<String> = Vec::new();
    let mut edge_ids: Vec<(usize, String, String)> = Vec::new();

    // Collects key/value pairs of the record opened at `pos`, skipping nested lists.
    fn record(tokens: &[(usize, GmlToken)], mut pos: usize) -> Result<(HashMap<String, String>, usize)> {
        let mut fields = HashMap::new();
        let open_line = tokens.get(pos.wrapping_sub(1)).map(|t| t.0).unwrap_or(0);
        loop {
            match tokens.get(pos) {
                None => {
                    return Err(Error::Parse {
                        line: open_line,
                        message: "unterminated record".into(),
                    })
                }
                Some((_, GmlToken::Close)) => return Ok((fields, pos + 1)),
                Some((_, GmlToken::Word(key))) => match tokens.get(pos + 1) {
                    Some((_, GmlToken::Word(value))) => {
                        fields.entry(key.clone()).or_insert_with(|| value.clone());
                        pos += 2;
                    }
                    Some((_, GmlToken::Open)) => {
                        pos = skip_list(tokens, pos + 2)?;
                    }
                    _ => {
                        return Err(Error::Parse {
                            line: tokens[pos].0,
                            message: format!("key `{key}` has no value"),
                        })
                    }
                },
                Some((line, GmlToken::Open)) => {
                    return Err(Error::Parse {
                        line: *line,
                        message: "unexpected `[`".into(),
                    })
                }
            }
        }
    }

    fn skip_list(tokens: &[(usize, GmlToken)], mut pos: usize) -> Result<usize> {
        let mut depth = 1usize;
        while depth > 0 {
            match tokens.get(pos) {
                None => {
                    return Err(Error::Parse {
                        line: tokens.last().map(|t| t.0).unwrap_or(0),
                        message: "unbalanced brackets".into(),
                    })
                }
                Some((_, GmlToken::Open)) => depth += 1,
                Some((_, GmlToken::Close)) => depth -= 1,
                _ => {}
            }
            pos += 1;
        }
        Ok(pos)
    }

    let mut pos = 0;
    while pos < tokens.len() {
        match &tokens[pos] {
            (line, GmlToken::Word(key)) if key == "node" || key == "edge" => {
                if tokens.get(pos + 1).map(|t| &t.1) != Some(&GmlToken::Open) {
                    return Err(Error::Parse {
                        line: *line,
                        message: format!("`{key}` must be followed by `[`"),
                    });
                }
                let (fields, next) = record(&tokens, pos + 2)?;
                if key == "node" {
                    let id = fields.get("id").ok_or_else(|| Error::Parse {
                        line: *line,
                        message: "node record without id".into(),
                    })?;
                    node_ids.push(id.clone());
                } else {
                    let get = |k: &str| {
                        fields.get(k).cloned().ok_or_else(|| Error::Parse {
                            line: *line,
                            message: format!("edge record without {k}"),
                        })
                    };
                    edge_ids.push((*line, get("source")?, get("target")?));
                }
                pos = next;
            }
            // `graph [` and any other top-level wrapper: descend into it.
            (_, GmlToken::Word(_)) if tokens.get(pos + 1).map(|t| &t.1) == Some(&GmlToken::Open) => {
                pos += 2;
            }
            (_, GmlToken::Word(_)) => pos += 2,
            _ => pos += 1,
        }
    }

    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, id) in node_ids.iter().enumerate() {
        index.insert(id.as_str(), i);
    }
    let mut edges = Vec::with_capacity(edge_ids.len());
    for (line, a, b) in &edge_ids {
        let lookup = |s: &str| {
            index.get(s).copied().ok_or_else(|| Error::Parse {
                line: *line,
                message: format!("edge refers to undeclared node `{s}`"),
            })
        };
        let (ia, ib) = (lookup(a)?, lookup(b)?);
        if ia == ib {
            return Err(Error::SelfLoop {
                line: *line,
                node: a.clone(),
            });
        }
        edges.push((ia, ib));
    }
    Graph::from_edges(node_ids, edges)
}
