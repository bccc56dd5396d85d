//! Finite directed multigraphs and the structural facts the edge shift needs.
//!
//! Vertices and edges carry dense integer ids. The numeric order on edge ids
//! is the total order used for every canonical choice downstream.

use std::collections::{BTreeMap, VecDeque};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub src: VertexId,
    pub dst: VertexId,
}

/// A finite directed multigraph. Loops and parallel edges are allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<Edge>,
    names: Vec<String>,
    out: Vec<Vec<EdgeId>>,
    inc: Vec<Vec<EdgeId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphClassification {
    pub strongly_connected: bool,
    pub two_edge_connected: bool,
    pub is_subdivided_circle: Option<usize>,
    pub is_rose: Option<usize>,
    /// GCD of all cycle lengths; `None` when the graph has no cycle at all.
    pub period: Option<usize>,
    pub sft_valid: bool,
}

/// Cyclic vertex classes of a strongly connected graph together with the
/// primitive graph on class 0 whose edges are the paths of length `period`.
#[derive(Clone, Debug)]
pub struct PeriodicDecomposition {
    pub period: usize,
    pub classes: Vec<Vec<VertexId>>,
    pub quotient: Graph,
    /// Underlying path in the original graph for each quotient edge.
    pub quotient_paths: Vec<Vec<EdgeId>>,
}

/// `E^[N]` with the paths behind every vertex and edge.
#[derive(Clone, Debug)]
pub struct HigherEdgeGraph {
    pub graph: Graph,
    pub vertex_paths: Vec<Vec<EdgeId>>,
    pub edge_paths: Vec<Vec<EdgeId>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<VertexId>,
    edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    id: EdgeId,
    src: VertexId,
    dst: VertexId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

fn default_names(count: usize) -> Vec<String> {
    if count <= 26 {
        (0..count).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
    } else {
        (0..count).map(|i| format!("e{i}")).collect()
    }
}

impl Graph {
    /// Builds a graph from `(src, dst)` pairs; edge `i` gets id `i`.
    pub fn new(num_vertices: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let names = default_names(edges.len());
        Self::with_names(num_vertices, edges, names)
    }

    pub fn with_names(
        num_vertices: usize,
        edges: &[(VertexId, VertexId)],
        names: Vec<String>,
    ) -> Result<Self> {
        if names.len() != edges.len() {
            return Err(Error::InvalidGraph("one name per edge required".into()));
        }
        let mut out = vec![Vec::new(); num_vertices];
        let mut inc = vec![Vec::new(); num_vertices];
        let mut list = Vec::with_capacity(edges.len());
        for (id, &(src, dst)) in edges.iter().enumerate() {
            if src >= num_vertices || dst >= num_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge {id} ({src} -> {dst}) leaves the vertex range 0..{num_vertices}"
                )));
            }
            out[src].push(id);
            inc[dst].push(id);
            list.push(Edge { id, src, dst });
        }
        Ok(Graph { num_vertices, edges: list, names, out, inc })
    }

    /// Multigraph with `matrix[u][v]` parallel edges from `u` to `v`, ids
    /// assigned in row-major order.
    pub fn from_adjacency(matrix: &[Vec<usize>]) -> Result<Self> {
        let n = matrix.len();
        let mut edges = Vec::new();
        for (u, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGraph("adjacency matrix must be square".into()));
            }
            for (v, &k) in row.iter().enumerate() {
                edges.extend(std::iter::repeat_n((u, v), k));
            }
        }
        Graph::new(n, &edges)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GraphJson = serde_json::from_str(text)?;
        let n = raw.vertices.len();
        let mut sorted = raw.vertices.clone();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(i, &v)| i != v) {
            return Err(Error::InvalidGraph("vertex ids must be 0..|V|-1".into()));
        }
        let mut slots: Vec<Option<&EdgeJson>> = vec![None; raw.edges.len()];
        for e in &raw.edges {
            match slots.get_mut(e.id) {
                None => {
                    return Err(Error::InvalidGraph(format!(
                        "edge id {} outside 0..{}",
                        e.id,
                        raw.edges.len()
                    )))
                }
                Some(Some(_)) => {
                    return Err(Error::InvalidGraph(format!("duplicate edge id {}", e.id)))
                }
                Some(slot) => *slot = Some(e),
            }
        }
        let ordered: Vec<&EdgeJson> = slots.into_iter().map(|s| s.unwrap()).collect();
        let pairs: Vec<_> = ordered.iter().map(|e| (e.src, e.dst)).collect();
        let mut names = default_names(pairs.len());
        for (i, e) in ordered.iter().enumerate() {
            if let Some(name) = &e.name {
                names[i] = name.clone();
            }
        }
        let mut seen = std::collections::HashSet::new();
        if !names.iter().all(|n| seen.insert(n.as_str())) {
            return Err(Error::InvalidGraph("edge names must be distinct".into()));
        }
        Graph::with_names(n, &pairs, names)
    }

    pub fn to_json(&self) -> String {
        let raw = GraphJson {
            vertices: (0..self.num_vertices).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson { id: e.id, src: e.src, dst: e.dst, name: Some(self.names[e.id].clone()) })
                .collect(),
        };
        serde_json::to_string(&raw).expect("graph serialises")
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn src(&self, e: EdgeId) -> VertexId {
        self.edges[e].src
    }

    pub fn dst(&self, e: EdgeId) -> VertexId {
        self.edges[e].dst
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out[v]
    }

    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.inc[v]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.names[e]
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.names.iter().position(|n| n == name)
    }

    /// Renders an edge sequence with the edge names; single-letter names are
    /// juxtaposed, longer ones separated by spaces.
    pub fn format_word(&self, edges: &[EdgeId]) -> String {
        if edges.is_empty() {
            return "o".into();
        }
        let sep = if edges.iter().all(|&e| self.names[e].chars().count() == 1) { "" } else { " " };
        edges.iter().map(|&e| self.names[e].as_str()).collect::<Vec<_>>().join(sep)
    }

    /// Parses a word written as in [`Graph::format_word`], or as
    /// comma/space separated names or numeric ids. `o` is the empty path.
    pub fn parse_word(&self, text: &str) -> Result<Vec<EdgeId>> {
        let text = text.trim();
        if text == "o" || text.is_empty() {
            return Ok(Vec::new());
        }
        let tokens: Vec<&str> = text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        let lookup = |t: &str| -> Option<EdgeId> {
            self.edge_by_name(t).or_else(|| t.parse::<usize>().ok().filter(|&i| i < self.num_edges()))
        };
        if tokens.len() == 1 && lookup(tokens[0]).is_none() {
            // juxtaposed single-character names
            return tokens[0]
                .chars()
                .map(|c| {
                    self.edge_by_name(&c.to_string())
                        .ok_or_else(|| Error::InvalidWord(format!("unknown edge '{c}'")))
                })
                .collect();
        }
        tokens
            .iter()
            .map(|t| lookup(t).ok_or_else(|| Error::InvalidWord(format!("unknown edge '{t}'"))))
            .collect()
    }

    /// Vertex adjacency matrix, `A[u][v]` = number of edges `u -> v`.
    pub fn adjacency_matrix(&self) -> Vec<Vec<usize>> {
        let mut a = vec![vec![0; self.num_vertices]; self.num_vertices];
        for e in &self.edges {
            a[e.src][e.dst] += 1;
        }
        a
    }

    /// True when consecutive edges compose.
    pub fn is_path(&self, edges: &[EdgeId]) -> bool {
        edges.iter().all(|&e| e < self.num_edges())
            && edges.windows(2).all(|w| self.dst(w[0]) == self.src(w[1]))
    }

    /// Strongly connected components, Tarjan's algorithm without recursion.
    /// Components come out in reverse topological order.
    pub fn strongly_connected_components(&self) -> Vec<Vec<VertexId>> {
        const UNSEEN: usize = usize::MAX;
        let n = self.num_vertices;
        let mut index = vec![UNSEEN; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comps = Vec::new();
        let mut counter = 0;
        for root in 0..n {
            if index[root] != UNSEEN {
                continue;
            }
            // (vertex, next out-edge position)
            let mut call: Vec<(VertexId, usize)> = vec![(root, 0)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&(v, pos)) = call.last() {
                if let Some(&e) = self.out[v].get(pos) {
                    call.last_mut().unwrap().1 += 1;
                    let w = self.dst(e);
                    if index[w] == UNSEEN {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                    continue;
                }
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
        comps
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.num_vertices > 0 && self.strongly_connected_components().len() == 1
    }

    /// BFS depths from `root` along out-edges; `None` for unreachable vertices.
    fn bfs_levels(&self, root: VertexId) -> Vec<Option<usize>> {
        let mut level = vec![None; self.num_vertices];
        level[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let next = level[v].unwrap() + 1;
            for &e in &self.out[v] {
                let w = self.dst(e);
                if level[w].is_none() {
                    level[w] = Some(next);
                    queue.push_back(w);
                }
            }
        }
        level
    }

    /// GCD of cycle lengths, from level differences inside each component.
    pub fn period(&self) -> Option<usize> {
        let mut g = 0usize;
        for comp in self.strongly_connected_components() {
            let root = comp[0];
            let mut member = vec![false; self.num_vertices];
            comp.iter().for_each(|&v| member[v] = true);
            let level = self.bfs_levels(root);
            for e in &self.edges {
                if member[e.src] && member[e.dst] {
                    let (a, b) = (level[e.src].unwrap() as i64 + 1, level[e.dst].unwrap() as i64);
                    g = g.gcd(&((a - b).unsigned_abs() as usize));
                }
            }
        }
        (g > 0).then_some(g)
    }

    pub fn classify(&self) -> GraphClassification {
        let strongly_connected = self.is_strongly_connected();
        let two_edge_connected = strongly_connected
            && (0..self.num_edges()).all(|e| self.remove_edge(e).unwrap().is_strongly_connected());
        let is_subdivided_circle =
            (strongly_connected && self.num_edges() == self.num_vertices).then_some(self.num_vertices);
        let is_rose = (self.num_vertices == 1 && self.num_edges() > 0).then_some(self.num_edges());
        let sft_valid = strongly_connected && self.num_edges() > 0 && is_subdivided_circle.is_none();
        GraphClassification {
            strongly_connected,
            two_edge_connected,
            is_subdivided_circle,
            is_rose,
            period: self.period(),
            sft_valid,
        }
    }

    /// Errors unless the graph is strongly connected and not a subdivided circle.
    pub fn require_sft(&self) -> Result<()> {
        let c = self.classify();
        if c.sft_valid {
            Ok(())
        } else if let Some(n) = c.is_subdivided_circle {
            Err(Error::NotSftValid(format!("graph is the subdivided circle S^1_{n}")))
        } else {
            Err(Error::NotSftValid("graph is not strongly connected".into()))
        }
    }

    /// Same vertices, edge `e` dropped; ids above `e` shift down by one.
    pub fn remove_edge(&self, e: EdgeId) -> Result<Graph> {
        if e >= self.num_edges() {
            return Err(Error::UnknownEdge(e));
        }
        let pairs: Vec<_> = self.edges.iter().filter(|x| x.id != e).map(|x| (x.src, x.dst)).collect();
        let names = self.names.iter().enumerate().filter(|&(i, _)| i != e).map(|(_, n)| n.clone()).collect();
        Graph::with_names(self.num_vertices, &pairs, names)
    }

    /// All paths of length `n`, in lexicographic order of edge sequences.
    pub fn paths_of_length(&self, n: usize) -> Vec<Vec<EdgeId>> {
        let mut layer: Vec<Vec<EdgeId>> = (0..self.num_edges()).map(|e| vec![e]).collect();
        if n == 0 {
            return Vec::new();
        }
        for _ in 1..n {
            let mut next = Vec::new();
            for p in &layer {
                for &e in &self.out[self.dst(*p.last().unwrap())] {
                    let mut q = p.clone();
                    q.push(e);
                    next.push(q);
                }
            }
            layer = next;
        }
        layer
    }

    /// Paths of length `n` starting at `v`, lexicographic.
    pub fn paths_from(&self, v: VertexId, n: usize) -> Vec<Vec<EdgeId>> {
        let mut layer = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for p in &layer {
                let end = p.last().map_or(v, |&e| self.dst(e));
                for &e in &self.out[end] {
                    let mut q = p.clone();
                    q.push(e);
                    next.push(q);
                }
            }
            layer = next;
        }
        layer
    }

    /// Shortest path from `from` to `to` (empty when equal), ties broken
    /// towards smaller edge ids. `avoid` vertices are never passed through
    /// as intermediate points.
    pub fn shortest_path(&self, from: VertexId, to: VertexId, avoid: &[VertexId]) -> Option<Vec<EdgeId>> {
        if from == to {
            return Some(Vec::new());
        }
        let mut via: Vec<Option<EdgeId>> = vec![None; self.num_vertices];
        let mut seen = vec![false; self.num_vertices];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v != from && avoid.contains(&v) {
                continue;
            }
            for &e in &self.out[v] {
                let w = self.dst(e);
                if !seen[w] {
                    seen[w] = true;
                    via[w] = Some(e);
                    if w == to {
                        let mut path = vec![e];
                        let mut cur = v;
                        while cur != from {
                            let p = via[cur].unwrap();
                            path.push(p);
                            cur = self.src(p);
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(w);
                }
            }
        }
        None
    }

    pub fn periodic_decomposition(&self) -> Result<PeriodicDecomposition> {
        if !self.is_strongly_connected() {
            return Err(Error::NotSftValid("periodic decomposition needs a strongly connected graph".into()));
        }
        let period = self
            .period()
            .ok_or_else(|| Error::NotSftValid("graph has no cycles".into()))?;
        let level = self.bfs_levels(0);
        let mut classes = vec![Vec::new(); period];
        for (v, l) in level.iter().enumerate() {
            classes[l.unwrap() % period].push(v);
        }
        let mut index = BTreeMap::new();
        for (i, &v) in classes[0].iter().enumerate() {
            index.insert(v, i);
        }
        let mut pairs = Vec::new();
        let mut quotient_paths = Vec::new();
        for p in self.paths_of_length(period) {
            if let (Some(&a), Some(&b)) = (index.get(&self.src(p[0])), index.get(&self.dst(*p.last().unwrap()))) {
                pairs.push((a, b));
                quotient_paths.push(p);
            }
        }
        let names = quotient_paths.iter().map(|p| self.format_word(p)).collect();
        let quotient = Graph::with_names(classes[0].len(), &pairs, names)?;
        Ok(PeriodicDecomposition { period, classes, quotient, quotient_paths })
    }

    /// `E^[N]`: vertices are paths of length `N-1`, edges paths of length
    /// `N`, ids in lexicographic order of the underlying sequences.
    pub fn higher_edge_graph(&self, n: usize) -> Result<HigherEdgeGraph> {
        if n == 0 {
            return Err(Error::InvalidParameter("higher edge graph needs N >= 1".into()));
        }
        if n == 1 {
            return Ok(HigherEdgeGraph {
                graph: self.clone(),
                vertex_paths: vec![Vec::new(); self.num_vertices],
                edge_paths: (0..self.num_edges()).map(|e| vec![e]).collect(),
            });
        }
        let vertex_paths = self.paths_of_length(n - 1);
        let index: BTreeMap<&[EdgeId], usize> =
            vertex_paths.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
        let edge_paths = self.paths_of_length(n);
        let pairs: Vec<_> = edge_paths.iter().map(|p| (index[&p[..n - 1]], index[&p[1..]])).collect();
        let names = edge_paths.iter().map(|p| self.format_word(p)).collect();
        let graph = Graph::with_names(vertex_paths.len(), &pairs, names)?;
        Ok(HigherEdgeGraph { graph, vertex_paths, edge_paths })
    }
}

pub fn rose(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidParameter("rose needs n >= 1".into()));
    }
    Graph::new(1, &vec![(0, 0); n])
}

pub fn subdivided_circle(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidParameter("subdivided circle needs n >= 1".into()));
    }
    Graph::new(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
}

/// The graph of the `r x r` matrix with `n` in the top-right corner and ones
/// on the subdiagonal; `higman_thompson(n, 1)` is the `n`-rose.
pub fn higman_thompson(n: usize, r: usize) -> Result<Graph> {
    if n < 2 || r == 0 {
        return Err(Error::InvalidParameter("higman_thompson needs n >= 2 and r >= 1".into()));
    }
    let mut m = vec![vec![0; r]; r];
    m[0][r - 1] += n;
    for i in 1..r {
        m[i][i - 1] = 1;
    }
    Graph::from_adjacency(&m)
}

/// Two vertices `u = 0`, `v = 1`; edges `e1, e2: u -> v` and `f1, f2: v -> u`.
pub fn theta() -> Graph {
    let names = ["e1", "e2", "f1", "f2"].map(String::from).to_vec();
    Graph::with_names(2, &[(0, 1), (0, 1), (1, 0), (1, 0)], names).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_small_graphs() {
        let c = rose(2).unwrap().classify();
        assert!(c.strongly_connected && c.two_edge_connected && c.sft_valid);
        assert_eq!((c.is_rose, c.period), (Some(2), Some(1)));

        let c = subdivided_circle(3).unwrap().classify();
        assert_eq!((c.is_subdivided_circle, c.period, c.sft_valid), (Some(3), Some(3), false));

        let c = theta().classify();
        assert!(c.two_edge_connected);
        assert_eq!(c.period, Some(2));
    }

    #[test]
    fn builders() {
        assert_eq!(higman_thompson(2, 1).unwrap(), rose(2).unwrap());
        assert_eq!(higman_thompson(3, 2).unwrap().adjacency_matrix(), vec![vec![0, 3], vec![1, 0]]);
        let c = subdivided_circle(1).unwrap();
        assert_eq!((c.num_vertices(), c.num_edges()), (1, 1));
        assert!(higman_thompson(1, 2).is_err());
    }

    #[test]
    fn decomposition_of_theta() {
        let d = theta().periodic_decomposition().unwrap();
        assert_eq!(d.period, 2);
        assert_eq!(d.quotient.num_vertices(), 1);
        assert_eq!(d.quotient.num_edges(), 4);
        let d = rose(3).unwrap().periodic_decomposition().unwrap();
        assert_eq!(d.period, 1);
        assert_eq!(d.quotient, rose(3).unwrap());
    }

    #[test]
    fn higher_edge_graphs() {
        let h = rose(2).unwrap().higher_edge_graph(2).unwrap();
        assert_eq!((h.graph.num_vertices(), h.graph.num_edges()), (2, 4));
        assert_eq!(h.edge_paths, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let h = theta().higher_edge_graph(2).unwrap();
        assert_eq!((h.graph.num_vertices(), h.graph.num_edges()), (4, 8));
    }

    #[test]
    fn remove_edge_cases() {
        assert_eq!(rose(2).unwrap().remove_edge(0).unwrap().adjacency_matrix(), vec![vec![1]]);
        assert!(theta().remove_edge(0).unwrap().is_strongly_connected());
        assert!(matches!(theta().remove_edge(9), Err(Error::UnknownEdge(9))));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let g = theta();
        let back = Graph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"vertices":[0],"edges":[{"id":0,"src":0,"dst":1}]}"#;
        assert!(Graph::from_json(bad).is_err());
        let gap = r#"{"vertices":[0],"edges":[{"id":1,"src":0,"dst":0}]}"#;
        assert!(Graph::from_json(gap).is_err());
    }

    #[test]
    fn word_parsing() {
        let g = theta();
        assert_eq!(g.parse_word("e1 f2").unwrap(), vec![0, 3]);
        assert_eq!(g.format_word(&[0, 3]), "e1 f2");
        let r = rose(3).unwrap();
        assert_eq!(r.parse_word("abca").unwrap(), vec![0, 1, 2, 0]);
        assert_eq!(r.parse_word("0,2").unwrap(), vec![0, 2]);
        assert!(r.parse_word("abz").is_err());
    }
}
