//! Straight-line programs for very long cyclic words.
//!
//! Iterating marker rewrites of the form "insert `p^n` between every `e`
//! and a following `f`" multiplies lengths by roughly `n` per round. The
//! words here are kept as DAGs of leaves, concatenations and powers, and
//! pattern occurrences are counted without expansion: a node's count is the
//! sum over its children plus the occurrences straddling each junction,
//! which only depend on the `L - 1` letters on either side.

use std::collections::HashMap;

use crate::graph::EdgeId;

pub type NodeId = usize;

#[derive(Clone, Debug)]
enum Kind {
    Leaf(Vec<EdgeId>),
    Concat(NodeId, NodeId),
    Power(NodeId, u128),
}

#[derive(Clone, Debug)]
struct Node {
    kind: Kind,
    len: u128,
    first: EdgeId,
    last: EdgeId,
}

/// Arena of nonempty words.
#[derive(Clone, Debug, Default)]
pub struct Slp {
    nodes: Vec<Node>,
}

/// Pattern table shared by one counting pass: distinct patterns of one
/// common length.
struct Patterns<'a> {
    len: usize,
    index: HashMap<&'a [EdgeId], usize>,
    count: usize,
}

impl<'a> Patterns<'a> {
    fn new(patterns: &'a [Vec<EdgeId>]) -> Self {
        let len = patterns[0].len();
        assert!(len > 0 && patterns.iter().all(|p| p.len() == len), "patterns must share a positive length");
        let index: HashMap<&[EdgeId], usize> = patterns.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
        assert_eq!(index.len(), patterns.len(), "patterns must be distinct");
        Patterns { len, index, count: patterns.len() }
    }

    /// Occurrences in `text`, added to `acc`.
    fn scan(&self, text: &[EdgeId], acc: &mut [u128]) {
        if text.len() >= self.len {
            for w in text.windows(self.len) {
                if let Some(&i) = self.index.get(w) {
                    acc[i] += 1;
                }
            }
        }
    }
}

struct CountCtx<'a> {
    pats: Patterns<'a>,
    counts: HashMap<NodeId, Vec<u128>>,
    prefixes: HashMap<(NodeId, usize), Vec<EdgeId>>,
    suffixes: HashMap<(NodeId, usize), Vec<EdgeId>>,
}

impl Slp {
    pub fn new() -> Self {
        Slp::default()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn leaf(&mut self, w: Vec<EdgeId>) -> NodeId {
        assert!(!w.is_empty(), "leaves are nonempty");
        let (first, last, len) = (w[0], *w.last().unwrap(), w.len() as u128);
        self.push(Node { kind: Kind::Leaf(w), len, first, last })
    }

    pub fn concat(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        let node = Node { kind: Kind::Concat(a, b), len: na.len + nb.len, first: na.first, last: nb.last };
        self.push(node)
    }

    /// Balanced concatenation of a nonempty list.
    pub fn concat_all(&mut self, parts: &[NodeId]) -> NodeId {
        match parts {
            [] => panic!("concat_all of nothing"),
            [x] => *x,
            _ => {
                let (l, r) = parts.split_at(parts.len() / 2);
                let a = self.concat_all(l);
                let b = self.concat_all(r);
                self.concat(a, b)
            }
        }
    }

    pub fn power(&mut self, x: NodeId, k: u128) -> NodeId {
        assert!(k >= 1, "powers are positive");
        if k == 1 {
            return x;
        }
        let n = &self.nodes[x];
        let node = Node { kind: Kind::Power(x, k), len: n.len * k, first: n.first, last: n.last };
        self.push(node)
    }

    pub fn len(&self, id: NodeId) -> u128 {
        self.nodes[id].len
    }

    pub fn first(&self, id: NodeId) -> EdgeId {
        self.nodes[id].first
    }

    pub fn last(&self, id: NodeId) -> EdgeId {
        self.nodes[id].last
    }

    /// The whole word, or `None` when longer than `cap`.
    pub fn expand(&self, id: NodeId, cap: usize) -> Option<Vec<EdgeId>> {
        if self.len(id) > cap as u128 {
            return None;
        }
        let mut out = Vec::with_capacity(self.len(id) as usize);
        self.expand_into(id, &mut out);
        Some(out)
    }

    fn expand_into(&self, id: NodeId, out: &mut Vec<EdgeId>) {
        match &self.nodes[id].kind {
            Kind::Leaf(w) => out.extend_from_slice(w),
            Kind::Concat(a, b) => {
                self.expand_into(*a, out);
                self.expand_into(*b, out);
            }
            Kind::Power(x, k) => {
                let start = out.len();
                self.expand_into(*x, out);
                let end = out.len();
                for _ in 1..*k {
                    out.extend_from_within(start..end);
                }
            }
        }
    }

    fn prefix(&self, ctx: &mut CountCtx, id: NodeId, t: usize) -> Vec<EdgeId> {
        let t = t.min(self.len(id).min(usize::MAX as u128) as usize);
        if let Some(p) = ctx.prefixes.get(&(id, t)) {
            return p.clone();
        }
        let out = match &self.nodes[id].kind {
            Kind::Leaf(w) => w[..t].to_vec(),
            Kind::Concat(a, b) => {
                let mut p = self.prefix(ctx, *a, t);
                if p.len() < t {
                    p.extend(self.prefix(ctx, *b, t - p.len()));
                }
                p
            }
            Kind::Power(x, _) => {
                let unit = self.prefix(ctx, *x, t);
                unit.iter().cycle().take(t).copied().collect()
            }
        };
        ctx.prefixes.insert((id, t), out.clone());
        out
    }

    fn suffix(&self, ctx: &mut CountCtx, id: NodeId, t: usize) -> Vec<EdgeId> {
        let t = t.min(self.len(id).min(usize::MAX as u128) as usize);
        if let Some(s) = ctx.suffixes.get(&(id, t)) {
            return s.clone();
        }
        let out = match &self.nodes[id].kind {
            Kind::Leaf(w) => w[w.len() - t..].to_vec(),
            Kind::Concat(a, b) => {
                let s = self.suffix(ctx, *b, t);
                if s.len() < t {
                    let mut head = self.suffix(ctx, *a, t - s.len());
                    head.extend(s);
                    head
                } else {
                    s
                }
            }
            Kind::Power(x, _) => {
                let unit = self.suffix(ctx, *x, t);
                let skip = (unit.len() - t % unit.len()) % unit.len();
                unit.iter().cycle().skip(skip).take(t).copied().collect()
            }
        };
        ctx.suffixes.insert((id, t), out.clone());
        out
    }

    /// Occurrences straddling the junction of `a` and `b`.
    fn cross(&self, ctx: &mut CountCtx, a: NodeId, b: NodeId) -> Vec<u128> {
        let t = ctx.pats.len - 1;
        let mut acc = vec![0; ctx.pats.count];
        if t == 0 {
            return acc;
        }
        let mut text = self.suffix(ctx, a, t);
        text.extend(self.prefix(ctx, b, t));
        ctx.pats.scan(&text, &mut acc);
        acc
    }

    fn count_node(&self, ctx: &mut CountCtx, id: NodeId) -> Vec<u128> {
        if let Some(c) = ctx.counts.get(&id) {
            return c.clone();
        }
        let l = ctx.pats.len;
        let out = match &self.nodes[id].kind {
            Kind::Leaf(w) => {
                let mut acc = vec![0; ctx.pats.count];
                ctx.pats.scan(w, &mut acc);
                acc
            }
            Kind::Concat(a, b) => {
                let (a, b) = (*a, *b);
                let ca = self.count_node(ctx, a);
                let cb = self.count_node(ctx, b);
                let cr = self.cross(ctx, a, b);
                (0..ctx.pats.count).map(|i| ca[i] + cb[i] + cr[i]).collect()
            }
            Kind::Power(x, k) => {
                let (x, k) = (*x, *k);
                let xl = self.len(x);
                if xl + 1 >= l as u128 {
                    let cx = self.count_node(ctx, x);
                    let cr = self.cross(ctx, x, x);
                    (0..ctx.pats.count).map(|i| k * cx[i] + (k - 1) * cr[i]).collect()
                } else {
                    let unit = self.expand(x, l).expect("short unit");
                    let n = unit.len();
                    let total = k * n as u128;
                    let mut acc = vec![0; ctx.pats.count];
                    if total >= l as u128 {
                        let last_start = total - l as u128;
                        for r in 0..n {
                            let window: Vec<EdgeId> = (0..l).map(|t| unit[(r + t) % n]).collect();
                            if let Some(&i) = ctx.pats.index.get(window.as_slice()) {
                                if r as u128 <= last_start {
                                    acc[i] += (last_start - r as u128) / n as u128 + 1;
                                }
                            }
                        }
                    }
                    acc
                }
            }
        };
        ctx.counts.insert(id, out.clone());
        out
    }

    fn ctx<'a>(patterns: &'a [Vec<EdgeId>]) -> CountCtx<'a> {
        CountCtx {
            pats: Patterns::new(patterns),
            counts: HashMap::new(),
            prefixes: HashMap::new(),
            suffixes: HashMap::new(),
        }
    }

    /// Occurrences of each pattern inside the word (no wrap-around). All
    /// patterns must have the same length.
    pub fn count(&self, id: NodeId, patterns: &[Vec<EdgeId>]) -> Vec<u128> {
        let mut ctx = Slp::ctx(patterns);
        self.count_node(&mut ctx, id)
    }

    /// Occurrences in the periodic word `w^∞` starting at positions
    /// `0..|w|`.
    pub fn cyclic_count(&self, id: NodeId, patterns: &[Vec<EdgeId>]) -> Vec<u128> {
        let mut ctx = Slp::ctx(patterns);
        let l = ctx.pats.len;
        if self.len(id) + 1 < l as u128 {
            // short words wrap several times: count directly
            let w = self.expand(id, l).expect("short word");
            let n = w.len();
            let mut acc = vec![0; ctx.pats.count];
            for r in 0..n {
                let window: Vec<EdgeId> = (0..l).map(|t| w[(r + t) % n]).collect();
                if let Some(&i) = ctx.pats.index.get(window.as_slice()) {
                    acc[i] += 1;
                }
            }
            return acc;
        }
        let linear = self.count_node(&mut ctx, id);
        let wrap = self.cross(&mut ctx, id, id);
        linear.iter().zip(wrap).map(|(a, b)| a + b).collect()
    }

    /// Inserts `block` between every letter `e` and a following letter `f`,
    /// including across the wrap-around of the cyclic word. Returns the new
    /// root; untouched nodes are shared.
    pub fn insert_at_junctions(&mut self, root: NodeId, e: EdgeId, f: EdgeId, block: NodeId) -> NodeId {
        let mut memo = HashMap::new();
        let body = self.transform(root, e, f, block, &mut memo);
        if self.last(root) == e && self.first(root) == f {
            self.concat(body, block)
        } else {
            body
        }
    }

    fn transform(&mut self, id: NodeId, e: EdgeId, f: EdgeId, block: NodeId, memo: &mut HashMap<NodeId, NodeId>) -> NodeId {
        if let Some(&t) = memo.get(&id) {
            return t;
        }
        let out = match self.nodes[id].kind.clone() {
            Kind::Leaf(w) => {
                let cuts: Vec<usize> = (1..w.len()).filter(|&j| w[j - 1] == e && w[j] == f).collect();
                if cuts.is_empty() {
                    id
                } else {
                    let mut parts = Vec::new();
                    let mut start = 0;
                    for c in cuts {
                        parts.push(self.leaf(w[start..c].to_vec()));
                        parts.push(block);
                        start = c;
                    }
                    parts.push(self.leaf(w[start..].to_vec()));
                    self.concat_all(&parts)
                }
            }
            Kind::Concat(a, b) => {
                let ta = self.transform(a, e, f, block, memo);
                let tb = self.transform(b, e, f, block, memo);
                if self.last(a) == e && self.first(b) == f {
                    let right = self.concat(block, tb);
                    self.concat(ta, right)
                } else if ta == a && tb == b {
                    id
                } else {
                    self.concat(ta, tb)
                }
            }
            Kind::Power(x, k) => {
                let tx = self.transform(x, e, f, block, memo);
                if self.last(x) == e && self.first(x) == f {
                    let unit = self.concat(tx, block);
                    let body = self.power(unit, k - 1);
                    self.concat(body, tx)
                } else if tx == x {
                    id
                } else {
                    self.power(tx, k)
                }
            }
        };
        memo.insert(id, out);
        out
    }
}
