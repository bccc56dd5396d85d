//! Finite paths, cycles, prime factorisation, rotation classes and
//! eventually periodic points.
//!
//! Most algorithms work on plain edge slices; [`Word`], [`Cycle`] and
//! [`CyclicClass`] add the graph-level invariants on top.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId};

/// Longest proper border of every prefix of `p` (the KMP failure table).
pub fn failure_table<T: Eq>(p: &[T]) -> Vec<usize> {
    let mut fail = vec![0; p.len()];
    let mut k = 0;
    for i in 1..p.len() {
        while k > 0 && p[i] != p[k] {
            k = fail[k - 1];
        }
        if p[i] == p[k] {
            k += 1;
        }
        fail[i] = k;
    }
    fail
}

/// Smallest `d >= 1` with `w[i] = w[i + d]` throughout.
pub fn least_period<T: Eq>(w: &[T]) -> usize {
    match w.len() {
        0 => 0,
        n => n - failure_table(w)[n - 1],
    }
}

/// True unless `w` is `u^k` for some `k >= 2`.
pub fn is_primitive_word<T: Eq>(w: &[T]) -> bool {
    let n = w.len();
    let d = least_period(w);
    d == n || !n.is_multiple_of(d)
}

/// Number of distinct rotations of `w`.
pub fn rotation_count<T: Eq>(w: &[T]) -> usize {
    let n = w.len();
    let d = least_period(w);
    if n.is_multiple_of(d) {
        d
    } else {
        n
    }
}

/// Start index of the lexicographically least rotation (two-pointer scan,
/// linear time). Returns the smallest such index.
pub fn least_rotation<T: Ord>(w: &[T]) -> usize {
    let n = w.len();
    let (mut i, mut j, mut k) = (0, 1, 0);
    while i < n && j < n && k < n {
        let (a, b) = (&w[(i + k) % n], &w[(j + k) % n]);
        match a.cmp(b) {
            Ordering::Equal => {
                k += 1;
                continue;
            }
            Ordering::Greater => i += k + 1,
            Ordering::Less => j += k + 1,
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j)
}

pub fn rotate<T: Clone>(w: &[T], k: usize) -> Vec<T> {
    if w.is_empty() {
        return Vec::new();
    }
    let k = k % w.len();
    w[k..].iter().chain(&w[..k]).cloned().collect()
}

/// `S(w, w')`: all `k > 0` such that the length-`k` suffix of `w` equals the
/// length-`k` prefix of `w'`, ascending.
pub fn overlaps<T: Eq>(w: &[T], w2: &[T]) -> Vec<usize> {
    if w.is_empty() || w2.is_empty() {
        return Vec::new();
    }
    let fail = failure_table(w2);
    let mut q = 0;
    for c in w {
        if q == w2.len() {
            q = fail[q - 1];
        }
        while q > 0 && w2[q] != *c {
            q = fail[q - 1];
        }
        if w2[q] == *c {
            q += 1;
        }
    }
    let mut out = Vec::new();
    while q > 0 {
        out.push(q);
        q = fail[q - 1];
    }
    out.reverse();
    out
}

/// Start positions of `needle` in `hay`.
pub fn find_all<T: Eq>(hay: &[T], needle: &[T]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > hay.len() {
        return Vec::new();
    }
    let fail = failure_table(needle);
    let mut q = 0;
    let mut hits = Vec::new();
    for (i, c) in hay.iter().enumerate() {
        while q > 0 && needle[q] != *c {
            q = fail[q - 1];
        }
        if needle[q] == *c {
            q += 1;
        }
        if q == needle.len() {
            hits.push(i + 1 - q);
            q = fail[q - 1];
        }
    }
    hits
}

pub fn contains<T: Eq>(hay: &[T], needle: &[T]) -> bool {
    needle.is_empty() || !find_all(hay, needle).is_empty()
}

/// Positions `0 <= k < |w|` such that `v` is a prefix of `w(k)^∞`.
pub fn periodic_occurrences<T: Eq + Clone>(v: &[T], w: &[T]) -> Vec<usize> {
    if w.is_empty() || v.is_empty() {
        return Vec::new();
    }
    let n = w.len();
    let text: Vec<T> = (0..n + v.len() - 1).map(|i| w[i % n].clone()).collect();
    find_all(&text, v)
}

/// `<v, [w]>`: how many distinct rotations of `w` have `v` as a prefix of
/// their periodic extension.
pub fn occurrence_count_slice<T: Eq + Clone>(v: &[T], w: &[T]) -> usize {
    let size = rotation_count(w);
    periodic_occurrences(v, w).into_iter().filter(|&k| k < size).count()
}

/// A nonempty composable edge sequence. The empty path is modelled by
/// `Option<Word>` at use sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    edges: Vec<EdgeId>,
    source: VertexId,
    range: VertexId,
}

impl Word {
    pub fn new(g: &Graph, edges: Vec<EdgeId>) -> Result<Word> {
        if edges.is_empty() {
            return Err(Error::InvalidWord("words are nonempty; use o for the empty path".into()));
        }
        if let Some(&e) = edges.iter().find(|&&e| e >= g.num_edges()) {
            return Err(Error::UnknownEdge(e));
        }
        if !g.is_path(&edges) {
            return Err(Error::InvalidWord(format!("{} is not a path", g.format_word(&edges))));
        }
        let source = g.src(edges[0]);
        let range = g.dst(*edges.last().unwrap());
        Ok(Word { edges, source, range })
    }

    pub fn parse(g: &Graph, text: &str) -> Result<Word> {
        Word::new(g, g.parse_word(text)?)
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn into_edges(self) -> Vec<EdgeId> {
        self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn range(&self) -> VertexId {
        self.range
    }

    pub fn is_cycle(&self) -> bool {
        self.source == self.range
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.range != other.source {
            return Err(Error::InvalidWord("concatenation does not compose".into()));
        }
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Ok(Word { edges, source: self.source, range: other.range })
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.edges.serialize(s)
    }
}

/// A cycle with its prime factorisation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cycle {
    word: Word,
    /// Start index of every prime factor; begins with 0.
    cuts: Vec<usize>,
}

impl Cycle {
    pub fn new(g: &Graph, edges: Vec<EdgeId>) -> Result<Cycle> {
        Cycle::from_word(g, Word::new(g, edges)?)
    }

    pub fn parse(g: &Graph, text: &str) -> Result<Cycle> {
        Cycle::new(g, g.parse_word(text)?)
    }

    pub fn from_word(g: &Graph, word: Word) -> Result<Cycle> {
        if !word.is_cycle() {
            return Err(Error::NotACycle(g.format_word(word.edges())));
        }
        let base = word.source();
        let cuts = (0..word.len()).filter(|&i| g.src(word.edges[i]) == base).collect();
        Ok(Cycle { word, cuts })
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.word.edges
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn base(&self) -> VertexId {
        self.word.source
    }

    /// `ℓ(p)`, the number of prime factors.
    pub fn prime_length(&self) -> usize {
        self.cuts.len()
    }

    pub fn prime_factors(&self) -> Vec<&[EdgeId]> {
        let e = self.edges();
        (0..self.cuts.len())
            .map(|i| &e[self.cuts[i]..self.cuts.get(i + 1).copied().unwrap_or(e.len())])
            .collect()
    }

    /// `p[0, k-1]`: the first `k` prime factors as one edge slice.
    pub fn prime_prefix(&self, k: usize) -> &[EdgeId] {
        let end = self.cuts.get(k).copied().unwrap_or(self.len());
        &self.edges()[..end]
    }

    pub fn is_primitive(&self) -> bool {
        is_primitive_word(self.edges())
    }

    /// The cycle `w_{[k..]} w_{[..k]}`.
    pub fn rotate(&self, g: &Graph, k: usize) -> Cycle {
        Cycle::new(g, rotate(self.edges(), k)).expect("rotations of cycles are cycles")
    }

    /// Shortest `q` with `self = q^j`.
    pub fn primitive_root(&self, g: &Graph) -> Cycle {
        let d = least_period(self.edges());
        if self.len().is_multiple_of(d) && d < self.len() {
            Cycle::new(g, self.edges()[..d].to_vec()).expect("roots of cycles are cycles")
        } else {
            self.clone()
        }
    }

    pub fn class(&self, g: &Graph) -> CyclicClass {
        CyclicClass::of_cycle(g, self)
    }
}

/// Prime factors of `c` as cycles.
pub fn prime_decomposition(g: &Graph, c: &Cycle) -> Vec<Cycle> {
    c.prime_factors()
        .into_iter()
        .map(|f| Cycle::new(g, f.to_vec()).expect("prime factors are cycles"))
        .collect()
}

/// Periods reported by [`general_cyclic_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicPeriod {
    /// Least period counted in prime factors.
    pub prime_period: usize,
    /// The same period counted in letters.
    pub letter_period: usize,
    pub gcd: usize,
}

/// If `p[k, N-1] p[0, k-2] = p[0, N-2]` as sequences of prime factors,
/// returns the least period of `p` in prime factors and in letters.
pub fn general_cyclic_check(c: &Cycle, k: usize) -> Result<Option<CyclicPeriod>> {
    let f = c.prime_factors();
    let n = f.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..{}", n.saturating_sub(1))));
    }
    let lhs: Vec<&[EdgeId]> = f[k..].iter().chain(&f[..k - 1]).copied().collect();
    if lhs != f[..n - 1] {
        return Ok(None);
    }
    let d = (1..=n).find(|&d| n.is_multiple_of(d) && (d..n).all(|i| f[i] == f[i - d])).unwrap();
    Ok(Some(CyclicPeriod {
        prime_period: d,
        letter_period: f[..d].iter().map(|x| x.len()).sum(),
        gcd: k.gcd(&n),
    }))
}

/// A rotation class of cycles, stored by its least rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CyclicClass {
    rep: Word,
    primitive: bool,
    size: usize,
}

impl CyclicClass {
    fn of_cycle(g: &Graph, c: &Cycle) -> CyclicClass {
        let e = c.edges();
        let rep = rotate(e, least_rotation(e));
        let v = g.src(rep[0]);
        CyclicClass {
            rep: Word { edges: rep, source: v, range: v },
            primitive: is_primitive_word(e),
            size: rotation_count(e),
        }
    }

    /// Class of the cycle with the given edges.
    pub fn new(g: &Graph, edges: Vec<EdgeId>) -> Result<CyclicClass> {
        Ok(CyclicClass::of_cycle(g, &Cycle::new(g, edges)?))
    }

    pub fn parse(g: &Graph, text: &str) -> Result<CyclicClass> {
        CyclicClass::new(g, g.parse_word(text)?)
    }

    pub fn rep(&self) -> &[EdgeId] {
        &self.rep.edges
    }

    pub fn rep_word(&self) -> &Word {
        &self.rep
    }

    pub fn len(&self) -> usize {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    /// Number of distinct rotations.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn cycle(&self, g: &Graph) -> Cycle {
        Cycle::new(g, self.rep.edges.clone()).expect("class representatives are cycles")
    }

    /// The distinct rotations, in rotation order starting at the
    /// representative.
    pub fn rotations(&self) -> Vec<Vec<EdgeId>> {
        (0..self.size).map(|k| rotate(self.rep(), k)).collect()
    }

    pub fn require_primitive(&self, g: &Graph) -> Result<()> {
        if self.primitive {
            Ok(())
        } else {
            Err(Error::NotPrimitive(g.format_word(self.rep())))
        }
    }
}

impl PartialOrd for CyclicClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shorter classes first, then lexicographic representatives.
impl Ord for CyclicClass {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.len(), self.rep()).cmp(&(other.len(), other.rep()))
    }
}

impl Serialize for CyclicClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CyclicClass", 2)?;
        st.serialize_field("rep", self.rep())?;
        st.serialize_field("primitive", &self.primitive)?;
        st.end()
    }
}

pub fn cyclic_class(g: &Graph, c: &Cycle) -> CyclicClass {
    CyclicClass::of_cycle(g, c)
}

/// `<v, [w]>` for a class.
pub fn occurrence_count(v: &[EdgeId], cls: &CyclicClass) -> usize {
    occurrence_count_slice(v, cls.rep())
}

/// Every primitive class with `|p| <= max_len`, ordered by length and then
/// representative. Walks Lyndon paths with the FKM prenecklace test.
pub fn enumerate_primitive_classes(g: &Graph, max_len: usize) -> Result<Vec<CyclicClass>> {
    g.require_sft()?;
    let mut found: Vec<Vec<EdgeId>> = Vec::new();
    let mut word = Vec::with_capacity(max_len);
    fn walk(g: &Graph, word: &mut Vec<EdgeId>, period: usize, max_len: usize, found: &mut Vec<Vec<EdgeId>>) {
        let t = word.len();
        if period == t && g.dst(word[t - 1]) == g.src(word[0]) {
            found.push(word.clone());
        }
        if t == max_len {
            return;
        }
        let anchor = word[t - period];
        for &e in g.out_edges(g.dst(word[t - 1])) {
            let p = match e.cmp(&anchor) {
                Ordering::Less => continue,
                Ordering::Equal => period,
                Ordering::Greater => t + 1,
            };
            word.push(e);
            walk(g, word, p, max_len, found);
            word.pop();
        }
    }
    if max_len > 0 {
        for e in 0..g.num_edges() {
            word.push(e);
            walk(g, &mut word, 1, max_len, &mut found);
            word.pop();
        }
    }
    found.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    Ok(found
        .into_iter()
        .map(|w| {
            let v = g.src(w[0]);
            CyclicClass { size: w.len(), primitive: true, rep: Word { edges: w, source: v, range: v } }
        })
        .collect())
}

/// An eventually periodic point `w p^∞`, stored with the shortest prefix and
/// a primitive cycle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EpPoint {
    prefix: Vec<EdgeId>,
    cycle: Vec<EdgeId>,
}

impl EpPoint {
    /// `prefix` may be empty (the path `o`). The cycle is replaced by its
    /// primitive root and the pair is normalised.
    pub fn new(g: &Graph, prefix: Vec<EdgeId>, cycle: Vec<EdgeId>) -> Result<EpPoint> {
        let c = Cycle::new(g, cycle)?;
        if !prefix.is_empty() {
            let w = Word::new(g, prefix.clone())?;
            if w.range() != c.base() {
                return Err(Error::InvalidWord("prefix does not lead into the cycle".into()));
            }
        }
        Ok(EpPoint::from_parts(prefix, c.primitive_root(g).edges().to_vec()))
    }

    pub fn periodic(g: &Graph, cycle: Vec<EdgeId>) -> Result<EpPoint> {
        EpPoint::new(g, Vec::new(), cycle)
    }

    /// Normalises without graph checks; `cycle` must already be primitive.
    pub(crate) fn from_parts(mut prefix: Vec<EdgeId>, mut cycle: Vec<EdgeId>) -> EpPoint {
        while let (Some(&a), Some(&b)) = (prefix.last(), cycle.last()) {
            if a != b {
                break;
            }
            prefix.pop();
            cycle.rotate_right(1);
        }
        EpPoint { prefix, cycle }
    }

    pub fn prefix(&self) -> &[EdgeId] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[EdgeId] {
        &self.cycle
    }

    pub fn letter(&self, i: usize) -> EdgeId {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// First `n` letters.
    pub fn take(&self, n: usize) -> Vec<EdgeId> {
        (0..n).map(|i| self.letter(i)).collect()
    }

    pub fn starts_with(&self, v: &[EdgeId]) -> bool {
        v.iter().enumerate().all(|(i, &e)| self.letter(i) == e)
    }

    /// `σ^k x`.
    pub fn shift(&self, k: usize) -> EpPoint {
        if k <= self.prefix.len() {
            EpPoint { prefix: self.prefix[k..].to_vec(), cycle: self.cycle.clone() }
        } else {
            let r = (k - self.prefix.len()) % self.cycle.len();
            EpPoint { prefix: Vec::new(), cycle: rotate(&self.cycle, r) }
        }
    }

    pub fn class_rep(&self) -> Vec<EdgeId> {
        rotate(&self.cycle, least_rotation(&self.cycle))
    }

    pub fn format(&self, g: &Graph) -> String {
        if self.prefix.is_empty() {
            format!("({})^inf", g.format_word(&self.cycle))
        } else {
            format!("{}({})^inf", g.format_word(&self.prefix), g.format_word(&self.cycle))
        }
    }
}

impl fmt::Display for EpPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({:?})^inf", self.prefix, self.cycle)
    }
}

impl Serialize for EpPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("EpPoint", 2)?;
        st.serialize_field("prefix", &self.prefix)?;
        st.serialize_field("cycle", &self.cycle)?;
        st.end()
    }
}

/// Tail equivalence of eventually periodic points: same cycle class.
pub fn tail_equivalent(x: &EpPoint, y: &EpPoint) -> bool {
    x.class_rep() == y.class_rep()
}
