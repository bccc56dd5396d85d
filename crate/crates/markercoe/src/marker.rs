//! Marker COEs: validation of marker data against the overlap conditions,
//! the action on eventually periodic points and finite prefixes, the induced
//! involution `F_φ` of primitive cyclic classes, the explicit cocycle pair,
//! and the swap COEs exchanging two tail-equivalent points.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph};
use crate::words::{self, overlaps, periodic_occurrences, rotate, CyclicClass, EpPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MarkerKind {
    #[serde(rename = "I")]
    TypeI,
    #[serde(rename = "II")]
    TypeII,
}

/// Markers `m`, `m'` and data `{d, d'}`. An empty `d` is the empty path `o`;
/// `d2` is never empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkerData {
    pub kind: MarkerKind,
    pub m: Vec<EdgeId>,
    pub m2: Vec<EdgeId>,
    pub d: Vec<EdgeId>,
    pub d2: Vec<EdgeId>,
}

impl MarkerData {
    /// Checks composability, the type rules and `d != d'`. The data set is
    /// unordered, so an empty `d2` is swapped into `d`.
    pub fn new(
        g: &Graph,
        kind: MarkerKind,
        m: Vec<EdgeId>,
        m2: Vec<EdgeId>,
        mut d: Vec<EdgeId>,
        mut d2: Vec<EdgeId>,
    ) -> Result<MarkerData> {
        if d2.is_empty() {
            std::mem::swap(&mut d, &mut d2);
        }
        if d == d2 {
            return Err(Error::IdenticalData);
        }
        if m.is_empty() || m2.is_empty() {
            return Err(Error::Composability("markers must be nonempty".into()));
        }
        for w in [&m, &m2, &d, &d2] {
            if let Some(&e) = w.iter().find(|&&e| e >= g.num_edges()) {
                return Err(Error::UnknownEdge(e));
            }
        }
        match kind {
            MarkerKind::TypeI if m != m2 => {
                return Err(Error::KindMismatch("type I markers need m = m'".into()))
            }
            MarkerKind::TypeII if m == m2 || m.len() != 1 || m2.len() != 1 => {
                return Err(Error::KindMismatch("type II markers are distinct single edges".into()))
            }
            _ => {}
        }
        for (name, data) in [("d", &d), ("d'", &d2)] {
            let full: Vec<EdgeId> = m.iter().chain(data.iter()).chain(m2.iter()).copied().collect();
            if !g.is_path(&full) {
                return Err(Error::Composability(format!(
                    "m {name} m' = {} is not a path",
                    g.format_word(&full)
                )));
            }
        }
        Ok(MarkerData { kind, m, m2, d, d2 })
    }

    /// Type I marker `m` with data `{o, v}`.
    pub fn type_one(g: &Graph, m: Vec<EdgeId>, v: Vec<EdgeId>) -> Result<MarkerData> {
        MarkerData::new(g, MarkerKind::TypeI, m.clone(), m, Vec::new(), v)
    }

    pub fn from_json(g: &Graph, text: &str) -> Result<MarkerData> {
        let raw: MarkerData = serde_json::from_str(text)?;
        MarkerData::new(g, raw.kind, raw.m, raw.m2, raw.d, raw.d2)
    }
}

/// Which overlap requirement failed, with the offending index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ViolationReport {
    pub condition: String,
    pub left: Vec<EdgeId>,
    pub right: Vec<EdgeId>,
    pub offending: usize,
    pub allowed: String,
}

impl std::fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} at k = {} for {:?} / {:?} (allowed: {})",
            self.condition, self.offending, self.left, self.right, self.allowed
        )
    }
}

/// A marker COE whose data passed the overlap conditions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MarkerCoe {
    data: MarkerData,
    /// `m d m'`
    p: Vec<EdgeId>,
    /// `m d' m'`
    q: Vec<EdgeId>,
}

impl Serialize for MarkerCoe {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.data.serialize(s)
    }
}

/// A marker COE used as one step of a chain, with a note on its origin.
#[derive(Clone, Debug, Serialize)]
pub struct MarkerMove {
    pub coe: MarkerCoe,
    pub tag: String,
}

fn join(parts: &[&[EdgeId]]) -> Vec<EdgeId> {
    parts.concat()
}

fn violation(condition: &str, left: &[EdgeId], right: &[EdgeId], k: usize, allowed: &str) -> Error {
    Error::Overlap(Box::new(ViolationReport {
        condition: condition.into(),
        left: left.to_vec(),
        right: right.to_vec(),
        offending: k,
        allowed: allowed.into(),
    }))
}

pub fn check_overlap_conditions(data: MarkerData) -> Result<MarkerCoe> {
    let p = join(&[&data.m, &data.d, &data.m2]);
    let q = join(&[&data.m, &data.d2, &data.m2]);
    for (a, b) in [(&p, &q), (&q, &p)] {
        if let Some(&i) = words::find_all(b, a).first() {
            return Err(violation("subword", a, b, i, "no occurrence"));
        }
    }
    let check = |a: &[EdgeId], b: &[EdgeId], ok: &dyn Fn(usize) -> bool, allowed: &str| -> Result<()> {
        match overlaps(a, b).into_iter().find(|&k| !ok(k)) {
            Some(k) => Err(violation(&format!("S({a:?}, {b:?})"), a, b, k, allowed)),
            None => Ok(()),
        }
    };
    match data.kind {
        MarkerKind::TypeI => {
            let ml = data.m.len();
            let within = |k: usize| k <= ml;
            check(&p, &q, &within, "1..|m|")?;
            check(&q, &p, &within, "1..|m|")?;
            check(&p, &p, &|k| k <= ml || k == p.len(), "1..|m| or the full length")?;
            check(&q, &q, &|k| k <= ml || k == q.len(), "1..|m| or the full length")?;
        }
        MarkerKind::TypeII => {
            check(&p, &q, &|_| false, "none")?;
            check(&q, &p, &|_| false, "none")?;
            check(&p, &p, &|k| k == p.len(), "the full length")?;
            check(&q, &q, &|k| k == q.len(), "the full length")?;
        }
    }
    Ok(MarkerCoe { data, p, q })
}

/// What the scan does at one position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    /// `m d m'` starts here.
    D,
    /// `m d' m'` starts here.
    D2,
    Letter,
}

impl MarkerCoe {
    pub fn new(data: MarkerData) -> Result<MarkerCoe> {
        check_overlap_conditions(data)
    }

    pub fn data(&self) -> &MarkerData {
        &self.data
    }

    pub fn kind(&self) -> MarkerKind {
        self.data.kind
    }

    /// `m d m'`.
    pub fn word_d(&self) -> &[EdgeId] {
        &self.p
    }

    /// `m d' m'`.
    pub fn word_d2(&self) -> &[EdgeId] {
        &self.q
    }

    fn max_pattern(&self) -> usize {
        self.p.len().max(self.q.len())
    }

    /// `c = min / max` of the two pattern lengths, as a pair.
    pub fn continuity_constant(&self) -> (usize, usize) {
        (self.p.len().min(self.q.len()), self.max_pattern())
    }

    fn step_at(&self, x: &EpPoint, j: usize) -> Step {
        let at = |w: &[EdgeId]| w.iter().enumerate().all(|(t, &e)| x.letter(j + t) == e);
        if at(&self.p) {
            Step::D
        } else if at(&self.q) {
            Step::D2
        } else {
            Step::Letter
        }
    }

    /// Output and input length of a step.
    fn emit(&self, step: Step, letter: EdgeId, out: &mut Vec<EdgeId>) -> usize {
        let m = &self.data.m;
        match step {
            Step::D => {
                out.extend_from_slice(m);
                out.extend_from_slice(&self.data.d2);
                m.len() + self.data.d.len()
            }
            Step::D2 => {
                out.extend_from_slice(m);
                out.extend_from_slice(&self.data.d);
                m.len() + self.data.d2.len()
            }
            Step::Letter => {
                out.push(letter);
                1
            }
        }
    }

    /// `φ(x)` for an eventually periodic point. The scan runs until two
    /// positions past the prefix share a phase modulo the period; the output
    /// between them is the period of the image.
    pub fn apply_point(&self, x: &EpPoint) -> Result<EpPoint> {
        let pre = x.prefix().len();
        let per = x.cycle().len();
        let copies = pre + 2 * (per + self.max_pattern());
        let limit = 8 * (pre + copies * per);
        let mut out = Vec::new();
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut j = 0;
        while j <= limit {
            if j >= pre {
                let phase = (j - pre) % per;
                if let Some(&o1) = seen.get(&phase) {
                    let block = &out[o1..];
                    let root = block[..words::least_period(block)].to_vec();
                    let root = if block.len() % root.len() == 0 { root } else { block.to_vec() };
                    return Ok(EpPoint::from_parts(out[..o1].to_vec(), root));
                }
                seen.insert(phase, out.len());
            }
            let step = self.step_at(x, j);
            j += self.emit(step, x.letter(j), &mut out);
        }
        Err(Error::BoundExhausted(format!("no periodicity within {limit} letters")))
    }

    /// First `out_len` letters of `φ(y)`, valid for every infinite extension
    /// `y` of `x`. Allowed lengths are at most `floor(c |x|)`.
    ///
    /// Undecidable positions near the end of `x` are resolved by exploring
    /// each possible decision; the answer is the common prefix of all
    /// branch outputs.
    pub fn apply_prefix(&self, g: &Graph, x: &[EdgeId], out_len: usize) -> Result<Vec<EdgeId>> {
        if !x.is_empty() && !g.is_path(x) {
            return Err(Error::InvalidWord(g.format_word(x)));
        }
        let (num, den) = self.continuity_constant();
        let available = num * x.len() / den;
        if out_len > available {
            return Err(Error::PrefixTooLong { requested: out_len, available });
        }
        let mut leaves = Vec::new();
        let horizon = x.len() + self.max_pattern();
        self.explore(x.to_vec(), 0, Vec::new(), horizon, &mut leaves);
        let mut common = leaves[0].clone();
        for leaf in &leaves[1..] {
            let k = common.iter().zip(leaf).take_while(|(a, b)| a == b).count();
            common.truncate(k);
        }
        if common.len() < out_len {
            return Err(Error::Verification(format!(
                "only {} letters determined, {} promised",
                common.len(),
                out_len
            )));
        }
        common.truncate(out_len);
        Ok(common)
    }

    fn explore(&self, known: Vec<EdgeId>, mut j: usize, mut out: Vec<EdgeId>, horizon: usize, leaves: &mut Vec<Vec<EdgeId>>) {
        loop {
            if j >= known.len() {
                leaves.push(out);
                return;
            }
            let rest = &known[j..];
            let full = |w: &[EdgeId]| rest.len() >= w.len() && rest[..w.len()] == *w;
            let partial = |w: &[EdgeId]| rest.len() < w.len() && w[..rest.len()] == *rest;
            let step = if full(&self.p) {
                Step::D
            } else if full(&self.q) {
                Step::D2
            } else if !partial(&self.p) && !partial(&self.q) {
                Step::Letter
            } else {
                if j >= horizon {
                    leaves.push(out);
                    return;
                }
                for (w, step) in [(&self.p, Step::D), (&self.q, Step::D2)] {
                    if partial(w) {
                        let mut k2 = known.clone();
                        k2.extend_from_slice(&w[rest.len()..]);
                        let mut o2 = out.clone();
                        let adv = self.emit(step, 0, &mut o2);
                        self.explore(k2, j + adv, o2, horizon, leaves);
                    }
                }
                Step::Letter
            };
            j += self.emit(step, known[j], &mut out);
        }
    }

    /// `(k(x), l(x))` with `σ^k(φ(σx)) = σ^l(φ(x))`.
    pub fn cocycle_pair(&self, x: &EpPoint) -> (usize, usize) {
        let ml = self.data.m.len();
        let (d, d2) = (self.data.d.len(), self.data.d2.len());
        if x.starts_with(&self.p) {
            (ml - 1 + d, ml + d2)
        } else if x.starts_with(&self.q) {
            (ml - 1 + d2, ml + d)
        } else {
            (0, 1)
        }
    }

    /// Rotations `k` of a primitive `w` that are good representatives: an
    /// occurrence of a pattern in `w^Z` is aligned with the wrap-around
    /// point. Type I aligns the end of the data slot, type II the end of
    /// the whole pattern.
    fn good_rotations(&self, w: &[EdgeId]) -> Vec<usize> {
        let n = w.len();
        let ml = self.data.m.len();
        let (sp, sq) = match self.data.kind {
            MarkerKind::TypeI => (ml + self.data.d.len(), ml + self.data.d2.len()),
            MarkerKind::TypeII => (self.p.len(), self.q.len()),
        };
        let mut ks: Vec<usize> = periodic_occurrences(&self.p, w)
            .into_iter()
            .map(|i| (i + sp) % n)
            .chain(periodic_occurrences(&self.q, w).into_iter().map(|i| (i + sq) % n))
            .collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// The lexicographically least good representative, or the canonical
    /// representative when no rotation contains a marker segment.
    pub fn good_representative(&self, cls: &CyclicClass) -> Vec<EdgeId> {
        let w = cls.rep();
        self.good_rotations(w)
            .into_iter()
            .map(|k| rotate(w, k))
            .min()
            .unwrap_or_else(|| w.to_vec())
    }

    /// `F̄_φ` on a good representative.
    fn f_bar(&self, w: &[EdgeId]) -> Result<Vec<EdgeId>> {
        let n = w.len();
        let text: Vec<EdgeId> = match self.data.kind {
            MarkerKind::TypeI => w.iter().chain(&self.data.m).copied().collect(),
            MarkerKind::TypeII => w.to_vec(),
        };
        let mut out = Vec::with_capacity(n + self.max_pattern());
        let mut j = 0;
        while j < n {
            let rest = &text[j..];
            let step = if rest.starts_with(&self.p) {
                Step::D
            } else if rest.starts_with(&self.q) {
                Step::D2
            } else {
                Step::Letter
            };
            j += self.emit(step, text[j], &mut out);
        }
        if j != n {
            return Err(Error::Verification("rewrite straddles the representative boundary".into()));
        }
        Ok(out)
    }

    /// `F_φ([w])` for a primitive class.
    pub fn f_phi(&self, g: &Graph, cls: &CyclicClass) -> Result<CyclicClass> {
        cls.require_primitive(g)?;
        if self.good_rotations(cls.rep()).is_empty() {
            return Ok(cls.clone());
        }
        let out = self.f_bar(&self.good_representative(cls))?;
        let image = CyclicClass::new(g, out)?;
        if !image.is_primitive() {
            return Err(Error::Verification(format!(
                "image of {} is not primitive",
                g.format_word(cls.rep())
            )));
        }
        Ok(image)
    }

    /// `F̄_φ` applied to the `k`-th power of a good representative; equals
    /// the `k`-th power of the image.
    pub fn f_bar_power(&self, cls: &CyclicClass, k: usize) -> Result<Vec<EdgeId>> {
        let w = self.good_representative(cls).repeat(k);
        self.f_bar(&w)
    }
}

/// An inner COE exchanging the cylinders `Z(w1)` and `Z(w2)` by replacing
/// the prefix. `w1 = w2 = o` encodes the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InnerSwap {
    pub w1: Vec<EdgeId>,
    pub w2: Vec<EdgeId>,
    /// Cycle `z` with `x = w1 z^∞` and `y = w2 z^∞`.
    pub tail: Vec<EdgeId>,
}

impl InnerSwap {
    pub fn is_identity(&self) -> bool {
        self.w1.is_empty() && self.w2.is_empty()
    }

    pub fn apply(&self, x: &EpPoint) -> EpPoint {
        let swap = |from: &[EdgeId], to: &[EdgeId]| {
            let rest = x.shift(from.len());
            let prefix: Vec<EdgeId> = to.iter().chain(rest.prefix()).copied().collect();
            EpPoint::from_parts(prefix, rest.cycle().to_vec())
        };
        if self.is_identity() {
            x.clone()
        } else if x.starts_with(&self.w1) {
            swap(&self.w1, &self.w2)
        } else if x.starts_with(&self.w2) {
            swap(&self.w2, &self.w1)
        } else {
            x.clone()
        }
    }
}

/// Prefixes `w1`, `w2` with disjoint cylinders such that `x = w1 z^∞` and
/// `y = w2 z^∞`.
pub fn inner_swap(x: &EpPoint, y: &EpPoint) -> Result<InnerSwap> {
    if !words::tail_equivalent(x, y) {
        return Err(Error::NotTailEquivalent);
    }
    let q = y.cycle().to_vec();
    if x == y {
        return Ok(InnerSwap { w1: Vec::new(), w2: Vec::new(), tail: q });
    }
    let p = x.cycle();
    let t = (0..p.len()).find(|&t| rotate(p, t) == q).expect("same class");
    let mut w1: Vec<EdgeId> = x.prefix().iter().chain(&p[..t]).copied().collect();
    let mut w2 = y.prefix().to_vec();
    let bound = 4 * (w1.len() + w2.len() + q.len() + 1);
    let related = |a: &[EdgeId], b: &[EdgeId]| a.is_empty() || b.is_empty() || a.starts_with(b) || b.starts_with(a);
    while related(&w1, &w2) {
        if w1.len() > bound {
            return Err(Error::BoundExhausted("cylinders never separate".into()));
        }
        w1.extend_from_slice(&q);
        w2.extend_from_slice(&q);
    }
    Ok(InnerSwap { w1, w2, tail: q })
}
