//! Two constructions on top of marker COEs.
//!
//! Transitivity: any primitive class is carried to any other by a finite
//! chain of type I marker moves. Each move appends one prime factor
//! (marker `m` = current cycle, data `{o, next prime}`); classes are first
//! extended to cover every edge and then joined through a common bridge
//! class `[p s^m q t^n]`.
//!
//! Proximality: for every pair `(e, f)` of consecutive edges a primitive
//! cycle `p` is built so that the markers `e`, `f` with data `{o, p^n}`
//! satisfy the overlap conditions for every `n`. Composing the whole family
//! drives every periodic measure towards `η_[p_1]` as `n` grows; the
//! convergence report measures this on compressed words.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::marker::{MarkerCoe, MarkerData, MarkerKind, MarkerMove};
use crate::measures::{format_rational, pushforward, to_f64, PeriodicCombo, Rational};
use crate::slp::{NodeId, Slp};
use crate::words::{contains, is_primitive_word, overlaps, rotate, Cycle, CyclicClass};

/// Longest word the explicit fallbacks will materialise.
pub const EXPLICIT_CAP: usize = 1 << 20;

// ---------------------------------------------------------------------------
// transitivity

/// `q` starts with `p` at the same base and every prefix of `q` made of
/// whole prime factors, from `p` itself to `q`, is primitive.
pub fn is_primitive_extension(p: &Cycle, q: &Cycle) -> bool {
    let (lp, lq) = (p.prime_length(), q.prime_length());
    p.base() == q.base()
        && lp <= lq
        && q.prime_prefix(lp) == p.edges()
        && (lp..=lq).all(|k| is_primitive_word(q.prime_prefix(k)))
}

/// The prime cycle `q` at `s(p)`, if any, with `p q^k` a proper power for
/// some `k`. Only prime factors of `p` can do this; `k` runs up to
/// `ℓ(p) + 2`.
pub fn unary_obstruction(g: &Graph, p: &Cycle) -> Result<Option<Cycle>> {
    if !p.is_primitive() {
        return Err(Error::NotPrimitive(g.format_word(p.edges())));
    }
    let bound = p.prime_length() + 2;
    let mut candidates = p.prime_factors();
    candidates.sort();
    candidates.dedup();
    for q in candidates {
        let mut w = p.edges().to_vec();
        for _ in 0..bound {
            w.extend_from_slice(q);
            if !is_primitive_word(&w) {
                return Ok(Some(Cycle::new(g, q.to_vec())?));
            }
        }
    }
    Ok(None)
}

/// Shortest prime cycle at `v` through `e`.
fn prime_cycle_through(g: &Graph, v: VertexId, e: EdgeId) -> Option<Vec<EdgeId>> {
    let mut c = g.shortest_path(v, g.src(e), &[v])?;
    c.push(e);
    c.extend(g.shortest_path(g.dst(e), v, &[v])?);
    Some(c)
}

/// A primitive extension of `p` visiting every edge, appending one prime
/// cycle per missing edge.
pub fn primitive_extension_all_edges(g: &Graph, p: &Cycle) -> Result<Cycle> {
    g.require_sft()?;
    if !p.is_primitive() {
        return Err(Error::NotPrimitive(g.format_word(p.edges())));
    }
    let v = p.base();
    let mut q = p.edges().to_vec();
    loop {
        let used: HashSet<EdgeId> = q.iter().copied().collect();
        let Some(e) = (0..g.num_edges()).find(|e| !used.contains(e)) else { break };
        let c = prime_cycle_through(g, v, e).expect("strongly connected");
        q.extend(c);
    }
    let q = Cycle::new(g, q)?;
    if !is_primitive_extension(p, &q) {
        return Err(Error::Verification(format!(
            "{} is not a primitive extension of {}",
            g.format_word(q.edges()),
            g.format_word(p.edges())
        )));
    }
    Ok(q)
}

/// `r = p s^m q t^n` together with the rotation `q t^n p s^m`; `r` is a
/// primitive extension of `p` and the rotation one of `q`.
#[derive(Clone, Debug, Serialize)]
pub struct Bridge {
    pub r: Vec<EdgeId>,
    pub r_rot: Vec<EdgeId>,
    pub s: Vec<EdgeId>,
    pub t: Vec<EdgeId>,
    pub m: usize,
    pub n: usize,
}

/// Retry budget: `n` is doubled this many times.
const BRIDGE_DOUBLINGS: u32 = 3;

pub fn bridge_class(g: &Graph, p: &Cycle, q: &Cycle) -> Result<Bridge> {
    if p.base() != q.base() {
        return Err(Error::InvalidParameter("bridge needs cycles at a common vertex".into()));
    }
    for c in [p, q] {
        if !c.is_primitive() {
            return Err(Error::NotPrimitive(g.format_word(c.edges())));
        }
    }
    if p == q {
        let r = p.edges().to_vec();
        return Ok(Bridge { r: r.clone(), r_rot: r, s: Vec::new(), t: Vec::new(), m: 0, n: 0 });
    }
    if p.prime_length() > q.prime_length() {
        let b = bridge_class(g, q, p)?;
        return Ok(Bridge { r: b.r_rot, r_rot: b.r, s: b.t, t: b.s, m: b.n, n: b.m });
    }
    let v = p.base();
    let mut primes: Vec<Vec<EdgeId>> = p.prime_factors().into_iter().chain(q.prime_factors()).map(<[_]>::to_vec).collect();
    primes.extend((0..g.num_edges()).filter_map(|e| prime_cycle_through(g, v, e)));
    primes.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    primes.dedup();
    let usable = |c: &Cycle, obstruction: &Option<Cycle>| -> Vec<Vec<EdgeId>> {
        primes
            .iter()
            .filter(|s| obstruction.as_ref().is_none_or(|o| o.edges() != s.as_slice()))
            .filter(|s| c.prime_factors().iter().any(|f| f != &s.as_slice()))
            .cloned()
            .collect()
    };
    let s_cands = usable(p, &unary_obstruction(g, p)?);
    let t_cands = usable(q, &unary_obstruction(g, q)?);
    let (lp, lq) = (p.prime_length(), q.prime_length());
    for attempt in 0..=BRIDGE_DOUBLINGS {
        let n = (2 * lq + 1) << attempt;
        let m = n + lq - lp;
        for s in &s_cands {
            for t in &t_cands {
                let r = [p.edges(), &s.repeat(m), q.edges(), &t.repeat(n)].concat();
                let r_rot = [q.edges(), &t.repeat(n), p.edges(), &s.repeat(m)].concat();
                let (rc, rr) = (Cycle::new(g, r.clone())?, Cycle::new(g, r_rot.clone())?);
                if is_primitive_extension(p, &rc) && is_primitive_extension(q, &rr) {
                    return Ok(Bridge { r, r_rot, s: s.clone(), t: t.clone(), m, n });
                }
            }
        }
    }
    Err(Error::Verification(format!(
        "no bridge between {} and {} passed its certificates",
        g.format_word(p.edges()),
        g.format_word(q.edges())
    )))
}

/// Marker moves carrying `source` to `target`; verified by folding on
/// construction.
#[derive(Clone, Debug, Serialize)]
pub struct MoveChain {
    source: CyclicClass,
    target: CyclicClass,
    moves: Vec<MarkerMove>,
    fold_verified: bool,
}

impl MoveChain {
    pub fn new(g: &Graph, source: CyclicClass, moves: Vec<MarkerMove>, target: CyclicClass) -> Result<MoveChain> {
        let chain = MoveChain { source, target, moves, fold_verified: false };
        let end = chain.fold(g, &chain.source)?;
        if end != chain.target {
            return Err(Error::Verification(format!(
                "chain ends at {} instead of {}",
                g.format_word(end.rep()),
                g.format_word(chain.target.rep())
            )));
        }
        Ok(MoveChain { fold_verified: true, ..chain })
    }

    pub fn empty(cls: CyclicClass) -> MoveChain {
        MoveChain { source: cls.clone(), target: cls, moves: Vec::new(), fold_verified: true }
    }

    pub fn source(&self) -> &CyclicClass {
        &self.source
    }

    pub fn target(&self) -> &CyclicClass {
        &self.target
    }

    pub fn moves(&self) -> &[MarkerMove] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn fold_verified(&self) -> bool {
        self.fold_verified
    }

    /// Applies the moves in order.
    pub fn fold(&self, g: &Graph, cls: &CyclicClass) -> Result<CyclicClass> {
        self.moves.iter().try_fold(cls.clone(), |c, mv| mv.coe.f_phi(g, &c))
    }

    /// Every move is an involution, so the reversed list undoes the chain.
    pub fn reversed(&self, g: &Graph) -> Result<MoveChain> {
        let moves = self.moves.iter().rev().cloned().collect();
        MoveChain::new(g, self.target.clone(), moves, self.source.clone())
    }

    pub fn then(self, g: &Graph, next: MoveChain) -> Result<MoveChain> {
        if self.target != next.source {
            return Err(Error::InvalidParameter("chains do not meet".into()));
        }
        let moves = self.moves.into_iter().chain(next.moves).collect();
        MoveChain::new(g, self.source, moves, next.target)
    }
}

/// One type I move per prime factor that `q` adds to `p`.
pub fn extension_chain(g: &Graph, p: &Cycle, q: &Cycle) -> Result<MoveChain> {
    if !is_primitive_extension(p, q) {
        return Err(Error::InvalidParameter(format!(
            "{} is not a primitive extension of {}",
            g.format_word(q.edges()),
            g.format_word(p.edges())
        )));
    }
    let factors = q.prime_factors();
    let moves = (p.prime_length()..q.prime_length())
        .map(|k| {
            let data = MarkerData::type_one(g, q.prime_prefix(k).to_vec(), factors[k].to_vec())?;
            Ok(MarkerMove { coe: MarkerCoe::new(data)?, tag: format!("extend to {} prime factors", k + 1) })
        })
        .collect::<Result<Vec<_>>>()?;
    MoveChain::new(g, p.class(g), moves, q.class(g))
}

/// Rotations of `c` that are cycles at `v`.
fn rotations_at(g: &Graph, c: &Cycle, v: VertexId) -> Vec<Cycle> {
    (0..c.len()).filter(|&k| g.src(c.edges()[k]) == v).map(|k| c.rotate(g, k)).collect()
}

/// A chain between rotations of `a` and `b` when one is a primitive
/// extension of the other.
fn direct_chain(g: &Graph, a: &Cycle, b: &Cycle) -> Result<Option<MoveChain>> {
    for ra in (0..a.len()).map(|k| a.rotate(g, k)) {
        for rb in rotations_at(g, b, ra.base()) {
            if is_primitive_extension(&ra, &rb) {
                return extension_chain(g, &ra, &rb).map(Some);
            }
            if is_primitive_extension(&rb, &ra) {
                return extension_chain(g, &rb, &ra)?.reversed(g).map(Some);
            }
        }
    }
    Ok(None)
}

/// A fold-verified chain of marker moves from `src` to `dst`.
pub fn solve_transitivity(g: &Graph, src: &CyclicClass, dst: &CyclicClass) -> Result<MoveChain> {
    g.require_sft()?;
    src.require_primitive(g)?;
    dst.require_primitive(g)?;
    if src == dst {
        return Ok(MoveChain::empty(src.clone()));
    }
    let (p, q) = (src.cycle(g), dst.cycle(g));
    if let Some(chain) = direct_chain(g, &p, &q)? {
        return Ok(chain);
    }
    let pe = primitive_extension_all_edges(g, &p)?;
    let qe = primitive_extension_all_edges(g, &q)?;
    let to_pe = extension_chain(g, &p, &pe)?;
    let to_qe = extension_chain(g, &q, &qe)?;
    let qv = rotations_at(g, &qe, pe.base()).into_iter().next().expect("qe visits every vertex");
    let middle = match direct_chain(g, &pe, &qv)? {
        Some(chain) => chain,
        None if pe.class(g) == qv.class(g) => MoveChain::empty(pe.class(g)),
        None => {
            let b = bridge_class(g, &pe, &qv)?;
            let up = extension_chain(g, &pe, &Cycle::new(g, b.r)?)?;
            let down = extension_chain(g, &qv, &Cycle::new(g, b.r_rot)?)?.reversed(g)?;
            up.then(g, down)?
        }
    };
    to_pe.then(g, middle)?.then(g, to_qe.reversed(g)?)
}

// ---------------------------------------------------------------------------
// the proximality family

/// Path from `from` to `to` that never uses `banned`.
fn path_avoiding(g: &Graph, from: VertexId, to: VertexId, banned: EdgeId) -> Option<Vec<EdgeId>> {
    let h = g.remove_edge(banned).ok()?;
    let path = h.shortest_path(from, to, &[])?;
    Some(path.into_iter().map(|x| if x >= banned { x + 1 } else { x }).collect())
}

fn pairs(g: &Graph) -> Vec<(EdgeId, EdgeId)> {
    g.paths_of_length(2).into_iter().map(|p| (p[0], p[1])).collect()
}

fn sandwich(e: EdgeId, p: &[EdgeId], n: usize, f: EdgeId) -> Vec<EdgeId> {
    let mut w = Vec::with_capacity(n * p.len() + 2);
    w.push(e);
    for _ in 0..n {
        w.extend_from_slice(p);
    }
    w.push(f);
    w
}

/// How far the properties of an all-pairs cycle are re-checked.
pub const ALL_E2_CHECK_POWERS: usize = 4;

/// Checks the properties required of `p` for the pair `(e, f)`: `p` is a
/// primitive cycle at `r(e)`; `p`, read cyclically, contains every other
/// pair, so each block `p^n` carries them all; `e p^n f` contains no `ef`; `e p^n f` overlaps itself only trivially (and in one letter when
/// `e = f`); distinct powers overlap in at most one letter.
pub fn verify_all_e2(g: &Graph, e: EdgeId, f: EdgeId, p: &[EdgeId]) -> Result<()> {
    let fail = |msg: String| Err(Error::Verification(msg));
    let name = g.format_word(p);
    if p.is_empty() || !g.is_path(p) || g.src(p[0]) != g.dst(e) || g.dst(*p.last().unwrap()) != g.src(f) {
        return fail(format!("{name} is not a cycle at the junction of the pair"));
    }
    if !is_primitive_word(p) {
        return fail(format!("{name} is not primitive"));
    }
    // inside p read cyclically, not only across the junctions with e and f
    let looped = [p, &p[..1]].concat();
    for (a, b) in pairs(g) {
        if (a, b) != (e, f) && !contains(&looped, &[a, b]) {
            return fail(format!("{name} misses {}", g.format_word(&[a, b])));
        }
    }
    let single: Vec<usize> = if e == f { vec![1] } else { vec![] };
    for n in 1..=ALL_E2_CHECK_POWERS {
        let w = sandwich(e, p, n, f);
        if contains(&w, &[e, f]) {
            return fail(format!("{} contains the pair itself", g.format_word(&w)));
        }
        let mut expect = single.clone();
        expect.push(w.len());
        if overlaps(&w, &w) != expect {
            return fail(format!("self-overlaps of {} are {:?}", g.format_word(&w), overlaps(&w, &w)));
        }
        for m in 1..=ALL_E2_CHECK_POWERS {
            let w2 = sandwich(e, p, m, f);
            if m != n && overlaps(&w, &w2).iter().any(|k| !single.contains(k)) {
                return fail(format!("{} and {} overlap", g.format_word(&w), g.format_word(&w2)));
            }
        }
    }
    Ok(())
}

/// All pairs over `alphabet` concatenated in lexicographic order of
/// alphabet positions.
fn pair_word(alphabet: &[EdgeId]) -> Vec<EdgeId> {
    alphabet.iter().flat_map(|&x| alphabet.iter().flat_map(move |&y| [x, y])).collect()
}

fn rose_cycle(g: &Graph, e: EdgeId, f: EdgeId, repeat: usize) -> Vec<EdgeId> {
    if e == f {
        // e_1 (e e_1)(e e_2)…(e e_N) e e_1 r^j: every `e x` and `x e` sits
        // inside p, and no `e` follows the first letter of r^j
        let others: Vec<EdgeId> = (0..g.num_edges()).filter(|&x| x != e).collect();
        let mut q = vec![others[0]];
        for &x in &others {
            q.extend([e, x]);
        }
        q.extend([e, others[0]]);
        let r = pair_word(&others);
        let j = q.len() / r.len() + repeat;
        for _ in 0..j {
            q.extend_from_slice(&r);
        }
        q
    } else {
        // e p f = q r^j with a unique `f e` inside q; the leading `e e e`
        // puts `e e` inside p
        let mid: Vec<EdgeId> = (0..g.num_edges()).filter(|&x| x != e && x != f).collect();
        let mut q = vec![e, e, e];
        for &x in &mid {
            q.extend([e, x]);
        }
        q.extend([e, mid[0], f, e]);
        let alphabet: Vec<EdgeId> = mid.iter().copied().chain([f]).collect();
        let r = pair_word(&alphabet);
        let j = q.len() / r.len() + repeat;
        let mut w = q;
        for _ in 0..j {
            w.extend_from_slice(&r);
        }
        w[1..w.len() - 1].to_vec()
    }
}

fn general_cycle(g: &Graph, e: EdgeId, f: EdgeId, repeat: usize) -> Result<Vec<EdgeId>> {
    let v = g.src(f);
    let bug = |what: &str| Error::Verification(format!("construction failed: {what}"));
    let mut fs: Vec<EdgeId> = g.out_edges(v).iter().copied().filter(|&x| x != f).collect();
    let first = fs.iter().position(|&x| g.dst(x) != v).ok_or_else(|| bug("no non-loop edge leaves r(e)"))?;
    fs.swap(0, first);
    let f1 = fs[0];
    let mut q = Vec::new();
    for &fi in &fs {
        if fi == e {
            q.push(e);
        } else {
            q.push(fi);
            q.extend(path_avoiding(g, g.dst(fi), g.src(e), e).ok_or_else(|| bug("E minus e disconnected"))?);
            q.push(e);
        }
    }
    let head: Vec<EdgeId> = std::iter::once(e).chain(q.iter().copied()).collect();
    let missing: Vec<EdgeId> = g
        .in_edges(g.src(e))
        .iter()
        .copied()
        .filter(|&x| x != e && !contains(&head, &[x, e]))
        .collect();
    for ej in missing {
        q.push(f1);
        q.extend(path_avoiding(g, g.dst(f1), g.src(ej), e).ok_or_else(|| bug("E minus e disconnected"))?);
        q.extend([ej, e]);
    }
    // a cycle at v in E minus e, starting with f_1, through every pair
    let mut r = vec![f1];
    for (a, b) in pairs(g) {
        if a == e || b == e || contains(&r, &[a, b]) {
            continue;
        }
        r.extend(path_avoiding(g, g.dst(*r.last().unwrap()), g.src(a), e).ok_or_else(|| bug("E minus e disconnected"))?);
        r.extend([a, b]);
    }
    r.extend(path_avoiding(g, g.dst(*r.last().unwrap()), v, e).ok_or_else(|| bug("E minus e disconnected"))?);
    let j = q.len() / r.len() + repeat;
    for _ in 0..j {
        q.extend_from_slice(&r);
    }
    Ok(q)
}

/// A primitive cycle `p` at `r(e)` with the properties checked by
/// [`verify_all_e2`]. Bigger `repeat` lengthens `p` by extra copies of its
/// all-pairs tail.
pub fn all_e2_cycle_with_repeat(g: &Graph, e: EdgeId, f: EdgeId, repeat: usize) -> Result<Vec<EdgeId>> {
    g.require_sft()?;
    let c = g.classify();
    if !c.two_edge_connected {
        return Err(Error::NotSftValid("graph is not 2-edge-connected".into()));
    }
    if c.is_rose == Some(2) {
        return Err(Error::NotSftValid("the rose with two petals needs the dedicated family".into()));
    }
    if e >= g.num_edges() || f >= g.num_edges() || g.dst(e) != g.src(f) {
        return Err(Error::InvalidWord(format!("{e},{f} is not a pair of consecutive edges")));
    }
    if repeat == 0 {
        return Err(Error::InvalidParameter("repeat must be positive".into()));
    }
    let p = if g.num_vertices() == 1 { rose_cycle(g, e, f, repeat) } else { general_cycle(g, e, f, repeat)? };
    verify_all_e2(g, e, f, &p)?;
    Ok(p)
}

pub fn all_e2_cycle(g: &Graph, e: EdgeId, f: EdgeId) -> Result<Vec<EdgeId>> {
    all_e2_cycle_with_repeat(g, e, f, 1)
}

/// Markers `m`, `m'` with data `{o, p^n}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyMember {
    pub kind: MarkerKind,
    pub m: Vec<EdgeId>,
    pub m2: Vec<EdgeId>,
    pub p: Vec<EdgeId>,
}

impl FamilyMember {
    /// `(e, f)` when both markers are single edges.
    pub fn pair(&self) -> Option<(EdgeId, EdgeId)> {
        (self.m.len() == 1 && self.m2.len() == 1).then(|| (self.m[0], self.m2[0]))
    }

    pub fn marker(&self, g: &Graph, n: usize) -> Result<MarkerCoe> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        MarkerCoe::new(MarkerData::new(g, self.kind, self.m.clone(), self.m2.clone(), Vec::new(), self.p.repeat(n))?)
    }

    /// `m m'`.
    pub fn short_word(&self) -> Vec<EdgeId> {
        [self.m.as_slice(), &self.m2].concat()
    }

    /// `m p^n m'`.
    pub fn long_word(&self, n: usize) -> Vec<EdgeId> {
        [self.m.as_slice(), &self.p.repeat(n), &self.m2].concat()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyVariant {
    /// One member per pair of consecutive edges.
    Pairs,
    /// Three members for the rose with two petals, the last with the
    /// two-letter marker `ef`.
    RoseTwo,
}

/// Members `φ^(1), …, φ^(N)`; the composition applies `φ^(N)` first.
#[derive(Clone, Debug, Serialize)]
pub struct ProximalityFamily {
    pub variant: FamilyVariant,
    pub members: Vec<FamilyMember>,
}

impl ProximalityFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `[p_1]`, the limit class.
    pub fn target(&self, g: &Graph) -> Result<CyclicClass> {
        CyclicClass::new(g, self.members[0].p.clone())
    }

    pub fn type_one_count(&self) -> usize {
        self.members.iter().filter(|m| m.kind == MarkerKind::TypeI).count()
    }
}

/// Default length of the target cycle `p_1`, as extra copies of its
/// all-pairs tail; see [`proximality_family_with`].
pub const DEFAULT_TARGET_REPEAT: usize = 3;

pub fn proximality_family(g: &Graph) -> Result<ProximalityFamily> {
    proximality_family_with(g, DEFAULT_TARGET_REPEAT)
}

/// Pairs in lexicographic order of edge ids. The first member's cycle gets
/// `target_repeat` copies of its tail: the finite-`n` deficit of the limit
/// shrinks as `p_1` grows relative to the other cycles.
pub fn proximality_family_with(g: &Graph, target_repeat: usize) -> Result<ProximalityFamily> {
    let members = pairs(g)
        .into_iter()
        .enumerate()
        .map(|(i, (e, f))| {
            let p = all_e2_cycle_with_repeat(g, e, f, if i == 0 { target_repeat } else { 1 })?;
            let kind = if e == f { MarkerKind::TypeI } else { MarkerKind::TypeII };
            Ok(FamilyMember { kind, m: vec![e], m2: vec![f], p })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProximalityFamily { variant: FamilyVariant::Pairs, members })
}

/// The family for the rose with two petals `e`, `f`: markers `e` with data
/// `{o, f^n}`, `f` with `{o, e^n}`, and `ef` with `{o, f^n}`.
pub fn proximality_family_r2(g: &Graph) -> Result<ProximalityFamily> {
    if g.classify().is_rose != Some(2) {
        return Err(Error::InvalidParameter("the two-petal family needs the rose with two petals".into()));
    }
    let (e, f) = (0, 1);
    let t1 = |m: Vec<EdgeId>, p: Vec<EdgeId>| FamilyMember { kind: MarkerKind::TypeI, m2: m.clone(), m, p };
    let fam = ProximalityFamily {
        variant: FamilyVariant::RoseTwo,
        members: vec![t1(vec![e], vec![f]), t1(vec![f], vec![e]), t1(vec![e, f], vec![f])],
    };
    for mem in &fam.members {
        for n in 1..=ALL_E2_CHECK_POWERS {
            mem.marker(g, n)?;
        }
    }
    Ok(fam)
}

/// [`proximality_family`], or the two-petal family on the rose with two
/// petals.
pub fn proximality_family_auto(g: &Graph) -> Result<ProximalityFamily> {
    if g.classify().is_rose == Some(2) {
        proximality_family_r2(g)
    } else {
        proximality_family(g)
    }
}

/// `φ_n^(1) ⋯ φ_n^(N)` applied to `start`, with classes materialised.
pub fn run_composition(g: &Graph, fam: &ProximalityFamily, n: usize, start: &PeriodicCombo) -> Result<PeriodicCombo> {
    let mut cur = start.clone();
    for mem in fam.members.iter().rev() {
        let longest = cur.terms().iter().map(|(_, c)| c.len()).max().unwrap_or(0);
        if longest > EXPLICIT_CAP {
            return Err(Error::BoundExhausted(format!("class of length {longest} exceeds the explicit cap")));
        }
        cur = pushforward(g, &mem.marker(g, n)?, &cur)?;
    }
    Ok(cur)
}

/// A combination of periodic measures with compressed classes.
#[derive(Clone, Debug)]
pub struct CompressedCombo {
    slp: Slp,
    terms: Vec<(Rational, NodeId)>,
}

impl CompressedCombo {
    pub fn from_combo(c: &PeriodicCombo) -> CompressedCombo {
        let mut slp = Slp::new();
        let terms = c.terms().iter().map(|(w, cls)| (w.clone(), slp.leaf(cls.rep().to_vec()))).collect();
        CompressedCombo { slp, terms }
    }

    pub fn lengths(&self) -> Vec<u128> {
        self.terms.iter().map(|&(_, id)| self.slp.len(id)).collect()
    }

    /// Materialises the classes if they fit under `cap`.
    pub fn to_combo(&self, g: &Graph, cap: usize) -> Result<PeriodicCombo> {
        let terms = self
            .terms
            .iter()
            .map(|(w, id)| {
                let word = self.slp.expand(*id, cap).ok_or_else(|| Error::BoundExhausted("class too long to expand".into()))?;
                Ok((w.clone(), CyclicClass::new(g, word)?))
            })
            .collect::<Result<Vec<_>>>()?;
        PeriodicCombo::new(g, terms)
    }

    /// `Σ_v μ(Z(v)) / ‖μ‖` over distinct patterns of one length.
    pub fn freq_sum(&self, patterns: &[Vec<EdgeId>]) -> Rational {
        let mut hits = Rational::zero();
        let mut mass = Rational::zero();
        for (w, id) in &self.terms {
            let total: u128 = self.slp.cyclic_count(*id, patterns).iter().sum();
            hits += w * Rational::from_integer(BigInt::from(total));
            mass += w * Rational::from_integer(BigInt::from(self.slp.len(*id)));
        }
        hits / mass
    }

    /// Smallest per-class frequency of a single pattern.
    pub fn min_freq(&self, pattern: &[EdgeId]) -> Rational {
        let pats = [pattern.to_vec()];
        self.terms
            .iter()
            .map(|(_, id)| {
                let c = self.slp.cyclic_count(*id, &pats)[0];
                Rational::new(BigInt::from(c), BigInt::from(self.slp.len(*id)))
            })
            .min()
            .unwrap_or_default()
    }

    fn apply(&mut self, g: &Graph, mem: &FamilyMember, n: usize) -> Result<()> {
        let coe = mem.marker(g, n)?;
        let long = mem.long_word(n);
        let short = mem.short_word();
        let mut block = None;
        for i in 0..self.terms.len() {
            let id = self.terms[i].1;
            let has_long = self.slp.cyclic_count(id, std::slice::from_ref(&long))[0] > 0;
            let new = match mem.pair() {
                Some((e, f)) if !has_long => {
                    let b = *block.get_or_insert_with(|| {
                        let leaf = self.slp.leaf(mem.p.clone());
                        self.slp.power(leaf, n as u128)
                    });
                    self.slp.insert_at_junctions(id, e, f, b)
                }
                _ if !has_long && self.slp.cyclic_count(id, std::slice::from_ref(&short))[0] == 0 => id,
                _ => {
                    let word = self.slp.expand(id, EXPLICIT_CAP).ok_or_else(|| {
                        Error::BoundExhausted(format!("explicit rewrite needed on a class of length {}", self.slp.len(id)))
                    })?;
                    let image = coe.f_phi(g, &CyclicClass::new(g, word)?)?;
                    self.slp.leaf(image.rep().to_vec())
                }
            };
            self.terms[i].1 = new;
        }
        Ok(())
    }
}

/// Applies `φ_n^(hi-1), …, φ_n^(lo)` (zero-based member indices).
fn run_members(g: &Graph, fam: &ProximalityFamily, n: usize, c: &mut CompressedCombo, lo: usize, hi: usize) -> Result<()> {
    for mem in fam.members[lo..hi].iter().rev() {
        c.apply(g, mem, n)?;
    }
    Ok(())
}

/// [`run_composition`] on compressed classes.
pub fn run_composition_compressed(g: &Graph, fam: &ProximalityFamily, n: usize, start: &PeriodicCombo) -> Result<CompressedCombo> {
    let mut c = CompressedCombo::from_combo(start);
    run_members(g, fam, n, &mut c, 0, fam.len())?;
    Ok(c)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `Σ_j freq(p_1(j)^K)` after the full composition.
    #[serde(serialize_with = "ser_rational")]
    pub s: Rational,
    /// Smallest frequency of `e_1 f_1` before the last member acts.
    #[serde(serialize_with = "ser_opt_rational")]
    pub delta: Option<Rational>,
    /// `|p|(n-K) / (n|p| + 1/δ)` when `δ > 0`.
    #[serde(serialize_with = "ser_opt_rational")]
    pub bound: Option<Rational>,
    pub bound_holds: Option<bool>,
    /// Length of each resulting class.
    pub lengths: Vec<u128>,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

fn ser_opt_rational<S: serde::Serializer>(q: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_str(&format_rational(q)),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub target: CyclicClass,
    pub power: usize,
    #[serde(serialize_with = "ser_rational")]
    pub epsilon: Rational,
    pub rows: Vec<ConvergenceRow>,
    /// Least `n` with `S(n) ≥ 1 - ε`.
    pub reached: Option<usize>,
    /// Why the table stops before `n_max`, if it does.
    pub truncated: Option<String>,
}

impl ConvergenceReport {
    pub fn last(&self) -> Option<&ConvergenceRow> {
        self.rows.last()
    }

    /// Every row where the bound applies satisfies it.
    pub fn bound_respected(&self) -> bool {
        self.rows.iter().all(|r| r.bound_holds != Some(false))
    }

    pub fn nondecreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].s <= w[1].s)
    }

    /// `S(n) > S(1)` for every later row.
    pub fn above_first(&self) -> bool {
        match self.rows.split_first() {
            Some((first, rest)) => !rest.is_empty() && rest.iter().all(|r| r.s > first.s),
            None => false,
        }
    }

    /// `n<TAB>S<TAB>decimal<TAB>bound` rows after a header; trailing
    /// comment lines give the verdict.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("n\tS\tS_approx\tbound\n");
        for r in &self.rows {
            let bound = r.bound.as_ref().map(format_rational).unwrap_or_else(|| "-".into());
            out.push_str(&format!("{}\t{}\t{:.6}\t{}\n", r.n, format_rational(&r.s), to_f64(&r.s), bound));
        }
        match self.reached {
            Some(n) => out.push_str(&format!("# reached\t{n}\n")),
            None => out.push_str("# reached\tnot reached\n"),
        }
        if let Some(t) = &self.truncated {
            out.push_str(&format!("# truncated\t{t}\n"));
        }
        out
    }
}

/// `S(n)` for `n = 1..=n_max`, the first `n` reaching `1 - ε`, and the
/// per-row lower bound `|p|(n-K)/(n|p| + 1/δ)`.
pub fn convergence_report(
    g: &Graph,
    fam: &ProximalityFamily,
    start: &PeriodicCombo,
    power: usize,
    epsilon: &Rational,
    n_max: usize,
) -> Result<ConvergenceReport> {
    if power == 0 || n_max == 0 {
        return Err(Error::InvalidParameter("K and n_max must be positive".into()));
    }
    if !epsilon.is_positive() || *epsilon >= Rational::one() {
        return Err(Error::InvalidParameter("epsilon must lie in (0, 1)".into()));
    }
    let target = fam.target(g)?;
    let p1 = fam.members[0].p.clone();
    let patterns: Vec<Vec<EdgeId>> = (0..p1.len()).map(|j| rotate(&p1, j).repeat(power)).collect();
    let pair = fam.members[0].short_word();
    let plen = Rational::from_integer(BigInt::from(p1.len()));
    let threshold = Rational::one() - epsilon;
    let mut rows = Vec::new();
    let mut truncated = None;
    for n in 1..=n_max {
        let step = (|| -> Result<ConvergenceRow> {
            let mut c = CompressedCombo::from_combo(start);
            run_members(g, fam, n, &mut c, 1, fam.len())?;
            let delta = c.min_freq(&pair);
            run_members(g, fam, n, &mut c, 0, 1)?;
            let s = c.freq_sum(&patterns);
            let (delta, bound) = if delta.is_positive() {
                let nn = Rational::from_integer(BigInt::from(n));
                let k = Rational::from_integer(BigInt::from(power));
                let bound = &plen * (&nn - k) / (&nn * &plen + delta.recip());
                (Some(delta), Some(bound))
            } else {
                (None, None)
            };
            let bound_holds = bound.as_ref().map(|b| s >= *b);
            Ok(ConvergenceRow { n, s, delta, bound, bound_holds, lengths: c.lengths() })
        })();
        match step {
            Ok(row) => rows.push(row),
            Err(Error::BoundExhausted(msg)) => {
                truncated = Some(format!("n = {n}: {msg}"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let reached = rows.iter().find(|r| r.s >= threshold).map(|r| r.n);
    Ok(ConvergenceReport { target, power, epsilon: epsilon.clone(), rows, reached, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{rose, theta};
    use crate::measures::rational;

    fn cyc(g: &Graph, s: &str) -> Cycle {
        Cycle::parse(g, s).unwrap()
    }

    fn cls(g: &Graph, s: &str) -> CyclicClass {
        CyclicClass::parse(g, s).unwrap()
    }

    #[test]
    fn obstruction_examples() {
        let g = rose(2).unwrap();
        assert_eq!(unary_obstruction(&g, &cyc(&g, "a")).unwrap(), Some(cyc(&g, "a")));
        assert_eq!(unary_obstruction(&g, &cyc(&g, "ab")).unwrap(), None);
        assert_eq!(unary_obstruction(&g, &cyc(&g, "aab")).unwrap(), None);
        // aba·b = (ab)^2
        assert_eq!(unary_obstruction(&g, &cyc(&g, "aba")).unwrap(), Some(cyc(&g, "b")));
        assert!(unary_obstruction(&g, &cyc(&g, "aa")).is_err());
    }

    #[test]
    fn all_edges_extension_examples() {
        let g = rose(2).unwrap();
        assert_eq!(primitive_extension_all_edges(&g, &cyc(&g, "a")).unwrap(), cyc(&g, "ab"));
        assert_eq!(primitive_extension_all_edges(&g, &cyc(&g, "ab")).unwrap(), cyc(&g, "ab"));
        let t = theta();
        let p = Cycle::new(&t, vec![0, 2]).unwrap();
        let q = primitive_extension_all_edges(&t, &p).unwrap();
        assert!(is_primitive_extension(&p, &q));
        assert_eq!(q.edges().iter().collect::<HashSet<_>>().len(), 4);
    }

    #[test]
    fn extension_chain_examples() {
        let g = rose(2).unwrap();
        let c = extension_chain(&g, &cyc(&g, "a"), &cyc(&g, "ab")).unwrap();
        assert_eq!(c.len(), 1);
        let d = &c.moves()[0].coe.data();
        assert_eq!((d.m.clone(), d.d.clone(), d.d2.clone()), (vec![0], vec![], vec![1]));
        let c = extension_chain(&g, &cyc(&g, "a"), &cyc(&g, "abb")).unwrap();
        assert_eq!(c.len(), 2);
        assert!(extension_chain(&g, &cyc(&g, "a"), &cyc(&g, "a")).unwrap().is_empty());
        assert!(extension_chain(&g, &cyc(&g, "a"), &cyc(&g, "aa")).is_err());
    }

    #[test]
    fn bridge_examples() {
        let g = rose(2).unwrap();
        let p = cyc(&g, "ab");
        let q = cyc(&g, "abb");
        let b = bridge_class(&g, &p, &q).unwrap();
        assert!(is_primitive_extension(&p, &Cycle::new(&g, b.r.clone()).unwrap()));
        assert!(is_primitive_extension(&q, &Cycle::new(&g, b.r_rot.clone()).unwrap()));
        assert_eq!(CyclicClass::new(&g, b.r).unwrap(), CyclicClass::new(&g, b.r_rot).unwrap());
        assert_eq!(bridge_class(&g, &p, &p).unwrap().n, 0);
    }

    #[test]
    fn transitivity_examples() {
        let g = rose(2).unwrap();
        let c = solve_transitivity(&g, &cls(&g, "a"), &cls(&g, "b")).unwrap();
        assert!(c.fold_verified());
        assert_eq!(c.fold(&g, &cls(&g, "a")).unwrap(), cls(&g, "b"));
        assert_eq!(solve_transitivity(&g, &cls(&g, "a"), &cls(&g, "ab")).unwrap().len(), 1);
        assert!(solve_transitivity(&g, &cls(&g, "a"), &cls(&g, "a")).unwrap().is_empty());
        assert!(solve_transitivity(&g, &cls(&g, "aa"), &cls(&g, "a")).is_err());
        let c = solve_transitivity(&g, &cls(&g, "aab"), &cls(&g, "abbb")).unwrap();
        assert_eq!(c.reversed(&g).unwrap().fold(&g, &cls(&g, "abbb")).unwrap(), cls(&g, "aab"));
    }

    #[test]
    fn all_e2_examples() {
        let g = rose(3).unwrap();
        for (e, f) in [(0, 1), (0, 0), (2, 1), (1, 1)] {
            let p = all_e2_cycle(&g, e, f).unwrap();
            verify_all_e2(&g, e, f, &p).unwrap();
        }
        // the two-petal rose is excluded
        assert!(all_e2_cycle(&rose(2).unwrap(), 0, 1).is_err());
        let t = theta();
        for (e, f) in pairs(&t) {
            all_e2_cycle(&t, e, f).unwrap();
        }
        // a bad candidate is rejected
        assert!(verify_all_e2(&g, 0, 1, &[2]).is_err());
    }

    #[test]
    fn family_shapes() {
        let g = rose(3).unwrap();
        let fam = proximality_family(&g).unwrap();
        assert_eq!((fam.len(), fam.type_one_count()), (9, 3));
        assert_eq!(proximality_family(&theta()).unwrap().len(), 8);
        assert!(proximality_family(&rose(2).unwrap()).is_err());
        let r2 = proximality_family_r2(&rose(2).unwrap()).unwrap();
        assert_eq!(r2.len(), 3);
        for mem in &fam.members {
            for n in 1..=3 {
                mem.marker(&g, n).unwrap();
            }
        }
    }

    #[test]
    fn compressed_matches_explicit() {
        let g = rose(3).unwrap();
        let fam = proximality_family_with(&g, 1).unwrap();
        for start in ["b", "ab", "abc", "aabc", "acbb"] {
            let combo = PeriodicCombo::single(&g, cls(&g, start)).unwrap();
            for n in 1..=1 {
                let explicit = run_composition(&g, &fam, n, &combo).unwrap();
                let compressed = run_composition_compressed(&g, &fam, n, &combo).unwrap();
                assert_eq!(compressed.to_combo(&g, EXPLICIT_CAP).unwrap(), explicit, "start {start}, n {n}");
            }
        }
    }

    #[test]
    fn report_smoke() {
        let g = rose(3).unwrap();
        let fam = proximality_family(&g).unwrap();
        let start = PeriodicCombo::single(&g, cls(&g, "b")).unwrap();
        let rep = convergence_report(&g, &fam, &start, 1, &rational(1, 20), 3).unwrap();
        assert_eq!(rep.rows.len(), 3);
        assert!(rep.rows.iter().all(|r| r.s <= Rational::one()));
        assert!(rep.bound_respected());
        assert!(rep.to_tsv().starts_with("n\tS\tS_approx\tbound\n1\t"));
    }
}
