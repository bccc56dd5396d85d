//! Periodic measures and their finite combinations, evaluated on cylinder
//! sets with exact rationals.
//!
//! `η_[p]` puts unit mass on each of the `|p|` shifts of `p^∞`, so
//! `η_[p](Z(v)) = <v, [p]>`. A [`PeriodicCombo`] is a positive combination
//! of these; frequencies are always reported after dividing by total mass.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, HigherEdgeGraph};
use crate::marker::MarkerCoe;
use crate::words::{self, occurrence_count, CyclicClass, EpPoint};

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn int(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q` or an integer.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::InvalidParameter(format!("not a rational: {text}"));
    let (n, d) = match text.trim().split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().map_err(|_| bad())?, d.trim().parse::<BigInt>().map_err(|_| bad())?),
        None => (text.trim().parse::<BigInt>().map_err(|_| bad())?, BigInt::one()),
    };
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn to_f64(q: &Rational) -> f64 {
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}

/// A shift-invariant measure that can be evaluated on cylinders.
pub trait CylinderMeasure {
    /// Total mass.
    fn mass(&self) -> Rational;
    /// Unnormalised measure of `Z(v)`.
    fn cylinder(&self, v: &[EdgeId]) -> Rational;

    /// `μ(Z(v)) / ‖μ‖`.
    fn freq(&self, v: &[EdgeId]) -> Rational {
        self.cylinder(v) / self.mass()
    }
}

/// `η_[p]` for a primitive class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicMeasure {
    class: CyclicClass,
}

impl PeriodicMeasure {
    pub fn new(g: &Graph, class: CyclicClass) -> Result<Self> {
        class.require_primitive(g)?;
        Ok(PeriodicMeasure { class })
    }

    pub fn class(&self) -> &CyclicClass {
        &self.class
    }
}

impl CylinderMeasure for PeriodicMeasure {
    fn mass(&self) -> Rational {
        int(self.class.len())
    }

    fn cylinder(&self, v: &[EdgeId]) -> Rational {
        int(occurrence_count(v, &self.class))
    }
}

/// `freq(v, η_[p]) = <v, [p]> / |p|`.
pub fn freq(v: &[EdgeId], m: &PeriodicMeasure) -> Rational {
    m.freq(v)
}

/// `Σ w_i η_[p_i]` with positive rational weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicCombo {
    terms: Vec<(Rational, CyclicClass)>,
}

impl PeriodicCombo {
    pub fn new(g: &Graph, terms: Vec<(Rational, CyclicClass)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("empty combination".into()));
        }
        for (w, c) in &terms {
            if !w.is_positive() {
                return Err(Error::InvalidParameter("weights must be positive".into()));
            }
            c.require_primitive(g)?;
        }
        Ok(PeriodicCombo { terms })
    }

    pub fn single(g: &Graph, class: CyclicClass) -> Result<Self> {
        PeriodicCombo::new(g, vec![(Rational::one(), class)])
    }

    /// Weights given on the probability measures `η_[p] / |p|`.
    pub fn from_normalized(g: &Graph, terms: Vec<(Rational, CyclicClass)>) -> Result<Self> {
        let terms = terms.into_iter().map(|(w, c)| (w / int(c.len()), c)).collect();
        PeriodicCombo::new(g, terms)
    }

    pub fn terms(&self) -> &[(Rational, CyclicClass)] {
        &self.terms
    }

    /// Weight of each term after normalising to a probability measure.
    pub fn probabilities(&self) -> Vec<Rational> {
        let total = self.mass();
        self.terms.iter().map(|(w, c)| w * int(c.len()) / &total).collect()
    }
}

impl CylinderMeasure for PeriodicCombo {
    fn mass(&self) -> Rational {
        self.terms.iter().map(|(w, c)| w * int(c.len())).sum()
    }

    fn cylinder(&self, v: &[EdgeId]) -> Rational {
        self.terms.iter().map(|(w, c)| w * int(occurrence_count(v, c))).sum()
    }
}

/// Normalised cylinder values for every path of length `1..=depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreqVector {
    depth: usize,
    entries: Vec<(Vec<EdgeId>, Rational)>,
    index: HashMap<Vec<EdgeId>, usize>,
}

impl FreqVector {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn entries(&self) -> &[(Vec<EdgeId>, Rational)] {
        &self.entries
    }

    pub fn get(&self, v: &[EdgeId]) -> Option<&Rational> {
        self.index.get(v).map(|&i| &self.entries[i].1)
    }

    /// Kolmogorov consistency, unit mass, and monotonicity under taking
    /// subwords, checked exactly.
    pub fn check_invariants(&self, g: &Graph) -> Result<()> {
        let fail = |msg: String| Err(Error::Verification(msg));
        let total: Rational = self.entries.iter().filter(|(v, _)| v.len() == 1).map(|(_, q)| q.clone()).sum();
        if !total.is_one() {
            return fail(format!("length-1 values sum to {total}"));
        }
        for (v, q) in &self.entries {
            if q.is_negative() || *q > Rational::one() {
                return fail(format!("value {q} outside [0, 1]"));
            }
            if v.len() < self.depth {
                let ext: Rational = g
                    .out_edges(g.dst(*v.last().unwrap()))
                    .iter()
                    .map(|&e| {
                        let mut w = v.clone();
                        w.push(e);
                        self.get(&w).cloned().unwrap_or_default()
                    })
                    .sum();
                if ext != *q {
                    return fail(format!("{} has value {q} but its extensions sum to {ext}", g.format_word(v)));
                }
            }
            if v.len() > 1 {
                for sub in [&v[1..], &v[..v.len() - 1]] {
                    if self.get(sub).is_none_or(|s| q > s) {
                        return fail(format!("{} exceeds its subword {}", g.format_word(v), g.format_word(sub)));
                    }
                }
            }
        }
        Ok(())
    }

    /// `word<TAB>p/q` lines.
    pub fn to_tsv(&self, g: &Graph) -> String {
        self.entries
            .iter()
            .map(|(v, q)| format!("{}\t{}\n", g.format_word(v), format_rational(q)))
            .collect()
    }
}

/// Every path of length `1..=depth`, ordered by length then lexicographically.
pub fn words_up_to(g: &Graph, depth: usize) -> Vec<Vec<EdgeId>> {
    (1..=depth).flat_map(|n| g.paths_of_length(n)).collect()
}

pub fn freq_vector(g: &Graph, m: &dyn CylinderMeasure, depth: usize) -> Result<FreqVector> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be positive".into()));
    }
    let mass = m.mass();
    if !mass.is_positive() {
        return Err(Error::InvalidParameter("measure has no mass".into()));
    }
    let entries: Vec<_> = words_up_to(g, depth).into_iter().map(|v| {
        let q = m.cylinder(&v) / &mass;
        (v, q)
    }).collect();
    let index = entries.iter().enumerate().map(|(i, (v, _))| (v.clone(), i)).collect();
    Ok(FreqVector { depth, entries, index })
}

/// `max_{|v| <= R} |freq(v, m1) - freq(v, m2)|`.
pub fn proj_distance(g: &Graph, m1: &dyn CylinderMeasure, m2: &dyn CylinderMeasure, depth: usize) -> Rational {
    let (a, b) = (m1.mass(), m2.mass());
    words_up_to(g, depth)
        .iter()
        .map(|v| (m1.cylinder(v) / &a - m2.cylinder(v) / &b).abs())
        .max()
        .unwrap_or_default()
}

/// `η_[p] ↦ η_{F_φ[p]}` termwise, weights unchanged.
pub fn pushforward(g: &Graph, phi: &MarkerCoe, m: &PeriodicCombo) -> Result<PeriodicCombo> {
    let terms = m
        .terms
        .iter()
        .map(|(w, c)| Ok((w.clone(), phi.f_phi(g, c)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PeriodicCombo { terms })
}

/// `Ψ_φ(1_{Z(v)})(x)`, computed from the cocycle pair and the images of
/// `x` and `σx`.
pub fn psi_indicator(phi: &MarkerCoe, v: &[EdgeId], x: &EpPoint) -> Result<i64> {
    let (k, l) = phi.cocycle_pair(x);
    let fx = phi.apply_point(x)?;
    let fsx = phi.apply_point(&x.shift(1))?;
    let hits = |y: &EpPoint, n: usize| (0..n).filter(|&i| y.shift(i).starts_with(v)).count() as i64;
    Ok(hits(&fx, l) - hits(&fsx, k))
}

/// Sum of [`psi_indicator`] over the orbit of `p^∞`; equals
/// `<v, F_φ[p]>`.
pub fn pushforward_oracle(g: &Graph, phi: &MarkerCoe, p: &CyclicClass, v: &[EdgeId]) -> Result<i64> {
    let x = EpPoint::periodic(g, p.rep().to_vec())?;
    (0..p.len()).map(|i| psi_indicator(phi, v, &x.shift(i))).sum()
}

/// `E^[N]` with the edge `w` removed. Cycles there flatten to cycles of the
/// original graph that avoid `w`.
#[derive(Clone, Debug)]
pub struct ForbiddenSubshift {
    pub graph: Graph,
    /// Path of the original graph behind each remaining edge.
    pub edge_paths: Vec<Vec<EdgeId>>,
    pub window: usize,
}

impl ForbiddenSubshift {
    /// First letters of the underlying paths.
    pub fn flatten(&self, cycle: &[EdgeId]) -> Vec<EdgeId> {
        cycle.iter().map(|&e| self.edge_paths[e][0]).collect()
    }

    /// Inverse of [`ForbiddenSubshift::flatten`] on cycles of the original
    /// graph; `None` if the periodic word contains the removed path.
    pub fn lift(&self, cycle: &[EdgeId]) -> Option<Vec<EdgeId>> {
        let n = cycle.len();
        let index: HashMap<&[EdgeId], usize> =
            self.edge_paths.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
        (0..n)
            .map(|i| {
                let w: Vec<EdgeId> = (0..self.window).map(|t| cycle[(i + t) % n]).collect();
                index.get(w.as_slice()).copied()
            })
            .collect()
    }
}

pub fn forbid_word_subshift(g: &Graph, w: &[EdgeId]) -> Result<ForbiddenSubshift> {
    if w.is_empty() || !g.is_path(w) {
        return Err(Error::InvalidWord(g.format_word(w)));
    }
    let HigherEdgeGraph { graph, edge_paths, .. } = g.higher_edge_graph(w.len())?;
    let id = edge_paths.iter().position(|p| p == w).expect("every path is an edge of E^[N]");
    let mut edge_paths = edge_paths;
    edge_paths.remove(id);
    Ok(ForbiddenSubshift { graph: graph.remove_edge(id)?, edge_paths, window: w.len() })
}

/// Result of [`approximate_by_periodic`].
#[derive(Clone, Debug)]
pub struct Approximation {
    pub class: CyclicClass,
    pub distance: Rational,
    /// Exponent of each combo term in the concatenated word.
    pub exponents: Vec<usize>,
}

/// Counts of every window of length `1..=depth` in the periodic word `w^∞`,
/// taken over the `|w|` starting positions.
pub fn window_counts(w: &[EdgeId], depth: usize) -> HashMap<Vec<EdgeId>, usize> {
    let n = w.len();
    let mut counts = HashMap::new();
    for i in 0..n {
        let mut v = Vec::with_capacity(depth);
        for t in 0..depth {
            v.push(w[(i + t) % n]);
            *counts.entry(v.clone()).or_insert(0) += 1;
        }
    }
    counts
}

/// A primitive class whose periodic measure lies within `eps` of `m` at
/// depth `depth`, built as `p_1^{k_1} c_1 … p_r^{k_r} c_r` with shortest
/// connecting paths `c_i` and exponents proportional to the weights.
pub fn approximate_by_periodic(g: &Graph, m: &PeriodicCombo, depth: usize, eps: &Rational) -> Result<Approximation> {
    if !g.is_strongly_connected() {
        return Err(Error::NotSftValid("approximation needs a strongly connected graph".into()));
    }
    if m.terms.len() == 1 {
        return Ok(Approximation { class: m.terms[0].1.clone(), distance: Rational::zero(), exponents: vec![1] });
    }
    let den = m.terms.iter().fold(BigInt::one(), |acc, (w, _)| acc.lcm(w.denom()));
    let mut base: Vec<BigInt> = m.terms.iter().map(|(w, _)| (w * Rational::from_integer(den.clone())).to_integer()).collect();
    let g0 = base.iter().fold(BigInt::zero(), |acc, b| acc.gcd(b));
    base.iter_mut().for_each(|b| *b /= &g0);
    let base: Vec<usize> = base
        .iter()
        .map(|b| b.to_usize().ok_or_else(|| Error::BoundExhausted("weights too far apart".into())))
        .collect::<Result<_>>()?;
    let r = m.terms.len();
    let connectors: Vec<Vec<EdgeId>> = (0..r)
        .map(|i| {
            let from = m.terms[i].1.rep_word().source();
            let to = m.terms[(i + 1) % r].1.rep_word().source();
            g.shortest_path(from, to, &[]).expect("strongly connected")
        })
        .collect();
    let targets: Vec<(Vec<EdgeId>, Rational)> =
        words_up_to(g, depth).into_iter().map(|v| { let q = m.freq(&v); (v, q) }).collect();
    const MAX_LEN: usize = 1 << 20;
    let mut best: Option<Approximation> = None;
    let mut scale = 1;
    loop {
        let mut exps: Vec<usize> = base.iter().map(|b| b * scale).collect();
        let build = |exps: &[usize]| -> Vec<EdgeId> {
            let mut w = Vec::new();
            for i in 0..r {
                for _ in 0..exps[i] {
                    w.extend_from_slice(m.terms[i].1.rep());
                }
                w.extend_from_slice(&connectors[i]);
            }
            w
        };
        let mut word = build(&exps);
        if word.len() > MAX_LEN {
            let d = best.map(|b| b.distance).unwrap_or_else(Rational::one);
            return Err(Error::BoundExhausted(format!("best distance reached {}", format_rational(&d))));
        }
        while !words::is_primitive_word(&word) {
            exps[0] += 1;
            word = build(&exps);
        }
        let counts = window_counts(&word, depth);
        let len = int(word.len());
        let distance = targets
            .iter()
            .map(|(v, q)| (int(counts.get(v).copied().unwrap_or(0)) / &len - q).abs())
            .max()
            .unwrap_or_default();
        let done = distance <= *eps;
        let approx = Approximation { class: CyclicClass::new(g, word)?, distance, exponents: exps };
        if done {
            return Ok(approx);
        }
        if best.as_ref().is_none_or(|b| approx.distance < b.distance) {
            best = Some(approx);
        }
        scale *= 2;
    }
}
