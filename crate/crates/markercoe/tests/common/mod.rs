//! Helpers shared by the integration suites: seeded marker sampling and
//! brute-force oracles that avoid the library's string algorithms.

#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use markercoe::graph::{EdgeId, Graph, VertexId};
use markercoe::marker::{check_overlap_conditions, MarkerCoe, MarkerData, MarkerKind};

fn walk(g: &Graph, rng: &mut ChaCha8Rng, from: VertexId, len: usize, to: VertexId) -> Option<Vec<EdgeId>> {
    let mut w = Vec::new();
    let mut at = from;
    for _ in 0..len {
        let &e = g.out_edges(at).choose(rng)?;
        w.push(e);
        at = g.dst(e);
    }
    (at == to).then_some(w)
}

/// `count` distinct markers with data words of length at most `max_len`
/// that pass the overlap conditions.
pub fn random_markers(g: &Graph, count: usize, seed: u64, max_len: usize) -> Vec<MarkerCoe> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for _ in 0..1_000_000 {
        if out.len() == count {
            break;
        }
        let e = rng.gen_range(0..g.num_edges());
        let (kind, m, m2) = if rng.gen_bool(0.5) {
            let len = rng.gen_range(1..=2);
            let Some(m) = walk(g, &mut rng, g.src(e), len, g.src(e)).or(Some(vec![e])) else { continue };
            (MarkerKind::TypeI, m.clone(), m)
        } else {
            (MarkerKind::TypeII, vec![e], vec![rng.gen_range(0..g.num_edges())])
        };
        let (from, to) = (g.dst(*m.last().unwrap()), g.src(m2[0]));
        let data = |rng: &mut ChaCha8Rng| {
            let len = rng.gen_range(0..=max_len);
            if len == 0 {
                (from == to).then(Vec::new)
            } else {
                walk(g, rng, from, len, to)
            }
        };
        let (Some(d), Some(d2)) = (data(&mut rng), data(&mut rng)) else { continue };
        let Ok(md) = MarkerData::new(g, kind, m, m2, d, d2) else { continue };
        if seen.contains(&md) {
            continue;
        }
        if let Ok(coe) = check_overlap_conditions(md.clone()) {
            seen.insert(md);
            out.push(coe);
        }
    }
    assert_eq!(out.len(), count, "sampler ran dry");
    out
}

/// Number of `0 <= k < |w|` whose periodic point `w(k)^∞` starts with `v`,
/// by writing the point out.
pub fn brute_orbit_count(v: &[EdgeId], w: &[EdgeId]) -> usize {
    let n = w.len();
    (0..n)
        .filter(|&k| {
            let point: Vec<EdgeId> = (0..v.len()).map(|i| w[(k + i) % n]).collect();
            point == v
        })
        .count()
}

/// Suffix/prefix matches by direct comparison.
pub fn naive_overlaps(w: &[EdgeId], w2: &[EdgeId]) -> Vec<usize> {
    (1..=w.len().min(w2.len())).filter(|&k| w[w.len() - k..] == w2[..k]).collect()
}

/// `w` is a proper power, by trying every divisor.
pub fn naive_is_power(w: &[EdgeId]) -> bool {
    let n = w.len();
    (1..n).any(|d| n.is_multiple_of(d) && (0..n).all(|i| w[i] == w[i % d]))
}

/// All words of length `0..=max` over `k` letters.
pub fn all_words(k: usize, max: usize) -> Vec<Vec<EdgeId>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<EdgeId>| {
                (0..k).map(move |e| {
                    let mut x = w.clone();
                    x.push(e);
                    x
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}
