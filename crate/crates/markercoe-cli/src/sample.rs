//! Seeded sampling of marker data that passes the overlap conditions.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use markercoe::graph::{EdgeId, Graph, VertexId};
use markercoe::marker::{check_overlap_conditions, MarkerCoe, MarkerData, MarkerKind};
use markercoe::{Error, Result};

const ATTEMPTS: usize = 20_000;

/// A random path of exactly `len` edges from `v` ending at `to`, if the
/// walk happens to land there.
fn walk(g: &Graph, rng: &mut ChaCha8Rng, v: VertexId, len: usize, to: VertexId) -> Option<Vec<EdgeId>> {
    let mut w = Vec::with_capacity(len);
    let mut at = v;
    for _ in 0..len {
        let &e = g.out_edges(at).choose(rng)?;
        w.push(e);
        at = g.dst(e);
    }
    (at == to).then_some(w)
}

fn attempt(g: &Graph, rng: &mut ChaCha8Rng, max_len: usize) -> Option<MarkerData> {
    let kind = if rng.gen_bool(0.5) { MarkerKind::TypeI } else { MarkerKind::TypeII };
    let e = rng.gen_range(0..g.num_edges());
    let (m, m2) = match kind {
        MarkerKind::TypeI => {
            let len = rng.gen_range(1..=2.min(max_len));
            let m = walk(g, rng, g.src(e), len, g.src(e)).or_else(|| Some(vec![e]))?;
            (m.clone(), m)
        }
        MarkerKind::TypeII => {
            let f = rng.gen_range(0..g.num_edges());
            (vec![e], vec![f])
        }
    };
    let (from, to) = (g.dst(*m.last()?), g.src(m2[0]));
    let mut data = || -> Option<Vec<EdgeId>> {
        let len = rng.gen_range(0..=max_len);
        if len == 0 {
            (from == to).then(Vec::new)
        } else {
            walk(g, rng, from, len, to)
        }
    };
    let (d, d2) = (data()?, data()?);
    MarkerData::new(g, kind, m, m2, d, d2).ok()
}

/// First sampled marker whose overlap conditions hold.
pub fn random_marker(g: &Graph, rng: &mut ChaCha8Rng, max_len: usize) -> Result<MarkerCoe> {
    for _ in 0..ATTEMPTS {
        if let Some(data) = attempt(g, rng, max_len) {
            if let Ok(coe) = check_overlap_conditions(data) {
                return Ok(coe);
            }
        }
    }
    Err(Error::BoundExhausted(format!("no valid marker in {ATTEMPTS} samples")))
}
