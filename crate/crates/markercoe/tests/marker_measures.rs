mod common;

use num_traits::{One, Zero};
use proptest::prelude::*;

use markercoe::dynamics::{proximality_family, run_composition, FamilyMember};
use markercoe::graph::{rose, theta, EdgeId};
use markercoe::marker::{check_overlap_conditions, MarkerCoe, MarkerData, MarkerKind};
use markercoe::measures::{
    freq, freq_vector, pushforward, pushforward_oracle, rational, words_up_to, PeriodicCombo, PeriodicMeasure,
    Rational,
};
use markercoe::words::{contains, enumerate_primitive_classes, occurrence_count, CyclicClass, EpPoint};
use markercoe::Graph;

use common::random_markers;

fn markers_for(g: &Graph, seed: u64) -> Vec<MarkerCoe> {
    random_markers(g, 8, seed, 4)
}

fn word_on(g: &Graph, raw: &[usize]) -> Option<Vec<EdgeId>> {
    // steer a raw choice sequence through the graph as a closed walk from 0
    let mut w = Vec::new();
    let mut at = 0;
    for &r in raw {
        let outs = g.out_edges(at);
        let e = outs[r % outs.len()];
        w.push(e);
        at = g.dst(e);
    }
    (at == 0 && !w.is_empty()).then_some(w)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn point_map_is_an_involution(seed in 0u64..1000, pre in proptest::collection::vec(0usize..8, 0..5), cyc in proptest::collection::vec(0usize..8, 1..7)) {
        for g in [rose(2).unwrap(), theta()] {
            let Some(c) = word_on(&g, &cyc) else { continue };
            let prefix = {
                // a walk ending at vertex 0, read backwards from the cycle
                let mut p: Vec<EdgeId> = Vec::new();
                let mut at = 0;
                for &r in &pre {
                    let ins = g.in_edges(at);
                    let e = ins[r % ins.len()];
                    p.insert(0, e);
                    at = g.src(e);
                }
                p
            };
            let x = EpPoint::new(&g, prefix, c).unwrap();
            for phi in markers_for(&g, seed) {
                let y = phi.apply_point(&x).unwrap();
                prop_assert_eq!(phi.apply_point(&y).unwrap(), x.clone());
                // σ^k φ(σx) = σ^l φ(x)
                let (k, l) = phi.cocycle_pair(&x);
                let lhs = phi.apply_point(&x.shift(1)).unwrap().shift(k);
                prop_assert_eq!(lhs, y.shift(l));
            }
        }
    }

    #[test]
    fn class_map_is_an_involution(seed in 0u64..1000, raw in proptest::collection::vec(0usize..8, 1..16)) {
        let g = rose(3).unwrap();
        let w = word_on(&g, &raw).unwrap();
        prop_assume!(markercoe::words::is_primitive_word(&w));
        let c = CyclicClass::new(&g, w).unwrap();
        for phi in markers_for(&g, seed) {
            let image = phi.f_phi(&g, &c).unwrap();
            prop_assert!(image.is_primitive());
            prop_assert_eq!(phi.f_phi(&g, &image).unwrap(), c.clone());
        }
    }

    #[test]
    fn oracle_matches_rewriting(seed in 0u64..1000, raw in proptest::collection::vec(0usize..8, 1..9)) {
        let g = theta();
        let Some(w) = word_on(&g, &raw) else { return Ok(()) };
        prop_assume!(markercoe::words::is_primitive_word(&w));
        let c = CyclicClass::new(&g, w).unwrap();
        for phi in markers_for(&g, seed) {
            let image = phi.f_phi(&g, &c).unwrap();
            for v in words_up_to(&g, 3) {
                prop_assert_eq!(pushforward_oracle(&g, &phi, &c, &v).unwrap(), occurrence_count(&v, &image) as i64);
            }
        }
    }
}

#[test]
fn pushforward_keeps_frequency_invariants() {
    let g = theta();
    let classes = enumerate_primitive_classes(&g, 6).unwrap();
    let terms: Vec<(Rational, CyclicClass)> =
        classes.iter().take(5).enumerate().map(|(i, c)| (rational(i as i64 + 1, 1), c.clone())).collect();
    let combo = PeriodicCombo::new(&g, terms).unwrap();
    for phi in markers_for(&g, 3) {
        let image = pushforward(&g, &phi, &combo).unwrap();
        freq_vector(&g, &image, 4).unwrap().check_invariants(&g).unwrap();
    }
}

#[test]
fn composition_keeps_frequency_invariants() {
    let g = theta();
    let fam = proximality_family(&g).unwrap();
    for start in enumerate_primitive_classes(&g, 4).unwrap() {
        let combo = PeriodicCombo::single(&g, start).unwrap();
        let image = run_composition(&g, &fam, 1, &combo).unwrap();
        freq_vector(&g, &image, 3).unwrap().check_invariants(&g).unwrap();
    }
}

/// The stability bound for one member: classes without `ef` lose at most a
/// `2ε` share of their length, so frequencies grow by at most `1/(1-2ε)`.
fn stability_violations(g: &Graph, mem: &FamilyMember, n: usize, max_w: usize, max_v: usize) -> (usize, usize) {
    let coe = mem.marker(g, n).unwrap();
    let ef = mem.short_word();
    let long = mem.long_word(n);
    let words = words_up_to(g, max_v);
    let slack = Rational::from_integer((n * mem.p.len() + 2).into());
    let (mut checked, mut bad) = (0, 0);
    for c in enumerate_primitive_classes(g, max_w).unwrap() {
        if occurrence_count(&ef, &c) > 0 {
            continue;
        }
        let eta = PeriodicMeasure::new(g, c.clone()).unwrap();
        let eps = freq(&long, &eta) * &slack + rational(1, 100);
        if eps >= rational(1, 2) {
            continue;
        }
        let image = PeriodicMeasure::new(g, coe.f_phi(g, &c).unwrap()).unwrap();
        let factor = (Rational::one() - eps * rational(2, 1)).recip();
        for v in &words {
            let rhs = if contains(v, &ef) { freq(&long, &eta) } else { freq(v, &eta) };
            checked += 1;
            if freq(v, &image) > &factor * rhs {
                bad += 1;
            }
        }
    }
    (checked, bad)
}

#[test]
fn stability_bound_for_the_family() {
    let g = rose(3).unwrap();
    let fam = proximality_family(&g).unwrap();
    for mem in &fam.members {
        for n in 1..=2 {
            let (checked, bad) = stability_violations(&g, mem, n, 10, 3);
            assert!(checked > 0);
            assert_eq!(bad, 0, "member {:?}, n = {n}", mem.pair());
        }
    }
}

#[test]
fn stability_bound_with_short_data() {
    // short data words make e p^n f occur inside short classes
    let g = rose(3).unwrap();
    let mut tested = 0;
    for (e, f) in [(0, 1), (1, 0), (0, 2), (2, 1)] {
        let p = vec![3 - e - f];
        for n in 1..=2 {
            let data = MarkerData::new(&g, MarkerKind::TypeII, vec![e], vec![f], vec![], p.repeat(n)).unwrap();
            if check_overlap_conditions(data).is_err() {
                continue;
            }
            let mem = FamilyMember { kind: MarkerKind::TypeII, m: vec![e], m2: vec![f], p: p.clone() };
            let (checked, bad) = stability_violations(&g, &mem, n, 10, 3);
            assert!(checked > 0);
            assert_eq!(bad, 0, "pair ({e}, {f}), n = {n}");
            tested += 1;
        }
    }
    assert!(tested > 0);
}

#[test]
fn frequencies_of_theta_classes() {
    let g = theta();
    let c = CyclicClass::parse(&g, "e1 f1 e2 f2").unwrap();
    let eta = PeriodicMeasure::new(&g, c).unwrap();
    assert_eq!(freq(&[0], &eta), rational(1, 4));
    assert_eq!(freq(&[0, 2], &eta), rational(1, 4));
    assert!(freq(&[0, 3], &eta).is_zero());
}
