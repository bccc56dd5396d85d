mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use markercoe::graph::{higman_thompson, rose, subdivided_circle, theta};
use markercoe::words::{
    contains, enumerate_primitive_classes, find_all, is_primitive_word, least_rotation, overlaps, rotate, Cycle,
    CyclicClass,
};
use markercoe::Graph;

use common::{naive_is_power, naive_overlaps};

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Lengths of all cycles up to `max`, found by walking every path.
fn cycle_lengths(g: &Graph, max: usize) -> HashSet<usize> {
    let mut out = HashSet::new();
    for v in 0..g.num_vertices() {
        for n in 1..=max {
            for p in g.paths_from(v, n) {
                if g.dst(*p.last().unwrap()) == v {
                    out.insert(n);
                }
            }
        }
    }
    out
}

fn reachable_all(g: &Graph) -> bool {
    (0..g.num_vertices()).all(|s| {
        let mut seen = vec![false; g.num_vertices()];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &e in g.out_edges(u) {
                if !seen[g.dst(e)] {
                    seen[g.dst(e)] = true;
                    stack.push(g.dst(e));
                }
            }
        }
        seen.iter().all(|&x| x)
    })
}

fn small_graph() -> impl Strategy<Value = Graph> {
    (1usize..=3)
        .prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(0usize..=2, n), n))
        .prop_filter_map("needs edges", |m| Graph::from_adjacency(&m).ok())
}

/// Necklace count of primitive words of length `n` over `k` letters.
fn lyndon_count(k: usize, n: usize) -> usize {
    fn mobius(mut n: usize) -> i64 {
        let mut sign = 1;
        let mut p = 2;
        while p * p <= n {
            if n.is_multiple_of(p) {
                n /= p;
                if n.is_multiple_of(p) {
                    return 0;
                }
                sign = -sign;
            }
            p += 1;
        }
        if n > 1 {
            sign = -sign;
        }
        sign
    }
    let total: i64 = (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| mobius(d) * (k as i64).pow((n / d) as u32)).sum();
    (total / n as i64) as usize
}

#[test]
fn primitive_class_counts_match_necklace_formula() {
    for k in 2..=3 {
        let g = rose(k).unwrap();
        let classes = enumerate_primitive_classes(&g, 8).unwrap();
        for n in 1..=8 {
            assert_eq!(classes.iter().filter(|c| c.len() == n).count(), lyndon_count(k, n), "rose({k}), n = {n}");
        }
    }
}

#[test]
fn theta_classes_have_even_length() {
    let g = theta();
    let classes = enumerate_primitive_classes(&g, 8).unwrap();
    assert!(classes.iter().all(|c| c.len() % 2 == 0));
    // one vertex class of the quotient gives rose(4) in length-2 steps
    assert_eq!(classes.iter().filter(|c| c.len() == 2).count(), 4);
    assert_eq!(classes.iter().filter(|c| c.len() == 4).count(), lyndon_count(4, 2));
}

#[test]
fn second_higher_edge_graph_survives_pair_removal() {
    for g in [rose(3).unwrap(), theta(), higman_thompson(2, 2).unwrap()] {
        if !g.classify().two_edge_connected {
            continue;
        }
        let h = g.higher_edge_graph(2).unwrap();
        for e in 0..h.graph.num_edges() {
            assert!(h.graph.remove_edge(e).unwrap().is_strongly_connected(), "removing {:?}", h.edge_paths[e]);
        }
    }
}

#[test]
fn circles_are_rejected() {
    for n in 1..=4 {
        let c = subdivided_circle(n).unwrap().classify();
        assert_eq!(c.is_subdivided_circle, Some(n));
        assert!(!c.sft_valid);
        assert_eq!(c.period, Some(n));
    }
}

proptest! {
    #[test]
    fn period_divides_every_cycle(g in small_graph()) {
        if let Some(d) = g.classify().period {
            let lens = cycle_lengths(&g, 8);
            prop_assert!(lens.iter().all(|l| l % d == 0));
            if g.is_strongly_connected() {
                prop_assert_eq!(lens.iter().fold(0, |a, &b| gcd(a, b)), d);
            }
        }
    }

    #[test]
    fn two_edge_connectivity_matches_definition(g in small_graph()) {
        let naive = reachable_all(&g)
            && (0..g.num_edges()).all(|e| reachable_all(&g.remove_edge(e).unwrap()));
        prop_assert_eq!(g.classify().two_edge_connected, naive);
        prop_assert_eq!(g.is_strongly_connected(), reachable_all(&g));
    }

    #[test]
    fn higher_edge_graph_counts(g in small_graph(), n in 1usize..=3) {
        let h = g.higher_edge_graph(n).unwrap();
        prop_assert_eq!(h.graph.num_edges(), g.paths_of_length(n).len());
        if n > 1 {
            prop_assert_eq!(h.graph.num_vertices(), g.paths_of_length(n - 1).len());
        }
    }

    #[test]
    fn overlaps_match_direct_comparison(
        w in proptest::collection::vec(0usize..3, 0..14),
        w2 in proptest::collection::vec(0usize..3, 0..14),
    ) {
        prop_assert_eq!(overlaps(&w, &w2), naive_overlaps(&w, &w2));
    }

    #[test]
    fn find_all_matches_scan(
        hay in proptest::collection::vec(0usize..2, 0..30),
        needle in proptest::collection::vec(0usize..2, 1..5),
    ) {
        let naive: Vec<usize> = (0..hay.len().saturating_sub(needle.len() - 1))
            .filter(|&i| hay[i..i + needle.len()] == needle[..])
            .collect();
        prop_assert_eq!(contains(&hay, &needle), !naive.is_empty());
        prop_assert_eq!(find_all(&hay, &needle), naive);
    }

    #[test]
    fn primitivity_matches_divisor_test(w in proptest::collection::vec(0usize..2, 1..16)) {
        prop_assert_eq!(is_primitive_word(&w), !naive_is_power(&w));
    }

    #[test]
    fn least_rotation_is_minimal(w in proptest::collection::vec(0usize..3, 1..12)) {
        let best = rotate(&w, least_rotation(&w));
        prop_assert!((0..w.len()).all(|k| best <= rotate(&w, k)));
    }

    #[test]
    fn classes_ignore_rotation(w in proptest::collection::vec(0usize..3, 1..12), k in 0usize..12) {
        let g = rose(3).unwrap();
        let a = CyclicClass::new(&g, w.clone()).unwrap();
        let b = CyclicClass::new(&g, rotate(&w, k % w.len())).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.is_primitive(), is_primitive_word(&w));
    }

    #[test]
    fn prime_factors_rebuild_the_cycle(w in proptest::collection::vec(0usize..4, 1..12)) {
        // theta cycles: alternate e* and f* letters
        let g = theta();
        let edges: Vec<usize> = w.iter().enumerate().map(|(i, &x)| if i % 2 == 0 { x % 2 } else { 2 + x % 2 }).collect();
        prop_assume!(edges.len().is_multiple_of(2));
        let c = Cycle::new(&g, edges.clone()).unwrap();
        prop_assert_eq!(c.prime_factors().concat(), edges);
        for f in c.prime_factors() {
            // a prime cycle leaves its base only once
            prop_assert_eq!(f.iter().filter(|&&e| g.src(e) == c.base()).count(), 1);
        }
    }
}
