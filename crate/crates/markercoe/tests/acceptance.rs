//! The acceptance suite: eleven criteria, one PASS/FAIL line each.
//! Runs without the libtest harness so the lines always reach stdout.

mod common;

use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use markercoe::dynamics::{convergence_report, proximality_family, solve_transitivity};
use markercoe::graph::{higman_thompson, rose, theta};
use markercoe::homology::{ektw_model, groupoid_homology, homology_matrix, out_d_cstar_simple};
use markercoe::measures::{
    approximate_by_periodic, freq, proj_distance, pushforward_oracle, rational, words_up_to, PeriodicCombo,
    PeriodicMeasure, Rational,
};
use markercoe::words::{enumerate_primitive_classes, occurrence_count, overlaps, CyclicClass};
use markercoe::Graph;

use common::{all_words, brute_orbit_count, naive_overlaps, random_markers};

const INVOLUTION_MAX_LEN: usize = 12;
const INVOLUTION_BUDGET: Duration = Duration::from_secs(60);
const MARKERS_PER_GRAPH: usize = 20;
const MARKER_DATA_LEN: usize = 5;
const ORACLE_CLASS_LEN: usize = 6;
const ORACLE_WORD_LEN: usize = 4;
const TRANSITIVITY_LEN: usize = 5;
const TRANSITIVITY_BUDGET: Duration = Duration::from_secs(300);
const PROXIMALITY_STARTS: [&str; 5] = ["b", "ab", "abc", "aabc", "acbb"];
const PROXIMALITY_N_MAX: usize = 32;
const PROXIMALITY_NEEDED: usize = 4;
const FREQ_LEN: usize = 6;
const INFSUM_TERMS: usize = 8;
const INFSUM_CLASS_LEN: usize = 12;
const EKTW_RANDOM: usize = 10;
const OVERLAP_LEN: usize = 8;
const SIGMUND_DEPTH: usize = 4;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn graphs() -> Vec<(&'static str, Graph)> {
    vec![("rose(2)", rose(2).unwrap()), ("rose(3)", rose(3).unwrap()), ("theta", theta())]
}

/// Criteria 1 and 2 share one sweep.
fn involution_sweep() -> (Verdict, Verdict) {
    let start = Instant::now();
    let (mut markers, mut checked, mut not_involutive, mut not_primitive) = (0, 0usize, 0usize, 0usize);
    for (i, (_, g)) in graphs().into_iter().enumerate() {
        let classes = enumerate_primitive_classes(&g, INVOLUTION_MAX_LEN).unwrap();
        for phi in random_markers(&g, MARKERS_PER_GRAPH, 1000 + i as u64, MARKER_DATA_LEN) {
            markers += 1;
            for c in &classes {
                let image = phi.f_phi(&g, c).unwrap();
                if !image.is_primitive() {
                    not_primitive += 1;
                }
                if phi.f_phi(&g, &image).unwrap() != *c {
                    not_involutive += 1;
                }
                checked += 1;
            }
        }
    }
    let took = start.elapsed();
    (
        verdict(
            not_involutive == 0 && markers >= 50 && took < INVOLUTION_BUDGET,
            format!("{markers} markers, {checked} class evaluations, {not_involutive} failures, {took:.1?}"),
        ),
        verdict(not_primitive == 0, format!("{checked} images, {not_primitive} not primitive")),
    )
}

fn oracle_equivalence() -> Verdict {
    let mut checked = 0usize;
    let mut bad = 0usize;
    for (i, (_, g)) in graphs().into_iter().enumerate() {
        let classes = enumerate_primitive_classes(&g, ORACLE_CLASS_LEN).unwrap();
        let words = words_up_to(&g, ORACLE_WORD_LEN);
        for phi in random_markers(&g, MARKERS_PER_GRAPH, 1000 + i as u64, MARKER_DATA_LEN) {
            for c in &classes {
                let image = phi.f_phi(&g, c).unwrap();
                for v in &words {
                    let oracle = pushforward_oracle(&g, &phi, c, v).unwrap();
                    if oracle != occurrence_count(v, &image) as i64 {
                        bad += 1;
                    }
                    checked += 1;
                }
            }
        }
    }
    verdict(bad == 0, format!("{checked} (φ, p, v) triples, {bad} mismatches"))
}

fn transitivity() -> Verdict {
    let start = Instant::now();
    let (mut pairs, mut bad, mut longest) = (0usize, 0usize, 0usize);
    for (_, g) in graphs() {
        let classes = enumerate_primitive_classes(&g, TRANSITIVITY_LEN).unwrap();
        for a in &classes {
            for b in &classes {
                pairs += 1;
                match solve_transitivity(&g, a, b) {
                    Ok(chain) if chain.fold_verified() && chain.fold(&g, a).ok().as_ref() == Some(b) => {
                        longest = longest.max(chain.len())
                    }
                    _ => bad += 1,
                }
            }
        }
    }
    let took = start.elapsed();
    verdict(
        bad == 0 && took < TRANSITIVITY_BUDGET,
        format!("{pairs} ordered pairs, {bad} failures, longest chain {longest}, {took:.1?}"),
    )
}

fn proximality() -> Verdict {
    let g = rose(3).unwrap();
    let fam = proximality_family(&g).unwrap();
    let eps = rational(1, 20);
    let threshold = Rational::one() - &eps;
    let mut good = 0;
    let mut bound_ok = true;
    let mut notes = Vec::new();
    for s in PROXIMALITY_STARTS {
        let start = PeriodicCombo::single(&g, CyclicClass::parse(&g, s).unwrap()).unwrap();
        let rep = convergence_report(&g, &fam, &start, 1, &eps, PROXIMALITY_N_MAX).unwrap();
        let last = rep.last().unwrap();
        let complete = rep.truncated.is_none() && last.n == PROXIMALITY_N_MAX;
        bound_ok &= rep.bound_respected();
        if complete && rep.above_first() && last.s >= threshold {
            good += 1;
        }
        notes.push(format!(
            "{s}: S({})={:.4} reached {}{}",
            last.n,
            markercoe::measures::to_f64(&last.s),
            rep.reached.map_or("-".into(), |n| format!("n={n}")),
            if rep.nondecreasing() { "" } else { " (not monotone)" }
        ));
    }
    verdict(
        bound_ok && good >= PROXIMALITY_NEEDED,
        format!("{good}/5 starts converge, bound {}; {}", if bound_ok { "respected" } else { "VIOLATED" }, notes.join("; ")),
    )
}

fn frequency_exactness() -> Verdict {
    let g = rose(2).unwrap();
    let classes = enumerate_primitive_classes(&g, FREQ_LEN).unwrap();
    let words: Vec<_> = all_words(2, FREQ_LEN).into_iter().filter(|w| !w.is_empty()).collect();
    let mut bad = 0;
    for c in &classes {
        let eta = PeriodicMeasure::new(&g, c.clone()).unwrap();
        for v in &words {
            let brute = Rational::new(brute_orbit_count(v, c.rep()).into(), c.len().into());
            if freq(v, &eta) != brute {
                bad += 1;
            }
        }
    }
    verdict(bad == 0, format!("{} classes × {} words, {bad} mismatches", classes.len(), words.len()))
}

fn infsum() -> Verdict {
    let g = rose(3).unwrap();
    let fam = proximality_family(&g).unwrap();
    let classes = enumerate_primitive_classes(&g, INFSUM_CLASS_LEN).unwrap();
    let mut worst = Rational::zero();
    let mut bad = 0;
    for mem in &fam.members {
        let longs: Vec<_> = (1..=INFSUM_TERMS).map(|n| mem.long_word(n)).collect();
        for c in &classes {
            let eta = PeriodicMeasure::new(&g, c.clone()).unwrap();
            let total: Rational = longs
                .iter()
                .enumerate()
                .map(|(i, w)| Rational::from_integer(((i + 1) * mem.p.len()).into()) * freq(w, &eta))
                .sum();
            if total > Rational::one() {
                bad += 1;
            }
            worst = worst.max(total);
        }
    }
    verdict(
        bad == 0,
        format!("{} pairs × {} classes, largest sum {}, {bad} above 1", fam.len(), classes.len(), worst),
    )
}

fn homology_grid() -> Verdict {
    let mut bad = Vec::new();
    for n in 2..=6usize {
        for r in 1..=3 {
            let g = higman_thompson(n, r).unwrap();
            let simple = out_d_cstar_simple(&g).unwrap().simple;
            let h = groupoid_homology(&g).unwrap();
            let expected: Vec<num_bigint::BigInt> = if n == 2 { vec![] } else { vec![(n - 1).into()] };
            if simple != (n % 2 == 0) || h.h0.free_rank != 0 || h.h0.torsion != expected || h.h1_rank != 0 {
                bad.push(format!("V({n},{r})"));
            }
        }
    }
    verdict(bad.is_empty(), format!("15 groups, failures: [{}]", bad.join(", ")))
}

fn random_ektw_graphs(count: usize) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(1..=3);
        let m: Vec<Vec<usize>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..=2)).collect()).collect();
        let Ok(g) = Graph::from_adjacency(&m) else { continue };
        if g.classify().sft_valid && !homology_matrix(&g).unwrap().det().unwrap().is_zero() {
            out.push(g);
        }
    }
    out
}

fn ektw() -> Verdict {
    let mut cases = vec![rose(2).unwrap(), rose(3).unwrap(), higman_thompson(4, 1).unwrap()];
    cases.extend(random_ektw_graphs(EKTW_RANDOM));
    let mut bad = Vec::new();
    for (i, g) in cases.iter().enumerate() {
        match ektw_model(g) {
            Ok(model) if model.record.passed() => {}
            Ok(model) => bad.push(format!("#{i}: {:?}", model.record)),
            Err(e) => bad.push(format!("#{i}: {e}")),
        }
    }
    verdict(bad.is_empty(), format!("{} graphs, failures: [{}]", cases.len(), bad.join("; ")))
}

fn overlap_checker() -> Verdict {
    let words = all_words(2, OVERLAP_LEN);
    let mut bad = 0usize;
    for w in &words {
        for w2 in &words {
            if overlaps(w, w2) != naive_overlaps(w, w2) {
                bad += 1;
            }
        }
    }
    verdict(bad == 0, format!("{} pairs, {bad} mismatches", words.len() * words.len()))
}

fn sigmund() -> Verdict {
    let g = rose(2).unwrap();
    let eps = rational(1, 20);
    let cls = |s: &str| CyclicClass::parse(&g, s).unwrap();
    let q = |n, d| rational(n, d);
    let combos: Vec<Vec<(Rational, CyclicClass)>> = vec![
        vec![(q(1, 2), cls("a")), (q(1, 2), cls("b"))],
        vec![(q(1, 4), cls("a")), (q(1, 4), cls("b")), (q(1, 2), cls("ab"))],
        vec![(q(1, 2), cls("a")), (q(1, 4), cls("b")), (q(1, 4), cls("ab"))],
        vec![(q(1, 3), cls("a")), (q(1, 3), cls("ab")), (q(1, 3), cls("abb"))],
        vec![(q(1, 4), cls("aab")), (q(1, 2), cls("b")), (q(1, 4), cls("abb"))],
        vec![(q(1, 3), cls("a")), (q(1, 3), cls("b")), (q(1, 3), cls("aabb"))],
    ];
    let mut bad = Vec::new();
    let mut lengths = Vec::new();
    for (i, terms) in combos.into_iter().enumerate() {
        let combo = PeriodicCombo::from_normalized(&g, terms).unwrap();
        match approximate_by_periodic(&g, &combo, SIGMUND_DEPTH, &eps) {
            Ok(a) => {
                let eta = PeriodicMeasure::new(&g, a.class.clone()).unwrap();
                let d = proj_distance(&g, &combo, &eta, SIGMUND_DEPTH);
                if !a.class.is_primitive() || d > eps {
                    bad.push(format!("#{i}: distance {d}"));
                }
                lengths.push(a.class.len().to_string());
            }
            Err(e) => bad.push(format!("#{i}: {e}")),
        }
    }
    verdict(
        bad.is_empty(),
        format!("6 combos, witness lengths [{}], failures: [{}]", lengths.join(", "), bad.join("; ")),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, v: Verdict| {
        println!("[{}] {id:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    };
    let (inv, prim) = involution_sweep();
    report(1, "involution", inv);
    report(2, "primitivity preservation", prim);
    report(3, "oracle equivalence", oracle_equivalence());
    report(4, "transitivity", transitivity());
    report(5, "proximality convergence", proximality());
    report(6, "periodic frequency exactness", frequency_exactness());
    report(7, "infinite-sum budget", infsum());
    report(8, "homology grid", homology_grid());
    report(9, "2-edge-connected model", ektw());
    report(10, "overlap checker", overlap_checker());
    report(11, "periodic approximation", sigmund());
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
