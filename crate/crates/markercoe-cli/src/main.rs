mod input;
mod sample;

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use markercoe::dynamics::{convergence_report, proximality_family_auto, solve_transitivity};
use markercoe::homology::{abelianization_fd, ektw_model, groupoid_homology, out_d_cstar_simple};
use markercoe::marker::{check_overlap_conditions, MarkerKind};
use markercoe::measures::{parse_rational, PeriodicCombo};
use markercoe::words::{enumerate_primitive_classes, CyclicClass};
use markercoe::{Error, Graph, Result};

#[derive(Parser)]
#[command(name = "markercoe", version, about = "Marker orbit equivalences on edge shifts")]
struct Cli {
    /// Graph JSON file, or rose:N, theta, circle:N, ht:N,R
    #[arg(long, global = true, default_value = "rose:2")]
    graph: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Subcommand)]
enum Command {
    /// Classification, periodic decomposition and path counts
    Analyze {
        /// Count paths up to this length
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Primitive cyclic classes up to a length
    Classes {
        #[arg(long, default_value_t = 4)]
        max_len: usize,
    },
    /// Validate, apply or sample marker data
    Marker {
        #[arg(value_enum)]
        action: MarkerAction,
        /// Marker JSON, inline or as a file
        #[arg(long)]
        marker: Option<String>,
        /// `w(p)` for apply, a cycle for fphi
        #[arg(long)]
        input: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Longest data word when sampling
        #[arg(long, default_value_t = 3)]
        max_len: usize,
    },
    /// A chain of marker moves between two primitive classes
    Transitivity {
        #[arg(long)]
        src: String,
        #[arg(long)]
        dst: String,
    },
    /// Convergence of the proximality family from start classes
    Proximality {
        /// Start classes; defaults to the shortest primitive class
        #[arg(long = "start", value_delimiter = ',')]
        starts: Vec<String>,
        #[arg(long = "power", default_value_t = 1)]
        power: usize,
        #[arg(long, default_value = "1/20")]
        epsilon: String,
        #[arg(long, default_value_t = 32)]
        n_max: usize,
    },
    /// Groupoid homology and the C*-simplicity verdict for Out(D)
    Homology,
    /// A 2-edge-connected model with the same invariants
    Ektw,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MarkerAction {
    Check,
    Apply,
    Fphi,
    Random,
}

/// Output plus the exit status it carries.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(text: String) -> Outcome {
        Outcome { text, code: 0 }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Overlap(_) | Error::Verification(_) => 3,
        Error::BoundExhausted(_) => 4,
        _ => 2,
    }
}

fn to_json<T: Serialize + ?Sized>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("output serialises");
    s.push('\n');
    s
}

fn class_arg(g: &Graph, text: &str) -> Result<CyclicClass> {
    CyclicClass::parse(g, text)
}

fn analyze(g: &Graph, fmt: Format, depth: usize) -> Result<Outcome> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let c = g.classify();
    let decomposition = c.strongly_connected.then(|| g.periodic_decomposition()).transpose()?;
    let counts: Vec<usize> = (1..=depth).map(|k| g.paths_of_length(k).len()).collect();
    let code = if c.sft_valid { 0 } else { 2 };
    let text = match fmt {
        Format::Json => to_json(&json!({
            "vertices": g.num_vertices(),
            "edges": g.num_edges(),
            "classification": c,
            "cyclic_classes": decomposition.as_ref().map(|d| &d.classes),
            "path_counts": counts,
        })),
        Format::Tsv => {
            let opt = |x: Option<usize>| x.map_or("-".to_string(), |n| n.to_string());
            let mut s = String::new();
            writeln!(s, "vertices\t{}", g.num_vertices()).unwrap();
            writeln!(s, "edges\t{}", g.num_edges()).unwrap();
            writeln!(s, "strongly_connected\t{}", c.strongly_connected).unwrap();
            writeln!(s, "two_edge_connected\t{}", c.two_edge_connected).unwrap();
            writeln!(s, "subdivided_circle\t{}", opt(c.is_subdivided_circle)).unwrap();
            writeln!(s, "rose\t{}", opt(c.is_rose)).unwrap();
            writeln!(s, "period\t{}", opt(c.period)).unwrap();
            writeln!(s, "sft_valid\t{}", c.sft_valid).unwrap();
            if let Some(d) = &decomposition {
                for (i, cls) in d.classes.iter().enumerate() {
                    let vs: Vec<String> = cls.iter().map(|v| v.to_string()).collect();
                    writeln!(s, "class_{i}\t{}", vs.join(" ")).unwrap();
                }
            }
            for (k, n) in counts.iter().enumerate() {
                writeln!(s, "paths_{}\t{n}", k + 1).unwrap();
            }
            s
        }
    };
    if code != 0 {
        eprintln!("error: graph is not usable as an edge shift");
    }
    Ok(Outcome { text, code })
}

fn classes(g: &Graph, fmt: Format, max_len: usize) -> Result<Outcome> {
    g.require_sft()?;
    if max_len == 0 {
        return Err(Error::InvalidParameter("max-len must be at least 1".into()));
    }
    let cls = enumerate_primitive_classes(g, max_len)?;
    Ok(Outcome::ok(match fmt {
        Format::Json => to_json(&cls),
        Format::Tsv => cls.iter().map(|c| format!("{}\t{}\n", c.len(), g.format_word(c.rep()))).collect(),
    }))
}

fn marker(
    g: &Graph,
    fmt: Format,
    action: MarkerAction,
    spec: Option<&str>,
    input: Option<&str>,
    seed: u64,
    max_len: usize,
) -> Result<Outcome> {
    g.require_sft()?;
    if action == MarkerAction::Random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coe = sample::random_marker(g, &mut rng, max_len)?;
        return Ok(Outcome::ok(to_json(&coe)));
    }
    let spec = spec.ok_or_else(|| Error::InvalidParameter("--marker is required".into()))?;
    let coe = match check_overlap_conditions(input::load_marker(g, spec)?) {
        Ok(coe) => coe,
        Err(Error::Overlap(report)) if action == MarkerAction::Check => {
            let text = match fmt {
                Format::Json => to_json(&json!({ "valid": false, "violation": report })),
                Format::Tsv => format!(
                    "valid\tfalse\ncondition\t{}\nleft\t{}\nright\t{}\noffending\t{}\nallowed\t{}\n",
                    report.condition,
                    g.format_word(&report.left),
                    g.format_word(&report.right),
                    report.offending,
                    report.allowed
                ),
            };
            return Ok(Outcome { text, code: 3 });
        }
        Err(e) => return Err(e),
    };
    let input = || input.ok_or_else(|| Error::InvalidParameter("--input is required".into()));
    let text = match action {
        MarkerAction::Check => {
            let kind = match coe.kind() {
                MarkerKind::TypeI => "I",
                MarkerKind::TypeII => "II",
            };
            let (a, b) = coe.continuity_constant();
            match fmt {
                Format::Json => to_json(&json!({ "valid": true, "marker": coe, "continuity": [a, b] })),
                Format::Tsv => format!("valid\ttrue\nkind\t{kind}\ncontinuity\t{a}\t{b}\n"),
            }
        }
        MarkerAction::Apply => {
            let x = input::parse_point(g, input()?)?;
            let y = coe.apply_point(&x)?;
            let (k, l) = coe.cocycle_pair(&x);
            match fmt {
                Format::Json => to_json(&json!({ "input": x, "output": y, "cocycle": [k, l] })),
                Format::Tsv => format!("{}\t{}\t{k}\t{l}\n", x.format(g), y.format(g)),
            }
        }
        MarkerAction::Fphi => {
            let cls = class_arg(g, input()?)?;
            let image = coe.f_phi(g, &cls)?;
            match fmt {
                Format::Json => to_json(&json!({ "input": cls, "output": image })),
                Format::Tsv => format!("{}\t{}\n", g.format_word(cls.rep()), g.format_word(image.rep())),
            }
        }
        MarkerAction::Random => unreachable!(),
    };
    Ok(Outcome::ok(text))
}

fn transitivity(g: &Graph, fmt: Format, src: &str, dst: &str) -> Result<Outcome> {
    let (a, b) = (class_arg(g, src)?, class_arg(g, dst)?);
    let chain = solve_transitivity(g, &a, &b)?;
    Ok(Outcome::ok(match fmt {
        Format::Json => to_json(&chain),
        Format::Tsv => {
            let mut s = format!(
                "# source\t{}\n# target\t{}\n# moves\t{}\n# fold_verified\t{}\n",
                g.format_word(a.rep()),
                g.format_word(b.rep()),
                chain.len(),
                chain.fold_verified()
            );
            for (i, mv) in chain.moves().iter().enumerate() {
                let d = mv.coe.data();
                writeln!(
                    s,
                    "{}\t{}\t{}\t{}\t{}",
                    i + 1,
                    g.format_word(&d.m),
                    g.format_word(&d.d),
                    g.format_word(&d.d2),
                    mv.tag
                )
                .unwrap();
            }
            s
        }
    }))
}

fn proximality(g: &Graph, fmt: Format, starts: &[String], power: usize, epsilon: &str, n_max: usize) -> Result<Outcome> {
    g.require_sft()?;
    let eps = parse_rational(epsilon)?;
    let fam = proximality_family_auto(g)?;
    let starts: Vec<CyclicClass> = if starts.is_empty() {
        let shortest = (1..=g.num_vertices())
            .find_map(|l| enumerate_primitive_classes(g, l).ok()?.into_iter().next())
            .ok_or_else(|| Error::InvalidGraph("no primitive class".into()))?;
        vec![shortest]
    } else {
        starts.iter().map(|s| class_arg(g, s)).collect::<Result<_>>()?
    };
    let mut reports = Vec::new();
    for start in &starts {
        start.require_primitive(g)?;
        let combo = PeriodicCombo::single(g, start.clone())?;
        reports.push((start, convergence_report(g, &fam, &combo, power, &eps, n_max)?));
    }
    let violated = reports.iter().any(|(_, r)| !r.bound_respected());
    let text = match fmt {
        Format::Json => to_json(&json!({
            "family": fam,
            "reports": reports.iter().map(|(s, r)| json!({ "start": s, "report": r })).collect::<Vec<_>>(),
        })),
        Format::Tsv => {
            let mut s = String::new();
            for (start, r) in &reports {
                writeln!(s, "# start\t{}", g.format_word(start.rep())).unwrap();
                writeln!(s, "# target\t{}", g.format_word(r.target.rep())).unwrap();
                s.push_str(&r.to_tsv());
            }
            s
        }
    };
    Ok(Outcome { text, code: if violated { 3 } else { 0 } })
}

fn homology(g: &Graph, fmt: Format) -> Result<Outcome> {
    let h = groupoid_homology(g)?;
    let ab = abelianization_fd(g)?;
    let verdict = out_d_cstar_simple(g)?;
    Ok(Outcome::ok(match fmt {
        Format::Json => to_json(&json!({
            "h0": h.h0,
            "h0_display": h.h0.to_string(),
            "h1_rank": h.h1_rank,
            "det_i_minus_a": h.det.to_string(),
            "abelianization": ab.to_string(),
            "cstar_simple": verdict,
        })),
        Format::Tsv => {
            let unit: Vec<String> = h.h0.unit.iter().flatten().map(|x| x.to_string()).collect();
            let h1 = match h.h1_rank {
                0 => "0".to_string(),
                1 => "Z".to_string(),
                n => format!("Z^{n}"),
            };
            format!(
                "H0\t{}\nunit\t{}\nH1\t{h1}\ndet(I-A)\t{}\nF/D\t{ab}\n{verdict}\n",
                h.h0,
                unit.join(" "),
                h.det
            )
        }
    }))
}

fn ektw(g: &Graph, fmt: Format) -> Result<Outcome> {
    let model = ektw_model(g)?;
    let passed = model.record.passed();
    let rows = model.adjacency.to_rows();
    let text = match fmt {
        Format::Json => {
            let graph: serde_json::Value = serde_json::from_str(&model.graph.to_json())?;
            let adjacency: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
            to_json(&json!({ "passed": passed, "graph": graph, "adjacency": adjacency, "record": model.record }))
        }
        Format::Tsv => {
            let mut s = String::new();
            for r in &rows {
                let r: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                writeln!(s, "A\t{}", r.join("\t")).unwrap();
            }
            let rec = &model.record;
            writeln!(s, "power\t{}", rec.power).unwrap();
            writeln!(s, "columns_swapped\t{}", rec.columns_swapped).unwrap();
            writeln!(s, "two_edge_connected\t{}", rec.two_edge_connected).unwrap();
            writeln!(s, "invariant_factors_match\t{}", rec.invariant_factors_match).unwrap();
            writeln!(s, "kernel_rank_match\t{}", rec.kernel_rank_match).unwrap();
            writeln!(s, "det_sign_match\t{}", rec.det_sign_match).unwrap();
            writeln!(s, "unit_match\t{}", rec.unit.matched()).unwrap();
            writeln!(s, "passed\t{passed}").unwrap();
            s
        }
    };
    Ok(Outcome { text, code: if passed { 0 } else { 3 } })
}

fn run(cli: &Cli) -> Result<Outcome> {
    let g = input::load_graph(&cli.graph)?;
    let fmt = cli.format;
    match &cli.command {
        Command::Analyze { depth } => analyze(&g, fmt, *depth),
        Command::Classes { max_len } => classes(&g, fmt, *max_len),
        Command::Marker { action, marker: spec, input, seed, max_len } => {
            marker(&g, fmt, *action, spec.as_deref(), input.as_deref(), *seed, *max_len)
        }
        Command::Transitivity { src, dst } => transitivity(&g, fmt, src, dst),
        Command::Proximality { starts, power, epsilon, n_max } => proximality(&g, fmt, starts, *power, epsilon, *n_max),
        Command::Homology => homology(&g, fmt),
        Command::Ektw => ektw(&g, fmt),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
