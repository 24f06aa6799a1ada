use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kneser_core::kneser::{exhaustive_scan, DEFAULT_EXHAUSTIVE_BUDGET};
use kneser_core::menger::strong_matching_via_fan;
use kneser_core::{
    atoms, check_duality, check_j_selection, check_trace_preconditions, dual, kappa1, menger_fan, min_cut,
    period, proof_trace_unchecked, scan, strong_matching, sumset, trace_sweep, verify_kneser, with_workers,
    BitSet, Digraph, Error, Group, GroupSubset, Kappa1Engine, MengerEngine, ScanConfig, Verdict,
    DEFAULT_MAX_ORDER,
};

use crate::parse::{parse_group, parse_set, render_element, render_set};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "kneser", version, about = "Sumsets, connectivity and periodicity on finite abelian groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Largest group order accepted.
    #[arg(long, global = true, env = "KNESER_MAX_ORDER", default_value_t = DEFAULT_MAX_ORDER)]
    pub max_order: usize,

    /// Worker threads for parallel scans.
    #[arg(long, global = true, env = "KNESER_WORKERS", value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Emit histograms as CSV.
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EngineArg {
    Auto,
    Exhaustive,
    Flow,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FanEngineArg {
    Contraction,
    Flow,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MatchEngineArg {
    Matching,
    Contraction,
    Flow,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// A + B.
    Sumset {
        #[arg(long)]
        group: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// The stabilizer of a set.
    Period {
        #[arg(long)]
        group: String,
        #[arg(long)]
        set: String,
    },
    /// 1-connectivity of a connection set containing 0.
    Kappa1 {
        #[arg(long)]
        group: String,
        #[arg(long)]
        set: String,
        #[arg(long, value_enum, default_value = "auto")]
        engine: EngineArg,
    },
    /// κ₁, α₁ and the 1-atoms through 0.
    Atoms {
        #[arg(long)]
        group: String,
        #[arg(long)]
        set: String,
        #[arg(long, value_enum, default_value = "auto")]
        engine: EngineArg,
    },
    /// Checks (X^S)^(−S) + S = X + S.
    Duality {
        #[arg(long)]
        group: String,
        #[arg(long)]
        s: String,
        #[arg(long)]
        x: String,
    },
    /// Openly disjoint paths in a digraph file.
    Menger {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
        /// Defaults to the minimum cut.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "contraction")]
        engine: FanEngineArg,
    },
    /// Strong matching from X in the Cayley digraph of S.
    Strongmatch {
        #[arg(long)]
        group: String,
        #[arg(long)]
        s: String,
        #[arg(long)]
        x: String,
        /// Defaults to min(|X|, |G| − |X|, κ₁).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "matching")]
        engine: MatchEngineArg,
    },
    /// Certificate for the periodicity theorem on one pair.
    Verify {
        #[arg(long)]
        group: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Ledger trace of the isoperimetric argument on one pair, or on every
    /// admissible pair with `--sweep`.
    Trace {
        #[arg(long)]
        group: String,
        #[arg(long, required_unless_present = "sweep")]
        s: Option<String>,
        #[arg(long, required_unless_present = "sweep")]
        t: Option<String>,
        /// Also check that J is a maximal choice.
        #[arg(long)]
        check_j: bool,
        #[arg(long, conflicts_with_all = ["s", "t"])]
        sweep: bool,
    },
    /// Verifies every pair, or a seeded sample.
    Scan {
        #[arg(long)]
        group: String,
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,
        /// Force sampling with this many pairs.
        #[arg(long)]
        samples: Option<u64>,
        /// Exhaustive pair budget.
        #[arg(long)]
        budget: Option<u128>,
    },
}

/// A rendered report and whether it records a violation.
#[derive(Debug)]
pub struct Report {
    pub text: String,
    pub violation: bool,
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: String) -> Self {
        Failure {
            code: EXIT_USAGE,
            message,
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::LedgerViolation(_) | Error::InvariantViolated(_) | Error::NotMaximal(_) | Error::Recursion(_) => {
            EXIT_VIOLATION
        }
        _ => EXIT_USAGE,
    }
}

fn fail(e: Error, input: &str) -> Failure {
    Failure {
        code: exit_code(&e),
        message: format!("{e} (input: {input})"),
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

struct Ctx {
    max_order: usize,
}

impl Ctx {
    fn group(&self, text: &str) -> Result<Group, Failure> {
        let spec = parse_group(text).map_err(|e| fail(e, &format!("--group {text}")))?;
        Group::with_max_order(&spec, self.max_order).map_err(|e| fail(e, &format!("--group {text}")))
    }

    fn set(&self, g: &Group, flag: &str, text: &str) -> Result<GroupSubset, Failure> {
        parse_set(text, g).map_err(|e| fail(e, &format!("--{flag} {text}")))
    }
}

fn engine(e: EngineArg, order: usize) -> Kappa1Engine {
    match e {
        EngineArg::Auto => Kappa1Engine::auto(order),
        EngineArg::Exhaustive => Kappa1Engine::Exhaustive,
        EngineArg::Flow => Kappa1Engine::Flow,
    }
}

fn plain(text: String) -> Report {
    Report { text, violation: false }
}

/// Runs one command and renders its report.
pub fn dispatch(cli: &Cli) -> Result<Report, Failure> {
    let ctx = Ctx {
        max_order: cli.max_order,
    };
    match &cli.command {
        Command::Sumset { group, a, b } => {
            let g = ctx.group(group)?;
            let (sa, sb) = (ctx.set(&g, "a", a)?, ctx.set(&g, "b", b)?);
            let sum = sumset(&g, &sa, &sb).map_err(|e| fail(e, a))?;
            Ok(plain(pretty(&json!({
                "group": g.label(),
                "a": render_set(&g, &sa),
                "b": render_set(&g, &sb),
                "sum": render_set(&g, &sum),
                "size": sum.card(),
            }))))
        }
        Command::Period { group, set } => {
            let g = ctx.group(group)?;
            let s = ctx.set(&g, "set", set)?;
            let h = period(&g, &s).map_err(|e| fail(e, set))?;
            Ok(plain(pretty(&json!({
                "group": g.label(),
                "set": render_set(&g, &s),
                "period": render_set(&g, h.carrier()),
                "periodic": !h.is_trivial(),
            }))))
        }
        Command::Kappa1 { group, set, engine: e } => {
            let g = ctx.group(group)?;
            let s = ctx.set(&g, "set", set)?;
            let k = kappa1(&g, &s, engine(*e, g.order())).map_err(|e| fail(e, set))?;
            Ok(plain(format!("{k}\n")))
        }
        Command::Atoms { group, set, engine: e } => {
            let g = ctx.group(group)?;
            let s = ctx.set(&g, "set", set)?;
            let r = atoms(&g, &s, engine(*e, g.order())).map_err(|e| fail(e, set))?;
            let atoms: Vec<String> = r.atoms_containing_zero.iter().map(|a| render_set(&g, a)).collect();
            Ok(plain(pretty(&json!({
                "group": g.label(),
                "set": render_set(&g, &s),
                "kappa1": r.kappa1,
                "alpha1": r.alpha1,
                "atoms": atoms,
                "witness": render_set(&g, &r.witness),
            }))))
        }
        Command::Duality { group, s, x } => {
            let g = ctx.group(group)?;
            let (ss, xs) = (ctx.set(&g, "s", s)?, ctx.set(&g, "x", x)?);
            let failure = check_duality(&g, &ss, &xs).map_err(|e| fail(e, s))?;
            let d = dual(&g, &ss, &xs).map_err(|e| fail(e, x))?;
            Ok(Report {
                violation: failure.is_some(),
                text: pretty(&json!({
                    "group": g.label(),
                    "s": render_set(&g, &ss),
                    "x": render_set(&g, &xs),
                    "dual": render_set(&g, &d),
                    "holds": failure.is_none(),
                    "difference": failure.map(|f| render_set(&g, &f)),
                })),
            })
        }
        Command::Menger {
            graph,
            x,
            y,
            k,
            engine: e,
        } => {
            let shown = graph.display().to_string();
            let text = fs::read_to_string(graph).map_err(|e| Failure::usage(format!("{e} (input: {shown})")))?;
            let dg = Digraph::parse(&text).map_err(|e| fail(e, &shown))?;
            let k = match k {
                Some(k) => *k,
                None => match min_cut(&dg, *x, *y).map_err(|e| fail(e, &format!("--x {x} --y {y}")))? {
                    Some((c, _)) => c,
                    None => return Err(fail(Error::EdgePresent(*x, *y), &format!("--x {x} --y {y}"))),
                },
            };
            let eng = match e {
                FanEngineArg::Contraction => MengerEngine::Contraction,
                FanEngineArg::Flow => MengerEngine::Flow,
            };
            let fan = menger_fan(&dg, *x, *y, k, eng).map_err(|e| fail(e, &format!("--x {x} --y {y} --k {k}")))?;
            Ok(plain(pretty(&json!({
                "k": k,
                "engine": format!("{e:?}").to_lowercase(),
                "fan": fan,
            }))))
        }
        Command::Strongmatch {
            group,
            s,
            x,
            k,
            engine: e,
        } => {
            let g = ctx.group(group)?;
            let (ss, xs) = (ctx.set(&g, "s", s)?, ctx.set(&g, "x", x)?);
            let dg = Digraph::cayley(&g, &ss).map_err(|e| fail(e, s))?;
            let xb = BitSet::from_indices(g.order(), xs.iter());
            let k = k.unwrap_or_else(|| xs.card().min(g.order() - xs.card()).min(dg.kappa1()));
            let pairs = match e {
                MatchEngineArg::Matching => strong_matching(&dg, &xb, k),
                MatchEngineArg::Contraction => strong_matching_via_fan(&dg, &xb, k, MengerEngine::Contraction),
                MatchEngineArg::Flow => strong_matching_via_fan(&dg, &xb, k, MengerEngine::Flow),
            }
            .map_err(|e| fail(e, &format!("--x {x} --k {k}")))?;
            let rendered: Vec<[String; 2]> = pairs
                .iter()
                .map(|&(a, b)| [render_element(&g, a), render_element(&g, b)])
                .collect();
            Ok(plain(pretty(&json!({
                "group": g.label(),
                "s": render_set(&g, &ss),
                "x": render_set(&g, &xs),
                "k": k,
                "pairs": rendered,
            }))))
        }
        Command::Verify { group, a, b } => {
            let g = ctx.group(group)?;
            let (sa, sb) = (ctx.set(&g, "a", a)?, ctx.set(&g, "b", b)?);
            let c = verify_kneser(&g, &sa, &sb).map_err(|e| fail(e, &format!("--a {a} --b {b}")))?;
            let period = GroupSubset::from_indices(&g, c.period.iter().copied()).expect("in range");
            Ok(Report {
                text: pretty(&json!({
                    "group": g.label(),
                    "a": render_set(&g, &sa),
                    "b": render_set(&g, &sb),
                    "sum_size": c.sum_size,
                    "hypothesis_met": c.hypothesis_met,
                    "period": render_set(&g, &period),
                    "bound": c.bound,
                    "verdict": c.verdict,
                })),
                violation: c.verdict == Verdict::Violation,
            })
        }
        Command::Trace {
            group,
            s,
            t,
            check_j,
            sweep,
        } => {
            let g = ctx.group(group)?;
            if *sweep {
                let r = trace_sweep(&g).map_err(|e| fail(e, group))?;
                return Ok(Report {
                    text: r.to_json() + "\n",
                    violation: !r.is_clean(),
                });
            }
            let (s, t) = (s.as_deref().unwrap_or_default(), t.as_deref().unwrap_or_default());
            let (ss, ts) = (ctx.set(&g, "s", s)?, ctx.set(&g, "t", t)?);
            let input = format!("--s {s} --t {t}");
            check_trace_preconditions(&g, &ss, &ts).map_err(|e| fail(e, &input))?;
            let trace = proof_trace_unchecked(&g, &ss, &ts).map_err(|e| fail(e, &input))?;
            let mut violation = !trace.is_clean();
            let mut doc = serde_json::to_value(&trace).expect("json");
            if *check_j {
                let verdict = match check_j_selection(&trace) {
                    Ok(()) => "pass".to_string(),
                    Err(e) => {
                        violation = true;
                        e.to_string()
                    }
                };
                doc["j_selection"] = Value::String(verdict);
            }
            Ok(Report {
                text: pretty(&doc),
                violation,
            })
        }
        Command::Scan {
            group,
            exhaustive,
            samples,
            budget,
        } => {
            let g = ctx.group(group)?;
            let budget = budget.unwrap_or(DEFAULT_EXHAUSTIVE_BUDGET);
            let report = if *exhaustive {
                exhaustive_scan(&g, budget)
            } else {
                let mut cfg = ScanConfig {
                    exhaustive_budget: budget,
                    seed: cli.seed,
                    ..ScanConfig::default()
                };
                if let Some(n) = samples {
                    cfg.samples = *n;
                    cfg.force_sampling = true;
                }
                scan(&g, &cfg)
            }
            .map_err(|e| fail(e, &format!("scan --group {group}")))?;
            let text = if cli.csv {
                report.histogram_csv().map_err(|e| fail(e, group))?
            } else {
                report.to_json() + "\n"
            };
            Ok(Report {
                text,
                violation: report.violation_count > 0,
            })
        }
    }
}

/// Runs `cli`, writes its report and returns the exit code.
pub fn run(cli: &Cli, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32 {
    let outcome = match cli.workers {
        Some(w) => match with_workers(w as usize, || dispatch(cli)) {
            Ok(r) => r,
            Err(e) => Err(fail(e, &format!("--workers {w}"))),
        },
        None => dispatch(cli),
    };
    match outcome {
        Ok(report) => {
            let written = match &cli.output {
                Some(path) => fs::write(path, &report.text)
                    .map_err(|e| format!("{e} (input: --output {})", path.display())),
                None => stdout
                    .write_all(report.text.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            if let Err(msg) = written {
                let _ = writeln!(stderr, "error: {msg}");
                return EXIT_USAGE;
            }
            if report.violation {
                EXIT_VIOLATION
            } else {
                EXIT_PASS
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
