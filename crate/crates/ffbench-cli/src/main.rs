//! `ffbench` — build, expand, verify, certify, analyze, refute.
//!
//! Artifacts are JSON on stdout or at `--out`; logs go to stderr. All
//! subcommands are deterministic: identical invocations produce
//! byte-identical outputs.
//!
//! Exit codes: 0 success / clean verification; 1 verification or
//! certification failure (report still written); 2 budget exceeded;
//! 3 input or parameter error; 4 internal inconsistency.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ffbench_core::binary::{refute_five, BinaryCap, Refutation};
use ffbench_core::boxcap::{scale_to_integers, verify_box_cap, BoxCap};
use ffbench_core::forge::{cap_to_wall, clique_wall, tower_wall, ExpansionBudget};
use ffbench_core::layout::build_cs_4cap;
use ffbench_core::pipeline::{certify_r, execute_recipe, CertifyParams};
use ffbench_core::quasicap::initial_quasicap;
use ffbench_core::rational::Rational;
use ffbench_core::roots::{analyze, boundary_curve_r};
use ffbench_core::strand::{sequence_csv, strand_sequence, StrandParams};
use ffbench_core::vertexcap::{lower_to_vertex_cap, verify_vertex_cap, VertexCap};
use ffbench_core::wall::{
    color_sorted_order, first_fit, parse_family_json, parse_order, verify_wall, Wall,
};
use ffbench_core::Error;

#[derive(Parser)]
#[command(
    name = "ffbench",
    version,
    about = "Exact workbench for first-fit coloring lower bounds on interval graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArg {
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a certificate object and write it as JSON.
    Build {
        #[command(subcommand)]
        what: BuildWhat,
    },
    /// Expand a cap (vertex- or box-level JSON) into a wall of clique size k.
    Expand {
        cap: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1_000_000)]
        max_vertices: usize,
        /// Fill reserved strips concurrently; output is unaffected.
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run first-fit on a family with a presentation order (one id per line).
    Firstfit {
        family: PathBuf,
        #[arg(long)]
        order: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Verify a certificate file; exit 1 when violations are found.
    Verify {
        #[command(subcommand)]
        what: VerifyWhat,
    },
    /// Dump a strand height sequence.
    Sequence {
        #[arg(long)]
        r: String,
        #[arg(long)]
        theta: String,
        #[arg(long)]
        delta: String,
        #[arg(long, default_value_t = 16)]
        limit: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        out: OutArg,
    },
    /// Build a gap-closing recipe for a ratio, optionally executing it.
    Certify {
        #[arg(long)]
        r: String,
        #[arg(long, default_value = "1/2")]
        delta0: String,
        #[arg(long, default_value_t = 10_000)]
        cutoff: usize,
        #[arg(long, default_value = "1/1048576")]
        delta_min: String,
        /// Execute the recipe geometrically and verify the resulting cap.
        #[arg(long)]
        execute: bool,
        /// Where to write the executed cap (with --execute).
        #[arg(long)]
        out_cap: Option<PathBuf>,
        /// Box budget for the geometric execution.
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Analyze the characteristic cubic at (r, θ).
    Analyze {
        #[arg(long)]
        r: String,
        #[arg(long)]
        theta: String,
        /// Also classify the sign of the leading coefficient for this step size.
        #[arg(long)]
        delta: Option<String>,
        #[arg(long, default_value = "1/100000000")]
        eps: String,
        /// Evaluate the boundary curve r(θ) at this θ as well.
        #[arg(long)]
        boundary_theta: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Refute a binary cap claimed at ratio 5; writes the witness.
    Refute {
        cap: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum BuildWhat {
    /// Tower wall at level i: 3i+1 colors at clique size i+1.
    Tower {
        #[arg(long)]
        i: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Clique wall: k vertices sharing one interval.
    Clique {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// The classical hand-built cap at ratio 4.
    Cs4cap {
        #[command(flatten)]
        out: OutArg,
    },
    /// The trivial 1-quasicap for a ratio r > 3.
    Initialqc {
        #[arg(long)]
        r: String,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum VerifyWhat {
    Wall {
        file: PathBuf,
        /// Additionally require color count >= ratio * clique size.
        #[arg(long)]
        ratio: Option<String>,
        /// Export the color-sorted replay order, one vertex id per line.
        #[arg(long)]
        order_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    Boxcap {
        file: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    Vertexcap {
        file: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::BudgetExceeded(_) => 2,
            Error::Inconsistent => 4,
            Error::Stalled(_) | Error::NotStopped(_) => 1,
            _ => 3,
        };
        Failure::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ffbench: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(3, format!("cannot read {}: {e}", path.display())))
}

fn emit(out: &OutArg, text: &str) -> Result<(), Failure> {
    match &out.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::new(3, format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn parse_rational(s: &str, what: &str) -> Result<Rational, Failure> {
    s.parse::<Rational>()
        .map_err(|e| Failure::new(3, format!("bad {what} {s:?}: {e}")))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Build { what } => build(what),
        Command::Expand { cap, k, max_vertices, parallel, out } => {
            let text = read(&cap)?;
            let vcap = parse_any_cap(&text)?;
            let budget = ExpansionBudget { max_vertices, parallel_fill: parallel };
            let wall = cap_to_wall(&vcap, k, &budget)?;
            eprintln!(
                "expanded to {} vertices, {} colors at clique size {}",
                wall.family.len(),
                verify_wall(&wall).color_count,
                k
            );
            emit(&out, &to_json(&wall))?;
            Ok(0)
        }
        Command::Firstfit { family, order, out } => {
            let fam = parse_family_json(&read(&family)?)?;
            let order = parse_order(&read(&order)?)?;
            let colors = first_fit(&fam, &order)?;
            let records: Vec<serde_json::Value> = colors
                .iter()
                .enumerate()
                .map(|(id, c)| serde_json::json!({"id": id, "color": c}))
                .collect();
            emit(&out, &to_json(&serde_json::json!({ "colors": records })))?;
            Ok(0)
        }
        Command::Verify { what } => verify(what),
        Command::Sequence { r, theta, delta, limit, format, out } => {
            let params = StrandParams::new(
                parse_rational(&r, "r")?,
                parse_rational(&theta, "theta")?,
                parse_rational(&delta, "delta")?,
            );
            let terms = strand_sequence(&params, limit);
            let text = match format {
                Format::Csv => sequence_csv(&terms),
                Format::Json => {
                    let strings: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
                    to_json(&serde_json::json!({
                        "r": params.r.to_string(),
                        "theta": params.theta.to_string(),
                        "delta": params.delta.to_string(),
                        "terms": strings,
                    }))
                }
            };
            emit(&out, &text)?;
            Ok(0)
        }
        Command::Certify { r, delta0, cutoff, delta_min, execute, out_cap, budget, out } => {
            let r = parse_rational(&r, "r")?;
            let params = CertifyParams {
                delta0: parse_rational(&delta0, "delta0")?,
                cutoff,
                delta_min: parse_rational(&delta_min, "delta-min")?,
                ..CertifyParams::default()
            };
            let recipe = certify_r(&r, &params)?;
            eprintln!("certified {} in {} steps", r, recipe.steps.len());
            emit(&out, &to_json(&recipe))?;
            if execute {
                let cap = execute_recipe(&recipe, cutoff, budget)?;
                eprintln!("executed recipe: {} boxes, verified", cap.boxes.len());
                emit(&OutArg { out: out_cap }, &to_json(&cap))?;
            }
            Ok(0)
        }
        Command::Analyze { r, theta, delta, eps, boundary_theta, out } => {
            let r = parse_rational(&r, "r")?;
            let theta = parse_rational(&theta, "theta")?;
            let eps = parse_rational(&eps, "eps")?;
            let delta = match delta {
                Some(d) => Some(parse_rational(&d, "delta")?),
                None => None,
            };
            let report = analyze(&r, &theta, &eps, delta.as_ref());
            let mut value = serde_json::to_value(&report).expect("serializable");
            if let Some(bt) = boundary_theta {
                let bt = parse_rational(&bt, "boundary-theta")?;
                let curve = boundary_curve_r(&bt)?;
                value["boundary_curve"] = serde_json::json!({
                    "theta": bt.to_string(),
                    "r": curve.to_string(),
                });
            }
            emit(&out, &(serde_json::to_string_pretty(&value).expect("serializable") + "\n"))?;
            Ok(0)
        }
        Command::Refute { cap, out } => {
            let bincap: BinaryCap = serde_json::from_str(&read(&cap)?)
                .map_err(|e| Failure::new(3, format!("bad binary cap JSON: {e}")))?;
            let refutation = refute_five(&bincap)?;
            match &refutation {
                Refutation::Relations(rep) => {
                    eprintln!("refuted via {} relation violation(s)", rep.violations.len())
                }
                Refutation::Chain(w) => eprintln!(
                    "refuted at word \"{}\" after a chain of {} hard boxes",
                    w.failure.word,
                    w.chain.len()
                ),
            }
            emit(&out, &to_json(&refutation))?;
            Ok(0)
        }
    }
}

fn build(what: BuildWhat) -> Result<u8, Failure> {
    match what {
        BuildWhat::Tower { i, out } => {
            let wall = tower_wall(i)?;
            eprintln!("tower level {i}: {} vertices", wall.family.len());
            emit(&out, &to_json(&wall))?;
            Ok(0)
        }
        BuildWhat::Clique { k, out } => {
            emit(&out, &to_json(&clique_wall(k)))?;
            Ok(0)
        }
        BuildWhat::Cs4cap { out } => {
            emit(&out, &to_json(&build_cs_4cap()))?;
            Ok(0)
        }
        BuildWhat::Initialqc { r, out } => {
            let r = parse_rational(&r, "r")?;
            let qc = initial_quasicap(&r)?;
            emit(&out, &to_json(&qc.cap))?;
            Ok(0)
        }
    }
}

fn verify(what: VerifyWhat) -> Result<u8, Failure> {
    match what {
        VerifyWhat::Wall { file, ratio, order_out, out } => {
            let wall: Wall = serde_json::from_str(&read(&file)?)
                .map_err(|e| Failure::new(3, format!("bad wall JSON: {e}")))?;
            let report = verify_wall(&wall);
            if let Some(path) = order_out {
                let order = color_sorted_order(&wall);
                let mut text = String::new();
                for v in order {
                    text.push_str(&format!("{v}\n"));
                }
                fs::write(&path, text)
                    .map_err(|e| Failure::new(3, format!("cannot write {}: {e}", path.display())))?;
            }
            let mut clean = report.is_clean();
            eprintln!(
                "clique size {}, {} colors, ratio {}",
                report.clique_size, report.color_count, report.ratio
            );
            if let Some(ratio) = ratio {
                let ratio = parse_rational(&ratio, "ratio")?;
                let needed = &ratio * &Rational::from_int(report.clique_size as i64);
                if Rational::from_int(report.color_count as i64) < needed {
                    eprintln!("ratio check failed: needs {needed} colors for ratio {ratio}");
                    clean = false;
                } else {
                    eprintln!("ratio check passed at {ratio}");
                }
            }
            emit(&out, &to_json(&report))?;
            Ok(if clean { 0 } else { 1 })
        }
        VerifyWhat::Boxcap { file, out } => {
            let cap: BoxCap = serde_json::from_str(&read(&file)?)
                .map_err(|e| Failure::new(3, format!("bad box cap JSON: {e}")))?;
            let report = verify_box_cap(&cap);
            eprintln!(
                "{} boxes at ratio {}: {}",
                cap.boxes.len(),
                cap.r,
                if report.ok { "clean" } else { "violations found" }
            );
            emit(&out, &to_json(&report))?;
            Ok(if report.ok { 0 } else { 1 })
        }
        VerifyWhat::Vertexcap { file, out } => {
            let cap = VertexCap::from_json(&read(&file)?)
                .map_err(|e| Failure::new(3, format!("bad vertex cap JSON: {e}")))?;
            let report = verify_vertex_cap(&cap);
            eprintln!(
                "{} vertices at ratio {}: {}",
                cap.vertex_count(),
                cap.r,
                if report.ok { "clean" } else { "violations found" }
            );
            emit(&out, &to_json(&report))?;
            Ok(if report.ok { 0 } else { 1 })
        }
    }
}

/// Expansion input: a vertex cap, or a box cap that is scaled and lowered.
fn parse_any_cap(text: &str) -> Result<VertexCap, Failure> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Failure::new(3, format!("bad cap JSON: {e}")))?;
    if value.get("vertices").is_some() {
        VertexCap::from_json(text).map_err(|e| Failure::new(3, format!("bad vertex cap: {e}")))
    } else {
        let cap: BoxCap = serde_json::from_str(text)
            .map_err(|e| Failure::new(3, format!("bad box cap: {e}")))?;
        Ok(lower_to_vertex_cap(&scale_to_integers(&cap))?)
    }
}
