//! `tempoly` command-line front end.
//!
//! Exit codes: 0 when the checked claim holds, 1 when it is falsified,
//! 2 for usage or configuration errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tempoly::constraints::{build_aot, build_normalization, build_ns, build_nsit, count_aot_closed_form, count_redundant_normalizations};
use tempoly::geometry::{dimension_report, enumerate_vertices, vertices_to_csv, Model, DEFAULT_VERTEX_LIMIT};
use tempoly::inequalities::{scan_lgi_vs_nsit, ScanConfig};
use tempoly::linalg::{rank, rowspace_equal, RationalMatrix};
use tempoly::quantum::{
    build_kraus, conditionals_from_joint, projective_counterexample_check, random_aot_point, simulate_all, InitialState, ProjectiveSearchConfig,
};
use tempoly::rational::format_float;
use tempoly::scenario::DEFAULT_COORDINATE_LIMIT;
use tempoly::{Error, Scenario};

#[derive(Parser)]
#[command(name = "tempoly", version, about = "Temporal correlation polytopes: dimensions, constraint systems, quantum realizations")]
struct Cli {
    /// Maximum number of probability coordinates a scenario may have
    #[arg(long, global = true, env = "TEMPOLY_LIMIT", default_value_t = DEFAULT_COORDINATE_LIMIT,
          value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    limit: usize,

    /// Print a JSON report instead of text
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct ScenarioArgs {
    /// Number of time steps
    #[arg(long)]
    n: usize,
    /// Settings per time step
    #[arg(long)]
    m: usize,
    /// Outcomes per setting
    #[arg(long)]
    delta: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Affine dimensions of P, NS, AoT and MR against their closed forms
    Dims(ScenarioArgs),
    /// Row counts and ranks of the AoT and NSIT systems
    Conditions(ScenarioArgs),
    /// Check that normalization + AoT + NSIT spans the same rows as normalization + NS
    EquivNs(ScenarioArgs),
    /// Reproduce random AoT points with the sequential Kraus construction
    KrausVerify {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum allowed absolute error per coordinate
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// LGI versus NSIT scan for a precessing qubit measured at three times
    Scan {
        #[arg(long, default_value_t = 0.0)]
        omega_min: f64,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        omega_max: f64,
        /// Grid points, endpoints included
        #[arg(long, default_value_t = 181)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = StateArg::Both)]
        state: StateArg,
        /// CSV destination; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deterministic vertices of the LR or MR polytope as CSV
    Vertices {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = ModelArg::Mr)]
        model: ModelArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search projective models for the AoT point that needs generalized measurements
    Counterexample {
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long, default_value_t = 4)]
        max_dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StateArg {
    Eigenstate,
    Mixed,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Lr,
    Mr,
}

enum Failure {
    Falsified(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Construction(_) | Error::Inconsistent { .. } | Error::NoInteriorPoint(_) | Error::AotViolation { .. } | Error::NotNormalized { .. } => {
                Failure::Falsified(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Falsified(msg)) => {
            eprintln!("claim falsified: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let scenario = |a: &ScenarioArgs| Scenario::with_limit(a.n, a.m, a.delta, cli.limit).map_err(Failure::from);
    match &cli.command {
        Command::Dims(a) => dims(scenario(a)?, cli.json),
        Command::Conditions(a) => conditions(scenario(a)?, cli.json),
        Command::EquivNs(a) => equiv_ns(scenario(a)?, cli.json),
        Command::KrausVerify { scenario: a, trials, seed, tol } => kraus_verify(scenario(a)?, *trials, *seed, *tol, cli.json),
        Command::Scan { omega_min, omega_max, steps, state, out } => {
            let states = match state {
                StateArg::Eigenstate => vec![InitialState::Eigenstate],
                StateArg::Mixed => vec![InitialState::MaximallyMixed],
                StateArg::Both => vec![InitialState::Eigenstate, InitialState::MaximallyMixed],
            };
            let cfg = ScanConfig { omega_tau_min: *omega_min, omega_tau_max: *omega_max, steps: *steps, states, ..ScanConfig::default() };
            scan(&cfg, out.as_deref(), cli.json)
        }
        Command::Vertices { scenario: a, model, out } => {
            let model = match model {
                ModelArg::Lr => Model::LocalRealism,
                ModelArg::Mr => Model::Macrorealism,
            };
            vertices(scenario(a)?, model, out.as_deref())
        }
        Command::Counterexample { budget, max_dim, seed } => counterexample(*budget, *max_dim, *seed, cli.json),
    }
}

/// Float rounded to the fixed print precision, as a JSON number.
fn num(x: f64) -> Value {
    format_float(x).parse::<f64>().map(Value::from).unwrap_or(Value::Null)
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn dims(s: Scenario, json: bool) -> Outcome {
    let r = dimension_report(s)?;
    if json {
        print_json(&r.to_json());
    } else {
        println!("scenario {s}");
        println!("{:<4} {:>10} {:>12}", "", "computed", "closed form");
        for (name, c, f) in [
            ("P", r.computed.p, r.closed_form.p),
            ("NS", r.computed.ns, r.closed_form.ns),
            ("AoT", r.computed.aot, r.closed_form.aot),
            ("MR", r.computed.mr, r.closed_form.mr),
        ] {
            println!("{name:<4} {c:>10} {f:>12}{}", if c == f { "" } else { "  MISMATCH" });
        }
        for c in &r.caveats {
            println!("note: {c}");
        }
    }
    if r.all_match() {
        Ok(())
    } else {
        Err(Failure::Falsified(format!("{s}: computed dimensions differ from closed forms")))
    }
}

fn system_rank(systems: &[&tempoly::constraints::ConstraintSystem], s: Scenario) -> Result<usize, Failure> {
    Ok(rank(&RationalMatrix::from_systems(systems, s.coordinate_count(), false)?))
}

fn conditions(s: Scenario, json: bool) -> Outcome {
    let (norm, aot, nsit) = (build_normalization(s), build_aot(s), build_nsit(s));
    let aot_rank = system_rank(&[&aot], s)?;
    let nsit_rank = system_rank(&[&nsit], s)?;
    let joint_rank = system_rank(&[&norm, &aot], s)?;
    let closed = count_aot_closed_form(s);
    let redundant = count_redundant_normalizations(s);
    let aot_ok = aot_rank == aot.len() && aot.len() == closed;
    let norm_ok = joint_rank + redundant == norm.len() + aot.len();
    if json {
        print_json(&json!({
            "schema": 1,
            "scenario": s,
            "aot": {"rows": aot.len(), "closed_form": closed, "rank": aot_rank, "independent": aot_rank == aot.len()},
            "nsit": {"rows": nsit.len(), "rank": nsit_rank, "independent": nsit_rank == nsit.len()},
            "normalization": {"rows": norm.len(), "rank_with_aot": joint_rank, "redundant": redundant},
        }));
    } else {
        println!("scenario {s}");
        println!("AoT   rows {:>6}  closed form {:>6}  rank {:>6}  independent {}", aot.len(), closed, aot_rank, aot_rank == aot.len());
        println!("NSIT  rows {:>6}  rank {:>6}  independent {}", nsit.len(), nsit_rank, nsit_rank == nsit.len());
        println!("norm  rows {:>6}  rank with AoT {:>6}  redundant {}", norm.len(), joint_rank, redundant);
    }
    match (aot_ok, norm_ok) {
        (true, true) => Ok(()),
        (false, _) => Err(Failure::Falsified(format!("{s}: AoT rows {} rank {aot_rank} closed form {closed}", aot.len()))),
        (_, false) => Err(Failure::Falsified(format!("{s}: {redundant} redundant normalizations expected, rank {joint_rank}"))),
    }
}

fn equiv_ns(s: Scenario, json: bool) -> Outcome {
    let cols = s.coordinate_count();
    let (norm, aot, nsit, ns) = (build_normalization(s), build_aot(s), build_nsit(s), build_ns(s));
    let a = RationalMatrix::from_systems(&[&norm, &aot, &nsit], cols, true)?;
    let b = RationalMatrix::from_systems(&[&norm, &ns], cols, true)?;
    let equal = rowspace_equal(&a, &b)?;
    if json {
        print_json(&json!({"schema": 1, "scenario": s, "equal": equal, "rank": rank(&a)}));
    } else {
        println!("scenario {s}: rowspace(norm, AoT, NSIT) {} rowspace(norm, NS)", if equal { "==" } else { "!=" });
    }
    if equal {
        Ok(())
    } else {
        Err(Failure::Falsified(format!("{s}: rowspaces differ")))
    }
}

fn kraus_verify(s: Scenario, trials: u64, seed: u64, tol: f64, json: bool) -> Outcome {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::Usage(format!("--tol must be positive and finite, got {tol}")));
    }
    if trials == 0 {
        return Err(Failure::Usage("--trials must be positive".into()));
    }
    let mut max_error = 0.0f64;
    let mut max_completeness = 0.0f64;
    let mut failure = None;
    for t in 0..trials {
        let trial_seed = seed.wrapping_add(t);
        let target = random_aot_point(s, trial_seed).to_f64();
        let kraus = build_kraus(&conditionals_from_joint(&target)?);
        let sim = simulate_all(&kraus)?;
        let errors: Vec<f64> = sim.values().iter().zip(target.values()).map(|(a, b)| (a - b).abs()).collect();
        let err = errors.iter().copied().fold(0.0, f64::max);
        max_error = max_error.max(err);
        max_completeness = max_completeness.max(kraus.completeness_residual());
        if err >= tol && failure.is_none() {
            let bad: Vec<String> = errors
                .iter()
                .enumerate()
                .filter(|(_, e)| **e >= tol)
                .map(|(i, e)| format!("{} (error {})", s.coordinate_label(i), format_float(*e)))
                .collect();
            failure = Some((trial_seed, bad));
        }
    }
    if json {
        print_json(&json!({
            "schema": 1,
            "scenario": s,
            "trials": trials,
            "seed": seed,
            "tol": num(tol),
            "max_error": num(max_error),
            "max_completeness_residual": num(max_completeness),
            "pass": failure.is_none(),
            "failing_seed": failure.as_ref().map(|f| f.0),
        }));
    } else {
        println!("scenario {s}: {trials} trials from seed {seed}");
        println!("max error {}  max completeness residual {}  tol {}", format_float(max_error), format_float(max_completeness), format_float(tol));
    }
    match failure {
        None => Ok(()),
        Some((trial_seed, bad)) => Err(Failure::Falsified(format!("seed {trial_seed}: {}", bad.join(", ")))),
    }
}

fn scan(cfg: &ScanConfig, out: Option<&Path>, json: bool) -> Outcome {
    let table = scan_lgi_vs_nsit(cfg)?;
    let mut w = open_out(out)?;
    table.write_csv(&mut w)?;
    w.flush().map_err(|e| Failure::Usage(format!("{}: {e}", out.map_or("stdout".into(), |p| p.display().to_string()))))?;
    drop(w);
    let per_state: Vec<(InitialState, f64)> = cfg.states.iter().map(|&st| (st, table.separation_measure(st))).collect();
    let separating = table.separating().count();
    let blind = table.pairwise_blind().count();
    let summary = if json {
        let measures: serde_json::Map<String, Value> = per_state.iter().map(|(st, m)| (st.name().to_string(), num(*m))).collect();
        serde_json::to_string_pretty(&json!({
            "schema": 1,
            "points": table.rows.len(),
            "separating_points": separating,
            "separation_measure": measures,
            "pairwise_blind_points": blind,
            "max_k12_23_13": num(table.max_k()),
        }))
        .expect("serializable")
    } else {
        let measures: Vec<String> = per_state.iter().map(|(st, m)| format!("{} {}", st.name(), format_float(*m))).collect();
        format!(
            "{} points; LGIs hold while NSIT fails at {separating} points (measure: {}); pairwise-blind points {blind}; max K {}",
            table.rows.len(),
            measures.join(", "),
            format_float(table.max_k())
        )
    };
    // keep stdout clean for CSV when no output file is given
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn vertices(s: Scenario, model: Model, out: Option<&Path>) -> Outcome {
    let v = enumerate_vertices(s, model, DEFAULT_VERTEX_LIMIT)?;
    let mut w = open_out(out)?;
    vertices_to_csv(&v, &mut w)?;
    w.flush().map_err(|e| Failure::Usage(e.to_string()))?;
    eprintln!("{} vertices for {s}", v.len());
    Ok(())
}

fn counterexample(budget: usize, max_dim: usize, seed: u64, json: bool) -> Outcome {
    if budget == 0 || max_dim < 2 {
        return Err(Failure::Usage("--budget must be positive and --max-dim at least 2".into()));
    }
    let r = projective_counterexample_check(ProjectiveSearchConfig { budget, max_dim, seed })?;
    let pass = r.target_satisfies_aot && r.target_violates_nsit && r.povm_round_trip_error < 1e-10 && r.best_distance > 0.05;
    if json {
        print_json(&json!({
            "schema": 1,
            "target": r.target.to_json(),
            "target_satisfies_aot": r.target_satisfies_aot,
            "target_violates_nsit": r.target_violates_nsit,
            "povm_round_trip_error": num(r.povm_round_trip_error),
            "best_projective_distance": num(r.best_distance),
            "best_model": {"dim": r.best_model.0, "rank_first": r.best_model.1, "rank_second": r.best_model.2},
            "evaluations": r.evaluations,
            "note": r.note,
        }));
    } else {
        println!("target satisfies AoT: {}  violates NSIT: {}", r.target_satisfies_aot, r.target_violates_nsit);
        println!("generalized-measurement round trip error {}", format_float(r.povm_round_trip_error));
        println!(
            "best projective distance {} at dim {} ranks ({}, {}) after {} evaluations",
            format_float(r.best_distance),
            r.best_model.0,
            r.best_model.1,
            r.best_model.2,
            r.evaluations
        );
        println!("note: {}", r.note);
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Falsified("a projective model came within 0.05 of the target".into()))
    }
}
