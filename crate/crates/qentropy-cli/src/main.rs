//! Command-line front end for the `qentropy` library.
//!
//! Exit codes form the scripting contract: 0 when every claim holds, 1 when
//! a claim fails, 2 for configuration or parse errors, 3 when an input file
//! violates a data invariant (reported with its deviation).

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qentropy::{
    accessible_info_lower_bound, counterexample_suite, holevo_information, nats_to_bits,
    quantum_entropy, run_batch, BatchResult, CheckVerdict, Complex64, ComplexMatrix, Ensemble,
    Error, InequalityId, LabeledState, Quantity, RumSystem, SubsystemLayout, CHECK_TOL,
};

/// Schema tag stamped into every JSON report.
const SCHEMA: &str = "qentropy-report/1";

#[derive(Parser)]
#[command(name = "qentropy", version, about = "Entropy inequality checks for classical and quantum states")]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Write the report to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded batches of the registered checks plus the counterexample suite.
    Check(CheckArgs),
    /// Evaluate entropic quantities of a serialized state file.
    Entropy(EntropyArgs),
    /// Compare sampled readout information against its ensemble ceiling.
    HolevoDemo(HolevoDemoArgs),
    /// Exhaustive root-of-unity toy-model table and suite.
    Rum(RumArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Comma-separated check ids, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    ids: Vec<String>,

    /// Seeded instances per id.
    #[arg(long, default_value_t = 100)]
    trials: usize,

    /// Per-subsystem dimensions for the generated instances.
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    dims: Vec<usize>,

    /// Base seed; trial k of each id derives its own stream from it.
    #[arg(long, env = "QENTROPY_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EntropyArgs {
    /// Path to a serialized state (layout + flattened complex matrix).
    #[arg(long)]
    state: PathBuf,

    /// Quantities such as `S`, `S(a)`, `S(a,b)`, `S(a|b)`, `S(a:b)`,
    /// `S(a:b|e)`; bare `S` means the full joint entropy.
    #[arg(long, value_delimiter = ',', default_value = "S")]
    quantities: Vec<String>,
}

#[derive(Args)]
struct HolevoDemoArgs {
    /// Path to a serialized ensemble (weights + component states).
    #[arg(long, conflicts_with = "preset")]
    ensemble: Option<PathBuf>,

    /// Built-in preparation: `orthogonal` or `zero-plus`.
    #[arg(long, value_enum, default_value_t = Preset::ZeroPlus)]
    preset: Preset,

    /// Number of sampled readout bases (sample 0 is the fixed computational one).
    #[arg(long, default_value_t = 24)]
    samples: usize,

    #[arg(long, env = "QENTROPY_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Equal mixture of the two computational basis states.
    Orthogonal,
    /// Equal mixture of the |0> pole and the +x axis state.
    ZeroPlus,
}

#[derive(Args)]
struct RumArgs {
    /// Number of parties (1 through 16).
    #[arg(long)]
    n: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    let outcome = match &cli.command {
        Command::Check(args) => cmd_check(args, format),
        Command::Entropy(args) => cmd_entropy(args, format),
        Command::HolevoDemo(args) => cmd_holevo_demo(args, format),
        Command::Rum(args) => cmd_rum(args, format),
    };
    let (text, all_pass) = match outcome {
        Ok(pair) => pair,
        Err(err) => {
            eprintln!("error: {err}");
            return if err.is_invariant_violation() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            };
        }
    };
    if let Some(path) = &cli.out {
        if let Err(err) = fs::write(path, text + "\n") {
            eprintln!("error: cannot write {}: {err}", path.display());
            return ExitCode::from(2);
        }
    } else {
        println!("{text}");
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn render<T: Serialize>(report: &T, table: String, format: Format) -> qentropy::Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(report)?,
        Format::Table => table,
    })
}

// ---------------------------------------------------------------- check --

#[derive(Serialize)]
struct CheckReport {
    schema: &'static str,
    seed: u64,
    trials: usize,
    dims: Vec<usize>,
    batches: Vec<BatchResult>,
    counterexamples: Vec<CheckVerdict>,
}

fn cmd_check(args: &CheckArgs, format: Format) -> qentropy::Result<(String, bool)> {
    if args.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if let Some(d) = args.dims.iter().find(|d| **d < 2) {
        return Err(Error::InvalidParameter(format!(
            "subsystem dimensions must be at least 2, got {d}"
        )));
    }
    let ids: Vec<InequalityId> = if args.ids.iter().any(|s| s == "all") {
        InequalityId::ALL.to_vec()
    } else {
        args.ids
            .iter()
            .map(|s| InequalityId::from_str(s))
            .collect::<qentropy::Result<_>>()?
    };

    let batches: Vec<BatchResult> = ids
        .iter()
        .map(|id| run_batch(*id, args.trials, &args.dims, args.seed))
        .collect::<qentropy::Result<_>>()?;
    let counterexamples = counterexample_suite();

    let all_pass = batches.iter().all(BatchResult::all_hold)
        && counterexamples.iter().all(|v| !v.holds());

    let mut table = format!(
        "{} checks x {} trials, dims {:?}, seed {}\n",
        batches.len(),
        args.trials,
        args.dims,
        args.seed
    );
    for b in &batches {
        let _ = writeln!(
            table,
            "  {:<22} {:>5}/{:<5} passed   min margin {:>10.2e}",
            b.id,
            b.pass_count,
            b.verdicts.len(),
            b.min_margin
        );
    }
    table.push_str("counterexamples (each must fail its naive identity):\n");
    for v in &counterexamples {
        let _ = writeln!(
            table,
            "  {:<36} lhs {:>10.2e}  rhs {:>10.2e}  failed as expected: {}",
            v.id(),
            v.lhs(),
            v.rhs(),
            if v.holds() { "NO" } else { "yes" }
        );
    }
    let _ = write!(table, "overall: {}", if all_pass { "pass" } else { "FAIL" });

    let report = CheckReport {
        schema: SCHEMA,
        seed: args.seed,
        trials: args.trials,
        dims: args.dims.clone(),
        batches,
        counterexamples,
    };
    Ok((render(&report, table, format)?, all_pass))
}

// -------------------------------------------------------------- entropy --

#[derive(Serialize)]
struct EntropyReport {
    schema: &'static str,
    state: String,
    values: Vec<QuantityValue>,
}

#[derive(Serialize)]
struct QuantityValue {
    query: String,
    nats: f64,
    bits: f64,
}

fn cmd_entropy(args: &EntropyArgs, format: Format) -> qentropy::Result<(String, bool)> {
    let text = fs::read_to_string(&args.state)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", args.state.display())))?;
    let state = LabeledState::from_json(&text)?;
    let labels = state.layout().labels();

    let mut values = Vec::new();
    let mut table = String::new();
    for query in &regroup_queries(&args.quantities) {
        let quantity = parse_quantity(query, &labels)?;
        let nats = quantum_entropy(&quantity, &state)?;
        let bits = nats_to_bits(nats);
        let _ = writeln!(table, "{query} = {nats:.4} nats = {bits:.4} bits");
        values.push(QuantityValue {
            query: query.clone(),
            nats,
            bits,
        });
    }
    table.pop();

    let report = EntropyReport {
        schema: SCHEMA,
        state: args.state.display().to_string(),
        values,
    };
    Ok((render(&report, table, format)?, true))
}

/// Re-joins comma-split pieces whose parentheses ended up unbalanced, so
/// `S(a),S(a,b)` parses as two queries rather than three fragments.
fn regroup_queries(parts: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut depth = 0i32;
    for part in parts {
        match out.last_mut() {
            Some(last) if depth > 0 => {
                last.push(',');
                last.push_str(part);
            }
            _ => out.push(part.clone()),
        }
        depth += part.matches('(').count() as i32 - part.matches(')').count() as i32;
    }
    out
}

/// Parses `S`, `S(a,b)`, `S(a|b)`, `S(a:b)` or `S(a:b|e)` against the
/// state's labels; bare `S` is the joint entropy of everything.
fn parse_quantity(query: &str, labels: &[&str]) -> qentropy::Result<Quantity> {
    let bad = || Error::InvalidParameter(format!("cannot parse quantity `{query}`"));
    let trimmed = query.trim();
    if trimmed == "S" {
        return Ok(Quantity::joint(labels));
    }
    let inner = trimmed
        .strip_prefix("S(")
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(bad)?;

    let split_group = |part: &str| -> qentropy::Result<Vec<String>> {
        let group: Vec<String> = part
            .split(',')
            .map(|l| l.trim().to_string())
            .filter(|l| !l.is_empty())
            .collect();
        if group.is_empty() {
            return Err(bad());
        }
        Ok(group)
    };
    fn refs(group: &[String]) -> Vec<&str> {
        group.iter().map(String::as_str).collect()
    }

    let (head, given) = match inner.split_once('|') {
        Some((h, g)) => (h, Some(split_group(g)?)),
        None => (inner, None),
    };
    let pair = match head.split_once(':') {
        Some((x, y)) => Some((split_group(x)?, split_group(y)?)),
        None => None,
    };

    Ok(match (pair, given) {
        (None, None) => Quantity::joint(&refs(&split_group(head)?)),
        (None, Some(g)) => Quantity::conditional(&refs(&split_group(head)?), &refs(&g)),
        (Some((x, y)), None) => Quantity::mutual(&refs(&x), &refs(&y)),
        (Some((x, y)), Some(g)) => Quantity::cond_mutual(&refs(&x), &refs(&y), &refs(&g)),
    })
}

// ---------------------------------------------------------- holevo-demo --

#[derive(Serialize)]
struct HolevoReport {
    schema: &'static str,
    source: String,
    samples: usize,
    seed: u64,
    hol: f64,
    accessible_lower_bound: f64,
    gap: f64,
    best_sample_index: usize,
    per_sample: Vec<f64>,
    holds: bool,
}

fn cmd_holevo_demo(args: &HolevoDemoArgs, format: Format) -> qentropy::Result<(String, bool)> {
    let (ensemble, source) = match &args.ensemble {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::InvalidParameter(format!("cannot read {}: {e}", path.display()))
            })?;
            (Ensemble::from_json(&text)?, path.display().to_string())
        }
        None => match args.preset {
            Preset::Orthogonal => (
                preset_ensemble(&[(1.0, 0.0), (0.0, 1.0)])?,
                "preset:orthogonal".into(),
            ),
            Preset::ZeroPlus => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                (
                    preset_ensemble(&[(1.0, 0.0), (r, r)])?,
                    "preset:zero-plus".into(),
                )
            }
        },
    };

    let hol = holevo_information(&ensemble)?;
    let acc = accessible_info_lower_bound(&ensemble, args.samples, args.seed)?;
    let gap = hol - acc.best;
    let holds = acc.best <= hol + CHECK_TOL;

    let mut table = format!("source: {source}\n");
    let _ = writeln!(table, "Hol            = {hol:.4} nats");
    let _ = writeln!(
        table,
        "Acc lower bound = {:.4} nats  (best of {} samples, index {})",
        acc.best, args.samples, acc.best_index
    );
    let _ = writeln!(table, "gap            = {gap:.2e} nats");
    let _ = write!(table, "bound holds: {}", if holds { "yes" } else { "NO" });

    let report = HolevoReport {
        schema: SCHEMA,
        source,
        samples: args.samples,
        seed: args.seed,
        hol,
        accessible_lower_bound: acc.best,
        gap,
        best_sample_index: acc.best_index,
        per_sample: acc.per_sample,
        holds,
    };
    Ok((render(&report, table, format)?, holds))
}

/// Equal-weight ensemble of pure qubit states given by their amplitudes.
fn preset_ensemble(kets: &[(f64, f64)]) -> qentropy::Result<Ensemble> {
    let layout = SubsystemLayout::single("q", 2)?;
    let weight = 1.0 / kets.len() as f64;
    let states = kets
        .iter()
        .map(|(a0, a1)| {
            let ket = [Complex64::new(*a0, 0.0), Complex64::new(*a1, 0.0)];
            LabeledState::new(layout.clone(), ComplexMatrix::outer(&ket))
        })
        .collect::<qentropy::Result<Vec<_>>>()?;
    Ensemble::new(vec![weight; kets.len()], states, "x")
}

// ------------------------------------------------------------------ rum --

#[derive(Serialize)]
struct RumReport {
    schema: &'static str,
    n: usize,
    subsets: Vec<SubsetRow>,
    verdicts: Vec<CheckVerdict>,
}

#[derive(Serialize)]
struct SubsetRow {
    subset: Vec<usize>,
    value: f64,
}

fn cmd_rum(args: &RumArgs, format: Format) -> qentropy::Result<(String, bool)> {
    let system = RumSystem::new(args.n)?;
    let values = system.subset_values()?;
    let verdicts = system.check_suite()?;
    let all_pass = verdicts.iter().all(CheckVerdict::holds);

    let subsets: Vec<SubsetRow> = (1..values.len())
        .map(|mask| SubsetRow {
            subset: (0..args.n).filter(|j| mask & (1 << j) != 0).map(|j| j + 1).collect(),
            value: values[mask],
        })
        .collect();

    let mut table = format!("{} parties, {} nonempty subsets\n", args.n, subsets.len());
    for row in &subsets {
        let parties: Vec<String> = row.subset.iter().map(usize::to_string).collect();
        let _ = writeln!(table, "  S({{{}}}) = {:.12}", parties.join(","), row.value);
    }
    for v in &verdicts {
        let _ = writeln!(
            table,
            "  {:<26} {}   margin {:>10.2e}",
            v.id(),
            if v.holds() { "pass" } else { "FAIL" },
            v.margin()
        );
    }
    let _ = write!(table, "overall: {}", if all_pass { "pass" } else { "FAIL" });

    let report = RumReport {
        schema: SCHEMA,
        n: args.n,
        subsets,
        verdicts,
    };
    Ok((render(&report, table, format)?, all_pass))
}
