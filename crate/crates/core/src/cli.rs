//! Command-line front end.
//!
//! Column indices on the command line and in reports are 1-based. Exit
//! status: 0 success or pass, 1 construction FAIL or violation found,
//! 2 input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::alter::ConstructionOutcome;
use crate::combin::Combinations;
use crate::derand::{derandomized_construct, DerandOptions, PairTable};
use crate::error::{Error, Result};
use crate::format::{parse_incmat, write_incmat, IncMat, Metadata};
use crate::matrix::rate;
use crate::montecarlo::{monte_carlo_construct, RandomSource};
use crate::plan::{
    make_explicit_plan, plan_parameters, rate_lower_bound, rate_lower_bound_for, ConstructionPlan,
    DesignSpec, ExplicitParams, DEFAULT_DELTA, DEFAULT_EPS, DEFAULT_SIGMA,
};
use crate::sim::{compare_with_truth, decode_all, generate_outcomes, Masking, Scenario};
use crate::verify::{find_violated_sets_par, verify_disjunct, verify_inclusive, ViolationWitness};

/// Column sets, one per complex.
pub type Complexes = Vec<Vec<usize>>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "incdisjunct",
    version,
    about = "Inclusive disjunct pooling designs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,

    /// Worker threads for verification and decoding.
    #[arg(long, global = true, env = "INCDISJUNCT_THREADS", default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Theorem,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Mc,
    Derand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaskingArg {
    All,
    Subset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchOp {
    Derand,
    Mc,
    Verify,
}

/// Design and plan parameters shared by several subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub x: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// High-probability exponent: failure below 1 / t^s.
    #[arg(long = "hp-s")]
    pub hp_s: Option<f64>,
    /// Defaults to explicit when any of --n --m --z --y --p is given.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub z: Option<usize>,
    #[arg(long)]
    pub y: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the construction plan.
    Plan {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Build a matrix and write it as `incmat v1`.
    Construct {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Algo::Derand)]
        algo: Algo,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; the matrix goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compare the estimator with brute force over the last 20 entries.
        #[arg(long)]
        check_exact: bool,
        /// Run the deterministic construction even when the initial
        /// estimator is not below the budget.
        #[arg(long)]
        allow_over_budget: bool,
    },
    /// Check a matrix against its header or overriding parameters.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        h: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        z: Option<usize>,
        #[arg(long)]
        y: Option<usize>,
    },
    /// Plant defectives and inhibitors, generate outcomes, decode.
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        /// A defective complex as space- or comma-separated columns.
        #[arg(long = "defective")]
        defectives: Vec<String>,
        #[arg(long = "inhibitor")]
        inhibitors: Vec<String>,
        /// Manifest with `defective: ...` and `inhibitor: ...` lines.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Number of erroneous outcomes.
        #[arg(long, default_value_t = 0)]
        errors: usize,
        #[arg(long, value_enum, default_value_t = MaskingArg::All)]
        masking: MaskingArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print log2(n) / t and, with theorem parameters, the rate lower bound.
    Rate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long = "hp-s")]
        hp_s: Option<f64>,
    },
    /// Time construction or verification over a sweep of column counts and
    /// write CSV.
    Bench {
        #[arg(long)]
        t: usize,
        /// Comma-separated column counts.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<u64>,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        h: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long)]
        z: usize,
        #[arg(long)]
        y: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = BenchOp::Derand)]
        op: BenchOp,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Line-oriented report writer: `event k=v ...` or one JSON object per
/// line.
pub struct Emitter<'a> {
    format: OutputFormat,
    out: &'a mut dyn Write,
}

impl<'a> Emitter<'a> {
    pub fn new(format: OutputFormat, out: &'a mut dyn Write) -> Self {
        Emitter { format, out }
    }

    pub fn emit(&mut self, event: &str, fields: &[(&str, Value)]) -> Result<()> {
        match self.format {
            OutputFormat::Text => {
                let mut line = event.to_string();
                for (k, v) in fields {
                    line.push(' ');
                    line.push_str(k);
                    line.push('=');
                    match v {
                        Value::String(s) => line.push_str(s),
                        other => line.push_str(&other.to_string()),
                    }
                }
                writeln!(self.out, "{line}")?;
            }
            OutputFormat::Jsonl => {
                let mut obj = Map::new();
                obj.insert("event".into(), Value::from(event));
                for (k, v) in fields {
                    obj.insert((*k).into(), v.clone());
                }
                writeln!(self.out, "{}", Value::Object(obj))?;
            }
        }
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let code = match e {
                Error::InitialEstimator { .. }
                | Error::EmptyAfterDeletion
                | Error::Consistency(_) => EXIT_FAIL,
                _ => EXIT_INPUT,
            };
            let label = if code == EXIT_FAIL { "FAIL" } else { "error" };
            let _ = writeln!(err, "{label}: {e}");
            code
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let threads = cli.threads.max(1);
    let mut em = Emitter::new(cli.format, out);
    match &cli.command {
        Command::Plan { params } => cmd_plan(params, &mut em),
        Command::Construct {
            params,
            algo,
            seed,
            out,
            check_exact,
            allow_over_budget,
        } => {
            let opts = DerandOptions {
                allow_over_budget: *allow_over_budget,
                check_direct: false,
                check_exact: *check_exact,
                record_trace: false,
                threads,
            };
            cmd_construct(params, *algo, *seed, out.as_deref(), opts, &mut em)
        }
        Command::Verify {
            input,
            d,
            h,
            r,
            z,
            y,
        } => cmd_verify(input, [*d, *h, *r, *z, *y], threads, &mut em),
        Command::Simulate {
            input,
            defectives,
            inhibitors,
            scenario,
            errors,
            masking,
            seed,
        } => cmd_simulate(
            input,
            defectives,
            inhibitors,
            scenario.as_deref(),
            *errors,
            *masking,
            *seed,
            threads,
            &mut em,
        ),
        Command::Rate {
            input,
            mode,
            eps,
            delta,
            sigma,
            hp_s,
        } => cmd_rate(input, *mode, [*eps, *delta, *sigma], *hp_s, &mut em),
        Command::Bench {
            t,
            sizes,
            d,
            h,
            r,
            z,
            y,
            p,
            op,
            reps,
            seed,
            out,
        } => {
            let cfg = BenchConfig {
                t: *t,
                d: *d,
                h: *h,
                r: *r,
                z: *z,
                y: *y,
                p: *p,
                op: *op,
                reps: *reps,
                seed: *seed,
                threads,
            };
            let csv = bench_csv(&cfg, sizes)?;
            match out {
                Some(path) => fs::write(path, csv)?,
                None => write!(em.out, "{csv}")?,
            }
            Ok(EXIT_OK)
        }
    }
}

/// Builds a plan from flags, rejecting flags that belong to the other mode.
pub fn build_plan(a: &ParamArgs) -> Result<ConstructionPlan> {
    let explicit_only = [
        ("--n", a.n.is_some()),
        ("--m", a.m.is_some()),
        ("--z", a.z.is_some()),
        ("--y", a.y.is_some()),
        ("--p", a.p.is_some()),
    ];
    let theorem_only = [
        ("--eps", a.eps.is_some()),
        ("--delta", a.delta.is_some()),
        ("--sigma", a.sigma.is_some()),
        ("--hp-s", a.hp_s.is_some()),
    ];
    let mode = a.mode.unwrap_or(if explicit_only.iter().any(|f| f.1) {
        ModeArg::Explicit
    } else {
        ModeArg::Theorem
    });
    let t = a.t.ok_or_else(|| Error::input("--t is required"))?;
    let (d, h, r) = (a.d.unwrap_or(1), a.h.unwrap_or(1), a.r.unwrap_or(1));
    let conflicting = |flags: &[(&str, bool)], name: &str| -> Result<()> {
        match flags.iter().find(|f| f.1) {
            Some((flag, _)) => Err(Error::input(format!("{flag} conflicts with --mode {name}"))),
            None => Ok(()),
        }
    };
    match mode {
        ModeArg::Theorem => {
            conflicting(&explicit_only, "theorem")?;
            plan_parameters(&DesignSpec {
                d,
                h,
                r,
                t,
                x: a.x.unwrap_or(1),
                eps: a.eps.unwrap_or(DEFAULT_EPS),
                delta: a.delta.unwrap_or(DEFAULT_DELTA),
                sigma: a.sigma.unwrap_or(DEFAULT_SIGMA),
                s: a.hp_s,
            })
        }
        ModeArg::Explicit => {
            conflicting(&theorem_only, "explicit")?;
            let need = |name: &str| Error::input(format!("explicit mode needs {name}"));
            let z = a.z.ok_or_else(|| need("--z"))?;
            let y = a.y.ok_or_else(|| need("--y"))?;
            make_explicit_plan(&ExplicitParams {
                d,
                h,
                r,
                t,
                m: a.m.ok_or_else(|| need("--m"))?,
                n: a.n.ok_or_else(|| need("--n"))?,
                z,
                y,
                x: a.x.unwrap_or(z.saturating_sub(y)),
                p: a.p.ok_or_else(|| need("--p"))?,
            })
        }
    }
}

fn plan_fields(plan: &ConstructionPlan) -> Vec<(&'static str, Value)> {
    plan.to_kv()
        .into_iter()
        .map(|(k, v)| {
            let value = match k {
                "mode" => Value::from(v),
                _ => serde_json::from_str::<Value>(&v).unwrap_or(Value::from(v)),
            };
            (k, value)
        })
        .collect()
}

fn cmd_plan(params: &ParamArgs, em: &mut Emitter) -> Result<i32> {
    let plan = build_plan(params)?;
    let mut fields = plan_fields(&plan);
    if let Ok(bound) = rate_lower_bound(&plan) {
        fields.push(("rate_lower_bound", Value::from(bound)));
    }
    em.emit("plan", &fields)?;
    Ok(EXIT_OK)
}

fn one_based(cols: &[usize]) -> String {
    let list: Vec<String> = cols.iter().map(|c| (c + 1).to_string()).collect();
    format!("{{{}}}", list.join(","))
}

fn witness_fields(w: &ViolationWitness) -> Vec<(&'static str, Value)> {
    vec![
        ("kind", Value::from(w.kind.to_string())),
        ("B", Value::from(one_based(&w.b))),
        ("A", Value::from(one_based(&w.a))),
        ("value", Value::from(w.value)),
    ]
}

fn cmd_construct(
    params: &ParamArgs,
    algo: Algo,
    seed: u64,
    out_path: Option<&Path>,
    opts: DerandOptions,
    em: &mut Emitter,
) -> Result<i32> {
    let plan = build_plan(params)?;
    let mut fields: Vec<(&str, Value)> =
        vec![("algo", Value::from(format!("{algo:?}").to_lowercase()))];
    let outcome = match algo {
        Algo::Mc => {
            fields.push(("seed", Value::from(seed)));
            monte_carlo_construct(&plan, &mut RandomSource::new(seed), opts.threads)?
        }
        Algo::Derand => {
            let run = derandomized_construct(&plan, &opts)?;
            fields.push(("pairs", Value::from(run.pairs)));
            fields.push(("initial_estimate", Value::from(run.initial_estimate)));
            fields.push(("final_estimate", Value::from(run.final_estimate)));
            if opts.check_exact {
                fields.push(("exact_checks", Value::from(run.exact_checks)));
            }
            run.outcome
        }
    };
    match outcome {
        ConstructionOutcome::Success(c) => {
            let text = write_incmat(&c.matrix, Some(&plan.metadata()));
            fields.extend([
                ("status", Value::from("success")),
                ("violated", Value::from(c.violated.len())),
                ("deleted", Value::from(c.deleted.len())),
                ("t", Value::from(c.matrix.rows())),
                ("n", Value::from(c.matrix.cols())),
                ("rate", Value::from(rate(&c.matrix))),
            ]);
            match out_path {
                Some(path) => {
                    fs::write(path, text)?;
                    em.emit("construct", &fields)?;
                }
                None => write!(em.out, "{text}")?,
            }
            Ok(EXIT_OK)
        }
        ConstructionOutcome::Fail(f) => {
            fields.extend([
                ("status", Value::from("FAIL")),
                ("violated", Value::from(f.violated)),
                ("budget", Value::from(f.budget)),
            ]);
            em.emit("construct", &fields)?;
            for w in &f.witnesses {
                em.emit("witness", &witness_fields(w))?;
            }
            Ok(EXIT_FAIL)
        }
    }
}

fn read_incmat(path: &Path) -> Result<IncMat> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    parse_incmat(&text)
}

fn cmd_verify(
    input: &Path,
    overrides: [Option<usize>; 5],
    threads: usize,
    em: &mut Emitter,
) -> Result<i32> {
    let file = read_incmat(input)?;
    let [d, h, r, z, y] = overrides;
    let meta = file.meta;
    let pick = |o: Option<usize>, hdr: Option<usize>, name: &str| {
        o.or(hdr)
            .ok_or_else(|| Error::input(format!("no header value or --{name} for {name}")))
    };
    let d = pick(d, meta.map(|m| m.d), "d")?;
    let h = pick(h, meta.map(|m| m.h), "h")?;
    let r = pick(r, meta.map(|m| m.r), "r")?;
    let z = pick(z, meta.map(|m| m.z), "z")?;
    let y = pick(y, meta.map(|m| m.y), "y")?;
    let big_d = d.max(h);
    let m = &file.matrix;
    let base = [
        ("D", Value::from(big_d)),
        ("r", Value::from(r)),
        ("z", Value::from(z)),
        ("y", Value::from(y)),
    ];
    let first = if threads > 1 {
        find_violated_sets_par(m, big_d, r, z, y, threads)?
            .into_iter()
            .next()
    } else {
        match verify_disjunct(m, big_d, r, z)? {
            crate::verify::Verdict::Violated(w) => Some(w),
            crate::verify::Verdict::Pass => verify_inclusive(m, big_d, r, y)?.witness().cloned(),
        }
    };
    match first {
        None => {
            let mut fields = vec![("status", Value::from("pass"))];
            fields.extend(base.iter().cloned());
            em.emit("verify", &fields)?;
            Ok(EXIT_OK)
        }
        Some(w) => {
            let mut fields = vec![("status", Value::from("violation"))];
            fields.extend(base.iter().cloned());
            fields.extend(witness_fields(&w));
            em.emit("verify", &fields)?;
            Ok(EXIT_FAIL)
        }
    }
}

/// Parses `1 2 3` or `1,2,3` (1-based) into sorted 0-based columns.
pub fn parse_complex(s: &str) -> Result<Vec<usize>> {
    let mut cols = Vec::new();
    for tok in s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
    {
        let v: usize = tok
            .parse()
            .map_err(|_| Error::input(format!("bad column index {tok:?}")))?;
        if v == 0 {
            return Err(Error::input("column indices are 1-based"));
        }
        cols.push(v - 1);
    }
    if cols.is_empty() {
        return Err(Error::input("empty complex"));
    }
    cols.sort_unstable();
    Ok(cols)
}

/// Scenario manifest: `defective: <cols>` and `inhibitor: <cols>` lines;
/// blank lines and `#` comments are ignored.
pub fn parse_manifest(text: &str) -> Result<(Complexes, Complexes)> {
    let mut defs = Vec::new();
    let mut inhs = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (kind, rest) = line.split_once(':').ok_or_else(|| Error::Format {
            line: k + 1,
            msg: "expected `defective: ...` or `inhibitor: ...`".into(),
        })?;
        let cols = parse_complex(rest).map_err(|e| Error::Format {
            line: k + 1,
            msg: e.to_string(),
        })?;
        match kind.trim() {
            "defective" => defs.push(cols),
            "inhibitor" => inhs.push(cols),
            other => {
                return Err(Error::Format {
                    line: k + 1,
                    msg: format!("unknown complex kind {other:?}"),
                })
            }
        }
    }
    Ok((defs, inhs))
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    input: &Path,
    defectives: &[String],
    inhibitors: &[String],
    manifest: Option<&Path>,
    errors: usize,
    masking: MaskingArg,
    seed: u64,
    threads: usize,
    em: &mut Emitter,
) -> Result<i32> {
    let file = read_incmat(input)?;
    let meta: Metadata = file
        .meta
        .ok_or_else(|| Error::input("simulate needs a file with full metadata"))?;
    let mut defs = defectives
        .iter()
        .map(|s| parse_complex(s))
        .collect::<Result<Vec<_>>>()?;
    let mut inhs = inhibitors
        .iter()
        .map(|s| parse_complex(s))
        .collect::<Result<Vec<_>>>()?;
    if let Some(path) = manifest {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
        let (d2, i2) = parse_manifest(&text)?;
        defs.extend(d2);
        inhs.extend(i2);
    }
    let sc = Scenario::new(file.matrix, meta, &defs, &inhs, errors, seed)?;
    let masking = match masking {
        MaskingArg::All => Masking::All,
        MaskingArg::Subset => Masking::Subset,
    };
    let outcomes = generate_outcomes(&sc, masking);
    let declared = decode_all(&sc.matrix, &meta, &outcomes.outcomes, threads)?;
    for b in Combinations::new(sc.matrix.cols(), meta.r) {
        let verdict = declared.binary_search(&b).is_ok();
        let truth = sc.defectives.binary_search(&b).is_ok();
        let label = |v: bool| if v { "defective" } else { "not-defective" };
        em.emit(
            "candidate",
            &[
                ("B", Value::from(one_based(&b))),
                ("verdict", Value::from(label(verdict))),
                ("truth", Value::from(label(truth))),
            ],
        )?;
    }
    let summary = compare_with_truth(&declared, &sc.defectives);
    em.emit(
        "summary",
        &[
            ("recovered", Value::from(summary.recovered)),
            ("false_pos", Value::from(summary.false_pos)),
            ("false_neg", Value::from(summary.false_neg)),
        ],
    )?;
    Ok(if summary.recovered {
        EXIT_OK
    } else {
        EXIT_FAIL
    })
}

fn cmd_rate(
    input: &Path,
    mode: Option<ModeArg>,
    constants: [Option<f64>; 3],
    hp_s: Option<f64>,
    em: &mut Emitter,
) -> Result<i32> {
    let file = read_incmat(input)?;
    let m = &file.matrix;
    let mut fields = vec![
        ("t", Value::from(m.rows())),
        ("n", Value::from(m.cols())),
        ("rate", Value::from(rate(m))),
    ];
    let theorem = match mode {
        Some(ModeArg::Theorem) => true,
        Some(ModeArg::Explicit) => false,
        None => constants.iter().any(Option::is_some) || hp_s.is_some(),
    };
    if theorem {
        let meta = file
            .meta
            .ok_or_else(|| Error::input("the rate lower bound needs header metadata"))?;
        let [eps, delta, sigma] = constants;
        let spec = DesignSpec {
            d: meta.d,
            h: meta.h,
            r: meta.r,
            t: m.rows(),
            x: meta.x.max(1),
            eps: eps.unwrap_or(DEFAULT_EPS),
            delta: delta.unwrap_or(DEFAULT_DELTA),
            sigma: sigma.unwrap_or(DEFAULT_SIGMA),
            s: hp_s,
        };
        spec.validate()?;
        // the bound depends only on the sizes and constants, so it is
        // reported even where no theorem-mode plan exists at this t
        let bound = rate_lower_bound_for(
            spec.d.max(spec.h),
            spec.r,
            spec.t,
            spec.eps,
            spec.delta,
            spec.sigma,
        );
        fields.push(("rate_lower_bound", Value::from(bound)));
    }
    em.emit("rate", &fields)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    pub t: usize,
    pub d: usize,
    pub h: usize,
    pub r: usize,
    pub z: usize,
    pub y: usize,
    pub p: f64,
    pub op: BenchOp,
    pub reps: usize,
    pub seed: u64,
    pub threads: usize,
}

pub const BENCH_HEADER: &str = "op,t,m,D,r,pairs,rep,seconds,violated";

/// One CSV row per (size, repetition). The deterministic construction runs
/// regardless of the initial-estimator budget so every size is timed.
pub fn bench_csv(cfg: &BenchConfig, sizes: &[u64]) -> Result<String> {
    if cfg.reps == 0 {
        return Err(Error::input("--reps must be positive"));
    }
    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    for &m in sizes {
        let plan = make_explicit_plan(&ExplicitParams {
            d: cfg.d,
            h: cfg.h,
            r: cfg.r,
            t: cfg.t,
            m,
            n: (m / 2).max(1),
            z: cfg.z,
            y: cfg.y,
            x: cfg.z.saturating_sub(cfg.y).max(1),
            p: cfg.p,
        })?;
        let pairs = PairTable::count(m as usize, plan.r, plan.big_d)
            .ok_or_else(|| Error::input("pair count overflows"))?;
        for rep in 0..cfg.reps {
            let start = Instant::now();
            let violated = match cfg.op {
                BenchOp::Derand => {
                    let opts = DerandOptions {
                        allow_over_budget: true,
                        threads: cfg.threads,
                        ..Default::default()
                    };
                    derandomized_construct(&plan, &opts)?.violated_before
                }
                BenchOp::Mc => {
                    let mut rng = RandomSource::new(cfg.seed.wrapping_add(rep as u64));
                    match monte_carlo_construct(&plan, &mut rng, cfg.threads)? {
                        ConstructionOutcome::Success(c) => c.violated.len(),
                        ConstructionOutcome::Fail(f) => f.violated,
                    }
                }
                BenchOp::Verify => {
                    let mut rng = RandomSource::new(cfg.seed.wrapping_add(rep as u64));
                    let mat = crate::montecarlo::sample_matrix(&plan, &mut rng)?;
                    let start = Instant::now();
                    let v = find_violated_sets_par(
                        &mat,
                        plan.big_d,
                        plan.r,
                        plan.z,
                        plan.y,
                        cfg.threads,
                    )?;
                    let secs = start.elapsed().as_secs_f64();
                    csv.push_str(&format!(
                        "verify,{},{m},{},{},{pairs},{rep},{secs:.6},{}\n",
                        cfg.t,
                        plan.big_d,
                        plan.r,
                        v.len()
                    ));
                    continue;
                }
            };
            let secs = start.elapsed().as_secs_f64();
            let op = match cfg.op {
                BenchOp::Derand => "derand",
                _ => "mc",
            };
            csv.push_str(&format!(
                "{op},{},{m},{},{},{pairs},{rep},{secs:.6},{violated}\n",
                cfg.t, plan.big_d, plan.r
            ));
        }
    }
    Ok(csv)
}

/// Parsed bench row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub op: String,
    pub t: usize,
    pub m: u64,
    pub pairs: u64,
    pub rep: usize,
    pub seconds: f64,
}

pub fn parse_bench_csv(csv: &str) -> Result<Vec<BenchRow>> {
    let mut lines = csv.lines();
    if lines.next() != Some(BENCH_HEADER) {
        return Err(Error::input("unexpected bench header"));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Format {
                line: k + 2,
                msg: "malformed bench row".into(),
            };
            if f.len() != 9 {
                return Err(bad());
            }
            Ok(BenchRow {
                op: f[0].to_string(),
                t: f[1].parse().map_err(|_| bad())?,
                m: f[2].parse().map_err(|_| bad())?,
                pairs: f[5].parse().map_err(|_| bad())?,
                rep: f[6].parse().map_err(|_| bad())?,
                seconds: f[7].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}
