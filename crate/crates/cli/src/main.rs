//! `hylo`: analyse hylomorphism equations over finite carriers and unfold
//! productive codata definitions.
//!
//! Exit codes: 0 ok, 1 expectation or check failed, 2 invalid input,
//! 3 budget exceeded. Log verbosity comes from `HYLO_LOG`.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hylo_core::codata::{self, CodataError, CodataSystem, Observation, Outcome};
use hylo_core::coinductive;
use hylo_core::inductive;
use hylo_core::instance::{generate_example, ExampleKind};
use hylo_core::oracle::{self, Budget, CampaignConfig, OracleError};
use hylo_core::report::{build_report, ReportError, ReportOptions};
use hylo_core::{EngineError, EquationInstance, InstanceError, Limits};
use serde_json::json;

#[derive(Parser)]
#[command(name = "hylo", version, about = "Solve and analyse hylomorphism equations f = β ∘ F f ∘ α")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every analysis on an instance and print the report.
    Check {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Assert a report field, e.g. `wellfounded=true`. Repeatable.
        #[arg(long = "expect", value_name = "KEY=VALUE")]
        expect: Vec<String>,
        /// Also enumerate solutions, keeping at most this many.
        #[arg(long, value_name = "N")]
        oracle: Option<usize>,
        /// Include per-stage wall-clock times (makes output non-reproducible).
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Print the canonical solution on A|dom or on A|Dom∞ into B/≈*.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Via::Inductive)]
        via: Via,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Count solutions by brute force over all maps A → B.
    Oracle {
        file: PathBuf,
        /// Solutions to list.
        #[arg(long, default_value_t = 10)]
        cap: usize,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Run a property campaign over generated instances.
    Campaign {
        /// JSON campaign configuration; overrides --seed and --random.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random instances added to the standard exhaustive families.
        #[arg(long, default_value_t = 1000)]
        random: u64,
        #[arg(long)]
        json: bool,
    },
    /// Observe a codata term: a stream prefix, or one destructor path.
    Unfold {
        file: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = codata::DEFAULT_FUEL)]
        fuel: u64,
        /// Dot-separated destructor path, e.g. `tl.tl.hd`; replaces --depth.
        #[arg(long)]
        path: Option<String>,
    },
    /// Guardedness check plus a bounded productivity probe.
    Productivity {
        file: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 16)]
        depth: usize,
        #[arg(long, default_value_t = codata::DEFAULT_FUEL)]
        fuel: u64,
        #[arg(long)]
        json: bool,
    },
    /// Generate an example instance.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Output file; stdout when absent.
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Insertion sort on lists over {0..el-1} of length ≤ maxlen.
    Isort {
        #[arg(long)]
        el: usize,
        #[arg(long)]
        maxlen: usize,
    },
    /// Quicksort on lists over {0..el-1} of length ≤ maxlen.
    Qsort {
        #[arg(long)]
        el: usize,
        #[arg(long)]
        maxlen: usize,
    },
    /// F X = X with β the successor modulo m on a one-element domain.
    Modsucc {
        #[arg(long)]
        modulus: usize,
    },
    /// F X = X with identity coalgebra and algebra.
    Identity {
        #[arg(long)]
        domain: usize,
        #[arg(long)]
        codomain: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Via {
    Inductive,
    Coinductive,
}

#[derive(clap::Args, Clone, Copy)]
struct BudgetArgs {
    /// Maximum candidate maps the oracle may enumerate.
    #[arg(long, default_value_t = Budget::default().candidates)]
    max_candidates: u128,
}

impl BudgetArgs {
    fn budget(self) -> Budget {
        Budget {
            candidates: self.max_candidates,
            ..Budget::default()
        }
    }
}

enum Failure {
    Expectation(String),
    Input(String),
    Budget(String),
}

impl Failure {
    fn input(e: impl Display) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<InstanceError> for Failure {
    fn from(e: InstanceError) -> Self {
        Failure::input(e)
    }
}

impl From<CodataError> for Failure {
    fn from(e: CodataError) -> Self {
        Failure::input(e)
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            OracleError::Instance(e) => Failure::input(e),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::Expectation(format!("internal check failed: {e}"))
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Engine(e) => e.into(),
            ReportError::Oracle(e) => e.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("HYLO_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check {
            file,
            json,
            expect,
            oracle,
            timings,
            budget,
        } => cmd_check(&file, json, &expect, oracle, timings, budget.budget()),
        Command::Solve { file, via, json, budget } => cmd_solve(&file, via, json, budget.budget()),
        Command::Oracle { file, cap, json, budget } => cmd_oracle(&file, cap, json, budget.budget()),
        Command::Campaign {
            config,
            seed,
            random,
            json,
        } => cmd_campaign(config.as_deref(), seed, random, json),
        Command::Unfold {
            file,
            target,
            depth,
            fuel,
            path,
        } => cmd_unfold(&file, &target, depth, fuel, path.as_deref()),
        Command::Productivity {
            file,
            target,
            depth,
            fuel,
            json,
        } => cmd_productivity(&file, &target, depth, fuel, json),
        Command::Gen { kind, output } => cmd_gen(kind, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Expectation(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<EquationInstance, Failure> {
    let text = read(path)?;
    EquationInstance::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_codata(path: &Path) -> Result<CodataSystem, Failure> {
    let text = read(path)?;
    CodataSystem::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn cmd_check(path: &Path, json: bool, expect: &[String], oracle: Option<usize>, timings: bool, budget: Budget) -> CmdResult {
    let mut wanted = Vec::with_capacity(expect.len());
    for e in expect {
        let (k, v) = e
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("--expect `{e}` is not KEY=VALUE")))?;
        wanted.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    if oracle.is_none() && wanted.iter().any(|(k, _)| k == "oracle_count") {
        return Err(Failure::Input("oracle_count needs --oracle".into()));
    }
    let inst = load_instance(path)?;
    let report = build_report(
        &inst,
        &ReportOptions {
            oracle_cap: oracle,
            budget,
            timings,
        },
    )?;
    if json {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    let fields = report.fields();
    let mut diff = Vec::new();
    for (k, v) in &wanted {
        match fields.get(k) {
            None => {
                let known: Vec<&str> = fields.keys().map(String::as_str).collect();
                return Err(Failure::Input(format!("unknown --expect key `{k}` (known: {})", known.join(", "))));
            }
            Some(got) if got != v => diff.push(format!("  {k}: expected {v}, got {got}")),
            Some(_) => {}
        }
    }
    if diff.is_empty() {
        Ok(())
    } else {
        Err(Failure::Expectation(format!("expectations failed:\n{}", diff.join("\n"))))
    }
}

fn cmd_solve(path: &Path, via: Via, json: bool, budget: Budget) -> CmdResult {
    let inst = load_instance(path)?;
    let a = |i: usize| inst.domain().element(i).to_owned();
    let b = |i: usize| inst.codomain().element(i).to_owned();
    match via {
        Via::Inductive => {
            let sol = inductive::extract_partial_solution(&inst)?;
            let rows: Vec<(String, String)> = sol
                .defined_on
                .iter()
                .map(|x| (a(x), b(sol.get(x).expect("defined"))))
                .collect();
            let undefined: Vec<String> = sol.defined_on.complement_iter().map(a).collect();
            if json {
                print_json(&json!({
                    "via": "inductive",
                    "table": rows.iter().map(|(x, y)| [x, y]).collect::<Vec<_>>(),
                    "undefined": undefined,
                }));
            } else {
                println!("f = {{{}}}", mapping(rows.iter().map(|(x, y)| (x.as_str(), y.clone()))));
                println!("defined on dom: {} of {} elements", rows.len(), inst.size_a());
                if !undefined.is_empty() {
                    println!("undefined: {}", undefined.join(", "));
                }
            }
        }
        Via::Coinductive => {
            let sol = coinductive::extract_quotient_solution(&inst)?;
            let classes: Vec<Vec<String>> = sol
                .quotient
                .classes
                .classes()
                .iter()
                .map(|c| c.iter().map(|&y| b(y)).collect())
                .collect();
            let rows: Vec<(String, usize)> = sol
                .table
                .defined_on
                .iter()
                .map(|x| (a(x), sol.table.get(x).expect("defined")))
                .collect();
            let undefined: Vec<String> = sol.table.defined_on.complement_iter().map(a).collect();
            match oracle::count_solutions_up_to(&inst, 1, &budget) {
                Ok(0) => eprintln!(
                    "warning: the plain equation has no solutions; this solves the equation on A|Dom∞ into B/≈*"
                ),
                Ok(_) => {}
                Err(e) => log::info!("skipped plain solution count: {e}"),
            }
            if json {
                print_json(&json!({
                    "via": "coinductive",
                    "classes": classes,
                    "table": rows.iter().map(|(x, c)| json!({"a": x, "class": c})).collect::<Vec<_>>(),
                    "undefined": undefined,
                }));
            } else {
                println!(
                    "f = {{{}}}",
                    mapping(rows.iter().map(|(x, c)| (x.as_str(), format!("[{}]", classes[*c].join(", ")))))
                );
                println!(
                    "defined on Dom∞: {} of {} elements; B/≈* has {} classes",
                    rows.len(),
                    inst.size_a(),
                    classes.len()
                );
                if !undefined.is_empty() {
                    println!("undefined: {}", undefined.join(", "));
                }
            }
        }
    }
    Ok(())
}

fn mapping<'a>(rows: impl Iterator<Item = (&'a str, String)>) -> String {
    rows.map(|(x, y)| format!("{x}↦{y}")).collect::<Vec<_>>().join(", ")
}

fn cmd_oracle(path: &Path, cap: usize, json: bool, budget: Budget) -> CmdResult {
    let inst = load_instance(path)?;
    let found = oracle::enumerate_solutions(&inst, cap, &budget)?;
    let tables: Vec<Vec<[String; 2]>> = found
        .solutions
        .iter()
        .map(|s| {
            (0..inst.size_a())
                .map(|x| {
                    [
                        inst.domain().element(x).to_owned(),
                        inst.codomain().element(s.get(x).expect("total")).to_owned(),
                    ]
                })
                .collect()
        })
        .collect();
    if json {
        print_json(&json!({
            "count": found.count,
            "truncated": found.truncated,
            "solutions": tables,
        }));
    } else {
        println!("solutions: {}", found.count);
        for t in &tables {
            println!("  f = {{{}}}", mapping(t.iter().map(|[x, y]| (x.as_str(), y.clone()))));
        }
        if found.truncated {
            println!("  ... {} more", found.count - tables.len() as u64);
        }
    }
    Ok(())
}

fn cmd_campaign(config: Option<&Path>, seed: u64, random: u64, json: bool) -> CmdResult {
    let config = match config {
        Some(p) => serde_json::from_str::<CampaignConfig>(&read(p)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        None => CampaignConfig::standard(seed, random),
    };
    let report = oracle::run_campaign(&config)?;
    if json {
        print_json(&report);
    } else {
        println!("seed {}: {} instances", report.seed, report.instances_run);
        for (p, t) in &report.tallies {
            println!("  {:<40} passed {:>8}  failed {:>4}", format!("{p:?}"), t.passed, t.failed);
        }
        let o = &report.observations;
        println!(
            "observations: wellfounded {}, antifounded {}, criterion_bisim {}, criterion_equiv {}, ≈ ⊄ ≡ {}, unique without criteria {}",
            o.wellfounded, o.antifounded, o.criterion_bisim, o.criterion_equiv, o.bisim_not_within_equiv, o.unique_without_criteria
        );
        let hist: Vec<String> = o.solution_counts.iter().map(|(k, v)| format!("{k}: {v}")).collect();
        println!("solution counts: {}", hist.join(", "));
        for f in &report.failures {
            println!("FAIL {:?} [{} #{}] {}", f.property, f.generator, f.index, f.detail);
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Expectation(format!("{} property failures", report.failures_total)))
    }
}

fn cmd_unfold(path: &Path, target: &str, depth: usize, fuel: u64, dotted: Option<&str>) -> CmdResult {
    let sys = load_codata(path)?;
    let term = sys.parse_term(target)?;
    if let Some(dotted) = dotted {
        let steps: Vec<&str> = dotted.split('.').filter(|s| !s.is_empty()).collect();
        let r = codata::unfold(&sys, &term, &steps, fuel)?;
        return match r.outcome {
            Outcome::Done(Observation::Value(v)) => {
                println!("{v}");
                Ok(())
            }
            Outcome::Done(Observation::Codata(c)) => {
                println!("{c}");
                Ok(())
            }
            Outcome::FuelExhausted { demand } => Err(Failure::Expectation(format!(
                "fuel exhausted after {} steps: {demand}",
                r.steps_used
            ))),
        };
    }
    let p = codata::prefix(&sys, &term, depth, fuel)?;
    let shown: Vec<String> = p.values.iter().map(ToString::to_string).collect();
    println!("{}", shown.join(" "));
    match p.exhausted_at {
        None => Ok(()),
        Some((i, demand)) => Err(Failure::Expectation(format!(
            "FuelExhausted at observation {i} (fuel {fuel}): {demand}"
        ))),
    }
}

fn cmd_productivity(path: &Path, target: &str, depth: usize, fuel: u64, json: bool) -> CmdResult {
    let sys = load_codata(path)?;
    let term = sys.parse_term(target)?;
    let guard = codata::check_guardedness(&sys);
    let cert = codata::productivity_probe(&sys, &term, depth, fuel);
    if json {
        print_json(&json!({ "guardedness": guard, "probe": cert }));
    } else {
        match &guard.offending_rule {
            None => println!("guarded: true"),
            Some(r) => println!("guarded: false (offending rule: {r})"),
        }
        println!(
            "productive to depth {}: {} (max {} steps per observation)",
            cert.depth, cert.ok, cert.max_steps_per_observation
        );
        if let Some((i, why)) = &cert.failure {
            println!("failure at observation {i}: {why}");
        }
    }
    if cert.ok {
        Ok(())
    } else {
        Err(Failure::Expectation("productivity probe failed".into()))
    }
}

fn cmd_gen(kind: GenKind, output: Option<&Path>) -> CmdResult {
    let kind = match kind {
        GenKind::Isort { el, maxlen } => ExampleKind::Isort { el, max_len: maxlen },
        GenKind::Qsort { el, maxlen } => ExampleKind::Qsort { el, max_len: maxlen },
        GenKind::Modsucc { modulus } => ExampleKind::ModSucc { modulus },
        GenKind::Identity { domain, codomain } => ExampleKind::Identity { domain, codomain },
    };
    let inst = generate_example(kind, Limits::default())?;
    let text = inst.to_json();
    match output {
        Some(p) => fs::write(p, &text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    log::info!("generated {kind}: |A| = {}, |B| = {}", inst.size_a(), inst.size_b());
    Ok(())
}
