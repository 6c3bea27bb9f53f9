use std::path::{Path, PathBuf};
use std::process::ExitCode;

use addcomb::checks::{check_balog, check_cauchy_schwarz, check_gp_energy, check_ungar, CheckError, CheckResult, CsMode};
use addcomb::expr::{parse, Env, Evaluator};
use addcomb::harness::{
    conjecture_probe, default_families, gen_family, run_survey, FamilySpec, SurveyConfig, SurveyError, DEFAULT_SEED,
    MEM_BUDGET_ENV,
};
use addcomb::incidence::check_elekes_construction;
use addcomb::set::{energy, energy_bruteforce, format_set_text, read_set_file, EnergyMode, FiniteSet};
use addcomb::sunit::{build_diff_graph, count_nondeg_paths, path_count_lower_bound, prune_min_degree, GroupSpec};
use addcomb::{checks::DEFAULT_MEMORY_BUDGET, Rational};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "addcomb", version, about = "Exact sum-product computations on finite sets of rationals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a set expression such as "(A+A)/(A+A)"
    Eval {
        #[arg(long)]
        expr: String,
        /// NAME=FILE binding, repeatable
        #[arg(long = "set", value_name = "NAME=FILE")]
        sets: Vec<String>,
        /// Print only the cardinality
        #[arg(long)]
        count: bool,
    },
    /// Additive or multiplicative energy of a set
    Energy {
        #[arg(long)]
        set: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Product)]
        mode: Mode,
        /// Also run the O(n^4) oracle and compare
        #[arg(long)]
        brute: bool,
    },
    /// Run the exact inequality checks
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Largest set size to check
        #[arg(long, default_value_t = 12)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Generate a set from a family, in set-file format
    Construct {
        #[arg(long)]
        family: String,
        /// k=v,... e.g. n=5,start=1
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Difference graph over the group generated by -1 and the generators
    Sunit {
        #[arg(long)]
        set: PathBuf,
        /// Comma-separated rationals
        #[arg(long)]
        generators: String,
        /// Prune to minimum degree at least t first
        #[arg(long)]
        prune: Option<usize>,
        /// V,K: count nondegenerate walks of K edges from the element V
        #[arg(long)]
        paths: Option<String>,
    },
    /// Lines y = a(x+b) against the points C × A(B+C)
    Incidence {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "B")]
        b: PathBuf,
        #[arg(long = "C")]
        c: PathBuf,
    },
    /// Run a survey over set families
    Survey {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sum,
    Product,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    Ungar,
    Balog,
    Cs,
    Gp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

fn load_set(path: &Path) -> Result<FiniteSet> {
    let (set, dups) = read_set_file(path).with_context(|| format!("reading {}", path.display()))?;
    if dups > 0 {
        eprintln!("warning: {}: ignored {dups} duplicate element(s)", path.display());
    }
    Ok(set)
}

fn memory_budget() -> Result<u64> {
    match std::env::var(MEM_BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| anyhow!("{MEM_BUDGET_ENV}={v:?} is not a nonnegative integer")),
        Err(_) => Ok(DEFAULT_MEMORY_BUDGET),
    }
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn cmd_eval(expr: &str, sets: &[String], count: bool) -> Result<()> {
    let ast = parse(expr).map_err(|e| anyhow!("{e}"))?;
    let mut env = Env::new();
    for binding in sets {
        let (name, file) = binding.split_once('=').ok_or_else(|| anyhow!("expected NAME=FILE, got {binding:?}"))?;
        env.insert(name.trim().to_string(), load_set(Path::new(file))?);
    }
    let result = Evaluator::with_budget(memory_budget()?).eval(&ast, &env)?;
    if count {
        println!("{}", result.len());
    } else {
        print!("{}", format_set_text(&result));
    }
    Ok(())
}

fn cmd_energy(path: &Path, mode: Mode, brute: bool) -> Result<()> {
    let a = load_set(path)?;
    let mode = match mode {
        Mode::Sum => EnergyMode::Sum,
        Mode::Product => EnergyMode::Product,
    };
    let e = energy(&a, mode);
    let mut out = json!({ "mode": mode, "n": a.len(), "energy": e });
    if brute {
        let b = energy_bruteforce(&a, mode)?;
        out["brute_force"] = json!(b);
        out["agree"] = json!(b == e);
        if b != e {
            print_json(&out)?;
            bail!("energy {e} disagrees with the brute-force count {b}");
        }
    }
    print_json(&out)
}

fn suite_sets(n: u32) -> Vec<(String, FiniteSet)> {
    (1..=u64::from(n))
        .flat_map(|k| default_families(k, DEFAULT_SEED))
        .map(|spec| {
            let a = gen_family(&spec).expect("default families are valid");
            (spec.to_string(), a)
        })
        .collect()
}

fn verify_checks(suite: Suite, n: u32) -> Vec<(String, Result<CheckResult, CheckError>)> {
    let want = |s: Suite| suite == Suite::All || suite == s;
    let sets = suite_sets(n);
    let mut out = Vec::new();
    if want(Suite::Ungar) {
        for (name, a) in sets.iter().filter(|(_, a)| a.len() >= 2) {
            out.push((name.clone(), check_ungar(a)));
        }
    }
    if want(Suite::Balog) {
        for (name, a) in sets.iter().filter(|(_, a)| a.all_positive()) {
            out.push((name.clone(), check_balog(a)));
        }
    }
    if want(Suite::Cs) {
        for (name, b) in sets.iter().filter(|(_, b)| !b.contains_zero()) {
            out.push((name.clone(), check_cauchy_schwarz(b, CsMode::Ratio)));
            out.push((name.clone(), check_cauchy_schwarz(b, CsMode::Product)));
        }
    }
    if want(Suite::Gp) {
        for k in (3..=n).step_by(3) {
            out.push((format!("geometric(n={k},ratio=2)"), check_gp_energy(k)));
        }
    }
    out
}

fn cmd_verify(suite: Suite, n: u32, format: Format) -> Result<ExitCode> {
    let mut failed = 0usize;
    let mut total = 0usize;
    for (set, res) in verify_checks(suite, n) {
        total += 1;
        match (&res, format) {
            (Ok(r), Format::Human) => println!("{r} [{set}]"),
            (Ok(r), Format::Json) => {
                let mut v = serde_json::to_value(r)?;
                v["set"] = Value::String(set);
                println!("{}", serde_json::to_string(&v)?);
            }
            (Err(e), Format::Human) => println!("skip {set}: {e}"),
            (Err(e), Format::Json) => println!("{}", json!({ "set": set, "skipped": e.to_string() })),
        }
        if matches!(res, Ok(ref r) if !r.holds) {
            failed += 1;
        }
    }
    if format == Format::Human {
        println!("{} checks, {failed} failed", total);
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_construct(family: &str, params: &str, seed: Option<u64>) -> Result<()> {
    let pairs = params
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.split_once('=').ok_or_else(|| anyhow!("expected k=v, got {p:?}")))
        .collect::<Result<Vec<_>>>()?;
    let spec = FamilySpec::from_kind_params(family, pairs, seed)?;
    let a = gen_family(&spec)?;
    println!("# {spec}");
    print!("{}", format_set_text(&a));
    Ok(())
}

fn parse_rationals(list: &str) -> Result<Vec<Rational>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<Rational>().map_err(|e| anyhow!("{s:?}: {e}")))
        .collect()
}

fn cmd_sunit(set: &Path, generators: &str, prune: Option<usize>, paths: Option<&str>) -> Result<()> {
    let a = load_set(set)?;
    let spec = GroupSpec::new(parse_rationals(generators)?)?;
    let mut g = build_diff_graph(&a, &spec)?;
    let mut out = json!({
        "vertices": g.vertex_count(),
        "edges": g.edge_count(),
        "ordered_pairs": g.ordered_pair_count(),
        "min_degree": g.min_degree(),
        "degree_histogram": g.degree_histogram(),
    });
    if let Some(t) = prune {
        g = prune_min_degree(&g, t);
        out["pruned"] = json!({
            "t": t,
            "vertices": g.vertex_count(),
            "edges": g.edge_count(),
            "ordered_pairs": g.ordered_pair_count(),
            "min_degree": g.min_degree(),
            "degree_histogram": g.degree_histogram(),
        });
    }
    if let Some(p) = paths {
        let (v, k) = p.rsplit_once(',').ok_or_else(|| anyhow!("expected V,K, got {p:?}"))?;
        let v: Rational = v.trim().parse().map_err(|e| anyhow!("{v:?}: {e}"))?;
        let k: usize = k.trim().parse().with_context(|| format!("path length {k:?}"))?;
        let idx = g
            .vertices()
            .position(&v)
            .ok_or_else(|| anyhow!("{v} is not a vertex of the graph"))?;
        let count = count_nondeg_paths(&g, idx, k)?;
        let delta = g.min_degree().unwrap_or(0) as u64;
        let bound = path_count_lower_bound(delta, k as u32);
        let busiest = count.busiest_endpoint().map(|(w, c)| {
            json!({ "vertex": g.vertices().elements()[w], "walks": c })
        });
        out["paths"] = json!({
            "start": v,
            "k": k,
            "total": count.total,
            "min_degree": delta,
            "lower_bound": bound.to_string(),
            "meets_lower_bound": BigInt::from(count.total) >= bound,
            "endpoints": count.per_endpoint.len(),
            "busiest_endpoint": busiest,
        });
    }
    print_json(&out)
}

fn cmd_incidence(a: &Path, b: &Path, c: &Path) -> Result<ExitCode> {
    let report = check_elekes_construction(&load_set(a)?, &load_set(b)?, &load_set(c)?)?;
    print_json(&report)?;
    Ok(if report.check.holds { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_survey(config: &Path, output: Option<PathBuf>) -> Result<ExitCode> {
    let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let mut cfg = SurveyConfig::from_json(&text)?;
    cfg.apply_env()?;
    if output.is_some() {
        cfg.output = output;
    }
    let rows = match run_survey(&cfg) {
        Ok(rows) => rows,
        Err(SurveyError::CheckFailed { failures }) => {
            for f in &failures {
                eprintln!("FAIL {f}");
            }
            return Ok(ExitCode::FAILURE);
        }
        Err(e) => return Err(e.into()),
    };
    let records: Vec<_> = rows.iter().map(|r| r.record.clone()).collect();
    let flagged = conjecture_probe(&records, &cfg.c, &cfg.c_prime);
    let capacity = rows.iter().filter(|r| r.flags.iter().any(|f| f.starts_with("capacity:"))).count();
    print_json(&json!({
        "rows": rows.len(),
        "rows_with_capacity_errors": capacity,
        "conjecture_candidates": flagged.iter().map(|r| &r.descriptor).collect::<Vec<_>>(),
        "output": cfg.output,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Eval { expr, sets, count } => cmd_eval(&expr, &sets, count)?,
        Command::Energy { set, mode, brute } => cmd_energy(&set, mode, brute)?,
        Command::Verify { suite, n, format } => return cmd_verify(suite, n, format),
        Command::Construct { family, params, seed } => cmd_construct(&family, &params, seed)?,
        Command::Sunit { set, generators, prune, paths } => cmd_sunit(&set, &generators, prune, paths.as_deref())?,
        Command::Incidence { a, b, c } => return cmd_incidence(&a, &b, &c),
        Command::Survey { config, output } => return cmd_survey(&config, output),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
