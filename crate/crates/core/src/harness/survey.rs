use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::family::{default_survey_families, gen_family, FamilyError, FamilySpec};
use crate::checks::{
    check_balog, check_cauchy_schwarz, check_ungar, probe_partial, CheckResult, CsMode, ProbeRecord,
    DEFAULT_MEMORY_BUDGET,
};
use crate::expr::{parse, Env, Evaluator};
use crate::rational::Rational;
use crate::set::{diffset, sumset, FiniteSet};

/// Environment variable that overrides [`SurveyConfig::memory_budget`].
pub const MEM_BUDGET_ENV: &str = "ADDCOMB_MEM_BUDGET";

pub const CSV_HEADER: [&str; 13] = [
    "family",
    "seed",
    "n",
    "card_sumset",
    "card_diffset",
    "card_ratio_of_sumsets",
    "card_prod_of_diffsets",
    "card_a_times_4a",
    "energy_mult_sumset",
    "ungar_ok",
    "balog_ok",
    "cs_ok",
    "flags",
];

/// Row flag set when a record is a candidate counterexample for the
/// `c`, `c'` thresholds.
pub const CONJECTURE_FLAG: &str = "conjecture_candidate";

#[derive(Debug, Error)]
pub enum SurveyError {
    #[error("invalid survey configuration: {0}")]
    Config(String),
    #[error("{family}: {source}")]
    Family { family: String, source: FamilyError },
    #[error("inequality checks failed: {}", failures.join("; "))]
    CheckFailed { failures: Vec<String> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn default_c() -> Rational {
    Rational::one()
}

fn default_c_prime() -> Rational {
    Rational::from(4)
}

fn default_budget() -> u64 {
    DEFAULT_MEMORY_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyConfig {
    #[serde(default = "default_survey_families")]
    pub families: Vec<FamilySpec>,
    /// Extra expressions in the variable `A`, each reported as a
    /// `card:<expr>` column.
    #[serde(default)]
    pub expressions: Vec<String>,
    #[serde(default = "default_c")]
    pub c: Rational,
    #[serde(default = "default_c_prime")]
    pub c_prime: Rational,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_budget")]
    pub memory_budget: u64,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        SurveyConfig {
            families: default_survey_families(),
            expressions: Vec::new(),
            c: default_c(),
            c_prime: default_c_prime(),
            output: None,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

impl SurveyConfig {
    pub fn from_json(text: &str) -> Result<Self, SurveyError> {
        let cfg: SurveyConfig = serde_json::from_str(text).map_err(|e| SurveyError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SurveyError> {
        if !self.c.is_positive() || !self.c_prime.is_positive() {
            return Err(SurveyError::Config("thresholds c and c_prime must be positive".into()));
        }
        for src in &self.expressions {
            let ast = parse(src).map_err(|e| SurveyError::Config(format!("expression {src:?}: {e}")))?;
            if let Some(v) = ast.variables().into_iter().find(|v| *v != "A") {
                return Err(SurveyError::Config(format!("expression {src:?} uses {v}; only A is bound")));
            }
        }
        Ok(())
    }

    /// Applies `ADDCOMB_MEM_BUDGET` when it is set.
    pub fn apply_env(&mut self) -> Result<(), SurveyError> {
        if let Ok(v) = std::env::var(MEM_BUDGET_ENV) {
            self.memory_budget = v
                .trim()
                .parse()
                .map_err(|_| SurveyError::Config(format!("{MEM_BUDGET_ENV}={v:?} is not a nonnegative integer")))?;
        }
        Ok(())
    }
}

/// One generated set: its measurements, the hard inequality verdicts, and
/// flags. A verdict is `None` when the check does not apply or did not fit
/// in the memory budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyRow {
    pub family: String,
    pub seed: Option<u64>,
    pub n: u64,
    pub card_sumset: Option<u64>,
    pub card_diffset: Option<u64>,
    pub card_ratio_of_sumsets: Option<u64>,
    pub card_prod_of_diffsets: Option<u64>,
    pub card_a_times_4a: Option<u64>,
    pub energy_mult_sumset: Option<u64>,
    pub ungar_ok: Option<bool>,
    pub balog_ok: Option<bool>,
    pub cs_ok: Option<bool>,
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, Option<u64>>,
    #[serde(skip)]
    pub record: ProbeRecord,
    #[serde(skip)]
    pub failures: Vec<CheckResult>,
}

/// `|(A+A)/(A+A)| <= c|A|^2` and `|A+A| > c'|A|`. Records missing either
/// quantity are never flagged.
pub fn is_conjecture_candidate(r: &ProbeRecord, c: &Rational, c_prime: &Rational) -> bool {
    let (Some(ratio), Some(sum)) = (r.card_ratio_of_sumsets, r.card_sumset) else {
        return false;
    };
    let n = Rational::from(r.card_a);
    Rational::from(ratio) <= c * &(&n * &n) && Rational::from(sum) > c_prime * &n
}

pub fn conjecture_probe(records: &[ProbeRecord], c: &Rational, c_prime: &Rational) -> Vec<ProbeRecord> {
    records.iter().filter(|r| is_conjecture_candidate(r, c, c_prime)).cloned().collect()
}

fn guarded(
    name: &str,
    pairs: usize,
    budget: u64,
    flags: &mut Vec<String>,
    failures: &mut Vec<CheckResult>,
    run: impl FnOnce() -> Option<CheckResult>,
) -> Option<bool> {
    if pairs as u128 * pairs as u128 > budget as u128 {
        flags.push(format!("capacity:{name}"));
        return None;
    }
    let res = run()?;
    if !res.holds {
        failures.push(res.clone());
    }
    Some(res.holds)
}

fn survey_row(spec: &FamilySpec, a: &FiniteSet, cfg: &SurveyConfig) -> SurveyRow {
    let descriptor = spec.to_string();
    let budget = cfg.memory_budget;
    let record = probe_partial(&descriptor, a, budget);
    let mut flags: Vec<String> = record.errors.iter().map(|e| format!("capacity:{}", capacity_subject(e))).collect();
    let mut failures = Vec::new();

    let s = sumset(a, a);
    let ungar_ok = if a.len() >= 2 {
        let d = diffset(a, a);
        guarded("ungar", d.len(), budget, &mut flags, &mut failures, || check_ungar(a).ok())
    } else {
        None
    };
    let balog_ok = if !a.is_empty() && a.all_positive() {
        guarded("balog", s.len(), budget, &mut flags, &mut failures, || check_balog(a).ok())
    } else {
        None
    };
    let mode = if s.contains_zero() { CsMode::Product } else { CsMode::Ratio };
    let cs_ok = if s.is_empty() {
        None
    } else {
        guarded("cauchy_schwarz", s.len(), budget, &mut flags, &mut failures, || {
            check_cauchy_schwarz(&s, mode).ok()
        })
    };

    let mut extra = BTreeMap::new();
    if !cfg.expressions.is_empty() {
        let mut env = Env::new();
        env.insert("A".into(), a.clone());
        let mut ev = Evaluator::with_budget(budget);
        for src in &cfg.expressions {
            let ast = parse(src).expect("validated");
            let v = match ev.eval(&ast, &env) {
                Ok(set) => Some(set.len() as u64),
                Err(e) => {
                    flags.push(format!("capacity:{}", capacity_subject(&e)));
                    None
                }
            };
            extra.insert(src.clone(), v);
        }
    }
    if is_conjecture_candidate(&record, &cfg.c, &cfg.c_prime) {
        flags.push(CONJECTURE_FLAG.into());
    }
    flags.dedup();

    SurveyRow {
        family: descriptor,
        seed: spec.seed(),
        n: a.len() as u64,
        card_sumset: record.card_sumset,
        card_diffset: record.card_diffset,
        card_ratio_of_sumsets: record.card_ratio_of_sumsets,
        card_prod_of_diffsets: record.card_prod_of_diffsets,
        card_a_times_4a: record.card_a_times_4a,
        energy_mult_sumset: record.energy_mult_sumset,
        ungar_ok,
        balog_ok,
        cs_ok,
        flags,
        extra,
        record,
        failures,
    }
}

fn capacity_subject(e: &crate::expr::EvalError) -> String {
    match e {
        crate::expr::EvalError::Capacity { expr, .. } => expr.clone(),
        other => other.to_string(),
    }
}

/// Generates every family, measures it and runs the hard checks, one row per
/// family in configuration order. Rows are computed in parallel.
pub fn survey_rows(cfg: &SurveyConfig) -> Result<Vec<SurveyRow>, SurveyError> {
    cfg.validate()?;
    let sets = cfg
        .families
        .iter()
        .map(|spec| {
            gen_family(spec).map_err(|source| SurveyError::Family { family: spec.to_string(), source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(cfg
        .families
        .par_iter()
        .zip(sets.par_iter())
        .map(|(spec, a)| survey_row(spec, a, cfg))
        .collect())
}

fn cell<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, ToString::to_string)
}

/// The survey as CSV text: [`CSV_HEADER`], then a `card:<expr>` column per
/// extra expression.
pub fn to_csv(rows: &[SurveyRow], expressions: &[String]) -> Result<String, SurveyError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = CSV_HEADER
        .iter()
        .map(|s| s.to_string())
        .chain(expressions.iter().map(|e| format!("card:{e}")))
        .collect();
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.family.clone(),
            cell(&r.seed),
            r.n.to_string(),
            cell(&r.card_sumset),
            cell(&r.card_diffset),
            cell(&r.card_ratio_of_sumsets),
            cell(&r.card_prod_of_diffsets),
            cell(&r.card_a_times_4a),
            cell(&r.energy_mult_sumset),
            cell(&r.ungar_ok),
            cell(&r.balog_ok),
            cell(&r.cs_ok),
            r.flags.join(";"),
        ];
        rec.extend(expressions.iter().map(|e| cell(r.extra.get(e).unwrap_or(&None))));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| SurveyError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `path` (CSV) and `path` with a `.json` extension (the same rows).
pub fn write_outputs(rows: &[SurveyRow], expressions: &[String], path: &Path) -> Result<(), SurveyError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, to_csv(rows, expressions)?)?;
    let mut json = serde_json::to_string_pretty(rows)?;
    json.push('\n');
    fs::write(path.with_extension("json"), json)?;
    Ok(())
}

/// Runs the survey, writes the outputs if configured, and fails if any hard
/// inequality check came out false. Capacity errors only flag their row.
pub fn run_survey(cfg: &SurveyConfig) -> Result<Vec<SurveyRow>, SurveyError> {
    let rows = survey_rows(cfg)?;
    if let Some(path) = &cfg.output {
        write_outputs(&rows, &cfg.expressions, path)?;
    }
    let failures: Vec<String> = rows
        .iter()
        .flat_map(|r| r.failures.iter().map(move |f| format!("{}: {f}", r.family)))
        .collect();
    if failures.is_empty() {
        Ok(rows)
    } else {
        Err(SurveyError::CheckFailed { failures })
    }
}
