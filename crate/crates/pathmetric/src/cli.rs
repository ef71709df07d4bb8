//! Reporting layer behind the `pathmetric` binary: per-function analysis,
//! differential verification, corpus statistics and DOT export.
//!
//! Big counts are serialized as exact decimal strings so JSON consumers
//! with 64-bit integers cannot corrupt them. With `--sorted`, reports are
//! ordered by file, line and function name, making the output independent
//! of input order.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acpath::{acpath_body_with, is_controlled, AcpathConfig};
use crate::ast::{validate_body, FunctionBody};
use crate::cfg::{attach_ice_markers_stmt, build_body_cfg, OptLevel};
use crate::harness::differential_check;
use crate::npath::{npath_body, NpathConfig};
use crate::oracle::{OracleBudget, PathCount};
use crate::parser::{parse_translation_unit, SourceFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricChoice {
    Acpath,
    Npath,
    Both,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub level: OptLevel,
    pub metric: MetricChoice,
    pub format: Format,
    pub npath_clamp: bool,
    pub while_return_scaling: bool,
    pub verify: bool,
    pub budget: OracleBudget,
    pub sorted: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> AnalyzeOptions {
        AnalyzeOptions {
            level: OptLevel::O2,
            metric: MetricChoice::Both,
            format: Format::Json,
            npath_clamp: false,
            while_return_scaling: false,
            verify: false,
            budget: OracleBudget::default(),
            sorted: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyInfo {
    pub alpha: Option<String>,
    #[serde(rename = "match")]
    pub matched: Option<bool>,
}

/// One analyzed function. Field order is the serialization order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionReport {
    pub file: String,
    pub function: String,
    pub line: u32,
    pub opt_level: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acpath: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub npath: Option<String>,
    pub controlled: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyInfo>,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thresholds {
    pub over80: bool,
    pub over200: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("function `{0}` not found")]
    FunctionNotFound(String),
    #[error("the corpus has no usable records")]
    EmptyCorpus,
    #[error("write failed: {0}")]
    Output(#[from] std::io::Error),
}

fn over(v: &PathCount, k: u32) -> bool {
    *v > BigUint::from(k)
}

fn read_functions(
    path: &Path,
    diagnostics: &mut Vec<String>,
) -> Result<Vec<FunctionBody>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    let file = SourceFile::new(&path.display().to_string(), &text);
    let (functions, errors) = parse_translation_unit(&file);
    for e in errors {
        diagnostics.push(format!("{}:{e}", path.display()));
    }
    let mut good = Vec::new();
    for f in functions {
        let errs = validate_body(&f);
        if errs.is_empty() {
            good.push(normalize(f));
        } else {
            for e in errs {
                diagnostics.push(format!("{}: in `{}`: {e}", path.display(), f.name));
            }
        }
    }
    Ok(good)
}

/// Attach constant markers so both metrics see the same classification.
fn normalize(mut f: FunctionBody) -> FunctionBody {
    let body = std::mem::replace(&mut f.body, crate::ast::Stmt::new(crate::ast::StmtKind::Empty));
    f.body = attach_ice_markers_stmt(body);
    f.renumber();
    f
}

fn analyze_function(path: &Path, f: &FunctionBody, opts: &AnalyzeOptions) -> FunctionReport {
    let acpath_cfg = AcpathConfig {
        while_return_scaling: opts.while_return_scaling,
    };
    let npath_cfg = NpathConfig {
        clamp_expr_statements: opts.npath_clamp,
    };
    let acpath = acpath_body_with(f, opts.level, &acpath_cfg);
    let npath = npath_body(f, &npath_cfg);
    let controlled = is_controlled(f).controlled;
    let verify = if opts.verify {
        let v = differential_check(f, opts.level, &opts.budget);
        Some(VerifyInfo {
            alpha: v.alpha.as_ref().map(|a| a.to_string()),
            matched: v.matched,
        })
    } else {
        None
    };
    let thresholds = Thresholds {
        over80: over(&acpath, 80),
        over200: over(&acpath, 200),
    };
    FunctionReport {
        file: path.display().to_string(),
        function: f.name.clone(),
        line: f.pos.line,
        opt_level: opts.level.as_u8(),
        acpath: match opts.metric {
            MetricChoice::Npath => None,
            _ => Some(acpath.to_string()),
        },
        npath: match opts.metric {
            MetricChoice::Acpath => None,
            _ => Some(npath.to_string()),
        },
        controlled,
        verify,
        thresholds,
    }
}

fn emit_reports(
    reports: &[FunctionReport],
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match format {
        Format::Json => {
            for r in reports {
                writeln!(out, "{}", serde_json::to_string(r).expect("serializable"))?;
            }
        }
        Format::Csv => {
            writeln!(
                out,
                "file,function,line,opt_level,acpath,npath,controlled,alpha,match,over80,over200"
            )?;
            for r in reports {
                let (alpha, matched) = match &r.verify {
                    Some(v) => (
                        v.alpha.clone().unwrap_or_default(),
                        v.matched.map(|m| m.to_string()).unwrap_or_default(),
                    ),
                    None => (String::new(), String::new()),
                };
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.file,
                    r.function,
                    r.line,
                    r.opt_level,
                    r.acpath.clone().unwrap_or_default(),
                    r.npath.clone().unwrap_or_default(),
                    r.controlled,
                    alpha,
                    matched,
                    r.thresholds.over80,
                    r.thresholds.over200
                )?;
            }
        }
        Format::Text => {
            for r in reports {
                let mut line = format!(
                    "{}:{}: {} [O{}]",
                    r.file, r.line, r.function, r.opt_level
                );
                if let Some(a) = &r.acpath {
                    let _ = write!(line, " acpath={a}");
                }
                if let Some(n) = &r.npath {
                    let _ = write!(line, " npath={n}");
                }
                let _ = write!(line, " controlled={}", r.controlled);
                if let Some(v) = &r.verify {
                    match (&v.alpha, v.matched) {
                        (Some(a), Some(m)) => {
                            let _ = write!(line, " alpha={a} match={m}");
                        }
                        _ => {
                            let _ = write!(line, " alpha=?");
                        }
                    }
                }
                if r.thresholds.over80 {
                    let _ = write!(line, " over80");
                }
                if r.thresholds.over200 {
                    let _ = write!(line, " over200");
                }
                writeln!(out, "{line}")?;
            }
        }
    }
    Ok(())
}

fn sort_reports(reports: &mut [FunctionReport]) {
    reports.sort_by(|a, b| {
        (&a.file, a.line, &a.function).cmp(&(&b.file, b.line, &b.function))
    });
}

/// Analyze source files and stream per-function reports.
pub fn cmd_analyze(
    paths: &[PathBuf],
    opts: &AnalyzeOptions,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let mut reports = Vec::new();
    let mut diagnostics = Vec::new();
    let mut io_failure = false;
    for path in paths {
        match read_functions(path, &mut diagnostics) {
            Ok(functions) => {
                for f in &functions {
                    reports.push(analyze_function(path, f, opts));
                }
            }
            Err(e) => {
                io_failure = true;
                let _ = writeln!(err, "{e}");
            }
        }
    }
    if opts.sorted {
        sort_reports(&mut reports);
    }
    for d in &diagnostics {
        let _ = writeln!(err, "{d}");
    }
    if emit_reports(&reports, opts.format, out).is_err() {
        return EXIT_IO;
    }
    if io_failure {
        EXIT_IO
    } else if diagnostics.is_empty() {
        EXIT_OK
    } else {
        EXIT_DIAGNOSTICS
    }
}

/// Per-function differential verdict, serialized one JSON object per line.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub file: String,
    pub function: String,
    pub line: u32,
    pub opt_level: u8,
    pub acpath: String,
    pub alpha: Option<String>,
    pub controlled: bool,
    #[serde(rename = "match")]
    pub matched: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_discrepancy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acpath_while_return_scaling: Option<String>,
}

/// Check every function against the exhaustive oracle. Exit 3 when a
/// controlled function disagrees; budget overruns leave `alpha` null.
pub fn cmd_verify(
    paths: &[PathBuf],
    opts: &AnalyzeOptions,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let mut diagnostics = Vec::new();
    let mut io_failure = false;
    let mut mismatch = false;
    let mut rows = Vec::new();
    for path in paths {
        match read_functions(path, &mut diagnostics) {
            Ok(functions) => {
                for f in &functions {
                    let v = differential_check(f, opts.level, &opts.budget);
                    if v.controlled && v.matched == Some(false) {
                        mismatch = true;
                    }
                    rows.push(VerifyReport {
                        file: path.display().to_string(),
                        function: f.name.clone(),
                        line: f.pos.line,
                        opt_level: opts.level.as_u8(),
                        acpath: v.acpath.to_string(),
                        alpha: v.alpha.as_ref().map(|a| a.to_string()),
                        controlled: v.controlled,
                        matched: v.matched,
                        known_discrepancy: v.known_discrepancy.clone(),
                        acpath_while_return_scaling: if v.acpath_scaled != v.acpath {
                            Some(v.acpath_scaled.to_string())
                        } else {
                            None
                        },
                    });
                }
            }
            Err(e) => {
                io_failure = true;
                let _ = writeln!(err, "{e}");
            }
        }
    }
    if opts.sorted {
        rows.sort_by(|a, b| (&a.file, a.line, &a.function).cmp(&(&b.file, b.line, &b.function)));
    }
    for d in &diagnostics {
        let _ = writeln!(err, "{d}");
    }
    for row in &rows {
        if writeln!(out, "{}", serde_json::to_string(row).expect("serializable")).is_err() {
            return EXIT_IO;
        }
    }
    if mismatch {
        EXIT_MISMATCH
    } else if io_failure {
        EXIT_IO
    } else if diagnostics.is_empty() {
        EXIT_OK
    } else {
        EXIT_DIAGNOSTICS
    }
}

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SkewPair {
    pub acpath: f64,
    pub npath: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ThresholdMatrix {
    pub threshold: u32,
    pub acpath_over_npath_under: usize,
    pub acpath_under_npath_over: usize,
    pub both_over: usize,
    pub both_under: usize,
}

/// Corpus-level relationship between the two metrics, computed on
/// `ln(1 + ln(x))`-transformed values.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CorpusStats {
    pub n: usize,
    pub excluded: usize,
    pub skew_raw: SkewPair,
    pub skew_transformed: SkewPair,
    pub pearson_r_transformed: Option<f64>,
    pub mean_error: f64,
    pub stddev_error: f64,
    pub thresholds: Vec<ThresholdMatrix>,
}

/// Natural log of an arbitrary-precision count ≥ 1, stable for values far
/// beyond `f64` range.
fn ln_big(v: &BigUint) -> f64 {
    if let Some(f) = v.to_f64() {
        if f.is_finite() {
            return f.ln();
        }
    }
    let bits = v.bits();
    let shift = bits.saturating_sub(53);
    let top = (v >> shift).to_f64().unwrap_or(f64::MAX);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn transform(v: &BigUint) -> f64 {
    (1.0 + ln_big(v)).ln()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_moments(xs: &[f64]) -> (f64, f64, f64) {
    let mu = mean(xs);
    let m2 = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / xs.len() as f64;
    let m3 = xs.iter().map(|x| (x - mu).powi(3)).sum::<f64>() / xs.len() as f64;
    (mu, m2, m3)
}

/// Standardized third moment; zero for constant data.
fn skewness(xs: &[f64]) -> f64 {
    let (_, m2, m3) = population_moments(xs);
    if m2 == 0.0 {
        0.0
    } else {
        m3 / m2.powf(1.5)
    }
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let mx = mean(xs);
    let my = mean(ys);
    let cov = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.len() as f64;
    let vx = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / xs.len() as f64;
    let vy = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / ys.len() as f64;
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    // Pointwise-identical series correlate exactly.
    if cov == vx && cov == vy {
        return Some(1.0);
    }
    Some(cov / (vx * vy).sqrt())
}

#[derive(Debug, Deserialize)]
struct CorpusRecord {
    acpath: serde_json::Value,
    npath: serde_json::Value,
}

fn record_count(v: &serde_json::Value) -> Option<BigUint> {
    match v {
        serde_json::Value::String(s) => BigUint::from_str(s).ok(),
        serde_json::Value::Number(n) => n.as_u64().map(BigUint::from),
        _ => None,
    }
}

/// Read a JSONL report (as produced by `analyze --format json`) and compute
/// [`CorpusStats`]. Records missing either metric or with a value below one
/// are excluded and counted.
pub fn cmd_corpus_stats(report: &Path, out: &mut dyn Write) -> Result<CorpusStats, CliError> {
    let text = fs::read_to_string(report).map_err(|e| CliError::Io(report.to_path_buf(), e))?;
    let mut pairs: Vec<(BigUint, BigUint)> = Vec::new();
    let mut excluded = 0usize;
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: Option<CorpusRecord> = serde_json::from_str(line).ok();
        let parsed = rec.and_then(|r| {
            let a = record_count(&r.acpath)?;
            let n = record_count(&r.npath)?;
            Some((a, n))
        });
        match parsed {
            Some((a, n)) if a >= BigUint::from(1u32) && n >= BigUint::from(1u32) => {
                pairs.push((a, n));
            }
            _ => excluded += 1,
        }
    }
    if pairs.is_empty() {
        return Err(CliError::EmptyCorpus);
    }

    let to_f64_sat =
        |v: &BigUint| v.to_f64().filter(|f| f.is_finite()).unwrap_or(f64::MAX);
    let raw_a: Vec<f64> = pairs.iter().map(|(a, _)| to_f64_sat(a)).collect();
    let raw_n: Vec<f64> = pairs.iter().map(|(_, n)| to_f64_sat(n)).collect();
    let tr_a: Vec<f64> = pairs.iter().map(|(a, _)| transform(a)).collect();
    let tr_n: Vec<f64> = pairs.iter().map(|(_, n)| transform(n)).collect();
    let errors: Vec<f64> = tr_a
        .iter()
        .zip(&tr_n)
        .map(|(a, n)| n - a)
        .collect();
    let (mu, m2, _) = population_moments(&errors);

    let mut thresholds = Vec::new();
    for k in [80u32, 200u32] {
        let kk = BigUint::from(k);
        let mut m = ThresholdMatrix {
            threshold: k,
            acpath_over_npath_under: 0,
            acpath_under_npath_over: 0,
            both_over: 0,
            both_under: 0,
        };
        for (a, n) in &pairs {
            match (*a > kk, *n > kk) {
                (true, false) => m.acpath_over_npath_under += 1,
                (false, true) => m.acpath_under_npath_over += 1,
                (true, true) => m.both_over += 1,
                (false, false) => m.both_under += 1,
            }
        }
        thresholds.push(m);
    }

    let stats = CorpusStats {
        n: pairs.len(),
        excluded,
        skew_raw: SkewPair {
            acpath: skewness(&raw_a),
            npath: skewness(&raw_n),
        },
        skew_transformed: SkewPair {
            acpath: skewness(&tr_a),
            npath: skewness(&tr_n),
        },
        pearson_r_transformed: pearson(&tr_a, &tr_n),
        mean_error: mu,
        stddev_error: m2.sqrt(),
        thresholds,
    };
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&stats).expect("serializable")
    )?;
    Ok(stats)
}

/// Render one function's reference CFG as DOT.
pub fn cmd_dot(
    path: &Path,
    function: &str,
    level: OptLevel,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut diagnostics = Vec::new();
    let functions = read_functions(path, &mut diagnostics)?;
    let f = functions
        .iter()
        .find(|f| f.name == function)
        .ok_or_else(|| CliError::FunctionNotFound(function.to_string()))?;
    let cfg = build_body_cfg(f, level);
    write!(out, "{}", cfg.to_dot(function))?;
    Ok(())
}

/// The functions defined in a file, for tooling and tests.
pub fn list_functions(path: &Path) -> Result<BTreeSet<String>, CliError> {
    let mut diagnostics = Vec::new();
    Ok(read_functions(path, &mut diagnostics)?
        .into_iter()
        .map(|f| f.name)
        .collect())
}
