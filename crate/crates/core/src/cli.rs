//! Batch command-line driver.
//!
//! Exit codes: 0 when every input passes, 1 when some input fails a
//! mathematical check, 2 on unreadable input or unusable arguments.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::connection::{assemble, monodromy_numeric};
use crate::error::{Error, Result};
use crate::fixtures::fixture;
use crate::hodge::{load_vhs, polarization_signs, ttstar_to_vhs, vhs_to_ttstar};
use crate::jet::chern_connection;
use crate::linalg::{CMatrix, GramMatrix, DEFAULT_TOL};
use crate::model::{full_report, load, to_json, CheckReport};
use crate::spectrum::{flat_diagonalize, pairing_spectrum};
use crate::sylvester::{is_condition, load_solve_phi, recover_higgs};

/// Tolerance on `|det T − exp(2πi tr A₀)|`.
pub const LIOUVILLE_TOL: f64 = 1e-6;
/// Floor on the numeric-versus-closed monodromy comparison.
pub const MONODROMY_TOL: f64 = 1e-8;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Check,
    SolvePhi,
    Spectrum,
    Monodromy,
    HodgeToVhs,
    VhsToTtstar,
    Gen,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::SolvePhi => "solve-phi",
            Command::Spectrum => "spectrum",
            Command::Monodromy => "monodromy",
            Command::HodgeToVhs => "hodge-to-vhs",
            Command::VhsToTtstar => "vhs-to-ttstar",
            Command::Gen => "gen",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Parser, Debug, Clone)]
#[command(name = "ttstar", version, about = "Verify and transform local tt* and harmonic Higgs bundle data")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Input files; for `gen`, the fixture name and optional rank.
    pub inputs: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 4096)]
    pub steps: usize,
    #[arg(long)]
    pub with_weight: bool,
    #[arg(long, allow_negative_numbers = true)]
    pub weight: Option<i64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Error => 2,
        }
    }
}

/// Outcome for one input, rendered as text or JSON.
#[derive(Clone, Debug, Serialize)]
pub struct CommandReport {
    pub command: String,
    pub input: String,
    pub verdict: Verdict,
    pub residuals: BTreeMap<String, f64>,
    pub data: Value,
    #[serde(skip)]
    text: String,
}

impl CommandReport {
    fn new(cmd: Command, input: &str) -> Self {
        Self {
            command: cmd.name().to_string(),
            input: input.to_string(),
            verdict: Verdict::Pass,
            residuals: BTreeMap::new(),
            data: json!({}),
            text: String::new(),
        }
    }

    fn error(cmd: Command, input: &str, e: &Error) -> Self {
        let mut r = Self::new(cmd, input);
        r.verdict = if e.is_mathematical() { Verdict::Fail } else { Verdict::Error };
        r.data = json!({ "error": e.to_string() });
        r.text = format!("error: {e}\n");
        r
    }

    fn absorb(&mut self, report: &CheckReport) {
        for c in &report.checks {
            self.residuals.insert(c.name.clone(), c.residual);
        }
        if !report.pass {
            self.verdict = Verdict::Fail;
        }
        self.text.push_str(&report.to_text());
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report data serializes")
}

fn read(path: &str) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Parse(format!("{path}: {e}")))
}

fn run_check(cfg: &RunConfig, path: &str) -> Result<CommandReport> {
    let b = load(&read(path)?)?;
    let report = full_report(&b, cfg.tol)?;
    let mut out = CommandReport::new(Command::Check, path);
    out.absorb(&report);
    out.data = json!({ "report": to_value(&report) });
    Ok(out)
}

fn matrix_text(m: &CMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|c| format!("({:.16e}, {:.16e})", c.re, c.im)).collect();
        s.push_str(&format!("  [{}]\n", row.join(", ")));
    }
    s
}

fn run_solve_phi(cfg: &RunConfig, path: &str) -> Result<CommandReport> {
    let input = load_solve_phi(&read(path)?)?;
    let is = is_condition(&input.q, cfg.tol)?;
    let mut out = CommandReport::new(Command::SolvePhi, path);
    out.residuals.insert("IS-margin".into(), is.margin);
    if !is.holds {
        out.verdict = Verdict::Fail;
        out.data = json!({ "is": to_value(&is) });
        out.text = format!("IS condition fails: margin {:.16e}\n", is.margin);
        return Ok(out);
    }
    let higgs = recover_higgs(&input.q, &input.du, cfg.tol)?;
    let shift = &input.q - &CMatrix::identity(input.q.rows());
    let resub = higgs
        .iter()
        .zip(&input.du)
        .map(|(c, du)| (&(&(c * &input.q) - &(&shift * c)) - du).norm_fro())
        .fold(0.0_f64, f64::max);
    out.residuals.insert("UCQ".into(), resub);
    out.text = format!("IS margin {:.16e}\n", is.margin);
    for (i, c) in higgs.iter().enumerate() {
        out.text.push_str(&format!("C[{i}] =\n{}", matrix_text(c)));
    }
    out.text.push_str(&format!("re-substitution residual {resub:.16e}\n"));
    out.data = json!({ "is": to_value(&is), "higgs": to_value(&higgs) });
    Ok(out)
}

fn run_spectrum(cfg: &RunConfig, path: &str) -> Result<CommandReport> {
    let b = load(&read(path)?)?;
    let mut out = CommandReport::new(Command::Spectrum, path);
    let q0 = b.q.at_origin();
    let is = is_condition(&q0, cfg.tol)?;
    out.residuals.insert("IS-margin".into(), is.margin);
    let conn = chern_connection(&b.metric, DEFAULT_TOL)?;
    let flat = flat_diagonalize(&b.q, &conn, &b.metric, cfg.tol)?;
    out.text = format!(
        "eigenvalues: {}\ntrace: {:.16e}\nIS margin: {:.16e} ({})\n",
        flat.eigenvalues.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(" "),
        flat.trace,
        is.margin,
        if is.holds { "holds" } else { "fails" }
    );
    let mut data = json!({ "spectrum": to_value(&flat), "is": to_value(&is) });
    if let Some(k) = &b.kappa {
        let pairing = pairing_spectrum(&q0, &GramMatrix::new(b.metric.at_origin(), cfg.tol)?, k, cfg.tol)?;
        out.text.push_str(&format!("pairing: {}, zero eigenvalue: {}\n", pairing.pairing_ok, pairing.has_zero));
        if !pairing.pairing_ok {
            out.verdict = Verdict::Fail;
        }
        data["pairing"] = to_value(&pairing);
    }
    out.data = data;
    Ok(out)
}

fn run_monodromy(cfg: &RunConfig, path: &str) -> Result<CommandReport> {
    let mut b = load(&read(path)?)?;
    if cfg.weight.is_some() {
        b.weight = cfg.weight;
    }
    let f = assemble(&b, cfg.with_weight)?;
    let m = monodromy_numeric(&f, cfg.steps)?;
    let mut out = CommandReport::new(Command::Monodromy, path);
    out.residuals.insert("liouville".into(), m.liouville_defect);
    let mut ok = m.liouville_defect <= LIOUVILLE_TOL;
    if let Some(r) = m.residual {
        out.residuals.insert("closed-form".into(), r);
        ok &= r <= cfg.tol.max(MONODROMY_TOL);
    }
    if !ok {
        out.verdict = Verdict::Fail;
    }
    out.text = format!("T ({} steps) =\n{}", cfg.steps, matrix_text(&m.t));
    for (k, v) in &out.residuals {
        out.text.push_str(&format!("{k}: {v:.16e}\n"));
    }
    out.data = json!({ "connection": to_value(&f), "monodromy": to_value(&m) });
    // with a known weight, also report the monodromy under the other shift convention
    if b.weight.is_some() {
        let alt = monodromy_numeric(&assemble(&b, !cfg.with_weight)?, cfg.steps)?;
        let label = if cfg.with_weight { "without" } else { "with" };
        out.text.push_str(&format!("T {label} weight shift =\n{}", matrix_text(&alt.t)));
        out.data["alternate"] = json!({ "weight_shift": !cfg.with_weight, "monodromy": to_value(&alt) });
    }
    Ok(out)
}

fn run_hodge_to_vhs(cfg: &RunConfig, path: &str) -> Result<CommandReport> {
    let b = load(&read(path)?)?;
    let w = cfg.weight.or(b.weight).unwrap_or(0);
    let vhs = ttstar_to_vhs(&b, w, cfg.tol)?;
    let mut out = CommandReport::new(Command::HodgeToVhs, path);
    out.text = format!("weight {w}\n");
    for (p, d) in &vhs.grading {
        out.text.push_str(&format!("h^{{{p},{}}} = {d}\n", w - p));
    }
    let mut data = json!({ "vhs": to_value(&vhs) });
    if b.kappa.is_some() {
        let pol = polarization_signs(&vhs, cfg.tol)?;
        out.absorb(&pol);
        data["polarization"] = to_value(&pol);
    }
    out.data = data;
    Ok(out)
}

fn run_vhs_to_ttstar(cfg: &RunConfig, path: &str) -> Result<CommandReport> {
    let input = load_vhs(&read(path)?)?;
    let res = vhs_to_ttstar(&input.grading, &input.k, input.weight, cfg.tol)?;
    let mut out = CommandReport::new(Command::VhsToTtstar, path);
    let bundle = to_json(&res.bundle);
    out.text = format!("{bundle}\n");
    let mut data = json!({ "bundle": serde_json::from_str::<Value>(&bundle).expect("valid json") });
    if let Some(w) = &res.positivity_warning {
        data["warning"] = json!(w);
    }
    out.data = data;
    Ok(out)
}

fn run_gen(cfg: &RunConfig) -> Result<CommandReport> {
    let name = cfg.inputs.first().ok_or_else(|| Error::UnknownFixture("missing fixture name".into()))?;
    let arg = match cfg.inputs.get(1) {
        Some(s) => Some(s.parse::<usize>().map_err(|_| Error::UnknownFixture(format!("{name} {s}")))?),
        None => None,
    };
    let b = fixture(name, arg, cfg.seed)?;
    let mut out = CommandReport::new(Command::Gen, &cfg.inputs.join(" "));
    let bundle = to_json(&b);
    out.text = format!("{bundle}\n");
    out.data = json!({ "bundle": serde_json::from_str::<Value>(&bundle).expect("valid json") });
    Ok(out)
}

fn run_one(cfg: &RunConfig, path: &str) -> CommandReport {
    let res = match cfg.command {
        Command::Check => run_check(cfg, path),
        Command::SolvePhi => run_solve_phi(cfg, path),
        Command::Spectrum => run_spectrum(cfg, path),
        Command::Monodromy => run_monodromy(cfg, path),
        Command::HodgeToVhs => run_hodge_to_vhs(cfg, path),
        Command::VhsToTtstar => run_vhs_to_ttstar(cfg, path),
        Command::Gen => run_gen(cfg),
    };
    res.unwrap_or_else(|e| CommandReport::error(cfg.command, path, &e))
}

/// Runs every input, fanning out over `jobs` workers; reports come back
/// in input order.
pub fn execute(cfg: &RunConfig) -> Vec<CommandReport> {
    if cfg.command == Command::Gen {
        return vec![run_one(cfg, "")];
    }
    if cfg.jobs <= 1 || cfg.inputs.len() <= 1 {
        return cfg.inputs.iter().map(|p| run_one(cfg, p)).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build() {
        Ok(pool) => pool.install(|| cfg.inputs.par_iter().map(|p| run_one(cfg, p)).collect()),
        Err(_) => cfg.inputs.iter().map(|p| run_one(cfg, p)).collect(),
    }
}

fn validate(cfg: &RunConfig) -> std::result::Result<(), String> {
    if cfg.command != Command::Gen && cfg.inputs.is_empty() {
        return Err(format!("`{}` needs at least one input file", cfg.command.name()));
    }
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err("--tol must be positive".into());
    }
    if cfg.jobs == 0 {
        return Err("--jobs must be at least 1".into());
    }
    Ok(())
}

/// Parses arguments, runs, writes reports, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    if let Err(msg) = validate(&cfg) {
        let _ = writeln!(err, "error: {msg}");
        return 2;
    }
    let reports = execute(&cfg);
    for r in &reports {
        if r.verdict == Verdict::Error {
            let _ = writeln!(err, "{}: {}", if r.input.is_empty() { r.command.as_str() } else { &r.input }, r.text.trim_end());
        }
    }
    match cfg.output {
        OutputFormat::Json => {
            let doc = if reports.len() == 1 { to_value(&reports[0]) } else { to_value(&reports) };
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
        OutputFormat::Text => {
            let many = reports.len() > 1;
            for r in reports.iter().filter(|r| r.verdict != Verdict::Error) {
                if many || cfg.command != Command::Gen && cfg.command != Command::VhsToTtstar {
                    let _ = writeln!(out, "== {} {}", r.command, r.input);
                }
                let _ = write!(out, "{}", r.text);
            }
            if cfg.stamp {
                let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
                let _ = writeln!(out, "generated at unix time {secs}");
            }
        }
    }
    reports.iter().map(|r| r.verdict.exit_code()).max().unwrap_or(0)
}
