//! Subcommand implementations.
//!
//! Each command writes its human or JSON report to `out` and returns
//! whether the checked property holds. Operational problems come back as
//! [`CliError`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lticontract::compose::{cascade_systems, check_extendable_with_tolerance, ExtendabilityReport};
use lticontract::refine::check_refinement_with_tolerance;
use lticontract::sim::{follower_rollout, TwoVehicleRun};
use lticontract::verify::verify_contract_with_tolerance;
use lticontract::{Bound, PsiValue, Rational, RefinementReport, Scalar, ThetaValue, VerificationReport};
use serde::Serialize;

use crate::model_file::{FromExact, ModelFile, ParseError};
use crate::number::{fmt_value, to_decimal};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Core(#[from] lticontract::Error),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("encoding JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(name = "lticontract", version, about = "Check assume/guarantee contracts for discrete-time LTI systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CheckOpts {
    /// Verdict tolerance on theta / psi values.
    #[arg(long, default_value_t = lticontract::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Emit a JSON report instead of text.
    #[arg(long)]
    pub json: bool,
    /// Solve in exact rational arithmetic instead of f64.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Assumptions,
    Guarantees,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the model's system satisfies its contract.
    Verify {
        model: PathBuf,
        #[command(flatten)]
        opts: CheckOpts,
    },
    /// Decide whether contract C1 refines contract C2.
    Refine {
        c1: PathBuf,
        c2: PathBuf,
        #[command(flatten)]
        opts: CheckOpts,
    },
    /// Run the two-vehicle scenario and write a CSV trace.
    Simulate {
        model: PathBuf,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `sim.seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Check that a one-step constraint triple is extendable.
    CheckExtendable {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "assumptions")]
        which: Which,
        #[command(flatten)]
        opts: CheckOpts,
    },
    /// Series interconnection: the output of S1 drives the input of S2.
    Cascade {
        s1: PathBuf,
        s2: PathBuf,
        /// Destination model file.
        #[arg(long)]
        out: PathBuf,
        /// Copy the assumptions and guarantees of this file into the output.
        #[arg(long)]
        contract: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

const EXTENDABILITY_NOTE: &str =
    "note: extendability of the assumptions and guarantees was not checked; see `lticontract check-extendable`";

pub fn load(path: &Path) -> Result<ModelFile, CliError> {
    let src = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ModelFile::parse(&src).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn located<T>(path: &Path, r: Result<T, ParseError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Text for scalars in human output.
pub trait ShowScalar: FromExact {
    fn show(&self) -> String;
}

impl ShowScalar for f64 {
    fn show(&self) -> String {
        fmt_value(*self)
    }
}

impl ShowScalar for Rational {
    fn show(&self) -> String {
        to_decimal(self).unwrap_or_else(|| format!("{}/{} (~{})", self.numer(), self.denom(), fmt_value(self.to_f64_lossy())))
    }
}

fn show_bound<T: ShowScalar>(b: &Bound<T>) -> String {
    match b {
        Bound::Value(v) => v.show(),
        Bound::Vacuous => "-inf (vacuous)".into(),
        Bound::PlusInfinity => "+inf (unbounded)".into(),
        Bound::Infeasible => "infeasible".into(),
    }
}

fn bound_f64<T: Scalar>(b: &Bound<T>) -> Bound<f64> {
    match b {
        Bound::Value(v) => Bound::Value(v.to_f64_lossy()),
        Bound::Vacuous => Bound::Vacuous,
        Bound::PlusInfinity => Bound::PlusInfinity,
        Bound::Infeasible => Bound::Infeasible,
    }
}

pub fn verification_f64<T: Scalar>(r: &VerificationReport<T>) -> VerificationReport<f64> {
    VerificationReport {
        thetas: r
            .thetas
            .iter()
            .map(|t| ThetaValue {
                n: t.n,
                l: t.l,
                bound: bound_f64(&t.bound),
            })
            .collect(),
        verified: r.verified,
        tolerance: r.tolerance.to_f64_lossy(),
        vacuous: r.vacuous,
        obs_index: r.obs_index,
        diagnostics: r.diagnostics.clone(),
    }
}

fn psi_f64<T: Scalar>(p: &PsiValue<T>) -> PsiValue<f64> {
    PsiValue {
        bound: bound_f64(&p.bound),
        per_row: p.per_row.iter().map(bound_f64).collect(),
    }
}

pub fn refinement_f64<T: Scalar>(r: &RefinementReport<T>) -> RefinementReport<f64> {
    RefinementReport {
        psi_d: psi_f64(&r.psi_d),
        psi_omega: psi_f64(&r.psi_omega),
        refines: r.refines,
        tolerance: r.tolerance.to_f64_lossy(),
        diagnostics: r.diagnostics.clone(),
    }
}

pub fn extendability_f64<T: Scalar>(r: &ExtendabilityReport<T>) -> ExtendabilityReport<f64> {
    ExtendabilityReport {
        extendable: r.extendable,
        worst: bound_f64(&r.worst),
        projected_rows: r.projected_rows,
        diagnostics: r.diagnostics.clone(),
    }
}

fn json_line<S: Serialize>(out: &mut dyn Write, value: &S) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn tolerance<T: FromExact>(tol: f64) -> T {
    T::from_f64(tol).unwrap_or_else(T::zero)
}

pub fn verify(path: &Path, opts: &CheckOpts, out: &mut dyn Write) -> Result<bool, CliError> {
    let m = load(path)?;
    if opts.exact {
        verify_as::<Rational>(path, &m, opts, out)
    } else {
        verify_as::<f64>(path, &m, opts, out)
    }
}

fn verify_as<T: ShowScalar>(path: &Path, m: &ModelFile, opts: &CheckOpts, out: &mut dyn Write) -> Result<bool, CliError> {
    let sys = located(path, m.system::<T>())?;
    let con = located(path, m.contract::<T>())?;
    let r = verify_contract_with_tolerance(&sys, &con, tolerance(opts.tolerance))?;
    if opts.json {
        json_line(out, &verification_f64(&r))?;
        return Ok(r.verified);
    }
    writeln!(out, "observability index: {}", r.obs_index)?;
    for t in &r.thetas {
        writeln!(out, "theta({},{}) = {}", t.n, t.l, show_bound(&t.bound))?;
    }
    for d in &r.diagnostics {
        writeln!(out, "diagnostic: {d}")?;
    }
    let verdict = if r.verified { "verified" } else { "not verified" };
    writeln!(out, "verdict: {verdict} (tolerance {:e})", opts.tolerance)?;
    writeln!(out, "{EXTENDABILITY_NOTE}")?;
    Ok(r.verified)
}

pub fn refine(c1: &Path, c2: &Path, opts: &CheckOpts, out: &mut dyn Write) -> Result<bool, CliError> {
    let (m1, m2) = (load(c1)?, load(c2)?);
    if opts.exact {
        refine_as::<Rational>((c1, &m1), (c2, &m2), opts, out)
    } else {
        refine_as::<f64>((c1, &m1), (c2, &m2), opts, out)
    }
}

fn refine_as<T: ShowScalar>(
    (p1, m1): (&Path, &ModelFile),
    (p2, m2): (&Path, &ModelFile),
    opts: &CheckOpts,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let c1 = located(p1, m1.contract::<T>())?;
    let c2 = located(p2, m2.contract::<T>())?;
    let r = check_refinement_with_tolerance(&c1, &c2, tolerance(opts.tolerance))?;
    if opts.json {
        json_line(out, &refinement_f64(&r))?;
        return Ok(r.refines);
    }
    let rows = |p: &PsiValue<T>| p.per_row.iter().map(show_bound).collect::<Vec<_>>().join(", ");
    writeln!(out, "psi_D = {}", show_bound(&r.psi_d.bound))?;
    writeln!(out, "  per assumption row: [{}]", rows(&r.psi_d))?;
    writeln!(out, "psi_Omega = {}", show_bound(&r.psi_omega.bound))?;
    writeln!(out, "  per guarantee row: [{}]", rows(&r.psi_omega))?;
    for d in &r.diagnostics {
        writeln!(out, "diagnostic: {d}")?;
    }
    let verdict = if r.refines { "refines" } else { "does not refine" };
    writeln!(out, "verdict: C1 {verdict} C2 (tolerance {:e})", opts.tolerance)?;
    writeln!(out, "{EXTENDABILITY_NOTE}")?;
    Ok(r.refines)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SimulationSummary {
    pub seed: u64,
    pub rows: usize,
    pub min_slack: Option<f64>,
    pub violations: usize,
    pub csv: Option<PathBuf>,
}

pub const CSV_HEADER: [&str; 11] = [
    "k",
    "t_s",
    "p2_m",
    "v2_mps",
    "a2_mps2",
    "p1_m",
    "v1_mps",
    "a1_mps2",
    "gap_m",
    "headway_s",
    "guarantee_slack",
];

pub fn write_csv(run: Option<&TwoVehicleRun>, sink: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for s in run.map(|r| r.samples.as_slice()).unwrap_or_default() {
        let vals = [s.t, s.p2, s.v2, s.a2, s.p1, s.v1, s.a1, s.gap, s.headway, s.slack];
        let mut rec = vec![s.k.to_string()];
        rec.extend(vals.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the scenario; a zero horizon gives a header-only CSV.
pub fn simulate(
    path: &Path,
    csv_out: Option<&Path>,
    seed: Option<u64>,
    json: bool,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let m = load(path)?;
    let sys = located(path, m.system::<f64>())?;
    let mut settings = located(path, m.sim_settings())?;
    if let Some(s) = seed {
        settings.leader.seed = s;
    }
    let run = if settings.horizon_s > 0.0 {
        Some(follower_rollout(&sys, settings.h, &settings.leader)?)
    } else {
        None
    };
    let mut buf = Vec::new();
    write_csv(run.as_ref(), &mut buf)?;
    match csv_out {
        Some(p) => fs::write(p, &buf).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        })?,
        None => out.write_all(&buf)?,
    }
    let summary = SimulationSummary {
        seed: settings.leader.seed,
        rows: run.as_ref().map_or(0, |r| r.samples.len()),
        min_slack: run.as_ref().and_then(|r| r.min_slack()),
        violations: run.as_ref().map_or(0, |r| r.violations()),
        csv: csv_out.map(Path::to_path_buf),
    };
    // With the CSV on standard output the summary goes to stderr.
    let mut err = std::io::stderr();
    let sink: &mut dyn Write = if csv_out.is_some() { out } else { &mut err };
    if json {
        json_line(sink, &summary)?;
    } else {
        writeln!(sink, "seed: {}", summary.seed)?;
        writeln!(sink, "rows: {}", summary.rows)?;
        let min = summary.min_slack.map_or("n/a".into(), fmt_value);
        writeln!(sink, "min guarantee slack: {min}")?;
        writeln!(sink, "violations: {}", summary.violations)?;
    }
    Ok(summary.violations == 0)
}

pub fn check_extendable(path: &Path, which: Which, opts: &CheckOpts, out: &mut dyn Write) -> Result<bool, CliError> {
    let m = load(path)?;
    if opts.exact {
        extendable_as::<Rational>(path, &m, which, opts, out)
    } else {
        extendable_as::<f64>(path, &m, which, opts, out)
    }
}

fn extendable_as<T: ShowScalar>(
    path: &Path,
    m: &ModelFile,
    which: Which,
    opts: &CheckOpts,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let (v1, v0, rhs) = located(path, m.triple::<T>(which == Which::Guarantees))?;
    let r = check_extendable_with_tolerance(&v1, &v0, &rhs, tolerance(opts.tolerance))?;
    if opts.json {
        json_line(out, &extendability_f64(&r))?;
        return Ok(r.extendable);
    }
    let name = match which {
        Which::Assumptions => "assumptions",
        Which::Guarantees => "guarantees",
    };
    writeln!(out, "projected rows: {}", r.projected_rows)?;
    writeln!(out, "worst next-step violation: {}", show_bound(&r.worst))?;
    for d in &r.diagnostics {
        writeln!(out, "diagnostic: {d}")?;
    }
    let verdict = if r.extendable { "extendable" } else { "not extendable" };
    writeln!(out, "verdict: {name} {verdict}")?;
    Ok(r.extendable)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct CascadeSummary {
    pub n_x: usize,
    pub n_d: usize,
    pub n_y: usize,
    pub out: PathBuf,
}

pub fn cascade(
    s1: &Path,
    s2: &Path,
    dest: &Path,
    contract: Option<&Path>,
    json: bool,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let sys1 = located(s1, load(s1)?.system::<Rational>())?;
    let sys2 = located(s2, load(s2)?.system::<Rational>())?;
    let both = cascade_systems(&sys1, &sys2)?;
    let mut m = ModelFile::from_system(&both);
    if let Some(c) = contract {
        let cm = load(c)?;
        m.assumptions = cm.assumptions;
        m.guarantees = cm.guarantees;
        let con = located(c, m.contract::<Rational>())?;
        con.check_compatible(&both)?;
    }
    fs::write(dest, m.to_toml()).map_err(|source| CliError::Io {
        path: dest.to_path_buf(),
        source,
    })?;
    let summary = CascadeSummary {
        n_x: both.n_x(),
        n_d: both.n_d(),
        n_y: both.n_y(),
        out: dest.to_path_buf(),
    };
    if json {
        json_line(out, &summary)?;
    } else {
        writeln!(
            out,
            "wrote {}: n_x = {}, n_d = {}, n_y = {}",
            dest.display(),
            summary.n_x,
            summary.n_d,
            summary.n_y
        )?;
    }
    Ok(true)
}

/// Dispatches a parsed command line.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    match &cli.command {
        Command::Verify { model, opts } => verify(model, opts, out),
        Command::Refine { c1, c2, opts } => refine(c1, c2, opts, out),
        Command::Simulate { model, out: csv, seed, json } => simulate(model, csv.as_deref(), *seed, *json, out),
        Command::CheckExtendable { model, which, opts } => check_extendable(model, *which, opts, out),
        Command::Cascade {
            s1,
            s2,
            out: dest,
            contract,
            json,
        } => cascade(s1, s2, dest, contract.as_deref(), *json, out),
    }
}

/// Process exit code: 0 when the property holds, 1 when it fails, 2 on
/// any operational error.
pub fn exit_code(result: &Result<bool, CliError>) -> i32 {
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(_) => 2,
    }
}
