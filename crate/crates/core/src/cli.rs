//! The `nambu` command line: spec files in, deterministic JSON reports out.
//!
//! Exit codes: 0 all checks pass (or fail as annotated in `expect_fail`),
//! 1 some check failed unexpectedly, 2 configuration or parse error.

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::algebroid::{algebroid_battery, AlgebroidOptions, Convention};
use crate::gallery::{census, gallery, GalleryParams};
use crate::nambu::{
    check_census, check_filippov_direct, check_filippov_structural, check_leibniz, check_lie_derivative_criterion,
    CheckOptions, FamilyKind, NambuStructure,
};
use crate::normal_form::{check_frame_identities, coordinate_identity_defect, commuting_frame, darboux_chart, verify_chart, ChartOptions, ChartSample};
use crate::replay::{load_witnesses, replay_witness};
use crate::report::{CheckReport, Verdict, Witness};
use crate::scalar::Q;
use crate::specfile::SpecFile;
use crate::towers::tower_battery;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// One JSON record per line.
    Lines,
    /// A single JSON document.
    Doc,
}

#[derive(Debug, Parser)]
#[command(name = "nambu", version, about = "Check, normalize and explore Nambu-Poisson structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every sampled quantity.
    #[arg(long, global = true, env = "NAMBU_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Sample points (check: 64, darboux: 32, tower: 64).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Absolute tolerance for numeric residuals.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value = "lines")]
    pub format: Format,
    /// Test-function family: coords, quad or full.
    #[arg(long, global = true, default_value = "quad")]
    pub family: FamilyKind,
    /// Reading of the algebroid correction term: scalar or interior.
    #[arg(long, global = true, default_value = "scalar")]
    pub convention: Convention,
    /// Re-verify witnesses from a JSON file instead of running checks.
    #[arg(long, global = true)]
    pub replay: Option<PathBuf>,
    /// Record wall-clock time per check (makes output nondeterministic).
    #[arg(long, global = true)]
    pub timing: bool,
    /// Worker threads for independent checks; output does not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Leibniz, the three Filippov verifiers and the rank census.
    Check { spec: PathBuf },
    /// Characteristic frame and Darboux chart at a regular point.
    Darboux {
        spec: PathBuf,
        /// Comma-separated rational coordinates.
        #[arg(long)]
        point: String,
        /// Export a k-per-axis grid of chart samples.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Axioms of the bracket on (r−1)-forms.
    Algebroid { spec: PathBuf },
    /// Compatibility, stratification and limit brackets of a tower.
    Tower { spec: PathBuf },
    /// List the built-in examples, or print one as a spec file.
    Gallery {
        name: Option<String>,
        /// `key=value` parameter, repeatable.
        #[arg(long = "param", value_parser = parse_kv)]
        params: Vec<(String, String)>,
    },
}

fn parse_kv(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=').map(|(k, v)| (k.trim().to_string(), v.trim().to_string())).ok_or_else(|| format!("expected key=value, got `{s}`"))
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub command: String,
    pub subject: String,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub unsupported: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub expected_failures: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unexpected_passes: Vec<String>,
    pub exit: i32,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "record", rename_all = "lowercase")]
pub enum Record {
    Report(CheckReport),
    Chart { center: Vec<f64>, half_width: f64, condition: f64, transversal: Vec<usize>, identity_defect: f64 },
    Grid(ChartSample),
    Gallery { name: String, n: usize, r: usize, expected_fi: bool, notes: Vec<String> },
    Summary(Summary),
}

/// Captured process result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parse arguments and run; never exits the process.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) { 0 } else { 2 };
            let text = e.render().to_string();
            if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            }
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    match execute(cli) {
        Ok(Output::Records(records, code)) => Outcome { code, stdout: render(&records, cli.format), stderr: String::new() },
        Ok(Output::Text(text)) => Outcome { code: 0, stdout: text, stderr: String::new() },
        Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn render(records: &[Record], format: Format) -> String {
    match format {
        Format::Lines => records.iter().map(|r| serde_json::to_string(r).expect("records serialize") + "\n").collect(),
        Format::Doc => serde_json::to_string_pretty(&serde_json::json!({ "records": records })).expect("records serialize") + "\n",
    }
}

type Job<'a> = Box<dyn FnOnce() -> Result<CheckReport> + Send + 'a>;

/// Run jobs on `threads` workers; results keep job order.
fn parallel(threads: usize, jobs: Vec<Job<'_>>, timing: bool) -> Result<Vec<CheckReport>> {
    let n = jobs.len();
    let slots: Vec<Mutex<Option<Job<'_>>>> = jobs.into_iter().map(|j| Mutex::new(Some(j))).collect();
    let results: Vec<Mutex<Option<Result<CheckReport>>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= n {
            break;
        }
        let job = slots[i].lock().expect("job lock").take().expect("job taken once");
        let t0 = Instant::now();
        let mut out = job();
        if timing {
            if let Ok(r) = &mut out {
                r.timing_ms = Some(t0.elapsed().as_secs_f64() * 1e3);
            }
        }
        *results[i].lock().expect("result lock") = Some(out);
    };
    let threads = threads.clamp(1, n.max(1));
    if threads == 1 {
        work();
    } else {
        std::thread::scope(|sc| {
            for _ in 0..threads {
                sc.spawn(work);
            }
        });
    }
    results.into_iter().map(|m| m.into_inner().expect("result lock").expect("every job ran")).collect()
}

fn check_options(cli: &Cli, default_samples: usize) -> CheckOptions {
    CheckOptions { seed: cli.seed, samples: cli.samples.unwrap_or(default_samples), tol: cli.tol, family: cli.family, max_witnesses: 1 }
}

fn parse_point(s: &str) -> Result<Vec<Q>> {
    s.split(',')
        .map(|t| t.trim().parse::<Q>().map_err(|e| Error::Config(format!("--point: {e}"))))
        .collect()
}

fn summarize(command: &str, subject: &str, seed: u64, reports: &[CheckReport], expect_fail: &[String]) -> Summary {
    let mut s = Summary {
        command: command.into(),
        subject: subject.into(),
        seed,
        passed: 0,
        failed: 0,
        unsupported: 0,
        expected_failures: Vec::new(),
        unexpected_passes: Vec::new(),
        exit: 0,
    };
    for r in reports {
        let expected = expect_fail.iter().any(|e| *e == r.check);
        match (r.verdict, expected) {
            (Verdict::Pass, false) => s.passed += 1,
            (Verdict::Pass, true) => {
                s.passed += 1;
                s.unexpected_passes.push(r.check.clone());
            }
            (Verdict::Fail, true) => s.expected_failures.push(r.check.clone()),
            (Verdict::Fail, false) => s.failed += 1,
            (Verdict::Unsupported, _) => s.unsupported += 1,
        }
    }
    s.exit = i32::from(s.failed > 0 || !s.unexpected_passes.is_empty());
    s
}

fn finish(command: &str, subject: &str, cli: &Cli, mut records: Vec<Record>, reports: Vec<CheckReport>, expect_fail: &[String]) -> Result<Output> {
    let summary = summarize(command, subject, cli.seed, &reports, expect_fail);
    let code = summary.exit;
    records.extend(reports.into_iter().map(Record::Report));
    records.push(Record::Summary(summary));
    Ok(Output::Records(records, code))
}

fn replay_all(cli: &Cli, s: &NambuStructure, path: &PathBuf) -> Result<Output> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let ws: Vec<Witness> = load_witnesses(&text)?;
    let reports: Vec<CheckReport> = ws.iter().map(|w| replay_witness(s, w, cli.seed)).collect::<Result<_>>()?;
    finish("replay", &s.name, cli, Vec::new(), reports, &[])
}

enum Output {
    Records(Vec<Record>, i32),
    /// Spec-file text from `gallery NAME`.
    Text(String),
}

fn execute(cli: &Cli) -> Result<Output> {
    if cli.threads == 0 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    match &cli.command {
        Command::Check { spec } => {
            let sf = SpecFile::parse_file(spec)?;
            let s = sf.structure()?;
            if let Some(p) = &cli.replay {
                return replay_all(cli, &s, p);
            }
            let opts = check_options(cli, 64);
            let (s_ref, o) = (&s, &opts);
            let jobs: Vec<Job<'_>> = vec![
                Box::new(move || Ok(check_leibniz(s_ref, o))),
                Box::new(move || check_filippov_direct(s_ref, o)),
                Box::new(move || Ok(check_lie_derivative_criterion(s_ref, o))),
                Box::new(move || Ok(check_filippov_structural(s_ref, o))),
            ];
            let mut reports = parallel(cli.threads, jobs, cli.timing)?;
            let fi = reports[1].passed();
            let census_job: Job<'_> = Box::new(move || Ok(check_census(s_ref, fi, o)));
            reports.extend(parallel(1, vec![census_job], cli.timing)?);
            finish("check", &s.name, cli, Vec::new(), reports, &sf.expect_fail)
        }
        Command::Darboux { spec, point, grid } => {
            let sf = SpecFile::parse_file(spec)?;
            let s = sf.structure()?;
            if let Some(p) = &cli.replay {
                return replay_all(cli, &s, p);
            }
            let x = parse_point(point)?;
            if x.len() != s.n() {
                return Err(Error::Config(format!("--point has {} coordinates, structure lives in R^{}", x.len(), s.n())));
            }
            let mut records = Vec::new();
            let mut reports = vec![check_frame_identities(&s, &x, cli.seed)?];
            match darboux_chart(&s, &x, &ChartOptions { seed: cli.seed, ..ChartOptions::default() }) {
                Ok(chart) => {
                    let defect = coordinate_identity_defect(&chart, &commuting_frame(&s, &x)?)?;
                    records.push(Record::Chart {
                        center: chart.center.clone(),
                        half_width: chart.half_width,
                        condition: chart.condition,
                        transversal: chart.transversal.iter().map(|i| i + 1).collect(),
                        identity_defect: defect,
                    });
                    let t0 = Instant::now();
                    let mut rep = verify_chart(&s, &chart, cli.samples.unwrap_or(32), cli.seed);
                    if cli.timing {
                        rep.timing_ms = Some(t0.elapsed().as_secs_f64() * 1e3);
                    }
                    reports.push(rep);
                    if let Some(k) = grid {
                        records.extend(chart.export_grid(*k).into_iter().map(Record::Grid));
                    }
                }
                Err(e @ (Error::Chart(_) | Error::DegenerateFrame(_) | Error::Flow { .. })) => {
                    let mut rep = CheckReport::new("darboux_chart", crate::normal_form::ANCHOR_CHART, &s.name, cli.seed);
                    rep.fail(Witness {
                        check: "darboux_chart".into(),
                        point: Some(x.iter().map(|q| q.to_string()).collect()),
                        value: "construction failed".into(),
                        detail: e.to_string(),
                        ..Witness::default()
                    });
                    reports.push(rep);
                }
                Err(e) => return Err(e),
            }
            finish("darboux", &s.name, cli, records, reports, &sf.expect_fail)
        }
        Command::Algebroid { spec } => {
            let sf = SpecFile::parse_file(spec)?;
            let s = sf.structure()?;
            if let Some(p) = &cli.replay {
                return replay_all(cli, &s, p);
            }
            let fi = check_filippov_direct(&s, &check_options(cli, 64))?.passed();
            let opts = AlgebroidOptions { seed: cli.seed, convention: cli.convention, ..AlgebroidOptions::default() };
            let t0 = Instant::now();
            let mut reports = algebroid_battery(&s, fi, &opts)?;
            if cli.timing {
                let ms = t0.elapsed().as_secs_f64() * 1e3;
                reports.iter_mut().for_each(|r| r.timing_ms = Some(ms));
            }
            finish("algebroid", &s.name, cli, Vec::new(), reports, &sf.expect_fail)
        }
        Command::Tower { spec } => {
            if cli.replay.is_some() {
                return Err(Error::Config("tower witnesses cannot be replayed".into()));
            }
            let sf = SpecFile::parse_file(spec)?;
            let t = sf.tower()?;
            let t0 = Instant::now();
            let mut reports = tower_battery(&t, cli.samples.unwrap_or(64), cli.seed)?;
            if cli.timing {
                let ms = t0.elapsed().as_secs_f64() * 1e3;
                reports.iter_mut().for_each(|r| r.timing_ms = Some(ms));
            }
            let name = crate::towers::tower_name(&t);
            finish("tower", &name, cli, Vec::new(), reports, &sf.expect_fail)
        }
        Command::Gallery { name, params } => {
            let p: GalleryParams = params.iter().cloned().collect();
            match name {
                Some(n) => {
                    let item = gallery(n, &p)?;
                    let mut text: String = item.notes.iter().map(|l| format!("# {l}\n")).collect();
                    text += &format!("# expected FI: {}\n", item.expected_fi);
                    text += &SpecFile::for_structure(&item.structure)?.emit()?;
                    Ok(Output::Text(text))
                }
                None => {
                    let records = census()?
                        .into_iter()
                        .map(|it| Record::Gallery {
                            name: it.structure.name.clone(),
                            n: it.structure.n(),
                            r: it.structure.r(),
                            expected_fi: it.expected_fi,
                            notes: it.notes,
                        })
                        .collect();
                    Ok(Output::Records(records, 0))
                }
            }
        }
    }
}
