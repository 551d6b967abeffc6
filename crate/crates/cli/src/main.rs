//! Command-line front end: generates coding schemes, runs the exact census,
//! assembles the analytic cap row, simulates erasures, and bundles full
//! reports. Data goes to stdout (or `--out`); diagnostics go to stderr.
//!
//! Exit codes: 0 success, 1 validation error, 2 resource-cap refusal.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Deserialize;
use serde_json::json;
use wbancode::analysis::{
    binomial, census_with_cap, upper_bound_profile, AnalysisError, BoundsReport, CensusDoc,
    CensusResult, DecodingPolynomial, DEFAULT_CENSUS_CAP,
};
use wbancode::montecarlo::{simulate, TrialConfig};
use wbancode::multigraph::MultiGraph;
use wbancode::scheme::{CodingScheme, Encoding, WbanParams};

const PRESETS: &str = include_str!("../presets.json");

#[derive(Parser)]
#[command(
    name = "wbancode",
    about = "XOR erasure-coding schemes for body-area sensor relays",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Interleaved,
    Plain,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a coding scheme and write it as JSON (or render its grid).
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum, default_value = "interleaved")]
        mode: Mode,
        /// Number of plain (un-encoded) slots; required for interleaved mode.
        #[arg(long = "L")]
        loops: Option<usize>,
        /// Render the relay/slot grid to stdout instead of scheme JSON.
        #[arg(long)]
        grid: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive decodability census of a scheme or graph file.
    Census {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Raise the enumeration cap to exactly this edge count.
        #[arg(long)]
        cap: Option<usize>,
        /// Raise the enumeration cap to the input's edge count.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the decoding probability of a census at given p values.
    Prob {
        /// Census JSON file (as produced by `census --format json`).
        file: PathBuf,
        /// Survival probabilities, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        p: Vec<f64>,
        /// Evaluate on the 21-point grid p = 0.00, 0.05, ..., 1.00.
        #[arg(long)]
        grid: bool,
        /// Second census file; also print its value and the difference.
        #[arg(long)]
        diff: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic cap row D_x for decodable graphs with the given shape.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Loop-cut number of the target family.
        #[arg(long = "mG")]
        loop_cut: usize,
        /// Maximum number of loops at one vertex.
        #[arg(long = "deltaL", default_value = "1")]
        delta_l: usize,
        /// Emit the caps as a census-shaped JSON document (c_x = D_x).
        #[arg(long)]
        emit_census: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the decoding probability of a scheme or graph.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value = "1000000")]
        trials: u64,
        #[arg(long, default_value = "0")]
        seed: u64,
        #[arg(long, default_value = "1")]
        workers: usize,
        /// Known exact probability; adds a z-score comparison.
        #[arg(long)]
        exact: Option<f64>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full analysis bundle: schemes, censuses, probabilities, caps, and a
    /// seeded simulation for the plain scheme and every loop count 1..=n.
    Report {
        #[arg(long, requires = "k", requires = "r")]
        n: Option<usize>,
        #[arg(long, requires = "n")]
        k: Option<usize>,
        #[arg(long, requires = "n")]
        r: Option<usize>,
        /// Named entry in the presets file (used when --n/--k/--r are absent).
        #[arg(long, default_value = "default")]
        preset: String,
        /// Override the built-in presets file.
        #[arg(long)]
        presets_file: Option<PathBuf>,
        /// Survival probabilities, comma separated (default from preset).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        p: Vec<f64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Validation failures exit 1; refusals to enumerate past the cap exit 2.
enum CliError {
    Validation(String),
    ResourceCap(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::ResourceCap(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::ResourceCap(m) => m,
        }
    }
}

fn validation(err: impl std::fmt::Display) -> CliError {
    CliError::Validation(err.to_string())
}

fn from_analysis(err: AnalysisError) -> CliError {
    match err {
        AnalysisError::CensusCap { .. } | AnalysisError::TooManyEdges { .. } => {
            CliError::ResourceCap(err.to_string())
        }
        other => CliError::Validation(other.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let benign = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if benign {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

/// Writes `data` to `--out` when present, otherwise to stdout.
fn emit(out: Option<&Path>, data: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, data).map_err(validation)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            if data.ends_with('\n') {
                print!("{data}");
            } else {
                println!("{data}");
            }
        }
    }
    Ok(())
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| validation(format!("{}: {e}", path.display())))
}

/// Loads a scheme file or a bare graph file; schemes also yield their graph.
fn load_graph_like(path: &Path) -> Result<(Option<CodingScheme>, MultiGraph), CliError> {
    let text = read_file(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| validation(format!("{}: {e}", path.display())))?;
    if value.get("relays").is_some() {
        let scheme = CodingScheme::from_json_str(&text).map_err(validation)?;
        let graph = scheme.to_graph().map_err(validation)?;
        Ok((Some(scheme), graph))
    } else if value.get("edges").is_some() {
        Ok((None, MultiGraph::from_json_str(&text).map_err(validation)?))
    } else {
        Err(validation(format!(
            "{}: expected a scheme file (with \"relays\") or a graph file (with \"edges\")",
            path.display()
        )))
    }
}

fn grid_text(scheme: &CodingScheme) -> String {
    let mut out = String::new();
    for (j, relay) in scheme.relays().iter().enumerate() {
        let cells: Vec<String> = relay
            .iter()
            .map(|enc| match enc {
                Encoding::Single(i) => format!("P{i}"),
                Encoding::Pair(i, i2) => format!("P{i}+P{i2}"),
            })
            .collect();
        let _ = writeln!(out, "R{j}: {}", cells.join(" | "));
    }
    out
}

fn effective_cap(m: usize, cap: Option<usize>, force: bool) -> usize {
    match cap {
        Some(value) => value,
        None if force => m.max(DEFAULT_CENSUS_CAP),
        None => DEFAULT_CENSUS_CAP,
    }
}

fn census_text(result: &CensusResult, format: Format) -> String {
    match format {
        Format::Json => CensusDoc::from_census(result).to_json_string(),
        Format::Csv => {
            let mut out = String::from("x,C(m,x),c_x,k_x\n");
            for x in 0..=result.m {
                let _ = writeln!(
                    out,
                    "{x},{},{},{}",
                    binomial(result.m, x),
                    result.c[x],
                    result.k[x]
                );
            }
            out
        }
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "{:>3} {:>12} {:>12} {:>12}", "x", "C(m,x)", "c_x", "k_x");
            for x in 0..=result.m {
                let _ = writeln!(
                    out,
                    "{x:>3} {:>12} {:>12} {:>12}",
                    binomial(result.m, x).to_string(),
                    result.c[x].to_string(),
                    result.k[x].to_string()
                );
            }
            match result.loop_cut {
                Some(cut) => {
                    let _ = writeln!(out, "m(G) = {cut}");
                }
                None => {
                    let _ = writeln!(out, "m(G) undefined (no edges to cut)");
                }
            }
            out
        }
    }
}

fn bounds_text(report: &BoundsReport, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(report).map_err(validation)?,
        Format::Csv => {
            let mut out = String::from("x,C(m,x),D_x\n");
            for (i, entry) in report.d.iter().enumerate() {
                let x = i + 1;
                let _ = writeln!(out, "{x},{},{}", binomial(report.m, x), entry.value);
            }
            out
        }
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "n = {}, m = {}, m(G) = {}, max loops per vertex = {}, theta = {}",
                report.n, report.m, report.loop_cut, report.max_loops, report.theta
            );
            let _ = writeln!(out, "{:>3} {:>12} {:>12}", "x", "C(m,x)", "D_x");
            for (i, entry) in report.d.iter().enumerate() {
                let x = i + 1;
                let flag = if entry.clamped { " (clamped)" } else { "" };
                let _ = writeln!(
                    out,
                    "{x:>3} {:>12} {:>12}{flag}",
                    binomial(report.m, x).to_string(),
                    entry.value.to_string()
                );
            }
            out
        }
    })
}

/// Census-shaped document whose decodable counts are the caps D_x.
fn caps_as_census(report: &BoundsReport) -> CensusDoc {
    let m = report.m;
    let mut c: Vec<BigUint> = Vec::with_capacity(m + 1);
    c.push(BigUint::from(1u32));
    for entry in &report.d {
        c.push(entry.value.clone());
    }
    c.resize(m + 1, BigUint::from(0u32));
    let k: Vec<BigUint> = (0..=m).map(|x| binomial(m, x) - &c[x]).collect();
    CensusDoc {
        m,
        loop_cut: Some(report.loop_cut),
        c,
        k,
    }
}

fn probability_rows(
    poly: &DecodingPolynomial,
    other: Option<&DecodingPolynomial>,
    ps: &[f64],
) -> Result<Vec<(f64, f64, Option<(f64, f64)>)>, CliError> {
    let mut rows = Vec::with_capacity(ps.len());
    for &p in ps {
        let own: f64 = poly.evaluate(p).map_err(from_analysis)?;
        let diff = match other {
            Some(o) => {
                let theirs: f64 = o.evaluate(p).map_err(from_analysis)?;
                Some((theirs, own - theirs))
            }
            None => None,
        };
        rows.push((p, own, diff));
    }
    Ok(rows)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate {
            n,
            k,
            r,
            mode,
            loops,
            grid,
            out,
        } => {
            let params = WbanParams::derive(n, k, r).map_err(validation)?;
            let scheme = match mode {
                Mode::Plain => {
                    if loops.is_some() {
                        return Err(CliError::Validation(
                            "--L only applies to interleaved mode".into(),
                        ));
                    }
                    CodingScheme::plain(params)
                }
                Mode::Interleaved => {
                    let loops = loops.ok_or(CliError::Validation(
                        "interleaved mode requires --L".into(),
                    ))?;
                    CodingScheme::interleaved(params, loops).map_err(validation)?
                }
            };
            if grid {
                print!("{}", grid_text(&scheme));
                if let Some(path) = out {
                    emit(Some(&path), &scheme.to_json_string())?;
                }
            } else {
                emit(out.as_deref(), &scheme.to_json_string())?;
            }
            Ok(())
        }
        Command::Census {
            file,
            format,
            cap,
            force,
            out,
        } => {
            let (_, graph) = load_graph_like(&file)?;
            let cap = effective_cap(graph.edge_count(), cap, force);
            let result = census_with_cap(&graph, cap).map_err(from_analysis)?;
            if format == Format::Csv {
                match result.loop_cut {
                    Some(cut) => eprintln!("m(G) = {cut}"),
                    None => eprintln!("m(G) undefined (no edges to cut)"),
                }
            }
            emit(out.as_deref(), &census_text(&result, format))
        }
        Command::Prob {
            file,
            p,
            grid,
            diff,
            format,
            out,
        } => {
            let census = CensusDoc::from_json_str(&read_file(&file)?).map_err(from_analysis)?;
            let poly = DecodingPolynomial::from_census(&census);
            let other = match &diff {
                Some(path) => Some(DecodingPolynomial::from_census(
                    &CensusDoc::from_json_str(&read_file(path)?).map_err(from_analysis)?,
                )),
                None => None,
            };
            let ps: Vec<f64> = if grid {
                (0..=20).map(|i| i as f64 * 0.05).collect()
            } else if p.is_empty() {
                return Err(CliError::Validation("supply --p values or --grid".into()));
            } else {
                p
            };
            let rows = probability_rows(&poly, other.as_ref(), &ps)?;
            let text = match format {
                Format::Json => {
                    let records: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|(p, own, diff)| match diff {
                            Some((theirs, gap)) => json!({
                                "p": p,
                                "probability": format!("{own:.10}"),
                                "other": format!("{theirs:.10}"),
                                "difference": format!("{gap:.10}"),
                            }),
                            None => json!({
                                "p": p,
                                "probability": format!("{own:.10}"),
                            }),
                        })
                        .collect();
                    serde_json::to_string_pretty(&records).map_err(validation)?
                }
                Format::Csv => {
                    let mut text = String::new();
                    if rows.iter().any(|r| r.2.is_some()) {
                        text.push_str("p,P,P_other,difference\n");
                        for (p, own, diff) in &rows {
                            let (theirs, gap) = diff.expect("diff column present");
                            let _ = writeln!(
                                text,
                                "{p},{own:.10},{theirs:.10},{gap:.10}"
                            );
                        }
                    } else {
                        text.push_str("p,P\n");
                        for (p, own, _) in &rows {
                            let _ = writeln!(text, "{p},{own:.10}");
                        }
                    }
                    text
                }
                Format::Table => {
                    let mut text = String::new();
                    for (p, own, diff) in &rows {
                        match diff {
                            Some((theirs, gap)) => {
                                let _ = writeln!(
                                    text,
                                    "P(p={p:.4}) = {own:.10}  other = {theirs:.10}  difference = {gap:.10}"
                                );
                            }
                            None => {
                                let _ = writeln!(text, "P(p={p:.4}) = {own:.10}");
                            }
                        }
                    }
                    text
                }
            };
            emit(out.as_deref(), &text)
        }
        Command::Bounds {
            n,
            m,
            loop_cut,
            delta_l,
            emit_census,
            format,
            out,
        } => {
            let report = upper_bound_profile(n, m, loop_cut, delta_l).map_err(from_analysis)?;
            let text = if emit_census {
                caps_as_census(&report).to_json_string()
            } else {
                bounds_text(&report, format)?
            };
            emit(out.as_deref(), &text)
        }
        Command::Simulate {
            file,
            p,
            trials,
            seed,
            workers,
            exact,
            format,
            out,
        } => {
            let (_, graph) = load_graph_like(&file)?;
            let config = TrialConfig::with_workers(p, trials, seed, workers).map_err(validation)?;
            let result = simulate(&graph, config);
            let z = match exact {
                Some(exact) => Some(result.z_score(exact).map_err(validation)?),
                None => None,
            };
            let text = match format {
                Format::Json => {
                    let mut value = serde_json::to_value(result).map_err(validation)?;
                    if let (Some(exact), Some(z)) = (exact, z) {
                        value["exact"] = json!(exact);
                        value["z_score"] = json!(z);
                    }
                    serde_json::to_string_pretty(&value).map_err(validation)?
                }
                Format::Csv => {
                    let mut text = String::from(
                        "successes,trials,estimate,std_error,p,seed,workers\n",
                    );
                    let _ = writeln!(
                        text,
                        "{},{},{:.10},{:.10},{},{},{}",
                        result.successes,
                        result.trials,
                        result.estimate,
                        result.std_error,
                        result.p,
                        result.seed,
                        result.workers
                    );
                    text
                }
                Format::Table => {
                    let mut text = String::new();
                    let _ = writeln!(
                        text,
                        "estimate  = {:.10} ({} / {})",
                        result.estimate, result.successes, result.trials
                    );
                    let _ = writeln!(text, "std_error = {:.3e}", result.std_error);
                    if let (Some(exact), Some(z)) = (exact, z) {
                        let _ = writeln!(text, "exact     = {exact:.10}");
                        let _ = writeln!(text, "z         = {z:+.2}");
                    }
                    text
                }
            };
            emit(out.as_deref(), &text)
        }
        Command::Report {
            n,
            k,
            r,
            preset,
            presets_file,
            p,
            trials,
            seed,
            workers,
            cap,
            force,
            out,
        } => {
            let presets = load_presets(presets_file.as_deref())?;
            let chosen = presets.get(&preset);
            let (n, k, r) = match (n, k, r) {
                (Some(n), Some(k), Some(r)) => (n, k, r),
                (None, None, None) => {
                    let entry = chosen.ok_or_else(|| {
                        CliError::Validation(format!("unknown preset '{preset}'"))
                    })?;
                    (entry.n, entry.k, entry.r)
                }
                _ => unreachable!("clap enforces the trio"),
            };
            let ps: Vec<f64> = if !p.is_empty() {
                p
            } else {
                chosen.map(|e| e.p.clone()).unwrap_or_else(|| vec![0.8, 0.9])
            };
            let trials = trials.or(chosen.map(|e| e.trials)).unwrap_or(1_000_000);
            let seed = seed.or(chosen.map(|e| e.seed)).unwrap_or(0);
            let workers = workers.or(chosen.map(|e| e.workers)).unwrap_or(1);
            let delta_l = chosen.map(|e| e.delta_l).unwrap_or(1);
            let bundle = build_report(
                n, k, r, &ps, trials, seed, workers, cap, force, delta_l,
            )?;
            emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&bundle).map_err(validation)?,
            )
        }
    }
}

#[derive(Deserialize, Clone)]
struct Preset {
    n: usize,
    k: usize,
    r: usize,
    p: Vec<f64>,
    trials: u64,
    seed: u64,
    workers: usize,
    delta_l: usize,
}

fn load_presets(
    path: Option<&Path>,
) -> Result<std::collections::BTreeMap<String, Preset>, CliError> {
    let text = match path {
        Some(path) => read_file(path)?,
        None => PRESETS.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| validation(format!("presets: {e}")))
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    n: usize,
    k: usize,
    r: usize,
    ps: &[f64],
    trials: u64,
    seed: u64,
    workers: usize,
    cap: Option<usize>,
    force: bool,
    delta_l: usize,
) -> Result<serde_json::Value, CliError> {
    let params = WbanParams::derive(n, k, r).map_err(validation)?;
    let m = r * n;

    let feasible_cut = (2 * m / (n + 1)).min(2 * r - 1);
    let bounds = if feasible_cut > delta_l {
        Some(upper_bound_profile(n, m, feasible_cut, delta_l).map_err(from_analysis)?)
    } else {
        None
    };

    let mut schemes = Vec::new();
    let mut modes: Vec<(String, CodingScheme)> =
        vec![("plain".into(), CodingScheme::plain(params))];
    for loops in 1..=n {
        modes.push((
            format!("interleaved-{loops}"),
            CodingScheme::interleaved(params, loops).map_err(validation)?,
        ));
    }
    for (name, scheme) in modes {
        let graph = scheme.to_graph().map_err(validation)?;
        let result = census_with_cap(&graph, effective_cap(graph.edge_count(), cap, force))
            .map_err(from_analysis)?;
        let poly = DecodingPolynomial::from_census(&result);
        let mut probabilities = Vec::new();
        for &p in ps {
            let value: f64 = poly.evaluate(p).map_err(from_analysis)?;
            probabilities.push(json!({ "p": p, "exact": format!("{value:.10}") }));
        }
        let config =
            TrialConfig::with_workers(ps[0], trials, seed, workers).map_err(validation)?;
        let sim = simulate(&graph, config);
        let census_doc = CensusDoc::from_census(&result);
        schemes.push(json!({
            "mode": name,
            "grid": grid_text(&scheme).lines().collect::<Vec<_>>(),
            "scheme": scheme.to_json_value(),
            "census": serde_json::to_value(&census_doc).map_err(validation)?,
            "probabilities": probabilities,
            "simulation": serde_json::to_value(sim).map_err(validation)?,
        }));
    }

    Ok(json!({
        "params": serde_json::to_value(params).map_err(validation)?,
        "p_grid": ps,
        "trials": trials,
        "seed": seed,
        "workers": workers,
        "bounds": match &bounds {
            Some(report) => serde_json::to_value(report).map_err(validation)?,
            None => serde_json::Value::Null,
        },
        "schemes": schemes,
    }))
}
