use dephom::limits::{
    compare_runs, concentration_suite, estimate_limit, geometric_lemma_suite, overall_status, slln_check,
    vague_convergence_check, Comparison, ComplexSpec, LimitEstimate, LimitRun, Rectangle, RectangleGrid, Status,
};
use dephom::samplers::derive_seed;
use dephom::ProcessSpec;
use std::io::Write;

use serde::Serialize;

use crate::config::{load, process_error, suite_name, ExperimentConfig, Suite};
use crate::error::CliError;
use crate::output::{Manifest, OutDir, Table, SCHEMA_VERSION};
use crate::ExperimentArgs;

/// Seed paths under the master seed.
const PROCESS_RUN: u64 = 0;
const ORACLE_RUN: u64 = 1;
const SLLN_RUN: u64 = 2;
const CONCENTRATION_RUN: u64 = 3;

#[derive(Serialize)]
struct Plan<'a> {
    suite: &'static str,
    master_seed: u64,
    workers: usize,
    process: Option<&'a ProcessSpec>,
    oracle: Option<ProcessSpec>,
    complex: Option<&'a ComplexSpec>,
    queries: &'a [Rectangle],
    n_grid: &'a [usize],
    replications: usize,
    /// Complexes built in total.
    jobs: usize,
    flags_fatal: bool,
}

fn plan(config: &ExperimentConfig) -> Result<Plan<'_>, CliError> {
    let oracle = match (config.suite, &config.process) {
        (Suite::Limit | Suite::Vague, Some(p)) if config.compare_to_binomial => {
            Some(p.kappa_matched_binomial().map_err(|e| process_error("process", e))?)
        }
        _ => None,
    };
    let runs = 1 + usize::from(oracle.is_some());
    let jobs = match config.suite {
        Suite::Limit | Suite::Vague => runs * config.n_grid.len() * config.replications,
        Suite::Slln => config.queries.len() * config.n_grid.len(),
        Suite::Lemma => 2 * config.lemma.map_or(0, |l| l.trials),
        Suite::Concentration => config.queries.len() * config.concentration.as_ref().map_or(0, |c| c.replications),
    };
    Ok(Plan {
        suite: suite_name(config.suite),
        master_seed: config.master_seed,
        workers: config.workers,
        process: config.process.as_ref(),
        oracle,
        complex: config.complex.as_ref(),
        queries: &config.queries,
        n_grid: &config.n_grid,
        replications: config.replications,
        jobs,
        flags_fatal: config.flags_fatal,
    })
}

#[derive(Serialize)]
struct Summary<T: Serialize> {
    schema_version: u32,
    suite: &'static str,
    status: Status,
    details: T,
}

pub fn run(args: &ExperimentArgs) -> Result<(), CliError> {
    let loaded = load::<ExperimentConfig>(&args.config)?;
    let mut config = loaded.config;
    if let Some(w) = args.workers {
        config.workers = w;
    }
    if args.flags_nonfatal {
        config.flags_fatal = false;
    }
    config.validate()?;
    let plan = plan(&config)?;
    if args.dry_run {
        let text = serde_json::to_string_pretty(&plan).map_err(|e| CliError::io("plan", e))?;
        // A closed pipe (e.g. `| head`) is not an error worth reporting.
        let _ = writeln!(std::io::stdout(), "{text}");
        return Ok(());
    }
    let oracle = plan.oracle.clone();

    let mut out = OutDir::create(&args.out)?;
    let status = match config.suite {
        Suite::Limit => limit(&config, oracle.as_ref(), &mut out)?,
        Suite::Vague => vague(&config, oracle.as_ref(), &mut out)?,
        Suite::Slln => slln(&config, &mut out)?,
        Suite::Lemma => lemma(&config, &mut out)?,
        Suite::Concentration => concentration(&config, &mut out)?,
    };
    out.finish(Manifest {
        command: "experiment",
        config_sha256: Some(loaded.sha256),
        master_seed: Some(config.master_seed),
        process: config.process.as_ref().map(|p| p.tag().to_string()),
    })?;
    if status != Status::Pass && config.flags_fatal {
        return Err(CliError::Statistical(format!("{status:?}").to_lowercase()));
    }
    Ok(())
}

fn write_summary<T: Serialize>(out: &mut OutDir, suite: Suite, status: Status, details: T) -> Result<(), CliError> {
    out.write_json(
        "summary.json",
        &Summary {
            schema_version: SCHEMA_VERSION,
            suite: suite_name(suite),
            status,
            details,
        },
    )
}

fn grid(config: &ExperimentConfig) -> Result<RectangleGrid, CliError> {
    RectangleGrid::new(config.queries.clone()).map_err(|e| CliError::Config(format!("field `queries`: {e}")))
}

fn parts(config: &ExperimentConfig) -> (&ProcessSpec, &ComplexSpec) {
    (
        config.process.as_ref().expect("validated"),
        config.complex.as_ref().expect("validated"),
    )
}

fn estimates_table(table: &mut Table, label: &str, estimates: &[LimitEstimate]) {
    for e in estimates {
        for (k, n) in e.n_grid.iter().enumerate() {
            table.row(&[
                &label,
                &e.q,
                &e.r,
                &e.s,
                n,
                &e.means[k],
                &e.std_errors[k],
                &e.replications,
            ]);
        }
    }
}

fn raw_table(run: &LimitRun, grid: &RectangleGrid) -> Vec<u8> {
    let mut table = Table::new(&["n", "replication", "seed", "q", "r", "s", "value"]);
    for rep in &run.raw {
        for (rect, value) in grid.rectangles.iter().zip(&rep.values) {
            table.row(&[&rep.n, &rep.index, &rep.seed, &rect.q, &rect.r, &rect.s, value]);
        }
    }
    table.into_bytes()
}

fn comparison_table(comparisons: &[Comparison]) -> Vec<u8> {
    let mut table = Table::new(&["q", "r", "s", "n", "mean", "oracle_mean", "pooled_se", "z", "status"]);
    for c in comparisons {
        let status = format!("{:?}", c.status).to_lowercase();
        table.row(&[
            &c.q,
            &c.r,
            &c.s,
            &c.n,
            &c.mean,
            &c.oracle_mean,
            &c.pooled_se,
            &c.z,
            &status,
        ]);
    }
    table.into_bytes()
}

fn limit(config: &ExperimentConfig, oracle: Option<&ProcessSpec>, out: &mut OutDir) -> Result<Status, CliError> {
    let (process, complex) = parts(config);
    let grid = grid(config)?;
    let seed = |path: u64| derive_seed(config.master_seed, &[path]);
    let run = |p: &ProcessSpec, path: u64| {
        estimate_limit(
            p,
            &grid,
            &config.n_grid,
            config.replications,
            complex,
            seed(path),
            config.workers,
        )
    };
    let main = run(process, PROCESS_RUN)?;
    let oracle_run = oracle.map(|o| run(o, ORACLE_RUN)).transpose()?;

    let header = ["process", "q", "r", "s", "n", "mean", "se", "replications"];
    let mut table = Table::new(&header);
    estimates_table(&mut table, process.tag(), &main.estimates);
    out.write("raw_process.csv", &raw_table(&main, &grid))?;
    let comparisons = match &oracle_run {
        Some(o) => {
            estimates_table(&mut table, "binomial_oracle", &o.estimates);
            out.write("raw_oracle.csv", &raw_table(o, &grid))?;
            let c = compare_runs(&main.estimates, &o.estimates)?;
            out.write("comparisons.csv", &comparison_table(&c))?;
            c
        }
        None => Vec::new(),
    };
    out.write("estimates.csv", &table.into_bytes())?;
    let status = overall_status(comparisons.iter().map(|c| c.status), config.max_flags);
    #[derive(Serialize)]
    struct Details<'a> {
        max_flags: usize,
        comparisons: &'a [Comparison],
        estimates: &'a [LimitEstimate],
    }
    write_summary(
        out,
        Suite::Limit,
        status,
        Details {
            max_flags: config.max_flags,
            comparisons: &comparisons,
            estimates: &main.estimates,
        },
    )?;
    Ok(status)
}

fn vague(config: &ExperimentConfig, oracle: Option<&ProcessSpec>, out: &mut OutDir) -> Result<Status, CliError> {
    let (process, complex) = parts(config);
    let grid = grid(config)?;
    let rows = vague_convergence_check(
        process,
        oracle,
        &grid,
        &config.n_grid,
        config.replications,
        complex,
        config.master_seed,
        config.workers,
    )?;
    let mut table = Table::new(&[
        "q",
        "r",
        "s",
        "n",
        "mean",
        "se",
        "cauchy_z",
        "cauchy_status",
        "oracle_z",
        "oracle_status",
    ]);
    let mut statuses = Vec::new();
    for row in &rows {
        let e = &row.estimate;
        let last = e.n_grid.len() - 1;
        let cauchy_z = row.cauchy_z.map_or(String::new(), |z| z.to_string());
        let cauchy_status = format!("{:?}", row.cauchy_status).to_lowercase();
        let (oracle_z, oracle_status) = match &row.oracle {
            Some(c) => (c.z.to_string(), format!("{:?}", c.status).to_lowercase()),
            None => (String::new(), String::new()),
        };
        table.row(&[
            &e.q,
            &e.r,
            &e.s,
            &e.n_grid[last],
            &e.means[last],
            &e.std_errors[last],
            &cauchy_z,
            &cauchy_status,
            &oracle_z,
            &oracle_status,
        ]);
        statuses.push(row.cauchy_status);
        statuses.extend(row.oracle.as_ref().map(|c| c.status));
    }
    out.write("convergence.csv", &table.into_bytes())?;
    let status = overall_status(statuses, config.max_flags);
    write_summary(out, Suite::Vague, status, &rows)?;
    Ok(status)
}

fn slln(config: &ExperimentConfig, out: &mut OutDir) -> Result<Status, CliError> {
    let (process, complex) = parts(config);
    let mut table = Table::new(&["q", "r", "s", "n", "value"]);
    #[derive(Serialize)]
    struct Row {
        q: usize,
        r: f64,
        s: f64,
        max_deviation: f64,
        relative_spread: f64,
        status: Status,
    }
    let mut rows = Vec::new();
    for (i, rect) in config.queries.iter().enumerate() {
        let seed = derive_seed(config.master_seed, &[SLLN_RUN, i as u64]);
        let traj = slln_check(process, *rect, &config.n_grid, complex, seed)?;
        for (n, v) in traj.n_grid.iter().zip(&traj.values) {
            table.row(&[&rect.q, &rect.r, &rect.s, n, v]);
        }
        let last = traj.values.last().copied().unwrap_or(0.0).abs();
        let relative_spread = if last > 0.0 {
            traj.max_deviation / last
        } else {
            traj.max_deviation
        };
        rows.push(Row {
            q: rect.q,
            r: rect.r,
            s: rect.s,
            max_deviation: traj.max_deviation,
            relative_spread,
            status: if relative_spread <= config.slln_tolerance {
                Status::Pass
            } else {
                Status::Flag
            },
        });
    }
    out.write("trajectory.csv", &table.into_bytes())?;
    let status = overall_status(rows.iter().map(|r| r.status), 0);
    write_summary(out, Suite::Slln, status, &rows)?;
    Ok(status)
}

fn lemma(config: &ExperimentConfig, out: &mut OutDir) -> Result<Status, CliError> {
    let lemma = config.lemma.expect("validated");
    let report = geometric_lemma_suite(lemma.n_max, lemma.trials, config.master_seed)?;
    let mut table = Table::new(&["trials", "violations", "max_lhs"]);
    table.row(&[&report.trials, &report.violations, &report.max_lhs]);
    out.write("lemma.csv", &table.into_bytes())?;
    let status = if report.violations == 0 {
        Status::Pass
    } else {
        Status::Fail
    };
    write_summary(out, Suite::Lemma, status, &report)?;
    Ok(status)
}

fn concentration(config: &ExperimentConfig, out: &mut OutDir) -> Result<Status, CliError> {
    let (process, complex) = parts(config);
    let setup = config.concentration.as_ref().expect("validated");
    let mut table = Table::new(&["q", "r", "s", "n", "t", "empirical", "bound", "trivial", "violated"]);
    let mut reports = Vec::new();
    for (i, rect) in config.queries.iter().enumerate() {
        let seed = derive_seed(config.master_seed, &[CONCENTRATION_RUN, i as u64]);
        let report = concentration_suite(process, *rect, setup, complex, seed, config.workers)?;
        for row in &report.rows {
            table.row(&[
                &rect.q,
                &rect.r,
                &rect.s,
                &report.n,
                &row.t,
                &row.empirical,
                &row.bound,
                &row.trivial,
                &row.violated,
            ]);
        }
        reports.push(report);
    }
    out.write("concentration.csv", &table.into_bytes())?;
    let violated = reports.iter().flat_map(|r| &r.rows).any(|row| row.violated);
    let status = if violated { Status::Fail } else { Status::Pass };
    write_summary(out, Suite::Concentration, status, &reports)?;
    Ok(status)
}
