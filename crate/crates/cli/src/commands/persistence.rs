use std::fs::File;
use std::path::{Path, PathBuf};

use dephom::filtration::build;
use dephom::geometry::{read_cloud_csv, CsvOptions};
use dephom::limits::ComplexSpec;
use dephom::persistence::{compute_persistence, persistent_betti, persistent_betti_direct, ReduceOptions};
use dephom::{FilteredComplex, Metric, PersistenceDiagram, PointCloud};

use crate::config::{load, process_error, PersistenceConfig};
use crate::error::CliError;
use crate::output::{Manifest, OutDir, Table};
use crate::{BettiArgs, DiagramArgs};

fn parse_metric(name: &str) -> Result<Metric, CliError> {
    match name {
        "euclidean" => Ok(Metric::Euclidean),
        "chebyshev" => Ok(Metric::Chebyshev),
        other => Err(CliError::Config(format!("unknown metric `{other}`"))),
    }
}

fn read_cloud(path: &Path, allow_outside_cube: bool) -> Result<PointCloud<f64>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
    read_cloud_csv(file, CsvOptions { allow_outside_cube })
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Loads or samples the cloud, applies `eta`, and builds the complex.
fn complex_for(config: &PersistenceConfig, base: &Path) -> Result<FilteredComplex<f64>, CliError> {
    config.validate()?;
    let cloud = match (&config.input, &config.sample) {
        (Some(input), _) => read_cloud(&base.join(input), config.allow_outside_cube)?,
        (None, Some(sample)) => {
            sample
                .process
                .sample(sample.n, sample.seed)
                .map_err(|e| process_error("sample.process", e))?
                .cloud
        }
        (None, None) => unreachable!("validated"),
    };
    let cloud = match config.eta {
        Some(eta) => cloud.scaled(eta).map_err(|e| CliError::Config(e.to_string()))?,
        None => cloud,
    };
    let c = &config.complex;
    Ok(build(
        c.kind,
        &cloud,
        c.metric,
        c.max_dim,
        c.max_radius,
        Some(c.budget),
    )?)
}

fn diagram_of(complex: &FilteredComplex<f64>, clearing: bool) -> PersistenceDiagram<f64> {
    compute_persistence(complex, ReduceOptions { clearing }).diagram()
}

pub fn diagram(args: &DiagramArgs) -> Result<(), CliError> {
    let (mut config, sha, base) = match &args.config {
        Some(path) => {
            let loaded = load::<PersistenceConfig>(path)?;
            (loaded.config, Some(loaded.sha256), loaded.dir)
        }
        None => {
            let need = |flag: &str| CliError::Config(format!("--{flag} is required without --config"));
            let config = PersistenceConfig {
                input: Some(args.input.clone().ok_or_else(|| need("input"))?),
                allow_outside_cube: false,
                sample: None,
                eta: None,
                complex: ComplexSpec::new(
                    args.kind.ok_or_else(|| need("kind"))?,
                    args.max_dim.ok_or_else(|| need("max-dim"))?,
                    args.max_radius.ok_or_else(|| need("max-radius"))?,
                ),
                clearing: false,
                queries: Vec::new(),
                direct: false,
            };
            (config, None, PathBuf::new())
        }
    };
    // Flags win over the config file; a flag-given input is relative to the
    // working directory.
    let mut base = base;
    if let Some(input) = &args.input {
        config.input = Some(input.clone());
        config.sample = None;
        base = PathBuf::new();
    }
    if let Some(kind) = args.kind {
        config.complex.kind = kind;
    }
    if let Some(d) = args.max_dim {
        config.complex.max_dim = d;
    }
    if let Some(r) = args.max_radius {
        config.complex.max_radius = r;
    }
    if let Some(m) = &args.metric {
        config.complex.metric = parse_metric(m)?;
    }
    config.allow_outside_cube |= args.allow_outside_cube;
    if args.output.is_none() && args.out.is_none() {
        return Err(CliError::Config("give --output FILE or --out DIR".into()));
    }

    let diag = diagram_of(&complex_for(&config, &base)?, config.clearing);
    let mut csv = Vec::new();
    diag.write_csv(&mut csv).map_err(|e| CliError::io("diagram.csv", e))?;
    if let Some(path) = &args.output {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent.display(), e))?;
        }
        std::fs::write(path, &csv).map_err(|e| CliError::io(path.display(), e))?;
    }
    if let Some(dir) = &args.out {
        let mut out = OutDir::create(dir)?;
        out.write("diagram.csv", &csv)?;
        out.finish(Manifest {
            command: "diagram",
            config_sha256: sha,
            master_seed: config.sample.as_ref().map(|s| s.seed),
            process: config.sample.as_ref().map(|s| s.process.tag().to_string()),
        })?;
    }
    Ok(())
}

pub fn betti(args: &BettiArgs) -> Result<(), CliError> {
    let loaded = load::<PersistenceConfig>(&args.config)?;
    let mut config = loaded.config;
    let mut base = loaded.dir;
    if let Some(input) = &args.input {
        config.input = Some(input.clone());
        config.sample = None;
        base = PathBuf::new();
    }
    if config.queries.is_empty() {
        return Err(CliError::Config(
            "field `queries`: at least one rectangle is required".into(),
        ));
    }
    let complex = complex_for(&config, &base)?;
    let diag = diagram_of(&complex, config.clearing);

    let mut header = vec!["q", "r", "s", "betti"];
    if config.direct {
        header.push("direct");
    }
    let mut table = Table::new(&header);
    for rect in &config.queries {
        let query = rect.query();
        let value = persistent_betti(&diag, query).map_err(|e| CliError::Config(e.to_string()))?;
        if config.direct {
            let direct = persistent_betti_direct(&complex, query).map_err(|e| CliError::Config(e.to_string()))?;
            if direct != value {
                return Err(CliError::Runtime(format!(
                    "diagram and rank evaluation disagree at {rect:?}"
                )));
            }
            table.row(&[&rect.q, &rect.r, &rect.s, &value, &direct]);
        } else {
            table.row(&[&rect.q, &rect.r, &rect.s, &value]);
        }
    }
    let mut out = OutDir::create(&args.out)?;
    out.write("betti.csv", &table.into_bytes())?;
    out.finish(Manifest {
        command: "betti",
        config_sha256: Some(loaded.sha256),
        master_seed: config.sample.as_ref().map(|s| s.seed),
        process: config.sample.as_ref().map(|s| s.process.tag().to_string()),
    })
}
