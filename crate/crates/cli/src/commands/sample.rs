use dephom::geometry::write_cloud_csv;

use crate::config::{load, process_error, SampleConfig};
use crate::error::CliError;
use crate::output::{Manifest, OutDir, Table};
use crate::SampleArgs;

pub fn run(args: &SampleArgs) -> Result<(), CliError> {
    let loaded = load::<SampleConfig>(&args.config)?;
    let mut config = loaded.config;
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate("")?;
    let sample = config
        .process
        .sample(config.n, config.seed)
        .map_err(|e| process_error("process", e))?;

    let mut out = OutDir::create(&args.out)?;
    let mut cloud = Vec::new();
    write_cloud_csv(&mut cloud, &sample.cloud).map_err(|e| CliError::io("cloud.csv", e))?;
    out.write("cloud.csv", &cloud)?;
    if let Some(path) = &sample.hidden_path {
        let mut table = Table::new(&["index", "block"]);
        for (i, z) in path.iter().enumerate() {
            table.row(&[&i, z]);
        }
        out.write("hidden.csv", &table.into_bytes())?;
    }
    out.finish(Manifest {
        command: "sample",
        config_sha256: Some(loaded.sha256),
        master_seed: Some(config.seed),
        process: Some(sample.process_tag),
    })
}
