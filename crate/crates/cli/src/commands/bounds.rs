use dephom::coupling::{
    abstract_exp_bound, betti_exp_bound, exact_mixing_matrix, kernel_concentration_bound, mcdiarmid_bound, Bound,
};

use crate::config::{load, BoundsConfig};
use crate::error::CliError;
use crate::output::{Manifest, OutDir, Table};
use crate::BoundsArgs;

pub fn run(args: &BoundsArgs) -> Result<(), CliError> {
    let loaded = load::<BoundsConfig>(&args.config)?;
    let config = loaded.config;
    config.validate()?;
    let cfg = |e: dephom::coupling::CouplingError| CliError::Config(e.to_string());

    let mixing = match &config {
        BoundsConfig::Mcdiarmid { transition, n, c, .. } => {
            let gamma = exact_mixing_matrix(transition, *n).map_err(cfg)?;
            let c = c.clone().unwrap_or_else(|| vec![1.0; *n]);
            Some((gamma, c))
        }
        _ => None,
    };
    let mut table = Table::new(&["t", "bound", "trivial"]);
    for &t in config.t_grid() {
        let bound: Bound = match &config {
            BoundsConfig::Betti { .. } => betti_exp_bound(&config.params(t).expect("betti params")?).map_err(cfg)?,
            BoundsConfig::Abstract { .. } => {
                abstract_exp_bound(&config.params(t).expect("abstract params")?).map_err(cfg)?
            }
            BoundsConfig::Kernel { f_star, n_mu, .. } => kernel_concentration_bound(t, *f_star, *n_mu),
            BoundsConfig::Mcdiarmid { .. } => {
                let (gamma, c) = mixing.as_ref().expect("built above");
                mcdiarmid_bound(gamma, c, t).map_err(cfg)?
            }
        };
        table.row(&[&t, &format!("{:e}", bound.value), &bound.trivial]);
    }
    let mut out = OutDir::create(&args.out)?;
    out.write("bounds.csv", &table.into_bytes())?;
    out.finish(Manifest {
        command: "bounds",
        config_sha256: Some(loaded.sha256),
        master_seed: None,
        process: None,
    })
}
