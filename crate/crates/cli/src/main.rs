use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use mmf_multicast::experiments::{
    recommend_on_ensemble, run_sweep, write_results, ConfigFile, OutputFormat, Recommendation,
    SweepSpec,
};
use mmf_multicast::SchemeId;
use serde::Serialize;

/// Max-min fair multigroup multicasting: parameter sweeps and scheme
/// recommendation.
#[derive(Debug, Parser)]
#[command(name = "mmf-multicast", version)]
struct Args {
    /// System configuration (JSON).
    #[arg(long)]
    config: PathBuf,

    /// Sweep specification (JSON). Without it the configuration is
    /// evaluated as a single point.
    #[arg(long)]
    sweep: Option<PathBuf>,

    /// Scheme to evaluate, e.g. ZF-undp, or `all`.
    #[arg(long)]
    scheme: Option<String>,

    #[arg(long)]
    seed: Option<u64>,

    /// Number of user drops per grid point.
    #[arg(long)]
    drops: Option<usize>,

    /// Monte Carlo samples per check; turns on bound validation.
    #[arg(long)]
    mc_samples: Option<usize>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: OutputFormat,

    /// Print the best scheme per grid point (JSON) instead of the table.
    #[arg(long)]
    recommend: bool,
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    s.parse().map_err(|e: mmf_multicast::Error| e.to_string())
}

#[derive(Serialize)]
struct PointRecommendation {
    grid_variable: String,
    grid_value: f64,
    #[serde(flatten)]
    recommendation: Recommendation,
}

fn main() {
    if let Err(e) = run(Args::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(args: Args) -> Result<()> {
    let config = ConfigFile::load(&args.config)?
        .into_system_config()
        .with_context(|| format!("in {}", args.config.display()))?;

    let mut spec = match &args.sweep {
        Some(path) => SweepSpec::load(path)?,
        None => SweepSpec::single_point(&config),
    };
    if let Some(s) = &args.scheme {
        spec.schemes = if s.eq_ignore_ascii_case("all") {
            SchemeId::ALL.to_vec()
        } else {
            vec![s.parse()?]
        };
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(d) = args.drops {
        spec.n_drops = d;
    }
    if let Some(n) = args.mc_samples {
        spec.mc_samples = n;
        spec.mc_validate = true;
    }
    spec.validate()?;

    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };

    if args.recommend {
        let mut recs = Vec::with_capacity(spec.grid.len());
        for &value in &spec.grid {
            let cfg = spec.apply(&config, value)?;
            recs.push(PointRecommendation {
                grid_variable: spec.variable.to_string(),
                grid_value: value,
                recommendation: recommend_on_ensemble(&cfg, spec.n_drops, spec.seed)
                    .with_context(|| format!("at {} = {value}", spec.variable))?,
            });
        }
        serde_json::to_writer_pretty(&mut out, &recs)?;
        writeln!(out)?;
        out.flush()?;
        return Ok(());
    }

    let table = run_sweep(&spec, &config)?;
    write_results(&table, &mut out, args.format).map_err(|e| match (&args.out, e) {
        (Some(path), mmf_multicast::Error::Io { source, .. }) => {
            anyhow::Error::new(source).context(format!("writing {}", path.display()))
        }
        (_, e) => e.into(),
    })?;
    Ok(())
}
