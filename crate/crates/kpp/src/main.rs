use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use kpp::config::{RunConfig, Scenario};

/// Fisher/KPP dispersal simulations on lines, squares and masked maps.
#[derive(Debug, Parser)]
#[command(name = "kpp", version)]
struct Cli {
    /// wave1d, radial2d, desert, map-run, segment-debug, smooth-map, interp-preview or error-metrics.
    #[arg(long)]
    scenario: Option<Scenario>,
    /// `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Time step.
    #[arg(long)]
    h: Option<f64>,
    /// Grid spacing.
    #[arg(long)]
    dx: Option<f64>,
    /// Regularizer exponent (>= 1).
    #[arg(long)]
    beta: Option<f64>,
    /// Sigmoid sharpness for capacity interpolation.
    #[arg(long)]
    nu: Option<f64>,
    /// Desert capacity fraction.
    #[arg(long)]
    fr: Option<f64>,
    /// Capacity smoothing half-width in cells.
    #[arg(long = "smooth-L", alias = "smooth-l")]
    smooth_l: Option<usize>,
    /// Disable the capacity-ratio regularizer.
    #[arg(long)]
    no_regularize: bool,
    /// Sweep x first on every step instead of alternating.
    #[arg(long)]
    no_alt: bool,
    /// Final simulation time
    #[arg(long)]
    t_end: Option<f64>,
    /// Interval between written snapshots
    #[arg(long)]
    snapshot_every: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Land/water mask grid file.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Capacity frame manifest or a single capacity grid file.
    #[arg(long)]
    frames: Option<PathBuf>,
    /// Initial data: zero, gauss:x,y,s, disk:x,y,r, strip:x,rms, step:x, seed:row,col[,v] or a grid file.
    #[arg(long)]
    init: Option<String>,
    /// Any config key, e.g. `--set threads=4`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Cli {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path, self.scenario)?,
            None => RunConfig::new(self.scenario.context("--scenario or --config is required")?),
        };
        if let Some(s) = self.scenario {
            cfg.scenario = s;
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.h = self.h.or(cfg.h);
        cfg.dx = self.dx.or(cfg.dx);
        cfg.beta = self.beta.unwrap_or(cfg.beta);
        cfg.nu = self.nu.unwrap_or(cfg.nu);
        cfg.desert.f_r = self.fr.unwrap_or(cfg.desert.f_r);
        cfg.smooth_l = self.smooth_l.or(cfg.smooth_l);
        cfg.regularize &= !self.no_regularize;
        cfg.alternate_directions &= !self.no_alt;
        cfg.t_end = self.t_end.or(cfg.t_end);
        cfg.snapshot_every = self.snapshot_every.or(cfg.snapshot_every);
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        cfg.mask = self.mask.clone().or(cfg.mask);
        cfg.frames = self.frames.clone().or(cfg.frames);
        cfg.init = self.init.clone().or(cfg.init);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = cli.config().and_then(|cfg| Ok(kpp::scenario::run(&cfg)?));
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
