use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ebin", version, about = "Experiments on the L² geometry of metrics over a discretized torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a preset experiment and emit its tables and checks.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Eg2,
    Eg3,
    Tori,
    Incompleteness,
    Conformal,
    Custom,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Eg2 => "eg2",
            Preset::Eg3 => "eg3",
            Preset::Tori => "tori",
            Preset::Incompleteness => "incompleteness",
            Preset::Conformal => "conformal",
            Preset::Custom => "custom",
        }
    }

    /// Preset-specific flags accepted by this preset.
    pub fn accepts(self) -> &'static [&'static str] {
        match self {
            Preset::Eg2 => &["r", "s", "t-max", "samples"],
            Preset::Eg3 => &["eps-det", "c-big", "k-max", "field-out"],
            Preset::Tori => &["s-param", "smooth-width", "steps"],
            Preset::Incompleteness => &["alpha", "beta", "samples"],
            Preset::Conformal => &["rho0", "rho1", "triples"],
            Preset::Custom => &["g0", "g1", "path"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub preset: Preset,
    /// Cells per axis, e.g. `64x64`; the number of axes is the dimension. Default 64x64.
    #[arg(long)]
    pub grid: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "s-param")]
    pub s_param: Option<f64>,
    #[arg(long = "smooth-width")]
    pub smooth_width: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long = "eps-det")]
    pub eps_det: Option<f64>,
    #[arg(long = "c-big")]
    pub c_big: Option<f64>,
    #[arg(long = "k-max")]
    pub k_max: Option<usize>,
    #[arg(long = "field-out")]
    pub field_out: Option<PathBuf>,
    #[arg(long)]
    pub rho0: Option<f64>,
    #[arg(long)]
    pub rho1: Option<f64>,
    #[arg(long)]
    pub triples: Option<usize>,
    #[arg(long)]
    pub g0: Option<PathBuf>,
    #[arg(long)]
    pub g1: Option<PathBuf>,
    #[arg(long)]
    pub path: Option<PathBuf>,
}

impl RunArgs {
    /// Names of the preset-specific flags that were given.
    pub fn given(&self) -> Vec<&'static str> {
        let flags = [
            ("r", self.r.is_some()),
            ("s", self.s.is_some()),
            ("t-max", self.t_max.is_some()),
            ("samples", self.samples.is_some()),
            ("alpha", self.alpha.is_some()),
            ("beta", self.beta.is_some()),
            ("s-param", self.s_param.is_some()),
            ("smooth-width", self.smooth_width.is_some()),
            ("steps", self.steps.is_some()),
            ("eps-det", self.eps_det.is_some()),
            ("c-big", self.c_big.is_some()),
            ("k-max", self.k_max.is_some()),
            ("field-out", self.field_out.is_some()),
            ("rho0", self.rho0.is_some()),
            ("rho1", self.rho1.is_some()),
            ("triples", self.triples.is_some()),
            ("g0", self.g0.is_some()),
            ("g1", self.g1.is_some()),
            ("path", self.path.is_some()),
        ];
        flags.iter().filter(|(_, on)| *on).map(|(n, _)| *n).collect()
    }
}

/// `64x64` → `[64, 64]`.
pub fn parse_grid(s: &str) -> Result<Vec<usize>, String> {
    let dims: Vec<usize> = s
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad grid `{s}`: expected e.g. 64x64")))
        .collect::<Result<_, _>>()?;
    if dims.is_empty() || dims.len() > 4 || dims.contains(&0) {
        return Err(format!("bad grid `{s}`: 1 to 4 positive axis sizes"));
    }
    Ok(dims)
}
