//! Command-line front end: argument parsing, experiment dispatch and table
//! output.

pub mod commands;
pub mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::constants::FracParams;
use crate::discrete::DeltaRule;
use crate::error::EvalError;
use crate::quad::QuadConfig;

use commands::LimitMode;
pub use table::{Cell, Format, Row, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn from_eval(e: EvalError) -> Self {
        match e {
            EvalError::Params(_) | EvalError::UnknownFunction(_) | EvalError::Unsupported(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fracplap", version, about = "Evaluate the fractional p-Laplacian and related quantities")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GlobalArgs {
    /// Dimensions (comma-separated).
    #[arg(long, global = true, value_delimiter = ',', default_value = "1")]
    pub n: Vec<usize>,
    /// Fractional orders in (0, 1) (comma-separated).
    #[arg(long, global = true, value_delimiter = ',', default_value = "0.5")]
    pub s: Vec<f64>,
    /// Powers in (1, ∞) (comma-separated).
    #[arg(long, global = true, value_delimiter = ',', default_value = "2")]
    pub p: Vec<f64>,
    /// Catalog function: gaussian, cosine, rational_bump, shifted_gaussian, constant.
    #[arg(long, global = true)]
    pub function: Option<String>,
    /// Evaluation points: `;` between points, `,` between coordinates.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 64)]
    pub hermite_nodes: usize,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Seed for randomised samples.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Normalisation constants and their consistency residuals.
    Constants,
    /// All four representations at each point and parameter pair.
    Compare {
        /// Extra random (x, s, p) samples drawn with --seed.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Limits s → 1 and p → 2.
    Limits {
        #[arg(long, value_enum, default_value = "s-to1")]
        mode: LimitMode,
        /// Values of s (s-to1) or p (p-to2); defaults 0.9,0.99,0.999 and 2.2,2.05,2.01.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
    },
    /// Lattice scheme refinement against the continuum operator.
    Discrete {
        #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1")]
        h: Vec<f64>,
        /// `power:κ` for δ = h^κ, or `fixed:δ`.
        #[arg(long, default_value = "power:1")]
        delta: String,
        /// Stencil half-width B.
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Spectral and restricted operators on intervals (0, L).
    Spectral {
        #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
        lengths: Vec<f64>,
        /// Evaluation point; the midpoint when absent.
        #[arg(long)]
        position: Option<f64>,
        /// Radius of the default bump.
        #[arg(long, default_value_t = 1.5)]
        bump_radius: f64,
    },
    /// Three forms of the Gagliardo seminorm.
    Seminorm,
    /// Lattice weights K_β.
    WeightsExport {
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        #[arg(long, default_value = "power:1")]
        delta: String,
        #[arg(long)]
        radius: Option<usize>,
    },
}

/// A fully parsed invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub global: GlobalArgs,
}

impl From<Cli> for RunConfig {
    fn from(c: Cli) -> Self {
        Self {
            command: c.command,
            global: c.global,
        }
    }
}

pub fn parse_points(text: &str, n: usize) -> Result<Vec<Vec<f64>>, CliError> {
    text.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|pt| {
            let coords: Result<Vec<f64>, _> = pt.split(',').map(|c| c.trim().parse::<f64>()).collect();
            let coords = coords.map_err(|e| CliError::Config(format!("bad point {pt:?}: {e}")))?;
            if coords.len() != n {
                return Err(CliError::Config(format!("point {pt:?} has {} coordinates, expected {n}", coords.len())));
            }
            Ok(coords)
        })
        .collect()
}

pub fn parse_delta(text: &str) -> Result<DeltaRule, CliError> {
    let bad = || CliError::Config(format!("delta rule {text:?} is not power:κ or fixed:δ"));
    let (kind, v) = text.split_once(':').ok_or_else(bad)?;
    let v: f64 = v.parse().map_err(|_| bad())?;
    match kind {
        "power" => Ok(DeltaRule::Power(v)),
        "fixed" if v >= 0.0 => Ok(DeltaRule::Fixed(v)),
        _ => Err(bad()),
    }
}

impl RunConfig {
    /// Every `(n, s, p)` combination, validated before any computation.
    pub fn params_grid(&self) -> Result<Vec<FracParams>, CliError> {
        let g = &self.global;
        let mut out = Vec::new();
        for &n in &g.n {
            for &s in &g.s {
                for &p in &g.p {
                    out.push(FracParams::new(n, s, p).map_err(|e| CliError::Config(e.to_string()))?);
                }
            }
        }
        Ok(out)
    }

    pub fn quad_config(&self) -> Result<QuadConfig, CliError> {
        let cfg = QuadConfig {
            hermite_nodes: self.global.hermite_nodes,
            ..QuadConfig::with_tolerance(self.global.tol)
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    fn single_n(&self) -> Result<usize, CliError> {
        match self.global.n.as_slice() {
            [n] => Ok(*n),
            _ => Err(CliError::Config("this command takes a single --n".into())),
        }
    }

    fn points(&self, n: usize, default_1d: &str) -> Result<Vec<Vec<f64>>, CliError> {
        match &self.global.points {
            Some(t) => parse_points(t, n),
            None if n == 1 => parse_points(default_1d, 1),
            None => parse_points(&default_1d.split(';').map(|x| format!("{x},0")).collect::<Vec<_>>().join(";"), n),
        }
    }

    pub fn run(&self) -> Result<Table, CliError> {
        let grid = self.params_grid()?;
        let cfg = self.quad_config()?;
        let fname = self.global.function.as_deref();
        match &self.command {
            Command::Constants => Ok(commands::cmd_constants(&grid)),
            Command::Compare { samples } => {
                let n = self.single_n()?;
                let u = commands::function_for(fname, "gaussian", n)?;
                let pts = self.points(n, "0;0.5;1")?;
                Ok(commands::cmd_compare(&u, &pts, &grid, *samples, self.global.seed, &cfg))
            }
            Command::Limits { mode, grid: values } => {
                let n = self.single_n()?;
                let u = commands::function_for(fname, "gaussian", n)?;
                let pts = self.points(n, "0.5")?;
                let values = if values.is_empty() {
                    match mode {
                        LimitMode::STo1 => vec![0.9, 0.99, 0.999],
                        LimitMode::PTo2 => vec![2.2, 2.05, 2.01],
                    }
                } else {
                    values.clone()
                };
                commands::cmd_limits(&u, &pts, &grid, *mode, &values, &cfg)
            }
            Command::Discrete { h, delta, radius } => {
                let n = self.single_n()?;
                let u = commands::function_for(fname, "cosine", n)?;
                let pts = self.points(n, "0")?;
                if h.iter().any(|v| !(*v > 0.0)) {
                    return Err(CliError::Config("lattice spacings must be positive".into()));
                }
                Ok(commands::cmd_discrete(&u, &pts, &grid, h, parse_delta(delta)?, *radius, &cfg))
            }
            Command::Spectral {
                lengths,
                position,
                bump_radius,
            } => {
                let f = fname.map(|name| commands::function_for(Some(name), name, 1)).transpose()?;
                commands::cmd_spectral(f.as_ref(), *bump_radius, lengths, *position, &grid, &cfg)
            }
            Command::Seminorm => {
                let n = self.single_n()?;
                let u = commands::function_for(fname, "gaussian", n)?;
                Ok(commands::cmd_seminorm(&u, &grid, &cfg))
            }
            Command::WeightsExport { h, delta, radius } => {
                commands::cmd_weights_export(&grid, *h, parse_delta(delta)?, *radius, &cfg)
            }
        }
    }

    /// Runs the command and writes the table to `--output` or `out`.
    pub fn execute<W: std::io::Write>(&self, out: W) -> Result<(), CliError> {
        let table = self.run()?;
        match &self.global.output {
            Some(path) => table.write(std::fs::File::create(path)?, self.global.format)?,
            None => table.write(out, self.global.format)?,
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_of(args: &[&str]) -> RunConfig {
        Cli::try_parse_from(std::iter::once("fracplap").chain(args.iter().copied())).unwrap().into()
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = cfg_of(&["discrete", "--s", "0.25,0.75", "--p", "3", "--h", "0.5,0.25", "--delta", "fixed:0"]);
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn invalid_parameters_rejected_before_work() {
        let c = cfg_of(&["compare", "--s", "1.2"]);
        let e = c.run().unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let c = cfg_of(&["compare", "--function", "nope"]);
        assert_eq!(c.run().unwrap_err().exit_code(), 2);
        assert!(Cli::try_parse_from(["fracplap", "frobnicate"]).is_err());
    }

    #[test]
    fn points_and_delta_parsing() {
        assert_eq!(parse_points("0,1;-2,3", 2).unwrap(), vec![vec![0.0, 1.0], vec![-2.0, 3.0]]);
        assert!(parse_points("0,1", 1).is_err());
        assert_eq!(parse_delta("power:1").unwrap(), DeltaRule::Power(1.0));
        assert_eq!(parse_delta("fixed:0").unwrap(), DeltaRule::Fixed(0.0));
        assert!(parse_delta("h").is_err());
    }

    #[test]
    fn constants_row_at_half() {
        let t = cfg_of(&["constants", "--s", "0.5", "--p", "2"]).run().unwrap();
        let r = &t.rows[0];
        let Some(Cell::Num(c1)) = r.get("c1") else { panic!() };
        let Some(Cell::Num(c4)) = r.get("c4") else { panic!() };
        assert!((c1 - 1.0 / std::f64::consts::PI).abs() < 1e-14);
        assert!((c4 - 1.0 / std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn compare_flags_hypothesis_rows() {
        let t = cfg_of(&["compare", "--points", "0", "--s", "0.5", "--p", "1.3"]).run().unwrap();
        assert_eq!(t.rows[0].get("status"), Some(&Cell::Text("skipped: hypothesis".into())));
    }

    #[test]
    fn discrete_annotates_divergence() {
        let t = cfg_of(&["discrete", "--s", "0.75", "--p", "3", "--delta", "fixed:0", "--h", "0.5"]).run().unwrap();
        assert_eq!(t.rows[0].get("status"), Some(&Cell::Text("weights_diverge".into())));
    }

    #[test]
    fn output_is_deterministic() {
        let c = cfg_of(&["compare", "--function", "cosine", "--points", "0;0.3", "--samples", "2", "--seed", "7"]);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        c.execute(&mut a).unwrap();
        c.execute(&mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(String::from_utf8(a).unwrap().lines().count(), 5);
    }
}
