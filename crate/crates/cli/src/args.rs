use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use santalo_core::families::GridSpec;

use crate::CliError;

pub const DEFAULT_OUT: &str = "santalo-out";
pub const DEFAULT_PAIRS: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "santalo-lab", version, about = "Batch verifier runs over named potential and profile families")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub args: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Biconjugation check of a potential.
    Transform,
    /// Functional Santaló product.
    Product,
    /// Entropy–transport deficit of two measures.
    Et,
    /// Profile form of the entropy–transport inequality.
    Profile,
    /// Weighted product inequality on [0, 1/2].
    Weighted,
    /// Unconditional potential on the orthant.
    Uncond,
    /// Randomized battery covering every verifier.
    Suite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Product => "product",
            Command::Et => "et",
            Command::Profile => "profile",
            Command::Weighted => "weighted",
            Command::Uncond => "uncond",
            Command::Suite => "suite",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Family kind, e.g. laplace, power, trapezoid_profile.
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// Second family for two-sided commands (defaults to --family).
    #[arg(long, global = true)]
    pub family2: Option<String>,
    /// Grid override as lo,hi,samples.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Constant of the inequality, or `auto`.
    #[arg(long, global = true)]
    pub c: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Fixed pass tolerance instead of the error-based one.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// ε for profile families; a comma list runs a sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Exponent for power families; a comma list runs a sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Dimension of unconditional families (2 or 3).
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Symmetric random profiles.
    #[arg(long, global = true)]
    pub symmetric: bool,
    /// Reflect the second profile about 1/2.
    #[arg(long, global = true)]
    pub mirror: bool,
    /// Input file for custom_csv.
    #[arg(long, global = true)]
    pub path: Option<PathBuf>,
    /// Random pairs per battery in `suite`.
    #[arg(long, global = true)]
    pub pairs: Option<usize>,
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ConstantValue {
    Real(f64),
    Word(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    family: Option<String>,
    family2: Option<String>,
    grid: Option<String>,
    c: Option<ConstantValue>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    tolerance: Option<f64>,
    eps: Option<OneOrMany>,
    p: Option<OneOrMany>,
    dim: Option<usize>,
    symmetric: Option<bool>,
    mirror: Option<bool>,
    path: Option<PathBuf>,
    pairs: Option<usize>,
}

/// Flags merged with the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub family: Option<String>,
    pub family2: Option<String>,
    pub grid: Option<GridSpec>,
    pub c: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub tolerance: Option<f64>,
    pub eps: Vec<f64>,
    pub p: Vec<f64>,
    pub dim: Option<usize>,
    pub symmetric: bool,
    pub mirror: bool,
    pub path: Option<PathBuf>,
    pub pairs: usize,
}

fn parse_constant(s: &str) -> Result<Option<f64>, CliError> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(c) if c > 0.0 && c.is_finite() => Ok(Some(c)),
        _ => Err(CliError::Spec(format!("--c must be a positive real or `auto`, got `{s}`"))),
    }
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Spec(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Spec(format!("config {}: {e}", path.display())))
}

impl RunArgs {
    pub fn resolve(self) -> Result<Settings, CliError> {
        let cfg = match &self.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        let c = match (self.c, cfg.c) {
            (Some(s), _) | (None, Some(ConstantValue::Word(s))) => parse_constant(&s)?,
            (None, Some(ConstantValue::Real(v))) => parse_constant(&v.to_string())?,
            (None, None) => None,
        };
        let grid = self.grid.or(cfg.grid).map(|g| GridSpec::parse(&g)).transpose()?;
        let pick = |flag: Vec<f64>, file: Option<OneOrMany>| {
            if flag.is_empty() {
                file.map(OneOrMany::into_vec).unwrap_or_default()
            } else {
                flag
            }
        };
        let tolerance = self.tolerance.or(cfg.tolerance);
        if let Some(t) = tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(CliError::Spec(format!("--tolerance must be a nonnegative real, got {t}")));
            }
        }
        Ok(Settings {
            family: self.family.or(cfg.family),
            family2: self.family2.or(cfg.family2),
            grid,
            c,
            seed: self.seed.or(cfg.seed).unwrap_or(0),
            out: self.out.or(cfg.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            tolerance,
            eps: pick(self.eps, cfg.eps),
            p: pick(self.p, cfg.p),
            dim: self.dim.or(cfg.dim),
            symmetric: self.symmetric || cfg.symmetric.unwrap_or(false),
            mirror: self.mirror || cfg.mirror.unwrap_or(false),
            path: self.path.or(cfg.path),
            pairs: self.pairs.or(cfg.pairs).unwrap_or(DEFAULT_PAIRS),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> (Command, Settings) {
        let cli = Cli::try_parse_from(std::iter::once("santalo-lab").chain(args.iter().copied())).unwrap();
        (cli.command, cli.args.resolve().unwrap())
    }

    #[test]
    fn flags_after_the_subcommand() {
        let (cmd, s) =
            parse(&["et", "--family", "laplace", "--family2", "trapezoid_profile", "--eps", "0.2,0.05", "--c", "4"]);
        assert_eq!(cmd, Command::Et);
        assert_eq!(s.family.as_deref(), Some("laplace"));
        assert_eq!(s.eps, vec![0.2, 0.05]);
        assert_eq!(s.c, Some(4.0));
        assert_eq!(s.out, PathBuf::from(DEFAULT_OUT));
    }

    #[test]
    fn negative_grid_bounds() {
        let (_, s) = parse(&["product", "--family", "gaussian", "--grid", "-5,5,1025", "--c", "auto"]);
        assert_eq!(s.grid, Some(GridSpec::new(-5.0, 5.0, 1025)));
        assert_eq!(s.c, None);
    }

    #[test]
    fn config_is_merged_and_flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "family = \"power\"\np = [1.5, 3.0]\nc = 2.5\nseed = 9\nmirror = true\n").unwrap();
        let (_, s) = parse(&["product", "--config", path.to_str().unwrap(), "--seed", "4"]);
        assert_eq!(s.family.as_deref(), Some("power"));
        assert_eq!(s.p, vec![1.5, 3.0]);
        assert_eq!(s.c, Some(2.5));
        assert_eq!(s.seed, 4);
        assert!(s.mirror);
    }

    #[test]
    fn bad_values_are_spec_errors() {
        let cli = Cli::try_parse_from(["santalo-lab", "product", "--c", "zero"]).unwrap();
        assert!(matches!(cli.args.resolve(), Err(CliError::Spec(_))));
        let cli = Cli::try_parse_from(["santalo-lab", "product", "--grid", "1,2"]).unwrap();
        assert!(matches!(cli.args.resolve(), Err(CliError::Core(_))));
    }
}
