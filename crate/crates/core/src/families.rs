//! Named potentials and profiles: equality cases, extremal approximations,
//! random concave profiles and unconditional potentials on the orthant.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convex::{BoxGridFunction, ConvexGridFunction, GridFunction};
use crate::error::{Error, Result};
use crate::inequalities::{truncation_radius, UnconditionalPotential};
use crate::measures::{measure_from_profile, normalize, profile, LogConcaveMeasure, Profile};

pub const MIN_SAMPLES: usize = 65;
/// Slopes of a random profile.
pub const RANDOM_PROFILE_CELLS: usize = 256;
/// Smallest `t` the unconditional box is sized for.
pub const UNCONDITIONAL_T_MIN: f64 = 0.25;

const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `x²/2`.
    Gaussian,
    /// `|x| + log 2`.
    Laplace,
    /// `1 + x` on `[-1, ∞)`.
    ShiftedExponential,
    /// `|x|^p / p`.
    Power {
        p: f64,
    },
    /// `0` on `[-1, 1]`, `+∞` outside.
    UniformIndicator,
    /// `½ min(t/ε, 1, (1-t)/ε)`.
    TrapezoidProfile {
        eps: f64,
    },
    /// `min(t, (1-ε)(1-t)/ε)`.
    LinearCapProfile {
        eps: f64,
    },
    RandomProfile {
        seed: u64,
        symmetric: bool,
    },
    /// `x₁ + … + xₙ` on the orthant.
    UnconditionalL1,
    /// `|x|²/2` on the orthant.
    UnconditionalGaussian,
    /// `‖x‖_p` on the orthant.
    UnconditionalLp {
        p: f64,
    },
    /// `x,value` samples of a 1D potential, or `x1,…,xn,value` on the orthant.
    CustomCsv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, samples: usize) -> Self {
        Self { lo, hi, samples }
    }

    /// Parses `lo,hi,samples`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [lo, hi, n] = parts[..] else {
            return Err(Error::Parse(format!("grid must be lo,hi,samples, got `{s}`")));
        };
        let real = |v: &str| v.parse::<f64>().map_err(|e| Error::Parse(format!("`{v}`: {e}")));
        let samples = n.parse::<usize>().map_err(|e| Error::Parse(format!("`{n}`: {e}")))?;
        Ok(Self { lo: real(lo)?, hi: real(hi)?, samples })
    }
}

/// What a family produces.
#[derive(Debug, Clone)]
pub enum Instance {
    Potential(ConvexGridFunction),
    Profile(Profile),
    Unconditional(UnconditionalPotential),
}

/// A named family with an optional grid override.
///
/// For potentials the grid is the `x`-grid; for profiles only `samples`
/// is used (the `t`-grid has `samples - 1` cells); for unconditional families
/// `samples` is the count per axis and `hi`, if positive, the box size.
/// `dim` selects the orthant dimension (default 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub kind: FamilyKind,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub dim: Option<usize>,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind) -> Self {
        Self { kind, grid: None, dim: None }
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = Some(dim);
        self
    }

    /// Short name used in file names and reports.
    pub fn name(&self) -> String {
        match &self.kind {
            FamilyKind::Gaussian => "gaussian".into(),
            FamilyKind::Laplace => "laplace".into(),
            FamilyKind::ShiftedExponential => "shifted_exponential".into(),
            FamilyKind::Power { p } => format!("power_p{p}"),
            FamilyKind::UniformIndicator => "uniform_indicator".into(),
            FamilyKind::TrapezoidProfile { eps } => format!("trapezoid_profile_eps{eps}"),
            FamilyKind::LinearCapProfile { eps } => format!("linear_cap_profile_eps{eps}"),
            FamilyKind::RandomProfile { seed, symmetric } => {
                format!("random_profile_{}{seed}", if *symmetric { "sym_" } else { "" })
            }
            FamilyKind::UnconditionalL1 => format!("unconditional_l1_n{}", self.dim.unwrap_or(2)),
            FamilyKind::UnconditionalGaussian => format!("unconditional_gaussian_n{}", self.dim.unwrap_or(2)),
            FamilyKind::UnconditionalLp { p } => format!("unconditional_lp{p}_n{}", self.dim.unwrap_or(2)),
            FamilyKind::CustomCsv { path } => {
                format!("custom_{}", path.file_stem().and_then(|s| s.to_str()).unwrap_or("csv"))
            }
        }
    }

    /// Checks parameters and grid.
    pub fn validate(&self) -> Result<()> {
        if let Some(g) = &self.grid {
            if g.samples < MIN_SAMPLES {
                return Err(Error::InvalidGrid(format!("need at least {MIN_SAMPLES} samples, got {}", g.samples)));
            }
            if !(g.lo.is_finite() && g.hi.is_finite()) {
                return Err(Error::InvalidGrid("grid bounds must be finite".into()));
            }
            if !self.is_unconditional() && g.hi <= g.lo {
                return Err(Error::InvalidGrid(format!("need lo < hi, got [{}, {}]", g.lo, g.hi)));
            }
        }
        match &self.kind {
            FamilyKind::Power { p } | FamilyKind::UnconditionalLp { p } if !(*p >= 1.0 && p.is_finite()) => {
                Err(Error::InvalidParameter(format!("p must be ≥ 1, got {p}")))
            }
            FamilyKind::TrapezoidProfile { eps } | FamilyKind::LinearCapProfile { eps }
                if !(*eps > 0.0 && *eps < 0.5) =>
            {
                Err(Error::InvalidParameter(format!("ε must lie in (0, 1/2), got {eps}")))
            }
            _ if self.is_unconditional() && !matches!(self.dim.unwrap_or(2), 2 | 3) => {
                Err(Error::InvalidParameter(format!("dim must be 2 or 3, got {}", self.dim.unwrap_or(2))))
            }
            _ => Ok(()),
        }
    }

    pub fn is_unconditional(&self) -> bool {
        matches!(
            self.kind,
            FamilyKind::UnconditionalL1 | FamilyKind::UnconditionalGaussian | FamilyKind::UnconditionalLp { .. }
        )
    }

    pub fn is_profile(&self) -> bool {
        matches!(
            self.kind,
            FamilyKind::TrapezoidProfile { .. }
                | FamilyKind::LinearCapProfile { .. }
                | FamilyKind::RandomProfile { .. }
        )
    }

    fn potential_grid(&self, default: GridSpec) -> GridSpec {
        self.grid.unwrap_or(default)
    }

    fn profile_cells(&self, default: usize) -> usize {
        self.grid.map_or(default, |g| g.samples - 1)
    }

    pub fn instantiate(&self) -> Result<Instance> {
        self.validate()?;
        let pot = |g: GridSpec, f: &dyn Fn(f64) -> f64| {
            let g = self.potential_grid(g);
            ConvexGridFunction::from_fn(g.lo, g.hi, g.samples, f).map(Instance::Potential)
        };
        let cells = |default: usize| self.profile_cells(default);
        match &self.kind {
            FamilyKind::Gaussian => pot(GridSpec::new(-10.0, 10.0, 8193), &|x| x * x / 2.0),
            FamilyKind::Laplace => pot(GridSpec::new(-40.0, 40.0, 16001), &|x| x.abs() + std::f64::consts::LN_2),
            FamilyKind::ShiftedExponential => {
                pot(GridSpec::new(-2.0, 40.0, 8401), &|x| if x < -1.0 - 1e-12 { INF } else { 1.0 + x })
            }
            FamilyKind::Power { p } => {
                let p = *p;
                let half = power_half_width(p);
                pot(GridSpec::new(-half, half, 16001), &|x| x.abs().powf(p) / p)
            }
            FamilyKind::UniformIndicator => {
                pot(GridSpec::new(-2.0, 2.0, 4001), &|x| if x.abs() > 1.0 + 1e-12 { INF } else { 0.0 })
            }
            FamilyKind::TrapezoidProfile { eps } => Ok(Instance::Profile(trapezoid_profile(*eps, cells(4000))?)),
            FamilyKind::LinearCapProfile { eps } => Ok(Instance::Profile(linear_cap_profile(*eps, cells(4000))?)),
            FamilyKind::RandomProfile { seed, symmetric } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(Instance::Profile(random_profile(&mut rng, *symmetric)?))
            }
            FamilyKind::UnconditionalL1 => self.orthant(|x| x.iter().sum()),
            FamilyKind::UnconditionalGaussian => self.orthant(|x| x.iter().map(|v| v * v).sum::<f64>() / 2.0),
            FamilyKind::UnconditionalLp { p } => {
                let p = *p;
                self.orthant(move |x| x.iter().map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p))
            }
            FamilyKind::CustomCsv { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
                let header_fields = text.lines().next().map_or(0, |l| l.split(',').count());
                if header_fields > 2 {
                    Ok(Instance::Unconditional(UnconditionalPotential::new(BoxGridFunction::from_csv(&text)?)?))
                } else {
                    Ok(Instance::Potential(ConvexGridFunction::new(GridFunction::from_csv(&text)?)?))
                }
            }
        }
    }

    fn orthant(&self, v: impl Fn(&[f64]) -> f64) -> Result<Instance> {
        let n = self.dim.unwrap_or(2);
        let samples = self.grid.map_or(if n == 2 { 1025 } else { 257 }, |g| g.samples);
        let r = match self.grid {
            Some(g) if g.hi > 0.0 => g.hi,
            _ => truncation_radius(
                |s| {
                    let mut e1 = vec![0.0; n];
                    e1[0] = s;
                    v(&e1)
                },
                UNCONDITIONAL_T_MIN,
            )?,
        };
        Ok(Instance::Unconditional(UnconditionalPotential::from_fn(n, r, samples, v)?))
    }

    /// The 1D potential of this family; profile families go through the
    /// reconstruction of their measure.
    pub fn potential(&self) -> Result<ConvexGridFunction> {
        match self.instantiate()? {
            Instance::Potential(v) => Ok(v),
            Instance::Profile(f) => Ok(measure_from_profile(&f)?.potential().clone()),
            Instance::Unconditional(_) => Err(self.wrong_kind("a 1D potential")),
        }
    }

    pub fn measure(&self) -> Result<LogConcaveMeasure> {
        match self.instantiate()? {
            Instance::Potential(v) => normalize(&v),
            Instance::Profile(f) => measure_from_profile(&f),
            Instance::Unconditional(_) => Err(self.wrong_kind("a 1D measure")),
        }
    }

    pub fn profile(&self) -> Result<Profile> {
        match self.instantiate()? {
            Instance::Potential(v) => profile(&normalize(&v)?),
            Instance::Profile(f) => Ok(f),
            Instance::Unconditional(_) => Err(self.wrong_kind("a profile")),
        }
    }

    pub fn unconditional(&self) -> Result<UnconditionalPotential> {
        match self.instantiate()? {
            Instance::Unconditional(u) => Ok(u),
            _ => Err(self.wrong_kind("an orthant potential")),
        }
    }

    fn wrong_kind(&self, what: &str) -> Error {
        Error::InvalidParameter(format!("family {} does not provide {what}", self.name()))
    }
}

/// Half-width where `|x|^p/p` and the conjugate `|y|^q/q` on the slope range
/// both reach 40.
fn power_half_width(p: f64) -> f64 {
    let primal = (40.0 * p).powf(1.0 / p);
    let dual = if p > 1.0 {
        let q = p / (p - 1.0);
        (40.0 * q).powf(1.0 / q).powf(1.0 / (p - 1.0))
    } else {
        0.0
    };
    1.1 * primal.max(dual)
}

/// `½ min(t/ε, 1, (1-t)/ε)`, which tends to the constant 1/2.
pub fn trapezoid_profile(eps: f64, cells: usize) -> Result<Profile> {
    Profile::from_fn(cells, |t| 0.5 * (t / eps).min(1.0).min((1.0 - t) / eps))
}

/// `min(t, (1-ε)(1-t)/ε)`, which tends to `t`.
pub fn linear_cap_profile(eps: f64, cells: usize) -> Result<Profile> {
    Profile::from_fn(cells, |t| t.min((1.0 - eps) * (1.0 - t) / eps))
}

/// Random concave profile on [`RANDOM_PROFILE_CELLS`] cells.
///
/// The slopes are uniform samples sorted in decreasing order and shifted to
/// mean zero, then integrated from `f(0) = 0`. The symmetric variant sorts
/// half as many samples and mirrors them with opposite sign.
pub fn random_profile(rng: &mut impl Rng, symmetric: bool) -> Result<Profile> {
    let n = RANDOM_PROFILE_CELLS;
    let slopes: Vec<f64> = if symmetric {
        let mut half: Vec<f64> = (0..n / 2).map(|_| rng.gen::<f64>()).collect();
        half.sort_by(|a, b| b.total_cmp(a));
        let mirror: Vec<f64> = half.iter().rev().map(|s| -s).collect();
        half.into_iter().chain(mirror).collect()
    } else {
        let mut s: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        let mean = s.iter().sum::<f64>() / n as f64;
        s.iter().map(|v| v - mean).collect()
    };
    let h = 1.0 / n as f64;
    let mut values = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    values.push(0.0);
    for s in &slopes[..n - 1] {
        acc += s * h;
        values.push(acc);
    }
    values.push(0.0);
    Profile::new(values)
}
