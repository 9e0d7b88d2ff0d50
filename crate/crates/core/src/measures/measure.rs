use serde::{Deserialize, Serialize};

use crate::convex::grid::ConvexGridFunction;
use crate::error::{Error, Result};
use crate::measures::quantile::{t_mid, QuantileMeasure, DEFAULT_QUANTILE_RESOLUTION};
use crate::quadrature::{exp_linear_cell, simpson};

/// Densities below this fraction of the maximum are cut from the support.
pub const TRUNCATION_RATIO: f64 = 1e-16;
/// Boundary density (relative to the maximum) treated as vanishing.
pub const BOUNDARY_DENSITY_RATIO: f64 = 1e-10;

/// The probability measure `e^{-V} dx / Z` for a convex grid potential `V`.
///
/// The cumulative distribution is tabulated on the support nodes from the
/// exact cell masses of the log-linear interpolant of the density. Quantiles
/// invert that interpolant inside each cell, which is exact for piecewise
/// linear potentials.
#[derive(Debug, Clone)]
pub struct LogConcaveMeasure {
    potential: ConvexGridFunction,
    log_normalizer: f64,
    /// Inclusive node range of the support.
    support: (usize, usize),
    /// Cumulative mass at the support nodes, from 0 to 1.
    cdf: Vec<f64>,
    /// Normalization of the log-linear interpolant, `log` scale.
    log_cell_normalizer: f64,
    vanishes: (bool, bool),
}

/// JSON sidecar written next to the potential CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSidecar {
    pub log_normalizer: f64,
    pub support: [f64; 2],
    pub essentially_continuous: bool,
}

/// Builds the normalized measure of a convex potential.
pub fn normalize(v: &ConvexGridFunction) -> Result<LogConcaveMeasure> {
    let (a, b) = v.finite_window();
    if b < a + 2 {
        return Err(Error::NoMass);
    }
    let vals = v.values();
    let vmin = vals[a..=b].iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = |i: usize| (-(vals[i] - vmin)).exp();
    let (mut lo, mut hi) = (a, b);
    while lo < hi && ratio(lo) < TRUNCATION_RATIO {
        lo += 1;
    }
    while hi > lo && ratio(hi) < TRUNCATION_RATIO {
        hi -= 1;
    }
    if hi < lo + 2 {
        return Err(Error::NoMass);
    }
    let h = v.step();
    let dens: Vec<f64> = (lo..=hi).map(ratio).collect();
    let mass = simpson(&dens, h);
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::NoMass);
    }
    let log_normalizer = mass.ln() - vmin;

    let mut cdf = Vec::with_capacity(hi - lo + 1);
    let mut acc = 0.0;
    cdf.push(0.0);
    for i in lo..hi {
        acc += exp_linear_cell(vals[i] - vmin, vals[i + 1] - vmin, h);
        cdf.push(acc);
    }
    let total = acc;
    for c in cdf.iter_mut() {
        *c /= total;
    }
    let last = cdf.len() - 1;
    cdf[last] = 1.0;

    let end_ok =
        |idx: usize, trimmed: bool, grid_end: bool| trimmed || grid_end || ratio(idx) <= BOUNDARY_DENSITY_RATIO;
    let vanishes = (end_ok(lo, lo > a, lo == 0), end_ok(hi, hi < b, hi == v.len() - 1));

    Ok(LogConcaveMeasure {
        potential: v.clone(),
        log_normalizer,
        support: (lo, hi),
        cdf,
        log_cell_normalizer: total.ln() - vmin,
        vanishes,
    })
}

impl LogConcaveMeasure {
    pub fn potential(&self) -> &ConvexGridFunction {
        &self.potential
    }

    /// `log Z` with `Z = ∫ e^{-V} dx`.
    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    pub fn normalizer(&self) -> f64 {
        self.log_normalizer.exp()
    }

    /// Support endpoints.
    pub fn support(&self) -> (f64, f64) {
        (self.potential.x(self.support.0), self.potential.x(self.support.1))
    }

    pub fn support_indices(&self) -> (usize, usize) {
        self.support
    }

    pub fn essentially_continuous(&self) -> bool {
        self.vanishes.0 && self.vanishes.1
    }

    /// Whether the density vanishes at the left and right support ends.
    pub fn vanishing_ends(&self) -> (bool, bool) {
        self.vanishes
    }

    /// `∫₀¹ V'(F⁻¹(t)) dt` integrated exactly against the cell masses.
    pub fn moment_mean(&self) -> f64 {
        self.moment_expect(|s| s)
    }

    /// `∫ g dν` for the moment measure `ν`, which puts each cell's mass on
    /// that cell's slope.
    pub fn moment_expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        let v = self.potential.values();
        let h = self.potential.step();
        let lo = self.support.0;
        self.cdf
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1] > w[0])
            .map(|(c, w)| g((v[lo + c + 1] - v[lo + c]) / h) * (w[1] - w[0]))
            .sum()
    }

    pub fn cdf_table(&self) -> &[f64] {
        &self.cdf
    }

    /// Density at grid node `i`.
    pub fn density(&self, i: usize) -> f64 {
        (-self.potential.values()[i] - self.log_normalizer).exp()
    }

    /// Density at node `i` normalized consistently with the CDF table.
    fn cell_density(&self, i: usize) -> f64 {
        (-self.potential.values()[i] - self.log_cell_normalizer).exp()
    }

    /// `∫ g(x, i) dη` by Simpson over the support nodes.
    pub fn integrate(&self, g: impl Fn(f64, usize) -> f64) -> f64 {
        let (lo, hi) = self.support;
        let vals: Vec<f64> = (lo..=hi)
            .map(|i| {
                let d = self.density(i);
                if d == 0.0 {
                    0.0
                } else {
                    g(self.potential.x(i), i) * d
                }
            })
            .collect();
        simpson(&vals, self.potential.step())
    }

    /// Total mass by quadrature; equals 1 up to discretization.
    pub fn mass(&self) -> f64 {
        self.integrate(|_, _| 1.0)
    }

    /// Relative entropy `H(η) = -log Z - ∫ V dη`.
    pub fn entropy(&self) -> f64 {
        let v = self.potential.values();
        -self.log_normalizer - self.integrate(|_, i| v[i])
    }

    /// `∫ ρ log ρ dx` evaluated directly.
    pub fn entropy_direct(&self) -> f64 {
        let v = self.potential.values();
        self.integrate(|_, i| -v[i] - self.log_normalizer)
    }

    /// Left derivative of the potential at node `i`.
    pub fn left_derivative(&self, i: usize) -> f64 {
        self.potential.left_derivative(i)
    }

    /// Position of the generalized inverse `F⁻¹(t)`: support cell and offset in `[0, 1]`.
    fn locate_quantile(&self, t: f64) -> (usize, f64) {
        let n = self.cdf.len();
        let j = self.cdf.partition_point(|&c| c < t).clamp(1, n - 1);
        let cell = j - 1;
        let (c0, c1) = (self.cdf[cell], self.cdf[cell + 1]);
        let m = c1 - c0;
        let u = if m > 0.0 { ((t - c0) / m).clamp(0.0, 1.0) } else { 1.0 };
        let v = self.potential.values();
        let g = self.support.0 + cell;
        let sigma = v[g + 1] - v[g];
        let theta = if sigma.abs() < 1e-9 { u } else { (-(u * (-sigma).exp_m1()).ln_1p() / sigma).clamp(0.0, 1.0) };
        (cell, theta)
    }

    /// Generalized inverse of the distribution function.
    pub fn quantile(&self, t: f64) -> f64 {
        let (cell, theta) = self.locate_quantile(t);
        let g = self.support.0 + cell;
        self.potential.x(g) + theta * self.potential.step()
    }

    /// Distribution function at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let h = self.potential.step();
        let u = (x - lo) / h;
        let cell = (u.floor() as usize).min(self.cdf.len() - 2);
        let theta = u - cell as f64;
        let v = self.potential.values();
        let g = self.support.0 + cell;
        let (c0, c1) = (self.cdf[cell], self.cdf[cell + 1]);
        let sigma = v[g + 1] - v[g];
        let frac = if sigma.abs() < 1e-9 { theta } else { (-sigma * theta).exp_m1() / (-sigma).exp_m1() };
        c0 + frac * (c1 - c0)
    }

    /// Density at the quantile `F⁻¹(t)`, interpolated log-linearly.
    pub fn density_at_quantile(&self, t: f64) -> f64 {
        let (cell, theta) = self.locate_quantile(t);
        let g = self.support.0 + cell;
        let v = self.potential.values();
        let sigma = v[g + 1] - v[g];
        self.cell_density(g) * (-sigma * theta).exp()
    }

    /// Left derivative of `V` at `F⁻¹(t)`, i.e. the slope of the cell holding it.
    pub fn potential_derivative_at_quantile(&self, t: f64) -> f64 {
        let (cell, _) = self.locate_quantile(t);
        let g = self.support.0 + cell;
        let v = self.potential.values();
        (v[g + 1] - v[g]) / self.potential.step()
    }

    /// Moment measure `∇V # η` as a quantile table of the default resolution.
    pub fn moment_measure(&self) -> QuantileMeasure {
        self.moment_measure_with(DEFAULT_QUANTILE_RESOLUTION)
    }

    /// Moment measure with `resolution` midpoint quantiles.
    pub fn moment_measure_with(&self, resolution: usize) -> QuantileMeasure {
        let values = (0..resolution).map(|i| self.potential_derivative_at_quantile(t_mid(i, resolution))).collect();
        QuantileMeasure::new(values).expect("finite slopes")
    }

    /// Quantile table of the measure itself.
    pub fn quantiles(&self, resolution: usize) -> QuantileMeasure {
        let values = (0..resolution).map(|i| self.quantile(t_mid(i, resolution))).collect();
        QuantileMeasure::new(values).expect("finite quantiles")
    }

    pub fn sidecar(&self) -> MeasureSidecar {
        let (a, b) = self.support();
        MeasureSidecar {
            log_normalizer: self.log_normalizer,
            support: [a, b],
            essentially_continuous: self.essentially_continuous(),
        }
    }
}

/// Density vanishes at both ends of the support.
pub fn essential_continuity_check(m: &LogConcaveMeasure) -> bool {
    m.essentially_continuous()
}

/// Relative entropy of the measure.
pub fn entropy(m: &LogConcaveMeasure) -> f64 {
    m.entropy()
}

/// Moment measure at the default quantile resolution.
pub fn moment_measure(m: &LogConcaveMeasure) -> QuantileMeasure {
    m.moment_measure()
}
