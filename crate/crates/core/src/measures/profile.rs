use crate::convex::grid::{ConvexGridFunction, GridFunction};
use crate::error::{Error, Result};
use crate::measures::measure::{normalize, LogConcaveMeasure};
use crate::quadrature::log_linear_cell;

/// Number of cells of the uniform `t`-grid used by [`profile`].
pub const DEFAULT_PROFILE_RESOLUTION: usize = 4096;
/// Sample count of the potential rebuilt by [`measure_from_profile`].
pub const DEFAULT_RECONSTRUCTION_SAMPLES: usize = 16385;
/// Concavity slack relative to `max f`.
pub const PROFILE_CONCAVITY_TOL: f64 = 1e-6;
/// Open tails of a rebuilt potential stop once `V - min V` exceeds this.
const TAIL_HEIGHT: f64 = 40.0;

/// Concave profile `f ≥ 0` on `[0, 1]`, piecewise linear on the nodes `j/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    values: Vec<f64>,
    boundary_violation: bool,
}

impl Profile {
    /// Validates nonnegativity and concavity. The boundary flag is raised when
    /// either endpoint value is nonzero.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::DegenerateProfile(format!("need at least 3 nodes, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateProfile("non-finite value".into()));
        }
        let max = values.iter().copied().fold(0.0, f64::max);
        if !(max > 0.0) {
            return Err(Error::DegenerateProfile("identically zero".into()));
        }
        let tol = PROFILE_CONCAVITY_TOL * max;
        if let Some(i) = values.iter().position(|&v| v < -tol) {
            return Err(Error::DegenerateProfile(format!("negative at node {i}")));
        }
        let values: Vec<f64> = values.into_iter().map(|v| v.max(0.0)).collect();
        let n = values.len() - 1;
        for i in 1..n {
            let d2 = values[i + 1] - 2.0 * values[i] + values[i - 1];
            if d2 > tol {
                return Err(Error::DegenerateProfile(format!("not concave at node {i}")));
            }
        }
        let boundary_violation = values[0] != 0.0 || values[n] != 0.0;
        Ok(Self { values, boundary_violation })
    }

    /// Samples `f` at `j / cells` for `j = 0..=cells`.
    pub fn from_fn(cells: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..=cells).map(|j| f(j as f64 / cells as f64)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 / self.cells() as f64
    }

    /// True when the profile does not vanish at both endpoints.
    pub fn boundary_violation(&self) -> bool {
        self.boundary_violation
    }

    pub fn vanishes_at_ends(&self) -> bool {
        !self.boundary_violation
    }

    /// Left-difference slopes; entry `j` is the slope on `[t_{j-1}, t_j]`,
    /// entry 0 repeats the first cell.
    pub fn derivative(&self) -> Vec<f64> {
        let n = self.cells() as f64;
        let mut d: Vec<f64> = self.values.windows(2).map(|w| (w[1] - w[0]) * n).collect();
        d.insert(0, d[0]);
        d
    }

    /// Linear interpolation at `t ∈ [0, 1]`.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.cells();
        let u = (t.clamp(0.0, 1.0) * n as f64).min(n as f64);
        let j = (u.floor() as usize).min(n - 1);
        let th = u - j as f64;
        self.values[j] + th * (self.values[j + 1] - self.values[j])
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `∫₀¹ log f` of the interpolant; `-∞` only if `f` vanishes on a cell.
    pub fn log_integral(&self) -> f64 {
        let h = self.step();
        self.values.windows(2).map(|w| log_linear_cell(w[0], w[1], h)).sum()
    }

    /// `f(t) = f(1 - t)` at every node within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.cells();
        (0..=n).all(|j| (self.values[j] - self.values[n - j]).abs() <= tol)
    }

    /// Reflection `t ↦ 1 - t`.
    pub fn reflect(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { values, boundary_violation: self.boundary_violation }
    }
}

/// `∫₀¹ f₁' f₂'` for piecewise-linear profiles on possibly different grids.
pub fn derivative_product_integral(f1: &Profile, f2: &Profile) -> f64 {
    let mut acc = 0.0;
    for_each_common_cell(f1, f2, 1.0, |a, b, d1, d2| acc += d1 * d2 * (b - a));
    acc
}

/// Visits the cells of the common refinement of both grids inside `[0, upto]`
/// with the slope of each profile there.
pub fn for_each_common_cell(f1: &Profile, f2: &Profile, upto: f64, mut visit: impl FnMut(f64, f64, f64, f64)) {
    let d1 = &f1.derivative()[1..];
    let d2 = &f2.derivative()[1..];
    let (n1, n2) = (d1.len(), d2.len());
    let (mut i, mut j) = (0, 0);
    let mut t = 0.0;
    while i < n1 && j < n2 && t < upto {
        let e1 = (i + 1) as f64 / n1 as f64;
        let e2 = (j + 1) as f64 / n2 as f64;
        let e = e1.min(e2);
        visit(t, e.min(upto), d1[i], d2[j]);
        t = e;
        if e1 <= e {
            i += 1;
        }
        if e2 <= e {
            j += 1;
        }
    }
}

/// Isoperimetric profile `f = F' ∘ F⁻¹` of a 1D log-concave measure.
pub fn profile(m: &LogConcaveMeasure) -> Result<Profile> {
    profile_with(m, DEFAULT_PROFILE_RESOLUTION)
}

pub fn profile_with(m: &LogConcaveMeasure, cells: usize) -> Result<Profile> {
    let mass = m.mass();
    if (mass - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidMeasure(format!("measure not normalized: mass {mass}")));
    }
    let n = cells.max(2);
    let mut values: Vec<f64> = (0..=n).map(|j| m.density_at_quantile(j as f64 / n as f64)).collect();
    let (left, right) = m.vanishing_ends();
    if left {
        values[0] = 0.0;
    }
    if right {
        values[n] = 0.0;
    }
    Profile::new(values)
}

/// `∫ ds / f` over one cell of a linear `f` running from `a` to `b`.
fn reciprocal_cell(a: f64, b: f64, width: f64) -> f64 {
    let d = b - a;
    if d.abs() <= 1e-9 * a.abs().max(b.abs()) {
        width * 2.0 / (a + b)
    } else {
        width * (b / a).ln() / d
    }
}

/// Inverse of the profile map with the default reconstruction grid.
pub fn measure_from_profile(f: &Profile) -> Result<LogConcaveMeasure> {
    measure_from_profile_with(f, DEFAULT_RECONSTRUCTION_SAMPLES)
}

/// Rebuilds `V` with `x(t) = ∫_{1/2}^t ds/f(s)` and `V(x(t)) = -log f(t)`,
/// then resamples it on a uniform grid of `samples` points.
pub fn measure_from_profile_with(f: &Profile, samples: usize) -> Result<LogConcaveMeasure> {
    let n = f.cells();
    let vals = f.values();
    if vals[1..n].iter().any(|&v| v <= 0.0) {
        return Err(Error::DegenerateProfile("profile vanishes in the interior".into()));
    }
    let h = f.step();
    // nodes x_j for j = 1..n-1, anchored so x(1/2) = 0
    let mut xs = vec![0.0; n + 1];
    for j in 1..n - 1 {
        xs[j + 1] = xs[j] + reciprocal_cell(vals[j], vals[j + 1], h);
    }
    let anchor = {
        let u = 0.5 * n as f64;
        let j = (u.floor() as usize).clamp(1, n - 2);
        let th = u - j as f64;
        let fa = vals[j];
        let fm = fa + th * (vals[j + 1] - fa);
        xs[j] + reciprocal_cell(fa, fm, th * h)
    };
    for x in xs.iter_mut() {
        *x -= anchor;
    }
    let mut nodes: Vec<(f64, f64)> = (1..n).map(|j| (xs[j], -vals[j].ln())).collect();
    let vmin = nodes.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);

    let left_open = vals[0] == 0.0;
    let right_open = vals[n] == 0.0;
    if left_open {
        let growth = (vals[1] - vals[0]) / h;
        let (x1, v1) = nodes[0];
        let rise = TAIL_HEIGHT - (v1 - vmin);
        if rise > 0.0 {
            nodes.insert(0, (x1 - rise / growth.max(f64::MIN_POSITIVE), v1 + rise));
        }
    } else {
        let (x1, _) = nodes[0];
        nodes.insert(0, (x1 - reciprocal_cell(vals[0], vals[1], h), -vals[0].ln()));
    }
    if right_open {
        let growth = (vals[n - 1] - vals[n]) / h;
        let &(x1, v1) = nodes.last().unwrap();
        let rise = TAIL_HEIGHT - (v1 - vmin);
        if rise > 0.0 {
            nodes.push((x1 + rise / growth.max(f64::MIN_POSITIVE), v1 + rise));
        }
    } else {
        let &(x1, _) = nodes.last().unwrap();
        nodes.push((x1 + reciprocal_cell(vals[n - 1], vals[n], h), -vals[n].ln()));
    }

    let lo = nodes[0].0;
    let hi = nodes.last().unwrap().0;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::DegenerateProfile("reconstructed support is not a bounded interval".into()));
    }
    let samples = samples.max(5);
    // closed ends sit one node inside the grid so the density visibly jumps there
    let h = (hi - lo) / (samples - 1) as f64;
    let pad = |closed: bool| if closed { 1 } else { 0 };
    let (pl, pr) = (pad(!left_open), pad(!right_open));
    let glo = lo - pl as f64 * h;
    let ghi = hi + pr as f64 * h;
    let grid = GridFunction::from_fn(glo, ghi, samples + pl + pr, |x| {
        if x < lo - 0.5 * h || x > hi + 0.5 * h {
            return f64::INFINITY;
        }
        let k = nodes.partition_point(|p| p.0 < x).clamp(1, nodes.len() - 1) - 1;
        let (xa, va) = nodes[k];
        let (xb, vb) = nodes[k + 1];
        let th = ((x - xa) / (xb - xa)).clamp(0.0, 1.0);
        va + th * (vb - va)
    })?;
    let v = ConvexGridFunction::with_tolerance(grid, 1e-7)?;
    normalize(&v)
}
