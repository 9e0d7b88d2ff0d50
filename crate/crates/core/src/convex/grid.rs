use std::fmt::Write as _;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Default tolerance for the discrete convexity test.
pub const DEFAULT_CONVEXITY_TOL: f64 = 1e-9;

/// An extended-real function sampled on a uniform 1D grid.
///
/// `f64::INFINITY` is the `+∞` sentinel. The finite samples form a single
/// contiguous window. A finite value at a grid end means the function is
/// only truncated there; `+∞` at a grid end means the domain ends inside
/// the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::InvalidGrid(format!("need lo < hi, got [{lo}, {hi}]")));
        }
        if values.len() < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 samples, got {}", values.len())));
        }
        if let Some(i) = values.iter().position(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::InvalidGrid(format!("invalid value {} at index {i}", values[i])));
        }
        let first = values.iter().position(|v| v.is_finite()).ok_or(Error::DegenerateFunction)?;
        let last = values.iter().rposition(|v| v.is_finite()).unwrap();
        if values[first..=last].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("finite window is not contiguous".into()));
        }
        Ok(Self { lo, hi, values })
    }

    pub fn from_fn(lo: f64, hi: f64, samples: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if samples < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 samples, got {samples}")));
        }
        let step = (hi - lo) / (samples - 1) as f64;
        let values = (0..samples).map(|i| f(lo + i as f64 * step)).collect();
        Self::new(lo, hi, values)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.values.len() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.values.len() {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|i| self.x(i))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Inclusive index range of the finite samples.
    pub fn finite_window(&self) -> (usize, usize) {
        let first = self.values.iter().position(|v| v.is_finite()).unwrap();
        let last = self.values.iter().rposition(|v| v.is_finite()).unwrap();
        (first, last)
    }

    /// True when the left grid end carries a finite value.
    pub fn open_left(&self) -> bool {
        self.values[0].is_finite()
    }

    pub fn open_right(&self) -> bool {
        self.values[self.values.len() - 1].is_finite()
    }

    /// Index of the cell containing `x` and the fractional position inside it.
    pub fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let tol = 1e-12 * (self.hi - self.lo);
        if x < self.lo - tol || x > self.hi + tol {
            return Err(Error::OutOfGrid(x, self.lo, self.hi));
        }
        let u = ((x - self.lo) / self.step()).clamp(0.0, (self.len() - 1) as f64);
        let i = (u.floor() as usize).min(self.len() - 2);
        Ok((i, u - i as f64))
    }

    /// Piecewise-linear interpolation; `+∞` if a contributing sample is `+∞`.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        let (i, frac) = self.locate(x)?;
        let (a, b) = (self.values[i], self.values[i + 1]);
        // positions within rounding of a node take that node's value
        if frac <= 1e-9 {
            return Ok(a);
        }
        if frac >= 1.0 - 1e-9 {
            return Ok(b);
        }
        if !a.is_finite() || !b.is_finite() {
            return Ok(f64::INFINITY);
        }
        Ok(a + frac * (b - a))
    }

    /// Evenness of the sampled function: symmetric grid and mirrored values.
    pub fn is_even(&self, tol: f64) -> bool {
        let scale = self.lo.abs().max(self.hi.abs());
        if (self.lo + self.hi).abs() > 1e-12 * scale {
            return false;
        }
        let n = self.values.len();
        (0..n / 2).all(|i| {
            let (a, b) = (self.values[i], self.values[n - 1 - i]);
            (a.is_infinite() && b.is_infinite())
                || (a.is_finite() && b.is_finite() && (a - b).abs() <= tol * (1.0 + a.abs()))
        })
    }

    /// Every other sample, when the grid has an even number of intervals.
    pub fn coarsen(&self) -> Option<Self> {
        let n = self.values.len();
        if n < 5 || n.is_multiple_of(2) {
            return None;
        }
        let values: Vec<f64> = self.values.iter().step_by(2).copied().collect();
        Self::new(self.lo, self.hi, values).ok()
    }

    /// Applies `f` pointwise to `(x, value)`.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(self.x(i), v)).collect();
        Self::new(self.lo, self.hi, values)
    }

    /// CSV with header `x,value`, 17 significant digits and `inf` for `+∞`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{}", fmt_real(self.x(i)), fmt_real(*v));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        if header.trim() != "x,value" {
            return Err(Error::Parse(format!("unexpected header `{header}`")));
        }
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (row, line) in lines.enumerate() {
            let mut fields = line.split(',');
            let (Some(x), Some(v), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::Parse(format!("row {row}: expected two fields")));
            };
            xs.push(parse_real(x)?);
            values.push(parse_real(v)?);
        }
        if xs.len() < 3 {
            return Err(Error::Parse("need at least 3 rows".into()));
        }
        let f = Self::new(xs[0], xs[xs.len() - 1], values)?;
        let h = f.step();
        for (i, x) in xs.iter().enumerate() {
            if (x - f.x(i)).abs() > 1e-9 * h {
                return Err(Error::Parse(format!("row {i}: grid is not uniform")));
            }
        }
        Ok(f)
    }
}

pub(crate) fn fmt_real(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub(crate) fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    if s == "inf" || s == "+inf" {
        return Ok(f64::INFINITY);
    }
    s.parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}")))
}

/// A grid function whose finite window is discretely convex.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexGridFunction {
    base: GridFunction,
    convexity_tol: f64,
}

impl ConvexGridFunction {
    pub fn new(base: GridFunction) -> Result<Self> {
        Self::with_tolerance(base, DEFAULT_CONVEXITY_TOL)
    }

    pub fn with_tolerance(base: GridFunction, convexity_tol: f64) -> Result<Self> {
        if !(convexity_tol >= 0.0) {
            return Err(Error::InvalidParameter("convexity tolerance must be ≥ 0".into()));
        }
        let (a, b) = base.finite_window();
        let v = base.values();
        for i in a + 1..b {
            let d2 = v[i - 1] - 2.0 * v[i] + v[i + 1];
            let scale = 1.0 + v[i - 1].abs().max(v[i].abs()).max(v[i + 1].abs());
            if d2 < -convexity_tol * scale {
                return Err(Error::NotConvex { index: i, value: d2 });
            }
        }
        Ok(Self { base, convexity_tol })
    }

    pub fn from_fn(lo: f64, hi: f64, samples: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(GridFunction::from_fn(lo, hi, samples, f)?)
    }

    /// Wraps output that is convex by construction (maxima of affine maps).
    pub(crate) fn trusted(base: GridFunction) -> Self {
        Self { base, convexity_tol: DEFAULT_CONVEXITY_TOL }
    }

    pub fn convexity_tol(&self) -> f64 {
        self.convexity_tol
    }

    pub fn as_grid(&self) -> &GridFunction {
        &self.base
    }

    pub fn into_grid(self) -> GridFunction {
        self.base
    }

    /// Cell slopes `(v[i+1]-v[i])/h` over the finite window.
    pub fn slopes(&self) -> Vec<f64> {
        let (a, b) = self.finite_window();
        let h = self.step();
        self.values()[a..=b].windows(2).map(|w| (w[1] - w[0]) / h).collect()
    }

    /// Smallest and largest cell slope over the finite window. Rounding can
    /// put interior slopes just outside the end slopes, so all are scanned.
    pub fn slope_range(&self) -> (f64, f64) {
        let s = self.slopes();
        if s.is_empty() {
            return (0.0, 0.0);
        }
        s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
    }

    /// Left derivative at sample `i`; at the left end of the window the right
    /// difference is used.
    pub fn left_derivative(&self, i: usize) -> f64 {
        let (a, b) = self.finite_window();
        let h = self.step();
        let v = self.values();
        if a == b {
            0.0
        } else if i <= a {
            (v[a + 1] - v[a]) / h
        } else {
            let i = i.min(b);
            (v[i] - v[i - 1]) / h
        }
    }

    pub fn coarsen(&self) -> Option<Self> {
        self.base.coarsen().and_then(|g| Self::with_tolerance(g, self.convexity_tol).ok())
    }
}

impl Deref for ConvexGridFunction {
    type Target = GridFunction;

    fn deref(&self) -> &GridFunction {
        &self.base
    }
}
