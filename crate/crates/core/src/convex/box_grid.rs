//! Extended-real functions on dense box grids in dimension 1 to 3.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::convex::conjugate::line_conjugate;
use crate::convex::grid::{fmt_real, parse_real};
use crate::error::{Error, Result};
use crate::quadrature::simpson_weights;

/// One uniform axis of a box grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, samples: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo || samples < 3 {
            return Err(Error::InvalidGrid(format!("bad axis [{lo}, {hi}] with {samples} samples")));
        }
        Ok(Self { lo, hi, samples })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.samples - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.samples {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }
}

/// Row-major samples on a box; the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxGridFunction {
    axes: Vec<Axis>,
    values: Vec<f64>,
}

/// Lines gathered together when sweeping a strided axis.
const LINE_BATCH: usize = 64;

pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

impl BoxGridFunction {
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 1..=3, got {}", axes.len())));
        }
        let total: usize = axes.iter().map(|a| a.samples).product();
        if values.len() != total {
            return Err(Error::InvalidGrid(format!("expected {total} values, got {}", values.len())));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::InvalidGrid("NaN or -inf sample".into()));
        }
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::DegenerateFunction);
        }
        Ok(Self { axes, values })
    }

    pub fn from_fn(axes: Vec<Axis>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let shape: Vec<usize> = axes.iter().map(|a| a.samples).collect();
        let total: usize = shape.iter().product();
        let st = strides(&shape);
        let mut x = vec![0.0; axes.len()];
        let values = (0..total)
            .map(|flat| {
                for (a, axis) in axes.iter().enumerate() {
                    x[a] = axis.x((flat / st[a]) % shape[a]);
                }
                f(&x)
            })
            .collect();
        Self::new(axes, values)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.samples).collect()
    }

    /// Coordinates of the sample with flat index `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let shape = self.shape();
        let st = strides(&shape);
        self.axes.iter().enumerate().map(|(a, ax)| ax.x((flat / st[a]) % shape[a])).collect()
    }

    /// Restriction to the face where coordinate `axis` takes its lowest grid value.
    pub fn face(&self, axis: usize) -> Result<Self> {
        if self.dim() < 2 || axis >= self.dim() {
            return Err(Error::InvalidParameter(format!("no face {axis} in dimension {}", self.dim())));
        }
        let shape = self.shape();
        let st = strides(&shape);
        let axes: Vec<Axis> = self.axes.iter().enumerate().filter(|(a, _)| *a != axis).map(|(_, x)| *x).collect();
        let values = (0..self.values.len())
            .filter(|flat| (flat / st[axis]).is_multiple_of(shape[axis]))
            .map(|flat| self.values[flat])
            .collect();
        Self::new(axes, values)
    }

    /// Discrete conjugate on a dual box, one axis at a time.
    ///
    /// `truncated` marks, per axis, which ends `(low, high)` cut a function
    /// that continues past the grid. Where the joint maximizer sits on such
    /// an end the conjugate is `+∞`; elsewhere it is the exact discrete
    /// maximum over all samples.
    pub fn conjugate(&self, dual: &[Axis], truncated: &[(bool, bool)]) -> Result<Self> {
        if dual.len() != self.dim() || truncated.len() != self.dim() {
            return Err(Error::InvalidParameter("dual axes must match the dimension".into()));
        }
        let mut shape = self.shape();
        let mut data = self.values.clone();
        let mut escaped = vec![false; data.len()];
        for a in (0..self.dim()).rev() {
            let ys: Vec<f64> = (0..dual[a].samples).map(|j| dual[a].x(j)).collect();
            let st = strides(&shape);
            let n_in = shape[a];
            let mut out_shape = shape.clone();
            out_shape[a] = ys.len();
            let ost = strides(&out_shape);
            let total_out: usize = out_shape.iter().product();
            let mut out = vec![0.0; total_out];
            let mut out_esc = vec![false; total_out];
            // lines along axis a are (outer, inner) pairs; neighbouring inner
            // indices are contiguous, so they are gathered in batches
            let outers = data.len() / (n_in * st[a]);
            let mut batch: Vec<Vec<f64>> = Vec::new();
            for outer in 0..outers {
                let base_in = outer * st[a] * n_in;
                let base_out = outer * ost[a] * ys.len();
                for i0 in (0..st[a]).step_by(LINE_BATCH) {
                    let width = LINE_BATCH.min(st[a] - i0);
                    batch.resize_with(width, || vec![0.0; n_in]);
                    for i in 0..n_in {
                        let row = &data[base_in + i * st[a] + i0..][..width];
                        for (line, v) in batch.iter_mut().zip(row) {
                            line[i] = *v;
                        }
                    }
                    for (b, line_vals) in batch.iter().enumerate() {
                        let inner = i0 + b;
                        let lc = line_conjugate(self.axes[a].lo, self.axes[a].step(), line_vals, &ys);
                        for j in 0..ys.len() {
                            let o = base_out + j * ost[a] + inner;
                            out[o] = lc.value[j];
                            let arg = lc.left_arg[j];
                            if arg == usize::MAX {
                                continue;
                            }
                            out_esc[o] = escaped[base_in + arg * st[a] + inner]
                                || (truncated[a].0 && lc.right_arg[j] == 0)
                                || (truncated[a].1 && arg == n_in - 1);
                        }
                    }
                }
            }
            shape = out_shape;
            escaped = out_esc;
            // next sweep conjugates the negated partial supremum
            data = out.into_iter().map(|v| -v).collect();
        }
        let values = data.into_iter().zip(escaped).map(|(v, e)| if e { f64::INFINITY } else { -v }).collect();
        Self::new(dual.to_vec(), values)
    }

    /// `max_x (x·y - f(x))` over all samples.
    pub fn conjugate_at(&self, y: &[f64]) -> f64 {
        let shape = self.shape();
        let d = shape.len();
        let coords: Vec<Vec<f64>> = self.axes.iter().map(|a| (0..a.samples).map(|i| a.x(i)).collect()).collect();
        let inner = shape[d - 1];
        let mut idx = vec![0usize; d];
        let mut best = f64::NEG_INFINITY;
        for line in self.values.chunks(inner) {
            let offset: f64 = (0..d - 1).map(|a| coords[a][idx[a]] * y[a]).sum();
            for (x, v) in coords[d - 1].iter().zip(line) {
                if v.is_finite() {
                    best = best.max(offset + x * y[d - 1] - v);
                }
            }
            // odometer over the outer axes
            for a in (0..d - 1).rev() {
                idx[a] += 1;
                if idx[a] < shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        best
    }

    /// `∫ g(f(x)) dx` by nested Simpson over the runs where `f` is finite.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.integrate_many(|v| [g(v)])[0]
    }

    /// Several integrals `∫ g_k(f(x)) dx` in one pass over the samples.
    pub fn integrate_many<const K: usize>(&self, g: impl Fn(f64) -> [f64; K]) -> [f64; K] {
        let d = self.dim();
        let mut runs = RunIntegrator::default();
        let n = self.axes[d - 1].samples;
        let h = self.axes[d - 1].step();
        let mut data: Vec<Option<[f64; K]>> = self
            .values
            .chunks(n)
            .map(|line| runs.integrate(line.iter().map(|v| v.is_finite().then(|| g(*v))), h))
            .collect();
        for a in (0..d - 1).rev() {
            let n = self.axes[a].samples;
            let h = self.axes[a].step();
            data = data.chunks(n).map(|line| runs.integrate(line.iter().copied(), h)).collect();
        }
        data[0].unwrap_or([0.0; K])
    }

    /// CSV with header `x1,...,xd,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let names: Vec<String> = (1..=self.dim()).map(|i| format!("x{i}")).collect();
        let _ = writeln!(out, "{},value", names.join(","));
        for (i, v) in self.values.iter().enumerate() {
            let coords: Vec<String> = self.point(i).into_iter().map(fmt_real).collect();
            let _ = writeln!(out, "{},{}", coords.join(","), fmt_real(*v));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let dim = header.split(',').count() - 1;
        if !(1..=3).contains(&dim) {
            return Err(Error::Parse(format!("bad header `{header}`")));
        }
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in lines {
            let row = line.split(',').map(parse_real).collect::<Result<Vec<_>>>()?;
            if row.len() != dim + 1 {
                return Err(Error::Parse(format!("expected {} fields in `{line}`", dim + 1)));
            }
            rows.push(row);
        }
        let mut axes = Vec::new();
        for a in 0..dim {
            let mut coords: Vec<f64> = rows.iter().map(|r| r[a]).collect();
            coords.sort_by(f64::total_cmp);
            coords.dedup();
            axes.push(Axis::new(coords[0], coords[coords.len() - 1], coords.len())?);
        }
        let values = rows.iter().map(|r| r[dim]).collect();
        Self::new(axes, values)
    }
}

/// Simpson over the maximal runs of present samples, reusing its buffers.
struct RunIntegrator<const K: usize> {
    run: Vec<[f64; K]>,
    weights: Vec<f64>,
    weights_for: (usize, f64),
}

impl<const K: usize> Default for RunIntegrator<K> {
    fn default() -> Self {
        Self { run: Vec::new(), weights: Vec::new(), weights_for: (0, 0.0) }
    }
}

impl<const K: usize> RunIntegrator<K> {
    fn integrate(&mut self, line: impl Iterator<Item = Option<[f64; K]>>, h: f64) -> Option<[f64; K]> {
        let mut total = None;
        self.run.clear();
        for item in line {
            match item {
                Some(v) => self.run.push(v),
                None => self.flush(h, &mut total),
            }
        }
        self.flush(h, &mut total);
        total
    }

    fn flush(&mut self, h: f64, total: &mut Option<[f64; K]>) {
        if self.run.is_empty() {
            return;
        }
        if self.weights_for != (self.run.len(), h) {
            self.weights = simpson_weights(self.run.len(), h);
            self.weights_for = (self.run.len(), h);
        }
        let acc = total.get_or_insert([0.0; K]);
        for (w, v) in self.weights.iter().zip(&self.run) {
            for k in 0..K {
                acc[k] += w * v[k];
            }
        }
        self.run.clear();
    }
}
