//! The orthant form `∫_{ℝ₊ⁿ} e^{-V} ∫_{ℝ₊ⁿ} e^{-V*} ≥ 1` and the steps of its
//! induction on the dimension.

use std::collections::BTreeMap;

use crate::convex::box_grid::{strides, Axis, BoxGridFunction};
use crate::error::{Error, Result};
use crate::inequalities::report::{VerificationReport, VerifyOptions};

/// Slack for the monotonicity and convexity checks, relative to `1 + |V|`.
const SHAPE_TOL: f64 = 1e-9;
/// Relative step of the central difference for `F'`.
const FD_STEP: f64 = 1e-3;

/// `e^{-V}` at the far end of an axis is below `e^{-32.2} ≈ 1e-14`.
const FAR_END_LOG: f64 = 14.0 * std::f64::consts::LN_10;
/// `e^{-t V}` at the far end stays below 1e-8 for every sampled `t`.
const FAR_END_LOG_SCALED: f64 = 8.0 * std::f64::consts::LN_10;

/// Smallest box size `R` with `e^{-V(R e₁)} < 1e-14` and
/// `e^{-t_min V(R e₁)} < 1e-8`, for `V` nondecreasing along the axis.
pub fn truncation_radius(v_on_axis: impl Fn(f64) -> f64, t_min: f64) -> Result<f64> {
    if !(t_min > 0.0) {
        return Err(Error::InvalidParameter(format!("t_min must be positive, got {t_min}")));
    }
    let target = FAR_END_LOG.max(FAR_END_LOG_SCALED / t_min) + v_on_axis(0.0).min(0.0);
    let mut hi = 1.0;
    while v_on_axis(hi) < target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InfiniteMass("potential does not grow along the axis".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if v_on_axis(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Convex potential on `[0, R]ⁿ`, `n ∈ {2, 3}`, standing for the restriction
/// of an unconditional function to the positive orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct UnconditionalPotential {
    potential: BoxGridFunction,
    r: f64,
    monotone: bool,
}

/// Calls `f(i, j)` for consecutive flat indices `i, j = i + stride` along `axis`.
fn for_each_pair(axes: &[Axis], axis: usize, mut f: impl FnMut(usize, usize)) {
    let shape: Vec<usize> = axes.iter().map(|a| a.samples).collect();
    let st = strides(&shape);
    let total: usize = shape.iter().product();
    for i in 0..total {
        if (i / st[axis]) % shape[axis] + 1 < shape[axis] {
            f(i, i + st[axis]);
        }
    }
}

impl UnconditionalPotential {
    /// Checks the box, convexity along each axis and records monotonicity.
    pub fn new(potential: BoxGridFunction) -> Result<Self> {
        let n = potential.dim();
        if !(2..=3).contains(&n) {
            return Err(Error::InvalidParameter(format!("unconditional potentials need n ∈ {{2, 3}}, got {n}")));
        }
        if potential.axes().iter().any(|a| a.lo != 0.0) {
            return Err(Error::InvalidGrid("every axis must start at 0".into()));
        }
        let r = potential.axes().iter().map(|a| a.hi).fold(0.0, f64::max);
        let v = potential.values();
        let tol = |x: f64| SHAPE_TOL * (1.0 + x.abs());
        let mut monotone = true;
        for axis in 0..n {
            for_each_pair(potential.axes(), axis, |i, j| {
                if v[i].is_finite() && v[j] < v[i] - tol(v[i]) {
                    monotone = false;
                }
            });
            let shape: Vec<usize> = potential.axes().iter().map(|a| a.samples).collect();
            let st = strides(&shape)[axis];
            let mut bad = None;
            for_each_pair(potential.axes(), axis, |i, j| {
                if bad.is_none() && (j / st) % shape[axis] + 1 < shape[axis] {
                    let k = j + st;
                    if v[i].is_finite() && v[j].is_finite() && v[k].is_finite() {
                        let d2 = v[i] - 2.0 * v[j] + v[k];
                        if d2 < -tol(v[j]) {
                            bad = Some((j, d2));
                        }
                    }
                }
            });
            if let Some((index, value)) = bad {
                return Err(Error::NotConvex { index, value });
            }
        }
        Ok(Self { potential, r, monotone })
    }

    /// Samples `f` on `[0, r]ⁿ` with `samples` points per axis.
    pub fn from_fn(dim: usize, r: f64, samples: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let axis = Axis::new(0.0, r, samples)?;
        Self::new(BoxGridFunction::from_fn(vec![axis; dim], f)?)
    }

    pub fn potential(&self) -> &BoxGridFunction {
        &self.potential
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    /// Nondecreasing in each coordinate.
    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// `V_i`: the restriction to `{x_i = 0}`.
    pub fn face(&self, i: usize) -> Result<BoxGridFunction> {
        self.potential.face(i)
    }

    /// Largest forward slope along each axis.
    fn max_slopes(&self) -> Vec<f64> {
        let v = self.potential.values();
        (0..self.dim())
            .map(|axis| {
                let h = self.potential.axes()[axis].step();
                let mut s = f64::NEG_INFINITY;
                for_each_pair(self.potential.axes(), axis, |i, j| {
                    if v[i].is_finite() && v[j].is_finite() {
                        s = s.max((v[j] - v[i]) / h);
                    }
                });
                s
            })
            .collect()
    }

    /// Dual box `∏ [0, max slope along axis]`.
    pub fn dual_axes(&self) -> Result<Vec<Axis>> {
        self.max_slopes()
            .into_iter()
            .zip(self.potential.axes())
            .map(|(s, a)| {
                if !(s > 0.0) {
                    return Err(Error::InfiniteMass("potential is flat along an axis".into()));
                }
                Axis::new(0.0, s, a.samples)
            })
            .collect()
    }

    /// `V*` on the dual box. The far ends of the box cut a function that
    /// continues, so maximizers there give `+∞`.
    pub fn conjugate(&self) -> Result<BoxGridFunction> {
        let dual = self.dual_axes()?;
        self.potential.conjugate(&dual, &vec![(false, true); self.dim()])
    }

    /// Every other sample on each axis, when the counts allow it.
    pub fn coarsen(&self) -> Option<Self> {
        let axes = self.potential.axes();
        if axes.iter().any(|a| a.samples < 5 || a.samples % 2 == 0) {
            return None;
        }
        let coarse: Vec<Axis> = axes.iter().map(|a| Axis { samples: a.samples.div_ceil(2), ..*a }).collect();
        let shape: Vec<usize> = axes.iter().map(|a| a.samples).collect();
        let st = strides(&shape);
        let cshape: Vec<usize> = coarse.iter().map(|a| a.samples).collect();
        let cst = strides(&cshape);
        let total: usize = cshape.iter().product();
        let values = (0..total)
            .map(|c| {
                let flat: usize = (0..shape.len()).map(|a| 2 * ((c / cst[a]) % cshape[a]) * st[a]).sum();
                self.potential.values()[flat]
            })
            .collect();
        let potential = BoxGridFunction::new(coarse, values).ok()?;
        Some(Self { potential, r: self.r, monotone: self.monotone })
    }
}

/// Integrals entering the induction at one value of `t`.
#[derive(Debug, Clone)]
struct Integrals {
    /// `a`, `α` at `t - δ`, `t`, `t + δ`.
    a: [f64; 3],
    alpha: [f64; 3],
    a_prime: f64,
    a_faces: Vec<f64>,
    alpha_faces: Vec<f64>,
}

impl Integrals {
    fn extrapolate(&self, coarse: &Self) -> Self {
        let rich = |f: f64, c: f64| (16.0 * f - c) / 15.0;
        let zip3 = |f: [f64; 3], c: [f64; 3]| [rich(f[0], c[0]), rich(f[1], c[1]), rich(f[2], c[2])];
        let zipv = |f: &[f64], c: &[f64]| f.iter().zip(c).map(|(a, b)| rich(*a, *b)).collect();
        Self {
            a: zip3(self.a, coarse.a),
            alpha: zip3(self.alpha, coarse.alpha),
            a_prime: rich(self.a_prime, coarse.a_prime),
            a_faces: zipv(&self.a_faces, &coarse.a_faces),
            alpha_faces: zipv(&self.alpha_faces, &coarse.alpha_faces),
        }
    }
}

struct Pair {
    v: BoxGridFunction,
    vs: BoxGridFunction,
    v_faces: Vec<BoxGridFunction>,
    vs_faces: Vec<BoxGridFunction>,
}

impl Pair {
    fn new(u: &UnconditionalPotential) -> Result<Self> {
        let vs = u.conjugate()?;
        let n = u.dim();
        Ok(Self {
            v_faces: (0..n).map(|i| u.face(i)).collect::<Result<_>>()?,
            vs_faces: (0..n).map(|i| vs.face(i)).collect::<Result<_>>()?,
            v: u.potential().clone(),
            vs,
        })
    }

    fn integrals(&self, t: f64) -> Integrals {
        let d = FD_STEP * t;
        let mass = |f: &BoxGridFunction| f.integrate(|v| (-t * v).exp());
        let [lo, mid, hi, moment] = self.v.integrate_many(|v| {
            let e = (-t * v).exp();
            [e * (d * v).exp(), e, e * (-d * v).exp(), v * e]
        });
        let [alo, amid, ahi] = self.vs.integrate_many(|v| {
            let e = (-t * v).exp();
            [e * (d * v).exp(), e, e * (-d * v).exp()]
        });
        Integrals {
            a: [lo, mid, hi],
            alpha: [alo, amid, ahi],
            a_prime: -moment,
            a_faces: self.v_faces.iter().map(mass).collect(),
            alpha_faces: self.vs_faces.iter().map(mass).collect(),
        }
    }
}

fn f_of(n: usize, t: f64, a: f64, alpha: f64) -> f64 {
    t.powi(2 * n as i32) * a * alpha
}

/// Checks the orthant inequality and the steps of its proof at each `t`:
/// `F(1) ≥ 1` with `F(t) = t^{2n} a(t) α(t)`, the central difference
/// `F'(t) ≥ n t^{n-1}`, the Jensen step `a'/a + n/t ≥ V*(G/(t a))` and the
/// facial identity `(V_i)* = (V*)_i`.
///
/// The deficit is the smallest margin over all checks.
pub fn unconditional_verify(u: &UnconditionalPotential, t_samples: &[f64]) -> Result<VerificationReport> {
    unconditional_verify_with(u, t_samples, &VerifyOptions::default())
}

pub fn unconditional_verify_with(
    u: &UnconditionalPotential,
    t_samples: &[f64],
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    if !u.is_monotone() {
        return Err(Error::NotMonotone);
    }
    if let Some(t) = t_samples.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    let n = u.dim();
    let fine = Pair::new(u)?;
    let coarse = u.coarsen().map(|c| Pair::new(&c)).transpose()?;
    let eval = |t: f64| -> (Integrals, f64) {
        let f = fine.integrals(t);
        match &coarse {
            Some(c) => {
                let c = c.integrals(t);
                let err = (f64::abs(f_of(n, t, f.a[1], f.alpha[1]) - f_of(n, t, c.a[1], c.alpha[1]))) / 15.0;
                (f.extrapolate(&c), err)
            }
            None => (f, 0.0),
        }
    };

    let mut q = BTreeMap::new();
    let mut margins = Vec::new();
    let mut err: f64 = 0.0;
    let dual = u.dual_axes()?;

    let mut ts: Vec<f64> = t_samples.to_vec();
    if !ts.contains(&1.0) {
        ts.push(1.0);
    }
    for &t in &ts {
        let (ig, e) = eval(t);
        err = err.max(e);
        let d = FD_STEP * t;
        let f = |k: usize| f_of(n, t + (k as f64 - 1.0) * d, ig.a[k], ig.alpha[k]);
        let f_t = f(1);
        let f_prime = (f(2) - f(0)) / (2.0 * d);
        let fp_margin = f_prime - n as f64 * t.powi(n as i32 - 1);
        // ∫∇V dη_t lies in the hull of the gradients; only quadrature error moves it out
        let y: Vec<f64> = ig.a_faces.iter().zip(&dual).map(|(ai, ax)| (ai / (t * ig.a[1])).clamp(0.0, ax.hi)).collect();
        let conj = fine.v.conjugate_at(&y);
        let jensen = ig.a_prime / ig.a[1] + n as f64 / t - conj;

        q.insert(format!("a({t})"), ig.a[1]);
        q.insert(format!("alpha({t})"), ig.alpha[1]);
        for i in 0..n {
            q.insert(format!("a_{}({t})", i + 1), ig.a_faces[i]);
            q.insert(format!("alpha_{}({t})", i + 1), ig.alpha_faces[i]);
        }
        q.insert(format!("F({t})"), f_t);
        q.insert(format!("F'({t})"), f_prime);
        q.insert(format!("jensen({t})"), jensen);
        margins.push(fp_margin);
        margins.push(jensen);
        if t == 1.0 {
            q.insert("F(1)".into(), f_t);
            margins.push(f_t - 1.0);
        }
    }

    for i in 0..n {
        let face_dual: Vec<Axis> = dual.iter().enumerate().filter(|(a, _)| *a != i).map(|(_, x)| *x).collect();
        let lhs = fine.v_faces[i].conjugate(&face_dual, &vec![(false, true); n - 1])?;
        let rhs = &fine.vs_faces[i];
        let gap = lhs
            .values()
            .iter()
            .zip(rhs.values())
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let mismatched = lhs.values().iter().zip(rhs.values()).filter(|(a, b)| a.is_finite() != b.is_finite()).count();
        q.insert(format!("facial_gap_{}", i + 1), gap);
        q.insert(format!("facial_domain_mismatch_{}", i + 1), mismatched as f64);
        margins.push(if mismatched > 0 { f64::NEG_INFINITY } else { -gap });
    }
    q.insert("R".into(), u.r());

    let deficit = margins.into_iter().fold(f64::INFINITY, f64::min);
    if !deficit.is_finite() && deficit != f64::NEG_INFINITY {
        return Err(Error::Numerical("no checks evaluated".into()));
    }
    Ok(VerificationReport::new("unconditional", q, deficit, err, opts))
}
