//! Linear-time discrete Legendre–Fenchel transform.
//!
//! The lower convex hull of the sample cloud is built with a monotone chain;
//! its vertices are then merged with the sorted dual grid. Both passes are
//! linear, so a transform costs `O(N + M)`.

use crate::convex::grid::{ConvexGridFunction, GridFunction};
use crate::error::{Error, Result};

/// How finite values at the grid ends are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailMode {
    /// The samples are the whole function: `+∞` outside the grid.
    #[default]
    Truncate,
    /// A finite value at a grid end means the function continues past the
    /// grid. Wherever the supremum is only attained at such an end, the
    /// conjugate is `+∞`.
    Extend,
}

/// Conjugate of one line of samples, with the extreme maximizers.
#[derive(Debug, Clone)]
pub(crate) struct LineConjugate {
    pub value: Vec<f64>,
    /// Smallest maximizing sample index (within rounding), `usize::MAX` if none.
    pub left_arg: Vec<usize>,
    /// The next maximizing sample index to the right of `left_arg` if there is
    /// one (within rounding), else `left_arg`. Equals 0 only when 0 is the
    /// unique maximizer.
    pub right_arg: Vec<usize>,
}

/// Scores closer than this relative to the size of their terms are ties.
/// Cell slopes carry rounding of order `eps·|v|/h`, which `x·y` amplifies.
const TIE_RELATIVE: f64 = 1e-10;

/// `max_i (x_i y - v_i)` for every `y` in the increasing slice `ys`.
///
/// Samples equal to `+∞` are skipped; the samples need not be convex.
pub(crate) fn line_conjugate(x0: f64, step: f64, vals: &[f64], ys: &[f64]) -> LineConjugate {
    let n = vals.len();
    let x = |i: usize| x0 + i as f64 * step;
    // lower hull, monotone chain on already sorted abscissae
    let mut hull: Vec<usize> = Vec::new();
    for i in (0..n).filter(|&i| vals[i].is_finite()) {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (x(b) - x(a)) * (vals[i] - vals[a]) - (vals[b] - vals[a]) * (x(i) - x(a));
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let m = ys.len();
    let mut out = LineConjugate {
        value: vec![f64::NEG_INFINITY; m],
        left_arg: vec![usize::MAX; m],
        right_arg: vec![usize::MAX; m],
    };
    if hull.is_empty() {
        return out;
    }
    let hx: Vec<f64> = hull.iter().map(|&i| x(i)).collect();
    let hv: Vec<f64> = hull.iter().map(|&i| vals[i]).collect();
    let score = |k: usize, y: f64| hx[k] * y - hv[k];
    let size = |k: usize, y: f64| (hx[k] * y).abs() + hv[k].abs();
    let tie_tol = |a: usize, b: usize, y: f64| TIE_RELATIVE * (1.0 + size(a, y) + size(b, y));
    let last = hull.len() - 1;
    let mut k = 0;
    for (j, &y) in ys.iter().enumerate() {
        while k < last && score(k + 1, y) > score(k, y) + tie_tol(k, k + 1, y) {
            k += 1;
        }
        // the walk may overshoot a tie reached from the right; step back
        while k > 0 && score(k - 1, y) >= score(k, y) - tie_tol(k, k - 1, y) {
            k -= 1;
        }
        let best = score(k, y);
        let r = if k < last && score(k + 1, y) >= best - tie_tol(k, k + 1, y) { k + 1 } else { k };
        out.value[j] = best;
        out.left_arg[j] = hull[k];
        out.right_arg[j] = hull[r];
    }
    out
}

fn dual_axis(lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return Err(Error::InvalidGrid(format!("dual grid needs lo < hi, got [{lo}, {hi}]")));
    }
    if samples < 3 {
        return Err(Error::InvalidGrid(format!("dual grid needs ≥ 3 samples, got {samples}")));
    }
    let h = (hi - lo) / (samples - 1) as f64;
    Ok((0..samples).map(|i| if i + 1 == samples { hi } else { lo + i as f64 * h }).collect())
}

/// Exact discrete conjugate `g(y) = max_x (x·y - f(x))` on a uniform dual grid.
pub fn legendre_transform(
    f: &ConvexGridFunction,
    dual_lo: f64,
    dual_hi: f64,
    dual_samples: usize,
) -> Result<ConvexGridFunction> {
    legendre_transform_with(f, dual_lo, dual_hi, dual_samples, TailMode::Truncate)
}

/// [`legendre_transform`] with an explicit reading of the grid ends.
///
/// Works for any grid function: the transform only sees its convex hull.
pub fn legendre_transform_with(
    f: &GridFunction,
    dual_lo: f64,
    dual_hi: f64,
    dual_samples: usize,
    mode: TailMode,
) -> Result<ConvexGridFunction> {
    let ys = dual_axis(dual_lo, dual_hi, dual_samples)?;
    let line = line_conjugate(f.lo(), f.step(), f.values(), &ys);
    let last = f.len() - 1;
    let values: Vec<f64> = (0..ys.len())
        .map(|j| {
            let escapes = mode == TailMode::Extend
                && ((line.right_arg[j] == 0 && f.open_left()) || (line.left_arg[j] == last && f.open_right()));
            if escapes {
                f64::INFINITY
            } else {
                line.value[j]
            }
        })
        .collect();
    let g = GridFunction::new(dual_lo, dual_hi, values)?;
    Ok(ConvexGridFunction::trusted(g))
}

/// Default dual window `[min slope - 1, max slope + 1]`.
pub fn default_dual_range(f: &ConvexGridFunction) -> (f64, f64) {
    let (a, b) = f.slope_range();
    (a - 1.0, b + 1.0)
}

/// Discrete conjugate of the samples evaluated at a single point.
pub fn conjugate_at(f: &GridFunction, y: f64) -> f64 {
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(i, v)| f.x(i) * y - v)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(f: &GridFunction, ys: &[f64]) -> Vec<f64> {
        ys.iter().map(|&y| conjugate_at(f, y)).collect()
    }

    #[test]
    fn matches_brute_force_on_nonconvex_data() {
        let f = GridFunction::from_fn(-3.0, 2.0, 41, |x| (3.0 * x).sin() + 0.2 * x * x).unwrap();
        let ys: Vec<f64> = (0..57).map(|j| -4.0 + j as f64 * 0.15).collect();
        let line = line_conjugate(f.lo(), f.step(), f.values(), &ys);
        for (a, b) in line.value.iter().zip(brute(&f, &ys)) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn gaussian_is_self_dual() {
        let f = ConvexGridFunction::from_fn(-8.0, 8.0, 4097, |x| x * x / 2.0).unwrap();
        let g = legendre_transform(&f, -8.0, 8.0, 4097).unwrap();
        let h = f.step();
        let err = g.xs().zip(g.values()).skip(1).take(4095).map(|(y, v)| (v - y * y / 2.0).abs()).fold(0.0, f64::max);
        assert!(err <= h * h, "{err}");
    }

    #[test]
    fn norm_conjugate_is_flat_on_unit_ball() {
        let f = ConvexGridFunction::from_fn(-8.0, 8.0, 1601, f64::abs).unwrap();
        let g = legendre_transform(&f, -2.0, 2.0, 401).unwrap();
        assert_eq!(g.value_at(0.0).unwrap(), 0.0);
        for (y, v) in g.xs().zip(g.values()) {
            let expected = 8.0 * (y.abs() - 1.0).max(0.0);
            assert!((v - expected).abs() < 1e-9, "y={y}: {v}");
        }
        let e = legendre_transform_with(&f, -2.0, 2.0, 401, TailMode::Extend).unwrap();
        assert_eq!(e.value_at(1.0).unwrap(), 0.0);
        assert_eq!(e.value_at(-1.0).unwrap(), 0.0);
        assert!(e.value_at(1.01).unwrap().is_infinite());
        assert!(e.value_at(-1.01).unwrap().is_infinite());
    }

    #[test]
    fn half_line_potential() {
        // 1 + x on [-1, ∞)
        let f = ConvexGridFunction::from_fn(-2.0, 6.0, 801, |x| if x < -1.0 - 1e-9 { f64::INFINITY } else { 1.0 + x })
            .unwrap();
        let g = legendre_transform(&f, -3.0, 1.0, 401).unwrap();
        for (y, v) in g.xs().zip(g.values()) {
            assert!((v + y).abs() < 1e-9 * (1.0 + y.abs()), "y={y}: {v}");
        }
    }

    #[test]
    fn rejects_bad_dual_grid() {
        let f = ConvexGridFunction::from_fn(-1.0, 1.0, 5, |x| x * x).unwrap();
        assert!(legendre_transform(&f, 1.0, 1.0, 5).is_err());
        assert!(legendre_transform(&f, 1.0, -1.0, 5).is_err());
    }
}
