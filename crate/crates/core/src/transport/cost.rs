use crate::convex::conjugate::conjugate_at;
use crate::convex::grid::ConvexGridFunction;
use crate::error::{Error, Result};
use crate::measures::{LogConcaveMeasure, QuantileMeasure};
use crate::transport::discrete::DiscreteMeasure;
use crate::transport::solver::brute_force_cost;

/// Tail estimate above this fraction of `∫|q₁q₂|` rejects the integral.
pub const TAIL_REJECTION_RATIO: f64 = 1e-4;
/// Tail estimates below this are accepted whatever the total, so a
/// measure concentrated at the origin is not mistaken for a heavy tail.
pub const TAIL_FLOOR: f64 = 1e-10;

/// A quantile correlation together with its end-cell error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    pub tail_estimate: f64,
}

/// `∫₀¹ q₁ q₂ dt` by the midpoint rule, with the tail estimate.
///
/// The estimate is the midpoint error of the two end cells when the integrand
/// behaves like `a + b log t` there, with `b` fitted from the two outermost
/// samples. This is exact in shape for Gaussian-type tails and grows without
/// bound relative to the total for tails that are not square integrable.
pub fn quantile_correlation_estimate(q1: &QuantileMeasure, q2: &QuantileMeasure) -> Result<Correlation> {
    if q1.resolution() != q2.resolution() {
        return Err(Error::MismatchedQuantiles(q1.resolution(), q2.resolution()));
    }
    let n = q1.resolution();
    let g: Vec<f64> = q1.values().iter().zip(q2.values()).map(|(a, b)| a * b).collect();
    let h = 1.0 / n as f64;
    let value = g.iter().sum::<f64>() * h;
    let tail_estimate = if n >= 2 {
        let c = (1.0 - std::f64::consts::LN_2) / 3f64.ln();
        c * h * ((g[0] - g[1]).abs() + (g[n - 1] - g[n - 2]).abs())
    } else {
        0.0
    };
    Ok(Correlation { value, tail_estimate })
}

/// `∫₀¹ q₁ q₂ dt`; rejects tables whose tails are not square integrable enough.
pub fn quantile_correlation(q1: &QuantileMeasure, q2: &QuantileMeasure) -> Result<f64> {
    let c = quantile_correlation_estimate(q1, q2)?;
    let scale = q1.values().iter().zip(q2.values()).map(|(a, b)| (a * b).abs()).sum::<f64>() / q1.resolution() as f64;
    if c.tail_estimate > TAIL_FLOOR && c.tail_estimate > TAIL_REJECTION_RATIO * scale {
        return Err(Error::HeavyTail { tail: c.tail_estimate, total: c.value });
    }
    Ok(c.value)
}

/// `∫ x V'(x) dη`, integrated exactly for the log-linear density interpolant.
///
/// Integration by parts makes this `1 + a ρ(a) - b ρ(b)` on the support `[a, b]`,
/// so it equals 1 exactly when the density vanishes at both ends.
pub fn potential_pair_cost(m: &LogConcaveMeasure) -> f64 {
    let v = m.potential();
    let vals = v.values();
    let h = v.step();
    let (lo, hi) = m.support_indices();
    let table = m.cdf_table();
    let mut acc = 0.0;
    for c in 0..hi - lo {
        let i = lo + c;
        let mass = table[c + 1] - table[c];
        if mass == 0.0 {
            continue;
        }
        let sigma = vals[i + 1] - vals[i];
        // mean offset within the cell, as a fraction of h
        let frac = if sigma.abs() < 1e-6 {
            0.5 - sigma / 12.0
        } else {
            let e = (-sigma).exp_m1();
            // ∫θ e^{-σθ} / ∫ e^{-σθ}
            1.0 / sigma + 1.0 / e + 1.0
        };
        acc += sigma / h * mass * (v.x(i) + frac * h);
    }
    acc
}

/// `∫ f dμ₁ + ∫ f* dμ₂ - 𝒯(μ₁, μ₂)` for 1D measures.
///
/// `f` is the linear interpolant of the samples and `f*` its exact conjugate,
/// so the gap is nonnegative up to rounding.
pub fn dual_feasibility_gap(m1: &DiscreteMeasure, m2: &DiscreteMeasure, f: &ConvexGridFunction) -> Result<f64> {
    if m1.dim() != 1 || m2.dim() != 1 {
        return Err(Error::InvalidMeasure("feasibility gap needs 1D measures".into()));
    }
    let (smin, smax) = f.slope_range();
    let mut primal = 0.0;
    for (a, w) in m1.atoms().iter().zip(m1.weights()) {
        primal += w * f.value_at(a[0])?;
    }
    let mut dual = 0.0;
    for (a, w) in m2.atoms().iter().zip(m2.weights()) {
        let y = a[0];
        if y < smin - 1e-12 || y > smax + 1e-12 {
            return Err(Error::OutOfGrid(y, smin, smax));
        }
        dual += w * conjugate_at(f, y);
    }
    let (cost, _) = brute_force_cost(m1, m2)?;
    Ok(primal + dual - cost)
}
