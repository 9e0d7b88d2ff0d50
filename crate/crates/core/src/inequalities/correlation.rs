use crate::error::{Error, Result};
use crate::inequalities::report::{quantities, VerificationReport, VerifyOptions};
use crate::measures::{for_each_common_cell, Profile};

/// Rounding allowance for the discrete correlation inequality.
pub const CORRELATION_TOLERANCE: f64 = 1e-12;
/// Above this size the `O(n²)` pairwise sum gives way to the direct formula.
const PAIRWISE_LIMIT: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Constant,
    Up,
    Down,
}

fn direction(t: &[f64]) -> Result<Direction> {
    let up = t.windows(2).any(|w| w[1] > w[0]);
    let down = t.windows(2).any(|w| w[1] < w[0]);
    match (up, down) {
        (false, false) => Ok(Direction::Constant),
        (true, false) => Ok(Direction::Up),
        (false, true) => Ok(Direction::Down),
        (true, true) => Err(Error::InvalidParameter("table is not monotone".into())),
    }
}

/// Deficit of `∫h dμ ∫k dμ ≤ μ(ℝ) ∫hk dμ` for tables monotone in the same direction.
///
/// Small tables use `½ ΣΣ wᵢwⱼ (hᵢ-hⱼ)(kᵢ-kⱼ)`, where every term is nonnegative.
pub fn correlation_check(h: &[f64], k: &[f64], weights: &[f64]) -> Result<VerificationReport> {
    let n = h.len();
    if n == 0 || k.len() != n || weights.len() != n {
        return Err(Error::InvalidParameter(format!(
            "tables need equal nonzero lengths, got {}, {}, {}",
            n,
            k.len(),
            weights.len()
        )));
    }
    if h.iter().chain(k).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite table entry".into()));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidParameter("weights must be finite and nonnegative".into()));
    }
    match (direction(h)?, direction(k)?) {
        (Direction::Up, Direction::Down) | (Direction::Down, Direction::Up) => return Err(Error::MixedMonotonicity),
        _ => {}
    }
    let mass: f64 = weights.iter().sum();
    let ih: f64 = weights.iter().zip(h).map(|(w, a)| w * a).sum();
    let ik: f64 = weights.iter().zip(k).map(|(w, b)| w * b).sum();
    let ihk: f64 = weights.iter().zip(h).zip(k).map(|((w, a), b)| w * a * b).sum();
    let deficit = if n <= PAIRWISE_LIMIT {
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in i + 1..n {
                row += weights[j] * (h[i] - h[j]) * (k[i] - k[j]);
            }
            acc += weights[i] * row;
        }
        acc
    } else {
        mass * ihk - ih * ik
    };
    let q = quantities([("mu", mass), ("int h", ih), ("int k", ik), ("int hk", ihk)]);
    let opts = VerifyOptions { tolerance: Some(CORRELATION_TOLERANCE), ..Default::default() };
    Ok(VerificationReport::new("correlation", q, deficit, 0.0, &opts))
}

/// Deficit of `f₁(x) f₂(x) ≤ x ∫₀ˣ f₁'f₂'`, exact for the interpolants.
pub fn chebyshev_pointwise_bound(f1: &Profile, f2: &Profile, x: f64) -> Result<VerificationReport> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::InvalidParameter(format!("x must lie in (0, 1], got {x}")));
    }
    let mut integral = 0.0;
    for_each_common_cell(f1, f2, x, |a, b, d1, d2| integral += d1 * d2 * (b - a));
    let product = f1.value_at(x) * f2.value_at(x);
    let q = quantities([("x", x), ("f1(x) f2(x)", product), ("int_0^x f1'f2'", integral)]);
    Ok(VerificationReport::new("chebyshev_pointwise", q, x * integral - product, 0.0, &VerifyOptions::default()))
}
