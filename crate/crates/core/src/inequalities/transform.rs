use crate::convex::{default_dual_range, legendre_transform, ConvexGridFunction};
use crate::error::Result;
use crate::inequalities::report::{quantities, VerificationReport, VerifyOptions};

/// Biconjugation on the grid: deficit of `sup |f** - f| ≤ 2 h (b - a)` over
/// the finite samples, where `h` is the step and `[a, b]` the slope range.
///
/// The dual grid has as many samples as `f` and spans the slope range
/// widened by one on each side.
pub fn transform_check(f: &ConvexGridFunction) -> Result<VerificationReport> {
    let (dlo, dhi) = default_dual_range(f);
    let g = legendre_transform(f, dlo, dhi, f.len())?;
    let back = legendre_transform(&g, f.lo(), f.hi(), f.len())?;
    let (i0, i1) = f.finite_window();
    let err = (i0..=i1).map(|i| (back.values()[i] - f.values()[i]).abs()).fold(0.0, f64::max);
    let (a, b) = f.slope_range();
    let bound = 2.0 * f.step() * (b - a);
    // Young's inequality on the sampled pair
    let young = (i0..=i1)
        .step_by((i1 - i0) / 64 + 1)
        .flat_map(|i| g.xs().zip(g.values()).map(move |(y, gy)| (i, y, gy)))
        .map(|(i, y, gy)| f.values()[i] + gy - f.x(i) * y)
        .fold(f64::INFINITY, f64::min);
    let q = quantities([("sup |f** - f|", err), ("bound", bound), ("slope range", b - a), ("min young gap", young)]);
    Ok(VerificationReport::new("transform", q, bound - err, 0.0, &VerifyOptions::default()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_and_kinked_potentials() {
        let inf = f64::INFINITY;
        let cases: Vec<ConvexGridFunction> = vec![
            ConvexGridFunction::from_fn(-10.0, 10.0, 2049, |x| x * x / 2.0).unwrap(),
            ConvexGridFunction::from_fn(-8.0, 8.0, 1601, f64::abs).unwrap(),
            ConvexGridFunction::from_fn(-2.0, 2.0, 401, |x| if x.abs() > 1.0 + 1e-12 { inf } else { 0.0 }).unwrap(),
            ConvexGridFunction::from_fn(-3.0, 3.0, 1001, |x| x.abs().powi(4) / 4.0 + x).unwrap(),
        ];
        for f in &cases {
            let r = transform_check(f).unwrap();
            assert!(r.passed, "{r:?}");
            assert!(r.quantity("min young gap").unwrap() >= -1e-12, "{r:?}");
        }
    }
}
