//! Composite Newton–Cotes rules on uniform samples.

/// Integrates uniformly spaced samples with composite Simpson.
///
/// An odd number of intervals is closed with the 3/8 rule on the last three
/// intervals; a single interval falls back to the trapezoid.
pub fn simpson(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * step * (values[0] + values[1]),
        3 => step / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let intervals = n - 1;
            let simpson_end = if intervals.is_multiple_of(2) { n - 1 } else { n - 4 };
            let mut acc = 0.0;
            if simpson_end >= 2 {
                acc += values[0] + values[simpson_end];
                for (i, v) in values[1..simpson_end].iter().enumerate() {
                    acc += if i % 2 == 0 { 4.0 * v } else { 2.0 * v };
                }
                acc *= step / 3.0;
            }
            if intervals % 2 == 1 {
                let t = &values[simpson_end..];
                acc += 3.0 * step / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3]);
            }
            acc
        }
    }
}

/// Simpson weights matching [`simpson`], so that `Σ w_i v_i == simpson(v)`.
pub fn simpson_weights(n: usize, step: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => {}
        2 => {
            w[0] = 0.5 * step;
            w[1] = 0.5 * step;
        }
        3 => {
            w[0] = step / 3.0;
            w[1] = 4.0 * step / 3.0;
            w[2] = step / 3.0;
        }
        _ => {
            let intervals = n - 1;
            let simpson_end = if intervals.is_multiple_of(2) { n - 1 } else { n - 4 };
            if simpson_end >= 2 {
                w[0] += step / 3.0;
                w[simpson_end] += step / 3.0;
                for (i, wi) in w[1..simpson_end].iter_mut().enumerate() {
                    *wi += if i % 2 == 0 { 4.0 } else { 2.0 } * step / 3.0;
                }
            }
            if intervals % 2 == 1 {
                let c = 3.0 * step / 8.0;
                w[simpson_end] += c;
                w[simpson_end + 1] += 3.0 * c;
                w[simpson_end + 2] += 3.0 * c;
                w[simpson_end + 3] += c;
            }
        }
    }
    w
}

/// Exact integral of `exp(-v)` over one cell where `v` is linear from `v0` to `v1`.
pub fn exp_linear_cell(v0: f64, v1: f64, width: f64) -> f64 {
    if !v0.is_finite() || !v1.is_finite() {
        return 0.0;
    }
    let d = v1 - v0;
    if d.abs() < 1e-8 {
        // series of (1 - e^{-d}) / d
        width * (-v0).exp() * (1.0 - d / 2.0 + d * d / 6.0)
    } else {
        width * (-v0).exp() * (-(-d).exp_m1()) / d
    }
}

/// Exact integral of `log(f)` over one cell where `f` is linear from `f0` to `f1`, both ≥ 0.
pub fn log_linear_cell(f0: f64, f1: f64, width: f64) -> f64 {
    let xlogx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    let d = f1 - f0;
    let scale = f0.abs().max(f1.abs());
    if d.abs() <= 1e-12 * scale {
        width * f0.max(f1).ln()
    } else {
        width * ((xlogx(f1) - xlogx(f0)) / d - 1.0)
    }
}
