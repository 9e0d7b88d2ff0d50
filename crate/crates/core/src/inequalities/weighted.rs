use std::f64::consts::LN_2;

use crate::error::Result;
use crate::inequalities::report::{quantities, VerificationReport, VerifyOptions};
use crate::measures::{for_each_common_cell, Profile};

/// Antiderivative of `log(2 - 2t)` on `[0, 1)`.
fn log_kernel_primitive(t: f64) -> f64 {
    let u = 1.0 - t;
    -u * (2.0 * u).ln() + u
}

/// `φ(t) = 1 - log 2 - log(1 - t)`.
pub fn phi(t: f64) -> f64 {
    1.0 - LN_2 - (-t).ln_1p()
}

/// `Φ(t) = ∫₀ᵗ φ = t(2 - log 2) + (1 - t) log(1 - t)`.
pub fn phi_primitive(t: f64) -> f64 {
    let u = 1.0 - t;
    let tail = if u > 0.0 { u * u.ln() } else { 0.0 };
    t * (2.0 - LN_2) + tail
}

/// Deficit of `∫₀^{1/2} f'g' log(2 - 2t) dt ≤ ∫₀^{1/2} f'g' dt`.
///
/// The slopes are constant on each common cell, so every integral is exact.
/// Quantities include the auxiliary integrals `∫f'φ`, `∫f'g'φ` over `[0, 1/2]`
/// and `Φ(1/2)`.
pub fn weighted_product_gap(f: &Profile, g: &Profile) -> Result<VerificationReport> {
    let (mut plain, mut weighted, mut f_phi, mut fg_phi) = (0.0, 0.0, 0.0, 0.0);
    for_each_common_cell(f, g, 0.5, |a, b, df, dg| {
        let p = df * dg;
        plain += p * (b - a);
        weighted += p * (log_kernel_primitive(b) - log_kernel_primitive(a));
        let phi_cell = phi_primitive(b) - phi_primitive(a);
        f_phi += df * phi_cell;
        fg_phi += p * phi_cell;
    });
    let q = quantities([
        ("int f'g'", plain),
        ("int f'g' log(2-2t)", weighted),
        ("int f' phi", f_phi),
        ("int f'g' phi", fg_phi),
        ("Phi(1/2)", phi_primitive(0.5)),
    ]);
    Ok(VerificationReport::new("weighted_product", q, plain - weighted, 0.0, &VerifyOptions::default()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let n = 200_000;
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn primitives() {
        let k = quad(|t| (2.0 - 2.0 * t).ln(), 0.1, 0.45);
        assert!((k - (log_kernel_primitive(0.45) - log_kernel_primitive(0.1))).abs() < 1e-9);
        assert!((quad(phi, 0.0, 0.5) - phi_primitive(0.5)).abs() < 1e-9);
        assert_eq!(phi_primitive(0.0), 0.0);
        assert!(phi_primitive(0.5) > 0.0);
    }

    #[test]
    fn tent_pair() {
        let tent = Profile::from_fn(1000, |t| t.min(1.0 - t)).unwrap();
        let r = weighted_product_gap(&tent, &tent).unwrap();
        let lhs = log_kernel_primitive(0.5) - log_kernel_primitive(0.0);
        assert!((r.quantity("int f'g' log(2-2t)").unwrap() - lhs).abs() < 1e-12);
        assert!((r.deficit - (0.5 - lhs)).abs() < 1e-12);
        // the deficit is ∫f'g'φ
        assert!((r.deficit - r.quantity("int f'g' phi").unwrap()).abs() < 1e-12);
        assert!(r.deficit >= -1e-8);
    }

    #[test]
    fn linear_caps_and_mirrors() {
        for eps in [0.2, 0.1, 0.05] {
            let f = Profile::from_fn(2000, |t| t.min((1.0 - eps) * (1.0 - t) / eps)).unwrap();
            let r = weighted_product_gap(&f, &f.reflect()).unwrap();
            assert!(r.deficit >= -1e-8, "eps={eps}: {r:?}");
            assert!(r.quantity("int f' phi").unwrap() >= -1e-12);
        }
    }
}
