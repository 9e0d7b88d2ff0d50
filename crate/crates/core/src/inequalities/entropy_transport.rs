use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::inequalities::report::{quantities, richardson_error, VerificationReport, VerifyOptions};
use crate::inequalities::santalo::EVENNESS_TOL;
use crate::measures::{derivative_product_integral, normalize, LogConcaveMeasure, Profile};
use crate::transport::quantile_correlation_estimate;

/// Quantile resolution for `𝒯(ν₁, ν₂)`. The midpoint error near the ends
/// decays like `log N / N`, so 1e-5 needs about a million cells.
pub const ET_QUANTILE_RESOLUTION: usize = 1 << 20;

struct EtTerms {
    h1: f64,
    h2: f64,
    transport: f64,
    tail: f64,
}

impl EtTerms {
    fn compute(m1: &LogConcaveMeasure, m2: &LogConcaveMeasure, resolution: usize) -> Result<Self> {
        let nu1 = m1.moment_measure_with(resolution);
        let nu2 = m2.moment_measure_with(resolution);
        let t = quantile_correlation_estimate(&nu1, &nu2)?;
        Ok(Self { h1: m1.entropy(), h2: m2.entropy(), transport: t.value, tail: t.tail_estimate })
    }

    fn deficit(&self, c: f64) -> f64 {
        self.transport - (c * E * E).ln() - self.h1 - self.h2
    }
}

/// `c = 4` when both potentials are even, `e` otherwise, unless overridden.
pub fn et_constant(m1: &LogConcaveMeasure, m2: &LogConcaveMeasure, opts: &VerifyOptions) -> f64 {
    let even = m1.potential().is_even(EVENNESS_TOL) && m2.potential().is_even(EVENNESS_TOL);
    opts.c.unwrap_or(if even { 4.0 } else { E })
}

/// Deficit of `H(η₁) + H(η₂) ≤ -log(ce²) + 𝒯(ν₁, ν₂)` in dimension one.
pub fn et_deficit(m1: &LogConcaveMeasure, m2: &LogConcaveMeasure) -> Result<VerificationReport> {
    et_deficit_with(m1, m2, &VerifyOptions::default())
}

pub fn et_deficit_with(
    m1: &LogConcaveMeasure,
    m2: &LogConcaveMeasure,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    if !(m1.essentially_continuous() && m2.essentially_continuous()) {
        return Err(Error::NotEssentiallyContinuous);
    }
    let c = et_constant(m1, m2, opts);
    let t = EtTerms::compute(m1, m2, ET_QUANTILE_RESOLUTION)?;
    let deficit = t.deficit(c);
    let coarse = m1
        .potential()
        .coarsen()
        .zip(m2.potential().coarsen())
        .and_then(|(a, b)| Some((normalize(&a).ok()?, normalize(&b).ok()?)))
        .and_then(|(a, b)| EtTerms::compute(&a, &b, ET_QUANTILE_RESOLUTION / 2).ok());
    let err = coarse.map_or(0.0, |ct| richardson_error(deficit, ct.deficit(c))) + t.tail;
    let q = quantities([("H1", t.h1), ("H2", t.h2), ("T(nu1,nu2)", t.transport), ("c", c)]);
    Ok(VerificationReport::new("et_deficit", q, deficit, err, opts))
}

/// `c = 4` when both profiles are symmetric about 1/2, `e` otherwise.
pub fn profile_constant(f1: &Profile, f2: &Profile, opts: &VerifyOptions) -> f64 {
    let sym = |f: &Profile| f.is_symmetric(EVENNESS_TOL * f.max());
    opts.c.unwrap_or(if sym(f1) && sym(f2) { 4.0 } else { E })
}

fn reject_interior_zero(f: &Profile) -> Result<()> {
    let v = f.values();
    match (1..v.len() - 1).find(|&j| v[j] <= 0.0) {
        Some(j) => Err(Error::DegenerateProfile(format!("vanishes inside (0, 1) at t = {}", f.t(j)))),
        None => Ok(()),
    }
}

/// Deficit of `∫₀¹ log(f₁f₂) ≤ -log(e²c) + ∫₀¹ f₁'f₂'`.
///
/// Both integrals are exact for the piecewise-linear interpolants.
pub fn profile_inequality_gap(f1: &Profile, f2: &Profile) -> Result<VerificationReport> {
    profile_inequality_gap_with(f1, f2, &VerifyOptions::default())
}

pub fn profile_inequality_gap_with(f1: &Profile, f2: &Profile, opts: &VerifyOptions) -> Result<VerificationReport> {
    reject_interior_zero(f1)?;
    reject_interior_zero(f2)?;
    let c = profile_constant(f1, f2, opts);
    let (l1, l2) = (f1.log_integral(), f2.log_integral());
    let d = derivative_product_integral(f1, f2);
    let deficit = -(E * E * c).ln() + d - l1 - l2;
    let q = quantities([("int log f1", l1), ("int log f2", l2), ("int f1'f2'", d), ("c", c)]);
    Ok(VerificationReport::new("profile_inequality", q, deficit, 0.0, opts))
}
