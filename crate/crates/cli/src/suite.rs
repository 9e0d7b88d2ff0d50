//! The randomized battery behind `suite`: every verifier at least once,
//! random batteries aggregated into one report each.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use santalo_core::convex::ConvexGridFunction;
use santalo_core::families::{random_profile, FamilyKind, FamilySpec};
use santalo_core::inequalities::report::quantities;
use santalo_core::inequalities::{
    basic_identity_residual, chebyshev_pointwise_bound, correlation_check, et_chain_residual, et_deficit,
    moment_ordering_gap, profile_inequality_gap, profile_inequality_gap_with, santalo_product, transform_check,
    unconditional_verify, weighted_product_gap, VerificationReport, VerifyOptions,
};
use santalo_core::transport::{brute_force_cost, dual_feasibility_gap, monotone_cost, DiscreteMeasure};

use crate::jobs::UNCOND_T;
use crate::{CliError, Outcome, Settings};

const TRANSPORT_TOLERANCE: f64 = 1e-9;
const DUAL_GAP_TOLERANCE: f64 = 1e-8;
const CHEBYSHEV_POINTS: usize = 10;

type Job<'a> = Box<dyn Fn() -> Result<(String, VerificationReport), CliError> + Send + Sync + 'a>;

fn rng_for(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Folds a battery into the report with the smallest margin
/// `deficit + tolerance`; it passes iff every member passed.
pub fn aggregate(reports: Vec<VerificationReport>) -> VerificationReport {
    let count = reports.len() as f64;
    let failures = reports.iter().filter(|r| !r.passed).count() as f64;
    let min_deficit = reports.iter().map(|r| r.deficit).fold(f64::INFINITY, f64::min);
    let mut worst = reports
        .into_iter()
        .min_by(|a, b| (a.deficit + a.tolerance).total_cmp(&(b.deficit + b.tolerance)))
        .expect("nonempty battery");
    worst.quantities.insert("count".into(), count);
    worst.quantities.insert("failures".into(), failures);
    worst.quantities.insert("min deficit".into(), min_deficit);
    worst
}

fn fixed(label: &str, f: impl Fn() -> Result<VerificationReport, CliError> + Send + Sync + 'static) -> Job<'static> {
    let label = label.to_string();
    Box::new(move || Ok((label.clone(), f().map_err(|e| e.in_job(&label))?)))
}

fn potential(kind: FamilyKind) -> Result<ConvexGridFunction, CliError> {
    Ok(FamilySpec::new(kind).potential()?)
}

fn potential_jobs() -> Vec<Job<'static>> {
    use FamilyKind::*;
    let mut jobs = Vec::new();
    let all = [Gaussian, Laplace, ShiftedExponential, Power { p: 1.5 }, Power { p: 3.0 }, UniformIndicator];
    for kind in all.clone() {
        let name = FamilySpec::new(kind.clone()).name();
        jobs.push(fixed(&format!("transform_{name}"), move || Ok(transform_check(&potential(kind.clone())?)?)));
    }
    for kind in all {
        let name = FamilySpec::new(kind.clone()).name();
        jobs.push(fixed(&format!("product_{name}"), move || Ok(santalo_product(&potential(kind.clone())?)?)));
    }
    for kind in [Gaussian, Laplace, ShiftedExponential, Power { p: 1.5 }, Power { p: 2.0 }, Power { p: 3.0 }] {
        let name = FamilySpec::new(kind.clone()).name();
        jobs.push(fixed(&format!("identity_{name}"), move || Ok(basic_identity_residual(&potential(kind.clone())?)?)));
    }
    // the chain needs V and V* both essentially continuous
    for kind in [Gaussian, Power { p: 3.0 }] {
        let name = FamilySpec::new(kind.clone()).name();
        jobs.push(fixed(&format!("chain_{name}"), move || Ok(et_chain_residual(&potential(kind.clone())?)?)));
    }
    for kind in [Gaussian, Laplace] {
        let name = FamilySpec::new(kind.clone()).name();
        jobs.push(fixed(&format!("ordering_{name}"), move || Ok(moment_ordering_gap(&potential(kind.clone())?)?)));
    }
    let et_pairs = [(Gaussian, Gaussian), (Laplace, Laplace), (Laplace, TrapezoidProfile { eps: 0.1 })];
    for (a, b) in et_pairs {
        let label = format!("et_{}_vs_{}", FamilySpec::new(a.clone()).name(), FamilySpec::new(b.clone()).name());
        jobs.push(fixed(&label, move || {
            Ok(et_deficit(&FamilySpec::new(a.clone()).measure()?, &FamilySpec::new(b.clone()).measure()?)?)
        }));
    }
    jobs.push(fixed("profile_linear_cap_mirrored", || {
        let f = FamilySpec::new(FamilyKind::LinearCapProfile { eps: 0.1 }).profile()?;
        Ok(profile_inequality_gap(&f, &f.reflect())?)
    }));
    jobs.push(fixed("weighted_linear_cap_mirrored", || {
        let f = FamilySpec::new(FamilyKind::LinearCapProfile { eps: 0.1 }).profile()?;
        Ok(weighted_product_gap(&f, &f.reflect())?)
    }));
    for kind in [UnconditionalL1, UnconditionalGaussian, UnconditionalLp { p: 4.0 }] {
        let name = FamilySpec::new(kind.clone()).name();
        jobs.push(fixed(&format!("uncond_{name}"), move || {
            Ok(unconditional_verify(&FamilySpec::new(kind.clone()).unconditional()?, &UNCOND_T)?)
        }));
    }
    jobs
}

fn profile_battery(seed: u64, n: usize, symmetric: bool) -> Result<VerificationReport, CliError> {
    let mut rng = rng_for(seed, 1 + symmetric as u64);
    let pairs = (0..n)
        .map(|_| Ok((random_profile(&mut rng, symmetric)?, random_profile(&mut rng, symmetric)?)))
        .collect::<Result<Vec<_>, santalo_core::Error>>()?;
    let c = if symmetric { 4.0 } else { std::f64::consts::E };
    let reports = pairs
        .par_iter()
        .map(|(f, g)| profile_inequality_gap_with(f, g, &VerifyOptions::with_c(c)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(reports))
}

fn weighted_battery(seed: u64, n: usize) -> Result<VerificationReport, CliError> {
    let mut rng = rng_for(seed, 3);
    let pairs = (0..n)
        .map(|i| {
            let sym = i % 2 == 0;
            Ok((random_profile(&mut rng, sym)?, random_profile(&mut rng, sym)?))
        })
        .collect::<Result<Vec<_>, santalo_core::Error>>()?;
    let reports = pairs.par_iter().map(|(f, g)| weighted_product_gap(f, g)).collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(reports))
}

fn correlation_battery(seed: u64, n: usize) -> Result<VerificationReport, CliError> {
    let mut rng = rng_for(seed, 4);
    let mut reports = Vec::with_capacity(n);
    for _ in 0..n {
        let len = rng.gen_range(1..=64);
        let mut h: Vec<f64> = (0..len).map(|_| rng.gen_range(-5.0..5.0)).collect();
        h.sort_by(f64::total_cmp);
        let mut k: Vec<f64> = h.iter().map(|x| x.powi(3) + x).collect();
        if rng.gen::<bool>() {
            h.reverse();
            k.reverse();
        }
        let w: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0)).collect();
        reports.push(correlation_check(&h, &k, &w)?);
    }
    Ok(aggregate(reports))
}

fn chebyshev_battery(seed: u64, profiles: usize) -> Result<VerificationReport, CliError> {
    let mut rng = rng_for(seed, 5);
    let mut reports = Vec::with_capacity(profiles * CHEBYSHEV_POINTS);
    for _ in 0..profiles {
        let f = random_profile(&mut rng, false)?;
        let g = random_profile(&mut rng, false)?;
        for _ in 0..CHEBYSHEV_POINTS {
            let x = 1.0 - rng.gen::<f64>();
            reports.push(chebyshev_pointwise_bound(&f, &g, x)?);
        }
    }
    Ok(aggregate(reports))
}

fn random_line_measure(rng: &mut ChaCha8Rng, len: usize) -> Result<DiscreteMeasure, CliError> {
    let atoms: Vec<Vec<f64>> = (0..len).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
    Ok(DiscreteMeasure::uniform(atoms)?)
}

fn transport_battery(seed: u64, n: usize) -> Result<VerificationReport, CliError> {
    let mut rng = rng_for(seed, 6);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let len = rng.gen_range(1..=8);
        let m1 = random_line_measure(&mut rng, len)?;
        let m2 = random_line_measure(&mut rng, len)?;
        let (exact, _) = brute_force_cost(&m1, &m2)?;
        worst = worst.max((monotone_cost(&m1, &m2)? - exact).abs());
    }
    let q = quantities([("count", n as f64), ("max |monotone - exact|", worst)]);
    let opts = VerifyOptions { tolerance: Some(TRANSPORT_TOLERANCE), ..Default::default() };
    Ok(VerificationReport::new("transport_oracle", q, -worst, 0.0, &opts))
}

fn dual_gap_battery(seed: u64, n: usize) -> Result<VerificationReport, CliError> {
    let mut rng = rng_for(seed, 7);
    let mut min_gap = f64::INFINITY;
    for _ in 0..n {
        let (a, b, c) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(-2.0..2.0));
        let f = ConvexGridFunction::from_fn(-3.0, 3.0, 601, |x| a * x * x + b * (x - c).abs())?;
        let (l1, l2) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let m1 = random_line_measure(&mut rng, l1)?;
        let (smin, smax) = f.slope_range();
        let ys: Vec<Vec<f64>> = (0..l2).map(|_| vec![rng.gen_range(smin..=smax)]).collect();
        let m2 = DiscreteMeasure::uniform(ys)?;
        min_gap = min_gap.min(dual_feasibility_gap(&m1, &m2, &f)?);
    }
    let q = quantities([("count", n as f64), ("min gap", min_gap)]);
    let opts = VerifyOptions { tolerance: Some(DUAL_GAP_TOLERANCE), ..Default::default() };
    Ok(VerificationReport::new("dual_feasibility", q, min_gap, 0.0, &opts))
}

fn battery_jobs(seed: u64, n: usize) -> Vec<Job<'static>> {
    vec![
        fixed("random_profiles_symmetric", move || profile_battery(seed, n, true)),
        fixed("random_profiles_general", move || profile_battery(seed, n, false)),
        fixed("random_weighted", move || weighted_battery(seed, n / 2)),
        fixed("random_correlation", move || correlation_battery(seed, n)),
        fixed("random_chebyshev", move || chebyshev_battery(seed, n / 5)),
        fixed("random_transport", move || transport_battery(seed, n / 2)),
        fixed("random_dual_gap", move || dual_gap_battery(seed, n / 2)),
    ]
}

pub fn run(s: &Settings) -> Result<Vec<Outcome>, CliError> {
    if s.pairs == 0 {
        return Err(CliError::Spec("--pairs must be positive".into()));
    }
    let n = s.pairs.max(5);
    let jobs: Vec<Job> = potential_jobs().into_iter().chain(battery_jobs(s.seed, n)).collect();
    let results = jobs.par_iter().map(|job| job()).collect::<Result<Vec<_>, _>>()?;
    Ok(results
        .into_iter()
        .map(|(label, report)| {
            let report = match s.tolerance {
                Some(t) => report.with_tolerance(t),
                None => report,
            };
            let spec = json!({ "seed": s.seed, "pairs": n, "tolerance": s.tolerance });
            Outcome::new("suite", label, spec, report)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(deficit: f64, tolerance: f64) -> VerificationReport {
        let opts = VerifyOptions { tolerance: Some(tolerance), ..Default::default() };
        VerificationReport::new("r", Default::default(), deficit, 0.0, &opts)
    }

    #[test]
    fn aggregate_keeps_the_smallest_margin() {
        let a = aggregate(vec![report(0.5, 1e-6), report(-1e-7, 1e-6), report(2e-7, 1e-9)]);
        assert!(a.passed);
        assert_eq!(a.deficit, 2e-7);
        assert_eq!(a.quantity("min deficit"), Some(-1e-7));
        let b = aggregate(vec![report(0.5, 1e-6), report(-1e-3, 1e-6)]);
        assert!(!b.passed);
        assert_eq!(b.quantity("failures"), Some(1.0));
    }
}
