//! Single-command runs, with sweeps over `--eps` and `--p`.

use rayon::prelude::*;
use serde_json::json;

use santalo_core::families::{FamilyKind, FamilySpec};
use santalo_core::inequalities::{
    et_deficit_with, profile_inequality_gap_with, santalo_product_with, transform_check, unconditional_verify_with,
    weighted_product_gap, VerificationReport, VerifyOptions,
};
use santalo_core::measures::Profile;

use crate::args::{Command, Settings};
use crate::{CliError, Outcome};

/// `t` values at which the unconditional run samples `F`.
pub const UNCOND_T: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

fn uses_eps(name: &str) -> bool {
    matches!(name, "trapezoid_profile" | "linear_cap_profile")
}

fn uses_p(name: &str) -> bool {
    matches!(name, "power" | "unconditional_lp")
}

/// Builds a family from its name and the swept parameters.
pub fn family(name: &str, s: &Settings, eps: Option<f64>, p: Option<f64>, seed: u64) -> Result<FamilySpec, CliError> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Spec(format!("family `{name}` needs --{flag}")));
    let kind = match name {
        "gaussian" => FamilyKind::Gaussian,
        "laplace" => FamilyKind::Laplace,
        "shifted_exponential" => FamilyKind::ShiftedExponential,
        "power" => FamilyKind::Power { p: need(p, "p")? },
        "uniform_indicator" => FamilyKind::UniformIndicator,
        "trapezoid_profile" => FamilyKind::TrapezoidProfile { eps: need(eps, "eps")? },
        "linear_cap_profile" => FamilyKind::LinearCapProfile { eps: need(eps, "eps")? },
        "random_profile" => FamilyKind::RandomProfile { seed, symmetric: s.symmetric },
        "unconditional_l1" => FamilyKind::UnconditionalL1,
        "unconditional_gaussian" => FamilyKind::UnconditionalGaussian,
        "unconditional_lp" => FamilyKind::UnconditionalLp { p: need(p, "p")? },
        "custom_csv" => FamilyKind::CustomCsv {
            path: s.path.clone().ok_or_else(|| CliError::Spec("family `custom_csv` needs --path".into()))?,
        },
        other => return Err(CliError::Spec(format!("unknown family `{other}`"))),
    };
    let mut spec = FamilySpec::new(kind);
    spec.grid = s.grid;
    spec.dim = s.dim;
    spec.validate()?;
    Ok(spec)
}

fn sweep(values: &[f64], active: bool) -> Vec<Option<f64>> {
    if active && !values.is_empty() {
        values.iter().copied().map(Some).collect()
    } else {
        vec![None]
    }
}

/// Family pairs for every point of the sweep. The second family defaults
/// to the first; a second random profile uses the next seed.
pub fn family_pairs(s: &Settings, two_sided: bool) -> Result<Vec<(FamilySpec, Option<FamilySpec>)>, CliError> {
    let name1 = s.family.as_deref().ok_or_else(|| CliError::Spec("missing --family".into()))?;
    let name2 = two_sided.then(|| s.family2.as_deref().unwrap_or(name1));
    let any = |f: fn(&str) -> bool| f(name1) || name2.is_some_and(f);
    let mut pairs = Vec::new();
    for eps in sweep(&s.eps, any(uses_eps)) {
        for p in sweep(&s.p, any(uses_p)) {
            let f1 = family(name1, s, eps, p, s.seed)?;
            let f2 = name2.map(|n| family(n, s, eps, p, s.seed.wrapping_add(1))).transpose()?;
            pairs.push((f1, f2));
        }
    }
    Ok(pairs)
}

fn options(s: &Settings) -> VerifyOptions {
    VerifyOptions { c: s.c, tolerance: s.tolerance }
}

fn second_profile(f: &FamilySpec, s: &Settings) -> Result<Profile, CliError> {
    let p = f.profile()?;
    Ok(if s.mirror { p.reflect() } else { p })
}

fn apply_tolerance(r: VerificationReport, s: &Settings) -> VerificationReport {
    match s.tolerance {
        Some(t) => r.with_tolerance(t),
        None => r,
    }
}

fn run_one(
    command: Command,
    f1: &FamilySpec,
    f2: Option<&FamilySpec>,
    s: &Settings,
) -> Result<VerificationReport, CliError> {
    let opts = options(s);
    let report = match command {
        Command::Transform => transform_check(&f1.potential()?)?,
        Command::Product => santalo_product_with(&f1.potential()?, &opts)?,
        Command::Et => et_deficit_with(&f1.measure()?, &f2.expect("two-sided").measure()?, &opts)?,
        Command::Profile => {
            profile_inequality_gap_with(&f1.profile()?, &second_profile(f2.expect("two-sided"), s)?, &opts)?
        }
        Command::Weighted => weighted_product_gap(&f1.profile()?, &second_profile(f2.expect("two-sided"), s)?)?,
        Command::Uncond => unconditional_verify_with(&f1.unconditional()?, &UNCOND_T, &opts)?,
        Command::Suite => unreachable!("suite has its own runner"),
    };
    Ok(apply_tolerance(report, s))
}

fn label(f1: &FamilySpec, f2: Option<&FamilySpec>) -> String {
    match f2 {
        Some(f2) => format!("{}_vs_{}", f1.name(), f2.name()),
        None => f1.name(),
    }
}

pub fn run(command: Command, s: &Settings) -> Result<Vec<Outcome>, CliError> {
    let two_sided = matches!(command, Command::Et | Command::Profile | Command::Weighted);
    let pairs = family_pairs(s, two_sided)?;
    pairs
        .par_iter()
        .map(|(f1, f2)| {
            let label = label(f1, f2.as_ref());
            let report = run_one(command, f1, f2.as_ref(), s).map_err(|e| e.in_job(&label))?;
            let spec = json!({
                "family": f1,
                "family2": f2,
                "c": s.c,
                "tolerance": s.tolerance,
                "mirror": s.mirror,
            });
            Ok(Outcome::new(command.name(), label, spec, report))
        })
        .collect()
}
