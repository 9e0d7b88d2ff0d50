use std::f64::consts::E;

use crate::convex::{legendre_transform_with, ConvexGridFunction, GridFunction, TailMode};
use crate::error::{Error, Result};
use crate::inequalities::report::{quantities, richardson_error, VerificationReport, VerifyOptions};
use crate::measures::{normalize, LogConcaveMeasure};
use crate::quadrature::simpson;
use crate::transport::{potential_pair_cost, quantile_correlation};

/// Closed sides of the dual grid run until `V*` has risen this much.
const DUAL_TAIL_RISE: f64 = 40.0;
const MIN_DUAL_CELLS: usize = 16384;
/// Dual cells per primal cell.
const DUAL_REFINEMENT: usize = 4;
const MAX_DUAL_SAMPLES: usize = 1 << 21;
/// Quantile resolution for correlations between moment measures.
const ORDERING_RESOLUTION: usize = 1 << 16;
/// Evenness tolerance used to pick the symmetric constant.
pub const EVENNESS_TOL: f64 = 1e-10;

/// `c = 4` for even potentials, `e` otherwise, unless overridden.
pub fn santalo_constant(v: &GridFunction, opts: &VerifyOptions) -> f64 {
    opts.c.unwrap_or(if v.is_even(EVENNESS_TOL) { 4.0 } else { E })
}

/// The conjugate on a dual grid that carries all of the mass of `e^{-V*}`.
///
/// Slope bounds are dual nodes. An open side (finite `V` at the grid end) is
/// continued past the grid, so `V*` is `+∞` beyond the slope bound; one such
/// node is kept as a sentinel. A closed side at `x_e` makes `V*` grow like
/// `x_e·y`, and the grid runs until that growth reaches 40.
pub fn santalo_dual(v: &ConvexGridFunction) -> Result<ConvexGridFunction> {
    let (a, b) = v.finite_window();
    if b <= a {
        return Err(Error::DegenerateFunction);
    }
    let (mut smin, mut smax) = v.slope_range();
    if smax - smin <= 1e-9 * (1.0 + smin.abs().max(smax.abs())) {
        // a single slope up to rounding
        let mid = 0.5 * (smin + smax);
        (smin, smax) = (mid, mid);
    }
    let left = if v.open_left() {
        None
    } else {
        let xe = v.x(a);
        if xe >= 0.0 {
            return Err(Error::InfiniteMass(format!("domain starts at {xe} ≥ 0; e^(-V*) is not integrable at -∞")));
        }
        Some(DUAL_TAIL_RISE / -xe)
    };
    let right = if v.open_right() {
        None
    } else {
        let xe = v.x(b);
        if xe <= 0.0 {
            return Err(Error::InfiniteMass(format!("domain ends at {xe} ≤ 0; e^(-V*) is not integrable at +∞")));
        }
        Some(DUAL_TAIL_RISE / xe)
    };
    let span = smax - smin;
    let tails = left.unwrap_or(0.0) + right.unwrap_or(0.0);
    if span <= 0.0 && tails == 0.0 {
        return Err(Error::NoMass);
    }
    let cells = (DUAL_REFINEMENT * (v.len() - 1)).max(MIN_DUAL_CELLS);
    let mut delta = if span > 0.0 { span / cells as f64 } else { tails / cells as f64 };
    if (span + tails) / delta > (MAX_DUAL_SAMPLES - 3) as f64 {
        delta = (span + tails) / (MAX_DUAL_SAMPLES - 3) as f64;
    }
    let inner = if span > 0.0 { (span / delta).ceil().max(1.0) as usize } else { 0 };
    if span > 0.0 {
        delta = span / inner as f64;
    }
    let nodes = |t: Option<f64>| t.map_or(1, |len| (len / delta).ceil() as usize);
    let (nl, nr) = (nodes(left), nodes(right));
    let lo = smin - nl as f64 * delta;
    let hi = smax + nr as f64 * delta;
    legendre_transform_with(v.as_grid(), lo, hi, nl + inner + nr + 1, TailMode::Extend)
}

/// `∫ e^{-g}` by Simpson over the finite window of `g`.
pub fn window_mass(g: &GridFunction) -> Result<f64> {
    let (a, b) = g.finite_window();
    if b < a + 2 {
        return Err(Error::NoMass);
    }
    let vals: Vec<f64> = g.values()[a..=b].iter().map(|v| (-v).exp()).collect();
    let m = simpson(&vals, g.step());
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InfiniteMass(format!("mass {m}")));
    }
    Ok(m)
}

/// Mass of `e^{-g}` cut off at open grid ends, continuing `g` linearly.
pub fn open_tail_mass(g: &GridFunction) -> f64 {
    let n = g.len();
    let v = g.values();
    let h = g.step();
    let width = g.hi() - g.lo();
    let tail = |end: f64, outward_slope: f64| {
        if outward_slope > 0.0 {
            (-end).exp() / outward_slope
        } else {
            (-end).exp() * width
        }
    };
    let mut t = 0.0;
    if g.open_left() && v[1].is_finite() {
        t += tail(v[0], (v[0] - v[1]) / h);
    }
    if g.open_right() && v[n - 2].is_finite() {
        t += tail(v[n - 1], (v[n - 1] - v[n - 2]) / h);
    }
    t
}

fn product_parts(v: &ConvexGridFunction) -> Result<(f64, f64)> {
    let z = normalize(v)?.normalizer();
    let zs = window_mass(santalo_dual(v)?.as_grid())?;
    Ok((z, zs))
}

/// `∫e^{-V} · ∫e^{-V*}` against `cⁿ`.
pub fn santalo_product(v: &ConvexGridFunction) -> Result<VerificationReport> {
    santalo_product_with(v, &VerifyOptions::default())
}

pub fn santalo_product_with(v: &ConvexGridFunction, opts: &VerifyOptions) -> Result<VerificationReport> {
    let (z, zs) = product_parts(v)?;
    let product = z * zs;
    let err = v.coarsen().and_then(|c| product_parts(&c).ok()).map_or(0.0, |(a, b)| richardson_error(product, a * b))
        + product * open_tail_mass(v) / z;
    let c = santalo_constant(v, opts);
    let q = quantities([("Z", z), ("Z*", zs), ("product", product), ("c", c)]);
    Ok(VerificationReport::new("santalo_product", q, product - c, err, opts))
}

/// `∫ V* dν` with `V*` interpolated on its dual grid.
///
/// Cell slopes lie in the slope range up to rounding, so they are clamped
/// into the finite window of the conjugate.
fn conjugate_against_moment(m: &LogConcaveMeasure, vs: &GridFunction) -> Result<f64> {
    let (a, b) = vs.finite_window();
    let (lo, hi) = (vs.x(a), vs.x(b));
    let val = m.moment_expect(|s| vs.value_at(s.clamp(lo, hi)).unwrap_or(f64::NAN));
    if val.is_finite() {
        Ok(val)
    } else {
        Err(Error::Numerical("moment measure leaves the finite domain of the conjugate".into()))
    }
}

struct IdentityTerms {
    neg_log_z: f64,
    conj_moment: f64,
    transport: f64,
    entropy: f64,
    continuous: bool,
}

impl IdentityTerms {
    fn compute(v: &ConvexGridFunction) -> Result<Self> {
        let m = normalize(v)?;
        let vs = santalo_dual(v)?;
        Ok(Self {
            neg_log_z: -m.log_normalizer(),
            conj_moment: conjugate_against_moment(&m, &vs)?,
            transport: potential_pair_cost(&m),
            entropy: m.entropy(),
            continuous: m.essentially_continuous(),
        })
    }

    fn residual(&self) -> f64 {
        self.neg_log_z - (-self.conj_moment + self.transport + self.entropy)
    }
}

/// Residual of `-log Z = -∫V* dν + 𝒯(ν, η) + H(η)`.
///
/// Without essential continuity the identity is still evaluated with the
/// quadrature value of `𝒯`; the `essentially_continuous` quantity is 0 then.
pub fn basic_identity_residual(v: &ConvexGridFunction) -> Result<VerificationReport> {
    basic_identity_residual_with(v, &VerifyOptions::default())
}

pub fn basic_identity_residual_with(v: &ConvexGridFunction, opts: &VerifyOptions) -> Result<VerificationReport> {
    let t = IdentityTerms::compute(v)?;
    let residual = t.residual();
    let err = v
        .coarsen()
        .and_then(|c| IdentityTerms::compute(&c).ok())
        .map_or(0.0, |c| richardson_error(residual, c.residual()));
    let q = quantities([
        ("-log Z", t.neg_log_z),
        ("int V* dnu", t.conj_moment),
        ("T(nu,eta)", t.transport),
        ("H(eta)", t.entropy),
        ("residual", residual),
        ("essentially_continuous", f64::from(u8::from(t.continuous))),
    ]);
    Ok(VerificationReport::new("basic_identity", q, -residual.abs(), err, opts))
}

/// Both basic identities, for `V` and for `V*`.
struct ChainTerms {
    log_zz: f64,
    conj_moment: f64,
    primal_moment: f64,
    entropy: f64,
    entropy_dual: f64,
    moment_correlation: f64,
    continuous: (bool, bool),
}

impl ChainTerms {
    fn compute(v: &ConvexGridFunction, with_correlation: bool) -> Result<Self> {
        let m = normalize(v)?;
        let vs = santalo_dual(v)?;
        let ms = normalize(&vs)?;
        let (a, b) = v.finite_window();
        let (lo, hi) = (v.x(a), v.x(b));
        let primal_moment = ms.moment_expect(|s| v.value_at(s.clamp(lo, hi)).unwrap_or(f64::NAN));
        if !primal_moment.is_finite() {
            return Err(Error::Numerical("dual moment measure leaves the domain of V".into()));
        }
        let moment_correlation = if with_correlation {
            let nu = m.moment_measure_with(ORDERING_RESOLUTION);
            let nus = ms.moment_measure_with(ORDERING_RESOLUTION);
            quantile_correlation(&nu, &nus)?
        } else {
            0.0
        };
        Ok(Self {
            log_zz: m.log_normalizer() + ms.log_normalizer(),
            conj_moment: conjugate_against_moment(&m, &vs)?,
            primal_moment,
            entropy: m.entropy(),
            entropy_dual: ms.entropy(),
            moment_correlation,
            continuous: (m.essentially_continuous(), ms.essentially_continuous()),
        })
    }

    fn residual(&self) -> f64 {
        -self.log_zz - (-(self.conj_moment + self.primal_moment) + self.entropy + self.entropy_dual + 2.0)
    }
}

/// Residual of the sum of the two basic identities with `𝒯 = n` substituted:
/// `-log(Z Z*) = -(∫V* dν + ∫V dν*) + H(η) + H(η*) + 2n`.
pub fn et_chain_residual(v: &ConvexGridFunction) -> Result<VerificationReport> {
    let opts = VerifyOptions::default();
    let t = ChainTerms::compute(v, false)?;
    let residual = t.residual();
    let err = v
        .coarsen()
        .and_then(|c| ChainTerms::compute(&c, false).ok())
        .map_or(0.0, |c| richardson_error(residual, c.residual()));
    let q = quantities([
        ("-log(Z Z*)", -t.log_zz),
        ("int V* dnu", t.conj_moment),
        ("int V dnu*", t.primal_moment),
        ("H(eta)", t.entropy),
        ("H(eta*)", t.entropy_dual),
        ("residual", residual),
        ("essentially_continuous", f64::from(u8::from(t.continuous.0))),
        ("essentially_continuous*", f64::from(u8::from(t.continuous.1))),
    ]);
    Ok(VerificationReport::new("et_chain", q, -residual.abs(), err, &opts))
}

/// `∫V* dν + ∫V dν* - 𝒯(ν, ν*)`, nonnegative by Young's inequality.
pub fn moment_ordering_gap(v: &ConvexGridFunction) -> Result<VerificationReport> {
    let t = ChainTerms::compute(v, true)?;
    let bound = t.conj_moment + t.primal_moment;
    let q = quantities([
        ("T(nu,nu*)", t.moment_correlation),
        ("int V* dnu", t.conj_moment),
        ("int V dnu*", t.primal_moment),
    ]);
    Ok(VerificationReport::new("moment_ordering", q, bound - t.moment_correlation, 0.0, &VerifyOptions::default()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::moreau_yosida;

    const INF: f64 = f64::INFINITY;

    fn cgf(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> ConvexGridFunction {
        ConvexGridFunction::from_fn(lo, hi, n, f).unwrap()
    }

    fn shifted_exponential() -> ConvexGridFunction {
        cgf(-2.0, 40.0, 8401, |x| if x < -1.0 - 1e-12 { INF } else { 1.0 + x })
    }

    fn gaussian() -> ConvexGridFunction {
        cgf(-10.0, 10.0, 8193, |x| x * x / 2.0)
    }

    fn laplace() -> ConvexGridFunction {
        cgf(-40.0, 40.0, 16001, |x| x.abs() + 2f64.ln())
    }

    #[test]
    fn products_of_extremizers_and_gaussian() {
        let lap = santalo_product(&laplace()).unwrap();
        assert!((lap.quantity("product").unwrap() - 4.0).abs() < 1e-4);
        assert_eq!(lap.quantity("c"), Some(4.0));
        assert!(lap.passed);

        let exp = santalo_product(&shifted_exponential()).unwrap();
        assert!((exp.quantity("product").unwrap() - E).abs() < 1e-4);
        assert_eq!(exp.quantity("c"), Some(E));
        assert!(exp.passed);

        let tau = 2.0 * std::f64::consts::PI;
        let gau = santalo_product(&gaussian()).unwrap();
        assert!((gau.quantity("product").unwrap() - tau).abs() < 1e-4);
        assert!((gau.deficit - (tau - 4.0)).abs() < 1e-4);
    }

    #[test]
    fn unconstrained_constant_can_be_overridden() {
        let r = santalo_product_with(&gaussian(), &VerifyOptions::with_c(E)).unwrap();
        assert_eq!(r.quantity("c"), Some(E));
    }

    #[test]
    fn dual_rejects_non_integrable_conjugates() {
        // domain [1, ∞): e^{-V*} does not decay at -∞
        let v = cgf(0.0, 10.0, 1001, |x| if x < 1.0 - 1e-12 { INF } else { x });
        assert!(matches!(santalo_dual(&v), Err(Error::InfiniteMass(_))));
    }

    #[test]
    fn regularized_norm_product_stays_above_four() {
        let g = GridFunction::from_fn(-400.0, 400.0, 64001, f64::abs).unwrap();
        let mut last = f64::INFINITY;
        for k in [1.0, 4.0, 16.0] {
            let p = santalo_product(&moreau_yosida(&g, k).unwrap()).unwrap().quantity("product").unwrap();
            assert!(p > 4.0 && p < last, "k={k}: {p}");
            last = p;
        }
    }

    #[test]
    fn basic_identity_holds() {
        for v in [
            gaussian(),
            laplace(),
            shifted_exponential(),
            cgf(-16.0, 16.0, 16001, |x| x.abs().powf(1.5) / 1.5),
            cgf(-6.0, 6.0, 8001, |x| x.abs().powi(3) / 3.0),
        ] {
            let r = basic_identity_residual(&v).unwrap();
            assert!(r.quantity("residual").unwrap().abs() < 1e-5, "{r:?}");
            assert!(r.passed, "{r:?}");
        }
        let exp = basic_identity_residual(&shifted_exponential()).unwrap();
        assert_eq!(exp.quantity("essentially_continuous"), Some(0.0));
    }

    #[test]
    fn chain_and_ordering() {
        for v in [gaussian(), cgf(-16.0, 16.0, 16001, |x| x.abs().powf(1.5) / 1.5)] {
            let chain = et_chain_residual(&v).unwrap();
            assert!(chain.quantity("residual").unwrap().abs() < 1e-4, "{chain:?}");
            let order = moment_ordering_gap(&v).unwrap();
            assert!(order.deficit >= -1e-6, "{order:?}");
        }
        // Gaussian: both moment measures are standard normal, so 𝒯 = 1 and ∫V*dν = ∫V dν* = 1/2
        let order = moment_ordering_gap(&gaussian()).unwrap();
        assert!((order.quantity("T(nu,nu*)").unwrap() - 1.0).abs() < 1e-4);
    }
}
