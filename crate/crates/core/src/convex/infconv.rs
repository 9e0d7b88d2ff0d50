use crate::convex::grid::{ConvexGridFunction, GridFunction};
use crate::error::{Error, Result};

/// Discrete infimal convolution `(f□g)(x) = min_y f(y) + g(x - y)`.
///
/// The steps must agree or be integer multiples of one another. The result
/// lives on `[f.lo + g.lo, f.hi + g.hi]` with the finer step.
pub fn inf_convolution(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    let (hf, hg) = (f.step(), g.step());
    let (fine, coarse) = if hf <= hg { (hf, hg) } else { (hg, hf) };
    let ratio = (coarse / fine).round();
    if ratio < 1.0 || (coarse - ratio * fine).abs() > 1e-9 * coarse {
        return Err(Error::Incommensurable(hf, hg));
    }
    let r = ratio as usize;
    let (rf, rg) = if hf <= hg { (1, r) } else { (r, 1) };
    let lo = f.lo() + g.lo();
    let hi = f.hi() + g.hi();
    let samples = (f.len() - 1) * rf + (g.len() - 1) * rg + 1;
    let mut out = vec![f64::INFINITY; samples];
    let (fa, fb) = f.finite_window();
    let (ga, gb) = g.finite_window();
    for i in fa..=fb {
        let fi = f.values()[i];
        for j in ga..=gb {
            let k = i * rf + j * rg;
            let v = fi + g.values()[j];
            if v < out[k] {
                out[k] = v;
            }
        }
    }
    GridFunction::new(lo, hi, out)
}

/// `min_y f(y) + k (x - y)²/2` over the grid points `y`, at every grid point `x`.
///
/// Lower envelope of parabolas, linear in the number of samples.
pub fn inf_convolution_quadratic(f: &GridFunction, k: f64) -> Result<GridFunction> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("curvature must be > 0, got {k}")));
    }
    let n = f.len();
    let v = f.values();
    let x = |i: usize| f.x(i);
    // parabola vertex heights shifted into the form k x²/2 - k x q + (v(q) + k q²/2)
    let lift = |q: usize| v[q] + 0.5 * k * x(q) * x(q);
    let cross = |p: usize, q: usize| (lift(q) - lift(p)) / (k * (x(q) - x(p)));
    let mut centers: Vec<usize> = Vec::with_capacity(n);
    let mut bounds: Vec<f64> = Vec::with_capacity(n);
    for q in (0..n).filter(|&q| v[q].is_finite()) {
        while let Some(&p) = centers.last() {
            let s = cross(p, q);
            if s <= *bounds.last().unwrap() {
                centers.pop();
                bounds.pop();
            } else {
                break;
            }
        }
        let s = centers.last().map_or(f64::NEG_INFINITY, |&p| cross(p, q));
        centers.push(q);
        bounds.push(s);
    }
    if centers.is_empty() {
        return Err(Error::DegenerateFunction);
    }
    let mut out = Vec::with_capacity(n);
    let mut c = 0;
    for i in 0..n {
        let xi = x(i);
        while c + 1 < centers.len() && bounds[c + 1] < xi {
            c += 1;
        }
        let q = centers[c];
        let d = xi - x(q);
        out.push(v[q] + 0.5 * k * d * d);
    }
    GridFunction::new(f.lo(), f.hi(), out)
}

/// Moreau–Yosida regularization `V□(k|·|²/2) + |·|²/(2k)` on the grid of `v`.
pub fn moreau_yosida(v: &GridFunction, k: f64) -> Result<ConvexGridFunction> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("k must be > 0, got {k}")));
    }
    let env = inf_convolution_quadratic(v, k)?;
    let vk = env.map(|x, e| e + x * x / (2.0 * k))?;
    ConvexGridFunction::new(vk)
}

/// Young gap `f(x) + f*(y) - x·y`, with linear interpolation between samples.
pub fn young_gap(f: &ConvexGridFunction, fstar: &ConvexGridFunction, x: f64, y: f64) -> Result<f64> {
    Ok(f.value_at(x)? + fstar.value_at(y)? - x * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::conjugate::legendre_transform;

    fn brute_quadratic(f: &GridFunction, k: f64) -> Vec<f64> {
        f.xs()
            .map(|x| f.xs().zip(f.values()).map(|(y, v)| v + 0.5 * k * (x - y) * (x - y)).fold(f64::INFINITY, f64::min))
            .collect()
    }

    #[test]
    fn envelope_matches_brute_force() {
        let inf = f64::INFINITY;
        let f =
            GridFunction::from_fn(-3.0, 3.0, 121, |x| if x.abs() > 2.0 { inf } else { (x - 0.3).abs() + x * x * 0.1 })
                .unwrap();
        for k in [0.5, 1.0, 7.0] {
            let fast = inf_convolution_quadratic(&f, k).unwrap();
            for (a, b) in fast.values().iter().zip(brute_quadratic(&f, k)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quadratics_halve() {
        let f = GridFunction::from_fn(-4.0, 4.0, 801, |x| x * x / 2.0).unwrap();
        let h = f.step();
        let c = inf_convolution(&f, &f).unwrap();
        for (x, v) in c.xs().zip(c.values()) {
            if x.abs() <= 4.0 {
                assert!((v - x * x / 4.0).abs() <= h * h, "x={x}");
            }
        }
    }

    #[test]
    fn indicator_of_origin_is_a_unit() {
        let f = GridFunction::from_fn(-2.0, 2.0, 81, |x| (x - 0.4).powi(2) + x).unwrap();
        let delta = GridFunction::from_fn(-1.0, 1.0, 41, |x| if x.abs() < 1e-9 { 0.0 } else { f64::INFINITY }).unwrap();
        let c = inf_convolution(&f, &delta).unwrap();
        for (x, v) in f.xs().zip(f.values()) {
            assert!((c.value_at(x).unwrap() - v).abs() < 1e-12);
        }
    }

    #[test]
    fn huber_envelope_of_norm() {
        let k = 4.0;
        let f = GridFunction::from_fn(-4.0, 4.0, 1601, f64::abs).unwrap();
        let g = GridFunction::from_fn(-4.0, 4.0, 1601, |x| k * x * x / 2.0).unwrap();
        let c = inf_convolution(&f, &g).unwrap();
        let h = f.step();
        for (x, v) in c.xs().zip(c.values()) {
            if x.abs() <= 3.0 {
                let huber = if x.abs() <= 1.0 / k { k * x * x / 2.0 } else { x.abs() - 1.0 / (2.0 * k) };
                assert!((v - huber).abs() <= k * h * h, "x={x}: {v} vs {huber}");
            }
        }
        let fast = inf_convolution_quadratic(&f, k).unwrap();
        for (x, v) in fast.xs().zip(fast.values()) {
            assert!((c.value_at(x).unwrap() - v).abs() < 1e-12);
        }
    }

    #[test]
    fn incommensurable_grids_are_rejected() {
        let f = GridFunction::from_fn(0.0, 1.0, 11, |x| x).unwrap();
        let g = GridFunction::from_fn(0.0, 1.0, 8, |x| x).unwrap();
        assert!(matches!(inf_convolution(&f, &g), Err(Error::Incommensurable(..))));
    }

    #[test]
    fn moreau_yosida_examples() {
        let v = GridFunction::from_fn(-4.0, 4.0, 8001, f64::abs).unwrap();
        let vk = moreau_yosida(&v, 1e6).unwrap();
        assert!(vk.value_at(0.0).unwrap().abs() < 1e-5);
        assert!((vk.value_at(1.0).unwrap() - 1.0).abs() < 1e-4);

        let inf = f64::INFINITY;
        let ind = GridFunction::from_fn(-4.0, 4.0, 801, |x| if x.abs() > 1.0 + 1e-9 { inf } else { 0.0 }).unwrap();
        let vk = moreau_yosida(&ind, 1.0).unwrap();
        let h = ind.step();
        for (x, v) in vk.xs().zip(vk.values()) {
            let d = (x.abs() - 1.0).max(0.0);
            assert!((v - (d * d / 2.0 + x * x / 2.0)).abs() <= h * h);
        }
        assert!(moreau_yosida(&ind, 0.0).is_err());
    }

    #[test]
    fn envelope_increases_in_k_and_regularization_converges() {
        let v = GridFunction::from_fn(-3.0, 3.0, 601, |x| x.abs() + 0.5 * x).unwrap();
        let a = inf_convolution_quadratic(&v, 2.0).unwrap();
        let b = inf_convolution_quadratic(&v, 8.0).unwrap();
        for ((x, y), w) in a.values().iter().zip(b.values()).zip(v.values()) {
            assert!(x <= &(y + 1e-12) && y <= &(w + 1e-12));
        }
        // not monotone in k near the origin: the quadratic term dominates there
        let n = GridFunction::from_fn(-3.0, 3.0, 601, f64::abs).unwrap();
        let (v2, v8) = (moreau_yosida(&n, 2.0).unwrap(), moreau_yosida(&n, 8.0).unwrap());
        assert!(v2.value_at(0.5).unwrap() < v8.value_at(0.5).unwrap());
        assert!(v2.value_at(2.0).unwrap() > v8.value_at(2.0).unwrap());
    }

    #[test]
    fn conjugate_of_regularized_norm() {
        let inf = f64::INFINITY;
        let v = GridFunction::from_fn(-80.0, 80.0, 80001, f64::abs).unwrap();
        for k in [1.0, 2.0, 4.0, 16.0] {
            let vk = moreau_yosida(&v, k).unwrap();
            let lhs = legendre_transform(&vk, -3.0, 3.0, 601).unwrap();
            // (V* + |·|²/2k) □ (k|·|²/2) with V* the indicator of [-1, 1]
            let inner =
                GridFunction::from_fn(-3.0, 3.0, 6001, |y| if y.abs() > 1.0 + 1e-9 { inf } else { y * y / (2.0 * k) })
                    .unwrap();
            let rhs = inf_convolution_quadratic(&inner, k).unwrap();
            let closed = |y: f64| {
                if y.abs() <= (1.0 + k * k) / (k * k) {
                    k * y * y / (2.0 * (1.0 + k * k))
                } else {
                    1.0 / (2.0 * k) + k * (y.abs() - 1.0).powi(2) / 2.0
                }
            };
            for (y, a) in lhs.xs().zip(lhs.values()) {
                let b = rhs.value_at(y).unwrap();
                assert!((a - closed(y)).abs() < 1e-4, "k={k} y={y}: {a} vs {}", closed(y));
                assert!((b - closed(y)).abs() < 1e-4, "k={k} y={y}: {b} vs {}", closed(y));
            }
        }
    }

    #[test]
    fn young_gap_examples() {
        let f = ConvexGridFunction::from_fn(-4.0, 4.0, 801, |x| x * x / 2.0).unwrap();
        let fs = legendre_transform(&f, -4.0, 4.0, 801).unwrap();
        assert!(young_gap(&f, &fs, 1.0, 1.0).unwrap().abs() < 1e-9);
        assert!((young_gap(&f, &fs, 1.0, 0.0).unwrap() - 0.5).abs() < 1e-6);
        let n = ConvexGridFunction::from_fn(-4.0, 4.0, 801, f64::abs).unwrap();
        let ns = legendre_transform(&n, -2.0, 2.0, 401).unwrap();
        assert!((young_gap(&n, &ns, 2.0, 0.5).unwrap() - 1.0).abs() < n.step());
        assert!(young_gap(&n, &ns, 5.0, 0.5).is_err());
    }
}
