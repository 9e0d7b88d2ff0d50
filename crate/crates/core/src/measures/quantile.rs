use crate::error::{Error, Result};

/// Default number of interior quantile points.
pub const DEFAULT_QUANTILE_RESOLUTION: usize = 4096;

/// A measure on the line given by its quantile function on the cell
/// midpoints `t_i = (i + 1/2)/N` of `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileMeasure {
    values: Vec<f64>,
}

impl QuantileMeasure {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidMeasure("empty quantile table".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure("quantile table must be finite".into()));
        }
        Ok(Self { values })
    }

    pub fn from_fn(resolution: usize, q: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..resolution).map(|i| q(t_mid(i, resolution))).collect())
    }

    /// Exact quantiles of a weighted set of points on the line.
    ///
    /// Uses the generalized inverse `inf{x : F(x) ≥ t}`.
    pub fn from_discrete(atoms: &[f64], weights: &[f64], resolution: usize) -> Result<Self> {
        if atoms.len() != weights.len() || atoms.is_empty() {
            return Err(Error::InvalidMeasure("atoms and weights must have equal, nonzero length".into()));
        }
        let mut pairs: Vec<(f64, f64)> = atoms.iter().copied().zip(weights.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = weights.iter().sum();
        let mut cum = Vec::with_capacity(pairs.len());
        let mut acc = 0.0;
        for (_, w) in &pairs {
            acc += w / total;
            cum.push(acc);
        }
        let last = cum.len() - 1;
        cum[last] = 1.0;
        let mut k = 0;
        let values = (0..resolution)
            .map(|i| {
                let t = t_mid(i, resolution);
                while k < last && cum[k] < t {
                    k += 1;
                }
                pairs[k].0
            })
            .collect();
        Self::new(values)
    }

    pub fn resolution(&self) -> usize {
        self.values.len()
    }

    pub fn t(&self, i: usize) -> f64 {
        t_mid(i, self.values.len())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// `∫_0^1 g(q(t)) dt` by the midpoint rule.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.values.iter().map(|&v| g(v)).sum::<f64>() / self.values.len() as f64
    }
}

pub(crate) fn t_mid(i: usize, n: usize) -> f64 {
    (i as f64 + 0.5) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_quantiles_follow_the_generalized_inverse() {
        let q = QuantileMeasure::from_discrete(&[1.0, -1.0], &[0.5, 0.5], 8).unwrap();
        assert_eq!(q.values(), &[-1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0]);
        assert!(q.is_monotone());
        assert!((q.expect(|x| x * x) - 1.0).abs() < 1e-15);
    }
}
