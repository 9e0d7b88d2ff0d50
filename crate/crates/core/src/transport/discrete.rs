use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finitely supported probability measure on `ℝⁿ`, `n ≤ 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDiscrete", into = "RawDiscrete")]
pub struct DiscreteMeasure {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDiscrete {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<RawDiscrete> for DiscreteMeasure {
    type Error = Error;
    fn try_from(r: RawDiscrete) -> Result<Self> {
        Self::new(r.atoms, r.weights)
    }
}

impl From<DiscreteMeasure> for RawDiscrete {
    fn from(m: DiscreteMeasure) -> Self {
        RawDiscrete { atoms: m.atoms, weights: m.weights }
    }
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure("atoms and weights must have equal, nonzero length".into()));
        }
        let dim = atoms[0].len();
        if !(1..=3).contains(&dim) || atoms.iter().any(|a| a.len() != dim) {
            return Err(Error::InvalidMeasure("atoms must share a dimension between 1 and 3".into()));
        }
        if atoms.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure("atoms must be finite".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        for i in 0..atoms.len() {
            for j in 0..i {
                if atoms[i] == atoms[j] {
                    return Err(Error::InvalidMeasure(format!("atoms {j} and {i} coincide")));
                }
            }
        }
        Ok(Self { atoms, weights })
    }

    /// Equal weights on distinct atoms.
    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let n = atoms.len().max(1);
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    /// Merges repeated atoms and renormalizes, e.g. for pushforwards.
    pub fn merged(atoms: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        let mut out_a: Vec<Vec<f64>> = Vec::new();
        let mut out_w: Vec<f64> = Vec::new();
        for (a, &w) in atoms.iter().zip(weights) {
            match out_a.iter().position(|b| b == a) {
                Some(k) => out_w[k] += w,
                None => {
                    out_a.push(a.clone());
                    out_w.push(w);
                }
            }
        }
        let total: f64 = out_w.iter().sum();
        out_w.iter_mut().for_each(|w| *w /= total);
        Self::new(out_a, out_w)
    }

    /// One-dimensional convenience constructor.
    pub fn on_line(points: &[f64], weights: &[f64]) -> Result<Self> {
        Self::new(points.iter().map(|&x| vec![x]).collect(), weights.to_vec())
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    /// Atoms multiplied by `a`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        Self::new(self.atoms.iter().map(|x| x.iter().map(|v| a * v).collect()).collect(), self.weights.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Joint weights over atom pairs, row `i` for the first marginal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coupling {
    joint_weights: Vec<Vec<f64>>,
}

impl Coupling {
    pub fn new(joint_weights: Vec<Vec<f64>>) -> Self {
        Self { joint_weights }
    }

    pub fn joint_weights(&self) -> &[Vec<f64>] {
        &self.joint_weights
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.joint_weights.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let n = self.joint_weights.first().map_or(0, Vec::len);
        (0..n).map(|j| self.joint_weights.iter().map(|r| r[j]).sum()).collect()
    }

    /// Nonnegative with the given marginals within `tol`.
    pub fn has_marginals(&self, m1: &DiscreteMeasure, m2: &DiscreteMeasure, tol: f64) -> bool {
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
        self.joint_weights.iter().flatten().all(|&w| w >= 0.0)
            && close(&self.row_sums(), m1.weights())
            && close(&self.column_sums(), m2.weights())
    }

    /// `Σ π_ij x_i·y_j`.
    pub fn correlation(&self, m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> f64 {
        let mut acc = 0.0;
        for (i, row) in self.joint_weights.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if w != 0.0 {
                    acc += w * dot(&m1.atoms()[i], &m2.atoms()[j]);
                }
            }
        }
        acc
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_and_json() {
        assert!(DiscreteMeasure::on_line(&[0.0, 0.0], &[0.5, 0.5]).is_err());
        assert!(DiscreteMeasure::on_line(&[0.0, 1.0], &[0.5, 0.6]).is_err());
        assert!(DiscreteMeasure::on_line(&[0.0, 1.0], &[1.0, 0.0]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![0.0; 4]], vec![1.0]).is_err());
        let m = DiscreteMeasure::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.25, 0.75]).unwrap();
        let s = m.to_json();
        assert_eq!(s, r#"{"atoms":[[1.0,0.0],[0.0,1.0]],"weights":[0.25,0.75]}"#);
        assert_eq!(DiscreteMeasure::from_json(&s).unwrap(), m);
        assert!(DiscreteMeasure::from_json(r#"{"atoms":[[1.0]],"weights":[0.5]}"#).is_err());
        let merged = DiscreteMeasure::merged(&[vec![1.0], vec![2.0], vec![1.0]], &[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(merged.weights(), &[0.75, 0.25]);
    }

    #[test]
    fn coupling_marginals() {
        let m = DiscreteMeasure::on_line(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        let c = Coupling::new(vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
        assert!(c.has_marginals(&m, &m, 1e-12));
        assert_eq!(c.correlation(&m, &m), 1.0);
        assert_eq!(c.to_json(), "[[0.5,0.0],[0.0,0.5]]");
    }
}
