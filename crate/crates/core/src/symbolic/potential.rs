use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::group::VertexId;

/// A depth-k locally constant function on the coding's shift space: one value
/// per admissible (k+1)-vertex path. Paths through the augmentation vertex
/// carry no value; paths starting at `*` are included so Birkhoff sums along
/// initial paths can be formed.
#[derive(Debug, Clone)]
pub struct CylinderPotential {
    depth: usize,
    values: BTreeMap<Vec<VertexId>, f64>,
    resolution_error: f64,
}

impl CylinderPotential {
    pub fn new(
        depth: usize,
        values: BTreeMap<Vec<VertexId>, f64>,
        resolution_error: f64,
    ) -> Result<Self> {
        if !resolution_error.is_finite() {
            return Err(Error::Degenerate("non-finite resolution error".into()));
        }
        for k in values.keys() {
            if k.len() != depth + 1 {
                return Err(Error::DepthMismatch(k.len().saturating_sub(1), depth));
            }
        }
        Ok(CylinderPotential { depth, values, resolution_error })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn resolution_error(&self) -> f64 {
        self.resolution_error
    }

    pub fn get(&self, cylinder: &[VertexId]) -> Option<f64> {
        self.values.get(cylinder).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<VertexId>, f64)> {
        self.values.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min_value(&self) -> f64 {
        self.values.values().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Pointwise combination over the common key set; keys present in only
    /// one operand are dropped (they concern cylinders the other potential
    /// could not resolve).
    pub fn combine(&self, other: &CylinderPotential, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.depth != other.depth {
            return Err(Error::DepthMismatch(self.depth, other.depth));
        }
        let mut values = BTreeMap::new();
        for (k, v) in &self.values {
            if let Some(&w) = other.values.get(k) {
                values.insert(k.clone(), f(*v, w));
            }
        }
        CylinderPotential::new(self.depth, values, self.resolution_error + other.resolution_error)
    }

    /// Φ = other − self is `self.sub_from(other)`; kept as the direct form:
    /// returns `self − other`.
    pub fn sub(&self, other: &CylinderPotential) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        let values = self.values.iter().map(|(k, &v)| (k.clone(), c * v)).collect();
        CylinderPotential {
            depth: self.depth,
            values,
            resolution_error: self.resolution_error * c.abs(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(depth: usize, keys: &[Vec<VertexId>], v: f64) -> CylinderPotential {
        let values = keys.iter().map(|k| (k.clone(), v)).collect();
        CylinderPotential::new(depth, values, 0.0).unwrap()
    }

    #[test]
    fn arithmetic() {
        let keys = vec![vec![2, 3], vec![3, 2]];
        let a = constant(1, &keys, 3.0);
        let b = constant(1, &keys, 1.0);
        let d = a.sub(&b).unwrap();
        assert_eq!(d.get(&[2, 3]), Some(2.0));
        let s = a.scale(0.5);
        assert_eq!(s.get(&[3, 2]), Some(1.5));
    }

    #[test]
    fn depth_mismatch_rejected() {
        let a = constant(1, &[vec![2, 3]], 1.0);
        let b = constant(2, &[vec![2, 3, 2]], 1.0);
        assert!(matches!(a.sub(&b), Err(Error::DepthMismatch(1, 2))));
    }
}
