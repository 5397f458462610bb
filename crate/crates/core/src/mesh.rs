//! One-dimensional meshes on the radial interval [0, R].

use crate::error::{Error, Result};

/// Partition of [0, R] into elements. Node 0 sits exactly at the origin and
/// the last node exactly at R; every element has positive length.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMesh {
    radius: f64,
    nodes: Vec<f64>,
}

impl RadialMesh {
    /// Uniform mesh with `num_elements` elements of length R / num_elements.
    pub fn uniform(radius: f64, num_elements: usize) -> Result<Self> {
        if num_elements == 0 {
            return Err(Error::InvalidArgument(
                "num_elements must be at least 1".into(),
            ));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "radius must be positive and finite, got {radius}"
            )));
        }
        let n = num_elements;
        let mut nodes: Vec<f64> = (0..=n)
            .map(|i| radius * (i as f64) / (n as f64))
            .collect();
        // endpoints are pinned exactly regardless of rounding in the interior
        nodes[0] = 0.0;
        nodes[n] = radius;
        Ok(Self { radius, nodes })
    }

    /// Mesh from an explicit node list (supports grading; construction only
    /// validates the invariants).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument("need at least two nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidArgument("first node must be 0".into()));
        }
        if nodes.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::InvalidArgument(
                "node coordinates must be strictly increasing".into(),
            ));
        }
        let radius = *nodes.last().unwrap();
        Ok(Self { radius, nodes })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn num_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Endpoints (left, right) of element `e`.
    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    pub fn element_len(&self, e: usize) -> f64 {
        self.nodes[e + 1] - self.nodes[e]
    }

    /// Index of the element containing `r`; ties at interior nodes resolve to
    /// the element on the right, and r = R belongs to the last element.
    pub fn locate(&self, r: f64) -> Result<usize> {
        if !(0.0..=self.radius).contains(&r) {
            return Err(Error::OutOfDomain {
                value: r,
                lo: 0.0,
                hi: self.radius,
            });
        }
        let k = self.nodes.partition_point(|&x| x <= r);
        Ok(k.saturating_sub(1).min(self.num_elements() - 1))
    }
}
