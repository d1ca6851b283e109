//! Euclidean picture of one solved face in the Poincaré disk.
//!
//! The dual circle is centered at the origin. Each generalized circle meets
//! the dual circle orthogonally at the two points bounding its angular
//! sector, which determines its Euclidean center and radius. Circles,
//! horocycles and hypercycles are all Euclidean circles in this model;
//! hypercycles extend past the unit circle and must be clipped to it.

use super::{classify, CircleKind, FaceConfig, FacePacking};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiskCircleRole {
    Dual,
    /// Generalized circle of the face vertex at this local position.
    Vertex(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiskCircle {
    pub role: DiskCircleRole,
    pub kind: CircleKind,
    pub center: [f64; 2],
    pub radius: f64,
    /// Part of the Euclidean circle lies outside the unit disk.
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceLayout {
    /// Dual circle first, then one circle per face vertex.
    pub circles: Vec<DiskCircle>,
    /// Angular positions of the tangency points, starting at 0; the last
    /// entry equals the cone angle.
    pub tangency_angles: Vec<f64>,
}

pub fn face_layout(packing: &FacePacking, cfg: &FaceConfig) -> Result<FaceLayout> {
    // Euclidean radius of a circle about the origin with hyperbolic radius
    // arccoth k_f is tanh(R/2) = 1/(k_f + √(k_f² − 1)).
    let rho = 1.0 / (packing.dual_curvature + packing.dual_excess);
    let mut circles = Vec::with_capacity(cfg.len() + 1);
    circles.push(DiskCircle {
        role: DiskCircleRole::Dual,
        kind: CircleKind::Circle,
        center: [0.0, 0.0],
        radius: rho,
        clipped: false,
    });
    let mut cursor = 0.0;
    let mut tangency_angles = vec![0.0];
    for (i, (&theta, &k)) in packing
        .theta_dual
        .iter()
        .zip(cfg.curvatures())
        .enumerate()
    {
        let half = 0.5 * theta;
        let direction = cursor + half;
        let dist = rho / half.cos();
        let radius = rho * half.tan();
        circles.push(DiskCircle {
            role: DiskCircleRole::Vertex(i),
            kind: classify(k)?.kind,
            center: [dist * direction.cos(), dist * direction.sin()],
            radius,
            clipped: dist + radius > 1.0,
        });
        cursor += theta;
        tangency_angles.push(cursor);
    }
    Ok(FaceLayout {
        circles,
        tangency_angles,
    })
}

/// Geodesic curvature of a Euclidean circle inside the Poincaré disk model.
pub fn disk_geodesic_curvature(center: [f64; 2], radius: f64) -> f64 {
    let c2 = center[0] * center[0] + center[1] * center[1];
    (1.0 - c2 + radius * radius) / (2.0 * radius)
}
