//! Hyperbolic geometry of a single polygon.
//!
//! A face with `n` vertices carries one generalized circle per vertex
//! (geodesic curvature `k_i > 0`) and a dual circle of curvature `k_f > 1`
//! that meets every generalized circle orthogonally and passes through the
//! tangency points. Each generalized circle subtends an angle `θ_i` at the
//! dual center; the dual curvature is fixed by requiring the angles to sum
//! to the cone angle `α_f = 2π − Y_f`.
//!
//! Internally the dual circle is parameterized by `c = √(k_f² − 1)`, which
//! stays well conditioned as `k_f → 1⁺`. In that variable
//!
//! ```text
//! θ_i   = 2·atan(c / k_i)
//! L_i   = (2 k_i / k_f) · S(x_i),   x_i = (k_i² − 1) / k_f²
//! S(x)  = atan(√x)/√x  (x > 0),  atanh(√−x)/√−x  (x < 0),  1  (x = 0)
//! ```
//!
//! which covers circles, horocycles and hypercycles with one expression.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::roots::NewtonBracket;

pub mod layout;

pub use layout::{face_layout, DiskCircle, DiskCircleRole};

/// Curvatures with `|k - 1|` below this are classified as horocycles.
pub const HOROCYCLE_TOL: f64 = 1e-9;

/// Below this `|x|` the arc ratio `S(x)` and its derivative use a Taylor series.
const SERIES_BAND: f64 = 1e-4;

/// Angle tolerance for the dual-curvature solve.
pub const ANGLE_TOL: f64 = 1e-12;

const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CircleKind {
    Hypercycle,
    Horocycle,
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub kind: CircleKind,
    /// Hyperbolic radius; `None` for a horocycle.
    ///
    /// For a hypercycle this is the distance to its axis geodesic.
    pub radius: Option<f64>,
}

pub fn classify(k: f64) -> Result<Classification> {
    check_curvature(k)?;
    Ok(if (k - 1.0).abs() < HOROCYCLE_TOL {
        Classification {
            kind: CircleKind::Horocycle,
            radius: None,
        }
    } else if k > 1.0 {
        Classification {
            kind: CircleKind::Circle,
            radius: Some((1.0 / k).atanh()),
        }
    } else {
        Classification {
            kind: CircleKind::Hypercycle,
            radius: Some(k.atanh()),
        }
    })
}

fn check_curvature(k: f64) -> Result<()> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "geodesic curvature must be positive and finite, got {k}"
        )))
    }
}

fn check_dual(k_f: f64) -> Result<f64> {
    if k_f.is_finite() && k_f > 1.0 {
        Ok(((k_f - 1.0) * (k_f + 1.0)).sqrt())
    } else {
        Err(Error::domain(format!(
            "dual curvature must exceed 1, got {k_f}"
        )))
    }
}

/// Polygon data: one curvature per vertex and the cone angle at the dual center.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceConfig {
    curvatures: Vec<f64>,
    cone_angle: f64,
}

impl FaceConfig {
    pub fn new(curvatures: Vec<f64>, cone_angle: f64) -> Result<Self> {
        let n = curvatures.len();
        if n < 3 {
            return Err(Error::domain(format!("a face needs at least 3 vertices, got {n}")));
        }
        for &k in &curvatures {
            check_curvature(k)?;
        }
        if !(cone_angle > 0.0 && cone_angle < n as f64 * PI) {
            return Err(Error::domain(format!(
                "cone angle {cone_angle} outside (0, {n}π)"
            )));
        }
        Ok(Self {
            curvatures,
            cone_angle,
        })
    }

    /// Builds a configuration from the discrete Gaussian curvature `Y_f = 2π − α_f`.
    pub fn with_gauss_curvature(curvatures: Vec<f64>, gauss_curvature: f64) -> Result<Self> {
        Self::new(curvatures, 2.0 * PI - gauss_curvature)
    }

    pub fn len(&self) -> usize {
        self.curvatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curvatures.is_empty()
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }

    pub fn cone_angle(&self) -> f64 {
        self.cone_angle
    }

    pub fn gauss_curvature(&self) -> f64 {
        2.0 * PI - self.cone_angle
    }
}

/// Solved geometry of one face.
#[derive(Debug, Clone, PartialEq)]
pub struct FacePacking {
    pub dual_curvature: f64,
    /// `√(k_f² − 1)`, kept separately for accuracy near `k_f = 1`.
    pub dual_excess: f64,
    /// Angle subtended at the dual center by each generalized circle.
    pub theta_dual: Vec<f64>,
    /// Angle of the sub-arc at each generalized circle's own center; `None` for horocycles.
    pub phi_own: Vec<Option<f64>>,
    /// Total geodesic curvature of each sub-arc inside the dual circle.
    pub arc_curvature: Vec<f64>,
    pub area: f64,
}

impl FacePacking {
    /// Hyperbolic length of each sub-arc, `L_i / k_i`.
    pub fn arc_lengths(&self, cfg: &FaceConfig) -> Vec<f64> {
        self.arc_curvature
            .iter()
            .zip(cfg.curvatures())
            .map(|(l, k)| l / k)
            .collect()
    }
}

/// `atan(√x)/√x` analytically continued to `x > -1`; `one_plus_x` is `1 + x`
/// supplied separately so it keeps full precision when `x` is close to `-1`.
fn arc_ratio(x: f64, one_plus_x: f64) -> f64 {
    if x.abs() < SERIES_BAND {
        1.0 + x * (-1.0 / 3.0 + x * (1.0 / 5.0 - x / 7.0))
    } else if x > 0.0 {
        let t = x.sqrt();
        t.atan() / t
    } else {
        let t = (-x).sqrt();
        // atanh(t) = ln(1 + t) - ln(1 - t²)/2
        (t.ln_1p() - 0.5 * one_plus_x.ln()) / t
    }
}

/// `dS/dx = (1/(1+x) − S)/(2x)`.
fn arc_ratio_deriv(x: f64, one_plus_x: f64, s: f64) -> f64 {
    if x.abs() < SERIES_BAND {
        -1.0 / 3.0 + x * (2.0 / 5.0 + x * (-3.0 / 7.0 + x * 4.0 / 9.0))
    } else {
        (1.0 / one_plus_x - s) / (2.0 * x)
    }
}

/// Pointwise quantities for one generalized circle against a dual circle given by `c`.
#[derive(Debug, Clone, Copy)]
struct ArcTerms {
    x: f64,
    one_plus_x: f64,
    ratio: f64,
}

impl ArcTerms {
    fn new(c: f64, k: f64) -> Self {
        let kf2 = 1.0 + c * c;
        let x = (k - 1.0) * (k + 1.0) / kf2;
        let one_plus_x = (k * k + c * c) / kf2;
        Self {
            x,
            one_plus_x,
            ratio: arc_ratio(x, one_plus_x),
        }
    }
}

fn theta_from_excess(c: f64, k: f64) -> f64 {
    2.0 * (c / k).atan()
}

fn arc_from_excess(c: f64, k: f64) -> f64 {
    let kf = (1.0 + c * c).sqrt();
    2.0 * k / kf * ArcTerms::new(c, k).ratio
}

/// Angle at the dual center subtended by a generalized circle of curvature `k_i`.
pub fn theta_dual(k_f: f64, k_i: f64) -> Result<f64> {
    let c = check_dual(k_f)?;
    check_curvature(k_i)?;
    Ok(theta_from_excess(c, k_i))
}

/// Partial derivatives `(∂θ/∂k_f, ∂θ/∂k_i)`.
pub fn theta_dual_derivs(k_f: f64, k_i: f64) -> Result<(f64, f64)> {
    let c = check_dual(k_f)?;
    check_curvature(k_i)?;
    let denom = k_i * k_i + c * c;
    Ok((2.0 * k_i * k_f / (c * denom), -2.0 * c / denom))
}

/// Angle of the sub-arc measured at the generalized circle's own center.
///
/// Undefined for horocycles, whose center is ideal.
pub fn phi_own(k_f: f64, k_i: f64) -> Result<f64> {
    check_dual(k_f)?;
    match classify(k_i)?.kind {
        CircleKind::Horocycle => Err(Error::domain(
            "a horocycle has no finite center; use the arc curvature directly",
        )),
        CircleKind::Circle => Ok(2.0 * (((k_i - 1.0) * (k_i + 1.0)).sqrt() / k_f).atan()),
        CircleKind::Hypercycle => Ok(2.0 * (((1.0 - k_i) * (1.0 + k_i)).sqrt() / k_f).atanh()),
    }
}

/// Total geodesic curvature of the sub-arc of a generalized circle inside the dual circle.
pub fn arc_curvature(k_f: f64, k_i: f64) -> Result<f64> {
    let c = check_dual(k_f)?;
    check_curvature(k_i)?;
    Ok(arc_from_excess(c, k_i))
}

/// Partial derivatives `(∂L/∂k_f, ∂L/∂k_i)` of [`arc_curvature`].
pub fn arc_curvature_derivs(k_f: f64, k_i: f64) -> Result<(f64, f64)> {
    let c = check_dual(k_f)?;
    check_curvature(k_i)?;
    let d = arc_partials(c, k_i);
    Ok((d.wrt_dual, d.wrt_own))
}

#[derive(Debug, Clone, Copy)]
struct ArcPartials {
    wrt_dual: f64,
    wrt_own: f64,
}

fn arc_partials(c: f64, k: f64) -> ArcPartials {
    let kf = (1.0 + c * c).sqrt();
    let terms = ArcTerms::new(c, k);
    let ds = arc_ratio_deriv(terms.x, terms.one_plus_x, terms.ratio);
    ArcPartials {
        wrt_dual: -2.0 * k / (k * k + c * c),
        wrt_own: 2.0 / kf * terms.ratio + 4.0 * k * k / (kf * kf * kf) * ds,
    }
}

/// Dual excess `c = √(k_f² − 1)` solving `Σ 2·atan(c/k_i) = α_f`.
fn solve_excess(cfg: &FaceConfig) -> Result<f64> {
    let alpha = cfg.cone_angle;
    let ks = cfg.curvatures();
    let residual = |c: f64| {
        let mut value = -alpha;
        let mut slope = 0.0;
        for &k in ks {
            value += theta_from_excess(c, k);
            slope += 2.0 * k / (k * k + c * c);
        }
        (value, slope)
    };
    let mut hi = 1.0;
    let mut grow = 0;
    while residual(hi).0 < 0.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 2000 || !hi.is_finite() {
            return Err(Error::NoConvergence {
                iterations: grow,
                residual: residual(hi).0,
            });
        }
    }
    // Relative tolerance for cone angles below one radian.
    NewtonBracket {
        tol: ANGLE_TOL * alpha.min(1.0),
        max_iter: MAX_ITER,
    }
    .solve(residual, 0.0, hi)
}

/// Geodesic curvature of the dual circle for the given face.
pub fn solve_dual_curvature(cfg: &FaceConfig) -> Result<f64> {
    let c = solve_excess(cfg)?;
    Ok((1.0 + c * c).sqrt())
}

pub fn face_solve(cfg: &FaceConfig) -> Result<FacePacking> {
    let c = solve_excess(cfg)?;
    let k_f = (1.0 + c * c).sqrt();
    let ks = cfg.curvatures();
    let theta_dual = ks.iter().map(|&k| theta_from_excess(c, k)).collect();
    let phi_own = ks.iter().map(|&k| phi_own(k_f, k).ok()).collect();
    let arc_curvature: Vec<f64> = ks.iter().map(|&k| arc_from_excess(c, k)).collect();
    let n = ks.len() as f64;
    let area = n * PI - cfg.cone_angle - arc_curvature.iter().sum::<f64>();
    Ok(FacePacking {
        dual_curvature: k_f,
        dual_excess: c,
        theta_dual,
        phi_own,
        arc_curvature,
        area,
    })
}

/// Derivatives of a face's arc curvatures with respect to its vertex curvatures,
/// at fixed cone angle.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceJacobian {
    /// `(i, j)` entry is `∂L_i/∂k_j`.
    pub dl_dk: DMatrix<f64>,
    /// `∂k_f/∂k_j`.
    pub dkf_dk: Vec<f64>,
    /// `d(Σ_i L_i)/dk_j`, the column sums of `dl_dk`.
    pub dsum_dk: Vec<f64>,
}

impl FaceJacobian {
    /// `∂L_i/∂s_j = k_j ∂L_i/∂k_j` with `s = ln k`.
    pub fn dl_ds(&self, cfg: &FaceConfig) -> DMatrix<f64> {
        let mut m = self.dl_dk.clone();
        for (j, &k) in cfg.curvatures().iter().enumerate() {
            m.column_mut(j).scale_mut(k);
        }
        m
    }
}

pub fn face_jacobian(cfg: &FaceConfig) -> Result<FaceJacobian> {
    let c = solve_excess(cfg)?;
    Ok(jacobian_at(cfg, c))
}

/// Face solve and Jacobian sharing one dual-curvature root.
pub fn face_solve_with_jacobian(cfg: &FaceConfig) -> Result<(FacePacking, FaceJacobian)> {
    let packing = face_solve(cfg)?;
    let jac = jacobian_at(cfg, packing.dual_excess);
    Ok((packing, jac))
}

fn jacobian_at(cfg: &FaceConfig, c: f64) -> FaceJacobian {
    let ks = cfg.curvatures();
    let n = ks.len();
    let k_f = (1.0 + c * c).sqrt();
    let partials: Vec<ArcPartials> = ks.iter().map(|&k| arc_partials(c, k)).collect();
    // Σ_m ∂θ_m/∂k_f = (k_f/c) Σ_m 2k_m/(k_m² + c²); the c factors cancel
    // against ∂θ_j/∂k_j = −2c/(k_j² + c²).
    let weight: f64 = ks.iter().map(|&k| k / (k * k + c * c)).sum();
    let dkf_dk: Vec<f64> = ks
        .iter()
        .map(|&k| c * c / (k_f * (k * k + c * c) * weight))
        .collect();
    let mut dl_dk = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = partials[i].wrt_dual * dkf_dk[j];
            if i == j {
                v += partials[i].wrt_own;
            }
            dl_dk[(i, j)] = v;
        }
    }
    let dsum_dk = (0..n).map(|j| dl_dk.column(j).sum()).collect();
    FaceJacobian {
        dl_dk,
        dkf_dk,
        dsum_dk,
    }
}
