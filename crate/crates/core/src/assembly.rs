//! Global curvature quantities assembled face by face.

use nalgebra::{DMatrix, DVector};

use crate::complex::CellComplex;
use crate::error::{Error, Result};
use crate::face::{face_solve, face_solve_with_jacobian, FaceConfig, FacePacking};

/// Asymmetry tolerated in the assembled Jacobian before symmetrization.
pub const SYMMETRY_GUARD: f64 = 1e-8;

/// Per-vertex log-curvatures `s_i = ln k_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingState {
    s: DVector<f64>,
}

impl PackingState {
    pub fn from_log(s: DVector<f64>) -> Result<Self> {
        if s.iter().all(|v| v.is_finite()) {
            Ok(Self { s })
        } else {
            Err(Error::domain("log-curvatures must be finite"))
        }
    }

    pub fn from_curvatures(k: &[f64]) -> Result<Self> {
        if let Some(bad) = k.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::domain(format!("curvature {bad} is not positive")));
        }
        Self::from_log(DVector::from_iterator(k.len(), k.iter().map(|v| v.ln())))
    }

    /// All horocycles.
    pub fn zeros(n: usize) -> Self {
        Self {
            s: DVector::zeros(n),
        }
    }

    pub fn log(&self) -> &DVector<f64> {
        &self.s
    }

    pub fn curvatures(&self) -> DVector<f64> {
        self.s.map(f64::exp)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Global forward-map output.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    /// `L_i = Σ_{f ∋ i} L_{i,f}`.
    pub total: DVector<f64>,
    pub faces: Vec<FacePacking>,
    /// `∂L_i/∂s_j`, symmetrized. Present only when derivatives were requested.
    pub jacobian: Option<DMatrix<f64>>,
    pub weights: Option<Weights>,
}

/// Edge weights `A_ij` and vertex weights `K_i` of the p-th Calabi flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub a: DMatrix<f64>,
    pub k: DVector<f64>,
}

fn face_config(complex: &CellComplex, face: usize, k: &DVector<f64>) -> Result<FaceConfig> {
    let f = &complex.faces()[face];
    FaceConfig::new(f.vertices.iter().map(|&v| k[v]).collect(), f.cone_angle())
        .map_err(|e| e.in_face(face))
}

fn check_len(complex: &CellComplex, state: &PackingState) -> Result<()> {
    if state.len() == complex.vertex_count() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "state has {} entries for {} vertices",
            state.len(),
            complex.vertex_count()
        )))
    }
}

/// Total geodesic curvature at every vertex, with the per-face solutions.
pub fn curvatures(complex: &CellComplex, state: &PackingState) -> Result<CurvatureReport> {
    check_len(complex, state)?;
    let k = state.curvatures();
    let mut total = DVector::zeros(complex.vertex_count());
    let mut faces = Vec::with_capacity(complex.face_count());
    for (fi, face) in complex.faces().iter().enumerate() {
        let cfg = face_config(complex, fi, &k)?;
        let packing = face_solve(&cfg).map_err(|e| e.in_face(fi))?;
        for (&v, l) in face.vertices.iter().zip(&packing.arc_curvature) {
            total[v] += l;
        }
        faces.push(packing);
    }
    Ok(CurvatureReport {
        total,
        faces,
        jacobian: None,
        weights: None,
    })
}

/// Forward map together with the Jacobian in log coordinates and the flow weights.
pub fn full_report(complex: &CellComplex, state: &PackingState) -> Result<CurvatureReport> {
    check_len(complex, state)?;
    let n = complex.vertex_count();
    let k = state.curvatures();
    let mut total = DVector::zeros(n);
    let mut faces = Vec::with_capacity(complex.face_count());
    let mut m: DMatrix<f64> = DMatrix::zeros(n, n);
    let mut kw: DVector<f64> = DVector::zeros(n);
    for (fi, face) in complex.faces().iter().enumerate() {
        let cfg = face_config(complex, fi, &k)?;
        let (packing, jac) = face_solve_with_jacobian(&cfg).map_err(|e| e.in_face(fi))?;
        for (a, &vi) in face.vertices.iter().enumerate() {
            total[vi] += packing.arc_curvature[a];
            kw[vi] += k[vi] * jac.dsum_dk[a];
            for (b, &vj) in face.vertices.iter().enumerate() {
                m[(vi, vj)] += k[vj] * jac.dl_dk[(a, b)];
            }
        }
        faces.push(packing);
    }
    let asym = (&m - m.transpose()).amax();
    let scale = m.amax().max(f64::MIN_POSITIVE);
    if asym > SYMMETRY_GUARD * scale.max(1.0) {
        return Err(Error::Asymmetric(asym));
    }
    let m = (&m + m.transpose()) * 0.5;
    let mut a = -m.clone();
    a.fill_diagonal(0.0);
    Ok(CurvatureReport {
        total,
        faces,
        jacobian: Some(m),
        weights: Some(Weights { a, k: kw }),
    })
}

/// `M_ij = ∂L_i/∂s_j`.
pub fn jacobian(complex: &CellComplex, state: &PackingState) -> Result<DMatrix<f64>> {
    Ok(full_report(complex, state)?
        .jacobian
        .expect("full report carries the Jacobian"))
}

/// `A_ij = −∂L_i/∂s_j` off the diagonal and `K_i = k_i Σ_{f∋i} d(Σ_m L_{m,f})/dk_i`.
pub fn weights(complex: &CellComplex, state: &PackingState) -> Result<Weights> {
    Ok(full_report(complex, state)?
        .weights
        .expect("full report carries the weights"))
}

/// `|x|^{p−2} x`, continuously extended by 0 at the origin.
pub fn signed_power(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(p - 1.0)
    }
}

/// Discrete p-th Laplacian `Δ_p g_i = Σ_{j∼i} A_ij |g_j − g_i|^{p−2} (g_j − g_i)`,
/// where `j ∼ i` means the two vertices share a face.
pub fn p_laplacian(
    complex: &CellComplex,
    a: &DMatrix<f64>,
    g: &DVector<f64>,
    p: f64,
) -> Result<DVector<f64>> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::domain(format!("p must exceed 1, got {p}")));
    }
    let n = complex.vertex_count();
    if g.len() != n || a.nrows() != n || a.ncols() != n {
        return Err(Error::domain("dimension mismatch in p-Laplacian"));
    }
    Ok(DVector::from_iterator(
        n,
        (0..n).map(|i| {
            complex
                .neighbors(i)
                .iter()
                .map(|&j| a[(i, j)] * signed_power(g[j] - g[i], p))
                .sum()
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn triangle() -> CellComplex {
        CellComplex::from_indices(3, &[(vec![0, 1, 2], 0.0)]).unwrap()
    }

    #[test]
    fn symmetric_triangle() {
        let c = triangle();
        let r = full_report(&c, &PackingState::zeros(3)).unwrap();
        for i in 0..3 {
            assert_relative_eq!(r.total[i], 1.0, epsilon = 1e-12);
        }
        let w = r.weights.unwrap();
        for i in 0..3 {
            assert_relative_eq!(w.k[i], 1.0 / 12.0, epsilon = 1e-12);
        }
        let m = r.jacobian.unwrap();
        for i in 0..3 {
            assert!(m.row(i).sum() > 0.0);
        }
    }

    #[test]
    fn shared_vertex_doubles() {
        let c = CellComplex::from_indices(5, &[(vec![0, 1, 2], 0.0), (vec![0, 3, 4], 0.0)])
            .unwrap();
        let r = curvatures(&c, &PackingState::zeros(5)).unwrap();
        assert_relative_eq!(r.total[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.total[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn disconnected_faces_give_block_diagonal() {
        let c = CellComplex::from_indices(6, &[(vec![0, 1, 2], 0.3), (vec![3, 4, 5], -0.5)])
            .unwrap();
        let s = PackingState::from_curvatures(&[0.5, 1.0, 2.0, 3.0, 0.2, 1.1]).unwrap();
        let r = full_report(&c, &s).unwrap();
        let m = r.jacobian.unwrap();
        for i in 0..3 {
            for j in 3..6 {
                assert_eq!(m[(i, j)], 0.0);
                assert_eq!(r.weights.as_ref().unwrap().a[(j, i)], 0.0);
            }
        }
    }

    #[test]
    fn k_is_row_sum_of_jacobian() {
        let c = CellComplex::from_indices(5, &[(vec![0, 1, 2, 3], 0.5), (vec![3, 2, 4], -1.0)])
            .unwrap();
        let s = PackingState::from_curvatures(&[0.5, 1.0, 2.0, 3.0, 0.2]).unwrap();
        let r = full_report(&c, &s).unwrap();
        let m = r.jacobian.unwrap();
        let w = r.weights.unwrap();
        for i in 0..5 {
            assert_relative_eq!(m.row(i).sum(), w.k[i], max_relative = 1e-10);
        }
    }

    #[test]
    fn p_laplacian_basics() {
        let c = triangle();
        let w = weights(&c, &PackingState::zeros(3)).unwrap();
        let flat = DVector::from_element(3, 0.7);
        assert_eq!(p_laplacian(&c, &w.a, &flat, 1.5).unwrap(), DVector::zeros(3));
        assert!(p_laplacian(&c, &w.a, &flat, 1.0).is_err());
        let g = DVector::from_vec(vec![0.1, -0.4, 0.9]);
        let lap2 = p_laplacian(&c, &w.a, &g, 2.0).unwrap();
        let row_sums = DVector::from_iterator(3, (0..3).map(|i| w.a.row(i).sum()));
        let direct = &w.a * &g - row_sums.component_mul(&g);
        assert_relative_eq!(lap2, direct, epsilon = 1e-15);
    }

    #[test]
    fn signed_power_is_odd() {
        assert_eq!(signed_power(0.0, 1.5), 0.0);
        assert_relative_eq!(signed_power(-4.0, 1.5), -2.0);
        assert_relative_eq!(signed_power(4.0, 3.0), 16.0);
    }

    #[test]
    fn state_validation() {
        assert!(PackingState::from_curvatures(&[1.0, 0.0]).is_err());
        assert!(PackingState::from_log(DVector::from_vec(vec![f64::NAN])).is_err());
        let c = triangle();
        assert!(curvatures(&c, &PackingState::zeros(2)).is_err());
    }
}
