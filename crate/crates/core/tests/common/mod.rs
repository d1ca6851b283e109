//! Random corpora and oracles shared by the integration tests.
#![allow(dead_code)]

pub mod oracle;

use std::f64::consts::PI;

use hyperpack::{CellComplex, FaceConfig, PackingState};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian curvature drawn uniformly from the open range for an `n`-gon, kept `margin` inside.
pub fn random_gauss_curvature<R: Rng>(rng: &mut R, n: usize, margin: f64) -> f64 {
    let lo = (2.0 - n as f64) * PI + margin;
    let hi = 2.0 * PI - margin;
    rng.gen_range(lo..hi)
}

pub fn random_face<R: Rng>(rng: &mut R) -> FaceConfig {
    let n = rng.gen_range(3..=8);
    let k = (0..n).map(|_| rng.gen_range(-3.0f64..3.0).exp()).collect();
    let alpha = rng.gen_range(0.1..(n as f64 * PI - 0.1));
    FaceConfig::new(k, alpha).unwrap()
}

/// Random polygonal complex on at most `max_vertices` vertices.
///
/// Faces of 3 to 6 vertices are added until every vertex is covered; each
/// new face starts from an uncovered vertex and fills up with random others.
pub fn random_complex<R: Rng>(rng: &mut R, max_vertices: usize) -> CellComplex {
    let nv = rng.gen_range(3..=max_vertices);
    let mut covered = vec![false; nv];
    let mut faces = Vec::new();
    while covered.iter().any(|c| !c) {
        let size = rng.gen_range(3..=nv.min(6));
        let first = (0..nv).find(|&v| !covered[v]).unwrap();
        let mut others: Vec<usize> = (0..nv).filter(|&v| v != first).collect();
        others.shuffle(rng);
        let mut verts = vec![first];
        verts.extend(others.into_iter().take(size - 1));
        verts.shuffle(rng);
        for &v in &verts {
            covered[v] = true;
        }
        let y = random_gauss_curvature(rng, size, 0.2);
        faces.push((verts, y));
    }
    CellComplex::from_indices(nv, &faces).unwrap()
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize, half_width: f64) -> PackingState {
    PackingState::from_log(nalgebra::DVector::from_iterator(
        n,
        (0..n).map(|_| rng.gen_range(-half_width..half_width)),
    ))
    .unwrap()
}
