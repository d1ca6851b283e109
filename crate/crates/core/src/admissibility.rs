//! Membership test for prescribed total geodesic curvatures.
//!
//! A target `L̂` is realizable iff every entry is positive and, for every
//! nonempty vertex subset `W`,
//!
//! ```text
//! Σ_{w∈W} L̂_w  <  Σ_{f∈F_W} π · min{ N(f,W), N(f) − 2 + Y_f/π }
//! ```
//!
//! where `F_W` are the faces meeting `W` and `N(f,W)` counts the vertices
//! of `f` in `W`.

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::complex::{CellComplex, Targets};
use crate::error::{Error, Result};

/// Default vertex count above which exhaustive enumeration is refused.
pub const SUBSET_CAP: usize = 22;

/// Slack must exceed this for a strict-inequality pass.
pub const SLACK_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    /// Subset with the smallest slack found, as sorted vertex indices.
    pub worst_subset: Vec<usize>,
    /// Right-hand side minus left-hand side on `worst_subset`.
    pub slack: f64,
    /// Vertices whose target is not positive.
    pub nonpositive: Vec<usize>,
}

/// Outcome of the randomized search.
#[derive(Debug, Clone, PartialEq)]
pub enum SampledVerdict {
    /// A violating subset or nonpositive entry was found; the target is not admissible.
    Violation(AdmissibilityVerdict),
    /// No violation found; membership is not proven.
    NoViolationFound {
        /// Smallest slack seen during the search.
        best: AdmissibilityVerdict,
    },
}

/// Precomputed per-face data for fast subset evaluation.
struct SubsetTable {
    face_masks: Vec<u64>,
    /// `N(f) − 2 + Y_f/π` per face.
    caps: Vec<f64>,
    targets: Vec<f64>,
}

impl SubsetTable {
    fn new(complex: &CellComplex, targets: &Targets) -> Result<Self> {
        let n = complex.vertex_count();
        if targets.len() != n {
            return Err(Error::domain(format!(
                "{} targets for {n} vertices",
                targets.len()
            )));
        }
        if n >= 64 {
            return Err(Error::domain("bitmask subset tables need fewer than 64 vertices"));
        }
        let face_masks = complex
            .faces()
            .iter()
            .map(|f| f.vertices.iter().fold(0u64, |m, &v| m | (1 << v)))
            .collect();
        let caps = complex
            .faces()
            .iter()
            .map(|f| f.len() as f64 - 2.0 + f.gauss_curvature / PI)
            .collect();
        Ok(Self {
            face_masks,
            caps,
            targets: targets.values().to_vec(),
        })
    }

    fn slack(&self, w: u64) -> f64 {
        let mut rhs = 0.0;
        for (&mask, &cap) in self.face_masks.iter().zip(&self.caps) {
            let count = (mask & w).count_ones();
            if count > 0 {
                rhs += (count as f64).min(cap);
            }
        }
        let lhs: f64 = bits(w).map(|v| self.targets[v]).sum();
        PI * rhs - lhs
    }
}

fn bits(mut w: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if w == 0 {
            None
        } else {
            let v = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(v)
        }
    })
}

fn verdict(targets: &Targets, w: u64, slack: f64) -> AdmissibilityVerdict {
    let nonpositive = nonpositive(targets);
    AdmissibilityVerdict {
        admissible: nonpositive.is_empty() && slack > SLACK_EPS,
        worst_subset: bits(w).collect(),
        slack,
        nonpositive,
    }
}

/// Slack of the subset inequality for `w` (right side minus left side).
pub fn subset_slack(complex: &CellComplex, targets: &Targets, w: &[usize]) -> Result<f64> {
    let table = MembershipTable::new(complex, targets)?;
    let mut member = vec![false; complex.vertex_count()];
    for &v in w {
        if v >= member.len() {
            return Err(Error::domain(format!("vertex index {v} out of range")));
        }
        member[v] = true;
    }
    Ok(table.slack(&member))
}

/// Exhaustive check over all nonempty subsets, refusing more than `cap` vertices.
pub fn check_with_cap(
    complex: &CellComplex,
    targets: &Targets,
    cap: usize,
) -> Result<AdmissibilityVerdict> {
    let n = complex.vertex_count();
    if n > cap {
        return Err(Error::SubsetCap { vertices: n, cap });
    }
    let table = SubsetTable::new(complex, targets)?;
    let mut best = (f64::INFINITY, 0u64);
    for w in 1..(1u64 << n) {
        let s = table.slack(w);
        if s < best.0 {
            best = (s, w);
        }
    }
    Ok(verdict(targets, best.1, best.0))
}

pub fn check(complex: &CellComplex, targets: &Targets) -> Result<AdmissibilityVerdict> {
    check_with_cap(complex, targets, SUBSET_CAP)
}

/// Slack evaluation over boolean membership, for complexes of any size.
struct MembershipTable<'a> {
    complex: &'a CellComplex,
    caps: Vec<f64>,
    targets: &'a [f64],
}

impl<'a> MembershipTable<'a> {
    fn new(complex: &'a CellComplex, targets: &'a Targets) -> Result<Self> {
        if targets.len() != complex.vertex_count() {
            return Err(Error::domain(format!(
                "{} targets for {} vertices",
                targets.len(),
                complex.vertex_count()
            )));
        }
        let caps = complex
            .faces()
            .iter()
            .map(|f| f.len() as f64 - 2.0 + f.gauss_curvature / PI)
            .collect();
        Ok(Self {
            complex,
            caps,
            targets: targets.values(),
        })
    }

    fn slack(&self, w: &[bool]) -> f64 {
        let mut rhs = 0.0;
        for (f, &cap) in self.complex.faces().iter().zip(&self.caps) {
            let count = f.vertices.iter().filter(|&&v| w[v]).count();
            if count > 0 {
                rhs += (count as f64).min(cap);
            }
        }
        let lhs: f64 = w
            .iter()
            .zip(self.targets)
            .filter(|(&m, _)| m)
            .map(|(_, &t)| t)
            .sum();
        PI * rhs - lhs
    }
}

fn members(w: &[bool]) -> Vec<usize> {
    w.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
}

fn nonpositive(targets: &Targets) -> Vec<usize> {
    targets
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| !(v > 0.0))
        .map(|(i, _)| i)
        .collect()
}

/// Randomized search for a violated subset inequality.
///
/// Singletons and the full vertex set are always tried first. Each trial then
/// draws a random subset and improves it greedily by single-vertex toggles
/// until the slack stops decreasing.
pub fn check_sampled(
    complex: &CellComplex,
    targets: &Targets,
    trials: usize,
    seed: u64,
) -> Result<SampledVerdict> {
    let n = complex.vertex_count();
    let table = MembershipTable::new(complex, targets)?;
    let mut best = (f64::INFINITY, Vec::new());
    let consider = |w: &[bool], best: &mut (f64, Vec<bool>)| {
        let s = table.slack(w);
        if s < best.0 {
            *best = (s, w.to_vec());
        }
        s
    };
    let mut w = vec![false; n];
    for v in 0..n {
        w[v] = true;
        consider(&w, &mut best);
        w[v] = false;
    }
    consider(&vec![true; n], &mut best);

    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..trials.max(1) {
        if best.0 <= SLACK_EPS || n == 0 {
            break;
        }
        let mut w: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        if !w.contains(&true) {
            w[rng.gen_range(0..n)] = true;
        }
        let mut current = consider(&w, &mut best);
        let mut size = w.iter().filter(|&&m| m).count();
        loop {
            let mut improved = false;
            for v in 0..n {
                if w[v] && size == 1 {
                    continue;
                }
                w[v] = !w[v];
                let s = consider(&w, &mut best);
                if s < current {
                    current = s;
                    size = if w[v] { size + 1 } else { size - 1 };
                    improved = true;
                } else {
                    w[v] = !w[v];
                }
            }
            if !improved {
                break;
            }
        }
    }
    let bad = nonpositive(targets);
    let v = AdmissibilityVerdict {
        admissible: bad.is_empty() && best.0 > SLACK_EPS,
        worst_subset: members(&best.1),
        slack: best.0,
        nonpositive: bad,
    };
    Ok(if v.admissible {
        SampledVerdict::NoViolationFound { best: v }
    } else {
        SampledVerdict::Violation(v)
    })
}
