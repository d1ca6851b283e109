//! Polygonal cell complexes: vertices, faces and their incidence.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// A face as supplied by the caller, before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceSpec {
    pub vertices: Vec<String>,
    /// Discrete Gaussian curvature at the dual center.
    pub gauss_curvature: f64,
}

impl FaceSpec {
    pub fn new<S: Into<String>>(vertices: impl IntoIterator<Item = S>, gauss_curvature: f64) -> Self {
        Self {
            vertices: vertices.into_iter().map(Into::into).collect(),
            gauss_curvature,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateVertexId(String),
    TooFewVertices { face: usize, count: usize },
    RepeatedVertex { face: usize, vertex: String },
    UnknownVertex { face: usize, vertex: String },
    GaussCurvatureOutOfRange { face: usize, value: f64 },
    IsolatedVertex(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateVertexId(v) => write!(f, "vertex id `{v}` declared twice"),
            Violation::TooFewVertices { face, count } => {
                write!(f, "face {face} has {count} vertices, needs at least 3")
            }
            Violation::RepeatedVertex { face, vertex } => {
                write!(f, "face {face} repeats vertex `{vertex}`")
            }
            Violation::UnknownVertex { face, vertex } => {
                write!(f, "face {face} references undeclared vertex `{vertex}`")
            }
            Violation::GaussCurvatureOutOfRange { face, value } => {
                write!(f, "face {face}: Y_f out of range ({value})")
            }
            Violation::IsolatedVertex(v) => write!(f, "vertex `{v}` lies on no face"),
        }
    }
}

/// Open interval of admissible discrete Gaussian curvatures for an `n`-gon.
pub fn gauss_curvature_range(n: usize) -> (f64, f64) {
    ((2.0 - n as f64) * PI, 2.0 * PI)
}

pub fn gauss_curvature_in_range(n: usize, y: f64) -> bool {
    let (lo, hi) = gauss_curvature_range(n);
    y.is_finite() && y > lo && y < hi
}

/// Reports every structural problem; an empty list means the input is valid.
pub fn validate(vertices: &[String], faces: &[FaceSpec]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut declared: HashMap<&str, bool> = HashMap::new();
    for v in vertices {
        if declared.insert(v.as_str(), false).is_some() {
            out.push(Violation::DuplicateVertexId(v.clone()));
        }
    }
    for (fi, face) in faces.iter().enumerate() {
        if face.vertices.len() < 3 {
            out.push(Violation::TooFewVertices {
                face: fi,
                count: face.vertices.len(),
            });
        }
        let mut seen = Vec::with_capacity(face.vertices.len());
        for v in &face.vertices {
            if seen.contains(&v) {
                out.push(Violation::RepeatedVertex {
                    face: fi,
                    vertex: v.clone(),
                });
            }
            seen.push(v);
            match declared.get_mut(v.as_str()) {
                Some(used) => *used = true,
                None => out.push(Violation::UnknownVertex {
                    face: fi,
                    vertex: v.clone(),
                }),
            }
        }
        if !gauss_curvature_in_range(face.vertices.len(), face.gauss_curvature) {
            out.push(Violation::GaussCurvatureOutOfRange {
                face: fi,
                value: face.gauss_curvature,
            });
        }
    }
    for v in vertices {
        if declared.get(v.as_str()) == Some(&false) {
            out.push(Violation::IsolatedVertex(v.clone()));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Dense vertex indices in cyclic order.
    pub vertices: Vec<usize>,
    pub gauss_curvature: f64,
}

impl Face {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn cone_angle(&self) -> f64 {
        2.0 * PI - self.gauss_curvature
    }
}

/// Validated cell complex. Vertex indices follow the declaration order of the ids.
#[derive(Debug, Clone, PartialEq)]
pub struct CellComplex {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    faces: Vec<Face>,
    vertex_faces: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
}

impl CellComplex {
    pub fn new(vertices: Vec<String>, faces: Vec<FaceSpec>) -> Result<Self> {
        let violations = validate(&vertices, &faces);
        if !violations.is_empty() {
            return Err(Error::InvalidComplex(violations));
        }
        let index: HashMap<String, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let faces: Vec<Face> = faces
            .into_iter()
            .map(|f| Face {
                vertices: f.vertices.iter().map(|v| index[v]).collect(),
                gauss_curvature: f.gauss_curvature,
            })
            .collect();
        let n = vertices.len();
        let mut vertex_faces = vec![Vec::new(); n];
        let mut neighbors = vec![Vec::new(); n];
        for (fi, face) in faces.iter().enumerate() {
            for &v in &face.vertices {
                vertex_faces[v].push(fi);
                neighbors[v].extend(face.vertices.iter().copied().filter(|&u| u != v));
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self {
            ids: vertices,
            index,
            faces,
            vertex_faces,
            neighbors,
        })
    }

    /// Builds a complex over vertices `v0 .. v{n-1}` from index lists.
    pub fn from_indices(vertex_count: usize, faces: &[(Vec<usize>, f64)]) -> Result<Self> {
        let ids = (0..vertex_count).map(|i| format!("v{i}")).collect();
        let faces = faces
            .iter()
            .map(|(vs, y)| FaceSpec::new(vs.iter().map(|i| format!("v{i}")), *y))
            .collect();
        Self::new(ids, faces)
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn resolve(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_owned()))
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Faces containing vertex `v`.
    pub fn faces_at(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    /// Vertices sharing at least one face with `v`, sorted.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Edges as consecutive face-vertex pairs, one entry per face side.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for f in &self.faces {
            let n = f.len();
            for i in 0..n {
                let (a, b) = (f.vertices[i], f.vertices[(i + 1) % n]);
                out.push((a.min(b), a.max(b)));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Faces meeting the vertex subset `w`, each with the number of its vertices in `w`.
    pub fn faces_meeting(&self, w: &[usize]) -> Result<Vec<(usize, usize)>> {
        let n = self.vertex_count();
        let mut member = vec![false; n];
        for &v in w {
            if v >= n {
                return Err(Error::domain(format!("vertex index {v} out of range")));
            }
            member[v] = true;
        }
        Ok(self
            .faces
            .iter()
            .enumerate()
            .filter_map(|(fi, f)| {
                let count = f.vertices.iter().filter(|&&v| member[v]).count();
                (count > 0).then_some((fi, count))
            })
            .collect())
    }

    pub fn faces_meeting_ids(&self, w: &[&str]) -> Result<Vec<(usize, usize)>> {
        let idx = w
            .iter()
            .map(|id| self.resolve(id))
            .collect::<Result<Vec<_>>>()?;
        self.faces_meeting(&idx)
    }
}

/// Prescribed total geodesic curvature per vertex, indexed densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Targets(Vec<f64>);

impl Targets {
    /// Values must be finite; positivity is left to the admissibility check.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("target {bad} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn from_map<'a>(
        complex: &CellComplex,
        entries: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<Self> {
        let mut values = vec![f64::NAN; complex.vertex_count()];
        for (id, v) in entries {
            values[complex.resolve(id)?] = v;
        }
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::domain(format!(
                "missing target for vertex `{}`",
                complex.id(i)
            )));
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
