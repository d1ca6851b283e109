//! JSON problem documents, result documents, CSV traces and SVG face pictures.
//!
//! A problem document looks like
//!
//! ```json
//! {
//!   "vertices": ["a", "b", "c"],
//!   "faces": [{"vertices": ["a", "b", "c"], "Y": 0.0}],
//!   "targets": {"a": 1.0, "b": 1.0, "c": 1.0},
//!   "initial": {"a": 2.0, "b": 2.0, "c": 2.0}
//! }
//! ```
//!
//! `targets` and `initial` are optional; when present they must give a
//! positive value for every vertex. Unknown keys are rejected. Errors carry
//! a path such as `faces[0].Y` or `targets.a`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::admissibility::AdmissibilityVerdict;
use crate::assembly::{CurvatureReport, PackingState};
use crate::complex::{gauss_curvature_range, validate, CellComplex, FaceSpec, Targets, Violation};
use crate::error::{Error, Result};
use crate::face::layout::{face_layout, DiskCircleRole, FaceLayout};
use crate::face::{CircleKind, FaceConfig};
use crate::solver::{Method, Solution, SolveTrace};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    vertices: Vec<String>,
    faces: Vec<RawFace>,
    #[serde(default)]
    targets: Option<Map<String, Value>>,
    #[serde(default)]
    initial: Option<Map<String, Value>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFace {
    vertices: Vec<String>,
    #[serde(rename = "Y")]
    y: f64,
}

/// A validated problem document.
#[derive(Debug, Clone)]
pub struct ProblemDocument {
    pub complex: CellComplex,
    pub targets: Option<Targets>,
    /// Initial curvatures `k`, in vertex order.
    pub initial: Option<PackingState>,
}

fn parse_error(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.into(),
        message: message.into(),
    }
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let location = |e: &serde_json::Error| format!("line {} column {}", e.line(), e.column());
    let de = &mut serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut *de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let path = if inner.is_eof() || path == "." {
            location(&inner)
        } else {
            path
        };
        parse_error(path, inner.to_string())
    })?;
    de.end().map_err(|e| parse_error(location(&e), e.to_string()))?;
    Ok(value)
}

fn violation_path(v: &Violation, vertices: &[String], faces: &[RawFace]) -> String {
    let in_face = |face: usize, vertex: &str| {
        let at = faces[face].vertices.iter().rposition(|u| u == vertex).unwrap_or(0);
        format!("faces[{face}].vertices[{at}]")
    };
    match v {
        Violation::DuplicateVertexId(id) | Violation::IsolatedVertex(id) => {
            let at = vertices.iter().rposition(|u| u == id).unwrap_or(0);
            format!("vertices[{at}]")
        }
        Violation::TooFewVertices { face, .. } => format!("faces[{face}].vertices"),
        Violation::RepeatedVertex { face, vertex } | Violation::UnknownVertex { face, vertex } => {
            in_face(*face, vertex)
        }
        Violation::GaussCurvatureOutOfRange { face, .. } => format!("faces[{face}].Y"),
    }
}

/// Reads a per-vertex map of positive reals, one entry per vertex.
fn vertex_map(complex: &CellComplex, map: &Map<String, Value>, key: &str) -> Result<Vec<f64>> {
    let mut values = vec![None; complex.vertex_count()];
    for (id, value) in map {
        let path = format!("{key}.{id}");
        let v = complex
            .resolve(id)
            .map_err(|_| parse_error(&path, format!("unknown vertex id `{id}`")))?;
        let x = value
            .as_f64()
            .ok_or_else(|| parse_error(&path, "expected a number"))?;
        if !(x.is_finite() && x > 0.0) {
            return Err(parse_error(&path, format!("must be a positive real, got {x}")));
        }
        values[v] = Some(x);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(v, x)| x.ok_or_else(|| parse_error(key, format!("missing vertex `{}`", complex.id(v)))))
        .collect()
}

/// Strict parse of a problem document.
pub fn parse(text: &str) -> Result<ProblemDocument> {
    let raw: RawDocument = from_json(text)?;
    for (i, face) in raw.faces.iter().enumerate() {
        if !face.y.is_finite() {
            return Err(parse_error(format!("faces[{i}].Y"), "must be finite"));
        }
    }
    let specs: Vec<FaceSpec> = raw
        .faces
        .iter()
        .map(|f| FaceSpec::new(f.vertices.iter().cloned(), f.y))
        .collect();
    if let Some(v) = validate(&raw.vertices, &specs).first() {
        let message = match v {
            Violation::GaussCurvatureOutOfRange { face, value } => {
                let (lo, hi) = gauss_curvature_range(specs[*face].vertices.len());
                format!("Y_f out of range: {value} not in ({lo}, {hi})")
            }
            other => other.to_string(),
        };
        return Err(parse_error(violation_path(v, &raw.vertices, &raw.faces), message));
    }
    let complex = CellComplex::new(raw.vertices, specs)?;
    let targets = raw
        .targets
        .map(|m| vertex_map(&complex, &m, "targets").and_then(Targets::new))
        .transpose()?;
    let initial = raw
        .initial
        .map(|m| vertex_map(&complex, &m, "initial").and_then(|k| PackingState::from_curvatures(&k)))
        .transpose()?;
    Ok(ProblemDocument {
        complex,
        targets,
        initial,
    })
}

/// Reads curvatures from a JSON object with a `k` member mapping every
/// vertex id to a positive real. Other members are ignored, so solve output
/// can be fed back directly.
pub fn parse_curvatures(complex: &CellComplex, text: &str) -> Result<PackingState> {
    #[derive(Deserialize)]
    struct KFile {
        k: Map<String, Value>,
    }
    let file: KFile = from_json(text)?;
    PackingState::from_curvatures(&vertex_map(complex, &file.k, "k")?)
}

fn per_vertex(complex: &CellComplex, values: impl IntoIterator<Item = f64>) -> Value {
    Value::Object(
        complex
            .ids()
            .iter()
            .cloned()
            .zip(values.into_iter().map(Value::from))
            .collect(),
    )
}

fn faces_json(complex: &CellComplex, report: &CurvatureReport) -> Value {
    Value::Array(
        complex
            .faces()
            .iter()
            .zip(&report.faces)
            .map(|(face, p)| {
                let ids: Vec<&str> = face.vertices.iter().map(|&v| complex.id(v)).collect();
                json!({
                    "vertices": ids,
                    "k_f": p.dual_curvature,
                    "L": p.arc_curvature,
                    "area": p.area,
                })
            })
            .collect(),
    )
}

/// Result document written by `solve`.
pub fn solution_json(complex: &CellComplex, method: Method, solution: &Solution) -> Value {
    json!({
        "status": solution.status.to_string(),
        "method": method.to_string(),
        "steps": solution.steps,
        "residual_inf": solution.residual_inf,
        "k": per_vertex(complex, solution.state.curvatures().iter().copied()),
        "L": per_vertex(complex, solution.report.total.iter().copied()),
        "faces": faces_json(complex, &solution.report),
    })
}

/// 2-norm condition number of a symmetric positive definite matrix.
pub fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen().eigenvalues;
    let hi = eig.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let lo = eig.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Result document written by `eval`.
pub fn evaluation_json(
    complex: &CellComplex,
    state: &PackingState,
    report: &CurvatureReport,
    targets: Option<&Targets>,
) -> Value {
    let mut out = Map::new();
    out.insert("k".into(), per_vertex(complex, state.curvatures().iter().copied()));
    out.insert("L".into(), per_vertex(complex, report.total.iter().copied()));
    out.insert("faces".into(), faces_json(complex, report));
    if let Some(m) = &report.jacobian {
        let cond = condition_estimate(m);
        out.insert(
            "jacobian_condition".into(),
            if cond.is_finite() { cond.into() } else { Value::Null },
        );
    }
    if let Some(t) = targets {
        let res = report
            .total
            .iter()
            .zip(t.values())
            .fold(0.0f64, |m, (l, t)| m.max((l - t).abs()));
        out.insert("residual_inf".into(), res.into());
    }
    Value::Object(out)
}

/// Pretty-printed JSON with a trailing newline. Floats use the shortest
/// decimal that round-trips.
pub fn to_json_string(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Human-readable verdict for `check`.
pub fn verdict_text(complex: &CellComplex, verdict: &AdmissibilityVerdict, conclusive: bool) -> String {
    let ids = |vs: &[usize]| vs.iter().map(|&v| complex.id(v)).collect::<Vec<_>>().join(", ");
    let status = match (verdict.admissible, conclusive) {
        (false, _) => "not admissible",
        (true, true) => "admissible",
        (true, false) => "inconclusive (no violation found by sampling)",
    };
    let mut out = String::new();
    writeln!(out, "verdict: {status}").unwrap();
    writeln!(out, "binding subset: [{}]", ids(&verdict.worst_subset)).unwrap();
    writeln!(out, "slack: {:?}", verdict.slack).unwrap();
    if !verdict.nonpositive.is_empty() {
        writeln!(out, "nonpositive targets: [{}]", ids(&verdict.nonpositive)).unwrap();
    }
    out
}

/// CSV trace with header `step,t,res_inf,res_2,max_rate`, followed by one
/// `s_<id>` column per vertex when `with_state` is set.
pub fn trace_csv(complex: &CellComplex, trace: &SolveTrace, with_state: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["step", "t", "res_inf", "res_2", "max_rate"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if with_state {
        header.extend(complex.ids().iter().map(|id| format!("s_{id}")));
    }
    let csv_err = |e: csv::Error| Error::domain(format!("CSV: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for row in &trace.rows {
        let mut rec = vec![
            row.step.to_string(),
            format!("{:?}", row.t),
            format!("{:?}", row.res_inf),
            format!("{:?}", row.res_2),
            format!("{:?}", row.max_rate),
        ];
        if with_state {
            let state = row
                .state
                .as_ref()
                .ok_or_else(|| Error::domain("trace rows carry no state snapshot"))?;
            rec.extend(state.iter().map(|s| format!("{s:?}")));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::domain(format!("CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub const SVG_SIZE: f64 = 500.0;
const DISK_RADIUS: f64 = 250.0;
const CENTER: f64 = 250.0;

fn px(x: f64) -> String {
    // Six decimals keep output stable across platforms and far below a pixel.
    let r = (x * 1e6).round() / 1e6;
    format!("{:?}", if r == 0.0 { 0.0 } else { r })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Poincaré-disk picture of one face: the dual circle and one generalized
/// circle per vertex, clipped to the unit disk.
pub fn face_svg(complex: &CellComplex, state: &PackingState, face: usize) -> Result<String> {
    let f = complex
        .faces()
        .get(face)
        .ok_or_else(|| Error::domain(format!("face index {face} out of range ({} faces)", complex.face_count())))?;
    let k = state.curvatures();
    let cfg = FaceConfig::new(f.vertices.iter().map(|&v| k[v]).collect(), f.cone_angle())
        .map_err(|e| e.in_face(face))?;
    let packing = crate::face::face_solve(&cfg).map_err(|e| e.in_face(face))?;
    let layout = face_layout(&packing, &cfg)?;
    Ok(render_layout(complex, &f.vertices, &layout))
}

fn render_layout(complex: &CellComplex, vertices: &[usize], layout: &FaceLayout) -> String {
    let to_px = |p: [f64; 2]| (CENTER + DISK_RADIUS * p[0], CENTER - DISK_RADIUS * p[1]);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="500" height="500" viewBox="0 0 500 500">"#
    )
    .unwrap();
    let boundary = "M 500 250 A 250 250 0 1 0 0 250 A 250 250 0 1 0 500 250 Z";
    writeln!(out, r#"<defs><clipPath id="disk"><path d="{boundary}"/></clipPath></defs>"#).unwrap();
    writeln!(out, r##"<path d="{boundary}" fill="#f7f7f7" stroke="#000" stroke-width="1"/>"##).unwrap();
    writeln!(out, r#"<g clip-path="url(#disk)">"#).unwrap();
    for c in &layout.circles {
        let (cx, cy) = to_px(c.center);
        let r = DISK_RADIUS * c.radius;
        let (class, stroke, label) = match c.role {
            DiskCircleRole::Dual => ("dual".to_string(), "#c0392b", String::new()),
            DiskCircleRole::Vertex(i) => {
                let kind = match c.kind {
                    CircleKind::Circle => "circle",
                    CircleKind::Horocycle => "horocycle",
                    CircleKind::Hypercycle => "hypercycle",
                };
                (
                    format!("vertex {kind}"),
                    "#2c3e50",
                    format!(r#" data-vertex="{}""#, escape(complex.id(vertices[i]))),
                )
            }
        };
        writeln!(
            out,
            r#"<circle class="{class}"{label} cx="{}" cy="{}" r="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
            px(cx),
            px(cy),
            px(r)
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();
    let rho = layout.circles[0].radius;
    for (i, &v) in vertices.iter().enumerate() {
        let mid = 0.5 * (layout.tangency_angles[i] + layout.tangency_angles[i + 1]);
        let (x, y) = to_px([0.5 * rho * mid.cos(), 0.5 * rho * mid.sin()]);
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            px(x),
            px(y),
            escape(complex.id(v))
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
