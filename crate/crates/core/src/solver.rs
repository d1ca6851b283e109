//! Inverse problem: find log-curvatures whose total geodesic curvatures hit a target.
//!
//! Three methods share one driver:
//!
//! * `Calabi`: the combinatorial p-th Calabi flow
//!   `ds_i/dt = (Δ_p − K_i)(L_i − L̂_i)`.
//! * `Gradient`: the flow `ds/dt = −(L − L̂)`.
//! * `Newton`: Newton steps `M δ = −(L − L̂)` with Armijo backtracking.
//!
//! The flows are stiff: near a solution the slowest modes relax at rates
//! orders of magnitude below the fastest. The default integrator is
//! linearly implicit Euler, which stays stable at large steps; classical
//! RK4 is available through [`Integrator::Rk4`].
//!
//! A flow step is accepted only when `½‖L − L̂‖²` does not increase. A
//! rejected step halves `dt`, and five accepts in a row double it up to
//! `dt_max`. With the implicit integrator a rejection is first followed by
//! one trial at `dt_max`, where the step is close to a Newton step. [`StepRule::Potential`] instead requires the convex potential
//! `Θ` with `∇Θ = L − L̂` not to increase; its change over a step is the
//! line integral of `L − L̂`, evaluated by Simpson's rule. Along the exact
//! flow `Θ` always decreases, while `½‖L − L̂‖²` is only guaranteed to for
//! `p = 2`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::admissibility::{self, AdmissibilityVerdict, SampledVerdict, SUBSET_CAP};
use crate::assembly::{curvatures, full_report, p_laplacian, CurvatureReport, PackingState, Weights};
use crate::complex::{CellComplex, Targets};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Calabi,
    Newton,
    Gradient,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Calabi => "calabi",
            Method::Newton => "newton",
            Method::Gradient => "gradient",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "calabi" => Ok(Method::Calabi),
            "newton" => Ok(Method::Newton),
            "gradient" => Ok(Method::Gradient),
            other => Err(Error::domain(format!("unknown method `{other}`"))),
        }
    }
}

/// Acceptance test for a flow step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// The potential `Θ` must not increase.
    Potential,
    /// `½‖L − L̂‖²` must not increase.
    Surrogate,
}

impl std::str::FromStr for StepRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "potential" => Ok(StepRule::Potential),
            "surrogate" => Ok(StepRule::Surrogate),
            other => Err(Error::domain(format!("unknown step rule `{other}`"))),
        }
    }
}

/// Time stepper for the flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Classical fourth-order Runge-Kutta.
    Rk4,
    /// Linearly implicit Euler, `(I − dt W) Δs = dt ṡ`, with `W` the
    /// frozen-weight Jacobian of the rate. Stable for stiff problems.
    LinearlyImplicit,
}

impl std::str::FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Integrator::Rk4),
            "implicit" => Ok(Integrator::LinearlyImplicit),
            other => Err(Error::domain(format!("unknown integrator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub method: Method,
    pub integrator: Integrator,
    pub step_rule: StepRule,
    /// Exponent of the p-Laplacian; Calabi only.
    pub p: f64,
    /// Initial time step for the flows.
    pub dt: f64,
    pub dt_max: f64,
    /// Stop once `‖L − L̂‖∞ <= tol`.
    pub tol: f64,
    pub max_steps: usize,
    /// Record every n-th accepted step; the first and last rows are always kept.
    pub trace_every: usize,
    /// Include the log-curvatures in every trace row.
    pub trace_state: bool,
    /// Run even when the admissibility precheck finds a violation.
    pub force: bool,
    /// Seed and budget for the sampled precheck on large complexes.
    pub sample_seed: u64,
    pub sample_trials: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            method: Method::Calabi,
            integrator: Integrator::LinearlyImplicit,
            step_rule: StepRule::Surrogate,
            p: 2.0,
            dt: 0.1,
            dt_max: 1e12,
            tol: 1e-10,
            max_steps: 100_000,
            trace_every: 1,
            trace_state: false,
            force: false,
            sample_seed: 0,
            sample_trials: 200,
        }
    }
}

impl SolveConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::domain("tol must be positive"));
        }
        if !(self.dt > 0.0) || !(self.dt_max >= self.dt) {
            return Err(Error::domain("need 0 < dt <= dt_max"));
        }
        if self.method == Method::Calabi && !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::domain(format!("p must exceed 1, got {}", self.p)));
        }
        if self.trace_every == 0 {
            return Err(Error::domain("trace_every must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxSteps,
    Diverged,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxSteps => "max_steps",
            Status::Diverged => "diverged",
        })
    }
}

/// Result of the admissibility precheck run before solving.
#[derive(Debug, Clone, PartialEq)]
pub enum Precheck {
    Admissible(AdmissibilityVerdict),
    /// Sampled mode found no violation; membership unproven.
    Inconclusive(AdmissibilityVerdict),
    /// A violation was found and ignored because `force` was set.
    Overridden(AdmissibilityVerdict),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    /// Flow time, or the iteration count for Newton.
    pub t: f64,
    pub res_inf: f64,
    pub res_2: f64,
    /// `‖ds/dt‖∞` for flows, `‖Δs‖∞` of the accepted Newton step.
    pub max_rate: f64,
    /// `½‖L − L̂‖²`.
    pub energy: f64,
    pub state: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub state: PackingState,
    pub status: Status,
    pub trace: SolveTrace,
    pub precheck: Precheck,
    /// Steps attempted, including rejected ones.
    pub steps: usize,
    pub residual_inf: f64,
    /// Forward map at the final state.
    pub report: CurvatureReport,
}

/// `ds/dt` of the p-th Calabi flow given an evaluated report.
pub fn calabi_rate(
    complex: &CellComplex,
    report: &CurvatureReport,
    targets: &Targets,
    p: f64,
) -> Result<DVector<f64>> {
    let w = report
        .weights
        .as_ref()
        .ok_or_else(|| Error::domain("report lacks flow weights"))?;
    let g = residual(&report.total, targets);
    let lap = p_laplacian(complex, &w.a, &g, p)?;
    Ok(lap - w.k.component_mul(&g))
}

/// Right-hand side of the p-th Calabi flow at `state`.
pub fn rhs_calabi(
    complex: &CellComplex,
    state: &PackingState,
    targets: &Targets,
    p: f64,
) -> Result<DVector<f64>> {
    check_targets(complex, targets)?;
    let report = full_report(complex, state)?;
    calabi_rate(complex, &report, targets, p)
}

/// A priori bound `μ|E|(π|F| + ‖L̂‖∞)^{p−1} + μ(π|F| + ‖L̂‖∞)` on every
/// component of the Calabi rate, with `μ` the largest `|A_ij|` or `K_i`.
pub fn rate_bound(complex: &CellComplex, weights: &Weights, targets: &Targets, p: f64) -> f64 {
    let mu = weights.a.amax().max(weights.k.amax());
    let spread = PI * complex.face_count() as f64 + targets.values().iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let edges = complex.edges().len() as f64;
    mu * edges * spread.powf(p - 1.0) + mu * spread
}

fn residual(total: &DVector<f64>, targets: &Targets) -> DVector<f64> {
    total - DVector::from_column_slice(targets.values())
}

fn check_targets(complex: &CellComplex, targets: &Targets) -> Result<()> {
    if targets.len() == complex.vertex_count() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{} targets for {} vertices",
            targets.len(),
            complex.vertex_count()
        )))
    }
}

pub fn precheck(complex: &CellComplex, targets: &Targets, cfg: &SolveConfig) -> Result<Precheck> {
    let (verdict, conclusive) = if complex.vertex_count() <= SUBSET_CAP {
        (admissibility::check(complex, targets)?, true)
    } else {
        match admissibility::check_sampled(complex, targets, cfg.sample_trials, cfg.sample_seed)? {
            SampledVerdict::Violation(v) => (v, true),
            SampledVerdict::NoViolationFound { best } => (best, false),
        }
    };
    match (verdict.admissible, conclusive) {
        (true, true) => Ok(Precheck::Admissible(verdict)),
        (true, false) => Ok(Precheck::Inconclusive(verdict)),
        (false, _) if cfg.force => Ok(Precheck::Overridden(verdict)),
        (false, _) => Err(Error::Inadmissible {
            slack: verdict.slack,
            subset: verdict
                .worst_subset
                .iter()
                .map(|&v| complex.id(v).to_owned())
                .collect(),
        }),
    }
}

/// Evaluated point along a trajectory.
struct Point {
    state: PackingState,
    report: CurvatureReport,
    res: DVector<f64>,
    energy: f64,
}

impl Point {
    fn new(state: PackingState, report: CurvatureReport, targets: &Targets) -> Self {
        let res = residual(&report.total, targets);
        let energy = 0.5 * res.norm_squared();
        Self {
            state,
            report,
            res,
            energy,
        }
    }

    fn res_inf(&self) -> f64 {
        self.res.amax()
    }
}

struct Recorder<'a> {
    cfg: &'a SolveConfig,
    trace: SolveTrace,
}

impl Recorder<'_> {
    fn push(&mut self, step: usize, t: f64, pt: &Point, rate: f64) {
        self.trace.rows.push(TraceRow {
            step,
            t,
            res_inf: pt.res_inf(),
            res_2: pt.res.norm(),
            max_rate: rate,
            energy: pt.energy,
            state: self
                .cfg
                .trace_state
                .then(|| pt.state.log().iter().copied().collect()),
        });
    }

    fn push_if_due(&mut self, step: usize, t: f64, pt: &Point, rate: f64) {
        if step.is_multiple_of(self.cfg.trace_every) {
            self.push(step, t, pt, rate);
        }
    }

    fn close(&mut self, step: usize, t: f64, pt: &Point, rate: f64) {
        if self.trace.rows.last().map(|r| r.step) != Some(step) {
            self.push(step, t, pt, rate);
        }
    }
}

/// Solves for the state realizing `targets`, starting from `initial` (all horocycles if `None`).
pub fn solve(
    complex: &CellComplex,
    targets: &Targets,
    initial: Option<&PackingState>,
    cfg: &SolveConfig,
) -> Result<Solution> {
    cfg.validate()?;
    check_targets(complex, targets)?;
    let pre = precheck(complex, targets, cfg)?;
    let start = initial
        .cloned()
        .unwrap_or_else(|| PackingState::zeros(complex.vertex_count()));
    let run = match cfg.method {
        Method::Newton => newton(complex, targets, start, cfg)?,
        Method::Calabi | Method::Gradient => flow(complex, targets, start, cfg)?,
    };
    Ok(Solution {
        residual_inf: run.point.res_inf(),
        state: run.point.state,
        status: run.status,
        trace: run.trace,
        precheck: pre,
        steps: run.steps,
        report: run.point.report,
    })
}

struct Run {
    point: Point,
    status: Status,
    trace: SolveTrace,
    steps: usize,
}

fn evaluate(complex: &CellComplex, state: PackingState, targets: &Targets, with_jacobian: bool) -> Result<Point> {
    let report = if with_jacobian {
        full_report(complex, &state)?
    } else {
        curvatures(complex, &state)?
    };
    Ok(Point::new(state, report, targets))
}

fn flow(complex: &CellComplex, targets: &Targets, start: PackingState, cfg: &SolveConfig) -> Result<Run> {
    let needs_jacobian = cfg.method == Method::Calabi || cfg.integrator == Integrator::LinearlyImplicit;
    let rate = |pt: &Point| -> Result<DVector<f64>> {
        match cfg.method {
            Method::Calabi => calabi_rate(complex, &pt.report, targets, cfg.p),
            _ => Ok(-&pt.res),
        }
    };
    let rate_at = |s: &DVector<f64>| -> Result<DVector<f64>> {
        let pt = evaluate(complex, PackingState::from_log(s.clone())?, targets, needs_jacobian)?;
        rate(&pt)
    };

    let mut rec = Recorder {
        cfg,
        trace: SolveTrace::default(),
    };
    let mut pt = evaluate(complex, start, targets, needs_jacobian)?;
    let mut k1 = rate(&pt)?;
    let mut t = 0.0;
    let mut dt = cfg.dt;
    let mut streak = 0;
    let mut accepted = 0usize;
    // Step size to halve from if the current trial at `dt_max` is rejected.
    let mut resume: Option<f64> = None;
    rec.push(0, t, &pt, k1.amax());

    let mut status = Status::MaxSteps;
    let mut steps = 0;
    while steps < cfg.max_steps {
        if pt.res_inf() <= cfg.tol {
            status = Status::Converged;
            break;
        }
        steps += 1;
        let s = pt.state.log();
        let trial = match cfg.integrator {
            Integrator::Rk4 => (|| -> Result<DVector<f64>> {
                let k2 = rate_at(&(s + &k1 * (0.5 * dt)))?;
                let k3 = rate_at(&(s + &k2 * (0.5 * dt)))?;
                let k4 = rate_at(&(s + &k3 * dt))?;
                Ok(s + (&k1 + &k2 * 2.0 + &k3 * 2.0 + &k4) * (dt / 6.0))
            })(),
            Integrator::LinearlyImplicit => {
                let w = rate_jacobian(complex, &pt, cfg)?;
                let n = s.len();
                let lhs = DMatrix::identity(n, n) - w * dt;
                match lhs.lu().solve(&(&k1 * dt)) {
                    Some(d) => Ok(s + d),
                    None => Err(Error::domain("singular step matrix")),
                }
            }
        };
        let candidate = match trial.and_then(|next| {
            if next.iter().all(|v| v.is_finite()) {
                evaluate(complex, PackingState::from_log(next)?, targets, needs_jacobian)
            } else {
                Err(Error::domain("non-finite state"))
            }
        }) {
            Ok(c) => Some(c),
            Err(Error::Face { .. }) | Err(Error::Domain(_)) if resume.is_some() => None,
            Err(Error::Face { .. }) | Err(Error::Domain(_)) => {
                status = Status::Diverged;
                break;
            }
            Err(e) => return Err(e),
        };
        let Some(candidate) = candidate else {
            dt = 0.5 * resume.take().expect("checked above");
            streak = 0;
            continue;
        };
        let accept = match cfg.step_rule {
            StepRule::Surrogate => candidate.energy <= pt.energy,
            StepRule::Potential => {
                let step = candidate.state.log() - pt.state.log();
                let mid = PackingState::from_log(pt.state.log() + &step * 0.5)?;
                match curvatures(complex, &mid) {
                    Ok(rep) => {
                        let res_mid = residual(&rep.total, targets);
                        let change = (pt.res.dot(&step) + 4.0 * res_mid.dot(&step) + candidate.res.dot(&step)) / 6.0;
                        change <= 0.0
                    }
                    Err(_) => false,
                }
            }
        };
        if accept {
            resume = None;
            t += dt;
            pt = candidate;
            k1 = rate(&pt)?;
            accepted += 1;
            rec.push_if_due(accepted, t, &pt, k1.amax());
            streak += 1;
            if streak >= 5 {
                dt = (2.0 * dt).min(cfg.dt_max);
                streak = 0;
            }
        } else {
            streak = 0;
            dt = match resume.take() {
                Some(rejected) => 0.5 * rejected,
                // The flow direction itself can raise the surrogate; the
                // implicit step at large dt tends to a Newton step, which does not.
                None if cfg.integrator == Integrator::LinearlyImplicit && dt < cfg.dt_max => {
                    resume = Some(dt);
                    cfg.dt_max
                }
                None => 0.5 * dt,
            };
        }
    }
    if status == Status::MaxSteps && pt.res_inf() <= cfg.tol {
        status = Status::Converged;
    }
    rec.close(accepted, t, &pt, k1.amax());
    Ok(Run {
        point: pt,
        status,
        trace: rec.trace,
        steps,
    })
}

/// Step matrix for the implicit integrator: the rate with `A`, `K` and the
/// p-Laplacian coefficients `A_ij |g_j − g_i|^{p−2}` frozen, linear in the
/// residual `g`, composed with `M = ∂g/∂s`.
fn rate_jacobian(complex: &CellComplex, pt: &Point, cfg: &SolveConfig) -> Result<DMatrix<f64>> {
    let m = pt.report.jacobian.as_ref().expect("full report");
    if cfg.method != Method::Calabi {
        return Ok(-m);
    }
    let w = pt.report.weights.as_ref().expect("full report");
    let n = complex.vertex_count();
    let mut lap = DMatrix::zeros(n, n);
    for i in 0..n {
        for &j in complex.neighbors(i) {
            let gap = (pt.res[j] - pt.res[i]).abs().max(GAP_FLOOR);
            let d = w.a[(i, j)] * gap.powf(cfg.p - 2.0);
            lap[(i, j)] += d;
            lap[(i, i)] -= d;
        }
    }
    for i in 0..n {
        lap[(i, i)] -= w.k[i];
    }
    Ok(lap * m)
}

/// Smallest residual gap used in the frozen coefficients when `p < 2`.
const GAP_FLOOR: f64 = 1e-12;

const ARMIJO_C: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 40;

fn newton(complex: &CellComplex, targets: &Targets, start: PackingState, cfg: &SolveConfig) -> Result<Run> {
    let mut rec = Recorder {
        cfg,
        trace: SolveTrace::default(),
    };
    let mut pt = evaluate(complex, start, targets, true)?;
    rec.push(0, 0.0, &pt, 0.0);
    let mut status = Status::MaxSteps;
    let mut steps = 0;
    let mut last_step = 0.0;
    while steps < cfg.max_steps {
        if pt.res_inf() <= cfg.tol {
            status = Status::Converged;
            break;
        }
        steps += 1;
        let m = pt.report.jacobian.clone().expect("full report");
        let chol = Cholesky::new(m).ok_or_else(|| Error::NotPositiveDefinite {
            state: pt.state.log().iter().copied().collect(),
        })?;
        let delta = -chol.solve(&pt.res);
        let slope = pt.res.norm_squared();
        let mut tau = 1.0;
        let mut next = None;
        for _ in 0..MAX_BACKTRACKS {
            let s = pt.state.log() + &delta * tau;
            if s.iter().all(|v| v.is_finite()) {
                if let Ok(c) = evaluate(complex, PackingState::from_log(s)?, targets, true) {
                    if c.energy <= pt.energy - ARMIJO_C * tau * slope {
                        next = Some(c);
                        break;
                    }
                }
            }
            tau *= BACKTRACK;
        }
        match next {
            Some(c) => {
                last_step = delta.amax() * tau;
                pt = c;
                rec.push_if_due(steps, steps as f64, &pt, last_step);
            }
            // Line search exhausted: no further progress is possible.
            None => break,
        }
    }
    if pt.res_inf() <= cfg.tol {
        status = Status::Converged;
    }
    rec.close(steps, steps as f64, &pt, last_step);
    Ok(Run {
        point: pt,
        status,
        trace: rec.trace,
        steps,
    })
}
