//! Independent reference computations used to check the library.

/// Five-point central difference of `f` at `x` with step `h`.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Ridders' extrapolated central difference of `f` at `x`, starting from step `h`.
/// Returns the estimate and its error estimate.
pub fn ridders(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
    const SHRINK: f64 = 1.4;
    const ROWS: usize = 10;
    let mut table = [[0.0; ROWS]; ROWS];
    let mut h = h;
    table[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
    let mut best = (table[0][0], f64::INFINITY);
    for i in 1..ROWS {
        h /= SHRINK;
        table[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
        let mut fac = SHRINK * SHRINK;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= SHRINK * SHRINK;
            let err = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if err <= best.1 {
                best = (table[j][i], err);
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * best.1 {
            break;
        }
    }
    best
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`; each panel is refined until
/// its Richardson correction is below `tol` times the first estimate.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    /// Panel endpoints and midpoint as `(x, f(x))`, with its Simpson estimate.
    struct Panel {
        a: (f64, f64),
        m: (f64, f64),
        b: (f64, f64),
        whole: f64,
    }
    fn simpson_panel(a: (f64, f64), m: (f64, f64), b: (f64, f64)) -> Panel {
        let whole = (b.0 - a.0) / 6.0 * (a.1 + 4.0 * m.1 + b.1);
        Panel { a, m, b, whole }
    }
    fn recurse(f: &dyn Fn(f64) -> f64, p: Panel, tol: f64, depth: u32) -> f64 {
        let lm = 0.5 * (p.a.0 + p.m.0);
        let rm = 0.5 * (p.m.0 + p.b.0);
        let left = simpson_panel(p.a, (lm, f(lm)), p.m);
        let right = simpson_panel(p.m, (rm, f(rm)), p.b);
        let delta = left.whole + right.whole - p.whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left.whole + right.whole + delta / 15.0;
        }
        recurse(f, left, tol, depth - 1) + recurse(f, right, tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let panel = simpson_panel((a, f(a)), (m, f(m)), (b, f(b)));
    let scale = panel.whole.abs().max(f64::MIN_POSITIVE);
    recurse(&f, panel, tol * scale, 30)
}

/// `∂θ_i/∂k_f` in closed form: `2 k_f k_i / (√(k_f²−1)(k_i² + k_f² − 1))`.
pub fn dtheta_dkf_closed_form(kf: f64, ki: f64) -> f64 {
    2.0 * kf * ki / ((kf * kf - 1.0).sqrt() * (ki * ki + kf * kf - 1.0))
}

/// `d(Σ_i L_{i,f})/dk_j` in closed form, branch by branch.
pub fn dsum_dk_closed_form(kf: f64, kj: f64) -> f64 {
    if kj > 1.0 {
        let u = (kj * kj - 1.0).sqrt();
        2.0 * (kj * kj - 1.0).powf(-1.5) * (u / kf - (u / kf).atan())
    } else if kj == 1.0 {
        2.0 / (3.0 * kf.powi(3))
    } else {
        let u = (1.0 - kj * kj).sqrt();
        2.0 * (1.0 - kj * kj).powf(-1.5) * ((u / kf).atanh() - u / kf)
    }
}

/// One generalized circle of a face drawn in the Poincaré disk, in the
/// frame where its sector is centered on the positive x axis.
pub struct DiskSector {
    /// Euclidean radius of the dual circle about the origin.
    pub rho: f64,
    /// Euclidean center distance and radius of the generalized circle.
    pub dist: f64,
    pub radius: f64,
}

impl DiskSector {
    /// Circle of geodesic curvature `k` orthogonal to the dual circle of curvature `kf`.
    ///
    /// A Euclidean circle with center distance `d` and radius `r` has geodesic
    /// curvature `(1 − d² + r²)/(2r)`; orthogonality to the dual circle is
    /// `d² = ρ² + r²`, hence `r = (1 − ρ²)/(2k)`.
    pub fn new(kf: f64, k: f64) -> Self {
        let big_r = (1.0 / kf).atanh();
        let rho = (0.5 * big_r).tanh();
        let radius = (1.0 - rho * rho) / (2.0 * k);
        Self {
            rho,
            dist: (rho * rho + radius * radius).sqrt(),
            radius,
        }
    }

    /// Angle subtended at the dual center by the two intersection points.
    pub fn theta(&self) -> f64 {
        2.0 * (self.radius / self.rho).atan()
    }

    /// Hyperbolic length of the arc inside the dual circle, by quadrature.
    pub fn arc_length(&self) -> f64 {
        let half = 0.5 * self.theta();
        let t0 = (self.rho * half.sin()).atan2(self.dist - self.rho * half.cos());
        adaptive_simpson(
            |t| {
                let x = self.dist - self.radius * t.cos();
                let y = self.radius * t.sin();
                2.0 * self.radius / (1.0 - x * x - y * y)
            },
            -t0,
            t0,
            1e-13,
        )
    }

    /// Hyperbolic area of the part of the sector inside the dual circle and
    /// outside the generalized circle, by quadrature in polar coordinates.
    pub fn area(&self) -> f64 {
        // φ = (θ/2) sin u absorbs the square-root behaviour at the sector edges.
        let half = 0.5 * self.theta();
        adaptive_simpson(
            |u| {
                let phi = half * u.sin();
                let s = phi.sin();
                let disc = (self.radius * self.radius - self.dist * self.dist * s * s).max(0.0);
                let r = self.dist * phi.cos() - disc.sqrt();
                2.0 * r * r / (1.0 - r * r) * half * u.cos()
            },
            -std::f64::consts::FRAC_PI_2,
            std::f64::consts::FRAC_PI_2,
            1e-13,
        )
    }
}

/// `sup f` over a grid on `[a, b]`.
pub fn grid_sup(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    (0..=n)
        .map(|i| f(a + (b - a) * i as f64 / n as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Constant bounding `K_i / |F|`: the largest of `4M₁`, `2`, `3M₂`, `2M₃`.
pub fn k_bound_constant() -> f64 {
    let m1 = grid_sup(|x| (x - x.atan()) / x.powi(3), 1e-3, 50.0, 200_000).max(1.0 / 3.0);
    let m2 = grid_sup(|x| x * (1.0 - x * x).sqrt().atanh(), 1e-6, 0.5, 200_000);
    let m3 = grid_sup(|x| (x.atanh() - x) / x.powi(3), 1e-3, 3f64.sqrt() / 2.0, 200_000);
    (4.0 * m1).max(2.0).max(3.0 * m2).max(2.0 * m3)
}
