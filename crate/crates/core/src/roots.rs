//! Safeguarded Newton iteration for monotone increasing scalar equations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct NewtonBracket {
    /// Absolute tolerance on the function value.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonBracket {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

impl NewtonBracket {
    /// Finds the root of an increasing function `f` on `[lo, hi]`, where `f(lo) < 0 <= f(hi)`.
    ///
    /// `f` returns the value and the derivative. A Newton step that leaves the
    /// current bracket is replaced by a bisection step; on wide positive
    /// brackets the bisection point is the geometric mean.
    pub fn solve<F>(&self, mut f: F, mut lo: f64, mut hi: f64) -> Result<f64>
    where
        F: FnMut(f64) -> (f64, f64),
    {
        if !(lo < hi) {
            return Err(Error::domain(format!("empty bracket [{lo}, {hi}]")));
        }
        let mut x = hi;
        let (mut fx, mut dfx) = f(x);
        let mut best = (fx.abs(), x);
        for _ in 0..self.max_iter {
            if !fx.is_finite() {
                return Err(Error::NoConvergence {
                    iterations: 0,
                    residual: fx,
                });
            }
            if fx.abs() <= self.tol {
                return Ok(polish(&mut f, x, fx, dfx));
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let newton = x - fx / dfx;
            x = if dfx > 0.0 && newton > lo && newton < hi {
                newton
            } else if lo > 0.0 && hi / lo > 4.0 {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
            if x <= lo || x >= hi {
                // Bracket collapsed to adjacent floats.
                break;
            }
            (fx, dfx) = f(x);
            if fx.abs() < best.0 {
                best = (fx.abs(), x);
            }
        }
        if best.0 <= self.tol {
            return Ok(best.1);
        }
        Err(Error::NoConvergence {
            iterations: self.max_iter,
            residual: best.0,
        })
    }
}

/// One more Newton step from a converged iterate, kept only if it lowers the residual.
fn polish<F>(f: &mut F, x: f64, fx: f64, dfx: f64) -> f64
where
    F: FnMut(f64) -> (f64, f64),
{
    if fx == 0.0 || !(dfx > 0.0) {
        return x;
    }
    let y = x - fx / dfx;
    match f(y) {
        (fy, _) if fy.abs() < fx.abs() => y,
        _ => x,
    }
}
