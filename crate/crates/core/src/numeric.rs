//! One-dimensional minimization and root bracketing.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    /// Points in the initial scan, endpoints included.
    pub grid_points: usize,
    /// Stop once the estimated argmin error drops below `xtol * max(|x|, scale)`.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            grid_points: 64,
            xtol: 1e-12,
            max_iter: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinimum {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    /// Estimated absolute error of `x`.
    pub tolerance: f64,
    /// The minimum sits on the edge of the search interval.
    pub at_boundary: bool,
}

/// Minimizes `f` on `[lo, hi]`.
///
/// A uniform scan picks the best grid cell, golden-section search shrinks it
/// until the function values stop resolving the minimum, and a few
/// central-difference Newton steps finish the job. The last stage matters:
/// near a quadratic minimum golden-section alone is limited to roughly
/// `sqrt(machine epsilon)` relative accuracy in x.
pub fn minimize_scalar<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, opts: &MinimizeOptions) -> Result<ScalarMinimum> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::Grid(format!("invalid search interval [{lo}, {hi}]")));
    }
    let n = opts.grid_points.max(3);
    let scale = hi - lo;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + scale * i as f64 / (n - 1) as f64 })
        .collect();
    let (best, _) = grid
        .iter()
        .map(|&x| f(x))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(n - 1)];
    let mut iterations = 0;

    // golden section
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let golden_tol = 1e-9 * scale;
    while b - a > golden_tol {
        if iterations >= opts.max_iter {
            return Err(Error::Convergence { iterations, width: b - a });
        }
        iterations += 1;
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (mut x, mut fx) = if fc < fd { (c, fc) } else { (d, fd) };
    for &edge in &[lo, hi] {
        let fe = f(edge);
        if fe < fx {
            x = edge;
            fx = fe;
        }
    }
    let mut tolerance = b - a;

    // Central-difference Newton polish. The stencil shrinks while the
    // estimate keeps settling; once a smaller stencil moves x further than
    // the previous one did, rounding in f dominates and that level is undone.
    let edge_tol = 1e-9 * scale;
    let interior = x - lo > edge_tol && hi - x > edge_tol;
    if interior {
        let mut h = 1e-2 * scale;
        let mut last_change = f64::INFINITY;
        while h >= 1e-8 * scale {
            let (x_before, fx_before) = (x, fx);
            let mut accepted = false;
            for _ in 0..8 {
                iterations += 1;
                let h_eff = h.min(x - lo).min(hi - x);
                if h_eff <= 0.0 {
                    break;
                }
                let (fm, f0, fp) = (f(x - h_eff), f(x), f(x + h_eff));
                let curvature = (fp - 2.0 * f0 + fm) / (h_eff * h_eff);
                if curvature.is_nan() || curvature <= 0.0 {
                    break;
                }
                let step = (fp - fm) / (2.0 * h_eff) / curvature;
                let candidate = (x - step).clamp(lo, hi);
                let fcand = f(candidate);
                if fcand > f0 + 64.0 * f64::EPSILON * f0.abs() {
                    break;
                }
                accepted = true;
                x = candidate;
                fx = fcand;
                if step.abs() <= opts.xtol * x.abs().max(scale) {
                    break;
                }
            }
            let change = (x - x_before).abs();
            if !accepted {
                // every step at this level was rejected: no information
                h *= 0.1;
                continue;
            }
            if change > last_change {
                x = x_before;
                fx = fx_before;
                break;
            }
            tolerance = change;
            last_change = change;
            h *= 0.1;
        }
    }

    Ok(ScalarMinimum {
        x,
        fx,
        iterations,
        tolerance,
        at_boundary: x - lo <= edge_tol || hi - x <= edge_tol,
    })
}

/// Bisection for a root of `f` inside a sign-changing bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rtol: f64, max_iter: usize) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Grid(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rtol * mid.abs().max(f64::MIN_POSITIVE) || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        iterations: max_iter,
        width: hi - lo,
    })
}
