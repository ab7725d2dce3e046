//! One-dimensional search for the RZF regularizer.
//!
//! Golden-section search over `log10(xi)`, seeded by a coarse log-spaced grid
//! and finished with a parabolic step. The grid guards against a rate curve
//! that is not unimodal: the result is never worse than the best probe.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_XI_RANGE: (f64, f64) = (1e-4, 1e2);
pub const COARSE_PROBES: usize = 32;
/// Final bracket width relative to the searched log-range.
const RELATIVE_WIDTH: f64 = 1e-4;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiOptimum {
    pub xi: f64,
    pub rate: f64,
}

struct Objective<F> {
    f: F,
}

impl<F: Fn(f64) -> f64> Objective<F> {
    /// Evaluates at `10^t`.
    fn at(&self, t: f64) -> Result<f64> {
        let xi = 10f64.powf(t);
        let v = (self.f)(xi);
        if !v.is_finite() {
            return Err(Error::OptimizerDomain(xi));
        }
        Ok(v)
    }
}

/// Maximizes `rate(xi)` over `range`.
pub fn optimize_xi<F: Fn(f64) -> f64>(rate: F, range: (f64, f64)) -> Result<XiOptimum> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::config(format!("invalid xi range [{lo}, {hi}]")));
    }
    let obj = Objective { f: rate };
    let (tlo, thi) = (lo.log10(), hi.log10());
    let step = (thi - tlo) / (COARSE_PROBES - 1) as f64;
    let probes: Vec<(f64, f64)> = (0..COARSE_PROBES)
        .map(|i| {
            let t = if i == COARSE_PROBES - 1 { thi } else { tlo + i as f64 * step };
            obj.at(t).map(|v| (t, v))
        })
        .collect::<Result<_>>()?;
    let (best_i, &(mut best_t, mut best_v)) = probes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("probes are nonempty");

    let mut a = probes[best_i.saturating_sub(1)].0;
    let mut b = probes[(best_i + 1).min(COARSE_PROBES - 1)].0;
    let tol = RELATIVE_WIDTH * (thi - tlo);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (obj.at(c)?, obj.at(d)?);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = obj.at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = obj.at(d)?;
        }
    }
    for (t, v) in [(c, fc), (d, fd)] {
        if v > best_v {
            best_t = t;
            best_v = v;
        }
    }
    // parabolic step through the final bracket
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (obj.at(a)?, obj.at(m)?, obj.at(b)?);
    let h = 0.5 * (b - a);
    let curvature = fa - 2.0 * fm + fb;
    if curvature < 0.0 {
        let t = (m + 0.5 * h * (fa - fb) / curvature).clamp(a, b);
        let v = obj.at(t)?;
        if v > best_v {
            best_t = t;
            best_v = v;
        }
    }
    for (t, v) in [(a, fa), (m, fm), (b, fb)] {
        if v > best_v {
            best_t = t;
            best_v = v;
        }
    }
    Ok(XiOptimum { xi: 10f64.powf(best_t), rate: best_v })
}
