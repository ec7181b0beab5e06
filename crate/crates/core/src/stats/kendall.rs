use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// One paired ordinal observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub x: f64,
    pub y: f64,
}

impl PairedSample {
    pub fn new(x: f64, y: f64) -> Self {
        PairedSample { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KendallTau {
    pub tau: f64,
    pub concordant: u64,
    pub discordant: u64,
    /// Pairs tied in `x` only.
    pub ties_x: u64,
    /// Pairs tied in `y` only.
    pub ties_y: u64,
    /// Pairs tied in both, excluded from every term.
    pub ties_xy: u64,
    /// Normal-approximation z statistic of `C - D` under independence,
    /// with the tie-corrected variance.
    pub z: f64,
    /// Two-sided p-value for `z`. Approximate, especially for small samples.
    pub p_value: f64,
}

/// Sum of `f(t)` over the lengths `t` of runs of equal keys in a sorted slice.
fn tie_runs<T: PartialEq>(sorted: &[T], mut f: impl FnMut(u64)) {
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            f(run);
            run = 1;
        }
    }
    if !sorted.is_empty() {
        f(run);
    }
}

fn pairs(t: u64) -> u64 {
    t * (t - 1) / 2
}

/// Number of strictly decreasing pairs in `ys` (stable merge sort).
fn count_inversions(ys: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = ys.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = count_inversions(&mut ys[..mid], buf) + count_inversions(&mut ys[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if ys[j] < ys[i] {
            swaps += (mid - i) as u64;
            buf.push(ys[j]);
            j += 1;
        } else {
            buf.push(ys[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&ys[i..mid]);
    buf.extend_from_slice(&ys[j..n]);
    ys.copy_from_slice(buf);
    swaps
}

/// Kendall's tau-b in `O(n log n)` (Knight's algorithm).
pub fn kendall_tau_b(samples: &[PairedSample]) -> Result<KendallTau> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    if samples.iter().any(|s| !s.x.is_finite() || !s.y.is_finite()) {
        return Err(Error::NonFiniteSample);
    }
    // `+ 0.0` folds -0.0 into 0.0 so total ordering agrees with equality.
    let mut sorted: Vec<(f64, f64)> = samples.iter().map(|s| (s.x + 0.0, s.y + 0.0)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let xs: Vec<f64> = sorted.iter().map(|p| p.0).collect();
    let (mut tied_x, mut var_x1, mut var_x2, mut var_x3) = (0u64, 0f64, 0f64, 0f64);
    tie_runs(&xs, |t| {
        tied_x += pairs(t);
        let t = t as f64;
        var_x1 += t * (t - 1.0) * (2.0 * t + 5.0);
        var_x2 += t * (t - 1.0) * (t - 2.0);
        var_x3 += t * (t - 1.0);
    });
    let mut tied_xy = 0u64;
    tie_runs(&sorted, |t| tied_xy += pairs(t));

    let mut ys: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let discordant = count_inversions(&mut ys, &mut Vec::with_capacity(n));
    let (mut tied_y, mut var_y1, mut var_y2, mut var_y3) = (0u64, 0f64, 0f64, 0f64);
    tie_runs(&ys, |t| {
        tied_y += pairs(t);
        let t = t as f64;
        var_y1 += t * (t - 1.0) * (2.0 * t + 5.0);
        var_y2 += t * (t - 1.0) * (t - 2.0);
        var_y3 += t * (t - 1.0);
    });

    let total = pairs(n as u64);
    let concordant = total + tied_xy - tied_x - tied_y - discordant;
    let ties_x = tied_x - tied_xy;
    let ties_y = tied_y - tied_xy;

    let untied = concordant + discordant;
    // Pairs not tied in x are exactly C + D + Ty.
    if untied + ties_y == 0 {
        return Err(Error::UndefinedCorrelation("x"));
    }
    if untied + ties_x == 0 {
        return Err(Error::UndefinedCorrelation("y"));
    }
    let s = concordant as f64 - discordant as f64;
    let tau = s / (((untied + ties_x) as f64) * ((untied + ties_y) as f64)).sqrt();

    let nf = n as f64;
    let mut var = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - var_x1 - var_y1) / 18.0
        + var_x3 * var_y3 / (2.0 * nf * (nf - 1.0));
    if n > 2 {
        var += var_x2 * var_y2 / (9.0 * nf * (nf - 1.0) * (nf - 2.0));
    }
    let (z, p_value) = if var > 0.0 {
        let z = s / var.sqrt();
        (z, erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0))
    } else {
        (0.0, 1.0)
    };

    Ok(KendallTau {
        tau: tau.clamp(-1.0, 1.0),
        concordant,
        discordant,
        ties_x,
        ties_y,
        ties_xy: tied_xy,
        z,
        p_value,
    })
}
