//! Maximum-likelihood power-law tail fits with Kolmogorov–Smirnov selection
//! of the lower cutoff.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest tail accepted by [`fit_power_law`].
pub const MIN_TAIL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailKind {
    Continuous,
    /// Integer data; uses the `xmin - 0.5` continuity approximation.
    Discrete,
}

impl TailKind {
    fn offset(self) -> f64 {
        match self {
            TailKind::Continuous => 0.0,
            TailKind::Discrete => 0.5,
        }
    }
}

/// A fitted tail `P(x) ~ x^exponent` for `x >= xmin`.
///
/// `exponent` is negative (it is `-alpha` of the usual Pareto notation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub xmin: f64,
    pub n_tail: usize,
    pub loglik: f64,
    pub ks_distance: f64,
    pub kind: TailKind,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub kind: TailKind,
    /// Fixed cutoff; when `None` the cutoff minimizing the KS distance is used.
    pub xmin: Option<f64>,
    /// Cap on candidate cutoffs scanned during KS selection.
    pub max_candidates: usize,
}

impl FitOptions {
    pub fn new(kind: TailKind) -> Self {
        FitOptions { kind, xmin: None, max_candidates: 256 }
    }

    pub fn xmin(mut self, xmin: f64) -> Self {
        self.xmin = Some(xmin);
        self
    }
}

/// `alpha` (positive) from a sorted tail, all values `>= xmin`.
fn mle_alpha(tail: &[f64], xmin: f64, kind: TailKind) -> Result<f64> {
    if tail.len() < MIN_TAIL {
        return Err(Error::InsufficientTail { n_tail: tail.len(), required: MIN_TAIL });
    }
    if tail.first() == tail.last() {
        return Err(Error::DegenerateTail);
    }
    let base = xmin - kind.offset();
    let sum: f64 = tail.iter().map(|&x| (x / base).ln()).sum();
    if !(sum > 0.0) {
        return Err(Error::DegenerateTail);
    }
    Ok(1.0 + tail.len() as f64 / sum)
}

/// Complementary CDF `P(X >= x)` of the fitted tail.
fn ccdf(x: f64, xmin: f64, alpha: f64, kind: TailKind) -> f64 {
    let off = kind.offset();
    ((x - off) / (xmin - off)).powf(1.0 - alpha).min(1.0)
}

/// KS distance between the empirical tail and the model.
fn ks_distance(tail: &[f64], xmin: f64, alpha: f64, kind: TailKind) -> f64 {
    let n = tail.len() as f64;
    let mut d: f64 = 0.0;
    match kind {
        TailKind::Continuous => {
            for (i, &x) in tail.iter().enumerate() {
                let model = 1.0 - ccdf(x, xmin, alpha, kind);
                d = d.max((model - i as f64 / n).abs()).max(((i + 1) as f64 / n - model).abs());
            }
        }
        TailKind::Discrete => {
            // compare CDFs at each distinct value: P(X <= v) = 1 - P(X >= v + 1)
            let mut i = 0;
            while i < tail.len() {
                let v = tail[i];
                let mut j = i;
                while j < tail.len() && tail[j] == v {
                    j += 1;
                }
                let empirical = j as f64 / n;
                let model = 1.0 - ccdf(v + 1.0, xmin, alpha, kind);
                d = d.max((empirical - model).abs());
                i = j;
            }
        }
    }
    d
}

/// Hurwitz zeta `sum_{k>=0} (q + k)^-s` for `s > 1`, `q > 0`.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const N: usize = 12;
    // B_2k / (2k)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
    ];
    let mut sum: f64 = (0..N).map(|k| (q + k as f64).powf(-s)).sum();
    let a = q + N as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // Euler–Maclaurin corrections; `rising` tracks s (s+1) ... (s+2k-2)
    let mut rising = s;
    let mut power = a.powf(-s - 1.0);
    for (k, b) in B.iter().enumerate() {
        sum += b * rising * power;
        let m = 2.0 * k as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        power /= a * a;
    }
    sum
}

fn loglik(tail: &[f64], xmin: f64, alpha: f64, kind: TailKind) -> f64 {
    let n = tail.len() as f64;
    match kind {
        TailKind::Continuous => {
            let s: f64 = tail.iter().map(|&x| (x / xmin).ln()).sum();
            n * (alpha - 1.0).ln() - n * xmin.ln() - alpha * s
        }
        TailKind::Discrete => {
            let s: f64 = tail.iter().map(|&x| x.ln()).sum();
            -n * hurwitz_zeta(alpha, xmin).ln() - alpha * s
        }
    }
}

fn fit_at(sorted: &[f64], xmin: f64, kind: TailKind) -> Result<PowerLawFit> {
    let start = sorted.partition_point(|&x| x < xmin);
    let tail = &sorted[start..];
    let alpha = mle_alpha(tail, xmin, kind)?;
    Ok(PowerLawFit {
        exponent: -alpha,
        xmin,
        n_tail: tail.len(),
        loglik: loglik(tail, xmin, alpha, kind),
        ks_distance: ks_distance(tail, xmin, alpha, kind),
        kind,
    })
}

/// Fits a power-law tail to positive samples.
///
/// With a fixed `xmin` the MLE is `alpha = 1 + n / sum ln(x / (xmin - off))`
/// with `off = 0.5` for discrete data and `0` otherwise. Without one, every
/// distinct sample value (thinned to `max_candidates`) leaving at least
/// [`MIN_TAIL`] samples in the tail is tried and the cutoff with the
/// smallest KS distance kept.
pub fn fit_power_law(samples: &[f64], opts: FitOptions) -> Result<PowerLawFit> {
    if samples.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::InvalidArgument("power-law samples must be finite and positive".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);

    if let Some(xmin) = opts.xmin {
        if !(xmin > opts.kind.offset()) {
            return Err(Error::InvalidArgument(format!("xmin {xmin} out of range")));
        }
        return fit_at(&sorted, xmin, opts.kind);
    }

    // distinct values that still leave MIN_TAIL samples above them
    let mut candidates = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        if sorted.len() - i < MIN_TAIL {
            break;
        }
        if i == 0 || sorted[i - 1] != x {
            candidates.push(x);
        }
    }
    if candidates.is_empty() {
        return Err(Error::InsufficientTail { n_tail: sorted.len(), required: MIN_TAIL });
    }
    if candidates.len() > opts.max_candidates.max(2) {
        let m = opts.max_candidates.max(2);
        let last = candidates.len() - 1;
        candidates = (0..m).map(|k| candidates[k * last / (m - 1)]).collect();
        candidates.dedup();
    }

    let mut best: Option<PowerLawFit> = None;
    let mut last_err = None;
    for xmin in candidates {
        match fit_at(&sorted, xmin, opts.kind) {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.ks_distance < b.ks_distance) {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(Error::DegenerateTail))
}
