use serde::Serialize;

use super::features::Feature;
use crate::error::{Error, Result};

/// Box-Cox transform; `ln x` at `λ = 0`.
pub fn boxcox(x: f64, lambda: f64) -> f64 {
    if lambda.abs() < 1e-12 {
        x.ln()
    } else {
        (x.powf(lambda) - 1.0) / lambda
    }
}

/// Profile log-likelihood of `λ` for positive data under a normal model of
/// the transformed values, up to a constant.
pub fn boxcox_loglik(xs: &[f64], lambda: f64) -> f64 {
    let n = xs.len() as f64;
    let y: Vec<f64> = xs.iter().map(|x| boxcox(*x, lambda)).collect();
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let log_sum: f64 = xs.iter().map(|x| x.ln()).sum();
    -0.5 * n * var.ln() + (lambda - 1.0) * log_sum
}

pub const BOXCOX_RANGE: (f64, f64) = (-2.0, 2.0);

/// Maximum-likelihood `λ` in [`BOXCOX_RANGE`]: a coarse grid locates the
/// peak, golden-section search refines it.
pub fn boxcox_mle(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 || xs.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument("Box-Cox needs at least two finite positive values".into()));
    }
    if xs.iter().all(|x| *x == xs[0]) {
        return Err(Error::Degenerate("Box-Cox on constant data".into()));
    }
    let (lo, hi) = BOXCOX_RANGE;
    let steps = 80;
    let h = (hi - lo) / steps as f64;
    let grid: Vec<f64> = (0..=steps).map(|i| lo + h * i as f64).collect();
    let best = (0..grid.len())
        .max_by(|&a, &b| boxcox_loglik(xs, grid[a]).total_cmp(&boxcox_loglik(xs, grid[b])))
        .expect("non-empty grid");
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(steps)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (boxcox_loglik(xs, c), boxcox_loglik(xs, d));
    while b - a > 1e-9 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = boxcox_loglik(xs, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = boxcox_loglik(xs, d);
        }
    }
    Ok((a + b) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValueTransform {
    Identity,
    Log1p,
    /// `boxcox(max(x + shift, floor), λ)`; `floor` is the smallest shifted
    /// training value, so unseen low values land at the training minimum.
    BoxCox {
        lambda: f64,
        shift: f64,
        floor: f64,
    },
}

impl ValueTransform {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            ValueTransform::Identity => x,
            ValueTransform::Log1p => x.ln_1p(),
            ValueTransform::BoxCox { lambda, shift, floor } => boxcox((x + shift).max(floor), lambda),
        }
    }

    /// Box-Cox fitted on `xs`. Non-positive data is shifted up so its
    /// minimum equals the smallest positive value (or 1 if none).
    pub fn fit_boxcox(xs: &[f64]) -> Result<Self> {
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let shift = if min > 0.0 {
            0.0
        } else {
            let smallest_pos = xs.iter().copied().filter(|x| *x > 0.0).fold(f64::INFINITY, f64::min);
            let target = if smallest_pos.is_finite() { smallest_pos } else { 1.0 };
            target - min
        };
        let shifted: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        let floor = shifted.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(ValueTransform::BoxCox { lambda: boxcox_mle(&shifted)?, shift, floor })
    }
}

/// Transform then min-max scaling of one column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnTransform {
    pub name: String,
    pub transform: ValueTransform,
    pub min: f64,
    pub max: f64,
}

impl ColumnTransform {
    /// `None` when the transformed training column has no spread.
    pub fn fit(name: &str, transform: ValueTransform, xs: &[f64]) -> Option<Self> {
        let t: Vec<f64> = xs.iter().map(|x| transform.apply(*x)).collect();
        let min = t.iter().copied().fold(f64::INFINITY, f64::min);
        let max = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (max > min && max.is_finite() && min.is_finite()).then(|| ColumnTransform {
            name: name.to_string(),
            transform,
            min,
            max,
        })
    }

    /// Value in `[0, 1]`; values outside the training range are clipped.
    pub fn apply(&self, x: f64) -> f64 {
        ((self.transform.apply(x) - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
    }
}

/// Default transform for each predictor: `log1p` on degrees and the median
/// price, Box-Cox on PageRank and `p_resale`, none on PCA scores.
pub fn default_transform(feature: Feature, train: &[f64]) -> Result<ValueTransform> {
    Ok(match feature {
        Feature::KBuyer | Feature::KSeller | Feature::MedianPrice => ValueTransform::Log1p,
        Feature::PrBuyer | Feature::PrSeller | Feature::PResale => ValueTransform::fit_boxcox(train)?,
        Feature::VisPca(_) => ValueTransform::Identity,
    })
}

/// Fitted per-column transforms of a design matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureTransform {
    pub columns: Vec<ColumnTransform>,
    /// Index into the input columns of each kept column.
    pub kept: Vec<usize>,
    /// Input columns dropped for having no spread on the training rows.
    pub dropped: Vec<String>,
}

impl FeatureTransform {
    /// Fits on training rows (row-major, one column per `features` entry).
    pub fn fit(features: &[Feature], train: &[Vec<f64>]) -> Result<Self> {
        let mut columns = Vec::new();
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for (j, f) in features.iter().enumerate() {
            let col: Vec<f64> = train.iter().map(|r| r[j]).collect();
            let name = f.name();
            let constant = col.iter().all(|x| *x == col[0]);
            let fitted = if constant { None } else { ColumnTransform::fit(&name, default_transform(*f, &col)?, &col) };
            match fitted {
                Some(c) => {
                    columns.push(c);
                    kept.push(j);
                }
                None => {
                    log::warn!("feature {name} has zero variance on the training rows; dropped");
                    dropped.push(name);
                }
            }
        }
        Ok(FeatureTransform { columns, kept, dropped })
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        self.columns.iter().zip(&self.kept).map(|(c, &j)| c.apply(row[j])).collect()
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}
