use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub const CONST_NAME: &str = "const";

/// Significance band of a coefficient's two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Significance {
    /// p < 0.01
    Strong,
    /// 0.01 ≤ p ≤ 0.05
    Weak,
    /// p > 0.05
    None,
}

impl Significance {
    pub fn from_p(p: f64) -> Self {
        if p < 0.01 {
            Significance::Strong
        } else if p <= 0.05 {
            Significance::Weak
        } else {
            Significance::None
        }
    }

    /// Table marker: none below 0.01, `†` up to 0.05, `•` above.
    pub fn marker(self) -> &'static str {
        match self {
            Significance::Strong => "",
            Significance::Weak => "†",
            Significance::None => "•",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub beta: f64,
    pub std_err: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub significance: Significance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionReport {
    /// Intercept first, then one entry per regressor.
    pub coefficients: Vec<Coefficient>,
    pub r2: f64,
    pub r2_adj: f64,
    pub n_samples: usize,
    pub n_features: usize,
}

impl RegressionReport {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn betas(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.beta).collect()
    }
}

/// Design matrix with a leading intercept column.
fn design(x: &[Vec<f64>], p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), p + 1, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] })
}

/// Ordinary least squares with an intercept. Coefficient p-values are
/// two-sided t-tests under homoskedastic errors.
///
/// Rank is checked by column-pivoted QR; a rank-deficient design returns
/// [`Error::RankDeficient`] naming the columns that are linear combinations
/// of the others.
pub fn ols_fit(x: &[Vec<f64>], y: &[f64], names: &[String]) -> Result<RegressionReport> {
    let n = x.len();
    let p = names.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if let Some(bad) = x.iter().find(|r| r.len() != p) {
        return Err(Error::DimensionMismatch { expected: p, got: bad.len() });
    }
    if n <= p + 1 {
        return Err(Error::InsufficientData(format!("{n} samples for {p} regressors")));
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in regression data".into()));
    }
    let a = design(x, p);
    let yv = DVector::from_column_slice(y);
    let all_names: Vec<String> = std::iter::once(CONST_NAME.to_string()).chain(names.iter().cloned()).collect();

    let piv = a.clone().col_piv_qr();
    let r = piv.r();
    let mut order = DMatrix::from_fn(1, p + 1, |_, j| j as f64);
    piv.p().permute_columns(&mut order);
    let scale = r[(0, 0)].abs();
    let rank = (0..=p).take_while(|&i| r[(i, i)].abs() > 1e-9 * scale).count();
    if rank <= p {
        let mut bad: Vec<usize> = (rank..=p).map(|i| order[(0, i)] as usize).collect();
        bad.sort_unstable();
        return Err(Error::RankDeficient(bad.into_iter().map(|j| all_names[j].clone()).collect()));
    }

    let qr = a.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let qty = q.tr_mul(&yv);
    let beta = r.solve_upper_triangular(&qty).ok_or_else(|| Error::RankDeficient(all_names.clone()))?;
    let resid = &yv - &a * &beta;
    let rss = resid.norm_squared();
    let mean = yv.mean();
    let tss = yv.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    if tss == 0.0 {
        return Err(Error::Degenerate("target has zero variance".into()));
    }
    let r2 = 1.0 - rss / tss;
    let df = (n - p - 1) as f64;
    let r2_adj = 1.0 - (1.0 - r2) * (n - 1) as f64 / df;

    let sigma2 = rss / df;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p + 1, p + 1))
        .ok_or_else(|| Error::RankDeficient(all_names.clone()))?;
    let t_dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let coefficients = (0..=p)
        .map(|j| {
            let var = sigma2 * r_inv.row(j).norm_squared();
            let std_err = var.sqrt();
            let b = beta[j];
            let (t_stat, p_value) = if std_err > 0.0 {
                let t = b / std_err;
                (t, 2.0 * t_dist.cdf(-t.abs()))
            } else if b != 0.0 {
                (f64::INFINITY.copysign(b), 0.0)
            } else {
                (0.0, 1.0)
            };
            Coefficient {
                name: all_names[j].clone(),
                beta: b,
                std_err,
                t_stat,
                p_value,
                significance: Significance::from_p(p_value),
            }
        })
        .collect();
    Ok(RegressionReport { coefficients, r2, r2_adj, n_samples: n, n_features: p })
}
