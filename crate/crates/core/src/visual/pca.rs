use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::Range;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::emb::{read_container, write_container, EmbeddingMatrix, PCA_MAGIC};
use crate::error::{Error, Result};

const CHUNK_ROWS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PcaOptions {
    pub k: usize,
    /// Extra subspace dimensions carried through the iteration.
    pub oversample: usize,
    pub max_iter: usize,
    /// Stop once every leading eigenvalue changes by less than this, relative.
    pub tol: f64,
    pub seed: u64,
}

impl Default for PcaOptions {
    fn default() -> Self {
        PcaOptions { k: 5, oversample: 10, max_iter: 200, tol: 1e-6, seed: 0 }
    }
}

/// Mean, orthonormal principal axes (one per row of `components`) and the
/// variance each explains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    /// Variance along each component (covariance eigenvalue, `n − 1` denominator).
    pub explained_variance: Vec<f64>,
    pub explained_ratio: Vec<f64>,
    pub total_variance: f64,
}

fn rows_block(emb: &EmbeddingMatrix, mean: &[f64], rows: Range<usize>) -> DMatrix<f64> {
    let d = emb.dim();
    let m = rows.len();
    DMatrix::from_row_iterator(m, d, rows.flat_map(|i| emb.row(i).iter().zip(mean).map(|(x, mu)| *x as f64 - mu)))
}

fn chunks(n: usize) -> Vec<Range<usize>> {
    (0..n.div_ceil(CHUNK_ROWS)).map(|c| c * CHUNK_ROWS..((c + 1) * CHUNK_ROWS).min(n)).collect()
}

/// `C·Q` for the sample covariance `C` of `emb`, accumulated chunk by chunk
/// in a fixed order.
fn cov_times(emb: &EmbeddingMatrix, mean: &[f64], q: &DMatrix<f64>) -> DMatrix<f64> {
    let parts: Vec<DMatrix<f64>> = chunks(emb.len())
        .into_par_iter()
        .map(|r| {
            let x = rows_block(emb, mean, r);
            x.tr_mul(&(&x * q))
        })
        .collect();
    let mut acc = DMatrix::zeros(emb.dim(), q.ncols());
    for p in parts {
        acc += p;
    }
    acc / (emb.len() - 1) as f64
}

fn orthonormalize(z: DMatrix<f64>) -> DMatrix<f64> {
    z.qr().q()
}

/// Principal components by randomized subspace iteration. The covariance
/// matrix is never formed: each iteration streams the rows once. Returns
/// fewer than `k` components, with a warning, when the data has lower rank.
pub fn fit_pca(emb: &EmbeddingMatrix, opts: PcaOptions) -> Result<PcaModel> {
    let (n, d) = (emb.len(), emb.dim());
    if opts.k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if n < opts.k + 1 {
        return Err(Error::InsufficientData(format!("{n} vectors, need at least {}", opts.k + 1)));
    }

    let sums: Vec<Vec<f64>> = chunks(n)
        .into_par_iter()
        .map(|r| {
            let mut s = vec![0.0; d];
            for i in r {
                s.iter_mut().zip(emb.row(i)).for_each(|(a, x)| *a += *x as f64);
            }
            s
        })
        .collect();
    let mut mean = vec![0.0; d];
    for s in sums {
        mean.iter_mut().zip(s).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let sq: Vec<f64> = chunks(n).into_par_iter().map(|r| rows_block(emb, &mean, r).norm_squared()).collect();
    let total_variance = sq.iter().sum::<f64>() / (n - 1) as f64;
    if total_variance <= 0.0 {
        return Err(Error::Degenerate("all embeddings are identical".into()));
    }

    let l = (opts.k + opts.oversample).min(d);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q = orthonormalize(DMatrix::from_fn(d, l, |_, _| StandardNormal.sample(&mut rng)));
    let mut prev: Option<Vec<f64>> = None;
    let mut iterations = 0;
    let (ritz_vals, ritz_vecs) = loop {
        iterations += 1;
        let z = cov_times(emb, &mean, &q);
        let b = q.tr_mul(&z);
        let b = (&b + b.transpose()) * 0.5;
        let eig = SymmetricEigen::new(b);
        let mut order: Vec<usize> = (0..l).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let top: Vec<f64> = order.iter().take(opts.k).map(|&i| eig.eigenvalues[i]).collect();
        let converged = prev.as_ref().is_some_and(|p| {
            p.iter().zip(&top).all(|(a, b)| (a - b).abs() <= opts.tol * b.abs().max(total_variance * 1e-12))
        });
        if converged || iterations >= opts.max_iter {
            if !converged {
                log::warn!("PCA stopped after {iterations} iterations without reaching tolerance {}", opts.tol);
            }
            let vecs = DMatrix::from_fn(l, opts.k.min(l), |r, c| eig.eigenvectors[(r, order[c])]);
            break (top, &q * vecs);
        }
        prev = Some(top);
        q = orthonormalize(z);
    };
    log::debug!("PCA converged after {iterations} iterations");

    let floor = total_variance * 1e-10;
    let mut components = Vec::new();
    let mut explained_variance = Vec::new();
    for (c, &val) in ritz_vals.iter().enumerate() {
        if val <= floor {
            break;
        }
        let mut v: Vec<f64> = ritz_vecs.column(c).iter().copied().collect();
        let pivot = v.iter().enumerate().fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        explained_variance.push(val);
    }
    if components.len() < opts.k {
        log::warn!("data has rank {} < k = {}; returning {} components", components.len(), opts.k, components.len());
    }
    let explained_ratio = explained_variance.iter().map(|v| v / total_variance).collect();
    Ok(PcaModel { mean, components, explained_variance, explained_ratio, total_variance })
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `components · (v − mean)`.
    pub fn project<T: Copy + Into<f64>>(&self, v: &[T]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(self
            .components
            .iter()
            .map(|c| c.iter().zip(v).zip(&self.mean).map(|((w, x), m)| w * ((*x).into() - m)).sum())
            .collect())
    }

    /// Scores of every row, in row order.
    pub fn project_all(&self, emb: &EmbeddingMatrix) -> Result<Vec<Vec<f64>>> {
        (0..emb.len()).into_par_iter().map(|i| self.project(emb.row(i))).collect()
    }

    /// Stores the model in a `PCA1` container with records `mean`,
    /// `variance` (total variance followed by one value per component) and
    /// `pc1..pck`. Values are stored as `f32`.
    pub fn write<W: Write>(&self, writer: W) -> Result<()> {
        let d = self.dim();
        if d < self.k() + 1 {
            return Err(Error::InvalidArgument("dimension too small to store the variance record".into()));
        }
        let mut m = EmbeddingMatrix::new(d);
        let f = |v: &[f64]| v.iter().map(|x| *x as f32).collect::<Vec<f32>>();
        m.push("mean", &f(&self.mean))?;
        let mut var = vec![0.0; d];
        var[0] = self.total_variance;
        var[1..=self.k()].copy_from_slice(&self.explained_variance);
        m.push("variance", &f(&var))?;
        for (i, c) in self.components.iter().enumerate() {
            m.push(format!("pc{}", i + 1), &f(c))?;
        }
        write_container(writer, PCA_MAGIC, &m)
    }

    /// Reads a `PCA1` container. Components are re-orthonormalized in `f64`
    /// after the `f32` round trip.
    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let m = read_container(reader, PCA_MAGIC, "PCA1")?;
        let bad = |message: &str| Error::Format { kind: "PCA1", message: message.into() };
        let get = |id: &str| m.get(id).map(|r| r.iter().map(|x| *x as f64).collect::<Vec<f64>>());
        let mean = get("mean").ok_or_else(|| bad("missing `mean` record"))?;
        let var = get("variance").ok_or_else(|| bad("missing `variance` record"))?;
        let k = m.len() - 2;
        let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
        for i in 1..=k {
            let mut v = get(&format!("pc{i}")).ok_or_else(|| bad("component records must be pc1..pck"))?;
            for u in &components {
                let p: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, a)| *x -= p * a);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(bad("zero component"));
            }
            v.iter_mut().for_each(|x| *x /= norm);
            components.push(v);
        }
        let total_variance = var[0];
        let explained_variance = var[1..=k].to_vec();
        let explained_ratio = explained_variance.iter().map(|v| v / total_variance).collect();
        Ok(PcaModel { mean, components, explained_variance, explained_ratio, total_variance })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Exact eigen-decomposition of a dense covariance; reference for small `d`.
#[doc(hidden)]
pub fn dense_covariance_eigenvalues(emb: &EmbeddingMatrix) -> Vec<f64> {
    let n = emb.len();
    let x = DMatrix::from_row_iterator(n, emb.dim(), (0..n).flat_map(|i| emb.row(i).iter().map(|v| *v as f64)));
    let mean: DVector<f64> = x.row_mean().transpose();
    let mut c = x.clone();
    for mut row in c.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = c.tr_mul(&c) / (n - 1) as f64;
    let mut ev: Vec<f64> = SymmetricEigen::new(cov).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}
