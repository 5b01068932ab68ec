use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::emb::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::network::realization_rng;

fn dot(u: &[f32], v: &[f32]) -> f64 {
    u.iter().zip(v).map(|(a, b)| *a as f64 * *b as f64).sum()
}

fn norm(u: &[f32]) -> f64 {
    dot(u, u).sqrt()
}

/// `1 − u·v / (‖u‖‖v‖)`, clamped to `[0, 2]` against rounding.
pub fn cosine_distance(u: &[f32], v: &[f32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), got: v.len() });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(cd_with_norms(u, v, nu, nv))
}

fn cd_with_norms(u: &[f32], v: &[f32], nu: f64, nv: f64) -> f64 {
    (1.0 - dot(u, v) / (nu * nv)).clamp(0.0, 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DistanceOptions {
    /// Pairs evaluated per cell; cells with fewer pairs are enumerated.
    pub max_pairs_per_cell: usize,
    pub seed: u64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions { max_pairs_per_cell: 100_000, seed: 0 }
    }
}

/// Cosine-distance statistics between groups `a` and `b` (`a == b` on the
/// diagonal). `mean`/`std` are `None` when the cell has no pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceCell {
    pub a: String,
    pub b: String,
    pub mean: Option<f64>,
    /// Population standard deviation over the evaluated pairs.
    pub std: Option<f64>,
    pub n_pairs: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PooledDistance {
    pub mean: f64,
    pub std: f64,
    pub n_pairs: u64,
}

/// Upper triangle (diagonal included) of the group × group distance matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceSummary {
    pub labels: Vec<String>,
    pub cells: Vec<DistanceCell>,
}

impl DistanceSummary {
    pub fn cell(&self, a: &str, b: &str) -> Option<&DistanceCell> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.cells.iter().find(|c| c.a == a && c.b == b)
    }

    fn pooled(&self, diagonal: bool) -> Option<PooledDistance> {
        let (mut n, mut s, mut ss) = (0u64, 0.0, 0.0);
        for c in self.cells.iter().filter(|c| (c.a == c.b) == diagonal) {
            if let (Some(m), Some(sd)) = (c.mean, c.std) {
                let k = c.n_pairs as f64;
                n += c.n_pairs;
                s += m * k;
                ss += (sd * sd + m * m) * k;
            }
        }
        (n > 0).then(|| {
            let mean = s / n as f64;
            PooledDistance { mean, std: (ss / n as f64 - mean * mean).max(0.0).sqrt(), n_pairs: n }
        })
    }

    /// All evaluated within-group pairs taken together.
    pub fn pooled_intra(&self) -> Option<PooledDistance> {
        self.pooled(true)
    }

    /// All evaluated between-group pairs taken together.
    pub fn pooled_inter(&self) -> Option<PooledDistance> {
        self.pooled(false)
    }

    /// Long-format CSV `a,b,mean,std,n_pairs` listing both orders of each
    /// off-diagonal cell; undefined cells have empty `mean`/`std`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["a", "b", "mean", "std", "n_pairs"])?;
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        let mut rows: Vec<(&str, &str, &DistanceCell)> = Vec::new();
        for c in &self.cells {
            rows.push((&c.a, &c.b, c));
            if c.a != c.b {
                rows.push((&c.b, &c.a, c));
            }
        }
        rows.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        for (a, b, c) in rows {
            w.write_record([a, b, &fmt(c.mean), &fmt(c.std), &c.n_pairs.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Default)]
struct Moments {
    n: u64,
    sum: f64,
    sumsq: f64,
}

impl Moments {
    fn add(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    fn mean(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }

    fn std(&self) -> Option<f64> {
        let m = self.mean()?;
        Some((self.sumsq / self.n as f64 - m * m).max(0.0).sqrt())
    }
}

/// Mean and spread of cosine distance within and between the groups of
/// `grouping` (object id → label). Ids without a label and zero vectors are
/// skipped. Cell `k` (row-major over the upper triangle) draws its pairs
/// from stream `k` of `seed`, so the result is reproducible bit-for-bit.
pub fn group_distance_matrix(
    emb: &EmbeddingMatrix,
    grouping: &HashMap<String, String>,
    opts: DistanceOptions,
) -> DistanceSummary {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut zero = 0usize;
    for (i, id) in emb.ids().iter().enumerate() {
        if let Some(label) = grouping.get(id) {
            if norm(emb.row(i)) == 0.0 {
                zero += 1;
                continue;
            }
            groups.entry(label).or_default().push(i);
        }
    }
    if zero > 0 {
        log::warn!("skipped {zero} zero-norm embeddings");
    }
    let norms: Vec<f64> = (0..emb.len()).map(|i| norm(emb.row(i))).collect();
    let labels: Vec<&str> = groups.keys().copied().collect();
    let members: Vec<&Vec<usize>> = groups.values().collect();
    let pairs: Vec<(usize, usize)> = (0..labels.len()).flat_map(|a| (a..labels.len()).map(move |b| (a, b))).collect();

    let cap = opts.max_pairs_per_cell as u64;
    let cells = pairs
        .par_iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let (ga, gb) = (members[a], members[b]);
            let mut acc = Moments::default();
            let mut eval = |i: usize, j: usize| acc.add(cd_with_norms(emb.row(i), emb.row(j), norms[i], norms[j]));
            let total = if a == b {
                let n = ga.len() as u64;
                n * n.saturating_sub(1) / 2
            } else {
                ga.len() as u64 * gb.len() as u64
            };
            if total <= cap {
                if a == b {
                    for (x, &i) in ga.iter().enumerate() {
                        for &j in &ga[x + 1..] {
                            eval(i, j);
                        }
                    }
                } else {
                    for &i in ga {
                        for &j in gb {
                            eval(i, j);
                        }
                    }
                }
            } else {
                let mut rng = realization_rng(opts.seed, k as u64);
                for _ in 0..cap {
                    if a == b {
                        let pick = sample(&mut rng, ga.len(), 2);
                        eval(ga[pick.index(0)], ga[pick.index(1)]);
                    } else {
                        let i = ga[rng.random_range(0..ga.len())];
                        let j = gb[rng.random_range(0..gb.len())];
                        eval(i, j);
                    }
                }
            }
            DistanceCell {
                a: labels[a].to_string(),
                b: labels[b].to_string(),
                mean: acc.mean(),
                std: acc.std(),
                n_pairs: acc.n,
            }
        })
        .collect();
    DistanceSummary { labels: labels.into_iter().map(String::from).collect(), cells }
}

/// Keeps at most `max_per_group` randomly chosen ids of each group; ids
/// without a group are kept. Original order is preserved.
pub fn downsample_groups(
    emb: &EmbeddingMatrix,
    grouping: &HashMap<String, String>,
    max_per_group: usize,
    seed: u64,
) -> EmbeddingMatrix {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, id) in emb.ids().iter().enumerate() {
        if let Some(label) = grouping.get(id) {
            groups.entry(label).or_default().push(i);
        }
    }
    let mut keep = vec![true; emb.len()];
    for (k, rows) in groups.values().enumerate() {
        if rows.len() > max_per_group {
            let mut rng = realization_rng(seed, k as u64);
            let chosen = sample(&mut rng, rows.len(), max_per_group);
            rows.iter().for_each(|&r| keep[r] = false);
            chosen.iter().for_each(|c| keep[rows[c]] = true);
        }
    }
    let mut i = 0;
    emb.filter(|_| {
        i += 1;
        keep[i - 1]
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Metric {
    #[default]
    Euclidean,
    Cosine,
}

impl Metric {
    fn distance(self, u: &[f64], v: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            Metric::Cosine => {
                let d: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
                let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if nu == 0.0 || nv == 0.0 {
                    f64::NAN
                } else {
                    (1.0 - d / (nu * nv)).clamp(0.0, 2.0)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationRatio {
    pub inter_mean: f64,
    pub intra_mean: f64,
    /// `inter_mean / intra_mean`.
    pub ratio: f64,
    pub n_inter: u64,
    pub n_intra: u64,
}

/// Mean distance between points of different groups over mean distance
/// between points of the same group. Each side is enumerated when it has
/// at most `max_pairs` pairs and otherwise estimated from `max_pairs`
/// uniformly drawn pairs.
pub fn inter_intra_ratio<L: AsRef<str>>(
    points: &[Vec<f64>],
    labels: &[L],
    metric: Metric,
    max_pairs: usize,
    seed: u64,
) -> Result<SeparationRatio> {
    if points.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), got: labels.len() });
    }
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l.as_ref()).or_default().push(i);
    }
    if groups.len() < 2 {
        return Err(Error::InvalidArgument("need at least two groups".into()));
    }
    let members: Vec<&Vec<usize>> = groups.values().collect();
    let sizes: Vec<u64> = members.iter().map(|g| g.len() as u64).collect();
    let intra_total: u64 = sizes.iter().map(|n| n * (n - 1) / 2).sum();
    if intra_total == 0 {
        return Err(Error::InsufficientData("every group is a singleton; intra distance undefined".into()));
    }
    let n = points.len() as u64;
    let inter_total = n * (n - 1) / 2 - intra_total;
    let cap = max_pairs as u64;
    let d = |i: usize, j: usize| metric.distance(&points[i], &points[j]);

    let mut intra = Moments::default();
    if intra_total <= cap {
        for g in &members {
            for (x, &i) in g.iter().enumerate() {
                for &j in &g[x + 1..] {
                    intra.add(d(i, j));
                }
            }
        }
    } else {
        let mut rng = realization_rng(seed, 0);
        let cum: Vec<u64> = sizes
            .iter()
            .scan(0u64, |acc, n| {
                *acc += n * (n - 1) / 2;
                Some(*acc)
            })
            .collect();
        for _ in 0..cap {
            let r = rng.random_range(0..intra_total);
            let g = members[cum.partition_point(|&c| c <= r)];
            let pick = sample(&mut rng, g.len(), 2);
            intra.add(d(g[pick.index(0)], g[pick.index(1)]));
        }
    }

    let label_of: Vec<usize> = {
        let mut v = vec![0; points.len()];
        for (k, g) in members.iter().enumerate() {
            g.iter().for_each(|&i| v[i] = k);
        }
        v
    };
    let mut inter = Moments::default();
    if inter_total <= cap {
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if label_of[i] != label_of[j] {
                    inter.add(d(i, j));
                }
            }
        }
    } else {
        let mut rng = realization_rng(seed, 1);
        while inter.n < cap {
            let i = rng.random_range(0..points.len());
            let j = rng.random_range(0..points.len());
            if label_of[i] != label_of[j] {
                inter.add(d(i, j));
            }
        }
    }

    let (inter_mean, intra_mean) = (inter.mean().unwrap_or(f64::NAN), intra.mean().unwrap_or(f64::NAN));
    if intra_mean == 0.0 || !intra_mean.is_finite() {
        return Err(Error::Degenerate("intra-group distance is zero or undefined".into()));
    }
    Ok(SeparationRatio { inter_mean, intra_mean, ratio: inter_mean / intra_mean, n_inter: inter.n, n_intra: intra.n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_distance(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(), 1.0);
        let hand = 1.0 - 1.0 / 2f64.sqrt();
        assert!((cosine_distance(&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0]).unwrap() - hand).abs() < 1e-15);
        assert!(cosine_distance(&[0.3, 0.7, 2.0], &[0.3, 0.7, 2.0]).unwrap().abs() < 1e-12);
        assert!(matches!(cosine_distance(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroNorm)));
        assert!(matches!(cosine_distance(&[1.0], &[1.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    fn grouped(rows: &[(&str, &str, [f32; 3])]) -> (EmbeddingMatrix, HashMap<String, String>) {
        let mut m = EmbeddingMatrix::new(3);
        let mut g = HashMap::new();
        for (id, label, v) in rows {
            m.push(*id, v).unwrap();
            g.insert(id.to_string(), label.to_string());
        }
        (m, g)
    }

    #[test]
    fn matrix_identical_and_orthogonal_groups() {
        let (m, g) = grouped(&[
            ("a1", "A", [1.0, 0.0, 0.0]),
            ("a2", "A", [2.0, 0.0, 0.0]),
            ("a3", "A", [0.5, 0.0, 0.0]),
            ("b1", "B", [0.0, 1.0, 0.0]),
            ("b2", "B", [0.0, 3.0, 0.0]),
            ("c1", "C", [0.0, 0.0, 1.0]),
        ]);
        let s = group_distance_matrix(&m, &g, DistanceOptions::default());
        assert_eq!(s.labels, ["A", "B", "C"]);
        assert_eq!(s.cells.len(), 6);
        let aa = s.cell("A", "A").unwrap();
        assert_eq!((aa.mean, aa.n_pairs), (Some(0.0), 3));
        let ab = s.cell("B", "A").unwrap();
        assert_eq!((ab.mean, ab.std, ab.n_pairs), (Some(1.0), Some(0.0), 6));
        let cc = s.cell("C", "C").unwrap();
        assert_eq!((cc.mean, cc.n_pairs), (None, 0));
        assert_eq!(s.pooled_inter().unwrap().mean, 1.0);
        assert_eq!(s.pooled_intra().unwrap().n_pairs, 4);
        let mut csv = Vec::new();
        s.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.contains("B,A,1.000000,0.000000,6\n"));
        assert!(text.contains("C,C,,,0\n"));
    }

    #[test]
    fn sampled_matrix_is_reproducible() {
        let mut rows = Vec::new();
        for i in 0..40 {
            let f = i as f32;
            rows.push((format!("x{i}"), if i % 2 == 0 { "E" } else { "O" }, [1.0 + f, (f * 0.37).sin().abs(), 0.2]));
        }
        let refs: Vec<(&str, &str, [f32; 3])> = rows.iter().map(|(a, b, v)| (a.as_str(), *b, *v)).collect();
        let (m, g) = grouped(&refs);
        let opts = DistanceOptions { max_pairs_per_cell: 50, seed: 9 };
        let a = group_distance_matrix(&m, &g, opts);
        let b = group_distance_matrix(&m, &g, opts);
        assert_eq!(a, b);
        assert!(a.cells.iter().all(|c| c.n_pairs == 50));
        let other = group_distance_matrix(&m, &g, DistanceOptions { seed: 10, ..opts });
        assert_ne!(a, other);
    }

    #[test]
    fn downsampling_caps_groups() {
        let rows: Vec<(String, &str, [f32; 3])> =
            (0..10).map(|i| (format!("k{i}"), if i < 8 { "big" } else { "small" }, [1.0, i as f32, 0.0])).collect();
        let refs: Vec<(&str, &str, [f32; 3])> = rows.iter().map(|(a, b, v)| (a.as_str(), *b, *v)).collect();
        let (m, g) = grouped(&refs);
        let d = downsample_groups(&m, &g, 3, 1);
        assert_eq!(d.len(), 5);
        assert!(d.ids().contains(&"k8".to_string()) && d.ids().contains(&"k9".to_string()));
    }

    #[test]
    fn ratio_on_separated_and_shuffled_clusters() {
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for i in 0..50 {
            let jitter = (i as f64 * 0.618).fract() * 0.1;
            pts.push(vec![jitter, 0.0]);
            labels.push("near");
            pts.push(vec![100.0 + jitter, 0.0]);
            labels.push("far");
        }
        let r = inter_intra_ratio(&pts, &labels, Metric::Euclidean, 1_000_000, 0).unwrap();
        assert!(r.ratio > 100.0);

        let halves: Vec<&str> = (0..pts.len()).map(|i| if i % 4 < 2 { "p" } else { "q" }).collect();
        let r = inter_intra_ratio(&pts, &halves, Metric::Euclidean, 1_000_000, 0).unwrap();
        assert!((r.ratio - 1.0).abs() < 0.05, "{}", r.ratio);
        let sampled = inter_intra_ratio(&pts, &halves, Metric::Euclidean, 500, 3).unwrap();
        assert_eq!((sampled.n_inter, sampled.n_intra), (500, 500));
        assert!((sampled.ratio - 1.0).abs() < 0.2);
    }

    #[test]
    fn ratio_errors() {
        let pts = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            inter_intra_ratio(&pts, &["a", "b"], Metric::Euclidean, 10, 0),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            inter_intra_ratio(&pts, &["a", "a"], Metric::Euclidean, 10, 0),
            Err(Error::InvalidArgument(_))
        ));
    }
}
