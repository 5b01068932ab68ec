use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Rows sorted by `(t_s, id)`; the first `⌊frac·n⌋` train, the rest test.
pub fn temporal_split<T, K>(rows: Vec<T>, frac: f64, key: K) -> (Vec<T>, Vec<T>)
where
    K: Fn(&T) -> (i64, &str),
{
    let mut rows = rows;
    rows.sort_by(|a, b| key(a).cmp(&key(b)));
    let cut = ((rows.len() as f64) * frac).floor() as usize;
    let test = rows.split_off(cut.min(rows.len()));
    (rows, test)
}

/// Appends uniformly drawn copies of minority-class rows until both classes
/// have the same count. Existing rows keep their order.
pub fn random_oversample<T: Clone, F>(rows: Vec<T>, label: F, seed: u64) -> Result<Vec<T>>
where
    F: Fn(&T) -> bool,
{
    let pos: Vec<usize> = (0..rows.len()).filter(|&i| label(&rows[i])).collect();
    let n_neg = rows.len() - pos.len();
    if pos.is_empty() || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let minority: Vec<usize> =
        if pos.len() < n_neg { pos.clone() } else { (0..rows.len()).filter(|&i| !label(&rows[i])).collect() };
    let missing = pos.len().abs_diff(n_neg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = rows;
    out.reserve(missing);
    for _ in 0..missing {
        let i = minority[rng.random_range(0..minority.len())];
        out.push(out[i].clone());
    }
    Ok(out)
}

/// Depth-1 tree: `polarity` if `x[feature] > threshold`, else `−polarity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: f64,
}

impl Stump {
    pub fn predict(&self, x: &[f64]) -> f64 {
        if x[self.feature] > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdaBoostOptions {
    pub n_estimators: usize,
    pub learning_rate: f64,
}

impl Default for AdaBoostOptions {
    fn default() -> Self {
        AdaBoostOptions { n_estimators: 100, learning_rate: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaBoost {
    pub stumps: Vec<Stump>,
    pub alphas: Vec<f64>,
    /// Weighted training error of each accepted round.
    pub errors: Vec<f64>,
}

impl AdaBoost {
    /// `Σ α_t h_t(x)`; positive means the positive class.
    pub fn score(&self, x: &[f64]) -> f64 {
        self.stumps.iter().zip(&self.alphas).map(|(s, a)| a * s.predict(x)).sum()
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.score(x) > 0.0
    }
}

/// Lowest weighted-error stump over all features and all midpoints between
/// consecutive distinct values. Ties keep the earliest candidate.
fn best_stump(x: &[Vec<f64>], y: &[f64], w: &[f64], orders: &[Vec<usize>]) -> Option<(Stump, f64)> {
    let total_pos: f64 = y.iter().zip(w).filter(|(l, _)| **l > 0.0).map(|(_, w)| w).sum();
    let total: f64 = w.iter().sum();
    let mut best: Option<(Stump, f64)> = None;
    for (f, order) in orders.iter().enumerate() {
        // weight on the left (≤ threshold) side
        let (mut left_pos, mut left_neg) = (0.0, 0.0);
        for k in 0..order.len() - 1 {
            let i = order[k];
            if y[i] > 0.0 {
                left_pos += w[i];
            } else {
                left_neg += w[i];
            }
            let (v, next) = (x[i][f], x[order[k + 1]][f]);
            if v == next {
                continue;
            }
            let right_neg = total - total_pos - left_neg;
            // polarity +1 predicts positive on the right
            let err_plus = left_pos + right_neg;
            let err_minus = total - err_plus;
            let (err, polarity) = if err_plus <= err_minus { (err_plus, 1.0) } else { (err_minus, -1.0) };
            if best.as_ref().is_none_or(|b| err < b.1) {
                best = Some((Stump { feature: f, threshold: (v + next) / 2.0, polarity }, err));
            }
        }
    }
    best.map(|(s, e)| (s, e / total))
}

/// Discrete AdaBoost over decision stumps. Stops early when a round's
/// weighted error is 0 up to rounding (that stump is kept with weight `learning_rate`) or
/// reaches 0.5 (that stump is discarded).
pub fn adaboost_train(x: &[Vec<f64>], labels: &[bool], opts: AdaBoostOptions) -> Result<AdaBoost> {
    let n = x.len();
    if labels.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: labels.len() });
    }
    if n == 0 || labels.iter().all(|l| *l) || labels.iter().all(|l| !*l) {
        return Err(Error::SingleClass);
    }
    let p = x[0].len();
    let y: Vec<f64> = labels.iter().map(|l| if *l { 1.0 } else { -1.0 }).collect();
    let orders: Vec<Vec<usize>> = (0..p)
        .map(|f| {
            let mut o: Vec<usize> = (0..n).collect();
            o.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
            o
        })
        .collect();
    let mut w = vec![1.0 / n as f64; n];
    let mut model = AdaBoost { stumps: Vec::new(), alphas: Vec::new(), errors: Vec::new() };
    for _ in 0..opts.n_estimators {
        let Some((stump, err)) = best_stump(x, &y, &w, &orders) else { break };
        // running sums leave rounding residue on a perfect split
        if err <= 1e-12 {
            model.stumps.push(stump);
            model.alphas.push(opts.learning_rate);
            model.errors.push(0.0);
            break;
        }
        if err >= 0.5 {
            break;
        }
        let alpha = opts.learning_rate * 0.5 * ((1.0 - err) / err).ln();
        for i in 0..n {
            w[i] *= (-alpha * y[i] * stump.predict(&x[i])).exp();
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        model.stumps.push(stump);
        model.alphas.push(alpha);
        model.errors.push(err);
    }
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierReport {
    pub f1: f64,
    /// `None` when the test set holds a single class.
    pub auc: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

/// Area under the ROC curve as the Mann–Whitney rank statistic with
/// average ranks for ties.
pub fn auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let n_pos = labels.iter().filter(|l| **l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum_pos += order[i..=j].iter().filter(|&&k| labels[k]).count() as f64 * avg_rank;
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// F1 of the rule `score > 0` and AUC of the raw scores.
pub fn evaluate_scores(scores: &[f64], labels: &[bool]) -> ClassifierReport {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (s, l) in scores.iter().zip(labels) {
        match (*s > 0.0, *l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let denom = 2 * tp + fp + fn_;
    let f1 = if denom == 0 { 0.0 } else { 2.0 * tp as f64 / denom as f64 };
    ClassifierReport { f1, auc: auc(scores, labels), tp, fp, tn, fn_ }
}

pub fn evaluate(model: &AdaBoost, x: &[Vec<f64>], labels: &[bool]) -> ClassifierReport {
    let scores: Vec<f64> = x.iter().map(|r| model.score(r)).collect();
    evaluate_scores(&scores, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_temporal_and_stable() {
        let rows: Vec<(i64, String)> = (0..100).map(|i| ((i * 37 % 100) as i64, format!("n{i:03}"))).collect();
        let (train, test) = temporal_split(rows, 0.95, |r| (r.0, r.1.as_str()));
        assert_eq!((train.len(), test.len()), (95, 5));
        assert!(train.iter().map(|r| r.0).max() <= test.iter().map(|r| r.0).min());

        let same: Vec<(i64, String)> = ["c", "a", "b", "d"].iter().map(|s| (5, s.to_string())).collect();
        let (train, test) = temporal_split(same, 0.5, |r| (r.0, r.1.as_str()));
        assert_eq!(train.iter().map(|r| r.1.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(test[0].1, "c");
    }

    #[test]
    fn oversampling_balances_with_copies() {
        let rows: Vec<(usize, bool)> = (0..100).map(|i| (i, i < 10)).collect();
        let out = random_oversample(rows.clone(), |r| r.1, 4).unwrap();
        assert_eq!(out.iter().filter(|r| r.1).count(), 90);
        assert_eq!(out.iter().filter(|r| !r.1).count(), 90);
        assert_eq!(&out[..100], &rows[..]);
        assert!(out[100..].iter().all(|r| r.1 && r.0 < 10));

        let balanced: Vec<(usize, bool)> = (0..10).map(|i| (i, i % 2 == 0)).collect();
        assert_eq!(random_oversample(balanced.clone(), |r| r.1, 0).unwrap(), balanced);
        assert!(matches!(random_oversample(vec![(0, true)], |r| r.1, 0), Err(Error::SingleClass)));
    }

    #[test]
    fn separable_data_needs_one_stump() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![(i * 7 % 40) as f64 / 40.0]).collect();
        let y: Vec<bool> = x.iter().map(|r| r[0] > 0.3).collect();
        let m = adaboost_train(&x, &y, AdaBoostOptions::default()).unwrap();
        assert_eq!(m.stumps.len(), 1);
        let rep = evaluate(&m, &x, &y);
        assert_eq!((rep.f1, rep.auc), (1.0, Some(1.0)));
    }

    #[test]
    fn rounds_have_error_below_half() {
        let x: Vec<Vec<f64>> = (0..200).map(|i| vec![(i % 17) as f64 / 17.0, (i % 23) as f64 / 23.0]).collect();
        let y: Vec<bool> = (0..200).map(|i| (i % 17) + (i % 23) > 19 || i % 5 == 0).collect();
        let m = adaboost_train(&x, &y, AdaBoostOptions::default()).unwrap();
        assert!(!m.errors.is_empty());
        assert!(m.errors.iter().all(|e| *e < 0.5));
        let train = evaluate(&m, &x, &y);
        assert!(train.f1 > 0.5);
    }

    #[test]
    fn metric_conventions() {
        let labels = [true, false, true, false, false];
        let perfect = evaluate_scores(&[1.0, -1.0, 2.0, -3.0, -0.5], &labels);
        assert_eq!((perfect.f1, perfect.auc), (1.0, Some(1.0)));

        let pi = 2.0 / 5.0;
        let constant = evaluate_scores(&[1.0; 5], &labels);
        assert!((constant.f1 - 2.0 * pi / (1.0 + pi)).abs() < 1e-15);
        assert_eq!(constant.auc, Some(0.5));

        let s = [0.3, 0.1, 0.2, 0.4, 0.2];
        let a = auc(&s, &labels).unwrap();
        let rev: Vec<f64> = s.iter().map(|v| -v).collect();
        assert!((auc(&rev, &labels).unwrap() - (1.0 - a)).abs() < 1e-15);
        // brute force over pairs, ties count one half
        let mut wins = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                if labels[i] && !labels[j] {
                    wins += if s[i] > s[j] {
                        1.0
                    } else if s[i] == s[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        assert!((a - wins / 6.0).abs() < 1e-15);
        assert_eq!(auc(&[1.0, 2.0], &[true, true]), None);
    }
}
