use rand::Rng;

use crate::error::{Error, Result};

/// Discrete power law `P(x) ∝ x^exponent` on `xmin..=xmax`, sampled by
/// inverse CDF over a precomputed cumulative table.
#[derive(Debug, Clone)]
pub struct DiscretePowerLaw {
    exponent: f64,
    xmin: u64,
    cdf: Vec<f64>,
}

/// Largest support accepted by [`DiscretePowerLaw::new`].
pub const MAX_SUPPORT: u64 = 10_000_000;

impl DiscretePowerLaw {
    pub fn new(exponent: f64, xmin: u64, xmax: u64) -> Result<Self> {
        if !(exponent < -1.0) || !exponent.is_finite() {
            return Err(Error::InvalidArgument(format!("power-law exponent must be below -1, got {exponent}")));
        }
        if xmin == 0 || xmax < xmin {
            return Err(Error::InvalidArgument(format!("invalid support {xmin}..={xmax}")));
        }
        if xmax - xmin >= MAX_SUPPORT {
            return Err(Error::InvalidArgument(format!("support wider than {MAX_SUPPORT}")));
        }
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (xmin..=xmax)
            .map(|x| {
                acc += (x as f64).powf(exponent);
                acc
            })
            .collect();
        cdf.iter_mut().for_each(|c| *c /= acc);
        Ok(DiscretePowerLaw { exponent, xmin, cdf })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn xmin(&self) -> u64 {
        self.xmin
    }

    pub fn xmax(&self) -> u64 {
        self.xmin + self.cdf.len() as u64 - 1
    }

    /// Probability of exactly `x`.
    pub fn pmf(&self, x: u64) -> f64 {
        if x < self.xmin || x > self.xmax() {
            return 0.0;
        }
        let i = (x - self.xmin) as usize;
        self.cdf[i] - if i == 0 { 0.0 } else { self.cdf[i - 1] }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|c| *c <= u).min(self.cdf.len() - 1);
        self.xmin + i as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pmf_sums_to_one_and_decays() {
        let d = DiscretePowerLaw::new(-2.0, 1, 1000).unwrap();
        let total: f64 = (1..=1000).map(|x| d.pmf(x)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((d.pmf(1) / d.pmf(2) - 4.0).abs() < 1e-9);
        assert_eq!(d.pmf(0), 0.0);
        assert_eq!(d.pmf(1001), 0.0);
    }

    #[test]
    fn empirical_frequencies_match_pmf() {
        let d = DiscretePowerLaw::new(-1.5, 1, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 200_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let x = d.sample(&mut rng);
            assert!((1..=100).contains(&x));
            if x <= 3 {
                counts[x as usize] += 1;
            }
        }
        for x in 1..=3u64 {
            let p = d.pmf(x);
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((counts[x as usize] as f64 / n as f64 - p).abs() < 5.0 * se);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DiscretePowerLaw::new(-1.0, 1, 10).is_err());
        assert!(DiscretePowerLaw::new(-2.0, 0, 10).is_err());
        assert!(DiscretePowerLaw::new(-2.0, 5, 4).is_err());
        assert!(DiscretePowerLaw::new(f64::NAN, 1, 4).is_err());
    }
}
