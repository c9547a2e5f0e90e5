//! Numerical helpers: stable log-sum-exp, compensated sums, and blocked
//! jackknife error estimates for Monte Carlo time series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln Σ exp(x_i)`, shifting by the maximum. Empty input gives `-∞`.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let mut sum = NeumaierSum::default();
    for x in &xs {
        sum.add((x - max).exp());
    }
    max + sum.value().ln()
}

/// `ln F` with `F = ⟨e^{δX}⟩ / sqrt(⟨e^{2δX}⟩)` under the normalized weights
/// `exp(log_w)`, where `X` is `s` centred on its weighted mean.
///
/// This is the fidelity `Z(b + δ/2) / sqrt(Z(b) Z(b + δ))` for any family
/// `Z(b + x) ∝ Σ w e^{2xs}`. Carrying the moments as `⟨expm1(·)⟩` keeps
/// the relative precision of `ln F ~ δ²` instead of subtracting three
/// O(1) logarithms.
pub fn log_fidelity_centered(log_w: &[f64], s: &[f64], delta: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    let lz = log_sum_exp(log_w.iter().copied());
    let p: Vec<f64> = log_w.iter().map(|w| (w - lz).exp()).collect();
    let mut mu = NeumaierSum::default();
    for (pi, si) in p.iter().zip(s) {
        mu.add(pi * si);
    }
    let mu = mu.value();
    let mut a = NeumaierSum::default();
    let mut b = NeumaierSum::default();
    for (pi, si) in p.iter().zip(s) {
        let x = si - mu;
        a.add(pi * (delta * x).exp_m1());
        b.add(pi * (2.0 * delta * x).exp_m1());
    }
    (a.value().ln_1p() - 0.5 * b.value().ln_1p()).min(0.0)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    let mut s = NeumaierSum::default();
    for &x in xs {
        s.add(x);
    }
    s.value() / xs.len() as f64
}

/// Population variance (divides by n).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let mut s = NeumaierSum::default();
    for &x in xs {
        s.add((x - m) * (x - m));
    }
    s.value() / xs.len() as f64
}

/// A mean with its standard error and the number of blocks behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub blocks: usize,
}

impl ErrorEstimate {
    /// `|mean - reference|` measured in standard errors. A zero error with a
    /// non-zero deviation gives infinity.
    pub fn sigmas_from(&self, reference: f64) -> f64 {
        let dev = (self.mean - reference).abs();
        if dev == 0.0 {
            0.0
        } else {
            dev / self.std_err
        }
    }
}

/// Default number of jackknife blocks.
pub const DEFAULT_BLOCKS: usize = 32;

/// Per-block sums of several per-sample moments. Samples that do not fill
/// the last block are dropped so every block has the same length.
#[derive(Debug, Clone)]
pub struct BlockedMoments {
    sums: Vec<Vec<f64>>,
    block_len: usize,
}

impl BlockedMoments {
    /// `moments(i)` yields the moment vector of sample `i`.
    pub fn new<F>(n_samples: usize, n_blocks: usize, n_moments: usize, moments: F) -> Result<Self>
    where
        F: Fn(usize) -> Vec<f64>,
    {
        if n_blocks < 2 || n_samples < n_blocks {
            return Err(Error::InsufficientData {
                got: n_samples,
                need: n_blocks.max(2),
            });
        }
        let block_len = n_samples / n_blocks;
        let mut sums = Vec::with_capacity(n_blocks);
        for b in 0..n_blocks {
            let mut acc = vec![NeumaierSum::default(); n_moments];
            for i in b * block_len..(b + 1) * block_len {
                for (a, m) in acc.iter_mut().zip(moments(i)) {
                    a.add(m);
                }
            }
            sums.push(acc.iter().map(|a| a.value()).collect());
        }
        Ok(Self { sums, block_len })
    }

    pub fn blocks(&self) -> usize {
        self.sums.len()
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    fn averaged(&self, skip: Option<usize>) -> Vec<f64> {
        let k = self.sums[0].len();
        let mut acc = vec![NeumaierSum::default(); k];
        let mut count = 0usize;
        for (b, s) in self.sums.iter().enumerate() {
            if Some(b) == skip {
                continue;
            }
            count += self.block_len;
            for (a, v) in acc.iter_mut().zip(s) {
                a.add(*v);
            }
        }
        acc.iter().map(|a| a.value() / count as f64).collect()
    }

    /// Delete-one-block jackknife of an estimator built from the averaged
    /// moments. The reported mean is the full-sample estimate.
    pub fn jackknife<F: Fn(&[f64]) -> f64>(&self, f: F) -> ErrorEstimate {
        let full = f(&self.averaged(None));
        let nb = self.sums.len();
        let partial: Vec<f64> = (0..nb).map(|b| f(&self.averaged(Some(b)))).collect();
        let pm = mean(&partial);
        let var = partial.iter().map(|p| (p - pm) * (p - pm)).sum::<f64>() * (nb - 1) as f64 / nb as f64;
        ErrorEstimate {
            mean: full,
            std_err: var.sqrt(),
            blocks: nb,
        }
    }
}

/// Blocked standard error of the plain mean of `xs`.
pub fn blocked_mean(xs: &[f64], n_blocks: usize) -> Result<ErrorEstimate> {
    let bm = BlockedMoments::new(xs.len(), n_blocks, 1, |i| vec![xs[i]])?;
    Ok(bm.jackknife(|m| m[0]))
}

/// Integrated autocorrelation time with Sokal's automatic window (c = 6).
/// Uncorrelated data gives about 0.5.
pub fn integrated_autocorrelation_time(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return 0.5;
    }
    let m = mean(xs);
    let var = variance(xs);
    if var == 0.0 {
        return 0.5;
    }
    let mut tau = 0.5;
    let max_lag = n / 2;
    for t in 1..max_lag {
        let mut s = 0.0;
        for i in 0..n - t {
            s += (xs[i] - m) * (xs[i + t] - m);
        }
        let rho = s / ((n - t) as f64 * var);
        tau += rho;
        if (t as f64) >= 6.0 * tau {
            break;
        }
    }
    tau.max(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_sum_exp_is_stable() {
        let v = log_sum_exp([1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let v = log_sum_exp([-1000.0, -1000.0 + 3f64.ln()]);
        assert!((v - (-1000.0 + 4f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
    }

    #[test]
    fn centered_fidelity_matches_log_partition_form() {
        let log_w = [0.3, -1.2, 0.0, 2.5];
        let s = [1.0, -0.5, 0.25, 2.0];
        let lz = |x: f64| log_sum_exp(log_w.iter().zip(&s).map(|(w, si)| w + 2.0 * x * si));
        for delta in [0.5, 0.05, 1e-3] {
            let direct = lz(delta / 2.0) - 0.5 * lz(0.0) - 0.5 * lz(delta);
            let centred = log_fidelity_centered(&log_w, &s, delta);
            assert!((direct - centred).abs() < 1e-12 * delta.max(1e-3), "{direct} {centred}");
        }
        assert_eq!(log_fidelity_centered(&log_w, &s, 0.0), 0.0);
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let mut s = NeumaierSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn constant_series_has_zero_error() {
        let xs = vec![3.5; 640];
        let e = blocked_mean(&xs, 32).unwrap();
        assert_eq!(e.mean, 3.5);
        assert_eq!(e.std_err, 0.0);
    }

    #[test]
    fn iid_error_matches_naive_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..64_000).map(|_| rng.random::<f64>()).collect();
        let e = blocked_mean(&xs, 32).unwrap();
        let naive = (variance(&xs) / xs.len() as f64).sqrt();
        assert!((e.std_err / naive - 1.0).abs() < 0.5);
    }

    #[test]
    fn error_stable_under_block_doubling() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // AR(1) series with correlation time ≈ 10
        let mut x = 0.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = 0.9 * x + rng.random::<f64>() - 0.5;
                x
            })
            .collect();
        let a = blocked_mean(&xs, 64).unwrap().std_err;
        let b = blocked_mean(&xs, 32).unwrap().std_err;
        assert!(b / a < 2.0 && a / b < 2.0);
        let tau = integrated_autocorrelation_time(&xs);
        assert!(tau > 5.0 && tau < 15.0, "tau {tau}");
    }

    #[test]
    fn jackknife_of_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..32_000).map(|_| rng.random::<f64>()).collect();
        let bm = BlockedMoments::new(xs.len(), 32, 2, |i| vec![xs[i], xs[i] * xs[i]]).unwrap();
        let v = bm.jackknife(|m| m[1] - m[0] * m[0]);
        assert!(v.sigmas_from(1.0 / 12.0) < 4.0);
        assert!(BlockedMoments::new(10, 32, 1, |_| vec![0.0]).is_err());
    }
}
