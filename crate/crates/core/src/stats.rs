//! Rate estimates and chi-square tests.

use std::collections::{BTreeMap, BTreeSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub successes: u64,
    pub trials: u64,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

impl RateEstimate {
    /// Wilson score interval at 95%.
    pub fn wilson(successes: u64, trials: u64) -> Self {
        assert!(trials > 0 && successes <= trials, "need 0 <= successes <= trials, trials > 0");
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            successes,
            trials,
            point: p,
            lower: (centre - half).max(0.0).min(p),
            upper: (centre + half).min(1.0).max(p),
        }
    }

    pub fn from_outcomes<I: IntoIterator<Item = bool>>(outcomes: I) -> Self {
        let (mut s, mut n) = (0, 0);
        for o in outcomes {
            s += o as u64;
            n += 1;
        }
        Self::wilson(s, n)
    }
}

/// `p + 3·sqrt(p(1-p)/n)`: the three-sigma binomial tolerance above `p`.
pub fn three_sigma_above(p: f64, n: u64) -> f64 {
    p + 3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

pub fn three_sigma_below(p: f64, n: u64) -> f64 {
    p - 3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

impl ChiSquareResult {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

fn p_value(statistic: f64, dof: u64) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).expect("positive dof").sf(statistic)
}

/// Goodness of fit of `counts` against the uniform distribution.
pub fn chi_square_uniform(counts: &[u64]) -> ChiSquareResult {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let statistic = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dof = counts.len().saturating_sub(1) as u64;
    ChiSquareResult { statistic, dof, p_value: p_value(statistic, dof) }
}

/// Two-sample homogeneity test over categorical outcomes. Categories whose
/// pooled count is below 10 are merged into one bin so that expected cell
/// counts stay usable.
pub fn chi_square_homogeneity<K: Ord + Clone + Hash>(a: &[K], b: &[K]) -> ChiSquareResult {
    let mut ca: BTreeMap<K, u64> = BTreeMap::new();
    let mut cb: BTreeMap<K, u64> = BTreeMap::new();
    for k in a {
        *ca.entry(k.clone()).or_default() += 1;
    }
    for k in b {
        *cb.entry(k.clone()).or_default() += 1;
    }
    let keys: BTreeSet<K> = ca.keys().chain(cb.keys()).cloned().collect();
    let mut bins: Vec<(u64, u64)> = Vec::new();
    let mut rare = (0u64, 0u64);
    for k in keys {
        let (x, y) = (ca.get(&k).copied().unwrap_or(0), cb.get(&k).copied().unwrap_or(0));
        if x + y < 10 {
            rare.0 += x;
            rare.1 += y;
        } else {
            bins.push((x, y));
        }
    }
    if rare.0 + rare.1 > 0 {
        bins.push(rare);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let mut statistic = 0.0;
    for &(x, y) in &bins {
        let tot = (x + y) as f64;
        for (obs, side) in [(x as f64, na), (y as f64, nb)] {
            let e = tot * side / n;
            if e > 0.0 {
                statistic += (obs - e).powi(2) / e;
            }
        }
    }
    let dof = bins.len().saturating_sub(1) as u64;
    ChiSquareResult { statistic, dof, p_value: p_value(statistic, dof) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_zero_of_hundred() {
        let r = RateEstimate::wilson(0, 100);
        assert_eq!(r.point, 0.0);
        assert_eq!(r.lower, 0.0);
        // closed form for zero successes: z^2 / (n + z^2)
        let oracle = Z95 * Z95 / (100.0 + Z95 * Z95);
        assert!((r.upper - oracle).abs() < 1e-12);
        assert!((r.upper - 0.037).abs() < 1e-3);
    }

    #[test]
    fn wilson_contains_point_and_stays_in_unit_interval() {
        for n in [1u64, 2, 10, 1000] {
            for s in 0..=n {
                let r = RateEstimate::wilson(s, n);
                assert!(0.0 <= r.lower && r.lower <= r.point && r.point <= r.upper && r.upper <= 1.0);
            }
        }
        let all = RateEstimate::wilson(200, 200);
        assert_eq!(all.point, 1.0);
        assert_eq!(all.upper, 1.0);
    }

    #[test]
    fn fair_coin_interval_contains_half() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let r = RateEstimate::from_outcomes((0..1000).map(|_| rng.gen::<bool>()));
        assert!(r.lower < 0.5 && 0.5 < r.upper);
    }

    #[test]
    fn chi_square_behaviour() {
        assert!(chi_square_uniform(&[100, 100, 100, 100]).p_value > 0.99);
        assert!(chi_square_uniform(&[400, 0, 0, 0]).p_value < 1e-6);
        let a: Vec<u8> = (0..1000).map(|i| (i % 4) as u8).collect();
        let same = chi_square_homogeneity(&a, &a);
        assert_eq!(same.statistic, 0.0);
        assert!(same.passes(0.01));
        let b: Vec<u8> = (0..1000).map(|i| if i % 2 == 0 { 0 } else { (i % 4) as u8 }).collect();
        assert!(!chi_square_homogeneity(&a, &b).passes(0.01));
    }
}
