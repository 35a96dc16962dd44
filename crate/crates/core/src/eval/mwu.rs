//! Two-sided Mann-Whitney U test with midranks for ties.
//!
//! Small samples get an exact p-value from the permutation distribution of
//! the rank sum under the observed tie pattern, computed by dynamic
//! programming over doubled midranks (which are always integers). Larger
//! samples use the normal approximation with tie and continuity correction.

use serde::Serialize;

use super::EvalError;

/// Exact p-values are used when the smaller sample has at most this many
/// observations.
pub const EXACT_MAX_N: usize = 8;
/// ...and the pooled sample is at most this large.
pub const EXACT_MAX_TOTAL: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MannWhitney {
    /// `min(U_a, U_b)`.
    pub u: f64,
    /// Pairs `(x in a, y in b)` with `x > y`, ties counting one half.
    pub u_a: f64,
    pub p_value: f64,
    pub method: PValueMethod,
    pub n_a: usize,
    pub n_b: usize,
}

/// Doubled midranks of the pooled sample, in input order (a then b).
fn doubled_ranks(a: &[f64], b: &[f64]) -> (Vec<u64>, u64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; pooled.len()];
    let mut tie_term = 0u64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && pooled[order[j]] == pooled[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j share the midrank (i+1+j)/2
        for &k in &order[i..j] {
            ranks[k] = (i + 1 + j) as u64;
        }
        let t = (j - i) as u64;
        tie_term += t * t * t - t;
        i = j;
    }
    (ranks, tie_term)
}

/// Two-sided exact p for the rank sum of `n_small` items drawn from `ranks`.
fn exact_p(ranks: &[u64], n_small: usize, observed: u64) -> f64 {
    let n = ranks.len() as u64;
    let max_sum: usize = {
        let mut r = ranks.to_vec();
        r.sort_unstable_by(|x, y| y.cmp(x));
        r.iter().take(n_small).sum::<u64>() as usize
    };
    // ways[k][s]: subsets of size k with doubled rank sum s
    let mut ways = vec![vec![0u128; max_sum + 1]; n_small + 1];
    ways[0][0] = 1;
    for &r in ranks {
        let r = r as usize;
        for k in (1..=n_small).rev() {
            let (lo, hi) = ways.split_at_mut(k);
            let (prev, cur) = (&lo[k - 1], &mut hi[0]);
            for s in (r..=max_sum).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let expected = n_small as u64 * (n + 1);
    let d_obs = observed.abs_diff(expected);
    let mut extreme = 0u128;
    let mut total = 0u128;
    for (s, &w) in ways[n_small].iter().enumerate() {
        total += w;
        if (s as u64).abs_diff(expected) >= d_obs {
            extreme += w;
        }
    }
    (extreme as f64 / total as f64).min(1.0)
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, EvalError> {
    if a.is_empty() {
        return Err(EvalError::EmptySample("a"));
    }
    if b.is_empty() {
        return Err(EvalError::EmptySample("b"));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let (n_a, n_b) = (a.len(), b.len());
    let (ranks, tie_term) = doubled_ranks(a, b);
    let r2_a: u64 = ranks[..n_a].iter().sum();
    let u2_a = r2_a - (n_a * (n_a + 1)) as u64;
    let u_a = u2_a as f64 / 2.0;
    let u_b = (n_a * n_b) as f64 - u_a;
    let u = u_a.min(u_b);
    let n = n_a + n_b;

    let (p_value, method) = if n_a.min(n_b) <= EXACT_MAX_N && n <= EXACT_MAX_TOTAL {
        let p = if n_a <= n_b {
            exact_p(&ranks, n_a, r2_a)
        } else {
            exact_p(&ranks, n_b, ranks[n_a..].iter().sum())
        };
        (p, PValueMethod::Exact)
    } else {
        let nn = n as f64;
        let mu = (n_a * n_b) as f64 / 2.0;
        let var = (n_a * n_b) as f64 / 12.0 * ((nn + 1.0) - tie_term as f64 / (nn * (nn - 1.0)));
        let p = if var <= 0.0 {
            1.0
        } else {
            let z = ((u_a - mu).abs() - 0.5).max(0.0) / var.sqrt();
            libm::erfc(z / std::f64::consts::SQRT_2).min(1.0)
        };
        (p, PValueMethod::Normal)
    };
    Ok(MannWhitney { u, u_a, p_value, method, n_a, n_b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.u, 4.5);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.method, PValueMethod::Exact);
    }

    #[test]
    fn separated_samples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]).unwrap();
        assert_eq!((r.u, r.u_a), (0.0, 0.0));
        // two of the C(6,3)=20 splits are this extreme
        assert_eq!(r.p_value, 0.1);
        let m = mann_whitney_u(&[10.0, 11.0, 12.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((m.u, m.u_a, m.p_value), (0.0, 9.0, 0.1));
    }

    #[test]
    fn large_samples_use_normal() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| i as f64 + 100.0).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.method, PValueMethod::Normal);
        assert_eq!(r.u, 0.0);
        assert!(r.p_value < 1e-9);
        let s = mann_whitney_u(&b, &a).unwrap();
        assert_eq!((s.u, s.p_value), (r.u, r.p_value));
    }

    #[test]
    fn all_tied_large() {
        let r = mann_whitney_u(&[1.0; 20], &[1.0; 20]).unwrap();
        assert_eq!((r.u, r.p_value), (200.0, 1.0));
    }

    #[test]
    fn errors() {
        assert_eq!(mann_whitney_u(&[], &[1.0]).unwrap_err(), EvalError::EmptySample("a"));
        assert_eq!(mann_whitney_u(&[1.0], &[]).unwrap_err(), EvalError::EmptySample("b"));
        assert_eq!(mann_whitney_u(&[f64::NAN], &[1.0]).unwrap_err(), EvalError::NonFinite);
    }
}
