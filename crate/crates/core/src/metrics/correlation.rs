use std::cmp::Ordering;

use super::MetricsError;
use crate::num::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlations<S> {
    pub pearson_r: S,
    pub spearman_rho: S,
    pub kendall_tau: S,
}

fn check_lengths<S>(a: &[S], b: &[S]) -> Result<(), MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 3 {
        return Err(MetricsError::TooFewPoints(a.len()));
    }
    Ok(())
}

fn mean<S: Scalar>(xs: &[S]) -> S {
    xs.iter().fold(S::zero(), |acc, &x| acc + x) / S::lit(xs.len() as f64)
}

pub fn pearson<S: Scalar>(a: &[S], b: &[S]) -> Result<S, MetricsError> {
    check_lengths(a, b)?;
    let (ma, mb) = (mean(a), mean(b));
    let mut cov = S::zero();
    let mut va = S::zero();
    let mut vb = S::zero();
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        cov = cov + dx * dy;
        va = va + dx * dx;
        vb = vb + dy * dy;
    }
    if va == S::zero() || vb == S::zero() {
        return Err(MetricsError::Undefined("pearson_r"));
    }
    Ok((cov / (va * vb).sqrt()).max(-S::one()).min(S::one()))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks<S: Scalar>(xs: &[S]) -> Vec<S> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![S::zero(); xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        let rank = S::lit((start + end + 1) as f64 / 2.0);
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn spearman<S: Scalar>(a: &[S], b: &[S]) -> Result<S, MetricsError> {
    check_lengths(a, b)?;
    pearson(&average_ranks(a), &average_ranks(b)).map_err(|_| MetricsError::Undefined("spearman_rho"))
}

/// Kendall's tau-b, adjusting for ties in either input.
pub fn kendall_tau_b<S: Scalar>(a: &[S], b: &[S]) -> Result<S, MetricsError> {
    check_lengths(a, b)?;
    let n = a.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_a, mut ties_b) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let da = a[i].partial_cmp(&a[j]).unwrap_or(Ordering::Equal);
            let db = b[i].partial_cmp(&b[j]).unwrap_or(Ordering::Equal);
            match (da, db) {
                (Ordering::Equal, Ordering::Equal) => {
                    ties_a += 1;
                    ties_b += 1;
                }
                (Ordering::Equal, _) => ties_a += 1,
                (_, Ordering::Equal) => ties_b += 1,
                (x, y) if x == y => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as i64;
    let denom_a = pairs - ties_a;
    let denom_b = pairs - ties_b;
    if denom_a == 0 || denom_b == 0 {
        return Err(MetricsError::Undefined("kendall_tau"));
    }
    let tau = S::lit((concordant - discordant) as f64) / (S::lit(denom_a as f64) * S::lit(denom_b as f64)).sqrt();
    Ok(tau)
}

pub fn correlations<S: Scalar>(a: &[S], b: &[S]) -> Result<Correlations<S>, MetricsError> {
    Ok(Correlations {
        pearson_r: pearson(a, b)?,
        spearman_rho: spearman(a, b)?,
        kendall_tau: kendall_tau_b(a, b)?,
    })
}
