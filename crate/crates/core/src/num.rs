use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};

/// Floating point scalar used by the scoring and metric math: f32 or f64.
pub trait Scalar: Float + FromPrimitive + Debug + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `ln Σ exp(x_i)`, stable for large magnitudes. Returns `-inf` for an empty slice.
pub fn log_sum_exp<S: Scalar>(xs: &[S]) -> S {
    let max = xs.iter().copied().fold(S::neg_infinity(), S::max);
    if max == S::neg_infinity() {
        return max;
    }
    let sum = xs.iter().fold(S::zero(), |acc, &x| acc + (x - max).exp());
    max + sum.ln()
}

/// Softmax over the entries whose mask is `true`; masked-out entries get exactly zero.
///
/// Returns `None` when no entry is selected.
pub fn masked_softmax<S: Scalar>(logits: &[S], mask: &[bool]) -> Option<Vec<S>> {
    debug_assert_eq!(logits.len(), mask.len());
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&l, _)| l)
        .fold(None, |acc: Option<S>, l| Some(acc.map_or(l, |a| a.max(l))))?;
    let exps: Vec<S> = logits
        .iter()
        .zip(mask)
        .map(|(&l, &m)| if m { (l - max).exp() } else { S::zero() })
        .collect();
    let total = exps.iter().fold(S::zero(), |a, &b| a + b);
    Some(exps.into_iter().map(|e| e / total).collect())
}

/// Kahan-free plain sum; kept as a helper so callers stay generic.
pub fn sum<S: Scalar>(xs: &[S]) -> S {
    xs.iter().fold(S::zero(), |a, &b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_matches_direct() {
        let xs = [0.1f64, -2.0, 3.5];
        let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-12);
        assert_eq!(log_sum_exp::<f64>(&[]), f64::NEG_INFINITY);
        let big = [1000.0f32, 1000.0];
        assert!((log_sum_exp(&big) - (1000.0 + 2f32.ln())).abs() < 1e-3);
    }

    #[test]
    fn masked_softmax_zeroes_masked() {
        let p = masked_softmax(&[1.0f64, 50.0, 1.0], &[true, false, true]).unwrap();
        assert_eq!(p, vec![0.5, 0.0, 0.5]);
        assert!(masked_softmax(&[1.0f64], &[false]).is_none());
    }
}
