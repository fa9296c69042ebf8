use super::{EditProposal, SamplerError, ScoreBundle};
use crate::config::SamplerConfig;
use crate::num::Scalar;

/// Metropolis-Hastings acceptance probability with the target raised to `1/temperature`:
///
/// `min{1, exp[(log_pi_new - log_pi_old) / T + log_g_reverse - log_g_forward]}`
pub fn acceptance_probability<S: Scalar>(
    log_pi_old: S,
    log_pi_new: S,
    log_g_forward: S,
    log_g_reverse: S,
    temperature: S,
) -> Result<S, SamplerError> {
    if temperature.is_nan() || temperature <= S::zero() || !temperature.is_finite() {
        return Err(SamplerError::BadTemperature);
    }
    for (name, v) in [
        ("log_pi_old", log_pi_old),
        ("log_pi_new", log_pi_new),
        ("log_g_forward", log_g_forward),
        ("log_g_reverse", log_g_reverse),
    ] {
        if !v.is_finite() {
            return Err(SamplerError::NonFinite(name));
        }
    }
    let exponent = (log_pi_new - log_pi_old) / temperature + log_g_reverse - log_g_forward;
    if exponent >= S::zero() {
        Ok(S::one())
    } else {
        Ok(exponent.exp())
    }
}

pub fn acceptance_rate(
    pi_old: &ScoreBundle<f64>,
    pi_new: &ScoreBundle<f64>,
    proposal: &EditProposal,
    temperature: f64,
) -> Result<f64, SamplerError> {
    acceptance_probability(
        pi_old.log_pi,
        pi_new.log_pi,
        proposal.log_g_forward,
        proposal.log_g_reverse,
        temperature,
    )
}

/// Step-wise geometric cooling: `base ^ floor(step / interval)`.
///
/// Uses `powf`: `powi` multiplies by repeated squaring and drifts by an ulp
/// from the correctly rounded power after a few intervals.
pub fn cooling<S: Scalar>(base: S, interval: usize, step: usize) -> S {
    let exponent = step / interval.max(1);
    base.powf(S::lit(exponent as f64))
}

pub fn temperature(config: &SamplerConfig, step: usize) -> f64 {
    cooling(config.temp_base, config.temp_interval, step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_scores_accept() {
        assert_eq!(acceptance_probability(-4.0f64, -4.0, 0.0, 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn halved_target() {
        let half = 0.5f64.ln();
        let a = acceptance_probability(0.0, half, 0.0, 0.0, 1.0).unwrap();
        assert!((a - 0.5).abs() < 1e-15);
        let a = acceptance_probability(0.0, half, 0.0, 0.0, 0.5).unwrap();
        assert!((a - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            acceptance_probability(0.0f64, 0.0, 0.0, 0.0, 0.0),
            Err(SamplerError::BadTemperature)
        ));
        assert!(matches!(
            acceptance_probability(0.0f64, f64::NAN, 0.0, 0.0, 1.0),
            Err(SamplerError::NonFinite("log_pi_new"))
        ));
        assert!(acceptance_probability(f64::NEG_INFINITY, 0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn schedule_points() {
        let c = SamplerConfig::default();
        assert_eq!(temperature(&c, 0), 1.0);
        assert_eq!(temperature(&c, 4), 1.0);
        assert!((temperature(&c, 12) - 0.9025).abs() < 1e-15);
        assert_eq!(cooling(0.95f32, 5, 12), 0.95f32 * 0.95);
    }

    #[test]
    fn colder_is_stricter() {
        let mut prev = 0.0;
        for t in [0.05f64, 0.1, 0.5, 1.0, 2.0] {
            let a = acceptance_probability(-1.0, -2.0, 0.0, 0.0, t).unwrap();
            assert!(a >= prev);
            prev = a;
        }
    }
}
