//! Poisson counting noise on simulated rates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::CliError;

/// Counts for each normalized rate, with mean `rate · peak_rate · integration_time`.
/// The same seed always gives the same counts.
pub fn poisson_counts(rates: &[f64], integration_time: f64, peak_rate: f64, seed: u64) -> Result<Vec<u64>, CliError> {
    if !(integration_time > 0.0 && peak_rate >= 0.0) {
        return Err(CliError::Config(
            "`noise`: integration_time must be positive and peak_rate non-negative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rates
        .iter()
        .map(|&rate| {
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(CliError::Config(format!("`noise`: rate {rate} cannot be counted")));
            }
            let mean = rate * peak_rate * integration_time;
            if mean == 0.0 {
                return Ok(0);
            }
            let dist = Poisson::new(mean).map_err(|e| CliError::Config(format!("`noise`: {e}")))?;
            Ok(dist.sample(&mut rng) as u64)
        })
        .collect()
}
