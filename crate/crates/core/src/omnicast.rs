//! Omnicast baseline: CSI-free isotropic broadcast, time-shared over the
//! groups.
//!
//! Per drop, user ν gets E[(1/G) log2(1 + P‖h_ν‖²) | β_ν] where
//! ‖h_ν‖² = β_ν X and X is a sum of N unit-mean exponentials. The minimum
//! over users of these conditional means is averaged over drops.

use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ensemble_drop, FadingProfile};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, domain, substream};

pub const DEFAULT_FADING_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmnicastResult {
    pub se: f64,
    pub n_drops: usize,
    pub n_fading_samples: usize,
    pub standard_error: f64,
}

/// Conditional mean SE of every user of one drop, and its standard error.
pub fn conditional_se(
    config: &SystemConfig,
    profile: &FadingProfile,
    n_fading_samples: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if n_fading_samples == 0 {
        return Err(Error::InvalidConfig("need at least one fading sample".into()));
    }
    let g = profile.n_groups() as f64;
    let p = config.dl_power_budget;
    let n = config.n_antennas;
    let ns = n_fading_samples as f64;
    Ok(profile
        .betas
        .iter()
        .enumerate()
        .map(|(user, &beta)| {
            let (mut sum, mut sq) = (0.0, 0.0);
            for s in 0..n_fading_samples {
                let mut rng = substream(seed, &[domain::OMNI_FADING, user as u64, s as u64]);
                let x: f64 = (0..n).map(|_| -> f64 { Exp1.sample(&mut rng) }).sum();
                let v = (1.0 + p * beta * x).log2() / g;
                sum += v;
                sq += v * v;
            }
            let mean = sum / ns;
            let se = if n_fading_samples > 1 {
                ((sq - ns * mean * mean).max(0.0) / (ns - 1.0) / ns).sqrt()
            } else {
                0.0
            };
            (mean, se)
        })
        .collect())
}

/// Minimum over users of the conditional mean SE, with that user's
/// standard error.
pub fn min_conditional_se(
    config: &SystemConfig,
    profile: &FadingProfile,
    n_fading_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let per_user = conditional_se(config, profile, n_fading_samples, seed)?;
    Ok(per_user
        .into_iter()
        .fold((f64::INFINITY, 0.0), |best, cur| if cur.0 < best.0 { cur } else { best }))
}

/// Omnicast SE averaged over `n_drops` ensemble drops.
///
/// The standard error is taken across drops; with a single drop it falls
/// back to the fading-sample error of the worst user.
pub fn omnicast_se(
    config: &SystemConfig,
    n_drops: usize,
    n_fading_samples: usize,
    seed: u64,
) -> Result<OmnicastResult> {
    config.validate()?;
    if n_drops == 0 {
        return Err(Error::InvalidConfig("need at least one drop".into()));
    }
    let per_drop: Vec<(f64, f64)> = (0..n_drops)
        .into_par_iter()
        .map(|d| {
            let profile = ensemble_drop(config, seed, d);
            let fading_seed = derive_seed(seed, &[domain::OMNI_FADING, d as u64]);
            min_conditional_se(config, &profile, n_fading_samples, fading_seed)
        })
        .collect::<Result<_>>()?;
    let nd = n_drops as f64;
    let se = per_drop.iter().map(|v| v.0).sum::<f64>() / nd;
    let standard_error = if n_drops > 1 {
        let var = per_drop.iter().map(|v| (v.0 - se).powi(2)).sum::<f64>() / (nd - 1.0);
        (var / nd).sqrt()
    } else {
        per_drop[0].1
    };
    Ok(OmnicastResult {
        se,
        n_drops,
        n_fading_samples,
        standard_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_power_gives_zero() {
        let mut cfg = SystemConfig::reference_cell(8, vec![2, 2], 1.0, 1.0);
        cfg.dl_power_budget = 0.0;
        let r = omnicast_se(&cfg, 3, 10, 1).unwrap();
        assert_eq!(r.se, 0.0);
    }

    #[test]
    fn rejects_empty_ensembles() {
        let cfg = SystemConfig::reference_cell(8, vec![2], 1.0, 1.0);
        assert!(omnicast_se(&cfg, 0, 10, 1).is_err());
        assert!(omnicast_se(&cfg, 1, 0, 1).is_err());
    }
}
