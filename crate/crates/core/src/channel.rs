//! User geometry, large-scale fading and i.i.d. Rayleigh channel draws.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{GroupLayout, SystemConfig};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, domain, substream};

/// Per-user large-scale fading, flat in group order.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingProfile {
    pub group_sizes: Vec<usize>,
    /// Distances in meters; absent when the profile was built from gains.
    pub distances_m: Option<Vec<f64>>,
    pub betas: Vec<f64>,
}

impl FadingProfile {
    pub fn from_betas(group_sizes: Vec<usize>, betas: Vec<f64>) -> Result<Self> {
        let layout = GroupLayout::new(&group_sizes);
        if betas.len() != layout.total_users() {
            return Err(Error::LengthMismatch {
                what: "large-scale gains",
                expected: layout.total_users(),
                got: betas.len(),
            });
        }
        if betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::InvalidConfig(
                "large-scale gains must be finite and nonnegative".into(),
            ));
        }
        Ok(FadingProfile {
            group_sizes,
            distances_m: None,
            betas,
        })
    }

    pub fn layout(&self) -> GroupLayout {
        GroupLayout::new(&self.group_sizes)
    }

    pub fn total_users(&self) -> usize {
        self.betas.len()
    }

    pub fn n_groups(&self) -> usize {
        self.group_sizes.len()
    }
}

/// Drops users uniformly over the annulus between the exclusion and cell
/// radii and applies the path-loss law.
pub fn drop_users(config: &SystemConfig, seed: u64) -> FadingProfile {
    let mut rng = substream(seed, &[domain::DROP]);
    let r_in2 = config.exclusion_radius_m.powi(2);
    let r_out2 = config.cell_radius_m.powi(2);
    let distances: Vec<f64> = (0..config.total_users())
        .map(|_| {
            let u: f64 = rng.random();
            (r_in2 + u * (r_out2 - r_in2)).sqrt()
        })
        .collect();
    let betas = distances.iter().map(|&x| config.pathloss(x)).collect();
    FadingProfile {
        group_sizes: config.group_sizes.clone(),
        distances_m: Some(distances),
        betas,
    }
}

/// Drop `index` of the ensemble rooted at `seed`. Sweeps and the omnicast
/// baseline share these drops.
pub fn ensemble_drop(config: &SystemConfig, seed: u64, index: usize) -> FadingProfile {
    drop_users(config, derive_seed(seed, &[domain::SWEEP_DROP, index as u64]))
}

/// One small-scale realization: column ν holds g_ν ~ CN(0, β_ν I_N).
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub channels: DMatrix<Complex64>,
    pub profile: FadingProfile,
}

impl ChannelRealization {
    pub fn n_antennas(&self) -> usize {
        self.channels.nrows()
    }
}

/// Draws a CN(0, var) sample as two real Gaussians of variance var/2.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub fn draw_channels(profile: &FadingProfile, n_antennas: usize, seed: u64) -> ChannelRealization {
    let mut rng = substream(seed, &[domain::CHANNEL]);
    draw_channels_with(profile, n_antennas, &mut rng)
}

pub fn draw_channels_with<R: Rng + ?Sized>(
    profile: &FadingProfile,
    n_antennas: usize,
    rng: &mut R,
) -> ChannelRealization {
    let k = profile.total_users();
    let mut channels = DMatrix::zeros(n_antennas, k);
    for (col, &beta) in profile.betas.iter().enumerate() {
        for row in 0..n_antennas {
            channels[(row, col)] = complex_gaussian(rng, beta);
        }
    }
    ChannelRealization {
        channels,
        profile: profile.clone(),
    }
}
