//! MMSE channel estimation under dedicated pilots and co-pilots.
//!
//! Pilots are not materialized. Each estimator draws the despread
//! observation directly: one unit-variance noise vector per user (dedicated)
//! or per group (co-pilot), added to the pilot-weighted channel(s).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::channel::{complex_gaussian, ChannelRealization};
use crate::config::GroupLayout;
use crate::error::{Error, Result};
use crate::rng::{domain, substream};

/// Estimate variance γ = τpβ²/(1 + τpβ) with a dedicated pilot.
pub fn gamma_dp(tau_p: usize, p_ul: f64, beta: f64) -> f64 {
    let snr = tau_p as f64 * p_ul * beta;
    snr * beta / (1.0 + snr)
}

/// Per-user estimate variances γ^cp for one group sharing a pilot.
pub fn gamma_cp_users(tau_p: usize, p_ul: &[f64], betas: &[f64]) -> Vec<f64> {
    let tau = tau_p as f64;
    let load = group_load(tau_p, p_ul, betas);
    p_ul.iter()
        .zip(betas)
        .map(|(&p, &b)| tau * p * b * b / (1.0 + load))
        .collect()
}

/// Variance of the composite group estimate, γ_j = S²/(1 + S).
pub fn gamma_cp_group(tau_p: usize, p_ul: &[f64], betas: &[f64]) -> f64 {
    let load = group_load(tau_p, p_ul, betas);
    load * load / (1.0 + load)
}

/// S_j = τ Σ_m p_jm β_jm.
pub fn group_load(tau_p: usize, p_ul: &[f64], betas: &[f64]) -> f64 {
    tau_p as f64 * p_ul.iter().zip(betas).map(|(p, b)| p * b).sum::<f64>()
}

/// Closed-form γ^dp for every user.
pub fn gammas_dp(tau_p: usize, ul_powers: &[f64], betas: &[f64]) -> Vec<f64> {
    ul_powers
        .iter()
        .zip(betas)
        .map(|(&p, &b)| gamma_dp(tau_p, p, b))
        .collect()
}

/// Closed-form γ^cp for every user, flat in group order.
pub fn gammas_cp(layout: &GroupLayout, tau_p: usize, ul_powers: &[f64], betas: &[f64]) -> Vec<f64> {
    layout
        .groups()
        .flat_map(|(_, r)| gamma_cp_users(tau_p, &ul_powers[r.clone()], &betas[r]))
        .collect()
}

#[derive(Debug, Clone)]
pub struct DpEstimate {
    /// Ĝ_dp, column ν per user.
    pub g_hat: DMatrix<Complex64>,
    pub gamma: Vec<f64>,
    pub tau_p: usize,
    pub layout: GroupLayout,
}

impl DpEstimate {
    pub fn n_antennas(&self) -> usize {
        self.g_hat.nrows()
    }
}

#[derive(Debug, Clone)]
pub struct CpEstimate {
    /// Per-user estimates ĝ^cp_jk, column ν per user.
    pub g_hat_user: DMatrix<Complex64>,
    pub gamma_user: Vec<f64>,
    /// Ĝ_cp, one composite estimate ĝ_j per group.
    pub g_hat_group: DMatrix<Complex64>,
    pub gamma_group: Vec<f64>,
    /// S_j per group.
    pub load: Vec<f64>,
    pub tau_p: usize,
    pub layout: GroupLayout,
}

impl CpEstimate {
    pub fn n_antennas(&self) -> usize {
        self.g_hat_group.nrows()
    }

    /// Coefficient c with ĝ^cp_jk = c ĝ_j, i.e. √(τp_jk) β_jk / S_j.
    pub fn collinearity_factor(&self, user: usize, ul_powers: &[f64], betas: &[f64]) -> f64 {
        let group = self.layout.group_of(user);
        let load = self.load[group];
        if load == 0.0 {
            return 0.0;
        }
        (self.tau_p as f64 * ul_powers[user]).sqrt() * betas[user] / load
    }
}

/// Either pilot strategy's estimate.
#[derive(Debug, Clone)]
pub enum Estimate {
    Dedicated(DpEstimate),
    CoPilot(CpEstimate),
}

impl Estimate {
    /// Per-user estimates ĝ_ν for either strategy.
    pub fn user_estimates(&self) -> &DMatrix<Complex64> {
        match self {
            Estimate::Dedicated(e) => &e.g_hat,
            Estimate::CoPilot(e) => &e.g_hat_user,
        }
    }

    pub fn user_gammas(&self) -> &[f64] {
        match self {
            Estimate::Dedicated(e) => &e.gamma,
            Estimate::CoPilot(e) => &e.gamma_user,
        }
    }
}

fn check_powers(realization: &ChannelRealization, ul_powers: &[f64]) -> Result<()> {
    let k = realization.profile.total_users();
    if ul_powers.len() != k {
        return Err(Error::LengthMismatch {
            what: "uplink pilot powers",
            expected: k,
            got: ul_powers.len(),
        });
    }
    if ul_powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidConfig(
            "uplink pilot powers must be finite and nonnegative".into(),
        ));
    }
    Ok(())
}

pub fn estimate_dp(
    realization: &ChannelRealization,
    ul_powers: &[f64],
    tau_p: usize,
    seed: u64,
) -> Result<DpEstimate> {
    let mut rng = substream(seed, &[domain::DP_NOISE]);
    estimate_dp_with(realization, ul_powers, tau_p, &mut rng)
}

pub fn estimate_dp_with<R: Rng + ?Sized>(
    realization: &ChannelRealization,
    ul_powers: &[f64],
    tau_p: usize,
    rng: &mut R,
) -> Result<DpEstimate> {
    check_powers(realization, ul_powers)?;
    let profile = &realization.profile;
    let k_tot = profile.total_users();
    if tau_p < k_tot {
        return Err(Error::PilotTooShort {
            tau_p,
            required: k_tot,
        });
    }
    let n = realization.n_antennas();
    let tau = tau_p as f64;
    let mut g_hat = DMatrix::zeros(n, k_tot);
    let mut gamma = Vec::with_capacity(k_tot);
    for (col, (&p, &beta)) in ul_powers.iter().zip(&profile.betas).enumerate() {
        let amp = (tau * p).sqrt();
        let scale = amp * beta / (1.0 + tau * p * beta);
        for row in 0..n {
            let noise = complex_gaussian(rng, 1.0);
            g_hat[(row, col)] = (realization.channels[(row, col)] * amp + noise) * scale;
        }
        gamma.push(gamma_dp(tau_p, p, beta));
    }
    Ok(DpEstimate {
        g_hat,
        gamma,
        tau_p,
        layout: profile.layout(),
    })
}

pub fn estimate_cp(
    realization: &ChannelRealization,
    ul_powers: &[f64],
    tau_p: usize,
    seed: u64,
) -> Result<CpEstimate> {
    let mut rng = substream(seed, &[domain::CP_NOISE]);
    estimate_cp_with(realization, ul_powers, tau_p, &mut rng)
}

pub fn estimate_cp_with<R: Rng + ?Sized>(
    realization: &ChannelRealization,
    ul_powers: &[f64],
    tau_p: usize,
    rng: &mut R,
) -> Result<CpEstimate> {
    check_powers(realization, ul_powers)?;
    let profile = &realization.profile;
    let layout = profile.layout();
    let g = layout.n_groups();
    if tau_p < g {
        return Err(Error::PilotTooShort { tau_p, required: g });
    }
    let n = realization.n_antennas();
    let tau = tau_p as f64;
    let betas = &profile.betas;
    let mut g_hat_user = DMatrix::zeros(n, layout.total_users());
    let mut g_hat_group = DMatrix::zeros(n, g);
    let mut gamma_user = Vec::with_capacity(layout.total_users());
    let mut gamma_group = Vec::with_capacity(g);
    let mut loads = Vec::with_capacity(g);

    for (j, range) in layout.groups() {
        // despread observation y_j = Σ_m √(τp_jm) g_jm + n
        let mut y = DVector::<Complex64>::zeros(n);
        for col in range.clone() {
            let amp = (tau * ul_powers[col]).sqrt();
            y += realization.channels.column(col) * Complex64::from(amp);
        }
        for row in 0..n {
            y[row] += complex_gaussian(rng, 1.0);
        }
        let load = group_load(tau_p, &ul_powers[range.clone()], &betas[range.clone()]);
        g_hat_group.set_column(j, &(&y * Complex64::from(load / (1.0 + load))));
        for col in range.clone() {
            let c = (tau * ul_powers[col]).sqrt() * betas[col] / (1.0 + load);
            g_hat_user.set_column(col, &(&y * Complex64::from(c)));
        }
        gamma_user.extend(gamma_cp_users(
            tau_p,
            &ul_powers[range.clone()],
            &betas[range.clone()],
        ));
        gamma_group.push(load * load / (1.0 + load));
        loads.push(load);
    }
    Ok(CpEstimate {
        g_hat_user,
        gamma_user,
        g_hat_group,
        gamma_group,
        load: loads,
        tau_p,
        layout,
    })
}
