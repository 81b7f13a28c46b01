//! Closed-form effective SINRs and achievable spectral efficiencies.
//!
//! This path is purely analytic: it needs only β, γ and the power
//! allocation, never a channel draw.

use serde::{Deserialize, Serialize};

use crate::config::{SchemeId, SystemConfig};
use crate::error::{Error, Result};
use crate::power::{DlPowers, PilotGammas};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SePoint {
    pub scheme: SchemeId,
    pub tau_p: usize,
    pub per_user_sinr: Vec<f64>,
    pub per_user_se: Vec<f64>,
    pub prelog: f64,
}

impl SePoint {
    pub fn new(scheme: SchemeId, tau_p: usize, coherence: usize, per_user_sinr: Vec<f64>) -> Result<Self> {
        let prelog = prelog(tau_p, coherence)?;
        let per_user_se = per_user_sinr.iter().map(|s| prelog * (1.0 + s).log2()).collect();
        Ok(SePoint {
            scheme,
            tau_p,
            per_user_sinr,
            per_user_se,
            prelog,
        })
    }

    pub fn min_se(&self) -> f64 {
        self.per_user_se.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// 1 − τ/T, defined for 0 < τ < T.
pub fn prelog(tau_p: usize, coherence: usize) -> Result<f64> {
    if tau_p >= coherence {
        return Err(Error::PilotTooLong { tau_p, coherence });
    }
    if tau_p == 0 {
        return Err(Error::PilotTooShort { tau_p, required: 1 });
    }
    Ok(1.0 - tau_p as f64 / coherence as f64)
}

pub fn se_from_sinr(sinr: &[f64], tau_p: usize, coherence: usize) -> Result<Vec<f64>> {
    let pre = prelog(tau_p, coherence)?;
    Ok(sinr.iter().map(|s| pre * (1.0 + s).log2()).collect())
}

/// Effective SINR of every user (flat group order).
///
/// The interference terms use the power actually allocated, Σ dl_powers.
pub fn sinr_closed_form(
    scheme: SchemeId,
    config: &SystemConfig,
    betas: &[f64],
    gammas: &PilotGammas,
    dl_powers: &DlPowers,
) -> Result<Vec<f64>> {
    let layout = config.layout();
    let k_tot = layout.total_users();
    if betas.len() != k_tot {
        return Err(Error::LengthMismatch {
            what: "large-scale gains",
            expected: k_tot,
            got: betas.len(),
        });
    }
    gammas.check(scheme, k_tot)?;
    dl_powers.check(scheme, &layout)?;
    config.scheme_feasible(scheme).into_result(scheme)?;

    let n = config.n_antennas as f64;
    let gamma = gammas.values();
    let p = dl_powers.values();
    let total = dl_powers.total();
    let group_power = dl_powers.group_totals(&layout);

    let sinr = (0..k_tot)
        .map(|u| {
            let g = layout.group_of(u);
            let (b, y) = (betas[u], gamma[u]);
            let dof = n - config.nulled_dimensions(scheme, g) as f64;
            match scheme {
                SchemeId::MrtUndp | SchemeId::MrtMudp => n * y * p[u] / (1.0 + b * total),
                SchemeId::ZfUndp => dof * y * p[u] / (1.0 + (b - y) * total),
                SchemeId::ZfMudp => {
                    dof * y * p[u] / (1.0 + y * group_power[g] + (b - y) * total)
                }
                SchemeId::MrtMucp => n * y * p[g] / (1.0 + b * total),
                SchemeId::ZfMucp => dof * y * p[g] / (1.0 + (b - y) * total),
            }
        })
        .collect();
    Ok(sinr)
}

/// SINRs and SEs of `scheme` at pilot length `tau_p`.
pub fn evaluate(
    scheme: SchemeId,
    config: &SystemConfig,
    betas: &[f64],
    tau_p: usize,
    ul_powers: &[f64],
    dl_powers: &DlPowers,
) -> Result<SePoint> {
    let gammas = PilotGammas::for_scheme(scheme, &config.layout(), tau_p, ul_powers, betas);
    let sinr = sinr_closed_form(scheme, config, betas, &gammas, dl_powers)?;
    SePoint::new(scheme, tau_p, config.coherence_symbols, sinr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, groups: Vec<usize>) -> SystemConfig {
        let mut c = SystemConfig::reference_cell(n, groups, 1.0, 1.0);
        c.dl_power_budget = 10.0;
        c.ul_power_caps.iter_mut().for_each(|p| *p = 0.1);
        c
    }

    #[test]
    fn zf_mucp_hand_value() {
        let c = cfg(100, vec![1]);
        let s = sinr_closed_form(
            SchemeId::ZfMucp,
            &c,
            &[1.0],
            &PilotGammas::CoPilot(vec![0.5]),
            &DlPowers::PerGroup(vec![10.0]),
        )
        .unwrap();
        assert!((s[0] - 82.5).abs() < 1e-12);
    }

    #[test]
    fn zf_mudp_hand_value() {
        let c = cfg(100, vec![2]);
        let s = sinr_closed_form(
            SchemeId::ZfMudp,
            &c,
            &[1.0, 1.0],
            &PilotGammas::Dedicated(vec![0.5, 0.5]),
            &DlPowers::PerUser(vec![5.0, 5.0]),
        )
        .unwrap();
        for v in s {
            assert!((v - 250.0 / 11.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_power_user_has_zero_sinr() {
        let c = cfg(10, vec![2]);
        let s = sinr_closed_form(
            SchemeId::MrtUndp,
            &c,
            &[1.0, 1.0],
            &PilotGammas::Dedicated(vec![0.5, 0.5]),
            &DlPowers::PerUser(vec![0.0, 10.0]),
        )
        .unwrap();
        assert_eq!(s[0], 0.0);
        assert!(s[1] > 0.0);
    }

    #[test]
    fn mismatched_strategy_is_rejected() {
        let c = cfg(10, vec![2]);
        let r = sinr_closed_form(
            SchemeId::MrtMucp,
            &c,
            &[1.0, 1.0],
            &PilotGammas::Dedicated(vec![0.5, 0.5]),
            &DlPowers::PerGroup(vec![1.0]),
        );
        assert!(matches!(r, Err(Error::PilotStrategyMismatch { .. })));
        let r = sinr_closed_form(
            SchemeId::MrtUndp,
            &c,
            &[1.0, 1.0],
            &PilotGammas::Dedicated(vec![0.5, 0.5]),
            &DlPowers::PerGroup(vec![1.0]),
        );
        assert!(matches!(r, Err(Error::PilotStrategyMismatch { .. })));
    }

    #[test]
    fn se_examples() {
        assert_eq!(se_from_sinr(&[1.0], 5, 10).unwrap(), vec![0.5]);
        assert_eq!(se_from_sinr(&[0.0], 3, 10).unwrap(), vec![0.0]);
        let v = se_from_sinr(&[3.0], 250, 750).unwrap()[0];
        assert!((v - 4.0 / 3.0).abs() < 1e-15);
        assert!(matches!(se_from_sinr(&[1.0], 10, 10), Err(Error::PilotTooLong { .. })));
    }

    #[test]
    fn infeasible_scheme_is_an_error() {
        let c = cfg(2, vec![2]);
        let r = sinr_closed_form(
            SchemeId::ZfUndp,
            &c,
            &[1.0, 1.0],
            &PilotGammas::Dedicated(vec![0.5, 0.5]),
            &DlPowers::PerUser(vec![1.0, 1.0]),
        );
        assert!(matches!(r, Err(Error::Infeasible { .. })));
    }
}
