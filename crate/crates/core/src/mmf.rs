//! Max-min fair power control.
//!
//! For a fixed pilot length every scheme has a closed-form optimum (ZF-mudp
//! up to a scalar monotone equation solved by bisection): pilot powers,
//! downlink powers and a common SINR Γ reached by every user. The pilot
//! length itself is then chosen by exhaustive search.

use serde::{Deserialize, Serialize};

use crate::config::{SchemeId, SystemConfig};
use crate::error::{Error, Result};
use crate::estimation::{gamma_cp_users, gamma_dp, group_load};
use crate::power::DlPowers;
use crate::sinr::prelog;

pub const DEFAULT_BISECTION_TOL: f64 = 1e-10;
pub const MAX_BISECTION_ITERATIONS: usize = 200;

/// Scheme-specific intermediates of a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverAux {
    None,
    ZfMudp {
        /// ν_i = K_tot − K_i
        nu: Vec<usize>,
        delta: Vec<f64>,
        /// P_i^dl, the power spent on group i
        group_power: Vec<f64>,
        iterations: usize,
        /// |P − RHS(Γ)| / P at the returned Γ
        residual: f64,
    },
    MrtMucp {
        upsilon: Vec<f64>,
        /// Users whose pilot power sits at the cap, per group.
        at_cap: Vec<Vec<usize>>,
    },
    ZfMucp {
        upsilon: Vec<f64>,
        e: Vec<f64>,
        delta: Vec<f64>,
        at_cap: Vec<Vec<usize>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmfSolution {
    pub scheme: SchemeId,
    pub tau_p: usize,
    /// γ at the optimal pilot powers, per user.
    pub gamma_star: Vec<f64>,
    pub ul_powers: Vec<f64>,
    pub dl_powers: DlPowers,
    /// Γ, the SINR every user attains.
    pub common_sinr: f64,
    pub min_se: f64,
    pub per_group_aux: SolverAux,
}

fn check_inputs(scheme: SchemeId, config: &SystemConfig, betas: &[f64], tau_p: usize) -> Result<()> {
    config.scheme_feasible(scheme).into_result(scheme)?;
    let k = config.total_users();
    if betas.len() != k {
        return Err(Error::LengthMismatch {
            what: "large-scale gains",
            expected: k,
            got: betas.len(),
        });
    }
    if config.ul_power_caps.len() != k {
        return Err(Error::LengthMismatch {
            what: "uplink caps",
            expected: k,
            got: config.ul_power_caps.len(),
        });
    }
    let min = config.min_pilot_length(scheme);
    if tau_p < min {
        return Err(Error::PilotTooShort {
            tau_p,
            required: min,
        });
    }
    prelog(tau_p, config.coherence_symbols)?;
    for (u, (&b, &cap)) in betas.iter().zip(&config.ul_power_caps).enumerate() {
        if !(b > 0.0 && b.is_finite()) || !(cap > 0.0) {
            // every user needs a nonzero estimate to be served
            return Err(Error::ZeroEstimate {
                column: u,
                power: cap,
            });
        }
    }
    Ok(())
}

fn finish(
    scheme: SchemeId,
    config: &SystemConfig,
    tau_p: usize,
    gamma_star: Vec<f64>,
    ul_powers: Vec<f64>,
    dl_powers: DlPowers,
    common_sinr: f64,
    per_group_aux: SolverAux,
) -> Result<MmfSolution> {
    let min_se = prelog(tau_p, config.coherence_symbols)? * (1.0 + common_sinr).log2();
    Ok(MmfSolution {
        scheme,
        tau_p,
        gamma_star,
        ul_powers,
        dl_powers,
        common_sinr,
        min_se,
        per_group_aux,
    })
}

/// MRT-undp; also the optimum of MRT-mudp, whose transmit signal is identical.
pub fn solve_mrt_undp(config: &SystemConfig, betas: &[f64], tau_p: usize) -> Result<MmfSolution> {
    solve_mrt_dp(SchemeId::MrtUndp, config, betas, tau_p)
}

pub fn solve_mrt_mudp(config: &SystemConfig, betas: &[f64], tau_p: usize) -> Result<MmfSolution> {
    solve_mrt_dp(SchemeId::MrtMudp, config, betas, tau_p)
}

fn solve_mrt_dp(scheme: SchemeId, config: &SystemConfig, betas: &[f64], tau_p: usize) -> Result<MmfSolution> {
    check_inputs(scheme, config, betas, tau_p)?;
    let n = config.n_antennas as f64;
    let p = config.dl_power_budget;
    let ul = config.ul_power_caps.clone();
    let gamma: Vec<f64> = ul.iter().zip(betas).map(|(&c, &b)| gamma_dp(tau_p, c, b)).collect();
    // cost_k = (1 + βP)/γ*; Γ = NP / Σ cost
    let cost: Vec<f64> = betas.iter().zip(&gamma).map(|(b, y)| (1.0 + b * p) / y).collect();
    let sinr = n * p / cost.iter().sum::<f64>();
    let dl = cost.iter().map(|c| c * sinr / n).collect();
    finish(scheme, config, tau_p, gamma, ul, DlPowers::PerUser(dl), sinr, SolverAux::None)
}

pub fn solve_zf_undp(config: &SystemConfig, betas: &[f64], tau_p: usize) -> Result<MmfSolution> {
    let scheme = SchemeId::ZfUndp;
    check_inputs(scheme, config, betas, tau_p)?;
    let dof = (config.n_antennas - config.total_users()) as f64;
    let p = config.dl_power_budget;
    let ul = config.ul_power_caps.clone();
    let gamma: Vec<f64> = ul.iter().zip(betas).map(|(&c, &b)| gamma_dp(tau_p, c, b)).collect();
    let cost: Vec<f64> = betas
        .iter()
        .zip(&gamma)
        .map(|(b, y)| (1.0 + (b - y) * p) / y)
        .collect();
    let sinr = dof * p / cost.iter().sum::<f64>();
    let dl = cost.iter().map(|c| c * sinr / dof).collect();
    finish(scheme, config, tau_p, gamma, ul, DlPowers::PerUser(dl), sinr, SolverAux::None)
}

/// Right-hand side of the ZF-mudp budget equation,
/// Σ_i Γ Δ_i / (N − ν_i − Γ K_i). Infinite at or beyond a pole.
pub fn zf_mudp_budget(sinr: f64, n_antennas: usize, delta: &[f64], nu: &[usize], group_sizes: &[usize]) -> f64 {
    let n = n_antennas as f64;
    let mut total = 0.0;
    for ((&d, &v), &k) in delta.iter().zip(nu).zip(group_sizes) {
        let denom = n - v as f64 - sinr * k as f64;
        if denom <= 0.0 {
            return f64::INFINITY;
        }
        total += sinr * d / denom;
    }
    total
}

/// Upper end of the bracket, min_i (N − ν_i)/K_i.
pub fn zf_mudp_sinr_ceiling(n_antennas: usize, nu: &[usize], group_sizes: &[usize]) -> f64 {
    nu.iter()
        .zip(group_sizes)
        .map(|(&v, &k)| (n_antennas - v) as f64 / k as f64)
        .fold(f64::INFINITY, f64::min)
}

pub fn solve_zf_mudp(config: &SystemConfig, betas: &[f64], tau_p: usize, tol: f64) -> Result<MmfSolution> {
    let scheme = SchemeId::ZfMudp;
    check_inputs(scheme, config, betas, tau_p)?;
    let layout = config.layout();
    let sizes = layout.sizes().to_vec();
    let k_tot = layout.total_users();
    let p = config.dl_power_budget;
    let ul = config.ul_power_caps.clone();
    let gamma: Vec<f64> = ul.iter().zip(betas).map(|(&c, &b)| gamma_dp(tau_p, c, b)).collect();
    let nu: Vec<usize> = sizes.iter().map(|k| k_tot - k).collect();
    let delta: Vec<f64> = layout
        .groups()
        .map(|(_, r)| r.map(|u| 1.0 / gamma[u] + p * betas[u] / gamma[u] - p).sum())
        .collect();

    let (sinr, iterations, residual) = if p == 0.0 {
        (0.0, 0, 0.0)
    } else {
        let mut lo = 0.0;
        let mut hi = zf_mudp_sinr_ceiling(config.n_antennas, &nu, &sizes);
        let mut found = None;
        let mut last = f64::INFINITY;
        for it in 1..=MAX_BISECTION_ITERATIONS {
            let mid = 0.5 * (lo + hi);
            let rhs = zf_mudp_budget(mid, config.n_antennas, &delta, &nu, &sizes);
            last = (rhs - p).abs() / p;
            if last <= tol {
                found = Some((mid, it, last));
                break;
            }
            if rhs > p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        found.ok_or(Error::NoConvergence {
            iterations: MAX_BISECTION_ITERATIONS,
            residual: last,
        })?
    };

    let n = config.n_antennas as f64;
    let group_power: Vec<f64> = (0..sizes.len())
        .map(|i| {
            let denom = n - nu[i] as f64 - sinr * sizes[i] as f64;
            sinr * delta[i] / denom
        })
        .collect();
    let mut dl = vec![0.0; k_tot];
    for (i, range) in layout.groups() {
        let dof = n - nu[i] as f64;
        for u in range {
            let y = gamma[u];
            dl[u] = sinr / dof * (1.0 / y + group_power[i] + p * betas[u] / y - p);
        }
    }
    let aux = SolverAux::ZfMudp {
        nu,
        delta,
        group_power,
        iterations,
        residual,
    };
    finish(scheme, config, tau_p, gamma, ul, DlPowers::PerUser(dl), sinr, aux)
}

struct CoPilotPowers {
    upsilon: Vec<f64>,
    ul: Vec<f64>,
    gamma: Vec<f64>,
    load: Vec<f64>,
    at_cap: Vec<Vec<usize>>,
}

/// Pilot powers that equalize β² p / (1 + βP) inside each group at
/// Υ_i, its smallest value under the caps.
fn co_pilot_powers(config: &SystemConfig, betas: &[f64], tau_p: usize) -> CoPilotPowers {
    let layout = config.layout();
    let p = config.dl_power_budget;
    let caps = &config.ul_power_caps;
    let mut upsilon = Vec::with_capacity(layout.n_groups());
    let mut ul = vec![0.0; layout.total_users()];
    let mut at_cap = Vec::with_capacity(layout.n_groups());
    for (_, range) in layout.groups() {
        let ups = range
            .clone()
            .map(|u| betas[u] * betas[u] * caps[u] / (1.0 + p * betas[u]))
            .fold(f64::INFINITY, f64::min);
        let mut capped = Vec::new();
        for u in range.clone() {
            let b = betas[u];
            // clamp so the min-defining users land exactly on their cap
            ul[u] = ((1.0 + p * b) / (b * b) * ups).min(caps[u]);
            if b * b * caps[u] / (1.0 + p * b) == ups {
                ul[u] = caps[u];
                capped.push(u - range.start);
            }
        }
        upsilon.push(ups);
        at_cap.push(capped);
    }
    let mut gamma = Vec::with_capacity(layout.total_users());
    let mut load = Vec::with_capacity(layout.n_groups());
    for (_, range) in layout.groups() {
        gamma.extend(gamma_cp_users(tau_p, &ul[range.clone()], &betas[range.clone()]));
        load.push(group_load(tau_p, &ul[range.clone()], &betas[range]));
    }
    CoPilotPowers {
        upsilon,
        ul,
        gamma,
        load,
        at_cap,
    }
}

pub fn solve_mrt_mucp(config: &SystemConfig, betas: &[f64], tau_p: usize) -> Result<MmfSolution> {
    let scheme = SchemeId::MrtMucp;
    check_inputs(scheme, config, betas, tau_p)?;
    let n = config.n_antennas as f64;
    let p = config.dl_power_budget;
    let tau = tau_p as f64;
    let cp = co_pilot_powers(config, betas, tau_p);
    // cost_i = (1 + S_i)/(τ Υ_i)
    let cost: Vec<f64> = cp
        .load
        .iter()
        .zip(&cp.upsilon)
        .map(|(s, u)| (1.0 + s) / (tau * u))
        .collect();
    let sinr = n * p / cost.iter().sum::<f64>();
    let dl = cost.iter().map(|c| sinr * c / n).collect();
    let aux = SolverAux::MrtMucp {
        upsilon: cp.upsilon,
        at_cap: cp.at_cap,
    };
    finish(scheme, config, tau_p, cp.gamma, cp.ul, DlPowers::PerGroup(dl), sinr, aux)
}

pub fn solve_zf_mucp(config: &SystemConfig, betas: &[f64], tau_p: usize) -> Result<MmfSolution> {
    let scheme = SchemeId::ZfMucp;
    check_inputs(scheme, config, betas, tau_p)?;
    let layout = config.layout();
    let dof = (config.n_antennas - config.n_groups()) as f64;
    let p = config.dl_power_budget;
    let tau = tau_p as f64;
    let cp = co_pilot_powers(config, betas, tau_p);
    let e: Vec<f64> = layout
        .groups()
        .map(|(i, r)| {
            let ups = cp.upsilon[i];
            r.len() as f64 * ups * p + ups * r.map(|u| 1.0 / betas[u]).sum::<f64>()
        })
        .collect();
    let delta: Vec<f64> = cp
        .upsilon
        .iter()
        .zip(&e)
        .map(|(&ups, &e)| tau * ups / (1.0 + tau * (e - p * ups)))
        .collect();
    let inv_sum: f64 = delta.iter().map(|d| 1.0 / d).sum();
    let sinr = p * dof / inv_sum;
    let dl = delta.iter().map(|d| p / (d * inv_sum)).collect();
    let aux = SolverAux::ZfMucp {
        upsilon: cp.upsilon,
        e,
        delta,
        at_cap: cp.at_cap,
    };
    finish(scheme, config, tau_p, cp.gamma, cp.ul, DlPowers::PerGroup(dl), sinr, aux)
}

/// Solves the fixed-pilot-length problem for any scheme.
pub fn solve(scheme: SchemeId, config: &SystemConfig, betas: &[f64], tau_p: usize) -> Result<MmfSolution> {
    match scheme {
        SchemeId::MrtUndp => solve_mrt_undp(config, betas, tau_p),
        SchemeId::ZfUndp => solve_zf_undp(config, betas, tau_p),
        SchemeId::MrtMudp => solve_mrt_mudp(config, betas, tau_p),
        SchemeId::ZfMudp => solve_zf_mudp(config, betas, tau_p, DEFAULT_BISECTION_TOL),
        SchemeId::MrtMucp => solve_mrt_mucp(config, betas, tau_p),
        SchemeId::ZfMucp => solve_zf_mucp(config, betas, tau_p),
    }
}

/// Exhaustive search over every pilot length with a positive prelog;
/// ties go to the shorter pilot.
pub fn optimize_pilot_length(scheme: SchemeId, config: &SystemConfig, betas: &[f64]) -> Result<MmfSolution> {
    config.scheme_feasible(scheme).into_result(scheme)?;
    let mut best: Option<MmfSolution> = None;
    for tau in config.pilot_range(scheme) {
        let sol = solve(scheme, config, betas, tau)?;
        if best.as_ref().is_none_or(|b| sol.min_se > b.min_se) {
            best = Some(sol);
        }
    }
    best.ok_or(Error::PilotTooLong {
        tau_p: config.min_pilot_length(scheme),
        coherence: config.coherence_symbols,
    })
}
