//! Monte Carlo estimates of the use-and-then-forget SINR and of each term
//! in its decomposition.
//!
//! For user (i,k) with stream precoders w_j, every sample yields the true
//! effective gains h_j = g_ikᴴ w_j and the estimate-side gains
//! ĥ_j = ĝ_ikᴴ w_j; the estimation error contributes e_j = ĥ_j − h_j =
//! g̃_ikᴴ w_j. Two decompositions are tracked:
//!
//! * true-channel: SINR = |E h_i|² / (1 + var h_i + Σ_{j≠i} E|h_j|²)
//! * estimate-side: mean and variance of ĥ_i, leakage E|ĥ_j|² (j ≠ i) and
//!   error power E|e_j|² (all j)
//!
//! Co-member unicast columns share the group symbol, so they enter through
//! the stream precoder and their zero-mean part lands in the variance term.
//! Standard errors use the delta method on the joint sample covariance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{draw_channels_with, FadingProfile};
use crate::config::{SchemeId, SystemConfig};
use crate::error::{Error, Result};
use crate::estimation::{estimate_cp_with, estimate_dp_with, Estimate};
use crate::mmf::MmfSolution;
use crate::power::{DlPowers, PilotGammas};
use crate::precoding::build_precoder;
use crate::rng::{domain, substream};
use crate::sinr::sinr_closed_form;

pub const MIN_SAMPLES: usize = 100;
pub const DEFAULT_SAMPLES: usize = 10_000;
const BLOCK: usize = 64;

/// Running mean and co-moment matrix of a fixed-width vector.
#[derive(Debug, Clone)]
struct Moments {
    n: f64,
    mean: Vec<f64>,
    comoment: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Moments {
            n: 0.0,
            mean: vec![0.0; dim],
            comoment: vec![0.0; dim * dim],
        }
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn push(&mut self, x: &[f64]) {
        let d = self.dim();
        self.n += 1.0;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl / self.n;
        }
        for r in 0..d {
            let after = x[r] - self.mean[r];
            for c in 0..d {
                self.comoment[r * d + c] += delta[c] * after;
            }
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = other.clone();
            return;
        }
        let d = self.dim();
        let n = self.n + other.n;
        let delta: Vec<f64> = other.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        let w = self.n * other.n / n;
        for r in 0..d {
            for c in 0..d {
                self.comoment[r * d + c] += other.comoment[r * d + c] + delta[r] * delta[c] * w;
            }
        }
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl * other.n / n;
        }
        self.n = n;
    }

    fn cov(&self, r: usize, c: usize) -> f64 {
        self.comoment[r * self.dim() + c] / (self.n - 1.0)
    }

    /// Standard error of Σ_r grad_r · mean_r.
    fn linear_se(&self, grad: &[(usize, f64)]) -> f64 {
        let mut var = 0.0;
        for &(r, gr) in grad {
            for &(c, gc) in grad {
                var += gr * gc * self.cov(r, c);
            }
        }
        (var.max(0.0) / self.n).sqrt()
    }
}

// Slots of the per-user sample vector.
const H_RE: usize = 0;
const H_IM: usize = 1;
const H_POW: usize = 2;
const H_CROSS: usize = 3;
const B_RE: usize = 4;
const B_IM: usize = 5;
const B_POW: usize = 6;
const PER_STREAM: usize = 7;

fn dim(g: usize) -> usize {
    PER_STREAM + 3 * g
}
fn h_pow(j: usize) -> usize {
    PER_STREAM + 3 * j
}
fn b_pow(j: usize) -> usize {
    PER_STREAM + 3 * j + 1
}
fn e_pow(j: usize) -> usize {
    PER_STREAM + 3 * j + 2
}

/// Estimate-side terms of one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateTerms {
    /// E[ĝ_ikᴴ w_i], real and imaginary part.
    pub signal_mean: (f64, f64),
    pub signal_mean_se: (f64, f64),
    /// var(ĝ_ikᴴ w_i)
    pub signal_variance: f64,
    pub signal_variance_se: f64,
    /// E|ĝ_ikᴴ w_j|² per stream; zero for the own stream.
    pub leakage: Vec<f64>,
    pub leakage_se: Vec<f64>,
    /// E|g̃_ikᴴ w_j|² per stream.
    pub error_power: Vec<f64>,
    pub error_power_se: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UatfErrors {
    pub signal: f64,
    pub variance: f64,
    pub interference: Vec<f64>,
    pub sinr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UatfEstimate {
    pub scheme: SchemeId,
    pub user: usize,
    /// |E[g_ikᴴ w_i]|²
    pub signal_term: f64,
    /// var(g_ikᴴ w_i)
    pub variance_term: f64,
    /// E|g_ikᴴ w_j|² per stream; the own stream's entry is zero.
    pub interference_terms: Vec<f64>,
    pub sinr_mc: f64,
    pub n_samples: usize,
    pub standard_errors: UatfErrors,
    pub terms: EstimateTerms,
}

fn summarize(scheme: SchemeId, user: usize, own: usize, g: usize, m: &Moments) -> UatfEstimate {
    let mu = &m.mean;
    let (hr, hi) = (mu[H_RE], mu[H_IM]);
    let signal = hr * hr + hi * hi;
    let q = mu[H_POW];
    let cross = mu[H_CROSS];
    let variance = q - signal;
    let denom = 1.0 + variance + cross;
    let sinr = signal / denom;

    let se_signal = m.linear_se(&[(H_RE, 2.0 * hr), (H_IM, 2.0 * hi)]);
    let se_variance = m.linear_se(&[(H_RE, -2.0 * hr), (H_IM, -2.0 * hi), (H_POW, 1.0)]);
    let ds = (1.0 + q + cross) / (denom * denom);
    let dq = -signal / (denom * denom);
    let se_sinr = m.linear_se(&[
        (H_RE, ds * 2.0 * hr),
        (H_IM, ds * 2.0 * hi),
        (H_POW, dq),
        (H_CROSS, dq),
    ]);

    let mut interference = vec![0.0; g];
    let mut interference_se = vec![0.0; g];
    let mut leakage = vec![0.0; g];
    let mut leakage_se = vec![0.0; g];
    let mut error_power = vec![0.0; g];
    let mut error_power_se = vec![0.0; g];
    for j in 0..g {
        if j != own {
            interference[j] = mu[h_pow(j)];
            interference_se[j] = m.linear_se(&[(h_pow(j), 1.0)]);
            leakage[j] = mu[b_pow(j)];
            leakage_se[j] = m.linear_se(&[(b_pow(j), 1.0)]);
        }
        error_power[j] = mu[e_pow(j)];
        error_power_se[j] = m.linear_se(&[(e_pow(j), 1.0)]);
    }

    let (br, bi) = (mu[B_RE], mu[B_IM]);
    let terms = EstimateTerms {
        signal_mean: (br, bi),
        signal_mean_se: (m.linear_se(&[(B_RE, 1.0)]), m.linear_se(&[(B_IM, 1.0)])),
        signal_variance: mu[B_POW] - (br * br + bi * bi),
        signal_variance_se: m.linear_se(&[(B_RE, -2.0 * br), (B_IM, -2.0 * bi), (B_POW, 1.0)]),
        leakage,
        leakage_se,
        error_power,
        error_power_se,
    };

    UatfEstimate {
        scheme,
        user,
        signal_term: signal,
        variance_term: variance,
        interference_terms: interference,
        sinr_mc: sinr,
        n_samples: m.n as usize,
        standard_errors: UatfErrors {
            signal: se_signal,
            variance: se_variance,
            interference: interference_se,
            sinr: se_sinr,
        },
        terms,
    }
}

/// Monte Carlo UatF estimate for every user of `profile`.
///
/// Sample m draws channels and estimation noise from its own substream of
/// `seed`, so the result is independent of the worker count.
#[allow(clippy::too_many_arguments)]
pub fn estimate_uatf_sinr(
    scheme: SchemeId,
    config: &SystemConfig,
    profile: &FadingProfile,
    ul_powers: &[f64],
    dl_powers: &DlPowers,
    tau_p: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<UatfEstimate>> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidConfig(format!(
            "need at least {MIN_SAMPLES} Monte Carlo samples, got {n_samples}"
        )));
    }
    config.scheme_feasible(scheme).into_result(scheme)?;
    let layout = profile.layout();
    if layout.sizes() != config.group_sizes.as_slice() {
        return Err(Error::InvalidConfig("profile groups differ from the config".into()));
    }
    dl_powers.check(scheme, &layout)?;
    let g = layout.n_groups();
    let k_tot = layout.total_users();
    let d = dim(g);
    let n = config.n_antennas;

    let n_blocks = n_samples.div_ceil(BLOCK);
    let blocks: Vec<Vec<Moments>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| -> Result<Vec<Moments>> {
            let mut acc = vec![Moments::new(d); k_tot];
            let mut x = vec![0.0; d];
            for m in (b * BLOCK)..((b + 1) * BLOCK).min(n_samples) {
                let mut rng = substream(seed, &[domain::MC_SAMPLE, m as u64]);
                let real = draw_channels_with(profile, n, &mut rng);
                let est = if scheme.dedicated_pilots() {
                    Estimate::Dedicated(estimate_dp_with(&real, ul_powers, tau_p, &mut rng)?)
                } else {
                    Estimate::CoPilot(estimate_cp_with(&real, ul_powers, tau_p, &mut rng)?)
                };
                let w = build_precoder(scheme, &est, dl_powers)?.stream_precoders();
                let h = real.channels.ad_mul(&w);
                let h_hat = est.user_estimates().ad_mul(&w);
                for (user, moments) in acc.iter_mut().enumerate() {
                    let own = layout.group_of(user);
                    let a = h[(user, own)];
                    let bb = h_hat[(user, own)];
                    x[H_RE] = a.re;
                    x[H_IM] = a.im;
                    x[H_POW] = a.norm_sqr();
                    x[B_RE] = bb.re;
                    x[B_IM] = bb.im;
                    x[B_POW] = bb.norm_sqr();
                    let mut cross = 0.0;
                    for j in 0..g {
                        let hj = h[(user, j)].norm_sqr();
                        if j != own {
                            cross += hj;
                        }
                        x[h_pow(j)] = hj;
                        x[b_pow(j)] = h_hat[(user, j)].norm_sqr();
                        x[e_pow(j)] = (h_hat[(user, j)] - h[(user, j)]).norm_sqr();
                    }
                    x[H_CROSS] = cross;
                    moments.push(&x);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut total = vec![Moments::new(d); k_tot];
    for block in &blocks {
        for (t, b) in total.iter_mut().zip(block) {
            t.merge(b);
        }
    }
    Ok(total
        .iter()
        .enumerate()
        .map(|(user, m)| summarize(scheme, user, layout.group_of(user), g, m))
        .collect())
}

/// Closed-form values of the estimate-side terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedTerms {
    pub signal_mean: f64,
    pub signal_variance: f64,
    pub leakage: Vec<f64>,
    pub error_power: Vec<f64>,
}

impl ClosedTerms {
    /// The SINR assembled from the terms; equals the closed-form SINR.
    pub fn sinr(&self, own: usize) -> f64 {
        let leak: f64 = self
            .leakage
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != own)
            .map(|(_, v)| v)
            .sum();
        let err: f64 = self.error_power.iter().sum();
        self.signal_mean.powi(2) / (1.0 + self.signal_variance + leak + err)
    }
}

/// Expected value of each estimate-side term for every user.
///
/// With p_j the power on stream j:
/// * signal mean √(κ γ p) with κ = N for MRT, N − ν_i for ZF;
/// * variance γ p_i for MRT and ZF-mudp, 0 for ZF-undp and ZF-mucp;
/// * leakage γ p_j for MRT, 0 for ZF;
/// * error power (β − γ) p_j.
pub fn closed_form_terms(
    scheme: SchemeId,
    config: &SystemConfig,
    betas: &[f64],
    gammas: &PilotGammas,
    dl_powers: &DlPowers,
) -> Result<Vec<ClosedTerms>> {
    let layout = config.layout();
    gammas.check(scheme, layout.total_users())?;
    dl_powers.check(scheme, &layout)?;
    let n = config.n_antennas as f64;
    let y = gammas.values();
    let stream = dl_powers.group_totals(&layout);
    let g = layout.n_groups();
    Ok((0..layout.total_users())
        .map(|u| {
            let own = layout.group_of(u);
            let own_power = match dl_powers {
                DlPowers::PerUser(p) => p[u],
                DlPowers::PerGroup(p) => p[own],
            };
            let dof = n - config.nulled_dimensions(scheme, own) as f64;
            let (variance, leaks) = match scheme {
                SchemeId::MrtUndp | SchemeId::MrtMudp | SchemeId::MrtMucp => (y[u] * stream[own], true),
                SchemeId::ZfMudp => (y[u] * stream[own], false),
                SchemeId::ZfUndp | SchemeId::ZfMucp => (0.0, false),
            };
            let leakage = (0..g)
                .map(|j| if j != own && leaks { y[u] * stream[j] } else { 0.0 })
                .collect();
            let error_power = stream.iter().map(|p| (betas[u] - y[u]) * p).collect();
            ClosedTerms {
                signal_mean: (dof * y[u] * own_power).sqrt(),
                signal_variance: variance,
                leakage,
                error_power,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    SignalMean,
    SignalMeanImag,
    SignalVariance,
    Leakage { stream: usize },
    ErrorPower { stream: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermCheck {
    pub user: usize,
    pub term: TermKind,
    pub mc: f64,
    pub se: f64,
    pub closed: f64,
    pub within_3se: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserBound {
    pub user: usize,
    pub closed_sinr: f64,
    pub mc_sinr: f64,
    pub se: f64,
    pub rel_dev: f64,
    /// 3-standard-error band around the MC estimate.
    pub ci: (f64, f64),
    pub within_3se: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub scheme: SchemeId,
    pub tau_p: usize,
    pub n_samples: usize,
    pub users: Vec<UserBound>,
    pub terms: Vec<TermCheck>,
}

impl BoundReport {
    pub fn max_rel_dev(&self) -> f64 {
        self.users.iter().map(|u| u.rel_dev).fold(0.0, f64::max)
    }

    pub fn all_within(&self) -> bool {
        self.users.iter().all(|u| u.within_3se) && self.terms.iter().all(|t| t.within_3se)
    }

    /// Users or terms whose closed form falls outside the band.
    pub fn flagged(&self) -> (Vec<&UserBound>, Vec<&TermCheck>) {
        (
            self.users.iter().filter(|u| !u.within_3se).collect(),
            self.terms.iter().filter(|t| !t.within_3se).collect(),
        )
    }
}

/// Relative floor for terms whose Monte Carlo spread is zero up to rounding
/// (the deterministic ZF gains).
const ROUNDING_FLOOR: f64 = 1e-9;

fn check(user: usize, term: TermKind, mc: f64, se: f64, closed: f64, scale: f64) -> TermCheck {
    TermCheck {
        user,
        term,
        mc,
        se,
        closed,
        within_3se: (mc - closed).abs() <= 3.0 * se + ROUNDING_FLOOR * scale,
    }
}

/// Runs the estimator at `solution`'s operating point and compares it with
/// the closed forms, user by user and term by term.
pub fn compare_bound(
    scheme: SchemeId,
    config: &SystemConfig,
    profile: &FadingProfile,
    solution: &MmfSolution,
    n_samples: usize,
    seed: u64,
) -> Result<BoundReport> {
    if solution.scheme != scheme {
        return Err(Error::PilotStrategyMismatch {
            scheme,
            expected: "a solution for the same scheme",
        });
    }
    let mc = estimate_uatf_sinr(
        scheme,
        config,
        profile,
        &solution.ul_powers,
        &solution.dl_powers,
        solution.tau_p,
        n_samples,
        seed,
    )?;
    let layout = profile.layout();
    let gammas = PilotGammas::for_scheme(
        scheme,
        &layout,
        solution.tau_p,
        &solution.ul_powers,
        &profile.betas,
    );
    let closed = sinr_closed_form(scheme, config, &profile.betas, &gammas, &solution.dl_powers)?;
    let terms = closed_form_terms(scheme, config, &profile.betas, &gammas, &solution.dl_powers)?;

    let mut users = Vec::with_capacity(mc.len());
    let mut checks = Vec::new();
    for (u, (est, (&cf, ct))) in mc.iter().zip(closed.iter().zip(&terms)).enumerate() {
        let se = est.standard_errors.sinr;
        users.push(UserBound {
            user: u,
            closed_sinr: cf,
            mc_sinr: est.sinr_mc,
            se,
            rel_dev: if cf > 0.0 { (est.sinr_mc - cf).abs() / cf } else { est.sinr_mc.abs() },
            ci: (est.sinr_mc - 3.0 * se, est.sinr_mc + 3.0 * se),
            within_3se: (est.sinr_mc - cf).abs() <= 3.0 * se + ROUNDING_FLOOR * cf,
        });

        let t = &est.terms;
        let amp = ct.signal_mean;
        let pow = amp * amp;
        checks.push(check(u, TermKind::SignalMean, t.signal_mean.0, t.signal_mean_se.0, amp, amp));
        checks.push(check(u, TermKind::SignalMeanImag, t.signal_mean.1, t.signal_mean_se.1, 0.0, amp));
        checks.push(check(
            u,
            TermKind::SignalVariance,
            t.signal_variance,
            t.signal_variance_se,
            ct.signal_variance,
            pow,
        ));
        let own = layout.group_of(u);
        for j in 0..layout.n_groups() {
            if j != own {
                checks.push(check(
                    u,
                    TermKind::Leakage { stream: j },
                    t.leakage[j],
                    t.leakage_se[j],
                    ct.leakage[j],
                    pow,
                ));
            }
            checks.push(check(
                u,
                TermKind::ErrorPower { stream: j },
                t.error_power[j],
                t.error_power_se[j],
                ct.error_power[j],
                pow,
            ));
        }
    }
    Ok(BoundReport {
        scheme,
        tau_p: solution.tau_p,
        n_samples,
        users,
        terms: checks,
    })
}
