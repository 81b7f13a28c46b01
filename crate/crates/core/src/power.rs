use serde::{Deserialize, Serialize};

use crate::config::{GroupLayout, SchemeId};
use crate::error::{Error, Result};
use crate::estimation::{gammas_cp, gammas_dp};

/// Downlink power allocation: per user under dedicated pilots, per group
/// under co-pilots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum DlPowers {
    PerUser(Vec<f64>),
    PerGroup(Vec<f64>),
}

impl DlPowers {
    pub fn values(&self) -> &[f64] {
        match self {
            DlPowers::PerUser(v) | DlPowers::PerGroup(v) => v,
        }
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        match self {
            DlPowers::PerUser(v) | DlPowers::PerGroup(v) => v,
        }
    }

    pub fn total(&self) -> f64 {
        self.values().iter().sum()
    }

    /// Total power radiated toward each group's stream.
    pub fn group_totals(&self, layout: &GroupLayout) -> Vec<f64> {
        match self {
            DlPowers::PerUser(v) => layout.groups().map(|(_, r)| v[r].iter().sum()).collect(),
            DlPowers::PerGroup(v) => v.clone(),
        }
    }

    /// Checks the layout expected by `scheme` and the entry count.
    pub fn check(&self, scheme: SchemeId, layout: &GroupLayout) -> Result<()> {
        let (expected, ok) = match self {
            DlPowers::PerUser(_) => (layout.total_users(), scheme.dedicated_pilots()),
            DlPowers::PerGroup(_) => (layout.n_groups(), !scheme.dedicated_pilots()),
        };
        if !ok {
            return Err(Error::PilotStrategyMismatch {
                scheme,
                expected: if scheme.dedicated_pilots() {
                    "per-user"
                } else {
                    "per-group"
                },
            });
        }
        if self.values().len() != expected {
            return Err(Error::LengthMismatch {
                what: "downlink powers",
                expected,
                got: self.values().len(),
            });
        }
        if self.values().iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidConfig(
                "downlink powers must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Per-user estimate variances tagged with the pilot strategy that
/// produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum PilotGammas {
    Dedicated(Vec<f64>),
    CoPilot(Vec<f64>),
}

impl PilotGammas {
    /// Closed-form γ values for `scheme`'s pilot strategy.
    pub fn for_scheme(
        scheme: SchemeId,
        layout: &GroupLayout,
        tau_p: usize,
        ul_powers: &[f64],
        betas: &[f64],
    ) -> Self {
        if scheme.dedicated_pilots() {
            PilotGammas::Dedicated(gammas_dp(tau_p, ul_powers, betas))
        } else {
            PilotGammas::CoPilot(gammas_cp(layout, tau_p, ul_powers, betas))
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            PilotGammas::Dedicated(v) | PilotGammas::CoPilot(v) => v,
        }
    }

    pub fn check(&self, scheme: SchemeId, n_users: usize) -> Result<()> {
        let ok = matches!(
            (self, scheme.dedicated_pilots()),
            (PilotGammas::Dedicated(_), true) | (PilotGammas::CoPilot(_), false)
        );
        if !ok {
            return Err(Error::PilotStrategyMismatch {
                scheme,
                expected: if scheme.dedicated_pilots() {
                    "dedicated-pilot"
                } else {
                    "co-pilot"
                },
            });
        }
        if self.values().len() != n_users {
            return Err(Error::LengthMismatch {
                what: "estimate variances",
                expected: n_users,
                got: self.values().len(),
            });
        }
        Ok(())
    }
}
