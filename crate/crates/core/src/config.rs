//! System configuration, scheme identifiers, power normalization and
//! feasibility rules.
//!
//! Every power stored in a [`SystemConfig`] is noise-normalized (σ² = 1).
//! Physical watts only appear when building a config or reading one from a
//! file.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts a transmit power in watts into noise-normalized units.
pub fn normalize_power(p_watts: f64, noise_psd_dbm_per_hz: f64, bw_hz: f64) -> f64 {
    p_watts / noise_power_watts(noise_psd_dbm_per_hz, bw_hz)
}

/// Thermal noise power over `bw_hz`, in watts.
pub fn noise_power_watts(noise_psd_dbm_per_hz: f64, bw_hz: f64) -> f64 {
    10f64.powf((noise_psd_dbm_per_hz + 10.0 * bw_hz.log10() - 30.0) / 10.0)
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// The six transmission schemes: precoder (MRT/ZF) × transmission mode
/// (unicast/multicast) × pilot assignment (dedicated/co-pilot).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SchemeId {
    #[serde(rename = "MRT-undp")]
    MrtUndp,
    #[serde(rename = "ZF-undp")]
    ZfUndp,
    #[serde(rename = "MRT-mudp")]
    MrtMudp,
    #[serde(rename = "ZF-mudp")]
    ZfMudp,
    #[serde(rename = "MRT-mucp")]
    MrtMucp,
    #[serde(rename = "ZF-mucp")]
    ZfMucp,
}

impl SchemeId {
    pub const ALL: [SchemeId; 6] = [
        SchemeId::MrtUndp,
        SchemeId::ZfUndp,
        SchemeId::MrtMudp,
        SchemeId::ZfMudp,
        SchemeId::MrtMucp,
        SchemeId::ZfMucp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::MrtUndp => "MRT-undp",
            SchemeId::ZfUndp => "ZF-undp",
            SchemeId::MrtMudp => "MRT-mudp",
            SchemeId::ZfMudp => "ZF-mudp",
            SchemeId::MrtMucp => "MRT-mucp",
            SchemeId::ZfMucp => "ZF-mucp",
        }
    }

    /// True for schemes that estimate every user with its own pilot.
    pub fn dedicated_pilots(self) -> bool {
        !matches!(self, SchemeId::MrtMucp | SchemeId::ZfMucp)
    }

    pub fn is_zero_forcing(self) -> bool {
        matches!(self, SchemeId::ZfUndp | SchemeId::ZfMudp | SchemeId::ZfMucp)
    }

    pub fn is_unicast(self) -> bool {
        matches!(self, SchemeId::MrtUndp | SchemeId::ZfUndp)
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        SchemeId::ALL
            .into_iter()
            .find(|id| {
                let name: String = id
                    .name()
                    .chars()
                    .filter(|c| c.is_ascii_alphanumeric())
                    .map(|c| c.to_ascii_lowercase())
                    .collect();
                name == key
            })
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme `{s}`")))
    }
}

/// Why a scheme cannot run on a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasible {
    /// Zero-forcing needs strictly more antennas than the nulled dimensions.
    TooFewAntennas { n_antennas: usize, nulled: usize },
    /// The coherence interval cannot hold the pilots plus one data symbol.
    CoherenceTooShort { coherence: usize, min_pilots: usize },
}

impl fmt::Display for Infeasible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasible::TooFewAntennas { n_antennas, nulled } => {
                write!(f, "N = {n_antennas} antennas must exceed {nulled} nulled dimensions")
            }
            Infeasible::CoherenceTooShort { coherence, min_pilots } => write!(
                f,
                "coherence interval T = {coherence} must exceed the {min_pilots} pilot symbols"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Feasibility {
    pub feasible: bool,
    pub reason: Option<Infeasible>,
}

impl Feasibility {
    fn ok() -> Self {
        Feasibility {
            feasible: true,
            reason: None,
        }
    }

    fn fail(reason: Infeasible) -> Self {
        Feasibility {
            feasible: false,
            reason: Some(reason),
        }
    }

    pub fn into_result(self, scheme: SchemeId) -> Result<()> {
        match self.reason {
            None => Ok(()),
            Some(reason) => Err(Error::Infeasible { scheme, reason }),
        }
    }
}

/// Scenario parameters. Powers are noise-normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_antennas: usize,
    pub group_sizes: Vec<usize>,
    pub coherence_symbols: usize,
    pub dl_power_budget: f64,
    /// One cap per user, flat in group order.
    pub ul_power_caps: Vec<f64>,
    pub carrier_bw_hz: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub cell_radius_m: f64,
    pub exclusion_radius_m: f64,
    pub pathloss_exponent: f64,
    pub pathloss_ref: f64,
}

pub const REFERENCE_BW_HZ: f64 = 20e6;
pub const REFERENCE_NOISE_PSD_DBM_PER_HZ: f64 = -174.0;
pub const REFERENCE_CELL_RADIUS_M: f64 = 500.0;
pub const REFERENCE_EXCLUSION_RADIUS_M: f64 = 35.0;
pub const REFERENCE_PATHLOSS_EXPONENT: f64 = 3.76;
pub const REFERENCE_COHERENCE_SYMBOLS: usize = 750;

/// Path-loss constant d̄ = 10^-3.53.
pub fn reference_pathloss() -> f64 {
    10f64.powf(-3.53)
}

impl SystemConfig {
    /// A 500 m cell with a 35 m exclusion zone, 20 MHz at -174 dBm/Hz,
    /// T = 750, and the given powers in watts.
    pub fn reference_cell(
        n_antennas: usize,
        group_sizes: Vec<usize>,
        dl_power_watts: f64,
        ul_cap_watts: f64,
    ) -> Self {
        let n_users = group_sizes.iter().sum();
        let dl = normalize_power(dl_power_watts, REFERENCE_NOISE_PSD_DBM_PER_HZ, REFERENCE_BW_HZ);
        let ul = normalize_power(ul_cap_watts, REFERENCE_NOISE_PSD_DBM_PER_HZ, REFERENCE_BW_HZ);
        SystemConfig {
            n_antennas,
            group_sizes,
            coherence_symbols: REFERENCE_COHERENCE_SYMBOLS,
            dl_power_budget: dl,
            ul_power_caps: vec![ul; n_users],
            carrier_bw_hz: REFERENCE_BW_HZ,
            noise_psd_dbm_per_hz: REFERENCE_NOISE_PSD_DBM_PER_HZ,
            cell_radius_m: REFERENCE_CELL_RADIUS_M,
            exclusion_radius_m: REFERENCE_EXCLUSION_RADIUS_M,
            pathloss_exponent: REFERENCE_PATHLOSS_EXPONENT,
            pathloss_ref: reference_pathloss(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_antennas == 0 {
            return bad("n_antennas must be positive".into());
        }
        if self.group_sizes.is_empty() || self.group_sizes.contains(&0) {
            return bad("group_sizes must be a nonempty list of positive sizes".into());
        }
        if self.ul_power_caps.len() != self.total_users() {
            return bad(format!(
                "{} uplink caps for {} users",
                self.ul_power_caps.len(),
                self.total_users()
            ));
        }
        if self.ul_power_caps.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return bad("uplink caps must be finite and nonnegative".into());
        }
        if !(self.dl_power_budget.is_finite() && self.dl_power_budget >= 0.0) {
            return bad("downlink budget must be finite and nonnegative".into());
        }
        if self.coherence_symbols < self.n_groups() {
            return bad(format!(
                "coherence interval {} shorter than the number of groups {}",
                self.coherence_symbols,
                self.n_groups()
            ));
        }
        if !(self.carrier_bw_hz > 0.0) {
            return bad("carrier_bw_hz must be positive".into());
        }
        if !(self.exclusion_radius_m > 0.0 && self.exclusion_radius_m < self.cell_radius_m) {
            return bad("need 0 < exclusion_radius_m < cell_radius_m".into());
        }
        if !(self.pathloss_exponent > 0.0 && self.pathloss_ref > 0.0) {
            return bad("path-loss exponent and reference must be positive".into());
        }
        Ok(())
    }

    pub fn n_groups(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn total_users(&self) -> usize {
        self.group_sizes.iter().sum()
    }

    pub fn layout(&self) -> GroupLayout {
        GroupLayout::new(&self.group_sizes)
    }

    /// Noise power over the carrier bandwidth, in watts.
    pub fn noise_watts(&self) -> f64 {
        noise_power_watts(self.noise_psd_dbm_per_hz, self.carrier_bw_hz)
    }

    pub fn normalize(&self, p_watts: f64) -> f64 {
        normalize_power(p_watts, self.noise_psd_dbm_per_hz, self.carrier_bw_hz)
    }

    /// Large-scale fading at distance `x_m`.
    pub fn pathloss(&self, x_m: f64) -> f64 {
        self.pathloss_ref / x_m.powf(self.pathloss_exponent)
    }

    /// SNR in dB seen by a user at the cell edge for a normalized power.
    pub fn cell_edge_snr_db(&self, normalized_power: f64) -> f64 {
        to_db(normalized_power * self.pathloss(self.cell_radius_m))
    }

    /// Normalized power that yields `snr_db` at the cell edge.
    pub fn power_for_cell_edge_snr(&self, snr_db: f64) -> f64 {
        10f64.powf(snr_db / 10.0) / self.pathloss(self.cell_radius_m)
    }

    /// Smallest pilot length the scheme's pilot assignment allows.
    pub fn min_pilot_length(&self, scheme: SchemeId) -> usize {
        if scheme.dedicated_pilots() {
            self.total_users()
        } else {
            self.n_groups()
        }
    }

    /// Pilot lengths with a strictly positive prelog.
    pub fn pilot_range(&self, scheme: SchemeId) -> Range<usize> {
        self.min_pilot_length(scheme)..self.coherence_symbols
    }

    /// Number of dimensions zero-forcing spends on nulling for group `group`,
    /// zero for MRT schemes.
    pub fn nulled_dimensions(&self, scheme: SchemeId, group: usize) -> usize {
        match scheme {
            SchemeId::ZfUndp => self.total_users(),
            SchemeId::ZfMudp => self.total_users() - self.group_sizes[group],
            SchemeId::ZfMucp => self.n_groups(),
            _ => 0,
        }
    }

    pub fn scheme_feasible(&self, scheme: SchemeId) -> Feasibility {
        scheme_feasible(scheme, self)
    }
}

/// Feasibility with strict inequalities, so that the SINR coefficient
/// (N − κ) and the prelog (1 − τ/T) are both positive.
pub fn scheme_feasible(scheme: SchemeId, config: &SystemConfig) -> Feasibility {
    let min_pilots = config.min_pilot_length(scheme);
    let nulled = (0..config.n_groups())
        .map(|g| config.nulled_dimensions(scheme, g))
        .max()
        .unwrap_or(0);
    if scheme.is_zero_forcing() && config.n_antennas <= nulled {
        return Feasibility::fail(Infeasible::TooFewAntennas {
            n_antennas: config.n_antennas,
            nulled,
        });
    }
    if config.coherence_symbols <= min_pilots {
        return Feasibility::fail(Infeasible::CoherenceTooShort {
            coherence: config.coherence_symbols,
            min_pilots,
        });
    }
    Feasibility::ok()
}

/// Maps (group, user) pairs onto the flat user index ν = Σ_{t<j} K_t + k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupLayout {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl GroupLayout {
    pub fn new(sizes: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &k in sizes {
            acc += k;
            offsets.push(acc);
        }
        GroupLayout {
            sizes: sizes.to_vec(),
            offsets,
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_groups(&self) -> usize {
        self.sizes.len()
    }

    pub fn total_users(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn index(&self, group: usize, user: usize) -> usize {
        debug_assert!(user < self.sizes[group]);
        self.offsets[group] + user
    }

    pub fn range(&self, group: usize) -> Range<usize> {
        self.offsets[group]..self.offsets[group + 1]
    }

    /// Group of each flat user index.
    pub fn group_of(&self, index: usize) -> usize {
        // offsets is sorted; partition_point gives the first offset > index
        self.offsets.partition_point(|&o| o <= index) - 1
    }

    pub fn groups(&self) -> impl Iterator<Item = (usize, Range<usize>)> + '_ {
        (0..self.n_groups()).map(move |g| (g, self.range(g)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_watts_normalizes_to_zero() {
        assert_eq!(normalize_power(0.0, -174.0, 2e7), 0.0);
    }

    #[test]
    fn one_watt_over_20mhz() {
        // σ² = 10^((-174 + 73.0103 - 30)/10) W ≈ 7.96e-14 W
        let sigma2 = noise_power_watts(-174.0, 2e7);
        assert!((sigma2 / 7.962e-14 - 1.0).abs() < 1e-3, "{sigma2}");
        let p = normalize_power(1.0, -174.0, 2e7);
        assert!((p / 1.256e13 - 1.0).abs() < 1e-3, "{p}");
    }

    #[test]
    fn normalize_is_linear() {
        let a = normalize_power(0.3, -170.0, 1e6);
        let b = normalize_power(0.7, -170.0, 1e6);
        let c = normalize_power(1.0, -170.0, 1e6);
        assert!((a + b - c).abs() <= 1e-12 * c);
    }

    #[test]
    fn cell_edge_training_snr() {
        let cfg = SystemConfig::reference_cell(100, vec![1], 40.0, 1.0);
        let snr = cfg.cell_edge_snr_db(cfg.ul_power_caps[0]);
        assert!((snr + 5.8).abs() < 0.1, "{snr}");
    }

    #[test]
    fn feasibility_examples() {
        let mut cfg = SystemConfig::reference_cell(100, vec![50, 50], 40.0, 1.0);
        let f = cfg.scheme_feasible(SchemeId::ZfUndp);
        assert!(!f.feasible);
        assert_eq!(
            f.reason,
            Some(Infeasible::TooFewAntennas {
                n_antennas: 100,
                nulled: 100
            })
        );

        cfg.group_sizes = vec![10, 10, 10];
        cfg.ul_power_caps = vec![1.0; 30];
        assert!(cfg.scheme_feasible(SchemeId::ZfMucp).feasible);

        let cfg = SystemConfig::reference_cell(40, vec![20, 20, 20], 40.0, 1.0);
        let f = cfg.scheme_feasible(SchemeId::ZfMudp);
        assert_eq!(
            f.reason,
            Some(Infeasible::TooFewAntennas {
                n_antennas: 40,
                nulled: 40
            })
        );
    }

    #[test]
    fn coherence_gate() {
        let mut cfg = SystemConfig::reference_cell(400, vec![10, 10], 40.0, 1.0);
        cfg.coherence_symbols = 20;
        assert!(!cfg.scheme_feasible(SchemeId::MrtUndp).feasible);
        assert!(cfg.scheme_feasible(SchemeId::MrtMucp).feasible);
        cfg.coherence_symbols = 21;
        assert!(cfg.scheme_feasible(SchemeId::MrtUndp).feasible);
    }

    #[test]
    fn feasibility_is_monotone_in_antennas() {
        for groups in [vec![3, 5], vec![4, 4, 4], vec![1], vec![7, 2, 9, 1]] {
            let k: usize = groups.iter().sum();
            for scheme in SchemeId::ALL {
                let mut was = false;
                for n in 1..(2 * k + 3) {
                    let cfg = SystemConfig::reference_cell(n, groups.clone(), 1.0, 1.0);
                    let now = cfg.scheme_feasible(scheme).feasible;
                    assert!(!was || now, "{scheme} lost feasibility at N={n}");
                    was = now;
                }
            }
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for id in SchemeId::ALL {
            assert_eq!(id.name().parse::<SchemeId>().unwrap(), id);
            assert_eq!(format!("{id:?}").parse::<SchemeId>().unwrap(), id);
        }
        assert!("mrt-foo".parse::<SchemeId>().is_err());
    }

    #[test]
    fn layout_indices() {
        let l = GroupLayout::new(&[2, 3, 1]);
        assert_eq!(l.total_users(), 6);
        assert_eq!(l.index(1, 2), 4);
        assert_eq!(l.range(2), 5..6);
        let groups: Vec<_> = (0..6).map(|i| l.group_of(i)).collect();
        assert_eq!(groups, [0, 0, 1, 1, 1, 2]);
    }

    #[test]
    fn validate_rejects_bad_geometry() {
        let mut cfg = SystemConfig::reference_cell(10, vec![2], 1.0, 1.0);
        assert!(cfg.validate().is_ok());
        cfg.exclusion_radius_m = 600.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SystemConfig::reference_cell(10, vec![2, 0], 1.0, 1.0);
        cfg.ul_power_caps = vec![1.0; 2];
        assert!(cfg.validate().is_err());
    }
}
