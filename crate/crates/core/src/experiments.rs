//! Configuration files, parameter sweeps, scheme recommendation, and
//! result tables.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ensemble_drop;
use crate::config::{
    reference_pathloss, SchemeId, SystemConfig, REFERENCE_BW_HZ, REFERENCE_CELL_RADIUS_M,
    REFERENCE_COHERENCE_SYMBOLS, REFERENCE_EXCLUSION_RADIUS_M, REFERENCE_NOISE_PSD_DBM_PER_HZ,
    REFERENCE_PATHLOSS_EXPONENT,
};
use crate::error::{Error, Result};
use crate::mmf::optimize_pilot_length;
use crate::omnicast::{omnicast_se, DEFAULT_FADING_SAMPLES};
use crate::rng::{derive_seed, domain};
use crate::validation::{compare_bound, DEFAULT_SAMPLES};

pub const DEFAULT_DROPS: usize = 100;
pub const INFEASIBLE: &str = "infeasible";

/// Scalar applied to every user, or one value per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerUser {
    Same(f64),
    Each(Vec<f64>),
}

fn default_coherence() -> usize {
    REFERENCE_COHERENCE_SYMBOLS
}
fn default_dl() -> f64 {
    40.0
}
fn default_ul() -> PerUser {
    PerUser::Same(1.0)
}
fn default_bw() -> f64 {
    REFERENCE_BW_HZ
}
fn default_psd() -> f64 {
    REFERENCE_NOISE_PSD_DBM_PER_HZ
}
fn default_radius() -> f64 {
    REFERENCE_CELL_RADIUS_M
}
fn default_exclusion() -> f64 {
    REFERENCE_EXCLUSION_RADIUS_M
}
fn default_exponent() -> f64 {
    REFERENCE_PATHLOSS_EXPONENT
}
fn default_pathloss_ref() -> f64 {
    reference_pathloss()
}

/// On-disk system description. Keys mirror [`SystemConfig`]; omitted
/// keys fall back to the reference cell with 40 W downlink and 1 W pilots.
/// Powers are in watts unless `powers_normalized` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n_antennas: usize,
    pub group_sizes: Vec<usize>,
    #[serde(default = "default_coherence")]
    pub coherence_symbols: usize,
    #[serde(default = "default_dl")]
    pub dl_power_budget: f64,
    #[serde(default = "default_ul")]
    pub ul_power_caps: PerUser,
    #[serde(default)]
    pub powers_normalized: bool,
    #[serde(default = "default_bw")]
    pub carrier_bw_hz: f64,
    #[serde(default = "default_psd")]
    pub noise_psd_dbm_per_hz: f64,
    #[serde(default = "default_radius")]
    pub cell_radius_m: f64,
    #[serde(default = "default_exclusion")]
    pub exclusion_radius_m: f64,
    #[serde(default = "default_exponent")]
    pub pathloss_exponent: f64,
    #[serde(default = "default_pathloss_ref")]
    pub pathloss_ref: f64,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn into_system_config(self) -> Result<SystemConfig> {
        let n_users: usize = self.group_sizes.iter().sum();
        let caps = match self.ul_power_caps {
            PerUser::Same(p) => vec![p; n_users],
            PerUser::Each(v) => v,
        };
        let mut cfg = SystemConfig {
            n_antennas: self.n_antennas,
            group_sizes: self.group_sizes,
            coherence_symbols: self.coherence_symbols,
            dl_power_budget: self.dl_power_budget,
            ul_power_caps: caps,
            carrier_bw_hz: self.carrier_bw_hz,
            noise_psd_dbm_per_hz: self.noise_psd_dbm_per_hz,
            cell_radius_m: self.cell_radius_m,
            exclusion_radius_m: self.exclusion_radius_m,
            pathloss_exponent: self.pathloss_exponent,
            pathloss_ref: self.pathloss_ref,
        };
        if !self.powers_normalized {
            cfg.dl_power_budget = cfg.normalize(cfg.dl_power_budget);
            let caps: Vec<f64> = cfg.ul_power_caps.iter().map(|&p| cfg.normalize(p)).collect();
            cfg.ul_power_caps = caps;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    NAntennas,
    DlPower,
    UlCap,
    NGroups,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::NAntennas => "n_antennas",
            SweepVariable::DlPower => "dl_power",
            SweepVariable::UlCap => "ul_cap",
            SweepVariable::NGroups => "n_groups",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SweepVariable::NAntennas,
            SweepVariable::DlPower,
            SweepVariable::UlCap,
            SweepVariable::NGroups,
        ]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown sweep variable `{s}`")))
    }
}

/// How power grid values are read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerUnit {
    #[default]
    Watts,
    Normalized,
    /// SNR at the cell edge in dB.
    CellEdgeSnrDb,
}

fn all_schemes() -> Vec<SchemeId> {
    SchemeId::ALL.to_vec()
}
fn default_drops() -> usize {
    DEFAULT_DROPS
}
fn default_mc_samples() -> usize {
    DEFAULT_SAMPLES
}
fn default_fading_samples() -> usize {
    DEFAULT_FADING_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    #[serde(default = "all_schemes")]
    pub schemes: Vec<SchemeId>,
    #[serde(default = "default_drops")]
    pub n_drops: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mc_validate: bool,
    #[serde(default)]
    pub omnicast: bool,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "default_fading_samples")]
    pub omnicast_fading_samples: usize,
    #[serde(default)]
    pub power_unit: PowerUnit,
}

impl SweepSpec {
    /// A one-point sweep that evaluates `config` as given.
    pub fn single_point(config: &SystemConfig) -> Self {
        SweepSpec {
            variable: SweepVariable::NAntennas,
            grid: vec![config.n_antennas as f64],
            schemes: all_schemes(),
            n_drops: DEFAULT_DROPS,
            seed: 0,
            mc_validate: false,
            omnicast: false,
            mc_samples: DEFAULT_SAMPLES,
            omnicast_fading_samples: DEFAULT_FADING_SAMPLES,
            power_unit: PowerUnit::Watts,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig("sweep grid is empty".into()));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("sweep grid values must be finite".into()));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("sweep grid must be strictly increasing".into()));
        }
        if self.n_drops == 0 {
            return Err(Error::InvalidConfig("n_drops must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("no schemes selected".into()));
        }
        if self.mc_validate && self.mc_samples < crate::validation::MIN_SAMPLES {
            return Err(Error::InvalidConfig(format!(
                "mc_samples must be at least {}",
                crate::validation::MIN_SAMPLES
            )));
        }
        if self.omnicast && self.omnicast_fading_samples == 0 {
            return Err(Error::InvalidConfig("omnicast_fading_samples must be positive".into()));
        }
        Ok(())
    }

    /// Selected schemes in enum order, without repeats.
    pub fn ordered_schemes(&self) -> Vec<SchemeId> {
        SchemeId::ALL
            .into_iter()
            .filter(|s| self.schemes.contains(s))
            .collect()
    }

    /// `base` with the sweep variable set to `value`.
    ///
    /// Changing the group count keeps the first group's size and first
    /// uplink cap for every group.
    pub fn apply(&self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let count = |what: &str| -> Result<usize> {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidConfig(format!("{what} must be a positive integer, got {value}")))
            }
        };
        let power = |cfg: &SystemConfig| match self.power_unit {
            PowerUnit::Watts => cfg.normalize(value),
            PowerUnit::Normalized => value,
            PowerUnit::CellEdgeSnrDb => cfg.power_for_cell_edge_snr(value),
        };
        let mut cfg = base.clone();
        match self.variable {
            SweepVariable::NAntennas => cfg.n_antennas = count("n_antennas")?,
            SweepVariable::DlPower => cfg.dl_power_budget = power(&cfg),
            SweepVariable::UlCap => {
                let p = power(&cfg);
                cfg.ul_power_caps.iter_mut().for_each(|c| *c = p);
            }
            SweepVariable::NGroups => {
                let g = count("n_groups")?;
                let size = base.group_sizes[0];
                cfg.group_sizes = vec![size; g];
                cfg.ul_power_caps = vec![base.ul_power_caps[0]; g * size];
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub grid_variable: SweepVariable,
    pub grid_value: f64,
    pub scheme: SchemeId,
    /// `None` when no drop was feasible.
    pub mean_min_se: Option<f64>,
    pub std_min_se: Option<f64>,
    pub mean_tau_star: Option<f64>,
    pub feasible_fraction: f64,
    /// Largest relative gap between closed-form and Monte Carlo SINR on
    /// the grid point's first drop.
    pub mc_rel_dev: Option<f64>,
    pub omnicast_se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub mc_validate: bool,
    pub omnicast: bool,
    pub rows: Vec<SweepRow>,
}

/// Min-SE statistics of one scheme over an ensemble of drops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub scheme: SchemeId,
    pub mean_min_se: Option<f64>,
    pub std_min_se: Option<f64>,
    pub mean_tau_star: Option<f64>,
    pub feasible_fraction: f64,
}

fn aggregate(scheme: SchemeId, outcomes: &[Option<(f64, usize)>]) -> EnsembleStats {
    let ok: Vec<(f64, usize)> = outcomes.iter().flatten().copied().collect();
    let feasible_fraction = ok.len() as f64 / outcomes.len() as f64;
    if ok.is_empty() {
        return EnsembleStats {
            scheme,
            mean_min_se: None,
            std_min_se: None,
            mean_tau_star: None,
            feasible_fraction,
        };
    }
    let n = ok.len() as f64;
    let mean = ok.iter().map(|v| v.0).sum::<f64>() / n;
    let std = if ok.len() > 1 {
        (ok.iter().map(|v| (v.0 - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    EnsembleStats {
        scheme,
        mean_min_se: Some(mean),
        std_min_se: Some(std),
        mean_tau_star: Some(ok.iter().map(|v| v.1 as f64).sum::<f64>() / n),
        feasible_fraction,
    }
}

/// Solves every scheme on drops `0..n_drops` of the ensemble rooted at
/// `seed`.
pub fn ensemble_min_se(
    config: &SystemConfig,
    schemes: &[SchemeId],
    n_drops: usize,
    seed: u64,
) -> Result<Vec<EnsembleStats>> {
    config.validate()?;
    if n_drops == 0 {
        return Err(Error::InvalidConfig("n_drops must be at least 1".into()));
    }
    let per_drop: Vec<Vec<Option<(f64, usize)>>> = (0..n_drops)
        .into_par_iter()
        .map(|d| {
            let profile = ensemble_drop(config, seed, d);
            schemes
                .iter()
                .map(|&s| {
                    optimize_pilot_length(s, config, &profile.betas)
                        .ok()
                        .map(|sol| (sol.min_se, sol.tau_p))
                })
                .collect()
        })
        .collect();
    Ok(schemes
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let col: Vec<_> = per_drop.iter().map(|d| d[i]).collect();
            aggregate(s, &col)
        })
        .collect())
}

fn mc_rel_dev(
    scheme: SchemeId,
    config: &SystemConfig,
    spec: &SweepSpec,
    point: usize,
) -> Result<Option<f64>> {
    let profile = ensemble_drop(config, spec.seed, 0);
    let Ok(sol) = optimize_pilot_length(scheme, config, &profile.betas) else {
        return Ok(None);
    };
    let seed = derive_seed(spec.seed, &[domain::MC_SAMPLE, point as u64]);
    let report = compare_bound(scheme, config, &profile, &sol, spec.mc_samples, seed)?;
    Ok(Some(report.max_rel_dev()))
}

/// Runs the sweep. Rows come sorted by grid value, then scheme order;
/// the output does not depend on the worker count.
pub fn run_sweep(spec: &SweepSpec, config: &SystemConfig) -> Result<SweepTable> {
    spec.validate()?;
    config.validate()?;
    let schemes = spec.ordered_schemes();
    let mut rows = Vec::with_capacity(spec.grid.len() * schemes.len());
    for (point, &value) in spec.grid.iter().enumerate() {
        let cfg = spec.apply(config, value)?;
        let stats = ensemble_min_se(&cfg, &schemes, spec.n_drops, spec.seed)?;
        let omni = if spec.omnicast {
            Some(omnicast_se(&cfg, spec.n_drops, spec.omnicast_fading_samples, spec.seed)?.se)
        } else {
            None
        };
        for st in stats {
            let mc = if spec.mc_validate && st.mean_min_se.is_some() {
                mc_rel_dev(st.scheme, &cfg, spec, point)?
            } else {
                None
            };
            rows.push(SweepRow {
                grid_variable: spec.variable,
                grid_value: value,
                scheme: st.scheme,
                mean_min_se: st.mean_min_se,
                std_min_se: st.std_min_se,
                mean_tau_star: st.mean_tau_star,
                feasible_fraction: st.feasible_fraction,
                mc_rel_dev: mc,
                omnicast_se: omni,
            });
        }
    }
    Ok(SweepTable {
        mc_validate: spec.mc_validate,
        omnicast: spec.omnicast,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub best_scheme: SchemeId,
    /// Min-SE per scheme; `None` marks an infeasible scheme.
    pub per_scheme_se: BTreeMap<SchemeId, Option<f64>>,
    /// Best minus second-best min-SE; the best value itself when only one
    /// scheme is feasible.
    pub margin: f64,
}

fn pick(per_scheme_se: BTreeMap<SchemeId, Option<f64>>) -> Result<Recommendation> {
    let mut best: Option<(SchemeId, f64)> = None;
    let mut second: Option<f64> = None;
    for s in SchemeId::ALL {
        let Some(Some(v)) = per_scheme_se.get(&s) else { continue };
        match best {
            Some((_, b)) if *v <= b => {
                if second.is_none_or(|x| *v > x) {
                    second = Some(*v);
                }
            }
            _ => {
                second = best.map(|b| b.1);
                best = Some((s, *v));
            }
        }
    }
    let (best_scheme, b) = best.ok_or(Error::NothingFeasible)?;
    Ok(Recommendation {
        best_scheme,
        per_scheme_se,
        margin: b - second.unwrap_or(0.0),
    })
}

/// Scheme with the highest min-SE on one fading profile. Ties go to the
/// earlier scheme in enum order.
pub fn recommend_scheme(config: &SystemConfig, betas: &[f64]) -> Result<Recommendation> {
    config.validate()?;
    let per_scheme_se = SchemeId::ALL
        .into_iter()
        .map(|s| (s, optimize_pilot_length(s, config, betas).ok().map(|sol| sol.min_se)))
        .collect();
    pick(per_scheme_se)
}

/// Like [`recommend_scheme`], ranking by the ensemble-average min-SE.
pub fn recommend_on_ensemble(config: &SystemConfig, n_drops: usize, seed: u64) -> Result<Recommendation> {
    let stats = ensemble_min_se(config, &SchemeId::ALL, n_drops, seed)?;
    pick(stats.into_iter().map(|s| (s.scheme, s.mean_min_se)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidConfig(format!("unknown format `{s}`"))),
        }
    }
}

const BASE_COLUMNS: [&str; 7] = [
    "grid_variable",
    "grid_value",
    "scheme",
    "mean_min_se",
    "std_min_se",
    "mean_tau_star",
    "feasible_fraction",
];

pub fn csv_header(table: &SweepTable) -> Vec<&'static str> {
    let mut h = BASE_COLUMNS.to_vec();
    if table.mc_validate {
        h.push("mc_rel_dev");
    }
    if table.omnicast {
        h.push("omnicast_se");
    }
    h
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| INFEASIBLE.to_string(), |x| x.to_string())
}

fn parse_cell(s: &str) -> std::result::Result<Option<f64>, String> {
    if s == INFEASIBLE {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|_| format!("bad number `{s}`"))
    }
}

/// Writes the table. CSV marks missing values with `infeasible`; JSON
/// uses null.
pub fn emit_results(table: &SweepTable, path: &Path, format: OutputFormat) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_results(table, BufWriter::new(file), format).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        Error::Format { message, .. } => Error::Format {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

/// [`emit_results`] into any writer; errors carry the path `-`.
pub fn write_results<W: Write>(table: &SweepTable, mut out: W, format: OutputFormat) -> Result<()> {
    let path = Path::new("-");
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let fail = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, table).map_err(|e| fail(e.to_string()))?;
            out.write_all(b"\n").map_err(io)?;
            out.flush().map_err(io)
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(csv_header(table)).map_err(|e| fail(e.to_string()))?;
            for r in &table.rows {
                let mut rec = vec![
                    r.grid_variable.name().to_string(),
                    r.grid_value.to_string(),
                    r.scheme.name().to_string(),
                    cell(r.mean_min_se),
                    cell(r.std_min_se),
                    cell(r.mean_tau_star),
                    r.feasible_fraction.to_string(),
                ];
                if table.mc_validate {
                    rec.push(cell(r.mc_rel_dev));
                }
                if table.omnicast {
                    rec.push(cell(r.omnicast_se));
                }
                w.write_record(&rec).map_err(|e| fail(e.to_string()))?;
            }
            w.flush().map_err(io)
        }
    }
}

/// Reads back a file written by [`emit_results`].
pub fn read_results(path: &Path, format: OutputFormat) -> Result<SweepTable> {
    let bad = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        OutputFormat::Json => {
            serde_json::from_reader(BufReader::new(file)).map_err(|e| bad(e.to_string()))
        }
        OutputFormat::Csv => {
            let mut rd = csv::Reader::from_reader(BufReader::new(file));
            let header: Vec<String> = rd
                .headers()
                .map_err(|e| bad(e.to_string()))?
                .iter()
                .map(str::to_string)
                .collect();
            let mc_validate = header.iter().any(|h| h == "mc_rel_dev");
            let omnicast = header.iter().any(|h| h == "omnicast_se");
            let mut table = SweepTable {
                mc_validate,
                omnicast,
                rows: Vec::new(),
            };
            if header != csv_header(&table) {
                return Err(bad(format!("unexpected header {header:?}")));
            }
            for rec in rd.records() {
                let rec = rec.map_err(|e| bad(e.to_string()))?;
                let num = |i: usize| parse_cell(&rec[i]).map_err(&bad);
                let required = |i: usize| num(i)?.ok_or_else(|| bad(format!("missing {}", header[i])));
                let mut next = BASE_COLUMNS.len();
                let mut optional = |on: bool| -> Result<Option<f64>> {
                    if !on {
                        return Ok(None);
                    }
                    next += 1;
                    num(next - 1)
                };
                let mc_rel_dev = optional(mc_validate)?;
                let omnicast_se = optional(omnicast)?;
                table.rows.push(SweepRow {
                    grid_variable: rec[0].parse().map_err(|e: Error| bad(e.to_string()))?,
                    grid_value: required(1)?,
                    scheme: rec[2].parse().map_err(|e: Error| bad(e.to_string()))?,
                    mean_min_se: num(3)?,
                    std_min_se: num(4)?,
                    mean_tau_star: num(5)?,
                    feasible_fraction: required(6)?,
                    mc_rel_dev,
                    omnicast_se,
                });
            }
            Ok(table)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pick_breaks_ties_by_enum_order() {
        let mut m = BTreeMap::new();
        m.insert(SchemeId::MrtUndp, Some(1.0));
        m.insert(SchemeId::ZfUndp, Some(2.0));
        m.insert(SchemeId::MrtMucp, Some(2.0));
        m.insert(SchemeId::ZfMucp, None);
        let r = pick(m).unwrap();
        assert_eq!(r.best_scheme, SchemeId::ZfUndp);
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn pick_margin_and_single_feasible() {
        let mut m = BTreeMap::new();
        m.insert(SchemeId::MrtUndp, Some(1.0));
        m.insert(SchemeId::ZfMucp, Some(3.5));
        m.insert(SchemeId::MrtMucp, Some(2.0));
        let r = pick(m).unwrap();
        assert_eq!(r.best_scheme, SchemeId::ZfMucp);
        assert_eq!(r.margin, 1.5);

        let mut m = BTreeMap::new();
        m.insert(SchemeId::MrtMucp, Some(0.7));
        m.insert(SchemeId::ZfUndp, None);
        assert_eq!(pick(m).unwrap().margin, 0.7);
        assert!(matches!(pick(BTreeMap::new()), Err(Error::NothingFeasible)));
    }

    #[test]
    fn config_file_defaults_and_normalization() {
        let c: ConfigFile = serde_json::from_str(r#"{"n_antennas": 64, "group_sizes": [2, 2]}"#).unwrap();
        let cfg = c.into_system_config().unwrap();
        let reference = SystemConfig::reference_cell(64, vec![2, 2], 40.0, 1.0);
        assert_eq!(cfg, reference);

        let c: ConfigFile = serde_json::from_str(
            r#"{"n_antennas": 8, "group_sizes": [1, 2], "dl_power_budget": 5.0,
                "ul_power_caps": [1.0, 2.0, 3.0], "powers_normalized": true}"#,
        )
        .unwrap();
        let cfg = c.into_system_config().unwrap();
        assert_eq!(cfg.dl_power_budget, 5.0);
        assert_eq!(cfg.ul_power_caps, vec![1.0, 2.0, 3.0]);

        let r: std::result::Result<ConfigFile, _> =
            serde_json::from_str(r#"{"n_antennas": 8, "group_sizes": [1], "bogus": 1}"#);
        assert!(r.is_err());
    }

    #[test]
    fn spec_validation() {
        let base = SystemConfig::reference_cell(16, vec![2, 2], 1.0, 1.0);
        let mut s = SweepSpec::single_point(&base);
        assert!(s.validate().is_ok());
        s.grid = vec![2.0, 1.0];
        assert!(s.validate().is_err());
        s.grid = vec![];
        assert!(s.validate().is_err());
        s.grid = vec![1.0];
        s.n_drops = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn apply_sets_each_variable() {
        let base = SystemConfig::reference_cell(16, vec![3, 3], 1.0, 1.0);
        let mut s = SweepSpec::single_point(&base);
        assert_eq!(s.apply(&base, 32.0).unwrap().n_antennas, 32);
        assert!(s.apply(&base, 32.5).is_err());
        s.variable = SweepVariable::NGroups;
        let c = s.apply(&base, 4.0).unwrap();
        assert_eq!(c.group_sizes, vec![3; 4]);
        assert_eq!(c.ul_power_caps.len(), 12);
        s.variable = SweepVariable::DlPower;
        s.power_unit = PowerUnit::CellEdgeSnrDb;
        let c = s.apply(&base, 3.0).unwrap();
        assert!((c.cell_edge_snr_db(c.dl_power_budget) - 3.0).abs() < 1e-12);
        s.variable = SweepVariable::UlCap;
        s.power_unit = PowerUnit::Normalized;
        assert!(s.apply(&base, 7.0).unwrap().ul_power_caps.iter().all(|&p| p == 7.0));
    }
}
