//! Scenario files.
//!
//! A scenario is a TOML document with the sections below. Every key except
//! `array.antennas`, `rf.chains` and the `[[group]]` entries is optional.
//!
//! ```toml
//! [array]
//! antennas = 64               # N
//! spacing_wavelengths = 0.5   # d / lambda
//! quad_points = 512           # one-ring quadrature nodes (>= 64)
//!
//! [rf]
//! chains = 32                 # N_RF
//! profile = "sub5ghz"         # ideal | sub5ghz | mmwave | custom
//! zero_forcing = "per_group"  # per_group | joint
//! # divider_split = [...]     # N positive split ratios (unequal dividers)
//!
//! # [rf.losses]               # only with profile = "custom"
//! # divider_combiner_db = 0.5
//! # hybrid_coupler_db = 0.15
//! # variable_phase_shifter_db = 3.5
//! # fixed_phase_shifter_db = 0.5
//!
//! # [[rf.variant]]            # extra hybrid runs with another N_RF
//! # chains = 64
//! # beams = [20, 24, 20]      # b_g per group
//!
//! [[group]]
//! center_deg = -45.0
//! spread_deg = 15.0
//! users = 4
//! beams = 10
//!
//! [sweep]
//! architectures = ["fully_digital", "fc_ideal", "fc_realistic", "butler_ideal", "butler_realistic"]
//! rho_db = [0.0, 5.0, 10.0]
//! realizations = 1000
//! seed = 1
//!
//! [power]
//! pa_output_w = 40.0          # or pa_output_dbm = 46.0
//! pa_efficiency = 0.39
//! per_chain_w = 1.0
//! synthesizer_w = 2.0
//! bandwidth_hz = 20e6
//! ```

use serde::{Deserialize, Serialize};

use crate::channel::{ArrayGeometry, UserGroup, DEFAULT_QUAD_POINTS, MIN_QUAD_POINTS};
use crate::error::{Error, Result};
use crate::power::{dbm_to_watts, PowerModel};
use crate::rf::LossProfile;

pub const DEFAULT_SPREAD_DEG: f64 = 15.0;
pub const DEFAULT_REALIZATIONS: usize = 1000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_ARCHITECTURES: [&str; 5] = [
    "fully_digital",
    "fc_ideal",
    "fc_realistic",
    "butler_ideal",
    "butler_realistic",
];

/// 0, 2.5, ..., 30 dB.
pub fn default_rho_grid() -> Vec<f64> {
    (0..=12).map(|i| 2.5 * i as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ZfMode {
    #[default]
    PerGroup,
    Joint,
}

/// An additional hybrid configuration evaluated next to the primary one.
#[derive(Debug, Clone, PartialEq)]
pub struct RfVariant {
    pub n_rf: usize,
    pub beams: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: ArrayGeometry,
    pub quad_points: usize,
    pub groups: Vec<UserGroup>,
    pub n_rf: usize,
    pub variants: Vec<RfVariant>,
    /// `ideal`, `sub5ghz`, `mmwave` or `custom`.
    pub profile_name: String,
    pub profile: LossProfile,
    pub divider_split: Option<Vec<f64>>,
    pub zf_mode: ZfMode,
    pub architectures: Vec<String>,
    pub rho_grid_db: Vec<f64>,
    pub realizations: usize,
    pub master_seed: u64,
    pub power: PowerModel,
}

impl ScenarioConfig {
    pub fn n_users(&self) -> usize {
        self.groups.iter().map(|g| g.n_users).sum()
    }

    /// Checks every cross-field constraint; field paths are reported as in
    /// the file.
    pub fn validate(&self) -> Result<()> {
        let n = self.geometry.n_antennas;
        let k = self.n_users();
        if self.groups.is_empty() {
            return Err(cfg_err("group: at least one [[group]] is required"));
        }
        if self.quad_points < MIN_QUAD_POINTS {
            return Err(cfg_err(format!(
                "array.quad_points: {} < {MIN_QUAD_POINTS}",
                self.quad_points
            )));
        }
        let check_plan = |what: &str, n_rf: usize, beams: &mut dyn Iterator<Item = usize>| {
            let total: usize = beams.sum();
            if n_rf > n {
                return Err(cfg_err(format!("{what}: N_RF = {n_rf} exceeds N = {n}")));
            }
            if k > n_rf {
                return Err(cfg_err(format!("{what}: K = {k} users exceed N_RF = {n_rf}")));
            }
            if total > n_rf {
                return Err(cfg_err(format!(
                    "{what}: infeasible, groups request {total} beams but N_RF = {n_rf}"
                )));
            }
            Ok(())
        };
        check_plan("rf.chains", self.n_rf, &mut self.groups.iter().map(|g| g.n_beams))?;
        for (vi, v) in self.variants.iter().enumerate() {
            if v.beams.len() != self.groups.len() {
                return Err(cfg_err(format!(
                    "rf.variant[{vi}].beams: {} entries for {} groups",
                    v.beams.len(),
                    self.groups.len()
                )));
            }
            for (gi, (b, g)) in v.beams.iter().zip(&self.groups).enumerate() {
                if *b < g.n_users {
                    return Err(cfg_err(format!(
                        "rf.variant[{vi}].beams[{gi}]: {b} beams for {} users",
                        g.n_users
                    )));
                }
            }
            check_plan(&format!("rf.variant[{vi}]"), v.n_rf, &mut v.beams.iter().copied())?;
        }
        if let Some(split) = &self.divider_split {
            if split.len() != n || split.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                return Err(cfg_err(format!(
                    "rf.divider_split: need {n} positive ratios"
                )));
            }
        }
        self.profile
            .validate()
            .map_err(|e| cfg_err(format!("rf.losses: {e}")))?;
        if self.rho_grid_db.is_empty() {
            return Err(cfg_err("sweep.rho_db: grid must not be empty"));
        }
        if self.rho_grid_db.iter().any(|r| !r.is_finite()) {
            return Err(cfg_err("sweep.rho_db: values must be finite"));
        }
        if self.realizations == 0 {
            return Err(cfg_err("sweep.realizations: must be at least 1"));
        }
        self.power
            .validate()
            .map_err(|e| cfg_err(format!("power: {e}")))?;
        Ok(())
    }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    array: RawArray,
    rf: RawRf,
    #[serde(default)]
    group: Vec<RawGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep: Option<RawSweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    power: Option<RawPower>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArray {
    antennas: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    spacing_wavelengths: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quad_points: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRf {
    chains: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zero_forcing: Option<ZfMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    divider_split: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    losses: Option<RawLosses>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    variant: Vec<RawVariant>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLosses {
    divider_combiner_db: f64,
    hybrid_coupler_db: f64,
    variable_phase_shifter_db: f64,
    fixed_phase_shifter_db: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariant {
    chains: usize,
    beams: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    center_deg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    spread_deg: Option<f64>,
    users: usize,
    beams: usize,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    #[serde(skip_serializing_if = "Option::is_none")]
    architectures: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    realizations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    #[serde(skip_serializing_if = "Option::is_none")]
    pa_output_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pa_output_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pa_efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_chain_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    synthesizer_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth_hz: Option<f64>,
}

/// Parses and validates a scenario, applying defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<ScenarioConfig> {
    let geometry = ArrayGeometry::new(
        raw.array.antennas,
        raw.array.spacing_wavelengths.unwrap_or(0.5),
    )
    .map_err(|e| cfg_err(format!("array: {e}")))?;

    let mut groups = Vec::with_capacity(raw.group.len());
    for (i, g) in raw.group.iter().enumerate() {
        let group = UserGroup::new(
            g.center_deg,
            g.spread_deg.unwrap_or(DEFAULT_SPREAD_DEG),
            g.users,
            g.beams,
        )
        .map_err(|e| cfg_err(format!("group[{i}]: {e}")))?;
        groups.push(group);
    }

    let profile_name = raw.rf.profile.clone().unwrap_or_else(|| "sub5ghz".into());
    let profile = match (profile_name.as_str(), &raw.rf.losses) {
        ("custom", Some(l)) => LossProfile::custom(
            l.divider_combiner_db,
            l.hybrid_coupler_db,
            l.variable_phase_shifter_db,
            l.fixed_phase_shifter_db,
        )
        .map_err(|e| cfg_err(format!("rf.losses: {e}")))?,
        ("custom", None) => {
            return Err(cfg_err("rf.losses: required when rf.profile = \"custom\""))
        }
        (name, None) => LossProfile::builtin(name)
            .ok_or_else(|| cfg_err(format!("rf.profile: unknown profile `{name}`")))?,
        (name, Some(_)) => {
            return Err(cfg_err(format!(
                "rf.losses: only allowed with profile = \"custom\", not `{name}`"
            )))
        }
    };

    let variants = raw
        .rf
        .variant
        .iter()
        .map(|v| RfVariant {
            n_rf: v.chains,
            beams: v.beams.clone(),
        })
        .collect();

    let sweep = raw.sweep.unwrap_or_default();
    let p = raw.power.unwrap_or_default();
    let defaults = PowerModel::default();
    let pa_output_w = match (p.pa_output_w, p.pa_output_dbm) {
        (Some(_), Some(_)) => {
            return Err(cfg_err(
                "power: give either pa_output_w or pa_output_dbm, not both",
            ))
        }
        (Some(w), None) => w,
        (None, Some(dbm)) => dbm_to_watts(dbm),
        (None, None) => defaults.pa_output_w,
    };
    let power = PowerModel {
        pa_output_w,
        pa_efficiency: p.pa_efficiency.unwrap_or(defaults.pa_efficiency),
        per_chain_w: p.per_chain_w.unwrap_or(defaults.per_chain_w),
        synthesizer_w: p.synthesizer_w.unwrap_or(defaults.synthesizer_w),
        bandwidth_hz: p.bandwidth_hz.unwrap_or(defaults.bandwidth_hz),
    };

    let cfg = ScenarioConfig {
        geometry,
        quad_points: raw.array.quad_points.unwrap_or(DEFAULT_QUAD_POINTS),
        groups,
        n_rf: raw.rf.chains,
        variants,
        profile_name,
        profile,
        divider_split: raw.rf.divider_split,
        zf_mode: raw.rf.zero_forcing.unwrap_or_default(),
        architectures: sweep
            .architectures
            .unwrap_or_else(|| DEFAULT_ARCHITECTURES.iter().map(|s| s.to_string()).collect()),
        rho_grid_db: sweep.rho_db.unwrap_or_else(default_rho_grid),
        realizations: sweep.realizations.unwrap_or(DEFAULT_REALIZATIONS),
        master_seed: sweep.seed.unwrap_or(DEFAULT_SEED),
        power,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Writes a fully resolved scenario back out; `parse_config` of the result
/// reproduces `cfg`.
pub fn to_toml_string(cfg: &ScenarioConfig) -> String {
    let losses = (cfg.profile_name == "custom").then(|| RawLosses {
        divider_combiner_db: cfg.profile.divider_combiner_db,
        hybrid_coupler_db: cfg.profile.hybrid_coupler_db,
        variable_phase_shifter_db: cfg.profile.variable_phase_shifter_db,
        fixed_phase_shifter_db: cfg.profile.fixed_phase_shifter_db,
    });
    let raw = RawConfig {
        array: RawArray {
            antennas: cfg.geometry.n_antennas,
            spacing_wavelengths: Some(cfg.geometry.spacing_wavelengths),
            quad_points: Some(cfg.quad_points),
        },
        rf: RawRf {
            chains: cfg.n_rf,
            profile: Some(cfg.profile_name.clone()),
            zero_forcing: Some(cfg.zf_mode),
            divider_split: cfg.divider_split.clone(),
            losses,
            variant: cfg
                .variants
                .iter()
                .map(|v| RawVariant {
                    chains: v.n_rf,
                    beams: v.beams.clone(),
                })
                .collect(),
        },
        group: cfg
            .groups
            .iter()
            .map(|g| RawGroup {
                center_deg: g.center_angle_deg,
                spread_deg: Some(g.angular_spread_deg),
                users: g.n_users,
                beams: g.n_beams,
            })
            .collect(),
        sweep: Some(RawSweep {
            architectures: Some(cfg.architectures.clone()),
            rho_db: Some(cfg.rho_grid_db.clone()),
            realizations: Some(cfg.realizations),
            seed: Some(cfg.master_seed),
        }),
        power: Some(RawPower {
            pa_output_w: Some(cfg.power.pa_output_w),
            pa_output_dbm: None,
            pa_efficiency: Some(cfg.power.pa_efficiency),
            per_chain_w: Some(cfg.power.per_chain_w),
            synthesizer_w: Some(cfg.power.synthesizer_w),
            bandwidth_hz: Some(cfg.power.bandwidth_hz),
        }),
    };
    toml::to_string(&raw).expect("scenario serializes to TOML")
}
