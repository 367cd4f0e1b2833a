//! Seeded Monte Carlo engine producing ergodic SE / EE estimates.
//!
//! Realization `r` always draws its channel from
//! `substream_seed(master_seed, r)`, so every architecture and every rho
//! value sees the same channels. Realizations may run on several threads;
//! results are reduced in realization order, which makes the output
//! independent of the worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::architecture::{ArchitectureRegistry, Transmitter};
use crate::channel::{
    one_ring_covariance, sample_group_channels, ChannelMatrix, CovarianceMatrix, UserGroup,
};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::linalg::linear_to_db;
use crate::power::energy_efficiency;
use crate::precoding::{allocate_beams, sum_spectral_efficiency, GroupBeamAllocation, LinkGains};
use crate::rng::substream_seed;

/// Number of RF chains and beams per group for one hybrid configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RfPlan {
    pub n_rf: usize,
    pub beams: Vec<usize>,
    /// Appended to architecture names in result labels; empty for the
    /// primary plan.
    pub label_suffix: String,
}

/// A validated configuration with its covariances and square-root factors.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub groups: Vec<(UserGroup, CovarianceMatrix)>,
}

impl Scenario {
    pub fn prepare(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let mut groups = Vec::with_capacity(config.groups.len());
        for g in &config.groups {
            let cov = one_ring_covariance(
                &config.geometry,
                g.center_angle_deg,
                g.angular_spread_deg,
                config.quad_points,
            )?;
            cov.sqrt_factor()?;
            groups.push((*g, cov));
        }
        Ok(Scenario { config, groups })
    }

    pub fn n_antennas(&self) -> usize {
        self.config.geometry.n_antennas
    }

    pub fn n_users(&self) -> usize {
        self.config.n_users()
    }

    pub fn plans(&self) -> Vec<RfPlan> {
        let mut plans = vec![RfPlan {
            n_rf: self.config.n_rf,
            beams: self.config.groups.iter().map(|g| g.n_beams).collect(),
            label_suffix: String::new(),
        }];
        plans.extend(self.config.variants.iter().map(|v| RfPlan {
            n_rf: v.n_rf,
            beams: v.beams.clone(),
            label_suffix: format!("@nrf{}", v.n_rf),
        }));
        plans
    }

    pub fn allocate(&self, plan: &RfPlan) -> Result<GroupBeamAllocation> {
        if plan.beams.len() != self.groups.len() {
            return Err(Error::Dimension(format!(
                "plan has {} beam counts for {} groups",
                plan.beams.len(),
                self.groups.len()
            )));
        }
        let groups: Vec<_> = self
            .groups
            .iter()
            .zip(&plan.beams)
            .map(|((g, r), &b)| {
                let mut g = *g;
                g.n_beams = b;
                (g, r.clone())
            })
            .collect();
        allocate_beams(&groups, plan.n_rf)
    }

    pub fn channel(&self, realization: usize) -> Result<ChannelMatrix> {
        sample_group_channels(
            &self.groups,
            substream_seed(self.config.master_seed, realization as u64),
        )
    }
}

/// `sigma^2 = K / rho`.
pub fn noise_variance(n_users: usize, rho_db: f64) -> f64 {
    n_users as f64 / 10f64.powf(rho_db / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub architecture: String,
    pub n_rf: usize,
    pub rho_db: f64,
    pub sum_se: f64,
    pub se_stderr: f64,
    pub ee_bits_per_joule: f64,
    /// 10 log10 of each user's mean linear SINR.
    pub per_user_sinr_db: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResultTable {
    pub rows: Vec<PointResult>,
}

impl ResultTable {
    pub fn labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.architecture.as_str()) {
                out.push(&r.architecture);
            }
        }
        out
    }

    pub fn series(&self, label: &str) -> Vec<&PointResult> {
        self.rows.iter().filter(|r| r.architecture == label).collect()
    }
}

pub struct Entry {
    pub label: String,
    pub transmitter: Box<dyn Transmitter>,
}

/// Scenario plus instantiated transmitters.
pub struct Simulator {
    pub scenario: Scenario,
    pub entries: Vec<Entry>,
}

// per realization, per entry: (sum SE, per-user SINR) at each rho
type RealizationOutput = Vec<Result<Vec<(f64, Vec<f64>)>>>;

impl Simulator {
    /// Builds every configured architecture; any configuration error is
    /// returned before simulation starts.
    pub fn new(config: ScenarioConfig, registry: &ArchitectureRegistry) -> Result<Self> {
        let scenario = Scenario::prepare(config)?;
        let plans = scenario.plans();
        let mut entries = Vec::new();
        for name in &scenario.config.architectures {
            let arch = registry.get(name)?;
            let targets = if arch.is_hybrid() { &plans[..] } else { &plans[..1] };
            for plan in targets {
                let label = if arch.is_hybrid() {
                    format!("{name}{}", plan.label_suffix)
                } else {
                    name.clone()
                };
                let transmitter = arch.build(&scenario, plan)?;
                entries.push(Entry { label, transmitter });
            }
        }
        Ok(Simulator { scenario, entries })
    }

    fn realization(&self, r: usize, entries: &[&Entry], rhos: &[f64]) -> RealizationOutput {
        let k = self.scenario.n_users();
        let h = match self.scenario.channel(r) {
            Ok(h) => h,
            Err(e) => {
                let shared = e.to_string();
                return entries
                    .iter()
                    .map(|_| Err(Error::Dimension(format!("channel draw: {shared}"))))
                    .collect();
            }
        };
        entries
            .iter()
            .map(|entry| {
                let p = entry.transmitter.precode(&h)?;
                let gains = LinkGains::new(&h, &p.composite)?;
                Ok(rhos
                    .iter()
                    .map(|&rho| {
                        let report = gains.sinr(noise_variance(k, rho));
                        (sum_spectral_efficiency(&report), report.sinr)
                    })
                    .collect())
            })
            .collect()
    }

    fn evaluate(&self, entries: &[&Entry], rhos: &[f64], workers: usize) -> Result<ResultTable> {
        let cfg = &self.scenario.config;
        let m = cfg.realizations;
        let run = || -> Vec<RealizationOutput> {
            (0..m)
                .into_par_iter()
                .map(|r| self.realization(r, entries, rhos))
                .collect()
        };
        let mut outputs: Vec<RealizationOutput> = if workers <= 1 {
            (0..m).map(|r| self.realization(r, entries, rhos)).collect()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?
                .install(run)
        };

        let k = self.scenario.n_users();
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for (ei, entry) in entries.iter().enumerate() {
            let mut per_real: Vec<Vec<(f64, Vec<f64>)>> = Vec::with_capacity(m);
            let mut failed = false;
            for (r, out) in outputs.iter_mut().enumerate() {
                match std::mem::replace(&mut out[ei], Ok(Vec::new())) {
                    Ok(v) => per_real.push(v),
                    Err(e) => {
                        failed = true;
                        failures.push(Error::Realization {
                            architecture: entry.label.clone(),
                            realization: r,
                            source: Box::new(e),
                        });
                    }
                }
            }
            if failed {
                continue;
            }
            let n_rf = entry.transmitter.n_rf();
            for (pi, &rho) in rhos.iter().enumerate() {
                let mut sum = 0.0;
                let mut sinr_sum = vec![0.0; k];
                for v in &per_real {
                    sum += v[pi].0;
                    for (acc, g) in sinr_sum.iter_mut().zip(&v[pi].1) {
                        *acc += g;
                    }
                }
                let mean = sum / m as f64;
                let se_stderr = if m > 1 {
                    let ss: f64 = per_real.iter().map(|v| (v[pi].0 - mean).powi(2)).sum();
                    (ss / (m - 1) as f64).sqrt() / (m as f64).sqrt()
                } else {
                    0.0
                };
                rows.push(PointResult {
                    architecture: entry.label.clone(),
                    n_rf,
                    rho_db: rho,
                    sum_se: mean,
                    se_stderr,
                    ee_bits_per_joule: energy_efficiency(mean, &cfg.power, n_rf),
                    per_user_sinr_db: sinr_sum
                        .iter()
                        .map(|s| linear_to_db(s / m as f64))
                        .collect(),
                    realizations: m,
                    seed: cfg.master_seed,
                });
            }
        }
        if failures.is_empty() {
            Ok(ResultTable { rows })
        } else {
            Err(Error::PointFailures(failures))
        }
    }

    /// Architectures x rho grid, architecture-major.
    pub fn sweep(&self, workers: usize) -> Result<ResultTable> {
        let entries: Vec<&Entry> = self.entries.iter().collect();
        self.evaluate(&entries, &self.scenario.config.rho_grid_db, workers)
    }

    /// Evaluates the entry labelled `label` at arbitrary rho values.
    pub fn run_points(&self, label: &str, rhos: &[f64], workers: usize) -> Result<ResultTable> {
        let entry = self
            .entries
            .iter()
            .find(|e| e.label == label)
            .ok_or_else(|| Error::UnknownArchitecture(label.to_string()))?;
        self.evaluate(&[entry], rhos, workers)
    }

    pub fn run_point(&self, label: &str, rho_db: f64, workers: usize) -> Result<PointResult> {
        let mut t = self.run_points(label, &[rho_db], workers)?;
        Ok(t.rows.remove(0))
    }

    /// Per-realization sum SE of one entry at one rho.
    pub fn realization_se(&self, label: &str, rho_db: f64) -> Result<Vec<f64>> {
        let entry = self
            .entries
            .iter()
            .find(|e| e.label == label)
            .ok_or_else(|| Error::UnknownArchitecture(label.to_string()))?;
        (0..self.scenario.config.realizations)
            .map(|r| {
                let mut out = self.realization(r, &[entry], &[rho_db]);
                out.remove(0).map(|v| v[0].0)
            })
            .collect()
    }
}

/// Runs one (architecture, rho) point with the built-in registry. Only the
/// named architecture is built.
pub fn run_point(cfg: &ScenarioConfig, architecture: &str, rho_db: f64) -> Result<PointResult> {
    let mut cfg = cfg.clone();
    cfg.architectures = vec![architecture.to_string()];
    let sim = Simulator::new(cfg, &ArchitectureRegistry::with_builtins())?;
    sim.run_point(architecture, rho_db, 1)
}

/// Full sweep with the built-in registry.
pub fn sweep(cfg: &ScenarioConfig, workers: usize) -> Result<ResultTable> {
    Simulator::new(cfg.clone(), &ArchitectureRegistry::with_builtins())?.sweep(workers)
}
