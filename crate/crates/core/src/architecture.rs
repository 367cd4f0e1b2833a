//! Transmitter architectures behind a common trait, looked up by name.
//!
//! An [`Architecture`] turns a prepared [`Scenario`] and an [`RfPlan`] into a
//! [`Transmitter`], which maps each channel realization to a precoder set.
//! The built-in names are `fully_digital`, `fc_ideal`, `fc_realistic`,
//! `butler_ideal`, `butler_realistic` and `hybrid_identity`.

use std::collections::BTreeMap;

use crate::channel::ChannelMatrix;
use crate::config::ZfMode;
use crate::error::{Error, Result};
use crate::harness::{RfPlan, Scenario};
use crate::precoding::{
    fully_digital_zf, joint_zf, per_group_zf, GroupBeamAllocation, PrecoderSet,
};
use crate::rf::{butler_rf_matrix, fc_dft_network, LossProfile, RfNetwork};

pub trait Transmitter: Send + Sync {
    /// RF chains counted in the power budget.
    fn n_rf(&self) -> usize;
    fn network(&self) -> &RfNetwork;
    fn precode(&self, h: &ChannelMatrix) -> Result<PrecoderSet>;
}

pub trait Architecture: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Hybrid architectures are instantiated once per RF plan.
    fn is_hybrid(&self) -> bool {
        true
    }
    fn build(&self, scenario: &Scenario, plan: &RfPlan) -> Result<Box<dyn Transmitter>>;
}

pub struct DigitalTransmitter {
    network: RfNetwork,
}

impl Transmitter for DigitalTransmitter {
    fn n_rf(&self) -> usize {
        self.network.n_rf_chains()
    }

    fn network(&self) -> &RfNetwork {
        &self.network
    }

    fn precode(&self, h: &ChannelMatrix) -> Result<PrecoderSet> {
        fully_digital_zf(h)
    }
}

pub struct HybridTransmitter {
    network: RfNetwork,
    allocation: GroupBeamAllocation,
    zf_mode: ZfMode,
    /// Treat all users as one group (used with a single all-beam allocation).
    merge_groups: bool,
}

impl HybridTransmitter {
    pub fn new(network: RfNetwork, allocation: GroupBeamAllocation, zf_mode: ZfMode) -> Self {
        HybridTransmitter {
            network,
            allocation,
            zf_mode,
            merge_groups: false,
        }
    }

    pub fn allocation(&self) -> &GroupBeamAllocation {
        &self.allocation
    }
}

impl Transmitter for HybridTransmitter {
    fn n_rf(&self) -> usize {
        self.network.n_rf_chains()
    }

    fn network(&self) -> &RfNetwork {
        &self.network
    }

    fn precode(&self, h: &ChannelMatrix) -> Result<PrecoderSet> {
        let merged;
        let h = if self.merge_groups {
            merged = ChannelMatrix {
                entries: h.entries.clone(),
                group_of_user: vec![0; h.n_users()],
            };
            &merged
        } else {
            h
        };
        match self.zf_mode {
            ZfMode::PerGroup => per_group_zf(h, &self.network, &self.allocation),
            ZfMode::Joint => joint_zf(h, &self.network, &self.allocation),
        }
    }
}

struct FullyDigital;

impl Architecture for FullyDigital {
    fn name(&self) -> &'static str {
        "fully_digital"
    }
    fn description(&self) -> &'static str {
        "one RF chain per antenna, zero forcing on the full channel"
    }
    fn is_hybrid(&self) -> bool {
        false
    }
    fn build(&self, scenario: &Scenario, _plan: &RfPlan) -> Result<Box<dyn Transmitter>> {
        Ok(Box::new(DigitalTransmitter {
            network: RfNetwork::identity(scenario.n_antennas()),
        }))
    }
}

struct FullyConnected {
    realistic: bool,
}

impl Architecture for FullyConnected {
    fn name(&self) -> &'static str {
        if self.realistic {
            "fc_realistic"
        } else {
            "fc_ideal"
        }
    }
    fn description(&self) -> &'static str {
        if self.realistic {
            "fully-connected divider/phase-shifter/combiner network with insertion losses"
        } else {
            "fully-connected network with lossless components (combining loss only)"
        }
    }
    fn build(&self, scenario: &Scenario, plan: &RfPlan) -> Result<Box<dyn Transmitter>> {
        let profile = if self.realistic {
            scenario.config.profile
        } else {
            LossProfile::IDEAL
        };
        let allocation = scenario.allocate(plan)?;
        let beams = allocation.network_beams(plan.n_rf, scenario.n_antennas())?;
        let network = fc_dft_network(
            &scenario.config.geometry,
            &beams,
            &profile,
            scenario.config.divider_split.as_deref(),
        )?;
        Ok(Box::new(HybridTransmitter::new(
            network,
            allocation,
            scenario.config.zf_mode,
        )))
    }
}

struct Butler {
    realistic: bool,
}

impl Architecture for Butler {
    fn name(&self) -> &'static str {
        if self.realistic {
            "butler_realistic"
        } else {
            "butler_ideal"
        }
    }
    fn description(&self) -> &'static str {
        if self.realistic {
            "Butler-matrix DFT network with coupler and delay-line losses"
        } else {
            "lossless Butler-matrix DFT network"
        }
    }
    fn build(&self, scenario: &Scenario, plan: &RfPlan) -> Result<Box<dyn Transmitter>> {
        let profile = if self.realistic {
            scenario.config.profile
        } else {
            LossProfile::IDEAL
        };
        let allocation = scenario.allocate(plan)?;
        let beams = allocation.network_beams(plan.n_rf, scenario.n_antennas())?;
        let network = butler_rf_matrix(&scenario.config.geometry, &beams, &profile)?;
        Ok(Box::new(HybridTransmitter::new(
            network,
            allocation,
            scenario.config.zf_mode,
        )))
    }
}

/// Hybrid pipeline with `F_RF = I_N` and one group holding every user and
/// every beam; numerically equivalent to `fully_digital`.
struct IdentityHybrid;

impl Architecture for IdentityHybrid {
    fn name(&self) -> &'static str {
        "hybrid_identity"
    }
    fn description(&self) -> &'static str {
        "hybrid pipeline with an identity network (reference check)"
    }
    fn is_hybrid(&self) -> bool {
        false
    }
    fn build(&self, scenario: &Scenario, _plan: &RfPlan) -> Result<Box<dyn Transmitter>> {
        let n = scenario.n_antennas();
        Ok(Box::new(HybridTransmitter {
            network: RfNetwork::identity(n),
            allocation: GroupBeamAllocation {
                groups: vec![(0..n).collect()],
            },
            zf_mode: ZfMode::PerGroup,
            merge_groups: true,
        }))
    }
}

#[derive(Default)]
pub struct ArchitectureRegistry {
    entries: BTreeMap<&'static str, Box<dyn Architecture>>,
}

impl ArchitectureRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        r.register(Box::new(FullyDigital));
        r.register(Box::new(FullyConnected { realistic: false }));
        r.register(Box::new(FullyConnected { realistic: true }));
        r.register(Box::new(Butler { realistic: false }));
        r.register(Box::new(Butler { realistic: true }));
        r.register(Box::new(IdentityHybrid));
        r
    }

    /// Registers `arch`, replacing any entry with the same name.
    pub fn register(&mut self, arch: Box<dyn Architecture>) {
        self.entries.insert(arch.name(), arch);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Architecture> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownArchitecture(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Architecture> + '_ {
        self.entries.values().map(|b| b.as_ref())
    }
}
