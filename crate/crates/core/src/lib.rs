//! Link-level simulation of hybrid analog-digital precoding with
//! loss-aware RF beamforming networks.
//!
//! The pipeline is: one-ring channel covariances ([`channel`]), analog
//! networks built from component models ([`rf`], [`butler`]), JSDM-style
//! beam allocation and zero forcing ([`precoding`]), power and energy
//! efficiency ([`power`]), and a seeded Monte Carlo engine ([`harness`])
//! that evaluates the architectures registered in [`architecture`].

pub mod architecture;
pub mod butler;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod output;
pub mod power;
pub mod precoding;
pub mod quadrature;
pub mod rf;
pub mod rng;

pub use architecture::{Architecture, ArchitectureRegistry, Transmitter};
pub use config::{parse_config, ScenarioConfig};
pub use error::{Error, Result};
pub use harness::{PointResult, ResultTable, Simulator};
