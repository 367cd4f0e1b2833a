//! Total consumed power and energy efficiency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    /// PA output power P_out in W.
    pub pa_output_w: f64,
    pub pa_efficiency: f64,
    /// Consumption of each RF chain in W.
    pub per_chain_w: f64,
    pub synthesizer_w: f64,
    pub bandwidth_hz: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel {
            pa_output_w: 40.0,
            pa_efficiency: 0.39,
            per_chain_w: 1.0,
            synthesizer_w: 2.0,
            bandwidth_hz: 20e6,
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.pa_efficiency > 0.0 && self.pa_efficiency <= 1.0) {
            return Err(Error::invalid("pa_efficiency", "must lie in (0, 1]"));
        }
        for (what, v) in [
            ("pa_output_w", self.pa_output_w),
            ("per_chain_w", self.per_chain_w),
            ("synthesizer_w", self.synthesizer_w),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(what, "must be finite and >= 0"));
            }
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::invalid("bandwidth_hz", "must be positive"));
        }
        Ok(())
    }

    /// P_out / eta, held fixed regardless of network losses.
    pub fn pa_consumption_w(&self) -> f64 {
        self.pa_output_w / self.pa_efficiency
    }
}

/// `P_tot = P_out / eta + N_RF P_RF + P_syn`.
pub fn total_power(n_rf: usize, model: &PowerModel) -> f64 {
    model.pa_consumption_w() + n_rf as f64 * model.per_chain_w + model.synthesizer_w
}

/// Bits per Joule: `B S_e / P_tot`.
pub fn energy_efficiency(sum_se_bits_s_hz: f64, model: &PowerModel, n_rf: usize) -> f64 {
    model.bandwidth_hz * sum_se_bits_s_hz / total_power(n_rf, model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let m = PowerModel::default();
        assert!((total_power(32, &m) - (40.0 / 0.39 + 34.0)).abs() < 1e-12);
        assert!((total_power(32, &m) - 136.564).abs() < 1e-3);
        assert!((total_power(128, &m) - 232.564).abs() < 1e-3);
    }

    #[test]
    fn unit_model() {
        let m = PowerModel {
            pa_output_w: 1.0,
            pa_efficiency: 1.0,
            per_chain_w: 0.0,
            synthesizer_w: 0.0,
            bandwidth_hz: 1.0,
        };
        assert_eq!(total_power(7, &m), 1.0);
    }

    #[test]
    fn ee_round_numbers() {
        // P_tot = 100 W
        let m = PowerModel {
            pa_output_w: 98.0,
            pa_efficiency: 1.0,
            per_chain_w: 0.0,
            synthesizer_w: 2.0,
            bandwidth_hz: 20e6,
        };
        assert!((energy_efficiency(5.0, &m, 4) - 1e6).abs() < 1e-6);
        assert_eq!(energy_efficiency(0.0, &m, 4), 0.0);
    }

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_watts(46.0) - 39.810_717_055_349_73).abs() < 1e-9);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let mut m = PowerModel::default();
        assert!(m.validate().is_ok());
        m.pa_efficiency = 1.2;
        assert!(m.validate().is_err());
        m = PowerModel::default();
        m.bandwidth_hz = 0.0;
        assert!(m.validate().is_err());
    }
}
