//! Analog beamforming networks built from component-level S-parameter
//! models: fully-connected (divider / phase shifter / combiner) and
//! Butler (hybrid coupler + fixed phase shifter) architectures.
//!
//! Losses are carried as amplitude scalings: a loss of `L_dB` is a linear
//! power factor `L = 10^(L_dB/10)` applied as `1/sqrt(L)`.

use serde::{Deserialize, Serialize};

use crate::channel::ArrayGeometry;
use crate::error::{Error, Result};
use crate::linalg::{binary_stages, db_to_linear, dft_column, linear_to_db, CMatrix, CVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandTag {
    Sub5ghz,
    Mmwave,
    Ideal,
    Custom,
}

/// Per-component insertion losses in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossProfile {
    /// Per three-port divider / combiner stage.
    pub divider_combiner_db: f64,
    pub hybrid_coupler_db: f64,
    /// Variable phase shifter of the fully-connected network.
    pub variable_phase_shifter_db: f64,
    /// Fixed inter-stage delay line of a Butler matrix.
    pub fixed_phase_shifter_db: f64,
    pub band_tag: BandTag,
}

impl LossProfile {
    pub const IDEAL: LossProfile = LossProfile {
        divider_combiner_db: 0.0,
        hybrid_coupler_db: 0.0,
        variable_phase_shifter_db: 0.0,
        fixed_phase_shifter_db: 0.0,
        band_tag: BandTag::Ideal,
    };

    pub const SUB5GHZ: LossProfile = LossProfile {
        divider_combiner_db: 0.5,
        hybrid_coupler_db: 0.15,
        variable_phase_shifter_db: 3.5,
        fixed_phase_shifter_db: 0.5,
        band_tag: BandTag::Sub5ghz,
    };

    pub const MMWAVE: LossProfile = LossProfile {
        divider_combiner_db: 0.6,
        hybrid_coupler_db: 0.5,
        variable_phase_shifter_db: 0.5,
        fixed_phase_shifter_db: 0.5,
        band_tag: BandTag::Mmwave,
    };

    pub fn custom(
        divider_combiner_db: f64,
        hybrid_coupler_db: f64,
        variable_phase_shifter_db: f64,
        fixed_phase_shifter_db: f64,
    ) -> Result<Self> {
        let p = LossProfile {
            divider_combiner_db,
            hybrid_coupler_db,
            variable_phase_shifter_db,
            fixed_phase_shifter_db,
            band_tag: BandTag::Custom,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "ideal" => Some(Self::IDEAL),
            "sub5ghz" => Some(Self::SUB5GHZ),
            "mmwave" => Some(Self::MMWAVE),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.divider_combiner_db,
            self.hybrid_coupler_db,
            self.variable_phase_shifter_db,
            self.fixed_phase_shifter_db,
        ];
        if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("loss profile", "losses must be finite and >= 0 dB"));
        }
        if self.band_tag == BandTag::Ideal && vals.iter().any(|v| *v != 0.0) {
            return Err(Error::invalid("loss profile", "`ideal` profile must be lossless"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NetworkArchitecture {
    FullyConnected,
    Butler,
    Identity,
}

/// An N x N_RF analog precoder with its loss bookkeeping.
#[derive(Debug, Clone)]
pub struct RfNetwork {
    matrix: CMatrix,
    architecture: NetworkArchitecture,
    static_loss_db: f64,
    beam_indices: Vec<usize>,
}

impl RfNetwork {
    pub fn identity(n: usize) -> Self {
        RfNetwork {
            matrix: CMatrix::identity(n, n),
            architecture: NetworkArchitecture::Identity,
            static_loss_db: 0.0,
            beam_indices: (0..n).collect(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn architecture(&self) -> NetworkArchitecture {
        self.architecture
    }

    pub fn static_loss_db(&self) -> f64 {
        self.static_loss_db
    }

    /// DFT column steered by each RF chain; empty for arbitrary FC phases.
    pub fn beam_indices(&self) -> &[usize] {
        &self.beam_indices
    }

    pub fn n_antennas(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_rf_chains(&self) -> usize {
        self.matrix.ncols()
    }

    /// Combining loss seen by a single active chain: 10 log10(N_RF) for
    /// fully-connected networks, zero for the others.
    pub fn dynamic_loss_db(&self) -> f64 {
        dynamic_loss_db(self.architecture, self.n_rf_chains())
    }

    /// Uniformly scales the matrix by `alpha`, recording the extra loss.
    pub fn attenuated(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.matrix *= C64::new(alpha, 0.0);
        out.static_loss_db -= 20.0 * alpha.log10();
        out
    }
}

pub fn dynamic_loss_db(architecture: NetworkArchitecture, n_rf: usize) -> f64 {
    match architecture {
        NetworkArchitecture::FullyConnected => linear_to_db(n_rf as f64),
        _ => 0.0,
    }
}

fn check_loss(what: &'static str, loss_linear: f64) -> Result<()> {
    if !(loss_linear.is_finite() && loss_linear >= 1.0) {
        return Err(Error::invalid(
            what,
            format!("linear loss {loss_linear} < 1 would be a passive gain"),
        ));
    }
    Ok(())
}

fn check_dims(n: usize, n_rf: usize) -> Result<()> {
    if n == 0 || n_rf == 0 {
        return Err(Error::invalid("dimensions", "N and N_RF must be at least 1"));
    }
    Ok(())
}

/// Power-divider bank `F_D` ((N * N_RF) x N_RF): block diagonal with
/// all-ones blocks, entries `sqrt(1 / (L_S N))`.
pub fn divider_matrix(n: usize, n_rf: usize, loss_linear: f64) -> Result<CMatrix> {
    check_dims(n, n_rf)?;
    divider_matrix_weighted(n, n_rf, loss_linear, &vec![1.0; n])
}

/// Divider bank with unequal split ratios (`weights`, normalized to sum one)
/// shared by every RF chain.
pub fn divider_matrix_weighted(
    n: usize,
    n_rf: usize,
    loss_linear: f64,
    weights: &[f64],
) -> Result<CMatrix> {
    check_dims(n, n_rf)?;
    check_loss("divider loss", loss_linear)?;
    let amps = split_amplitudes(n, weights)?;
    let mut m = CMatrix::zeros(n * n_rf, n_rf);
    for j in 0..n_rf {
        for (i, a) in amps.iter().enumerate() {
            m[(j * n + i, j)] = C64::new(a / loss_linear.sqrt(), 0.0);
        }
    }
    Ok(m)
}

fn split_amplitudes(n: usize, weights: &[f64]) -> Result<Vec<f64>> {
    if weights.len() != n {
        return Err(Error::Dimension(format!(
            "divider split has {} ratios for {n} outputs",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::invalid("divider split", "ratios must be positive"));
    }
    let total: f64 = weights.iter().sum();
    Ok(weights.iter().map(|w| (w / total).sqrt()).collect())
}

/// Diagonal of the phase-shifter bank `F_PS`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMatrix(pub CVector);

impl DiagonalMatrix {
    pub fn to_dense(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.0)
    }
}

/// `F_PS = diag(exp(j phase_m)) / sqrt(L_PS)`.
pub fn phase_shift_matrix(phases: &[f64], loss_linear: f64) -> Result<DiagonalMatrix> {
    check_loss("phase shifter loss", loss_linear)?;
    if phases.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("phases", "all phases must be finite"));
    }
    let amp = 1.0 / loss_linear.sqrt();
    Ok(DiagonalMatrix(CVector::from_iterator(
        phases.len(),
        phases.iter().map(|&p| C64::from_polar(amp, p)),
    )))
}

/// Power-combiner bank `F_C` (N x (N * N_RF)): N_RF side-by-side identity
/// blocks scaled by `sqrt(1 / (L_C N_RF))`.
pub fn combiner_matrix(n: usize, n_rf: usize, loss_linear: f64) -> Result<CMatrix> {
    check_dims(n, n_rf)?;
    check_loss("combiner loss", loss_linear)?;
    let amp = C64::new(1.0 / (loss_linear * n_rf as f64).sqrt(), 0.0);
    let mut m = CMatrix::zeros(n, n * n_rf);
    for j in 0..n_rf {
        for i in 0..n {
            m[(i, j * n + i)] = amp;
        }
    }
    Ok(m)
}

/// Phases that make a fully-connected network steer the given DFT beams:
/// `phase[j N + i] = arg(E[i, beam_j])`.
pub fn dft_matched_phases(n: usize, beams: &[usize]) -> Vec<f64> {
    let mut phases = Vec::with_capacity(n * beams.len());
    for &b in beams {
        let col = dft_column(n, b);
        phases.extend(col.iter().map(|z| z.arg()));
    }
    phases
}

/// Fully-connected network `F_RF = F_C F_PS F_D` with equal-split dividers.
pub fn compose_fc_abfn(
    geom: &ArrayGeometry,
    n_rf: usize,
    phases: &[f64],
    profile: &LossProfile,
) -> Result<RfNetwork> {
    compose_fc_abfn_with_split(geom, n_rf, phases, profile, None)
}

pub fn compose_fc_abfn_with_split(
    geom: &ArrayGeometry,
    n_rf: usize,
    phases: &[f64],
    profile: &LossProfile,
    divider_split: Option<&[f64]>,
) -> Result<RfNetwork> {
    profile.validate()?;
    let n = geom.n_antennas;
    check_dims(n, n_rf)?;
    if phases.len() != n * n_rf {
        return Err(Error::Dimension(format!(
            "expected {} phases, got {}",
            n * n_rf,
            phases.len()
        )));
    }
    let l_s = db_to_linear(profile.divider_combiner_db * binary_stages(n) as f64);
    let l_ps = db_to_linear(profile.variable_phase_shifter_db);
    let l_c = db_to_linear(profile.divider_combiner_db * binary_stages(n_rf) as f64);

    let f_d = match divider_split {
        Some(w) => divider_matrix_weighted(n, n_rf, l_s, w)?,
        None => divider_matrix(n, n_rf, l_s)?,
    };
    let f_ps = phase_shift_matrix(phases, l_ps)?;
    let f_c = combiner_matrix(n, n_rf, l_c)?;

    // F_PS is diagonal: scale the rows of F_D instead of forming it densely
    let mut shifted = f_d;
    for (mut row, d) in shifted.row_iter_mut().zip(f_ps.0.iter()) {
        row *= *d;
    }
    let matrix = f_c * shifted;

    Ok(RfNetwork {
        matrix,
        architecture: NetworkArchitecture::FullyConnected,
        static_loss_db: static_loss_db(profile, NetworkArchitecture::FullyConnected, n, n_rf),
        beam_indices: Vec::new(),
    })
}

/// Fully-connected network whose phases replicate the given DFT beams.
pub fn fc_dft_network(
    geom: &ArrayGeometry,
    beams: &[usize],
    profile: &LossProfile,
    divider_split: Option<&[f64]>,
) -> Result<RfNetwork> {
    check_beams(geom.n_antennas, beams)?;
    let phases = dft_matched_phases(geom.n_antennas, beams);
    let mut net = compose_fc_abfn_with_split(geom, beams.len(), &phases, profile, divider_split)?;
    net.beam_indices = beams.to_vec();
    Ok(net)
}

fn check_beams(n: usize, beams: &[usize]) -> Result<()> {
    if beams.is_empty() {
        return Err(Error::invalid("beam indices", "at least one beam required"));
    }
    let mut seen = vec![false; n];
    for &b in beams {
        if b >= n {
            return Err(Error::invalid("beam indices", format!("{b} >= N = {n}")));
        }
        if std::mem::replace(&mut seen[b], true) {
            return Err(Error::DuplicateBeam(b));
        }
    }
    Ok(())
}

/// Butler network: the selected unitary-DFT columns scaled by
/// `1 / sqrt(L_PS,fix^N_PS * L_HYB^N_HYB)`.
pub fn butler_rf_matrix(
    geom: &ArrayGeometry,
    beam_indices: &[usize],
    profile: &LossProfile,
) -> Result<RfNetwork> {
    profile.validate()?;
    let n = geom.n_antennas;
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    check_beams(n, beam_indices)?;
    let loss_db = static_loss_db(profile, NetworkArchitecture::Butler, n, beam_indices.len());
    let kappa = 1.0 / db_to_linear(loss_db).sqrt();
    let mut matrix = CMatrix::zeros(n, beam_indices.len());
    for (j, &b) in beam_indices.iter().enumerate() {
        matrix.set_column(j, &(dft_column(n, b) * C64::new(kappa, 0.0)));
    }
    Ok(RfNetwork {
        matrix,
        architecture: NetworkArchitecture::Butler,
        static_loss_db: loss_db,
        beam_indices: beam_indices.to_vec(),
    })
}

/// Static insertion loss in dB. Multi-port dividers and combiners count
/// ceil(log2 T) three-port stages; a Butler matrix has log2 N coupler
/// stages and log2 N - 1 fixed phase-shifter stages.
pub fn static_loss_db(
    profile: &LossProfile,
    architecture: NetworkArchitecture,
    n: usize,
    n_rf: usize,
) -> f64 {
    match architecture {
        NetworkArchitecture::FullyConnected => {
            profile.divider_combiner_db * binary_stages(n) as f64
                + profile.variable_phase_shifter_db
                + profile.divider_combiner_db * binary_stages(n_rf) as f64
        }
        NetworkArchitecture::Butler => {
            let n_hyb = binary_stages(n);
            let n_ps = n_hyb.saturating_sub(1);
            n_ps as f64 * profile.fixed_phase_shifter_db + n_hyb as f64 * profile.hybrid_coupler_db
        }
        NetworkArchitecture::Identity => 0.0,
    }
}

/// `||F_RF u||^2 / ||u||^2`.
pub fn power_transfer_ratio(net: &RfNetwork, u: &CVector) -> Result<f64> {
    if u.len() != net.n_rf_chains() {
        return Err(Error::Dimension(format!(
            "input has {} entries for {} RF chains",
            u.len(),
            net.n_rf_chains()
        )));
    }
    let p_in = u.norm_squared();
    if p_in == 0.0 {
        return Err(Error::invalid("input vector", "zero input"));
    }
    Ok((net.matrix() * u).norm_squared() / p_in)
}
