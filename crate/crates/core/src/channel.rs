//! One-ring spatially correlated channels for grouped single-antenna users
//! served by a uniform linear array.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, CMatrix, C64};
use crate::quadrature::CompositeRule;
use crate::rng::complex_gaussian;

pub const DEFAULT_QUAD_POINTS: usize = 512;
pub const MIN_QUAD_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_antennas: usize,
    /// Element spacing d/lambda.
    pub spacing_wavelengths: f64,
}

impl ArrayGeometry {
    pub fn new(n_antennas: usize, spacing_wavelengths: f64) -> Result<Self> {
        if n_antennas == 0 {
            return Err(Error::invalid("n_antennas", "must be at least 1"));
        }
        if !(spacing_wavelengths.is_finite() && spacing_wavelengths > 0.0) {
            return Err(Error::invalid(
                "spacing_wavelengths",
                format!("{spacing_wavelengths} is not a positive finite number"),
            ));
        }
        Ok(Self {
            n_antennas,
            spacing_wavelengths,
        })
    }

    /// Half-wavelength ULA.
    pub fn half_wavelength(n_antennas: usize) -> Result<Self> {
        Self::new(n_antennas, 0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserGroup {
    pub center_angle_deg: f64,
    pub angular_spread_deg: f64,
    pub n_users: usize,
    /// RF chains (beams) dedicated to this group.
    pub n_beams: usize,
}

impl UserGroup {
    pub fn new(
        center_angle_deg: f64,
        angular_spread_deg: f64,
        n_users: usize,
        n_beams: usize,
    ) -> Result<Self> {
        if !center_angle_deg.is_finite() {
            return Err(Error::invalid("center_angle_deg", "must be finite"));
        }
        if !(angular_spread_deg > 0.0 && angular_spread_deg < 90.0) {
            return Err(Error::invalid(
                "angular_spread_deg",
                format!("{angular_spread_deg} outside (0, 90)"),
            ));
        }
        if n_users == 0 {
            return Err(Error::invalid("n_users", "must be at least 1"));
        }
        if n_beams < n_users {
            return Err(Error::invalid(
                "n_beams",
                format!("{n_beams} beams cannot zero-force {n_users} users"),
            ));
        }
        Ok(Self {
            center_angle_deg,
            angular_spread_deg,
            n_users,
            n_beams,
        })
    }
}

/// Hermitian Toeplitz spatial correlation with unit diagonal.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    entries: CMatrix,
    sqrt_factor: OnceLock<CMatrix>,
}

impl PartialEq for CovarianceMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl CovarianceMatrix {
    /// Wraps an arbitrary matrix after checking it is square and Hermitian
    /// (to 1e-12 relative).
    pub fn from_matrix(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "covariance must be square and nonempty, got {:?}",
                entries.shape()
            )));
        }
        let asym = frobenius_sq(&(&entries - entries.adjoint())).sqrt();
        let scale = frobenius_sq(&entries).sqrt().max(f64::MIN_POSITIVE);
        if asym > 1e-12 * scale {
            return Err(Error::invalid("covariance", "matrix is not Hermitian"));
        }
        Ok(Self {
            entries,
            sqrt_factor: OnceLock::new(),
        })
    }

    /// Builds the Hermitian Toeplitz matrix whose first column is `lags`.
    pub fn from_lags(lags: &[C64]) -> Self {
        let n = lags.len();
        let entries = CMatrix::from_fn(n, n, |i, j| {
            if i >= j {
                lags[i - j]
            } else {
                lags[j - i].conj()
            }
        });
        Self {
            entries,
            sqrt_factor: OnceLock::new(),
        }
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// r(m) = R[m, 0] for m = 0..N-1.
    pub fn lags(&self) -> Vec<C64> {
        (0..self.dim()).map(|m| self.entries[(m, 0)]).collect()
    }

    pub fn psd_tolerance(&self) -> f64 {
        1e-8 * self.dim() as f64
    }

    /// Cached square-root factor; see [`covariance_sqrt`].
    pub fn sqrt_factor(&self) -> Result<&CMatrix> {
        if let Some(s) = self.sqrt_factor.get() {
            return Ok(s);
        }
        let s = covariance_sqrt(self)?;
        Ok(self.sqrt_factor.get_or_init(|| s))
    }
}

/// The one-ring covariance of a ULA,
/// `R[i,j] = 1/(2D) * integral_{-D}^{D} exp(j 2 pi (d/lambda) (i-j) cos(v + theta)) dv`,
/// evaluated with a composite Gauss-Legendre rule. Angles are in degrees.
pub fn one_ring_covariance(
    geom: &ArrayGeometry,
    theta_deg: f64,
    delta_deg: f64,
    quad_points: usize,
) -> Result<CovarianceMatrix> {
    if !theta_deg.is_finite() || !delta_deg.is_finite() {
        return Err(Error::invalid("angle", "angles must be finite"));
    }
    if delta_deg <= 0.0 {
        return Err(Error::invalid(
            "angular spread",
            format!("{delta_deg} deg is not positive"),
        ));
    }
    if quad_points < MIN_QUAD_POINTS {
        return Err(Error::invalid(
            "quad_points",
            format!("{quad_points} < {MIN_QUAD_POINTS}"),
        ));
    }
    let theta = theta_deg.to_radians();
    let delta = delta_deg.to_radians();
    let rule = CompositeRule::new(-delta, delta, quad_points);
    // cos(v + theta) at each node, shared across lags
    let cosines: Vec<f64> = rule.nodes.iter().map(|v| (v + theta).cos()).collect();
    let norm = 1.0 / (2.0 * delta);
    let n = geom.n_antennas;
    let mut lags = Vec::with_capacity(n);
    lags.push(C64::new(1.0, 0.0));
    for lag in 1..n {
        let k = 2.0 * PI * geom.spacing_wavelengths * lag as f64;
        let mut acc = C64::new(0.0, 0.0);
        for (c, w) in cosines.iter().zip(&rule.weights) {
            acc += C64::from_polar(*w, k * c);
        }
        lags.push(acc * norm);
    }
    Ok(CovarianceMatrix::from_lags(&lags))
}

/// Hermitian square root `S` with `S S^H = R`. Eigenvalues in
/// `[-eps_psd, 0)` are clipped to zero, anything more negative is an error.
pub fn covariance_sqrt(r: &CovarianceMatrix) -> Result<CMatrix> {
    let eps = r.psd_tolerance();
    let eig = SymmetricEigen::new(r.entries().clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -eps {
        return Err(Error::IndefiniteCovariance {
            min_eigenvalue: min,
            threshold: eps,
        });
    }
    let u = &eig.eigenvectors;
    let mut scaled = u.clone();
    for (mut col, &lam) in scaled.column_iter_mut().zip(eig.eigenvalues.iter()) {
        col *= C64::new(lam.max(0.0).sqrt(), 0.0);
    }
    Ok(scaled * u.adjoint())
}

/// N x K channel; column k is user k's channel vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: CMatrix,
    pub group_of_user: Vec<usize>,
}

impl ChannelMatrix {
    pub fn n_users(&self) -> usize {
        self.entries.ncols()
    }

    pub fn n_antennas(&self) -> usize {
        self.entries.nrows()
    }

    /// Column range of group `g` (users are stored group by group).
    pub fn group_columns(&self, g: usize) -> std::ops::Range<usize> {
        let start = self.group_of_user.iter().position(|&x| x == g);
        match start {
            Some(s) => {
                let len = self.group_of_user[s..].iter().take_while(|&&x| x == g).count();
                s..s + len
            }
            None => 0..0,
        }
    }
}

/// Draws `h_k = S_g z_k` for every user of every group, with
/// `z_k ~ CN(0, I)`, from a ChaCha20 stream seeded by `seed`.
pub fn sample_group_channels(
    groups: &[(UserGroup, CovarianceMatrix)],
    seed: u64,
) -> Result<ChannelMatrix> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    sample_group_channels_with(groups, &mut rng)
}

pub fn sample_group_channels_with<R: rand::Rng + ?Sized>(
    groups: &[(UserGroup, CovarianceMatrix)],
    rng: &mut R,
) -> Result<ChannelMatrix> {
    let n = match groups.first() {
        Some((_, r)) => r.dim(),
        None => return Err(Error::invalid("groups", "at least one group required")),
    };
    if groups.iter().any(|(_, r)| r.dim() != n) {
        return Err(Error::Dimension(
            "all group covariances must share the same N".into(),
        ));
    }
    let k: usize = groups.iter().map(|(g, _)| g.n_users).sum();
    let mut entries = CMatrix::zeros(n, k);
    let mut group_of_user = Vec::with_capacity(k);
    let mut col = 0;
    for (gi, (group, cov)) in groups.iter().enumerate() {
        let s = cov.sqrt_factor()?;
        let z = CMatrix::from_fn(n, group.n_users, |_, _| complex_gaussian(rng));
        let h = s * z;
        entries.columns_mut(col, group.n_users).copy_from(&h);
        group_of_user.extend(std::iter::repeat_n(gi, group.n_users));
        col += group.n_users;
    }
    Ok(ChannelMatrix {
        entries,
        group_of_user,
    })
}
