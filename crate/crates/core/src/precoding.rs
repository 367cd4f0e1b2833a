//! JSDM-style beam allocation, zero-forcing baseband precoding and the
//! per-user SINR / sum spectral efficiency metrics.

use std::f64::consts::PI;

use crate::channel::{ChannelMatrix, CovarianceMatrix, UserGroup};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, CMatrix, C64};
use crate::rf::RfNetwork;

/// Effective channels whose condition number exceeds this are singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Eigenvalue of the circulant approximant of `R` attached to each unitary
/// DFT column `n`.
///
/// The approximant's first column is
/// `c(m) = ((N - m) r(m) + m r(m - N)) / N` with `r(-m) = conj(r(m))`. With
/// DFT columns `exp(-j 2 pi m n / N)`, column `n` is an eigenvector with
/// eigenvalue `sum_m c(m) exp(+j 2 pi n m / N)`, which is real because the
/// approximant is Hermitian.
pub fn circulant_eigenvalues(r: &CovarianceMatrix) -> Vec<f64> {
    let n = r.dim();
    let lags = r.lags();
    let c: Vec<C64> = (0..n)
        .map(|m| {
            let fwd = lags[m] * (n - m) as f64;
            let back = if m == 0 { C64::new(0.0, 0.0) } else { lags[n - m].conj() * m as f64 };
            (fwd + back) / n as f64
        })
        .collect();
    (0..n)
        .map(|k| {
            c.iter()
                .enumerate()
                .map(|(m, cm)| {
                    let e = (k * m) % n;
                    *cm * C64::from_polar(1.0, 2.0 * PI * e as f64 / n as f64)
                })
                .sum::<C64>()
                .re
        })
        .collect()
}

/// The `b` DFT beams whose circulant eigenvalues are largest, strongest
/// first; ties go to the lower index.
pub fn circulant_beam_select(r: &CovarianceMatrix, b: usize) -> Result<Vec<usize>> {
    if b > r.dim() {
        return Err(Error::invalid(
            "beam count",
            format!("{b} beams requested from N = {}", r.dim()),
        ));
    }
    Ok(ranked_beams(&circulant_eigenvalues(r))
        .into_iter()
        .take(b)
        .collect())
}

fn ranked_beams(eig: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..eig.len()).collect();
    idx.sort_by(|&a, &b| eig[b].total_cmp(&eig[a]).then(a.cmp(&b)));
    idx
}

/// Disjoint per-group beam sets, each ordered strongest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupBeamAllocation {
    pub groups: Vec<Vec<usize>>,
}

impl GroupBeamAllocation {
    pub fn total(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// RF-chain column range of group `g`.
    pub fn columns(&self, g: usize) -> std::ops::Range<usize> {
        let start: usize = self.groups[..g].iter().map(Vec::len).sum();
        start..start + self.groups[g].len()
    }

    /// Beam per RF chain: the allocated beams in group order, then idle
    /// chains on the lowest unused indices.
    pub fn network_beams(&self, n_rf: usize, n: usize) -> Result<Vec<usize>> {
        if n_rf < self.total() || n_rf > n {
            return Err(Error::Infeasible(format!(
                "{} allocated beams do not fit N_RF = {n_rf} <= N = {n}",
                self.total()
            )));
        }
        let mut beams: Vec<usize> = self.groups.concat();
        let mut used = vec![false; n];
        for &b in &beams {
            used[b] = true;
        }
        beams.extend((0..n).filter(|&i| !used[i]).take(n_rf - self.total()));
        Ok(beams)
    }
}

/// Greedy allocation: each group ranks the DFT beams by its circulant
/// eigenvalues; candidates are visited in decreasing eigenvalue order
/// (ties: lower group, then lower beam) and a beam goes to the first group
/// that still needs one.
pub fn allocate_beams(
    groups: &[(UserGroup, CovarianceMatrix)],
    n_rf: usize,
) -> Result<GroupBeamAllocation> {
    let n = groups.first().map(|(_, r)| r.dim()).unwrap_or(0);
    let demand: usize = groups.iter().map(|(g, _)| g.n_beams).sum();
    if demand > n_rf {
        return Err(Error::Infeasible(format!(
            "groups request {demand} beams but N_RF = {n_rf}"
        )));
    }
    if n_rf > n {
        return Err(Error::Infeasible(format!("N_RF = {n_rf} exceeds N = {n}")));
    }
    let mut candidates = Vec::with_capacity(groups.len() * n);
    for (gi, (_, r)) in groups.iter().enumerate() {
        if r.dim() != n {
            return Err(Error::Dimension("group covariances differ in size".into()));
        }
        for (beam, lam) in circulant_eigenvalues(r).into_iter().enumerate() {
            candidates.push((lam, gi, beam));
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut taken = vec![false; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); groups.len()];
    for (_, gi, beam) in candidates {
        if taken[beam] || out[gi].len() == groups[gi].0.n_beams {
            continue;
        }
        taken[beam] = true;
        out[gi].push(beam);
    }
    for (gi, (g, _)) in groups.iter().enumerate() {
        if out[gi].len() < g.n_beams {
            return Err(Error::Infeasible(format!(
                "group {gi} received {} of {} beams",
                out[gi].len(),
                g.n_beams
            )));
        }
    }
    Ok(GroupBeamAllocation { groups: out })
}

#[derive(Debug, Clone)]
pub struct PrecoderSet {
    /// N_RF x K baseband precoder with ||F_BB||_F^2 = K.
    pub f_bb: CMatrix,
    /// N x K composite `F_RF F_BB`.
    pub composite: CMatrix,
    pub allocation: Option<GroupBeamAllocation>,
}

/// Unnormalized zero-forcing `W = A (A^H A)^{-1}` for a tall `A`, computed
/// as `Q R^{-H}` from the thin QR factorization `A = Q R`.
pub fn zero_forcing(a: &CMatrix) -> Result<CMatrix> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Ok(CMatrix::zeros(rows, 0));
    }
    if rows < cols {
        return Err(Error::Singular {
            condition: f64::INFINITY,
        });
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let sv = r.singular_values();
    let max = sv.max();
    let min = sv.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    let r_h_inv = r
        .adjoint()
        .solve_lower_triangular(&CMatrix::identity(cols, cols))
        .ok_or(Error::Singular { condition })?;
    Ok(qr.q() * r_h_inv)
}

fn normalize_to_users(f_bb: &mut CMatrix, k: usize) {
    let p = frobenius_sq(f_bb);
    if p > 0.0 {
        *f_bb *= C64::new((k as f64 / p).sqrt(), 0.0);
    }
}

fn check_network(h: &ChannelMatrix, net: &RfNetwork, alloc: &GroupBeamAllocation) -> Result<()> {
    if net.n_antennas() != h.n_antennas() {
        return Err(Error::Dimension(format!(
            "network has {} antennas, channel {}",
            net.n_antennas(),
            h.n_antennas()
        )));
    }
    if alloc.total() > net.n_rf_chains() {
        return Err(Error::Dimension(format!(
            "{} allocated beams exceed {} RF chains",
            alloc.total(),
            net.n_rf_chains()
        )));
    }
    let n_groups = h.group_of_user.iter().max().map_or(0, |g| g + 1);
    if n_groups > alloc.groups.len() {
        return Err(Error::Dimension(format!(
            "channel has {n_groups} groups, allocation {}",
            alloc.groups.len()
        )));
    }
    Ok(())
}

/// Per-group zero forcing on the effective channels `F_RF,g^H H_g`, with
/// block-diagonal `F_BB` normalized globally to `||F_BB||_F^2 = K`.
pub fn per_group_zf(
    h: &ChannelMatrix,
    net: &RfNetwork,
    alloc: &GroupBeamAllocation,
) -> Result<PrecoderSet> {
    check_network(h, net, alloc)?;
    let k = h.n_users();
    let f_rf = net.matrix();
    let mut f_bb = CMatrix::zeros(net.n_rf_chains(), k);
    for g in 0..alloc.groups.len() {
        let users = h.group_columns(g);
        if users.is_empty() {
            continue;
        }
        let chains = alloc.columns(g);
        let f_rf_g = f_rf.columns(chains.start, chains.len());
        let h_g = h.entries.columns(users.start, users.len());
        let effective = f_rf_g.adjoint() * h_g;
        let w = zero_forcing(&effective)?;
        f_bb.view_mut((chains.start, users.start), (chains.len(), users.len()))
            .copy_from(&w);
    }
    normalize_to_users(&mut f_bb, k);
    let composite = f_rf * &f_bb;
    Ok(PrecoderSet {
        f_bb,
        composite,
        allocation: Some(alloc.clone()),
    })
}

/// Zero forcing jointly across all groups on `F_RF,alloc^H H`.
pub fn joint_zf(
    h: &ChannelMatrix,
    net: &RfNetwork,
    alloc: &GroupBeamAllocation,
) -> Result<PrecoderSet> {
    check_network(h, net, alloc)?;
    let k = h.n_users();
    let used = alloc.total();
    let f_rf_used = net.matrix().columns(0, used);
    let effective = f_rf_used.adjoint() * &h.entries;
    let w = zero_forcing(&effective)?;
    let mut f_bb = CMatrix::zeros(net.n_rf_chains(), k);
    f_bb.rows_mut(0, used).copy_from(&w);
    normalize_to_users(&mut f_bb, k);
    let composite = net.matrix() * &f_bb;
    Ok(PrecoderSet {
        f_bb,
        composite,
        allocation: Some(alloc.clone()),
    })
}

/// Fully-digital zero forcing (`F_RF = I_N`).
pub fn fully_digital_zf(h: &ChannelMatrix) -> Result<PrecoderSet> {
    let mut f_bb = zero_forcing(&h.entries)?;
    normalize_to_users(&mut f_bb, h.n_users());
    Ok(PrecoderSet {
        composite: f_bb.clone(),
        f_bb,
        allocation: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    pub sinr: Vec<f64>,
    pub noise_variance: f64,
}

/// Desired and interfering received powers per user, independent of noise.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    pub signal: Vec<f64>,
    pub interference: Vec<f64>,
}

impl LinkGains {
    pub fn new(h: &ChannelMatrix, composite: &CMatrix) -> Result<Self> {
        if composite.shape() != (h.n_antennas(), h.n_users()) {
            return Err(Error::Dimension(format!(
                "composite precoder {:?} does not match channel {:?}",
                composite.shape(),
                h.entries.shape()
            )));
        }
        let g = h.entries.adjoint() * composite;
        let k = h.n_users();
        let mut signal = Vec::with_capacity(k);
        let mut interference = Vec::with_capacity(k);
        for u in 0..k {
            let row = g.row(u);
            let total: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            let s = row[u].norm_sqr();
            signal.push(s);
            interference.push((total - s).max(0.0));
        }
        Ok(LinkGains {
            signal,
            interference,
        })
    }

    pub fn sinr(&self, sigma2: f64) -> SinrReport {
        SinrReport {
            sinr: self
                .signal
                .iter()
                .zip(&self.interference)
                .map(|(s, i)| s / (i + sigma2))
                .collect(),
            noise_variance: sigma2,
        }
    }
}

/// `gamma_k = |h_k^H f_k|^2 / (sum_{i != k} |h_k^H f_i|^2 + sigma^2)`.
pub fn sinr_per_user(
    h: &ChannelMatrix,
    precoders: &PrecoderSet,
    sigma2: f64,
) -> Result<SinrReport> {
    if !(sigma2 > 0.0) {
        return Err(Error::invalid("noise variance", format!("{sigma2} <= 0")));
    }
    Ok(LinkGains::new(h, &precoders.composite)?.sinr(sigma2))
}

/// `sum_k log2(1 + gamma_k)` for one realization.
pub fn sum_spectral_efficiency(report: &SinrReport) -> f64 {
    report.sinr.iter().map(|g| (1.0 + g).log2()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{one_ring_covariance, sample_group_channels, ArrayGeometry};
    use crate::linalg::max_abs_diff;
    use crate::rf::{butler_rf_matrix, LossProfile};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_covariance_ties_go_low() {
        let r = CovarianceMatrix::from_matrix(CMatrix::identity(8, 8)).unwrap();
        for lam in circulant_eigenvalues(&r) {
            assert!((lam - 1.0).abs() < 1e-14);
        }
        assert_eq!(circulant_beam_select(&r, 3).unwrap(), vec![0, 1, 2]);
        assert!(circulant_beam_select(&r, 9).is_err());
    }

    #[test]
    fn steering_covariance_picks_matching_beam() {
        // rank-one covariance of DFT column 5 must select beam 5
        let n = 16;
        let a = crate::linalg::dft_column(n, 5);
        let r = CovarianceMatrix::from_matrix(&a * a.adjoint() * c(n as f64, 0.0)).unwrap();
        assert_eq!(circulant_beam_select(&r, 1).unwrap(), vec![5]);
    }

    #[test]
    fn two_identical_groups_split_top_beams() {
        let g = ArrayGeometry::half_wavelength(16).unwrap();
        let r = one_ring_covariance(&g, 60.0, 10.0, 512).unwrap();
        let group = UserGroup::new(60.0, 10.0, 2, 2).unwrap();
        let groups = vec![(group, r.clone()), (group, r.clone())];
        let alloc = allocate_beams(&groups, 4).unwrap();
        let mut union = alloc.groups.concat();
        union.sort();
        let mut top4 = circulant_beam_select(&r, 4).unwrap();
        top4.sort();
        assert_eq!(union, top4);
        assert!(alloc.groups[0].iter().all(|b| !alloc.groups[1].contains(b)));
    }

    #[test]
    fn single_group_allocation_is_selection() {
        let g = ArrayGeometry::half_wavelength(32).unwrap();
        let r = one_ring_covariance(&g, 45.0, 15.0, 512).unwrap();
        let group = UserGroup::new(45.0, 15.0, 3, 6).unwrap();
        let alloc = allocate_beams(&[(group, r.clone())], 8).unwrap();
        assert_eq!(alloc.groups[0], circulant_beam_select(&r, 6).unwrap());
        let beams = alloc.network_beams(8, 32).unwrap();
        assert_eq!(beams.len(), 8);
        assert_eq!(&beams[..6], &alloc.groups[0][..]);
    }

    #[test]
    fn allocation_rejects_over_demand() {
        let g = ArrayGeometry::half_wavelength(8).unwrap();
        let r = one_ring_covariance(&g, 0.0, 15.0, 512).unwrap();
        let group = UserGroup::new(0.0, 15.0, 2, 5).unwrap();
        assert!(matches!(
            allocate_beams(&[(group, r.clone()), (group, r)], 8),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn scalar_zero_forcing() {
        // 1x1 effective channel a: pseudo-inverse of a^H is 1 / conj(a)
        let a = c(0.6, -0.8) * 2.0;
        let w = zero_forcing(&CMatrix::from_element(1, 1, a)).unwrap();
        assert!((w[(0, 0)] - c(1.0, 0.0) / a.conj()).norm() < 1e-14);
    }

    #[test]
    fn zf_rejects_rank_deficiency() {
        let col = [c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0)];
        let m = CMatrix::from_fn(3, 2, |i, _| col[i]);
        assert!(matches!(zero_forcing(&m), Err(Error::Singular { .. })));
        assert!(matches!(
            zero_forcing(&CMatrix::zeros(1, 2)),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn digital_zf_single_user_is_matched_filter() {
        let h = CMatrix::from_column_slice(3, 1, &[c(1.0, 1.0), c(0.0, -2.0), c(0.5, 0.0)]);
        let ch = ChannelMatrix {
            entries: h.clone(),
            group_of_user: vec![0],
        };
        let p = fully_digital_zf(&ch).unwrap();
        assert!((frobenius_sq(&p.f_bb) - 1.0).abs() < 1e-12);
        let dir = &h / c(h.norm(), 0.0);
        assert!(max_abs_diff(&p.composite, &dir) < 1e-12);
    }

    #[test]
    fn sum_se_exact_values() {
        let r = |s: Vec<f64>| SinrReport {
            sinr: s,
            noise_variance: 1.0,
        };
        assert_eq!(sum_spectral_efficiency(&r(vec![1.0; 5])), 5.0);
        assert_eq!(sum_spectral_efficiency(&r(vec![0.0; 3])), 0.0);
        assert_eq!(sum_spectral_efficiency(&r(vec![3.0, 15.0])), 6.0);
    }

    #[test]
    fn single_user_sinr_has_no_interference() {
        let ch = ChannelMatrix {
            entries: CMatrix::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 1.0)]),
            group_of_user: vec![0],
        };
        let p = PrecoderSet {
            f_bb: CMatrix::identity(1, 1),
            composite: CMatrix::from_column_slice(2, 1, &[c(0.5, 0.5), c(1.0, 0.0)]),
            allocation: None,
        };
        let s = sinr_per_user(&ch, &p, 0.25).unwrap();
        let hf = c(1.0, 0.0) * c(0.5, 0.5) + c(0.0, -1.0) * c(1.0, 0.0);
        assert!((s.sinr[0] - hf.norm_sqr() / 0.25).abs() < 1e-14);
        assert!(sinr_per_user(&ch, &p, 0.0).is_err());
    }

    #[test]
    fn per_group_zf_nulls_intra_group_interference() {
        let geom = ArrayGeometry::half_wavelength(32).unwrap();
        let groups: Vec<_> = [-40.0, 30.0]
            .iter()
            .map(|&t| {
                (
                    UserGroup::new(t, 15.0, 3, 6).unwrap(),
                    one_ring_covariance(&geom, t, 15.0, 512).unwrap(),
                )
            })
            .collect();
        let alloc = allocate_beams(&groups, 12).unwrap();
        let beams = alloc.network_beams(12, 32).unwrap();
        let net = butler_rf_matrix(&geom, &beams, &LossProfile::SUB5GHZ).unwrap();
        let h = sample_group_channels(&groups, 9).unwrap();
        let p = per_group_zf(&h, &net, &alloc).unwrap();
        assert!((frobenius_sq(&p.f_bb) - 6.0).abs() < 1e-10 * 6.0);
        let g = h.entries.adjoint() * &p.composite;
        for grp in 0..2 {
            let users = h.group_columns(grp);
            for k in users.clone() {
                for i in users.clone() {
                    if i != k {
                        let scale = h.entries.column(k).norm() * p.composite.column(i).norm();
                        assert!(g[(k, i)].norm() < 1e-9 * scale);
                    }
                }
            }
        }
        // joint ZF nulls everything
        let pj = joint_zf(&h, &net, &alloc).unwrap();
        let gj = h.entries.adjoint() * &pj.composite;
        for k in 0..6 {
            for i in 0..6 {
                if i != k {
                    assert!(gj[(k, i)].norm() < 1e-9 * gj[(k, k)].norm());
                }
            }
        }
    }
}
