use hybridsim::channel::{
    one_ring_covariance, sample_group_channels, ArrayGeometry, ChannelMatrix, CovarianceMatrix,
    UserGroup,
};
use hybridsim::linalg::{dft_column, frobenius_sq, CMatrix, C64};
use hybridsim::precoding::{
    allocate_beams, circulant_beam_select, fully_digital_zf, per_group_zf, sinr_per_user,
    sum_spectral_efficiency,
};
use hybridsim::rf::{butler_rf_matrix, LossProfile, RfNetwork};
use hybridsim::rng::{complex_gaussian, substream};
use nalgebra::SymmetricEigen;
use proptest::prelude::*;

fn random_channel(n: usize, k: usize, seed: u64) -> ChannelMatrix {
    let mut rng = substream(seed, 99);
    ChannelMatrix {
        entries: CMatrix::from_fn(n, k, |_, _| complex_gaussian(&mut rng)),
        group_of_user: vec![0; k],
    }
}

fn section_v_groups(n: usize, beams: [usize; 3]) -> Vec<(UserGroup, CovarianceMatrix)> {
    let g = ArrayGeometry::half_wavelength(n).unwrap();
    [-45.0, 0.0, 45.0]
        .iter()
        .zip(beams)
        .map(|(&t, b)| {
            (
                UserGroup::new(t, 15.0, 4, b).unwrap(),
                one_ring_covariance(&g, t, 15.0, 512).unwrap(),
            )
        })
        .collect()
}

#[test]
fn circulant_selection_captures_dominant_eigenspace() {
    for (group, r) in section_v_groups(64, [10, 12, 10]) {
        let b = group.n_beams;
        let sel = circulant_beam_select(&r, b).unwrap();
        assert_eq!(sel.len(), b);
        let mut sorted = sel.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), b);
        let captured: f64 = sel
            .iter()
            .map(|&k| {
                let e = dft_column(64, k);
                (e.adjoint() * r.entries() * &e)[(0, 0)].re
            })
            .sum();
        let mut eig: Vec<f64> = SymmetricEigen::new(r.entries().clone()).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        let best: f64 = eig[..b].iter().sum();
        assert!(captured >= 0.9 * best, "theta={}: {captured} < 0.9 * {best}", group.center_angle_deg);
    }
}

#[test]
fn fig3_allocation_fills_all_chains() {
    let alloc = allocate_beams(&section_v_groups(64, [10, 12, 10]), 32).unwrap();
    assert_eq!(alloc.total(), 32);
    assert_eq!(alloc.groups.iter().map(Vec::len).collect::<Vec<_>>(), vec![10, 12, 10]);
    let mut all = alloc.groups.concat();
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 32);
}

#[test]
fn identity_network_reproduces_digital_zf() {
    for seed in 0..10 {
        let h = random_channel(16, 5, seed);
        let alloc = hybridsim::precoding::GroupBeamAllocation { groups: vec![(0..16).collect()] };
        let hybrid = per_group_zf(&h, &RfNetwork::identity(16), &alloc).unwrap();
        let digital = fully_digital_zf(&h).unwrap();
        let d = (&hybrid.composite - &digital.composite).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(d < 1e-10, "{d}");
    }
}

#[test]
fn digital_zf_is_scaled_pseudo_inverse() {
    let h = random_channel(8, 4, 77);
    let p = fully_digital_zf(&h).unwrap();
    // SVD route, independent of the QR path in zero_forcing
    let pinv = h.entries.adjoint().pseudo_inverse(1e-14).unwrap();
    let scale = (4.0 / frobenius_sq(&pinv)).sqrt();
    let d = (&p.f_bb - pinv * C64::new(scale, 0.0)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(d < 1e-10, "{d}");
    let g = h.entries.adjoint() * &p.composite;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                assert!(g[(i, j)].norm() < 1e-9 * g[(i, i)].norm());
            }
        }
    }
}

#[test]
fn sinr_matches_scalar_expression() {
    let h = random_channel(4, 2, 5);
    let mut rng = substream(6, 0);
    let f = CMatrix::from_fn(4, 2, |_, _| complex_gaussian(&mut rng));
    let p = hybridsim::precoding::PrecoderSet { f_bb: CMatrix::identity(2, 2), composite: f.clone(), allocation: None };
    let sigma2 = 0.37;
    let rep = sinr_per_user(&h, &p, sigma2).unwrap();
    for k in 0..2 {
        let gain = |i: usize| {
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..4 {
                acc += h.entries[(m, k)].conj() * f[(m, i)];
            }
            acc.norm_sqr()
        };
        let interference: f64 = (0..2).filter(|&i| i != k).map(gain).sum();
        let expected = gain(k) / (interference + sigma2);
        assert!((rep.sinr[k] - expected).abs() < 1e-12 * expected.max(1.0));
    }
}

#[test]
fn digital_sinr_scales_with_inverse_noise() {
    let h = random_channel(8, 3, 12);
    let p = fully_digital_zf(&h).unwrap();
    let a = sinr_per_user(&h, &p, 1.0).unwrap();
    let b = sinr_per_user(&h, &p, 0.1).unwrap();
    for (x, y) in a.sinr.iter().zip(&b.sinr) {
        assert!((y / x - 10.0).abs() < 1e-6);
    }
}

#[test]
fn static_loss_shift_scales_gains() {
    let groups = section_v_groups(32, [6, 6, 6]);
    let alloc = allocate_beams(&groups, 18).unwrap();
    let geom = ArrayGeometry::half_wavelength(32).unwrap();
    let net = butler_rf_matrix(&geom, &alloc.network_beams(18, 32).unwrap(), &LossProfile::IDEAL).unwrap();
    let alpha = 0.4;
    let lossy = net.attenuated(alpha);
    assert!((lossy.static_loss_db() - (-20.0 * alpha.log10())).abs() < 1e-12);
    let h = sample_group_channels(&groups, 3).unwrap();
    let p = per_group_zf(&h, &net, &alloc).unwrap();
    let q = per_group_zf(&h, &lossy, &alloc).unwrap();
    let g = h.entries.adjoint() * &p.composite;
    let gq = h.entries.adjoint() * &q.composite;
    for (a, b) in g.iter().zip(gq.iter()) {
        assert!((b.norm_sqr() - alpha * alpha * a.norm_sqr()).abs() < 1e-10 * a.norm_sqr().max(1e-12));
    }
    let s = sinr_per_user(&h, &p, 0.5).unwrap();
    let sq = sinr_per_user(&h, &q, 0.5).unwrap();
    assert!(s.sinr.iter().zip(&sq.sinr).all(|(a, b)| b < a));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn beam_selection_scale_invariant(theta in -90.0f64..90.0, delta in 2.0f64..40.0,
                                      c in 0.01f64..100.0, b in 1usize..16) {
        let g = ArrayGeometry::half_wavelength(16).unwrap();
        let r = one_ring_covariance(&g, theta, delta, 512).unwrap();
        let scaled = CovarianceMatrix::from_matrix(r.entries() * C64::new(c, 0.0)).unwrap();
        let a = circulant_beam_select(&r, b).unwrap();
        let s = circulant_beam_select(&scaled, b).unwrap();
        prop_assert_eq!(a, s);
    }

    #[test]
    fn precoders_are_normalized_and_sinr_monotone(seed in any::<u64>()) {
        let groups = section_v_groups(32, [6, 6, 6]);
        let alloc = allocate_beams(&groups, 20).unwrap();
        let geom = ArrayGeometry::half_wavelength(32).unwrap();
        let net = butler_rf_matrix(&geom, &alloc.network_beams(20, 32).unwrap(), &LossProfile::SUB5GHZ).unwrap();
        let h = sample_group_channels(&groups, seed).unwrap();
        let p = per_group_zf(&h, &net, &alloc).unwrap();
        prop_assert!((frobenius_sq(&p.f_bb) - 12.0).abs() < 1e-10 * 12.0);
        // idle RF chains carry nothing
        for row in 18..20 {
            prop_assert!(p.f_bb.row(row).iter().all(|z| z.norm() == 0.0));
        }
        let d = fully_digital_zf(&h).unwrap();
        prop_assert!((frobenius_sq(&d.f_bb) - 12.0).abs() < 1e-10 * 12.0);
        let mut last_sinr: Option<Vec<f64>> = None;
        let mut last_se = -1.0;
        for sigma2 in [10.0, 3.0, 1.0, 0.3, 0.1] {
            let rep = sinr_per_user(&h, &p, sigma2).unwrap();
            let se = sum_spectral_efficiency(&rep);
            prop_assert!(se > last_se);
            if let Some(prev) = &last_sinr {
                prop_assert!(rep.sinr.iter().zip(prev).all(|(a, b)| a > b));
            }
            last_sinr = Some(rep.sinr);
            last_se = se;
        }
    }
}
