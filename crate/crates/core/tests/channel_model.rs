use hybridsim::channel::{
    one_ring_covariance, sample_group_channels, ArrayGeometry, CovarianceMatrix, UserGroup,
};
use hybridsim::linalg::{frobenius_sq, CMatrix, C64};
use proptest::prelude::*;

fn geom(n: usize) -> ArrayGeometry {
    ArrayGeometry::half_wavelength(n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn covariance_structure(n in 1usize..40, theta in -180.0f64..180.0, delta in 0.5f64..60.0,
                            spacing in 0.1f64..1.5) {
        let g = ArrayGeometry::new(n, spacing).unwrap();
        let r = one_ring_covariance(&g, theta, delta, 512).unwrap();
        let m = r.entries();
        let mut trace = 0.0;
        for i in 0..n {
            prop_assert_eq!(m[(i, i)], C64::new(1.0, 0.0));
            trace += m[(i, i)].re;
            for j in 0..n {
                prop_assert_eq!(m[(i, j)], m[(j, i)].conj());
                if i + 1 < n && j + 1 < n {
                    prop_assert_eq!(m[(i, j)], m[(i + 1, j + 1)]);
                }
            }
        }
        prop_assert_eq!(trace, n as f64);
        // PSD after clipping: the square root exists
        prop_assert!(r.sqrt_factor().is_ok());
    }

    #[test]
    fn node_doubling_is_stable(theta in -90.0f64..90.0, delta in 1.0f64..30.0) {
        let g = geom(64);
        let a = one_ring_covariance(&g, theta, delta, 512).unwrap();
        let b = one_ring_covariance(&g, theta, delta, 1024).unwrap();
        let diff = a.entries().iter().zip(b.entries().iter())
            .map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-8, "{}", diff);
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>()) {
        let g = geom(8);
        let groups = vec![(UserGroup::new(20.0, 10.0, 2, 2).unwrap(),
                           one_ring_covariance(&g, 20.0, 10.0, 512).unwrap())];
        let a = sample_group_channels(&groups, seed).unwrap();
        let b = sample_group_channels(&groups, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn quarter_spread_sqrt_reconstruction_at_scale() {
    for n in [64, 128] {
        for theta in [-45.0, 0.0, 45.0] {
            let r = one_ring_covariance(&geom(n), theta, 15.0, 512).unwrap();
            let s = r.sqrt_factor().unwrap();
            let err = frobenius_sq(&(s * s.adjoint() - r.entries())).sqrt()
                / frobenius_sq(r.entries()).sqrt();
            assert!(err < 1e-10, "N={n} theta={theta}: {err}");
        }
    }
}

#[test]
fn degenerate_spread_gives_collinear_users() {
    let g = geom(8);
    let groups = vec![(
        UserGroup::new(0.0, 1e-9, 3, 3).unwrap(),
        one_ring_covariance(&g, 0.0, 1e-9, 512).unwrap(),
    )];
    let h = sample_group_channels(&groups, 11).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let hi = h.entries.column(i);
            let hj = h.entries.column(j);
            let c = hi.dotc(&hj).norm() / (hi.norm() * hj.norm());
            assert!(c > 1.0 - 1e-6, "{i},{j}: {c}");
        }
    }
}

#[test]
fn empirical_covariance_converges() {
    // law of large numbers: (1/M) sum h h^H -> R within 5 / sqrt(M)
    let m = 100_000;
    let g = geom(4);
    let r = one_ring_covariance(&g, 30.0, 20.0, 512).unwrap();
    let groups = vec![(UserGroup::new(30.0, 20.0, m, m).unwrap(), r.clone())];
    let h = sample_group_channels(&groups, 2024).unwrap();
    let emp = &h.entries * h.entries.adjoint() / C64::new(m as f64, 0.0);
    let tol = 5.0 / (m as f64).sqrt();
    for (e, x) in emp.iter().zip(r.entries().iter()) {
        assert!((e - x).norm() < tol, "{e} vs {x}");
    }
}

#[test]
fn distinct_seeds_give_unrelated_channels() {
    let groups = vec![(
        UserGroup::new(45.0, 15.0, 8, 8).unwrap(),
        CovarianceMatrix::from_matrix(CMatrix::identity(8, 8)).unwrap(),
    )];
    let a = sample_group_channels(&groups, 1).unwrap();
    let b = sample_group_channels(&groups, 2).unwrap();
    let d = &a.entries - &b.entries;
    let sv = d.singular_values();
    assert!(sv.min() > 1e-6 * sv.max(), "{sv}");
    assert_eq!(a.group_of_user, vec![0; 8]);
}

#[test]
fn mismatched_group_sizes_rejected() {
    let groups = vec![
        (UserGroup::new(0.0, 15.0, 1, 1).unwrap(), one_ring_covariance(&geom(4), 0.0, 15.0, 512).unwrap()),
        (UserGroup::new(0.0, 15.0, 1, 1).unwrap(), one_ring_covariance(&geom(8), 0.0, 15.0, 512).unwrap()),
    ];
    assert!(sample_group_channels(&groups, 0).is_err());
    assert!(sample_group_channels(&[], 0).is_err());
}
