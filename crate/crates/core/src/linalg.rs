//! Small complex linear-algebra helpers on top of `nalgebra`.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Unitary N-point DFT, entry (m, n) = exp(-j 2 pi m n / N) / sqrt(N).
pub fn dft_matrix(n: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |m, k| dft_entry(n, m, k) * scale)
}

/// Column `k` of the unitary DFT.
pub fn dft_column(n: usize, k: usize) -> CVector {
    let scale = 1.0 / (n as f64).sqrt();
    CVector::from_fn(n, |m, _| dft_entry(n, m, k) * scale)
}

fn dft_entry(n: usize, m: usize, k: usize) -> C64 {
    // reduce the exponent modulo N before converting to an angle
    let e = (m * k) % n;
    C64::from_polar(1.0, -2.0 * PI * e as f64 / n as f64)
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Number of binary three-port stages needed to build a `t`-way split: ceil(log2 t).
pub fn binary_stages(t: usize) -> u32 {
    assert!(t >= 1);
    usize::BITS - (t - 1).leading_zeros()
}

pub fn log2_exact(n: usize) -> Option<u32> {
    (n.is_power_of_two()).then(|| n.trailing_zeros())
}
