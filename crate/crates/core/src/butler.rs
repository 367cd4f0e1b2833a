//! Butler-matrix synthesis as a radix-2 decimation-in-time factorization of
//! the unitary DFT into 2x2 hybrid-coupler stages and fixed phase-shifter
//! (twiddle) stages.
//!
//! Couplers use the real butterfly `(1/sqrt 2) [[1, 1], [1, -1]]`. A
//! physical 90-degree hybrid differs from it by fixed per-port phases,
//! which change neither power transfer nor beam orthogonality.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{dft_matrix, max_abs_diff, CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    HybridCoupler,
    PhaseShift,
}

#[derive(Debug, Clone)]
pub struct StageFactorization {
    /// Stages in signal order; `stages[0]` is applied first.
    pub stages: Vec<(StageKind, CMatrix)>,
    /// DFT column `j` equals column `permutation[j]` of the stage product.
    pub permutation: Vec<usize>,
}

impl StageFactorization {
    pub fn n(&self) -> usize {
        self.permutation.len()
    }

    pub fn count(&self, kind: StageKind) -> usize {
        self.stages.iter().filter(|(k, _)| *k == kind).count()
    }

    /// `stages[last] * ... * stages[0]`.
    pub fn product(&self) -> CMatrix {
        let n = self.n();
        self.stages
            .iter()
            .fold(CMatrix::identity(n, n), |acc, (_, s)| s * acc)
    }

    /// Stage product with columns reordered by `permutation`.
    pub fn permuted_product(&self) -> CMatrix {
        let p = self.product();
        CMatrix::from_fn(self.n(), self.n(), |i, j| p[(i, self.permutation[j])])
    }

    /// Largest entry-wise deviation from the unitary DFT.
    pub fn max_error(&self) -> f64 {
        max_abs_diff(&self.permuted_product(), &dft_matrix(self.n()))
    }
}

fn bit_reverse(x: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - bits)
    }
}

pub fn synthesize_butler_stages(n: usize) -> Result<StageFactorization> {
    if n < 2 {
        return Err(Error::invalid("Butler size", format!("N = {n} < 2")));
    }
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let bits = n.trailing_zeros();
    let mut stages = Vec::with_capacity(2 * bits as usize - 1);
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    for s in 1..=bits {
        let half = 1usize << (s - 1);
        let span = half << 1;
        if s > 1 {
            let mut twiddle = CMatrix::identity(n, n);
            for block in (0..n).step_by(span) {
                for j in 0..half {
                    twiddle[(block + j + half, block + j + half)] =
                        C64::from_polar(1.0, -2.0 * PI * j as f64 / span as f64);
                }
            }
            stages.push((StageKind::PhaseShift, twiddle));
        }
        let mut coupler = CMatrix::zeros(n, n);
        for block in (0..n).step_by(span) {
            for j in 0..half {
                let (a, b) = (block + j, block + j + half);
                coupler[(a, a)] = h;
                coupler[(a, b)] = h;
                coupler[(b, a)] = h;
                coupler[(b, b)] = -h;
            }
        }
        stages.push((StageKind::HybridCoupler, coupler));
    }
    let permutation = (0..n).map(|j| bit_reverse(j, bits)).collect();
    Ok(StageFactorization {
        stages,
        permutation,
    })
}
