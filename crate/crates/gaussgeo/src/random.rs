//! Random instances for property tests and the oracle suite.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::liouvillian::QuadraticLindbladModel;
use crate::{c, CMat, CVec, Complex64, RMat, I};

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_real<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> RMat {
    RMat::from_fn(rows, cols, |_, _| normal(rng))
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| Complex64::new(normal(rng), normal(rng)))
}

/// Haar-ish orthogonal matrix from the QR factorization of a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, m: usize) -> RMat {
    let qr = random_real(rng, m, m).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            let col = -q.column(j);
            q.set_column(j, &col);
        }
    }
    q
}

/// Real antisymmetric `m × m` matrix with Gaussian entries times `scale`.
pub fn random_real_antisymmetric<R: Rng + ?Sized>(rng: &mut R, m: usize, scale: f64) -> RMat {
    let a = random_real(rng, m, m);
    (&a - a.transpose()) * (scale / 2.0)
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let a = random_complex(rng, d, d);
    (&a + a.adjoint()) * c(0.5)
}

/// Covariance matrix with random eigenmodes and `γ_k` uniform in
/// `[-max_gamma, max_gamma]`.
pub fn random_covariance<R: Rng + ?Sized>(rng: &mut R, n: usize, max_gamma: f64) -> CMat {
    let q = random_orthogonal(rng, 2 * n).map(c);
    let mut d = CMat::zeros(2 * n, 2 * n);
    for k in 0..n {
        let g = rng.random_range(-max_gamma..=max_gamma);
        d[(2 * k, 2 * k + 1)] = I * g;
        d[(2 * k + 1, 2 * k)] = -I * g;
    }
    &q * d * q.transpose()
}

/// Full-rank density matrix whose smallest eigenvalue is at least of order
/// `floor / d`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize, floor: f64) -> CMat {
    let a = random_complex(rng, d, d);
    let mut rho = &a * a.adjoint() + CMat::identity(d, d) * c(floor * d as f64);
    let tr = rho.trace();
    rho /= tr;
    crate::numerics::hermitian_part(&rho)
}

/// Quadratic Lindblad model with a Gaussian Hamiltonian kernel and
/// `n_jumps` random complex jump vectors.
pub fn random_quadratic_model<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    n_jumps: usize,
    h_scale: f64,
    jump_scale: f64,
) -> QuadraticLindbladModel {
    let a = random_real_antisymmetric(rng, 2 * n, h_scale);
    let h = a.map(|x| I * x);
    let jumps: Vec<CVec> = (0..n_jumps)
        .map(|_| CVec::from_fn(2 * n, |_, _| Complex64::new(normal(rng), normal(rng)) * jump_scale))
        .collect();
    QuadraticLindbladModel::new(h, jumps).expect("random model is valid by construction")
}
