//! Gaussian states through their Majorana covariance matrix
//! `Γ_jk = ½ Tr(ρ [w_j, w_k])`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::numerics::{hermitian_eigendecomposition, max_abs, spectral_norm};
use crate::oracle::DenseState;
use crate::{c, CMat, Complex64, Error, RMat, Result, I};

/// Tolerance on the Hermitian / antisymmetric checks in [`validate`].
pub const PHYSICALITY_TOL: f64 = 1e-10;
/// Modes with `|γ| ≥ 1 - EPS_PURE` count as pure.
pub const EPS_PURE: f64 = 1e-12;
/// Default cap on the number of modes expanded into a dense state.
pub const DEFAULT_MAX_MODES: usize = 7;

/// A validated covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub n_modes: usize,
    pub gamma: CMat,
}

impl CovarianceMatrix {
    pub fn as_matrix(&self) -> &CMat {
        &self.gamma
    }
}

/// `Γ = Q (⊕_k [[0, iγ_k], [-iγ_k, 0]]) Q^T` with real orthogonal `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenmodeDecomposition {
    pub q: RMat,
    pub gammas: Vec<f64>,
}

impl EigenmodeDecomposition {
    /// Reassemble `Γ`.
    pub fn gamma(&self) -> CMat {
        let n = self.gammas.len();
        let mut d = CMat::zeros(2 * n, 2 * n);
        for (k, &g) in self.gammas.iter().enumerate() {
            d[(2 * k, 2 * k + 1)] = I * g;
            d[(2 * k + 1, 2 * k)] = -I * g;
        }
        let q = self.q.map(c);
        &q * d * q.transpose()
    }
}

/// Check the physicality conditions on `Γ`.
pub fn validate(gamma: &CMat) -> Result<CovarianceMatrix> {
    let (r, cols) = gamma.shape();
    if r != cols || r % 2 != 0 || r == 0 {
        return Err(Error::DimensionMismatch(alloc::format!(
            "covariance matrix must be square with even dimension, got {r}x{cols}"
        )));
    }
    let scale = max_abs(gamma).max(1.0);
    let anti = max_abs(&(gamma + gamma.transpose()));
    if anti > PHYSICALITY_TOL * scale {
        return Err(Error::NotAntisymmetric(anti));
    }
    let herm = max_abs(&(gamma - gamma.adjoint()));
    if herm > PHYSICALITY_TOL * scale {
        return Err(Error::NotHermitian(herm));
    }
    let norm = spectral_norm(gamma);
    if norm > 1.0 + PHYSICALITY_TOL {
        return Err(Error::NormExceedsOne(norm));
    }
    Ok(CovarianceMatrix { n_modes: r / 2, gamma: gamma.clone() })
}

fn phase_fix(v: &mut nalgebra::DVector<Complex64>) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        // strict comparison with a small margin keeps the choice stable
        if z.norm() > best_abs * (1.0 + 1e-9) {
            best_abs = z.norm();
            best = i;
        }
    }
    if best_abs > 0.0 {
        let ph = v[best] / best_abs;
        *v /= ph;
    }
}

/// Orthonormal real basis of the span of the real and imaginary parts of
/// `vecs`, of dimension `dim`.
fn real_basis(vecs: &[nalgebra::DVector<Complex64>], dim: usize) -> RMat {
    let len = vecs[0].len();
    let mut a = RMat::zeros(len, 2 * vecs.len());
    for (j, v) in vecs.iter().enumerate() {
        for i in 0..len {
            a[(i, 2 * j)] = v[i].re;
            a[(i, 2 * j + 1)] = v[i].im;
        }
    }
    let svd = nalgebra::SVD::new(a, true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let mut out = RMat::zeros(len, dim);
    for (k, &j) in order.iter().take(dim).enumerate() {
        let mut col = u.column(j).into_owned();
        // sign convention: largest entry positive
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col = -col;
        }
        out.set_column(k, &col);
    }
    out
}

/// Canonical form of `Γ`. Modes are ordered by decreasing `γ_k ≥ 0`.
pub fn eigenmodes(gamma: &CMat) -> Result<EigenmodeDecomposition> {
    let dim = gamma.nrows();
    if dim % 2 != 0 || gamma.ncols() != dim {
        return Err(Error::DimensionMismatch(alloc::format!("expected even square matrix, got {dim}x{}", gamma.ncols())));
    }
    let n = dim / 2;
    let (vals, vecs) = hermitian_eigendecomposition(gamma)?;
    let zero_tol = 1e-13 * max_abs(gamma).max(1.0);
    let mut q = RMat::zeros(dim, dim);
    let mut gammas = Vec::with_capacity(n);
    let mut col = 0;
    // eigenvalues ascending: the upper half holds the nonnegative partners
    for idx in (n..dim).rev() {
        let g = vals[idx];
        if g <= zero_tol {
            break;
        }
        let mut v = vecs.column(idx).into_owned();
        phase_fix(&mut v);
        let s = core::f64::consts::SQRT_2;
        for i in 0..dim {
            q[(i, col)] = s * v[i].re;
            q[(i, col + 1)] = -s * v[i].im;
        }
        gammas.push(g.min(1.0));
        col += 2;
    }
    let paired = col / 2;
    if paired < n {
        let null: Vec<_> = vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v.abs() <= zero_tol)
            .map(|(i, _)| vecs.column(i).into_owned())
            .collect();
        let need = dim - col;
        let basis = if null.is_empty() {
            RMat::zeros(dim, need)
        } else {
            real_basis(&null, need)
        };
        for k in 0..need {
            q.set_column(col + k, &basis.column(k));
        }
        for _ in paired..n {
            gammas.push(0.0);
        }
    }
    // polar re-orthogonalization removes mixing between nearly degenerate ±γ
    let svd = nalgebra::SVD::new(q, true, true);
    let q = svd.u.expect("u") * svd.v_t.expect("v_t");
    Ok(EigenmodeDecomposition { q, gammas })
}

/// `√det((1 + Γ²)/2) = Π_k (1 + γ_k²)/2`.
pub fn purity(gamma: &CMat) -> Result<f64> {
    let modes = eigenmodes(gamma)?;
    Ok(modes.gammas.iter().map(|g| (1.0 + g * g) / 2.0).product())
}

/// Real antisymmetric `Ω` with `Γ = tanh(iΩ/2)`.
pub fn omega_from_gamma(gamma: &CMat) -> Result<RMat> {
    omega_from_gamma_eps(gamma, EPS_PURE)
}

pub fn omega_from_gamma_eps(gamma: &CMat, eps_pure: f64) -> Result<RMat> {
    let modes = eigenmodes(gamma)?;
    let n = modes.gammas.len();
    let mut d = RMat::zeros(2 * n, 2 * n);
    for (k, &g) in modes.gammas.iter().enumerate() {
        if g.abs() >= 1.0 - eps_pure {
            return Err(Error::PureModePresent(g));
        }
        let w = 2.0 * g.atanh();
        d[(2 * k, 2 * k + 1)] = w;
        d[(2 * k + 1, 2 * k)] = -w;
    }
    Ok(&modes.q * d * modes.q.transpose())
}

/// Inverse of [`omega_from_gamma`]: `Γ = tanh(iΩ/2)`.
pub fn gamma_from_omega(omega: &RMat) -> Result<CMat> {
    let h = omega.map(|x| I * x);
    crate::numerics::hermitian_function(&h, |x| (x / 2.0).tanh())
}

/// Pfaffian of a complex antisymmetric matrix (Parlett-Reid with pivoting).
pub fn pfaffian(a: &CMat) -> Result<Complex64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(alloc::format!("pfaffian of {}x{}", n, a.ncols())));
    }
    if n % 2 == 1 {
        return Ok(c(0.0));
    }
    let mut a = a.clone();
    let mut pf = c(1.0);
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].norm();
        for i in k + 2..n {
            if a[(i, k)].norm() > best {
                best = a[(i, k)].norm();
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        if a[(k + 1, k)] == c(0.0) {
            return Ok(c(0.0));
        }
        let pivot = a[(k, k + 1)];
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<Complex64> = (k + 2..n).map(|j| a[(k, j)] / pivot).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|j| a[(j, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    Ok(pf)
}

/// `⟨w_{i_1} w_{i_2} ⋯ w_{i_{2p}}⟩` by Wick's theorem (zero-based indices).
pub fn wick_expectation(gamma: &CMat, indices: &[usize]) -> Result<Complex64> {
    let dim = gamma.nrows();
    for &i in indices {
        if i >= dim {
            return Err(Error::IndexOutOfRange { index: i, len: dim });
        }
    }
    let m = indices.len();
    if m == 0 {
        return Ok(c(1.0));
    }
    if m % 2 == 1 {
        return Ok(c(0.0));
    }
    let two_point = |j: usize, k: usize| gamma[(j, k)] + if j == k { c(1.0) } else { c(0.0) };
    let mut mat = CMat::zeros(m, m);
    for a in 0..m {
        for b in a + 1..m {
            let v = two_point(indices[a], indices[b]);
            mat[(a, b)] = v;
            mat[(b, a)] = -v;
        }
    }
    pfaffian(&mat)
}

/// Dense Jordan-Wigner Majorana operators on `n` sites (site 0 is the
/// leftmost tensor factor, basis state 0 is the vacuum).
pub fn majorana_operators(n: usize) -> Vec<CMat> {
    let id = CMat::identity(2, 2);
    let z = CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    let x = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    // -σ^y
    let my = CMat::from_row_slice(2, 2, &[c(0.0), I, -I, c(0.0)]);
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        for local in [&x, &my] {
            let mut op = CMat::identity(1, 1);
            for site in 0..n {
                let f = if site < j {
                    &z
                } else if site == j {
                    local
                } else {
                    &id
                };
                op = op.kronecker(f);
            }
            out.push(op);
        }
    }
    out
}

/// Expand a Gaussian state into its `2^n × 2^n` density matrix.
pub fn dense_state_from_gamma(gamma: &CMat, max_modes: usize) -> Result<DenseState> {
    let n = gamma.nrows() / 2;
    if n > max_modes {
        return Err(Error::TooManyModes { modes: n, max: max_modes });
    }
    let modes = eigenmodes(gamma)?;
    let w = majorana_operators(n);
    let d = 1usize << n;
    let z: Vec<CMat> = (0..2 * n)
        .map(|a| {
            let mut acc = CMat::zeros(d, d);
            for (j, wj) in w.iter().enumerate() {
                let coef = modes.q[(j, a)];
                if coef != 0.0 {
                    acc += wj * c(coef);
                }
            }
            acc
        })
        .collect();
    let mut rho = CMat::identity(d, d);
    let id = CMat::identity(d, d);
    for (k, &g) in modes.gammas.iter().enumerate() {
        let factor = (&id - (&z[2 * k] * &z[2 * k + 1]) * (I * g)) * c(0.5);
        rho = rho * factor;
    }
    DenseState::new(crate::numerics::hermitian_part(&rho))
}

/// `Γ_jk = ½ Tr(ρ [w_j, w_k])` of a dense state on `n` sites.
pub fn gamma_from_dense(state: &DenseState) -> Result<CMat> {
    let d = state.dimension();
    let n = d.trailing_zeros() as usize;
    if 1usize << n != d {
        return Err(Error::DimensionMismatch(alloc::format!("dimension {d} is not a power of two")));
    }
    let w = majorana_operators(n);
    let rw: Vec<CMat> = w.iter().map(|wj| &state.rho * wj).collect();
    let mut g = CMat::zeros(2 * n, 2 * n);
    for j in 0..2 * n {
        for k in j + 1..2 * n {
            let v = (&rw[j] * &w[k]).trace();
            let u = (&rw[k] * &w[j]).trace();
            let val = (v - u) * 0.5;
            g[(j, k)] = val;
            g[(k, j)] = -val;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_covariance;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(g: f64) -> CMat {
        CMat::from_row_slice(2, 2, &[c(0.0), I * g, -I * g, c(0.0)])
    }

    #[test]
    fn validate_cases() {
        assert!(validate(&CMat::zeros(4, 4)).is_ok());
        assert!(validate(&single(1.0)).is_ok());
        assert!(matches!(validate(&single(1.2)), Err(Error::NormExceedsOne(_))));
        let mut bad = single(0.5);
        bad[(0, 0)] = c(0.1);
        assert!(matches!(validate(&bad), Err(Error::NotAntisymmetric(_))));
        let sym = CMat::from_row_slice(2, 2, &[c(0.0), c(0.3), c(-0.3), c(0.0)]);
        assert!(matches!(validate(&sym), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn single_mode_basics() {
        let m = eigenmodes(&single(0.6)).unwrap();
        assert!((m.gammas[0] - 0.6).abs() < 1e-14);
        assert!((purity(&single(0.6)).unwrap() - 0.68).abs() < 1e-14);
        assert!((purity(&single(0.0)).unwrap() - 0.5).abs() < 1e-14);
        assert!((purity(&single(1.0)).unwrap() - 1.0).abs() < 1e-14);
        let om = omega_from_gamma(&single(1f64.tanh())).unwrap();
        assert!((om[(0, 1)] - 2.0).abs() < 1e-12);
        assert!(omega_from_gamma(&CMat::zeros(2, 2)).unwrap().norm() < 1e-15);
        assert!(matches!(omega_from_gamma(&single(1.0)), Err(Error::PureModePresent(_))));
    }

    #[test]
    fn zero_gamma_modes() {
        let m = eigenmodes(&CMat::zeros(6, 6)).unwrap();
        assert!(m.gammas.iter().all(|&g| g == 0.0));
        assert!((&m.q * m.q.transpose() - RMat::identity(6, 6)).norm() < 1e-12);
    }

    #[test]
    fn wick_trivial() {
        let g = CMat::zeros(4, 4);
        assert!(wick_expectation(&g, &[0, 1, 2, 3]).unwrap().norm() < 1e-15);
        assert!((wick_expectation(&g, &[0, 0, 1, 1]).unwrap() - c(1.0)).norm() < 1e-15);
        assert!(matches!(wick_expectation(&g, &[0, 9]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn dense_trivial() {
        let s = dense_state_from_gamma(&single(1.0), 7).unwrap();
        assert!((s.rho.trace() - c(1.0)).norm() < 1e-14);
        assert!((purity(&single(1.0)).unwrap() - (&s.rho * &s.rho).trace().re).abs() < 1e-14);
        let s = dense_state_from_gamma(&CMat::zeros(6, 6), 7).unwrap();
        assert!((&s.rho - CMat::identity(8, 8) * c(0.125)).norm() < 1e-14);
        assert!(matches!(
            dense_state_from_gamma(&CMat::zeros(16, 16), 7),
            Err(Error::TooManyModes { .. })
        ));
    }

    #[test]
    fn majoranas_anticommute() {
        let w = majorana_operators(3);
        for j in 0..6 {
            for k in 0..6 {
                let ac = &w[j] * &w[k] + &w[k] * &w[j];
                let expect = if j == k { CMat::identity(8, 8) * c(2.0) } else { CMat::zeros(8, 8) };
                assert!((ac - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn vacuum_is_basis_state_zero() {
        // c_0 = (w_0 - i w_1)/2 annihilates e_0
        let w = majorana_operators(2);
        let c0 = (&w[0] - &w[1] * I) * c(0.5);
        assert!(c0.column(0).norm() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn eigenmodes_round_trip(seed in any::<u64>(), n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_covariance(&mut rng, n, 0.95);
            let m = eigenmodes(&g).unwrap();
            prop_assert!((&m.q * m.q.transpose() - RMat::identity(2 * n, 2 * n)).norm() < 1e-10);
            prop_assert!((m.gamma() - &g).norm() < 1e-10);
            let p = purity(&g).unwrap();
            prop_assert!(p > 0.0 && p <= 1.0 + 1e-12);
        }

        #[test]
        fn omega_round_trip(seed in any::<u64>(), n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_covariance(&mut rng, n, 0.95);
            let om = omega_from_gamma(&g).unwrap();
            prop_assert!((&om + om.transpose()).norm() < 1e-12);
            prop_assert!((gamma_from_omega(&om).unwrap() - &g).norm() < 1e-10);
        }

        #[test]
        fn dense_round_trip(seed in any::<u64>(), n in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_covariance(&mut rng, n, 1.0);
            let s = dense_state_from_gamma(&g, 7).unwrap();
            prop_assert!((gamma_from_dense(&s).unwrap() - &g).norm() < 1e-10);
        }

        #[test]
        fn wick_matches_dense(seed in any::<u64>(), n in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_covariance(&mut rng, n, 1.0);
            let s = dense_state_from_gamma(&g, 7).unwrap();
            let w = majorana_operators(n);
            let m = 2 * n;
            for j in 0..m { for k in 0..m { for l in 0..m { for q in 0..m {
                let op = &w[j] * &w[k] * &w[l] * &w[q];
                let dense = (&s.rho * op).trace();
                let wick = wick_expectation(&g, &[j, k, l, q]).unwrap();
                prop_assert!((dense - wick).norm() < 1e-10);
            }}}}
        }
    }
}
