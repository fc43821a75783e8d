//! Quadratic Lindblad generators at the level of their shape matrices.
//!
//! For `H = Σ H_jk w_j w_k` and jumps `L_α = Σ_j l_{α,j} w_j`, with the
//! dissipator `Σ_α (2 L_α ρ L_α^† - {L_α^† L_α, ρ})`, the covariance matrix
//! obeys `dΓ/dt = -(XΓ + ΓX^T) + Y` where `M = Σ_α l_α l_α^†`,
//! `X = 4[iH + Re M]` and `Y = -8i Im M`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::gaussian::{validate, CovarianceMatrix};
use crate::geometry::TangentSet;
use crate::numerics::{general_eigendecomposition, hermitian_antisymmetric_part, max_abs, LyapunovSolver};
use crate::{c, CMat, CVec, Complex64, Error, RMat, Result, I};

/// Tolerance on `min |x_i + x_j|` below which the steady state is not unique.
pub const UNIQUENESS_TOL: f64 = 1e-12;
/// Eigenvalues of `X` with real part below `-STABILITY_TOL` are an error.
pub const STABILITY_TOL: f64 = 1e-8;
/// Condition estimate above which `X` is flagged as nearly defective.
pub const DEFECTIVE_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticLindbladModel {
    pub n_modes: usize,
    /// Hermitian, `h^T = -h`.
    pub h: CMat,
    pub jumps: Vec<CVec>,
}

impl QuadraticLindbladModel {
    pub fn new(h: CMat, jumps: Vec<CVec>) -> Result<Self> {
        let dim = h.nrows();
        if dim == 0 || dim % 2 != 0 || h.ncols() != dim {
            return Err(Error::DimensionMismatch(alloc::format!("Hamiltonian kernel {}x{}", dim, h.ncols())));
        }
        let scale = max_abs(&h).max(1.0);
        let herm = max_abs(&(&h - h.adjoint()));
        if herm > 1e-12 * scale {
            return Err(Error::NotHermitian(herm));
        }
        let anti = max_abs(&(&h + h.transpose()));
        if anti > 1e-12 * scale {
            return Err(Error::NotAntisymmetric(anti));
        }
        if let Some(bad) = jumps.iter().find(|l| l.len() != dim) {
            return Err(Error::DimensionMismatch(alloc::format!("jump of length {} for {dim} Majoranas", bad.len())));
        }
        Ok(Self { n_modes: dim / 2, h, jumps })
    }

    pub fn dimension(&self) -> usize {
        2 * self.n_modes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeMatrices {
    pub x: RMat,
    pub y: CMat,
    pub m: CMat,
}

/// `M = Σ_α l_α l_α^†`.
pub fn bath_matrix(jumps: &[CVec]) -> Result<CMat> {
    let first = jumps.first().ok_or(Error::EmptyJumps)?;
    let dim = first.len();
    let mut m = CMat::zeros(dim, dim);
    for l in jumps {
        if l.len() != dim {
            return Err(Error::DimensionMismatch(alloc::format!("jump lengths {} and {dim}", l.len())));
        }
        m += l * l.adjoint();
    }
    Ok(m)
}

fn shape_from(h: &CMat, m: &CMat) -> ShapeMatrices {
    let x = (h * I + m.map(|z| c(z.re))).map(|z| 4.0 * z.re);
    let y = m.map(|z| -8.0 * I * z.im);
    ShapeMatrices { x, y, m: m.clone() }
}

pub fn shape_matrices(model: &QuadraticLindbladModel) -> Result<ShapeMatrices> {
    let m = if model.jumps.is_empty() {
        CMat::zeros(model.dimension(), model.dimension())
    } else {
        bath_matrix(&model.jumps)?
    };
    Ok(shape_from(&model.h, &m))
}

/// `(∂X, ∂Y)` from `∂H` and the derivatives of the jump vectors.
pub fn shape_derivative(model: &QuadraticLindbladModel, dh: &CMat, djumps: &[CVec]) -> Result<(RMat, CMat)> {
    if djumps.len() != model.jumps.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{} jump derivatives for {} jumps",
            djumps.len(),
            model.jumps.len()
        )));
    }
    let dim = model.dimension();
    let mut dm = CMat::zeros(dim, dim);
    for (l, dl) in model.jumps.iter().zip(djumps) {
        dm += dl * l.adjoint() + l * dl.adjoint();
    }
    let s = shape_from(dh, &dm);
    Ok((s.x, s.y))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// `2 min_j Re x_j`.
    pub delta: f64,
    /// `min_{i,j} |x_i + x_j|`.
    pub delta_xhat: f64,
    /// Minimum over conjugate pairs `{x, x̄}` of `|x + x̄|`.
    pub delta_liouville: f64,
    pub spectrum: Vec<Complex64>,
    pub condition: f64,
    /// Set when the eigenvalue condition estimate exceeds [`DEFECTIVE_CONDITION`].
    pub near_defective: bool,
}

pub fn gap_report(x: &RMat) -> Result<GapReport> {
    let eig = general_eigendecomposition(x)?;
    let spectrum = eig.values;
    let min_re = spectrum.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if min_re < -STABILITY_TOL {
        return Err(Error::InstabilityDetected(min_re));
    }
    let mut delta_xhat = f64::INFINITY;
    for a in &spectrum {
        for b in &spectrum {
            delta_xhat = delta_xhat.min((a + b).norm());
        }
    }
    // each eigenvalue together with its conjugate partner; real ones pair
    // with themselves
    let delta_liouville = spectrum.iter().map(|z| (z + z.conj()).norm()).fold(f64::INFINITY, f64::min);
    Ok(GapReport {
        delta: 2.0 * min_re,
        delta_xhat,
        delta_liouville,
        spectrum,
        condition: eig.condition,
        near_defective: eig.condition > DEFECTIVE_CONDITION,
    })
}

/// Steady-state solver for fixed shape matrices; the Schur form of `X` is
/// shared between the covariance and its tangents.
#[derive(Debug, Clone)]
pub struct NessSolver {
    solver: LyapunovSolver,
}

impl NessSolver {
    pub fn new(shape: &ShapeMatrices) -> Result<Self> {
        let solver = LyapunovSolver::new(&shape.x)?;
        let scale = max_abs(&shape.x.map(c)).max(1.0);
        if solver.min_eigen_sum() < UNIQUENESS_TOL * scale {
            return Err(Error::NonUniqueSteadyState(solver.min_eigen_sum()));
        }
        Ok(Self { solver })
    }

    /// Solution of `X Z + Z X^T = rhs`, projected on Hermitian antisymmetric
    /// matrices.
    pub fn solve(&self, rhs: &CMat) -> Result<CMat> {
        let z = self.solver.solve(rhs).map_err(|e| match e {
            Error::SingularSylvester { min_sum } => Error::NonUniqueSteadyState(min_sum),
            other => other,
        })?;
        Ok(hermitian_antisymmetric_part(&z))
    }

    pub fn covariance(&self, shape: &ShapeMatrices) -> Result<CovarianceMatrix> {
        validate(&self.solve(&shape.y)?)
    }

    /// `∂Γ` from `X ∂Γ + ∂Γ X^T = ∂Y - ∂X Γ - Γ ∂X^T`.
    pub fn tangent(&self, gamma: &CMat, dx: &RMat, dy: &CMat) -> Result<CMat> {
        let dxc = dx.map(c);
        let rhs = dy - &dxc * gamma - gamma * dxc.transpose();
        self.solve(&rhs)
    }
}

pub fn ness_covariance(shape: &ShapeMatrices) -> Result<CovarianceMatrix> {
    NessSolver::new(shape)?.covariance(shape)
}

pub fn ness_tangents(
    shape: &ShapeMatrices,
    labels: &[&str],
    dx: &[RMat],
    dy: &[CMat],
    gamma: &CMat,
) -> Result<TangentSet> {
    if dx.len() != dy.len() || dx.len() != labels.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{} labels, {} dX, {} dY",
            labels.len(),
            dx.len(),
            dy.len()
        )));
    }
    let solver = NessSolver::new(shape)?;
    let d_gamma = dx.iter().zip(dy).map(|(a, b)| solver.tangent(gamma, a, b)).collect::<Result<Vec<_>>>()?;
    TangentSet::new(labels.iter().map(|s| alloc::string::String::from(*s)).collect(), d_gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{gamma_from_dense, majorana_operators, purity};
    use crate::oracle::dense_lindblad_ness;
    use crate::random::random_quadratic_model;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Dense Hamiltonian and jump operators of a quadratic model.
    fn dense_model(model: &QuadraticLindbladModel) -> (CMat, Vec<CMat>) {
        let w = majorana_operators(model.n_modes);
        let d = w[0].nrows();
        let mut h = CMat::zeros(d, d);
        for j in 0..w.len() {
            for k in 0..w.len() {
                if model.h[(j, k)] != c(0.0) {
                    h += &w[j] * &w[k] * model.h[(j, k)];
                }
            }
        }
        let jumps = model
            .jumps
            .iter()
            .map(|l| {
                let mut op = CMat::zeros(d, d);
                for (j, wj) in w.iter().enumerate() {
                    op += wj * l[j];
                }
                op
            })
            .collect();
        (crate::numerics::hermitian_part(&h), jumps)
    }

    #[test]
    fn bath_matrix_examples() {
        let e1 = CVec::from_vec(alloc::vec![c(1.0), c(0.0)]);
        let m = bath_matrix(&[e1]).unwrap();
        assert_eq!(m, CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]));
        let real = CVec::from_vec(alloc::vec![c(0.3), c(-1.2), c(0.5), c(2.0)]);
        assert!(bath_matrix(&[real]).unwrap().iter().all(|z| z.im == 0.0));
        assert!(matches!(bath_matrix(&[]), Err(Error::EmptyJumps)));
    }

    #[test]
    fn real_jumps_give_maximally_mixed() {
        let model = QuadraticLindbladModel::new(
            CMat::zeros(4, 4),
            alloc::vec![
                CVec::from_vec(alloc::vec![c(1.0), c(0.2), c(0.0), c(0.0)]),
                CVec::from_vec(alloc::vec![c(0.0), c(1.0), c(0.5), c(0.0)]),
                CVec::from_vec(alloc::vec![c(0.0), c(0.0), c(1.0), c(1.0)]),
                CVec::from_vec(alloc::vec![c(0.3), c(0.0), c(0.0), c(1.0)]),
            ],
        )
        .unwrap();
        let shape = shape_matrices(&model).unwrap();
        assert!(max_abs(&shape.y) == 0.0);
        assert!(ness_covariance(&shape).unwrap().gamma.norm() < 1e-14);
    }

    #[test]
    fn pure_loss_gives_vacuum() {
        // L_j = √κ c_j with c_j = (w_{2j} - i w_{2j+1})/2
        let n = 2;
        let kappa = 0.7;
        let jumps = (0..n)
            .map(|j| {
                let mut l = CVec::zeros(2 * n);
                l[2 * j] = c(kappa.sqrt() / 2.0);
                l[2 * j + 1] = -I * (kappa.sqrt() / 2.0);
                l
            })
            .collect();
        let model = QuadraticLindbladModel::new(CMat::zeros(2 * n, 2 * n), jumps).unwrap();
        let shape = shape_matrices(&model).unwrap();
        let gamma = ness_covariance(&shape).unwrap().gamma;
        assert!((purity(&gamma).unwrap() - 1.0).abs() < 1e-12);
        // vacuum: ⟨c^†c⟩ = (1 - i Γ_{01})/2 = 0
        for j in 0..n {
            assert!((gamma[(2 * j, 2 * j + 1)] - (-I)).norm() < 1e-12);
        }
        let (hd, jd) = dense_model(&model);
        let dense = dense_lindblad_ness(&hd, &jd).unwrap();
        assert!((dense.rho[(0, 0)] - c(1.0)).norm() < 1e-10);
        assert!((gamma_from_dense(&dense).unwrap() - gamma).norm() < 1e-10);
    }

    #[test]
    fn gap_report_diagonal() {
        let r = gap_report(&RMat::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![1.0, 2.0]))).unwrap();
        assert_eq!(r.delta, 2.0);
        assert_eq!(r.delta_xhat, 2.0);
        assert_eq!(r.delta_liouville, 2.0);
        assert!(matches!(
            gap_report(&RMat::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![-1.0, 2.0]))),
            Err(Error::InstabilityDetected(_))
        ));
    }

    #[test]
    fn tangents_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let model = random_quadratic_model(&mut rng, 2, 3, 1.0, 0.5);
        let shape = shape_matrices(&model).unwrap();
        let gamma = ness_covariance(&shape).unwrap().gamma;
        let zero = ness_tangents(&shape, &["a"], &[RMat::zeros(4, 4)], &[CMat::zeros(4, 4)], &gamma).unwrap();
        assert!(zero.d_gamma[0].norm() == 0.0);
        // Y → (1 + λ) Y scales Γ linearly
        let t = ness_tangents(&shape, &["s"], &[RMat::zeros(4, 4)], &[shape.y.clone()], &gamma).unwrap();
        assert!((&t.d_gamma[0] - &gamma).norm() < 1e-12);
    }

    #[test]
    fn non_unique_detected() {
        let model = QuadraticLindbladModel::new(
            CMat::zeros(4, 4),
            alloc::vec![CVec::from_vec(alloc::vec![c(1.0), c(0.0), c(0.0), c(0.0)])],
        )
        .unwrap();
        let shape = shape_matrices(&model).unwrap();
        assert!(matches!(ness_covariance(&shape), Err(Error::NonUniqueSteadyState(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn lyapunov_matches_dense(seed in any::<u64>(), n in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let model = random_quadratic_model(&mut rng, n, 2 * n, 1.0, 0.6);
            let shape = shape_matrices(&model).unwrap();
            let x = &shape.x;
            prop_assert!((x + x.transpose() - shape.m.map(|z| 8.0 * z.re)).amax() < 1e-12);
            let gamma = ness_covariance(&shape).unwrap().gamma;
            prop_assert!(crate::numerics::spectral_norm(&gamma) <= 1.0 + 1e-10);
            let (hd, jd) = dense_model(&model);
            let dense = dense_lindblad_ness(&hd, &jd).unwrap();
            prop_assert!((gamma_from_dense(&dense).unwrap() - gamma).camax() < 1e-8);
        }

        #[test]
        fn gap_equality(seed in any::<u64>(), n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let model = random_quadratic_model(&mut rng, n, n + 1, 1.0, 0.6);
            let r = gap_report(&shape_matrices(&model).unwrap().x).unwrap();
            prop_assume!(r.delta > 0.01);
            prop_assert!((r.delta - r.delta_xhat).abs() <= 1e-8 * r.delta);
            prop_assert!((r.delta - r.delta_liouville).abs() <= 1e-8 * r.delta);
        }
    }
}
