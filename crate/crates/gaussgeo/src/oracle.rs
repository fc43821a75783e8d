//! Exact dense-matrix geometry of mixed states on small Hilbert spaces.
//!
//! Every Gaussian fast path in the crate is checked against the routines
//! here. Sums over pairs of eigenvalues skip pairs with `p_j + p_k` below
//! [`SUPPORT_TOL`].

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::numerics::{hermitian_eigendecomposition, hermitian_function, hermitian_part, max_abs};
use crate::{c, CMat, Complex64, Error, RMat, Result, I};

pub const SUPPORT_TOL: f64 = 1e-12;
/// Eigenvalues closer than this are treated as one degenerate level.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Largest Hilbert space accepted by [`dense_lindblad_ness`].
pub const MAX_LINDBLAD_DIM: usize = 64;

/// A density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub rho: CMat,
}

impl DenseState {
    pub fn new(rho: CMat) -> Result<Self> {
        let d = rho.nrows();
        if d == 0 || rho.ncols() != d {
            return Err(Error::DimensionMismatch(alloc::format!("density matrix {}x{}", d, rho.ncols())));
        }
        let herm = max_abs(&(&rho - rho.adjoint()));
        if herm > 1e-12 * max_abs(&rho).max(1.0) {
            return Err(Error::NotHermitian(herm));
        }
        let tr = rho.trace();
        if (tr - c(1.0)).norm() > 1e-10 {
            return Err(Error::DegenerateInput(alloc::format!("trace {} differs from 1", tr)));
        }
        let (vals, _) = hermitian_eigendecomposition(&rho)?;
        if vals[0] < -1e-12 {
            return Err(Error::NonPositiveValue(vals[0]));
        }
        Ok(Self { rho })
    }

    pub fn dimension(&self) -> usize {
        self.rho.nrows()
    }

    pub fn expectation(&self, op: &CMat) -> Complex64 {
        (&self.rho * op).trace()
    }
}

fn psd_sqrt(a: &CMat) -> Result<CMat> {
    hermitian_function(a, |x| x.max(0.0).sqrt())
}

/// Uhlmann fidelity `Tr √(√ρ₂ ρ₁ √ρ₂)`.
pub fn fidelity(rho1: &DenseState, rho2: &DenseState) -> Result<f64> {
    let s2 = psd_sqrt(&rho2.rho)?;
    let inner = hermitian_part(&(&s2 * &rho1.rho * &s2));
    let (vals, _) = hermitian_eigendecomposition(&inner)?;
    Ok(vals.iter().map(|v| v.max(0.0).sqrt()).sum::<f64>())
}

/// `√(2 - 2F)`.
pub fn bures_distance(rho1: &DenseState, rho2: &DenseState) -> Result<f64> {
    let f = fidelity(rho1, rho2)?.min(1.0);
    Ok((2.0 - 2.0 * f).max(0.0).sqrt())
}

/// `arccos F`.
pub fn bures_angle(rho1: &DenseState, rho2: &DenseState) -> Result<f64> {
    Ok(fidelity(rho1, rho2)?.clamp(0.0, 1.0).acos())
}

/// The operator `M = ρ₂^{-1/2} √(ρ₂^{1/2} ρ₁ ρ₂^{1/2}) ρ₂^{-1/2}` whose
/// eigenbasis measurement attains the fidelity.
pub fn optimal_distinguishing_observable(rho1: &DenseState, rho2: &DenseState) -> Result<CMat> {
    let (vals, v) = hermitian_eigendecomposition(&rho2.rho)?;
    if vals[0] <= SUPPORT_TOL {
        return Err(Error::SingularState);
    }
    let diag = |f: &dyn Fn(f64) -> f64| {
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|&x| c(f(x)))));
        &v * d * v.adjoint()
    };
    let s = diag(&|x: f64| x.sqrt());
    let si = diag(&|x: f64| 1.0 / x.sqrt());
    let mid = psd_sqrt(&hermitian_part(&(&s * &rho1.rho * &s)))?;
    Ok(hermitian_part(&(&si * mid * &si)))
}

/// Transport generator `G` with `∂ρ = Gρ + ρG` on the support of `ρ`.
pub fn sld_generator(rho: &DenseState, d_rho: &CMat) -> Result<CMat> {
    let (p, v) = hermitian_eigendecomposition(&rho.rho)?;
    let a = v.adjoint() * d_rho * &v;
    let d = p.len();
    let g = CMat::from_fn(d, d, |j, k| {
        let s = p[j] + p[k];
        if s > SUPPORT_TOL {
            a[(j, k)] / s
        } else {
            c(0.0)
        }
    });
    Ok(hermitian_part(&(&v * g * v.adjoint())))
}

/// Bures metric together with its split into the classical (Fisher-Rao)
/// part and the non-classical remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct BuresSplit {
    pub total: RMat,
    pub classical: RMat,
    pub nonclassical: RMat,
}

struct EigenTangents {
    p: Vec<f64>,
    a: Vec<CMat>,
}

fn eigen_tangents(rho: &DenseState, tangents: &[CMat]) -> Result<EigenTangents> {
    let (p, v) = hermitian_eigendecomposition(&rho.rho)?;
    let vd = v.adjoint();
    let a: Vec<CMat> = tangents.iter().map(|t| &vd * t * &v).collect();
    // a tangent with weight between two unoccupied levels means the rank moves
    for am in &a {
        let scale = max_abs(am).max(1e-300);
        for j in 0..p.len() {
            for k in 0..p.len() {
                if p[j] + p[k] <= SUPPORT_TOL && am[(j, k)].norm() > 1e-8 * scale {
                    return Err(Error::RankChange);
                }
            }
        }
    }
    Ok(EigenTangents { p, a })
}

fn pair_sum(et: &EigenTangents, weight: impl Fn(f64, f64) -> Option<Complex64>) -> CMat {
    let m = et.a.len();
    let d = et.p.len();
    let mut out = CMat::zeros(m, m);
    for j in 0..d {
        for k in 0..d {
            let Some(w) = weight(et.p[j], et.p[k]) else { continue };
            for mu in 0..m {
                let x = et.a[mu][(j, k)] * w;
                if x == c(0.0) {
                    continue;
                }
                for nu in 0..m {
                    out[(mu, nu)] += x * et.a[nu][(k, j)];
                }
            }
        }
    }
    out
}

/// Bures metric `g_μν = ½ Σ Re(∂_μρ_jk ∂_νρ_kj)/(p_j + p_k)` from tangents.
pub fn bures_metric_from_tangents(rho: &DenseState, tangents: &[CMat]) -> Result<BuresSplit> {
    let et = eigen_tangents(rho, tangents)?;
    let support = |pj: f64, pk: f64| pj + pk > SUPPORT_TOL;
    let classical = pair_sum(&et, |pj, pk| {
        (support(pj, pk) && (pj - pk).abs() <= DEGENERACY_TOL).then(|| c(0.5 / (pj + pk)))
    })
    .map(|z| z.re);
    let nonclassical = pair_sum(&et, |pj, pk| {
        (support(pj, pk) && (pj - pk).abs() > DEGENERACY_TOL).then(|| c(0.5 / (pj + pk)))
    })
    .map(|z| z.re);
    let sym = |m: RMat| (&m + m.transpose()) * 0.5;
    let classical = sym(classical);
    let nonclassical = sym(nonclassical);
    Ok(BuresSplit { total: &classical + &nonclassical, classical, nonclassical })
}

/// Mean Uhlmann curvature `U_μν = -i Σ (p_j - p_k)/(p_j + p_k)² ∂_μρ_jk ∂_νρ_kj`.
pub fn muc_from_tangents(rho: &DenseState, tangents: &[CMat]) -> Result<RMat> {
    let et = eigen_tangents(rho, tangents)?;
    let s = pair_sum(&et, |pj, pk| {
        let sum = pj + pk;
        (sum > SUPPORT_TOL && pj != pk).then(|| c((pj - pk) / (sum * sum)))
    });
    let u = s.map(|z| (-I * z).re);
    Ok((&u - u.transpose()) * 0.5)
}

/// Quantum Chernoff bound metric, denominators `(√p_j + √p_k)²`.
pub fn qcb_from_tangents(rho: &DenseState, tangents: &[CMat]) -> Result<RMat> {
    let et = eigen_tangents(rho, tangents)?;
    let g = pair_sum(&et, |pj, pk| {
        if pj + pk <= SUPPORT_TOL {
            return None;
        }
        let s = pj.max(0.0).sqrt() + pk.max(0.0).sqrt();
        Some(c(0.5 / (s * s)))
    })
    .map(|z| z.re);
    Ok((&g + g.transpose()) * 0.5)
}

/// A family of density matrices `ρ(λ)`.
pub trait Family {
    fn n_params(&self) -> usize;
    fn state(&self, lambda: &[f64]) -> Result<DenseState>;

    /// Step used by the default finite-difference tangent.
    fn step(&self) -> f64 {
        1e-3
    }

    /// `∂_μ ρ` at `lambda`, by a five-point stencil unless overridden.
    fn tangent(&self, lambda: &[f64], mu: usize) -> Result<CMat> {
        let h = self.step() * lambda[mu].abs().max(1.0);
        let mut pt = lambda.to_vec();
        let mut at = |delta: f64| -> Result<CMat> {
            pt[mu] = lambda[mu] + delta;
            Ok(self.state(&pt)?.rho)
        };
        let fp2 = at(2.0 * h)?;
        let fp1 = at(h)?;
        let fm1 = at(-h)?;
        let fm2 = at(-2.0 * h)?;
        let d = (fm2 - fp2 + (fp1 - fm1) * c(8.0)) / c(12.0 * h);
        Ok(hermitian_part(&d))
    }

    fn tangents(&self, lambda: &[f64]) -> Result<Vec<CMat>> {
        (0..self.n_params()).map(|mu| self.tangent(lambda, mu)).collect()
    }
}

/// Family given by a closure returning the (unnormalized is not allowed)
/// density matrix.
pub struct FnFamily<F> {
    pub n_params: usize,
    pub step: f64,
    pub f: F,
}

impl<F: Fn(&[f64]) -> Result<CMat>> Family for FnFamily<F> {
    fn n_params(&self) -> usize {
        self.n_params
    }
    fn state(&self, lambda: &[f64]) -> Result<DenseState> {
        DenseState::new((self.f)(lambda)?)
    }
    fn step(&self) -> f64 {
        self.step
    }
}

/// `ρ(λ) = e^{D(λ)}/Tr e^{D(λ)}` with `D(λ) = D₀ + Σ λ_μ D_μ` Hermitian.
/// Tangents are exact (Daleckii-Krein).
#[derive(Debug, Clone)]
pub struct ExponentialFamily {
    pub d0: CMat,
    pub generators: Vec<CMat>,
}

impl ExponentialFamily {
    pub fn exponent(&self, lambda: &[f64]) -> CMat {
        let mut d = self.d0.clone();
        for (g, &l) in self.generators.iter().zip(lambda) {
            d += g * c(l);
        }
        hermitian_part(&d)
    }
}

/// Derivative of `e^D/Tr e^D` along `dD` in the eigenbasis of `D`.
pub fn exp_state_derivative(d: &CMat, dd: &CMat) -> Result<(CMat, CMat)> {
    let (e, v) = hermitian_eigendecomposition(d)?;
    let top = e[e.len() - 1];
    let w: Vec<f64> = e.iter().map(|x| (x - top).exp()).collect();
    let z: f64 = w.iter().sum();
    let n = e.len();
    let a = v.adjoint() * dd * &v;
    let mut de = CMat::from_fn(n, n, |j, k| {
        let gap = e[j] - e[k];
        let div = if gap.abs() < 1e-9 {
            0.5 * (w[j] + w[k])
        } else {
            (w[j] - w[k]) / gap
        };
        a[(j, k)] * div
    });
    let dz: f64 = (0..n).map(|j| de[(j, j)].re).sum();
    for j in 0..n {
        for k in 0..n {
            de[(j, k)] /= z;
        }
    }
    let p = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, w.iter().map(|x| c(x / z))));
    let drho = de - &p * c(dz / z);
    let vd = v.adjoint();
    Ok((hermitian_part(&(&v * p * &vd)), hermitian_part(&(&v * drho * &vd))))
}

impl Family for ExponentialFamily {
    fn n_params(&self) -> usize {
        self.generators.len()
    }
    fn state(&self, lambda: &[f64]) -> Result<DenseState> {
        let d = self.exponent(lambda);
        let (rho, _) = exp_state_derivative(&d, &CMat::zeros(d.nrows(), d.ncols()))?;
        DenseState::new(rho)
    }
    fn tangent(&self, lambda: &[f64], mu: usize) -> Result<CMat> {
        let d = self.exponent(lambda);
        Ok(exp_state_derivative(&d, &self.generators[mu])?.1)
    }
}

pub fn bures_metric_dense<F: Family + ?Sized>(family: &F, point: &[f64]) -> Result<BuresSplit> {
    bures_metric_from_tangents(&family.state(point)?, &family.tangents(point)?)
}

pub fn muc_dense<F: Family + ?Sized>(family: &F, point: &[f64]) -> Result<RMat> {
    muc_from_tangents(&family.state(point)?, &family.tangents(point)?)
}

pub fn qcb_metric<F: Family + ?Sized>(family: &F, point: &[f64]) -> Result<RMat> {
    qcb_from_tangents(&family.state(point)?, &family.tangents(point)?)
}

/// Phase of the discrete Uhlmann holonomy around a closed polygon in
/// parameter space, with `steps` samples per edge.
///
/// Amplitudes are `w_i = √ρ_i U_i`; consecutive amplitudes are made
/// parallel (`w_i^† w_{i+1} ≥ 0`) through the polar decomposition of
/// `√ρ_i √ρ_{i+1}`, and the phase is `arg Tr(w_N^† w_1)`.
pub fn uhlmann_loop_phase<F: Family + ?Sized>(family: &F, vertices: &[Vec<f64>], steps: usize) -> Result<f64> {
    if vertices.len() < 2 || steps == 0 {
        return Ok(0.0);
    }
    let mut roots = Vec::with_capacity(vertices.len() * steps);
    for (i, a) in vertices.iter().enumerate() {
        let b = &vertices[(i + 1) % vertices.len()];
        for s in 0..steps {
            let t = s as f64 / steps as f64;
            let pt: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
            let rho = family.state(&pt)?;
            let (vals, v) = hermitian_eigendecomposition(&rho.rho)?;
            if vals[0] <= SUPPORT_TOL {
                return Err(Error::RankDeficientOnLoop);
            }
            let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|x| c(x.sqrt()))));
            roots.push(&v * d * v.adjoint());
        }
    }
    let dim = roots[0].nrows();
    let mut u = CMat::identity(dim, dim);
    for i in 0..roots.len() - 1 {
        let a = &roots[i] * &roots[i + 1];
        let svd = nalgebra::SVD::new(a, true, true);
        let w = svd.u.expect("u") * svd.v_t.expect("v_t");
        u = w.adjoint() * u;
    }
    let last = roots.len() - 1;
    let overlap = (u.adjoint() * &roots[last] * &roots[0]).trace();
    Ok(overlap.arg())
}

/// `e^{-βH}/Z`.
pub fn thermal_state(h: &CMat, beta: f64) -> Result<DenseState> {
    let (e, v) = hermitian_eigendecomposition(h)?;
    let w: Vec<f64> = e.iter().map(|x| (-beta * (x - e[0])).exp()).collect();
    let z: f64 = w.iter().sum();
    let p = CMat::from_diagonal(&nalgebra::DVector::from_iterator(w.len(), w.iter().map(|x| c(x / z))));
    DenseState::new(hermitian_part(&(&v * p * v.adjoint())))
}

/// Bures metric along `β` of the thermal family: `(⟨H²⟩ - ⟨H⟩²)/4`.
pub fn fisher_rao_beta(h: &CMat, beta: f64) -> Result<f64> {
    let rho = thermal_state(h, beta)?;
    let m1 = rho.expectation(h).re;
    let m2 = rho.expectation(&(h * h)).re;
    Ok(0.25 * (m2 - m1 * m1).max(0.0))
}

/// Mean Uhlmann curvature of the thermal family of `H₀ + Σ λ_μ O_μ` at
/// `λ = 0`, from the Lehmann representation of the dissipative part of the
/// dynamical susceptibility. The frequency integral collapses onto the
/// Bohr frequencies `ω = E_j - E_i`:
/// `U_μν = -i Σ_ij (O_μ)_ij (O_ν)_ji (p_i - p_j) tanh²(βω/2)/ω²`.
pub fn muc_from_susceptibility(h0: &CMat, observables: &[CMat], beta: f64) -> Result<RMat> {
    let (e, v) = hermitian_eigendecomposition(h0)?;
    let w: Vec<f64> = e.iter().map(|x| (-beta * (x - e[0])).exp()).collect();
    let z: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|x| x / z).collect();
    let vd = v.adjoint();
    let o: Vec<CMat> = observables.iter().map(|op| &vd * op * &v).collect();
    let m = o.len();
    let d = e.len();
    let mut u = RMat::zeros(m, m);
    for i in 0..d {
        for j in 0..d {
            let omega = e[j] - e[i];
            if omega.abs() <= DEGENERACY_TOL {
                continue;
            }
            let t = (beta * omega / 2.0).tanh();
            let weight = (p[i] - p[j]) * t * t / (omega * omega);
            for mu in 0..m {
                for nu in 0..m {
                    u[(mu, nu)] += (-I * o[mu][(i, j)] * o[nu][(j, i)] * weight).re;
                }
            }
        }
    }
    Ok((&u - u.transpose()) * 0.5)
}

/// Coefficient `c_m` of `t^{2m}` in `tanh(t/2)/(t/2)`, written through the
/// Bernoulli numbers as `4(4^{m+1} - 1) B_{2m+2}/(2m+2)!`. With
/// `B_{2k} = (-1)^{k+1} 2 (2k)! ζ(2k)/(2π)^{2k}` this is
/// `(-1)^m 8 (1 - 4^{-(m+1)}) ζ(2m+2)/π^{2m+2}`; the series converges for
/// `|t| < π`.
fn sld_series_coefficient(m: usize) -> f64 {
    let s = (2 * m + 2) as f64;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    sign * 8.0 * (1.0 - 0.25f64.powi(m as i32 + 1)) * zeta(s) * core::f64::consts::PI.powf(-s)
}

fn zeta(s: f64) -> f64 {
    let n = 64usize;
    let mut sum = 0.0;
    for k in 1..n {
        sum += (k as f64).powf(-s);
    }
    let nf = n as f64;
    // Euler-Maclaurin tail
    sum + nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s * nf.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * nf.powf(-s - 3.0) / 720.0
}

/// SLD of `ρ = e^D/Tr e^D` along `∂D` as the nested-commutator series
/// `L = Σ_m c_m ad_D^{2m}(∂D) - ⟨∂D⟩`. Spectra wider than `π/2` (a quarter
/// of the squared convergence radius) are handled in the eigenbasis of
/// `D`, where `f(ad_D)` acts entrywise.
pub fn sld_series_check(d: &CMat, dd: &CMat) -> Result<CMat> {
    let (e, v) = hermitian_eigendecomposition(d)?;
    let spread = e[e.len() - 1] - e[0];
    let top = e[e.len() - 1];
    let w: Vec<f64> = e.iter().map(|x| (x - top).exp()).collect();
    let z: f64 = w.iter().sum();
    let a = v.adjoint() * dd * &v;
    let mean: f64 = (0..e.len()).map(|j| w[j] * a[(j, j)].re).sum::<f64>() / z;
    let n = e.len();
    let id = CMat::identity(n, n);
    if spread < core::f64::consts::FRAC_PI_2 {
        let mut term = dd.clone();
        let mut sum = dd.clone();
        let mut calm = 0;
        for m in 1..400 {
            term = d * &term - &term * d;
            term = d * &term - &term * d;
            let inc = &term * c(sld_series_coefficient(m));
            sum += &inc;
            if max_abs(&inc) <= 1e-17 * max_abs(&sum).max(1e-300) {
                calm += 1;
                if calm >= 2 {
                    return Ok(hermitian_part(&(sum - id * c(mean))));
                }
            } else {
                calm = 0;
            }
        }
        return Err(Error::SeriesDivergence);
    }
    let f = CMat::from_fn(n, n, |j, k| {
        let t = e[j] - e[k];
        let fac = if t.abs() < 1e-8 { 1.0 - t * t / 12.0 } else { (t / 2.0).tanh() / (t / 2.0) };
        a[(j, k)] * fac
    });
    Ok(hermitian_part(&(&v * f * v.adjoint() - id * c(mean))))
}

/// Vectorized (column-major) Lindbladian
/// `ℒρ = -i[H, ρ] + Σ_α (2 L_α ρ L_α^† - {L_α^† L_α, ρ})`.
pub fn lindbladian_matrix(h: &CMat, jumps: &[CMat]) -> CMat {
    let d = h.nrows();
    let id = CMat::identity(d, d);
    let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * (-I);
    for j in jumps {
        let jd = j.adjoint();
        let jj = &jd * j;
        l += j.conjugate().kronecker(j) * c(2.0) - id.kronecker(&jj) - jj.transpose().kronecker(&id);
    }
    l
}

/// Steady state of a dense Lindblad generator: the right singular vector of
/// the vectorized Lindbladian with the smallest singular value.
pub fn dense_lindblad_ness(h: &CMat, jumps: &[CMat]) -> Result<DenseState> {
    let d = h.nrows();
    if d > MAX_LINDBLAD_DIM {
        return Err(Error::DimensionMismatch(alloc::format!("dimension {d} exceeds {MAX_LINDBLAD_DIM}")));
    }
    let l = lindbladian_matrix(h, jumps);
    let svd = nalgebra::SVD::new(l.clone(), false, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let null = sv.iter().filter(|&&s| s <= 1e-10 * smax.max(1.0)).count();
    if null > 1 {
        return Err(Error::DegenerateNullSpace(null));
    }
    let kmin = sv.imin();
    let v = svd.v_t.expect("v_t").row(kmin).adjoint();
    let mut rho = CMat::from_column_slice(d, d, v.as_slice());
    let tr = rho.trace();
    rho /= tr;
    let rho = hermitian_part(&rho);
    let res = max_abs(&CMat::from_column_slice(d * d, 1, (&l * CMat::from_column_slice(d * d, 1, rho.as_slice())).as_slice()));
    if res > 1e-10 * smax.max(1.0) {
        return Err(Error::ConvergenceFailure);
    }
    DenseState::new(rho)
}
