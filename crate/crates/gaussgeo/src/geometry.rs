//! Quantum geometric tensor of Gaussian states from covariance matrices and
//! their tangents.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::numerics::{hermitian_antisymmetric_part, hermitian_eigendecomposition, max_abs, spectral_norm, spectral_norm_real};
use crate::{c, CMat, Complex64, Error, RMat, Result, I};

/// `|1 - γ_j γ_k|` below this is a rank-change denominator.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TangentSet {
    pub parameters: Vec<String>,
    pub d_gamma: Vec<CMat>,
}

impl TangentSet {
    pub fn new(parameters: Vec<String>, d_gamma: Vec<CMat>) -> Result<Self> {
        if parameters.len() != d_gamma.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} labels for {} tangents",
                parameters.len(),
                d_gamma.len()
            )));
        }
        for t in &d_gamma {
            let scale = max_abs(t).max(1.0);
            let anti = max_abs(&(t + t.transpose()));
            if anti > 1e-10 * scale {
                return Err(Error::NotAntisymmetric(anti));
            }
            let herm = max_abs(&(t - t.adjoint()));
            if herm > 1e-10 * scale {
                return Err(Error::NotHermitian(herm));
            }
        }
        Ok(Self { parameters, d_gamma })
    }

    pub fn len(&self) -> usize {
        self.d_gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d_gamma.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryResult {
    /// Bures metric.
    pub g: RMat,
    /// Mean Uhlmann curvature.
    pub u: RMat,
    /// `g + (i/2) u`.
    pub q: CMat,
    /// Incompatibility ratio; `None` when `g` is singular.
    pub r_ratio: Option<f64>,
}

/// Eigen-data of `Γ` shared by the kernel and the tensor.
struct Spectral {
    gammas: Vec<f64>,
    v: CMat,
}

fn spectral(gamma: &CMat) -> Result<Spectral> {
    let (gammas, v) = hermitian_eigendecomposition(gamma)?;
    Ok(Spectral { gammas: gammas.into_iter().map(|g| g.clamp(-1.0, 1.0)).collect(), v })
}

fn rank_guard(dg: &CMat, scale: f64, j: usize, k: usize) -> Result<()> {
    let v = dg[(j, k)].norm();
    if v > 1e-8 * scale {
        return Err(Error::RankChangeSingularity(v));
    }
    Ok(())
}

/// Solution of `Γ K Γ - K = ∂Γ`, in the eigenbasis of `Γ`
/// `K_jk = (∂Γ)_jk/(γ_j γ_k - 1)`.
pub fn transport_kernel(gamma: &CMat, d_gamma: &CMat) -> Result<CMat> {
    let sp = spectral(gamma)?;
    let vd = sp.v.adjoint();
    let a = &vd * d_gamma * &sp.v;
    let scale = max_abs(&a);
    let m = sp.gammas.len();
    let mut k = CMat::zeros(m, m);
    for j in 0..m {
        for l in 0..m {
            let den = sp.gammas[j] * sp.gammas[l] - 1.0;
            if den.abs() < RANK_TOL {
                rank_guard(&a, scale, j, l)?;
                continue;
            }
            k[(j, l)] = a[(j, l)] / den;
        }
    }
    Ok(hermitian_antisymmetric_part(&(&sp.v * k * vd)))
}

/// Quantum geometric tensor
/// `Q_μν = (1/8) Σ_jk (1-γ_j)(1+γ_k)(∂_μΓ)_jk(∂_νΓ)_kj/(1-γ_jγ_k)²`
/// evaluated in the eigenbasis of `Γ`.
pub fn qgt(gamma: &CMat, tangents: &TangentSet) -> Result<GeometryResult> {
    let sp = spectral(gamma)?;
    let vd = sp.v.adjoint();
    let a: Vec<CMat> = tangents.d_gamma.iter().map(|t| &vd * t * &sp.v).collect();
    let p = a.len();
    let m = sp.gammas.len();
    let mut q = CMat::zeros(p, p);
    for j in 0..m {
        for k in 0..m {
            let gj = sp.gammas[j];
            let gk = sp.gammas[k];
            let pre = (1.0 - gj) * (1.0 + gk);
            if pre == 0.0 {
                continue;
            }
            let den = 1.0 - gj * gk;
            // both |γ| at 1: the prefactor wins
            if den.abs() < RANK_TOL {
                continue;
            }
            let w = pre / (8.0 * den * den);
            for mu in 0..p {
                let x = a[mu][(j, k)] * w;
                if x == c(0.0) {
                    continue;
                }
                for nu in 0..p {
                    q[(mu, nu)] += x * a[nu][(k, j)];
                }
            }
        }
    }
    let g = q.map(|z| z.re);
    let g = (&g + g.transpose()) * 0.5;
    let u = q.map(|z| 2.0 * z.im);
    let u = (&u - u.transpose()) * 0.5;
    let q = CMat::from_fn(p, p, |i, j| Complex64::new(g[(i, j)], 0.5 * u[(i, j)]));
    let r_ratio = incompatibility_ratio(&g, &u).ok();
    Ok(GeometryResult { g, u, q, r_ratio })
}

/// `R`, the largest eigenvalue modulus of `2i J^{-1} U` with `J = 4g`,
/// computed from the Hermitian matrix `2i J^{-1/2} U J^{-1/2}`.
pub fn incompatibility_ratio(g: &RMat, u: &RMat) -> Result<f64> {
    let p = g.nrows();
    if p == 0 {
        return Err(Error::SingularFisher);
    }
    let eig = nalgebra::SymmetricEigen::new(g * 4.0);
    let norm = eig.eigenvalues.amax();
    if norm == 0.0 || eig.eigenvalues.min() <= 1e-12 * norm {
        return Err(Error::SingularFisher);
    }
    let mut s = eig.eigenvectors.clone();
    for k in 0..p {
        let f = 1.0 / eig.eigenvalues[k].sqrt();
        for r in 0..p {
            s[(r, k)] *= f;
        }
    }
    let jm = &s * eig.eigenvectors.transpose();
    let m = (&jm * u * &jm).map(|x| I * 2.0 * x);
    Ok(spectral_norm(&m))
}

/// Central differences `(Γ(λ+h) - Γ(λ-h))/2h` with
/// `h = 1e-5 max(1, |λ|)` unless `steps` is given.
pub fn tangents_finite_difference<F>(
    model_eval: F,
    labels: &[&str],
    point: &[f64],
    steps: Option<&[f64]>,
) -> Result<TangentSet>
where
    F: Fn(&[f64]) -> Result<CMat>,
{
    let eval = |pt: &[f64]| model_eval(pt).map_err(|e| Error::EvaluationFailure(String::from(e.name())));
    let mut out = Vec::with_capacity(point.len());
    for mu in 0..point.len() {
        let h = steps.map(|s| s[mu]).unwrap_or(1e-5 * point[mu].abs().max(1.0));
        let mut pt = point.to_vec();
        pt[mu] = point[mu] + h;
        let plus = eval(&pt)?;
        pt[mu] = point[mu] - h;
        let minus = eval(&pt)?;
        out.push(hermitian_antisymmetric_part(&((plus - minus) / c(2.0 * h))));
    }
    TangentSet::new(labels.iter().map(|s| String::from(*s)).collect(), out)
}

/// Christoffel symbols `Γ^a_bc`, stored as `out[a][b * m + c]`.
fn christoffel<F>(metric: &F, point: &[f64], step: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<RMat>,
{
    let m = point.len();
    let g = metric(point)?;
    let ginv = g.clone().try_inverse().ok_or(Error::SingularFisher)?;
    let mut dg = Vec::with_capacity(m);
    let mut pt = point.to_vec();
    for cc in 0..m {
        pt[cc] = point[cc] + step;
        let plus = metric(&pt)?;
        pt[cc] = point[cc] - step;
        let minus = metric(&pt)?;
        pt[cc] = point[cc];
        dg.push((plus - minus) / (2.0 * step));
    }
    let mut out = alloc::vec![alloc::vec![0.0; m * m]; m];
    for a in 0..m {
        for b in 0..m {
            for cc in 0..m {
                let mut s = 0.0;
                for e in 0..m {
                    s += ginv[(a, e)] * (dg[b][(e, cc)] + dg[cc][(e, b)] - dg[e][(b, cc)]);
                }
                out[a][b * m + cc] = 0.5 * s;
            }
        }
    }
    Ok(out)
}

/// Ricci scalar of a Riemannian metric given pointwise, from nested central
/// differences with spacing `step`.
pub fn scalar_curvature<F>(metric: F, point: &[f64], step: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<RMat>,
{
    let m = point.len();
    let g = metric(point)?;
    let ginv = g.try_inverse().ok_or(Error::SingularFisher)?;
    let gam = christoffel(&metric, point, step)?;
    let mut d_gam = Vec::with_capacity(m);
    let mut pt = point.to_vec();
    for d in 0..m {
        pt[d] = point[d] + step;
        let plus = christoffel(&metric, &pt, step)?;
        pt[d] = point[d] - step;
        let minus = christoffel(&metric, &pt, step)?;
        pt[d] = point[d];
        let diff: Vec<Vec<f64>> = plus
            .iter()
            .zip(&minus)
            .map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y) / (2.0 * step)).collect())
            .collect();
        d_gam.push(diff);
    }
    let mut r = 0.0;
    for b in 0..m {
        for cc in 0..m {
            let mut ric = 0.0;
            for a in 0..m {
                ric += d_gam[a][a][b * m + cc] - d_gam[cc][a][b * m + a];
                for e in 0..m {
                    ric += gam[a][a * m + e] * gam[e][b * m + cc] - gam[a][cc * m + e] * gam[e][b * m + a];
                }
            }
            r += ginv[(b, cc)] * ric;
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBound {
    /// Largest `|Q_μν|/n` relative to its own right-hand side.
    pub lhs: f64,
    pub rhs: f64,
    pub p_gamma: f64,
    pub holds: bool,
}

/// `P_Γ = (1/8) max_jk (1+γ_j)(1+γ_k)/(1+γ_jγ_k)` over the eigenvalues of `Γ`.
pub fn p_gamma(gamma: &CMat) -> Result<f64> {
    let sp = spectral(gamma)?;
    let mut best: f64 = 0.0;
    for &a in &sp.gammas {
        for &b in &sp.gammas {
            let den = 1.0 + a * b;
            // along γ = 1 the ratio is identically 2
            let v = if den < 1e-12 { 2.0 } else { (1.0 + a) * (1.0 + b) / den };
            best = best.max(v);
        }
    }
    Ok(best / 8.0)
}

/// Checks `|Q_μν|/n ≤ 2 P_Γ Δ^{-2} (‖∂Y‖_∞ + 2‖∂X‖_∞)²` for every pair,
/// using the geometric mean of the `μ` and `ν` factors off the diagonal.
/// The reported pair is the one closest to violation.
pub fn qgt_gap_bound(q: &CMat, gamma: &CMat, dx: &[RMat], dy: &[CMat], delta: f64) -> Result<GapBound> {
    if !(delta > 0.0) {
        return Err(Error::ZeroGap);
    }
    let n = (gamma.nrows() / 2) as f64;
    let pg = p_gamma(gamma)?;
    let factor: Vec<f64> = dx.iter().zip(dy).map(|(x, y)| spectral_norm(y) + 2.0 * spectral_norm_real(x)).collect();
    let p = q.nrows();
    let mut worst = GapBound { lhs: 0.0, rhs: 0.0, p_gamma: pg, holds: true };
    let mut worst_ratio = -1.0;
    for mu in 0..p {
        for nu in 0..p {
            let lhs = q[(mu, nu)].norm() / n;
            let rhs = 2.0 * pg / (delta * delta) * factor[mu] * factor[nu];
            let ratio = if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst = GapBound { lhs, rhs, p_gamma: pg, holds: lhs <= rhs * (1.0 + 1e-8) };
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{dense_state_from_gamma, gamma_from_omega};
    use crate::oracle::{muc_from_tangents, sld_generator, bures_metric_from_tangents};
    use crate::random::{random_covariance, random_real_antisymmetric};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(g: f64) -> CMat {
        CMat::from_row_slice(2, 2, &[c(0.0), I * g, -I * g, c(0.0)])
    }

    fn labels(p: usize) -> Vec<String> {
        (0..p).map(|i| alloc::format!("l{i}")).collect()
    }

    #[test]
    fn kernel_single_mode() {
        let g = 0.4;
        let dw = 0.3;
        let k = transport_kernel(&single(g), &single((1.0 - g * g) * dw / 2.0)).unwrap();
        assert!((k - single(-dw / 2.0)).norm() < 1e-14);
        assert!(transport_kernel(&single(g), &CMat::zeros(2, 2)).unwrap().norm() == 0.0);
    }

    #[test]
    fn kernel_rank_change() {
        let mut dg = CMat::zeros(4, 4);
        dg[(0, 2)] = I;
        dg[(2, 0)] = -I;
        let gamma = single(1.0).map(|z| z).kronecker(&CMat::identity(2, 2));
        let gamma = hermitian_antisymmetric_part(&gamma);
        assert!(matches!(transport_kernel(&gamma, &dg), Err(Error::RankChangeSingularity(_))));
    }

    #[test]
    fn zero_tangents() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gamma = random_covariance(&mut rng, 3, 0.9);
        let t = TangentSet::new(labels(2), alloc::vec![CMat::zeros(6, 6), CMat::zeros(6, 6)]).unwrap();
        let r = qgt(&gamma, &t).unwrap();
        assert!(r.q.norm() == 0.0);
        assert!(r.r_ratio.is_none());
    }

    #[test]
    fn ratio_examples() {
        let g = RMat::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 2.0]);
        assert_eq!(incompatibility_ratio(&g, &RMat::zeros(2, 2)).unwrap(), 0.0);
        let u = RMat::from_row_slice(2, 2, &[0.0, 0.3, -0.3, 0.0]);
        let j1 = 2.0;
        let j2 = 8.0;
        let r = incompatibility_ratio(&g, &u).unwrap();
        assert!((r - 2.0 * 0.3 / (j1 * j2 as f64).sqrt()).abs() < 1e-14);
        // two parameters: R² = det(2U)/det(J)
        let det2u = (2.0 * 0.3) * (2.0 * 0.3);
        assert!((r * r - det2u / (j1 * j2)).abs() < 1e-14);
        assert!(matches!(incompatibility_ratio(&RMat::zeros(2, 2), &u), Err(Error::SingularFisher)));
    }

    #[test]
    fn finite_difference_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g0 = random_covariance(&mut rng, 2, 0.8);
        let t = tangents_finite_difference(|_| Ok(g0.clone()), &["a"], &[0.3], None).unwrap();
        assert!(t.d_gamma[0].norm() == 0.0);
        let t = tangents_finite_difference(|l| Ok(&g0 * c(l[0])), &["a"], &[0.3], None).unwrap();
        assert!((&t.d_gamma[0] - &g0).norm() < 1e-9);
        let fail = tangents_finite_difference(|_| Err(Error::ZeroGap), &["a"], &[0.3], None);
        assert!(matches!(fail, Err(Error::EvaluationFailure(_))));
    }

    #[test]
    fn gap_bound_zero_q() {
        let b = qgt_gap_bound(&CMat::zeros(1, 1), &single(0.3), &[RMat::zeros(2, 2)], &[CMat::zeros(2, 2)], 0.5).unwrap();
        assert!(b.holds);
        assert!(matches!(
            qgt_gap_bound(&CMat::zeros(1, 1), &single(0.3), &[RMat::zeros(2, 2)], &[CMat::zeros(2, 2)], 0.0),
            Err(Error::ZeroGap)
        ));
    }

    /// Pure two-mode family `Γ(θ, φ) = R Γ₀ R^T` with `R` the Cayley transform of `θA + φB`:
    /// `Q` must equal `Tr(P ∂_μP ∂_νP)` of the dense projector.
    #[test]
    fn pure_state_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_real_antisymmetric(&mut rng, 4, 1.0);
        let b = random_real_antisymmetric(&mut rng, 4, 1.0);
        let g0 = hermitian_antisymmetric_part(&single(1.0).kronecker(&CMat::identity(2, 2)));
        let eval = |l: &[f64]| -> Result<CMat> {
            // Cayley transform keeps R orthogonal
            let k = &a * l[0] + &b * l[1];
            let id = RMat::identity(4, 4);
            let r = ((&id - &k).try_inverse().unwrap() * (&id + &k)).map(c);
            Ok(&r * &g0 * r.transpose())
        };
        let pt = [0.3, -0.2];
        let gamma = eval(&pt).unwrap();
        let t = tangents_finite_difference(eval, &["th", "ph"], &pt, Some(&[1e-5, 1e-5])).unwrap();
        let r = qgt(&gamma, &t).unwrap();
        let proj = |l: &[f64]| dense_state_from_gamma(&eval(l).unwrap(), 7).unwrap().rho;
        let p0 = proj(&pt);
        let h = 1e-4;
        let dp: Vec<CMat> = (0..2)
            .map(|mu| {
                let mut up = pt;
                let mut dn = pt;
                up[mu] += h;
                dn[mu] -= h;
                (proj(&up) - proj(&dn)) / c(2.0 * h)
            })
            .collect();
        for mu in 0..2 {
            for nu in 0..2 {
                let reference = (&p0 * &dp[mu] * &dp[nu]).trace();
                assert!((r.q[(mu, nu)] - reference).norm() < 1e-6 * reference.norm().max(1.0), "{mu}{nu}: {} vs {}", r.q[(mu, nu)], reference);
            }
        }
        assert!(r.u[(0, 1)].abs() > 1e-3);
    }

    fn exp_family(rng: &mut ChaCha8Rng, n: usize, p: usize) -> (RMat, Vec<RMat>) {
        (random_real_antisymmetric(rng, 2 * n, 1.0), (0..p).map(|_| random_real_antisymmetric(rng, 2 * n, 1.0)).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn kernel_matches_sld(seed in any::<u64>(), n in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gamma = random_covariance(&mut rng, n, 0.9);
            let (_, gens) = exp_family(&mut rng, n, 1);
            let dg = hermitian_antisymmetric_part(&(gens[0].map(|x| I * x) * &gamma - &gamma * gens[0].map(|x| I * x)));
            let k = transport_kernel(&gamma, &dg).unwrap();
            prop_assert!((&gamma * &k * &gamma - &k - &dg).norm() < 1e-10);
            // the dense SLD/2 of the same tangent is the quadratic form -(i/4)... of K;
            // compared through its action ⟨[G, w_j w_k]⟩ via the metric below
            let rho = dense_state_from_gamma(&gamma, 7).unwrap();
            let h = 1e-6;
            let plus = dense_state_from_gamma(&(&gamma + &dg * c(h)), 7).unwrap().rho;
            let minus = dense_state_from_gamma(&(&gamma - &dg * c(h)), 7).unwrap().rho;
            let drho = (plus - minus) / c(2.0 * h);
            let gsld = sld_generator(&rho, &drho).unwrap();
            let w = crate::gaussian::majorana_operators(n);
            let d = w[0].nrows();
            let mut kd = CMat::zeros(d, d);
            for j in 0..2 * n { for l in 0..2 * n {
                kd += &w[j] * &w[l] * k[(j, l)];
            }}
            let kd = kd * c(0.25);
            let tr = (kd.trace() - gsld.trace()) / c(d as f64);
            prop_assert!((kd - gsld - CMat::identity(d, d) * tr).camax() < 1e-6);
        }

        #[test]
        fn qgt_matches_dense(seed in any::<u64>(), n in 1usize..4, p in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (om0, gens) = exp_family(&mut rng, n, p);
            let gamma = gamma_from_omega(&om0).unwrap();
            let eval = |l: &[f64]| {
                let mut om = om0.clone();
                for (g, &x) in gens.iter().zip(l) { om += g * x; }
                gamma_from_omega(&om)
            };
            let names: Vec<&str> = (0..p).map(|_| "x").collect();
            let t = tangents_finite_difference(eval, &names, &alloc::vec![0.0; p], Some(&alloc::vec![1e-4; p])).unwrap();
            let r = qgt(&gamma, &t).unwrap();
            let rho = dense_state_from_gamma(&gamma, 7).unwrap();
            let dt: Vec<CMat> = t.d_gamma.iter().map(|d| {
                let h = 1e-6;
                let plus = dense_state_from_gamma(&(&gamma + d * c(h)), 7).unwrap().rho;
                let minus = dense_state_from_gamma(&(&gamma - d * c(h)), 7).unwrap().rho;
                (plus - minus) / c(2.0 * h)
            }).collect();
            let g = bures_metric_from_tangents(&rho, &dt).unwrap().total;
            let u = muc_from_tangents(&rho, &dt).unwrap();
            prop_assert!((&r.g - g).amax() < 1e-6);
            prop_assert!((&r.u - u).amax() < 1e-6);
            let qe = hermitian_eigendecomposition(&r.q).unwrap().0;
            prop_assert!(qe[0] >= -1e-10 * r.g.trace().abs().max(1e-300));
            if let Some(rr) = r.r_ratio { prop_assert!((0.0..=1.0 + 1e-10).contains(&rr)); }
        }
    }

    #[test]
    fn curvature_of_round_sphere() {
        let rad = 1.7;
        let metric = |p: &[f64]| Ok(RMat::from_row_slice(2, 2, &[rad * rad, 0.0, 0.0, rad * rad * p[0].sin().powi(2)]));
        let r = scalar_curvature(metric, &[0.9, 0.3], 1e-3).unwrap();
        assert!((r - 2.0 / (rad * rad)).abs() < 1e-5, "{r}");
    }

    #[test]
    fn curvature_of_flat_polar_and_hyperbolic() {
        let polar = |p: &[f64]| Ok(RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, p[0] * p[0]]));
        assert!(scalar_curvature(polar, &[1.3, 0.2], 1e-3).unwrap().abs() < 1e-6);
        let half_plane = |p: &[f64]| Ok(RMat::identity(2, 2) / (p[1] * p[1]));
        let r = scalar_curvature(half_plane, &[0.4, 0.8], 1e-3).unwrap();
        assert!((r + 2.0).abs() < 1e-4, "{r}");
    }
}
