//! Self-check: every Gaussian-side route against an independent dense or
//! closed-form computation, on seeded random instances.

use gaussgeo::gaussian::{gamma_from_dense, gamma_from_omega, majorana_operators};
use gaussgeo::geometry::{qgt, TangentSet};
use gaussgeo::liouvillian::{gap_report, shape_matrices, NessSolver, QuadraticLindbladModel};
use gaussgeo::models::{boundary_xy_dense, build_boundary_driven_xy, BoundaryXYParams};
use gaussgeo::momentum::{build_reservoir_chain, rationalize, symbol_covariance};
use gaussgeo::numerics::{hermitian_eigendecomposition, hermitian_part, max_abs};
use gaussgeo::oracle::{
    bures_metric_dense, dense_lindblad_ness, exp_state_derivative, muc_dense, muc_from_susceptibility, sld_generator,
    sld_series_check, DenseState, ExponentialFamily,
};
use gaussgeo::random::{random_hermitian, random_quadratic_model, random_real_antisymmetric};
use gaussgeo::{CMat, Complex64, RMat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub case: usize,
    /// Seed of the generator that produced this case.
    pub seed: u64,
    pub deviation: f64,
    pub tolerance: f64,
    /// Error name when a route failed outright.
    pub error: Option<&'static str>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.deviation <= self.tolerance
    }
}

type Check = fn(&mut ChaCha8Rng, bool) -> gaussgeo::Result<f64>;

/// `(name, tolerance, check)`; the check returns the deviation between the
/// two routes.
pub const SUITES: [(&str, f64, Check); 7] = [
    ("gaussian_qgt", 1e-8, gaussian_qgt),
    ("lyapunov_ness", 1e-8, lyapunov_ness),
    ("boundary_xy_dense", 1e-8, boundary_xy),
    ("gap_equality", 1e-8, gap_equality),
    ("susceptibility_muc", 1e-9, susceptibility),
    ("sld_series", 1e-10, sld_series),
    ("symbol_rational", 1e-8, symbol_rational),
];

fn cx(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `Σ_jk a_jk w_j w_k` on the `2^n` dimensional Fock space.
fn quadratic_operator(a: &CMat, w: &[CMat]) -> CMat {
    let d = w[0].nrows();
    let mut out = CMat::zeros(d, d);
    for j in 0..w.len() {
        for k in 0..w.len() {
            if a[(j, k)] != cx(0.0) {
                out += &w[j] * &w[k] * a[(j, k)];
            }
        }
    }
    out
}

fn dense_model(model: &QuadraticLindbladModel) -> (CMat, Vec<CMat>) {
    let w = majorana_operators(model.n_modes);
    let h = hermitian_part(&quadratic_operator(&model.h, &w));
    let jumps = model
        .jumps
        .iter()
        .map(|l| {
            let mut op = CMat::zeros(w[0].nrows(), w[0].nrows());
            for (j, wj) in w.iter().enumerate() {
                op += wj * l[j];
            }
            op
        })
        .collect();
    (h, jumps)
}

/// Derivative of `tanh(A/2)` along `dA` for Hermitian `A`.
fn tanh_half_derivative(a: &CMat, da: &CMat) -> gaussgeo::Result<CMat> {
    let (e, v) = hermitian_eigendecomposition(a)?;
    let b = v.adjoint() * da * &v;
    let f = |x: f64| (x / 2.0).tanh();
    let inner = CMat::from_fn(e.len(), e.len(), |j, k| {
        let gap = e[j] - e[k];
        let div = if gap.abs() < 1e-7 {
            let t = f(0.5 * (e[j] + e[k]));
            0.5 * (1.0 - t * t)
        } else {
            (f(e[j]) - f(e[k])) / gap
        };
        b[(j, k)] * div
    });
    Ok(&v * inner * v.adjoint())
}

/// Exponential family `Γ = tanh(iΩ(λ)/2)` with `Ω` linear in `λ`: the
/// Gaussian route differentiates `tanh` exactly and goes through the
/// transport kernel; the dense route differentiates `e^D` on Fock space
/// with `D = -(i/4) Σ Ω_jk w_j w_k`.
fn gaussian_qgt(rng: &mut ChaCha8Rng, _: bool) -> gaussgeo::Result<f64> {
    let n = rng.random_range(1..=3);
    let p = rng.random_range(1..=3);
    let om0 = random_real_antisymmetric(rng, 2 * n, 1.0);
    let gens: Vec<RMat> = (0..p).map(|_| random_real_antisymmetric(rng, 2 * n, 1.0)).collect();
    let to_c = |m: &RMat| m.map(|x| Complex64::new(0.0, x));
    let gamma = gamma_from_omega(&om0)?;
    let d_gamma = gens.iter().map(|g| tanh_half_derivative(&to_c(&om0), &to_c(g))).collect::<gaussgeo::Result<Vec<_>>>()?;
    let labels = (0..p).map(|i| format!("l{i}")).collect();
    let geo = qgt(&gamma, &TangentSet::new(labels, d_gamma)?)?;
    let w = majorana_operators(n);
    let many_body = |m: &RMat| quadratic_operator(&to_c(m), &w) * cx(-0.25);
    let family = ExponentialFamily { d0: many_body(&om0), generators: gens.iter().map(many_body).collect() };
    let zero = vec![0.0; p];
    let g = bures_metric_dense(&family, &zero)?.total;
    let u = muc_dense(&family, &zero)?;
    let state = gaussgeo::oracle::Family::state(&family, &zero)?;
    let dg = max_abs(&(gamma_from_dense(&state)? - &gamma));
    Ok((&geo.g - g).amax().max((&geo.u - u).amax()).max(dg))
}

fn lyapunov_ness(rng: &mut ChaCha8Rng, _: bool) -> gaussgeo::Result<f64> {
    let n = rng.random_range(1..=3);
    let model = random_quadratic_model(rng, n, 2 * n, 1.0, 0.6);
    let shape = shape_matrices(&model)?;
    let gamma = NessSolver::new(&shape)?.covariance(&shape)?.gamma;
    let (h, jumps) = dense_model(&model);
    Ok(max_abs(&(gamma_from_dense(&dense_lindblad_ness(&h, &jumps)?)? - gamma)))
}

/// Three-site boundary-driven chain against the spin-basis Lindbladian.
/// `flip` conjugates the jump vectors on the Gaussian side, which swaps
/// gain and loss.
fn boundary_xy(rng: &mut ChaCha8Rng, flip: bool) -> gaussgeo::Result<f64> {
    let kappas = [0; 4].map(|_| rng.random_range(0.1..1.0));
    let p = BoundaryXYParams::new(rng.random_range(-1.5..1.5), rng.random_range(-1.0..1.0), 3, kappas)?;
    let mut model = build_boundary_driven_xy(&p)?;
    if flip {
        model = QuadraticLindbladModel::new(model.h.clone(), model.jumps.iter().map(|l| l.map(|z| z.conj())).collect())?;
    }
    let shape = shape_matrices(&model)?;
    let gamma = NessSolver::new(&shape)?.covariance(&shape)?.gamma;
    let (h, jumps) = boundary_xy_dense(&p)?;
    Ok(max_abs(&(gamma_from_dense(&dense_lindblad_ness(&h, &jumps)?)? - gamma)))
}

/// `2 min Re x_j` against the two other gap definitions, relative.
fn gap_equality(rng: &mut ChaCha8Rng, _: bool) -> gaussgeo::Result<f64> {
    let n = rng.random_range(1..=4);
    let model = random_quadratic_model(rng, n, n + 1, 1.0, 0.6);
    let r = gap_report(&shape_matrices(&model)?.x)?;
    Ok((r.delta - r.delta_xhat).abs().max((r.delta - r.delta_liouville).abs()) / r.delta)
}

fn susceptibility(rng: &mut ChaCha8Rng, _: bool) -> gaussgeo::Result<f64> {
    let d = rng.random_range(2..=6);
    let h0 = random_hermitian(rng, d);
    let o: Vec<CMat> = (0..3).map(|_| random_hermitian(rng, d)).collect();
    let beta = rng.random_range(0.3..1.8);
    let family = ExponentialFamily { d0: &h0 * cx(-beta), generators: o.iter().map(|x| x * cx(-beta)).collect() };
    let dense = muc_dense(&family, &[0.0; 3])?;
    Ok((dense - muc_from_susceptibility(&h0, &o, beta)?).amax())
}

fn sld_series(rng: &mut ChaCha8Rng, _: bool) -> gaussgeo::Result<f64> {
    let d = rng.random_range(2..=5);
    let scale = if rng.random::<bool>() { 1.5 } else { 0.2 };
    let dm = random_hermitian(rng, d) * cx(scale);
    let dd = random_hermitian(rng, d);
    let (rho, drho) = exp_state_derivative(&dm, &dd)?;
    let g = sld_generator(&DenseState::new(rho)?, &drho)?;
    Ok(max_abs(&(sld_series_check(&dm, &dd)? - g * cx(2.0))))
}

/// Rational form of the reservoir symbol against the pointwise solve.
fn symbol_rational(rng: &mut ChaCha8Rng, _: bool) -> gaussgeo::Result<f64> {
    let model = build_reservoir_chain(rng.random_range(-0.8..1.5), rng.random_range(0.0..std::f64::consts::TAU))?;
    let rational = rationalize(&model)?;
    let mut worst: f64 = 0.0;
    for _ in 0..8 {
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let z = Complex64::from_polar(1.0, phi);
        let diff = rational.eval(z) - symbol_covariance(&model, phi)?;
        worst = worst.max(diff.iter().map(|x| x.norm()).fold(0.0, f64::max));
    }
    Ok(worst)
}

/// Seed of case `case` of suite `suite`.
pub fn case_seed(seed: u64, suite: usize, case: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((suite as u64) << 32 | case as u64)
}

/// Runs `cases` instances of every suite. Results are ordered by suite,
/// then case, independently of scheduling.
pub fn run_oracle_suite(seed: u64, cases: usize, flip: bool) -> Vec<CheckResult> {
    let jobs: Vec<(usize, usize)> = (0..SUITES.len()).flat_map(|s| (0..cases).map(move |c| (s, c))).collect();
    jobs.par_iter()
        .map(|&(s, case)| {
            let (suite, tolerance, check) = SUITES[s];
            let case_seed = case_seed(seed, s, case);
            let mut rng = ChaCha8Rng::seed_from_u64(case_seed);
            let (deviation, error) = match check(&mut rng, flip) {
                Ok(d) if d.is_finite() => (d, None),
                Ok(d) => (d, Some("NonFiniteDeviation")),
                Err(e) => (f64::NAN, Some(e.name())),
            };
            CheckResult { suite, case, seed: case_seed, deviation, tolerance, error }
        })
        .collect()
}
