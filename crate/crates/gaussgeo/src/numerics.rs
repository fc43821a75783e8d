//! Dense kernels: Schur-based Sylvester/Lyapunov solves, eigendecompositions,
//! polynomial roots, periodic quadrature and power-law fits.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use nalgebra::{Schur, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::{c, CMat, Complex64, Error, RMat, Result};

/// Absolute floor for every relative tolerance.
pub const TOL_FLOOR: f64 = 1e-14;

/// Relative distance under which two roots are reported as a cluster.
pub const ROOT_CLUSTER_TOL: f64 = 1e-6;

pub fn to_complex(a: &RMat) -> CMat {
    a.map(c)
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let h = a.adjoint() * a;
    match hermitian_eigendecomposition(&h) {
        Ok((vals, _)) => vals.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(_) => frobenius(a),
    }
}

pub fn spectral_norm_real(a: &RMat) -> f64 {
    spectral_norm(&to_complex(a))
}

/// `(A + A^†)/2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * c(0.5)
}

/// Projects onto Hermitian antisymmetric matrices: `(A + A^†)/2` followed by `(A - A^T)/2`.
pub fn hermitian_antisymmetric_part(a: &CMat) -> CMat {
    let h = hermitian_part(a);
    (&h - h.transpose()) * c(0.5)
}

fn square_check(a_rows: usize, a_cols: usize, what: &str) -> Result<()> {
    if a_rows != a_cols {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {a_rows}x{a_cols}"
        )));
    }
    Ok(())
}

/// Complex Schur form `A = U T U^†` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct ComplexSchur {
    pub u: CMat,
    pub t: CMat,
}

pub fn complex_schur(a: &CMat) -> Result<ComplexSchur> {
    square_check(a.nrows(), a.ncols(), "Schur input")?;
    let n = a.nrows();
    if n == 0 {
        return Ok(ComplexSchur { u: a.clone(), t: a.clone() });
    }
    // exactly degenerate spectra (circulants) can stall the QR sweep at
    // machine precision; a slightly looser deflation test recovers them
    let schur = [1.0, 16.0, 256.0]
        .iter()
        .find_map(|k| Schur::try_new(a.clone(), k * f64::EPSILON, 200 * n + 1000))
        .ok_or(Error::ConvergenceFailure)?;
    let (u, mut t) = schur.unpack();
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok(ComplexSchur { u, t })
}

/// Solves `A Z + Z B = C` by Bartels-Stewart on the complex Schur forms of
/// `A` and `B`. Works whether or not `A`, `B` are diagonalizable.
pub fn solve_sylvester(a: &CMat, b: &CMat, cm: &CMat) -> Result<CMat> {
    square_check(a.nrows(), a.ncols(), "A")?;
    square_check(b.nrows(), b.ncols(), "B")?;
    if cm.nrows() != a.nrows() || cm.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "C is {}x{}, expected {}x{}",
            cm.nrows(),
            cm.ncols(),
            a.nrows(),
            b.nrows()
        )));
    }
    let sa = complex_schur(a)?;
    let sb = complex_schur(b)?;
    let scale = max_abs(a).max(max_abs(b)).max(1.0);
    let tol = TOL_FLOOR * scale;
    let rhs = sa.u.adjoint() * cm * &sb.u;
    let (m, n) = (a.nrows(), b.nrows());
    let mut z = CMat::zeros(m, n);
    for k in 0..n {
        let mut col: Vec<Complex64> = (0..m).map(|i| rhs[(i, k)]).collect();
        for i in 0..k {
            let tik = sb.t[(i, k)];
            if tik != Complex64::new(0.0, 0.0) {
                for r in 0..m {
                    col[r] -= z[(r, i)] * tik;
                }
            }
        }
        let shift = sb.t[(k, k)];
        back_substitute(&sa.t, shift, &mut col, tol)?;
        for r in 0..m {
            z[(r, k)] = col[r];
        }
    }
    Ok(&sa.u * z * sb.u.adjoint())
}

/// Solves `(T + s I) x = b` in place for upper triangular `T`.
fn back_substitute(t: &CMat, shift: Complex64, x: &mut [Complex64], tol: f64) -> Result<()> {
    let m = x.len();
    for i in (0..m).rev() {
        let mut acc = x[i];
        for j in (i + 1)..m {
            acc -= t[(i, j)] * x[j];
        }
        let d = t[(i, i)] + shift;
        if d.norm() < tol {
            return Err(Error::SingularSylvester { min_sum: d.norm() });
        }
        x[i] = acc / d;
    }
    Ok(())
}

/// Reusable solver for `X Z + Z X^T = C` with a fixed real `X`. The Schur
/// form of `X` is computed once; `X^T` is handled through `conj(U) T^T U^T`.
#[derive(Debug, Clone)]
pub struct LyapunovSolver {
    schur: ComplexSchur,
    tol: f64,
    min_sum: f64,
}

impl LyapunovSolver {
    pub fn new(x: &RMat) -> Result<Self> {
        square_check(x.nrows(), x.ncols(), "X")?;
        let schur = complex_schur(&to_complex(x))?;
        let tol = TOL_FLOOR * x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let n = x.nrows();
        let mut min_sum = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                min_sum = min_sum.min((schur.t[(i, i)] + schur.t[(j, j)]).norm());
            }
        }
        Ok(Self { schur, tol, min_sum })
    }

    /// `min_{i,j} |x_i + x_j|` over the eigenvalues of `X`.
    pub fn min_eigen_sum(&self) -> f64 {
        self.min_sum
    }

    pub fn is_singular(&self) -> bool {
        self.min_sum < self.tol
    }

    pub fn solve(&self, cm: &CMat) -> Result<CMat> {
        let n = self.schur.t.nrows();
        if cm.nrows() != n || cm.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side is {}x{}, expected {n}x{n}",
                cm.nrows(),
                cm.ncols()
            )));
        }
        if self.is_singular() {
            return Err(Error::SingularSylvester { min_sum: self.min_sum });
        }
        let u = &self.schur.u;
        let t = &self.schur.t;
        let ubar = u.map(|z| z.conj());
        // T Z + Z T^T = U^† C conj(U)
        let rhs = u.adjoint() * cm * &ubar;
        let mut z = CMat::zeros(n, n);
        let mut col = alloc::vec![Complex64::new(0.0, 0.0); n];
        for k in (0..n).rev() {
            for r in 0..n {
                col[r] = rhs[(r, k)];
            }
            for i in (k + 1)..n {
                let tki = t[(k, i)];
                if tki != Complex64::new(0.0, 0.0) {
                    for r in 0..n {
                        col[r] -= z[(r, i)] * tki;
                    }
                }
            }
            back_substitute(t, t[(k, k)], &mut col, self.tol)?;
            for r in 0..n {
                z[(r, k)] = col[r];
            }
        }
        Ok(u * z * u.transpose())
    }
}

/// Solves `X Γ + Γ X^T = Y` for Hermitian antisymmetric `Y` and returns the
/// Hermitian antisymmetric solution.
pub fn solve_continuous_lyapunov(x: &RMat, y: &CMat) -> Result<CMat> {
    let solver = LyapunovSolver::new(x)?;
    Ok(hermitian_antisymmetric_part(&solver.solve(y)?))
}

/// Eigenvalues in ascending order and the matching unitary eigenvector matrix.
pub fn hermitian_eigendecomposition(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    square_check(a.nrows(), a.ncols(), "Hermitian input")?;
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), a.clone()));
    }
    let eig = SymmetricEigen::try_new(hermitian_part(a), f64::EPSILON, 200 * n + 1000)
        .ok_or(Error::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok((vals, vecs))
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(a: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (vals, v) = hermitian_eigendecomposition(a)?;
    let n = vals.len();
    let mut scaled = v.clone();
    for k in 0..n {
        let fk = f(vals[k]);
        for r in 0..n {
            scaled[(r, k)] *= fk;
        }
    }
    Ok(scaled * v.adjoint())
}

#[derive(Debug, Clone)]
pub struct GeneralEigen {
    /// Sorted by real part, then imaginary part; closed under conjugation.
    pub values: Vec<Complex64>,
    /// Largest eigenvalue condition number `‖x‖‖y‖/|y^† x|`; huge or
    /// infinite for (nearly) defective spectra.
    pub condition: f64,
}

pub fn general_eigendecomposition(a: &RMat) -> Result<GeneralEigen> {
    square_check(a.nrows(), a.ncols(), "input")?;
    let n = a.nrows();
    let schur = complex_schur(&to_complex(a))?;
    let t = &schur.t;
    let scale = max_abs(t).max(TOL_FLOOR);
    let mut values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    enforce_conjugate_pairs(&mut values, 1e-12 * scale);
    values.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(GeneralEigen { values, condition: triangular_condition(t) })
}

fn triangular_condition(t: &CMat) -> f64 {
    let n = t.nrows();
    let guard = f64::EPSILON * max_abs(t).max(TOL_FLOOR);
    let safe = |d: Complex64| if d.norm() < guard { c(guard) } else { d };
    let mut worst: f64 = 1.0;
    let mut x = alloc::vec![Complex64::new(0.0, 0.0); n];
    let mut y = alloc::vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let lam = t[(k, k)];
        x[k] = c(1.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                acc += t[(i, j)] * x[j];
            }
            x[i] = -acc / safe(t[(i, i)] - lam);
        }
        y[k] = c(1.0);
        for j in (k + 1)..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in k..j {
                acc += y[i] * t[(i, j)];
            }
            y[j] = -acc / safe(t[(j, j)] - lam);
        }
        let nx: f64 = x[..=k].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let ny: f64 = y[k..].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let cond = nx * ny;
        worst = if cond.is_finite() { worst.max(cond) } else { f64::INFINITY };
    }
    worst
}

/// Makes a spectrum of a real matrix exactly closed under conjugation.
fn enforce_conjugate_pairs(values: &mut [Complex64], tol: f64) {
    let n = values.len();
    let mut used = alloc::vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        if values[i].im.abs() <= tol {
            values[i].im = 0.0;
            used[i] = true;
            continue;
        }
        let target = values[i].conj();
        let mut best: Option<(usize, f64)> = None;
        for j in (i + 1)..n {
            if used[j] || values[j].im.abs() <= tol || values[j].im.signum() == values[i].im.signum() {
                continue;
            }
            let d = (values[j] - target).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        used[i] = true;
        if let Some((j, _)) = best {
            let re = 0.5 * (values[i].re + values[j].re);
            let im = 0.5 * (values[i].im.abs() + values[j].im.abs());
            values[i] = Complex64::new(re, im * values[i].im.signum());
            values[j] = values[i].conj();
            used[j] = true;
        }
    }
}

/// Roots of a polynomial given by ascending coefficients `c_0 + c_1 z + …`.
#[derive(Debug, Clone)]
pub struct Roots {
    /// Sorted by modulus, then argument.
    pub roots: Vec<Complex64>,
    /// Index groups of roots closer than [`ROOT_CLUSTER_TOL`] (relative).
    pub clusters: Vec<Vec<usize>>,
}

impl Roots {
    pub fn is_clustered(&self, index: usize) -> bool {
        self.clusters.iter().any(|g| g.contains(&index))
    }
}

pub fn poly_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn poly_derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &a)| a * (k as f64)).collect()
}

/// Monic polynomial with the given roots, ascending coefficients.
pub fn polynomial_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut p = alloc::vec![c(1.0)];
    for &r in roots {
        let mut next = alloc::vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (k, &a) in p.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * r;
        }
        p = next;
    }
    p
}

pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Roots> {
    let scale = coeffs.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::DegenerateInput("all coefficients vanish".into()));
    }
    let negligible = |z: &Complex64| z.norm() <= TOL_FLOOR * scale;
    let mut hi = coeffs.len();
    while hi > 0 && negligible(&coeffs[hi - 1]) {
        hi -= 1;
    }
    let mut lo = 0;
    while lo < hi && coeffs[lo] == Complex64::new(0.0, 0.0) {
        lo += 1;
    }
    let trimmed = &coeffs[..hi];
    let core = &coeffs[lo..hi];
    let mut roots: Vec<Complex64> = alloc::vec![Complex64::new(0.0, 0.0); lo];
    let deg = core.len() - 1;
    if deg > 0 {
        let lead = core[deg];
        let comp = CMat::from_fn(deg, deg, |i, j| {
            if i == 0 {
                -core[deg - 1 - j] / lead
            } else if i == j + 1 {
                c(1.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let schur = complex_schur(&comp)?;
        let dp = poly_derivative(trimmed);
        for k in 0..deg {
            roots.push(polish_root(trimmed, &dp, schur.t[(k, k)]));
        }
    }
    roots.sort_by(|a, b| {
        a.norm()
            .total_cmp(&b.norm())
            .then(a.arg().total_cmp(&b.arg()))
    });
    let clusters = cluster_indices(&roots);
    Ok(Roots { roots, clusters })
}

fn polish_root(p: &[Complex64], dp: &[Complex64], mut z: Complex64) -> Complex64 {
    let mut best = poly_eval(p, z).norm();
    for _ in 0..4 {
        let d = poly_eval(dp, z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - poly_eval(p, z) / d;
        let val = poly_eval(p, cand).norm();
        if !(val < best) {
            break;
        }
        best = val;
        z = cand;
    }
    z
}

fn cluster_indices(roots: &[Complex64]) -> Vec<Vec<usize>> {
    let n = roots.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn find(g: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while g[r] != r {
            r = g[r];
        }
        g[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() <= ROOT_CLUSTER_TOL * scale {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                if a != b {
                    group[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut group, i);
        if let Some(g) = out.iter_mut().find(|g| g[0] == r) {
            g.push(i);
        } else if r == i {
            out.push(alloc::vec![i]);
        } else {
            out.push(alloc::vec![r, i]);
        }
    }
    out.retain(|g| g.len() > 1);
    out
}

/// Values that the periodic trapezoid rule can integrate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn parts(&self) -> (f64, f64);
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn parts(&self) -> (f64, f64) {
        (*self, 0.0)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn parts(&self) -> (f64, f64) {
        (self.re, self.im)
    }
}

pub const QUADRATURE_MAX_POINTS: usize = 1 << 20;

/// `∫_{-π}^{π} f(φ) dφ` by the trapezoid rule with point doubling, stopping
/// once two successive refinements change the estimate by at most `tol`.
pub fn periodic_quadrature<T: QuadValue>(f: impl Fn(f64) -> Result<T>, tol: f64) -> Result<T> {
    periodic_quadrature_limited(f, tol, QUADRATURE_MAX_POINTS)
}

pub fn periodic_quadrature_limited<T: QuadValue>(
    f: impl Fn(f64) -> Result<T>,
    tol: f64,
    max_points: usize,
) -> Result<T> {
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut n = 32usize;
    let mut sum = T::zero();
    for j in 0..n {
        sum = sum + f(-core::f64::consts::PI + two_pi * j as f64 / n as f64)?;
    }
    let mut est = sum * (two_pi / n as f64);
    let mut calm = 0;
    while n < max_points {
        let mut extra = T::zero();
        for j in 0..n {
            extra = extra + f(-core::f64::consts::PI + two_pi * (j as f64 + 0.5) / n as f64)?;
        }
        sum = sum + extra;
        n *= 2;
        let next = sum * (two_pi / n as f64);
        let change = (next - est).magnitude();
        est = next;
        if change <= tol {
            calm += 1;
            if calm >= 2 {
                return Ok(est);
            }
        } else {
            calm = 0;
        }
    }
    let (re, im) = est.parts();
    Err(Error::NoConvergence { re, im })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub n_range: (usize, usize),
}

impl PowerLawFit {
    pub fn predict(&self, n: f64) -> f64 {
        self.prefactor * n.powf(self.exponent)
    }
}

/// Least squares fit of `ln value = ln a + b ln n`.
pub fn fit_power_law(samples: &[(usize, f64)]) -> Result<PowerLawFit> {
    if samples.len() < 4 {
        return Err(Error::TooFewSamples { need: 4, got: samples.len() });
    }
    for &(n, v) in samples {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveValue(v));
        }
        if n == 0 {
            return Err(Error::DegenerateInput("size 0 in power-law fit".into()));
        }
    }
    let m = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateInput("all sizes equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot <= f64::EPSILON * f64::EPSILON * m {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    let lo = samples.iter().map(|s| s.0).min().unwrap_or(0);
    let hi = samples.iter().map(|s| s.0).max().unwrap_or(0);
    Ok(PowerLawFit { exponent: b, prefactor: a.exp(), r_squared: r2, n_range: (lo, hi) })
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`
/// (Sturm sequence count).
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = f64::EPSILON * (diag[i].abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest eigenpair of a symmetric tridiagonal matrix: bisection on the
/// Sturm count followed by inverse iteration. The vector has unit 2-norm
/// and positive sum.
pub fn tridiagonal_lowest(diag: &[f64], off: &[f64]) -> Result<(f64, Vec<f64>)> {
    let m = diag.len();
    if m == 0 || off.len() + 1 != m {
        return Err(Error::DimensionMismatch(alloc::format!("tridiagonal {m} with {} off-diagonals", off.len())));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < m { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Shift just below the eigenvalue keeps the factorization positive definite.
    let shift = lo - 16.0 * f64::EPSILON * scale;
    let mut v = alloc::vec![1.0; m];
    let mut cp = alloc::vec![0.0; m];
    let mut dp = alloc::vec![0.0; m];
    for _ in 0..3 {
        let mut denom = diag[0] - shift;
        cp[0] = if m > 1 { off[0] / denom } else { 0.0 };
        dp[0] = v[0] / denom;
        for i in 1..m {
            denom = diag[i] - shift - off[i - 1] * cp[i - 1];
            if denom == 0.0 {
                return Err(Error::ConvergenceFailure);
            }
            cp[i] = if i + 1 < m { off[i] / denom } else { 0.0 };
            dp[i] = (v[i] - off[i - 1] * dp[i - 1]) / denom;
        }
        v[m - 1] = dp[m - 1];
        for i in (0..m - 1).rev() {
            v[i] = dp[i] - cp[i] * v[i + 1];
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ConvergenceFailure);
        }
        let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        for x in v.iter_mut() {
            *x *= sign / norm;
        }
    }
    Ok((0.5 * (lo + hi), v))
}
