//! Translationally invariant chains in the thermodynamic limit.
//!
//! A chain with one fermion (two Majoranas `ω_r`) per site is described by
//! 2×2 symbols. For `H = Σ_{r,s} ω_r^T h(r-s) ω_s` the Hamiltonian symbol is
//! `h̃(φ) = Σ_r h(r) e^{-iφr}`. A jump family `Λ(r) = Σ_u l(u)^T ω_{r+u}`
//! contributes `L̃(-φ) L̃(-φ)^†` to `m̃(φ)` with `L̃(φ) = Σ_u l(u) e^{iφu}`, so
//! that `m̃` is the symbol of `M` in the same convention as `h̃`. The steady
//! state then solves `x̃(φ) γ̃ + γ̃ x̃^T(-φ) = ỹ(φ)` with
//! `x̃ = 2[2i h̃ + m̃(φ) + m̃^T(-φ)]` and `ỹ = -4[m̃(φ) - m̃^T(-φ)]`, and the
//! real-space blocks are `γ(r) = (1/2π) ∫ γ̃(φ) e^{iφr} dφ`.
//!
//! All symbols are continued to complex `z = e^{iφ}`; `φ → -φ` becomes
//! `z → 1/z`.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector2, Vector4};
#[allow(unused_imports)]
use num_traits::Float;

use crate::liouvillian::QuadraticLindbladModel;
use crate::numerics::{periodic_quadrature_limited, poly_eval, polynomial_roots, QuadValue};
use crate::{c, CMat, CVec, Complex64, Error, Result, I};

pub type Mat2 = Matrix2<Complex64>;
pub type Vec2 = Vector2<Complex64>;
/// Ascending coefficients.
pub type Poly = Vec<Complex64>;

/// Tolerance of the symbol symmetry checks.
pub const SYMBOL_TOL: f64 = 1e-10;
/// Step of central parameter differences when no closed form is known.
pub const PARAMETER_STEP: f64 = 1e-6;
/// Relative pivot below which the 4×4 symbol operator counts as singular.
pub const CRITICAL_PIVOT: f64 = 1e-13;
/// A pole with residue below this times the symbol scale is removable.
pub const REMOVABLE_TOL: f64 = 1e-10;
/// Singularities closer than this to `|z| = 1` count as lying on it.
pub const CIRCLE_TOL: f64 = 1e-9;
/// Agreement required between the rational form and direct solves.
pub const RATIONAL_CHECK_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Closed-form steady-state symbol of a parametrised model. Functions take
/// the parameter vector of the owning [`SymbolModel`].
#[derive(Debug, Clone, Copy)]
pub struct ClosedSymbol {
    pub gamma: fn(&[f64], Complex64) -> Mat2,
    /// `∂γ̃/∂p_μ`; `None` falls back to central differences of `gamma`.
    pub d_gamma: fn(&[f64], Complex64, usize) -> Option<Mat2>,
    /// Polynomials whose roots contain every singularity of `γ̃`, of its
    /// derivatives and of `1/(1 - det γ̃)`.
    pub singular_polynomials: fn(&[f64]) -> Vec<Poly>,
}

#[derive(Debug, Clone)]
pub struct SymbolModel {
    pub labels: Vec<String>,
    pub params: Vec<f64>,
    /// `(r, h(r))`.
    pub h_blocks: Vec<(i64, Mat2)>,
    /// Jump families, each a list of `(u, l(u))`.
    pub jumps: Vec<Vec<(i64, Vec2)>>,
    pub closed: Option<ClosedSymbol>,
    /// Rebuilds the model at other parameters, used for derivatives.
    pub builder: Option<fn(&[f64]) -> Result<SymbolModel>>,
}

fn cis(phi: f64) -> Complex64 {
    Complex64::new(phi.cos(), phi.sin())
}

fn max_abs2(a: &Mat2) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// `a σx + b σy + d σz`.
pub fn pauli(a: Complex64, b: Complex64, d: Complex64) -> Mat2 {
    Mat2::new(d, a - I * b, a + I * b, -d)
}

impl SymbolModel {
    pub fn new(h_blocks: Vec<(i64, Mat2)>, jumps: Vec<Vec<(i64, Vec2)>>) -> Result<Self> {
        let finite = h_blocks.iter().all(|(_, b)| b.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
            && jumps.iter().flatten().all(|(_, l)| l.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        if !finite {
            return Err(Error::NotFiniteRange);
        }
        let model = Self { labels: Vec::new(), params: Vec::new(), h_blocks, jumps, closed: None, builder: None };
        let scale = model.h_blocks.iter().fold(1.0f64, |m, (_, b)| m.max(max_abs2(b)));
        for k in 0..16 {
            let phi = -PI + 2.0 * PI * (k as f64 + 0.3) / 16.0;
            let h = model.h_symbol(phi);
            let herm = max_abs2(&(h - h.adjoint()));
            if herm > SYMBOL_TOL * scale {
                return Err(Error::NotHermitian(herm));
            }
            let anti = max_abs2(&(h + model.h_symbol(-phi).transpose()));
            if anti > SYMBOL_TOL * scale {
                return Err(Error::NotAntisymmetric(anti));
            }
        }
        Ok(model)
    }

    pub fn with_parameters(mut self, labels: &[&str], params: Vec<f64>, builder: fn(&[f64]) -> Result<SymbolModel>) -> Self {
        self.labels = labels.iter().map(|s| String::from(*s)).collect();
        self.params = params;
        self.builder = Some(builder);
        self
    }

    pub fn with_closed(mut self, closed: ClosedSymbol) -> Self {
        self.closed = Some(closed);
        self
    }

    pub fn parameter_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Largest coupling distance entering `x̃`.
    pub fn range(&self) -> usize {
        let h = self.h_blocks.iter().map(|(r, _)| r.unsigned_abs() as usize).max().unwrap_or(0);
        let m = self
            .jumps
            .iter()
            .filter(|f| !f.is_empty())
            .map(|f| {
                let lo = f.iter().map(|(u, _)| *u).min().unwrap_or(0);
                let hi = f.iter().map(|(u, _)| *u).max().unwrap_or(0);
                (hi - lo) as usize
            })
            .max()
            .unwrap_or(0);
        h.max(m)
    }

    pub fn h_z(&self, z: Complex64) -> Mat2 {
        self.h_blocks.iter().fold(Mat2::zeros(), |acc, (r, b)| acc + b * z.powi(-(*r as i32)))
    }

    pub fn m_z(&self, z: Complex64) -> Mat2 {
        let mut m = Mat2::zeros();
        for fam in &self.jumps {
            let mut l = Vec2::zeros();
            let mut lbar = Vec2::zeros();
            for (u, v) in fam {
                l += v * z.powi(-(*u as i32));
                lbar += v.map(|a| a.conj()) * z.powi(*u as i32);
            }
            m += l * lbar.transpose();
        }
        m
    }

    pub fn h_symbol(&self, phi: f64) -> Mat2 {
        self.h_z(cis(phi))
    }

    pub fn m_symbol(&self, phi: f64) -> Mat2 {
        self.m_z(cis(phi))
    }

    /// `(x̃(z), ỹ(z))`.
    pub fn shape_z(&self, z: Complex64) -> (Mat2, Mat2) {
        let m = self.m_z(z);
        let mr = self.m_z(z.inv()).transpose();
        let x = (self.h_z(z) * (I * 2.0) + m + mr) * c(2.0);
        let y = (m - mr) * c(-4.0);
        (x, y)
    }

    /// Solved symbol at complex `z`.
    pub fn covariance_z(&self, z: Complex64) -> Result<Mat2> {
        let (x, y) = self.shape_z(z);
        let (xr, _) = self.shape_z(z.inv());
        solve_symbol_lyapunov(&x, &xr, &y, z.arg())
    }

    /// Closed form when attached, otherwise the solved symbol.
    pub fn gamma_z(&self, z: Complex64) -> Result<Mat2> {
        match &self.closed {
            Some(cf) => Ok((cf.gamma)(&self.params, z)),
            None => self.covariance_z(z),
        }
    }

    /// `∂γ̃/∂p_μ` at `z`.
    pub fn d_gamma_z(&self, z: Complex64, mu: usize) -> Result<Mat2> {
        if mu >= self.params.len() {
            return Err(Error::IndexOutOfRange { index: mu, len: self.params.len() });
        }
        let step = PARAMETER_STEP * self.params[mu].abs().max(1.0);
        let mut plus = self.params.clone();
        plus[mu] += step;
        let mut minus = self.params.clone();
        minus[mu] -= step;
        if let Some(cf) = &self.closed {
            if let Some(d) = (cf.d_gamma)(&self.params, z, mu) {
                return Ok(d);
            }
            return Ok(((cf.gamma)(&plus, z) - (cf.gamma)(&minus, z)) / c(2.0 * step));
        }
        let build = self.builder.ok_or_else(|| Error::DegenerateInput("model has no parameter derivatives".into()))?;
        let gp = build(&plus)?.covariance_z(z)?;
        let gm = build(&minus)?.covariance_z(z)?;
        Ok((gp - gm) / c(2.0 * step))
    }
}

/// `(x̃(φ), ỹ(φ))`.
pub fn symbol_shape(model: &SymbolModel, phi: f64) -> (Mat2, Mat2) {
    model.shape_z(cis(phi))
}

/// The 4×4 operator `γ ↦ xγ + γ x_r^T` on row-major `vec γ`.
fn lyapunov_operator(x: &Mat2, xr: &Mat2) -> Matrix4<Complex64> {
    Matrix4::from_fn(|a, b| {
        let (i, j) = (a / 2, a % 2);
        let (k, l) = (b / 2, b % 2);
        let mut v = ZERO;
        if j == l {
            v += x[(i, k)];
        }
        if i == k {
            v += xr[(j, l)];
        }
        v
    })
}

fn vec4(a: &Mat2) -> Vector4<Complex64> {
    Vector4::new(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)])
}

fn unvec4(v: &Vector4<Complex64>) -> Mat2 {
    Mat2::new(v[0], v[1], v[2], v[3])
}

/// Solves `x γ + γ x_r^T = y`, where `x_r` is the symbol at the reflected
/// momentum. `phi` only labels the error.
pub fn solve_symbol_lyapunov(x: &Mat2, xr: &Mat2, y: &Mat2, phi: f64) -> Result<Mat2> {
    let k = lyapunov_operator(x, xr);
    let lu = k.full_piv_lu();
    let u = lu.u();
    let piv = (0..4).map(|i| u[(i, i)].norm());
    let (lo, hi) = piv.fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p), hi.max(p)));
    if !(lo > CRITICAL_PIVOT * hi) {
        return Err(Error::CriticalAngle(phi));
    }
    let sol = lu.solve(&vec4(y)).ok_or(Error::CriticalAngle(phi))?;
    Ok(unvec4(&sol))
}

/// Solved symbol `γ̃(φ)`.
pub fn symbol_covariance(model: &SymbolModel, phi: f64) -> Result<Mat2> {
    model.covariance_z(cis(phi))
}

fn det3(m: &Matrix3<Complex64>) -> Complex64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)]) - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// Adjugate and determinant by cofactors, valid for singular `k`.
fn adjugate4(k: &Matrix4<Complex64>) -> (Matrix4<Complex64>, Complex64) {
    let mut cof = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let minor = Matrix3::from_fn(|a, b| k[(if a < i { a } else { a + 1 }, if b < j { b } else { b + 1 })]);
            let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            cof[(i, j)] = det3(&minor) * s;
        }
    }
    let det = (0..4).fold(ZERO, |acc, j| acc + k[(0, j)] * cof[(0, j)]);
    (cof.transpose(), det)
}

/// `(adj(k) v, det k)`, through a pivoted LU unless `k` is close to
/// singular; cofactor expansion loses digits on ill-conditioned `k`.
/// Also returns the pivot ratio as a condition estimate.
fn adjugate_solve(k: &Matrix4<Complex64>, v: &Vector4<Complex64>) -> (Vector4<Complex64>, Complex64, f64) {
    let lu = k.full_piv_lu();
    let (lo, hi) = (0..4).map(|i| lu.u()[(i, i)].norm()).fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p), hi.max(p)));
    if lo > 1e-10 * hi {
        if let Some(sol) = lu.solve(v) {
            let det = lu.determinant();
            return (sol * det, det, hi / lo);
        }
    }
    let (adj, det) = adjugate4(k);
    (adj * v, det, 1.0)
}

/// `γ̃(z) = η(z)/d(z)` with polynomial entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSymbol {
    /// Row-major entries of `η`.
    pub eta: [Poly; 4],
    pub d: Poly,
    /// Coupling range `R` of the model.
    pub range: usize,
    /// Estimated absolute noise of the coefficients of `d`.
    pub noise: f64,
}

/// One root group of `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub z: Complex64,
    pub multiplicity: usize,
    /// Max-entry norm of the residue of `γ̃`.
    pub residue: f64,
    pub removable: bool,
    /// Radius within which coefficient noise of `d` can move the root.
    pub uncertainty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationLength {
    /// `-1/ln|z_0|`, infinite when the pole touches the unit circle.
    pub xi: f64,
    pub dominant_pole: Complex64,
    pub divergent: bool,
}

/// Zeroes coefficients below `threshold` at both ends of `p`.
fn trim(mut p: Poly, threshold: f64) -> Poly {
    let noise = |a: &Complex64| a.norm() <= threshold;
    for a in p.iter_mut() {
        if !noise(a) {
            break;
        }
        *a = ZERO;
    }
    while p.len() > 1 && noise(&p[p.len() - 1]) {
        p.pop();
    }
    p
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Poly {
    let mut out = alloc::vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[Complex64], b: &[Complex64]) -> Poly {
    (0..a.len().max(b.len()))
        .map(|k| a.get(k).copied().unwrap_or(ZERO) - b.get(k).copied().unwrap_or(ZERO))
        .collect()
}

/// Rational form of `γ̃`: from the closed form when the model carries one,
/// otherwise from the solved symbol, see [`rationalize_solved`].
pub fn rationalize(model: &SymbolModel) -> Result<RationalSymbol> {
    match &model.closed {
        Some(cf) => rationalize_closed(model, cf),
        None => rationalize_solved(model),
    }
}

/// Interpolates `γ̃ d` on 64 shifted roots of unity, with `d` the first
/// singular polynomial of the closed form.
fn rationalize_closed(model: &SymbolModel, cf: &ClosedSymbol) -> Result<RationalSymbol> {
    let polys = (cf.singular_polynomials)(&model.params);
    let den = polys.first().cloned().ok_or(Error::NotFiniteRange)?;
    let n = 64usize;
    let shift = n / 2;
    let alpha = 0.1234;
    let nodes: Vec<Complex64> = (0..n).map(|j| cis(alpha + 2.0 * PI * j as f64 / n as f64)).collect();
    let mut vals = Vec::with_capacity(n);
    for &z in &nodes {
        let v = (cf.gamma)(&model.params, z) * poly_eval(&den, z);
        if !v.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::CriticalAngle(z.arg()));
        }
        vals.push(v);
    }
    // coefficient k of z^{k - shift}
    let eta: [Poly; 4] = core::array::from_fn(|e| {
        (0..n)
            .map(|k| {
                let p = k as f64 - shift as f64;
                nodes.iter().zip(&vals).fold(ZERO, |acc, (z, v)| acc + v[(e / 2, e % 2)] * z.powf(-p)) / c(n as f64)
            })
            .collect()
    });
    let mut d = alloc::vec![ZERO; shift];
    d.extend(den);
    let scale = eta.iter().flatten().fold(0.0f64, |m, a| m.max(a.norm()));
    finish_rational(model, eta.map(|p| trim(p, 1e-13 * scale)), d, 0.0, |z| Ok((cf.gamma)(&model.params, z)))
}

/// Strips common powers of `z`, then checks `η/d` against `reference` at 32
/// angles. `noise` is the absolute coefficient noise of `d`.
fn finish_rational(
    model: &SymbolModel,
    mut eta: [Poly; 4],
    d: Poly,
    noise: f64,
    reference: impl Fn(Complex64) -> Result<Mat2>,
) -> Result<RationalSymbol> {
    let ds = d.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if !(ds > 0.0) || !ds.is_finite() {
        return Err(Error::CriticalAngle(0.0));
    }
    let mut d = trim(d, (1e-13 * ds).max(noise));
    let low = |p: &Poly| p.iter().position(|z| *z != ZERO).unwrap_or(usize::MAX);
    let common = eta.iter().map(low).fold(low(&d), usize::min);
    if common != usize::MAX && common > 0 {
        d.drain(..common.min(d.len() - 1));
        for p in eta.iter_mut() {
            let k = common.min(p.len() - 1);
            p.drain(..k);
        }
    }
    let rational = RationalSymbol { eta, d, range: model.range(), noise };
    for k in 0..32 {
        let phi = -PI + 2.0 * PI * (k as f64 + 0.37) / 32.0;
        let z = cis(phi);
        let Ok(direct) = reference(z) else { continue };
        let diff = max_abs2(&(rational.eval(z) - direct));
        // near a gap closing the nodes lose digits and the loss spreads over
        // all coefficients
        let tol = RATIONAL_CHECK_TOL.max(16.0 * noise / rational.d_at(z).norm());
        if !(diff <= tol * max_abs2(&direct).max(1.0)) {
            return Err(Error::EvaluationFailure(alloc::format!("rational symbol off by {diff:e} at phi = {phi}")));
        }
    }
    Ok(rational)
}

/// Exact numerator and denominator by interpolation on `8R + 1` roots of
/// unity of `z^{4R} det x̂(z)` and `z^{4R} adj x̂(z) vec ỹ(z)`.
pub fn rationalize_solved(model: &SymbolModel) -> Result<RationalSymbol> {
    let r = model.range();
    if r > 64 {
        return Err(Error::NotFiniteRange);
    }
    let n = 8 * r + 1;
    let shift = (4 * r) as i32;
    let mut d_vals = Vec::with_capacity(n);
    let mut e_vals = Vec::with_capacity(n);
    let mut node_cond = 1.0f64;
    for j in 0..n {
        let z = cis(2.0 * PI * j as f64 / n as f64);
        let (x, y) = model.shape_z(z);
        let (xr, _) = model.shape_z(z.inv());
        let (eta, det, cond) = adjugate_solve(&lyapunov_operator(&x, &xr), &vec4(&y));
        node_cond = node_cond.max(cond);
        let w = z.powi(shift);
        d_vals.push(det * w);
        e_vals.push(eta * w);
    }
    let interp = |vals: &dyn Fn(usize) -> Complex64| -> Poly {
        (0..n)
            .map(|k| {
                (0..n).fold(ZERO, |acc, j| acc + vals(j) * cis(-2.0 * PI * ((j * k) % n) as f64 / n as f64))
                    / c(n as f64)
            })
            .collect()
    };
    let d = interp(&|j| d_vals[j]);
    let eta: [Poly; 4] = core::array::from_fn(|e| interp(&|j| e_vals[j][e]));
    let d_big = d_vals.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let e_big = e_vals.iter().flatten().fold(0.0f64, |m, v| m.max(v.norm()));
    let noise = f64::EPSILON * node_cond * d_big;
    let eta = eta.map(|p| trim(p, e_big * (1e-13f64).max(f64::EPSILON * node_cond)));
    finish_rational(model, eta, d, noise, |z| model.covariance_z(z))
}

impl RationalSymbol {
    pub fn eta_at(&self, z: Complex64) -> Mat2 {
        Mat2::from_fn(|i, j| poly_eval(&self.eta[2 * i + j], z))
    }

    pub fn d_at(&self, z: Complex64) -> Complex64 {
        poly_eval(&self.d, z)
    }

    pub fn eval(&self, z: Complex64) -> Mat2 {
        self.eta_at(z) / self.d_at(z)
    }

    pub fn degree(&self) -> usize {
        self.eta.iter().map(|p| p.len()).fold(self.d.len(), usize::max) - 1
    }

    /// `d² - det η`, the numerator of `1 - det γ̃`.
    pub fn purity_numerator(&self) -> Poly {
        let det = poly_sub(&poly_mul(&self.eta[0], &self.eta[3]), &poly_mul(&self.eta[1], &self.eta[2]));
        poly_sub(&poly_mul(&self.d, &self.d), &det)
    }

    /// Largest entry of `γ̃` on the unit circle, the scale of residue tests.
    fn scale(&self) -> f64 {
        (0..64)
            .map(|k| max_abs2(&self.eval(cis(2.0 * PI * (k as f64 + 0.41) / 64.0))))
            .filter(|v| v.is_finite())
            .fold(1e-300, f64::max)
    }

    /// Root groups of `d` with their residues.
    pub fn poles(&self) -> Result<Vec<Pole>> {
        if self.d.len() < 2 {
            return Ok(Vec::new());
        }
        let groups = root_groups(&polynomial_roots(&self.d)?.roots);
        let scale = self.scale();
        let centers: Vec<Complex64> = groups.iter().map(|g| g.0).collect();
        let mut out = Vec::with_capacity(groups.len());
        for (idx, &(z, mult, spread)) in groups.iter().enumerate() {
            // a contour that cannot settle sits in coefficient noise
            let norm = match self.residue(&centers, idx, spread, mult, |_| c(1.0)) {
                Ok(res) => max_abs2(&res),
                Err(Error::NoConvergence { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            out.push(Pole {
                z,
                multiplicity: mult,
                residue: norm,
                removable: norm < REMOVABLE_TOL * scale,
                uncertainty: self.root_uncertainty(z, mult).max(spread),
            });
        }
        Ok(out)
    }

    /// `(noise Σ|z|^k / |d^{(m)}(z)/m!|)^{1/m}` for a root of multiplicity `m`.
    fn root_uncertainty(&self, z: Complex64, mult: usize) -> f64 {
        if self.noise == 0.0 {
            return 0.0;
        }
        let mut p = self.d.clone();
        let mut fact = 1.0;
        for k in 1..=mult {
            p = p.iter().enumerate().skip(1).map(|(j, &a)| a * (j as f64)).collect();
            fact *= k as f64;
        }
        let size = (0..self.d.len()).fold(0.0, |acc, k| acc + z.norm().powi(k as i32));
        let lead = poly_eval(&p, z).norm() / fact;
        (self.noise * size / lead).powf(1.0 / mult as f64)
    }

    /// `Res[w(z) γ̃(z)]` at root group `idx`: the analytic `w η/d'` for an
    /// isolated simple root, a small contour integral otherwise.
    fn residue(
        &self,
        centers: &[Complex64],
        idx: usize,
        spread: f64,
        mult: usize,
        w: impl Fn(Complex64) -> Complex64,
    ) -> Result<Mat2> {
        let z0 = centers[idx];
        if mult == 1 {
            let dp: Poly = self.d.iter().enumerate().skip(1).map(|(k, &a)| a * (k as f64)).collect();
            let dd = poly_eval(&dp, z0);
            let lead = self.d.iter().fold(0.0f64, |m, a| m.max(a.norm()));
            if dd.norm() > 1e-6 * lead {
                return Ok(self.eta_at(z0) * (w(z0) / dd));
            }
        }
        let radius = contour_radius(centers, idx, spread);
        contour_integral(|z| Ok(M2(self.eval(z) * w(z))), z0, radius, 1e-14).map(|m| m.0)
    }
}

/// Groups roots closer than `1e-5 max(1, |z|)`: `(center, count, spread)`.
fn root_groups(roots: &[Complex64]) -> Vec<(Complex64, usize, f64)> {
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &r in roots {
        if let Some(g) = groups.iter_mut().find(|g| g.iter().any(|&s| (s - r).norm() <= 1e-5 * r.norm().max(1.0))) {
            g.push(r);
        } else {
            groups.push(alloc::vec![r]);
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let center = g.iter().fold(ZERO, |a, &b| a + b) / c(g.len() as f64);
            let spread = g.iter().fold(0.0f64, |m, &b| m.max((b - center).norm()));
            (center, g.len(), spread)
        })
        .collect()
}

fn contour_radius(centers: &[Complex64], idx: usize, spread: f64) -> f64 {
    let z0 = centers[idx];
    let nearest = centers
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != idx)
        .map(|(_, &z)| (z - z0).norm())
        .fold(1.0f64, f64::min);
    (0.5 * nearest).max(10.0 * spread).min(0.25)
}

#[derive(Debug, Clone, Copy)]
struct M2(Mat2);

impl Add for M2 {
    type Output = M2;
    fn add(self, o: M2) -> M2 {
        M2(self.0 + o.0)
    }
}

impl Sub for M2 {
    type Output = M2;
    fn sub(self, o: M2) -> M2 {
        M2(self.0 - o.0)
    }
}

impl Mul<f64> for M2 {
    type Output = M2;
    fn mul(self, s: f64) -> M2 {
        M2(self.0 * c(s))
    }
}

impl Mul<Complex64> for M2 {
    type Output = M2;
    fn mul(self, s: Complex64) -> M2 {
        M2(self.0 * s)
    }
}

impl QuadValue for M2 {
    fn zero() -> Self {
        M2(Mat2::zeros())
    }
    fn magnitude(&self) -> f64 {
        max_abs2(&self.0)
    }
    fn parts(&self) -> (f64, f64) {
        (self.0[(0, 0)].re, self.0[(0, 0)].im)
    }
}

/// Mean of `f` over `[0, 2π)` by the trapezoid rule with point doubling,
/// converged relative to the largest sample.
fn periodic_mean<T: QuadValue>(f: impl Fn(f64) -> Result<T>, rel: f64, max_points: usize) -> Result<T> {
    let mut n = 32usize;
    let mut sum = T::zero();
    let mut big = 0.0f64;
    for j in 0..n {
        let v = f(2.0 * PI * j as f64 / n as f64)?;
        big = big.max(v.magnitude());
        sum = sum + v;
    }
    let mut est = sum * (1.0 / n as f64);
    let mut calm = 0;
    while n < max_points {
        for j in 0..n {
            let v = f(2.0 * PI * (j as f64 + 0.5) / n as f64)?;
            big = big.max(v.magnitude());
            sum = sum + v;
        }
        n *= 2;
        let next = sum * (1.0 / n as f64);
        let change = (next - est).magnitude();
        est = next;
        if change <= rel * big + 1e-15 {
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

/// `(1/2πi) ∮ f dz` over the circle `|z - center| = radius`.
fn contour_integral<T>(f: impl Fn(Complex64) -> Result<T>, center: Complex64, radius: f64, rel: f64) -> Result<T>
where
    T: QuadValue + Mul<Complex64, Output = T>,
{
    periodic_mean(
        |t| {
            let e = cis(t) * radius;
            Ok(f(center + e)? * e)
        },
        rel,
        1 << 16,
    )
}

/// Errors with `ClusteredPoles` when a non-removable pole cannot be placed
/// relative to the unit circle within the coefficient noise.
pub fn correlation_length(rational: &RationalSymbol) -> Result<CorrelationLength> {
    let poles = rational.poles()?;
    if poles.iter().any(|p| !p.removable && p.uncertainty > CIRCLE_TOL && (1.0 - p.z.norm()).abs() <= p.uncertainty) {
        return Err(Error::ClusteredPoles);
    }
    let dominant = poles
        .iter()
        .filter(|p| !p.removable && p.z.norm() > 1e-12 && p.z.norm() <= 1.0 + CIRCLE_TOL)
        .max_by(|a, b| a.z.norm().total_cmp(&b.z.norm()))
        .ok_or(Error::NoPoles)?;
    let m = dominant.z.norm();
    let divergent = m >= 1.0 - 1e-12;
    let xi = if divergent { f64::INFINITY } else { -1.0 / m.ln() };
    Ok(CorrelationLength { xi, dominant_pole: dominant.z, divergent })
}

/// `γ(r) = Σ Res[z^{r-1} γ̃(z)]` over the poles in the unit disk, `z = 0`
/// included.
pub fn real_space_correlation(rational: &RationalSymbol, r: i64) -> Result<Mat2> {
    let roots = if rational.d.len() > 1 { polynomial_roots(&rational.d)?.roots } else { Vec::new() };
    let mut groups = root_groups(&roots);
    if !groups.iter().any(|g| g.0.norm() < 1e-12) {
        groups.push((ZERO, 0, 0.0));
    }
    let centers: Vec<Complex64> = groups.iter().map(|g| g.0).collect();
    let scale = rational.scale();
    let w = |z: Complex64| z.powi((r - 1) as i32);
    let mut sum = Mat2::zeros();
    for (idx, &(z0, mult, spread)) in groups.iter().enumerate() {
        let m = z0.norm();
        if m > 1.0 + CIRCLE_TOL {
            continue;
        }
        if m >= 1.0 - CIRCLE_TOL {
            let res = rational.residue(&centers, idx, spread, mult.max(2), |_| c(1.0))?;
            if max_abs2(&res) < REMOVABLE_TOL * scale {
                continue;
            }
            return Err(Error::CriticalAngle(z0.arg()));
        }
        let mult = if m < 1e-12 { 0 } else { mult };
        sum += rational.residue(&centers, idx, spread, mult, w)?;
    }
    Ok(sum)
}

/// `(1/2π) ∫ γ̃(φ) e^{iφr} dφ` on a shifted trapezoid grid.
pub fn real_space_correlation_quadrature(model: &SymbolModel, r: i64, tol: f64) -> Result<Mat2> {
    let offset = 0.123_456_789;
    let v = periodic_quadrature_limited(
        |t| {
            let z = cis(t + offset);
            Ok(M2(model.covariance_z(z)? * z.powi(r as i32)))
        },
        2.0 * PI * tol,
        1 << 18,
    )?;
    Ok(v.0 / c(2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MucMode {
    Quadrature,
    Residue,
}

/// `u_μν(z) = (i/4) Tr{γ̃[∂_μγ̃, ∂_νγ̃]}/(1 - det γ̃)²`, zero where
/// `det γ̃ = 1`.
pub fn muc_density(model: &SymbolModel, mu: usize, nu: usize, z: Complex64) -> Result<Complex64> {
    let g = model.gamma_z(z)?;
    let a = model.d_gamma_z(z, mu)?;
    let b = model.d_gamma_z(z, nu)?;
    let den = c(1.0) - g.determinant();
    if den.norm() < 1e-14 {
        return Ok(ZERO);
    }
    let comm = a * b - b * a;
    Ok(I * 0.25 * (g * comm).trace() / (den * den))
}

/// MUC per site `Ū_μν = (1/2π) ∫ u_μν(φ) dφ`.
pub fn muc_per_site(model: &SymbolModel, mu: usize, nu: usize, mode: MucMode) -> Result<f64> {
    match mode {
        MucMode::Quadrature => {
            let rel = if model.closed.is_some() { 1e-13 } else { 1e-9 };
            periodic_mean(|t| Ok(muc_density(model, mu, nu, cis(t))?.re), rel, 1 << 18)
        }
        MucMode::Residue => muc_residue(model, mu, nu),
    }
}

fn muc_candidates(model: &SymbolModel) -> Result<Vec<Complex64>> {
    let polys = match &model.closed {
        Some(cf) => (cf.singular_polynomials)(&model.params),
        None => {
            let rat = rationalize(model)?;
            let p = rat.purity_numerator();
            alloc::vec![rat.d, p]
        }
    };
    let mut out = alloc::vec![ZERO];
    for p in polys {
        let lead = p.iter().fold(0.0f64, |m, a| m.max(a.norm()));
        if p.len() < 2 || lead == 0.0 {
            continue;
        }
        out.extend(polynomial_roots(&p)?.roots);
    }
    Ok(out)
}

/// `Σ Res[u(z)/z]` over the singularities inside the unit disk.
fn muc_residue(model: &SymbolModel, mu: usize, nu: usize) -> Result<f64> {
    let groups = root_groups(&muc_candidates(model)?);
    let rel = if model.closed.is_some() { 1e-13 } else { 1e-9 };
    let centers: Vec<Complex64> = groups.iter().map(|g| g.0).collect();
    let f = |z: Complex64| Ok(muc_density(model, mu, nu, z)? / z);
    let mut total = ZERO;
    for (idx, &(z0, _, spread)) in groups.iter().enumerate() {
        let m = z0.norm();
        if m > 1.0 + CIRCLE_TOL {
            continue;
        }
        let radius = contour_radius(&centers, idx, spread);
        let res = contour_integral(f, z0, radius, rel)?;
        if m >= 1.0 - CIRCLE_TOL {
            if res.norm() > 1e-8 {
                return Err(Error::NoConvergence { re: total.re, im: total.im });
            }
            continue;
        }
        total += res;
    }
    Ok(total.re)
}

fn min_re_eig(x: &Mat2) -> f64 {
    let half = x.trace() / 2.0;
    let skew = (x[(0, 0)] - x[(1, 1)]) / 2.0;
    let disc = (skew * skew + x[(0, 1)] * x[(1, 0)]).sqrt();
    (half + disc).re.min((half - disc).re)
}

/// `Δ = 2 min_φ min_j Re x_j(φ)` on a 512-point grid polished by golden
/// sections.
pub fn gap_on_circle(model: &SymbolModel) -> f64 {
    let f = |phi: f64| min_re_eig(&symbol_shape(model, phi).0);
    let n = 512;
    let step = 2.0 * PI / n as f64;
    let (mut best_phi, mut best) = (-PI, f(-PI));
    for j in 1..n {
        let phi = -PI + step * j as f64;
        let v = f(phi);
        if v < best {
            best = v;
            best_phi = phi;
        }
    }
    let golden = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut a, mut b) = (best_phi - step, best_phi + step);
    let mut x1 = b - golden * (b - a);
    let mut x2 = a + golden * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-12 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - golden * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + golden * (b - a);
            f2 = f(x2);
        }
    }
    2.0 * best.min(f1).min(f2)
}

/// The ring of `sites` unit cells as a finite quadratic Lindblad model,
/// Majorana `2a + β` for site `a`.
pub fn ring_model(model: &SymbolModel, sites: usize) -> Result<QuadraticLindbladModel> {
    if sites <= 2 * model.range() {
        return Err(Error::DegenerateInput(alloc::format!("{sites} sites for coupling range {}", model.range())));
    }
    let dim = 2 * sites;
    let n = sites as i64;
    let mut h = CMat::zeros(dim, dim);
    for (r, b) in &model.h_blocks {
        for a in 0..n {
            let s = (a - r).rem_euclid(n) as usize;
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                h[(2 * a as usize + i, 2 * s + j)] += b[(i, j)];
            }
        }
    }
    let mut jumps = Vec::with_capacity(sites * model.jumps.len());
    for fam in &model.jumps {
        for r in 0..n {
            let mut v = CVec::zeros(dim);
            for (u, l) in fam {
                let site = (r + u).rem_euclid(n) as usize;
                v[2 * site] += l[0];
                v[2 * site + 1] += l[1];
            }
            jumps.push(v);
        }
    }
    QuadraticLindbladModel::new(h, jumps)
}

/// Parameters of the rotated dissipative XY chain. `epsilon` scales the
/// couplings to the two baths; the closed-form symbol is its `ε → 0` limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedXyParams {
    pub delta: f64,
    pub h: f64,
    pub theta: f64,
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub epsilon: f64,
}

pub const ROTATED_XY_LABELS: [&str; 6] = ["delta", "h", "theta", "mu_minus", "mu_plus", "epsilon"];

impl RotatedXyParams {
    pub fn new(delta: f64, h: f64, theta: f64, mu_minus: f64, mu_plus: f64, epsilon: f64) -> Result<Self> {
        if !(mu_minus * mu_minus + mu_plus * mu_plus > 0.0) {
            return Err(Error::DegenerateInput("mu_minus and mu_plus both vanish".into()));
        }
        if !(epsilon > 0.0) {
            return Err(Error::DegenerateInput(alloc::format!("epsilon = {epsilon}")));
        }
        Ok(Self { delta, h, theta, mu_minus, mu_plus, epsilon })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        alloc::vec![self.delta, self.h, self.theta, self.mu_minus, self.mu_plus, self.epsilon]
    }

    pub fn from_slice(p: &[f64]) -> Result<Self> {
        if p.len() != 6 {
            return Err(Error::DimensionMismatch(alloc::format!("{} rotated XY parameters", p.len())));
        }
        Self::new(p[0], p[1], p[2], p[3], p[4], p[5])
    }
}

/// Adds `a · i w_{(r,p)} w_{(s,q)}` to the blocks.
fn add_bond(blocks: &mut Vec<(i64, Mat2)>, r: i64, p: usize, s: i64, q: usize, a: f64) {
    for (key, i, j, v) in [(r - s, p, q, I * (a / 2.0)), (s - r, q, p, -I * (a / 2.0))] {
        match blocks.iter_mut().find(|(k, _)| *k == key) {
            Some((_, b)) => b[(i, j)] += v,
            None => {
                let mut b = Mat2::zeros();
                b[(i, j)] = v;
                blocks.push((key, b));
            }
        }
    }
}

/// XY chain with couplings rotated about `z` by `θ/2` in spin space and a
/// gain/loss bath `εμ_±` on every site.
pub fn build_rotated_xy_dissipative(p: &RotatedXyParams) -> Result<SymbolModel> {
    let (c2, s2) = (p.theta.cos(), p.theta.sin());
    let axx = 0.5 + 0.5 * p.delta * c2;
    let ayy = 0.5 - 0.5 * p.delta * c2;
    let axy = 0.5 * p.delta * s2;
    let mut blocks = Vec::new();
    add_bond(&mut blocks, 0, 1, 1, 0, axx);
    add_bond(&mut blocks, 0, 0, 1, 1, -ayy);
    add_bond(&mut blocks, 0, 1, 1, 1, -axy);
    add_bond(&mut blocks, 0, 0, 1, 0, axy);
    add_bond(&mut blocks, 0, 0, 0, 1, p.h);
    let gain = Vec2::new(c(1.0), -I) * c(0.5 * p.epsilon * p.mu_plus);
    let loss = Vec2::new(c(1.0), I) * c(0.5 * p.epsilon * p.mu_minus);
    let model = SymbolModel::new(blocks, alloc::vec![alloc::vec![(0, gain)], alloc::vec![(0, loss)]])?;
    Ok(model
        .with_parameters(&ROTATED_XY_LABELS, p.to_vec(), |v| build_rotated_xy_dissipative(&RotatedXyParams::from_slice(v)?))
        .with_closed(ClosedSymbol {
            gamma: rotated_xy_gamma,
            d_gamma: rotated_xy_d_gamma,
            singular_polynomials: rotated_xy_singular,
        }))
}

fn rotated_q(p: &[f64]) -> f64 {
    let (a, b) = (p[3] * p[3], p[4] * p[4]);
    (a - b) / (a + b)
}

/// `z(cos φ - h)` and `z sin φ`.
fn rotated_ab(h: f64, z: Complex64) -> (Complex64, Complex64) {
    ((z * z - z * (2.0 * h) + 1.0) * 0.5, (z * z - 1.0) * (-I * 0.5))
}

/// `γ̃ = q/(1+t²) (t cos θ, -1, t sin θ)·σ`, `t = δ sin φ/(cos φ - h)`.
fn rotated_xy_gamma(p: &[f64], z: Complex64) -> Mat2 {
    let (delta, theta) = (p[0], p[2]);
    let (a, b) = rotated_ab(p[1], z);
    let den = a * a + b * b * (delta * delta);
    let f = a * a / den;
    let ft = a * b * delta / den;
    pauli(ft * theta.cos(), -f, ft * theta.sin()) * c(rotated_q(p))
}

fn rotated_xy_d_gamma(p: &[f64], z: Complex64, mu: usize) -> Option<Mat2> {
    let (delta, theta) = (p[0], p[2]);
    let q = rotated_q(p);
    let (a, b) = rotated_ab(p[1], z);
    let den = a * a + b * b * (delta * delta);
    let den2 = den * den;
    let (dft, df) = match mu {
        0 => (a * b * (a * a - b * b * (delta * delta)) / den2, -(a * a * b * b) * (2.0 * delta) / den2),
        1 => {
            let ah = -z;
            (b * ah * delta * (b * b * (delta * delta) - a * a) / den2, a * ah * b * b * (2.0 * delta * delta) / den2)
        }
        2 => {
            let ft = a * b * delta / den;
            return Some(pauli(-ft * theta.sin(), ZERO, ft * theta.cos()) * c(q));
        }
        _ => return None,
    };
    Some(pauli(dft * theta.cos(), -df, dft * theta.sin()) * c(q))
}

fn rotated_xy_singular(p: &[f64]) -> Vec<Poly> {
    let (delta, q) = (p[0], rotated_q(p));
    let a = [c(0.5), c(-p[1]), c(0.5)];
    let b = [I * 0.5, ZERO, -I * 0.5];
    let aa = poly_mul(&a, &a);
    let bb: Poly = poly_mul(&b, &b).into_iter().map(|v| v * (delta * delta)).collect();
    let den: Poly = aa.iter().zip(&bb).map(|(x, y)| x + y).collect();
    let pur: Poly = aa.iter().zip(&bb).map(|(x, y)| x * (1.0 + q * q) + y).collect();
    alloc::vec![den, pur]
}

pub const RESERVOIR_LABELS: [&str; 2] = ["lambda", "theta"];

/// Chain driven only by a three-site engineered reservoir.
pub fn build_reservoir_chain(lambda: f64, theta: f64) -> Result<SymbolModel> {
    let norm = 4.0 * (lambda * lambda + lambda + 1.0);
    let l0 = Vec2::new(c(theta.cos()), c(-theta.sin()));
    let l1 = Vec2::new(I * theta.sin(), I * theta.cos());
    let fam = alloc::vec![(0, l0 * c((1.0 + lambda) / norm)), (1, l1 * c(1.0 / norm)), (2, l1 * c(lambda / norm))];
    let model = SymbolModel::new(Vec::new(), alloc::vec![fam])?;
    Ok(model
        .with_parameters(&RESERVOIR_LABELS, alloc::vec![lambda, theta], |v| {
            if v.len() != 2 {
                return Err(Error::DimensionMismatch(alloc::format!("{} reservoir parameters", v.len())));
            }
            build_reservoir_chain(v[0], v[1])
        })
        .with_closed(ClosedSymbol {
            gamma: reservoir_gamma,
            d_gamma: reservoir_d_gamma,
            singular_polynomials: reservoir_singular,
        }))
}

/// `(g, S, C)` with `g = (1+λ)/(1+λ+λ²+λ cos φ)`,
/// `S = sin φ + λ sin 2φ`, `C = cos φ + λ cos 2φ`.
fn reservoir_parts(lambda: f64, z: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let zi = z.inv();
    let c1 = (z + zi) * 0.5;
    let s1 = (z - zi) * (-I * 0.5);
    let (z2, zi2) = (z * z, zi * zi);
    let c2 = (z2 + zi2) * 0.5;
    let s2 = (z2 - zi2) * (-I * 0.5);
    let den = c1 * lambda + (1.0 + lambda + lambda * lambda);
    let g = c(1.0 + lambda) / den;
    (g, s1 + s2 * lambda, c1 + c2 * lambda, den)
}

/// `γ̃(φ) = g (S cos 2θ, -C, S sin 2θ)·σ` at `-φ`.
fn reservoir_gamma(p: &[f64], z: Complex64) -> Mat2 {
    let z = z.inv();
    let (lambda, theta) = (p[0], p[1]);
    let (g, s, cc, _) = reservoir_parts(lambda, z);
    pauli(s * (2.0 * theta).cos(), -cc, s * (2.0 * theta).sin()) * g
}

fn reservoir_d_gamma(p: &[f64], z: Complex64, mu: usize) -> Option<Mat2> {
    let z = z.inv();
    let (lambda, theta) = (p[0], p[1]);
    let (g, s, cc, den) = reservoir_parts(lambda, z);
    let (ct, st) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    match mu {
        0 => {
            let zi = z.inv();
            let c1 = (z + zi) * 0.5;
            let z2 = z * z;
            let zi2 = zi * zi;
            let c2 = (z2 + zi2) * 0.5;
            let s2 = (z2 - zi2) * (-I * 0.5);
            let dg = (den - (c1 + 1.0 + 2.0 * lambda) * (1.0 + lambda)) / (den * den);
            Some(pauli(s * ct, -cc, s * st) * dg + pauli(s2 * ct, -c2, s2 * st) * g)
        }
        1 => Some(pauli(-s * st, ZERO, s * ct) * (g * 2.0)),
        _ => None,
    }
}

fn reservoir_singular(p: &[f64]) -> Vec<Poly> {
    let l = p[0];
    let den = alloc::vec![c(l / 2.0), c(1.0 + l + l * l), c(l / 2.0)];
    let extra = [ZERO, c(l), c(1.0 + l * l), c(l)];
    let w = (1.0 + l) * (1.0 + l);
    let sq = poly_mul(&den, &den);
    let pur = (0..sq.len()).map(|k| sq[k] + extra.get(k).copied().unwrap_or(ZERO) * w).collect();
    alloc::vec![den, pur]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{qgt, tangents_finite_difference};
    use crate::liouvillian::{ness_covariance, shape_matrices};
    use proptest::prelude::*;

    fn close(a: &Mat2, b: &Mat2) -> f64 {
        max_abs2(&(a - b))
    }

    fn reservoir(l: f64, t: f64) -> SymbolModel {
        build_reservoir_chain(l, t).unwrap()
    }

    fn rotated(d: f64, h: f64, t: f64, eps: f64) -> SymbolModel {
        build_rotated_xy_dissipative(&RotatedXyParams::new(d, h, t, 1.0, 0.5, eps).unwrap()).unwrap()
    }

    fn constant_model() -> SymbolModel {
        let l = Vec2::new(c(0.6), I * 0.3);
        let mut blocks = Vec::new();
        add_bond(&mut blocks, 0, 0, 0, 1, 0.7);
        SymbolModel::new(blocks, alloc::vec![alloc::vec![(0, l)]]).unwrap()
    }

    #[test]
    fn trivial_shapes() {
        let mut blocks = Vec::new();
        add_bond(&mut blocks, 0, 1, 1, 0, 0.4);
        let m = SymbolModel::new(blocks, Vec::new()).unwrap();
        let (_, y) = symbol_shape(&m, 0.7);
        assert_eq!(max_abs2(&y), 0.0);
        let even = SymbolModel::new(Vec::new(), alloc::vec![alloc::vec![(0, Vec2::new(c(0.5), c(0.2)))]]).unwrap();
        let (_, y) = symbol_shape(&even, 1.3);
        assert!(max_abs2(&y) < 1e-15);
        let x = Mat2::new(c(1.0), c(0.2), c(-0.3), c(2.0));
        let g = solve_symbol_lyapunov(&x, &x, &Mat2::zeros(), 0.0).unwrap();
        assert_eq!(max_abs2(&g), 0.0);
    }

    #[test]
    fn asymmetric_hamiltonian_rejected() {
        let b = Mat2::new(c(0.0), I, -I, c(0.0));
        assert!(SymbolModel::new(alloc::vec![(1, b)], Vec::new()).is_err());
    }

    #[test]
    fn solve_satisfies_equation() {
        let m = rotated(0.7, 0.4, 0.3, 0.5);
        for phi in [0.2, 1.7, -2.5] {
            let (x, y) = symbol_shape(&m, phi);
            let (xr, _) = symbol_shape(&m, -phi);
            let g = symbol_covariance(&m, phi).unwrap();
            assert!(close(&(x * g + g * xr.transpose()), &y) < 1e-12);
        }
    }

    #[test]
    fn reservoir_matches_closed_form() {
        for (l, t) in [(0.3, 0.2), (-0.5, 1.0), (2.0, 0.7)] {
            let m = reservoir(l, t);
            for phi in [0.3, 1.1, -2.0] {
                let z = cis(phi);
                let g = m.covariance_z(z).unwrap();
                assert!(close(&g, &m.gamma_z(z).unwrap()) < 1e-12, "{l} {t} {phi}");
                let ev = (c(-1.0) * g.determinant()).sqrt().re;
                let expect = (1.0 + l) / (1.0 + l + l * phi.cos() + l * l) * (1.0 + l * l + 2.0 * l * phi.cos()).sqrt();
                assert!((ev - expect.abs()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reservoir_eigenvalues_of_x() {
        let m = reservoir(0.0, 0.4);
        let (x, _) = symbol_shape(&m, 0.9);
        let half = x.trace() / 2.0;
        let disc = (half * half - x.determinant()).sqrt();
        assert!(((half + disc).re - 0.25).abs() < 1e-12 && ((half - disc).re - 0.25).abs() < 1e-12);
        assert!((gap_on_circle(&m) - 0.5).abs() < 1e-12, "{}", gap_on_circle(&m));
        for l in [1.0, -1.0] {
            assert!(gap_on_circle(&reservoir(l, 0.3)) < 1e-9);
        }
    }

    #[test]
    fn rotated_weak_coupling_matches_closed_form() {
        for (d, h, t) in [(0.5, 0.3, 0.4), (1.2, 1.5, 1.0)] {
            let m = rotated(d, h, t, 1e-3);
            for phi in [0.4, 2.0, -1.0] {
                let z = cis(phi);
                let g = m.covariance_z(z).unwrap();
                assert!(close(&g, &m.gamma_z(z).unwrap()) < 1e-5);
            }
            let closed = m.gamma_z(c(1.0)).unwrap();
            let q = (1.0 - 0.25) / 1.25;
            assert!(close(&closed, &pauli(ZERO, c(-q), ZERO)) < 1e-14);
        }
    }

    #[test]
    fn rotated_gap_scales_with_epsilon_squared() {
        let g1 = gap_on_circle(&rotated(0.6, 0.4, 0.2, 1e-2));
        let g2 = gap_on_circle(&rotated(0.6, 0.4, 0.2, 2e-2));
        assert!(g1 > 0.0);
        assert!((g2 / g1 - 4.0).abs() < 1e-8);
    }

    #[test]
    fn closed_derivatives_match_differences() {
        let check = |m: &SymbolModel, mu: usize| {
            let z = Complex64::new(0.4, 0.7);
            let exact = m.d_gamma_z(z, mu).unwrap();
            let cf = m.closed.unwrap();
            let h = 1e-6;
            let mut pp = m.params.clone();
            pp[mu] += h;
            let mut pm = m.params.clone();
            pm[mu] -= h;
            let fd = ((cf.gamma)(&pp, z) - (cf.gamma)(&pm, z)) / c(2.0 * h);
            assert!(close(&exact, &fd) < 1e-7 * max_abs2(&exact).max(1.0), "{mu}");
        };
        let r = reservoir(0.4, 0.3);
        for mu in 0..2 {
            check(&r, mu);
        }
        let x = rotated(0.7, 0.4, 0.3, 1e-3);
        for mu in 0..3 {
            check(&x, mu);
        }
    }

    #[test]
    fn constant_symbol_is_degree_zero() {
        let m = constant_model();
        let rat = rationalize(&m).unwrap();
        assert_eq!(rat.degree(), 0);
        let g = symbol_covariance(&m, 0.3).unwrap();
        assert!(close(&real_space_correlation(&rat, 0).unwrap(), &g) < 1e-12);
        assert!(max_abs2(&real_space_correlation(&rat, 1).unwrap()) < 1e-12);
        assert!(max_abs2(&real_space_correlation(&rat, 3).unwrap()) < 1e-12);
        assert_eq!(correlation_length(&rat), Err(Error::NoPoles));
    }

    #[test]
    fn reservoir_denominator_is_the_quadratic() {
        for l in [0.5, 2.0, -0.3] {
            let rat = rationalize(&reservoir(l, 0.4)).unwrap();
            let roots = polynomial_roots(&rat.d).unwrap().roots;
            let quad = polynomial_roots(&[c(l), c(2.0 * (1.0 + l + l * l)), c(l)]).unwrap().roots;
            for q in quad {
                assert!(roots.iter().any(|r| (r - q).norm() < 1e-5), "{l}: {q} not among {roots:?}");
            }
        }
    }

    #[test]
    fn closed_and_solved_rationals_agree() {
        for l in [0.5, 1.0, -0.6, 2.5] {
            let m = reservoir(l, 0.7);
            let a = correlation_length(&rationalize(&m).unwrap()).unwrap();
            let b = correlation_length(&rationalize_solved(&m).unwrap()).unwrap();
            assert!((a.dominant_pole - b.dominant_pole).norm() < 1e-6, "{l}: {a:?} {b:?}");
            let ra = rationalize(&m).unwrap();
            let rb = rationalize_solved(&m).unwrap();
            for r in 0..4 {
                let ga = real_space_correlation(&ra, r).unwrap();
                let gb = real_space_correlation(&rb, r).unwrap();
                assert!(close(&ga, &gb) < 1e-9);
            }
        }
    }

    #[test]
    fn unresolvable_pole_is_reported() {
        let rat = rationalize_solved(&reservoir(-1.0 + 5e-4, 0.3)).unwrap();
        assert_eq!(correlation_length(&rat), Err(Error::ClusteredPoles));
    }

    #[test]
    fn reservoir_correlation_length() {
        let rat = rationalize(&reservoir(1.0, 0.3)).unwrap();
        let cl = correlation_length(&rat).unwrap();
        assert!((cl.dominant_pole.norm() - (3.0 - 8.0f64.sqrt())).abs() < 1e-8);
        assert!((cl.xi - 0.567).abs() < 1e-3);
        for l in [-1.0 + 5e-4, -1.0 - 5e-4] {
            let cl = correlation_length(&rationalize(&reservoir(l, 0.3)).unwrap()).unwrap();
            assert!(cl.xi > 1e3, "{l}: {}", cl.xi);
        }
    }

    #[test]
    fn residues_match_quadrature() {
        for m in [reservoir(0.6, 0.2), reservoir(1.0, 0.5), rotated(0.8, 0.5, 0.3, 0.4), rotated(0.8, 1.6, 0.3, 0.4)] {
            let rat = rationalize_solved(&m).unwrap();
            for r in 0..6 {
                let a = real_space_correlation(&rat, r).unwrap();
                let b = real_space_correlation_quadrature(&m, r, 1e-13).unwrap();
                assert!(close(&a, &b) < 1e-8, "r = {r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn correlations_decay_with_the_pole() {
        let m = reservoir(1.0, 0.3);
        let rat = rationalize(&m).unwrap();
        let xi = correlation_length(&rat).unwrap().xi;
        let norm = |r| max_abs2(&real_space_correlation(&rat, r).unwrap());
        let slope = (norm(12) / norm(8)).ln() / 4.0;
        assert!((slope + 1.0 / xi).abs() < 0.02 / xi, "{slope} {}", -1.0 / xi);
    }

    #[test]
    fn finite_ring_matches_symbol() {
        for m in [reservoir(0.6, 0.2), rotated(0.8, 0.5, 0.3, 0.4)] {
            let ring = ring_model(&m, 40).unwrap();
            let gamma = ness_covariance(&shape_matrices(&ring).unwrap()).unwrap().gamma;
            let rat = rationalize_solved(&m).unwrap();
            for r in [0i64, 1, 2, 5, -3] {
                let g = real_space_correlation(&rat, r).unwrap();
                let a = r.rem_euclid(40) as usize;
                let block = Mat2::from_fn(|i, j| gamma[(2 * a + i, j)]);
                assert!(close(&g, &block) < 1e-9, "r = {r}: {g} vs {block}");
            }
        }
    }

    fn ring_muc(build: impl Fn(&[f64]) -> SymbolModel, point: &[f64], mu: usize, nu: usize, sites: usize) -> f64 {
        let eval = |p: &[f64]| -> Result<CMat> {
            let ring = ring_model(&build(p), sites)?;
            Ok(ness_covariance(&shape_matrices(&ring)?)?.gamma)
        };
        let labels: Vec<&str> = (0..point.len()).map(|_| "p").collect();
        let t = tangents_finite_difference(eval, &labels, point, Some(&alloc::vec![1e-5; point.len()])).unwrap();
        let gamma = eval(point).unwrap();
        qgt(&gamma, &t).unwrap().u[(mu, nu)] / sites as f64
    }

    #[test]
    fn finite_ring_muc_matches_symbol_integral() {
        let rb = |p: &[f64]| build_reservoir_chain(p[0], p[1]).unwrap();
        let point = [0.6, 0.3];
        let ubar = muc_per_site(&rb(&point), 0, 1, MucMode::Quadrature).unwrap();
        let ring = ring_muc(rb, &point, 0, 1, 40);
        assert!((ring - ubar).abs() < 1e-6, "{ring} vs {ubar}");

        let xb = |p: &[f64]| build_rotated_xy_dissipative(&RotatedXyParams::new(p[0], p[1], p[2], 1.0, 0.5, 1.0).unwrap()).unwrap();
        let point = [0.8, 0.5, 0.3];
        let mut m = xb(&point);
        m.closed = None;
        let ubar = muc_per_site(&m, 1, 2, MucMode::Quadrature).unwrap();
        let ring = ring_muc(xb, &point, 1, 2, 60);
        assert!((ring - ubar).abs() < 1e-6, "{ring} vs {ubar}");
    }

    #[test]
    fn muc_modes_agree() {
        for (m, pairs) in [
            (reservoir(0.6, 0.2), alloc::vec![(0, 1)]),
            (reservoir(-1.4, 0.9), alloc::vec![(0, 1)]),
            (rotated(0.8, 0.5, 0.3, 1e-3), alloc::vec![(1, 2), (0, 2)]),
            (rotated(0.8, 1.6, 0.3, 1e-3), alloc::vec![(1, 2)]),
        ] {
            for (mu, nu) in pairs {
                let a = muc_per_site(&m, mu, nu, MucMode::Quadrature).unwrap();
                let b = muc_per_site(&m, mu, nu, MucMode::Residue).unwrap();
                assert!((a - b).abs() < 1e-6, "{:?} {mu}{nu}: {a} vs {b}", m.params);
            }
        }
    }

    #[test]
    fn muc_modes_agree_without_closed_form() {
        let mut m = rotated(0.8, 0.5, 0.3, 0.7);
        m.closed = None;
        let a = muc_per_site(&m, 1, 2, MucMode::Quadrature).unwrap();
        let b = muc_per_site(&m, 1, 2, MucMode::Residue).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn rotated_muc_delta_h_vanishes() {
        for (d, h) in [(0.5, 0.3), (1.3, 1.7), (0.2, -0.6)] {
            let m = rotated(d, h, 0.4, 1e-3);
            assert!(muc_per_site(&m, 0, 1, MucMode::Quadrature).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn rotated_muc_h_theta_jumps_at_unit_field() {
        let u = |h| muc_per_site(&rotated(0.6, h, 0.4, 1e-3), 1, 2, MucMode::Quadrature).unwrap();
        let inside = u(0.98);
        let outside = u(1.02);
        assert!((inside - u(0.95)).abs() < 0.1 * (inside - outside).abs());
        assert!((inside - outside).abs() > 0.01, "{inside} {outside}");
    }

    #[test]
    fn reservoir_muc_jumps_only_at_minus_one() {
        let u = |l| muc_per_site(&reservoir(l, 0.3), 0, 1, MucMode::Quadrature).unwrap();
        assert!((u(-1.01) - u(-0.99)).abs() > 0.05);
        assert!((u(1.01) - u(0.99)).abs() < 0.01);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn symbol_is_physical(l in -3.0f64..3.0, t in 0.0f64..3.0, phi in -3.1f64..3.1) {
            let m = reservoir(l, t);
            if let Ok(g) = symbol_covariance(&m, phi) {
                prop_assert!(g.determinant().re <= 1.0 + 1e-10);
                prop_assert!(max_abs2(&(g - g.adjoint())) < 1e-12);
            }
        }

        #[test]
        fn rational_matches_solve(d in 0.2f64..1.5, h in -2.0f64..2.0, t in 0.0f64..3.0, phi in -3.1f64..3.1) {
            let m = rotated(d, h, t, 0.5);
            let rat = rationalize_solved(&m).unwrap();
            let g = symbol_covariance(&m, phi).unwrap();
            prop_assert!(close(&rat.eval(cis(phi)), &g) < 1e-8);
        }
    }
}
