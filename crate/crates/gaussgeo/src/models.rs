//! Worked examples: the closed XY chain (Berry phases, metric, curvature),
//! a two-level system, the Dicke model in the Born-Oppenheimer picture and
//! the boundary-driven XY chain as a quadratic Lindblad model.
//!
//! The two translationally invariant dissipative chains live in
//! [`crate::momentum`].

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::gaussian::wick_expectation;
use crate::geometry::{incompatibility_ratio, qgt, GeometryResult};
use crate::liouvillian::{gap_report, ness_tangents, shape_derivative, shape_matrices, GapReport, NessSolver, QuadraticLindbladModel};
use crate::{c, CMat, CVec, Complex64, Error, RMat, Result, I};

/// Below this `ε_k` a mode counts as gapless.
pub const GAPLESS_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XYParams {
    pub delta: f64,
    pub h: f64,
    /// Rotation angle about `z`.
    pub theta: f64,
    pub n: usize,
}

impl XYParams {
    pub fn new(delta: f64, h: f64, theta: f64, n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::DegenerateInput(alloc::format!("XY chain needs an even n >= 2, got {n}")));
        }
        Ok(Self { delta, h, theta, n })
    }

    fn momentum(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n as f64
    }
}

/// `ε(q)`, `θ(q)`, `∂_h θ`, `∂_δ θ` at momentum `q`.
fn xy_mode(delta: f64, h: f64, q: f64) -> (f64, f64, f64, f64) {
    let eta = q.cos() - h;
    let s = q.sin();
    let eps2 = eta * eta + delta * delta * s * s;
    let eps = eps2.sqrt();
    let theta = (eta / eps).clamp(-1.0, 1.0).acos();
    let ds = (delta * s).abs();
    (eps, theta, ds / eps2, eta * delta.signum() * s.abs() / eps2)
}

/// `(ε_k, θ_k)` with `θ_k = arccos(η_k/ε_k)`.
pub fn xy_dispersion(p: &XYParams, k: usize) -> Result<(f64, f64)> {
    if k >= p.n {
        return Err(Error::IndexOutOfRange { index: k, len: p.n });
    }
    let (eps, theta, _, _) = xy_mode(p.delta, p.h, p.momentum(k));
    if eps < GAPLESS_TOL {
        return Err(Error::GaplessMode(k));
    }
    Ok((eps, theta))
}

/// Paired momenta `k = 1, …, n/2 - 1`.
fn paired_modes(p: &XYParams) -> core::ops::Range<usize> {
    1..p.n / 2
}

/// `φ_g = Σ_k π(1 - cos θ_k)` over the paired momenta.
pub fn xy_ground_berry_phase(p: &XYParams) -> Result<f64> {
    let mut phase = 0.0;
    for k in paired_modes(p) {
        let (_, theta) = xy_dispersion(p, k)?;
        phase += PI * (1.0 - theta.cos());
    }
    Ok(phase)
}

/// Momentum of the lowest quasi-particle; ties go to the smaller `k`.
pub fn xy_gap_mode(p: &XYParams) -> Result<usize> {
    let mut best = 0;
    let mut best_eps = f64::INFINITY;
    for k in 0..p.n {
        let (eps, _, _, _) = xy_mode(p.delta, p.h, p.momentum(k));
        if eps < best_eps * (1.0 - 1e-12) {
            best = k;
            best_eps = eps;
        }
    }
    if best_eps < GAPLESS_TOL {
        return Err(Error::GaplessMode(best));
    }
    Ok(best)
}

/// `φ_eg = -π(1 - cos θ_{k0})` at the dispersion minimum `k0`.
pub fn xy_relative_phase(p: &XYParams) -> Result<f64> {
    let k0 = xy_gap_mode(p)?;
    let (_, theta) = xy_dispersion(p, k0)?;
    Ok(-PI * (1.0 - theta.cos()))
}

/// Infinite-chain relative phase: zero for `|h| > 1 - δ²`, otherwise
/// `-π + π h|δ|/√((1-δ²)(1-δ²-h²))`.
pub fn xy_relative_phase_thermodynamic(delta: f64, h: f64) -> f64 {
    let a = 1.0 - delta * delta;
    if h.abs() >= a {
        return 0.0;
    }
    -PI + PI * h * delta.abs() / (a * (a - h * h)).sqrt()
}

/// Metric and curvature of the ground-state family over `(θ, h, δ)`.
///
/// `g = ¼ Σ_k (∂θ_k ∂θ_k + sin²θ_k ∂φ ∂φ)` and
/// `F = ½ Σ_k (∂_μθ_k ∂_νφ - ∂_νθ_k ∂_μφ) sin θ_k`; `u` holds `F`.
pub fn xy_qgt_finite(p: &XYParams) -> Result<GeometryResult> {
    let mut g = RMat::zeros(3, 3);
    let mut f = RMat::zeros(3, 3);
    for k in paired_modes(p) {
        let (eps, theta, dh, dd) = xy_mode(p.delta, p.h, p.momentum(k));
        if eps < GAPLESS_TOL {
            return Err(Error::GaplessMode(k));
        }
        let s = theta.sin();
        let dth = [0.0, dh, dd];
        let dphi = [1.0, 0.0, 0.0];
        for a in 0..3 {
            for b in 0..3 {
                g[(a, b)] += 0.25 * (dth[a] * dth[b] + s * s * dphi[a] * dphi[b]);
                f[(a, b)] += 0.5 * (dth[a] * dphi[b] - dth[b] * dphi[a]) * s;
            }
        }
    }
    let q = CMat::from_fn(3, 3, |a, b| Complex64::new(g[(a, b)], 0.5 * f[(a, b)]));
    let r_ratio = incompatibility_ratio(&g, &f).ok();
    Ok(GeometryResult { g, u: f, q, r_ratio })
}

/// Metric per site over `(θ, h, δ)` of the finite chain.
pub fn xy_metric_per_site(p: &XYParams) -> Result<RMat> {
    Ok(xy_qgt_finite(p)?.g / p.n as f64)
}

/// Infinite-chain metric per site (coefficient of `n`) and scalar
/// curvature times `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XYThermodynamicMetric {
    pub g_theta_theta: f64,
    pub g_hh: f64,
    pub g_delta_delta: f64,
    pub g_h_delta: f64,
    pub scalar_curvature: f64,
}

impl XYThermodynamicMetric {
    /// Ordered as `(θ, h, δ)`.
    pub fn metric(&self) -> RMat {
        RMat::from_row_slice(
            3,
            3,
            &[
                self.g_theta_theta,
                0.0,
                0.0,
                0.0,
                self.g_hh,
                self.g_h_delta,
                0.0,
                self.g_h_delta,
                self.g_delta_delta,
            ],
        )
    }
}

fn xy_outer_metric(delta: f64, h: f64) -> XYThermodynamicMetric {
    let d = delta.abs();
    let a = h.abs();
    let one_m = 1.0 - d * d;
    let s = (h * h - 1.0 + d * d).sqrt();
    let g_tt = d * d / one_m * (a / s - 1.0) / 8.0;
    let g_hh = a * d * d / ((h * h - 1.0) * s * s * s) / 16.0;
    let g_dd = (2.0 / (one_m * one_m) * (a / s - 1.0) - a * d * d / (one_m * s * s * s)) / 16.0;
    let g_hd = -a * delta / (h * s * s * s) / 16.0;
    let r = 8.0 * (4.0 + 5.0 * a / s - 2.0 * (h * h + a * s - 1.0) / (d * d));
    XYThermodynamicMetric { g_theta_theta: g_tt, g_hh, g_delta_delta: g_dd, g_h_delta: g_hd, scalar_curvature: r }
}

/// Closed-form infinite-chain metric; `OnCriticalSet` for `|h| = 1` or
/// `δ = 0`.
pub fn xy_qgt_thermodynamic(delta: f64, h: f64) -> Result<XYThermodynamicMetric> {
    if delta.abs() < 1e-12 || (h.abs() - 1.0).abs() < 1e-12 {
        return Err(Error::OnCriticalSet);
    }
    let d = delta.abs();
    if h.abs() < 1.0 {
        return Ok(XYThermodynamicMetric {
            g_theta_theta: d / (8.0 * (d + 1.0)),
            g_hh: 1.0 / (16.0 * d * (1.0 - h * h)),
            g_delta_delta: 1.0 / (16.0 * d * (1.0 + d) * (1.0 + d)),
            g_h_delta: 0.0,
            scalar_curvature: -8.0 / d,
        });
    }
    if (1.0 - d * d).abs() > 1e-6 {
        return Ok(xy_outer_metric(delta, h));
    }
    // δ² = 1 is a removable 0/0; average the two sides.
    let lo = xy_outer_metric(delta * (1.0 - 1e-4), h);
    let hi = xy_outer_metric(delta * (1.0 + 1e-4), h);
    Ok(XYThermodynamicMetric {
        g_theta_theta: 0.5 * (lo.g_theta_theta + hi.g_theta_theta),
        g_hh: 0.5 * (lo.g_hh + hi.g_hh),
        g_delta_delta: 0.5 * (lo.g_delta_delta + hi.g_delta_delta),
        g_h_delta: 0.5 * (lo.g_h_delta + hi.g_h_delta),
        scalar_curvature: 0.5 * (lo.scalar_curvature + hi.scalar_curvature),
    })
}

/// Berry phase of a spin following the field direction around a closed
/// geodesic polygon: half the enclosed solid angle, measured from the
/// north pole. Vertices need not be normalized; a vanishing field is a
/// degeneracy.
pub fn two_level_berry_phase(vertices: &[[f64; 3]]) -> Result<f64> {
    if vertices.len() < 3 {
        return Err(Error::DegenerateInput(alloc::format!("loop with {} vertices", vertices.len())));
    }
    let mut unit = Vec::with_capacity(vertices.len());
    for v in vertices {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r < 1e-12 {
            return Err(Error::DegeneracyOnLoop);
        }
        unit.push([v[0] / r, v[1] / r, v[2] / r]);
    }
    let apex = if unit.iter().any(|u| u[2] < -1.0 + 1e-8) { [0.0, 0.0, -1.0] } else { [0.0, 0.0, 1.0] };
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let mut omega = 0.0;
    for i in 0..unit.len() {
        let b = &unit[i];
        let cc = &unit[(i + 1) % unit.len()];
        let cross = [b[1] * cc[2] - b[2] * cc[1], b[2] * cc[0] - b[0] * cc[2], b[0] * cc[1] - b[1] * cc[0]];
        let num = dot(&apex, &cross);
        let den = 1.0 + dot(&apex, b) + dot(b, cc) + dot(cc, &apex);
        omega += 2.0 * num.atan2(den);
    }
    Ok(omega / 2.0)
}

/// Ground-state energy constant `e₀(0)` of the pure quartic oscillator.
pub const DICKE_C0: f64 = 1.06036;
/// `e₀'(0)` of the quartic oscillator.
pub const DICKE_C1: f64 = 0.36203;
/// Default number of interior grid points.
pub const DICKE_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickeParams {
    /// `D = 2Δ/ω`.
    pub big_d: f64,
    /// `α = L²/2D`.
    pub alpha: f64,
    pub n: usize,
    /// Half-width of the oscillator grid; `None` picks [`dicke_default_q_max`].
    pub q_max: Option<f64>,
    pub points: usize,
}

impl DickeParams {
    pub fn new(big_d: f64, alpha: f64, n: usize) -> Result<Self> {
        if !(big_d > 1.0) || !(alpha >= 0.0) || n == 0 {
            return Err(Error::DegenerateInput(alloc::format!("Dicke parameters D = {big_d}, alpha = {alpha}, n = {n}")));
        }
        Ok(Self { big_d, alpha, n, q_max: None, points: DICKE_POINTS })
    }

    fn coupling(&self) -> f64 {
        (2.0 * self.big_d * self.alpha).sqrt()
    }

    /// Position `q_m` of the double-well minima, zero for `α ≤ 1`.
    pub fn well_minimum(&self) -> f64 {
        if self.alpha <= 1.0 {
            return 0.0;
        }
        (self.n as f64).sqrt() * self.big_d * (self.alpha * self.alpha - 1.0).sqrt() / self.coupling()
    }
}

/// `max(12, 1.5 q_m + 10, q_m + 8w)` where `w` is the smaller of the
/// harmonic and quartic widths of the adiabatic well.
pub fn dicke_default_q_max(p: &DickeParams) -> f64 {
    let qm = p.well_minimum();
    let curvature = if p.alpha < 1.0 { 1.0 - p.alpha } else { 1.0 - 1.0 / (p.alpha * p.alpha) };
    let harmonic = if curvature > 0.0 { curvature.powf(-0.25) } else { f64::INFINITY };
    let quartic = if p.alpha > 0.0 {
        (2.0 * p.n as f64 * p.big_d / (p.alpha * p.alpha)).powf(1.0 / 6.0)
    } else {
        f64::INFINITY
    };
    let w = harmonic.min(quartic);
    let w = if w.is_finite() { w } else { 1.0 };
    12f64.max(1.5 * qm + 10.0).max(qm + 8.0 * w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickeResult {
    /// `φ^B/n`.
    pub phi_per_qubit: f64,
    /// `⟨S_x⟩/n`.
    pub sx_per_qubit: f64,
    pub q_max: f64,
}

/// Born-Oppenheimer Berry phase per qubit. Solves
/// `-ψ'' + (q² - nE(q))ψ = e ψ` on a uniform grid with Dirichlet walls,
/// then `⟨S_x⟩/n = -∫ψ² D/E` and `φ^B/n = π(1 + ⟨S_x⟩/n)`.
pub fn dicke_berry_phase(p: &DickeParams) -> Result<DickeResult> {
    if p.points < 200 {
        return Err(Error::DegenerateInput(alloc::format!("{} grid points, need at least 200", p.points)));
    }
    let q_max = p.q_max.unwrap_or_else(|| dicke_default_q_max(p));
    let m = p.points;
    let step = 2.0 * q_max / (m + 1) as f64;
    let nf = p.n as f64;
    let l2 = 2.0 * p.big_d * p.alpha;
    let d = p.big_d;
    let qs: Vec<f64> = (0..m).map(|i| -q_max + step * (i + 1) as f64).collect();
    let energy = |q: f64| (d * d + l2 * q * q / nf).sqrt();
    let diag: Vec<f64> = qs.iter().map(|&q| 2.0 / (step * step) + q * q - nf * energy(q)).collect();
    let off = alloc::vec![-1.0 / (step * step); m - 1];
    let (_, psi) = crate::numerics::tridiagonal_lowest(&diag, &off)?;
    let edge = m / 20;
    let tail: f64 = psi[..edge].iter().chain(&psi[m - edge..]).map(|x| x * x).sum();
    if tail > 1e-8 {
        return Err(Error::GridTooSmall);
    }
    // 1 - D/E written without cancellation.
    let one_plus: f64 = qs
        .iter()
        .zip(&psi)
        .map(|(&q, &y)| {
            let e = energy(q);
            y * y * (l2 * q * q / nf) / ((e + d) * e)
        })
        .sum();
    Ok(DickeResult { phi_per_qubit: PI * one_plus, sx_per_qubit: one_plus - 1.0, q_max })
}

/// `n → ∞` value of `φ^B/n`: `0` for `α ≤ 1`, `π(1 - 1/α)` above.
pub fn dicke_thermodynamic_phase(alpha: f64) -> f64 {
    if alpha <= 1.0 {
        0.0
    } else {
        PI * (1.0 - 1.0 / alpha)
    }
}

/// Two-term finite-size law at `α = 1`:
/// `π[2c₁/(2nD)^{2/3} - 2c₀/(2nD)^{4/3}]`.
pub fn dicke_critical_scaling(n: usize, big_d: f64) -> f64 {
    let x = 2.0 * n as f64 * big_d;
    PI * (2.0 * DICKE_C1 / x.powf(2.0 / 3.0) - 2.0 * DICKE_C0 / x.powf(4.0 / 3.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryXYParams {
    pub delta: f64,
    pub h: f64,
    pub n: usize,
    /// `(κ_L⁺, κ_L⁻, κ_R⁺, κ_R⁻)`.
    pub kappas: [f64; 4],
}

impl BoundaryXYParams {
    pub fn new(delta: f64, h: f64, n: usize, kappas: [f64; 4]) -> Result<Self> {
        if n < 2 {
            return Err(Error::DegenerateInput(alloc::format!("boundary chain needs n >= 2, got {n}")));
        }
        if kappas.iter().any(|k| !(*k >= 0.0)) || kappas.iter().all(|k| *k == 0.0) {
            return Err(Error::DegenerateInput("rates must be nonnegative and not all zero".into()));
        }
        Ok(Self { delta, h, n, kappas })
    }
}

/// Adds `a · i w_p w_q` to the kernel.
fn add_bilinear(h: &mut CMat, p: usize, q: usize, a: f64) {
    h[(p, q)] += I * (a / 2.0);
    h[(q, p)] -= I * (a / 2.0);
}

/// Kernel of `Σ_j [(1+δ)/2 σˣσˣ + (1-δ)/2 σʸσʸ] + h Σ_j σᶻ` on the open
/// chain, from `σˣ_jσˣ_{j+1} = i w_{2j+1}w_{2j+2}`,
/// `σʸ_jσʸ_{j+1} = -i w_{2j}w_{2j+3}` and `σᶻ_j = i w_{2j}w_{2j+1}`.
fn open_xy_kernel(n: usize, xx: f64, yy: f64, field: f64) -> CMat {
    let mut h = CMat::zeros(2 * n, 2 * n);
    for j in 0..n.saturating_sub(1) {
        add_bilinear(&mut h, 2 * j + 1, 2 * j + 2, xx);
        add_bilinear(&mut h, 2 * j, 2 * j + 3, -yy);
    }
    for j in 0..n {
        add_bilinear(&mut h, 2 * j, 2 * j + 1, field);
    }
    h
}

fn boundary_jumps(p: &BoundaryXYParams) -> Vec<CVec> {
    let dim = 2 * p.n;
    let mut out = Vec::new();
    for (site, kp, km) in [(0, p.kappas[0], p.kappas[1]), (p.n - 1, p.kappas[2], p.kappas[3])] {
        // σ⁺ = (w_{2j} - i w_{2j+1})/2 up to the string, σ⁻ its adjoint.
        for (kappa, sign) in [(kp, -1.0), (km, 1.0)] {
            if kappa == 0.0 {
                continue;
            }
            let mut l = CVec::zeros(dim);
            l[2 * site] = c(kappa.sqrt() / 2.0);
            l[2 * site + 1] = I * (sign * kappa.sqrt() / 2.0);
            out.push(l);
        }
    }
    out
}

/// Boundary-driven XY chain. The jumps at the last site drop their
/// Jordan-Wigner string, which leaves every even-parity observable of the
/// steady state unchanged.
pub fn build_boundary_driven_xy(p: &BoundaryXYParams) -> Result<QuadraticLindbladModel> {
    let h = open_xy_kernel(p.n, (1.0 + p.delta) / 2.0, (1.0 - p.delta) / 2.0, p.h);
    QuadraticLindbladModel::new(h, boundary_jumps(p))
}

/// `(∂_δ H, ∂_h H)` kernels; the jumps do not depend on `(δ, h)`.
pub fn boundary_xy_hamiltonian_derivatives(p: &BoundaryXYParams) -> [CMat; 2] {
    [open_xy_kernel(p.n, 0.5, -0.5, 0.0), open_xy_kernel(p.n, 0.0, 0.0, 1.0)]
}

/// Spin-basis Hamiltonian and jumps of the same chain, with the full
/// string-free local operators `σ^±`, for `n ≤ 6`.
pub fn boundary_xy_dense(p: &BoundaryXYParams) -> Result<(CMat, Vec<CMat>)> {
    if p.n > 6 {
        return Err(Error::TooManyModes { modes: p.n, max: 6 });
    }
    let z = c(0.0);
    let one = c(1.0);
    let sx = CMat::from_row_slice(2, 2, &[z, one, one, z]);
    let sy = CMat::from_row_slice(2, 2, &[z, -I, I, z]);
    let sz = CMat::from_row_slice(2, 2, &[one, z, z, -one]);
    let sp = CMat::from_row_slice(2, 2, &[z, one, z, z]);
    let local = |op: &CMat, site: usize| {
        let mut out = CMat::identity(1, 1);
        for j in 0..p.n {
            out = if j == site { out.kronecker(op) } else { out.kronecker(&CMat::identity(2, 2)) };
        }
        out
    };
    let dim = 1usize << p.n;
    let mut h = CMat::zeros(dim, dim);
    for j in 0..p.n - 1 {
        h += local(&sx, j) * local(&sx, j + 1) * c((1.0 + p.delta) / 2.0);
        h += local(&sy, j) * local(&sy, j + 1) * c((1.0 - p.delta) / 2.0);
    }
    for j in 0..p.n {
        h += local(&sz, j) * c(p.h);
    }
    let sm = sp.adjoint();
    let mut jumps = Vec::new();
    for (site, kp, km) in [(0, p.kappas[0], p.kappas[1]), (p.n - 1, p.kappas[2], p.kappas[3])] {
        for (kappa, op) in [(kp, &sp), (km, &sm)] {
            if kappa > 0.0 {
                jumps.push(local(op, site) * c(kappa.sqrt()));
            }
        }
    }
    Ok((h, jumps))
}

/// Steady state, gap and `(δ, h)` geometry of the boundary-driven chain.
#[derive(Debug, Clone)]
pub struct BoundaryXYReport {
    pub gamma: CMat,
    pub gap: GapReport,
    pub geometry: GeometryResult,
}

pub fn boundary_xy_report(p: &BoundaryXYParams) -> Result<BoundaryXYReport> {
    let model = build_boundary_driven_xy(p)?;
    let shape = shape_matrices(&model)?;
    let solver = NessSolver::new(&shape)?;
    let gamma = solver.covariance(&shape)?.gamma;
    let zero_jumps: Vec<CVec> = model.jumps.iter().map(|l| CVec::zeros(l.len())).collect();
    let mut dx = Vec::new();
    let mut dy = Vec::new();
    for dh in boundary_xy_hamiltonian_derivatives(p) {
        let (a, b) = shape_derivative(&model, &dh, &zero_jumps)?;
        dx.push(a);
        dy.push(b);
    }
    let tangents = ness_tangents(&shape, &["delta", "h"], &dx, &dy, &gamma)?;
    let geometry = qgt(&gamma, &tangents)?;
    let gap = gap_report(&shape.x)?;
    Ok(BoundaryXYReport { gamma, gap, geometry })
}

/// `⟨σᶻ_jσᶻ_k⟩ - ⟨σᶻ_j⟩⟨σᶻ_k⟩` for zero-based sites `j < k`, with
/// `σᶻ_j = i w_{2j} w_{2j+1}`.
pub fn boundary_xy_zz_correlation(gamma: &CMat, j: usize, k: usize) -> Result<f64> {
    let n = gamma.nrows() / 2;
    if j >= k || k >= n {
        return Err(Error::DegenerateInput(alloc::format!("need j < k < {n}, got ({j}, {k})")));
    }
    let zj = I * wick_expectation(gamma, &[2 * j, 2 * j + 1])?;
    let zk = I * wick_expectation(gamma, &[2 * k, 2 * k + 1])?;
    let zz = -wick_expectation(gamma, &[2 * j, 2 * j + 1, 2 * k, 2 * k + 1])?;
    Ok((zz - zj * zk).re)
}

/// Decay length of `C_{j,j+d}` from a least-squares fit of `ln|C|` over
/// the far half of the distances `d` at which `|C|` is still above
/// `1e-12 |C_{j,j+1}|`, with `j = n/4`. Infinite when the correlations do
/// not decay.
pub fn boundary_xy_correlation_length(gamma: &CMat) -> Result<f64> {
    let n = gamma.nrows() / 2;
    let j = n / 4;
    let mut pts = Vec::new();
    let mut first = None;
    for k in j + 1..n.min(j + 1 + n / 2) {
        let v = boundary_xy_zz_correlation(gamma, j, k)?.abs();
        let f = *first.get_or_insert(v);
        if !(v > 1e-12 * f) {
            break;
        }
        pts.push(((k - j) as f64, v.ln()));
    }
    let pts = &pts[pts.len() / 2..];
    if pts.len() < 3 {
        return Err(Error::TooFewSamples { need: 3, got: pts.len() });
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx) * (p.0 - mx)));
    let slope = sxy / sxx;
    Ok(if slope < 0.0 { -1.0 / slope } else { f64::INFINITY })
}

/// `h_c = |1 - δ²|`, the boundary between long- and short-range order.
pub fn boundary_xy_critical_field(delta: f64) -> f64 {
    (1.0 - delta * delta).abs()
}
