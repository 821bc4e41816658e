//! Deterministic equivalents built on a solved fundamental system: mutual
//! information, per-stream MMSE SINR, MMSE sum-rate, and the closed forms of
//! the uncorrelated (Rayleigh-product) channel.
//!
//! All rates are in nats per receive antenna.

// Float math without std; when std is linked its inherent methods take precedence.
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fixedpoint::{solve_fundamental, FixedPointSolution, SolverOptions};
use crate::linalg::{identity, logdet_eig, C64};
use crate::model::{ChannelSpec, UserLink};

#[derive(Debug, Clone, PartialEq)]
pub struct DetEquivalents {
    pub mi: f64,
    /// `γ̄_{k,j}`, indexed by user then by stream in the folded basis.
    pub sinr: Vec<Vec<f64>>,
    pub sumrate: f64,
    pub solution: FixedPointSolution,
}

impl DetEquivalents {
    /// Solve the fixed point for `spec` and evaluate every equivalent. SINR and
    /// sum-rate use the folded form of `spec`.
    pub fn compute(spec: &ChannelSpec, opts: &SolverOptions) -> Result<Self> {
        let solution = solve_fundamental(spec, opts)?;
        let mi = mi_det(spec, &solution)?;
        let (folded, _) = spec.folded()?;
        let sinr = sinr_det(&folded, &solution)?;
        let sumrate = sumrate_det(&folded, &solution)?;
        Ok(DetEquivalents {
            mi,
            sinr,
            sumrate,
            solution,
        })
    }
}

fn check_solution(spec: &ChannelSpec, sol: &FixedPointSolution) -> Result<()> {
    if sol.k() != spec.k() || sol.gbar.len() != spec.k() || sol.delta.len() != spec.k() {
        return Err(Error::dim(format!(
            "solution has {} users, spec has {}",
            sol.k(),
            spec.k()
        )));
    }
    Ok(())
}

/// Deterministic mutual information
///
/// `Ī = (1/N) log det(I + (1/ρ) Σ_k (n_k/N_k)(ḡ_k g_k/δ_k) R_k)
///    + (1/N) Σ_k [log det(I + ḡ_k δ_k S_k) + log det(I + g_k T_k^{1/2} Q_k T_k^{1/2}) - 2 n_k g_k ḡ_k]`.
pub fn mi_det(spec: &ChannelSpec, sol: &FixedPointSolution) -> Result<f64> {
    check_solution(spec, sol)?;
    let n_rx = spec.n_rx();
    let mut m = identity(n_rx);
    let mut rest = 0.0;
    for (k, u) in spec.users().iter().enumerate() {
        let (gbar, g, delta) = (sol.gbar[k], sol.g[k], sol.delta[k]);
        let num = gbar * g;
        if num != 0.0 {
            let w = u.n() as f64 / u.scatterer_count() as f64 * num / delta / spec.rho();
            m += u.r().map(|z| z * C64::new(w, 0.0));
        }
        rest += u
            .s()
            .iter()
            .map(|s| (gbar * delta * s).ln_1p())
            .sum::<f64>();
        rest += u
            .effective_transmit_eigenvalues()
            .iter()
            .map(|l| (g * l).ln_1p())
            .sum::<f64>();
        rest -= 2.0 * u.n() as f64 * g * gbar;
    }
    let value = (logdet_eig(&m)? + rest) / n_rx as f64;
    if !value.is_finite() {
        return Err(Error::domain("non-finite deterministic mutual information"));
    }
    Ok(value)
}

fn folded_gains(u: &UserLink) -> impl Iterator<Item = f64> + '_ {
    u.t()
        .diagonal()
        .iter()
        .map(|z| z.re.max(0.0))
        .collect::<Vec<_>>()
        .into_iter()
}

/// Per-stream MMSE SINR `γ̄_{k,j} = t_{k,j} g_k` for a folded spec.
pub fn sinr_det(spec: &ChannelSpec, sol: &FixedPointSolution) -> Result<Vec<Vec<f64>>> {
    check_solution(spec, sol)?;
    if !spec.is_folded() {
        return Err(Error::NotFolded);
    }
    Ok(spec
        .users()
        .iter()
        .zip(&sol.g)
        .map(|(u, g)| folded_gains(u).map(|t| t * g).collect())
        .collect())
}

/// MMSE sum-rate `(1/N) Σ_k Σ_j log(1 + t_{k,j} g_k)` for a folded spec.
pub fn sumrate_det(spec: &ChannelSpec, sol: &FixedPointSolution) -> Result<f64> {
    let sinr = sinr_det(spec, sol)?;
    Ok(sinr.iter().flatten().map(|v| v.ln_1p()).sum::<f64>() / spec.n_rx() as f64)
}

/// Uncorrelated channel: every user has `S` scatterers and `N` transmit
/// antennas, all correlations and covariances are identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighProductParams {
    pub k: usize,
    pub n: usize,
    pub s: usize,
    pub rho: f64,
}

impl RayleighProductParams {
    pub fn new(k: usize, n: usize, s: usize, rho: f64) -> Result<Self> {
        if k == 0 || n == 0 || s == 0 {
            return Err(Error::param(
                "user, antenna and scatterer counts must be positive",
            ));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::param("noise power must be positive"));
        }
        Ok(RayleighProductParams { k, n, s, rho })
    }

    fn ratio(&self) -> f64 {
        self.s as f64 / self.n as f64
    }

    /// Monic coefficients `[1, a, b, c]` of `ḡ³ + a ḡ² + b ḡ + c`.
    pub fn cubic_coefficients(&self) -> [f64; 4] {
        let c = self.ratio();
        let kf = self.k as f64;
        let ck = c / kf;
        [
            1.0,
            -(2.0 - c - 1.0 / kf),
            1.0 - c - 1.0 / kf + ck * (1.0 + self.rho),
            -ck * self.rho,
        ]
    }

    pub fn cubic(&self, x: f64) -> f64 {
        let [_, a, b, c] = self.cubic_coefficients();
        ((x + a) * x + b) * x + c
    }

    /// The equivalent general-model spec (identity matrices, `N_k = S`, `n_k = N`).
    pub fn spec(&self) -> Result<ChannelSpec> {
        let users = (0..self.k)
            .map(|_| UserLink::identity(self.n, self.s, self.n))
            .collect::<Result<Vec<_>>>()?;
        ChannelSpec::new(self.n, users, self.rho)
    }
}

/// Roots of the monic cubic `x³ + a x² + b x + c`: real roots first.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> [C64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    if disc > 0.0 {
        let big = -q.signum() * (q.abs() / 2.0 + disc.sqrt()).cbrt();
        let small = if big != 0.0 { -p / (3.0 * big) } else { 0.0 };
        let re = -(big + small) / 2.0 - shift;
        let im = 3.0f64.sqrt() / 2.0 * (big - small);
        [
            C64::new(big + small - shift, 0.0),
            C64::new(re, im.abs()),
            C64::new(re, -im.abs()),
        ]
    } else if p == 0.0 {
        [C64::new(-shift, 0.0); 3]
    } else {
        let r = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let mut out = [C64::new(0.0, 0.0); 3];
        for (m, slot) in out.iter_mut().enumerate() {
            *slot = C64::new(
                2.0 * r * (theta - 2.0 * PI * m as f64 / 3.0).cos() - shift,
                0.0,
            );
        }
        out
    }
}

fn newton_polish(params: &RayleighProductParams, x: f64) -> f64 {
    let [_, a, b, _] = params.cubic_coefficients();
    let d = (3.0 * x + 2.0 * a) * x + b;
    if d == 0.0 {
        return x;
    }
    let y = x - params.cubic(x) / d;
    if params.cubic(y).abs() <= params.cubic(x).abs() {
        y
    } else {
        x
    }
}

fn admissible(params: &RayleighProductParams, x: f64) -> bool {
    x > 0.0 && x < 1.0 && x + params.ratio() - 1.0 > 0.0
}

/// The unique root `ḡ` of the Rayleigh-product cubic with `g = (1-ḡ)/ḡ > 0`
/// and `δ = (1-ḡ)/(ḡ(ḡ + S/N - 1)) > 0`.
pub fn rayleigh_cubic(params: &RayleighProductParams) -> Result<f64> {
    let [_, a, b, c] = params.cubic_coefficients();
    let roots = cubic_roots(a, b, c);
    let candidates: Vec<f64> = roots
        .iter()
        .filter(|z| z.im.abs() <= 1e-12 * z.re.abs().max(1.0))
        .map(|z| newton_polish(params, z.re))
        .filter(|&x| admissible(params, x))
        .collect();
    if candidates.len() != 1 {
        return Err(Error::RootSelection {
            roots,
            admissible: candidates.len(),
        });
    }
    Ok(candidates[0])
}

/// Fixed-point triple `(ḡ, g, δ)` implied by the cubic root.
pub fn rayleigh_triple(params: &RayleighProductParams, gbar: f64) -> (f64, f64, f64) {
    let g = (1.0 - gbar) / gbar;
    let delta = (1.0 - gbar) / (gbar * (gbar + params.ratio() - 1.0));
    (gbar, g, delta)
}

/// Per-stream MMSE SINR of the uncorrelated channel, `(1-ḡ)/ḡ`.
pub fn rayleigh_sinr(gbar: f64) -> f64 {
    (1.0 - gbar) / gbar
}

/// Closed-form mutual information of the uncorrelated channel at root `ḡ`.
pub fn rayleigh_mi(params: &RayleighProductParams, gbar: f64) -> Result<f64> {
    let c = params.ratio();
    let kf = params.k as f64;
    let first = gbar * (gbar + c - 1.0) / (params.rho * c) * kf;
    let second = (gbar - 1.0) / c;
    if !(gbar > 0.0) || !(first > -1.0) || !(second > -1.0) {
        return Err(Error::domain(format!(
            "inadmissible root {gbar} for the closed form"
        )));
    }
    Ok(first.ln_1p() - kf * c * second.ln_1p() - kf * gbar.ln() - 2.0 * kf * (1.0 - gbar))
}
