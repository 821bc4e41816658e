//! Damped fixed-point solvers for the coupled implicit systems that
//! parameterize every deterministic equivalent.
//!
//! Fundamental system, one triple `(ḡ_k, g_k, δ_k)` per user:
//!
//! ```text
//! ḡ_k = (1/n_k) tr A_k (g_k A_k + I)^{-1},             A_k = T_k^{1/2} Q_k T_k^{1/2}
//! g_k = (1/n_k) Σ_j s_{k,j} δ_k / (1 + ḡ_k s_{k,j} δ_k)
//! δ_k = (1/N_k) tr R_k (Σ_i (n_i/N_i)(ḡ_i g_i/δ_i) R_i + ρ I)^{-1}
//! ```
//!
//! Kronecker system for a fixed receive-side matrix `Z_k`, one pair `(ē_k, e_k)`:
//!
//! ```text
//! ē_k = (1/n_k) tr A_k (e_k A_k + I)^{-1}
//! e_k = (1/n_k) tr Z_k Z_k^H (Σ_i ē_i Z_i Z_i^H + ρ I)^{-1}
//! ```
//!
//! One sweep refreshes the receive-side quantities first and feeds them
//! forward (Gauss–Seidel). The step is blended with the previous iterate;
//! the blend factor halves whenever the residual grows and recovers after a
//! run of decreasing residuals.

// Float math without std; when std is linked its inherent methods take precedence.
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{hpd_inverse, identity, max_off_diagonal, trace_product, CMatrix, C64};
use crate::model::ChannelSpec;

const ALPHA_FLOOR: f64 = 1.0 / 16.0;
const ALPHA_RECOVERY_RUN: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialPoint {
    /// Every unknown starts at the same positive value.
    Constant(f64),
    /// Explicit start in solver layout: all `ḡ` (or `ē`), then all `g` (or `e`),
    /// then all `δ` for the fundamental system.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Convergence threshold on the max absolute equation residual.
    pub tol: f64,
    pub max_iter: usize,
    pub init: InitialPoint,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 10_000,
            init: InitialPoint::Constant(1.0),
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSolution {
    pub gbar: Vec<f64>,
    pub g: Vec<f64>,
    pub delta: Vec<f64>,
    pub iterations: usize,
    /// Max absolute residual over the `3K` equations at the returned point.
    pub residual: f64,
}

impl FixedPointSolution {
    pub fn k(&self) -> usize {
        self.g.len()
    }

    /// The solution in solver layout, usable as an explicit initial point.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.gbar.clone();
        v.extend_from_slice(&self.g);
        v.extend_from_slice(&self.delta);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerSolution {
    pub ebar: Vec<f64>,
    pub e: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// `(1/n) Σ λ / (x λ + 1)` over the eigenvalues of `T^{1/2} Q T^{1/2}`.
fn transmit_map(eigs: &[f64], x: f64) -> f64 {
    eigs.iter().map(|&l| l / (x * l + 1.0)).sum::<f64>() / eigs.len() as f64
}

/// `(1/n_k) Σ_j s_j δ / (1 + ḡ s_j δ)`.
fn scatterer_map(s: &[f64], n: usize, gbar: f64, delta: f64) -> f64 {
    s.iter()
        .map(|&sj| sj * delta / (1.0 + gbar * sj * delta))
        .sum::<f64>()
        / n as f64
}

/// Evaluates `tr(A_k (Σ_i c_i A_i + ρI)^{-1}) / norm_k` for every `k`.
///
/// Diagonal inputs skip the dense inverse, which also keeps scalar cases exact.
struct ResolventTraces<'a> {
    mats: Vec<&'a CMatrix>,
    diagonal: bool,
    rho: f64,
}

impl<'a> ResolventTraces<'a> {
    fn new(mats: Vec<&'a CMatrix>, rho: f64) -> Self {
        let diagonal = mats.iter().all(|m| max_off_diagonal(m) == 0.0);
        ResolventTraces {
            mats,
            diagonal,
            rho,
        }
    }

    fn eval(&self, coeffs: &[f64], norms: &[f64]) -> Result<Vec<f64>> {
        for &c in coeffs {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::domain(format!(
                    "resolvent weight {c} left the positive orthant"
                )));
            }
        }
        let n = self.mats[0].nrows();
        if self.diagonal {
            let m: Vec<f64> = (0..n)
                .map(|i| {
                    self.rho
                        + coeffs
                            .iter()
                            .zip(&self.mats)
                            .map(|(c, a)| c * a[(i, i)].re)
                            .sum::<f64>()
                })
                .collect();
            return Ok(self
                .mats
                .iter()
                .zip(norms)
                .map(|(a, norm)| (0..n).map(|i| a[(i, i)].re / m[i]).sum::<f64>() / norm)
                .collect());
        }
        let mut m = identity(n).scale(self.rho);
        for (c, a) in coeffs.iter().zip(&self.mats) {
            if *c != 0.0 {
                m += a.map(|z| z * C64::new(*c, 0.0));
            }
        }
        let inv = hpd_inverse(&m)?;
        Ok(self
            .mats
            .iter()
            .zip(norms)
            .map(|(a, norm)| trace_product(a, &inv).re / norm)
            .collect())
    }
}

/// Shared damped iteration. `sweep` maps an iterate to its Gauss–Seidel image,
/// `residual` gives the max equation residual at a point.
fn damped_iteration(
    mut x: Vec<f64>,
    opts: &SolverOptions,
    mut sweep: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    mut residual: impl FnMut(&[f64]) -> f64,
) -> Result<(Vec<f64>, usize, f64)> {
    if !(opts.tol > 0.0) {
        return Err(Error::param("solver tolerance must be positive"));
    }
    check_orthant(&x)?;
    let mut res = residual(&x);
    if res <= opts.tol {
        return Ok((x, 0, res));
    }
    let mut trace = Vec::new();
    let mut alpha = 1.0f64;
    let mut decreases = 0usize;
    for it in 1..=opts.max_iter {
        let image = sweep(&x)?;
        let next: Vec<f64> = x
            .iter()
            .zip(&image)
            .map(|(old, new)| (1.0 - alpha) * old + alpha * new)
            .collect();
        check_orthant(&next)?;
        let next_res = residual(&next);
        trace.push(next_res);
        if next_res <= opts.tol {
            return Ok((next, it, next_res));
        }
        if !(next_res < res) {
            alpha = (alpha / 2.0).max(ALPHA_FLOOR);
            decreases = 0;
        } else {
            decreases += 1;
            if decreases >= ALPHA_RECOVERY_RUN {
                alpha = (alpha * 2.0).min(1.0);
                decreases = 0;
            }
        }
        x = next;
        res = next_res;
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: res,
        last: x,
        trace,
    })
}

fn check_orthant(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite() || *v < 0.0) {
        Some(i) => Err(Error::domain(format!(
            "iterate component {i} = {} left the positive orthant",
            x[i]
        ))),
        None => Ok(()),
    }
}

fn initial_point(init: &InitialPoint, len: usize) -> Result<Vec<f64>> {
    match init {
        InitialPoint::Constant(c) => {
            if !(*c > 0.0) || !c.is_finite() {
                return Err(Error::param("initial value must be positive"));
            }
            Ok(vec![*c; len])
        }
        InitialPoint::Explicit(v) => {
            if v.len() != len {
                return Err(Error::dim(format!(
                    "initial point has {} entries, expected {len}",
                    v.len()
                )));
            }
            Ok(v.clone())
        }
    }
}

struct Fundamental<'a> {
    spec: &'a ChannelSpec,
    resolvent: ResolventTraces<'a>,
    /// `N_k`, normalizing the `δ_k` traces.
    scatterers: Vec<f64>,
    /// `n_k / N_k`.
    ratios: Vec<f64>,
}

impl<'a> Fundamental<'a> {
    fn new(spec: &'a ChannelSpec) -> Self {
        let users = spec.users();
        Fundamental {
            spec,
            resolvent: ResolventTraces::new(users.iter().map(|u| u.r()).collect(), spec.rho()),
            scatterers: users.iter().map(|u| u.scatterer_count() as f64).collect(),
            ratios: users
                .iter()
                .map(|u| u.n() as f64 / u.scatterer_count() as f64)
                .collect(),
        }
    }

    fn weights(&self, gbar: &[f64], g: &[f64], delta: &[f64]) -> Vec<f64> {
        (0..gbar.len())
            .map(|i| {
                let num = gbar[i] * g[i];
                if num == 0.0 {
                    0.0
                } else {
                    self.ratios[i] * num / delta[i]
                }
            })
            .collect()
    }

    fn delta_map(&self, gbar: &[f64], g: &[f64], delta: &[f64]) -> Result<Vec<f64>> {
        self.resolvent
            .eval(&self.weights(gbar, g, delta), &self.scatterers)
    }

    fn g_map(&self, k: usize, gbar: f64, delta: f64) -> f64 {
        let u = &self.spec.users()[k];
        scatterer_map(u.s(), u.n(), gbar, delta)
    }

    fn gbar_map(&self, k: usize, g: f64) -> f64 {
        transmit_map(self.spec.users()[k].effective_transmit_eigenvalues(), g)
    }

    fn split(x: &[f64]) -> (&[f64], &[f64], &[f64]) {
        let k = x.len() / 3;
        (&x[..k], &x[k..2 * k], &x[2 * k..])
    }

    fn sweep(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (gbar, g, delta) = Self::split(x);
        let k = gbar.len();
        let delta_new = self.delta_map(gbar, g, delta)?;
        let g_new: Vec<f64> = (0..k)
            .map(|i| self.g_map(i, gbar[i], delta_new[i]))
            .collect();
        let gbar_new: Vec<f64> = (0..k).map(|i| self.gbar_map(i, g_new[i])).collect();
        let mut out = gbar_new;
        out.extend(g_new);
        out.extend(delta_new);
        Ok(out)
    }

    fn residuals(&self, gbar: &[f64], g: &[f64], delta: &[f64]) -> Vec<f64> {
        let k = gbar.len();
        let mut out = Vec::with_capacity(3 * k);
        out.extend((0..k).map(|i| (gbar[i] - self.gbar_map(i, g[i])).abs()));
        out.extend((0..k).map(|i| (g[i] - self.g_map(i, gbar[i], delta[i])).abs()));
        match self.delta_map(gbar, g, delta) {
            Ok(d) => out.extend(d.iter().zip(delta).map(|(rhs, lhs)| (lhs - rhs).abs())),
            Err(_) => out.extend(core::iter::repeat_n(f64::INFINITY, k)),
        }
        out
    }
}

fn max_residual(r: &[f64]) -> f64 {
    r.iter().fold(
        0.0,
        |m: f64, v| if v.is_nan() { f64::NAN } else { m.max(*v) },
    )
}

/// Per-equation residuals `|lhs - rhs|` of the fundamental system at a
/// candidate point, ordered as all `ḡ` equations, then `g`, then `δ`.
///
/// A candidate that makes the `δ` resolvent undefined reports infinite
/// residuals for those equations.
pub fn residuals(spec: &ChannelSpec, gbar: &[f64], g: &[f64], delta: &[f64]) -> Result<Vec<f64>> {
    let k = spec.k();
    if gbar.len() != k || g.len() != k || delta.len() != k {
        return Err(Error::dim(format!(
            "candidate must have {k} entries per unknown"
        )));
    }
    Ok(Fundamental::new(spec).residuals(gbar, g, delta))
}

/// Solve the `3K` fundamental equations.
pub fn solve_fundamental(spec: &ChannelSpec, opts: &SolverOptions) -> Result<FixedPointSolution> {
    let k = spec.k();
    let sys = Fundamental::new(spec);
    let x0 = initial_point(&opts.init, 3 * k)?;
    let (x, iterations, residual) = damped_iteration(
        x0,
        opts,
        |x| sys.sweep(x),
        |x| {
            let (a, b, c) = Fundamental::split(x);
            max_residual(&sys.residuals(a, b, c))
        },
    )?;
    let (gbar, g, delta) = Fundamental::split(&x);
    Ok(FixedPointSolution {
        gbar: gbar.to_vec(),
        g: g.to_vec(),
        delta: delta.to_vec(),
        iterations,
        residual,
    })
}

struct Kronecker<'a> {
    spec: &'a ChannelSpec,
    resolvent: ResolventTraces<'a>,
    n: Vec<f64>,
}

impl Kronecker<'_> {
    fn e_map(&self, ebar: &[f64]) -> Result<Vec<f64>> {
        self.resolvent.eval(ebar, &self.n)
    }

    fn ebar_map(&self, k: usize, e: f64) -> f64 {
        transmit_map(self.spec.users()[k].effective_transmit_eigenvalues(), e)
    }

    fn sweep(&self, x: &[f64]) -> Result<Vec<f64>> {
        let k = x.len() / 2;
        let e_new = self.e_map(&x[..k])?;
        let mut out: Vec<f64> = (0..k).map(|i| self.ebar_map(i, e_new[i])).collect();
        out.extend(e_new);
        Ok(out)
    }

    fn residual(&self, x: &[f64]) -> f64 {
        let k = x.len() / 2;
        let (ebar, e) = x.split_at(k);
        let mut worst = (0..k).fold(0.0f64, |m, i| {
            m.max((ebar[i] - self.ebar_map(i, e[i])).abs())
        });
        match self.e_map(ebar) {
            Ok(rhs) => {
                for (l, r) in e.iter().zip(rhs) {
                    worst = worst.max((l - r).abs());
                }
                worst
            }
            Err(_) => f64::INFINITY,
        }
    }
}

/// Solve the `2K` Kronecker-model equations for fixed receive-side matrices
/// `Z_k` (each `N × N_k`); `T_k`, `Q_k` and `ρ` come from `spec`.
pub fn solve_kronecker(
    spec: &ChannelSpec,
    z: &[CMatrix],
    opts: &SolverOptions,
) -> Result<KroneckerSolution> {
    let k = spec.k();
    if z.len() != k {
        return Err(Error::dim(format!(
            "expected {k} receive-side matrices, got {}",
            z.len()
        )));
    }
    for (i, zk) in z.iter().enumerate() {
        if zk.nrows() != spec.n_rx() {
            return Err(Error::dim(format!(
                "Z_{i} has {} rows, expected {}",
                zk.nrows(),
                spec.n_rx()
            )));
        }
    }
    let grams: Vec<CMatrix> = z.iter().map(|zk| zk * zk.adjoint()).collect();
    let sys = Kronecker {
        spec,
        resolvent: ResolventTraces::new(grams.iter().collect(), spec.rho()),
        n: spec.users().iter().map(|u| u.n() as f64).collect(),
    };
    let x0 = initial_point(&opts.init, 2 * k)?;
    let (x, iterations, residual) =
        damped_iteration(x0, opts, |x| sys.sweep(x), |x| sys.residual(x))?;
    Ok(KroneckerSolution {
        ebar: x[..k].to_vec(),
        e: x[k..].to_vec(),
        iterations,
        residual,
    })
}
