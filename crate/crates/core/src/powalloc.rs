//! Capacity-achieving transmit covariances for the deterministic mutual
//! information: per-user water-filling over the eigenmodes of `T_k`, iterated
//! against the fundamental fixed point until the powers settle.

// Float math without std; when std is linked its inherent methods take precedence.
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::detequiv::mi_det;
use crate::error::{Error, Result};
use crate::fixedpoint::{solve_fundamental, FixedPointSolution, InitialPoint, SolverOptions};
use crate::linalg::{diagonal, identity, CMatrix};
use crate::model::{fold_transmit, ChannelSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct WaterLevel {
    pub powers: Vec<f64>,
    pub mu: f64,
}

/// `p_j = (μ - 1/(g t_j))^+` with `μ` set so that `(1/n) Σ p_j = budget`.
///
/// The water level comes from the closed-form prefix sum over the sorted
/// floors `1/(g t_j)`; zero-gain modes never enter the active set.
pub fn waterfill_step(t: &[f64], g: f64, budget: f64) -> Result<WaterLevel> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::param(format!(
            "water-filling gain must be positive, got {g}"
        )));
    }
    if !(budget > 0.0) || !budget.is_finite() {
        return Err(Error::param(format!(
            "power budget must be positive, got {budget}"
        )));
    }
    let mut floors: Vec<(usize, f64)> = t
        .iter()
        .enumerate()
        .filter(|(_, &tj)| tj > 0.0)
        .map(|(j, &tj)| (j, 1.0 / (g * tj)))
        .collect();
    if floors.is_empty() {
        return Err(Error::NoChannel);
    }
    floors.sort_by(|a, b| a.1.total_cmp(&b.1));
    let total = budget * t.len() as f64;

    let mut prefix = Vec::with_capacity(floors.len() + 1);
    prefix.push(0.0);
    for (_, f) in &floors {
        prefix.push(prefix.last().unwrap() + f);
    }
    let mut mu = total + floors[0].1;
    for m in (1..=floors.len()).rev() {
        let level = (total + prefix[m]) / m as f64;
        if level > floors[m - 1].1 {
            mu = level;
            break;
        }
    }
    let mut powers = vec![0.0; t.len()];
    for (j, f) in floors {
        powers[j] = (mu - f).max(0.0);
    }
    Ok(WaterLevel { powers, mu })
}

/// Optimal covariance of one user, `Q = U diag(p) U^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserAllocation {
    /// Eigenbasis of `T_k`.
    pub basis: CMatrix,
    /// Eigenvalues of `T_k`, in basis order.
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub mu: f64,
    /// The `g_k` this water level was computed from.
    pub g: f64,
}

impl UserAllocation {
    pub fn covariance(&self) -> CMatrix {
        &self.basis * diagonal(&self.p) * self.basis.adjoint()
    }

    /// `g t_j / (1 + g t_j p_j)` at the stored `g`.
    pub fn gradient(&self, j: usize) -> f64 {
        let gt = self.g * self.t[j];
        gt / (1.0 + gt * self.p[j])
    }

    /// Largest violation of the water-filling optimality conditions: spread of
    /// the gradient across active modes, plus any inactive mode whose gradient
    /// at zero power exceeds the active level.
    pub fn kkt_residual(&self) -> f64 {
        let active: Vec<f64> = (0..self.p.len())
            .filter(|&j| self.p[j] > 0.0)
            .map(|j| self.gradient(j))
            .collect();
        let hi = active.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = active.iter().copied().fold(f64::INFINITY, f64::min);
        let mut worst = if active.is_empty() { 0.0 } else { hi - lo };
        for j in (0..self.p.len()).filter(|&j| self.p[j] == 0.0) {
            worst = worst.max(self.gradient(j) - hi);
        }
        worst
    }

    pub fn average_power(&self) -> f64 {
        self.p.iter().sum::<f64>() / self.p.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub users: Vec<UserAllocation>,
    pub sweeps: usize,
    /// `max_{k,j} |p^{n} - p^{n-1}|` after each sweep.
    pub trajectory: Vec<f64>,
    /// Deterministic mutual information at the covariance fed into each sweep.
    pub mi_trajectory: Vec<f64>,
}

impl PowerAllocation {
    pub fn covariances(&self) -> Vec<CMatrix> {
        self.users.iter().map(UserAllocation::covariance).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillOptions {
    pub eps: f64,
    pub max_sweeps: usize,
    pub solver: SolverOptions,
}

impl Default for WaterfillOptions {
    fn default() -> Self {
        WaterfillOptions {
            eps: 1e-8,
            max_sweeps: 500,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WaterfillOutcome {
    pub allocation: PowerAllocation,
    /// Fixed point at the returned covariances.
    pub solution: FixedPointSolution,
    /// `spec` with the returned covariances installed.
    pub spec: ChannelSpec,
}

/// Uniform covariances `Q_k = P_k I`.
pub fn uniform_covariances(spec: &ChannelSpec) -> Result<Vec<CMatrix>> {
    spec.users()
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let p = u.budget().ok_or(Error::MissingBudget(k))?;
            Ok(identity(u.n()).scale(p))
        })
        .collect()
}

/// Alternate the fundamental fixed point and per-user water-filling, starting
/// from uniform powers, until no power moves by more than `eps`.
pub fn iterative_waterfilling(
    spec: &ChannelSpec,
    opts: &WaterfillOptions,
) -> Result<WaterfillOutcome> {
    let mut bases = Vec::with_capacity(spec.k());
    let mut gains = Vec::with_capacity(spec.k());
    let mut powers = Vec::with_capacity(spec.k());
    let mut budgets = Vec::with_capacity(spec.k());
    for (k, u) in spec.users().iter().enumerate() {
        let budget = u.budget().ok_or(Error::MissingBudget(k))?;
        let fold = fold_transmit(u.t(), &identity(u.n()))?;
        powers.push(vec![budget; u.n()]);
        bases.push(fold.basis);
        gains.push(fold.t);
        budgets.push(budget);
    }
    let install = |powers: &[Vec<f64>]| -> Result<ChannelSpec> {
        let qs: Vec<CMatrix> = bases
            .iter()
            .zip(powers)
            .map(|(u, p)| u * diagonal(p) * u.adjoint())
            .collect();
        spec.with_covariances(&qs)
    };

    let mut solver = opts.solver.clone();
    let mut trajectory = Vec::new();
    let mut mi_trajectory: Vec<f64> = Vec::new();
    for sweep in 1..=opts.max_sweeps {
        let current = install(&powers)?;
        let sol = solve_fundamental(&current, &solver)?;
        let mi = mi_det(&current, &sol)?;
        if let Some(prev) = mi_trajectory.last() {
            if mi < prev - 1e-12 {
                log::warn!(
                    "deterministic mutual information fell from {prev} to {mi} at sweep {sweep}"
                );
            }
        }
        mi_trajectory.push(mi);

        let levels = (0..spec.k())
            .map(|k| waterfill_step(&gains[k], sol.g[k], budgets[k]))
            .collect::<Result<Vec<_>>>()?;
        let change = levels
            .iter()
            .zip(&powers)
            .flat_map(|(l, p)| l.powers.iter().zip(p).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        trajectory.push(change);
        powers = levels.iter().map(|l| l.powers.clone()).collect();
        solver.init = InitialPoint::Explicit(sol.to_vec());

        if change <= opts.eps {
            let users = levels
                .into_iter()
                .enumerate()
                .map(|(k, l)| UserAllocation {
                    basis: bases[k].clone(),
                    t: gains[k].clone(),
                    p: l.powers,
                    mu: l.mu,
                    g: sol.g[k],
                })
                .collect();
            let final_spec = install(&powers)?;
            let solution = solve_fundamental(&final_spec, &solver)?;
            return Ok(WaterfillOutcome {
                allocation: PowerAllocation {
                    users,
                    sweeps: sweep,
                    trajectory,
                    mi_trajectory,
                },
                solution,
                spec: final_spec,
            });
        }
    }
    Err(Error::WaterfillNonConvergence {
        iterations: opts.max_sweeps,
        trajectory,
    })
}

/// `∂Ī/∂p_{k,j} = (1/N) g_k t_{k,j} / (1 + g_k t_{k,j} p_{k,j})` with `g_k`
/// held at `sol`. `j` indexes the shared eigenbasis of `(T_k, Q_k)` as returned
/// by [`fold_transmit`]. The `1/N` comes from the normalization of `Ī`; the
/// water-filling conditions use the unscaled form ([`UserAllocation::gradient`]).
pub fn mi_gradient(
    spec: &ChannelSpec,
    sol: &FixedPointSolution,
    k: usize,
    j: usize,
) -> Result<f64> {
    let u = spec
        .users()
        .get(k)
        .ok_or_else(|| Error::dim(format!("no user {k}")))?;
    let fold = fold_transmit(u.t(), u.q())?;
    if j >= fold.t.len() {
        return Err(Error::dim(format!("user {k} has no stream {j}")));
    }
    let gt = sol.g[k] * fold.t[j];
    Ok(gt / (1.0 + gt * fold.p[j]) / spec.n_rx() as f64)
}
