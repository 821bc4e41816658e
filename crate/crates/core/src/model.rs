//! Problem instances: per-user correlation matrices, the multi-user channel,
//! the `G(φ, d, n)` correlation generator, structural validation, and folding
//! of commuting transmit correlation/covariance pairs.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{ComplexField, SVD};

use crate::error::{Error, Result};
use crate::linalg::{
    diagonal, hermitian_deviation, hermitian_eigen, identity, max_abs, max_off_diagonal, psd_sqrt,
    CMatrix, C64,
};

/// Tolerances for [`validate`] and for deciding whether a channel is folded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max entry-wise Hermitian asymmetry.
    pub hermitian: f64,
    /// Eigenvalues down to `-psd` are accepted (and clamped to zero).
    pub psd: f64,
    /// Slack on `(1/n) tr Q <= P`.
    pub budget: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-12,
            psd: 1e-10,
            budget: 1e-9,
        }
    }
}

/// Scatterer correlation input. Only the eigenvalues are kept.
#[derive(Debug, Clone)]
pub enum Scatterers {
    Eigenvalues(Vec<f64>),
    Dense(CMatrix),
}

impl Scatterers {
    pub fn identity(count: usize) -> Self {
        Scatterers::Eigenvalues(vec![1.0; count])
    }
}

/// One transmitter: its antenna and scatterer counts and the matrices
/// `R` (receive, N×N), `S` (scatterers, stored as eigenvalues),
/// `T` (transmit, n×n) and `Q` (transmit covariance, n×n).
#[derive(Debug, Clone)]
pub struct UserLink {
    r: CMatrix,
    s_raw: Vec<f64>,
    s_deviation: f64,
    t: CMatrix,
    q: CMatrix,
    budget: Option<f64>,

    r_sqrt: CMatrix,
    s: Vec<f64>,
    t_sqrt: CMatrix,
    effective: CMatrix,
    effective_eigs: Vec<f64>,
}

fn check_square(m: &CMatrix, name: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::dim(format!(
            "{name} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(Error::dim(format!("{name} must be non-empty")));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::param(format!("{name} has non-finite entries")));
    }
    Ok(m.nrows())
}

fn effective_transmit(t_sqrt: &CMatrix, q: &CMatrix) -> (CMatrix, Vec<f64>) {
    let eff = t_sqrt * q * t_sqrt;
    let eigs = hermitian_eigen(&eff)
        .values
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    (eff, eigs)
}

impl UserLink {
    pub fn new(r: CMatrix, scatterers: Scatterers, t: CMatrix, q: CMatrix) -> Result<Self> {
        check_square(&r, "R")?;
        let n = check_square(&t, "T")?;
        if check_square(&q, "Q")? != n {
            return Err(Error::dim(format!(
                "Q is {}x{} but T is {n}x{n}",
                q.nrows(),
                q.ncols()
            )));
        }
        let (s_raw, s_deviation) = match scatterers {
            Scatterers::Eigenvalues(v) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::param("S has non-finite eigenvalues"));
                }
                (v, 0.0)
            }
            Scatterers::Dense(m) => {
                check_square(&m, "S")?;
                let dev = hermitian_deviation(&m);
                (hermitian_eigen(&m).values, dev)
            }
        };
        if s_raw.is_empty() {
            return Err(Error::dim("scatterer count must be at least 1"));
        }
        let r_sqrt = psd_sqrt(&r);
        let t_sqrt = psd_sqrt(&t);
        let s = s_raw.iter().map(|v| v.max(0.0)).collect();
        let (effective, effective_eigs) = effective_transmit(&t_sqrt, &q);
        Ok(UserLink {
            r,
            s_raw,
            s_deviation,
            t,
            q,
            budget: None,
            r_sqrt,
            s,
            t_sqrt,
            effective,
            effective_eigs,
        })
    }

    /// All-identity link with `Q = I`: the Rayleigh-product building block.
    pub fn identity(n_rx: usize, scatterers: usize, n_tx: usize) -> Result<Self> {
        Self::new(
            identity(n_rx),
            Scatterers::identity(scatterers),
            identity(n_tx),
            identity(n_tx),
        )
    }

    pub fn with_budget(mut self, budget: f64) -> Result<Self> {
        if !(budget > 0.0) || !budget.is_finite() {
            return Err(Error::param(format!(
                "power budget must be positive, got {budget}"
            )));
        }
        self.budget = Some(budget);
        Ok(self)
    }

    /// Same link with a different transmit covariance; R- and T-derived data are reused.
    pub fn with_covariance(&self, q: CMatrix) -> Result<Self> {
        if check_square(&q, "Q")? != self.n() {
            return Err(Error::dim("Q does not match the transmit dimension"));
        }
        let (effective, effective_eigs) = effective_transmit(&self.t_sqrt, &q);
        Ok(UserLink {
            q,
            effective,
            effective_eigs,
            ..self.clone()
        })
    }

    /// Transmit antenna count `n_k`.
    pub fn n(&self) -> usize {
        self.t.nrows()
    }

    /// Scatterer count `N_k`.
    pub fn scatterer_count(&self) -> usize {
        self.s.len()
    }

    pub fn n_rx(&self) -> usize {
        self.r.nrows()
    }

    pub fn r(&self) -> &CMatrix {
        &self.r
    }

    pub fn r_sqrt(&self) -> &CMatrix {
        &self.r_sqrt
    }

    /// Scatterer eigenvalues `s_{k,j}`, clamped at zero.
    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn t(&self) -> &CMatrix {
        &self.t
    }

    pub fn t_sqrt(&self) -> &CMatrix {
        &self.t_sqrt
    }

    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn budget(&self) -> Option<f64> {
        self.budget
    }

    /// `T^{1/2} Q T^{1/2}`.
    pub fn effective_transmit(&self) -> &CMatrix {
        &self.effective
    }

    /// Eigenvalues of `T^{1/2} Q T^{1/2}`, clamped at zero.
    pub fn effective_transmit_eigenvalues(&self) -> &[f64] {
        &self.effective_eigs
    }

    /// `(1/n) tr Q`.
    pub fn average_power(&self) -> f64 {
        self.q.diagonal().iter().map(|z| z.re).sum::<f64>() / self.n() as f64
    }

    /// True when `Q = I` and `T` is diagonal, both to within `tol`.
    pub fn is_folded(&self, tol: f64) -> bool {
        max_abs(&(&self.q - identity(self.n()))) <= tol && max_off_diagonal(&self.t) <= tol
    }
}

/// `K` users sharing one `N`-antenna receiver, plus the noise power `ρ`.
#[derive(Debug, Clone)]
pub struct ChannelSpec {
    n_rx: usize,
    users: Vec<UserLink>,
    rho: f64,
}

impl ChannelSpec {
    pub fn new(n_rx: usize, users: Vec<UserLink>, rho: f64) -> Result<Self> {
        if n_rx == 0 {
            return Err(Error::dim("receive antenna count must be at least 1"));
        }
        if users.is_empty() {
            return Err(Error::dim("at least one user is required"));
        }
        for (k, u) in users.iter().enumerate() {
            if u.n_rx() != n_rx {
                return Err(Error::dim(format!(
                    "user {k}: R is {}x{} but the receiver has {n_rx} antennas",
                    u.n_rx(),
                    u.n_rx()
                )));
            }
        }
        check_rho(rho)?;
        Ok(ChannelSpec { n_rx, users, rho })
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(ChannelSpec {
            rho,
            ..self.clone()
        })
    }

    /// Replace every user's transmit covariance.
    pub fn with_covariances(&self, qs: &[CMatrix]) -> Result<Self> {
        if qs.len() != self.k() {
            return Err(Error::dim("one covariance per user is required"));
        }
        let users = self
            .users
            .iter()
            .zip(qs)
            .map(|(u, q)| u.with_covariance(q.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChannelSpec {
            users,
            ..self.clone()
        })
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn k(&self) -> usize {
        self.users.len()
    }

    pub fn users(&self) -> &[UserLink] {
        &self.users
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn total_streams(&self) -> usize {
        self.users.iter().map(UserLink::n).sum()
    }

    pub fn is_folded(&self) -> bool {
        self.users.iter().all(|u| u.is_folded(1e-12))
    }

    /// Fold every user's `(T, Q)` into `T' = diag(t_j p_j)`, `Q' = I`.
    ///
    /// The fixed point depends on `(T, Q)` only through `T^{1/2} Q T^{1/2}`, so a
    /// solution for `self` is also a solution for the folded spec.
    pub fn folded(&self) -> Result<(ChannelSpec, Vec<TransmitFold>)> {
        let mut folds = Vec::with_capacity(self.k());
        let mut users = Vec::with_capacity(self.k());
        for u in &self.users {
            let fold = fold_transmit(u.t(), u.q())?;
            let n = u.n();
            let mut link = UserLink::new(
                u.r().clone(),
                Scatterers::Eigenvalues(u.s_raw.clone()),
                diagonal(&fold.t_eff),
                identity(n),
            )?;
            link.s_deviation = u.s_deviation;
            users.push(link);
            folds.push(fold);
        }
        Ok((
            ChannelSpec {
                n_rx: self.n_rx,
                users,
                rho: self.rho,
            },
            folds,
        ))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::param(format!(
            "noise power must be positive, got {rho}"
        )));
    }
    Ok(())
}

/// Correlation matrix of a uniform linear array with angular spread `phi`
/// (radians) and element spacing `d` (wavelengths):
///
/// `[G]_{k,l} = (1/n) Σ_j exp(i 2π d (k-l) sin(j φ / (1-n)))`, `j = (1-n)/2, …, (n-1)/2`.
///
/// For `n = 1` the result is `[1]`.
pub fn make_g_correlation(phi: f64, d: f64, n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::dim("correlation size must be at least 1"));
    }
    if !phi.is_finite() || !d.is_finite() {
        return Err(Error::param("angular spread and spacing must be finite"));
    }
    if n == 1 {
        return Ok(identity(1));
    }
    let nf = n as f64;
    let sines: Vec<f64> = (0..n)
        .map(|m| {
            let j = (1.0 - nf) / 2.0 + m as f64;
            (j * phi / (1.0 - nf)).sin()
        })
        .collect();
    let mut g = CMatrix::zeros(n, n);
    for k in 0..n {
        g[(k, k)] = C64::new(1.0, 0.0);
        for l in 0..k {
            let lag = (k - l) as f64;
            let sum: C64 = sines
                .iter()
                .map(|s| {
                    let arg = 2.0 * PI * d * lag * s;
                    C64::new(arg.cos(), arg.sin())
                })
                .sum();
            let v = sum / nf;
            g[(k, l)] = v;
            g[(l, k)] = v.conj();
        }
    }
    Ok(g)
}

/// Shared eigenbasis of a commuting transmit correlation `T` and covariance `Q`.
#[derive(Debug, Clone)]
pub struct TransmitFold {
    /// Unitary `U` diagonalizing both `T` and `Q`.
    pub basis: CMatrix,
    /// Eigenvalues of `T` in the order of the columns of `basis`.
    pub t: Vec<f64>,
    /// Eigenvalues of `Q` in the same order.
    pub p: Vec<f64>,
    /// `t_j p_j`.
    pub t_eff: Vec<f64>,
}

impl TransmitFold {
    /// `U diag(t_eff) U^H`, which equals `T^{1/2} Q T^{1/2}`.
    pub fn reconstruct(&self) -> CMatrix {
        let u = &self.basis;
        u * diagonal(&self.t_eff) * u.adjoint()
    }
}

const FOLD_TOLERANCE: f64 = 1e-9;

/// Diagonalize `T` and `Q` in one unitary basis and fold them into
/// `t_eff_j = t_j p_j`. Degenerate eigenspaces of `T` are rotated so that `Q`
/// is diagonal inside them.
pub fn fold_transmit(t: &CMatrix, q: &CMatrix) -> Result<TransmitFold> {
    let n = check_square(t, "T")?;
    if check_square(q, "Q")? != n {
        return Err(Error::dim("T and Q must have the same size"));
    }
    let scale = 1.0f64.max(max_abs(t));
    let (mut basis, t_vals) = if max_off_diagonal(t) <= 1e-12 * scale {
        (
            identity(n),
            t.diagonal().iter().map(|z| z.re).collect::<Vec<_>>(),
        )
    } else {
        let eig = hermitian_eigen(t);
        (eig.vectors, eig.values)
    };

    // Group indices whose T-eigenvalues coincide.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| t_vals[a].total_cmp(&t_vals[b]));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(c) if (t_vals[i] - t_vals[*c.last().unwrap()]).abs() <= FOLD_TOLERANCE * scale => {
                c.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }

    let projected = basis.adjoint() * q * &basis;
    for cluster in clusters.iter().filter(|c| c.len() > 1) {
        let m = cluster.len();
        let block = CMatrix::from_fn(m, m, |a, b| projected[(cluster[a], cluster[b])]);
        let rot = hermitian_eigen(&block).vectors;
        let cols = CMatrix::from_fn(n, m, |i, b| basis[(i, cluster[b])]);
        let rotated = cols * rot;
        for (b, &c) in cluster.iter().enumerate() {
            basis.set_column(c, &rotated.column(b));
        }
    }

    let projected = basis.adjoint() * q * &basis;
    let residue = max_off_diagonal(&projected);
    if !(residue < FOLD_TOLERANCE) {
        return Err(Error::NotSimultaneouslyDiagonalizable { residue });
    }
    let t_vals: Vec<f64> = t_vals.into_iter().map(|v| v.max(0.0)).collect();
    let p: Vec<f64> = projected.diagonal().iter().map(|z| z.re.max(0.0)).collect();
    let t_eff = t_vals.iter().zip(&p).map(|(a, b)| a * b).collect();
    Ok(TransmitFold {
        basis,
        t: t_vals,
        p,
        t_eff,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixRole {
    Receive,
    Scatterer,
    Transmit,
    Covariance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCheck {
    pub user: usize,
    pub role: MatrixRole,
    pub hermitian_deviation: f64,
    pub min_eigenvalue: f64,
    pub spectral_norm: f64,
    pub hermitian_ok: bool,
    pub psd_ok: bool,
    pub finite: bool,
}

impl MatrixCheck {
    pub fn ok(&self) -> bool {
        self.hermitian_ok && self.psd_ok && self.finite
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetCheck {
    pub user: usize,
    pub average_power: f64,
    pub budget: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub matrices: Vec<MatrixCheck>,
    pub budgets: Vec<BudgetCheck>,
    /// Spectral norm of `T_k Q_k` per user.
    pub transmit_norms: Vec<f64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.matrices.iter().all(MatrixCheck::ok)
            && self.budgets.iter().all(|b| b.ok)
            && self.transmit_norms.iter().all(|v| v.is_finite())
    }

    pub fn matrix_violations(&self) -> impl Iterator<Item = &MatrixCheck> {
        self.matrices.iter().filter(|m| !m.ok())
    }

    pub fn budget_violations(&self) -> impl Iterator<Item = &BudgetCheck> {
        self.budgets.iter().filter(|b| !b.ok)
    }
}

fn check_matrix(user: usize, role: MatrixRole, m: &CMatrix, tol: &Tolerances) -> MatrixCheck {
    let deviation = hermitian_deviation(m);
    let eig = hermitian_eigen(m);
    summarize(user, role, deviation, eig.min(), eig.spectral_norm(), tol)
}

fn summarize(
    user: usize,
    role: MatrixRole,
    deviation: f64,
    min_eigenvalue: f64,
    spectral_norm: f64,
    tol: &Tolerances,
) -> MatrixCheck {
    MatrixCheck {
        user,
        role,
        hermitian_deviation: deviation,
        min_eigenvalue,
        spectral_norm,
        hermitian_ok: deviation <= tol.hermitian,
        psd_ok: min_eigenvalue >= -tol.psd,
        finite: spectral_norm.is_finite(),
    }
}

/// Structural checks on every matrix of every user. Report-only: nothing here
/// rejects a spec.
pub fn validate(spec: &ChannelSpec, tol: &Tolerances) -> ValidationReport {
    let mut matrices = Vec::with_capacity(4 * spec.k());
    let mut budgets = Vec::new();
    let mut transmit_norms = Vec::with_capacity(spec.k());
    for (k, u) in spec.users().iter().enumerate() {
        matrices.push(check_matrix(k, MatrixRole::Receive, u.r(), tol));
        let s_min = u.s_raw.iter().copied().fold(f64::INFINITY, f64::min);
        let s_norm = u.s_raw.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        matrices.push(summarize(
            k,
            MatrixRole::Scatterer,
            u.s_deviation,
            s_min,
            s_norm,
            tol,
        ));
        matrices.push(check_matrix(k, MatrixRole::Transmit, u.t(), tol));
        matrices.push(check_matrix(k, MatrixRole::Covariance, u.q(), tol));
        let tq = u.t() * u.q();
        let norm = SVD::new(tq, false, false)
            .singular_values
            .iter()
            .fold(0.0, |m: f64, v| m.max(*v));
        transmit_norms.push(norm);
        if let Some(budget) = u.budget() {
            let average_power = u.average_power();
            budgets.push(BudgetCheck {
                user: k,
                average_power,
                budget,
                ok: average_power <= budget + tol.budget,
            });
        }
    }
    ValidationReport {
        matrices,
        budgets,
        transmit_norms,
    }
}
