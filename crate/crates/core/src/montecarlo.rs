//! Exact finite-size oracle: draws channel realizations, evaluates the
//! instantaneous mutual information, MMSE SINR and sum-rate on them, and
//! aggregates ergodic estimates.
//!
//! Trial `i` under master seed `s` always draws from the ChaCha8 stream
//! `(seed = s, stream = i)`, so any trial can be regenerated on its own and
//! estimates do not depend on how trials are scheduled. Within a trial the
//! draws are, for each user in order, `W_1` then `W_2`, column-major, real
//! part before imaginary part.

// Float math without std; when std is linked its inherent methods take precedence.
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;
#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fixedpoint::{
    solve_fundamental, solve_kronecker, FixedPointSolution, KroneckerSolution, SolverOptions,
};
use crate::linalg::{hpd_cholesky, identity, logdet_cholesky, logdet_eig, CMatrix, C64};
use crate::model::{ChannelSpec, TransmitFold};

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Substream {
    pub master_seed: u64,
    pub index: u64,
}

impl Substream {
    pub fn new(master_seed: u64, index: u64) -> Self {
        Substream { master_seed, index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.index);
        rng
    }
}

/// Matrix of i.i.d. standard complex Gaussians: real and imaginary parts
/// independent with variance 1/2 each.
pub fn standard_complex_gaussian<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for z in m.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2);
    }
    m
}

#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `H_k`, each `N × n_k`.
    pub h: Vec<CMatrix>,
    /// `(W_{1,k}, W_{2,k})`, kept only on request.
    pub factors: Option<Vec<(CMatrix, CMatrix)>>,
    pub substream: Substream,
}

impl ChannelRealization {
    pub fn n_rx(&self) -> usize {
        self.h.first().map_or(0, |h| h.nrows())
    }

    /// Rotate every `H_k` into its stream basis, `H_k U_k diag(√p_k)`. The
    /// columns of the result are the per-stream channels of a folded spec.
    pub fn fold(&self, folds: &[TransmitFold]) -> Result<ChannelRealization> {
        if folds.len() != self.h.len() {
            return Err(Error::dim("one transmit fold per user is required"));
        }
        let h = self
            .h
            .iter()
            .zip(folds)
            .map(|(hk, f)| {
                if f.basis.nrows() != hk.ncols() {
                    return Err(Error::dim("transmit fold does not match the channel width"));
                }
                let mut rotated = hk * &f.basis;
                for (j, p) in f.p.iter().enumerate() {
                    let scale = C64::new(p.max(0.0).sqrt(), 0.0);
                    rotated.column_mut(j).iter_mut().for_each(|z| *z *= scale);
                }
                Ok(rotated)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChannelRealization {
            h,
            factors: None,
            substream: self.substream,
        })
    }
}

fn draw_factors(spec: &ChannelSpec, substream: Substream) -> Vec<(CMatrix, CMatrix)> {
    let mut rng = substream.rng();
    spec.users()
        .iter()
        .map(|u| {
            let w1 = standard_complex_gaussian(&mut rng, spec.n_rx(), u.scatterer_count());
            let w2 = standard_complex_gaussian(&mut rng, u.scatterer_count(), u.n());
            (w1, w2)
        })
        .collect()
}

/// `R^{1/2} W_1 S^{1/2}` with `S^{1/2}` applied as a column scaling.
fn receive_side(r_sqrt: &CMatrix, w1: &CMatrix, s: &[f64]) -> CMatrix {
    let mut scaled = w1.clone();
    for (j, sj) in s.iter().enumerate() {
        let f = C64::new(sj.sqrt(), 0.0);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= f);
    }
    r_sqrt * scaled
}

/// Draw `H_k = (N_k n_k)^{-1/2} R_k^{1/2} W_{1,k} S_k^{1/2} W_{2,k} T_k^{1/2}` for every user.
pub fn sample_channel(
    spec: &ChannelSpec,
    substream: Substream,
    keep_factors: bool,
) -> ChannelRealization {
    let factors = draw_factors(spec, substream);
    let h = spec
        .users()
        .iter()
        .zip(&factors)
        .map(|(u, (w1, w2))| {
            let scale = 1.0 / ((u.scatterer_count() * u.n()) as f64).sqrt();
            let left = receive_side(u.r_sqrt(), w1, u.s());
            (left * w2 * u.t_sqrt()).map(|z| z * C64::new(scale, 0.0))
        })
        .collect();
    ChannelRealization {
        h,
        factors: keep_factors.then_some(factors),
        substream,
    }
}

/// Receive-side Kronecker matrices `Z_k = N_k^{-1/2} R_k^{1/2} W_{1,k} S_k^{1/2}`,
/// using the same `W_1` draws as [`sample_channel`] on this substream.
pub fn sample_receive_side(spec: &ChannelSpec, substream: Substream) -> Vec<CMatrix> {
    draw_factors(spec, substream)
        .iter()
        .zip(spec.users())
        .map(|((w1, _), u)| {
            let scale = 1.0 / (u.scatterer_count() as f64).sqrt();
            receive_side(u.r_sqrt(), w1, u.s()).map(|z| z * C64::new(scale, 0.0))
        })
        .collect()
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::param(format!(
            "noise power must be positive, got {rho}"
        )));
    }
    Ok(())
}

fn mi_argument(real: &ChannelRealization, q: &[CMatrix], rho: f64) -> Result<CMatrix> {
    check_rho(rho)?;
    if q.len() != real.h.len() {
        return Err(Error::dim("one covariance per user is required"));
    }
    let n = real.n_rx();
    let mut m = identity(n);
    let inv_rho = C64::new(1.0 / rho, 0.0);
    for (h, qk) in real.h.iter().zip(q) {
        m += (h * qk * h.adjoint()).map(|z| z * inv_rho);
    }
    Ok(m)
}

/// `I_N(ρ) = (1/N) log det(I + (1/ρ) Σ_k H_k Q_k H_k^H)`.
pub fn exact_mi(real: &ChannelRealization, q: &[CMatrix], rho: f64) -> Result<f64> {
    let m = mi_argument(real, q, rho)?;
    Ok(logdet_eig(&m)?.max(0.0) / real.n_rx() as f64)
}

/// [`exact_mi`] through a Cholesky factorization instead of an eigendecomposition.
pub fn exact_mi_cholesky(real: &ChannelRealization, q: &[CMatrix], rho: f64) -> Result<f64> {
    let m = mi_argument(real, q, rho)?;
    Ok(logdet_cholesky(&m)?.max(0.0) / real.n_rx() as f64)
}

const SINR_GUARD: f64 = 1e-12;

/// MMSE SINR of every column of every `H_k` (a folded realization: each column
/// is one unit-power stream).
///
/// Uses `γ = q / (1 - q)` with `q = h^H (Σ_i H_i H_i^H + ρI)^{-1} h`, one
/// factorization for all streams.
pub fn exact_sinr(real: &ChannelRealization, rho: f64) -> Result<Vec<Vec<f64>>> {
    check_rho(rho)?;
    let n = real.n_rx();
    let mut a = identity(n).scale(rho);
    for h in &real.h {
        a += h * h.adjoint();
    }
    let chol = hpd_cholesky(&a)?;
    real.h
        .iter()
        .map(|h| {
            let x = chol.solve(h);
            (0..h.ncols())
                .map(|j| {
                    let q: f64 = h
                        .column(j)
                        .iter()
                        .zip(x.column(j).iter())
                        .map(|(a, b)| (a.conj() * b).re)
                        .sum();
                    if q >= 1.0 - SINR_GUARD {
                        return Err(Error::domain(format!("MMSE quadratic form {q} reached 1")));
                    }
                    Ok((q / (1.0 - q)).max(0.0))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// MMSE SINR by the literal deflated formula
/// `γ_{k,j} = h^H (Σ_i H_i H_i^H - h h^H + ρI)^{-1} h`; one inversion per stream.
pub fn exact_sinr_deflated(real: &ChannelRealization, rho: f64) -> Result<Vec<Vec<f64>>> {
    check_rho(rho)?;
    let n = real.n_rx();
    let mut a = identity(n).scale(rho);
    for h in &real.h {
        a += h * h.adjoint();
    }
    real.h
        .iter()
        .map(|h| {
            (0..h.ncols())
                .map(|j| {
                    let col = h.column(j).into_owned();
                    let deflated = &a - &col * col.adjoint();
                    let x = hpd_cholesky(&deflated)?.solve(&col);
                    Ok((col.adjoint() * x)[(0, 0)].re.max(0.0))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// `R(ρ) = (1/N) Σ_k Σ_j log(1 + γ_{k,j})` on a folded realization.
pub fn exact_sumrate(real: &ChannelRealization, rho: f64) -> Result<f64> {
    let sinr = exact_sinr(real, rho)?;
    Ok(sumrate_from_sinr(&sinr, real.n_rx()))
}

pub fn sumrate_from_sinr(sinr: &[Vec<f64>], n_rx: usize) -> f64 {
    sinr.iter().flatten().map(|g| g.ln_1p()).sum::<f64>() / n_rx as f64
}

/// Running mean and variance (Welford). Feeding samples in trial order makes
/// the result independent of how they were produced.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finish(&self, master_seed: u64) -> MonteCarloEstimate {
        let stderr = if self.count > 1 {
            let var = self.m2 / (self.count - 1) as f64;
            (var.max(0.0) / self.count as f64).sqrt()
        } else {
            0.0
        };
        MonteCarloEstimate {
            mean: self.mean,
            stderr,
            trials: self.count,
            master_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub stderr: f64,
    pub trials: u64,
    pub master_seed: u64,
}

impl MonteCarloEstimate {
    pub fn from_samples(samples: &[f64], master_seed: u64) -> Self {
        let mut acc = Accumulator::default();
        samples.iter().for_each(|x| acc.push(*x));
        acc.finish(master_seed)
    }
}

/// Sample mean and standard error of `functional` over `trials` independent
/// realizations of `spec`.
pub fn ergodic<F>(
    spec: &ChannelSpec,
    trials: u64,
    master_seed: u64,
    mut functional: F,
) -> Result<MonteCarloEstimate>
where
    F: FnMut(&ChannelRealization) -> Result<f64>,
{
    if trials < 2 {
        return Err(Error::param("at least two trials are required"));
    }
    let mut acc = Accumulator::default();
    for i in 0..trials {
        let real = sample_channel(spec, Substream::new(master_seed, i), false);
        acc.push(functional(&real)?);
    }
    Ok(acc.finish(master_seed))
}

/// Vector-valued [`ergodic`]: one estimate per output component.
pub fn ergodic_many<F>(
    spec: &ChannelSpec,
    trials: u64,
    master_seed: u64,
    mut functional: F,
) -> Result<Vec<MonteCarloEstimate>>
where
    F: FnMut(&ChannelRealization) -> Result<Vec<f64>>,
{
    if trials < 2 {
        return Err(Error::param("at least two trials are required"));
    }
    let mut accs: Vec<Accumulator> = Vec::new();
    for i in 0..trials {
        let real = sample_channel(spec, Substream::new(master_seed, i), false);
        let values = functional(&real)?;
        if accs.is_empty() {
            accs = alloc::vec![Accumulator::default(); values.len()];
        } else if accs.len() != values.len() {
            return Err(Error::dim(
                "functional changed its output length between trials",
            ));
        }
        accs.iter_mut().zip(values).for_each(|(a, v)| a.push(v));
    }
    Ok(accs.iter().map(|a| a.finish(master_seed)).collect())
}

/// One draw of the receive-side matrices, with the Kronecker fixed point on
/// that draw compared against the deterministic fundamental solution.
#[derive(Debug, Clone)]
pub struct KroneckerComparison {
    pub kronecker: KroneckerSolution,
    pub fundamental: FixedPointSolution,
    /// `|e_k - g_k|`.
    pub e_gap: Vec<f64>,
    /// `|ē_k - ḡ_k|`.
    pub ebar_gap: Vec<f64>,
}

impl KroneckerComparison {
    pub fn max_e_gap(&self) -> f64 {
        self.e_gap.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_ebar_gap(&self) -> f64 {
        self.ebar_gap.iter().copied().fold(0.0, f64::max)
    }
}

pub fn kronecker_conditional_oracle(
    spec: &ChannelSpec,
    substream: Substream,
    opts: &SolverOptions,
) -> Result<KroneckerComparison> {
    let fundamental = solve_fundamental(spec, opts)?;
    kronecker_conditional_oracle_with(spec, substream, fundamental, opts)
}

/// [`kronecker_conditional_oracle`] with the fundamental solution supplied,
/// for sweeps over many seeds of one spec.
pub fn kronecker_conditional_oracle_with(
    spec: &ChannelSpec,
    substream: Substream,
    fundamental: FixedPointSolution,
    opts: &SolverOptions,
) -> Result<KroneckerComparison> {
    let z = sample_receive_side(spec, substream);
    let kronecker = solve_kronecker(spec, &z, opts)?;
    let e_gap = kronecker
        .e
        .iter()
        .zip(&fundamental.g)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let ebar_gap = kronecker
        .ebar
        .iter()
        .zip(&fundamental.gbar)
        .map(|(a, b)| (a - b).abs())
        .collect();
    Ok(KroneckerComparison {
        kronecker,
        fundamental,
        e_gap,
        ebar_gap,
    })
}
