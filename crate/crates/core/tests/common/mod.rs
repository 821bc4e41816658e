#![allow(dead_code)]

use std::f64::consts::PI;

use dscatter_core::linalg::{diagonal, identity, CMatrix, C64};
use dscatter_core::model::{make_g_correlation, ChannelSpec, Scatterers, UserLink};
use dscatter_core::montecarlo::standard_complex_gaussian;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain bisection on a sign change; the test-side root oracle.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let (flo, fhi) = (f(lo), f(hi));
    assert!(
        flo * fhi <= 0.0,
        "no sign change on [{lo}, {hi}]: {flo}, {fhi}"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (fhi > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Three-user correlated spec with `N = 4m`, `N_k = 11m`, `n_k = 3m`, `P_k = 1/3`.
pub fn mac_spec(m: usize, rho: f64) -> ChannelSpec {
    let users = [PI / 4.0, PI / 2.0, PI]
        .iter()
        .map(|&phi| {
            let r = make_g_correlation(phi, 0.25, 4 * m).unwrap();
            let s = make_g_correlation(PI / 8.0, 50.0, 11 * m).unwrap();
            let t = make_g_correlation(phi, 0.25, 3 * m).unwrap();
            let q = identity(3 * m).scale(1.0 / 3.0);
            UserLink::new(r, Scatterers::Dense(s), t, q)
                .unwrap()
                .with_budget(1.0 / 3.0)
                .unwrap()
        })
        .collect();
    ChannelSpec::new(4 * m, users, rho).unwrap()
}

pub fn rayleigh_spec(k: usize, n: usize, s: usize, rho: f64) -> ChannelSpec {
    let users = (0..k)
        .map(|_| UserLink::identity(n, s, n).unwrap())
        .collect();
    ChannelSpec::new(n, users, rho).unwrap()
}

/// `A A^H / cols + floor·I`, a well-conditioned random Hermitian PD matrix.
pub fn random_hpd(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> CMatrix {
    let a = standard_complex_gaussian(rng, n, n + 2);
    let mut m = &a * a.adjoint() / C64::new((n + 2) as f64, 0.0);
    for i in 0..n {
        m[(i, i)] += C64::new(floor, 0.0);
    }
    m
}

/// Random valid spec with Hermitian PD `R`, `S`, `T` and `Q = P I`.
pub fn random_spec(seed: u64) -> ChannelSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=3);
    let n_rx = rng.random_range(2..=6);
    let users = (0..k)
        .map(|_| {
            let ns = rng.random_range(1..=6);
            let nt = rng.random_range(1..=5);
            let r = random_hpd(&mut rng, n_rx, 0.05);
            let s: Vec<f64> = (0..ns).map(|_| rng.random_range(0.1..2.0)).collect();
            let t = random_hpd(&mut rng, nt, 0.05);
            let p = rng.random_range(0.2..2.0);
            UserLink::new(r, Scatterers::Eigenvalues(s), t, identity(nt).scale(p))
                .unwrap()
                .with_budget(p)
                .unwrap()
        })
        .collect();
    let rho = 10f64.powf(rng.random_range(-1.5..1.5));
    ChannelSpec::new(n_rx, users, rho).unwrap()
}

pub fn diag_user(n_rx: usize, s: &[f64], t: &[f64], q: &[f64]) -> UserLink {
    UserLink::new(
        identity(n_rx),
        Scatterers::Eigenvalues(s.to_vec()),
        diagonal(t),
        diagonal(q),
    )
    .unwrap()
}
