//! Rayon-backed ergodic estimation. Trials run in any order; results are
//! folded in trial-index order, so estimates match the sequential core
//! routines bit for bit.

use dscatter_core::model::ChannelSpec;
use dscatter_core::montecarlo::{
    sample_channel, Accumulator, ChannelRealization, MonteCarloEstimate, Substream,
};
use dscatter_core::{Error, Result};
use rayon::prelude::*;

pub fn par_ergodic_many<F>(
    spec: &ChannelSpec,
    trials: u64,
    master_seed: u64,
    functional: F,
) -> Result<Vec<MonteCarloEstimate>>
where
    F: Fn(&ChannelRealization) -> Result<Vec<f64>> + Sync,
{
    if trials < 2 {
        return Err(Error::InvalidParameter(
            "at least two trials are required".into(),
        ));
    }
    let samples: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| functional(&sample_channel(spec, Substream::new(master_seed, i), false)))
        .collect::<Result<_>>()?;
    let width = samples[0].len();
    let mut accs = vec![Accumulator::default(); width];
    for row in &samples {
        if row.len() != width {
            return Err(Error::InvalidDimension(
                "functional changed its output length between trials".into(),
            ));
        }
        accs.iter_mut().zip(row).for_each(|(a, v)| a.push(*v));
    }
    Ok(accs.iter().map(|a| a.finish(master_seed)).collect())
}

pub fn par_ergodic<F>(
    spec: &ChannelSpec,
    trials: u64,
    master_seed: u64,
    functional: F,
) -> Result<MonteCarloEstimate>
where
    F: Fn(&ChannelRealization) -> Result<f64> + Sync,
{
    let mut v = par_ergodic_many(spec, trials, master_seed, |r| Ok(vec![functional(r)?]))?;
    Ok(v.remove(0))
}
