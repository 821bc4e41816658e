use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Inclusive SNR sweep in dB, written `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SnrGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self, String> {
        if !start.is_finite() || !stop.is_finite() || !step.is_finite() {
            return Err("SNR grid bounds must be finite".into());
        }
        if !(step > 0.0) {
            return Err(format!("SNR grid step must be positive, got {step}"));
        }
        if stop < start {
            return Err(format!("SNR grid is empty ({start} > {stop})"));
        }
        Ok(SnrGrid { start, stop, step })
    }

    pub fn single(snr_db: f64) -> Self {
        SnrGrid {
            start: snr_db,
            stop: snr_db,
            step: 1.0,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

/// `ρ = 10^{-SNR_dB/10}`, since SNR = 1/ρ.
pub fn rho_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

pub fn snr_db_from_rho(rho: f64) -> f64 {
    10.0 * (1.0 / rho).log10()
}

impl FromStr for SnrGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |p: &str| {
            p.parse::<f64>()
                .map_err(|_| format!("bad number {p:?} in SNR grid {s:?}"))
        };
        match parts.as_slice() {
            [single] => Ok(SnrGrid::single(num(single)?)),
            [a, b, c] => SnrGrid::new(num(a)?, num(b)?, num(c)?),
            _ => Err(format!("SNR grid must be start:stop:step, got {s:?}")),
        }
    }
}

impl TryFrom<String> for SnrGrid {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SnrGrid> for String {
    fn from(g: SnrGrid) -> String {
        g.to_string()
    }
}

impl fmt::Display for SnrGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}
