//! Path loss, spatially correlated log-normal shadowing and pairwise channel
//! gains.
//!
//! Gains are kept in dB. The gain of link `(i, j)` is `z_i + z_j + PL(d_ij)`
//! where `z` is one correlated shadowing draw per device and
//! `PL(d) = -10·α·log10(d / r0)`.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::scenario::{distance_matrix, Scenario};

/// Largest diagonal loading accepted when factoring the correlation matrix.
pub const MAX_CORRELATION_JITTER: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(rename = "r0_m", default = "defaults::r0")]
    pub r0: f64,
    #[serde(rename = "d_cor_m", default = "defaults::d_cor")]
    pub d_cor: f64,
    #[serde(rename = "sigma_sh_db", default = "defaults::sigma_sh")]
    pub sigma_sh: f64,
    #[serde(default = "defaults::gamma_db")]
    pub gamma_db: f64,
    /// Rate threshold; falls back to `gamma_db` when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_db: Option<f64>,
    #[serde(rename = "d_min_m", default, skip_serializing_if = "Option::is_none")]
    pub d_min: Option<f64>,
}

mod defaults {
    pub fn alpha() -> f64 {
        2.0
    }
    pub fn r0() -> f64 {
        31.62
    }
    pub fn d_cor() -> f64 {
        20.0
    }
    pub fn sigma_sh() -> f64 {
        8.0
    }
    pub fn gamma_db() -> f64 {
        -20.0
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            alpha: defaults::alpha(),
            r0: defaults::r0(),
            d_cor: defaults::d_cor(),
            sigma_sh: defaults::sigma_sh(),
            gamma_db: defaults::gamma_db(),
            delta_db: None,
            d_min: None,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(invalid(format!("r0 must be positive, got {}", self.r0)));
        }
        if !(self.d_cor > 0.0 && self.d_cor.is_finite()) {
            return Err(invalid(format!("d_cor must be positive, got {}", self.d_cor)));
        }
        if !(self.sigma_sh >= 0.0 && self.sigma_sh.is_finite()) {
            return Err(invalid(format!("sigma_sh must be non-negative, got {}", self.sigma_sh)));
        }
        if self.gamma_db.is_nan() || self.delta_db.is_some_and(f64::is_nan) {
            return Err(invalid("thresholds must not be NaN"));
        }
        if let Some(d) = self.d_min {
            if !(d > 0.0) {
                return Err(invalid(format!("d_min must be positive, got {d}")));
            }
        }
        Ok(())
    }

    pub fn effective_delta_db(&self) -> f64 {
        self.delta_db.unwrap_or(self.gamma_db)
    }

    pub fn with_gamma(mut self, gamma_db: f64) -> Self {
        self.gamma_db = gamma_db;
        self
    }
}

/// `10·log10((d/r0)^-α)`.
pub fn path_loss_db(d: f64, r0: f64, alpha: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(invalid(format!("path loss needs a positive distance, got {d}")));
    }
    if !(r0 > 0.0) {
        return Err(invalid(format!("r0 must be positive, got {r0}")));
    }
    Ok(-10.0 * alpha * (d / r0).log10())
}

/// `R_ij = exp(-(d_ij / d_cor)·ln 2)`; `distances` is row-major `n×n`.
pub fn correlation_matrix(distances: &[f64], n: usize, d_cor: f64) -> Result<DenseMatrix> {
    if distances.len() != n * n {
        return Err(invalid("distance matrix has the wrong size"));
    }
    let data = distances
        .iter()
        .map(|d| (-(d / d_cor) * std::f64::consts::LN_2).exp())
        .collect();
    DenseMatrix::from_row_major(n, n, data)
}

/// `10^(db/10)`; `-∞` maps to 0.
pub fn gain_linear(gain_db: f64) -> f64 {
    10f64.powf(gain_db / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    n: usize,
    gain_db: Vec<f64>,
    shadowing_db: Vec<f64>,
    distances: Vec<f64>,
}

impl ChannelRealization {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Gain of link `(i, j)` in dB. The diagonal holds `+∞` and is meaningless.
    pub fn gain_db(&self, i: usize, j: usize) -> f64 {
        self.gain_db[i * self.n + j]
    }

    pub fn gain_matrix_db(&self) -> &[f64] {
        &self.gain_db
    }

    pub fn shadowing_db(&self) -> &[f64] {
        &self.shadowing_db
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i * self.n + j]
    }

    /// Builds a realization from explicit gains, mostly for tests and
    /// hand-made instances. `gain_db` is row-major `n×n`; the diagonal is
    /// overwritten with the `+∞` sentinel.
    pub fn from_gains(n: usize, mut gain_db: Vec<f64>) -> Result<Self> {
        if gain_db.len() != n * n {
            return Err(invalid("gain matrix has the wrong size"));
        }
        for i in 0..n {
            gain_db[i * n + i] = f64::INFINITY;
            for j in 0..i {
                if gain_db[i * n + j] != gain_db[j * n + i] {
                    return Err(Error::NotSymmetric { row: j, col: i });
                }
            }
        }
        Ok(ChannelRealization {
            n,
            gain_db,
            shadowing_db: vec![0.0; n],
            distances: vec![f64::NAN; n * n],
        })
    }

    /// One `row,col,gain_db` line per off-diagonal entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,gain_db\n");
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    let _ = writeln!(out, "{},{},{}", i, j, self.gain_db(i, j));
                }
            }
        }
        out
    }
}

pub fn realize_channel<R: Rng + ?Sized>(
    s: &Scenario,
    p: &ChannelParams,
    rng: &mut R,
) -> Result<ChannelRealization> {
    p.validate()?;
    let n = s.len();
    let distances = distance_matrix(s);
    for i in 0..n {
        for j in (i + 1)..n {
            if !(distances[i * n + j] > 0.0) {
                return Err(Error::DegenerateGeometry { first: i, second: j });
            }
        }
    }
    let corr = correlation_matrix(&distances, n, p.d_cor)?;
    let chol = linalg::cholesky(&corr, MAX_CORRELATION_JITTER)?;
    let z = linalg::correlated_gaussian(&chol, p.sigma_sh, rng);

    let mut gain_db = vec![f64::INFINITY; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = distances[i * n + j];
            let g = match p.d_min {
                Some(cutoff) if d >= cutoff => f64::NEG_INFINITY,
                _ => z[i] + z[j] + path_loss_db(d, p.r0, p.alpha)?,
            };
            gain_db[i * n + j] = g;
            gain_db[j * n + i] = g;
        }
    }
    Ok(ChannelRealization {
        n,
        gain_db,
        shadowing_db: z,
        distances,
    })
}
