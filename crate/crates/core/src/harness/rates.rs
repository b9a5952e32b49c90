//! Rate models `ε^p · f(ε)^s` and their least-squares fit against measured
//! errors.

use crate::error::{Error, Result};
use crate::expansion::ErrorRow;

/// The logarithmic factor of a rate model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogFactor {
    /// `μ_d(1/ε)` with `μ_1(y) = √y`, `μ_2(y) = |log(2 + y)|^{1/2}`, `μ_3 = 1`.
    Mu { d: u8 },
    /// `|log ε|`.
    AbsLogEpsilon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel {
    pub epsilon_power: f64,
    pub factor: LogFactor,
    pub factor_power: f64,
}

/// `μ_d(y)`.
pub fn mu(d: u8, y: f64) -> f64 {
    match d {
        1 => y.sqrt(),
        2 => (2.0 + y).ln().abs().sqrt(),
        _ => 1.0,
    }
}

impl RateModel {
    /// `ε μ_2(1/ε)`.
    pub const L2_BULK: Self = Self {
        epsilon_power: 1.0,
        factor: LogFactor::Mu { d: 2 },
        factor_power: 1.0,
    };
    /// `ε^{1/2} μ_2(1/ε)^{1/2}`.
    pub const TWO_SCALE: Self = Self {
        epsilon_power: 0.5,
        factor: LogFactor::Mu { d: 2 },
        factor_power: 0.5,
    };
    /// `ε^{3/2} |log ε|^{1/2}`.
    pub const EXTERIOR_FIRST_ORDER: Self = Self {
        epsilon_power: 1.5,
        factor: LogFactor::AbsLogEpsilon,
        factor_power: 0.5,
    };

    pub fn predictor(&self, epsilon: f64) -> f64 {
        let f = match self.factor {
            LogFactor::Mu { d } => mu(d, 1.0 / epsilon),
            LogFactor::AbsLogEpsilon => epsilon.ln().abs(),
        };
        epsilon.powf(self.epsilon_power) * f.powf(self.factor_power)
    }
}

/// Error columns of a sweep that carry a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ErrorColumn {
    L2Box,
    H1Ext,
    H1DTwoScale,
    L2ExtU1,
    H1ExtU1,
    DiagF,
    DiagG,
}

impl ErrorColumn {
    pub const ALL: [Self; 7] = [
        Self::L2Box,
        Self::H1Ext,
        Self::H1DTwoScale,
        Self::L2ExtU1,
        Self::H1ExtU1,
        Self::DiagF,
        Self::DiagG,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::L2Box => "err_L2_box",
            Self::H1Ext => "err_H1_ext",
            Self::H1DTwoScale => "err_H1_D_2scale",
            Self::L2ExtU1 => "err_L2_ext_U1",
            Self::H1ExtU1 => "err_H1_ext_U1",
            Self::DiagF => "diag_F",
            Self::DiagG => "diag_G",
        }
    }

    pub fn value(self, row: &ErrorRow) -> f64 {
        match self {
            Self::L2Box => row.err_l2_box,
            Self::H1Ext => row.err_h1_ext,
            Self::H1DTwoScale => row.err_h1_d_two_scale,
            Self::L2ExtU1 => row.err_l2_ext_u1,
            Self::H1ExtU1 => row.err_h1_ext_u1,
            Self::DiagF => row.diag_f,
            Self::DiagG => row.diag_g,
        }
    }

    /// Model each column is fitted against.
    pub fn model(self) -> RateModel {
        match self {
            Self::H1DTwoScale => RateModel::TWO_SCALE,
            Self::L2ExtU1 | Self::H1ExtU1 => RateModel::EXTERIOR_FIRST_ORDER,
            Self::L2Box | Self::H1Ext | Self::DiagF | Self::DiagG => RateModel::L2_BULK,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Slope of `log RMS error` against `log predictor`; 1 means the error
    /// follows the model.
    pub exponent: f64,
    /// Root-mean-square residual of the regression in log space.
    pub residual: f64,
    pub intercept: f64,
}

/// Root-mean-square over seeds of `column` per distinct `ε`, in decreasing
/// `ε` order.
pub fn rms_by_epsilon(rows: &[ErrorRow], column: ErrorColumn) -> Vec<(f64, f64)> {
    let mut eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    eps.into_iter()
        .map(|e| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.epsilon == e)
                .map(|r| column.value(r))
                .collect();
            (
                e,
                (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt(),
            )
        })
        .collect()
}

/// Ordinary least squares of `ln y` on `ln x`.
pub fn log_log_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }
    if points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::InvalidInput(
            "log-log fit needs positive values".into(),
        ));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData { needed: 3, got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(RateFit {
        exponent: slope,
        residual: (ss / n).sqrt(),
        intercept,
    })
}

/// Fits the ensemble RMS of `column` against `model`; needs three distinct
/// `ε`.
pub fn fit_rate(rows: &[ErrorRow], column: ErrorColumn, model: RateModel) -> Result<RateFit> {
    let rms = rms_by_epsilon(rows, column);
    if rms.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: rms.len(),
        });
    }
    let points: Vec<(f64, f64)> = rms.iter().map(|&(e, v)| (model.predictor(e), v)).collect();
    log_log_fit(&points)
}
