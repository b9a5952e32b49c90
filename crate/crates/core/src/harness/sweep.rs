//! The full study: ensemble of correctors, homogenized coefficients, then
//! one error row per `(seed, ε)`.

use rayon::prelude::*;

use super::config::Config;
use super::rates::{fit_rate, ErrorColumn, RateFit};
use crate::correctors::{
    solve_realizations, CorrectorCache, EnsembleSettings, HomogenizedCoeffs, Realization,
};
use crate::error::{Error, Result};
use crate::expansion::{evaluate_realization, solve_u0, ErrorRow, ExpansionInputs};
use crate::fem::build_box_mesh;
use crate::microstructure::Square;
use crate::scattering::{PlaneWave, TruncationClosure};

/// A row that could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct RowFailure {
    pub epsilon: f64,
    pub seed: u64,
    pub reason: String,
}

/// Wall time of one row, kept apart from the reproducible outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowTiming {
    pub epsilon: f64,
    pub seed: u64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    /// Ordered by realization index, then by decreasing `ε`.
    pub rows: Vec<ErrorRow>,
    pub failures: Vec<RowFailure>,
    pub timings: Vec<RowTiming>,
    pub homogenized: HomogenizedCoeffs,
    pub expected_rows: usize,
}

impl SweepReport {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty() && self.rows.len() == self.expected_rows
    }

    /// Fit of every error column against its model (`None` when the fit is
    /// not possible).
    pub fn rates(&self) -> Vec<(ErrorColumn, Option<RateFit>)> {
        rates_of(&self.rows)
    }
}

pub fn rates_of(rows: &[ErrorRow]) -> Vec<(ErrorColumn, Option<RateFit>)> {
    ErrorColumn::ALL
        .iter()
        .map(|&c| (c, fit_rate(rows, c, c.model()).ok()))
        .collect()
}

pub fn ensemble_settings(config: &Config, n_realizations: usize) -> Result<EnsembleSettings> {
    Ok(EnsembleSettings {
        process: config.process()?,
        params: config.params.clone(),
        massive_t: config.massive_t,
        mesh_step: config.torus_step(),
        n_realizations,
        master_seed: config.master_seed,
        workers: config.workers,
    })
}

pub fn open_cache(config: &Config) -> Result<Option<CorrectorCache>> {
    config
        .cache_dir
        .as_ref()
        .map(CorrectorCache::new)
        .transpose()
}

/// Runs the study. Failures of single rows (or of a whole `ε` when its
/// homogenized solve fails) are recorded and the run continues; the result
/// is independent of `config.workers`.
pub fn run_sweep(config: &Config) -> Result<SweepReport> {
    config.validate()?;
    let settings = ensemble_settings(config, config.seeds)?;
    let cache = open_cache(config)?;
    let outcomes = solve_realizations(&settings, cache.as_ref())?;
    let mut failures = Vec::new();
    let mut realizations: Vec<Realization> = Vec::new();
    for (m, r) in outcomes.into_iter().enumerate() {
        match r {
            Ok(r) => realizations.push(r),
            Err(e) => {
                let seed = settings.realization_seed(m);
                for &epsilon in &config.epsilons {
                    failures.push(RowFailure {
                        epsilon,
                        seed,
                        reason: e.to_string(),
                    });
                }
            }
        }
    }
    if realizations.is_empty() {
        return Err(Error::InvalidInput("every realization failed".into()));
    }
    let homogenized =
        HomogenizedCoeffs::from_realizations(realizations.iter().map(|r| r.coeffs).collect())?;
    let incident = PlaneWave::from_angle(config.wavenumber, config.incident_angle)?;
    let closure = TruncationClosure {
        box_side: config.box_side,
        background_n: config.params.n_background,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;

    // (realization position, ε index) → outcome
    let mut results: Vec<((usize, usize), Result<ErrorRow>)> = Vec::new();
    for (j, &epsilon) in config.epsilons.iter().enumerate() {
        let scatterer = Square::centered(config.scatterer_side);
        let problem = build_box_mesh(config.box_side, config.box_step(epsilon), Some(scatterer))
            .and_then(|space| solve_u0(space, closure, &homogenized, &incident));
        let problem = match problem {
            Ok(p) => p,
            Err(e) => {
                let reason = e.to_string();
                for (i, _) in realizations.iter().enumerate() {
                    results.push(((i, j), Err(Error::InvalidInput(reason.clone()))));
                }
                continue;
            }
        };
        let rows: Vec<Result<ErrorRow>> = pool.install(|| {
            realizations
                .par_iter()
                .map(|r| {
                    let inputs = ExpansionInputs {
                        microstructure: &r.microstructure,
                        correctors: &r.correctors,
                        params: &config.params,
                        epsilon,
                        seed: r.seed,
                    };
                    evaluate_realization(&problem, inputs, config.alpha())
                })
                .collect()
        });
        results.extend(rows.into_iter().enumerate().map(|(i, r)| ((i, j), r)));
    }
    results.sort_by_key(|(key, _)| *key);

    let mut rows = Vec::new();
    let mut timings = Vec::new();
    for ((i, j), r) in results {
        let (epsilon, seed) = (config.epsilons[j], realizations[i].seed);
        match r {
            Ok(mut row) => {
                timings.push(RowTiming {
                    epsilon,
                    seed,
                    runtime_s: row.runtime_s,
                });
                if !config.record_runtime {
                    row.runtime_s = 0.0;
                }
                rows.push(row);
            }
            Err(e) => failures.push(RowFailure {
                epsilon,
                seed,
                reason: e.to_string(),
            }),
        }
    }
    Ok(SweepReport {
        rows,
        failures,
        timings,
        homogenized,
        expected_rows: config.seeds * config.epsilons.len(),
    })
}
