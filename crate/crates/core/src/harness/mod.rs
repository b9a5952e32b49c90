//! Configuration, the study driver, rate fits and report files.

mod config;
mod rates;
mod report;
mod seed;
mod sweep;

pub use config::{Config, ConfigFile, MeshPolicy};
pub use rates::{
    fit_rate, log_log_fit, mu, rms_by_epsilon, ErrorColumn, LogFactor, RateFit, RateModel,
};
pub use report::{
    decay_svg, errors_csv, failures_csv, homog_csv, parse_errors_csv, rates_csv, render_from_rows,
    rerender, timings_csv, write_report, ERRORS_HEADER,
};
pub use seed::derive_seed;
pub use sweep::{
    ensemble_settings, open_cache, rates_of, run_sweep, RowFailure, RowTiming, SweepReport,
};
