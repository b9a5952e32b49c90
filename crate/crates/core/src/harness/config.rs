//! Plain-text configuration: one `section.key = value` per line, `#` starts
//! a comment, lists are comma separated. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::microstructure::{calibrate_intensity, MediumParams, ProcessConfig};

/// Raw `key → (value, line)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, (String, usize)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `section.key = value`",
                    i + 1
                )));
            };
            let key = key.trim();
            let valid = key.split_once('.').is_some_and(|(s, k)| {
                !s.is_empty()
                    && !k.is_empty()
                    && key
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
            });
            if !valid {
                return Err(Error::Config(format!(
                    "line {}: malformed key {key:?}",
                    i + 1
                )));
            }
            if entries
                .insert(key.to_string(), (value.trim().to_string(), i + 1))
                .is_some()
            {
                return Err(Error::Config(format!(
                    "line {}: duplicate key {key}",
                    i + 1
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("line {line}: cannot parse {key} = {v:?}"))),
        }
    }

    fn take_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| {
                    Error::Config(format!("line {line}: cannot parse list {key} = {v:?}"))
                }),
        }
    }

    fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((k, (_, line))) => Err(Error::Config(format!("line {line}: unknown key {k}"))),
        }
    }
}

/// How the box mesh step follows `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshPolicy {
    /// Box step `ε/η`, torus step `1/η`: box nodes map onto torus nodes.
    Matched { eta: f64 },
    /// The same box step for every `ε`.
    Fixed { step: f64 },
}

/// Every setting of the command line tool. Defaults reproduce the desk-scale
/// study.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub master_seed: u64,
    pub params: MediumParams,
    pub volume_fraction: f64,
    /// Overrides the calibration from `volume_fraction` when set.
    pub intensity: Option<f64>,
    pub hardcore_distance: f64,
    pub inclusion_radius: f64,
    pub period: f64,
    pub massive_t: f64,
    /// Torus step; implied by the policy in matched mode.
    pub torus_step: Option<f64>,
    pub cache_dir: Option<PathBuf>,
    pub wavenumber: f64,
    pub incident_angle: f64,
    pub box_side: f64,
    pub scatterer_side: f64,
    pub epsilons: Vec<f64>,
    pub seeds: usize,
    pub mesh_policy: MeshPolicy,
    /// Defaults to a quarter of the box margin.
    pub alpha: Option<f64>,
    pub workers: usize,
    pub record_runtime: bool,
    pub homogenize_realizations: usize,
    pub solve_epsilon: f64,
    pub solve_points: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            master_seed: 2024,
            params: MediumParams::reference(),
            volume_fraction: 0.226,
            intensity: None,
            hardcore_distance: 1.05,
            inclusion_radius: 0.5,
            period: 40.0,
            massive_t: 1e7,
            torus_step: None,
            cache_dir: None,
            wavenumber: 5.0,
            incident_angle: 0.0,
            box_side: 4.0,
            scatterer_side: 2.0,
            epsilons: vec![0.125, 0.1, 0.08, 0.064],
            seeds: 8,
            mesh_policy: MeshPolicy::Matched { eta: 8.0 },
            alpha: None,
            workers: 1,
            record_runtime: false,
            homogenize_realizations: 8,
            solve_epsilon: 0.2,
            solve_points: None,
        }
    }
}

impl Config {
    pub fn from_file(mut f: ConfigFile) -> Result<Self> {
        let mut c = Self::default();
        macro_rules! set {
            ($key:literal, $field:expr) => {
                if let Some(v) = f.take($key)? {
                    $field = v;
                }
            };
        }
        set!("run.seed", c.master_seed);
        let iso = |x: f64| crate::microstructure::scaled_identity(x);
        if let Some(v) = f.take::<f64>("medium.a_matrix")? {
            c.params.a_matrix = iso(v);
        }
        if let Some(v) = f.take::<f64>("medium.a_inclusion")? {
            c.params.a_inclusion = iso(v);
        }
        set!("medium.n_matrix", c.params.n_matrix);
        set!("medium.n_inclusion", c.params.n_inclusion);
        set!("medium.n_background", c.params.n_background);
        set!("process.volume_fraction", c.volume_fraction);
        c.intensity = f.take("process.intensity")?;
        set!("process.hardcore", c.hardcore_distance);
        set!("process.radius", c.inclusion_radius);
        set!("process.period", c.period);
        set!("correctors.massive_t", c.massive_t);
        c.torus_step = f.take("correctors.mesh_step")?;
        c.cache_dir = f
            .take::<String>("correctors.cache_dir")?
            .filter(|s| !s.is_empty())
            .map(PathBuf::from);
        set!("scattering.k", c.wavenumber);
        set!("scattering.angle", c.incident_angle);
        set!("scattering.box_side", c.box_side);
        set!("scattering.scatterer_side", c.scatterer_side);
        if let Some(v) = f.take_list("sweep.epsilons")? {
            c.epsilons = v;
        }
        set!("sweep.seeds", c.seeds);
        let policy: Option<String> = f.take("sweep.mesh_policy")?;
        let eta: Option<f64> = f.take("sweep.eta")?;
        let step: Option<f64> = f.take("sweep.mesh_step")?;
        c.mesh_policy = match policy.as_deref().unwrap_or("matched") {
            "matched" => {
                if step.is_some() {
                    return Err(Error::Config(
                        "sweep.mesh_step requires sweep.mesh_policy = fixed".into(),
                    ));
                }
                MeshPolicy::Matched {
                    eta: eta.unwrap_or(8.0),
                }
            }
            "fixed" => {
                if eta.is_some() {
                    return Err(Error::Config(
                        "sweep.eta requires sweep.mesh_policy = matched".into(),
                    ));
                }
                let step = step.ok_or_else(|| {
                    Error::Config("fixed mesh policy needs sweep.mesh_step".into())
                })?;
                MeshPolicy::Fixed { step }
            }
            other => return Err(Error::Config(format!("unknown mesh policy {other:?}"))),
        };
        c.alpha = f.take("sweep.alpha")?;
        set!("sweep.workers", c.workers);
        set!("sweep.record_runtime", c.record_runtime);
        set!("homogenize.realizations", c.homogenize_realizations);
        set!("solve.epsilon", c.solve_epsilon);
        c.solve_points = f.take::<String>("solve.points")?.map(PathBuf::from);
        f.finish()?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_file(ConfigFile::load(path)?)
    }

    /// Checks every invariant that can be checked without solving.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.params
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return bad("sweep.epsilons must be positive".into());
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return bad("sweep.epsilons must be strictly decreasing".into());
        }
        if self.seeds == 0 || self.homogenize_realizations == 0 {
            return bad("realization counts must be >= 1".into());
        }
        if self.workers == 0 {
            return bad("sweep.workers must be >= 1".into());
        }
        if !(self.wavenumber > 0.0) || !(self.massive_t > 0.0) || !(self.solve_epsilon > 0.0) {
            return bad("k, T and solve.epsilon must be > 0".into());
        }
        if !(self.scatterer_side > 0.0 && self.box_side > self.scatterer_side) {
            return bad("the box must be larger than the scatterer".into());
        }
        let smallest = self.epsilons[self.epsilons.len() - 1];
        if self.scatterer_side / smallest > self.period {
            return bad(format!(
                "process.period = {} is smaller than scatterer_side / epsilon = {}; the medium would repeat inside the scatterer",
                self.period,
                self.scatterer_side / smallest
            ));
        }
        let alpha = self.alpha();
        if !(alpha > 0.0 && alpha < self.margin()) {
            return bad(format!(
                "sweep.alpha = {alpha} must lie in (0, {})",
                self.margin()
            ));
        }
        match self.mesh_policy {
            MeshPolicy::Matched { eta } => {
                if eta < 8.0 {
                    return bad(format!("sweep.eta = {eta} must be >= 8"));
                }
                if let Some(h) = self.torus_step {
                    if (h * eta - 1.0).abs() > 1e-12 {
                        return bad(format!(
                            "correctors.mesh_step = {h} conflicts with 1/eta in matched mode"
                        ));
                    }
                }
            }
            MeshPolicy::Fixed { step } => {
                if !(step > 0.0) {
                    return bad("sweep.mesh_step must be > 0".into());
                }
                if let Some(e) = self.epsilons.iter().find(|e| step > *e / 8.0) {
                    return bad(format!(
                        "fixed step {step} exceeds epsilon/8 for epsilon = {e}"
                    ));
                }
            }
        }
        self.process().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn margin(&self) -> f64 {
        0.5 * (self.box_side - self.scatterer_side)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(0.25 * self.margin())
    }

    /// Box mesh step at scale `epsilon`.
    pub fn box_step(&self, epsilon: f64) -> f64 {
        match self.mesh_policy {
            MeshPolicy::Matched { eta } => epsilon / eta,
            MeshPolicy::Fixed { step } => step,
        }
    }

    pub fn torus_step(&self) -> f64 {
        match (self.mesh_policy, self.torus_step) {
            (MeshPolicy::Matched { eta }, _) => 1.0 / eta,
            (MeshPolicy::Fixed { .. }, Some(h)) => h,
            (MeshPolicy::Fixed { .. }, None) => 0.05,
        }
    }

    /// Process template (seed 0) with the intensity calibrated to the target
    /// volume fraction unless given explicitly.
    pub fn process(&self) -> Result<ProcessConfig> {
        let intensity = match self.intensity {
            Some(i) => i,
            None => calibrate_intensity(
                self.volume_fraction,
                self.inclusion_radius,
                self.hardcore_distance,
            )?,
        };
        let p = ProcessConfig {
            proposal_intensity: intensity,
            hardcore_distance: self.hardcore_distance,
            inclusion_radius: self.inclusion_radius,
            period: self.period,
            seed: 0,
        };
        p.validate()?;
        Ok(p)
    }
}
