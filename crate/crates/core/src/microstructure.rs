//! Random hard-core disk microstructures on a periodic square and the
//! piecewise-constant coefficient fields they induce.
//!
//! Inclusion centers follow a Matérn type-II process: a Poisson proposal on
//! the torus `[0, L)²` where each point carries an independent uniform mark,
//! and a point survives iff no other proposed point within the hard-core
//! distance (torus metric) has a strictly smaller mark. The retained
//! intensity has a closed form, which is what [`calibrate_intensity`] inverts.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

pub type Point = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessConfig {
    /// Poisson proposal intensity (points per unit area).
    pub proposal_intensity: f64,
    /// Minimum center-to-center distance, torus metric.
    pub hardcore_distance: f64,
    pub inclusion_radius: f64,
    /// Torus side `L`.
    pub period: f64,
    pub seed: u64,
}

impl ProcessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.proposal_intensity >= 0.0 && self.proposal_intensity.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "proposal intensity must be finite and >= 0, got {}",
                self.proposal_intensity
            )));
        }
        if !(self.inclusion_radius > 0.0) {
            return Err(Error::InvalidInput("inclusion radius must be > 0".into()));
        }
        if self.hardcore_distance < 2.0 * self.inclusion_radius {
            return Err(Error::InvalidInput(format!(
                "hard-core distance {} below inclusion diameter {}",
                self.hardcore_distance,
                2.0 * self.inclusion_radius
            )));
        }
        if !(self.period > 2.0 * self.hardcore_distance) {
            return Err(Error::InvalidInput(format!(
                "period {} must exceed twice the hard-core distance {}",
                self.period, self.hardcore_distance
            )));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Wraps a coordinate into `[0, period)`.
#[inline]
pub fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid can round up to exactly `period` for tiny negative inputs
    if r >= period {
        0.0
    } else {
        r
    }
}

#[inline]
fn torus_delta(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).abs() % period;
    d.min(period - d)
}

#[inline]
pub fn torus_distance(p: Point, q: Point, period: f64) -> f64 {
    torus_delta(p[0], q[0], period).hypot(torus_delta(p[1], q[1], period))
}

/// Uniform bucket grid on the torus used for neighbor queries.
#[derive(Debug, Clone)]
struct CellIndex {
    cells_per_side: usize,
    cell_size: f64,
    buckets: Vec<Vec<usize>>,
}

impl CellIndex {
    fn new(points: &[Point], period: f64, min_cell: f64) -> Self {
        let cells_per_side = ((period / min_cell).floor() as usize).max(1);
        let cell_size = period / cells_per_side as f64;
        let mut buckets = vec![Vec::new(); cells_per_side * cells_per_side];
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = Self::cell_of(*p, cell_size, cells_per_side);
            buckets[cy * cells_per_side + cx].push(i);
        }
        Self {
            cells_per_side,
            cell_size,
            buckets,
        }
    }

    fn cell_of(p: Point, cell_size: f64, n: usize) -> (usize, usize) {
        let cx = ((p[0] / cell_size) as usize).min(n - 1);
        let cy = ((p[1] / cell_size) as usize).min(n - 1);
        (cx, cy)
    }

    /// Calls `f` once for every point in the 3×3 block of cells around `p`.
    fn for_each_near(&self, p: Point, mut f: impl FnMut(usize)) {
        let n = self.cells_per_side;
        let (cx, cy) = Self::cell_of(p, self.cell_size, n);
        let span: &[isize] = if n >= 3 { &[-1, 0, 1] } else { &[0, 1, 2] };
        let mut seen = [usize::MAX; 9];
        let mut k = 0;
        for &dy in span {
            for &dx in span {
                let ix = if n >= 3 {
                    (cx as isize + dx).rem_euclid(n as isize) as usize
                } else {
                    dx as usize
                };
                let iy = if n >= 3 {
                    (cy as isize + dy).rem_euclid(n as isize) as usize
                } else {
                    dy as usize
                };
                if ix >= n || iy >= n {
                    continue;
                }
                let cell = iy * n + ix;
                if seen[..k].contains(&cell) {
                    continue;
                }
                seen[k] = cell;
                k += 1;
                for &i in &self.buckets[cell] {
                    f(i);
                }
            }
        }
    }
}

/// A realization of the inclusion set on the torus `[0, L)²`.
#[derive(Debug, Clone)]
pub struct Microstructure {
    centers: Vec<Point>,
    inclusion_radius: f64,
    period: f64,
    seed: u64,
    index: CellIndex,
}

impl PartialEq for Microstructure {
    fn eq(&self, other: &Self) -> bool {
        self.centers == other.centers
            && self.inclusion_radius == other.inclusion_radius
            && self.period == other.period
            && self.seed == other.seed
    }
}

impl Microstructure {
    pub fn new(centers: Vec<Point>, inclusion_radius: f64, period: f64, seed: u64) -> Result<Self> {
        if !(inclusion_radius > 0.0) || !(period > 4.0 * inclusion_radius) {
            return Err(Error::InvalidInput(format!(
                "radius {inclusion_radius} incompatible with period {period}"
            )));
        }
        if let Some(p) = centers
            .iter()
            .find(|p| !(0.0..period).contains(&p[0]) || !(0.0..period).contains(&p[1]))
        {
            return Err(Error::InvalidInput(format!(
                "center ({}, {}) outside [0, {period})²",
                p[0], p[1]
            )));
        }
        let index = CellIndex::new(&centers, period, 2.0 * inclusion_radius);
        let ms = Self {
            centers,
            inclusion_radius,
            period,
            seed,
            index,
        };
        let d = ms.min_pair_distance();
        if d < 2.0 * inclusion_radius {
            return Err(Error::InvalidInput(format!(
                "inclusions overlap: centers {d} apart, diameter {}",
                2.0 * inclusion_radius
            )));
        }
        Ok(ms)
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn inclusion_radius(&self) -> f64 {
        self.inclusion_radius
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Whether the unit-scale point `y` (any real coordinates) lies inside
    /// the periodized inclusion set.
    pub fn contains(&self, y: Point) -> bool {
        let p = [wrap(y[0], self.period), wrap(y[1], self.period)];
        let r = self.inclusion_radius;
        let mut inside = false;
        self.index.for_each_near(p, |i| {
            if !inside && torus_distance(p, self.centers[i], self.period) < r {
                inside = true;
            }
        });
        inside
    }

    /// Smallest pairwise torus distance between centers (`inf` for fewer
    /// than two centers).
    pub fn min_pair_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, &p) in self.centers.iter().enumerate() {
            for q in &self.centers[i + 1..] {
                best = best.min(torus_distance(p, *q, self.period));
            }
        }
        best
    }

    /// Plain-text serialization: a `matern2 L=.. r=.. seed=..` header then
    /// one `x y` line per center.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "matern2 L={} r={} seed={}\n",
            self.period, self.inclusion_radius, self.seed
        );
        for c in &self.centers {
            let _ = writeln!(s, "{} {}", c[0], c[1]);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty microstructure file".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("matern2") {
            return Err(Error::InvalidInput(format!("bad header: {header}")));
        }
        let (mut period, mut radius, mut seed) = (None, None, None);
        for f in fields {
            let (k, v) = f
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("bad header field: {f}")))?;
            let bad = || Error::InvalidInput(format!("bad header value: {f}"));
            match k {
                "L" => period = Some(v.parse::<f64>().map_err(|_| bad())?),
                "r" => radius = Some(v.parse::<f64>().map_err(|_| bad())?),
                "seed" => seed = Some(v.parse::<u64>().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        let missing = || Error::InvalidInput(format!("incomplete header: {header}"));
        let (period, radius, seed) = (
            period.ok_or_else(missing)?,
            radius.ok_or_else(missing)?,
            seed.ok_or_else(missing)?,
        );
        let mut centers = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) => centers.push([x, y]),
                _ => return Err(Error::InvalidInput(format!("bad center line: {line}"))),
            }
        }
        Self::new(centers, radius, period, seed)
    }
}

/// Samples a Matérn type-II hard-core process on the torus.
pub fn sample_matern2(config: &ProcessConfig) -> Result<Microstructure> {
    config.validate()?;
    let l = config.period;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mean = config.proposal_intensity * l * l;
    let count = if mean > 0.0 {
        let poisson = Poisson::new(mean)
            .map_err(|e| Error::InvalidInput(format!("poisson mean {mean}: {e}")))?;
        poisson.sample(&mut rng) as usize
    } else {
        0
    };

    let mut proposals = Vec::with_capacity(count);
    let mut marks = Vec::with_capacity(count);
    for _ in 0..count {
        let x = wrap(rng.random::<f64>() * l, l);
        let y = wrap(rng.random::<f64>() * l, l);
        proposals.push([x, y]);
        marks.push(rng.random::<f64>());
    }

    let delta = config.hardcore_distance;
    let index = CellIndex::new(&proposals, l, delta);
    let centers = proposals
        .iter()
        .enumerate()
        .filter(|&(i, &p)| {
            let mut keep = true;
            index.for_each_near(p, |j| {
                if keep
                    && j != i
                    && marks[j] < marks[i]
                    && torus_distance(p, proposals[j], l) <= delta
                {
                    keep = false;
                }
            });
            keep
        })
        .map(|(_, &p)| p)
        .collect();

    Microstructure::new(centers, config.inclusion_radius, l, config.seed)
}

/// Retained intensity of a Matérn II process with proposal intensity
/// `lambda` and hard-core distance `delta`.
pub fn retained_intensity(lambda: f64, delta: f64) -> f64 {
    let area = PI * delta * delta;
    if lambda * area < 1e-12 {
        return lambda;
    }
    -(-lambda * area).exp_m1() / area
}

/// Largest volume fraction a Matérn II process can reach:
/// `radius² / hardcore²`, approached as the proposal intensity diverges.
pub fn saturation_fraction(radius: f64, hardcore: f64) -> f64 {
    (radius / hardcore).powi(2)
}

/// Proposal intensity whose expected retained volume fraction equals
/// `target_vf`.
pub fn calibrate_intensity(target_vf: f64, radius: f64, hardcore: f64) -> Result<f64> {
    if !(radius > 0.0) || hardcore < 2.0 * radius {
        return Err(Error::InvalidInput(format!(
            "radius {radius} and hard-core distance {hardcore} are inconsistent"
        )));
    }
    if !(target_vf >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "volume fraction {target_vf} < 0"
        )));
    }
    let limit = saturation_fraction(radius, hardcore);
    if target_vf >= limit {
        return Err(Error::UnreachableFraction {
            target: target_vf,
            limit,
        });
    }
    if target_vf == 0.0 {
        return Ok(0.0);
    }
    let area = PI * hardcore * hardcore;
    Ok(-(-target_vf / limit).ln_1p() / area)
}

/// Exact covered fraction of the torus (disks never overlap).
pub fn volume_fraction(ms: &Microstructure) -> f64 {
    let r = ms.inclusion_radius();
    let l = ms.period();
    ms.len() as f64 * PI * r * r / (l * l)
}

/// Constituent parameters: matrix phase `M`, inclusion phase `S` and the
/// homogeneous background outside the scatterer.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumParams {
    pub a_matrix: Mat2,
    pub a_inclusion: Mat2,
    pub n_matrix: f64,
    pub n_inclusion: f64,
    pub n_background: f64,
}

impl MediumParams {
    pub fn isotropic(
        a_matrix: f64,
        a_inclusion: f64,
        n_matrix: f64,
        n_inclusion: f64,
        n_background: f64,
    ) -> Self {
        Self {
            a_matrix: scaled_identity(a_matrix),
            a_inclusion: scaled_identity(a_inclusion),
            n_matrix,
            n_inclusion,
            n_background,
        }
    }

    /// `(a_M, a_S) = (2.0, 3.5)`, `(n_M, n_S) = (1.5, 0.5)`, `n_0 = 1`.
    pub fn reference() -> Self {
        Self::isotropic(2.0, 3.5, 1.5, 0.5, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [
            ("a_matrix", &self.a_matrix),
            ("a_inclusion", &self.a_inclusion),
        ] {
            if a[0][1] != a[1][0] {
                return Err(Error::InvalidInput(format!("{name} is not symmetric")));
            }
            if !(min_eigenvalue(a) > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} is not positive definite"
                )));
            }
        }
        for (name, n) in [
            ("n_matrix", self.n_matrix),
            ("n_inclusion", self.n_inclusion),
            ("n_background", self.n_background),
        ] {
            if !(n > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }

    /// Unit-scale coefficients `(a(y), n(y))` of the infinite medium.
    pub fn at(&self, ms: &Microstructure, y: Point) -> (Mat2, f64) {
        if ms.contains(y) {
            (self.a_inclusion, self.n_inclusion)
        } else {
            (self.a_matrix, self.n_matrix)
        }
    }
}

pub fn scaled_identity(s: f64) -> Mat2 {
    [[s, 0.0], [0.0, s]]
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn symmetric_eigenvalues(a: &Mat2) -> [f64; 2] {
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let half_diff = 0.5 * (a[0][0] - a[1][1]);
    let off = 0.5 * (a[0][1] + a[1][0]);
    let rad = half_diff.hypot(off);
    [mean - rad, mean + rad]
}

pub fn min_eigenvalue(a: &Mat2) -> f64 {
    symmetric_eigenvalues(a)[0]
}

/// Axis-aligned square `center ± side/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Square {
    pub center: Point,
    pub side: f64,
}

impl Square {
    pub fn centered(side: f64) -> Self {
        Self {
            center: [0.0, 0.0],
            side,
        }
    }

    /// Open-set membership.
    pub fn contains(&self, x: Point) -> bool {
        let h = 0.5 * self.side;
        (x[0] - self.center[0]).abs() < h && (x[1] - self.center[1]).abs() < h
    }

    /// Euclidean distance from `x` to the closed square (0 inside).
    pub fn distance(&self, x: Point) -> f64 {
        let h = 0.5 * self.side;
        let dx = ((x[0] - self.center[0]).abs() - h).max(0.0);
        let dy = ((x[1] - self.center[1]).abs() - h).max(0.0);
        dx.hypot(dy)
    }

    pub fn min_corner(&self) -> Point {
        [
            self.center[0] - 0.5 * self.side,
            self.center[1] - 0.5 * self.side,
        ]
    }

    pub fn max_corner(&self) -> Point {
        [
            self.center[0] + 0.5 * self.side,
            self.center[1] + 0.5 * self.side,
        ]
    }
}

/// The rescaled medium `a_ε(x) = a(x/ε)` inside the scatterer square and
/// `(Id, n_0)` outside it.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientField<'a> {
    pub microstructure: &'a Microstructure,
    pub params: &'a MediumParams,
    pub epsilon: f64,
    pub scatterer: Square,
}

impl CoefficientField<'_> {
    pub fn coefficient_at(&self, x: Point) -> (Mat2, f64) {
        if !self.scatterer.contains(x) {
            return (IDENTITY, self.params.n_background);
        }
        let y = [x[0] / self.epsilon, x[1] / self.epsilon];
        self.params.at(self.microstructure, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(intensity: f64, seed: u64) -> ProcessConfig {
        ProcessConfig {
            proposal_intensity: intensity,
            hardcore_distance: 1.05,
            inclusion_radius: 0.5,
            period: 20.0,
            seed,
        }
    }

    #[test]
    fn zero_intensity_gives_empty_sample() {
        let ms = sample_matern2(&config(0.0, 3)).unwrap();
        assert!(ms.is_empty());
        assert_eq!(volume_fraction(&ms), 0.0);
    }

    #[test]
    fn hardcore_holds_over_many_seeds() {
        for seed in 0..100 {
            let ms = sample_matern2(&config(1.5, seed)).unwrap();
            assert!(ms.min_pair_distance() > 1.05, "seed {seed}");
            assert!(ms
                .centers()
                .iter()
                .all(|c| (0.0..20.0).contains(&c[0]) && (0.0..20.0).contains(&c[1])));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_matern2(&config(1.0, 42)).unwrap();
        let b = sample_matern2(&config(1.0, 42)).unwrap();
        let bits = |m: &Microstructure| {
            m.centers()
                .iter()
                .flat_map(|c| [c[0].to_bits(), c[1].to_bits()])
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
        let c = sample_matern2(&config(1.0, 43)).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn volume_fraction_of_hundred_disks() {
        let centers = (0..100)
            .map(|i| [(i % 10) as f64 * 5.0 + 1.0, (i / 10) as f64 * 5.0 + 1.0])
            .collect();
        let ms = Microstructure::new(centers, 0.5, 50.0, 0).unwrap();
        assert!((volume_fraction(&ms) - 100.0 * PI * 0.25 / 2500.0).abs() < 1e-15);
        assert!((volume_fraction(&ms) - 0.0314159).abs() < 1e-7);
    }

    #[test]
    fn calibration_edge_cases() {
        assert_eq!(calibrate_intensity(0.0, 0.5, 1.05).unwrap(), 0.0);
        match calibrate_intensity(0.25, 0.5, 1.05) {
            Err(Error::UnreachableFraction { limit, .. }) => {
                assert!((limit - 0.25 / 1.1025).abs() < 1e-15)
            }
            other => panic!("expected UnreachableFraction, got {other:?}"),
        }
        let lambda = calibrate_intensity(0.15, 0.5, 1.05).unwrap();
        let vf = retained_intensity(lambda, 1.05) * PI * 0.25;
        assert!((vf - 0.15).abs() < 1e-14);
    }

    #[test]
    fn coefficient_outside_scatterer_is_background() {
        let ms = sample_matern2(&config(1.0, 1)).unwrap();
        let params = MediumParams::reference();
        let field = CoefficientField {
            microstructure: &ms,
            params: &params,
            epsilon: 0.1,
            scatterer: Square::centered(2.0),
        };
        assert_eq!(field.coefficient_at([1.5, 0.0]), (IDENTITY, 1.0));
        assert_eq!(field.coefficient_at([0.0, -1.01]), (IDENTITY, 1.0));
    }

    #[test]
    fn coefficient_inside_inclusion_takes_inclusion_values() {
        let ms = Microstructure::new(vec![[3.0, 4.0]], 0.5, 10.0, 0).unwrap();
        let params = MediumParams::reference();
        let field = CoefficientField {
            microstructure: &ms,
            params: &params,
            epsilon: 0.1,
            scatterer: Square::centered(2.0),
        };
        assert_eq!(
            field.coefficient_at([0.3, 0.4]),
            (scaled_identity(3.5), 0.5)
        );
        assert_eq!(
            field.coefficient_at([0.3, 0.46]),
            (scaled_identity(2.0), 1.5)
        );
        // wrap: -0.7/0.1 = -7 ≡ 3
        assert_eq!(
            field.coefficient_at([-0.7, 0.4]),
            (scaled_identity(3.5), 0.5)
        );
    }

    #[test]
    fn text_round_trip() {
        let ms = sample_matern2(&config(1.0, 9)).unwrap();
        let text = ms.to_text();
        assert!(text.starts_with("matern2 L=20 r=0.5 seed=9\n"));
        let back = Microstructure::from_text(&text).unwrap();
        assert_eq!(back.centers(), ms.centers());
        assert_eq!(back.seed(), 9);
        assert!(Microstructure::from_text("poisson L=1 r=0.1 seed=0\n").is_err());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = config(1.0, 0);
        c.hardcore_distance = 0.9;
        assert!(sample_matern2(&c).is_err());
        let mut c = config(1.0, 0);
        c.period = 2.0;
        assert!(sample_matern2(&c).is_err());
    }

    #[test]
    fn spd_check() {
        let mut p = MediumParams::reference();
        assert!(p.validate().is_ok());
        p.a_inclusion = [[1.0, 2.0], [2.0, 1.0]];
        assert!(p.validate().is_err());
    }
}
