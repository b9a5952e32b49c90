use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fem::{
    assemble, assemble_load, integrate_boundary_load, Coefficients, Factorization, FeSpace,
    FieldP1, Load,
};
use crate::microstructure::{Mat2, Point, Square};

/// `u^inc(x) = A exp(i k√n₀ θ·x)` in a background of index `n₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    /// Free-space wavenumber `k`.
    pub wavenumber: f64,
    /// Unit propagation direction `θ`.
    pub direction: Point,
    pub amplitude: Complex64,
}

impl PlaneWave {
    pub fn new(wavenumber: f64, direction: Point) -> Result<Self> {
        let norm = direction[0].hypot(direction[1]);
        if (norm - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidInput(format!(
                "direction must be a unit vector, |θ| = {norm}"
            )));
        }
        if !(wavenumber > 0.0 && wavenumber.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "wavenumber must be > 0, got {wavenumber}"
            )));
        }
        Ok(Self {
            wavenumber,
            direction,
            amplitude: Complex64::new(1.0, 0.0),
        })
    }

    /// Direction `(cos α, sin α)`.
    pub fn from_angle(wavenumber: f64, angle: f64) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        let n = c.hypot(s);
        Self::new(wavenumber, [c / n, s / n])
    }

    pub fn with_amplitude(self, amplitude: Complex64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn value(&self, n0: f64, x: Point) -> Complex64 {
        let kappa = self.wavenumber * n0.sqrt();
        let phase = kappa * (self.direction[0] * x[0] + self.direction[1] * x[1]);
        self.amplitude * Complex64::from_polar(1.0, phase)
    }

    pub fn gradient(&self, n0: f64, x: Point) -> [Complex64; 2] {
        let kappa = self.wavenumber * n0.sqrt();
        let u = self.value(n0, x) * Complex64::new(0.0, kappa);
        [u * self.direction[0], u * self.direction[1]]
    }
}

/// First-order impedance condition `∂_ν u^s = i k√n₀ u^s` on the boundary of
/// the box `[-side/2, side/2]²`, where `u^s = u − u^inc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationClosure {
    pub box_side: f64,
    pub background_n: f64,
}

impl TruncationClosure {
    pub fn kappa(&self, k: f64) -> f64 {
        k * self.background_n.sqrt()
    }

    /// Requires the box to contain `scatterer` strictly.
    pub fn validate(&self, scatterer: Option<Square>) -> Result<()> {
        if !(self.background_n > 0.0) {
            return Err(Error::InvalidInput("background index must be > 0".into()));
        }
        if let Some(sq) = scatterer {
            let half = 0.5 * self.box_side;
            let lo = sq.min_corner();
            let hi = sq.max_corner();
            if !(lo[0] > -half && lo[1] > -half && hi[0] < half && hi[1] < half) {
                return Err(Error::InvalidInput(
                    "the truncation box must strictly contain the scatterer".into(),
                ));
            }
        }
        Ok(())
    }
}

/// What a [`ScatterSolution`] represents.
#[derive(Debug, Clone, PartialEq)]
pub enum SolutionKind {
    Heterogeneous { epsilon: f64, seed: u64 },
    Homogenized,
    FirstOrder { epsilon: f64, seed: u64 },
    Other(String),
}

#[derive(Debug, Clone)]
pub struct ScatterSolution {
    pub field: FieldP1<Complex64>,
    pub kind: SolutionKind,
    pub runtime_s: f64,
}

/// Factorized Helmholtz operator
/// `∫ a∇u·∇v − k²∫ n u v − i k√n₀ ∫_∂Ω u v` on a box mesh, reusable for
/// several right-hand sides.
#[derive(Debug)]
pub struct HelmholtzOperator {
    space: Arc<FeSpace>,
    k: f64,
    closure: TruncationClosure,
    factor: Factorization<Complex64>,
    a: Vec<Mat2>,
    c: Vec<Complex64>,
}

impl HelmholtzOperator {
    pub fn new(
        space: Arc<FeSpace>,
        closure: TruncationClosure,
        a: Vec<Mat2>,
        n: &[f64],
        k: f64,
    ) -> Result<Self> {
        closure.validate(space.mesh.scatterer())?;
        if space.dofs.is_periodic() {
            return Err(Error::InvalidInput(
                "Helmholtz problems need a box mesh".into(),
            ));
        }
        let c: Vec<Complex64> = n.iter().map(|n| Complex64::new(-k * k * n, 0.0)).collect();
        let gamma = Complex64::new(0.0, -closure.kappa(k));
        let (m, _) = assemble(
            &space,
            Coefficients {
                a: &a,
                c: &c,
                boundary_gamma: Some(gamma),
            },
            &Load::default(),
        );
        let factor = Factorization::lu(m)?;
        Ok(Self {
            space,
            k,
            closure,
            factor,
            a,
            c,
        })
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn closure(&self) -> &TruncationClosure {
        &self.closure
    }

    pub fn diffusion(&self) -> &[Mat2] {
        &self.a
    }

    /// Per-triangle `−k² n`.
    pub fn reaction(&self) -> &[Complex64] {
        &self.c
    }

    /// Total field for the incident wave `incident`.
    pub fn solve_incident(
        &self,
        incident: &PlaneWave,
        kind: SolutionKind,
    ) -> Result<ScatterSolution> {
        let start = Instant::now();
        let n0 = self.closure.background_n;
        let kappa = self.closure.kappa(self.k);
        let boundary =
            integrate_boundary_load(&self.space, self.space.mesh.boundary_edges(), |x, nu| {
                let g = incident.gradient(n0, x);
                g[0] * nu[0] + g[1] * nu[1] - Complex64::new(0.0, kappa) * incident.value(n0, x)
            });
        let load = Load {
            boundary,
            ..Load::default()
        };
        self.solve_load(&load, kind, start)
    }

    /// Field driven by volume sources only (homogeneous impedance condition).
    pub fn solve_sources(
        &self,
        load: &Load<Complex64>,
        kind: SolutionKind,
    ) -> Result<ScatterSolution> {
        if !load.boundary.is_empty() {
            return Err(Error::InvalidInput(
                "volume-source solves take no boundary load".into(),
            ));
        }
        self.solve_load(load, kind, Instant::now())
    }

    fn solve_load(
        &self,
        load: &Load<Complex64>,
        kind: SolutionKind,
        start: Instant,
    ) -> Result<ScatterSolution> {
        let rhs = assemble_load(&self.space, load);
        let x = self.factor.solve(&rhs)?;
        let field = FieldP1::new(self.space.clone(), x)?;
        Ok(ScatterSolution {
            field,
            kind,
            runtime_s: start.elapsed().as_secs_f64(),
        })
    }
}

/// One-shot solve of the heterogeneous problem.
pub fn solve_helmholtz(
    space: Arc<FeSpace>,
    closure: TruncationClosure,
    a: Vec<Mat2>,
    n: &[f64],
    k: f64,
    incident: &PlaneWave,
) -> Result<ScatterSolution> {
    let start = Instant::now();
    let op = HelmholtzOperator::new(space, closure, a, n, k)?;
    let mut sol = op.solve_incident(incident, SolutionKind::Other("single".into()))?;
    sol.runtime_s = start.elapsed().as_secs_f64();
    Ok(sol)
}
