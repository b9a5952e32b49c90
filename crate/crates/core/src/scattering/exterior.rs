//! Exterior field from the boundary trace and flux on `∂D`:
//! `u(y) = u^inc(y) + ∫_∂D (∇_x G(x, y)·ν) u⁺ − p⁺ G(x, y) ds_x`,
//! discretized by the edge-midpoint rule.

use num_complex::Complex64;
use rayon::prelude::*;

use super::flux::{recover_flux, InterfaceTrace};
use super::green::green_with_gradient;
use super::helmholtz::{HelmholtzOperator, PlaneWave, ScatterSolution};
use crate::error::{Error, Result};
use crate::microstructure::{Point, Square};

#[derive(Debug, Clone)]
pub struct ExteriorRepresentation {
    trace: InterfaceTrace<Complex64>,
    incident: PlaneWave,
    background_n: f64,
    scatterer: Square,
    min_distance: f64,
}

impl ExteriorRepresentation {
    /// `min_distance` is the closest admissible distance from `∂D`.
    pub fn new(
        trace: InterfaceTrace<Complex64>,
        incident: PlaneWave,
        background_n: f64,
        scatterer: Square,
        min_distance: f64,
    ) -> Self {
        Self {
            trace,
            incident,
            background_n,
            scatterer,
            min_distance,
        }
    }

    /// Recovers the flux of `solution` and admits points at distance `≥ 2h`.
    pub fn from_solution(
        op: &HelmholtzOperator,
        solution: &ScatterSolution,
        incident: &PlaneWave,
    ) -> Result<Self> {
        let space = op.space();
        let scatterer = space
            .mesh
            .scatterer()
            .ok_or_else(|| Error::InvalidInput("the mesh has no scatterer".into()))?;
        let trace = recover_flux(&solution.field, op.diffusion(), op.reaction(), None)?;
        Ok(Self::new(
            trace,
            *incident,
            op.closure().background_n,
            scatterer,
            2.0 * space.mesh.step(),
        ))
    }

    pub fn trace(&self) -> &InterfaceTrace<Complex64> {
        &self.trace
    }

    pub fn eval(&self, y: Point) -> Result<Complex64> {
        let distance = self.scatterer.distance(y);
        if distance < self.min_distance {
            return Err(Error::TooCloseToBoundary {
                distance,
                min: self.min_distance,
            });
        }
        let kappa = self.incident.wavenumber * self.background_n.sqrt();
        let mut s = Complex64::default();
        for e in 0..self.trace.len() {
            let (g, dg) = green_with_gradient(kappa, self.trace.midpoints[e], y)?;
            let nu = self.trace.normals[e];
            let dgn = dg[0] * nu[0] + dg[1] * nu[1];
            s += (dgn * self.trace.trace[e] - self.trace.flux[e] * g) * self.trace.lengths[e];
        }
        Ok(self.incident.value(self.background_n, y) + s)
    }

    /// Evaluates all points in parallel; the first failure (in point order)
    /// is returned.
    pub fn eval_many(&self, points: &[Point]) -> Result<Vec<Complex64>> {
        points.par_iter().map(|&y| self.eval(y)).collect()
    }
}

/// Parses `x y` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_points(text: &str) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::InvalidInput(format!("line {}: expected `x y`, got {line:?}", i + 1));
        let mut it = line.split_whitespace();
        let (Some(x), Some(y), None) = (it.next(), it.next(), it.next()) else {
            return Err(bad());
        };
        let x: f64 = x.parse().map_err(|_| bad())?;
        let y: f64 = y.parse().map_err(|_| bad())?;
        if !x.is_finite() || !y.is_finite() {
            return Err(bad());
        }
        out.push([x, y]);
    }
    Ok(out)
}

/// CSV with header `x,y,re,im`.
pub fn format_values_csv(points: &[Point], values: &[Complex64]) -> String {
    let mut s = String::from("x,y,re,im\n");
    for (p, v) in points.iter().zip(values) {
        s.push_str(&format!("{},{},{},{}\n", p[0], p[1], v.re, v.im));
    }
    s
}
