//! Plane-wave scattering by a homogeneous penetrable disk (contrast in `n`
//! only), solved by mode matching in cylinder functions.

use num_complex::Complex64;
use rayon::prelude::*;

use super::bessel::{bessel_j_orders, derivatives, hankel1_orders};
use super::helmholtz::PlaneWave;
use crate::error::{Error, Result};
use crate::fem::FeSpace;
use crate::microstructure::Point;

/// Disk of radius `radius` centred at the origin with index `n_inside` in a
/// background of index `n_outside`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub radius: f64,
    pub n_inside: f64,
    pub n_outside: f64,
}

/// Modal coefficients of the exterior scattered field (`b_n`) and the
/// interior field (`c_n`).
#[derive(Debug, Clone)]
pub struct CylinderSeries {
    disk: Disk,
    incident: PlaneWave,
    kappa_out: f64,
    kappa_in: f64,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
}

/// Truncation order `κR + 4(κR)^{1/3} + 15`.
pub fn series_order(kappa_radius: f64) -> usize {
    (kappa_radius + 4.0 * kappa_radius.cbrt() + 15.0).ceil() as usize
}

impl CylinderSeries {
    pub fn new(disk: Disk, incident: PlaneWave) -> Result<Self> {
        if !(disk.radius > 0.0 && disk.n_inside > 0.0 && disk.n_outside > 0.0) {
            return Err(Error::InvalidInput(
                "disk radius and indices must be > 0".into(),
            ));
        }
        let k = incident.wavenumber;
        let (k0, k1) = (k * disk.n_outside.sqrt(), k * disk.n_inside.sqrt());
        let r = disk.radius;
        let nmax = series_order(k0.max(k1) * r);
        let j0 = bessel_j_orders(nmax + 1, k0 * r)?;
        let j1 = bessel_j_orders(nmax + 1, k1 * r)?;
        let h0 = hankel1_orders(nmax + 1, k0 * r)?;
        let (dj0, dj1, dh0) = (
            derivatives(&j0, k0 * r),
            derivatives(&j1, k1 * r),
            derivatives(&h0, k0 * r),
        );
        let mut b = Vec::with_capacity(nmax + 1);
        let mut c = Vec::with_capacity(nmax + 1);
        for n in 0..=nmax {
            // [H, −J₁; κ₀H', −κ₁J₁'] [b; c] = [−J₀; −κ₀J₀']
            let det = -h0[n] * (k1 * dj1[n]) + dh0[n] * (k0 * j1[n]);
            b.push(Complex64::new(k1 * j0[n] * dj1[n] - k0 * j1[n] * dj0[n], 0.0) / det);
            c.push((dh0[n] * j0[n] - h0[n] * dj0[n]) * k0 / det);
        }
        Ok(Self {
            disk,
            incident,
            kappa_out: k0,
            kappa_in: k1,
            b,
            c,
        })
    }

    pub fn order(&self) -> usize {
        self.b.len() - 1
    }

    /// Total field at `x`.
    pub fn total_field(&self, x: Point) -> Result<Complex64> {
        let r = x[0].hypot(x[1]);
        let d = self.incident.direction;
        let cos_psi = if r > 0.0 {
            ((d[0] * x[0] + d[1] * x[1]) / r).clamp(-1.0, 1.0)
        } else {
            1.0
        };
        let psi = cos_psi.acos();
        let nmax = self.order();
        let mode = |n: usize| {
            let weight = if n == 0 { 1.0 } else { 2.0 };
            Complex64::i().powu(n as u32) * (weight * (n as f64 * psi).cos())
        };
        let amp = self.incident.amplitude;
        if r < self.disk.radius {
            let j = bessel_j_orders(nmax, self.kappa_in * r)?;
            Ok(amp
                * (0..=nmax)
                    .map(|n| mode(n) * self.c[n] * j[n])
                    .sum::<Complex64>())
        } else {
            let h = hankel1_orders(nmax, self.kappa_out * r)?;
            let scattered: Complex64 = (0..=nmax).map(|n| mode(n) * self.b[n] * h[n]).sum();
            Ok(self.incident.value(self.disk.n_outside, x) + amp * scattered)
        }
    }

    /// Scattered field `u − u^inc` at `x` outside the disk.
    pub fn scattered_field(&self, x: Point) -> Result<Complex64> {
        if x[0].hypot(x[1]) < self.disk.radius {
            return Err(Error::InvalidInput(
                "scattered field is evaluated outside the disk".into(),
            ));
        }
        Ok(self.total_field(x)? - self.incident.value(self.disk.n_outside, x))
    }
}

/// Fraction of each triangle covered by the disk, estimated by splitting cut
/// triangles into `4^levels` congruent pieces and testing their centroids.
pub fn disk_area_fractions(space: &FeSpace, radius: f64, levels: u32) -> Vec<f64> {
    let mesh = &space.mesh;
    let verts = mesh.vertices();
    mesh.triangles()
        .par_iter()
        .map(|tri| {
            let p = tri.map(|v| verts[v]);
            let dist = p.map(|q| q[0].hypot(q[1]));
            let centroid = [
                (p[0][0] + p[1][0] + p[2][0]) / 3.0,
                (p[0][1] + p[1][1] + p[2][1]) / 3.0,
            ];
            let reach = p
                .iter()
                .map(|q| (q[0] - centroid[0]).hypot(q[1] - centroid[1]))
                .fold(0.0, f64::max);
            let c = centroid[0].hypot(centroid[1]);
            if c + reach < radius {
                return 1.0;
            }
            if c - reach >= radius && dist.iter().all(|&d| d >= radius) {
                return 0.0;
            }
            let mut inside = 0usize;
            let m = 1usize << levels;
            // barycentric sub-grid of m² triangles
            let at = |a: f64, b: f64| {
                [
                    p[0][0] + a * (p[1][0] - p[0][0]) + b * (p[2][0] - p[0][0]),
                    p[0][1] + a * (p[1][1] - p[0][1]) + b * (p[2][1] - p[0][1]),
                ]
            };
            let s = 1.0 / m as f64;
            for i in 0..m {
                for j in 0..m - i {
                    let (a, b) = (i as f64 * s, j as f64 * s);
                    let up = at(a + s / 3.0, b + s / 3.0);
                    inside += usize::from(up[0].hypot(up[1]) < radius);
                    if i + j + 1 < m {
                        let down = at(a + 2.0 * s / 3.0, b + 2.0 * s / 3.0);
                        inside += usize::from(down[0].hypot(down[1]) < radius);
                    }
                }
            }
            inside as f64 / (m * m) as f64
        })
        .collect()
}

/// Per-triangle index `n_outside + (n_inside − n_outside)·fraction`.
pub fn disk_index_field(space: &FeSpace, disk: &Disk, levels: u32) -> Vec<f64> {
    disk_area_fractions(space, disk.radius, levels)
        .into_iter()
        .map(|f| disk.n_outside + (disk.n_inside - disk.n_outside) * f)
        .collect()
}
