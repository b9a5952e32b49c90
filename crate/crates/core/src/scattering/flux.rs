//! Conormal flux on the scatterer boundary from the discrete residual.
//!
//! For a P1 solution `u_h`, the residual of the bilinear form restricted to
//! the scatterer triangles at a boundary node `i` equals `∫_∂D p φ_i`. Along
//! each side of `∂D` the flux `p` is taken piecewise linear; the side-interior
//! rows of the boundary mass matrix are solved for its nodal values while the
//! two corner values are extrapolated linearly from the side, since the flux
//! jumps at corners.

use crate::error::{Error, Result};
use crate::fem::{assemble_load, element_residual, FieldP1, Load, Region, Scalar};
use crate::microstructure::{Mat2, Point};

/// Trace `u⁺` and flux `p⁺ = a∇u⁺·ν` at the midpoints of the `∂D` edges,
/// with `ν` pointing out of `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceTrace<T> {
    pub midpoints: Vec<Point>,
    pub normals: Vec<Point>,
    pub lengths: Vec<f64>,
    pub trace: Vec<T>,
    pub flux: Vec<T>,
}

impl<T: Scalar> InterfaceTrace<T> {
    pub fn len(&self) -> usize {
        self.midpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.midpoints.is_empty()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            trace: self.trace.iter().map(|&v| v * s).collect(),
            flux: self.flux.iter().map(|&v| v * s).collect(),
            ..self.clone()
        }
    }
}

/// Recovers `(u⁺, p⁺)` on `∂D` for a field satisfying
/// `∫ a∇u·∇v + ∫ c u v = ⟨source, v⟩` inside `D`. Sources outside `D` are
/// ignored; a boundary load is rejected.
pub fn recover_flux<T: Scalar>(
    field: &FieldP1<T>,
    a: &[Mat2],
    c: &[T],
    source: Option<&Load<T>>,
) -> Result<InterfaceTrace<T>> {
    let space = field.space();
    let mesh = &space.mesh;
    let edges = mesh.interface_edges();
    if edges.is_empty() {
        return Err(Error::InvalidInput(
            "the mesh has no scatterer boundary".into(),
        ));
    }
    let mask = mesh.region_mask(Region::Scatterer);
    let mut residual = element_residual(space, a, c, field.values(), Some(&mask));
    if let Some(load) = source {
        if !load.boundary.is_empty() {
            return Err(Error::InvalidInput(
                "flux recovery takes volume sources only".into(),
            ));
        }
        let inside = Load {
            scalar: restrict(&load.scalar, &mask, [T::default(); 3]),
            divergence: restrict(&load.divergence, &mask, [T::default(); 2]),
            boundary: Vec::new(),
        };
        for (r, f) in residual.iter_mut().zip(assemble_load(space, &inside)) {
            *r -= f;
        }
    }

    let dof = |v: usize| space.dofs.dof(v);
    let verts = mesh.vertices();
    let mut out = InterfaceTrace {
        midpoints: Vec::with_capacity(edges.len()),
        normals: Vec::with_capacity(edges.len()),
        lengths: Vec::with_capacity(edges.len()),
        trace: Vec::with_capacity(edges.len()),
        flux: Vec::with_capacity(edges.len()),
    };
    for side in edges.chunk_by(|e, f| e.normal == f.normal) {
        let h = side[0].length;
        let nodes: Vec<usize> = std::iter::once(side[0].vertices[0])
            .chain(side.iter().map(|e| e.vertices[1]))
            .collect();
        let rhs: Vec<T> = nodes[1..nodes.len() - 1]
            .iter()
            .map(|&v| residual[dof(v)])
            .collect();
        let p = side_flux(&rhs, h)?;
        for (k, e) in side.iter().enumerate() {
            let (x0, x1) = (verts[e.vertices[0]], verts[e.vertices[1]]);
            out.midpoints
                .push([0.5 * (x0[0] + x1[0]), 0.5 * (x0[1] + x1[1])]);
            out.normals.push(e.normal);
            out.lengths.push(e.length);
            let u = field.values();
            out.trace
                .push((u[dof(e.vertices[0])] + u[dof(e.vertices[1])]) * 0.5);
            out.flux.push((p[k] + p[k + 1]) * 0.5);
        }
    }
    Ok(out)
}

fn restrict<V: Copy>(v: &[V], mask: &[bool], zero: V) -> Vec<V> {
    v.iter()
        .zip(mask)
        .map(|(&x, &m)| if m { x } else { zero })
        .collect()
}

/// Nodal flux on one side (corners included) from the residuals `r` at the
/// side-interior nodes.
fn side_flux<T: Scalar>(r: &[T], h: f64) -> Result<Vec<T>> {
    let n = r.len();
    if n == 0 {
        return Err(Error::InvalidInput(
            "every side of the scatterer needs at least two edges".into(),
        ));
    }
    let inner = if n == 1 {
        vec![r[0] * (1.0 / h)]
    } else {
        // rows 0 and n−1 collapse to h·p after corner extrapolation
        let diag = |i: usize| {
            if i == 0 || i == n - 1 {
                h
            } else {
                4.0 * h / 6.0
            }
        };
        let lower = |i: usize| if i == n - 1 { 0.0 } else { h / 6.0 };
        let upper = |i: usize| if i == 0 { 0.0 } else { h / 6.0 };
        thomas(n, diag, lower, upper, r)
    };
    let mut p = Vec::with_capacity(n + 2);
    if n == 1 {
        p.extend([inner[0]; 3]);
    } else {
        p.push(inner[0] * 2.0 - inner[1]);
        p.extend_from_slice(&inner);
        p.push(inner[n - 1] * 2.0 - inner[n - 2]);
    }
    Ok(p)
}

/// Tridiagonal solve; `lower(i)` couples row `i` to `i − 1` and `upper(i)`
/// couples row `i` to `i + 1`.
fn thomas<T: Scalar>(
    n: usize,
    diag: impl Fn(usize) -> f64,
    lower: impl Fn(usize) -> f64,
    upper: impl Fn(usize) -> f64,
    r: &[T],
) -> Vec<T> {
    let mut c = vec![0.0; n];
    let mut d = vec![T::default(); n];
    c[0] = upper(0) / diag(0);
    d[0] = r[0] * (1.0 / diag(0));
    for i in 1..n {
        let m = diag(i) - lower(i) * c[i - 1];
        c[i] = upper(i) / m;
        d[i] = (r[i] - d[i - 1] * lower(i)) * (1.0 / m);
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] -= next * c[i];
    }
    d
}
