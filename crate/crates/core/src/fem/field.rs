use std::sync::Arc;

use super::assembly::local_mass;
use super::mesh::FeSpace;
use super::Scalar;
use crate::error::{Error, Result};
use crate::microstructure::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    H1,
    H1Semi,
}

/// Continuous piecewise-linear field given by its nodal values.
#[derive(Debug, Clone)]
pub struct FieldP1<T> {
    space: Arc<FeSpace>,
    values: Vec<T>,
}

impl<T: Scalar> FieldP1<T> {
    pub fn new(space: Arc<FeSpace>, values: Vec<T>) -> Result<Self> {
        if values.len() != space.n_dofs() {
            return Err(Error::InvalidInput(format!(
                "field has {} values for {} dofs",
                values.len(),
                space.n_dofs()
            )));
        }
        Ok(Self { space, values })
    }

    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.n_dofs();
        Self {
            space,
            values: vec![T::default(); n],
        }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(space: Arc<FeSpace>, f: impl Fn(Point) -> T) -> Self {
        let values = space.dof_points().into_iter().map(f).collect();
        Self { space, values }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    fn same_space(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.space, &other.space),
            "fields live on different spaces"
        );
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: T) -> Self {
        self.same_space(other);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| *a + s * *b)
            .collect();
        Self {
            space: self.space.clone(),
            values,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, T::from_real(-1.0))
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(|v| *v * s).collect(),
        }
    }

    #[inline]
    pub fn element_values(&self, t: usize) -> [T; 3] {
        self.space.element_dofs(t).map(|d| self.values[d])
    }

    /// Constant gradient on triangle `t`.
    #[inline]
    pub fn element_gradient(&self, t: usize) -> [T; 2] {
        let u = self.element_values(t);
        let g = self.space.mesh.basis_gradients(t);
        let mut out = [T::default(); 2];
        for k in 0..3 {
            out[0] += u[k] * g[k][0];
            out[1] += u[k] * g[k][1];
        }
        out
    }

    pub fn eval(&self, x: Point) -> Result<T> {
        let (t, b) = self.space.mesh.locate(x)?;
        let u = self.element_values(t);
        Ok(u[0] * b[0] + u[1] * b[1] + u[2] * b[2])
    }

    pub fn eval_gradient(&self, x: Point) -> Result<[T; 2]> {
        let (t, _) = self.space.mesh.locate(x)?;
        Ok(self.element_gradient(t))
    }

    /// Squared `L²` norm on triangle `t` (exact for P1).
    fn element_l2_sq(&self, t: usize) -> f64 {
        let u = self.element_values(t);
        let m = local_mass(self.space.mesh.areas()[t]);
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += m[i][j] * u[i].real_inner(u[j]);
            }
        }
        s
    }

    fn element_semi_sq(&self, t: usize) -> f64 {
        let g = self.element_gradient(t);
        self.space.mesh.areas()[t] * (g[0].abs2() + g[1].abs2())
    }

    /// Norm over the triangles selected by `mask` (all when `None`).
    pub fn norm(&self, mask: Option<&[bool]>, kind: NormKind) -> f64 {
        let mut s = 0.0;
        for t in 0..self.space.mesh.n_triangles() {
            if mask.is_some_and(|m| !m[t]) {
                continue;
            }
            s += match kind {
                NormKind::L2 => self.element_l2_sq(t),
                NormKind::H1Semi => self.element_semi_sq(t),
                NormKind::H1 => self.element_l2_sq(t) + self.element_semi_sq(t),
            };
        }
        s.max(0.0).sqrt()
    }

    /// `(‖u_h − f‖_{L²}, ‖f‖_{L²})` over the selected triangles, by the
    /// edge-midpoint rule (exact for quadratics) applied to `f` itself.
    pub fn l2_error_against(
        &self,
        exact: impl Fn(Point) -> T,
        mask: Option<&[bool]>,
    ) -> (f64, f64) {
        let mesh = &self.space.mesh;
        let verts = mesh.vertices();
        let (mut err, mut norm) = (0.0, 0.0);
        for t in 0..mesh.n_triangles() {
            if mask.is_some_and(|m| !m[t]) {
                continue;
            }
            let tri = mesh.triangles()[t];
            let u = self.element_values(t);
            let w = mesh.areas()[t] / 3.0;
            for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                let (p, q) = (verts[tri[a]], verts[tri[b]]);
                let f = exact([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                let uh = (u[a] + u[b]) * 0.5;
                err += w * (uh - f).abs2();
                norm += w * f.abs2();
            }
        }
        (err.sqrt(), norm.sqrt())
    }

    /// Integral mean over the whole mesh.
    pub fn mean(&self) -> T {
        let mesh = &self.space.mesh;
        let mut s = T::default();
        for t in 0..mesh.n_triangles() {
            let u = self.element_values(t);
            s += (u[0] + u[1] + u[2]) * (mesh.areas()[t] / 3.0);
        }
        s * (1.0 / mesh.total_area())
    }

    /// Mass-lumped `L²` projection of the piecewise-constant gradient onto
    /// P1, using only triangles selected by `mask`. Nodes touching no
    /// selected triangle get zero.
    pub fn project_gradient(&self, mask: Option<&[bool]>) -> [FieldP1<T>; 2] {
        let mesh = &self.space.mesh;
        let n = self.space.n_dofs();
        let mut weight = vec![0.0; n];
        let mut acc = [vec![T::default(); n], vec![T::default(); n]];
        for t in 0..mesh.n_triangles() {
            if mask.is_some_and(|m| !m[t]) {
                continue;
            }
            let w = mesh.areas()[t] / 3.0;
            let g = self.element_gradient(t);
            for d in self.space.element_dofs(t) {
                weight[d] += w;
                acc[0][d] += g[0] * w;
                acc[1][d] += g[1] * w;
            }
        }
        acc.map(|mut v| {
            for (x, w) in v.iter_mut().zip(&weight) {
                if *w > 0.0 {
                    *x = *x * (1.0 / *w);
                }
            }
            FieldP1 {
                space: self.space.clone(),
                values: v,
            }
        })
    }
}
