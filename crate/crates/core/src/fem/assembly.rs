use super::mesh::{BoundaryEdge, FeSpace};
use super::sparse::{SparseMatrix, TripletBuilder};
use super::Scalar;
use crate::microstructure::{Mat2, Point};

/// Per-triangle coefficients of `∫ a∇u·∇v + ∫ c u v + γ∫_∂Ω u v`.
#[derive(Debug, Clone, Copy)]
pub struct Coefficients<'a, T> {
    pub a: &'a [Mat2],
    pub c: &'a [T],
    /// Robin coefficient on the outer boundary of a box mesh.
    pub boundary_gamma: Option<T>,
}

/// Right-hand side contributions. Empty vectors mean "absent".
#[derive(Debug, Clone, Default)]
pub struct Load<T> {
    /// Nodal values of a P1 source `f` per triangle, contributing `∫ f v`.
    pub scalar: Vec<[T; 3]>,
    /// Constant vector `F` per triangle for a strong source `∇·F`,
    /// contributing `−∫ F·∇v`.
    pub divergence: Vec<[T; 2]>,
    /// Pre-integrated `∫_e g φ` for the two endpoints of each outer boundary
    /// edge, in [`TriMesh::boundary_edges`](super::TriMesh::boundary_edges)
    /// order.
    pub boundary: Vec<[T; 2]>,
}

/// `area · g_iᵀ a g_j` for basis gradients `g`.
pub fn local_stiffness(grads: &[Point; 3], area: f64, a: &Mat2) -> [[f64; 3]; 3] {
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        let ag = [
            a[0][0] * grads[i][0] + a[0][1] * grads[i][1],
            a[1][0] * grads[i][0] + a[1][1] * grads[i][1],
        ];
        for j in 0..3 {
            k[j][i] = area * (ag[0] * grads[j][0] + ag[1] * grads[j][1]);
        }
    }
    k
}

/// Exact P1 mass matrix `(area/12)(1 + δ_ij)`.
pub fn local_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

/// Assembles the system matrix and right-hand side. Entries are pushed in
/// triangle order followed by boundary-edge order, so the result is
/// bitwise reproducible.
pub fn assemble<T: Scalar>(
    space: &FeSpace,
    coeffs: Coefficients<'_, T>,
    load: &Load<T>,
) -> (SparseMatrix<T>, Vec<T>) {
    let mesh = &space.mesh;
    let nt = mesh.n_triangles();
    assert_eq!(coeffs.a.len(), nt, "one diffusion matrix per triangle");
    assert_eq!(coeffs.c.len(), nt, "one reaction coefficient per triangle");
    let n = space.n_dofs();
    let mut builder = TripletBuilder::with_capacity(n, n, 9 * nt + 4 * mesh.boundary_edges().len());
    for t in 0..nt {
        let dofs = space.element_dofs(t);
        let k = local_stiffness(mesh.basis_gradients(t), mesh.areas()[t], &coeffs.a[t]);
        let m = local_mass(mesh.areas()[t]);
        let c = coeffs.c[t];
        for i in 0..3 {
            for j in 0..3 {
                builder.push(dofs[i], dofs[j], T::from_real(k[i][j]) + c * m[i][j]);
            }
        }
    }
    if let Some(gamma) = coeffs.boundary_gamma {
        for e in mesh.boundary_edges() {
            let [a, b] = e.vertices.map(|v| space.dofs.dof(v));
            let d = gamma * (e.length / 3.0);
            let o = gamma * (e.length / 6.0);
            builder.push(a, a, d);
            builder.push(a, b, o);
            builder.push(b, a, o);
            builder.push(b, b, d);
        }
    }
    (builder.finalize(), assemble_load(space, load))
}

/// Right-hand side vector of `load` alone.
pub fn assemble_load<T: Scalar>(space: &FeSpace, load: &Load<T>) -> Vec<T> {
    let mesh = &space.mesh;
    let mut rhs = vec![T::default(); space.n_dofs()];
    for (t, f) in load.scalar.iter().enumerate() {
        let dofs = space.element_dofs(t);
        let m = local_mass(mesh.areas()[t]);
        for i in 0..3 {
            let mut s = T::default();
            for j in 0..3 {
                s += f[j] * m[i][j];
            }
            rhs[dofs[i]] += s;
        }
    }
    for (t, fv) in load.divergence.iter().enumerate() {
        let dofs = space.element_dofs(t);
        let g = mesh.basis_gradients(t);
        let area = mesh.areas()[t];
        for i in 0..3 {
            rhs[dofs[i]] -= (fv[0] * g[i][0] + fv[1] * g[i][1]) * area;
        }
    }
    for (e, g) in mesh.boundary_edges().iter().zip(&load.boundary) {
        rhs[space.dofs.dof(e.vertices[0])] += g[0];
        rhs[space.dofs.dof(e.vertices[1])] += g[1];
    }
    rhs
}

/// `∫_e g φ_a` and `∫_e g φ_b` for each edge `e = (a, b)` by three-point
/// Gauss quadrature. `g` receives the quadrature point and the edge normal.
pub fn integrate_boundary_load<T: Scalar>(
    space: &FeSpace,
    edges: &[BoundaryEdge],
    g: impl Fn(Point, Point) -> T,
) -> Vec<[T; 2]> {
    let nodes = [
        0.5 - 0.5 * (0.6f64).sqrt(),
        0.5,
        0.5 + 0.5 * (0.6f64).sqrt(),
    ];
    let weights = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    let verts = space.mesh.vertices();
    edges
        .iter()
        .map(|e| {
            let (p, q) = (verts[e.vertices[0]], verts[e.vertices[1]]);
            let mut acc = [T::default(); 2];
            for (s, w) in nodes.iter().zip(weights) {
                let x = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
                let v = g(x, e.normal) * (w * e.length);
                acc[0] += v * (1.0 - s);
                acc[1] += v * *s;
            }
            acc
        })
        .collect()
}

/// Matrix-free `A u` restricted to the triangles selected by `mask` (all
/// triangles when `None`), without boundary terms.
pub fn element_residual<T: Scalar>(
    space: &FeSpace,
    a: &[Mat2],
    c: &[T],
    values: &[T],
    mask: Option<&[bool]>,
) -> Vec<T> {
    let mesh = &space.mesh;
    let mut out = vec![T::default(); space.n_dofs()];
    for t in 0..mesh.n_triangles() {
        if mask.is_some_and(|m| !m[t]) {
            continue;
        }
        let dofs = space.element_dofs(t);
        let k = local_stiffness(mesh.basis_gradients(t), mesh.areas()[t], &a[t]);
        let m = local_mass(mesh.areas()[t]);
        let u = dofs.map(|d| values[d]);
        for i in 0..3 {
            let mut s = T::default();
            for j in 0..3 {
                s += u[j] * (k[i][j]) + c[t] * u[j] * m[i][j];
            }
            out[dofs[i]] += s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::fem::{build_box_mesh, build_torus_mesh};
    use crate::microstructure::IDENTITY;

    #[test]
    fn unit_right_triangle_stiffness() {
        // vertices (0,0), (1,0), (0,1)
        let grads = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        let k = local_stiffness(&grads, 0.5, &IDENTITY);
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mass_matrix_integrates_constants() {
        let m = local_mass(0.3);
        let total: f64 = m.iter().flatten().sum();
        assert!((total - 0.3).abs() < 1e-15);
        assert!((m[0][0] - 0.3 / 6.0).abs() < 1e-16);
        assert!((m[0][1] - 0.3 / 12.0).abs() < 1e-16);
    }

    #[test]
    fn real_forms_are_symmetric() {
        let s = build_box_mesh(1.0, 0.125, None).unwrap();
        let nt = s.mesh.n_triangles();
        let a: Vec<Mat2> = (0..nt)
            .map(|t| [[1.0 + t as f64 * 0.01, 0.2], [0.2, 2.0]])
            .collect();
        let c: Vec<f64> = (0..nt).map(|t| (t as f64).cos()).collect();
        let (m, _) = assemble(
            &s,
            Coefficients {
                a: &a,
                c: &c,
                boundary_gamma: None,
            },
            &Load::default(),
        );
        assert_eq!(m, m.transpose());
    }

    #[test]
    fn periodic_stiffness_annihilates_constants() {
        let s = build_torus_mesh(1.0, 0.125).unwrap();
        let nt = s.mesh.n_triangles();
        let a = vec![[[2.0, 0.3], [0.3, 1.0]]; nt];
        let c = vec![0.0; nt];
        let (m, _) = assemble(
            &s,
            Coefficients {
                a: &a,
                c: &c,
                boundary_gamma: None,
            },
            &Load::default(),
        );
        let r = m.matvec(&vec![1.0; s.n_dofs()]);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn boundary_mass_integrates_perimeter() {
        let s = build_box_mesh(2.0, 0.5, None).unwrap();
        let nt = s.mesh.n_triangles();
        let a = vec![[[0.0; 2]; 2]; nt];
        let c = vec![Complex64::default(); nt];
        let gamma = Complex64::new(0.0, 1.0);
        let (m, _) = assemble(
            &s,
            Coefficients {
                a: &a,
                c: &c,
                boundary_gamma: Some(gamma),
            },
            &Load::default(),
        );
        let ones = vec![Complex64::new(1.0, 0.0); s.n_dofs()];
        let total = m.bilinear(&ones, &ones);
        assert!((total - gamma * 8.0).norm() < 1e-12);
        let g = integrate_boundary_load(&s, s.mesh.boundary_edges(), |x, _| {
            Complex64::new(x[0] * x[0], 0.0)
        });
        let sum: Complex64 = g.iter().map(|p| p[0] + p[1]).sum();
        // ∮ x² over the perimeter of [-1,1]²: 2·(2/3) on the vertical sides + 2·2 on the horizontal ones
        assert!((sum.re - (4.0 / 3.0 + 4.0)).abs() < 1e-12);
    }

    #[test]
    fn element_residual_matches_matvec() {
        let s = build_box_mesh(1.0, 0.25, None).unwrap();
        let nt = s.mesh.n_triangles();
        let a = vec![IDENTITY; nt];
        let c = vec![-3.0; nt];
        let (m, _) = assemble(
            &s,
            Coefficients {
                a: &a,
                c: &c,
                boundary_gamma: None,
            },
            &Load::default(),
        );
        let u: Vec<f64> = s
            .dof_points()
            .iter()
            .map(|p| (p[0] * 3.0).sin() + p[1])
            .collect();
        let r1 = m.matvec(&u);
        let r2 = element_residual(&s, &a, &c, &u, None);
        for (x, y) in r1.iter().zip(&r2) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
