use std::sync::Arc;

use crate::error::{Error, Result};
use crate::microstructure::{wrap, Point, Square};

/// Region tag of a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Exterior,
    Scatterer,
}

/// A mesh edge with a unit normal and the triangle lying on the side opposite
/// to the normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub normal: Point,
    pub length: f64,
    pub triangle: usize,
}

/// Uniform grid underlying a structured mesh: `nx × ny` square cells of side
/// `step` with lower-left corner `origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub origin: Point,
    pub step: f64,
    pub nx: usize,
    pub ny: usize,
    /// Torus side when the grid is periodic.
    pub period: Option<f64>,
}

impl Grid {
    #[inline]
    pub fn vertex(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// Triangle index of the lower (`upper = false`) or upper half of cell
    /// `(i, j)`.
    #[inline]
    pub fn triangle(&self, i: usize, j: usize, upper: bool) -> usize {
        2 * (j * self.nx + i) + usize::from(upper)
    }
}

/// Structured P1 triangulation. Each grid cell `(i, j)` is split along its
/// diagonal into a lower triangle `[v(i,j), v(i+1,j), v(i+1,j+1)]` and an upper
/// triangle `[v(i,j), v(i+1,j+1), v(i,j+1)]`, both counterclockwise.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    regions: Vec<Region>,
    areas: Vec<f64>,
    /// Gradients of the three barycentric basis functions per triangle.
    gradients: Vec<[Point; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    interface_edges: Vec<BoundaryEdge>,
    scatterer: Option<Square>,
    grid: Grid,
}

impl TriMesh {
    fn structured(grid: Grid, scatterer: Option<Square>) -> Self {
        let Grid {
            origin,
            step,
            nx,
            ny,
            ..
        } = grid;
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([origin[0] + i as f64 * step, origin[1] + j as f64 * step]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (
                    grid.vertex(i, j),
                    grid.vertex(i + 1, j),
                    grid.vertex(i + 1, j + 1),
                    grid.vertex(i, j + 1),
                );
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        let mut areas = Vec::with_capacity(triangles.len());
        let mut gradients = Vec::with_capacity(triangles.len());
        let mut regions = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let [p0, p1, p2] = tri.map(|v| vertices[v]);
            let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            areas.push(0.5 * det);
            // ∇λ_k = rot(p_{k+2} − p_{k+1}) / det, with rot(x, y) = (y, −x)
            let g = |a: Point, b: Point| [(b[1] - a[1]) / det, -(b[0] - a[0]) / det];
            gradients.push([g(p2, p1), g(p0, p2), g(p1, p0)]);
            let centroid = [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0];
            let inside = scatterer.is_some_and(|sq| sq.contains(centroid));
            regions.push(if inside {
                Region::Scatterer
            } else {
                Region::Exterior
            });
        }
        let mut mesh = Self {
            vertices,
            triangles,
            regions,
            areas,
            gradients,
            boundary_edges: Vec::new(),
            interface_edges: Vec::new(),
            scatterer,
            grid,
        };
        if grid.period.is_none() {
            mesh.boundary_edges = mesh.rectangle_edges(0, nx, 0, ny);
        }
        mesh
    }

    /// Edges of the grid rectangle `[i0, i1] × [j0, j1]` (vertex indices) in
    /// counterclockwise order with outward normals, attached to the inner
    /// triangles.
    fn rectangle_edges(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> Vec<BoundaryEdge> {
        let g = &self.grid;
        let h = g.step;
        let mut edges = Vec::with_capacity(2 * (i1 - i0 + j1 - j0));
        let mut push = |a, b, normal, triangle| {
            edges.push(BoundaryEdge {
                vertices: [a, b],
                normal,
                length: h,
                triangle,
            });
        };
        for i in i0..i1 {
            let t = g.triangle(i, j0, false);
            push(g.vertex(i, j0), g.vertex(i + 1, j0), [0.0, -1.0], t);
        }
        for j in j0..j1 {
            let t = g.triangle(i1 - 1, j, false);
            push(g.vertex(i1, j), g.vertex(i1, j + 1), [1.0, 0.0], t);
        }
        for i in (i0..i1).rev() {
            let t = g.triangle(i, j1 - 1, true);
            push(g.vertex(i + 1, j1), g.vertex(i, j1), [0.0, 1.0], t);
        }
        for j in (j0..j1).rev() {
            let t = g.triangle(i0, j, true);
            push(g.vertex(i0, j + 1), g.vertex(i0, j), [-1.0, 0.0], t);
        }
        edges
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Barycentric basis gradients of triangle `t`.
    pub fn basis_gradients(&self, t: usize) -> &[Point; 3] {
        &self.gradients[t]
    }

    /// Outer boundary of a box mesh (empty for a torus).
    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// Edges of `∂D` in counterclockwise order, normals pointing out of `D`,
    /// each attached to its triangle inside `D`.
    pub fn interface_edges(&self) -> &[BoundaryEdge] {
        &self.interface_edges
    }

    pub fn scatterer(&self) -> Option<Square> {
        self.scatterer
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn step(&self) -> f64 {
        self.grid.step
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Per-triangle selector for one region.
    pub fn region_mask(&self, region: Region) -> Vec<bool> {
        self.regions.iter().map(|r| *r == region).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Triangle containing `x` and the barycentric coordinates of `x` in it.
    /// Periodic meshes wrap `x` first; points on shared edges resolve to one
    /// of the neighbors, which is harmless for continuous fields.
    pub fn locate(&self, x: Point) -> Result<(usize, [f64; 3])> {
        let g = &self.grid;
        let x = match g.period {
            Some(p) => [
                wrap(x[0] - g.origin[0], p) + g.origin[0],
                wrap(x[1] - g.origin[1], p) + g.origin[1],
            ],
            None => x,
        };
        let s = (x[0] - g.origin[0]) / g.step;
        let t = (x[1] - g.origin[1]) / g.step;
        let slack = 1e-9;
        if !(s >= -slack && t >= -slack && s <= g.nx as f64 + slack && t <= g.ny as f64 + slack) {
            return Err(Error::OutOfDomain { x: x[0], y: x[1] });
        }
        let i = (s.floor().max(0.0) as usize).min(g.nx - 1);
        let j = (t.floor().max(0.0) as usize).min(g.ny - 1);
        let (fs, ft) = (s - i as f64, t - j as f64);
        let upper = ft > fs;
        let tri = g.triangle(i, j, upper);
        // local coordinates of the vertices: lower (0,0),(1,0),(1,1); upper (0,0),(1,1),(0,1)
        let bary = if upper {
            [1.0 - ft, fs, ft - fs]
        } else {
            [1.0 - fs, fs - ft, ft]
        };
        Ok((tri, bary))
    }
}

/// Vertex-to-degree-of-freedom numbering; periodic meshes identify opposite
/// faces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    vertex_dof: Vec<usize>,
    n_dofs: usize,
    periodic: bool,
}

impl DofMap {
    pub fn identity(n_vertices: usize) -> Self {
        Self {
            vertex_dof: (0..n_vertices).collect(),
            n_dofs: n_vertices,
            periodic: false,
        }
    }

    fn periodic(grid: &Grid) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let mut vertex_dof = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertex_dof.push((j % ny) * nx + (i % nx));
            }
        }
        Self {
            vertex_dof,
            n_dofs: nx * ny,
            periodic: true,
        }
    }

    #[inline]
    pub fn dof(&self, vertex: usize) -> usize {
        self.vertex_dof[vertex]
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }
}

/// A mesh together with its dof numbering, shared by every field on it.
#[derive(Debug)]
pub struct FeSpace {
    pub mesh: TriMesh,
    pub dofs: DofMap,
    element_dofs: Vec<[usize; 3]>,
}

impl FeSpace {
    pub fn new(mesh: TriMesh, dofs: DofMap) -> Arc<Self> {
        let element_dofs = mesh
            .triangles()
            .iter()
            .map(|t| t.map(|v| dofs.dof(v)))
            .collect();
        Arc::new(Self {
            mesh,
            dofs,
            element_dofs,
        })
    }

    #[inline]
    pub fn element_dofs(&self, t: usize) -> [usize; 3] {
        self.element_dofs[t]
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs()
    }

    /// Coordinates of a representative vertex for each dof.
    pub fn dof_points(&self) -> Vec<Point> {
        let mut pts = vec![[f64::NAN; 2]; self.n_dofs()];
        for (v, p) in self.mesh.vertices().iter().enumerate().rev() {
            pts[self.dofs.dof(v)] = *p;
        }
        pts
    }
}

fn cells(length: f64, step: f64, what: &str) -> Result<usize> {
    if !(step > 0.0 && length > 0.0 && step.is_finite() && length.is_finite()) {
        return Err(Error::Alignment(format!(
            "{what}: length {length} and step {step} must be positive"
        )));
    }
    let n = length / step;
    let r = n.round();
    if r < 1.0 || (n - r).abs() > 1e-8 * n.max(1.0) {
        return Err(Error::Alignment(format!(
            "step {step} does not divide {what} {length}"
        )));
    }
    Ok(r as usize)
}

/// Square box `[-side/2, side/2]²` with an optional scatterer square whose
/// boundary must follow grid lines.
pub fn build_box_mesh(side: f64, step: f64, scatterer: Option<Square>) -> Result<Arc<FeSpace>> {
    let n = cells(side, step, "box side")?;
    let step = side / n as f64;
    let origin = [-0.5 * side, -0.5 * side];
    let grid = Grid {
        origin,
        step,
        nx: n,
        ny: n,
        period: None,
    };
    let mut ranges = None;
    if let Some(sq) = scatterer {
        let (lo, hi) = (sq.min_corner(), sq.max_corner());
        let mut idx = [0usize; 4];
        for (k, c) in [
            lo[0] - origin[0],
            hi[0] - origin[0],
            lo[1] - origin[1],
            hi[1] - origin[1],
        ]
        .into_iter()
        .enumerate()
        {
            let s = c / step;
            let r = s.round();
            if (s - r).abs() > 1e-8 * s.abs().max(1.0) {
                return Err(Error::Alignment(format!(
                    "scatterer boundary at offset {c} cuts grid cells of step {step}"
                )));
            }
            if r < 1.0 || r > n as f64 - 1.0 {
                return Err(Error::Alignment(
                    "scatterer square must lie strictly inside the box".into(),
                ));
            }
            idx[k] = r as usize;
        }
        if idx[0] >= idx[1] || idx[2] >= idx[3] {
            return Err(Error::Alignment(
                "scatterer square is thinner than one cell".into(),
            ));
        }
        ranges = Some(idx);
    }
    let mut mesh = TriMesh::structured(grid, scatterer);
    if let Some([i0, i1, j0, j1]) = ranges {
        mesh.interface_edges = mesh.rectangle_edges(i0, i1, j0, j1);
    }
    let dofs = DofMap::identity(mesh.n_vertices());
    Ok(FeSpace::new(mesh, dofs))
}

/// Periodic mesh of `[0, period)²`.
pub fn build_torus_mesh(period: f64, step: f64) -> Result<Arc<FeSpace>> {
    let n = cells(period, step, "period")?;
    let step = period / n as f64;
    let grid = Grid {
        origin: [0.0, 0.0],
        step,
        nx: n,
        ny: n,
        period: Some(period),
    };
    let mesh = TriMesh::structured(grid, None);
    let dofs = DofMap::periodic(&grid);
    Ok(FeSpace::new(mesh, dofs))
}
