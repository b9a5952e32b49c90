//! Homogenized solve, two-scale expansion and the first-order exterior
//! correction, plus the error norms collected per realization.
//!
//! All fields of one comparison live on the same box mesh and share the
//! truncation closure. Corrector fields are looked up at `x/ε` on their torus
//! mesh, so one corrector solve serves every `ε`.

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;

use crate::correctors::{mat_vec, CorrectorSet, HomogenizedCoeffs};
use crate::error::{Error, Result};
use crate::fem::{FeSpace, FieldP1, Load, NormKind, Region};
use crate::microstructure::{
    CoefficientField, Mat2, MediumParams, Microstructure, Point, IDENTITY,
};
use crate::scattering::{
    HelmholtzOperator, PlaneWave, ScatterSolution, SolutionKind, TruncationClosure,
};

type C = Complex64;

/// Per-triangle coefficients: `(a_hom, n_hom)` inside the scatterer,
/// `(Id, n₀)` outside.
pub fn homogenized_coefficients(
    space: &FeSpace,
    hom: &HomogenizedCoeffs,
    n_background: f64,
) -> (Vec<Mat2>, Vec<f64>) {
    space
        .mesh
        .regions()
        .iter()
        .map(|r| match r {
            Region::Scatterer => (hom.a_hom, hom.n_hom),
            Region::Exterior => (IDENTITY, n_background),
        })
        .unzip()
}

/// Per-triangle `(a_ε, n_ε)` sampled at centroids.
pub fn heterogeneous_coefficients(
    space: &FeSpace,
    ms: &Microstructure,
    params: &MediumParams,
    epsilon: f64,
) -> Result<(Vec<Mat2>, Vec<f64>)> {
    let scatterer = space
        .mesh
        .scatterer()
        .ok_or_else(|| Error::InvalidInput("the mesh has no scatterer".into()))?;
    let field = CoefficientField {
        microstructure: ms,
        params,
        epsilon,
        scatterer,
    };
    Ok((0..space.mesh.n_triangles())
        .map(|t| field.coefficient_at(space.mesh.centroid(t)))
        .unzip())
}

/// Homogenized problem on a shared mesh: factorized operator plus `u_0`.
#[derive(Debug)]
pub struct HomogenizedProblem {
    pub operator: HelmholtzOperator,
    pub u0: ScatterSolution,
    pub incident: PlaneWave,
    pub homogenized: HomogenizedCoeffs,
}

/// `−∇·(a_hom∇u_0) − k²n_hom u_0 = 0` in `D`, background outside.
pub fn solve_u0(
    space: Arc<FeSpace>,
    closure: TruncationClosure,
    hom: &HomogenizedCoeffs,
    incident: &PlaneWave,
) -> Result<HomogenizedProblem> {
    let (a, n) = homogenized_coefficients(&space, hom, closure.background_n);
    let operator = HelmholtzOperator::new(space, closure, a, &n, incident.wavenumber)?;
    let u0 = operator.solve_incident(incident, SolutionKind::Homogenized)?;
    Ok(HomogenizedProblem {
        operator,
        u0,
        incident: *incident,
        homogenized: hom.clone(),
    })
}

/// Corrector fields read at `x/ε`.
#[derive(Debug, Clone, Copy)]
pub struct CorrectorLookup<'a> {
    pub correctors: &'a CorrectorSet,
    pub epsilon: f64,
}

impl CorrectorLookup<'_> {
    fn cell(&self, x: Point) -> Point {
        [x[0] / self.epsilon, x[1] / self.epsilon]
    }

    pub fn phi(&self, x: Point) -> Result<[f64; 2]> {
        let y = self.cell(x);
        Ok([
            self.correctors.phi[0].eval(y)?,
            self.correctors.phi[1].eval(y)?,
        ])
    }

    pub fn beta(&self, x: Point) -> Result<[f64; 2]> {
        let y = self.cell(x);
        Ok([
            self.correctors.beta[0].eval(y)?,
            self.correctors.beta[1].eval(y)?,
        ])
    }

    /// `s_i = σ_{i,12}`.
    pub fn sigma(&self, x: Point) -> Result<[f64; 2]> {
        let y = self.cell(x);
        Ok([
            self.correctors.sigma[0].eval(y)?,
            self.correctors.sigma[1].eval(y)?,
        ])
    }

    /// Unit-scale gradients `(∇φ_i)(x/ε)` on the torus element containing `x/ε`.
    pub fn grad_phi(&self, x: Point) -> Result<[[f64; 2]; 2]> {
        let (t, _) = self.correctors.space.mesh.locate(self.cell(x))?;
        Ok([
            self.correctors.phi[0].element_gradient(t),
            self.correctors.phi[1].element_gradient(t),
        ])
    }
}

fn closed_scatterer_nodes(space: &FeSpace) -> Result<Vec<bool>> {
    let sq = space
        .mesh
        .scatterer()
        .ok_or_else(|| Error::InvalidInput("the mesh has no scatterer".into()))?;
    Ok(space
        .dof_points()
        .iter()
        .map(|&p| sq.distance(p) == 0.0)
        .collect())
}

/// `w_ε = u_0 + ε 1_D Σ_i φ_i(x/ε) ∂_i u_0` at the nodes, with `∂_i u_0`
/// recovered from the scatterer triangles. Nodes on `∂D` count as inside.
pub fn two_scale_expand(u0: &FieldP1<C>, lookup: CorrectorLookup<'_>) -> Result<FieldP1<C>> {
    let space = u0.space().clone();
    let mask = space.mesh.region_mask(Region::Scatterer);
    let grad = u0.project_gradient(Some(&mask));
    let inside = closed_scatterer_nodes(&space)?;
    let points = space.dof_points();
    let mut w = u0.values().to_vec();
    for (d, p) in points.iter().enumerate() {
        if inside[d] {
            let phi = lookup.phi(*p)?;
            w[d] += (grad[0].values()[d] * phi[0] + grad[1].values()[d] * phi[1]) * lookup.epsilon;
        }
    }
    FieldP1::new(space, w)
}

/// Volume sources of the first-order correction.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderSources {
    /// `H_ε = Σ_i (a_hom − a_ε)(e_i + ∇φ_i(x/ε)) ∂_i u_0` per triangle.
    pub h: Vec<[C; 2]>,
    /// Nodal `(n_hom − n_ε) u_0` per triangle.
    pub n_mismatch: Vec<[C; 3]>,
}

impl FirstOrderSources {
    /// Right-hand side of `−∇·H_ε − k²(n_hom − n_ε)u_0`.
    pub fn load(&self, k: f64) -> Load<C> {
        Load {
            divergence: self.h.iter().map(|h| [-h[0], -h[1]]).collect(),
            scalar: self
                .n_mismatch
                .iter()
                .map(|m| m.map(|v| v * (-k * k)))
                .collect(),
            boundary: Vec::new(),
        }
    }

    pub fn scale(&self, s: C) -> Self {
        Self {
            h: self.h.iter().map(|h| [h[0] * s, h[1] * s]).collect(),
            n_mismatch: self.n_mismatch.iter().map(|m| m.map(|v| v * s)).collect(),
        }
    }
}

/// Sources of `𝒰_1`; both vanish outside the scatterer.
pub fn compute_heps(
    u0: &FieldP1<C>,
    a_eps: &[Mat2],
    n_eps: &[f64],
    hom: &HomogenizedCoeffs,
    lookup: CorrectorLookup<'_>,
) -> Result<FirstOrderSources> {
    let space = u0.space();
    let mesh = &space.mesh;
    let nt = mesh.n_triangles();
    let mut h = vec![[C::default(); 2]; nt];
    let mut n_mismatch = vec![[C::default(); 3]; nt];
    for t in 0..nt {
        if mesh.regions()[t] != Region::Scatterer {
            continue;
        }
        let x = mesh.centroid(t);
        let gphi = lookup.grad_phi(x)?;
        let du = u0.element_gradient(t);
        let diff = sub(&hom.a_hom, &a_eps[t]);
        for i in 0..2 {
            let mut e = gphi[i];
            e[i] += 1.0;
            let v = mat_vec(&diff, e);
            h[t][0] += du[i] * v[0];
            h[t][1] += du[i] * v[1];
        }
        let dn = hom.n_hom - n_eps[t];
        n_mismatch[t] = u0.element_values(t).map(|u| u * dn);
    }
    Ok(FirstOrderSources { h, n_mismatch })
}

fn sub(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] - b[0][0], a[0][1] - b[0][1]],
        [a[1][0] - b[1][0], a[1][1] - b[1][1]],
    ]
}

/// `𝒰_1` from the homogenized operator with zero incident field.
pub fn solve_u1(
    problem: &HomogenizedProblem,
    sources: &FirstOrderSources,
    kind: SolutionKind,
) -> Result<ScatterSolution> {
    let load = sources.load(problem.operator.wavenumber());
    problem.operator.solve_sources(&load, kind)
}

/// Centroid samples of `F_ε/ε` and `G_ε/ε` on the scatterer triangles:
/// `F_ε = ε[Σ_i (a_ε φ_i^ε − σ_i^ε)∇∂_i u_0 + k² β^ε u_0]`,
/// `G_ε = ε Σ_i (n_ε φ_i^ε − β_i^ε) ∂_i u_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FgSamples {
    pub areas: Vec<f64>,
    pub f: Vec<[C; 2]>,
    pub g: Vec<C>,
}

impl FgSamples {
    /// `∂_i u_0` elementwise; `∇∂_i u_0` from the recovered gradient,
    /// recovered once more.
    pub fn sample(
        u0: &FieldP1<C>,
        a_eps: &[Mat2],
        n_eps: &[f64],
        k: f64,
        lookup: CorrectorLookup<'_>,
    ) -> Result<Self> {
        let space = u0.space();
        let mesh = &space.mesh;
        let mask = mesh.region_mask(Region::Scatterer);
        let grad = u0.project_gradient(Some(&mask));
        let hess = [
            grad[0].project_gradient(Some(&mask)),
            grad[1].project_gradient(Some(&mask)),
        ];
        let mean = |f: &FieldP1<C>, t: usize| {
            let v = f.element_values(t);
            (v[0] + v[1] + v[2]) * (1.0 / 3.0)
        };
        let mut out = Self {
            areas: Vec::new(),
            f: Vec::new(),
            g: Vec::new(),
        };
        for t in (0..mesh.n_triangles()).filter(|&t| mask[t]) {
            let x = mesh.centroid(t);
            let phi = lookup.phi(x)?;
            let beta = lookup.beta(x)?;
            let s = lookup.sigma(x)?;
            let du = u0.element_gradient(t);
            let u = mean(u0, t);
            let mut f = [beta[0] * k * k * u, beta[1] * k * k * u];
            let mut g = C::default();
            for i in 0..2 {
                let d2 = [mean(&hess[i][0], t), mean(&hess[i][1], t)];
                let a = a_eps[t];
                // (a φ_i − σ_i) with σ_i = [[0, s_i], [−s_i, 0]]
                let m = [
                    [a[0][0] * phi[i], a[0][1] * phi[i] - s[i]],
                    [a[1][0] * phi[i] + s[i], a[1][1] * phi[i]],
                ];
                f[0] += d2[0] * m[0][0] + d2[1] * m[0][1];
                f[1] += d2[0] * m[1][0] + d2[1] * m[1][1];
                g += du[i] * (n_eps[t] * phi[i] - beta[i]);
            }
            out.areas.push(mesh.areas()[t]);
            out.f.push(f);
            out.g.push(g);
        }
        Ok(out)
    }

    /// `(‖F_ε‖_{L²(D)}, ‖G_ε‖_{L²(D)})`.
    pub fn norms(&self, epsilon: f64) -> (f64, f64) {
        let mut f2 = 0.0;
        let mut g2 = 0.0;
        for ((a, f), g) in self.areas.iter().zip(&self.f).zip(&self.g) {
            f2 += a * (f[0].norm_sqr() + f[1].norm_sqr());
            g2 += a * g.norm_sqr();
        }
        (epsilon * f2.sqrt(), epsilon * g2.sqrt())
    }
}

/// Exterior triangles whose centroid lies farther than `alpha` from `D`.
pub fn exterior_beyond(space: &FeSpace, alpha: f64) -> Result<Vec<bool>> {
    let sq = space
        .mesh
        .scatterer()
        .ok_or_else(|| Error::InvalidInput("the mesh has no scatterer".into()))?;
    let mesh = &space.mesh;
    let mask: Vec<bool> = (0..mesh.n_triangles())
        .map(|t| mesh.regions()[t] == Region::Exterior && sq.distance(mesh.centroid(t)) > alpha)
        .collect();
    if !mask.contains(&true) {
        return Err(Error::RegionEmpty);
    }
    Ok(mask)
}

/// Error norms of one `(ε, seed)` realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub epsilon: f64,
    pub seed: u64,
    /// `‖u_ε − u_0‖_{L²(box)}`.
    pub err_l2_box: f64,
    /// `‖u_ε − u_0‖_{H¹(box∖D̄)}`.
    pub err_h1_ext: f64,
    /// `‖u_ε − w_ε‖_{H¹(D)}`.
    pub err_h1_d_two_scale: f64,
    /// `‖u_ε − u_0 − 𝒰_1‖_{L²(box∖D̄^α)}`.
    pub err_l2_ext_u1: f64,
    /// `‖u_ε − u_0 − 𝒰_1‖_{H¹(box∖D̄^α)}`.
    pub err_h1_ext_u1: f64,
    /// `‖u_ε − u_0‖_{L²(box∖D̄^α)}`, the uncorrected exterior error.
    pub err_l2_ext_u0: f64,
    pub diag_f: f64,
    pub diag_g: f64,
    pub runtime_s: f64,
}

/// Fields entering one error row.
#[derive(Debug, Clone, Copy)]
pub struct ComparedFields<'a> {
    pub u_eps: &'a FieldP1<C>,
    pub u0: &'a FieldP1<C>,
    pub w_eps: &'a FieldP1<C>,
    pub u1: &'a FieldP1<C>,
}

/// Region-restricted norms; `runtime_s` is left at zero and `diag_*` are
/// copied from `fg`.
pub fn error_report(
    fields: ComparedFields<'_>,
    epsilon: f64,
    seed: u64,
    alpha: f64,
    fg: (f64, f64),
) -> Result<ErrorRow> {
    let space = fields.u_eps.space();
    let mesh = &space.mesh;
    let d = mesh.region_mask(Region::Scatterer);
    let ext = mesh.region_mask(Region::Exterior);
    let far = exterior_beyond(space, alpha)?;
    let diff = fields.u_eps.sub(fields.u0);
    let corrected = diff.sub(fields.u1);
    let two_scale = fields.u_eps.sub(fields.w_eps);
    let row = ErrorRow {
        epsilon,
        seed,
        err_l2_box: diff.norm(None, NormKind::L2),
        err_h1_ext: diff.norm(Some(&ext), NormKind::H1),
        err_h1_d_two_scale: two_scale.norm(Some(&d), NormKind::H1),
        err_l2_ext_u1: corrected.norm(Some(&far), NormKind::L2),
        err_h1_ext_u1: corrected.norm(Some(&far), NormKind::H1),
        err_l2_ext_u0: diff.norm(Some(&far), NormKind::L2),
        diag_f: fg.0,
        diag_g: fg.1,
        runtime_s: 0.0,
    };
    let all = [
        row.err_l2_box,
        row.err_h1_ext,
        row.err_h1_d_two_scale,
        row.err_l2_ext_u1,
        row.err_h1_ext_u1,
        row.err_l2_ext_u0,
        row.diag_f,
        row.diag_g,
    ];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite error norm".into()));
    }
    Ok(row)
}

/// One realization of the heterogeneous medium at scale `ε`.
#[derive(Debug, Clone, Copy)]
pub struct ExpansionInputs<'a> {
    pub microstructure: &'a Microstructure,
    pub correctors: &'a CorrectorSet,
    pub params: &'a MediumParams,
    pub epsilon: f64,
    pub seed: u64,
}

/// Solves `u_ε` and `𝒰_1` on the mesh of `problem` and measures every
/// error of the row.
pub fn evaluate_realization(
    problem: &HomogenizedProblem,
    inputs: ExpansionInputs<'_>,
    alpha: f64,
) -> Result<ErrorRow> {
    let start = Instant::now();
    let torus_period = inputs.correctors.space.mesh.grid().period;
    if torus_period != Some(inputs.microstructure.period()) {
        return Err(Error::InvalidInput(
            "corrector torus and microstructure periods differ".into(),
        ));
    }
    if !(inputs.epsilon > 0.0) {
        return Err(Error::InvalidInput(format!(
            "epsilon must be > 0, got {}",
            inputs.epsilon
        )));
    }
    let op = &problem.operator;
    let space = op.space().clone();
    let (a_eps, n_eps) =
        heterogeneous_coefficients(&space, inputs.microstructure, inputs.params, inputs.epsilon)?;
    let k = op.wavenumber();
    let hetero = HelmholtzOperator::new(space, *op.closure(), a_eps.clone(), &n_eps, k)?;
    let kind = SolutionKind::Heterogeneous {
        epsilon: inputs.epsilon,
        seed: inputs.seed,
    };
    let u_eps = hetero.solve_incident(&problem.incident, kind)?;
    drop(hetero);
    let lookup = CorrectorLookup {
        correctors: inputs.correctors,
        epsilon: inputs.epsilon,
    };
    let u0 = &problem.u0.field;
    let w = two_scale_expand(u0, lookup)?;
    let sources = compute_heps(u0, &a_eps, &n_eps, &problem.homogenized, lookup)?;
    let u1 = solve_u1(
        problem,
        &sources,
        SolutionKind::FirstOrder {
            epsilon: inputs.epsilon,
            seed: inputs.seed,
        },
    )?;
    let fg = FgSamples::sample(u0, &a_eps, &n_eps, k, lookup)?.norms(inputs.epsilon);
    let fields = ComparedFields {
        u_eps: &u_eps.field,
        u0,
        w_eps: &w,
        u1: &u1.field,
    };
    let mut row = error_report(fields, inputs.epsilon, inputs.seed, alpha, fg)?;
    row.runtime_s = start.elapsed().as_secs_f64();
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correctors::solve_correctors;
    use crate::fem::{build_box_mesh, build_torus_mesh};
    use crate::microstructure::{sample_matern2, ProcessConfig, Square};

    fn box_space() -> Arc<FeSpace> {
        build_box_mesh(2.0, 1.0 / 16.0, Some(Square::centered(1.0))).unwrap()
    }

    fn closure() -> TruncationClosure {
        TruncationClosure {
            box_side: 2.0,
            background_n: 1.0,
        }
    }

    fn correctors(period: f64, step: f64, seed: u64) -> (Microstructure, CorrectorSet) {
        let process = ProcessConfig {
            proposal_intensity: 0.5,
            hardcore_distance: 1.05,
            inclusion_radius: 0.5,
            period,
            seed,
        };
        let ms = sample_matern2(&process).unwrap();
        let space = build_torus_mesh(period, step).unwrap();
        let set = solve_correctors(&space, &ms, &MediumParams::reference(), 1e7).unwrap();
        (ms, set)
    }

    fn zero_correctors(set: &CorrectorSet) -> CorrectorSet {
        let z = || FieldP1::zeros(set.space.clone());
        CorrectorSet {
            phi: [z(), z()],
            beta: [z(), z()],
            sigma: [z(), z()],
            ..set.clone()
        }
    }

    #[test]
    fn identity_homogenized_medium_is_transparent() {
        let space = build_box_mesh(4.0, 4.0 / 200.0, Some(Square::centered(2.0))).unwrap();
        let hom = HomogenizedCoeffs::fixed(IDENTITY, 1.0);
        let pw = PlaneWave::from_angle(5.0, 0.0).unwrap();
        let p = solve_u0(
            space.clone(),
            TruncationClosure {
                box_side: 4.0,
                background_n: 1.0,
            },
            &hom,
            &pw,
        )
        .unwrap();
        let exact = FieldP1::interpolate(space, |x| pw.value(1.0, x));
        let rel = p.u0.field.sub(&exact).norm(None, NormKind::L2) / exact.norm(None, NormKind::L2);
        assert!(rel < 0.02, "{rel}");
    }

    #[test]
    fn zero_correctors_give_trivial_expansion_and_diagnostics() {
        let (_, set) = correctors(4.0, 0.25, 1);
        let zero = zero_correctors(&set);
        let hom = HomogenizedCoeffs::fixed([[2.2, 0.0], [0.0, 2.2]], 1.3);
        let pw = PlaneWave::from_angle(3.0, 0.0).unwrap();
        let p = solve_u0(box_space(), closure(), &hom, &pw).unwrap();
        let lookup = CorrectorLookup {
            correctors: &zero,
            epsilon: 0.1,
        };
        let w = two_scale_expand(&p.u0.field, lookup).unwrap();
        assert_eq!(w.values(), p.u0.field.values());
        let (a, n) = homogenized_coefficients(p.operator.space(), &hom, 1.0);
        let fg = FgSamples::sample(&p.u0.field, &a, &n, 3.0, lookup)
            .unwrap()
            .norms(0.1);
        assert_eq!(fg, (0.0, 0.0));
        // a_ε = a_hom with φ = 0 leaves only the index mismatch, which is zero here too
        let s = compute_heps(&p.u0.field, &a, &n, &hom, lookup).unwrap();
        assert!(s
            .h
            .iter()
            .all(|h| h[0] == C::default() && h[1] == C::default()));
        let u1 = solve_u1(&p, &s, SolutionKind::Other("zero".into())).unwrap();
        assert!(u1.field.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn expansion_vanishes_outside_scatterer() {
        let (_, set) = correctors(4.0, 0.25, 2);
        let hom = HomogenizedCoeffs::fixed([[2.2, 0.0], [0.0, 2.2]], 1.3);
        let pw = PlaneWave::from_angle(3.0, 0.0).unwrap();
        let p = solve_u0(box_space(), closure(), &hom, &pw).unwrap();
        let lookup = CorrectorLookup {
            correctors: &set,
            epsilon: 0.125,
        };
        let w = two_scale_expand(&p.u0.field, lookup).unwrap();
        let sq = Square::centered(1.0);
        let pts = p.operator.space().dof_points();
        for (d, x) in pts.iter().enumerate() {
            if sq.distance(*x) > 0.0 {
                assert_eq!(w.values()[d], p.u0.field.values()[d]);
            }
        }
        // ‖w − u_0‖_{L²(D)} ≤ ε max|φ| ‖∇u_0‖_{L²(D)} up to recovery effects
        let mask = p.operator.space().mesh.region_mask(Region::Scatterer);
        let lhs = w.sub(&p.u0.field).norm(Some(&mask), NormKind::L2);
        let phi_max = set
            .phi
            .iter()
            .flat_map(|f| f.values())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let rhs = 0.125 * phi_max * p.u0.field.norm(Some(&mask), NormKind::H1Semi);
        assert!(lhs <= 1.1 * rhs, "{lhs} vs {rhs}");
        let nt = p.operator.space().mesh.n_triangles();
        let s = compute_heps(
            &p.u0.field,
            &vec![IDENTITY; nt],
            &vec![1.0; nt],
            &hom,
            lookup,
        )
        .unwrap();
        for (t, r) in p.operator.space().mesh.regions().iter().enumerate() {
            if *r == Region::Exterior {
                assert_eq!(s.h[t], [C::default(); 2]);
                assert_eq!(s.n_mismatch[t], [C::default(); 3]);
            }
        }
    }

    #[test]
    fn diagnostics_scale_linearly_for_frozen_samples() {
        let (_, set) = correctors(4.0, 0.25, 3);
        let hom = HomogenizedCoeffs::fixed([[2.2, 0.0], [0.0, 2.2]], 1.3);
        let pw = PlaneWave::from_angle(3.0, 0.0).unwrap();
        let p = solve_u0(box_space(), closure(), &hom, &pw).unwrap();
        let (a, n) = homogenized_coefficients(p.operator.space(), &hom, 1.0);
        let samples = FgSamples::sample(
            &p.u0.field,
            &a,
            &n,
            3.0,
            CorrectorLookup {
                correctors: &set,
                epsilon: 0.1,
            },
        )
        .unwrap();
        let (f1, g1) = samples.norms(0.1);
        let (f2, g2) = samples.norms(0.05);
        assert!(f1 > 0.0 && g1 > 0.0);
        assert!((f2 - 0.5 * f1).abs() <= 1e-10 * f1);
        assert!((g2 - 0.5 * g1).abs() <= 1e-10 * g1);
    }

    #[test]
    fn first_order_correction_is_linear_in_sources() {
        let (_, set) = correctors(4.0, 0.25, 4);
        let hom = HomogenizedCoeffs::fixed([[2.2, 0.0], [0.0, 2.2]], 1.3);
        let pw = PlaneWave::from_angle(3.0, 0.0).unwrap();
        let p = solve_u0(box_space(), closure(), &hom, &pw).unwrap();
        let nt = p.operator.space().mesh.n_triangles();
        let a = vec![[[2.0, 0.0], [0.0, 2.0]]; nt];
        let n = vec![1.5; nt];
        let s = compute_heps(
            &p.u0.field,
            &a,
            &n,
            &hom,
            CorrectorLookup {
                correctors: &set,
                epsilon: 0.125,
            },
        )
        .unwrap();
        let u1 = solve_u1(&p, &s, SolutionKind::Other("x".into())).unwrap();
        let u2 = solve_u1(
            &p,
            &s.scale(C::new(2.0, 0.0)),
            SolutionKind::Other("x".into()),
        )
        .unwrap();
        for (x, y) in u1.field.values().iter().zip(u2.field.values()) {
            assert!((x * 2.0 - y).norm() <= 1e-12 * (1.0 + y.norm()));
        }
        assert!(u1.field.norm(None, NormKind::L2) > 0.0);
    }

    #[test]
    fn error_norms_split_over_regions() {
        let (ms, set) = correctors(20.0, 0.5, 5);
        let hom = HomogenizedCoeffs::fixed([[2.27, 0.0], [0.0, 2.27]], 1.27);
        let pw = PlaneWave::from_angle(3.0, 0.0).unwrap();
        let p = solve_u0(box_space(), closure(), &hom, &pw).unwrap();
        let inputs = ExpansionInputs {
            microstructure: &ms,
            correctors: &set,
            params: &MediumParams::reference(),
            epsilon: 0.125,
            seed: 5,
        };
        let row = evaluate_realization(&p, inputs, 0.125).unwrap();
        assert!(row.err_l2_box > 0.0 && row.err_l2_ext_u1 > 0.0 && row.runtime_s > 0.0);
        // identical fields → zero errors
        let u0 = &p.u0.field;
        let zero = FieldP1::zeros(u0.space().clone());
        let same = error_report(
            ComparedFields {
                u_eps: u0,
                u0,
                w_eps: u0,
                u1: &zero,
            },
            0.1,
            0,
            0.125,
            (0.0, 0.0),
        )
        .unwrap();
        assert_eq!(
            (same.err_l2_box, same.err_h1_d_two_scale, same.err_l2_ext_u1),
            (0.0, 0.0, 0.0)
        );
        // L² over the box splits into D and its complement
        let space = u0.space();
        let d = space.mesh.region_mask(Region::Scatterer);
        let e = space.mesh.region_mask(Region::Exterior);
        let (a, b, c) = (
            u0.norm(None, NormKind::L2),
            u0.norm(Some(&d), NormKind::L2),
            u0.norm(Some(&e), NormKind::L2),
        );
        assert!((a * a - b * b - c * c).abs() <= 1e-12 * a * a);
        assert!(matches!(
            exterior_beyond(space, 1.0),
            Err(Error::RegionEmpty)
        ));
    }

    #[test]
    fn incident_phase_does_not_change_errors() {
        let (ms, set) = correctors(20.0, 0.5, 6);
        let hom = HomogenizedCoeffs::fixed([[2.27, 0.0], [0.0, 2.27]], 1.27);
        let params = MediumParams::reference();
        let inputs = ExpansionInputs {
            microstructure: &ms,
            correctors: &set,
            params: &params,
            epsilon: 0.125,
            seed: 6,
        };
        let pw = PlaneWave::from_angle(3.0, 0.0).unwrap();
        let r1 = evaluate_realization(
            &solve_u0(box_space(), closure(), &hom, &pw).unwrap(),
            inputs,
            0.125,
        )
        .unwrap();
        let rotated = pw.with_amplitude(C::from_polar(1.0, 0.9));
        let r2 = evaluate_realization(
            &solve_u0(box_space(), closure(), &hom, &rotated).unwrap(),
            inputs,
            0.125,
        )
        .unwrap();
        for (x, y) in [
            (r1.err_l2_box, r2.err_l2_box),
            (r1.err_h1_ext, r2.err_h1_ext),
            (r1.err_h1_d_two_scale, r2.err_h1_d_two_scale),
            (r1.err_l2_ext_u1, r2.err_l2_ext_u1),
            (r1.err_h1_ext_u1, r2.err_h1_ext_u1),
            (r1.diag_f, r2.diag_f),
            (r1.diag_g, r2.diag_g),
        ] {
            assert!((x - y).abs() <= 1e-10 * (1.0 + x), "{x} vs {y}");
        }
    }
}
