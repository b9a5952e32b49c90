//! Periodized corrector problems on the torus `[0, L)²`.
//!
//! All cell problems carry a massive term `(1/T)u` that removes the constant
//! kernel of the periodic Laplacian; each solution is then shifted to zero
//! mean. In two dimensions the flux potential `σ_i` has a single independent
//! entry `s_i = σ_{i,12} = −σ_{i,21}`, so `∇·σ_i = (∂₂s_i, −∂₁s_i)`.
//!
//! Sign conventions: `∇·β = n − n_hom`, `∇·σ_i = q_i` with
//! `q_i = a(e_i + ∇φ_i) − a_hom e_i`.

mod cache;

use std::sync::Arc;

use rayon::prelude::*;

pub use cache::{cache_key, CorrectorCache};

use crate::error::{Error, Result};
use crate::fem::{assemble, assemble_load, Coefficients, Factorization, FeSpace, FieldP1, Load};
use crate::harness::derive_seed;
use crate::microstructure::{
    sample_matern2, Mat2, MediumParams, Microstructure, ProcessConfig, IDENTITY,
};

/// Per-triangle coefficients of the unit-scale medium on a torus mesh,
/// sampled at centroids.
#[derive(Debug, Clone)]
pub struct CellCoefficients {
    pub a: Vec<Mat2>,
    pub n: Vec<f64>,
}

impl CellCoefficients {
    pub fn sample(space: &FeSpace, ms: &Microstructure, params: &MediumParams) -> Self {
        let (a, n) = (0..space.mesh.n_triangles())
            .map(|t| params.at(ms, space.mesh.centroid(t)))
            .unzip();
        Self { a, n }
    }

    /// Torus average of `n`.
    pub fn mean_n(&self, space: &FeSpace) -> f64 {
        let areas = space.mesh.areas();
        self.n.iter().zip(areas).map(|(n, a)| n * a).sum::<f64>() / space.mesh.total_area()
    }
}

/// Corrector fields of one realization.
#[derive(Debug, Clone)]
pub struct CorrectorSet {
    pub space: Arc<FeSpace>,
    pub phi: [FieldP1<f64>; 2],
    pub beta: [FieldP1<f64>; 2],
    /// `s_i = σ_{i,12}`.
    pub sigma: [FieldP1<f64>; 2],
    pub massive_t: f64,
    pub coefficients: CellCoefficients,
}

impl CorrectorSet {
    /// `σ_{i,jm}` expanded from the stored scalar by skew-symmetry.
    pub fn sigma_matrix(&self, i: usize, t: usize) -> Mat2 {
        let v = self.sigma[i].element_values(t);
        let s = (v[0] + v[1] + v[2]) / 3.0;
        [[0.0, s], [-s, 0.0]]
    }

    /// Energy-form and flux-form effective coefficients of this realization
    /// together with its mean `n`.
    pub fn realization_coeffs(&self, seed: u64, volume_fraction: f64) -> RealizationCoeffs {
        let (energy, flux) = effective_coefficients(&self.space, &self.coefficients.a, &self.phi);
        RealizationCoeffs {
            seed,
            a_energy: energy,
            a_flux: flux,
            n_mean: self.coefficients.mean_n(&self.space),
            volume_fraction,
            mesh_volume_fraction: f64::NAN,
        }
    }
}

/// Cell averages `⟨a(e_i+∇φ_i)·(e_j+∇φ_j)⟩` (energy form) and
/// `⟨a(e_i+∇φ_i)⟩_j` (flux form) for element-wise coefficients `a`.
pub fn effective_coefficients(space: &FeSpace, a: &[Mat2], phi: &[FieldP1<f64>; 2]) -> (Mat2, Mat2) {
    let mesh = &space.mesh;
    let area = mesh.total_area();
    let mut energy = [[0.0; 2]; 2];
    let mut flux = [[0.0; 2]; 2];
    for t in 0..mesh.n_triangles() {
        let w = mesh.areas()[t] / area;
        let e: [[f64; 2]; 2] = std::array::from_fn(|i| {
            let g = phi[i].element_gradient(t);
            [if i == 0 { 1.0 } else { 0.0 } + g[0], if i == 1 { 1.0 } else { 0.0 } + g[1]]
        });
        for i in 0..2 {
            let ae = mat_vec(&a[t], e[i]);
            for j in 0..2 {
                energy[i][j] += w * (ae[0] * e[j][0] + ae[1] * e[j][1]);
                flux[i][j] += w * ae[j];
            }
        }
    }
    (energy, flux)
}

#[inline]
pub(crate) fn mat_vec(a: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

/// Effective quantities of a single realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizationCoeffs {
    pub seed: u64,
    /// `⨍ a(e_i + ∇φ_i)·(e_j + ∇φ_j)`.
    pub a_energy: Mat2,
    /// `⨍ e_j·a(e_i + ∇φ_i)`.
    pub a_flux: Mat2,
    /// `⨍ n`.
    pub n_mean: f64,
    /// Exact disk-area fraction of the sample.
    pub volume_fraction: f64,
    /// Fraction of torus area whose triangles are tagged as inclusion.
    pub mesh_volume_fraction: f64,
}

/// Monte-Carlo estimate of the homogenized coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogenizedCoeffs {
    pub a_hom: Mat2,
    pub n_hom: f64,
    pub n_realizations: usize,
    /// Sample standard deviation of each entry of the per-realization `a`.
    pub spread: Mat2,
    pub n_spread: f64,
    pub realizations: Vec<RealizationCoeffs>,
}

impl HomogenizedCoeffs {
    /// Constant coefficients with no ensemble behind them.
    pub fn fixed(a_hom: Mat2, n_hom: f64) -> Self {
        Self {
            a_hom,
            n_hom,
            n_realizations: 0,
            spread: [[0.0; 2]; 2],
            n_spread: 0.0,
            realizations: Vec::new(),
        }
    }

    /// Averages in realization order; the spread uses the `N − 1` estimator
    /// (zero for a single realization).
    pub fn from_realizations(realizations: Vec<RealizationCoeffs>) -> Result<Self> {
        let n = realizations.len();
        if n == 0 {
            return Err(Error::InvalidInput("no realizations to average".into()));
        }
        let mean = |f: &dyn Fn(&RealizationCoeffs) -> f64| {
            realizations.iter().map(f).sum::<f64>() / n as f64
        };
        let std = |f: &dyn Fn(&RealizationCoeffs) -> f64, m: f64| {
            if n < 2 {
                0.0
            } else {
                (realizations.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / (n - 1) as f64)
                    .sqrt()
            }
        };
        let mut a_hom = [[0.0; 2]; 2];
        let mut spread = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let f = move |r: &RealizationCoeffs| r.a_energy[i][j];
                a_hom[i][j] = mean(&f);
                spread[i][j] = std(&f, a_hom[i][j]);
            }
        }
        let n_hom = mean(&|r| r.n_mean);
        let n_spread = std(&|r| r.n_mean, n_hom);
        Ok(Self {
            a_hom,
            n_hom,
            n_realizations: n,
            spread,
            n_spread,
            realizations,
        })
    }

    /// Mean of the exact disk-area fractions of the realizations.
    pub fn mean_volume_fraction(&self) -> f64 {
        self.realizations
            .iter()
            .map(|r| r.volume_fraction)
            .sum::<f64>()
            / self.realizations.len().max(1) as f64
    }

    /// Mean of the mesh-tagged inclusion fractions.
    pub fn mean_mesh_volume_fraction(&self) -> f64 {
        self.realizations
            .iter()
            .map(|r| r.mesh_volume_fraction)
            .sum::<f64>()
            / self.realizations.len().max(1) as f64
    }

    /// Standard error `spread / √N` of entry `(i, j)`.
    pub fn standard_error(&self, i: usize, j: usize) -> f64 {
        self.spread[i][j] / (self.n_realizations.max(1) as f64).sqrt()
    }
}

/// Fluxes `q_i = a(e_i + ∇φ_i) − a_hom e_i` and commutators
/// `Ξ_i = (a − a_hom)(e_i + ∇φ_i)` per triangle.
#[derive(Debug, Clone)]
pub struct FluxField {
    pub q: [Vec<[f64; 2]>; 2],
    pub xi: [Vec<[f64; 2]>; 2],
}

pub fn flux_and_commutator(phi: &[FieldP1<f64>; 2], a: &[Mat2], a_hom: &Mat2) -> FluxField {
    let nt = a.len();
    let mut q = [Vec::with_capacity(nt), Vec::with_capacity(nt)];
    let mut xi = [Vec::with_capacity(nt), Vec::with_capacity(nt)];
    for i in 0..2 {
        for (t, at) in a.iter().enumerate() {
            let g = phi[i].element_gradient(t);
            let e = [
                g[0] + if i == 0 { 1.0 } else { 0.0 },
                g[1] + if i == 1 { 1.0 } else { 0.0 },
            ];
            let ae = mat_vec(at, e);
            let he = mat_vec(a_hom, e);
            q[i].push([ae[0] - a_hom[0][i], ae[1] - a_hom[1][i]]);
            xi[i].push([ae[0] - he[0], ae[1] - he[1]]);
        }
    }
    FluxField { q, xi }
}

/// SPD matrix `(1/T)M + K_a` of the massive periodic problems.
fn massive_factorization(
    space: &FeSpace,
    a: &[Mat2],
    massive_t: f64,
) -> Result<Factorization<f64>> {
    if !(massive_t > 0.0) {
        return Err(Error::InvalidInput(format!(
            "massive parameter T must be > 0, got {massive_t}"
        )));
    }
    let c = vec![1.0 / massive_t; a.len()];
    let (m, _) = assemble(
        space,
        Coefficients {
            a,
            c: &c,
            boundary_gamma: None,
        },
        &Load::default(),
    );
    Factorization::cholesky(m)
}

fn solve_mean_free(
    space: &Arc<FeSpace>,
    factor: &Factorization<f64>,
    divergence: Vec<[f64; 2]>,
) -> Result<FieldP1<f64>> {
    let rhs = assemble_load(
        space,
        &Load {
            divergence,
            ..Load::default()
        },
    );
    let x = factor.solve(&rhs)?;
    let mut f = FieldP1::new(space.clone(), x)?;
    let m = f.mean();
    f.values_mut().iter_mut().for_each(|v| *v -= m);
    Ok(f)
}

/// `φ_i` from `(1/T)φ_i − ∇·a(∇φ_i + e_i) = 0`, mean zero.
pub fn solve_phi(space: &Arc<FeSpace>, a: &[Mat2], massive_t: f64) -> Result<[FieldP1<f64>; 2]> {
    let factor = massive_factorization(space, a, massive_t)?;
    let p1 = solve_mean_free(
        space,
        &factor,
        a.iter().map(|a| [a[0][0], a[1][0]]).collect(),
    )?;
    let p2 = solve_mean_free(
        space,
        &factor,
        a.iter().map(|a| [a[0][1], a[1][1]]).collect(),
    )?;
    Ok([p1, p2])
}

fn laplace_factorization(space: &FeSpace, massive_t: f64) -> Result<Factorization<f64>> {
    massive_factorization(space, &vec![IDENTITY; space.mesh.n_triangles()], massive_t)
}

/// `β_i` from `(1/T)β_i − Δβ_i = −∂_i(n − n_hom)`, mean zero.
pub fn solve_beta(
    space: &Arc<FeSpace>,
    n: &[f64],
    n_hom: f64,
    massive_t: f64,
) -> Result<[FieldP1<f64>; 2]> {
    let factor = laplace_factorization(space, massive_t)?;
    solve_beta_with(space, &factor, n, n_hom)
}

fn solve_beta_with(
    space: &Arc<FeSpace>,
    factor: &Factorization<f64>,
    n: &[f64],
    n_hom: f64,
) -> Result<[FieldP1<f64>; 2]> {
    let b1 = solve_mean_free(
        space,
        factor,
        n.iter().map(|n| [-(n - n_hom), 0.0]).collect(),
    )?;
    let b2 = solve_mean_free(
        space,
        factor,
        n.iter().map(|n| [0.0, -(n - n_hom)]).collect(),
    )?;
    Ok([b1, b2])
}

/// `s_i` from `(1/T)s_i − Δs_i = ∂₁q_{i2} − ∂₂q_{i1}`, mean zero.
pub fn solve_sigma(
    space: &Arc<FeSpace>,
    flux: &FluxField,
    massive_t: f64,
) -> Result<[FieldP1<f64>; 2]> {
    let factor = laplace_factorization(space, massive_t)?;
    solve_sigma_with(space, &factor, flux)
}

fn solve_sigma_with(
    space: &Arc<FeSpace>,
    factor: &Factorization<f64>,
    flux: &FluxField,
) -> Result<[FieldP1<f64>; 2]> {
    let s = |i: usize| {
        solve_mean_free(
            space,
            factor,
            flux.q[i].iter().map(|q| [q[1], -q[0]]).collect(),
        )
    };
    Ok([s(0)?, s(1)?])
}

/// Solves `φ`, `β` and `σ` for one microstructure on `space`. `β` and `σ`
/// do not depend on the constants `n_hom`, `a_hom` (their right-hand sides
/// only see derivatives), so this realization's own averages are used.
pub fn solve_correctors(
    space: &Arc<FeSpace>,
    ms: &Microstructure,
    params: &MediumParams,
    massive_t: f64,
) -> Result<CorrectorSet> {
    let coefficients = CellCoefficients::sample(space, ms, params);
    let phi = solve_phi(space, &coefficients.a, massive_t)?;
    let lap = laplace_factorization(space, massive_t)?;
    let n_mean = coefficients.mean_n(space);
    let beta = solve_beta_with(space, &lap, &coefficients.n, n_mean)?;
    let partial = CorrectorSet {
        space: space.clone(),
        phi,
        beta,
        sigma: [FieldP1::zeros(space.clone()), FieldP1::zeros(space.clone())],
        massive_t,
        coefficients,
    };
    let a_own = partial.realization_coeffs(0, 0.0).a_energy;
    let flux = flux_and_commutator(&partial.phi, &partial.coefficients.a, &a_own);
    let sigma = solve_sigma_with(space, &lap, &flux)?;
    Ok(CorrectorSet { sigma, ..partial })
}

/// Fraction of the mesh area tagged with the inclusion coefficient.
pub fn mesh_volume_fraction(space: &FeSpace, ms: &Microstructure) -> f64 {
    let mesh = &space.mesh;
    let inside: f64 = (0..mesh.n_triangles())
        .filter(|&t| ms.contains(mesh.centroid(t)))
        .map(|t| mesh.areas()[t])
        .sum();
    inside / mesh.total_area()
}

/// Settings of an ensemble of corrector solves.
#[derive(Debug, Clone)]
pub struct EnsembleSettings {
    /// Process template; `period` is the torus side and `seed` is ignored.
    pub process: ProcessConfig,
    pub params: MediumParams,
    pub massive_t: f64,
    pub mesh_step: f64,
    pub n_realizations: usize,
    pub master_seed: u64,
    /// Worker threads for realization-level parallelism (results do not
    /// depend on it).
    pub workers: usize,
}

impl EnsembleSettings {
    pub fn realization_seed(&self, m: usize) -> u64 {
        derive_seed(self.master_seed, "micro", m as u64)
    }
}

/// One realization: its microstructure, correctors and effective quantities.
#[derive(Debug, Clone)]
pub struct Realization {
    pub index: usize,
    pub seed: u64,
    pub microstructure: Arc<Microstructure>,
    pub correctors: Arc<CorrectorSet>,
    pub coeffs: RealizationCoeffs,
}

/// Samples, solves (or loads from `cache`) every realization of the
/// ensemble. Results are returned in realization order; a failing
/// realization does not stop the others.
pub fn solve_realizations(
    settings: &EnsembleSettings,
    cache: Option<&CorrectorCache>,
) -> Result<Vec<Result<Realization>>> {
    if settings.n_realizations == 0 {
        return Err(Error::InvalidInput(
            "ensemble needs at least one realization".into(),
        ));
    }
    settings.process.validate()?;
    settings.params.validate()?;
    let space = crate::fem::build_torus_mesh(settings.process.period, settings.mesh_step)?;
    let run = |m: usize| -> Result<Realization> {
        let seed = settings.realization_seed(m);
        let wrap = |e: Error| Error::Realization {
            index: m,
            source: Box::new(e),
        };
        let ms = sample_matern2(&settings.process.with_seed(seed)).map_err(wrap)?;
        let correctors = match cache {
            Some(c) => c.get_or_solve(
                &space,
                &settings.process.with_seed(seed),
                &settings.params,
                settings.massive_t,
                &ms,
            ),
            None => solve_correctors(&space, &ms, &settings.params, settings.massive_t),
        }
        .map_err(wrap)?;
        let mut coeffs =
            correctors.realization_coeffs(seed, crate::microstructure::volume_fraction(&ms));
        coeffs.mesh_volume_fraction = mesh_volume_fraction(&space, &ms);
        Ok(Realization {
            index: m,
            seed,
            microstructure: Arc::new(ms),
            correctors: Arc::new(correctors),
            coeffs,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..settings.n_realizations)
            .into_par_iter()
            .map(run)
            .collect()
    }))
}

/// Like [`solve_realizations`] but fails on the first failed realization.
pub fn solve_ensemble(
    settings: &EnsembleSettings,
    cache: Option<&CorrectorCache>,
) -> Result<Vec<Realization>> {
    solve_realizations(settings, cache)?.into_iter().collect()
}

/// Monte-Carlo homogenized coefficients (energy form) of an ensemble.
pub fn homogenize_ensemble(
    settings: &EnsembleSettings,
    cache: Option<&CorrectorCache>,
) -> Result<HomogenizedCoeffs> {
    let reals = solve_ensemble(settings, cache)?;
    HomogenizedCoeffs::from_realizations(reals.iter().map(|r| r.coeffs).collect())
}

/// Dual norm `sup_v |r(v)| / ‖v‖_{H¹}` over P1 test functions, for a
/// residual functional given by its values on the basis.
pub fn dual_norm(space: &FeSpace, residual: &[f64]) -> Result<f64> {
    let nt = space.mesh.n_triangles();
    let (m, _) = assemble(
        space,
        Coefficients {
            a: &vec![IDENTITY; nt],
            c: &vec![1.0; nt],
            boundary_gamma: None,
        },
        &Load::default(),
    );
    let z = Factorization::cholesky(m)?.solve(residual)?;
    Ok(residual
        .iter()
        .zip(&z)
        .map(|(r, z)| r * z)
        .sum::<f64>()
        .max(0.0)
        .sqrt())
}

/// Basis values of `v ↦ ∫ β_i ∂_i v + ∫ (n − n_hom) v`, which vanishes when
/// `∇·β = n − n_hom`.
pub fn beta_residual(set: &CorrectorSet, n_hom: f64) -> Vec<f64> {
    let space = &set.space;
    let mesh = &space.mesh;
    let mut r = vec![0.0; space.n_dofs()];
    for t in 0..mesh.n_triangles() {
        let dofs = space.element_dofs(t);
        let g = mesh.basis_gradients(t);
        let area = mesh.areas()[t];
        let b = [
            mean3(set.beta[0].element_values(t)),
            mean3(set.beta[1].element_values(t)),
        ];
        let f = set.coefficients.n[t] - n_hom;
        for k in 0..3 {
            r[dofs[k]] += area * (b[0] * g[k][0] + b[1] * g[k][1] + f / 3.0);
        }
    }
    r
}

/// Basis values of component `j` of `v ↦ ∫ σ_i:∇v + ∫ q_i v`, which vanishes
/// when `∇·σ_i = q_i`.
pub fn sigma_residual(set: &CorrectorSet, flux: &FluxField, i: usize, j: usize) -> Vec<f64> {
    let space = &set.space;
    let mesh = &space.mesh;
    let mut r = vec![0.0; space.n_dofs()];
    for t in 0..mesh.n_triangles() {
        let dofs = space.element_dofs(t);
        let g = mesh.basis_gradients(t);
        let area = mesh.areas()[t];
        let sig = set.sigma_matrix(i, t);
        let q = flux.q[i][t][j];
        for k in 0..3 {
            r[dofs[k]] += area * (sig[j][0] * g[k][0] + sig[j][1] * g[k][1] + q / 3.0);
        }
    }
    r
}

#[inline]
fn mean3(v: [f64; 3]) -> f64 {
    (v[0] + v[1] + v[2]) / 3.0
}
