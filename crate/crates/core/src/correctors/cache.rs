//! On-disk cache of corrector fields.
//!
//! File layout (all little endian): the magic bytes `WHCF`, a `u16` format
//! version, the header `L: f64, T: f64, h: f64, seed: u64`, then the nodal
//! arrays `φ₁, φ₂, β₁, β₂, σ₁, σ₂` as `f64`, each one value per torus dof.
//! Files are named after [`cache_key`], which hashes everything the fields
//! depend on.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::{solve_correctors, CellCoefficients, CorrectorSet};
use crate::error::{Error, Result};
use crate::fem::{FeSpace, FieldP1};
use crate::microstructure::{MediumParams, Microstructure, ProcessConfig};

const MAGIC: &[u8; 4] = b"WHCF";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4 * 8;

/// Hex digest identifying a corrector solve: process configuration
/// (including seed), medium, torus side, massive parameter and mesh step.
pub fn cache_key(
    process: &ProcessConfig,
    params: &MediumParams,
    massive_t: f64,
    mesh_step: f64,
) -> String {
    let mut h = Sha256::new();
    h.update(b"correctors/v1");
    for x in [
        process.proposal_intensity,
        process.hardcore_distance,
        process.inclusion_radius,
        process.period,
    ] {
        h.update(x.to_bits().to_le_bytes());
    }
    h.update(process.seed.to_le_bytes());
    for a in [params.a_matrix, params.a_inclusion] {
        for x in a.iter().flatten() {
            h.update(x.to_bits().to_le_bytes());
        }
    }
    for x in [
        params.n_matrix,
        params.n_inclusion,
        params.n_background,
        process.period,
        massive_t,
        mesh_step,
    ] {
        h.update(x.to_bits().to_le_bytes());
    }
    h.update(process.seed.to_le_bytes());
    h.finalize()[..16]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone)]
pub struct CorrectorCache {
    dir: PathBuf,
}

impl CorrectorCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.whcf"))
    }

    /// Loads the correctors of `ms` if cached, otherwise solves and stores
    /// them. `process` must carry the realization seed.
    pub fn get_or_solve(
        &self,
        space: &Arc<FeSpace>,
        process: &ProcessConfig,
        params: &MediumParams,
        massive_t: f64,
        ms: &Microstructure,
    ) -> Result<CorrectorSet> {
        let step = space.mesh.step();
        let path = self.path_for(&cache_key(process, params, massive_t, step));
        if path.exists() {
            let fields = read_fields(&path, space, process.period, massive_t, step, process.seed)?;
            let coefficients = CellCoefficients::sample(space, ms, params);
            return Ok(assemble_set(space, fields, massive_t, coefficients));
        }
        let set = solve_correctors(space, ms, params, massive_t)?;
        write_fields(&path, &set, process.period, step, process.seed)?;
        Ok(set)
    }
}

fn assemble_set(
    space: &Arc<FeSpace>,
    mut f: Vec<Vec<f64>>,
    massive_t: f64,
    coefficients: CellCoefficients,
) -> CorrectorSet {
    let mut take = || FieldP1::new(space.clone(), f.remove(0)).expect("length checked on read");
    let phi = [take(), take()];
    let beta = [take(), take()];
    let sigma = [take(), take()];
    CorrectorSet {
        space: space.clone(),
        phi,
        beta,
        sigma,
        massive_t,
        coefficients,
    }
}

pub(crate) fn write_fields(
    path: &Path,
    set: &CorrectorSet,
    period: f64,
    step: f64,
    seed: u64,
) -> Result<()> {
    let n = set.space.n_dofs();
    let mut buf = Vec::with_capacity(HEADER_LEN + 6 * 8 * n);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    for x in [period, set.massive_t, step] {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    buf.extend_from_slice(&seed.to_le_bytes());
    for f in set.phi.iter().chain(&set.beta).chain(&set.sigma) {
        for v in f.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    // write-then-rename so concurrent readers never see a partial file
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut file = fs::File::create(&tmp)?;
    file.write_all(&buf)?;
    file.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub(crate) fn read_fields(
    path: &Path,
    space: &FeSpace,
    period: f64,
    massive_t: f64,
    step: f64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let bad = |reason: String| Error::Cache {
        path: path.to_path_buf(),
        reason,
    };
    let bytes = fs::read(path)?;
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(bad("missing WHCF magic".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let word = |k: usize| -> [u8; 8] { bytes[6 + 8 * k..14 + 8 * k].try_into().expect("8 bytes") };
    let header = [
        f64::from_le_bytes(word(0)),
        f64::from_le_bytes(word(1)),
        f64::from_le_bytes(word(2)),
    ];
    let file_seed = u64::from_le_bytes(word(3));
    if header.map(f64::to_bits) != [period, massive_t, step].map(f64::to_bits) || file_seed != seed
    {
        return Err(bad(format!(
            "header (L={}, T={}, h={}, seed={file_seed}) does not match the request",
            header[0], header[1], header[2]
        )));
    }
    let n = space.n_dofs();
    if bytes.len() != HEADER_LEN + 6 * 8 * n {
        return Err(bad(format!(
            "expected {} bytes, found {}",
            HEADER_LEN + 48 * n,
            bytes.len()
        )));
    }
    let body = &bytes[HEADER_LEN..];
    Ok((0..6)
        .map(|k| {
            body[k * 8 * n..(k + 1) * 8 * n]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect()
        })
        .collect())
}
