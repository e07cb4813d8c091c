//! Artifact bundles: one directory per trained reduced model.
//!
//! Every matrix is a `ROMB` file and every structured record is JSON. The
//! manifest lists a SHA-256 digest per file and is written last through an
//! atomic rename, so a directory without `manifest.json` is never a valid
//! bundle. The bundle hash is the digest of the manifest itself; wall-clock
//! timings live in `timings.json`, outside the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::deim::InterfaceReducer;
use crate::error::{Result, RomError};
use crate::mesh::BoxSpec;
use crate::rom::{
    slave_seed, CouplingProducts, GroupLift, OfflineTimings, ProblemSpec, ReducedModel, RomArtifacts, Tolerances,
    TrainingOptions, TrainingSet,
};

use super::matrix::{decode_matrix, encode_matrix};

pub const MANIFEST: &str = "manifest.json";
pub const TIMINGS: &str = "timings.json";
pub const FORMAT: &str = "onewayrom-bundle";
pub const FORMAT_VERSION: u32 = 1;

/// Which optional pieces of a reduced model are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelLayout {
    pub terms: usize,
    /// One flag per forcing term: `true` when a projected load is stored.
    pub loads: Vec<bool>,
    /// One flag per Dirichlet group: `true` for a uniform group.
    pub groups: Vec<bool>,
    pub initial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSizes {
    pub master: usize,
    pub deim: usize,
    pub slave: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub format_version: u32,
    pub training_seed: u64,
    pub slave_seed: u64,
    pub n_train: usize,
    pub tolerances: Tolerances,
    pub sizes: BasisSizes,
    /// SHA-256 of the JSON mesh description, per model.
    pub mesh_hashes: BTreeMap<String, String>,
    pub master_layout: ModelLayout,
    pub slave_layout: ModelLayout,
    /// File name to SHA-256 digest.
    pub files: BTreeMap<String, String>,
}

/// DEIM data not carried by the matrix files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ReducerRecord {
    slave_points: Vec<usize>,
    master_dofs: Vec<usize>,
    tolerance: f64,
    condition_number: f64,
    inverse_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TrainingRecord {
    tolerances: Tolerances,
    options: TrainingOptions,
    set: TrainingSet,
}

/// A bundle written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleInfo {
    pub dir: PathBuf,
    pub hash: String,
    pub manifest: Manifest,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable record");
    out.push(b'\n');
    out
}

fn column(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_column_slice(v.len(), 1, v)
}

fn layout(m: &ReducedModel) -> ModelLayout {
    ModelLayout {
        terms: m.terms.len(),
        loads: m.loads.iter().map(Option::is_some).collect(),
        groups: m.group_lifts.iter().map(|g| g.uniform).collect(),
        initial: m.initial.is_some(),
    }
}

fn model_files(prefix: &str, basis_name: &str, m: &ReducedModel, out: &mut Vec<(String, Vec<u8>)>) {
    let mut put = |name: String, mat: &DMatrix<f64>| out.push((name, encode_matrix(mat)));
    put(format!("{basis_name}.romb"), &m.basis);
    put(format!("{prefix}_sv.romb"), &column(&m.singular_values));
    put(format!("{prefix}_mass.romb"), &m.mass);
    for (q, a) in m.terms.iter().enumerate() {
        put(format!("{prefix}_A{q}.romb"), a);
    }
    for (k, f) in m.loads.iter().enumerate() {
        if let Some(f) = f {
            put(format!("{prefix}_f{k}.romb"), &column(f.as_slice()));
        }
    }
    for (g, lift) in m.group_lifts.iter().enumerate() {
        put(format!("{prefix}_g{g}_mass.romb"), &lift.mass);
        for (q, a) in lift.terms.iter().enumerate() {
            put(format!("{prefix}_g{g}_A{q}.romb"), a);
        }
    }
    if let Some(u0) = &m.initial {
        put(format!("{prefix}_u0.romb"), &column(u0.as_slice()));
    }
}

fn mesh_hash(mesh: &BoxSpec) -> String {
    sha256_hex(&serde_json::to_vec(mesh).expect("serializable mesh"))
}

/// Serialized bundle contents, in write order, plus the manifest.
pub fn bundle_contents(art: &RomArtifacts) -> (Vec<(String, Vec<u8>)>, Manifest) {
    let mut files = Vec::new();
    files.push(("problem.json".to_string(), json(&art.problem)));
    files.push((
        "training.json".to_string(),
        json(&TrainingRecord { tolerances: art.tolerances, options: art.options, set: art.training.clone() }),
    ));
    let r = &art.reducer;
    files.push((
        "reducer.json".to_string(),
        json(&ReducerRecord {
            slave_points: r.slave_points.clone(),
            master_dofs: r.master_dofs.clone(),
            tolerance: r.tolerance,
            condition_number: r.condition_number,
            inverse_norm: r.inverse_norm,
        }),
    ));
    model_files("master", "V1", &art.master, &mut files);
    model_files("slave", "V2", &art.slave, &mut files);
    files.push(("PhiD.romb".into(), encode_matrix(&r.phi)));
    files.push(("deim_sv.romb".into(), encode_matrix(&column(&r.singular_values))));
    files.push(("deim_W.romb".into(), encode_matrix(&r.interpolant)));
    let c = &art.coupling;
    files.push(("coupling_extraction.romb".into(), encode_matrix(&c.extraction)));
    files.push(("coupling_transfer.romb".into(), encode_matrix(&c.full_transfer)));
    files.push(("coupling_lift_mass.romb".into(), encode_matrix(&c.lift_mass)));
    files.push(("coupling_lift_mass_red.romb".into(), encode_matrix(&c.lift_mass_reduced)));
    for (q, (l, lr)) in c.lift_terms.iter().zip(&c.lift_terms_reduced).enumerate() {
        files.push((format!("coupling_lift_A{q}.romb"), encode_matrix(l)));
        files.push((format!("coupling_lift_red_A{q}.romb"), encode_matrix(lr)));
    }
    let manifest = Manifest {
        format: FORMAT.into(),
        format_version: FORMAT_VERSION,
        training_seed: art.options.seed,
        slave_seed: slave_seed(art.options.seed),
        n_train: art.options.n_train,
        tolerances: art.tolerances,
        sizes: BasisSizes { master: art.n1(), deim: art.num_deim_points(), slave: art.n2() },
        mesh_hashes: [
            ("master".to_string(), mesh_hash(&art.problem.master.mesh)),
            ("slave".to_string(), mesh_hash(&art.problem.slave.mesh)),
        ]
        .into_iter()
        .collect(),
        master_layout: layout(&art.master),
        slave_layout: layout(&art.slave),
        files: files.iter().map(|(n, b)| (n.clone(), sha256_hex(b))).collect(),
    };
    (files, manifest)
}

/// Hash a bundle would have, without touching the disk.
pub fn bundle_hash(art: &RomArtifacts) -> String {
    sha256_hex(&json(&bundle_contents(art).1))
}

/// Writes `art` into `dir`, replacing any previous bundle there.
///
/// On failure every file written by this call is removed, and so is `dir` if
/// this call created it.
pub fn save_bundle(dir: impl AsRef<Path>, art: &RomArtifacts) -> Result<BundleInfo> {
    let dir = dir.as_ref();
    let created = !dir.exists();
    fs::create_dir_all(dir).map_err(|e| RomError::io(dir, e))?;
    let manifest_path = dir.join(MANIFEST);
    // invalidate the old bundle before overwriting any of its files
    if manifest_path.exists() {
        fs::remove_file(&manifest_path).map_err(|e| RomError::io(&manifest_path, e))?;
    }
    let (files, manifest) = bundle_contents(art);
    let manifest_bytes = json(&manifest);
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<()> {
        for (name, bytes) in &files {
            let p = dir.join(name);
            written.push(p.clone());
            fs::write(&p, bytes).map_err(|e| RomError::io(&p, e))?;
        }
        let tp = dir.join(TIMINGS);
        written.push(tp.clone());
        fs::write(&tp, json(&art.timings)).map_err(|e| RomError::io(&tp, e))?;
        let tmp = dir.join(format!("{MANIFEST}.partial"));
        written.push(tmp.clone());
        fs::write(&tmp, &manifest_bytes).map_err(|e| RomError::io(&tmp, e))?;
        fs::rename(&tmp, &manifest_path).map_err(|e| RomError::io(&manifest_path, e))?;
        Ok(())
    })();
    if let Err(e) = result {
        if created {
            let _ = fs::remove_dir_all(dir);
        } else {
            for p in &written {
                let _ = fs::remove_file(p);
            }
        }
        return Err(e);
    }
    Ok(BundleInfo { dir: dir.to_path_buf(), hash: sha256_hex(&manifest_bytes), manifest })
}

fn format_err(path: &Path, message: impl Into<String>) -> RomError {
    RomError::Format { path: path.into(), message: message.into() }
}

pub fn read_manifest(dir: impl AsRef<Path>) -> Result<(Manifest, String)> {
    let path = dir.as_ref().join(MANIFEST);
    let bytes = fs::read(&path).map_err(|e| RomError::io(&path, e))?;
    let manifest: Manifest = serde_json::from_slice(&bytes).map_err(|e| format_err(&path, e.to_string()))?;
    if manifest.format != FORMAT || manifest.format_version != FORMAT_VERSION {
        return Err(format_err(
            &path,
            format!("unsupported bundle format {} v{}", manifest.format, manifest.format_version),
        ));
    }
    Ok((manifest, sha256_hex(&bytes)))
}

/// Reads files on demand, checking each against its manifest digest.
struct Reader<'a> {
    dir: &'a Path,
    manifest: &'a Manifest,
}

impl Reader<'_> {
    fn bytes(&self, name: &str) -> Result<Vec<u8>> {
        let path = self.dir.join(name);
        let expected = self
            .manifest
            .files
            .get(name)
            .ok_or_else(|| format_err(&path, "file is not listed in the manifest"))?;
        let bytes = fs::read(&path).map_err(|e| RomError::io(&path, e))?;
        if &sha256_hex(&bytes) != expected {
            return Err(format_err(&path, "digest does not match the manifest"));
        }
        Ok(bytes)
    }

    fn matrix(&self, name: &str) -> Result<DMatrix<f64>> {
        let bytes = self.bytes(name)?;
        decode_matrix(&bytes).map_err(|m| format_err(&self.dir.join(name), m))
    }

    fn vector(&self, name: &str) -> Result<Vec<f64>> {
        let m = self.matrix(name)?;
        if m.ncols() != 1 && m.nrows() > 0 {
            return Err(format_err(&self.dir.join(name), format!("expected a column, got {:?}", m.shape())));
        }
        Ok(m.as_slice().to_vec())
    }

    fn json<T: DeserializeOwned>(&self, name: &str) -> Result<T> {
        let bytes = self.bytes(name)?;
        serde_json::from_slice(&bytes).map_err(|e| format_err(&self.dir.join(name), e.to_string()))
    }

    fn model(&self, prefix: &str, basis_name: &str, l: &ModelLayout) -> Result<ReducedModel> {
        let terms = (0..l.terms).map(|q| self.matrix(&format!("{prefix}_A{q}.romb"))).collect::<Result<_>>()?;
        let loads = l
            .loads
            .iter()
            .enumerate()
            .map(|(k, &present)| {
                present.then(|| self.vector(&format!("{prefix}_f{k}.romb")).map(DVector::from_vec)).transpose()
            })
            .collect::<Result<_>>()?;
        let group_lifts = l
            .groups
            .iter()
            .enumerate()
            .map(|(g, &uniform)| {
                Ok(GroupLift {
                    uniform,
                    mass: self.matrix(&format!("{prefix}_g{g}_mass.romb"))?,
                    terms: (0..l.terms)
                        .map(|q| self.matrix(&format!("{prefix}_g{g}_A{q}.romb")))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        let initial =
            l.initial.then(|| self.vector(&format!("{prefix}_u0.romb")).map(DVector::from_vec)).transpose()?;
        Ok(ReducedModel {
            basis: self.matrix(&format!("{basis_name}.romb"))?,
            singular_values: self.vector(&format!("{prefix}_sv.romb"))?,
            mass: self.matrix(&format!("{prefix}_mass.romb"))?,
            terms,
            loads,
            group_lifts,
            initial,
        })
    }
}

/// Loads and verifies a bundle. Timings default to zero when `timings.json` is absent.
pub fn load_bundle(dir: impl AsRef<Path>) -> Result<(RomArtifacts, String)> {
    let dir = dir.as_ref();
    let (manifest, hash) = read_manifest(dir)?;
    let rd = Reader { dir, manifest: &manifest };
    let problem: ProblemSpec = rd.json("problem.json")?;
    let training: TrainingRecord = rd.json("training.json")?;
    let rec: ReducerRecord = rd.json("reducer.json")?;
    let master = rd.model("master", "V1", &manifest.master_layout)?;
    let slave = rd.model("slave", "V2", &manifest.slave_layout)?;
    let reducer = InterfaceReducer {
        phi: rd.matrix("PhiD.romb")?,
        singular_values: rd.vector("deim_sv.romb")?,
        tolerance: rec.tolerance,
        slave_points: rec.slave_points,
        master_dofs: rec.master_dofs,
        interpolant: rd.matrix("deim_W.romb")?,
        condition_number: rec.condition_number,
        inverse_norm: rec.inverse_norm,
    };
    let q = manifest.slave_layout.terms;
    let coupling = CouplingProducts {
        extraction: rd.matrix("coupling_extraction.romb")?,
        full_transfer: rd.matrix("coupling_transfer.romb")?,
        lift_terms: (0..q).map(|q| rd.matrix(&format!("coupling_lift_A{q}.romb"))).collect::<Result<_>>()?,
        lift_mass: rd.matrix("coupling_lift_mass.romb")?,
        lift_terms_reduced: (0..q)
            .map(|q| rd.matrix(&format!("coupling_lift_red_A{q}.romb")))
            .collect::<Result<_>>()?,
        lift_mass_reduced: rd.matrix("coupling_lift_mass_red.romb")?,
    };
    let tp = dir.join(TIMINGS);
    let timings: OfflineTimings = match fs::read(&tp) {
        Ok(b) => serde_json::from_slice(&b).map_err(|e| format_err(&tp, e.to_string()))?,
        Err(_) => OfflineTimings::default(),
    };
    let art = RomArtifacts {
        problem,
        tolerances: training.tolerances,
        options: training.options,
        training: training.set,
        master,
        slave,
        reducer,
        coupling,
        timings,
    };
    Ok((art, hash))
}
