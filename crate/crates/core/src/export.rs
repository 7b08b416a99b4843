//! Dataset directories: `manifest.json` plus one blob per record input under
//! `blobs/`.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, Array3, Ix1, Ix2, Ix3};

use crate::baseline::{DbEntry, FingerprintDatabase};
use crate::channel::{ArrayGeometry, OfdmConfig};
use crate::error::{Error, Result};
use crate::manifest::{read_manifest, validate_manifest, write_manifest, BlobPaths, Manifest, ManifestRecord};
use crate::scene::FingerprintRecord;
use crate::store::{read_tensor, write_tensor, TensorBlob};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const BLOB_DIR: &str = "blobs";

pub fn blob_paths(id: &str) -> BlobPaths {
    let p = |name: &str| format!("{BLOB_DIR}/{id}.{name}.tbf");
    BlobPaths { tbf: p("tbf"), x_ad: p("x_ad"), x_ma: p("x_ma"), x_do: p("x_do") }
}

fn manifest_record(r: &FingerprintRecord) -> ManifestRecord {
    ManifestRecord {
        id: r.id.clone(),
        position_m: r.position,
        direction_class: r.direction_class,
        heading_rad: r.heading,
        speed_mps: r.speed,
        snr_db: r.snr_db,
        blobs: blob_paths(&r.id),
        pair_of: r.pair_of.clone(),
        extra: Default::default(),
    }
}

/// Writes every record and the manifest into `dir`, creating it if needed.
/// The fingerprint and real maps are stored as `f64`, the mask as `f32`.
pub fn write_dataset(
    dir: impl AsRef<Path>,
    records: &[FingerprintRecord],
    geom: &ArrayGeometry,
    cfg: &OfdmConfig,
    scene_seed: u64,
) -> Result<Manifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir.join(BLOB_DIR))?;
    let mut m = Manifest::new(*geom, *cfg, scene_seed);
    for r in records {
        let mr = manifest_record(r);
        write_tensor(dir.join(&mr.blobs.tbf), &TensorBlob::from_f64(&r.tbf.data.clone().into_dyn())?)?;
        write_tensor(dir.join(&mr.blobs.x_ad), &TensorBlob::from_f64(&r.inputs.x_ad.clone().into_dyn())?)?;
        write_tensor(dir.join(&mr.blobs.x_ma), &TensorBlob::from_f32(&r.inputs.x_ma.mapv(f32::from).into_dyn())?)?;
        write_tensor(dir.join(&mr.blobs.x_do), &TensorBlob::from_f64(&r.inputs.x_do.clone().into_dyn())?)?;
        m.records.push(mr);
    }
    write_manifest(dir.join(MANIFEST_FILE), &m)?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedRecord {
    pub record: ManifestRecord,
    pub tbf: Array3<f64>,
    pub x_ad: Array2<f64>,
    pub x_ma: Array2<u8>,
    pub x_do: Array1<f64>,
}

fn real(blob: &TensorBlob, path: &Path) -> Result<ndarray::ArrayD<f64>> {
    blob.to_f64().ok_or_else(|| Error::Manifest { path: path.display().to_string(), message: "expected a real tensor".into() })
}

fn shape_err(path: &Path) -> impl Fn(ndarray::ShapeError) -> Error + '_ {
    move |e| Error::Manifest { path: path.display().to_string(), message: e.to_string() }
}

/// Reads and validates a dataset directory.
pub fn read_dataset(dir: impl AsRef<Path>) -> Result<(Manifest, Vec<LoadedRecord>)> {
    let dir = dir.as_ref();
    let m = read_manifest(dir.join(MANIFEST_FILE))?;
    validate_manifest(&m, dir)?;
    let mut out = Vec::with_capacity(m.records.len());
    for r in &m.records {
        let load = |rel: &str| -> Result<ndarray::ArrayD<f64>> {
            let p = dir.join(rel);
            real(&read_tensor(&p)?, &p)
        };
        let p = dir.join(&r.blobs.x_ma);
        out.push(LoadedRecord {
            tbf: load(&r.blobs.tbf)?.into_dimensionality::<Ix3>().map_err(shape_err(&p))?,
            x_ad: load(&r.blobs.x_ad)?.into_dimensionality::<Ix2>().map_err(shape_err(&p))?,
            x_ma: load(&r.blobs.x_ma)?.into_dimensionality::<Ix2>().map_err(shape_err(&p))?.mapv(|v| u8::from(v != 0.0)),
            x_do: load(&r.blobs.x_do)?.into_dimensionality::<Ix1>().map_err(shape_err(&p))?,
            record: r.clone(),
        });
    }
    Ok((m, out))
}

pub fn database_from_loaded(records: &[LoadedRecord]) -> FingerprintDatabase {
    FingerprintDatabase {
        entries: records
            .iter()
            .map(|r| DbEntry {
                position: r.record.position_m,
                direction_class: r.record.direction_class,
                features: r.x_ad.iter().copied().collect(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{build_dataset, build_scene, DatasetConfig, GridSpec, SceneConfig};

    #[test]
    fn export_reads_back_bit_exact() {
        let geom = ArrayGeometry::half_wavelength(2, 2, 5.8e9);
        let cfg = OfdmConfig { n_subcarriers: 32, cp_length: 8, ..OfdmConfig::default() };
        let scene = build_scene(&SceneConfig { extent_m: 2.0, ..SceneConfig::default() }).unwrap();
        let ds = DatasetConfig { grid: GridSpec { spacing_m: 2.0, floors_m: vec![1.5], half_width_m: None }, ..DatasetConfig::default() };
        let recs = build_dataset(&scene, &ds, &geom, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let m = write_dataset(dir.path(), &recs, &geom, &cfg, scene.seed).unwrap();
        let (m2, loaded) = read_dataset(dir.path()).unwrap();
        assert_eq!(m, m2);
        assert_eq!(loaded.len(), recs.len());
        for (l, r) in loaded.iter().zip(&recs) {
            assert_eq!(l.tbf, r.tbf.data);
            assert_eq!(l.x_ad, r.inputs.x_ad);
            assert_eq!(l.x_ma, r.inputs.x_ma);
            assert_eq!(l.x_do, r.inputs.x_do);
        }
        let db = database_from_loaded(&loaded);
        assert_eq!(db, FingerprintDatabase::from_records(&recs).unwrap());
    }
}
