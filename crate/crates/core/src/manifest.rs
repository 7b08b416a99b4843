//! JSON dataset manifest pointing at tensor blobs.
//!
//! Unknown fields at the document and record level survive a
//! read/write cycle, appended after the known ones.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::channel::{ArrayGeometry, OfdmConfig};
use crate::error::{Error, Result};
use crate::scene::{Point, N_CLASSES};
use crate::store::read_tensor;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlobPaths {
    pub tbf: String,
    pub x_ad: String,
    pub x_ma: String,
    pub x_do: String,
}

impl BlobPaths {
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &str)> {
        [("tbf", self.tbf.as_str()), ("x_ad", self.x_ad.as_str()), ("x_ma", self.x_ma.as_str()), ("x_do", self.x_do.as_str())].into_iter()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub position_m: Point,
    pub direction_class: usize,
    pub heading_rad: f64,
    pub speed_mps: f64,
    pub snr_db: Option<f64>,
    pub blobs: BlobPaths,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_of: Option<String>,
    #[serde(skip)]
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub geometry: ArrayGeometry,
    pub ofdm: OfdmConfig,
    pub scene_seed: u64,
    #[serde(skip)]
    pub records: Vec<ManifestRecord>,
    #[serde(skip)]
    pub extra: Map<String, Value>,
}

impl Manifest {
    pub fn new(geometry: ArrayGeometry, ofdm: OfdmConfig, scene_seed: u64) -> Self {
        Self { schema_version: SCHEMA_VERSION, geometry, ofdm, scene_seed, records: Vec::new(), extra: Map::new() }
    }

    /// `(A, N_g, N_f)`
    pub fn tb_shape(&self) -> (usize, usize, usize) {
        (self.geometry.n_antennas(), self.ofdm.cp_length, self.ofdm.slots_per_frame)
    }
}

fn schema_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Manifest { path: path.into(), message: message.into() }
}

fn typed<T: DeserializeOwned>(value: &Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (true, _) => inner.clone(),
            (false, ".") => prefix.to_string(),
            (false, _) => format!("{prefix}.{inner}"),
        };
        schema_err(path, e.into_inner().to_string())
    })
}

fn object<'a>(value: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    value.as_object().ok_or_else(|| schema_err(if path.is_empty() { "." } else { path }, "expected an object"))
}

fn unknown_fields(input: &Map<String, Value>, known: &[&str]) -> Map<String, Value> {
    input.iter().filter(|(k, _)| !known.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect()
}

const DOC_FIELDS: [&str; 5] = ["schema_version", "geometry", "ofdm", "scene_seed", "records"];
const RECORD_FIELDS: [&str; 8] = ["id", "position_m", "direction_class", "heading_rad", "speed_mps", "snr_db", "blobs", "pair_of"];

pub fn manifest_from_value(value: &Value) -> Result<Manifest> {
    let doc = object(value, "")?;
    let mut m: Manifest = typed(value, "")?;
    if m.schema_version != SCHEMA_VERSION {
        return Err(schema_err("schema_version", format!("unsupported schema version {}", m.schema_version)));
    }
    let records = doc.get("records").ok_or_else(|| schema_err(".", "missing field `records`"))?;
    let records = records.as_array().ok_or_else(|| schema_err("records", "expected an array"))?;
    for (i, rv) in records.iter().enumerate() {
        let prefix = format!("records[{i}]");
        let obj = object(rv, &prefix)?;
        let mut r: ManifestRecord = typed(rv, &prefix)?;
        r.extra = unknown_fields(obj, &RECORD_FIELDS);
        m.records.push(r);
    }
    m.extra = unknown_fields(doc, &DOC_FIELDS);
    Ok(m)
}

fn with_extra<T: Serialize>(known: &T, extra: &Map<String, Value>) -> Result<Map<String, Value>> {
    let Value::Object(mut map) = serde_json::to_value(known)? else {
        unreachable!("structs serialize to objects")
    };
    for (k, v) in extra {
        map.entry(k.clone()).or_insert_with(|| v.clone());
    }
    Ok(map)
}

pub fn manifest_to_value(m: &Manifest) -> Result<Value> {
    let mut doc = with_extra(m, &Map::new())?;
    let records = m.records.iter().map(|r| with_extra(r, &r.extra).map(Value::Object)).collect::<Result<Vec<_>>>()?;
    doc.insert("records".into(), Value::Array(records));
    for (k, v) in &m.extra {
        doc.entry(k.clone()).or_insert_with(|| v.clone());
    }
    Ok(Value::Object(doc))
}

pub fn manifest_to_string(m: &Manifest) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&manifest_to_value(m)?)?;
    s.push('\n');
    Ok(s)
}

pub fn manifest_from_str(s: &str) -> Result<Manifest> {
    let value: Value = serde_json::from_str(s)?;
    manifest_from_value(&value)
}

pub fn write_manifest(path: impl AsRef<Path>, m: &Manifest) -> Result<()> {
    fs::write(path, manifest_to_string(m)?)?;
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    manifest_from_str(&fs::read_to_string(path)?)
}

/// Checks the manifest against the blobs under `root`: ids are unique,
/// pairs resolve, every blob exists and parses, and shapes match the
/// configuration.
pub fn validate_manifest(m: &Manifest, root: impl AsRef<Path>) -> Result<()> {
    let root = root.as_ref();
    m.geometry.validate().map_err(|e| schema_err("geometry", e.to_string()))?;
    m.ofdm.validate().map_err(|e| schema_err("ofdm", e.to_string()))?;
    let (a, ng, nf) = m.tb_shape();
    let mut ids = HashSet::new();
    for (i, r) in m.records.iter().enumerate() {
        if !ids.insert(r.id.as_str()) {
            return Err(schema_err(format!("records[{i}].id"), format!("duplicate id `{}`", r.id)));
        }
    }
    for (i, r) in m.records.iter().enumerate() {
        if r.direction_class >= N_CLASSES {
            return Err(schema_err(format!("records[{i}].direction_class"), format!("class {} outside 0..{N_CLASSES}", r.direction_class)));
        }
        if let Some(p) = &r.pair_of {
            if !ids.contains(p.as_str()) {
                return Err(schema_err(format!("records[{i}].pair_of"), format!("unknown record `{p}`")));
            }
        }
        for (name, rel) in r.blobs.iter() {
            let path: PathBuf = root.join(rel);
            if !path.is_file() {
                return Err(Error::MissingBlob(path));
            }
            let blob = read_tensor(&path).map_err(|e| schema_err(format!("records[{i}].blobs.{name}"), format!("{}: {e}", path.display())))?;
            let expected = match name {
                "tbf" => vec![a, ng, nf],
                "x_do" => vec![nf],
                _ => vec![a, ng],
            };
            if blob.dims != expected {
                return Err(schema_err(
                    format!("records[{i}].blobs.{name}"),
                    format!("{} has shape {:?}, expected {expected:?}", path.display(), blob.dims),
                ));
            }
        }
    }
    Ok(())
}
