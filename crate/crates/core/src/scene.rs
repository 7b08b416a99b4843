//! Synthetic single-bounce scattering scene and grid datasets built on it.
//!
//! The base station sits above the centre of a square service area of
//! half-width `extent_m`. Scatterers are scattered uniformly over a square
//! annulus around the area. Every scatterer contributes one path whose delay,
//! arrival direction, Doppler shift and power follow from the geometry.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamspace::transform_matrices;
use crate::channel::{ArrayGeometry, MultipathSet, OfdmConfig, PathParams, SPEED_OF_LIGHT};
use crate::error::{param, Error, Result};
use crate::fingerprint::{tbf_exact_with, tbf_monte_carlo_with, NoiseDomain, Tbf, DEFAULT_DRAWS};
use crate::grid::snap_set;
use crate::preprocess::{preprocess, PreprocessedInputs, DEFAULT_GAMMA};

pub type Point = [f64; 3];

/// 5 km/h.
pub const DEFAULT_SPEED: f64 = 5.0 / 3.6;
pub const N_CLASSES: usize = 16;

const HEADING_STREAM: u64 = 1 << 40;
const RECORD_STREAM: u64 = 1 << 41;
const QUERY_STREAM: u64 = 1 << 42;
/// Planned index of the first query; keeps query noise streams apart from
/// database records.
pub const QUERY_INDEX_BASE: usize = 1 << 32;

fn default_seed() -> u64 {
    1
}
fn default_extent() -> f64 {
    20.0
}
fn default_bs() -> Point {
    [0.0, 0.0, 25.0]
}
fn default_scatterers() -> usize {
    12
}
fn default_shell() -> [f64; 2] {
    [1.2, 3.0]
}
fn default_height() -> [f64; 2] {
    [0.0, 12.0]
}
fn default_exponent() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Half-width of the square service area.
    #[serde(default = "default_extent")]
    pub extent_m: f64,
    #[serde(default = "default_bs")]
    pub bs_position_m: Point,
    #[serde(default = "default_scatterers")]
    pub n_scatterers: usize,
    /// Inner and outer half-width of the scatterer annulus, in multiples of
    /// `extent_m`.
    #[serde(default = "default_shell")]
    pub shell: [f64; 2],
    #[serde(default = "default_height")]
    pub scatterer_height_m: [f64; 2],
    #[serde(default = "default_exponent")]
    pub path_loss_exponent: f64,
    #[serde(default)]
    pub include_los: bool,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            extent_m: default_extent(),
            bs_position_m: default_bs(),
            n_scatterers: default_scatterers(),
            shell: default_shell(),
            scatterer_height_m: default_height(),
            path_loss_exponent: default_exponent(),
            include_los: false,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.extent_m.is_finite() && self.extent_m > 0.0) {
            return Err(param("extent_m must be positive"));
        }
        let [lo, hi] = self.shell;
        if !(0.0 <= lo && lo < hi && hi <= 3.0) {
            return Err(param(format!("shell must satisfy 0 <= inner < outer <= 3, got {:?}", self.shell)));
        }
        let [zl, zh] = self.scatterer_height_m;
        if !(zl.is_finite() && zh.is_finite() && zl <= zh) {
            return Err(param("scatterer_height_m must be an ordered pair"));
        }
        if !(self.path_loss_exponent.is_finite() && self.path_loss_exponent >= 0.0) {
            return Err(param("path_loss_exponent must be >= 0"));
        }
        if self.n_scatterers == 0 && !self.include_los {
            return Err(param("scene needs at least one scatterer or a line-of-sight path"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub bs_position: Point,
    pub scatterers: Vec<Point>,
    pub extent: f64,
    pub path_loss_exponent: f64,
    pub seed: u64,
    pub include_los: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtState {
    pub position: Point,
    pub speed: f64,
    /// Radians in `[0, 2π)`.
    pub heading: f64,
}

impl UtState {
    pub fn new(position: Point, heading: f64) -> Self {
        Self { position, speed: DEFAULT_SPEED, heading: heading.rem_euclid(TAU) }
    }
}

pub fn build_scene(config: &SceneConfig) -> Result<Scene> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let [inner, outer] = config.shell.map(|m| m * config.extent_m);
    let [zl, zh] = config.scatterer_height_m;
    let mut scatterers = Vec::with_capacity(config.n_scatterers);
    while scatterers.len() < config.n_scatterers {
        let x = rng.random_range(-outer..=outer);
        let y = rng.random_range(-outer..=outer);
        if x.abs().max(y.abs()) < inner {
            continue;
        }
        let z = if zh > zl { rng.random_range(zl..=zh) } else { zl };
        let c = config.bs_position_m;
        scatterers.push([c[0] + x, c[1] + y, z]);
    }
    Ok(Scene {
        bs_position: config.bs_position_m,
        scatterers,
        extent: config.extent_m,
        path_loss_exponent: config.path_loss_exponent,
        seed: config.seed,
        include_los: config.include_los,
    })
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: Point) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn unit(a: Point) -> Point {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Multipath set of one UT plus the number of paths dropped for violating the
/// delay or Doppler windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtChannel {
    pub paths: MultipathSet,
    pub dropped: usize,
}

/// Elevation and azimuth of arrival from unit direction `u` (BS towards the
/// last interaction point).
pub fn arrival_angles(u: Point) -> (f64, f64) {
    (u[2].clamp(-1.0, 1.0).acos(), u[1].abs().atan2(u[0]))
}

pub fn multipath_for(scene: &Scene, ut: &UtState, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<UtChannel> {
    let rel = sub(ut.position, scene.bs_position);
    if rel[0].abs() > scene.extent + 1e-9 || rel[1].abs() > scene.extent + 1e-9 {
        return Err(param(format!("UT at {:?} lies outside the service area", ut.position)));
    }
    if !(ut.speed.is_finite() && ut.speed >= 0.0) {
        return Err(param("speed must be >= 0"));
    }
    let heading = [ut.heading.cos(), ut.heading.sin(), 0.0];
    let doppler_of = |departure: Point| {
        let c = heading[0] * departure[0] + heading[1] * departure[1];
        ut.speed * c / geom.wavelength
    };
    // (length, arrival direction, departure direction)
    let mut legs: Vec<(f64, Point, Point)> = Vec::new();
    if scene.include_los {
        let d = sub(scene.bs_position, ut.position);
        legs.push((norm(d), unit(sub(ut.position, scene.bs_position)), unit(d)));
    }
    for &s in &scene.scatterers {
        let out = sub(s, ut.position);
        let back = sub(s, scene.bs_position);
        legs.push((norm(out) + norm(back), unit(back), unit(out)));
    }
    let ts = cfg.sample_period();
    let limit = cfg.cp_length as f64 - 0.5;
    let (lo, hi) = cfg.doppler_range();
    let mut paths = Vec::with_capacity(legs.len());
    let mut dropped = 0;
    for (length, arrival, departure) in legs {
        let delay = length / SPEED_OF_LIGHT;
        let doppler = doppler_of(departure);
        if delay / ts >= limit || !(lo..hi).contains(&doppler) {
            dropped += 1;
            continue;
        }
        let (elevation, azimuth) = arrival_angles(arrival);
        paths.push(PathParams {
            gain_variance: length.powf(-scene.path_loss_exponent),
            elevation,
            azimuth,
            delay,
            doppler,
        });
    }
    if paths.is_empty() {
        return Err(Error::EmptySet { dropped });
    }
    if dropped > 0 {
        log::warn!("{dropped} paths dropped for UT at {:?}", ut.position);
    }
    let total: f64 = paths.iter().map(|p| p.gain_variance).sum();
    for p in &mut paths {
        p.gain_variance /= total;
    }
    Ok(UtChannel { paths: MultipathSet::new(paths), dropped })
}

/// Class `i` covers headings in `[(2i−1)π/16, (2i+1)π/16)` modulo `2π`.
pub fn direction_class(heading: f64) -> usize {
    let h = heading.rem_euclid(TAU);
    ((h + PI / 16.0) / (PI / 8.0)).floor() as usize % N_CLASSES
}

/// Central heading of class `i`.
pub fn class_heading(class: usize) -> f64 {
    (class % N_CLASSES) as f64 * PI / 8.0
}

fn default_spacing() -> f64 {
    1.0
}
fn default_floors() -> Vec<f64> {
    vec![1.5, 4.5, 7.5]
}

/// Measurement grid: square lattice over the service area on every floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_spacing")]
    pub spacing_m: f64,
    #[serde(default = "default_floors")]
    pub floors_m: Vec<f64>,
    /// Restricts the lattice to this half-width; the scene extent otherwise.
    #[serde(default)]
    pub half_width_m: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { spacing_m: default_spacing(), floors_m: default_floors(), half_width_m: None }
    }
}

impl GridSpec {
    pub fn points(&self, scene: &Scene) -> Result<Vec<Point>> {
        if !(self.spacing_m.is_finite() && self.spacing_m > 0.0) {
            return Err(param("grid spacing must be positive"));
        }
        let half = self.half_width_m.unwrap_or(scene.extent);
        if !(half.is_finite() && half >= 0.0) || half > scene.extent + 1e-9 {
            return Err(param(format!("grid half-width {half} must lie in [0, {}]", scene.extent)));
        }
        let per_axis = (2.0 * half / self.spacing_m + 1e-9).floor() as usize + 1;
        let (cx, cy) = (scene.bs_position[0], scene.bs_position[1]);
        let mut out = Vec::with_capacity(per_axis * per_axis * self.floors_m.len());
        for &z in &self.floors_m {
            for iy in 0..per_axis {
                for ix in 0..per_axis {
                    out.push([cx - half + ix as f64 * self.spacing_m, cy - half + iy as f64 * self.spacing_m, z]);
                }
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "heading_rad")]
pub enum HeadingPolicy {
    /// One uniformly random heading per grid point.
    #[default]
    Random,
    /// Every class centre at every grid point.
    All16,
    Fixed(f64),
}

fn default_draws() -> usize {
    DEFAULT_DRAWS
}
fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}
fn default_speed() -> f64 {
    DEFAULT_SPEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub headings: HeadingPolicy,
    /// Noiseless closed-form fingerprints when absent.
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default = "default_draws")]
    pub n_draws: usize,
    #[serde(default)]
    pub snap_to_grid: bool,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_speed")]
    pub speed_mps: f64,
    /// Emit a second record per UT this many seconds later along its heading.
    #[serde(default)]
    pub pair_interval_s: Option<f64>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            headings: HeadingPolicy::default(),
            snr_db: None,
            n_draws: default_draws(),
            snap_to_grid: false,
            gamma: default_gamma(),
            speed_mps: default_speed(),
            pair_interval_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintRecord {
    pub id: String,
    pub position: Point,
    pub heading: f64,
    pub direction_class: usize,
    pub speed: f64,
    pub snr_db: Option<f64>,
    pub tbf: Tbf,
    pub inputs: PreprocessedInputs,
    /// Id of the record this one follows by one pair interval.
    pub pair_of: Option<String>,
    pub n_paths: usize,
    pub dropped_paths: usize,
}

/// One planned record before any channel is computed.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedRecord {
    pub index: usize,
    pub id: String,
    pub ut: UtState,
    pub pair_of: Option<String>,
}

/// Enumerates every record `build_dataset` will produce, in output order.
pub fn plan_dataset(scene: &Scene, ds: &DatasetConfig) -> Result<Vec<PlannedRecord>> {
    let points = ds.grid.points(scene)?;
    let mut plan = Vec::new();
    for (pi, &position) in points.iter().enumerate() {
        let headings: Vec<f64> = match ds.headings {
            HeadingPolicy::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
                rng.set_stream(HEADING_STREAM + pi as u64);
                vec![rng.random_range(0.0..TAU)]
            }
            HeadingPolicy::All16 => (0..N_CLASSES).map(class_heading).collect(),
            HeadingPolicy::Fixed(h) => vec![h],
        };
        for (hi, heading) in headings.into_iter().enumerate() {
            let id = format!("p{pi:05}-h{hi:02}");
            let ut = UtState { position, speed: ds.speed_mps, heading: heading.rem_euclid(TAU) };
            plan.push(PlannedRecord { index: plan.len(), id: id.clone(), ut, pair_of: None });
            if let Some(dt) = ds.pair_interval_s {
                let step = ds.speed_mps * dt;
                let next = [position[0] + step * ut.heading.cos(), position[1] + step * ut.heading.sin(), position[2]];
                let moved = UtState { position: next, ..ut };
                plan.push(PlannedRecord { index: plan.len(), id: format!("{id}-next"), ut: moved, pair_of: Some(id) });
            }
        }
    }
    Ok(plan)
}

/// Fingerprint and preprocess one UT.
pub fn build_record(
    scene: &Scene,
    planned: &PlannedRecord,
    ds: &DatasetConfig,
    geom: &ArrayGeometry,
    cfg: &OfdmConfig,
    t: &crate::beamspace::TransformSet,
) -> Result<FingerprintRecord> {
    let ch = multipath_for(scene, &planned.ut, geom, cfg)?;
    let mp = if ds.snap_to_grid { snap_set(&ch.paths, geom, cfg)? } else { ch.paths };
    let snr = ds.snr_db.filter(|s| s.is_finite());
    let mut tbf = match snr {
        None => tbf_exact_with(&mp, geom, cfg, t)?,
        Some(_) => {
            let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
            rng.set_stream(RECORD_STREAM + planned.index as u64);
            let seed = rng.random::<u64>();
            tbf_monte_carlo_with(&mp, geom, cfg, t, ds.n_draws, seed, snr, NoiseDomain::Beam)?
        }
    };
    tbf.meta.source_id = Some(planned.id.clone());
    let inputs = preprocess(&tbf, ds.gamma)?;
    Ok(FingerprintRecord {
        id: planned.id.clone(),
        position: planned.ut.position,
        heading: planned.ut.heading,
        direction_class: direction_class(planned.ut.heading),
        speed: planned.ut.speed,
        snr_db: snr,
        tbf,
        inputs,
        pair_of: planned.pair_of.clone(),
        n_paths: mp.len(),
        dropped_paths: ch.dropped,
    })
}

/// `n` test UTs at uniformly random positions inside the grid area, on
/// random floors of the grid, with random headings.
pub fn plan_queries(scene: &Scene, ds: &DatasetConfig, n: usize) -> Result<Vec<PlannedRecord>> {
    let half = ds.grid.half_width_m.unwrap_or(scene.extent);
    if !(half.is_finite() && half >= 0.0) || half > scene.extent + 1e-9 {
        return Err(param(format!("grid half-width {half} must lie in [0, {}]", scene.extent)));
    }
    if ds.grid.floors_m.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let (cx, cy) = (scene.bs_position[0], scene.bs_position[1]);
    Ok((0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
            rng.set_stream(QUERY_STREAM + i as u64);
            let x = cx + rng.random_range(-half..=half);
            let y = cy + rng.random_range(-half..=half);
            let z = ds.grid.floors_m[rng.random_range(0..ds.grid.floors_m.len())];
            let heading = rng.random_range(0.0..TAU);
            PlannedRecord {
                index: QUERY_INDEX_BASE + i,
                id: format!("q{i:05}"),
                ut: UtState { position: [x, y, z], speed: ds.speed_mps, heading },
                pair_of: None,
            }
        })
        .collect())
}

/// Builds `plan` in parallel. Each record depends only on the scene seed and
/// its index, so the output is independent of thread count.
pub fn build_records(
    scene: &Scene,
    plan: &[PlannedRecord],
    ds: &DatasetConfig,
    geom: &ArrayGeometry,
    cfg: &OfdmConfig,
) -> Result<Vec<FingerprintRecord>> {
    let t = transform_matrices(geom, cfg)?;
    plan.par_iter().map(|p| build_record(scene, p, ds, geom, cfg, &t)).collect()
}

pub fn build_dataset(scene: &Scene, ds: &DatasetConfig, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<Vec<FingerprintRecord>> {
    build_records(scene, &plan_dataset(scene, ds)?, ds, geom, cfg)
}
