use std::fs;
use std::path::Path;

use log::info;
use serde::Serialize;
use serde_json::{json, Map, Value};
use tbf_core::analysis::theorem1_indices;
use ndarray::{Array1, Array2};
use tbf_core::export::{read_dataset, write_dataset, MANIFEST_FILE};
use tbf_core::fingerprint::{tbf_exact, tbf_monte_carlo_with, NoiseDomain};
use tbf_core::grid::snap_set;
use tbf_core::manifest::{read_manifest, validate_manifest, write_manifest, Manifest};
use tbf_core::preprocess::{mask, SWEEP_GAMMAS};
use tbf_core::scene::{build_dataset, build_scene, multipath_for, Scene, UtState};
use tbf_core::store::{read_tensor, write_tensor};
use tbf_core::beamspace::transform_matrices;

use crate::output::{num, report, require_out, write_csv, write_json};
use crate::{CliConfig, CliError, CliResult, ExportArgs, GlobalArgs, ShowArgs, SweepArgs};

pub fn scene_gen(cfg: &CliConfig, g: &GlobalArgs) -> CliResult {
    let scene = build_scene(&cfg.scene)?;
    let doc = json!({ "config": cfg.scene, "scene": scene });
    report(g, "scene.json", &doc)
}

fn provenance(cfg: &CliConfig) -> Map<String, Value> {
    let mut extra = Map::new();
    extra.insert("scene_config".into(), json!(cfg.scene));
    extra.insert("dataset_config".into(), json!(cfg.dataset));
    extra
}

/// Builds the configured dataset into `dir` and returns its manifest.
pub fn build_into(cfg: &CliConfig, dir: &Path) -> CliResult<Manifest> {
    let scene = build_scene(&cfg.scene)?;
    let records = build_dataset(&scene, &cfg.dataset, &cfg.geometry, &cfg.ofdm)?;
    info!("built {} records", records.len());
    let mut m = write_dataset(dir, &records, &cfg.geometry, &cfg.ofdm, scene.seed)?;
    m.extra = provenance(cfg);
    write_manifest(dir.join(MANIFEST_FILE), &m)?;
    Ok(m)
}

#[derive(Serialize)]
struct BuildSummary {
    records: usize,
    scene_seed: u64,
    snr_db: Option<f64>,
    gamma: f64,
    tb_shape: (usize, usize, usize),
}

pub fn dataset_build(cfg: &CliConfig, g: &GlobalArgs) -> CliResult {
    if g.gamma.len() > 1 {
        return Err(CliError::Invalid("dataset build takes a single --gamma".into()));
    }
    let out = require_out(g)?;
    let m = build_into(cfg, &out)?;
    let summary = BuildSummary {
        records: m.records.len(),
        scene_seed: m.scene_seed,
        snr_db: cfg.dataset.snr_db,
        gamma: cfg.dataset.gamma,
        tb_shape: m.tb_shape(),
    };
    print!("{}", crate::output::to_json(&summary)?);
    Ok(())
}

/// Scene stored with a dataset, or the configured one.
pub fn scene_for(m: &Manifest, cfg: &CliConfig) -> CliResult<Scene> {
    let sc = match m.extra.get("scene_config") {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| CliError::Invalid(format!("manifest scene_config: {e}")))?,
        None => cfg.scene.clone(),
    };
    Ok(build_scene(&sc)?)
}

pub fn fingerprint_show(cfg: &CliConfig, g: &GlobalArgs, a: &ShowArgs) -> CliResult {
    let out = require_out(g)?;
    let scene = build_scene(&cfg.scene)?;
    let position = a.position;
    let ut = UtState { speed: cfg.dataset.speed_mps, ..UtState::new(position, a.heading) };
    let ch = multipath_for(&scene, &ut, &cfg.geometry, &cfg.ofdm)?;
    let mp = if cfg.dataset.snap_to_grid { snap_set(&ch.paths, &cfg.geometry, &cfg.ofdm)? } else { ch.paths };
    let f = match cfg.dataset.snr_db {
        None => tbf_exact(&mp, &cfg.geometry, &cfg.ofdm)?,
        Some(snr) => {
            let t = transform_matrices(&cfg.geometry, &cfg.ofdm)?;
            tbf_monte_carlo_with(&mp, &cfg.geometry, &cfg.ofdm, &t, cfg.dataset.n_draws, cfg.scene.seed, Some(snr), NoiseDomain::Beam)?
        }
    };
    let d = &f.data;
    let (na, ng, nf) = f.shape();
    let peak = d.indexed_iter().fold(((0, 0, 0), f64::MIN), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    let (pa, pg, pf) = peak.0;

    let map2 = |name: &str, hdr: [&str; 2], n0: usize, n1: usize, v: &dyn Fn(usize, usize) -> f64| {
        let rows = (0..n0).flat_map(|i| (0..n1).map(move |j| (i, j))).map(|(i, j)| vec![i.to_string(), j.to_string(), num(v(i, j))]);
        write_csv(&out.join(name), &[hdr[0], hdr[1], "power"], rows)
    };
    map2("angle_delay.csv", ["angle", "delay"], na, ng, &|i, j| (0..nf).map(|l| d[(i, j, l)]).sum())?;
    map2("angle_doppler.csv", ["angle", "doppler"], na, nf, &|i, l| (0..ng).map(|j| d[(i, j, l)]).sum())?;
    map2("delay_doppler.csv", ["delay", "doppler"], ng, nf, &|j, l| (0..na).map(|i| d[(i, j, l)]).sum())?;
    let slice = |name: &str, hdr: &str, n: usize, v: &dyn Fn(usize) -> f64| {
        write_csv(&out.join(name), &[hdr, "power"], (0..n).map(|i| vec![i.to_string(), num(v(i))]))
    };
    slice("slice_angle.csv", "angle", na, &|i| d[(i, pg, pf)])?;
    slice("slice_delay.csv", "delay", ng, &|j| d[(pa, j, pf)])?;
    slice("slice_doppler.csv", "doppler", nf, &|l| d[(pa, pg, l)])?;

    let pred = theorem1_indices(&mp, &cfg.geometry, &cfg.ofdm)?;
    let rows = mp.paths.iter().zip(&pred.paths).map(|(p, q)| {
        vec![
            num(p.gain_variance),
            num(p.elevation),
            num(p.azimuth),
            num(p.delay),
            num(p.doppler),
            q.angle_bin.to_string(),
            q.delay_bin.to_string(),
            q.doppler_bin.to_string(),
        ]
    });
    write_csv(
        &out.join("paths.csv"),
        &["gain_variance", "elevation", "azimuth", "delay_s", "doppler_hz", "angle_bin", "delay_bin", "doppler_bin"],
        rows,
    )?;
    let summary = json!({
        "position_m": position,
        "heading_rad": ut.heading,
        "shape": [na, ng, nf],
        "n_paths": mp.len(),
        "dropped_paths": ch.dropped,
        "energy": f.sum(),
        "peak_bin": [pa, pg, pf],
        "peak_share": peak.1 / f.sum(),
    });
    write_json(&out.join("fingerprint.json"), &summary)?;
    print!("{}", crate::output::to_json(&summary)?);
    Ok(())
}

fn sweep_inputs(cfg: &CliConfig, dir: Option<&Path>) -> CliResult<Vec<(Array2<f64>, Array1<f64>)>> {
    Ok(match dir {
        Some(d) => read_dataset(d)?.1.into_iter().map(|r| (r.x_ad, r.x_do)).collect(),
        None => {
            let scene = build_scene(&cfg.scene)?;
            build_dataset(&scene, &cfg.dataset, &cfg.geometry, &cfg.ofdm)?.into_iter().map(|r| (r.inputs.x_ad, r.inputs.x_do)).collect()
        }
    })
}

#[derive(Serialize)]
struct SweepRow {
    gamma: f64,
    mean_support: f64,
    min_support: usize,
    max_support: usize,
}

pub fn preprocess_sweep(cfg: &CliConfig, g: &GlobalArgs, a: &SweepArgs) -> CliResult {
    let mut gammas = if g.gamma.is_empty() { SWEEP_GAMMAS.to_vec() } else { g.gamma.clone() };
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    let records = sweep_inputs(cfg, a.dataset.as_deref())?;
    if records.is_empty() {
        return Err(CliError::Invalid("dataset has no records".into()));
    }
    let mut worst_sum = 0.0f64;
    let mut supports = vec![Vec::with_capacity(records.len()); gammas.len()];
    for (x_ad, x_do) in &records {
        worst_sum = worst_sum.max((x_ad.sum() - 1.0).abs()).max((x_do.sum() - 1.0).abs());
        for (gi, &gamma) in gammas.iter().enumerate() {
            supports[gi].push(mask(x_ad, gamma)?.iter().filter(|&&m| m == 1).count());
        }
    }
    let monotone = (0..records.len()).all(|i| supports.windows(2).all(|w| w[1][i] <= w[0][i]));
    let rows: Vec<SweepRow> = gammas
        .iter()
        .zip(&supports)
        .map(|(&gamma, s)| SweepRow {
            gamma,
            mean_support: s.iter().sum::<usize>() as f64 / s.len() as f64,
            min_support: *s.iter().min().unwrap(),
            max_support: *s.iter().max().unwrap(),
        })
        .collect();
    if let Some(dir) = crate::output::out_dir(g)? {
        let csv_rows = rows.iter().map(|r| vec![num(r.gamma), num(r.mean_support), r.min_support.to_string(), r.max_support.to_string()]);
        write_csv(&dir.join("mask_sweep.csv"), &["gamma", "mean_support", "min_support", "max_support"], csv_rows)?;
    }
    let summary = json!({
        "records": records.len(),
        "max_marginal_sum_error": worst_sum,
        "support_monotone": monotone,
        "sweep": rows,
    });
    report(g, "preprocess_sweep.json", &summary)?;
    if worst_sum > 1e-9 {
        return Err(CliError::Threshold(format!("marginal sums deviate from 1 by {worst_sum:e}")));
    }
    if !monotone {
        return Err(CliError::Threshold("mask support is not monotone in gamma".into()));
    }
    Ok(())
}

pub fn export(cfg: &CliConfig, g: &GlobalArgs, a: &ExportArgs) -> CliResult {
    let out = require_out(g)?;
    let Some(src) = a.from.as_deref() else {
        let m = build_into(cfg, &out)?;
        validate_manifest(&m, &out)?;
        return report_export(g, m.records.len(), &out);
    };
    if src.canonicalize()? == out.canonicalize()? {
        return Err(CliError::Invalid("--from and --out must differ".into()));
    }
    let m = read_manifest(src.join(MANIFEST_FILE))?;
    validate_manifest(&m, src)?;
    for r in &m.records {
        for (_, rel) in r.blobs.iter() {
            let target = out.join(rel);
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent)?;
            }
            write_tensor(&target, &read_tensor(src.join(rel))?)?;
            if fs::read(src.join(rel))? != fs::read(&target)? {
                return Err(CliError::Invalid(format!("{} did not copy bit-exactly", target.display())));
            }
        }
    }
    write_manifest(out.join(MANIFEST_FILE), &m)?;
    let back = read_manifest(out.join(MANIFEST_FILE))?;
    validate_manifest(&back, &out)?;
    if back != m {
        return Err(CliError::Invalid("manifest changed on rewrite".into()));
    }
    report_export(g, m.records.len(), &out)
}

fn report_export(_g: &GlobalArgs, records: usize, out: &Path) -> CliResult {
    let summary = json!({ "records": records, "out": out.display().to_string(), "validated": true });
    print!("{}", crate::output::to_json(&summary)?);
    Ok(())
}
