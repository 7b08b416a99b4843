use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use tbf_core::analysis::{
    lemma4_check, lemma4_sweep, lemma5_check, offgrid_sweep, sftf_trace_agreement, theorem1_check, theorem1_indices,
    theorem2_check, trace_identity_check, Lemma4Report, Lemma4SweepPoint, MatrixKind, SweepAxis, SweepPoint, Theorem2Route,
};
use tbf_core::fingerprint::{tbf_exact, SFTF_CAP};
use tbf_core::grid::{fractional_bins, random_paths, snap_set, FractionalBins, Placement};
use tbf_core::{ArrayGeometry, OfdmConfig};

use crate::output::{num, report, write_csv};
use crate::{CliConfig, CliError, CliResult, GlobalArgs, LemmasArgs, Theorem1Args, Theorem2Args};

pub const ON_GRID_FLOOR: f64 = 1.0 - 1e-9;
pub const OFF_GRID_OFFSET: f64 = 1.0 / 3.0;
pub const LEMMA5_TOL: f64 = 1e-10;
pub const LEMMA5_CONTROL: f64 = 1e-3;
pub const LEMMA4_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-8;

fn rng(cfg: &CliConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.scene.seed)
}

/// True when every step is at least as large as the previous one.
pub fn nondecreasing(xs: impl IntoIterator<Item = f64>) -> bool {
    let v: Vec<f64> = xs.into_iter().collect();
    v.windows(2).all(|w| w[1] >= w[0])
}

pub fn strictly_decreasing(xs: impl IntoIterator<Item = f64>) -> bool {
    let v: Vec<f64> = xs.into_iter().collect();
    v.windows(2).all(|w| w[1] < w[0])
}

#[derive(Serialize)]
struct SweepReport {
    path: usize,
    axis: &'static str,
    points: Vec<SweepPoint>,
    nondecreasing: bool,
}

pub fn theorem1(cfg: &CliConfig, g: &GlobalArgs, a: &Theorem1Args) -> CliResult {
    let (geom, ofdm) = (&cfg.geometry, &cfg.ofdm);
    let mut r = rng(cfg);
    let raw = random_paths(&mut r, a.paths, geom, ofdm, Placement::Offset(OFF_GRID_OFFSET))?;
    let snapped = cfg.dataset.snap_to_grid;
    let mp = if snapped { snap_set(&raw, geom, ofdm)? } else { raw };
    let f = tbf_exact(&mp, geom, ofdm)?;
    let pred = theorem1_indices(&mp, geom, ofdm)?;
    let conc = theorem1_check(&f, &pred)?;

    let mut sweeps = Vec::new();
    if !snapped {
        for (i, p) in mp.paths.iter().enumerate() {
            let bins = fractional_bins(p, geom, ofdm);
            for axis in SweepAxis::ALL {
                let points = offgrid_sweep(bins, geom, ofdm, axis, a.levels)?;
                let ok = nondecreasing(points.iter().map(|s| s.fraction));
                sweeps.push(SweepReport { path: i, axis: axis.name(), points, nondecreasing: ok });
            }
        }
    }
    if let Some(dir) = crate::output::out_dir(g)? {
        let rows = sweeps.iter().flat_map(|s| {
            s.points.iter().map(move |p| {
                vec![s.path.to_string(), s.axis.to_string(), p.level.to_string(), p.size.to_string(), num(p.fraction), num(p.peak_fraction)]
            })
        });
        write_csv(&dir.join("theorem1_sweep.csv"), &["path", "axis", "level", "size", "fraction", "peak_fraction"], rows)?;
    }
    let pass = if snapped { conc.min_fraction() >= ON_GRID_FLOOR } else { sweeps.iter().all(|s| s.nondecreasing) };
    let summary = serde_json::json!({
        "snapped": snapped,
        "paths": pred.paths,
        "per_path_fraction": conc.per_path,
        "min_fraction": conc.min_fraction(),
        "captured_share": conc.total,
        "sweeps": sweeps,
        "pass": pass,
    });
    report(g, "theorem1.json", &summary)?;
    match (pass, snapped) {
        (true, _) => Ok(()),
        (false, true) => Err(CliError::Threshold(format!("on-grid fraction {} below {ON_GRID_FLOOR}", conc.min_fraction()))),
        (false, false) => Err(CliError::Threshold("off-grid concentration decreased under doubling".into())),
    }
}

#[derive(Serialize)]
struct PairRow {
    pair: usize,
    xi_tbf: f64,
    xi_sftf: f64,
    abs_gap: f64,
    trace_rel_error: Option<f64>,
}

fn sft_len(geom: &ArrayGeometry, ofdm: &OfdmConfig) -> usize {
    geom.n_antennas() * ofdm.n_subcarriers * ofdm.n_symbols()
}

pub fn theorem2(cfg: &CliConfig, g: &GlobalArgs, a: &Theorem2Args) -> CliResult {
    let (geom, ofdm) = (&cfg.geometry, &cfg.ofdm);
    let materialize = sft_len(geom, ofdm) <= SFTF_CAP;
    let route = if materialize { Theorem2Route::Materialized } else { Theorem2Route::Analytic };
    let mut r = rng(cfg);
    let mut rows = Vec::with_capacity(a.pairs);
    for pair in 0..a.pairs {
        let mp1 = random_paths(&mut r, a.paths, geom, ofdm, Placement::OnGrid)?;
        let mp2 = random_paths(&mut r, a.paths, geom, ofdm, Placement::OnGrid)?;
        let c = theorem2_check(&mp1, &mp2, geom, ofdm, route)?;
        let trace = if materialize { Some(sftf_trace_agreement(&mp1, &mp2, geom, ofdm)?) } else { None };
        rows.push(PairRow { pair, xi_tbf: c.xi_tbf, xi_sftf: c.xi_sftf, abs_gap: c.abs_gap, trace_rel_error: trace });
    }
    if let Some(dir) = crate::output::out_dir(g)? {
        let csv_rows = rows.iter().map(|p| {
            vec![p.pair.to_string(), num(p.xi_tbf), num(p.xi_sftf), num(p.abs_gap), p.trace_rel_error.map_or(String::new(), num)]
        });
        write_csv(&dir.join("theorem2.csv"), &["pair", "xi_tbf", "xi_sftf", "abs_gap", "trace_rel_error"], csv_rows)?;
    }
    let max_gap = rows.iter().map(|p| p.abs_gap).fold(0.0, f64::max);
    let max_trace = rows.iter().filter_map(|p| p.trace_rel_error).fold(0.0, f64::max);
    let pass = max_gap <= a.tolerance && max_trace <= TRACE_TOL;
    let summary = serde_json::json!({
        "route": route,
        "pairs": rows.len(),
        "max_gap": max_gap,
        "tolerance": a.tolerance,
        "max_trace_rel_error": if materialize { Some(max_trace) } else { None },
        "pass": pass,
    });
    report(g, "theorem2.json", &summary)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Threshold(format!("collinearity gap {max_gap} or trace error {max_trace:e} out of tolerance")))
    }
}

/// Small array used for the dimension sweeps and the materialized trace
/// identity, whose cost grows with the full SFT size.
pub fn sweep_geometry(cfg: &CliConfig) -> ArrayGeometry {
    ArrayGeometry { m_rows: 2, m_cols: 2, ..cfg.geometry }
}

pub fn lemma4_base_ofdm(cfg: &CliConfig) -> OfdmConfig {
    OfdmConfig { n_subcarriers: 256, cp_length: 32, slots_per_frame: 4, symbols_per_slot: 2, ..cfg.ofdm }
}

#[derive(Serialize)]
struct LemmasReport {
    lemma5_max_dev: f64,
    lemma5_control_min_dev: f64,
    lemma4_on_grid: Lemma4Report,
    lemma4_delay_sweep: Vec<Lemma4SweepPoint>,
    lemma4_doppler_sweep: Vec<Lemma4SweepPoint>,
    trace_identity_rel_error: f64,
    pass: bool,
}

pub fn lemmas(cfg: &CliConfig, g: &GlobalArgs, a: &LemmasArgs) -> CliResult {
    let mut max_dev = 0.0f64;
    let mut control = f64::INFINITY;
    for seed in 0..a.seeds {
        let s = cfg.scene.seed.wrapping_add(seed);
        max_dev = max_dev.max(lemma5_check(s, (4, 4, 4), MatrixKind::Dft)?);
        max_dev = max_dev.max(lemma5_check(s, (4, 4, 4), MatrixKind::Identity)?);
        control = control.min(lemma5_check(s, (4, 4, 4), MatrixKind::NonUnitary)?);
    }

    let mut r = rng(cfg);
    let small = sweep_geometry(cfg);
    let base = lemma4_base_ofdm(cfg);
    let on_grid = random_paths(&mut r, 3, &small, &base, Placement::OnGrid)?;
    let l4 = lemma4_check(&on_grid, &small, &base)?;
    let delay_bins = FractionalBins { col: 1.0, row: 1.0, delay: 5.0 + OFF_GRID_OFFSET, doppler: 2.0 };
    let delay_sweep = lemma4_sweep(delay_bins, &small, &base, SweepAxis::Delay, &[1, 2, 4])?;
    let doppler_bins = FractionalBins { col: 1.0, row: 1.0, delay: 5.0, doppler: 2.0 - OFF_GRID_OFFSET };
    let doppler_sweep = lemma4_sweep(doppler_bins, &small, &base, SweepAxis::Doppler, &[1, 2, 4])?;

    let tiny = OfdmConfig { n_subcarriers: 8, cp_length: 4, slots_per_frame: 4, symbols_per_slot: 2, ..cfg.ofdm };
    let p1 = random_paths(&mut r, 3, &small, &tiny, Placement::Offset(OFF_GRID_OFFSET))?;
    let p2 = random_paths(&mut r, 3, &small, &tiny, Placement::Offset(OFF_GRID_OFFSET))?;
    let trace = trace_identity_check(&p1, &p2, &small, &tiny)?;

    let pass = max_dev <= LEMMA5_TOL
        && control > LEMMA5_CONTROL
        && l4.delay_dev <= LEMMA4_TOL
        && l4.doppler_dev <= LEMMA4_TOL
        && strictly_decreasing(delay_sweep.iter().map(|p| p.report.delay_dev))
        && strictly_decreasing(doppler_sweep.iter().map(|p| p.report.doppler_dev))
        && trace.rel_error <= TRACE_TOL;
    let rep = LemmasReport {
        lemma5_max_dev: max_dev,
        lemma5_control_min_dev: control,
        lemma4_on_grid: l4,
        lemma4_delay_sweep: delay_sweep,
        lemma4_doppler_sweep: doppler_sweep,
        trace_identity_rel_error: trace.rel_error,
        pass,
    };
    report(g, "lemmas.json", &rep)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Threshold("a lemma check missed its tolerance".into()))
    }
}
