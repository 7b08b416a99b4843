use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::collinearity;
use crate::beamspace::transform_matrices;
use crate::channel::{ArrayGeometry, MultipathSet, OfdmConfig};
use crate::error::{Error, Result};
use crate::fingerprint::{sftf_inner_closed, sftf_small, tbf_exact, tbf_exact_with, Tbf};
use crate::grid::{fractional_bins, is_on_grid, nearest, path_from_bins, range_err, FractionalBins};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnGrid {
    pub col: bool,
    pub row: bool,
    pub delay: bool,
    pub doppler: bool,
}

impl OnGrid {
    pub fn all(&self) -> bool {
        self.col && self.row && self.delay && self.doppler
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPrediction {
    pub col_bin: usize,
    pub row_bin: usize,
    /// `col_bin · M_r + row_bin`
    pub angle_bin: usize,
    pub delay_bin: usize,
    pub doppler_bin: usize,
    pub on_grid: OnGrid,
    pub fractional: FractionalBins,
    pub gain_variance: f64,
}

impl PathPrediction {
    pub fn bin(&self) -> (usize, usize, usize) {
        (self.angle_bin, self.delay_bin, self.doppler_bin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Prediction {
    pub paths: Vec<PathPrediction>,
}

/// Nearest-bin location of every path. Angle bins wrap modulo the array size;
/// delay and Doppler bins must fall inside their windows.
pub fn theorem1_indices(mp: &MultipathSet, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<Theorem1Prediction> {
    mp.validate(cfg)?;
    let mut paths = Vec::with_capacity(mp.len());
    for p in &mp.paths {
        let b = fractional_bins(p, geom, cfg);
        let col = nearest(b.col).rem_euclid(geom.m_cols as i64) as usize;
        let row = nearest(b.row).rem_euclid(geom.m_rows as i64) as usize;
        let delay = nearest(b.delay);
        if !(0..cfg.cp_length as i64).contains(&delay) {
            return Err(range_err("delay", delay, cfg.cp_length));
        }
        let doppler = nearest(b.doppler);
        if !(0..cfg.slots_per_frame as i64).contains(&doppler) {
            return Err(range_err("doppler", doppler, cfg.slots_per_frame));
        }
        paths.push(PathPrediction {
            col_bin: col,
            row_bin: row,
            angle_bin: col * geom.m_rows + row,
            delay_bin: delay as usize,
            doppler_bin: doppler as usize,
            on_grid: OnGrid {
                col: is_on_grid(b.col),
                row: is_on_grid(b.row),
                delay: is_on_grid(b.delay),
                doppler: is_on_grid(b.doppler),
            },
            fractional: b,
            gain_variance: p.gain_variance,
        });
    }
    Ok(Theorem1Prediction { paths })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    /// Fingerprint value at each path's predicted bin divided by the power of
    /// all paths predicted into that bin.
    pub per_path: Vec<f64>,
    /// Share of the fingerprint's energy held by the predicted bins.
    pub total: f64,
}

impl ConcentrationReport {
    pub fn min_fraction(&self) -> f64 {
        self.per_path.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn theorem1_check(f: &Tbf, pred: &Theorem1Prediction) -> Result<ConcentrationReport> {
    let sum = f.sum();
    if sum <= 0.0 {
        return Err(Error::Degenerate("zero fingerprint"));
    }
    let (a, g, l) = f.shape();
    let mut shared: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    for p in &pred.paths {
        let (x, y, z) = p.bin();
        if x >= a || y >= g || z >= l {
            return Err(Error::Range(format!("predicted bin {:?} outside fingerprint {:?}", p.bin(), f.shape())));
        }
        *shared.entry(p.bin()).or_default() += p.gain_variance;
    }
    let per_path = pred
        .paths
        .iter()
        .map(|p| {
            let power = shared[&p.bin()];
            if power > 0.0 {
                (f.data[p.bin()] / power).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    let in_bins: f64 = shared.keys().map(|&k| f.data[k]).sum();
    Ok(ConcentrationReport { per_path, total: (in_bins / sum).clamp(0.0, 1.0) })
}

/// Dimension doubled by an off-grid sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// `M_c`
    Col,
    /// `M_r`
    Row,
    /// `N_c` together with `N_g`; `Δf` and the CP ratio stay fixed.
    Delay,
    /// `N_f` together with `N_t`; `N_s` stays fixed.
    Doppler,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 4] = [SweepAxis::Col, SweepAxis::Row, SweepAxis::Delay, SweepAxis::Doppler];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Col => "angle-col",
            SweepAxis::Row => "angle-row",
            SweepAxis::Delay => "delay",
            SweepAxis::Doppler => "doppler",
        }
    }

    pub(crate) fn scale(self, geom: &ArrayGeometry, cfg: &OfdmConfig, factor: usize) -> (ArrayGeometry, OfdmConfig) {
        let (mut g, mut c) = (*geom, *cfg);
        match self {
            SweepAxis::Col => g.m_cols *= factor,
            SweepAxis::Row => g.m_rows *= factor,
            SweepAxis::Delay => {
                c.n_subcarriers *= factor;
                c.cp_length *= factor;
            }
            SweepAxis::Doppler => c.slots_per_frame *= factor,
        }
        (g, c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub level: u32,
    /// Size of the swept dimension at this level.
    pub size: usize,
    /// Energy in the `2^level` bins nearest the true parameter, over `σ²`.
    pub fraction: f64,
    /// Energy in the single predicted bin, over `σ²`.
    pub peak_fraction: f64,
}

/// Energy fraction of a single-path fingerprint inside the `width` bins of
/// `axis` nearest the fractional position `x`, the other coordinates held at
/// `pred`'s bins.
pub fn cell_fraction(f: &Tbf, pred: &PathPrediction, axis: SweepAxis, m_rows: usize, width: usize) -> f64 {
    let (a, g, l) = f.shape();
    let m_cols = a / m_rows;
    let (len, x, periodic) = match axis {
        SweepAxis::Col => (m_cols, pred.fractional.col, true),
        SweepAxis::Row => (m_rows, pred.fractional.row, true),
        SweepAxis::Delay => (g, pred.fractional.delay, false),
        SweepAxis::Doppler => (l, pred.fractional.doppler, false),
    };
    let dist = |b: usize| {
        let d = b as f64 - x;
        if periodic {
            let m = len as f64;
            let r = d.rem_euclid(m);
            r.min(m - r)
        } else {
            d.abs()
        }
    };
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&i, &j| dist(i).total_cmp(&dist(j)).then(i.cmp(&j)));
    let energy: f64 = order
        .into_iter()
        .take(width)
        .map(|b| {
            let idx = match axis {
                SweepAxis::Col => (b * m_rows + pred.row_bin, pred.delay_bin, pred.doppler_bin),
                SweepAxis::Row => (pred.col_bin * m_rows + b, pred.delay_bin, pred.doppler_bin),
                SweepAxis::Delay => (pred.angle_bin, b, pred.doppler_bin),
                SweepAxis::Doppler => (pred.angle_bin, pred.delay_bin, b),
            };
            f.data[idx]
        })
        .sum();
    energy / pred.gain_variance
}

/// Concentration of one physical path while `axis` is doubled `levels` times.
///
/// `bins` fixes the path at the base configuration. The base-resolution cell
/// around the path covers `2^level` bins at each level.
pub fn offgrid_sweep(
    bins: FractionalBins,
    geom: &ArrayGeometry,
    cfg: &OfdmConfig,
    axis: SweepAxis,
    levels: u32,
) -> Result<Vec<SweepPoint>> {
    let path = path_from_bins(bins, 1.0, geom, cfg)?;
    let mut out = Vec::new();
    for level in 0..=levels {
        let factor = 1usize << level;
        let (g, c) = axis.scale(geom, cfg, factor);
        let mp = MultipathSet::new(vec![path]);
        let f = tbf_exact(&mp, &g, &c)?;
        let pred = theorem1_indices(&mp, &g, &c)?.paths[0];
        let size = match axis {
            SweepAxis::Col => g.m_cols,
            SweepAxis::Row => g.m_rows,
            SweepAxis::Delay => c.n_subcarriers,
            SweepAxis::Doppler => c.slots_per_frame,
        };
        out.push(SweepPoint {
            level,
            size,
            fraction: cell_fraction(&f, &pred, axis, g.m_rows, factor),
            peak_fraction: f.data[pred.bin()] / path.gain_variance,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollinearityReport {
    pub xi_tbf: f64,
    pub xi_sftf: f64,
    pub abs_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem2Route {
    /// Path-overlap closed form; any size.
    Analytic,
    /// Materialized covariance; limited by the SFTF cap.
    Materialized,
}

pub fn theorem2_check(
    mp1: &MultipathSet,
    mp2: &MultipathSet,
    geom: &ArrayGeometry,
    cfg: &OfdmConfig,
    route: Theorem2Route,
) -> Result<CollinearityReport> {
    let t = transform_matrices(geom, cfg)?;
    let f1 = tbf_exact_with(mp1, geom, cfg, &t)?;
    let f2 = tbf_exact_with(mp2, geom, cfg, &t)?;
    let xi_tbf = collinearity(&f1.data, &f2.data)?;
    let xi_sftf = match route {
        Theorem2Route::Analytic => sftf_inner_closed(mp1, mp2, geom, cfg)?.collinearity()?,
        Theorem2Route::Materialized => {
            let x1 = sftf_small(mp1, geom, cfg)?;
            let x2 = sftf_small(mp2, geom, cfg)?;
            let (n1, n2) = (x1.norm(), x2.norm());
            if n1 == 0.0 || n2 == 0.0 {
                return Err(Error::Degenerate("zero-norm covariance"));
            }
            x1.inner(&x2)? / (n1 * n2)
        }
    };
    Ok(CollinearityReport { xi_tbf, xi_sftf, abs_gap: (xi_tbf - xi_sftf).abs() })
}

/// Relative difference between the materialized and closed-form covariance
/// inner products. Traces below `1e-6·‖X₁‖‖X₂‖` are compared against
/// `‖X₁‖‖X₂‖` instead of themselves.
pub fn sftf_trace_agreement(mp1: &MultipathSet, mp2: &MultipathSet, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<f64> {
    let closed = sftf_inner_closed(mp1, mp2, geom, cfg)?;
    let x1 = sftf_small(mp1, geom, cfg)?;
    let x2 = sftf_small(mp2, geom, cfg)?;
    let dense = x1.inner(&x2)?;
    let bound = x1.norm() * x2.norm();
    let mut scale = closed.trace.abs().max(dense.abs());
    if scale <= 1e-6 * bound {
        scale = bound;
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((closed.trace - dense).abs() / scale)
}
