//! Conversions between physical path parameters and fractional positions on
//! the angle, delay and Doppler bin grids.

use serde::{Deserialize, Serialize};

use crate::channel::{ArrayGeometry, MultipathSet, OfdmConfig, PathParams};
use crate::error::{param, Error, Result};

/// A parameter is on-grid when its fractional bin is this close to an integer.
pub const ON_GRID_TOL: f64 = 1e-9;

/// Fractional bin coordinates of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalBins {
    /// `M_c (d_r/λ) cos θ + M_c/2`
    pub col: f64,
    /// `M_r (d_c/λ) sin θ cos φ + M_r/2`
    pub row: f64,
    /// `τ / T_s`
    pub delay: f64,
    /// `N_t ν T_sym + N_f/2`
    pub doppler: f64,
}

pub fn fractional_bins(path: &PathParams, geom: &ArrayGeometry, cfg: &OfdmConfig) -> FractionalBins {
    let mc = geom.m_cols as f64;
    let mr = geom.m_rows as f64;
    FractionalBins {
        col: mc * geom.d_row / geom.wavelength * path.elevation.cos() + mc / 2.0,
        row: mr * geom.d_col / geom.wavelength * path.elevation.sin() * path.azimuth.cos() + mr / 2.0,
        delay: path.delay / cfg.sample_period(),
        doppler: cfg.n_symbols() as f64 * path.doppler * cfg.symbol_period() + cfg.slots_per_frame as f64 / 2.0,
    }
}

/// Nearest integer, with halves rounded up.
pub fn nearest(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

pub fn is_on_grid(x: f64) -> bool {
    (x - nearest(x) as f64).abs() < ON_GRID_TOL
}

/// Path whose fractional bins are exactly `bins`.
///
/// Fails when the angle pair has no physical direction, i.e. when
/// `|row − M_r/2|` exceeds `M_r (d_c/λ) sin θ`.
pub fn path_from_bins(bins: FractionalBins, gain_variance: f64, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<PathParams> {
    let mc = geom.m_cols as f64;
    let mr = geom.m_rows as f64;
    let cos_t = (bins.col - mc / 2.0) / (mc * geom.d_row / geom.wavelength);
    if cos_t.abs() > 1.0 + 1e-12 {
        return Err(param(format!("column bin {} has no elevation", bins.col)));
    }
    let elevation = cos_t.clamp(-1.0, 1.0).acos();
    let x = (bins.row - mr / 2.0) / (mr * geom.d_col / geom.wavelength);
    let sin_t = elevation.sin();
    let azimuth = if sin_t.abs() < 1e-15 {
        if x.abs() > 1e-12 {
            return Err(param(format!("row bin {} needs sin(elevation) > 0", bins.row)));
        }
        std::f64::consts::FRAC_PI_2
    } else {
        let c = x / sin_t;
        if c.abs() > 1.0 + 1e-12 {
            return Err(param(format!("row bin {} infeasible at elevation {elevation}", bins.row)));
        }
        c.clamp(-1.0, 1.0).acos()
    };
    let span = cfg.n_symbols() as f64 * cfg.symbol_period();
    let path = PathParams {
        gain_variance,
        elevation,
        azimuth,
        delay: bins.delay * cfg.sample_period(),
        doppler: (bins.doppler - cfg.slots_per_frame as f64 / 2.0) / span,
    };
    path.validate(cfg)?;
    Ok(path)
}

fn feasible_range(center: f64, half_width: f64) -> (i64, i64) {
    ((center - half_width - 1e-12).ceil() as i64, (center + half_width + 1e-12).floor() as i64)
}

/// Rounds every parameter of `path` to its nearest feasible bin.
pub fn snap_path(path: &PathParams, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<PathParams> {
    let b = fractional_bins(path, geom, cfg);
    let mc = geom.m_cols as f64;
    let mr = geom.m_rows as f64;
    let (c_lo, c_hi) = feasible_range(mc / 2.0, mc * geom.d_row / geom.wavelength);
    let col = nearest(b.col).clamp(c_lo, c_hi) as f64;
    let cos_t = ((col - mc / 2.0) / (mc * geom.d_row / geom.wavelength)).clamp(-1.0, 1.0);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let (r_lo, r_hi) = feasible_range(mr / 2.0, mr * geom.d_col / geom.wavelength * sin_t);
    let row = nearest(b.row).clamp(r_lo, r_hi) as f64;
    let delay = nearest(b.delay).clamp(0, cfg.cp_length as i64 - 1) as f64;
    let doppler = nearest(b.doppler).clamp(0, cfg.slots_per_frame as i64 - 1) as f64;
    path_from_bins(FractionalBins { col, row, delay, doppler }, path.gain_variance, geom, cfg)
}

pub fn snap_set(mp: &MultipathSet, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<MultipathSet> {
    Ok(MultipathSet::new(mp.paths.iter().map(|p| snap_path(p, geom, cfg)).collect::<Result<_>>()?))
}

/// Where [`random_paths`] places each path relative to the bin grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "offset")]
pub enum Placement {
    OnGrid,
    /// Every bin shifted by `±offset` with a random sign; bins stay clear of
    /// the window edges.
    Offset(f64),
}

const MAX_TRIES: usize = 10_000;

/// `n` random paths with variances normalized to unit total power.
pub fn random_paths<R: rand::Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    geom: &ArrayGeometry,
    cfg: &OfdmConfig,
    placement: Placement,
) -> Result<MultipathSet> {
    if n == 0 {
        return Err(param("need at least one path"));
    }
    let mc = geom.m_cols as f64;
    let (c_lo, c_hi) = feasible_range(mc / 2.0, mc * geom.d_row / geom.wavelength);
    let (ng, nf) = (cfg.cp_length as i64, cfg.slots_per_frame as i64);
    let margin = i64::from(matches!(placement, Placement::Offset(_)));
    if ng - 1 - margin < margin || nf - 1 - margin < margin || c_hi - margin < c_lo + margin {
        return Err(param("grid too small for the requested placement"));
    }
    let jitter = |rng: &mut R| match placement {
        Placement::OnGrid => 0.0,
        Placement::Offset(d) => if rng.random_bool(0.5) { d } else { -d },
    };
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut paths = Vec::with_capacity(n);
    for w in weights {
        let mut tries = 0;
        let path = loop {
            tries += 1;
            if tries > MAX_TRIES {
                return Err(param("could not place a feasible random path"));
            }
            let bins = FractionalBins {
                col: rng.random_range(c_lo + margin..=c_hi - margin) as f64 + jitter(rng),
                row: rng.random_range(0..=geom.m_rows as i64) as f64 + jitter(rng),
                delay: rng.random_range(margin..=ng - 1 - margin) as f64 + jitter(rng),
                doppler: rng.random_range(margin..=nf - 1 - margin) as f64 + jitter(rng),
            };
            if let Ok(p) = path_from_bins(bins, w / total, geom, cfg) {
                break p;
            }
        };
        paths.push(path);
    }
    Ok(MultipathSet::new(paths))
}

pub(crate) fn range_err(what: &str, bin: i64, limit: usize) -> Error {
    Error::Range(format!("{what} bin {bin} outside [0, {limit})"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn sixty_degrees_on_sixteen_columns() {
        let geom = ArrayGeometry { m_cols: 16, ..ArrayGeometry::default() };
        let p = PathParams { gain_variance: 1.0, elevation: std::f64::consts::PI / 3.0, azimuth: 1.0, delay: 0.0, doppler: 0.0 };
        let b = fractional_bins(&p, &geom, &OfdmConfig::default());
        assert_abs_diff_eq!(b.col, 12.0, epsilon = 1e-12);
    }

    #[test]
    fn rounding_of_halves() {
        assert_eq!(nearest(-0.5), 0);
        assert_eq!(nearest(2.5), 3);
        assert_eq!(nearest(-1.2), -1);
        assert!(is_on_grid(3.0 + 1e-12));
        assert!(!is_on_grid(3.0 + 1e-6));
    }

    #[test]
    fn infeasible_row_is_rejected() {
        let geom = ArrayGeometry::default();
        let cfg = OfdmConfig::default();
        let bins = FractionalBins { col: 0.0, row: 1.0, delay: 0.0, doppler: 4.0 };
        assert!(path_from_bins(bins, 1.0, &geom, &cfg).is_err());
    }

    proptest! {
        #[test]
        fn bins_round_trip(col in 0u32..4, row in 0u32..8, d in 0u32..32, l in 0u32..8) {
            let geom = ArrayGeometry::default();
            let cfg = OfdmConfig::default();
            let bins = FractionalBins { col: col as f64, row: row as f64, delay: d as f64, doppler: l as f64 };
            if let Ok(p) = path_from_bins(bins, 1.0, &geom, &cfg) {
                let back = fractional_bins(&p, &geom, &cfg);
                prop_assert!((back.col - bins.col).abs() < 1e-9);
                prop_assert!((back.row - bins.row).abs() < 1e-9);
                prop_assert!((back.delay - bins.delay).abs() < 1e-9);
                prop_assert!((back.doppler - bins.doppler).abs() < 1e-9);
            }
        }

        #[test]
        fn snapping_lands_on_grid(t in 0.0..std::f64::consts::PI, ph in 0.0..std::f64::consts::PI, d in 0.0..0.99f64, l in 0.0..0.99f64) {
            let geom = ArrayGeometry::default();
            let cfg = OfdmConfig::default();
            let (lo, hi) = cfg.doppler_range();
            let p = PathParams { gain_variance: 0.5, elevation: t, azimuth: ph, delay: d * cfg.max_delay(), doppler: lo + l * (hi - lo) };
            let s = snap_path(&p, &geom, &cfg).unwrap();
            let b = fractional_bins(&s, &geom, &cfg);
            prop_assert!(is_on_grid(b.col) && is_on_grid(b.row) && is_on_grid(b.delay) && is_on_grid(b.doppler));
            prop_assert_eq!(s.gain_variance, 0.5);
        }

        #[test]
        fn random_paths_land_where_asked(seed in any::<u64>(), n in 1usize..6, off in prop_oneof![Just(None), Just(Some(1.0 / 3.0))]) {
            use rand::SeedableRng;
            let geom = ArrayGeometry::half_wavelength(4, 4, 5.8e9);
            let cfg = OfdmConfig { n_subcarriers: 64, cp_length: 8, ..OfdmConfig::default() };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let placement = off.map_or(Placement::OnGrid, Placement::Offset);
            let mp = random_paths(&mut rng, n, &geom, &cfg, placement).unwrap();
            prop_assert_eq!(mp.len(), n);
            prop_assert!((mp.total_power() - 1.0).abs() < 1e-12);
            for p in &mp.paths {
                let b = fractional_bins(p, &geom, &cfg);
                for x in [b.col, b.row, b.delay, b.doppler] {
                    let d = (x - nearest(x) as f64).abs();
                    match off {
                        None => prop_assert!(d < 1e-9),
                        Some(o) => prop_assert!((d - o).abs() < 1e-9),
                    }
                }
            }
        }
    }
}
