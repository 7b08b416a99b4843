//! Space-frequency-time channel model: array and OFDM configuration, per-path
//! steering vectors, and the multipath channel tensor.
//!
//! Channel tensors are kept as sums of rank-1 terms. A dense
//! `A × N_c × N_t` array is only built through [`SftTensor::materialize`],
//! which refuses requests above a caller-supplied element cap.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, Array3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::tensor::{cis, inner, kron_vec, C64, ZERO};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Largest dense SFT tensor [`SftTensor::to_dense`] will build.
pub const DEFAULT_DENSE_CAP: usize = 1 << 24;

/// Uniform planar array at the base station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayGeometry {
    /// Antennas per row (`M_r`).
    pub m_rows: usize,
    /// Antennas per column (`M_c`).
    pub m_cols: usize,
    /// Spacing along a column, used by the column response (`d_r`).
    pub d_row: f64,
    /// Spacing along a row, used by the row response (`d_c`).
    pub d_col: f64,
    pub wavelength: f64,
}

impl ArrayGeometry {
    /// Half-wavelength array at carrier `fc_hz`.
    pub fn half_wavelength(m_rows: usize, m_cols: usize, fc_hz: f64) -> Self {
        let wavelength = SPEED_OF_LIGHT / fc_hz;
        Self {
            m_rows,
            m_cols,
            d_row: wavelength / 2.0,
            d_col: wavelength / 2.0,
            wavelength,
        }
    }

    pub fn n_antennas(&self) -> usize {
        self.m_rows * self.m_cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_rows == 0 || self.m_cols == 0 {
            return Err(param("array needs at least one row and one column"));
        }
        for (name, v) in [("d_row", self.d_row), ("d_col", self.d_col), ("wavelength", self.wavelength)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(param(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        Self::half_wavelength(8, 4, 5.8e9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmConfig {
    /// `N_c`
    pub n_subcarriers: usize,
    /// `N_g`
    pub cp_length: usize,
    /// `Δf` in Hz.
    pub subcarrier_spacing: f64,
    /// `N_f`
    pub slots_per_frame: usize,
    /// `N_s`
    pub symbols_per_slot: usize,
    /// `n_T`
    #[serde(default)]
    pub first_symbol_index: u64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            n_subcarriers: 256,
            cp_length: 32,
            subcarrier_spacing: 120e3,
            slots_per_frame: 8,
            symbols_per_slot: 4,
            first_symbol_index: 0,
        }
    }
}

impl OfdmConfig {
    /// Sampling interval `T_s = 1/(N_c Δf)`.
    pub fn sample_period(&self) -> f64 {
        1.0 / (self.n_subcarriers as f64 * self.subcarrier_spacing)
    }

    /// OFDM symbol duration including the cyclic prefix.
    pub fn symbol_period(&self) -> f64 {
        (self.n_subcarriers + self.cp_length) as f64 * self.sample_period()
    }

    /// `N_t = N_f N_s`
    pub fn n_symbols(&self) -> usize {
        self.slots_per_frame * self.symbols_per_slot
    }

    pub fn max_delay(&self) -> f64 {
        self.cp_length as f64 * self.sample_period()
    }

    /// Half-open admissible Doppler interval in Hz. Every value inside rounds
    /// to one of the `N_f` Doppler bins.
    pub fn doppler_range(&self) -> (f64, f64) {
        let span = self.n_symbols() as f64 * self.symbol_period();
        let nf = self.slots_per_frame as f64;
        ((-nf / 2.0 - 0.5) / span, (nf / 2.0 - 0.5) / span)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 || self.slots_per_frame == 0 || self.symbols_per_slot == 0 {
            return Err(param("N_c, N_f and N_s must be positive"));
        }
        if self.cp_length == 0 || self.cp_length >= self.n_subcarriers {
            return Err(param(format!(
                "cp_length must satisfy 0 < N_g < N_c, got N_g={} N_c={}",
                self.cp_length, self.n_subcarriers
            )));
        }
        if !(self.subcarrier_spacing.is_finite() && self.subcarrier_spacing > 0.0) {
            return Err(param("subcarrier_spacing must be positive"));
        }
        Ok(())
    }
}

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    pub gain_variance: f64,
    /// Elevation `θ` in radians.
    pub elevation: f64,
    /// Azimuth `φ` in radians.
    pub azimuth: f64,
    /// Seconds.
    pub delay: f64,
    /// Hz.
    pub doppler: f64,
}

impl PathParams {
    pub fn validate(&self, cfg: &OfdmConfig) -> Result<()> {
        if !(self.gain_variance.is_finite() && self.gain_variance >= 0.0) {
            return Err(param(format!("gain variance must be >= 0, got {}", self.gain_variance)));
        }
        for (name, v) in [("elevation", self.elevation), ("azimuth", self.azimuth)] {
            if !(0.0..=PI).contains(&v) {
                return Err(param(format!("{name} must lie in [0, pi], got {v}")));
            }
        }
        if !(self.delay.is_finite() && self.delay >= 0.0) {
            return Err(param(format!("delay must be >= 0, got {}", self.delay)));
        }
        let limit = cfg.max_delay();
        if self.delay >= limit {
            return Err(Error::CyclicPrefix { delay: self.delay, limit });
        }
        let (min, max) = cfg.doppler_range();
        if !(self.doppler >= min && self.doppler < max) {
            return Err(Error::DopplerRange { doppler: self.doppler, min, max });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MultipathSet {
    pub paths: Vec<PathParams>,
}

impl MultipathSet {
    pub fn new(paths: Vec<PathParams>) -> Self {
        Self { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn variances(&self) -> Vec<f64> {
        self.paths.iter().map(|p| p.gain_variance).collect()
    }

    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain_variance).sum()
    }

    pub fn validate(&self, cfg: &OfdmConfig) -> Result<()> {
        if self.paths.is_empty() {
            return Err(param("multipath set is empty"));
        }
        self.paths.iter().try_for_each(|p| p.validate(cfg))
    }
}

/// Phase-factor vectors of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringSet {
    pub f_col: Array1<C64>,
    pub f_row: Array1<C64>,
    pub f_upa: Array1<C64>,
    pub f_freq: Array1<C64>,
    pub f_time: Array1<C64>,
}

/// Column response, length `M_c`.
pub fn col_steering(elevation: f64, geom: &ArrayGeometry) -> Array1<C64> {
    let k = -2.0 * PI * geom.d_row / geom.wavelength * elevation.cos();
    Array1::from_shape_fn(geom.m_cols, |j| cis(k * j as f64))
}

/// Row response, length `M_r`.
pub fn row_steering(elevation: f64, azimuth: f64, geom: &ArrayGeometry) -> Array1<C64> {
    let k = -2.0 * PI * geom.d_col / geom.wavelength * elevation.sin() * azimuth.cos();
    Array1::from_shape_fn(geom.m_rows, |j| cis(k * j as f64))
}

/// Subcarrier phase factors `e^{-i2π c τ Δf}`; no range checks.
pub fn freq_steering(delay: f64, cfg: &OfdmConfig) -> Array1<C64> {
    let k = -2.0 * PI * delay * cfg.subcarrier_spacing;
    Array1::from_shape_fn(cfg.n_subcarriers, |c| cis(k * c as f64))
}

/// Symbol phase factors over one frame; no range checks.
pub fn time_steering(doppler: f64, cfg: &OfdmConfig) -> Array1<C64> {
    let t_sym = cfg.symbol_period();
    let start = (cfg.first_symbol_index * cfg.symbols_per_slot as u64) as f64;
    Array1::from_shape_fn(cfg.n_symbols(), |n| cis(2.0 * PI * doppler * t_sym * (start + n as f64)))
}

pub fn steering_vectors(path: &PathParams, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<SteeringSet> {
    path.validate(cfg)?;
    let f_col = col_steering(path.elevation, geom);
    let f_row = row_steering(path.elevation, path.azimuth, geom);
    let f_upa = kron_vec(f_col.view(), f_row.view());
    Ok(SteeringSet {
        f_col,
        f_row,
        f_upa,
        f_freq: freq_steering(path.delay, cfg),
        f_time: time_steering(path.doppler, cfg),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOneTerm {
    pub gain: C64,
    pub space: Array1<C64>,
    pub freq: Array1<C64>,
    pub time: Array1<C64>,
}

/// Channel in space × frequency × time coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum SftTensor {
    Factored {
        shape: (usize, usize, usize),
        terms: Vec<RankOneTerm>,
    },
    Dense(Array3<C64>),
}

impl SftTensor {
    pub fn shape(&self) -> (usize, usize, usize) {
        match self {
            SftTensor::Factored { shape, .. } => *shape,
            SftTensor::Dense(a) => a.dim(),
        }
    }

    pub fn len(&self) -> usize {
        let (a, b, c) = self.shape();
        a * b * c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn zeros(shape: (usize, usize, usize)) -> Self {
        SftTensor::Factored { shape, terms: Vec::new() }
    }

    pub fn materialize(&self, cap: usize) -> Result<Array3<C64>> {
        let requested = self.len();
        if requested > cap {
            return Err(Error::SizeCap { requested, cap });
        }
        Ok(match self {
            SftTensor::Dense(a) => a.clone(),
            SftTensor::Factored { shape, terms } => {
                let mut out = Array3::<C64>::zeros(*shape);
                for t in terms {
                    let gt: Array1<C64> = t.time.mapv(|z| z * t.gain);
                    for ((a, c, n), v) in out.indexed_iter_mut() {
                        *v += t.space[a] * t.freq[c] * gt[n];
                    }
                }
                out
            }
        })
    }

    pub fn to_dense(&self) -> Result<Array3<C64>> {
        self.materialize(DEFAULT_DENSE_CAP)
    }

    /// Entry `(a, c, n)` without materializing.
    pub fn get(&self, a: usize, c: usize, n: usize) -> C64 {
        match self {
            SftTensor::Dense(d) => d[(a, c, n)],
            SftTensor::Factored { terms, .. } => terms.iter().map(|t| t.gain * t.space[a] * t.freq[c] * t.time[n]).sum(),
        }
    }

    /// `‖H‖²_F`, using factor inner products for the factored form.
    pub fn energy(&self) -> f64 {
        match self {
            SftTensor::Dense(d) => d.iter().map(|z| z.norm_sqr()).sum(),
            SftTensor::Factored { terms, .. } => {
                let mut acc = ZERO;
                for p in terms {
                    for q in terms {
                        acc += p.gain
                            * q.gain.conj()
                            * inner(p.space.view(), q.space.view())
                            * inner(p.freq.view(), q.freq.view())
                            * inner(p.time.view(), q.time.view());
                    }
                }
                acc.re.max(0.0)
            }
        }
    }

    pub fn mean_power(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.energy() / self.len() as f64
        }
    }
}

fn sft_shape(geom: &ArrayGeometry, cfg: &OfdmConfig) -> (usize, usize, usize) {
    (geom.n_antennas(), cfg.n_subcarriers, cfg.n_symbols())
}

/// Unit-gain rank-1 tensor `f^φ • f^τ • f^ν` of one path.
pub fn path_tensor(path: &PathParams, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<SftTensor> {
    let s = steering_vectors(path, geom, cfg)?;
    Ok(SftTensor::Factored {
        shape: sft_shape(geom, cfg),
        terms: vec![RankOneTerm {
            gain: C64::new(1.0, 0.0),
            space: s.f_upa,
            freq: s.f_freq,
            time: s.f_time,
        }],
    })
}

/// Circularly symmetric complex Gaussian gains, one row per draw.
///
/// Row `d` comes from stream `d` of a ChaCha8 generator keyed by `seed`, so
/// any subset of rows can be regenerated independently.
pub fn draw_gains(variances: &[f64], seed: u64, n_draws: usize) -> Result<Array2<C64>> {
    if n_draws == 0 {
        return Err(param("n_draws must be >= 1"));
    }
    if let Some(v) = variances.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(param(format!("gain variance must be >= 0, got {v}")));
    }
    let mut out = Array2::<C64>::zeros((n_draws, variances.len()));
    for (d, mut row) in out.rows_mut().into_iter().enumerate() {
        row.assign(&gain_row(variances, seed, d as u64));
    }
    Ok(out)
}

pub(crate) fn gain_row(variances: &[f64], seed: u64, draw: u64) -> Array1<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    variances.iter().map(|&v| complex_normal(&mut rng, v)).collect()
}

/// One `CN(0, variance)` sample.
pub(crate) fn complex_normal<R: rand::Rng>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    if variance == 0.0 {
        ZERO
    } else {
        C64::new(s * re, s * im)
    }
}

/// `Σ_p gains[p] · path_tensor(p)`.
pub fn assemble_sft(mp: &MultipathSet, gains: &[C64], geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<SftTensor> {
    if gains.len() != mp.len() {
        return Err(param(format!("{} gains for {} paths", gains.len(), mp.len())));
    }
    let mut terms = Vec::with_capacity(mp.len());
    for (p, &g) in mp.paths.iter().zip(gains) {
        let s = steering_vectors(p, geom, cfg)?;
        terms.push(RankOneTerm {
            gain: g,
            space: s.f_upa,
            freq: s.f_freq,
            time: s.f_time,
        });
    }
    Ok(SftTensor::Factored { shape: sft_shape(geom, cfg), terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn desk() -> (ArrayGeometry, OfdmConfig) {
        (ArrayGeometry::default(), OfdmConfig::default())
    }

    fn path(theta: f64, phi: f64, delay: f64, doppler: f64) -> PathParams {
        PathParams { gain_variance: 1.0, elevation: theta, azimuth: phi, delay, doppler }
    }

    #[test]
    fn derived_timing() {
        let cfg = OfdmConfig::default();
        assert_abs_diff_eq!(cfg.sample_period(), 1.0 / (256.0 * 120e3), epsilon = 1e-20);
        assert_abs_diff_eq!(cfg.symbol_period(), 288.0 * cfg.sample_period(), epsilon = 1e-20);
        assert_eq!(cfg.n_symbols(), 32);
    }

    #[test]
    fn broadside_column_is_flat() {
        let geom = ArrayGeometry { m_cols: 4, ..ArrayGeometry::default() };
        let f = col_steering(PI / 2.0, &geom);
        for z in f.iter() {
            assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn one_sample_delay_quarter_turns() {
        let cfg = OfdmConfig { n_subcarriers: 4, cp_length: 2, ..OfdmConfig::default() };
        let f = freq_steering(cfg.sample_period(), &cfg);
        let want = [C64::new(1.0, 0.0), C64::new(0.0, -1.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0)];
        for (z, w) in f.iter().zip(want) {
            assert!((z - w).norm() < 1e-12);
        }
        assert!(freq_steering(0.0, &cfg).iter().all(|z| *z == C64::new(1.0, 0.0)));
    }

    #[test]
    fn time_steering_includes_frame_offset() {
        let cfg = OfdmConfig { first_symbol_index: 3, ..OfdmConfig::default() };
        let nu = 500.0;
        let f = time_steering(nu, &cfg);
        let t = cfg.symbol_period();
        for n in [0usize, 5, 31] {
            let want = cis(2.0 * PI * 3.0 * 4.0 * nu * t) * cis(2.0 * PI * nu * n as f64 * t);
            assert!((f[n] - want).norm() < 1e-10);
        }
    }

    #[test]
    fn trivial_path_is_all_ones() {
        let (geom, cfg) = desk();
        let t = path_tensor(&path(PI / 2.0, PI / 2.0, 0.0, 0.0), &geom, &cfg).unwrap();
        let d = t.to_dense().unwrap();
        assert!(d.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn validation_errors() {
        let (_, cfg) = desk();
        let bad_delay = path(1.0, 1.0, cfg.max_delay(), 0.0);
        assert!(matches!(bad_delay.validate(&cfg), Err(Error::CyclicPrefix { .. })));
        let (_, hi) = cfg.doppler_range();
        assert!(matches!(path(1.0, 1.0, 0.0, hi).validate(&cfg), Err(Error::DopplerRange { .. })));
        assert!(matches!(path(4.0, 1.0, 0.0, 0.0).validate(&cfg), Err(Error::Parameter(_))));
        assert!(draw_gains(&[1.0, -0.5], 1, 3).is_err());
        assert!(draw_gains(&[1.0], 1, 0).is_err());
    }

    #[test]
    fn zero_variance_draws_are_zero() {
        let g = draw_gains(&[0.0, 1.0], 9, 50).unwrap();
        assert!(g.column(0).iter().all(|z| *z == ZERO));
        assert!(g.column(1).iter().any(|z| *z != ZERO));
    }

    #[test]
    fn unit_variance_mean_power() {
        let n = 100_000;
        let g = draw_gains(&[1.0], 2024, n).unwrap();
        let mean = g.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        // |β|² is Exp(1): standard error 1/√n.
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn gains_are_row_addressable() {
        let full = draw_gains(&[0.3, 0.7], 5, 20).unwrap();
        assert_eq!(full, draw_gains(&[0.3, 0.7], 5, 20).unwrap());
        assert_eq!(full.row(13), gain_row(&[0.3, 0.7], 5, 13));
        assert_ne!(full, draw_gains(&[0.3, 0.7], 6, 20).unwrap());
    }

    #[test]
    fn assemble_single_and_zero() {
        let (geom, cfg) = desk();
        let mp = MultipathSet::new(vec![path(1.0, 2.0, 1e-7, 300.0)]);
        let one = assemble_sft(&mp, &[C64::new(1.0, 0.0)], &geom, &cfg).unwrap();
        assert_eq!(one.to_dense().unwrap(), path_tensor(&mp.paths[0], &geom, &cfg).unwrap().to_dense().unwrap());
        let zero = assemble_sft(&mp, &[ZERO], &geom, &cfg).unwrap();
        assert!(zero.to_dense().unwrap().iter().all(|z| *z == ZERO));
        assert!(assemble_sft(&mp, &[], &geom, &cfg).is_err());
    }

    #[test]
    fn materialize_respects_cap() {
        let (geom, cfg) = desk();
        let t = SftTensor::zeros(sft_shape(&geom, &cfg));
        assert!(matches!(t.materialize(10), Err(Error::SizeCap { cap: 10, .. })));
    }

    #[test]
    fn conjugate_delay_conjugates_frequency_factor() {
        let cfg = OfdmConfig::default();
        let tau = 7.25 * cfg.sample_period();
        let wrapped = cfg.n_subcarriers as f64 * cfg.sample_period() - tau;
        let a = freq_steering(tau, &cfg);
        let b = freq_steering(wrapped, &cfg);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x.conj() - y).norm() < 1e-9);
        }
    }

    fn arb_path() -> impl Strategy<Value = PathParams> {
        let cfg = OfdmConfig::default();
        let (lo, hi) = cfg.doppler_range();
        (0.0..PI, 0.0..PI, 0.0..cfg.max_delay() * 0.999, lo..hi, 0.0..2.0).prop_map(|(t, p, d, n, v)| PathParams {
            gain_variance: v,
            elevation: t,
            azimuth: p,
            delay: d,
            doppler: n,
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn steering_entries_unit_modulus(p in arb_path()) {
            let (geom, cfg) = desk();
            let s = steering_vectors(&p, &geom, &cfg).unwrap();
            for v in [&s.f_col, &s.f_row, &s.f_upa, &s.f_freq, &s.f_time] {
                for z in v.iter() {
                    prop_assert!((z.norm() - 1.0).abs() < 1e-12);
                }
            }
            for i in 0..geom.n_antennas() {
                prop_assert_eq!(s.f_upa[i], s.f_col[i / geom.m_rows] * s.f_row[i % geom.m_rows]);
            }
        }

        #[test]
        fn assemble_is_linear(a in arb_path(), b in arb_path(), g0 in -2.0..2.0f64, g1 in -2.0..2.0f64, alpha in -3.0..3.0f64) {
            let geom = ArrayGeometry::half_wavelength(2, 2, 5.8e9);
            let cfg = OfdmConfig { n_subcarriers: 16, cp_length: 4, slots_per_frame: 2, symbols_per_slot: 2, ..OfdmConfig::default() };
            let (lo, hi) = cfg.doppler_range();
            let fit = |mut p: PathParams| { p.delay = p.delay % cfg.max_delay(); p.doppler = lo + (p.doppler.abs() % (hi - lo)); p };
            let mp = MultipathSet::new(vec![fit(a), fit(b)]);
            let gains = [C64::new(g0, g1), C64::new(g1, -g0)];
            let scaled: Vec<C64> = gains.iter().map(|g| g * alpha).collect();
            let base = assemble_sft(&mp, &gains, &geom, &cfg).unwrap().to_dense().unwrap();
            let big = assemble_sft(&mp, &scaled, &geom, &cfg).unwrap().to_dense().unwrap();
            for (x, y) in base.iter().zip(big.iter()) {
                prop_assert!((x * alpha - y).norm() < 1e-12 * (1.0 + y.norm()) * 4.0);
            }
            let split = assemble_sft(&mp, &[gains[0], ZERO], &geom, &cfg).unwrap().to_dense().unwrap()
                + assemble_sft(&mp, &[ZERO, gains[1]], &geom, &cfg).unwrap().to_dense().unwrap();
            for (x, y) in base.iter().zip(split.iter()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn factored_entry_matches_dense(p in arb_path(), a in 0usize..32, c in 0usize..256, n in 0usize..32) {
            let (geom, cfg) = desk();
            let t = path_tensor(&p, &geom, &cfg).unwrap();
            let s = steering_vectors(&p, &geom, &cfg).unwrap();
            prop_assert_eq!(t.get(a, c, n), s.f_upa[a] * s.f_freq[c] * s.f_time[n]);
        }
    }
}
