//! Angle, delay and Doppler transform matrices and the conversion between
//! the space-frequency-time and triple-beam (angle-delay-Doppler) domains.

use std::f64::consts::PI;

use ndarray::{s, Array1, Array2, Array3, ArrayView1, ArrayView2};

use crate::channel::{steering_vectors, ArrayGeometry, OfdmConfig, PathParams, SftTensor};
use crate::error::{param, Error, Result};
use crate::tensor::{cis, hermitian, kron, matvec, mode_product, outer3, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct TransformSet {
    /// `W^φ_{M_c}`
    pub w_angle_col: Array2<C64>,
    /// `W^φ_{M_r}`
    pub w_angle_row: Array2<C64>,
    /// `W^φ_{M_c} ⊗ W^φ_{M_r}`, `A × A`.
    pub w_angle: Array2<C64>,
    /// `N_c × N_g`
    pub w_delay: Array2<C64>,
    /// `N_t × N_f`
    pub w_doppler: Array2<C64>,
    /// `N_c × N_c`
    pub w_delay_full: Array2<C64>,
    /// `N_t × N_t`; `w_doppler` is its central block of `N_f` columns.
    pub w_doppler_full: Array2<C64>,
    pub cp_length: usize,
    pub slots_per_frame: usize,
}

/// `[W]_{i,j} = e^{-i2π i(2j−M)/(2M)} / √M`
pub fn angle_matrix(m: usize) -> Array2<C64> {
    let norm = 1.0 / (m as f64).sqrt();
    Array2::from_shape_fn((m, m), |(i, j)| {
        let num = (i as f64) * (2.0 * j as f64 - m as f64);
        cis(-2.0 * PI * num / (2.0 * m as f64)) * norm
    })
}

/// First `cols` columns of the `n`-point DFT, `e^{-i2π ij/n}/√n`.
pub fn delay_matrix(n: usize, cols: usize) -> Array2<C64> {
    let norm = 1.0 / (n as f64).sqrt();
    Array2::from_shape_fn((n, cols), |(i, j)| cis(-2.0 * PI * ((i * j) % n) as f64 / n as f64) * norm)
}

/// Doppler matrix with `cols` columns centred on zero Doppler.
///
/// `cols = N_f` gives `W^ν_{N_t,N_f}`, `cols = N_t` the square extension.
pub fn doppler_matrix(cfg: &OfdmConfig, cols: usize) -> Array2<C64> {
    let nt = cfg.n_symbols();
    let ns = cfg.symbols_per_slot as f64;
    let nf = cfg.slots_per_frame as f64;
    let n_t = cfg.first_symbol_index as f64;
    let norm = 1.0 / (nt as f64).sqrt();
    Array2::from_shape_fn((nt, cols), |(i, j)| {
        let phase = 2.0 * PI * (n_t + i as f64 / ns) * (2.0 * j as f64 - cols as f64) / (2.0 * nf);
        cis(phase) * norm
    })
}

pub fn transform_matrices(geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<TransformSet> {
    geom.validate()?;
    cfg.validate()?;
    let w_angle_col = angle_matrix(geom.m_cols);
    let w_angle_row = angle_matrix(geom.m_rows);
    let w_angle = kron(w_angle_col.view(), w_angle_row.view());
    Ok(TransformSet {
        w_angle,
        w_angle_col,
        w_angle_row,
        w_delay: delay_matrix(cfg.n_subcarriers, cfg.cp_length),
        w_doppler: doppler_matrix(cfg, cfg.slots_per_frame),
        w_delay_full: delay_matrix(cfg.n_subcarriers, cfg.n_subcarriers),
        w_doppler_full: doppler_matrix(cfg, cfg.n_symbols()),
        cp_length: cfg.cp_length,
        slots_per_frame: cfg.slots_per_frame,
    })
}

impl TransformSet {
    pub fn n_antennas(&self) -> usize {
        self.w_angle.nrows()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.w_delay.nrows()
    }

    pub fn n_symbols(&self) -> usize {
        self.w_doppler.nrows()
    }

    pub fn sft_shape(&self) -> (usize, usize, usize) {
        (self.n_antennas(), self.n_subcarriers(), self.n_symbols())
    }

    pub fn tb_shape(&self) -> (usize, usize, usize) {
        (self.n_antennas(), self.cp_length, self.slots_per_frame)
    }

    /// `√(M_c M_r N_c N_t)`
    pub fn scale(&self) -> f64 {
        (self.n_antennas() as f64 * self.n_subcarriers() as f64 * self.n_symbols() as f64).sqrt()
    }

    /// Column of `w_doppler_full` holding column 0 of `w_doppler`.
    pub fn doppler_block_start(&self) -> Result<usize> {
        let gap = self.n_symbols() - self.slots_per_frame;
        if gap % 2 != 0 {
            return Err(param(format!(
                "N_t - N_f = {gap} is odd; the Doppler window is not a column block of the square extension"
            )));
        }
        Ok(gap / 2)
    }
}

/// Channel in angle × delay × Doppler coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TbTensor {
    pub data: Array3<C64>,
}

impl TbTensor {
    pub fn power(&self) -> Array3<f64> {
        self.data.mapv(|z| z.norm_sqr())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionPair {
    /// `A × N_c × N_f`
    pub delay_ext: Array3<C64>,
    /// `A × N_c × N_t`
    pub delay_doppler_ext: Array3<C64>,
}

/// Per-path beam responses `(u, v, w)` whose outer product is the TB tensor
/// of a unit-gain path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBeams {
    pub angle: Array1<C64>,
    pub delay: Array1<C64>,
    pub doppler: Array1<C64>,
}

impl PathBeams {
    pub fn outer(&self) -> Array3<C64> {
        outer3(self.angle.view(), self.delay.view(), self.doppler.view())
    }
}

fn project(m: ArrayView2<'_, C64>, x: ArrayView1<'_, C64>) -> Array1<C64> {
    let n = (m.nrows() as f64).sqrt();
    matvec(hermitian(m).view(), x).mapv(|z| z / n)
}

pub fn path_beams(path: &PathParams, geom: &ArrayGeometry, cfg: &OfdmConfig, t: &TransformSet) -> Result<PathBeams> {
    let s = steering_vectors(path, geom, cfg)?;
    Ok(PathBeams {
        angle: project(t.w_angle.view(), s.f_upa.view()),
        delay: project(t.w_delay.view(), s.f_freq.view()),
        doppler: project(t.w_doppler.view(), s.f_time.view()),
    })
}

fn check_shape(found: (usize, usize, usize), expected: (usize, usize, usize)) -> Result<()> {
    if found != expected {
        return Err(Error::Shape {
            expected: vec![expected.0, expected.1, expected.2],
            found: vec![found.0, found.1, found.2],
        });
    }
    Ok(())
}

/// Applies `(1/√N)·W_a^H ∘₁ W_d^H ∘₂ W_n^H ∘₃` to an SFT tensor.
fn to_beam_domain(
    h: &SftTensor,
    t: &TransformSet,
    w_delay: &Array2<C64>,
    w_doppler: &Array2<C64>,
) -> Result<Array3<C64>> {
    check_shape(h.shape(), t.sft_shape())?;
    let scale = 1.0 / t.scale();
    let shape = (t.n_antennas(), w_delay.ncols(), w_doppler.ncols());
    match h {
        SftTensor::Factored { terms, .. } => {
            let wa = hermitian(t.w_angle.view());
            let wd = hermitian(w_delay.view());
            let wn = hermitian(w_doppler.view());
            let mut out = Array3::<C64>::zeros(shape);
            for term in terms {
                let u = matvec(wa.view(), term.space.view()).mapv(|z| z * term.gain * scale);
                let v = matvec(wd.view(), term.freq.view());
                let w = matvec(wn.view(), term.time.view());
                out += &outer3(u.view(), v.view(), w.view());
            }
            Ok(out)
        }
        SftTensor::Dense(d) => {
            let x = mode_product(hermitian(w_doppler.view()).view(), d.view(), 2)?;
            let x = mode_product(hermitian(w_delay.view()).view(), x.view(), 1)?;
            let x = mode_product(hermitian(t.w_angle.view()).view(), x.view(), 0)?;
            Ok(x.mapv(|z| z * scale))
        }
    }
}

pub fn sft_to_tb(h: &SftTensor, t: &TransformSet) -> Result<TbTensor> {
    Ok(TbTensor { data: to_beam_domain(h, t, &t.w_delay, &t.w_doppler)? })
}

/// Forward reconstruction `√N · W_a ∘₁ W^τ ∘₂ W^ν ∘₃ H^TB`; exact for on-grid channels.
pub fn tb_to_sft(h: &TbTensor, t: &TransformSet) -> Result<SftTensor> {
    check_shape(h.data.dim(), t.tb_shape())?;
    let x = mode_product(t.w_doppler.view(), h.data.view(), 2)?;
    let x = mode_product(t.w_delay.view(), x.view(), 1)?;
    let x = mode_product(t.w_angle.view(), x.view(), 0)?;
    let scale = t.scale();
    Ok(SftTensor::Dense(x.mapv(|z| z * scale)))
}

/// Delay extension (`A × N_c × N_f`) and delay-Doppler extension (`A × N_c × N_t`).
pub fn extensions(h: &SftTensor, t: &TransformSet) -> Result<ExtensionPair> {
    Ok(ExtensionPair {
        delay_ext: to_beam_domain(h, t, &t.w_delay_full, &t.w_doppler)?,
        delay_doppler_ext: to_beam_domain(h, t, &t.w_delay_full, &t.w_doppler_full)?,
    })
}

/// Doppler-window slice of the delay-Doppler extension, `A × N_c × N_f`.
pub fn doppler_window(ext: &Array3<C64>, t: &TransformSet) -> Result<Array3<C64>> {
    let start = t.doppler_block_start()?;
    Ok(ext.slice(s![.., .., start..start + t.slots_per_frame]).to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{assemble_sft, MultipathSet};
    use crate::tensor::{frobenius, unitarity_defect, ZERO};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn tiny() -> (ArrayGeometry, OfdmConfig) {
        let geom = ArrayGeometry::half_wavelength(2, 2, 5.8e9);
        let cfg = OfdmConfig {
            n_subcarriers: 8,
            cp_length: 4,
            slots_per_frame: 4,
            symbols_per_slot: 2,
            ..OfdmConfig::default()
        };
        (geom, cfg)
    }

    #[test]
    fn two_point_angle_matrix() {
        let w = angle_matrix(2);
        let r = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(w[(0, 0)].re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(w[(0, 1)].re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(w[(1, 0)].re, -r, epsilon = 1e-15);
        assert_abs_diff_eq!(w[(1, 0)].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn square_members_are_unitary() {
        for cfg in [
            OfdmConfig::default(),
            OfdmConfig { symbols_per_slot: 7, first_symbol_index: 5, ..OfdmConfig::default() },
            OfdmConfig { symbols_per_slot: 2, slots_per_frame: 3, ..OfdmConfig::default() },
        ] {
            let t = transform_matrices(&ArrayGeometry::default(), &cfg).unwrap();
            for m in [&t.w_angle_col, &t.w_angle_row, &t.w_angle, &t.w_delay_full, &t.w_doppler_full] {
                assert!(unitarity_defect(m.view()) < 1e-10);
            }
            assert!(unitarity_defect(t.w_delay.view()) < 1e-10);
            assert!(unitarity_defect(t.w_doppler.view()) < 1e-10);
        }
    }

    #[test]
    fn windows_are_blocks_of_square_members() {
        let cfg = OfdmConfig { symbols_per_slot: 7, first_symbol_index: 2, ..OfdmConfig::default() };
        let t = transform_matrices(&ArrayGeometry::default(), &cfg).unwrap();
        let start = t.doppler_block_start().unwrap();
        assert_eq!(start, 24);
        let block = t.w_doppler_full.slice(s![.., start..start + 8]);
        for (a, b) in block.iter().zip(t.w_doppler.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        let head = t.w_delay_full.slice(s![.., ..32]);
        assert_eq!(head, t.w_delay.view());
    }

    #[test]
    fn odd_doppler_gap_is_rejected() {
        let cfg = OfdmConfig { slots_per_frame: 3, symbols_per_slot: 2, ..OfdmConfig::default() };
        let t = transform_matrices(&ArrayGeometry::default(), &cfg).unwrap();
        assert!(t.doppler_block_start().is_err());
    }

    #[test]
    fn zero_maps_to_zero() {
        let (geom, cfg) = tiny();
        let t = transform_matrices(&geom, &cfg).unwrap();
        let h = SftTensor::zeros(t.sft_shape());
        assert!(sft_to_tb(&h, &t).unwrap().data.iter().all(|z| *z == ZERO));
        let back = tb_to_sft(&TbTensor { data: Array3::zeros(t.tb_shape()) }, &t).unwrap();
        assert!(back.to_dense().unwrap().iter().all(|z| *z == ZERO));
        let ext = extensions(&h, &t).unwrap();
        assert!(ext.delay_doppler_ext.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let (geom, cfg) = tiny();
        let t = transform_matrices(&geom, &cfg).unwrap();
        let h = SftTensor::Dense(Array3::zeros((3, 8, 8)));
        assert!(matches!(sft_to_tb(&h, &t), Err(Error::Shape { .. })));
    }

    fn grid_path(geom: &ArrayGeometry, cfg: &OfdmConfig, c: f64, r: f64, d: f64, l: f64) -> PathParams {
        let mc = geom.m_cols as f64;
        let mr = geom.m_rows as f64;
        let cos_t = (c - mc / 2.0) / (mc * geom.d_row / geom.wavelength);
        let theta = cos_t.clamp(-1.0, 1.0).acos();
        let x = (r - mr / 2.0) / (mr * geom.d_col / geom.wavelength);
        let phi = (x / theta.sin()).clamp(-1.0, 1.0).acos();
        let span = cfg.n_symbols() as f64 * cfg.symbol_period();
        PathParams {
            gain_variance: 1.0,
            elevation: theta,
            azimuth: phi,
            delay: d * cfg.sample_period(),
            doppler: (l - cfg.slots_per_frame as f64 / 2.0) / span,
        }
    }

    #[test]
    fn on_grid_path_lands_in_one_bin() {
        let geom = ArrayGeometry::half_wavelength(4, 4, 5.8e9);
        let cfg = OfdmConfig { n_subcarriers: 32, cp_length: 8, slots_per_frame: 4, symbols_per_slot: 3, ..OfdmConfig::default() };
        let t = transform_matrices(&geom, &cfg).unwrap();
        let p = grid_path(&geom, &cfg, 3.0, 2.0, 5.0, 1.0);
        let h = assemble_sft(&MultipathSet::new(vec![p]), &[C64::new(1.0, 0.0)], &geom, &cfg).unwrap();
        let tb = sft_to_tb(&h, &t).unwrap();
        let pow = tb.power();
        let (idx, max) = pow.indexed_iter().fold(((0, 0, 0), 0.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        assert_eq!(idx, (3 * 4 + 2, 5, 1));
        assert_abs_diff_eq!(max, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(pow.sum(), 1.0, epsilon = 1e-9);

        let back = tb_to_sft(&tb, &t).unwrap().to_dense().unwrap();
        let orig = h.to_dense().unwrap();
        let err = frobenius((&back - &orig).view()) / frobenius(orig.view());
        assert!(err < 1e-9, "round trip error {err}");
    }

    #[test]
    fn extension_on_grid_is_exact() {
        let (geom, cfg) = tiny();
        let t = transform_matrices(&geom, &cfg).unwrap();
        let paths = vec![grid_path(&geom, &cfg, 1.0, 1.0, 2.0, 3.0), grid_path(&geom, &cfg, 0.0, 1.0, 3.0, 0.0)];
        let h = assemble_sft(&MultipathSet::new(paths), &[C64::new(0.4, 1.0), C64::new(-1.0, 0.2)], &geom, &cfg).unwrap();
        let ext = extensions(&h, &t).unwrap();
        let tb = sft_to_tb(&h, &t).unwrap();
        for ((a, c, l), z) in ext.delay_ext.indexed_iter() {
            if c < cfg.cp_length {
                assert!((z - tb.data[(a, c, l)]).norm() < 1e-12);
            } else {
                assert!(z.norm() < 1e-9);
            }
        }
        let window = doppler_window(&ext.delay_doppler_ext, &t).unwrap();
        let outside: f64 = ext.delay_doppler_ext.iter().map(|z| z.norm_sqr()).sum::<f64>() - window.iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert!(outside.abs() < 1e-9);
        for (x, y) in window.iter().zip(ext.delay_ext.iter()) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn off_grid_round_trip_improves_with_subcarriers() {
        let geom = ArrayGeometry::half_wavelength(2, 2, 5.8e9);
        let mut last = f64::INFINITY;
        for nc in [64usize, 128, 256, 512] {
            let cfg = OfdmConfig { n_subcarriers: nc, cp_length: nc / 8, slots_per_frame: 2, symbols_per_slot: 1, ..OfdmConfig::default() };
            let t = transform_matrices(&geom, &cfg).unwrap();
            let mut p = grid_path(&geom, &cfg, 1.0, 1.0, 0.0, 1.0);
            p.delay = (3.0 + 1.0 / 3.0) / (64.0 * 120e3);
            let h = assemble_sft(&MultipathSet::new(vec![p]), &[C64::new(1.0, 0.0)], &geom, &cfg).unwrap();
            let back = tb_to_sft(&sft_to_tb(&h, &t).unwrap(), &t).unwrap().to_dense().unwrap();
            let orig = h.to_dense().unwrap();
            let err = frobenius((&back - &orig).view()) / frobenius(orig.view());
            assert!(err < last, "N_c={nc}: {err} !< {last}");
            assert!(err > 0.0);
            last = err;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn fast_path_matches_dense(seed in any::<u64>(), th in 0.0..std::f64::consts::PI, ph in 0.0..std::f64::consts::PI, d in 0.0..3.99f64, l in 0.0..1.0f64) {
            let (geom, cfg) = tiny();
            let t = transform_matrices(&geom, &cfg).unwrap();
            let (lo, hi) = cfg.doppler_range();
            let p = PathParams { gain_variance: 1.0, elevation: th, azimuth: ph, delay: d * cfg.sample_period(), doppler: lo + l * (hi - lo) * 0.999 };
            let g = crate::channel::draw_gains(&[1.0], seed, 1).unwrap();
            let h = assemble_sft(&MultipathSet::new(vec![p]), &[g[(0, 0)]], &geom, &cfg).unwrap();
            let fast = sft_to_tb(&h, &t).unwrap();
            let dense = sft_to_tb(&SftTensor::Dense(h.to_dense().unwrap()), &t).unwrap();
            for (a, b) in fast.data.iter().zip(dense.data.iter()) {
                prop_assert!((a - b).norm() < 1e-10);
            }
            let beams = path_beams(&p, &geom, &cfg, &t).unwrap().outer();
            for (a, b) in fast.data.iter().zip(beams.iter()) {
                prop_assert!((a - b * g[(0, 0)]).norm() < 1e-10);
            }
        }

        #[test]
        fn square_transforms_preserve_energy(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let (geom, cfg) = tiny();
            let t = transform_matrices(&geom, &cfg).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x = Array3::from_shape_fn(t.sft_shape(), |_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let before = frobenius(x.view());
            for (m, axis) in [(&t.w_angle, 0usize), (&t.w_delay_full, 1), (&t.w_doppler_full, 2)] {
                let y = mode_product(hermitian(m.view()).view(), x.view(), axis).unwrap();
                prop_assert!((frobenius(y.view()) - before).abs() < 1e-10);
            }
        }
    }
}
