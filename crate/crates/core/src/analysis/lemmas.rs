use ndarray::{s, Array2, Array3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beamspace::{angle_matrix, doppler_window, extensions, transform_matrices};
use crate::channel::{assemble_sft, complex_normal, ArrayGeometry, MultipathSet, OfdmConfig};
use crate::error::{param, Result};
use crate::fingerprint::sftf_small;
use crate::grid::{path_from_bins, FractionalBins};
use super::theorems::SweepAxis;
use crate::tensor::{hermitian, kron, matmul, mode_product, sum_conj_product, C64, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    Identity,
    /// Centred DFT, unitary.
    Dft,
    /// Gaussian random matrix; the negative control.
    NonUnitary,
}

fn mode_matrix(kind: MatrixKind, n: usize, rng: &mut ChaCha8Rng) -> Array2<C64> {
    match kind {
        MatrixKind::Identity => Array2::from_shape_fn((n, n), |(i, j)| if i == j { ONE } else { ZERO }),
        MatrixKind::Dft => angle_matrix(n),
        MatrixKind::NonUnitary => Array2::from_shape_fn((n, n), |_| complex_normal(rng, 1.0)),
    }
}

/// `|Sum{(O∘T₁) ⊙ (O∘T₂)*} − Sum{T₁ ⊙ T₂*}|` for random complex tensors,
/// with a matrix of `kind` applied along every mode.
pub fn lemma5_check(seed: u64, dims: (usize, usize, usize), kind: MatrixKind) -> Result<f64> {
    let (a, b, c) = dims;
    if [a, b, c].iter().any(|&d| d == 0 || d > 16) {
        return Err(param(format!("lemma-5 dims must lie in 1..=16, got {dims:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t1 = Array3::from_shape_fn(dims, |_| complex_normal(&mut rng, 1.0));
    let t2 = Array3::from_shape_fn(dims, |_| complex_normal(&mut rng, 1.0));
    let before = sum_conj_product(t1.iter(), t2.iter());
    let (mut x1, mut x2) = (t1, t2);
    for (axis, n) in [a, b, c].into_iter().enumerate() {
        let o = mode_matrix(kind, n, &mut rng);
        x1 = mode_product(o.view(), x1.view(), axis)?;
        x2 = mode_product(o.view(), x2.view(), axis)?;
    }
    let after = sum_conj_product(x1.iter(), x2.iter());
    Ok((after - before).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma4Report {
    /// Relative energy of the delay extension outside the first `N_g` rows.
    pub delay_dev: f64,
    /// Relative energy of the delay-Doppler extension outside the `N_f`
    /// Doppler window.
    pub doppler_dev: f64,
    /// Largest mismatch between the extensions on their shared entries; zero
    /// up to rounding by construction.
    pub consistency: f64,
}

/// Extension deviations of the deterministic channel with gains `√σ²_p`.
pub fn lemma4_check(mp: &MultipathSet, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<Lemma4Report> {
    let t = transform_matrices(geom, cfg)?;
    let gains: Vec<C64> = mp.paths.iter().map(|p| C64::new(p.gain_variance.sqrt(), 0.0)).collect();
    let h = assemble_sft(mp, &gains, geom, cfg)?;
    let ext = extensions(&h, &t)?;
    let energy = |x: &Array3<C64>| x.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let rel = |part: f64, whole: f64| if whole > 0.0 { (part / whole).max(0.0).sqrt() } else { 0.0 };

    let dot = energy(&ext.delay_ext);
    let tail = energy(&ext.delay_ext.slice(s![.., cfg.cp_length.., ..]).to_owned());
    let ddot = energy(&ext.delay_doppler_ext);
    let window = doppler_window(&ext.delay_doppler_ext, &t)?;
    let outside = ddot - energy(&window);
    let consistency = window.iter().zip(ext.delay_ext.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(Lemma4Report {
        delay_dev: rel(tail, dot),
        doppler_dev: rel(outside, ddot),
        consistency,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma4SweepPoint {
    pub factor: usize,
    /// `N_c` for a delay sweep, `N_t` for a Doppler sweep.
    pub size: usize,
    pub report: Lemma4Report,
}

/// Extension deviations of one fixed physical path while the delay axis
/// (`N_c` with `N_g`, `Δf` fixed) or the Doppler axis (`N_f` with `N_s`
/// fixed) is scaled by each factor. `bins` places the path at `cfg`.
pub fn lemma4_sweep(
    bins: FractionalBins,
    geom: &ArrayGeometry,
    cfg: &OfdmConfig,
    axis: SweepAxis,
    factors: &[usize],
) -> Result<Vec<Lemma4SweepPoint>> {
    if !matches!(axis, SweepAxis::Delay | SweepAxis::Doppler) {
        return Err(param("extension sweeps run along the delay or Doppler axis"));
    }
    let path = path_from_bins(bins, 1.0, geom, cfg)?;
    factors
        .iter()
        .map(|&factor| {
            if factor == 0 {
                return Err(param("sweep factors must be positive"));
            }
            let (g, c) = axis.scale(geom, cfg, factor);
            let report = lemma4_check(&MultipathSet::new(vec![path]), &g, &c)?;
            let size = if axis == SweepAxis::Delay { c.n_subcarriers } else { c.n_symbols() };
            Ok(Lemma4SweepPoint { factor, size, report })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceIdentity {
    /// `Sum{Ÿ ⊙ Ÿ'*}`
    pub beam: f64,
    /// `Sum{X ⊙ X'*} / (M_c M_r N_c N_t)²`
    pub scaled_sft: f64,
    pub rel_error: f64,
}

/// Compares the second-order statistics of the delay-Doppler extension with
/// the SFT covariance, both materialized.
pub fn trace_identity_check(mp1: &MultipathSet, mp2: &MultipathSet, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<TraceIdentity> {
    let t = transform_matrices(geom, cfg)?;
    let x1 = sftf_small(mp1, geom, cfg)?;
    let x2 = sftf_small(mp2, geom, cfg)?;
    let full = kron(kron(t.w_angle.view(), t.w_delay_full.view()).view(), t.w_doppler_full.view());
    let fh = hermitian(full.view());
    let n = full.nrows() as f64;
    let beam_cov = |x: &Array2<C64>| -> Result<Array2<C64>> {
        Ok(matmul(matmul(fh.view(), x.view())?.view(), full.view())?.mapv(|z| z / n))
    };
    let y1 = beam_cov(&x1.data)?;
    let y2 = beam_cov(&x2.data)?;
    let beam = sum_conj_product(y1.iter(), y2.iter()).re;
    let scaled_sft = x1.inner(&x2)? / (n * n);
    let scale = beam.abs().max(scaled_sft.abs());
    let rel_error = if scale > 0.0 { (beam - scaled_sft).abs() / scale } else { 0.0 };
    Ok(TraceIdentity { beam, scaled_sft, rel_error })
}
