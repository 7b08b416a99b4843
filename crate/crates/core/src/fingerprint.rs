//! Triple-beam fingerprints and SFT-domain covariance tensors.

use ndarray::{Array1, Array2, Array3, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamspace::{path_beams, sft_to_tb, transform_matrices, PathBeams, TransformSet};
use crate::channel::{
    assemble_sft, complex_normal, gain_row, steering_vectors, ArrayGeometry, MultipathSet, OfdmConfig, SftTensor,
    SteeringSet,
};
use crate::error::{param, Error, Result};
use crate::tensor::{inner, outer3, C64};

/// Largest `A·N_c·N_t` for which [`sftf_small`] materializes the covariance.
pub const SFTF_CAP: usize = 4096;

pub const DEFAULT_DRAWS: usize = 100;

const NOISE_KEY: u64 = 0x6e6f_6973_655f_7362;
const CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TbfMeta {
    pub source_id: Option<String>,
    pub snr_db: Option<f64>,
    /// 0 for the closed-form expectation.
    pub n_draws: usize,
}

/// Nonnegative `A × N_g × N_f` fingerprint.
#[derive(Debug, Clone, PartialEq)]
pub struct Tbf {
    pub data: Array3<f64>,
    pub meta: TbfMeta,
}

impl Tbf {
    pub fn new(data: Array3<f64>) -> Self {
        Self { data, meta: TbfMeta::default() }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.data.dim()
    }

    pub fn sum(&self) -> f64 {
        self.data.sum()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self { data: self.data.mapv(|v| v * alpha), meta: self.meta.clone() }
    }
}

/// Where Monte-Carlo noise is injected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseDomain {
    /// White noise on the dense SFT channel, then transformed.
    #[default]
    Sft,
    /// The equivalent white noise drawn directly on the TB tensor.
    Beam,
}

fn all_beams(mp: &MultipathSet, geom: &ArrayGeometry, cfg: &OfdmConfig, t: &TransformSet) -> Result<Vec<PathBeams>> {
    mp.paths.iter().map(|p| path_beams(p, geom, cfg, t)).collect()
}

fn power_outer(b: &PathBeams) -> Array3<f64> {
    let u = b.angle.mapv(|z| z.norm_sqr());
    let v = b.delay.mapv(|z| z.norm_sqr());
    let w = b.doppler.mapv(|z| z.norm_sqr());
    Array3::from_shape_fn((u.len(), v.len(), w.len()), |(a, c, l)| u[a] * v[c] * w[l])
}

/// Closed-form expected beam power `Σ_p σ²_p |u_p|² • |v_p|² • |w_p|²`.
pub fn tbf_exact(mp: &MultipathSet, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<Tbf> {
    let t = transform_matrices(geom, cfg)?;
    tbf_exact_with(mp, geom, cfg, &t)
}

pub fn tbf_exact_with(mp: &MultipathSet, geom: &ArrayGeometry, cfg: &OfdmConfig, t: &TransformSet) -> Result<Tbf> {
    mp.validate(cfg)?;
    let mut data = Array3::<f64>::zeros(t.tb_shape());
    for (p, b) in mp.paths.iter().zip(all_beams(mp, geom, cfg, t)?) {
        data.scaled_add(p.gain_variance, &power_outer(&b));
    }
    Ok(Tbf { data, meta: TbfMeta::default() })
}

pub fn tbf_monte_carlo(
    mp: &MultipathSet,
    geom: &ArrayGeometry,
    cfg: &OfdmConfig,
    n_draws: usize,
    seed: u64,
    snr_db: Option<f64>,
) -> Result<Tbf> {
    let t = transform_matrices(geom, cfg)?;
    tbf_monte_carlo_with(mp, geom, cfg, &t, n_draws, seed, snr_db, NoiseDomain::Sft)
}

/// Sample-mean fingerprint over `n_draws` gain realizations.
///
/// Draw `d` uses gain stream `d` and noise stream `d`, and draws are summed
/// in fixed-size chunks, so the result depends only on `seed` and `n_draws`.
#[allow(clippy::too_many_arguments)]
pub fn tbf_monte_carlo_with(
    mp: &MultipathSet,
    geom: &ArrayGeometry,
    cfg: &OfdmConfig,
    t: &TransformSet,
    n_draws: usize,
    seed: u64,
    snr_db: Option<f64>,
    domain: NoiseDomain,
) -> Result<Tbf> {
    if n_draws == 0 {
        return Err(param("n_draws must be >= 1"));
    }
    mp.validate(cfg)?;
    let snr = snr_db.filter(|s| s.is_finite());
    let data = match snr {
        None => sample_covariance_tbf(mp, geom, cfg, t, n_draws, seed)?,
        Some(db) => {
            let snr_lin = 10f64.powf(db / 10.0);
            let beams = all_beams(mp, geom, cfg, t)?;
            let gram = sft_gram(mp, geom, cfg)?;
            let variances = mp.variances();
            let n_chunks = n_draws.div_ceil(CHUNK);
            let basis = BeamBasis::new(&beams);
            let partials: Vec<Result<Array3<f64>>> = (0..n_chunks)
                .into_par_iter()
                .map(|chunk| {
                    let mut acc = Array3::<f64>::zeros(t.tb_shape());
                    let mut buf = vec![C64::new(0.0, 0.0); acc.len()];
                    for d in chunk * CHUNK..((chunk + 1) * CHUNK).min(n_draws) {
                        let gains = gain_row(&variances, seed, d as u64);
                        match domain {
                            NoiseDomain::Sft => {
                                let tb = noisy_sft_draw(mp, geom, cfg, t, &gains, snr_lin, seed, d as u64)?;
                                Zip::from(&mut acc).and(&tb).for_each(|a, z| *a += z.norm_sqr());
                            }
                            NoiseDomain::Beam => {
                                noisy_beam_draw(&basis, &gram, t, &gains, snr_lin, seed, d as u64, &mut buf);
                                let flat = acc.as_slice_mut().expect("standard layout");
                                for (a, z) in flat.iter_mut().zip(&buf) {
                                    *a += z.norm_sqr();
                                }
                            }
                        }
                    }
                    Ok(acc)
                })
                .collect();
            let mut total = Array3::<f64>::zeros(t.tb_shape());
            for p in partials {
                total += &p?;
            }
            total / n_draws as f64
        }
    };
    Ok(Tbf {
        data,
        meta: TbfMeta { source_id: None, snr_db: snr, n_draws },
    })
}

/// Noiseless sample mean through the `P × P` sample gain covariance; equal
/// to averaging `|H^TB|²` over the same draws.
fn sample_covariance_tbf(
    mp: &MultipathSet,
    geom: &ArrayGeometry,
    cfg: &OfdmConfig,
    t: &TransformSet,
    n_draws: usize,
    seed: u64,
) -> Result<Array3<f64>> {
    let p = mp.len();
    let variances = mp.variances();
    let n_chunks = n_draws.div_ceil(CHUNK);
    let partials: Vec<Array2<C64>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut r = Array2::<C64>::zeros((p, p));
            for d in chunk * CHUNK..((chunk + 1) * CHUNK).min(n_draws) {
                let g = gain_row(&variances, seed, d as u64);
                for i in 0..p {
                    for j in 0..p {
                        r[(i, j)] += g[i] * g[j].conj();
                    }
                }
            }
            r
        })
        .collect();
    let mut r = Array2::<C64>::zeros((p, p));
    for part in partials {
        r += &part;
    }
    r /= C64::new(n_draws as f64, 0.0);

    let beams = all_beams(mp, geom, cfg, t)?;
    let mut out = Array3::<f64>::zeros(t.tb_shape());
    for i in 0..p {
        out.scaled_add(r[(i, i)].re, &power_outer(&beams[i]));
        for j in i + 1..p {
            let u: Array1<C64> = Zip::from(&beams[i].angle).and(&beams[j].angle).map_collect(|a, b| a * b.conj());
            let v: Array1<C64> = Zip::from(&beams[i].delay).and(&beams[j].delay).map_collect(|a, b| a * b.conj());
            let w: Array1<C64> = Zip::from(&beams[i].doppler).and(&beams[j].doppler).map_collect(|a, b| a * b.conj());
            let cross = outer3(u.view(), v.view(), w.view());
            let rij = r[(i, j)];
            Zip::from(&mut out).and(&cross).for_each(|o, z| *o += 2.0 * (rij * z).re);
        }
    }
    out.mapv_inplace(|v| v.max(0.0));
    Ok(out)
}

/// `⟨G_p, G_q⟩` for every path pair.
fn sft_gram(mp: &MultipathSet, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<Array2<C64>> {
    let s: Vec<SteeringSet> = mp.paths.iter().map(|p| steering_vectors(p, geom, cfg)).collect::<Result<_>>()?;
    Ok(Array2::from_shape_fn((s.len(), s.len()), |(i, j)| overlap(&s[i], &s[j])))
}

fn overlap(a: &SteeringSet, b: &SteeringSet) -> C64 {
    inner(a.f_upa.view(), b.f_upa.view()) * inner(a.f_freq.view(), b.f_freq.view()) * inner(a.f_time.view(), b.f_time.view())
}

#[allow(clippy::too_many_arguments)]
fn noisy_sft_draw(
    mp: &MultipathSet,
    geom: &ArrayGeometry,
    cfg: &OfdmConfig,
    t: &TransformSet,
    gains: &Array1<C64>,
    snr_lin: f64,
    seed: u64,
    draw: u64,
) -> Result<Array3<C64>> {
    let h = assemble_sft(mp, gains.as_slice().expect("contiguous"), geom, cfg)?;
    let mut dense = h.to_dense()?;
    let var = mean_power(&dense) / snr_lin;
    add_noise(&mut dense, var, seed ^ NOISE_KEY, draw);
    Ok(sft_to_tb(&SftTensor::Dense(dense), t)?.data)
}

/// Path beams arranged for the per-draw product: `m[(a·N_g + g)·P + p] =
/// u_p[a] v_p[g]` and `w[p·N_f + l] = w_p[l]`.
struct BeamBasis {
    m: Vec<C64>,
    w: Vec<C64>,
    n_paths: usize,
    n_doppler: usize,
}

impl BeamBasis {
    fn new(beams: &[PathBeams]) -> Self {
        let n_paths = beams.len();
        let (na, ng, nf) = beams.first().map_or((0, 0, 0), |b| (b.angle.len(), b.delay.len(), b.doppler.len()));
        let mut m = Vec::with_capacity(na * ng * n_paths);
        for a in 0..na {
            for g in 0..ng {
                m.extend(beams.iter().map(|b| b.angle[a] * b.delay[g]));
            }
        }
        let w = beams.iter().flat_map(|b| b.doppler.iter().copied()).collect();
        Self { m, w, n_paths, n_doppler: nf }
    }
}

/// One noisy TB-domain draw written into `out` in row-major order.
#[allow(clippy::too_many_arguments)]
fn noisy_beam_draw(
    basis: &BeamBasis,
    gram: &Array2<C64>,
    t: &TransformSet,
    gains: &Array1<C64>,
    snr_lin: f64,
    seed: u64,
    draw: u64,
    out: &mut [C64],
) {
    let (p, nf) = (basis.n_paths, basis.n_doppler);
    let wg: Vec<C64> = (0..p).flat_map(|i| basis.w[i * nf..(i + 1) * nf].iter().map(move |w| w * gains[i])).collect();
    for (row, o) in basis.m.chunks_exact(p).zip(out.chunks_exact_mut(nf)) {
        o.fill(C64::new(0.0, 0.0));
        for (i, c) in row.iter().enumerate() {
            for (z, w) in o.iter_mut().zip(&wg[i * nf..(i + 1) * nf]) {
                *z += c * w;
            }
        }
    }
    let mut energy = C64::new(0.0, 0.0);
    for i in 0..p {
        for j in 0..p {
            energy += gains[i] * gains[j].conj() * gram[(i, j)];
        }
    }
    let n = t.scale() * t.scale();
    let var = energy.re.max(0.0) / (n * n * snr_lin);
    if var > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ NOISE_KEY);
        rng.set_stream(draw);
        for z in out.iter_mut() {
            *z += complex_normal(&mut rng, var);
        }
    }
}

fn mean_power(x: &Array3<C64>) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().map(|z| z.norm_sqr()).sum::<f64>() / x.len() as f64
    }
}

fn add_noise(x: &mut Array3<C64>, variance: f64, seed: u64, stream: u64) {
    if variance <= 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    for z in x.iter_mut() {
        *z += complex_normal(&mut rng, variance);
    }
}

/// Adds white complex Gaussian noise at `snr_db` relative to the mean
/// element power. An infinite SNR returns the input unchanged.
pub fn add_awgn(h: &SftTensor, snr_db: f64, seed: u64) -> Result<SftTensor> {
    if snr_db.is_nan() {
        return Err(param("snr_db is NaN"));
    }
    if snr_db == f64::INFINITY {
        return Ok(h.clone());
    }
    let mut dense = h.to_dense()?;
    if dense.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(param("channel has non-finite entries"));
    }
    let var = mean_power(&dense) / 10f64.powf(snr_db / 10.0);
    add_noise(&mut dense, var, seed, 0);
    Ok(SftTensor::Dense(dense))
}

/// Materialized SFT covariance, stored as an `N × N` matrix over the
/// row-major flattening of `(antenna, subcarrier, symbol)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sftf {
    pub data: Array2<C64>,
    pub dims: (usize, usize, usize),
}

impl Sftf {
    /// Sum of pseudo-diagonal entries.
    pub fn trace(&self) -> f64 {
        self.data.diag().iter().map(|z| z.re).sum()
    }

    /// `Tr{X • X'^*}`: the elementwise inner product of two covariances.
    pub fn inner(&self, other: &Sftf) -> Result<f64> {
        if self.data.dim() != other.data.dim() {
            return Err(Error::Shape {
                expected: vec![self.data.nrows(), self.data.ncols()],
                found: vec![other.data.nrows(), other.data.ncols()],
            });
        }
        Ok(Zip::from(&self.data).and(&other.data).fold(0.0, |acc, a, b| acc + (a * b.conj()).re))
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Entry indexed by the two `(antenna, subcarrier, symbol)` triples.
    pub fn get(&self, i: (usize, usize, usize), j: (usize, usize, usize)) -> C64 {
        let (_, nc, nt) = self.dims;
        self.data[((i.0 * nc + i.1) * nt + i.2, (j.0 * nc + j.1) * nt + j.2)]
    }
}

pub fn sftf_small(mp: &MultipathSet, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<Sftf> {
    sftf_small_capped(mp, geom, cfg, SFTF_CAP)
}

pub fn sftf_small_capped(mp: &MultipathSet, geom: &ArrayGeometry, cfg: &OfdmConfig, cap: usize) -> Result<Sftf> {
    let dims = (geom.n_antennas(), cfg.n_subcarriers, cfg.n_symbols());
    let n = dims.0 * dims.1 * dims.2;
    if n > cap {
        return Err(Error::SizeCap { requested: n, cap });
    }
    mp.validate(cfg)?;
    let mut data = Array2::<C64>::zeros((n, n));
    for p in &mp.paths {
        if p.gain_variance == 0.0 {
            continue;
        }
        let s = steering_vectors(p, geom, cfg)?;
        let g: Vec<C64> = outer3(s.f_upa.view(), s.f_freq.view(), s.f_time.view()).into_iter().collect();
        for i in 0..n {
            let gi = g[i] * p.gain_variance;
            for j in 0..n {
                data[(i, j)] += gi * g[j].conj();
            }
        }
    }
    Ok(Sftf { data, dims })
}

/// Quantities behind the SFTF collinearity, from path overlaps alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SftfInner {
    pub trace: f64,
    pub norm1: f64,
    pub norm2: f64,
}

impl SftfInner {
    pub fn collinearity(&self) -> Result<f64> {
        if self.norm1 == 0.0 || self.norm2 == 0.0 {
            return Err(Error::Degenerate("zero-norm covariance"));
        }
        Ok(self.trace / (self.norm1 * self.norm2))
    }
}

fn weighted_overlap(a: &[(f64, SteeringSet)], b: &[(f64, SteeringSet)]) -> f64 {
    let mut acc = 0.0;
    for (sp, fp) in a {
        for (sq, fq) in b {
            acc += sp * sq * overlap(fp, fq).norm_sqr();
        }
    }
    acc
}

pub fn sftf_inner_closed(mp1: &MultipathSet, mp2: &MultipathSet, geom: &ArrayGeometry, cfg: &OfdmConfig) -> Result<SftfInner> {
    let prep = |mp: &MultipathSet| -> Result<Vec<(f64, SteeringSet)>> {
        mp.paths.iter().map(|p| Ok((p.gain_variance, steering_vectors(p, geom, cfg)?))).collect()
    };
    let a = prep(mp1)?;
    let b = prep(mp2)?;
    Ok(SftfInner {
        trace: weighted_overlap(&a, &b),
        norm1: weighted_overlap(&a, &a).sqrt(),
        norm2: weighted_overlap(&b, &b).sqrt(),
    })
}
