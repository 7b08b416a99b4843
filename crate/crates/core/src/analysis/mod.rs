//! Collinearity, the Dirichlet kernel, and numerical checks of the
//! concentration, collinearity-equivalence and extension properties.

mod lemmas;
mod theorems;

pub use lemmas::{lemma4_check, lemma4_sweep, lemma5_check, trace_identity_check, Lemma4Report, Lemma4SweepPoint, MatrixKind, TraceIdentity};
pub use theorems::{
    cell_fraction, offgrid_sweep, theorem1_check, theorem1_indices, theorem2_check, sftf_trace_agreement,
    CollinearityReport, ConcentrationReport, OnGrid, PathPrediction, SweepAxis, SweepPoint, Theorem1Prediction,
    Theorem2Route,
};

use std::f64::consts::PI;

use ndarray::Array3;

use crate::error::{Error, Result};

/// `S_L(x) = sin(Lπx) / (L sin(πx))`, with the limit value at integer `x`.
pub fn dirichlet(l: usize, x: f64) -> f64 {
    let lf = l as f64;
    let k = x.round();
    if (x - k).abs() < 1e-12 {
        // sin(Lπx)/sin(πx) → L·(−1)^{k(L−1)}
        let odd = ((k as i64) * (l as i64 - 1)).rem_euclid(2) == 1;
        return if odd { -1.0 } else { 1.0 };
    }
    (lf * PI * x).sin() / (lf * (PI * x).sin())
}

/// Normalized inner product `Σ a·b / (‖a‖ ‖b‖)`.
pub fn collinearity(a: &Array3<f64>, b: &Array3<f64>) -> Result<f64> {
    if a.dim() != b.dim() {
        let (x, y) = (a.dim(), b.dim());
        return Err(Error::Shape { expected: vec![x.0, x.1, x.2], found: vec![y.0, y.1, y.2] });
    }
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate("zero-norm fingerprint"));
    }
    let dot: f64 = a.iter().zip(b.iter()).map(|(x, y)| x * y).sum();
    Ok(dot / (na * nb))
}
