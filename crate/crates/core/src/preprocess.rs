//! Network inputs derived from a fingerprint: the normalized angle-delay
//! map, its binary focus mask, and the normalized Doppler profile.

use ndarray::{Array1, Array2, Axis};

use crate::error::{param, Error, Result};
use crate::fingerprint::Tbf;

pub const DEFAULT_GAMMA: f64 = 0.05;

/// Mask thresholds of the support sweep.
pub const SWEEP_GAMMAS: [f64; 5] = [0.01, 0.02, 0.05, 0.1, 0.2];

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedInputs {
    /// `A × N_g`, unit sum.
    pub x_ad: Array2<f64>,
    /// `A × N_g`, entries in {0, 1}.
    pub x_ma: Array2<u8>,
    /// `N_f`, unit sum.
    pub x_do: Array1<f64>,
    pub gamma: f64,
}

fn total(f: &Tbf) -> Result<f64> {
    let s = f.sum();
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Degenerate("fingerprint has no energy"));
    }
    Ok(s)
}

/// Doppler-summed map normalized to unit sum.
pub fn angle_delay(f: &Tbf) -> Result<Array2<f64>> {
    let s = total(f)?;
    Ok(f.data.sum_axis(Axis(2)) / s)
}

/// Angle/delay-summed profile normalized to unit sum.
pub fn doppler(f: &Tbf) -> Result<Array1<f64>> {
    let s = total(f)?;
    Ok(f.data.sum_axis(Axis(0)).sum_axis(Axis(0)) / s)
}

/// `1` where `x_ad ≥ γ`.
pub fn mask(x_ad: &Array2<f64>, gamma: f64) -> Result<Array2<u8>> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(param(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    Ok(x_ad.mapv(|v| u8::from(v >= gamma)))
}

pub fn preprocess(f: &Tbf, gamma: f64) -> Result<PreprocessedInputs> {
    let x_ad = angle_delay(f)?;
    let x_ma = mask(&x_ad, gamma)?;
    Ok(PreprocessedInputs { x_do: doppler(f)?, x_ad, x_ma, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array3};
    use proptest::prelude::*;

    fn one_hot(a: usize, g: usize, l: usize) -> Tbf {
        let mut d = Array3::<f64>::zeros((4, 3, 5));
        d[(a, g, l)] = 2.5;
        Tbf::new(d)
    }

    #[test]
    fn one_hot_inputs() {
        let f = one_hot(2, 1, 3);
        let ad = angle_delay(&f).unwrap();
        assert_eq!(ad[(2, 1)], 1.0);
        assert_eq!(ad.sum(), 1.0);
        let d = doppler(&f).unwrap();
        assert_eq!(d, array![0.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn mask_examples() {
        let x = array![[0.6, 0.4], [0.0, 0.0]];
        assert_eq!(mask(&x, 0.5).unwrap(), array![[1u8, 0], [0, 0]]);
        assert!(mask(&x, 0.0).unwrap().iter().all(|&m| m == 1));
        assert!(mask(&x, 1.5).is_err());
        assert!(mask(&x, -0.1).is_err());
        let as_real = mask(&x, 0.5).unwrap().mapv(f64::from);
        assert_eq!(mask(&as_real, 0.5).unwrap(), mask(&x, 0.5).unwrap());
    }

    #[test]
    fn zero_fingerprint_is_degenerate() {
        let f = Tbf::new(Array3::zeros((2, 2, 2)));
        assert!(matches!(angle_delay(&f), Err(Error::Degenerate(_))));
        assert!(matches!(doppler(&f), Err(Error::Degenerate(_))));
    }

    #[test]
    fn repeated_doppler_slice_gives_slice_map() {
        let slice = array![[0.2, 0.1], [0.0, 0.7]];
        let mut d = Array3::<f64>::zeros((2, 2, 3));
        d.index_axis_mut(Axis(2), 0).assign(&slice);
        d.index_axis_mut(Axis(2), 2).assign(&slice);
        let ad = angle_delay(&Tbf::new(d)).unwrap();
        for (x, y) in ad.iter().zip(slice.iter()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn marginals_and_monotone_mask(vals in proptest::collection::vec(0.0..1.0f64, 24), g1 in 0.0..1.0f64, g2 in 0.0..1.0f64) {
            let mut d = Array3::from_shape_vec((2, 3, 4), vals).unwrap();
            d[(0, 0, 0)] += 1e-3;
            let f = Tbf::new(d.clone());
            let p = preprocess(&f, g1).unwrap();
            prop_assert!((p.x_ad.sum() - 1.0).abs() < 1e-9);
            prop_assert!((p.x_do.sum() - 1.0).abs() < 1e-9);
            let norm = d.clone() / d.sum();
            let ad = norm.sum_axis(Axis(2));
            let dd = norm.sum_axis(Axis(0)).sum_axis(Axis(0));
            for (x, y) in p.x_ad.iter().zip(ad.iter()) { prop_assert!((x - y).abs() < 1e-12); }
            for (x, y) in p.x_do.iter().zip(dd.iter()) { prop_assert!((x - y).abs() < 1e-12); }
            let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
            let wide = mask(&p.x_ad, lo).unwrap();
            let narrow = mask(&p.x_ad, hi).unwrap();
            for (w, n) in wide.iter().zip(narrow.iter()) { prop_assert!(n <= w); }
        }
    }
}
