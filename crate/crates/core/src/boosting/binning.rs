use super::{BoostError, FeatureMatrix};
use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_BINS: usize = 255;

/// Per-feature cut points. A value `x` falls in bin `b` where `b` is the
/// number of cuts strictly below `x`, so `bin(x) <= b` exactly when
/// `x <= cuts[b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBinning {
    pub max_bins: usize,
    pub cuts: Vec<Vec<f64>>,
}

/// A point strictly between `lo` and `hi` that sorts `lo` left and `hi`
/// right, even when the two are adjacent floats.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi {
        lo
    } else {
        m
    }
}

/// Equal-frequency cut points over one feature's training values.
///
/// With at most `max_bins` distinct values every distinct value gets its
/// own bin; otherwise a cut is placed after the distinct value at which the
/// running count first reaches each `n * i / max_bins` quantile.
fn feature_cuts(values: &mut [f64], max_bins: usize) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for &v in values.iter() {
        match distinct.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => distinct.push((v, 1)),
        }
    }
    if distinct.len() <= max_bins {
        return distinct
            .windows(2)
            .map(|w| midpoint(w[0].0, w[1].0))
            .collect();
    }
    let n = values.len() as f64;
    let mut cuts = Vec::with_capacity(max_bins - 1);
    let mut seen = 0usize;
    for i in 0..distinct.len() - 1 {
        seen += distinct[i].1;
        let target = n * (cuts.len() + 1) as f64 / max_bins as f64;
        if seen as f64 >= target {
            cuts.push(midpoint(distinct[i].0, distinct[i + 1].0));
            if cuts.len() == max_bins - 1 {
                break;
            }
        }
    }
    cuts
}

pub fn build_binning(matrix: &FeatureMatrix, max_bins: usize) -> Result<HistogramBinning, BoostError> {
    if matrix.rows() == 0 || matrix.cols() == 0 {
        return Err(BoostError::EmptyMatrix);
    }
    if !(2..=u16::MAX as usize + 1).contains(&max_bins) {
        return Err(BoostError::BadParams(format!("max_bins {max_bins} out of range")));
    }
    let cuts = (0..matrix.cols())
        .map(|j| {
            let mut column = matrix.column(j);
            feature_cuts(&mut column, max_bins)
        })
        .collect();
    Ok(HistogramBinning { max_bins, cuts })
}

impl HistogramBinning {
    pub fn n_bins(&self, feature: usize) -> usize {
        self.cuts[feature].len() + 1
    }

    pub fn bin(&self, feature: usize, x: f64) -> u16 {
        self.cuts[feature].partition_point(|&c| c < x) as u16
    }

    /// Column-major bin indices: `out[j * rows + i]`.
    pub fn bin_matrix(&self, matrix: &FeatureMatrix) -> Vec<u16> {
        let rows = matrix.rows();
        let mut out = vec![0u16; rows * matrix.cols()];
        for j in 0..matrix.cols() {
            for i in 0..rows {
                out[j * rows + i] = self.bin(j, matrix.get(i, j));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn column(v: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_rows(v.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn median_split() {
        let b = build_binning(&column(&[1.0, 2.0, 3.0, 4.0]), 2).unwrap();
        assert_eq!(b.cuts[0], vec![2.5]);
        assert_eq!(
            [1.0, 2.0, 3.0, 4.0].map(|x| b.bin(0, x)),
            [0, 0, 1, 1]
        );
    }

    #[test]
    fn constant_feature() {
        let b = build_binning(&column(&[3.0; 5]), 255).unwrap();
        assert!(b.cuts[0].is_empty());
        assert_eq!(b.n_bins(0), 1);
    }

    #[test]
    fn one_bin_per_distinct_value() {
        let b = build_binning(&column(&[5.0, 1.0, 3.0, 3.0, 1.0]), 255).unwrap();
        assert_eq!(b.cuts[0], vec![2.0, 4.0]);
    }

    #[test]
    fn adjacent_floats_are_separated() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let bins = build_binning(&column(&[a, b]), 255).unwrap();
        assert_ne!(bins.bin(0, a), bins.bin(0, b));
    }

    #[test]
    fn empty_matrix() {
        assert!(matches!(
            FeatureMatrix::from_rows(vec![]).and_then(|m| build_binning(&m, 4)),
            Err(BoostError::EmptyMatrix)
        ));
    }

    proptest! {
        #[test]
        fn cuts_increase_and_bins_are_bounded(values in prop::collection::vec(-50i32..50, 1..300), k in 2usize..40) {
            let v: Vec<f64> = values.iter().map(|&x| x as f64 * 0.5).collect();
            let b = build_binning(&column(&v), k).unwrap();
            prop_assert!(b.cuts[0].windows(2).all(|w| w[0] < w[1]));
            prop_assert!(b.n_bins(0) <= k);
            for &x in &v {
                prop_assert!((b.bin(0, x) as usize) < b.n_bins(0));
            }
        }

        #[test]
        fn monotone_transform_keeps_bins(values in prop::collection::vec(-50i32..50, 1..200), k in 2usize..20) {
            let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
            let t: Vec<f64> = v.iter().map(|&x| (x / 10.0).exp() * 3.0 - 1.0).collect();
            let bv = build_binning(&column(&v), k).unwrap();
            let bt = build_binning(&column(&t), k).unwrap();
            for (&x, &y) in v.iter().zip(&t) {
                prop_assert_eq!(bv.bin(0, x), bt.bin(0, y));
            }
        }
    }
}
