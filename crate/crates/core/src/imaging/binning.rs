use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Sort permutation and bin indices for one set of slant ranges.
///
/// Ranges are ordered descending (ties keep input order) and binned as
/// `floor((origin - H) / range_res)`, so bin 0 is the far edge of the window.
/// Because geometry is fixed, the same binning can be re-applied to new
/// intensities without sorting again.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RangeBinning {
    /// `order[k]` is the input index of the `k`-th largest range.
    pub order: Vec<usize>,
    /// Bin of each sorted entry; non-decreasing.
    pub bins: Vec<usize>,
}

fn bin_of(h: f64, range_res: f64, origin: f64) -> Result<usize> {
    if !h.is_finite() {
        return Err(Error::NonFinite(format!("slant range {h}")));
    }
    let b = ((origin - h) / range_res).floor();
    if b < 0.0 {
        return Err(Error::Domain(format!(
            "range {h} lies beyond the window origin {origin}"
        )));
    }
    Ok(b as usize)
}

impl RangeBinning {
    pub fn new(ranges: &[f64], range_res: f64, origin: f64) -> Result<Self> {
        if !(range_res > 0.0) {
            return Err(Error::Domain(format!("range_res must be positive, got {range_res}")));
        }
        let mut order: Vec<usize> = (0..ranges.len()).collect();
        order.sort_by(|&a, &b| {
            ranges[b]
                .partial_cmp(&ranges[a])
                .unwrap_or(Ordering::Equal)
        });
        let bins = order
            .iter()
            .map(|&i| bin_of(ranges[i], range_res, origin))
            .collect::<Result<Vec<_>>>()?;
        Ok(RangeBinning { order, bins })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// One past the largest bin index, or 0 when empty.
    pub fn extent(&self) -> usize {
        self.bins.last().map_or(0, |b| b + 1)
    }

    /// Segment-sums `sorted_values` (already in sorted order) into `profile`.
    pub fn accumulate_sorted(&self, sorted_values: &[f64], profile: &mut [f64]) {
        debug_assert_eq!(sorted_values.len(), self.bins.len());
        let mut k = 0;
        while k < self.bins.len() {
            let b = self.bins[k];
            let mut acc = 0.0;
            while k < self.bins.len() && self.bins[k] == b {
                acc += sorted_values[k];
                k += 1;
            }
            profile[b] += acc;
        }
    }

    /// Permutes `values` by the sort order and segment-sums them.
    pub fn accumulate(&self, values: &[f64], profile: &mut [f64]) {
        let sorted: Vec<f64> = self.order.iter().map(|&i| values[i]).collect();
        self.accumulate_sorted(&sorted, profile);
    }
}

/// Sorted segment-sum range binning. The profile has one entry per bin up to
/// the largest occupied one.
pub fn bin_ranges_fast(
    ranges: &[f64],
    intensities: &[f64],
    range_res: f64,
    range_origin: f64,
) -> Result<Vec<f64>> {
    if ranges.len() != intensities.len() {
        return Err(Error::Shape(format!(
            "{} ranges but {} intensities",
            ranges.len(),
            intensities.len()
        )));
    }
    let binning = RangeBinning::new(ranges, range_res, range_origin)?;
    let mut profile = vec![0.0; binning.extent()];
    binning.accumulate(intensities, &mut profile);
    Ok(profile)
}

/// Reference implementation: scatter-add each hit into its bin in input order.
/// Returns the profile and the per-hit bins.
pub fn bin_ranges_naive(
    ranges: &[f64],
    intensities: &[f64],
    range_res: f64,
    range_origin: f64,
) -> Result<(Vec<f64>, Vec<usize>)> {
    if ranges.len() != intensities.len() {
        return Err(Error::Shape("ranges and intensities differ in length".into()));
    }
    let bins = ranges
        .iter()
        .map(|&h| bin_of(h, range_res, range_origin))
        .collect::<Result<Vec<_>>>()?;
    let n = bins.iter().max().map_or(0, |b| b + 1);
    let mut profile = vec![0.0; n];
    for (b, v) in bins.iter().zip(intensities) {
        profile[*b] += v;
    }
    Ok((profile, bins))
}
