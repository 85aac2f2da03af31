use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HistogramError {
    #[error("bin count must be at least 1")]
    NoBins,
    #[error("invalid interval [{0}, {1})")]
    BadInterval(f64, f64),
}

/// Equal-width histogram over the half-open interval `[lo, hi)`. Values
/// outside the interval, and NaN, are tallied in `overflow`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub overflow: u64,
}

impl Histogram {
    pub fn new(bins: usize, lo: f64, hi: f64) -> Result<Self, HistogramError> {
        if bins == 0 {
            return Err(HistogramError::NoBins);
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(HistogramError::BadInterval(lo, hi));
        }
        Ok(Histogram { lo, hi, counts: vec![0; bins], overflow: 0 })
    }

    pub fn from_values(
        values: impl IntoIterator<Item = f64>,
        bins: usize,
        lo: f64,
        hi: f64,
    ) -> Result<Self, HistogramError> {
        let mut h = Histogram::new(bins, lo, hi)?;
        for v in values {
            h.add(v);
        }
        Ok(h)
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    /// Bin index of `v`, or `None` outside `[lo, hi)`.
    pub fn index(&self, v: f64) -> Option<usize> {
        if !(v >= self.lo && v < self.hi) {
            return None;
        }
        let i = ((v - self.lo) * self.bins() as f64 / (self.hi - self.lo)).floor() as usize;
        Some(i.min(self.bins() - 1))
    }

    pub fn add(&mut self, v: f64) {
        match self.index(v) {
            Some(i) => self.counts[i] += 1,
            None => self.overflow += 1,
        }
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.bin_width()
    }

    /// Lowest-index bin holding the maximum count.
    pub fn mode_bin(&self) -> usize {
        let peak = self.peak_height();
        self.counts.iter().position(|&c| c == peak).unwrap_or(0)
    }

    pub fn mode_bin_center(&self) -> f64 {
        self.bin_center(self.mode_bin())
    }

    pub fn peak_height(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Samples inside the interval.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin,lo,hi,center,count\n");
        let w = self.bin_width();
        for (i, c) in self.counts.iter().enumerate() {
            let lo = self.lo + i as f64 * w;
            out.push_str(&format!("{i},{lo},{},{},{c}\n", lo + w, self.bin_center(i)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_lands_in_bin_62() {
        let h = Histogram::from_values([0.5], 100, -2.0, 2.0).unwrap();
        assert_eq!(h.counts[62], 1);
        assert_eq!(h.total(), 1);
        assert!((h.mode_bin_center() - 0.5).abs() <= h.bin_width() / 2.0);
    }

    #[test]
    fn bounds_are_half_open() {
        let h = Histogram::from_values([-2.0, -2.0, 2.0, f64::NAN, 1.9999], 100, -2.0, 2.0).unwrap();
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[99], 1);
        assert_eq!(h.overflow, 2);
        assert_eq!(h.total() + h.overflow, 5);
    }

    #[test]
    fn csv_has_header_and_one_row_per_bin() {
        let h = Histogram::new(4, 0.0, 1.0).unwrap();
        let csv = h.to_csv();
        assert!(csv.starts_with("bin,lo,hi,center,count\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn rejects_bad_shape() {
        assert_eq!(Histogram::new(0, 0.0, 1.0), Err(HistogramError::NoBins));
        assert!(Histogram::new(3, 1.0, 0.0).is_err());
    }
}
