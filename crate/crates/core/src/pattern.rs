//! Minutiae point patterns and matched template/query pairs.
//!
//! Locations are stored as complex numbers `x + iy` in pixel units. Image
//! conventions apply (y axis pointing down), which is immaterial to every
//! estimate since only relative geometry enters.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Tolerance on the mean of a pattern flagged as centered.
pub const CENTERED_TOLERANCE: f64 = 1e-9;

/// Minimum minutia count accepted by the estimator.
pub const MIN_ESTIMATION_POINTS: usize = 3;

/// Ordered minutia locations of one imprint.
#[derive(Debug, Clone, PartialEq)]
pub struct MinutiaPattern {
    points: Vec<Complex64>,
    pub finger_id: u32,
    pub impression_id: u32,
    centered: bool,
}

impl MinutiaPattern {
    /// Builds a raw (uncentered) pattern. Rejects empty or non-finite input.
    pub fn new(points: Vec<Complex64>, finger_id: u32, impression_id: u32) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("pattern has no minutiae"));
        }
        if let Some(j) = points.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(invalid(format!("minutia {j} has a non-finite coordinate")));
        }
        Ok(Self {
            points,
            finger_id,
            impression_id,
            centered: false,
        })
    }

    pub fn from_xy(xy: &[(f64, f64)], finger_id: u32, impression_id: u32) -> Result<Self> {
        Self::new(
            xy.iter().map(|&(x, y)| Complex64::new(x, y)).collect(),
            finger_id,
            impression_id,
        )
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn mean(&self) -> Complex64 {
        self.points.iter().sum::<Complex64>() / self.points.len() as f64
    }

    /// Applies `f` to every point; the result is not marked centered.
    pub fn map(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        Self {
            points: self.points.iter().map(|&z| f(z)).collect(),
            finger_id: self.finger_id,
            impression_id: self.impression_id,
            centered: false,
        }
    }

    /// Subtracts the coordinate-wise mean and marks the pattern centered.
    pub fn centered(&self) -> Self {
        if self.centered {
            return self.clone();
        }
        let m = self.mean();
        Self {
            points: self.points.iter().map(|&z| z - m).collect(),
            finger_id: self.finger_id,
            impression_id: self.impression_id,
            centered: true,
        }
    }

    /// True when no two points span a line, i.e. the second moment is rank one.
    pub fn is_collinear(&self) -> bool {
        let m = self.mean();
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for z in &self.points {
            let d = z - m;
            sxx += d.re * d.re;
            syy += d.im * d.im;
            sxy += d.re * d.im;
        }
        let tr = sxx + syy;
        let det = sxx * syy - sxy * sxy;
        tr == 0.0 || det <= 1e-12 * tr * tr
    }
}

/// Subtracts the mean point from `pattern`.
pub fn center_pattern(pattern: &MinutiaPattern) -> MinutiaPattern {
    pattern.centered()
}

/// A template pattern `Z` and a query pattern `Z'` with index-wise correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub template: MinutiaPattern,
    pub query: MinutiaPattern,
}

impl MatchedPair {
    pub fn new(template: MinutiaPattern, query: MinutiaPattern) -> Result<Self> {
        if template.len() != query.len() {
            return Err(invalid(format!(
                "template has {} minutiae but query has {}",
                template.len(),
                query.len()
            )));
        }
        Ok(Self { template, query })
    }

    pub fn n(&self) -> usize {
        self.template.len()
    }

    pub fn is_centered(&self) -> bool {
        self.template.is_centered() && self.query.is_centered()
    }

    /// Both patterns centered independently.
    pub fn centered(&self) -> Self {
        Self {
            template: self.template.centered(),
            query: self.query.centered(),
        }
    }

    pub fn finger_id(&self) -> u32 {
        self.query.finger_id
    }

    pub fn impression_id(&self) -> u32 {
        self.query.impression_id
    }
}

/// Matched pairs of a study keyed by `(finger, impression)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyDataset {
    pairs: BTreeMap<(u32, u32), MatchedPair>,
}

impl StudyDataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a pair; a repeated `(finger, impression)` key is rejected.
    pub fn insert(&mut self, pair: MatchedPair) -> Result<()> {
        let key = (pair.finger_id(), pair.impression_id());
        if self.pairs.contains_key(&key) {
            return Err(invalid(format!(
                "duplicate pair for finger {} impression {}",
                key.0, key.1
            )));
        }
        self.pairs.insert(key, pair);
        Ok(())
    }

    pub fn get(&self, finger: u32, impression: u32) -> Option<&MatchedPair> {
        self.pairs.get(&(finger, impression))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs in `(finger, impression)` order.
    pub fn pairs(&self) -> impl Iterator<Item = &MatchedPair> {
        self.pairs.values()
    }

    pub fn into_pairs(self) -> impl Iterator<Item = MatchedPair> {
        self.pairs.into_values()
    }

    pub fn finger_count(&self) -> usize {
        let mut last = None;
        let mut count = 0;
        for &(p, _) in self.pairs.keys() {
            if last != Some(p) {
                count += 1;
                last = Some(p);
            }
        }
        count
    }
}

impl FromIterator<MatchedPair> for StudyDataset {
    /// Later duplicates overwrite earlier ones; use [`StudyDataset::insert`] to detect them.
    fn from_iter<I: IntoIterator<Item = MatchedPair>>(iter: I) -> Self {
        let pairs = iter
            .into_iter()
            .map(|p| ((p.finger_id(), p.impression_id()), p))
            .collect();
        Self { pairs }
    }
}
