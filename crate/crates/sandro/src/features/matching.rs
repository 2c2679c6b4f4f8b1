use rayon::prelude::*;

use crate::geometry::{Point3, PointCloud};

use super::{FeatureError, FpfhDescriptor};

/// Putative correspondences as index pairs `(source_idx, target_idx)`.
///
/// The pair list preserves insertion order; solvers treat that order as
/// canonical when partitioning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondenceSet {
    pairs: Vec<(usize, usize)>,
}

impl CorrespondenceSet {
    /// Validates indices against the cloud sizes and rejects duplicate
    /// pairs (the same `(source, target)` listed twice).
    pub fn new(
        pairs: Vec<(usize, usize)>,
        source_len: usize,
        target_len: usize,
    ) -> Result<Self, FeatureError> {
        let mut seen = std::collections::HashSet::with_capacity(pairs.len());
        for &(s, t) in &pairs {
            if s >= source_len {
                return Err(FeatureError::IndexOutOfBounds {
                    side: "source",
                    index: s,
                    len: source_len,
                });
            }
            if t >= target_len {
                return Err(FeatureError::IndexOutOfBounds {
                    side: "target",
                    index: t,
                    len: target_len,
                });
            }
            if !seen.insert((s, t)) {
                return Err(FeatureError::DuplicatePair {
                    source_index: s,
                    target_index: t,
                });
            }
        }
        Ok(Self { pairs })
    }

    /// Wraps pairs that are already known to be in-bounds and duplicate
    /// free (e.g. a subset of an existing set).
    pub(crate) fn from_validated(pairs: Vec<(usize, usize)>) -> Self {
        Self { pairs }
    }

    /// The identity pairing `(i, i)` for clouds of equal length `n`.
    pub fn identity(n: usize) -> Self {
        Self {
            pairs: (0..n).map(|i| (i, i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Materialises the matched point pairs as two parallel arrays.
    ///
    /// # Panics
    /// Panics if an index is out of bounds; `new` prevents constructing
    /// such a set.
    pub fn gather(&self, source: &PointCloud, target: &PointCloud) -> (Vec<Point3>, Vec<Point3>) {
        let s = self
            .pairs
            .iter()
            .map(|&(i, _)| source.points()[i])
            .collect();
        let t = self
            .pairs
            .iter()
            .map(|&(_, j)| target.points()[j])
            .collect();
        (s, t)
    }
}

/// Nearest neighbour of `query` among `candidates` in descriptor space,
/// skipping unusable descriptors; ties go to the lower index.
fn nearest(query: &FpfhDescriptor, candidates: &[FpfhDescriptor]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if !c.is_usable() {
            continue;
        }
        let d = query.distance_sq(c);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i)
}

/// Mutual nearest-neighbour matching in FPFH space.
///
/// A pair `(i, j)` is kept when `j` is the nearest target descriptor to
/// source `i` and `i` is the nearest source descriptor to target `j`.
/// Unusable (all-zero) descriptors never match. Pairs come out sorted by
/// source index.
pub fn mutual_match(
    source: &[FpfhDescriptor],
    target: &[FpfhDescriptor],
) -> Result<CorrespondenceSet, FeatureError> {
    if !source.iter().any(FpfhDescriptor::is_usable) {
        return Err(FeatureError::NoUsableDescriptors { side: "source" });
    }
    if !target.iter().any(FpfhDescriptor::is_usable) {
        return Err(FeatureError::NoUsableDescriptors { side: "target" });
    }
    let forward: Vec<Option<usize>> = source
        .par_iter()
        .map(|s| {
            if s.is_usable() {
                nearest(s, target)
            } else {
                None
            }
        })
        .collect();
    let backward: Vec<Option<usize>> = target
        .par_iter()
        .map(|t| {
            if t.is_usable() {
                nearest(t, source)
            } else {
                None
            }
        })
        .collect();
    let pairs = forward
        .iter()
        .enumerate()
        .filter_map(|(i, j)| {
            let j = (*j)?;
            (backward[j] == Some(i)).then_some((i, j))
        })
        .collect();
    Ok(CorrespondenceSet { pairs })
}
