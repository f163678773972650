//! Distinct ranges of the walks in a class `𝓜(r,s)`, restricted to a ball.

use crate::error::{Error, Result};
use crate::lattice::{ball_points, Point};
use crate::par;
use crate::rng::Streams;
use crate::walk::{enumerate_paths, ConfinedSampler, Leaf, PathClass, PathVisitor, SiteData};
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

/// How the walk class is explored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnsembleMode {
    /// Every step sequence; needs `|Λ_radius| ≤ 64` and `(2d)^N` within
    /// `budget`.
    Enumerate { budget: f64 },
    /// `walks` draws from the law conditioned on `M_N ∈ (r, pr]`.
    Sample { walks: u64, seed: u64 },
}

/// Distinct sets `R_N ∩ Λ_radius` over the walks seen.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeEnsemble {
    pub sites: Vec<Point>,
    /// Sorted indices into `sites`.
    pub ranges: Vec<Vec<u32>>,
    /// Walks found in the class.
    pub walks_in_class: u64,
    /// `true` when every walk of the class was visited.
    pub exhaustive: bool,
}

impl RangeEnsemble {
    /// `max_R Σ_{x ∈ R} v[x]` with `v` indexed like `sites`; `None` when
    /// the class is empty.
    pub fn max_sum(&self, values: &[f64]) -> Option<f64> {
        self.ranges
            .iter()
            .map(|r| r.iter().map(|&i| values[i as usize]).sum::<f64>())
            .max_by(f64::total_cmp)
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }
}

struct MaskVisitor {
    class: PathClass,
    masks: FxHashSet<u64>,
    count: u64,
}

impl PathVisitor for MaskVisitor {
    fn visit(&mut self, leaf: &Leaf<'_>) {
        if self.class.contains(leaf.max_disp(), leaf.range_size as f64) {
            self.masks.insert(leaf.tag_mask);
            self.count += 1;
        }
    }
    fn merge(&mut self, other: Self) {
        self.masks.extend(other.masks);
        self.count += other.count;
    }
}

const SAMPLE_CHUNK: u64 = 512;

/// Ranges of the walks of length `n` in `class`, intersected with
/// `Λ_radius`.
pub fn class_ensemble(n: usize, d: usize, class: &PathClass, radius: f64, mode: EnsembleMode) -> Result<RangeEnsemble> {
    let sites = ball_points(d, radius);
    match mode {
        EnsembleMode::Enumerate { budget } => {
            if sites.len() > 64 {
                return Err(Error::Unsupported(format!(
                    "enumerated ensembles track at most 64 sites, Λ_{radius} has {}",
                    sites.len()
                )));
            }
            let index: FxHashMap<Point, u32> = sites.iter().cloned().zip(0..).collect();
            let tag = |x: &[i32]| index.get(x).map_or(0u64, |&i| 1u64 << i);
            let data = SiteData {
                value: None,
                tag: Some(&tag),
            };
            let v = enumerate_paths(n, d, budget, &data, || MaskVisitor {
                class: *class,
                masks: FxHashSet::default(),
                count: 0,
            })?;
            let mut masks: Vec<u64> = v.masks.into_iter().collect();
            masks.sort_unstable();
            let ranges = masks
                .into_iter()
                .map(|m| (0..64u32).filter(|i| m >> i & 1 == 1).collect())
                .collect();
            Ok(RangeEnsemble {
                sites,
                ranges,
                walks_in_class: v.count,
                exhaustive: true,
            })
        }
        EnsembleMode::Sample { walks, seed } => {
            let outer = class.p * class.r;
            if class.r > n as f64 || outer < 1.0 {
                return Ok(RangeEnsemble {
                    sites,
                    ranges: Vec::new(),
                    walks_in_class: 0,
                    exhaustive: false,
                });
            }
            let inner = (class.r * (1.0 - 1e-9)).max(0.0);
            let sampler = ConfinedSampler::shell(d, n, inner, outer)?;
            if sampler.log_stay_probability() == f64::NEG_INFINITY {
                return Ok(RangeEnsemble {
                    sites,
                    ranges: Vec::new(),
                    walks_in_class: 0,
                    exhaustive: false,
                });
            }
            let index: FxHashMap<Point, u32> = sites.iter().cloned().zip(0..).collect();
            let streams = Streams::new(seed);
            let chunks = par::chunks(walks, SAMPLE_CHUNK);
            let parts = par::map_indexed(chunks.len(), |c| -> Result<(Vec<Vec<u32>>, u64)> {
                let (ci, _, len) = chunks[c];
                let mut rng = streams.stream(ci);
                let mut out = Vec::new();
                let mut count = 0;
                for _ in 0..len {
                    let w = sampler.sample(&mut rng)?;
                    if !class.contains(w.max_disp, w.range_size as f64) {
                        continue;
                    }
                    count += 1;
                    let mut r: Vec<u32> = w.sites.iter().filter_map(|x| index.get(x).copied()).collect();
                    r.sort_unstable();
                    out.push(r);
                }
                Ok((out, count))
            });
            let mut seen = FxHashSet::default();
            let mut ranges = Vec::new();
            let mut walks_in_class = 0;
            for part in parts {
                let (rs, count) = part?;
                walks_in_class += count;
                for r in rs {
                    if seen.insert(r.clone()) {
                        ranges.push(r);
                    }
                }
            }
            Ok(RangeEnsemble {
                sites,
                ranges,
                walks_in_class,
                exhaustive: false,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_ranges_are_enumerated_ranges() {
        let class = PathClass::new(2.0, 1.5, 1.5).unwrap();
        let full = class_ensemble(8, 2, &class, 3.0, EnsembleMode::Enumerate { budget: 1e9 }).unwrap();
        let some = class_ensemble(8, 2, &class, 3.0, EnsembleMode::Sample { walks: 4000, seed: 3 }).unwrap();
        assert!(full.exhaustive && !some.exhaustive);
        assert_eq!(full.sites, some.sites);
        let all: FxHashSet<&Vec<u32>> = full.ranges.iter().collect();
        assert!(!some.ranges.is_empty());
        assert!(some.ranges.iter().all(|r| all.contains(r)));
        assert!(some.ranges.len() <= full.ranges.len());
    }

    #[test]
    fn empty_class() {
        let class = PathClass::new(9.0, 1.0, 1.5).unwrap();
        let e = class_ensemble(6, 2, &class, 3.0, EnsembleMode::Sample { walks: 100, seed: 1 }).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.max_sum(&vec![1.0; e.sites.len()]), None);
        let e = class_ensemble(6, 2, &class, 3.0, EnsembleMode::Enumerate { budget: 1e9 }).unwrap();
        assert!(e.is_empty());
    }

    #[test]
    fn too_many_sites_to_enumerate() {
        let class = PathClass::new(2.0, 1.5, 1.5).unwrap();
        let r = class_ensemble(6, 2, &class, 6.0, EnsembleMode::Enumerate { budget: 1e9 });
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }
}
