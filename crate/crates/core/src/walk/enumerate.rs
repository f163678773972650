//! Exhaustive depth-first enumeration of all `(2d)^N` step sequences.
//!
//! The walk state lives on a dense grid of visit counts covering
//! `[−N, N]^d`, updated and undone incrementally. Work is split over the
//! `(2d)^k` prefixes of the first `k ≤ 2` steps and merged in prefix order,
//! so the aggregate is independent of the number of workers.

use crate::error::{Error, Result};
use crate::lattice::step_axis;
use crate::par;

/// Default cap on the number of leaves.
pub const DEFAULT_LEAF_BUDGET: f64 = 1e9;
/// Cap on the number of grid cells per worker.
pub const GRID_BUDGET: f64 = 5e7;

/// What a visitor sees at the end of each path.
#[derive(Debug)]
pub struct Leaf<'a> {
    pub steps: &'a [u8],
    pub endpoint: &'a [i32],
    pub range_size: u32,
    /// `max_{1≤n≤N} ‖S_n‖²`
    pub max_disp_sq: i64,
    /// `Σ_{x ∈ R_N} v(x)` for the site values supplied.
    pub site_sum: f64,
    /// Bitwise OR of the site tags over the range.
    pub tag_mask: u64,
}

impl Leaf<'_> {
    pub fn max_disp(&self) -> f64 {
        (self.max_disp_sq as f64).sqrt()
    }
}

/// Per-worker accumulator.
pub trait PathVisitor: Send {
    fn visit(&mut self, leaf: &Leaf<'_>);
    /// Absorb the accumulator of the next prefix block.
    fn merge(&mut self, other: Self);
}

/// A shareable function of a lattice site.
pub type SiteFn<'a, T> = &'a (dyn Fn(&[i32]) -> T + Sync);

/// Site-dependent inputs exposed through `Leaf`.
#[derive(Default)]
pub struct SiteData<'a> {
    pub value: Option<SiteFn<'a, f64>>,
    pub tag: Option<SiteFn<'a, u64>>,
}

struct Grid {
    d: usize,
    n: usize,
    stride: Vec<isize>,
    values: Vec<f64>,
    tags: Vec<u64>,
}

impl Grid {
    fn new(n: usize, d: usize, data: &SiteData<'_>) -> Result<Self> {
        let side = 2 * n + 1;
        let cells = (side as f64).powi(d as i32);
        if cells > GRID_BUDGET {
            return Err(Error::Budget {
                what: "enumeration grid cells",
                needed: cells,
                limit: GRID_BUDGET,
            });
        }
        let cells = cells as usize;
        let stride: Vec<isize> = (0..d).map(|k| side.pow(k as u32) as isize).collect();
        let mut values = Vec::new();
        let mut tags = Vec::new();
        if data.value.is_some() || data.tag.is_some() {
            let mut x = vec![0i32; d];
            if data.value.is_some() {
                values.reserve(cells);
            }
            if data.tag.is_some() {
                tags.reserve(cells);
            }
            for idx in 0..cells {
                let mut r = idx;
                for c in x.iter_mut() {
                    *c = (r % side) as i32 - n as i32;
                    r /= side;
                }
                if let Some(v) = data.value {
                    values.push(v(&x));
                }
                if let Some(t) = data.tag {
                    tags.push(t(&x));
                }
            }
        }
        Ok(Grid {
            d,
            n,
            stride,
            values,
            tags,
        })
    }

    fn origin(&self) -> usize {
        self.stride.iter().map(|&s| s as usize * self.n).sum()
    }

    fn cells(&self) -> usize {
        (2 * self.n + 1).pow(self.d as u32)
    }
}

struct Walker<'g, V> {
    g: &'g Grid,
    counts: Vec<u16>,
    pos: Vec<i32>,
    idx: usize,
    norm_sq: i64,
    max_sq: i64,
    range: u32,
    sum: f64,
    mask: u64,
    steps: Vec<u8>,
    visitor: V,
}

impl<'g, V: PathVisitor> Walker<'g, V> {
    fn new(g: &'g Grid, visitor: V) -> Self {
        let mut w = Walker {
            g,
            counts: vec![0; g.cells()],
            pos: vec![0; g.d],
            idx: g.origin(),
            norm_sq: 0,
            max_sq: 0,
            range: 0,
            sum: 0.0,
            mask: 0,
            steps: Vec::with_capacity(g.n),
            visitor,
        };
        w.enter();
        w
    }

    #[inline]
    fn enter(&mut self) {
        let c = &mut self.counts[self.idx];
        if *c == 0 {
            self.range += 1;
            if !self.g.values.is_empty() {
                self.sum += self.g.values[self.idx];
            }
            if !self.g.tags.is_empty() {
                self.mask |= self.g.tags[self.idx];
            }
        }
        *c += 1;
    }

    #[inline]
    fn push(&mut self, s: u8) -> (i64, f64, u64) {
        let saved = (self.max_sq, self.sum, self.mask);
        let (k, dir) = step_axis(s);
        self.norm_sq += 2 * dir as i64 * self.pos[k] as i64 + 1;
        self.pos[k] += dir;
        self.idx = (self.idx as isize + dir as isize * self.g.stride[k]) as usize;
        self.max_sq = self.max_sq.max(self.norm_sq);
        self.steps.push(s);
        self.enter();
        saved
    }

    #[inline]
    fn pop(&mut self, saved: (i64, f64, u64)) {
        let s = self.steps.pop().expect("pop after push");
        let c = &mut self.counts[self.idx];
        *c -= 1;
        if *c == 0 {
            self.range -= 1;
        }
        let (k, dir) = step_axis(s);
        self.idx = (self.idx as isize - dir as isize * self.g.stride[k]) as usize;
        self.pos[k] -= dir;
        self.norm_sq -= 2 * dir as i64 * self.pos[k] as i64 + 1;
        (self.max_sq, self.sum, self.mask) = saved;
    }

    fn dfs(&mut self) {
        if self.steps.len() == self.g.n {
            let leaf = Leaf {
                steps: &self.steps,
                endpoint: &self.pos,
                range_size: self.range,
                max_disp_sq: self.max_sq,
                site_sum: self.sum,
                tag_mask: self.mask,
            };
            self.visitor.visit(&leaf);
            return;
        }
        for s in 0..(2 * self.g.d) as u8 {
            let saved = self.push(s);
            self.dfs();
            self.pop(saved);
        }
    }
}

/// Number of leaves `(2d)^n`.
pub fn leaf_count(n: usize, d: usize) -> f64 {
    (2.0 * d as f64).powi(n as i32)
}

/// Visit every step sequence of length `n` exactly once. Each path has
/// probability `(2d)^{−n}`. Refuses, without partial output, when the
/// leaf count exceeds `budget`.
pub fn enumerate_paths<V, F>(n: usize, d: usize, budget: f64, data: &SiteData<'_>, make: F) -> Result<V>
where
    V: PathVisitor,
    F: Fn() -> V + Sync,
{
    if n == 0 || d == 0 {
        return Err(Error::invalid("enumeration needs n >= 1 and d >= 1"));
    }
    let leaves = leaf_count(n, d);
    if leaves > budget {
        return Err(Error::Budget {
            what: "enumerated paths",
            needed: leaves,
            limit: budget,
        });
    }
    let grid = Grid::new(n, d, data)?;
    let split = n.min(2);
    let branches = (2 * d).pow(split as u32);
    let parts = par::map_indexed(branches, |b| {
        let mut w = Walker::new(&grid, make());
        let mut code = b;
        let mut prefix = Vec::with_capacity(split);
        for _ in 0..split {
            prefix.push((code % (2 * d)) as u8);
            code /= 2 * d;
        }
        for &s in prefix.iter().rev() {
            w.push(s);
        }
        w.dfs();
        w.visitor
    });
    let mut it = parts.into_iter();
    let mut acc = it.next().expect("at least one branch");
    for v in it {
        acc.merge(v);
    }
    Ok(acc)
}

/// Visitor built from a closure producing per-leaf contributions that
/// are summed.
pub struct SumVisitor<F> {
    pub f: F,
    pub total: f64,
}

impl<F: Fn(&Leaf<'_>) -> f64 + Send> PathVisitor for SumVisitor<F> {
    fn visit(&mut self, leaf: &Leaf<'_>) {
        self.total += (self.f)(leaf);
    }
    fn merge(&mut self, other: Self) {
        self.total += other.total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::PathSample;

    struct Collect(Vec<(Vec<u8>, u32, i64, f64)>);
    impl PathVisitor for Collect {
        fn visit(&mut self, l: &Leaf<'_>) {
            self.0.push((l.steps.to_vec(), l.range_size, l.max_disp_sq, l.site_sum));
        }
        fn merge(&mut self, other: Self) {
            self.0.extend(other.0);
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        for (n, d) in [(1, 2), (5, 2), (4, 3)] {
            let p = leaf_count(n, d).recip();
            let v = enumerate_paths(n, d, 1e9, &SiteData::default(), || SumVisitor {
                f: move |_: &Leaf<'_>| p,
                total: 0.0,
            })
            .unwrap();
            assert!((v.total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_site_paths() {
        let v = enumerate_paths(6, 2, 1e9, &SiteData::default(), || SumVisitor {
            f: |l: &Leaf<'_>| (l.range_size == 2) as u8 as f64,
            total: 0.0,
        })
        .unwrap();
        assert_eq!(v.total, 4.0);
    }

    #[test]
    fn leaves_match_direct_recomputation() {
        let val = |x: &[i32]| (x[0] * 7 + x[1] * 3) as f64;
        let data = SiteData {
            value: Some(&val),
            tag: None,
        };
        let c = enumerate_paths(5, 2, 1e9, &data, || Collect(Vec::new())).unwrap();
        assert_eq!(c.0.len(), 1024);
        let mut seqs: Vec<_> = c.0.iter().map(|t| t.0.clone()).collect();
        seqs.sort();
        seqs.dedup();
        assert_eq!(seqs.len(), 1024);
        for (steps, range, max_sq, sum) in &c.0 {
            let p = PathSample::from_steps(2, steps.clone(), 0.0).unwrap();
            assert_eq!(p.range_size as u32, *range);
            assert_eq!(p.max_disp, (*max_sq as f64).sqrt());
            let direct: f64 = p.sites.iter().map(|x| val(x)).sum();
            assert_eq!(direct, *sum);
        }
    }

    #[test]
    fn refuses_over_budget() {
        let r = enumerate_paths(20, 2, 1e9, &SiteData::default(), || SumVisitor {
            f: |_: &Leaf<'_>| 0.0,
            total: 0.0,
        });
        assert!(matches!(r, Err(Error::Budget { .. })));
    }
}
