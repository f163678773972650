use super::range::RangeSet;
use super::PathSample;
use crate::error::{Error, Result};
use crate::lattice::step_axis;
use rand::Rng;

/// Draw a uniform step index in `0..2d`.
#[inline]
pub fn draw_step<R: Rng + ?Sized>(rng: &mut R, d: usize) -> u8 {
    rng.random_range(0..2 * d as u32) as u8
}

/// Simple symmetric random walk of `n` steps with incremental range and
/// displacement bookkeeping.
pub fn simulate_walk<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Result<PathSample> {
    if n == 0 {
        return Err(Error::invalid("walk length must be >= 1"));
    }
    if d == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    let mut set = RangeSet::new(d);
    let mut pos = vec![0i32; d];
    let mut norm_sq = 0i64;
    let mut max_sq = 0i64;
    let mut steps = Vec::with_capacity(n);
    let mut sites = vec![pos.clone()];
    set.insert(&pos)?;
    for _ in 0..n {
        let s = draw_step(rng, d);
        let (k, dir) = step_axis(s);
        norm_sq += 2 * dir as i64 * pos[k] as i64 + 1;
        pos[k] += dir;
        max_sq = max_sq.max(norm_sq);
        steps.push(s);
        if set.insert(&pos)? {
            sites.push(pos.clone());
        }
    }
    Ok(PathSample {
        d,
        range_size: sites.len(),
        steps,
        sites,
        max_disp: (max_sq as f64).sqrt(),
        endpoint: pos,
        log_weight: 0.0,
    })
}

/// Summary of one long walk that does not keep the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkStats {
    pub range_size: u64,
    /// First time `n ≥ 1` with `S_n = 0`, if any.
    pub first_return: Option<u64>,
    pub max_disp_sq: i64,
}

/// Run a walk of `n` steps reusing `set` as scratch space.
pub fn walk_stats<R: Rng + ?Sized>(rng: &mut R, n: u64, d: usize, set: &mut RangeSet) -> Result<WalkStats> {
    set.clear();
    let mut pos = vec![0i32; d];
    let mut norm_sq = 0i64;
    let mut max_sq = 0i64;
    let mut first_return = None;
    set.insert(&pos)?;
    for t in 1..=n {
        let (k, dir) = step_axis(draw_step(rng, d));
        norm_sq += 2 * dir as i64 * pos[k] as i64 + 1;
        pos[k] += dir;
        if norm_sq > max_sq {
            max_sq = norm_sq;
        } else if norm_sq == 0 && first_return.is_none() {
            first_return = Some(t);
        }
        set.insert(&pos)?;
    }
    Ok(WalkStats {
        range_size: set.len(),
        first_return,
        max_disp_sq: max_sq,
    })
}
