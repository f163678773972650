//! Plain Monte Carlo over free random walks.

use super::{check_field, Coupling, Event, Method, PartitionEstimate, PathFeatures};
use crate::environment::DisorderField;
use crate::error::{Error, Result};
use crate::lattice::step_axis;
use crate::logspace::LogMoments;
use crate::par;
use crate::params::ModelParams;
use crate::rng::Streams;
use crate::walk::range::RangeSet;
use crate::walk::sample::draw_step;
use rand::Rng;

/// Samples per generator stream; fixed so results do not depend on the
/// number of workers.
pub const CHUNK: u64 = 4096;

/// Range size, `Σ_{x∈R} ω_x`, squared maximal displacement and endpoint
/// of one free walk.
pub(crate) fn walk_features<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    d: usize,
    field: Option<&DisorderField>,
    set: &mut RangeSet,
    pos: &mut Vec<i32>,
) -> Result<(u64, f64, i64)> {
    set.clear();
    pos.clear();
    pos.resize(d, 0);
    set.insert(pos)?;
    let mut sum = field.map_or(0.0, |f| f.omega_at(pos));
    let mut norm_sq = 0i64;
    let mut max_sq = 0i64;
    for _ in 0..n {
        let (k, dir) = step_axis(draw_step(rng, d));
        norm_sq += 2 * dir as i64 * pos[k] as i64 + 1;
        pos[k] += dir;
        max_sq = max_sq.max(norm_sq);
        if set.insert(pos)? {
            if let Some(f) = field {
                sum += f.omega_at(pos);
            }
        }
    }
    Ok((set.len(), sum, max_sq))
}

/// Sample moments of the path weight for several couplings evaluated on
/// the same walks.
pub(crate) fn mc_moments(
    field: Option<&DisorderField>,
    d: usize,
    n: usize,
    couplings: &[Coupling],
    n_samples: u64,
    streams: &Streams,
    event: Option<&Event>,
) -> Result<Vec<LogMoments>> {
    if n_samples < 2 {
        return Err(Error::invalid("plain Monte Carlo needs at least 2 samples"));
    }
    if n == 0 {
        return Err(Error::invalid("walk length must be >= 1"));
    }
    let parts = par::chunks(n_samples, CHUNK);
    let results = par::map_indexed(parts.len(), |i| -> Result<Vec<LogMoments>> {
        let (idx, _, len) = parts[i];
        let mut rng = streams.stream(idx);
        let mut set = RangeSet::new(d);
        let mut pos = Vec::with_capacity(d);
        let mut acc = vec![LogMoments::new(); couplings.len()];
        for _ in 0..len {
            let (range, sum, max_sq) = walk_features(&mut rng, n, d, field, &mut set, &mut pos)?;
            let hit = event.is_none_or(|e| {
                e.test(&PathFeatures {
                    n,
                    range_size: range,
                    max_disp_sq: max_sq,
                    endpoint: &pos,
                })
            });
            for (a, c) in acc.iter_mut().zip(couplings) {
                a.add(if hit { c.log_weight(sum, range) } else { f64::NEG_INFINITY });
            }
        }
        Ok(acc)
    });
    let mut total = vec![LogMoments::new(); couplings.len()];
    for r in results {
        for (t, m) in total.iter_mut().zip(r?) {
            t.merge(&m);
        }
    }
    Ok(total)
}

/// Unbiased sample mean of `exp(β_N Ω − h_N |R_N|) 1_A` over free walks.
pub fn partition_mc(
    field: &DisorderField,
    params: &ModelParams,
    n: usize,
    n_samples: u64,
    streams: &Streams,
    event: Option<&Event>,
) -> Result<PartitionEstimate> {
    check_field(field, params)?;
    let c = [Coupling::at(params, n)];
    let f = if c[0].beta != 0.0 { Some(field) } else { None };
    let m = mc_moments(f, params.d, n, &c, n_samples, streams, event)?;
    Ok(PartitionEstimate::sampled(
        m[0].log_mean(),
        m[0].log_std_err(),
        n_samples,
        Method::PlainMc,
        0.0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::exact::partition_exact;

    #[test]
    fn constant_weight_is_exact() {
        let f = DisorderField::new(1, 1.5, 0.7).unwrap();
        let p = ModelParams::new(2, 1.5, 0.7, 0.0, 0.5, 0.0, 0.5);
        let z = partition_mc(&f, &p, 20, 1000, &Streams::new(3), None).unwrap();
        assert_eq!(z.log_value, 0.0);
        assert_eq!(z.std_err, 0.0);
        assert!(partition_mc(&f, &p, 20, 1, &Streams::new(3), None).is_err());
    }

    #[test]
    fn penalty_is_pathwise_monotone() {
        let f = DisorderField::new(2, 1.5, 0.7).unwrap();
        let cs: Vec<Coupling> = [0.1, 0.2, 0.4].iter().map(|&h| Coupling::new(0.3, h)).collect();
        let m = mc_moments(Some(&f), 2, 30, &cs, 5000, &Streams::new(4), None).unwrap();
        assert!(m[0].log_mean() > m[1].log_mean());
        assert!(m[1].log_mean() > m[2].log_mean());
    }

    #[test]
    fn agrees_with_enumeration() {
        let f = DisorderField::new(21, 1.5, 0.7).unwrap();
        let p = ModelParams::new(2, 1.5, 0.7, 0.5, 0.5, 0.5, 0.5);
        let exact = partition_exact(&f, &p, 6, None).unwrap().value();
        let mc = partition_mc(&f, &p, 6, 100_000, &Streams::new(5), None).unwrap();
        assert!((mc.value() - exact).abs() <= 3.0 * mc.std_err, "{} vs {exact} ± {}", mc.value(), mc.std_err);
        let ev = Event::RangeAtMost(4);
        let exact = partition_exact(&f, &p, 6, Some(&ev)).unwrap().value();
        let mc = partition_mc(&f, &p, 6, 100_000, &Streams::new(6), Some(&ev)).unwrap();
        assert!((mc.value() - exact).abs() <= 4.0 * mc.std_err);
    }
}
