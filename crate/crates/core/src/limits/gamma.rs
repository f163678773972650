//! Escape probability `λ_d = P(S_n ≠ 0 ∀ n ≥ 1)`, which is also the range
//! growth rate `γ_d = lim E|R_N|/N`.

use super::green::visit_tail;
use crate::error::{Error, Result};
use crate::lattice::step_axis;
use crate::par;
use crate::rng::Streams;
use crate::walk::range::RangeSet;
use crate::walk::sample::{draw_step, walk_stats};
use serde::Serialize;

const CHUNK: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaEstimate {
    pub d: usize,
    pub horizon: u64,
    pub n_samples: u64,
    /// Fraction of walks that do not revisit the origin by the horizon.
    pub value: f64,
    pub std_err: f64,
    /// Upper bound on `value − λ_d`: expected visits to the origin after
    /// the horizon, from the local limit theorem.
    pub bias_bound: f64,
    /// `E|R_T| / (T + 1)` from the same walks (absent for the fast
    /// non-return estimator).
    pub range_rate: Option<f64>,
    pub range_rate_std_err: Option<f64>,
}

fn check(d: usize, horizon: u64, n_samples: u64) -> Result<()> {
    if d < 3 {
        return Err(Error::invalid(format!("the walk is recurrent in d = {d}; need d >= 3")));
    }
    if horizon == 0 || n_samples < 2 {
        return Err(Error::invalid("need horizon >= 1 and at least 2 samples"));
    }
    Ok(())
}

fn bias_bound(d: usize, horizon: u64) -> f64 {
    visit_tail(d, horizon).min(1.0)
}

fn mean_se(sum: f64, sum_sq: f64, n: f64) -> (f64, f64) {
    let m = sum / n;
    let var = ((sum_sq / n - m * m) * n / (n - 1.0)).max(0.0);
    (m, (var / n).sqrt())
}

/// Non-return fraction and range rate from the same `n_samples` walks of
/// `horizon` steps.
pub fn gamma_d_estimate(d: usize, horizon: u64, n_samples: u64, streams: &Streams) -> Result<GammaEstimate> {
    check(d, horizon, n_samples)?;
    let parts = par::chunks(n_samples, CHUNK);
    let results = par::map_indexed(parts.len(), |c| -> Result<[f64; 3]> {
        let (idx, _, len) = parts[c];
        let mut rng = streams.stream(idx);
        let mut set = RangeSet::new(d);
        let mut acc = [0.0; 3];
        for _ in 0..len {
            let s = walk_stats(&mut rng, horizon, d, &mut set)?;
            acc[0] += s.first_return.is_none() as u8 as f64;
            let rate = s.range_size as f64 / (horizon + 1) as f64;
            acc[1] += rate;
            acc[2] += rate * rate;
        }
        Ok(acc)
    });
    let mut acc = [0.0; 3];
    for r in results {
        let r = r?;
        for i in 0..3 {
            acc[i] += r[i];
        }
    }
    let n = n_samples as f64;
    let (value, std_err) = mean_se(acc[0], acc[0], n);
    let (rate, rate_se) = mean_se(acc[1], acc[2], n);
    Ok(GammaEstimate {
        d,
        horizon,
        n_samples,
        value,
        std_err,
        bias_bound: bias_bound(d, horizon),
        range_rate: Some(rate),
        range_rate_std_err: Some(rate_se),
    })
}

/// Non-return fraction only, without range bookkeeping.
pub fn non_return_estimate(d: usize, horizon: u64, n_samples: u64, streams: &Streams) -> Result<GammaEstimate> {
    check(d, horizon, n_samples)?;
    let parts = par::chunks(n_samples, CHUNK);
    let escaped: u64 = par::map_indexed(parts.len(), |c| {
        let (idx, _, len) = parts[c];
        let mut rng = streams.stream(idx);
        let mut pos = vec![0i64; d];
        let mut count = 0u64;
        for _ in 0..len {
            pos.iter_mut().for_each(|p| *p = 0);
            let mut norm_sq = 0i64;
            let mut returned = false;
            for _ in 0..horizon {
                let (k, dir) = step_axis(draw_step(&mut rng, d));
                let dir = dir as i64;
                norm_sq += 2 * dir * pos[k] + 1;
                pos[k] += dir;
                if norm_sq == 0 {
                    returned = true;
                    break;
                }
            }
            count += !returned as u64;
        }
        count
    })
    .into_iter()
    .sum();
    let n = n_samples as f64;
    let (value, std_err) = mean_se(escaped as f64, escaped as f64, n);
    Ok(GammaEstimate {
        d,
        horizon,
        n_samples,
        value,
        std_err,
        bias_bound: bias_bound(d, horizon),
        range_rate: None,
        range_rate_std_err: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::green::LAMBDA_3;

    #[test]
    fn horizon_one() {
        let e = gamma_d_estimate(3, 1, 100, &Streams::new(1)).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.range_rate, Some(1.0));
        assert!(gamma_d_estimate(2, 10, 100, &Streams::new(1)).is_err());
    }

    #[test]
    fn estimators_agree_with_green_function() {
        let s = Streams::new(2);
        let e = gamma_d_estimate(3, 2000, 20_000, &s).unwrap();
        let fast = non_return_estimate(3, 2000, 20_000, &s).unwrap();
        assert!((e.value - fast.value).abs() < 6.0 * e.std_err);
        assert!(e.value >= LAMBDA_3 - 4.0 * e.std_err);
        assert!(e.value <= LAMBDA_3 + e.bias_bound + 4.0 * e.std_err);
        assert!((e.range_rate.unwrap() - LAMBDA_3).abs() < 0.03, "{e:?}");
    }

    #[test]
    fn high_dimension_trend() {
        let mut last = f64::INFINITY;
        for d in [5usize, 8, 13] {
            let e = non_return_estimate(d, 500, 100_000, &Streams::new(d as u64)).unwrap();
            let scaled = (1.0 - e.value) * 2.0 * d as f64;
            assert!(e.value >= 1.0 - 1.0 / (2.0 * d as f64) - 3.0 / (d * d) as f64, "{d}: {e:?}");
            assert!(scaled < last + 0.05, "{d}: {scaled}");
            last = scaled;
        }
        assert!(last < 1.15);
    }
}
