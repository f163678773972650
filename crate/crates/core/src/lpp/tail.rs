//! Tail of `L_m^{(B)}` for `m` uniform sites of `Λ_{pr}`.

use super::{entropy_budget, l_b, DEFAULT_EXACT_CAP};
use crate::error::{Error, Result};
use crate::lattice::ball_points;
use crate::par;
use crate::rng::Streams;
use rand::seq::index;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LTailConfig {
    pub d: usize,
    pub p: f64,
    pub r: f64,
    pub s: f64,
    pub m: usize,
    pub trials: u64,
    /// Path-length-to-range constant in the entropy budget.
    pub c_d: f64,
    pub seed: u64,
}

impl LTailConfig {
    pub fn new(d: usize, p: f64, r: f64, s: f64, m: usize, trials: u64, seed: u64) -> Self {
        LTailConfig {
            d,
            p,
            r,
            s,
            m,
            trials,
            c_d: 2.0,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LTailReport {
    pub budget: f64,
    pub ball_size: usize,
    /// `P(L ≥ k)` for `k = 0..=m`.
    pub tail: Vec<f64>,
    /// Smallest `c` with `tail[k] ≤ (c s m^{1/d}/k)^{dk}` for all `k ≥ 1`.
    pub fitted_c: f64,
    /// `min(1, (c s m^{1/d}/k)^{dk})` at the fitted `c`.
    pub bound: Vec<f64>,
    pub nonincreasing: bool,
    /// Second differences of `ln tail` are `≤ 0` wherever the tail is positive.
    pub log_concave: bool,
}

const CHUNK: u64 = 64;

pub fn check_l_tail(cfg: &LTailConfig) -> Result<LTailReport> {
    let LTailConfig { d, p, r, s, m, trials, c_d, seed } = *cfg;
    if !(p > 1.0 && r > 0.0 && s > 0.0 && c_d > 0.0) || d < 1 || trials == 0 {
        return Err(Error::invalid("need p > 1, positive r, s, C_d and at least one trial"));
    }
    let ball = ball_points(d, p * r);
    if m > ball.len() {
        return Err(Error::invalid(format!(
            "m = {m} exceeds |Λ_pr| = {} sites",
            ball.len()
        )));
    }
    if m > DEFAULT_EXACT_CAP {
        return Err(Error::Budget {
            what: "points in the exact subset search",
            needed: m as f64,
            limit: DEFAULT_EXACT_CAP as f64,
        });
    }
    let budget = entropy_budget(d, c_d, p, r, s);
    let streams = Streams::new(seed);
    let chunks = par::chunks(trials, CHUNK);
    let parts = par::map_indexed(chunks.len(), |c| -> Result<Vec<u64>> {
        let (ci, _, len) = chunks[c];
        let mut rng = streams.stream(ci);
        let mut hist = vec![0u64; m + 1];
        for _ in 0..len {
            let pts: Vec<_> = index::sample(&mut rng, ball.len(), m).into_iter().map(|i| ball[i].clone()).collect();
            hist[l_b(&pts, budget, d, DEFAULT_EXACT_CAP)?] += 1;
        }
        Ok(hist)
    });
    let mut hist = vec![0u64; m + 1];
    for part in parts {
        for (h, v) in hist.iter_mut().zip(part?) {
            *h += v;
        }
    }
    let mut tail = vec![0.0; m + 1];
    let mut acc = 0;
    for k in (0..=m).rev() {
        acc += hist[k];
        tail[k] = acc as f64 / trials as f64;
    }
    let scale = s * (m as f64).powf(1.0 / d as f64);
    let fitted_c = (1..=m)
        .filter(|&k| tail[k] > 0.0)
        .map(|k| k as f64 / scale * tail[k].powf(1.0 / (d * k) as f64))
        .fold(0.0, f64::max);
    let bound = (0..=m)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                (fitted_c * scale / k as f64).powi((d * k) as i32).min(1.0)
            }
        })
        .collect();
    let nonincreasing = tail.windows(2).all(|w| w[1] <= w[0]);
    let logs: Vec<f64> = tail.iter().take_while(|&&t| t > 0.0).map(|t| t.ln()).collect();
    let log_concave = logs.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] <= 1e-12);
    Ok(LTailReport {
        budget,
        ball_size: ball.len(),
        tail,
        fitted_c,
        bound,
        nonincreasing,
        log_concave,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_shape() {
        let rep = check_l_tail(&LTailConfig::new(2, 1.5, 6.0, 2.0, 8, 1000, 7)).unwrap();
        assert_eq!(rep.tail[0], 1.0);
        assert!(rep.nonincreasing);
        assert!(rep.log_concave, "{:?}", rep.tail);
        assert!(rep.bound.iter().zip(&rep.tail).all(|(b, t)| t <= &(b + 1e-12)));
    }

    #[test]
    fn tight_budget_tail_is_log_concave() {
        let mut cfg = LTailConfig::new(2, 1.5, 4.0, 1.0, 8, 1000, 8);
        cfg.c_d = 0.4;
        let rep = check_l_tail(&cfg).unwrap();
        assert!(rep.tail[1] < 1.0 && rep.tail[8] < rep.tail[1], "{:?}", rep.tail);
        assert!(rep.nonincreasing);
        assert!(rep.log_concave, "{:?}", rep.tail);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(check_l_tail(&LTailConfig::new(2, 1.5, 1.0, 1.0, 50, 10, 1)).is_err());
        assert!(check_l_tail(&LTailConfig::new(2, 1.0, 6.0, 1.0, 5, 10, 1)).is_err());
    }
}
