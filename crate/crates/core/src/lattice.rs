//! Lattice points, Euclidean balls and packed site keys.

/// A point of Z^d.
pub type Point = Vec<i32>;

pub fn norm_sq(x: &[i32]) -> i64 {
    x.iter().map(|&c| c as i64 * c as i64).sum()
}

pub fn norm(x: &[i32]) -> f64 {
    (norm_sq(x) as f64).sqrt()
}

pub fn l1_norm(x: &[i32]) -> i64 {
    x.iter().map(|&c| (c as i64).abs()).sum()
}

/// `true` when `x` lies in the closed Euclidean ball of radius `r`.
pub fn in_ball(x: &[i32], r: f64) -> bool {
    (norm_sq(x) as f64) <= r * r + 1e-9
}

/// All lattice points of the closed Euclidean ball of radius `r`, in
/// lexicographic order.
pub fn ball_points(d: usize, r: f64) -> Vec<Point> {
    let m = r.max(0.0).floor() as i32;
    let r2 = r * r + 1e-9;
    let mut out = Vec::new();
    let mut cur = vec![0i32; d];
    fn rec(k: usize, acc: i64, m: i32, r2: f64, cur: &mut Point, out: &mut Vec<Point>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for c in -m..=m {
            let a = acc + c as i64 * c as i64;
            if a as f64 <= r2 {
                cur[k] = c;
                rec(k + 1, a, m, r2, cur, out);
            }
        }
        cur[k] = 0;
    }
    rec(0, 0, m, r2, &mut cur, &mut out);
    out
}

/// Number of lattice points in the closed ball of radius `r`.
pub fn ball_size(d: usize, r: f64) -> usize {
    fn rec(k: usize, rem: i64) -> usize {
        let m = (rem as f64).sqrt().floor() as i64;
        let m = if (m + 1) * (m + 1) <= rem { m + 1 } else if m * m > rem { m - 1 } else { m };
        if k == 1 {
            return (2 * m + 1) as usize;
        }
        (-m..=m).map(|c| rec(k - 1, rem - c * c)).sum()
    }
    if d == 0 {
        return 1;
    }
    rec(d, (r.max(0.0) * r.max(0.0) + 1e-9).floor() as i64)
}

/// Unit vector `±e_k` encoded as a step index `2k` (plus) or `2k+1` (minus).
#[inline]
pub fn step_axis(step: u8) -> (usize, i32) {
    ((step >> 1) as usize, if step & 1 == 0 { 1 } else { -1 })
}

/// Bits per axis of the narrow packed key.
pub const NARROW_BITS: u32 = 21;
const NARROW_BIAS: i64 = 1 << (NARROW_BITS - 1);

/// Pack a point with `d ≤ 3` into a `u64` with 21-bit biased fields.
/// Returns `None` when a coordinate does not fit.
#[inline]
pub fn pack_narrow(x: &[i32]) -> Option<u64> {
    debug_assert!(x.len() <= 3);
    let mut key = 0u64;
    for (k, &c) in x.iter().enumerate() {
        let b = c as i64 + NARROW_BIAS;
        if !(0..(1 << NARROW_BITS)).contains(&b) {
            return None;
        }
        key |= (b as u64) << (NARROW_BITS as usize * k);
    }
    Some(key)
}

/// Pack a point of any dimension `d ≤ 128` into a `u128` using
/// `128 / d` bits per axis. Returns `None` when a coordinate does not fit.
#[inline]
pub fn pack_wide(x: &[i32]) -> Option<u128> {
    let bits = 128 / x.len().max(1) as u32;
    let bias = 1i64 << (bits.min(63) - 1);
    let mut key = 0u128;
    for (k, &c) in x.iter().enumerate() {
        let b = c as i64 + bias;
        if b < 0 || (bits < 63 && b >= (1i64 << bits)) {
            return None;
        }
        key |= (b as u128) << (bits as usize * k);
    }
    Some(key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_balls() {
        assert_eq!(ball_size(2, 1.0), 5);
        assert_eq!(ball_size(3, 1.0), 7);
        assert_eq!(ball_size(2, 0.5), 1);
        assert_eq!(ball_size(2, 2.0), 13);
        assert_eq!(ball_size(2, 4.0), 49);
        for (d, r) in [(2, 7.3), (3, 5.0), (4, 3.2), (3, 6.5)] {
            assert_eq!(ball_size(d, r), ball_points(d, r).len());
        }
    }

    #[test]
    fn ball_points_are_sorted_and_inside() {
        let pts = ball_points(3, 2.5);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(pts.iter().all(|p| in_ball(p, 2.5)));
    }

    #[test]
    fn packing_is_injective_on_a_box() {
        let mut keys = std::collections::HashSet::new();
        for x in -3..=3 {
            for y in -3..=3 {
                for z in -3..=3 {
                    assert!(keys.insert(pack_narrow(&[x, y, z]).unwrap()));
                }
            }
        }
        assert!(pack_narrow(&[1 << 20, 0]).is_none());
        assert!(pack_wide(&[0; 13]).is_some());
        assert!(pack_wide(&[300; 13]).is_none());
        assert_ne!(pack_wide(&[1, 0, 0, 0]), pack_wide(&[0, 1, 0, 0]));
    }
}
