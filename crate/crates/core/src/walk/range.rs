//! Visited-site sets for long walks.
//!
//! For `d ≤ 3` sites are grouped into cubic blocks of lattice points stored
//! as bitmaps and looked up by packed block coordinate; a walk spends many
//! consecutive steps in one block, so most inserts touch a cached bitmap.
//! Higher dimensions use a hash set of packed `u128` keys.

use crate::error::{Error, Result};
use crate::lattice::{pack_wide, NARROW_BITS};
use rustc_hash::{FxHashMap, FxHashSet};

const BIAS: i64 = 1 << (NARROW_BITS - 1);

#[derive(Debug, Clone)]
enum Store {
    Blocked {
        shift: u32,
        map: FxHashMap<u64, u32>,
        words: usize,
        blocks: Vec<u64>,
        last_key: u64,
        last_idx: u32,
    },
    Hashed(FxHashSet<u128>),
}

/// Set of lattice sites with O(1) insertion.
#[derive(Debug, Clone)]
pub struct RangeSet {
    d: usize,
    len: u64,
    store: Store,
}

impl RangeSet {
    pub fn new(d: usize) -> Self {
        let store = if d <= 3 {
            let shift = match d {
                1 => 12,
                2 => 6,
                _ => 4,
            };
            Store::Blocked {
                shift,
                words: 1 << (shift * d as u32 - 6),
                map: FxHashMap::default(),
                blocks: Vec::new(),
                last_key: u64::MAX,
                last_idx: 0,
            }
        } else {
            Store::Hashed(FxHashSet::default())
        };
        RangeSet { d, len: 0, store }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn clear(&mut self) {
        self.len = 0;
        match &mut self.store {
            Store::Blocked {
                map,
                blocks,
                last_key,
                ..
            } => {
                map.clear();
                blocks.clear();
                *last_key = u64::MAX;
            }
            Store::Hashed(set) => set.clear(),
        }
    }

    /// Insert `x`; returns `true` when it was not yet present.
    #[inline]
    pub fn insert(&mut self, x: &[i32]) -> Result<bool> {
        debug_assert_eq!(x.len(), self.d);
        let fresh = match &mut self.store {
            Store::Blocked {
                shift,
                words,
                map,
                blocks,
                last_key,
                last_idx,
            } => {
                let sh = *shift;
                let low = (1u64 << sh) - 1;
                let mut key = 0u64;
                let mut bit = 0u64;
                let mut bad = 0u64;
                for (k, &c) in x.iter().enumerate() {
                    let b = (c as i64 + BIAS) as u64;
                    bad |= b >> NARROW_BITS;
                    key |= (b >> sh) << (NARROW_BITS as usize * k);
                    bit |= (b & low) << (sh as usize * k);
                }
                if bad != 0 {
                    return Err(overflow());
                }
                if key != *last_key {
                    let next = (blocks.len() / *words) as u32;
                    let idx = *map.entry(key).or_insert(next);
                    if idx == next {
                        blocks.resize(blocks.len() + *words, 0);
                    }
                    *last_key = key;
                    *last_idx = idx;
                }
                let word = &mut blocks[*last_idx as usize * *words + (bit >> 6) as usize];
                let mask = 1u64 << (bit & 63);
                let fresh = *word & mask == 0;
                *word |= mask;
                fresh
            }
            Store::Hashed(set) => set.insert(pack_wide(x).ok_or_else(overflow)?),
        };
        self.len += fresh as u64;
        Ok(fresh)
    }
}

fn overflow() -> Error {
    Error::Unsupported("walk coordinate exceeds the packed site-key width".into())
}
