use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seed::rng_from;

/// Single-pass uniform sampler without replacement (Algorithm R).
///
/// Memory is bounded by the capacity regardless of stream length. The sample
/// is returned in stream order.
pub struct Reservoir<T> {
    capacity: usize,
    seen: u64,
    items: Vec<(u64, T)>,
    rng: ChaCha8Rng,
}

impl<T> Reservoir<T> {
    pub fn new(capacity: usize, seed: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Argument("reservoir capacity must be at least 1".into()));
        }
        Ok(Reservoir {
            capacity,
            seen: 0,
            items: Vec::new(),
            rng: rng_from(seed),
        })
    }

    pub fn push(&mut self, item: T) {
        let index = self.seen;
        self.seen += 1;
        if self.items.len() < self.capacity {
            self.items.push((index, item));
        } else {
            let slot = self.rng.random_range(0..self.seen);
            if (slot as usize) < self.capacity {
                self.items[slot as usize] = (index, item);
            }
        }
    }

    /// Number of items offered so far.
    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// True once more items were offered than the reservoir can hold.
    pub fn overflowed(&self) -> bool {
        self.seen > self.capacity as u64
    }

    pub fn into_sample(mut self) -> Vec<T> {
        self.items.sort_unstable_by_key(|(index, _)| *index);
        self.items.into_iter().map(|(_, item)| item).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_everything_below_capacity() {
        let mut r = Reservoir::new(10, 3).unwrap();
        for i in 0..7 {
            r.push(i);
        }
        assert!(!r.overflowed());
        assert_eq!(r.into_sample(), (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn sample_is_sorted_subset() {
        let mut r = Reservoir::new(100, 3).unwrap();
        for i in 0..10_000u32 {
            r.push(i);
        }
        let s = r.into_sample();
        assert_eq!(s.len(), 100);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn inclusion_is_roughly_uniform() {
        // each of 20 items should land in a size-5 sample ~25% of the time
        let mut hits = [0u32; 20];
        for seed in 0..4_000 {
            let mut r = Reservoir::new(5, seed).unwrap();
            for i in 0..20usize {
                r.push(i);
            }
            for i in r.into_sample() {
                hits[i] += 1;
            }
        }
        for h in hits {
            let p = f64::from(h) / 4_000.0;
            assert!((p - 0.25).abs() < 0.03, "inclusion rate {p}");
        }
    }
}
