//! Constant-time allocated arrays with detectable unwritten cells.
//!
//! The index array is never initialized. A cell `x` counts as written only
//! if `index[x]` points inside the used prefix of the pair store and the
//! pair found there points back at `x`. Resetting the used-prefix length
//! therefore forgets every cell in O(1).

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::metering::StepCounter;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LazyArrayError {
    #[error("index {index} out of range for lazy array of capacity {capacity}")]
    OutOfRange { index: usize, capacity: usize },
    #[error("capacity {0} exceeds the addressable range of a lazy array")]
    TooLarge(usize),
}

/// Lazily initialized array of `capacity` cells holding `T`.
#[derive(Debug, Clone)]
pub struct LazyArray<T: Copy> {
    /// Possibly garbage pointers into `pairs`.
    index: Vec<u32>,
    /// `(back_index, value)` pairs, written left to right; `pairs.len()` is the count `c`.
    pairs: Vec<(u32, T)>,
}

static GARBAGE_SEED: AtomicU64 = AtomicU64::new(0x9E37_79B9_7F4A_7C15);

/// Backing storage standing in for uninitialized memory.
///
/// Release builds use zeroed pages (the allocator hands these out lazily);
/// debug builds fill the array with pseudorandom values so the reverse
/// pointer check is exercised.
fn uninit_backing(capacity: usize) -> Vec<u32> {
    if cfg!(debug_assertions) {
        let mut state = GARBAGE_SEED.fetch_add(0x6A09_E667_F3BC_C909, Ordering::Relaxed) | 1;
        (0..capacity)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                // Bias towards small values so that many garbage pointers land
                // inside the used prefix and have to be rejected by the back pointer.
                if state & 1 == 0 {
                    (state >> 32) as u32 % 8
                } else {
                    (state >> 32) as u32
                }
            })
            .collect()
    } else {
        vec![0; capacity]
    }
}

impl<T: Copy> LazyArray<T> {
    /// Allocates `capacity` unwritten cells. Costs one step.
    pub fn alloc(capacity: usize, steps: &mut StepCounter) -> Result<Self, LazyArrayError> {
        Self::from_backing(uninit_backing(capacity), steps)
    }

    /// Builds an array over caller-provided garbage in the index array.
    ///
    /// Used by tests to plant adversarial pointer patterns.
    pub fn from_backing(index: Vec<u32>, steps: &mut StepCounter) -> Result<Self, LazyArrayError> {
        let capacity = index.len();
        if capacity > u32::MAX as usize {
            return Err(LazyArrayError::TooLarge(capacity));
        }
        steps.step();
        steps.note_lazy_cells(capacity as u64);
        Ok(Self {
            index,
            pairs: Vec::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.index.len()
    }

    /// Number of written cells (the counter `c`).
    pub fn written_count(&self) -> usize {
        self.pairs.len()
    }

    #[inline]
    fn check(&self, x: usize) -> Result<(), LazyArrayError> {
        if x < self.index.len() {
            Ok(())
        } else {
            Err(LazyArrayError::OutOfRange {
                index: x,
                capacity: self.index.len(),
            })
        }
    }

    #[inline]
    fn slot(&self, x: usize) -> Option<usize> {
        let p = self.index[x] as usize;
        (p < self.pairs.len() && self.pairs[p].0 as usize == x).then_some(p)
    }

    /// Returns the value at `x`, or `None` if the cell was never written.
    pub fn read(&self, x: usize, steps: &mut StepCounter) -> Result<Option<T>, LazyArrayError> {
        self.check(x)?;
        steps.step();
        Ok(self.slot(x).map(|p| self.pairs[p].1))
    }

    pub fn is_written(&self, x: usize, steps: &mut StepCounter) -> Result<bool, LazyArrayError> {
        Ok(self.read(x, steps)?.is_some())
    }

    pub fn write(
        &mut self,
        x: usize,
        value: T,
        steps: &mut StepCounter,
    ) -> Result<(), LazyArrayError> {
        self.check(x)?;
        steps.step();
        match self.slot(x) {
            Some(p) => self.pairs[p].1 = value,
            None => {
                self.index[x] = self.pairs.len() as u32;
                self.pairs.push((x as u32, value));
            }
        }
        Ok(())
    }

    /// Forgets every written cell. Costs one step.
    pub fn clear(&mut self, steps: &mut StepCounter) {
        steps.step();
        // `T: Copy`, so truncation is O(1).
        self.pairs.clear();
    }

    // Unchecked variants for the enumerators, whose indices are vertex ids
    // validated at graph construction.

    #[inline]
    pub(crate) fn get(&self, x: usize, steps: &mut StepCounter) -> Option<T> {
        steps.step();
        self.slot(x).map(|p| self.pairs[p].1)
    }

    #[inline]
    pub(crate) fn set(&mut self, x: usize, value: T, steps: &mut StepCounter) {
        steps.step();
        match self.slot(x) {
            Some(p) => self.pairs[p].1 = value,
            None => {
                self.index[x] = self.pairs.len() as u32;
                self.pairs.push((x as u32, value));
            }
        }
    }
}
