//! Thread-local counter of dense 6x6 matrix products. The recursive solver
//! routes every such product through [`crate::spatial::mul66`], so the count
//! is a deterministic proxy for algorithmic cost: it must grow exactly
//! linearly with the number of chain modules.

use std::cell::Cell;

thread_local! {
    static MUL66_COUNT: Cell<u64> = const { Cell::new(0) };
}

/// Reset the 6x6-product counter for the current thread.
pub fn reset() {
    MUL66_COUNT.with(|c| c.set(0));
}

/// Number of 6x6 matrix products performed on this thread since [`reset`].
pub fn mul66_count() -> u64 {
    MUL66_COUNT.with(Cell::get)
}

#[inline]
pub(crate) fn tick() {
    MUL66_COUNT.with(|c| c.set(c.get() + 1));
}
