//! Byte counting allocator for the approximate memory columns of `bench`.
//!
//! Counting starts once a binary installs [`TrackingAllocator`] as its
//! `#[global_allocator]`; without it every measurement is `None`.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);
static TOTAL: AtomicUsize = AtomicUsize::new(0);
static ACTIVE: AtomicBool = AtomicBool::new(false);

pub struct TrackingAllocator;

fn grow(size: usize) {
    let now = CURRENT.fetch_add(size, Ordering::Relaxed) + size;
    PEAK.fetch_max(now, Ordering::Relaxed);
    TOTAL.fetch_add(size, Ordering::Relaxed);
    ACTIVE.store(true, Ordering::Relaxed);
}

fn shrink(size: usize) {
    CURRENT.fetch_sub(size, Ordering::Relaxed);
}

unsafe impl GlobalAlloc for TrackingAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            grow(layout.size());
        }
        p
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc_zeroed(layout);
        if !p.is_null() {
            grow(layout.size());
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        shrink(layout.size());
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = System.realloc(ptr, layout, new_size);
        if !p.is_null() {
            shrink(layout.size());
            grow(new_size);
        }
        p
    }
}

/// Whether a [`TrackingAllocator`] is installed and has seen an allocation.
pub fn is_active() -> bool {
    ACTIVE.load(Ordering::Relaxed)
}

/// Allocation footprint of one closure run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AllocStats {
    /// Peak live bytes above the live bytes at entry.
    pub peak_bytes: usize,
    /// Bytes requested during the run.
    pub total_bytes: usize,
}

/// Run `f` and report its allocation footprint. Other threads allocating at
/// the same time are counted too, hence approximate.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, Option<AllocStats>) {
    let base = CURRENT.load(Ordering::Relaxed);
    PEAK.store(base, Ordering::Relaxed);
    let total = TOTAL.load(Ordering::Relaxed);
    let out = f();
    let stats = is_active().then(|| AllocStats {
        peak_bytes: PEAK.load(Ordering::Relaxed).saturating_sub(base),
        total_bytes: TOTAL.load(Ordering::Relaxed) - total,
    });
    (out, stats)
}
