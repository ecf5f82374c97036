//! Execution-mode dispatch for the data-parallel kernels.
//!
//! Every hot loop in the crate funnels through the helpers here.  With the
//! `parallel` feature (default) they run on rayon; without it, or after
//! [`force_sequential`], they fall back to plain iterators.  Only
//! order-independent reductions (max/min, independent per-item outputs) go
//! through the parallel path, so results are identical in both modes and
//! suite outputs stay byte-for-byte reproducible.

use std::sync::atomic::{AtomicBool, Ordering};

static SEQUENTIAL: AtomicBool = AtomicBool::new(cfg!(not(feature = "parallel")));

/// Force all kernels onto the sequential path (used by the benches to compare
/// both implementations in a single run).
pub fn force_sequential(on: bool) {
    SEQUENTIAL.store(on || cfg!(not(feature = "parallel")), Ordering::SeqCst);
}

pub fn sequential() -> bool {
    SEQUENTIAL.load(Ordering::SeqCst)
}

/// Configure the worker count from an explicit value or the `PARSYS_WORKERS`
/// environment variable. `Some(1)` selects the sequential path; `None` leaves
/// rayon's default pool.
pub fn configure_workers(workers: Option<usize>) {
    let n = workers.or_else(|| {
        std::env::var("PARSYS_WORKERS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
    });
    match n {
        Some(1) => force_sequential(true),
        #[cfg(feature = "parallel")]
        Some(n) if n > 1 => {
            force_sequential(false);
            // Ignore the error if a global pool already exists.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        _ => {}
    }
}

/// Ordered map over `0..n`: parallel collect preserves index order, so the
/// output is independent of scheduling.
pub fn map_indexed<U: Send>(n: usize, f: impl Fn(usize) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        if !sequential() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    map_indexed_seq(n, f)
}

pub fn map_indexed_seq<U>(n: usize, f: impl Fn(usize) -> U) -> Vec<U> {
    (0..n).map(f).collect()
}

/// Max-reduction of `f(i)` over `0..n`. Returns `f64::NEG_INFINITY` for n = 0.
pub fn max_indexed(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    #[cfg(feature = "parallel")]
    {
        if !sequential() {
            use rayon::prelude::*;
            return (0..n)
                .into_par_iter()
                .map(&f)
                .reduce(|| f64::NEG_INFINITY, f64::max);
        }
    }
    max_indexed_seq(n, f)
}

pub fn max_indexed_seq(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
}

/// Max-reduction that also returns the index attaining the maximum (smallest
/// such index, in both modes, so the witness is deterministic).
pub fn argmax_indexed(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> (usize, f64) {
    #[cfg(feature = "parallel")]
    {
        if !sequential() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(|i| (i, f(i))).reduce(
                || (usize::MAX, f64::NEG_INFINITY),
                |a, b| {
                    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                        b
                    } else {
                        a
                    }
                },
            );
        }
    }
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for i in 0..n {
        let v = f(i);
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Process a mutable slice in fixed-size chunks, one chunk per item index.
pub fn for_chunks_mut<T: Send>(
    data: &mut [T],
    chunk: usize,
    f: impl Fn(usize, &mut [T]) + Sync + Send,
) {
    #[cfg(feature = "parallel")]
    {
        if !sequential() {
            use rayon::prelude::*;
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
    }
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}

/// Per-record processing in coarse blocks: `f(record_index, record_slice)`
/// runs for every record of `record` elements, scheduled `block` records at
/// a time so fine-grained stencil loops amortize the task overhead.
pub fn for_records_mut<T: Send>(
    data: &mut [T],
    record: usize,
    block: usize,
    f: impl Fn(usize, &mut [T]) + Sync + Send,
) {
    let span = record * block.max(1);
    for_chunks_mut(data, span, |blk, chunk| {
        for (local, rec) in chunk.chunks_mut(record).enumerate() {
            f(blk * block.max(1) + local, rec);
        }
    });
}

/// Fill a mutable slice by computing each element independently.
pub fn fill_slice<T: Send + Sync>(out: &mut [T], f: impl Fn(usize) -> T + Sync + Send) {
    #[cfg(feature = "parallel")]
    {
        if !sequential() {
            use rayon::prelude::*;
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
            return;
        }
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_order_is_stable() {
        let a = map_indexed(1000, |i| i * i);
        let b = map_indexed_seq(1000, |i| i * i);
        assert_eq!(a, b);
    }

    #[test]
    fn argmax_ties_pick_lowest_index() {
        let data = [1.0, 3.0, 3.0, 2.0];
        let (i, v) = argmax_indexed(4, |i| data[i]);
        assert_eq!(i, 1);
        assert_eq!(v, 3.0);
    }
}
