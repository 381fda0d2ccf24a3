//! Bounded worker pool with deterministic result order.
//!
//! Sweep cells are independent; workers pull the next job index from an
//! atomic counter and store the result at that index, so the merged output
//! is in configuration-grid order no matter how execution interleaves.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Run `jobs` closures over `workers` threads; results in job order.
pub fn run_jobs<T, F>(jobs: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.max(1).min(jobs.max(1));
    if workers <= 1 {
        return (0..jobs).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<T>>> = Mutex::new((0..jobs).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs {
                    break;
                }
                let out = f(i);
                results.lock().expect("worker poisoned the result store")[i] = Some(out);
            });
        }
    });
    results
        .into_inner()
        .expect("worker poisoned the result store")
        .into_iter()
        .map(|r| r.expect("every job index was claimed"))
        .collect()
}
