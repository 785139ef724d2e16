//! Seeded random streams.
//!
//! Replica `i` of a run with global seed `s` uses a ChaCha8 stream seeded
//! with `splitmix64(s ^ splitmix64(i + 1))`. Streams are independent of the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, replica: u64) -> Rng {
    Rng::seed_from_u64(splitmix64(seed ^ splitmix64(replica.wrapping_add(1))))
}

pub fn rng(seed: u64) -> Rng {
    stream(seed, 0)
}

/// Worker count, capped by `SANDLAB_THREADS` when set.
pub fn thread_budget() -> usize {
    let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("SANDLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(cap) if cap >= 1 => cap.min(hw.max(1)),
        _ => hw,
    }
}

/// Runs `f(replica)` for `0..count` across scoped threads and returns results in replica order.
pub fn par_replicas<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = thread_budget().min(count.max(1));
    if workers <= 1 {
        return (0..count).map(&f).collect();
    }
    let mut out: Vec<Option<T>> = (0..count).map(|_| None).collect();
    let chunk = count.div_ceil(workers);
    std::thread::scope(|sc| {
        for (w, slot) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            sc.spawn(move || {
                for (j, s) in slot.iter_mut().enumerate() {
                    *s = Some(f(w * chunk + j));
                }
            });
        }
    });
    out.into_iter().map(|x| x.unwrap()).collect()
}
