//! Reproducible random streams: one ChaCha stream per replicate, keyed by
//! the master seed and the replicate index.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct StreamRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Runs `f` for replicates `0..n` in parallel, each with its own stream, and
/// returns results in replicate order regardless of scheduling.
pub fn run_replicates<T, F>(seed: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut StreamRng) -> T + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = StreamRng::new(seed, i as u64);
            f(i, &mut rng)
        })
        .collect()
}

/// Sums a per-replicate statistic in fixed-size chunks, so large runs need
/// no per-replicate storage. Chunk sums are combined in chunk order.
pub fn sum_replicates<F>(seed: u64, n: usize, width: usize, f: F) -> Vec<f64>
where
    F: Fn(&mut StreamRng, &mut [f64]) + Sync,
{
    const CHUNK: usize = 4096;
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; width];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let mut rng = StreamRng::new(seed, i as u64);
                f(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; width];
    for p in partial {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}
