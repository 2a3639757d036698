//! Chunk-ordered execution.
//!
//! Data-parallel loops in this crate (synthetic generation, Monte Carlo
//! oracle sampling, batch forward evaluation, per-batch gradient
//! accumulation) all run through [`map_chunks`]: the work is split into
//! fixed-size chunks, each chunk is computed independently, and the chunk
//! results are combined in chunk-index order. Because the chunking and the
//! combine order are identical in both modes, the parallel and sequential
//! paths produce bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Rows per chunk for dataset-sized loops.
pub const ROW_CHUNK: usize = 1024;

/// Rows per chunk when accumulating gradients over a mini-batch.
pub const GRAD_CHUNK: usize = 128;

/// Execution mode for chunked loops.
///
/// `Parallel` exists only when the `parallel` feature is enabled; without it
/// every loop runs the same chunked algorithm sequentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl ExecMode {
    /// Parallel when the `parallel` feature is compiled in, sequential otherwise.
    pub fn auto() -> Self {
        #[cfg(feature = "parallel")]
        {
            ExecMode::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            ExecMode::Sequential
        }
    }
}

/// Half-open row range assigned to one chunk worker.
#[derive(Debug, Clone, Copy)]
pub struct Chunk {
    pub index: usize,
    pub start: usize,
    pub len: usize,
}

pub fn chunks(total: usize, chunk_len: usize) -> Vec<Chunk> {
    assert!(chunk_len > 0, "chunk_len must be positive");
    let mut out = Vec::with_capacity(total.div_ceil(chunk_len));
    let mut start = 0;
    let mut index = 0;
    while start < total {
        let len = chunk_len.min(total - start);
        out.push(Chunk { index, start, len });
        start += len;
        index += 1;
    }
    out
}

/// Applies `work` to every chunk of `0..total` and returns the results in
/// chunk-index order.
pub fn map_chunks<T, F>(mode: ExecMode, total: usize, chunk_len: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(Chunk) -> T + Sync + Send,
{
    let cs = chunks(total, chunk_len);
    match mode {
        ExecMode::Sequential => cs.into_iter().map(work).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => cs.into_par_iter().map(work).collect(),
    }
}

/// Derives an independent sub-seed from a root seed and a stream index.
///
/// splitmix64 finalizer over the xor of root and a spread stream index;
/// every chunk and every pipeline stage gets its own RNG stream so results
/// do not depend on chunking or thread scheduling.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    let mut z = root ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
