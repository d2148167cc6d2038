//! Fixtures shared by the benchmarks.

use sisomap_core::{gen_swiss_roll, BatchModel, DataMatrix};

/// Noise-free Swiss Roll sample of size `n`.
pub fn roll(n: usize, seed: u64) -> DataMatrix {
    gen_swiss_roll(n, seed, 0.0).expect("valid size").0
}

/// Batch model on `n` Swiss Roll points with k = 10, d = 2, plus `m`
/// further points from the same roll to stream.
pub fn model_and_stream(n: usize, m: usize, seed: u64) -> (BatchModel, DataMatrix) {
    let x = roll(n + m, seed);
    let batch = x.select_rows(&(0..n).collect::<Vec<_>>()).expect("in range");
    let stream = x.select_rows(&(n..n + m).collect::<Vec<_>>()).expect("in range");
    (BatchModel::build(batch, 10, 2).expect("connected batch"), stream)
}
