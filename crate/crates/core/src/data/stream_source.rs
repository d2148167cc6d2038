use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// A finite dataset replayed as a stream: an initial batch followed by the
/// remaining samples in arrival order.
#[derive(Debug, Clone)]
pub struct StreamSource {
    pub batch: DataMatrix,
    pub remainder: DataMatrix,
    pub seed: u64,
    /// `order[i]` is the input row emitted at stream position `i`.
    pub order: Vec<usize>,
}

impl StreamSource {
    pub fn batch_indices(&self) -> &[usize] {
        &self.order[..self.batch.rows()]
    }

    pub fn remainder_indices(&self) -> &[usize] {
        &self.order[self.batch.rows()..]
    }
}

/// Shuffles the rows of `x` with `seed` and splits off the first
/// `batch_size` rows as the batch.
pub fn make_stream(x: &DataMatrix, batch_size: usize, seed: u64) -> Result<StreamSource> {
    let n = x.rows();
    if batch_size == 0 || batch_size >= n {
        return Err(Error::invalid(format!(
            "batch size must be in [1, {}), got {batch_size}",
            n
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let batch = x.select_rows(&order[..batch_size])?;
    let remainder = x.select_rows(&order[batch_size..])?;
    Ok(StreamSource { batch, remainder, seed, order })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> DataMatrix {
        let rows: Vec<[f64; 2]> = (0..n).map(|i| [i as f64, (i * i) as f64]).collect();
        DataMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn largest_batch_leaves_one_sample() {
        let s = make_stream(&sample(10), 9, 1).unwrap();
        assert_eq!(s.batch.rows(), 9);
        assert_eq!(s.remainder.rows(), 1);
    }

    #[test]
    fn emitted_rows_partition_input() {
        let x = sample(57);
        let s = make_stream(&x, 20, 4).unwrap();
        let mut seen: Vec<Vec<u64>> = s
            .batch
            .iter_rows()
            .chain(s.remainder.iter_rows())
            .map(|r| r.iter().map(|v| v.to_bits()).collect())
            .collect();
        let mut input: Vec<Vec<u64>> =
            x.iter_rows().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
        seen.sort();
        input.sort();
        assert_eq!(seen, input);
        for (pos, &i) in s.order.iter().enumerate() {
            let row = if pos < 20 { s.batch.row(pos) } else { s.remainder.row(pos - 20) };
            assert_eq!(row, x.row(i));
        }
    }

    #[test]
    fn seeds_change_the_permutation() {
        let x = sample(100);
        let a = make_stream(&x, 50, 1).unwrap();
        let b = make_stream(&x, 50, 2).unwrap();
        assert_ne!(a.order, b.order);
        assert_eq!(a.order, make_stream(&x, 50, 1).unwrap().order);
    }

    #[test]
    fn batch_size_bounds() {
        let x = sample(5);
        assert!(make_stream(&x, 0, 1).is_err());
        assert!(make_stream(&x, 5, 1).is_err());
    }
}
