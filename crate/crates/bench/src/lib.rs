//! Input fixtures shared by the criterion benchmarks.

use tokenprune_core::rng::SplitMix64;
use tokenprune_core::TokenMatrix;

/// `rows x cols` matrix of standard normal entries from a fixed seed.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> TokenMatrix {
    let mut rng = SplitMix64::new(seed);
    let data = (0..rows * cols).map(|_| rng.gaussian() as f32).collect();
    TokenMatrix::new(rows, cols, data).expect("finite gaussian data")
}
