use crate::CorpusError;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Parts of the 53:3:3 ratio.
pub const TRAIN_PARTS: usize = 53;
pub const HELDOUT_PARTS: usize = 3;
pub const TOTAL_PARTS: usize = TRAIN_PARTS + 2 * HELDOUT_PARTS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub test: Vec<T>,
    pub validation: Vec<T>,
}

/// `(train, test, validation)` sizes: test and validation each get
/// `floor(n * 3 / 59)`, train takes the rest.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let held = n * HELDOUT_PARTS / TOTAL_PARTS;
    (n - 2 * held, held, held)
}

/// Seeded shuffle, then cut into train / test / validation.
pub fn split_dataset<T: Clone>(items: &[T], seed: u64) -> Result<DatasetSplit<T>, CorpusError> {
    if items.len() < 3 {
        return Err(CorpusError::TooFewPairs(items.len()));
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train_n, test_n, _) = split_sizes(items.len());
    let pick = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect::<Vec<T>>();
    Ok(DatasetSplit {
        train: pick(&order[..train_n]),
        test: pick(&order[train_n..train_n + test_n]),
        validation: pick(&order[train_n + test_n..]),
    })
}
