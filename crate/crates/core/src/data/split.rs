use rand::seq::SliceRandom;
use rand::Rng;

use super::Dataset;
use crate::error::{Error, Result};

/// Shuffle `0..n` and cut it at `round(train_fraction · n)`.
pub fn split_indices<R: Rng + ?Sized>(
    n: usize,
    train_fraction: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let cut = (train_fraction * n as f64).round() as usize;
    split_counts(n, cut, n.saturating_sub(cut), rng)
}

/// Shuffle `0..n`, then take the first `train` indices and the next `val`.
pub fn split_counts<R: Rng + ?Sized>(
    n: usize,
    train: usize,
    val: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if train == 0 || val == 0 {
        return Err(Error::invalid(format!(
            "split of {n} samples leaves an empty side ({train} train / {val} validation)"
        )));
    }
    if train + val > n {
        return Err(Error::invalid(format!(
            "cannot take {train} + {val} samples from {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let val_part = order[train..train + val].to_vec();
    order.truncate(train);
    Ok((order, val_part))
}

pub fn split<R: Rng + ?Sized>(
    dataset: &Dataset,
    train_fraction: f64,
    rng: &mut R,
) -> Result<(Dataset, Dataset)> {
    let (train, val) = split_indices(dataset.len(), train_fraction, rng)?;
    Ok((dataset.subset(&train), dataset.subset(&val)))
}

/// One epoch of shuffled minibatches of sample indices; the final short batch
/// is kept.
pub fn minibatches<R: Rng + ?Sized>(
    len: usize,
    batch_size: usize,
    rng: &mut R,
) -> Result<impl Iterator<Item = Vec<usize>>> {
    if batch_size == 0 {
        return Err(Error::invalid("batch size must be at least 1"));
    }
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(rng);
    let batches: Vec<Vec<usize>> = order.chunks(batch_size).map(<[usize]>::to_vec).collect();
    Ok(batches.into_iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Tensor;
    use crate::rng;

    fn toy(n: usize) -> Dataset {
        let images = (0..n)
            .map(|i| Tensor::filled(&[1, 1, 1], i as f64))
            .collect();
        Dataset::new(images, (0..n).map(|i| i % 3).collect(), 3).unwrap()
    }

    #[test]
    fn fraction_split_sizes_and_conservation() {
        let d = toy(1000);
        let (tr, va) = split(&d, 0.8, &mut rng::seeded(1)).unwrap();
        assert_eq!((tr.len(), va.len()), (800, 200));
        let mut all: Vec<u64> = tr
            .images
            .iter()
            .chain(&va.images)
            .map(|t| t.data()[0] as u64)
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<u64>>());
    }

    #[test]
    fn empty_side_is_rejected() {
        assert!(split_indices(3, 0.1, &mut rng::seeded(1)).is_err());
        assert!(split_indices(10, 1.0, &mut rng::seeded(1)).is_err());
        assert!(split_counts(10, 8, 3, &mut rng::seeded(1)).is_err());
    }

    #[test]
    fn batches_replay_and_cover() {
        let run = |seed| {
            let mut r = rng::seeded(seed);
            let mut epochs = Vec::new();
            for _ in 0..3 {
                epochs.push(minibatches(103, 10, &mut r).unwrap().collect::<Vec<_>>());
            }
            epochs
        };
        let a = run(5);
        assert_eq!(a, run(5));
        assert_ne!(a[0], a[1], "each epoch reshuffles");
        assert_eq!(a[0].len(), 11);
        assert_eq!(a[0].last().unwrap().len(), 3);
        let mut seen: Vec<usize> = a[0].concat();
        seen.sort_unstable();
        assert_eq!(seen, (0..103).collect::<Vec<_>>());
        assert!(minibatches(5, 0, &mut rng::seeded(1)).is_err());
    }
}
