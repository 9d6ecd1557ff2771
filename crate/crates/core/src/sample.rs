//! Gaussian sampling through the structured covariance square root.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{PopulationModel, StructuredSqrt};
use crate::scalar::Real;

/// Reproducibility token: a master seed plus a stream index.
///
/// Every replication derives its own ChaCha stream from these two values,
/// so results do not depend on thread count or call order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRecord {
    pub master_seed: u64,
    pub stream: u64,
}

impl SeedRecord {
    pub fn new(master_seed: u64, stream: u64) -> Self {
        Self {
            master_seed,
            stream,
        }
    }

    /// The deterministic generator for this (seed, stream) pair.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Matrix of i.i.d. standard-normal draws, filled in column-major order.
pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<T> {
    DMatrix::from_iterator(rows, cols, (0..rows * cols).map(|_| T::standard_normal(rng)))
}

/// One sampled data set: observation matrices plus the latent rows the
/// first-coefficient limit is evaluated on.
#[derive(Debug, Clone)]
pub struct DataSet<T: Real> {
    /// d x n observations of X; columns are samples.
    pub x: DMatrix<T>,
    /// d x n observations of Y.
    pub y: DMatrix<T>,
    /// First row of the latent standard-normal matrix.
    pub z1: DVector<T>,
    /// (d+1)-th row of the latent matrix.
    pub z2: DVector<T>,
    pub seed: SeedRecord,
}

/// Draws n joint samples: columns of `(x; y)` are i.i.d. N(0, Sigma_T).
///
/// Only rows {1, 2, d+1, d+2} mix through the 4x4 core; every other row i
/// is the corresponding latent row scaled by the bulk standard deviation.
/// The raw latent rows 1 and d+1 are retained before mixing.
pub fn generate_dataset<T: Real>(
    model: &PopulationModel<T>,
    sqrt: &StructuredSqrt<T>,
    n: usize,
    seed: SeedRecord,
) -> DataSet<T> {
    assert!(n >= 2, "need at least two samples");
    let d = model.params.dim;
    let mut rng = seed.rng();
    let z = gaussian_matrix::<T, _>(2 * d, n, &mut rng);

    let z1 = z.row(0).transpose();
    let z2 = z.row(d).transpose();

    // Mix the four coupled latent rows through the core.
    let core_in = DMatrix::from_fn(4, n, |i, j| match i {
        0 => z[(0, j)],
        1 => z[(1, j)],
        2 => z[(d, j)],
        _ => z[(d + 1, j)],
    });
    let core4 = DMatrix::from_fn(4, 4, |i, j| sqrt.core4[(i, j)]);
    let mixed = core4 * core_in;

    let mut x = DMatrix::zeros(d, n);
    let mut y = DMatrix::zeros(d, n);
    for j in 0..n {
        x[(0, j)] = mixed[(0, j)];
        x[(1, j)] = mixed[(1, j)];
        y[(0, j)] = mixed[(2, j)];
        y[(1, j)] = mixed[(3, j)];
        for i in 2..d {
            x[(i, j)] = sqrt.bulk_x * z[(i, j)];
            y[(i, j)] = sqrt.bulk_y * z[(d + i, j)];
        }
    }

    DataSet {
        x,
        y,
        z1,
        z2,
        seed,
    }
}
