use rand::seq::index;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{solve::rank, DenseMatrix, SparseMatrix};
use crate::rng::{stream, Rng};

const RANK_TOL: f64 = 1e-10;
/// Stricter bar for the dictionary itself, to stay clear of the threshold.
const PRODUCT_RANK_TOL: f64 = 1e-9;
const MAX_RANK_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DictKind {
    /// Product of sparse Gaussian factors.
    #[serde(rename = "FACT")]
    Fact,
    /// Dense i.i.d. Gaussian matrix.
    #[serde(rename = "RAND")]
    Rand,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub d: usize,
    pub n: usize,
    pub atoms_per_sample: usize,
    pub dict_kind: DictKind,
    /// Number of factors of a `FACT` dictionary.
    pub m: usize,
    /// Inclusive range of non-zeros per `FACT` factor.
    pub nnz_range: (usize, usize),
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            d: 32,
            n: 500,
            atoms_per_sample: 5,
            dict_kind: DictKind::Fact,
            m: 5,
            nnz_range: (64, 128),
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.nnz_range;
        let bad = self.d == 0
            || self.n == 0
            || self.atoms_per_sample == 0
            || self.atoms_per_sample > self.d
            || (self.dict_kind == DictKind::Fact
                && (self.m == 0 || lo == 0 || lo > hi || hi > self.d * self.d || lo < self.d));
        if bad {
            return Err(Error::InvalidArgument(format!(
                "invalid synthetic data spec {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDictionary {
    pub dense: DenseMatrix,
    /// The generating factors of a `FACT` dictionary.
    pub factors: Option<Vec<SparseMatrix>>,
}

fn gaussian(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Square factor with a uniformly drawn count of Gaussian entries. The
/// support is a random permutation plus distinct uniform positions, so the
/// factor is structurally non-singular; values are redrawn until full rank.
fn full_rank_factor(d: usize, nnz_range: (usize, usize), rng: &mut Rng) -> Result<SparseMatrix> {
    let nnz = rng.random_range(nnz_range.0..=nnz_range.1);
    let perm = index::sample(rng, d, d).into_vec();
    let mut positions: Vec<usize> = (0..d).map(|i| i * d + perm[i]).collect();
    let rest: Vec<usize> = (0..d * d).filter(|p| !positions.contains(p)).collect();
    positions.extend(
        index::sample(rng, rest.len(), nnz - d)
            .into_iter()
            .map(|i| rest[i]),
    );
    for _ in 0..MAX_RANK_ATTEMPTS {
        let triplets = positions
            .iter()
            .map(|&pos| (pos / d, pos % d, gaussian(rng)))
            .collect::<Vec<_>>();
        let s = SparseMatrix::from_triplets(d, d, triplets)?;
        if rank(&s.to_dense(), RANK_TOL) == d {
            return Ok(s);
        }
    }
    Err(Error::RankRepair(MAX_RANK_ATTEMPTS))
}

/// Reference dictionary `D₀` for `spec` (stream 0 of `spec.seed`).
pub fn synth_dictionary(spec: &SynthSpec) -> Result<SynthDictionary> {
    spec.validate()?;
    let mut rng = stream(spec.seed, 0);
    let d = spec.d;
    match spec.dict_kind {
        DictKind::Rand => {
            let data = (0..d * d).map(|_| gaussian(&mut rng)).collect();
            Ok(SynthDictionary {
                dense: DenseMatrix::new(d, d, data)?,
                factors: None,
            })
        }
        DictKind::Fact => {
            // full-rank factors can still multiply to a numerically singular
            // product, so the product is checked too
            for _ in 0..MAX_RANK_ATTEMPTS {
                let factors = (0..spec.m)
                    .map(|_| full_rank_factor(d, spec.nnz_range, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                let dense = crate::matcore::product_dense(&factors);
                if rank(&dense, PRODUCT_RANK_TOL) == d {
                    return Ok(SynthDictionary {
                        dense,
                        factors: Some(factors),
                    });
                }
            }
            Err(Error::RankRepair(MAX_RANK_ATTEMPTS))
        }
    }
}

/// Training data `X = D₀Γ₀` where each column of `Γ₀` has exactly `k`
/// Gaussian entries on a uniformly random support (stream 1 of `seed`).
pub fn synth_training_data(
    dict: &DenseMatrix,
    n: usize,
    k: usize,
    seed: u64,
) -> Result<(DenseMatrix, SparseMatrix)> {
    let atoms = dict.cols();
    if k == 0 || k > atoms {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {k} atoms out of {atoms}"
        )));
    }
    let mut rng = stream(seed, 1);
    let mut triplets = Vec::with_capacity(n * k);
    for col in 0..n {
        for atom in index::sample(&mut rng, atoms, k) {
            triplets.push((atom, col, gaussian(&mut rng)));
        }
    }
    let gamma = SparseMatrix::from_triplets(atoms, n, triplets)?;
    let x = SparseMatrix::dense_mul(dict, &gamma)?;
    Ok((x, gamma))
}
