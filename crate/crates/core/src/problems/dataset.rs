//! Labelled dense datasets and the feature/sample normalization applied
//! before building classification problems.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::rng::{seeded, Stream};

/// Row-major feature matrix with `+1/-1` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<i8>,
}

impl Dataset {
    pub fn new(features: Vec<f64>, n_features: usize, labels: Vec<i8>) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::InvalidParameter("dataset needs at least one feature".into()));
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::DimensionMismatch {
                context: "Dataset::new",
                expected: labels.len() * n_features,
                got: features.len(),
            });
        }
        if let Some(l) = labels.iter().find(|l| **l != 1 && **l != -1) {
            return Err(Error::InvalidParameter(format!("label {l} is not +1/-1")));
        }
        Ok(Self {
            features,
            n_features,
            labels,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn label(&self, i: usize) -> i8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn pos_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == 1).count()
    }

    pub fn neg_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == -1).count()
    }

    /// Rows of one class, concatenated row-major.
    pub fn class_rows(&self, label: i8) -> Vec<f64> {
        (0..self.n_samples())
            .filter(|&i| self.labels[i] == label)
            .flat_map(|i| self.row(i).iter().copied())
            .collect()
    }

    pub fn column_mean_std(&self, j: usize) -> (f64, f64) {
        let n = self.n_samples() as f64;
        let mean = (0..self.n_samples()).map(|i| self.row(i)[j]).sum::<f64>() / n;
        let var = (0..self.n_samples())
            .map(|i| {
                let d = self.row(i)[j] - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        (mean, libm::sqrt(var))
    }
}

/// Standardizes every column to mean 0 and (population) standard deviation 1.
///
/// Constant columns cannot be standardized and are dropped; their original
/// indices are returned.
pub fn standardize_columns(data: &Dataset) -> Result<(Dataset, Vec<usize>)> {
    if data.n_samples() == 0 {
        return Err(Error::InvalidParameter("empty dataset".into()));
    }
    let d = data.n_features();
    let mut kept = Vec::with_capacity(d);
    let mut dropped = Vec::new();
    for j in 0..d {
        let (mean, std) = data.column_mean_std(j);
        if std > 1e-12 * (1.0 + mean.abs()) {
            kept.push((j, mean, std));
        } else {
            dropped.push(j);
        }
    }
    if kept.is_empty() {
        return Err(Error::InvalidParameter("every feature column is constant".into()));
    }
    let mut features = Vec::with_capacity(data.n_samples() * kept.len());
    for i in 0..data.n_samples() {
        let row = data.row(i);
        features.extend(kept.iter().map(|&(j, mean, std)| (row[j] - mean) / std));
    }
    let out = Dataset::new(features, kept.len(), data.labels.clone())?;
    Ok((out, dropped))
}

/// Column standardization followed by scaling each row to unit 2-norm.
pub fn preprocess(data: &Dataset) -> Result<Dataset> {
    let (mut out, dropped) = standardize_columns(data)?;
    if !dropped.is_empty() {
        log::warn!("dropped {} constant feature column(s): {:?}", dropped.len(), dropped);
    }
    let d = out.n_features;
    for i in 0..out.n_samples() {
        let row = &mut out.features[i * d..(i + 1) * d];
        let nrm = norm2(row);
        if !(nrm > 0.0) {
            return Err(Error::Data {
                line: i + 1,
                message: format!("row {} is all zeros after standardization", i + 1),
            });
        }
        row.iter_mut().for_each(|v| *v /= nrm);
    }
    Ok(out)
}

/// Two Gaussian classes `N(+mu, I)` and `N(-mu, I)` with `||mu|| = separation / 2`
/// along a random direction.
pub fn synthetic_classification(
    n_features: usize,
    n_pos: usize,
    n_neg: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_features == 0 || n_pos + n_neg == 0 {
        return Err(Error::InvalidParameter("empty synthetic dataset".into()));
    }
    let mut rng = seeded(seed, Stream::Data);
    let mut dir: Vec<f64> = (0..n_features).map(|_| rng.sample(StandardNormal)).collect();
    let nrm = norm2(&dir);
    dir.iter_mut().for_each(|v| *v *= 0.5 * separation / nrm);
    let total = n_pos + n_neg;
    let mut features = vec![0.0; total * n_features];
    let mut labels = Vec::with_capacity(total);
    for i in 0..total {
        let label: i8 = if i < n_pos { 1 } else { -1 };
        let row = &mut features[i * n_features..(i + 1) * n_features];
        for (v, mu) in row.iter_mut().zip(&dir) {
            let e: f64 = rng.sample(StandardNormal);
            *v = f64::from(label) * mu + e;
        }
        labels.push(label);
    }
    Dataset::new(features, n_features, labels)
}
