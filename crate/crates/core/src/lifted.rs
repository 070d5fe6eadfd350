//! Trial-domain (lifted) signals and operators.
//!
//! A trial of `N+1` samples `t = 0..=N` is stacked into one vector, and every
//! causal LTI map becomes a lower-triangular Toeplitz matrix whose
//! subdiagonals hold the Markov parameters.

use std::ops::{Add, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{IlcError, Result};

/// One trial worth of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: DVector<f64>,
    sample_time: f64,
}

impl Signal {
    pub fn new(values: Vec<f64>, sample_time: f64) -> Self {
        Self {
            values: DVector::from_vec(values),
            sample_time,
        }
    }

    pub fn from_vector(values: DVector<f64>, sample_time: f64) -> Self {
        Self {
            values,
            sample_time,
        }
    }

    pub fn zeros(len: usize, sample_time: f64) -> Self {
        Self::from_vector(DVector::zeros(len), sample_time)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample_time(&self) -> f64 {
        self.sample_time
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.values
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.norm_squared()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Wraps `values` with this signal's sample time.
    pub fn with_values(&self, values: DVector<f64>) -> Self {
        Self::from_vector(values, self.sample_time)
    }

    pub fn check_len(&self, expected: usize, context: &'static str) -> Result<()> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(IlcError::DimensionMismatch {
                context,
                expected,
                found: self.len(),
            })
        }
    }
}

impl Add for &Signal {
    type Output = Signal;
    fn add(self, rhs: &Signal) -> Signal {
        self.with_values(&self.values + &rhs.values)
    }
}

impl Sub for &Signal {
    type Output = Signal;
    fn sub(self, rhs: &Signal) -> Signal {
        self.with_values(&self.values - &rhs.values)
    }
}

/// Lower-triangular Toeplitz operator built from Markov parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedOperator {
    markov: Vec<f64>,
    dense: DMatrix<f64>,
}

impl LiftedOperator {
    pub fn identity(len: usize) -> Self {
        let mut markov = vec![0.0; len];
        if len > 0 {
            markov[0] = 1.0;
        }
        Self::from_markov(markov)
    }

    pub fn zero(len: usize) -> Self {
        Self::from_markov(vec![0.0; len])
    }

    fn from_markov(markov: Vec<f64>) -> Self {
        let dense = toeplitz(&markov);
        Self { markov, dense }
    }

    pub fn markov(&self) -> &[f64] {
        &self.markov
    }

    pub fn dense(&self) -> &DMatrix<f64> {
        &self.dense
    }

    /// Number of samples `N+1`.
    pub fn dim(&self) -> usize {
        self.markov.len()
    }

    /// Index of the first nonzero Markov parameter (relative degree), or
    /// `None` for the zero operator.
    pub fn relative_degree(&self) -> Option<usize> {
        self.markov.iter().position(|h| *h != 0.0)
    }

    /// Causal convolution `y[t] = Σ_{j≤t} h[t−j]·x[j]`.
    pub fn apply(&self, x: &Signal) -> Result<Signal> {
        x.check_len(self.dim(), "lifted operator input")?;
        let n = self.dim();
        let xs = x.as_slice();
        let mut out = vec![0.0; n];
        for (t, slot) in out.iter_mut().enumerate() {
            *slot = xs[..=t]
                .iter()
                .zip(self.markov[..=t].iter().rev())
                .map(|(x, h)| x * h)
                .sum();
        }
        Ok(Signal::new(out, x.sample_time()))
    }

    /// Product `self · other`, again lower-triangular Toeplitz.
    pub fn compose(&self, other: &LiftedOperator) -> Result<LiftedOperator> {
        if self.dim() != other.dim() {
            return Err(IlcError::DimensionMismatch {
                context: "operator composition",
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let n = self.dim();
        let markov = (0..n)
            .map(|t| (0..=t).map(|j| self.markov[t - j] * other.markov[j]).sum())
            .collect();
        Ok(Self::from_markov(markov))
    }
}

fn toeplitz(markov: &[f64]) -> DMatrix<f64> {
    let n = markov.len();
    DMatrix::from_fn(n, n, |i, j| if i >= j { markov[i - j] } else { 0.0 })
}

/// Lifts a Markov list onto a horizon of `horizon + 1` samples, truncating or
/// zero-padding as needed.
pub fn lift(markov: &[f64], horizon: usize) -> Result<LiftedOperator> {
    if markov.is_empty() {
        return Err(IlcError::EmptyMarkov);
    }
    let mut m: Vec<f64> = markov.iter().copied().take(horizon + 1).collect();
    m.resize(horizon + 1, 0.0);
    Ok(LiftedOperator::from_markov(m))
}

/// `scalar · I` of size `dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalWeight {
    scalar: f64,
    dim: usize,
}

impl DiagonalWeight {
    pub fn new(scalar: f64, dim: usize, name: &'static str) -> Result<Self> {
        if !(scalar >= 0.0) || !scalar.is_finite() {
            return Err(IlcError::NegativeWeight { name });
        }
        Ok(Self { scalar, dim })
    }

    pub fn unit(dim: usize) -> Self {
        Self { scalar: 1.0, dim }
    }

    pub fn scalar(&self) -> f64 {
        self.scalar
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dense(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim) * self.scalar
    }
}

/// `‖x‖²_W = w·Σ x[t]²`.
pub fn weighted_norm_sq(x: &Signal, w: &DiagonalWeight) -> Result<f64> {
    x.check_len(w.dim(), "weighted norm")?;
    Ok(w.scalar() * x.norm_sq())
}
