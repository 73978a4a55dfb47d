//! Dense statevector simulation over composite qudit registers.
//!
//! Register 0 is the most significant digit of a basis index. States are
//! values: every operation returns a new [`StateVector`].

mod observable;
mod pauli;
mod state;

pub mod gates;

pub use observable::{Eigenspace, Observable};
pub use pauli::PauliKey;
pub use state::{Basis, StateVector};

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;

/// Dense complex matrix.
pub type CMatrix = DMatrix<C64>;

/// Tolerance for unitarity, hermiticity and norm checks.
pub const CHECK_TOL: f64 = 1e-9;

/// Eigenvalues closer than this share an eigenspace.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QsimError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("register {index} out of range for {count} registers")]
    RegisterOutOfRange { index: usize, count: usize },
    #[error("register {0} targeted twice")]
    DuplicateTarget(usize),
    #[error("register {index} has dimension {dim}, expected a qubit")]
    NotQubit { index: usize, dim: usize },
    #[error("pad key covers {key} qubits but {targets} targets were given")]
    KeyLength { key: usize, targets: usize },
    #[error("amplitudes have norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("projection onto a zero-probability outcome")]
    ZeroProbability,
    #[error("register dimensions must be at least 2")]
    BadRegister,
}

pub type Result<T> = std::result::Result<T, QsimError>;

/// Sample an index from a (possibly unnormalized) weight vector.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last_positive = i;
        if u < w {
            return i;
        }
        u -= w;
    }
    last_positive
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Check `u` is unitary within [`CHECK_TOL`].
pub fn check_unitary(u: &CMatrix) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(QsimError::DimensionMismatch {
            expected: u.nrows(),
            found: u.ncols(),
        });
    }
    let dev = max_abs_diff(&(u * u.adjoint()), &CMatrix::identity(u.nrows(), u.nrows()));
    if dev > CHECK_TOL {
        return Err(QsimError::NotUnitary(dev));
    }
    Ok(())
}
