use nalgebra::SymmetricEigen;

use super::{max_abs_diff, CMatrix, QsimError, Result, CHECK_TOL, EIGEN_CLUSTER_TOL};

/// One eigenvalue together with the projector onto its eigenspace.
#[derive(Debug, Clone)]
pub struct Eigenspace {
    pub value: f64,
    pub projector: CMatrix,
}

/// Hermitian observable with a cached spectral decomposition.
///
/// Eigenspaces are sorted by ascending eigenvalue and their projectors sum
/// to the identity.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: CMatrix,
    spectrum: Vec<Eigenspace>,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(QsimError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let dev = max_abs_diff(&matrix, &matrix.adjoint());
        if dev > CHECK_TOL {
            return Err(QsimError::NotHermitian(dev));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let dim = matrix.nrows();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut spectrum: Vec<Eigenspace> = Vec::new();
        let mut members: Vec<usize> = Vec::new();
        let flush = |members: &mut Vec<usize>, spectrum: &mut Vec<Eigenspace>| {
            if members.is_empty() {
                return;
            }
            let value =
                members.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / members.len() as f64;
            let mut projector = CMatrix::zeros(dim, dim);
            for &i in members.iter() {
                let v = eig.eigenvectors.column(i);
                projector += v * v.adjoint();
            }
            spectrum.push(Eigenspace { value, projector });
            members.clear();
        };
        for &i in &order {
            if let Some(&lead) = members.first() {
                if eig.eigenvalues[i] - eig.eigenvalues[lead] > EIGEN_CLUSTER_TOL {
                    flush(&mut members, &mut spectrum);
                }
            }
            members.push(i);
        }
        flush(&mut members, &mut spectrum);
        Ok(Self { matrix, spectrum })
    }

    /// `value * I` on a `dim`-dimensional space.
    pub fn scalar(dim: usize, value: f64) -> Self {
        let id = CMatrix::identity(dim, dim);
        Self {
            matrix: id.scale(value),
            spectrum: vec![Eigenspace {
                value,
                projector: id,
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenspaces(&self) -> &[Eigenspace] {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum.iter().map(|e| e.value).collect()
    }

    /// Projector for `value`, if it is in the spectrum.
    pub fn projector_for(&self, value: f64) -> Option<&CMatrix> {
        self.spectrum
            .iter()
            .find(|e| (e.value - value).abs() <= EIGEN_CLUSTER_TOL)
            .map(|e| &e.projector)
    }

    /// `U O U†`, conjugating the cached projectors as well.
    pub fn conjugated(&self, u: &CMatrix) -> Self {
        let ud = u.adjoint();
        Self {
            matrix: u * &self.matrix * &ud,
            spectrum: self
                .spectrum
                .iter()
                .map(|e| Eigenspace {
                    value: e.value,
                    projector: u * &e.projector * &ud,
                })
                .collect(),
        }
    }

    /// Largest entry of the commutator `[self, other]`.
    pub fn commutator_norm(&self, other: &Observable) -> f64 {
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        max_abs_diff(&ab, &ba)
    }
}
