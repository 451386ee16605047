use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, SubgraphView};
use crate::operator::Potential;

/// Which coordination number sits on the diagonal of a restricted Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Ambient degree n_G(x): the restriction keeps the hopping to the outside on the diagonal.
    Dirichlet,
    /// Intrinsic degree n_Λ(x).
    Neumann,
}

/// Dense matrix of `-Δ_Λ + V` on an indexed vertex set.
///
/// Row `i` corresponds to ambient vertex `domain.members()[i]`.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    domain: SubgraphView,
    matrix: DMatrix<f64>,
    boundary_kind: BoundaryKind,
}

pub fn assemble_hamiltonian(
    ambient: &FiniteGraph,
    domain: &SubgraphView,
    v: &Potential,
    kind: BoundaryKind,
) -> Result<Hamiltonian> {
    if v.len() != ambient.len() {
        return Err(Error::InvalidDomain(format!(
            "potential has {} values for a graph with {} vertices",
            v.len(),
            ambient.len()
        )));
    }
    if !ambient.is_connected_subset(domain.members()) {
        return Err(Error::InvalidDomain("domain is not connected in the ambient graph".into()));
    }
    let n = domain.len();
    let mut matrix = DMatrix::zeros(n, n);
    for (i, &x) in domain.members().iter().enumerate() {
        let mut inside = 0usize;
        for &y in ambient.neighbors(x) {
            if let Some(j) = domain.position(y) {
                matrix[(i, j)] = -1.0;
                inside += 1;
            }
        }
        let degree = match kind {
            BoundaryKind::Dirichlet => ambient.degree(x),
            BoundaryKind::Neumann => inside,
        };
        matrix[(i, i)] = degree as f64 + v.value(x);
    }
    Ok(Hamiltonian { domain: domain.clone(), matrix, boundary_kind: kind })
}

impl Hamiltonian {
    /// Wrap an explicit symmetric matrix (synthetic operators in tests and probes).
    pub fn from_matrix(domain: SubgraphView, matrix: DMatrix<f64>, boundary_kind: BoundaryKind) -> Result<Self> {
        if matrix.nrows() != domain.len() || matrix.ncols() != domain.len() {
            return Err(Error::InvalidDomain("matrix shape does not match the domain".into()));
        }
        if matrix != matrix.transpose() {
            return Err(Error::InvalidDomain("matrix is not symmetric".into()));
        }
        Ok(Hamiltonian { domain, matrix, boundary_kind })
    }

    pub fn domain(&self) -> &SubgraphView {
        &self.domain
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn boundary_kind(&self) -> BoundaryKind {
        self.boundary_kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.matrix.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Principal submatrix on `sub`: the Dirichlet restriction relative to this operator's domain.
    pub fn restrict(&self, sub: &SubgraphView) -> Result<Hamiltonian> {
        let rows: Vec<usize> = sub
            .members()
            .iter()
            .map(|&v| self.domain.position(v).ok_or(Error::InvalidDomain(format!("vertex {v} outside the domain"))))
            .collect::<Result<_>>()?;
        let n = rows.len();
        let matrix = DMatrix::from_fn(n, n, |i, j| self.matrix[(rows[i], rows[j])]);
        Ok(Hamiltonian { domain: sub.clone(), matrix, boundary_kind: BoundaryKind::Dirichlet })
    }

    /// `H + t·1`.
    pub fn shifted(&self, t: f64) -> Hamiltonian {
        let mut out = self.clone();
        for i in 0..out.dim() {
            out.matrix[(i, i)] += t;
        }
        out
    }

    /// Plain-text row-major dump with 17 significant digits.
    pub fn dump(&self) -> String {
        dump_matrix(&self.matrix)
    }
}

pub(crate) fn dump_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in m.row_iter() {
        let row: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
