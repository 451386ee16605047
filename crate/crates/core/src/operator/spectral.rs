use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, SubgraphView};
use crate::operator::hamiltonian::dump_matrix;
use crate::operator::Hamiltonian;

/// Relative tolerance below which an energy counts as lying on the spectrum.
pub const NEAR_SPECTRUM_REL: f64 = 1e-12;

const RESIDUAL_REL: f64 = 1e-9;
const GRAM_TOL: f64 = 1e-10;

/// Full eigendecomposition of a [`Hamiltonian`]: ascending eigenvalues, orthonormal columns.
#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    domain: SubgraphView,
    norm_inf: f64,
    matrix: DMatrix<f64>,
}

pub fn eigendecompose(h: &Hamiltonian) -> Result<SpectralData> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::InvalidDomain("empty operator".into()));
    }
    let failure = |reason: String| Error::NumericalFailure { reason, dump: h.dump() };
    let a = faer::Mat::<f64>::from_fn(n, n, |i, j| h.matrix()[(i, j)]);
    let eig = a.selfadjoint_eigendecomposition(faer::Side::Lower);
    let (s, u) = (eig.s().column_vector(), eig.u());

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s.read(a).total_cmp(&s.read(b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| s.read(i)).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| u.read(r, order[c]));

    let norm_inf = h.norm_inf();
    let residual_tol = RESIDUAL_REL * (1.0 + norm_inf);
    let hv = h.matrix() * &eigenvectors;
    for (i, &lam) in eigenvalues.iter().enumerate() {
        if !lam.is_finite() {
            return Err(failure(format!("non-finite eigenvalue at index {i}")));
        }
        let res = (hv.column(i) - eigenvectors.column(i) * lam).norm();
        if res > residual_tol {
            return Err(failure(format!("residual {res:e} of eigenpair {i} exceeds {residual_tol:e}")));
        }
    }
    let gram = eigenvectors.transpose() * &eigenvectors;
    let gram_err = (gram - DMatrix::identity(n, n)).amax();
    if gram_err > GRAM_TOL {
        return Err(failure(format!("eigenvectors not orthonormal: max Gram error {gram_err:e}")));
    }
    Ok(SpectralData { eigenvalues, eigenvectors, domain: h.domain().clone(), norm_inf, matrix: h.matrix().clone() })
}

/// Eigenvalues of `h` in ascending order, without eigenvectors.
pub fn spectrum(h: &Hamiltonian) -> Result<Vec<f64>> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::InvalidDomain("empty operator".into()));
    }
    let a = faer::Mat::<f64>::from_fn(n, n, |i, j| h.matrix()[(i, j)]);
    let mut values = a.selfadjoint_eigenvalues(faer::Side::Lower);
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure { reason: format!("non-finite eigenvalue at index {i}"), dump: h.dump() });
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

impl SpectralData {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `i` is ψ_i.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn domain(&self) -> &SubgraphView {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// ‖H‖_∞ of the source operator.
    pub fn norm_inf(&self) -> f64 {
        self.norm_inf
    }

    /// Absolute NearSpectrum tolerance for this operator.
    pub fn near_spectrum_tolerance(&self) -> f64 {
        NEAR_SPECTRUM_REL * (1.0 + self.norm_inf)
    }

    pub fn row(&self, v: usize) -> Result<usize> {
        self.domain.position(v).ok_or(Error::UnknownVertex(v))
    }

    /// ψ_i(v) for ambient vertex `v`.
    pub fn amplitude(&self, i: usize, v: usize) -> Result<f64> {
        Ok(self.eigenvectors[(self.row(v)?, i)])
    }

    fn check_energy(&self, e: f64) -> Result<()> {
        let gap = spectral_gap(self, e);
        let tolerance = self.near_spectrum_tolerance();
        if gap <= tolerance {
            return Err(Error::NearSpectrum { energy: e, gap, tolerance });
        }
        Ok(())
    }

    /// Source matrix of the decomposition.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    // Resolvents are computed by pivoted LU solves of H - E rather than from the eigen-sum:
    // the eigen-sum carries an absolute error of order ε‖G‖, which swamps the exponentially
    // small entries that the decay tests compare.
    fn shifted_lu(&self, e: f64) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
        self.check_energy(e)?;
        let mut m = self.matrix.clone();
        for i in 0..self.dim() {
            m[(i, i)] -= e;
        }
        Ok(m.lu())
    }

    fn solve_unit(&self, lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, row: usize) -> Result<DVector<f64>> {
        let mut b = DVector::zeros(self.dim());
        b[row] = 1.0;
        lu.solve(&b).ok_or_else(|| Error::NumericalFailure {
            reason: "singular shifted operator".into(),
            dump: dump_matrix(&self.matrix),
        })
    }

    /// Green function G(x, ·; E) for every vertex of the domain, in row order.
    pub fn green_row(&self, x: usize, e: f64) -> Result<Vec<f64>> {
        let lu = self.shifted_lu(e)?;
        Ok(self.solve_unit(&lu, self.row(x)?)?.iter().copied().collect())
    }

    /// The full resolvent matrix (H - E)^{-1} in row order.
    pub fn green_matrix(&self, e: f64) -> Result<DMatrix<f64>> {
        let lu = self.shifted_lu(e)?;
        let n = self.dim();
        let mut m = DMatrix::identity(n, n);
        if !lu.solve_mut(&mut m) {
            return Err(Error::NumericalFailure { reason: "singular shifted operator".into(), dump: dump_matrix(&self.matrix) });
        }
        // Symmetrise so that G(x,y) and G(y,x) agree bit for bit.
        Ok(DMatrix::from_fn(n, n, |r, c| if r <= c { m[(r, c)] } else { m[(c, r)] }))
    }

    /// G(x, y; E) from the spectral expansion Σ_j ψ_j(x) ψ_j(y) / (λ_j - E).
    pub fn green_spectral(&self, x: usize, y: usize, e: f64) -> Result<f64> {
        self.check_energy(e)?;
        let (rx, ry) = (self.row(x)?, self.row(y)?);
        Ok(self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(j, &l)| self.eigenvectors[(rx, j)] * self.eigenvectors[(ry, j)] / (l - e))
            .sum())
    }
}

/// G(x, y; E) = ((H - E)^{-1})(x, y).
pub fn green(s: &SpectralData, x: usize, y: usize, e: f64) -> Result<f64> {
    let (rx, ry) = (s.row(x)?, s.row(y)?);
    let (a, b) = if rx <= ry { (rx, ry) } else { (ry, rx) };
    let lu = s.shifted_lu(e)?;
    Ok(s.solve_unit(&lu, b)?[a])
}

/// dist(Σ(H), E).
pub fn spectral_gap(s: &SpectralData, e: f64) -> f64 {
    s.eigenvalues.iter().map(|&l| (l - e).abs()).fold(f64::INFINITY, f64::min)
}

/// Both sides of the geometric resolvent equation for one pair `x ∈ Λ`, `y ∉ Λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `residual / max(|lhs|, Σ|terms|)`.
    pub relative: f64,
    pub terms: usize,
}

/// Check G_G(x,y;E) = Σ_{(u,u') ∈ ∂Λ} G^D_Λ(x,u;E) G_G(u',y;E).
///
/// `graph` supplies adjacency; the boundary is taken relative to the domain of `ambient_h`,
/// and the Dirichlet restriction is the principal submatrix of `ambient_h` on `lambda`.
pub fn verify_gre(
    graph: &FiniteGraph,
    ambient_h: &Hamiltonian,
    lambda: &SubgraphView,
    x: usize,
    y: usize,
    e: f64,
) -> Result<GreCheck> {
    let domain = ambient_h.domain();
    if !lambda.contains(x) {
        return Err(Error::InvalidDomain(format!("x = {x} must lie in Λ")));
    }
    if lambda.contains(y) || !domain.contains(y) {
        return Err(Error::InvalidDomain(format!("y = {y} must lie in the domain outside Λ")));
    }
    let full = eigendecompose(ambient_h)?;
    let local = eigendecompose(&ambient_h.restrict(lambda)?)?;
    let lhs = green(&full, x, y, e)?;
    let mut rhs = 0.0;
    let mut scale = 0.0;
    let mut terms = 0;
    for &u in lambda.members() {
        for &w in graph.neighbors(u) {
            if domain.contains(w) && !lambda.contains(w) {
                let t = green(&local, x, u, e)? * green(&full, w, y, e)?;
                rhs += t;
                scale += t.abs();
                terms += 1;
            }
        }
    }
    let residual = (lhs - rhs).abs();
    let denom = lhs.abs().max(scale);
    let relative = if denom > 0.0 { residual / denom } else { residual };
    Ok(GreCheck { lhs, rhs, residual, relative, terms })
}
