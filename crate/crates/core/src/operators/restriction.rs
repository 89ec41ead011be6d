use nalgebra::DMatrix;

use crate::geometry::DomainSpec;
use crate::kernels::KernelModel;
use crate::operators::matrix::{weighted_gram, OperatorMatrix};
use crate::quadrature::QuadratureGrid;
use crate::{BlabError, Complex64, Result};

/// `U ⊆ Ω`, where a punctured disc counts as its disc (the puncture is
/// removable for Bergman functions).
pub fn check_nested(inner: &DomainSpec, outer: &DomainSpec) -> Result<()> {
    if inner.is_subset_of(outer) || inner.holomorphic_hull().is_subset_of(&outer.holomorphic_hull()) {
        Ok(())
    } else {
        Err(BlabError::NotNested { inner: inner.to_string(), outer: outer.to_string() })
    }
}

/// `Σ_i c_i e_i(w)` in the basis of `m`.
pub fn expand(m: &KernelModel, coeffs: &[Complex64], w: Complex64) -> Complex64 {
    coeffs.iter().enumerate().map(|(i, c)| c * m.basis(i, w)).sum()
}

/// A function of `A²(Ω)` viewed on a subdomain `U`.
#[derive(Debug, Clone)]
pub struct RestrictedFunction<'a> {
    pub domain: DomainSpec,
    pub model: &'a KernelModel,
    pub coeffs: Vec<Complex64>,
}

impl RestrictedFunction<'_> {
    pub fn eval(&self, w: Complex64) -> Result<Complex64> {
        if !self.domain.contains(w) {
            return Err(BlabError::OutsideDomain { z: w, domain: self.domain.to_string() });
        }
        Ok(expand(self.model, &self.coeffs, w))
    }
}

/// `R^Ω_U f = f|_U` for `f` given by coefficients in the basis of `m`.
pub fn restriction_apply<'a>(m: &'a KernelModel, coeffs: &[Complex64], u: DomainSpec) -> Result<RestrictedFunction<'a>> {
    check_nested(&u, &m.domain)?;
    if coeffs.len() > m.basis_len() {
        return Err(BlabError::InvalidArgument("more coefficients than basis elements".into()));
    }
    Ok(RestrictedFunction { domain: u, model: m, coeffs: coeffs.to_vec() })
}

/// First `n` coefficients of `R_U^* f = P_Ω E f`: `∫_U f conj(e_i^Ω) dV`.
pub fn restriction_adjoint_apply(
    m_omega: &KernelModel,
    g_u: &QuadratureGrid,
    f: impl Fn(Complex64) -> Complex64 + Sync + Send,
    n: usize,
) -> Result<Vec<Complex64>> {
    check_nested(&g_u.domain, &m_omega.domain)?;
    check_len(m_omega, n)?;
    let col = weighted_gram(g_u, n, |i, x| m_omega.basis(i, x), 1, |_, x| f(x), |_| Complex64::new(1.0, 0.0))?;
    Ok(col.column(0).iter().copied().collect())
}

fn check_len(m: &KernelModel, n: usize) -> Result<()> {
    if n == 0 || n > m.basis_len() {
        return Err(BlabError::InvalidArgument(format!("truncation {n} outside 1..={}", m.basis_len())));
    }
    Ok(())
}

/// Matrix of `R^Ω_U : A²(Ω) → A²(U)`: entry `(i, j) = ⟨e_j^Ω|_U, e_i^U⟩_U`
/// for `i < n_inner`, `j < n_outer`, integrated on `g_inner`. Its conjugate
/// transpose is the matrix of `R_U^*`.
pub fn restriction_matrix(
    m_outer: &KernelModel,
    m_inner: &KernelModel,
    g_inner: &QuadratureGrid,
    n_outer: usize,
    n_inner: usize,
) -> Result<DMatrix<Complex64>> {
    check_nested(&m_inner.domain, &m_outer.domain)?;
    if g_inner.domain.holomorphic_hull() != m_inner.domain.holomorphic_hull() {
        return Err(BlabError::GridMismatch { grid: g_inner.domain.to_string(), model: m_inner.domain.to_string() });
    }
    check_len(m_outer, n_outer)?;
    check_len(m_inner, n_inner)?;
    weighted_gram(
        g_inner,
        n_inner,
        |i, x| m_inner.basis(i, x),
        n_outer,
        |j, x| m_outer.basis(j, x),
        |_| Complex64::new(1.0, 0.0),
    )
}

/// Matrix of `R_U T R_U^*` on `A²(U)` from the matrix of `T` on `A²(Ω)`.
pub fn compressed_operator(
    mat: &OperatorMatrix,
    m_omega: &KernelModel,
    m_u: &KernelModel,
    g_u: &QuadratureGrid,
    n: usize,
) -> Result<OperatorMatrix> {
    check_model(mat, m_omega)?;
    let r = restriction_matrix(m_omega, m_u, g_u, mat.dim(), n)?;
    let entries = &r * &mat.entries * r.adjoint();
    Ok(OperatorMatrix { domain: m_u.domain, exponents: m_u.exponents[..n].to_vec(), entries })
}

/// Matrix of `R^* T R` on `A²(Ω')` for `T` on `A²(Ω)` with `Ω ⊆ Ω'`, where
/// `R : A²(Ω') → A²(Ω)` restricts.
pub fn expanded_operator(
    mat: &OperatorMatrix,
    m_inner: &KernelModel,
    g_inner: &QuadratureGrid,
    m_outer: &KernelModel,
    n: usize,
) -> Result<OperatorMatrix> {
    check_model(mat, m_inner)?;
    let r = restriction_matrix(m_outer, m_inner, g_inner, n, mat.dim())?;
    let entries = r.adjoint() * &mat.entries * &r;
    Ok(OperatorMatrix { domain: m_outer.domain, exponents: m_outer.exponents[..n].to_vec(), entries })
}

fn check_model(mat: &OperatorMatrix, m: &KernelModel) -> Result<()> {
    if mat.domain != m.domain || m.exponents.get(..mat.dim()) != Some(&mat.exponents[..]) {
        return Err(BlabError::InvalidArgument(format!(
            "operator matrix on {} does not match the model on {}",
            mat.domain, m.domain
        )));
    }
    Ok(())
}
