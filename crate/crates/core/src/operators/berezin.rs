use crate::geometry::DomainSpec;
use crate::kernels::{normalized_kernel, KernelModel, RadialSeries};
use crate::operators::matrix::{radial_eigenvalue, OperatorMatrix};
use crate::operators::symbol::SymbolExpr;
use crate::par;
use crate::quadrature::QuadratureGrid;
use crate::{BlabError, Complex64, Result};

/// `B T(z) = ⟨T k_z, k_z⟩ = c(z)^* M c(z)`.
pub fn berezin_of_operator(mat: &OperatorMatrix, m: &KernelModel, z: Complex64) -> Result<Complex64> {
    if mat.domain != m.domain || m.exponents.get(..mat.dim()) != Some(&mat.exponents[..]) {
        return Err(BlabError::InvalidArgument(format!(
            "operator matrix on {} (N={}) does not match the kernel model on {}",
            mat.domain,
            mat.dim(),
            m.domain
        )));
    }
    let k = normalized_kernel(m, z)?;
    let c = k.truncated(mat.dim());
    let mut total = Complex64::new(0.0, 0.0);
    for (i, ci) in c.iter().enumerate() {
        let mut row = Complex64::new(0.0, 0.0);
        for (j, cj) in c.iter().enumerate() {
            row += mat.entries[(i, j)] * cj;
        }
        total += ci.conj() * row;
    }
    Ok(total)
}

/// `B φ(z) = ∫ φ(w) |k_z(w)|² dV(w)` by quadrature on `g`.
pub fn berezin_of_symbol(m: &KernelModel, phi: &SymbolExpr, g: &QuadratureGrid, z: Complex64) -> Result<Complex64> {
    if g.domain.holomorphic_hull() != m.domain.holomorphic_hull() {
        return Err(BlabError::GridMismatch { grid: g.domain.to_string(), model: m.domain.to_string() });
    }
    let diag = m.guarded_diag(z)?;
    g.integrate(|w| match m.eval(w, z) {
        Ok(k) => phi.eval(w) * (k.norm_sqr() / diag),
        Err(_) => Complex64::new(f64::NAN, f64::NAN),
    })
}

/// Berezin transform of a radial symbol on a radial domain through the
/// diagonal Laurent sums, without a fixed truncation.
pub fn berezin_of_radial_symbol(d: &DomainSpec, phi: &SymbolExpr, z: Complex64) -> Result<Complex64> {
    if !phi.is_radial() {
        return Err(BlabError::InvalidArgument(format!("symbol {phi} is not radial")));
    }
    if !d.contains(z) {
        return Err(BlabError::OutsideDomain { z, domain: d.to_string() });
    }
    let series = RadialSeries::new(d, z.norm().max(f64::MIN_POSITIVE))?;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (&n, &w) in series.exponents.iter().zip(&series.weights) {
        num += radial_eigenvalue(d, phi, n)? * w;
        den += w;
    }
    Ok(num / den)
}

/// Berezin values at a point set; with `extended` set, points outside
/// `domain` carry the value 0 (extension by zero).
#[derive(Debug, Clone, PartialEq)]
pub struct BerezinField {
    pub domain: DomainSpec,
    pub points: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub extended: bool,
}

impl BerezinField {
    /// Evaluates `f` at every point (in parallel). Without extension a
    /// point outside `domain` is an error.
    pub fn evaluate(
        domain: DomainSpec,
        points: &[Complex64],
        extended: bool,
        f: impl Fn(Complex64) -> Result<Complex64> + Sync + Send,
    ) -> Result<Self> {
        let values = par::try_map(points.len(), |i| {
            let z = points[i];
            if domain.contains(z) {
                f(z)
            } else if extended {
                Ok(Complex64::new(0.0, 0.0))
            } else {
                Err(BlabError::OutsideDomain { z, domain: domain.to_string() })
            }
        })?;
        Ok(BerezinField { domain, points: points.to_vec(), values, extended })
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max_i |self_i − other_i|` over a shared point set.
    pub fn sup_distance(&self, other: &BerezinField) -> Result<f64> {
        self.check_points(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// `(Σ_i w_i |self_i − other_i|^p)^{1/p}` for points that are quadrature nodes.
    pub fn lp_distance(&self, other: &BerezinField, weights: &[f64], p: f64) -> Result<f64> {
        self.check_points(other)?;
        lp_sum(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()), weights, p)
    }

    /// `(Σ_i w_i |self_i|^p)^{1/p}`.
    pub fn lp_norm(&self, weights: &[f64], p: f64) -> Result<f64> {
        lp_sum(self.values.iter().map(|v| v.norm()), weights, p)
    }

    fn check_points(&self, other: &BerezinField) -> Result<()> {
        if self.points != other.points {
            return Err(BlabError::InvalidArgument("Berezin fields on different point sets".into()));
        }
        Ok(())
    }
}

fn lp_sum(abs: impl Iterator<Item = f64>, weights: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(BlabError::InvalidArgument(format!("L^p exponent must be positive, got {p}")));
    }
    let mut s = 0.0;
    let mut count = 0;
    for (a, w) in abs.zip(weights) {
        s += w * a.powf(p);
        count += 1;
    }
    if count != weights.len() {
        return Err(BlabError::InvalidArgument("weights and values differ in length".into()));
    }
    Ok(s.powf(1.0 / p))
}
