//! Bergman kernels of radial domains.
//!
//! On a radial domain the monomials `w^n` are mutually orthogonal, so
//! `K(z, w) = Σ_n z^n w̄^n / ‖w^n‖²` with `n ≥ 0` on discs and `n ∈ ℤ` on
//! annuli. Discs also have the closed form `ρ²/(π(ρ² − z w̄)²)` and annuli a
//! Laurent series with an explicit geometric tail bound.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{DomainKind, DomainSpec};
use crate::quadrature::QuadratureGrid;
use crate::{BlabError, Complex64, Result};

/// Default highest monomial degree of a basis model.
pub const DEFAULT_MAX_DEGREE: usize = 64;

/// Relative size of the zero-set guard, scaled by `K(z₀, z₀)` at a
/// reference point.
pub const ZERO_TOLERANCE_FACTOR: f64 = 1e-14;

const SERIES_CAP: usize = 5_000_000;

/// `log ‖w^n‖²_{L²(d)}`, computed without overflow for large `|n|`.
///
/// Returns `+∞` when `w^n` is not square integrable (`n ≤ -1` on domains
/// reaching the origin).
pub fn log_norm_sq(d: &DomainSpec, n: i32) -> f64 {
    let k = 2.0 * n as f64 + 2.0;
    let (r, big_r) = (d.r_inner(), d.r_outer());
    if d.reaches_origin() {
        if n < 0 {
            return f64::INFINITY;
        }
        return (2.0 * PI / k).ln() + k * big_r.ln();
    }
    let lr = (r / big_r).ln();
    if n == -1 {
        return (2.0 * PI * (-lr)).ln();
    }
    let top = if k > 0.0 { k * big_r.ln() } else { k * r.ln() };
    (2.0 * PI / k.abs()).ln() + top + (-(k.abs() * lr).exp_m1()).ln()
}

/// `‖w^n‖²_{L²(d)} = ∫_d |w|^{2n} dV`.
pub fn norm_sq(d: &DomainSpec, n: i32) -> f64 {
    log_norm_sq(d, n).exp()
}

/// `z^n / ‖w^n‖` evaluated through logarithms.
pub fn basis_value(n: i32, log_norm: f64, z: Complex64) -> Complex64 {
    if z.norm() == 0.0 {
        return if n == 0 { Complex64::new((-0.5 * log_norm).exp(), 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let mag = (n as f64 * z.norm().ln() - 0.5 * log_norm).exp();
    Complex64::from_polar(mag, n as f64 * z.arg())
}

/// Exponents in basis order: `0..=max` on discs, `0, 1, -1, 2, -2, …` on annuli.
pub fn basis_exponents(d: &DomainSpec, max_degree: usize) -> Vec<i32> {
    let m = max_degree as i32;
    if d.reaches_origin() {
        (0..=m).collect()
    } else {
        std::iter::once(0).chain((1..=m).flat_map(|n| [n, -n])).collect()
    }
}

/// Closed-form Bergman kernel of the disc of radius `rho`.
pub fn disc_kernel(rho: f64, z: Complex64, w: Complex64) -> Result<Complex64> {
    for p in [z, w] {
        if !(p.norm() < rho) {
            return Err(BlabError::OutsideDomain { z: p, domain: format!("disc:0:{rho}") });
        }
    }
    let rho2 = rho * rho;
    let d = Complex64::new(rho2, 0.0) - z * w.conj();
    Ok(Complex64::new(rho2 / PI, 0.0) / (d * d))
}

/// Upper bound of `Σ_{k>n} k q^k` for `0 ≤ q < 1`.
fn weighted_geometric_tail(q: f64, n: usize) -> f64 {
    let n = n as f64;
    q.powf(n + 1.0) * (n + 1.0 - n * q) / ((1.0 - q) * (1.0 - q))
}

/// Bound on the discarded part of the annulus series after `truncation`
/// terms in each direction.
pub fn annulus_tail_bound(r: f64, z: Complex64, w: Complex64, truncation: usize) -> f64 {
    let q = (z * w.conj()).norm();
    let s = r * r / q;
    (weighted_geometric_tail(q, truncation) + weighted_geometric_tail(s, truncation)) / ((1.0 - r * r) * PI * q)
}

/// Smallest truncation whose tail bound is at most `tol`.
pub fn annulus_truncation(r: f64, z: Complex64, w: Complex64, tol: f64) -> Result<usize> {
    let mut n = 1usize;
    while annulus_tail_bound(r, z, w, n) > tol {
        n *= 2;
        if n > SERIES_CAP {
            return Err(BlabError::TruncationInsufficient {
                truncation: n,
                bound: annulus_tail_bound(r, z, w, n),
                tolerance: tol,
            });
        }
    }
    // bisect down to the minimal count
    let (mut lo, mut hi) = (n / 2, n);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if annulus_tail_bound(r, z, w, mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Bergman kernel of `A_r = {r < |z| < 1}` from its Laurent series
///
/// `-1/(2π z w̄ log r) + (1/(π z w̄)) Σ_{0<|k|≤N} k (z w̄)^k / (1 - r^{2k})`.
///
/// Fails unless the geometric tail bound after `truncation` terms is at
/// most `tol`.
pub fn annulus_kernel(r: f64, z: Complex64, w: Complex64, truncation: usize, tol: f64) -> Result<Complex64> {
    let dom = || format!("annulus:{r}:1");
    if !(r > 0.0 && r < 1.0) {
        return Err(BlabError::InvalidDomain(dom()));
    }
    for p in [z, w] {
        if !(r < p.norm() && p.norm() < 1.0) {
            return Err(BlabError::OutsideDomain { z: p, domain: dom() });
        }
    }
    let bound = annulus_tail_bound(r, z, w, truncation);
    if !(bound <= tol) {
        return Err(BlabError::TruncationInsufficient { truncation, bound, tolerance: tol });
    }
    let x = z * w.conj();
    let y = Complex64::new(r * r, 0.0) / x;
    let r2 = r * r;
    let (mut xp, mut yp, mut r2k) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), 1.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..=truncation {
        xp *= x;
        yp *= y;
        r2k *= r2;
        let kf = k as f64;
        sum += (xp + yp) * (kf / (1.0 - r2k));
    }
    Ok(-1.0 / (2.0 * PI * x * r.ln()) + sum / (PI * x))
}

/// [`annulus_kernel`] with the minimal admissible truncation.
pub fn annulus_kernel_auto(r: f64, z: Complex64, w: Complex64, tol: f64) -> Result<Complex64> {
    for p in [z, w] {
        if !(r < p.norm() && p.norm() < 1.0) {
            return Err(BlabError::OutsideDomain { z: p, domain: format!("annulus:{r}:1") });
        }
    }
    let n = annulus_truncation(r, z, w, tol)?;
    annulus_kernel(r, z, w, n, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    ClosedFormDisc,
    AnnulusSeries,
    BasisSeries,
}

/// An evaluable Bergman kernel together with its orthonormal monomial basis
/// `e_n = w^n / ‖w^n‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    pub domain: DomainSpec,
    pub representation: Representation,
    pub exponents: Vec<i32>,
    pub norms_sq: Vec<f64>,
    log_norms: Vec<f64>,
    pub truncation: usize,
    pub zero_tolerance: f64,
}

impl KernelModel {
    fn assemble(domain: DomainSpec, representation: Representation, exponents: Vec<i32>, log_norms: Vec<f64>) -> Self {
        let truncation = exponents.iter().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0);
        let mut m = KernelModel {
            domain,
            representation,
            norms_sq: log_norms.iter().map(|l| l.exp()).collect(),
            exponents,
            log_norms,
            truncation,
            zero_tolerance: 0.0,
        };
        let z0 = Complex64::new((domain.r_inner() + domain.r_outer()) / 2.0, 0.0);
        let scale = m.raw_eval(z0, z0).re;
        m.zero_tolerance = ZERO_TOLERANCE_FACTOR * scale;
        m
    }

    /// Closed-form (discs) or Laurent-series (annuli) kernel, with a basis of
    /// degree `max_degree` whose norms are exact radial moments. The
    /// punctured disc gets the disc model.
    pub fn analytic(domain: DomainSpec, max_degree: usize) -> Self {
        let exponents = basis_exponents(&domain, max_degree);
        let log_norms = exponents.iter().map(|&n| log_norm_sq(&domain, n)).collect();
        let repr = match domain.kind() {
            DomainKind::Annulus => Representation::AnnulusSeries,
            _ => Representation::ClosedFormDisc,
        };
        Self::assemble(domain, repr, exponents, log_norms)
    }

    /// Basis-series model whose norms come from the exact radial moments.
    pub fn basis_series(domain: DomainSpec, max_degree: usize) -> Self {
        let exponents = basis_exponents(&domain, max_degree);
        let log_norms = exponents.iter().map(|&n| log_norm_sq(&domain, n)).collect();
        Self::assemble(domain, Representation::BasisSeries, exponents, log_norms)
    }

    /// Replaces the zero-set guard level.
    pub fn with_zero_tolerance(mut self, tol: f64) -> Self {
        self.zero_tolerance = tol;
        self
    }

    pub fn basis_len(&self) -> usize {
        self.exponents.len()
    }

    pub fn log_norms(&self) -> &[f64] {
        &self.log_norms
    }

    /// `e_n(z)` for the `i`-th basis element.
    pub fn basis(&self, i: usize, z: Complex64) -> Complex64 {
        basis_value(self.exponents[i], self.log_norms[i], z)
    }

    fn raw_eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        match self.representation {
            Representation::ClosedFormDisc => {
                let rho2 = self.domain.r_outer().powi(2);
                let d = Complex64::new(rho2, 0.0) - z * w.conj();
                Complex64::new(rho2 / PI, 0.0) / (d * d)
            }
            Representation::AnnulusSeries => {
                let big_r = self.domain.r_outer();
                let r = self.domain.r_inner() / big_r;
                let (zs, ws) = (z / big_r, w / big_r);
                // leading-term scale sets the absolute tolerance
                let tol = 1e-17 / (zs * ws.conj()).norm().max(1e-300) + 1e-17;
                annulus_kernel_auto(r, zs, ws, tol).unwrap_or(Complex64::new(f64::NAN, f64::NAN)) / (big_r * big_r)
            }
            Representation::BasisSeries => (0..self.basis_len())
                .map(|i| self.basis(i, z) * self.basis(i, w).conj())
                .sum(),
        }
    }

    fn check(&self, z: Complex64) -> Result<()> {
        if self.domain.contains(z) {
            Ok(())
        } else {
            Err(BlabError::OutsideDomain { z, domain: self.domain.to_string() })
        }
    }

    /// `K(z, w)`.
    pub fn eval(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        self.check(z)?;
        self.check(w)?;
        let v = self.raw_eval(z, w);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(BlabError::TruncationInsufficient { truncation: SERIES_CAP, bound: f64::INFINITY, tolerance: 0.0 })
        }
    }

    /// `K(z, z)`, real and nonnegative.
    pub fn diag(&self, z: Complex64) -> Result<f64> {
        self.eval(z, z).map(|v| v.re)
    }

    /// `K(z, z)` with the zero-set guard applied.
    pub fn guarded_diag(&self, z: Complex64) -> Result<f64> {
        let k = self.diag(z)?;
        if k <= self.zero_tolerance {
            return Err(BlabError::ZeroSet { z, value: k, tolerance: self.zero_tolerance });
        }
        Ok(k)
    }
}

/// Monomial-basis model whose norms are the quadrature values `∫_d |w|^{2n} dV`.
pub fn kernel_from_basis(d: DomainSpec, max_degree: usize, g: &QuadratureGrid) -> Result<KernelModel> {
    if max_degree < 1 {
        return Err(BlabError::InvalidArgument("max_degree must be ≥ 1".into()));
    }
    if g.domain != d {
        return Err(BlabError::GridMismatch { grid: g.domain.to_string(), model: d.to_string() });
    }
    let exponents = basis_exponents(&d, max_degree);
    let mut log_norms = Vec::with_capacity(exponents.len());
    for &n in &exponents {
        // integrate |w|^{2n} relative to the exact moment to stay in range
        let reference = log_norm_sq(&d, n);
        let ratio = g.integrate_real(|w| (2.0 * n as f64 * w.norm().ln() - reference).exp())?;
        if !(ratio > 0.0) {
            return Err(BlabError::Quadrature(format!("nonpositive norm for exponent {n}")));
        }
        log_norms.push(reference + ratio.ln());
    }
    Ok(KernelModel::assemble(d, Representation::BasisSeries, exponents, log_norms))
}

/// The unit vector `k_z = K(·, z)/√K(z, z)` with its basis coefficients
/// `c_n = conj(e_n(z))/√K(z, z)`.
#[derive(Debug, Clone)]
pub struct NormalizedKernel<'a> {
    pub model: &'a KernelModel,
    pub z: Complex64,
    pub diag: f64,
    pub coeffs: Vec<Complex64>,
}

impl NormalizedKernel<'_> {
    /// `k_z(w)`.
    pub fn eval(&self, w: Complex64) -> Result<Complex64> {
        Ok(self.model.eval(w, self.z)? / self.diag.sqrt())
    }

    /// The first `n` coefficients.
    pub fn truncated(&self, n: usize) -> &[Complex64] {
        &self.coeffs[..n.min(self.coeffs.len())]
    }
}

/// Normalized kernel at `z`; fails with [`BlabError::ZeroSet`] when
/// `K(z, z)` is at or below the model's zero tolerance.
pub fn normalized_kernel(m: &KernelModel, z: Complex64) -> Result<NormalizedKernel<'_>> {
    let diag = m.guarded_diag(z)?;
    let s = diag.sqrt();
    let coeffs = (0..m.basis_len()).map(|i| m.basis(i, z).conj() / s).collect();
    Ok(NormalizedKernel { model: m, z, diag, coeffs })
}

/// `K^U(z, z)/K^Ω(z, z)` for `z ∈ U ⊆ Ω`; at least 1.
pub fn diag_ratio(m_u: &KernelModel, m_omega: &KernelModel, z: Complex64) -> Result<f64> {
    if !m_u.domain.is_subset_of(&m_omega.domain) && !m_u.domain.is_subset_of(&m_omega.domain.holomorphic_hull()) {
        return Err(BlabError::NotNested { inner: m_u.domain.to_string(), outer: m_omega.domain.to_string() });
    }
    let k_omega = m_omega.guarded_diag(z)?;
    Ok(m_u.diag(z)? / k_omega)
}

/// Diagonal Laurent sums on a radial domain at radius `x`, with terms kept
/// relative to the largest one.
///
/// For a diagonal operator with eigenvalues `λ_n` in the monomial basis this
/// gives `K(x, x) = Σ_n x^{2n}/‖w^n‖²` and the Berezin transform
/// `Σ_n λ_n x^{2n}/‖w^n‖² / K(x, x)` with no fixed truncation.
#[derive(Debug, Clone)]
pub struct RadialSeries {
    pub exponents: Vec<i32>,
    /// Terms divided by the largest term.
    pub weights: Vec<f64>,
    pub log_peak: f64,
}

impl RadialSeries {
    /// Terms down to `e^{-45}` of the peak in both directions.
    pub fn new(d: &DomainSpec, x: f64) -> Result<Self> {
        if !(d.r_inner() < x && x < d.r_outer()) {
            return Err(BlabError::OutsideDomain { z: Complex64::new(x, 0.0), domain: d.to_string() });
        }
        const CUTOFF: f64 = 45.0;
        let lx = x.ln();
        let term = |n: i32| 2.0 * n as f64 * lx - log_norm_sq(d, n);
        let mut terms: Vec<(i32, f64)> = Vec::new();
        let mut peak = f64::NEG_INFINITY;
        // nonnegative exponents; terms rise to one peak then decay
        let mut n = 0i32;
        loop {
            let t = term(n);
            peak = peak.max(t);
            terms.push((n, t));
            if t < peak - CUTOFF && t < terms[terms.len().saturating_sub(2)].1 {
                break;
            }
            n += 1;
            if n as usize > SERIES_CAP {
                return Err(BlabError::TruncationInsufficient {
                    truncation: SERIES_CAP,
                    bound: (t - peak).exp(),
                    tolerance: (-CUTOFF).exp(),
                });
            }
        }
        if !d.reaches_origin() {
            let mut n = -1i32;
            loop {
                let t = term(n);
                peak = peak.max(t);
                let prev = terms.last().map(|p| p.1).unwrap_or(t);
                terms.push((n, t));
                if t < peak - CUTOFF && t < prev {
                    break;
                }
                n -= 1;
                if (-n) as usize > SERIES_CAP {
                    return Err(BlabError::TruncationInsufficient {
                        truncation: SERIES_CAP,
                        bound: (t - peak).exp(),
                        tolerance: (-CUTOFF).exp(),
                    });
                }
            }
        }
        terms.sort_by_key(|p| p.0);
        Ok(RadialSeries {
            exponents: terms.iter().map(|p| p.0).collect(),
            weights: terms.iter().map(|p| (p.1 - peak).exp()).collect(),
            log_peak: peak,
        })
    }

    /// `K(x, x)`.
    pub fn diag(&self) -> f64 {
        self.log_peak.exp() * self.weights.iter().sum::<f64>()
    }

    /// `Σ λ_n t_n / Σ t_n`.
    pub fn weighted_mean(&self, eigen: impl Fn(i32) -> f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (&n, &w) in self.exponents.iter().zip(&self.weights) {
            num += eigen(n) * w;
            den += w;
        }
        num / den
    }
}
