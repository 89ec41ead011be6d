use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::geometry::DomainSpec;
use crate::kernels::{log_norm_sq, KernelModel};
use crate::operators::symbol::{OperatorWord, RadialPiece, RadialProfile, SymbolExpr};
use crate::par;
use crate::quadrature::{grid_for_singularities, QuadratureGrid, Resolution};
use crate::{BlabError, Complex64, Result};

/// Default operator truncation.
pub const DEFAULT_TRUNCATION: usize = 48;

/// Slack allowed in norm and Berezin bounds for truncated matrices.
pub const TRUNCATION_SLACK: f64 = 1e-6;

const CHUNK: usize = 1024;

/// `M_{mn} = ⟨T e_n, e_m⟩` over the first `N` basis elements.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub domain: DomainSpec,
    pub exponents: Vec<i32>,
    pub entries: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn identity(m: &KernelModel, n: usize) -> Result<Self> {
        let exponents = leading_exponents(m, n)?;
        Ok(OperatorMatrix { domain: m.domain, exponents, entries: DMatrix::identity(n, n) })
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.entries.clone().singular_values().max()
    }

    fn check_compatible(&self, other: &OperatorMatrix) -> Result<()> {
        if self.domain != other.domain || self.exponents != other.exponents {
            return Err(BlabError::InvalidArgument(format!(
                "incompatible operator matrices on {} (N={}) and {} (N={})",
                self.domain,
                self.dim(),
                other.domain,
                other.dim()
            )));
        }
        Ok(())
    }

    /// Matrix of the composition `self ∘ other`.
    pub fn compose(&self, other: &OperatorMatrix) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(OperatorMatrix { entries: &self.entries * &other.entries, ..self.clone() })
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(OperatorMatrix { entries: &self.entries + &other.entries, ..self.clone() })
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &OperatorMatrix) -> Result<Self> {
        self.check_compatible(other)?;
        let e = &self.entries * &other.entries - &other.entries * &self.entries;
        Ok(OperatorMatrix { entries: e, ..self.clone() })
    }

    /// Largest off-diagonal modulus.
    pub fn off_diagonal_max(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.entries[(i, j)].norm());
                }
            }
        }
        m
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.entries[(i, i)]).collect()
    }

    /// The leading `n × n` block.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.dim());
        OperatorMatrix {
            domain: self.domain,
            exponents: self.exponents[..n].to_vec(),
            entries: self.entries.view((0, 0), (n, n)).into_owned(),
        }
    }
}

fn leading_exponents(m: &KernelModel, n: usize) -> Result<Vec<i32>> {
    if n == 0 || n > m.basis_len() {
        return Err(BlabError::InvalidArgument(format!(
            "truncation {n} outside 1..={} for the basis of {}",
            m.basis_len(),
            m.domain
        )));
    }
    Ok(m.exponents[..n].to_vec())
}

/// `G_{ij} = Σ_x w(x) s(x) a_j(x) conj(b_i(x))` over the nodes of `g`, for
/// `i < n_rows` and `j < n_cols`. Chunks are reduced in fixed order.
pub fn weighted_gram<A, B, S>(
    g: &QuadratureGrid,
    n_rows: usize,
    rows: B,
    n_cols: usize,
    cols: A,
    weight: S,
) -> Result<DMatrix<Complex64>>
where
    A: Fn(usize, Complex64) -> Complex64 + Sync + Send,
    B: Fn(usize, Complex64) -> Complex64 + Sync + Send,
    S: Fn(Complex64) -> Complex64 + Sync + Send,
{
    let n_chunks = g.len().div_ceil(CHUNK);
    let partial = par::try_map(n_chunks, |c| {
        let lo = c * CHUNK;
        let hi = ((c + 1) * CHUNK).min(g.len());
        let len = hi - lo;
        // rows of the local tables are nodes
        let mut left = DMatrix::<Complex64>::zeros(n_rows, len);
        let mut right = DMatrix::<Complex64>::zeros(len, n_cols);
        for (k, idx) in (lo..hi).enumerate() {
            let x = g.nodes[idx];
            let s = weight(x) * g.weights[idx];
            if !(s.re.is_finite() && s.im.is_finite()) {
                return Err(BlabError::NonFinite(x));
            }
            for i in 0..n_rows {
                left[(i, k)] = rows(i, x).conj();
            }
            for j in 0..n_cols {
                right[(k, j)] = cols(j, x) * s;
            }
        }
        Ok(left * right)
    })?;
    let mut total = DMatrix::<Complex64>::zeros(n_rows, n_cols);
    for p in partial {
        total += p;
    }
    Ok(total)
}

/// Toeplitz matrix of `φ`. Radial symbols use exact radial moments (the
/// matrix is then diagonal); other symbols are integrated on `g`.
pub fn toeplitz_matrix(m: &KernelModel, phi: &SymbolExpr, g: &QuadratureGrid, n: usize) -> Result<OperatorMatrix> {
    if phi.is_radial() {
        toeplitz_radial(m, phi, n)
    } else {
        toeplitz_quadrature(m, phi, g, n)
    }
}

/// Toeplitz matrix by 2-D quadrature, for any symbol.
pub fn toeplitz_quadrature(m: &KernelModel, phi: &SymbolExpr, g: &QuadratureGrid, n: usize) -> Result<OperatorMatrix> {
    let exponents = leading_exponents(m, n)?;
    if g.domain.holomorphic_hull() != m.domain.holomorphic_hull() {
        return Err(BlabError::GridMismatch { grid: g.domain.to_string(), model: m.domain.to_string() });
    }
    let entries = weighted_gram(g, n, |i, x| m.basis(i, x), n, |j, x| m.basis(j, x), |x| phi.eval(x))
        .map_err(|e| match e {
            BlabError::NonFinite(z) => {
                BlabError::Quadrature(format!("symbol {phi} is not finite at node {z}; use a grid avoiding its singularities"))
            }
            other => other,
        })?;
    Ok(OperatorMatrix { domain: m.domain, exponents, entries })
}

/// Diagonal Toeplitz matrix of a radial symbol from closed-form moments.
pub fn toeplitz_radial(m: &KernelModel, phi: &SymbolExpr, n: usize) -> Result<OperatorMatrix> {
    let exponents = leading_exponents(m, n)?;
    let mut entries = DMatrix::<Complex64>::zeros(n, n);
    for (i, &e) in exponents.iter().enumerate() {
        entries[(i, i)] = radial_eigenvalue(&m.domain, phi, e)?;
    }
    Ok(OperatorMatrix { domain: m.domain, exponents, entries })
}

/// `⟨φ e_n, e_n⟩` for a radial symbol, with `e_n = w^n/‖w^n‖` on `d`.
pub fn radial_eigenvalue(d: &DomainSpec, phi: &SymbolExpr, n: i32) -> Result<Complex64> {
    let pieces = phi
        .radial_pieces(d.r_inner(), d.r_outer())
        .ok_or_else(|| BlabError::InvalidArgument(format!("symbol {phi} is not radial")))?;
    let log_norm = log_norm_sq(d, n);
    if !log_norm.is_finite() {
        return Err(BlabError::InvalidArgument(format!("w^{n} is not in A²({d})")));
    }
    let k = 2.0 * n as f64 + 2.0;
    let mut total = Complex64::new(0.0, 0.0);
    for p in pieces {
        total += piece_moment(&p, k, log_norm - (2.0 * std::f64::consts::PI).ln())?;
    }
    Ok(total)
}

/// `e^{-s} ∫_a^b f(ρ) ρ^{k-1} dρ` for one piece.
fn piece_moment(p: &RadialPiece, k: f64, s: f64) -> Result<Complex64> {
    let at = |rho: f64, f: &dyn Fn(f64) -> f64| if rho == 0.0 { 0.0 } else { f(rho) };
    let divergent = || BlabError::InvalidArgument(format!("radial moment of order {k} diverges at 0"));
    match p.profile {
        RadialProfile::Const(c) => Ok(c * power_moment(p.a, p.b, k, s).ok_or_else(divergent)?),
        RadialProfile::Power(alpha) => {
            Ok(Complex64::new(power_moment(p.a, p.b, k + alpha, s).ok_or_else(divergent)?, 0.0))
        }
        RadialProfile::Log => {
            if k == 0.0 {
                if p.a == 0.0 {
                    return Err(divergent());
                }
                let v = (p.b.ln().powi(2) - p.a.ln().powi(2)) / 2.0 * (-s).exp();
                return Ok(Complex64::new(v, 0.0));
            }
            if p.a == 0.0 && k < 0.0 {
                return Err(divergent());
            }
            let prim = |rho: f64| {
                let l = rho.ln();
                (k * l - s).exp() * (k * l - 1.0) / (k * k)
            };
            Ok(Complex64::new(at(p.b, &prim) - at(p.a, &prim), 0.0))
        }
    }
}

/// `e^{-s} ∫_a^b ρ^{k-1} dρ`, `None` when divergent.
fn power_moment(a: f64, b: f64, k: f64, s: f64) -> Option<f64> {
    if k == 0.0 {
        return if a == 0.0 { None } else { Some((b / a).ln() * (-s).exp()) };
    }
    if a == 0.0 && k < 0.0 {
        return None;
    }
    let top = (k * b.ln() - s).exp();
    let bottom = if a == 0.0 { 0.0 } else { (k * a.ln() - s).exp() };
    Some((top - bottom) / k)
}

/// Grid used for the non-radial factors of words on `d`.
pub fn symbol_grid(d: DomainSpec, phi: &SymbolExpr, res: Resolution) -> Result<QuadratureGrid> {
    grid_for_singularities(d, &phi.singular_points(), res)
}

/// `Σ_m Π_i M(φ_{m,i})`, each factor truncated to `N` before multiplying.
pub fn word_matrix(w: &OperatorWord, m: &KernelModel, res: Resolution, n: usize) -> Result<OperatorMatrix> {
    let mut cache: HashMap<String, OperatorMatrix> = HashMap::new();
    let mut total: Option<OperatorMatrix> = None;
    for term in &w.terms {
        let mut product: Option<OperatorMatrix> = None;
        for phi in term {
            let key = phi.to_string();
            if !cache.contains_key(&key) {
                let mat = if phi.is_radial() {
                    toeplitz_radial(m, phi, n)?
                } else {
                    toeplitz_quadrature(m, phi, &symbol_grid(m.domain, phi, res)?, n)?
                };
                cache.insert(key.clone(), mat);
            }
            let factor = &cache[&key];
            product = Some(match product {
                None => factor.clone(),
                Some(p) => p.compose(factor)?,
            });
        }
        let product = product.expect("nonempty product");
        total = Some(match total {
            None => product,
            Some(t) => t.add(&product)?,
        });
    }
    Ok(total.expect("nonempty word"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_graded_grid, build_star_grid, RadialRule};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_one_is_identity() {
        let d = DomainSpec::unit_disc();
        let m = KernelModel::analytic(d, 20);
        let g = build_graded_grid(d, Resolution::default()).unwrap();
        let one = SymbolExpr::Const(c(1.0, 0.0));
        let a = toeplitz_quadrature(&m, &one, &g, 16).unwrap();
        let id = OperatorMatrix::identity(&m, 16).unwrap();
        assert!((a.entries - id.entries.clone()).norm() < 1e-12);
        let b = toeplitz_radial(&m, &one, 16).unwrap();
        assert!((b.entries - id.entries).norm() < 1e-14);
    }

    #[test]
    fn log_abs_eigenvalues_on_punctured_disc() {
        let d = DomainSpec::punctured_disc(1.0).unwrap();
        let m = KernelModel::analytic(d, 40);
        let t = toeplitz_radial(&m, &SymbolExpr::LogAbs, 40).unwrap();
        // oracle: 2(n+1) ∫_0^1 ρ^{2n+1} log ρ dρ by graded quadrature
        let rule = oracle_rule(&[0.0, 1.0]);
        for (i, &n) in t.exponents.iter().enumerate() {
            let lambda = t.entries[(i, i)].re;
            let quad = 2.0 * (n as f64 + 1.0) * rule.integrate(|x| x.powi(2 * n + 1) * x.ln());
            assert!((lambda - quad).abs() < 1e-10, "n={n}");
            assert!((lambda + 1.0 / (2.0 * n as f64 + 2.0)).abs() < 1e-14);
        }
        let diag = t.diagonal();
        assert!(diag.windows(2).all(|w| w[1].re > w[0].re && w[1].re < 0.0));
    }

    /// Composite Gauss rule with panels graded toward 0 and fine uniform
    /// panels between the given breaks.
    fn oracle_rule(breaks: &[f64]) -> RadialRule {
        let mut all = vec![breaks[0]];
        for w in breaks.windows(2) {
            let lo = if w[0] == 0.0 {
                all.extend((1..12).rev().map(|k| w[1] * 0.1f64.powi(k)));
                w[1] * 0.1
            } else {
                w[0]
            };
            all.extend((1..=40).map(|k| lo + (w[1] - lo) * k as f64 / 40.0));
        }
        RadialRule::composite(&all, 20)
    }

    #[test]
    fn radial_moments_match_one_dimensional_oracle() {
        let d = DomainSpec::annulus(0.05, 0.9).unwrap();
        let m = KernelModel::analytic(d, 10);
        for (s, kinks) in [
            ("log_abs", vec![]),
            ("abs_power:1.5", vec![]),
            ("clamp:log_abs:1.2", vec![(-1.2f64).exp()]),
            ("const:0.5-2i", vec![]),
            ("clamp:abs_power:-1:4", vec![0.25]),
        ] {
            let phi: SymbolExpr = s.parse().unwrap();
            let mut breaks = vec![0.05];
            breaks.extend(kinks);
            breaks.push(0.9);
            let rule = oracle_rule(&breaks);
            let a = toeplitz_radial(&m, &phi, 21).unwrap();
            assert_eq!(a.off_diagonal_max(), 0.0);
            for (i, &n) in a.exponents.iter().enumerate() {
                let re = rule.integrate(|x| phi.eval(Complex64::new(x, 0.0)).re * x.powi(2 * n + 1));
                let im = rule.integrate(|x| phi.eval(Complex64::new(x, 0.0)).im * x.powi(2 * n + 1));
                let oracle = Complex64::new(re, im) * (2.0 * std::f64::consts::PI) / m.norms_sq[i];
                let err = (a.entries[(i, i)] - oracle).norm();
                assert!(err < 1e-10 * (1.0 + oracle.norm()), "{s} n={n}: {err}");
            }
        }
    }

    #[test]
    fn radial_moments_match_two_dimensional_quadrature() {
        let d = DomainSpec::annulus(0.05, 0.9).unwrap();
        let m = KernelModel::analytic(d, 10);
        let g = build_graded_grid(d, Resolution::default()).unwrap();
        for s in ["log_abs", "abs_power:1.5", "const:0.5-2i"] {
            let phi: SymbolExpr = s.parse().unwrap();
            let a = toeplitz_radial(&m, &phi, 21).unwrap();
            let b = toeplitz_quadrature(&m, &phi, &g, 21).unwrap();
            let err = (a.entries - b.entries).camax();
            assert!(err < 1e-9, "{s}: {err}");
        }
    }

    #[test]
    fn word_with_identity_factor_equals_single() {
        let d = DomainSpec::unit_disc();
        let m = KernelModel::analytic(d, 24);
        let res = Resolution::default();
        let phi: SymbolExpr = "green:0.3+0i".parse().unwrap();
        let single = word_matrix(&OperatorWord::single(phi.clone()), &m, res, 24).unwrap();
        let g = build_star_grid(d, c(0.3, 0.0), res).unwrap();
        let direct = toeplitz_quadrature(&m, &phi, &g, 24).unwrap();
        assert_eq!(single, direct);
        let w: OperatorWord = "const:1,green:0.3+0i".parse().unwrap();
        let with_one = word_matrix(&w, &m, res, 24).unwrap();
        assert!((with_one.entries - direct.entries).camax() < 1e-12);
    }

    #[test]
    fn radial_products_commute_green_products_do_not() {
        let d = DomainSpec::unit_disc();
        let m = KernelModel::analytic(d, 32);
        let res = Resolution::default();
        let mat = |s: &str| word_matrix(&s.parse().unwrap(), &m, res, 32).unwrap();
        let (p, q) = (mat("log_abs"), mat("abs_power:2"));
        assert_eq!(p.commutator(&q).unwrap().entries.camax(), 0.0);
        let (a, b) = (mat("green:0.3+0i"), mat("green:-0.2+0.4i"));
        assert!(a.commutator(&b).unwrap().entries.camax() > 1e-4);
        assert!(mat("clamp:log_abs:5").off_diagonal_max() == 0.0);
    }

    #[test]
    fn norm_bounded_by_sup_norm() {
        let d = DomainSpec::unit_disc();
        let m = KernelModel::analytic(d, 32);
        let w: OperatorWord = "clamp:green:0.3+0i:2,clamp:log_abs:5;const:0.5".parse().unwrap();
        let t = word_matrix(&w, &m, Resolution::default(), 32).unwrap();
        assert!(t.norm() <= w.norm_bound(&d) + TRUNCATION_SLACK);
    }

    #[test]
    fn singular_symbol_on_plain_grid_is_reported() {
        let d = DomainSpec::unit_disc();
        let m = KernelModel::analytic(d, 8);
        // a grid with a node exactly at the pole
        let g = build_graded_grid(d, Resolution::default()).unwrap();
        let a = g.nodes[0];
        let err = toeplitz_quadrature(&m, &SymbolExpr::Green(a), &g, 4).unwrap_err();
        assert!(matches!(err, BlabError::Quadrature(_)));
    }
}
