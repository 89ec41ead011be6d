//! Area quadrature on radial domains.
//!
//! Grids are tensor products of a radial Gauss–Legendre rule (with the polar
//! Jacobian folded into the weights) and an equispaced angular trapezoid
//! rule. Integrands with a logarithmic singularity at the origin or at an
//! interior point use geometrically graded radial panels, optionally in polar
//! coordinates centred at the singular point.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{DomainKind, DomainSpec};
use crate::{par, BlabError, Complex64, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Ratio between consecutive breaks of the graded rules; small enough that
/// `ρ^k log ρ` is integrated to near machine precision with six panels.
pub const GRADING_RATIO: f64 = 0.15;

/// A one-dimensional rule on a radial interval.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialRule {
    pub fn gauss(a: f64, b: f64, n: usize) -> Self {
        Self::composite(&[a, b], n)
    }

    /// Gauss rule of `order` nodes on each panel between consecutive breaks.
    pub fn composite(breaks: &[f64], order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * breaks.len());
        let mut weights = Vec::with_capacity(order * breaks.len());
        for p in breaks.windows(2) {
            let (a, b) = (p[0], p[1]);
            if b <= a {
                continue;
            }
            let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        RadialRule { nodes, weights }
    }

    /// Breaks at `a + (b-a) σ^k` with `σ = GRADING_RATIO`, the last panel
    /// reaching down to `a`.
    pub fn graded_toward_start(a: f64, b: f64, order: usize, panels: usize) -> Self {
        let panels = panels.max(1);
        let mut breaks: Vec<f64> = (0..panels).map(|k| a + (b - a) * GRADING_RATIO.powi(k as i32)).collect();
        breaks.push(a);
        breaks.reverse();
        Self::composite(&breaks, order)
    }

    /// Panels of equal width in `log ρ` between `a > 0` and `b`.
    pub fn geometric(a: f64, b: f64, order: usize, panels: usize) -> Self {
        let panels = panels.max(1);
        let ratio = (b / a).powf(1.0 / panels as f64);
        let mut breaks: Vec<f64> = (0..=panels).map(|k| a * ratio.powi(k as i32)).collect();
        breaks[0] = a;
        breaks[panels] = b;
        Self::composite(&breaks, order)
    }

    /// Mirror image of [`RadialRule::graded_toward_start`].
    pub fn graded_toward_end(a: f64, b: f64, order: usize, panels: usize) -> Self {
        let panels = panels.max(1);
        let mut breaks: Vec<f64> = (0..panels).map(|k| b - (b - a) * GRADING_RATIO.powi(k as i32)).collect();
        breaks.push(b);
        Self::composite(&breaks, order)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Resolution of a graded polar grid: `n_panels` radial panels of
/// `panel_order` Gauss nodes each, times `n_angular` angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub panel_order: usize,
    pub n_panels: usize,
    pub n_angular: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { panel_order: 16, n_panels: 6, n_angular: 256 }
    }
}

impl Resolution {
    /// From the config-level totals; `n_radial` must be a multiple of 16.
    pub fn from_totals(n_radial: usize, n_angular: usize) -> Result<Self> {
        if n_radial < 16 || !n_radial.is_multiple_of(16) || n_angular < 4 {
            return Err(BlabError::InvalidArgument(format!(
                "quadrature resolution needs n_radial a positive multiple of 16 and n_angular ≥ 4, got {n_radial}×{n_angular}"
            )));
        }
        Ok(Resolution { panel_order: 16, n_panels: n_radial / 16, n_angular })
    }

    pub fn n_radial(&self) -> usize {
        self.panel_order * self.n_panels
    }

    /// Doubles both radial and angular resolution (self-convergence checks).
    pub fn refined(&self) -> Self {
        Resolution { panel_order: self.panel_order, n_panels: self.n_panels * 2, n_angular: self.n_angular * 2 }
    }
}

/// Nodes and positive weights approximating `dV` on a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub domain: DomainSpec,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    pub n_radial: usize,
    pub n_angular: usize,
}

const CHUNK: usize = 2048;

impl QuadratureGrid {
    fn tensor(domain: DomainSpec, radial: &RadialRule, n_angular: usize) -> Result<Self> {
        let dtheta = 2.0 * PI / n_angular as f64;
        let mut nodes = Vec::with_capacity(radial.len() * n_angular);
        let mut weights = Vec::with_capacity(radial.len() * n_angular);
        for (&r, &w) in radial.nodes.iter().zip(&radial.weights) {
            for k in 0..n_angular {
                nodes.push(Complex64::from_polar(r, dtheta * k as f64));
                weights.push(w * r * dtheta);
            }
        }
        let g = QuadratureGrid { domain, nodes, weights, n_radial: radial.len(), n_angular };
        g.check_nodes()?;
        Ok(g)
    }

    fn check_nodes(&self) -> Result<()> {
        match self.nodes.iter().find(|&&z| !self.domain.contains(z)) {
            Some(z) => Err(BlabError::Quadrature(format!("node {z} outside {}", self.domain))),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ_i weights_i · f(nodes_i)`, summed in fixed chunk order.
    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64 + Sync + Send) -> Result<Complex64> {
        let n_chunks = self.len().div_ceil(CHUNK);
        let partial = par::try_map(n_chunks, |c| {
            let mut s = Complex64::new(0.0, 0.0);
            for i in c * CHUNK..((c + 1) * CHUNK).min(self.len()) {
                let v = f(self.nodes[i]);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(BlabError::NonFinite(self.nodes[i]));
                }
                s += v * self.weights[i];
            }
            Ok(s)
        })?;
        Ok(partial.into_iter().sum())
    }

    pub fn integrate_real(&self, f: impl Fn(Complex64) -> f64 + Sync + Send) -> Result<f64> {
        self.integrate(|z| Complex64::new(f(z), 0.0)).map(|v| v.re)
    }

    /// `(Σ_i weights_i |f(nodes_i)|^p)^{1/p}`; a quasi-norm for `p < 1`.
    pub fn lp_norm(&self, f: impl Fn(Complex64) -> Complex64 + Sync + Send, p: f64) -> Result<f64> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(BlabError::InvalidArgument(format!("L^p exponent must be positive, got {p}")));
        }
        let s = self.integrate_real(|z| f(z).norm().powf(p))?;
        Ok(s.powf(1.0 / p))
    }
}

fn check_resolution(n_radial: usize, n_angular: usize) -> Result<()> {
    if n_radial < 2 || n_angular < 4 {
        return Err(BlabError::InvalidArgument(format!(
            "polar grid needs n_radial ≥ 2 and n_angular ≥ 4, got {n_radial}×{n_angular}"
        )));
    }
    Ok(())
}

/// Single Gauss–Legendre panel over `[r_inner, r_outer]` times `n_angular`
/// equispaced angles; exact for `∫ z^a z̄^b dV` when `a + b < n_angular`
/// and `a + b + 1 < 2 n_radial`.
pub fn build_polar_grid(d: DomainSpec, n_radial: usize, n_angular: usize) -> Result<QuadratureGrid> {
    check_resolution(n_radial, n_angular)?;
    QuadratureGrid::tensor(d, &RadialRule::gauss(d.r_inner(), d.r_outer(), n_radial), n_angular)
}

/// Radial panels graded toward the inner edge: dyadic toward the origin for
/// discs, equal in `log ρ` for annuli.
pub fn build_graded_grid(d: DomainSpec, res: Resolution) -> Result<QuadratureGrid> {
    check_resolution(res.n_radial(), res.n_angular)?;
    let radial = match d.kind() {
        DomainKind::Annulus => RadialRule::geometric(d.r_inner(), d.r_outer(), res.panel_order, res.n_panels),
        _ => RadialRule::graded_toward_start(0.0, d.r_outer(), res.panel_order, res.n_panels),
    };
    QuadratureGrid::tensor(d, &radial, res.n_angular)
}

/// Polar grid centred at an interior point `center` of a disc (or punctured
/// disc), with radial panels graded toward the centre. Resolves integrands
/// with a logarithmic singularity at `center`.
pub fn build_star_grid(d: DomainSpec, center: Complex64, res: Resolution) -> Result<QuadratureGrid> {
    check_resolution(res.n_radial(), res.n_angular)?;
    if d.kind() == DomainKind::Annulus {
        return Err(BlabError::Quadrature("star grids are only built on discs".into()));
    }
    let big_r = d.r_outer();
    if center.norm() >= big_r {
        return Err(BlabError::OutsideDomain { z: center, domain: d.to_string() });
    }
    let unit = RadialRule::graded_toward_start(0.0, 1.0, res.panel_order, res.n_panels);
    let dtheta = 2.0 * PI / res.n_angular as f64;
    let mut nodes = Vec::with_capacity(unit.len() * res.n_angular);
    let mut weights = Vec::with_capacity(unit.len() * res.n_angular);
    for k in 0..res.n_angular {
        let u = Complex64::from_polar(1.0, dtheta * k as f64);
        let b = (center.conj() * u).re;
        let reach = -b + (b * b + big_r * big_r - center.norm_sqr()).sqrt();
        for (&s, &w) in unit.nodes.iter().zip(&unit.weights) {
            let t = reach * s;
            nodes.push(center + u * t);
            weights.push(reach * w * t * dtheta);
        }
    }
    let g = QuadratureGrid { domain: d, nodes, weights, n_radial: unit.len(), n_angular: res.n_angular };
    g.check_nodes()?;
    Ok(g)
}

/// A grid suited to integrands with logarithmic singularities at the given
/// points: a star grid around an interior singular point on discs, a graded
/// grid otherwise.
pub fn grid_for_singularities(d: DomainSpec, singular: &[Complex64], res: Resolution) -> Result<QuadratureGrid> {
    let interior: Vec<Complex64> = singular.iter().copied().filter(|&a| a.norm() > 0.0 && d.contains(a)).collect();
    match interior.as_slice() {
        [a] if d.kind() != DomainKind::Annulus => build_star_grid(d, *a, res),
        [] => build_graded_grid(d, res),
        _ => Err(BlabError::Quadrature(format!(
            "no grid resolves {} interior singular points on {d}",
            interior.len()
        ))),
    }
}

/// Grid on which `∫ w^a w̄^b dV` is exact for `|a|, |b| ≤ degree` on discs
/// (one Gauss panel) and accurate to rounding on annuli (Gauss panels of
/// radius ratio at most 2).
pub fn build_moment_grid(d: DomainSpec, degree: usize) -> Result<QuadratureGrid> {
    let order = (degree + 2).max(16);
    let n_angular = (2 * degree + 4).next_multiple_of(4).max(16);
    let radial = match d.kind() {
        DomainKind::Annulus => {
            let panels = (d.r_outer() / d.r_inner()).log2().ceil().max(1.0) as usize;
            RadialRule::geometric(d.r_inner(), d.r_outer(), order, panels)
        }
        _ => RadialRule::gauss(0.0, d.r_outer(), order),
    };
    QuadratureGrid::tensor(d, &radial, n_angular)
}

/// Free-standing form of [`QuadratureGrid::integrate`].
pub fn integrate(g: &QuadratureGrid, f: impl Fn(Complex64) -> Complex64 + Sync + Send) -> Result<Complex64> {
    g.integrate(f)
}

/// Free-standing form of [`QuadratureGrid::lp_norm`].
pub fn lp_norm(g: &QuadratureGrid, f: impl Fn(Complex64) -> Complex64 + Sync + Send, p: f64) -> Result<f64> {
    g.lp_norm(f, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
            // x^{2n-2} integrates to 2/(2n-1)
            let k = 2 * n as i32 - 2;
            let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            assert!((v - 2.0 / (k + 1) as f64).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn area_of_every_grid_kind() {
        let res = Resolution::default();
        let disc = DomainSpec::unit_disc();
        let ann = DomainSpec::annulus(0.25, 1.0).unwrap();
        let grids = [
            build_polar_grid(disc, 32, 64).unwrap(),
            build_polar_grid(ann, 8, 8).unwrap(),
            build_graded_grid(disc, res).unwrap(),
            build_graded_grid(DomainSpec::annulus(1e-3, 1.0).unwrap(), res).unwrap(),
            build_star_grid(disc, Complex64::new(0.3, -0.4), res).unwrap(),
        ];
        for g in &grids {
            assert!(rel(g.total_weight(), g.domain.area()) < 1e-12, "{}", g.domain);
            assert!(g.weights.iter().all(|&w| w > 0.0));
            assert!(g.nodes.iter().all(|&z| g.domain.contains(z)));
        }
    }

    #[test]
    fn integrate_examples() {
        let g = build_polar_grid(DomainSpec::unit_disc(), 16, 32).unwrap();
        let one = g.integrate(|_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(rel(one.re, PI) < 1e-13);
        let zw = g.integrate(|w| w).unwrap();
        assert!(zw.norm() < 1e-14);
        let sq = g.integrate_real(|w| w.norm_sqr()).unwrap();
        assert!(rel(sq, PI / 2.0) < 1e-13);
    }

    #[test]
    fn monomial_moments_exact_below_angular_degree() {
        let d = DomainSpec::annulus(0.4, 1.3).unwrap();
        let g = build_polar_grid(d, 24, 16).unwrap();
        for a in 0..8i32 {
            for b in 0..8i32 {
                if a + b >= 16 {
                    continue;
                }
                let v = g.integrate(|w| w.powi(a) * w.conj().powi(b)).unwrap();
                if a == b {
                    let k = (a + b + 2) as f64;
                    let exact = 2.0 * PI * (1.3f64.powf(k) - 0.4f64.powf(k)) / k;
                    assert!(rel(v.re, exact) < 1e-12 && v.im.abs() < 1e-12 * exact);
                } else {
                    assert!(v.norm() < 1e-13, "a={a} b={b} {v}");
                }
            }
        }
    }

    #[test]
    fn lp_norm_examples() {
        let g = build_polar_grid(DomainSpec::unit_disc(), 16, 16).unwrap();
        let c = Complex64::new(0.6, -0.8);
        assert!(rel(g.lp_norm(|_| c, 2.0).unwrap(), PI.sqrt()) < 1e-13);
        let f = |z: Complex64| Complex64::new((z.norm_sqr() - 1.0) / 2.0, 0.0);
        assert!(rel(g.lp_norm(f, 1.0).unwrap(), PI / 4.0) < 1e-13);
        assert!(g.lp_norm(f, 0.0).is_err());
        // (π/2) log(1/r) for 1/(4|z|²) on A_r
        let r = 0.01;
        let ga = build_graded_grid(DomainSpec::annulus(r, 1.0).unwrap(), Resolution::default()).unwrap();
        let v = ga.lp_norm(|z| Complex64::new(0.25 / z.norm_sqr(), 0.0), 1.0).unwrap();
        assert!(rel(v, PI / 2.0 * (1.0 / r).ln()) < 1e-12);
    }

    #[test]
    fn non_finite_integrand_reported() {
        let g = build_polar_grid(DomainSpec::unit_disc(), 4, 4).unwrap();
        let r = g.integrate(|_| Complex64::new(f64::NAN, 0.0));
        assert!(matches!(r, Err(BlabError::NonFinite(_))));
    }

    #[test]
    fn radial_log_integrals() {
        // ∫_r^1 log ρ dρ = r - r log r - 1
        for r in [0.5, 1e-2, 1e-4] {
            let rule = RadialRule::geometric(r, 1.0, 16, 8);
            let v = rule.integrate(f64::ln);
            assert!((v - (r - r * r.ln() - 1.0)).abs() < 1e-13);
        }
        // ∫_0^1 ρ^{2n+1} log ρ dρ = -1/(2n+2)^2, graded toward 0
        let rule = RadialRule::graded_toward_start(0.0, 1.0, 16, 6);
        assert_eq!(rule.len(), 96);
        for n in 0..3 {
            let v = rule.integrate(|x| x.powi(2 * n + 1) * x.ln());
            let exact = -1.0 / ((2 * n + 2) as f64).powi(2);
            assert!((v - exact).abs() < 1e-10, "n={n} {v} {exact}");
        }
    }

    #[test]
    fn star_grid_resolves_interior_log_singularity() {
        // ∫_D log|w-a| dV = π (|a|² - 1)/2
        let a = Complex64::new(0.3, 0.2);
        let g = build_star_grid(DomainSpec::unit_disc(), a, Resolution::default()).unwrap();
        let v = g.integrate_real(|w| (w - a).norm().ln()).unwrap();
        let exact = PI * (a.norm_sqr() - 1.0) / 2.0;
        assert!((v - exact).abs() < 1e-10, "{v} {exact}");
    }

    #[test]
    fn moment_grid_is_exact_for_basis_products() {
        let d = DomainSpec::disc(0.9).unwrap();
        let g = build_moment_grid(d, 30).unwrap();
        for (a, b) in [(0u32, 0u32), (30, 30), (30, 29), (7, 3)] {
            let v = g.integrate(|w| w.powu(a) * w.conj().powu(b)).unwrap();
            let exact = if a == b { 2.0 * PI * 0.9f64.powi(2 * a as i32 + 2) / (2 * a + 2) as f64 } else { 0.0 };
            assert!((v - Complex64::new(exact, 0.0)).norm() < 1e-14 * exact.max(1.0) * 4.0, "{a} {b} {v} {exact}");
        }
        let d = DomainSpec::annulus(1e-3, 1.0).unwrap();
        let g = build_moment_grid(d, 20).unwrap();
        // ∫ |w|^{-40} dV = 2π (r^{-38} - 1)/38, relative accuracy
        let v = g.integrate_real(|w| w.norm().powi(-40)).unwrap();
        let exact = 2.0 * PI * (1e-3f64.powi(-38) - 1.0) / 38.0;
        assert!((v / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resolution_totals() {
        let r = Resolution::from_totals(96, 256).unwrap();
        assert_eq!((r.panel_order, r.n_panels), (16, 6));
        assert!(Resolution::from_totals(100, 256).is_err());
        assert!(build_polar_grid(DomainSpec::unit_disc(), 1, 8).is_err());
        assert!(build_polar_grid(DomainSpec::unit_disc(), 4, 3).is_err());
    }
}
