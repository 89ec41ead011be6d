//! Shared machinery: settings, seeded sampling, truncation-free Berezin
//! fields and L^p error integration over zero-extended fields.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{CompactRegion, DomainKind, DomainSpec, ExhaustionPlan};
use crate::kernels::{normalized_kernel, KernelModel};
use crate::operators::{
    berezin_of_operator, berezin_of_radial_symbol, mobius, word_matrix, OperatorMatrix, OperatorWord, SymbolExpr,
    DEFAULT_TRUNCATION,
};
use crate::par;
use crate::quadrature::{build_graded_grid, grid_for_singularities, QuadratureGrid, Resolution};
use crate::{BlabError, Complex64, Result};

/// Knobs shared by all experiments. Tolerances left `None` take each
/// experiment's default.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Radial band of the compact region; `None` uses the experiment default.
    pub band: Option<(f64, f64)>,
    /// Number of points in the compact region.
    pub points: usize,
    pub p_list: Vec<f64>,
    /// Number of nonnegative basis degrees kept in operator matrices.
    pub truncation: usize,
    /// Grid for Toeplitz matrices of non-radial symbols.
    pub resolution: Resolution,
    /// Grids for L^p integrals.
    pub lp_resolution: Resolution,
    /// Per-point grid of the truncation-free Berezin oracle.
    pub oracle_resolution: Resolution,
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub lp_tolerance: Option<f64>,
    pub tail_window: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            band: None,
            points: 36,
            p_list: vec![1.0, 2.0],
            truncation: DEFAULT_TRUNCATION,
            resolution: Resolution::default(),
            lp_resolution: Resolution { panel_order: 16, n_panels: 4, n_angular: 64 },
            oracle_resolution: Resolution { panel_order: 16, n_panels: 5, n_angular: 96 },
            seed: 0,
            tolerance: None,
            lp_tolerance: None,
            tail_window: 3,
        }
    }
}

impl Settings {
    /// Compact band in `parent` (the settings' band or `default_band`).
    pub fn compact(&self, parent: DomainSpec, default_band: (f64, f64)) -> Result<CompactRegion> {
        let (lo, hi) = self.band.unwrap_or(default_band);
        CompactRegion::band(parent, lo, hi, self.points)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// A uniformly random point of the disc `|z| < radius`.
pub fn random_point(rng: &mut impl Rng, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())
}

/// Basis length covering degrees `|n| < n` (`n` on discs, `2n − 1` on annuli).
pub fn truncation_len(d: &DomainSpec, n: usize) -> usize {
    if d.reaches_origin() {
        n
    } else {
        2 * n - 1
    }
}

/// Analytic kernel model whose basis covers `truncation_len(d, n)`.
pub fn model_for(d: DomainSpec, n: usize) -> KernelModel {
    KernelModel::analytic(d, n.max(1))
}

pub fn describe_plan(plan: &ExhaustionPlan) -> String {
    let first = plan.domains().first().map(|d| d.to_string()).unwrap_or_default();
    let last = plan.domains().last().map(|d| d.to_string()).unwrap_or_default();
    format!("{} [{first} .. {last}] -> {}", plan.name, plan.limit)
}

/// Fails unless the compact region lies in every domain of the plan's tail.
pub fn check_tail(plan: &ExhaustionPlan, k: &CompactRegion, window: usize) -> Result<()> {
    let tail = plan.domains().len().saturating_sub(window);
    for d in &plan.domains()[tail..] {
        if !k.is_inside(d) {
            return Err(BlabError::CompactNotInside(format!("band [{}, {}] not inside {d}", k.r_min, k.r_max)));
        }
    }
    Ok(())
}

/// `K^Ω(z,z)/K^U(z,z)` from two models.
pub fn diag_quotient(m_outer: &KernelModel, m_inner: &KernelModel, z: Complex64) -> Result<f64> {
    Ok(m_outer.diag(z)? / m_inner.diag(z)?)
}

/// `B φ(z)` for the Berezin transform of `T_φ` on a disc of radius `rho_d`,
/// taken against the kernel of the concentric disc of radius
/// `rho_k ≥ rho_d`:
/// `∫_{|w|<ρ_d} φ(w) |K_{ρ_k}(w, z)|² dV(w) / K_{ρ_k}(z, z)`.
///
/// The integral is pulled back through the disc automorphism that sends 0
/// to `z/ρ_d`, which spreads the kernel peak over the whole disc; the
/// symbol's log singularities become the centre of a star grid. No basis
/// truncation is involved, so this is accurate up to the boundary.
pub fn mobius_berezin(rho_d: f64, rho_k: f64, phi: &SymbolExpr, z: Complex64, res: Resolution) -> Result<Complex64> {
    if !(rho_k >= rho_d) {
        return Err(BlabError::InvalidArgument(format!("kernel radius {rho_k} below domain radius {rho_d}")));
    }
    let a = z / rho_d;
    if !(a.norm() < 1.0) {
        return Err(BlabError::OutsideDomain { z, domain: format!("disc:0:{rho_d}") });
    }
    let s = rho_k / rho_d;
    let unit = DomainSpec::unit_disc();
    // singular points pulled back to the unit disc; one at the origin is
    // already resolved by the graded grid
    let centres: Vec<Complex64> = phi
        .singular_points()
        .into_iter()
        .filter(|p| p.norm() < rho_d)
        .map(|p| mobius(a, p / rho_d))
        .filter(|u| u.norm() > 0.0)
        .collect();
    let g = grid_for_singularities(unit, &centres, res)?;
    let one = Complex64::new(1.0, 0.0);
    let kernel = |v: Complex64| {
        let d = Complex64::new(s * s, 0.0) - v * a.conj();
        s * s / (PI * d.norm_sqr())
    };
    let kaa = kernel(a);
    let jac = 1.0 - a.norm_sqr();
    g.integrate(|u| {
        let v = mobius(a, u);
        let weight = if s == 1.0 {
            1.0 / PI
        } else {
            // |K_s(v, a)|² |ψ_a'(u)|² / K_s(a, a)
            let dpsi = jac / (one - a.conj() * u).norm_sqr();
            kernel(v).powi(2) * dpsi * dpsi / kaa
        };
        phi.eval(v * rho_d) * weight
    })
}

/// Coefficient tail `1 − Σ_{n<N} |c_n(z)|²` of the normalized kernel.
fn kernel_tail(m: &KernelModel, z: Complex64, len: usize) -> Result<f64> {
    let k = normalized_kernel(m, z)?;
    Ok(1.0 - k.truncated(len).iter().map(|c| c.norm_sqr()).sum::<f64>())
}

/// Largest coefficient tail at which matrix-path values are trusted.
pub const TAIL_LIMIT: f64 = 1e-6;

/// Berezin transform of an operator word, evaluated through the most
/// accurate route available for the word and domain.
pub enum BerezinOracle {
    /// Single symbol on a disc (kernel disc radius may exceed the domain's).
    Mobius { rho_d: f64, rho_k: f64, phi: SymbolExpr, res: Resolution },
    /// Single radial symbol on a radial domain.
    Radial { domain: DomainSpec, phi: SymbolExpr },
    /// Truncated matrix; points whose kernel tail exceeds [`TAIL_LIMIT`]
    /// are reported as unavailable.
    Matrix { model: KernelModel, matrix: OperatorMatrix },
}

impl BerezinOracle {
    /// Truncation-free route for a single symbol, when one exists.
    fn exact_route(domain: DomainSpec, word: &OperatorWord, s: &Settings) -> Option<Self> {
        let phi = word.as_single()?;
        if domain.kind() != DomainKind::Annulus {
            return Some(BerezinOracle::Mobius {
                rho_d: domain.r_outer(),
                rho_k: domain.r_outer(),
                phi: phi.clone(),
                res: s.oracle_resolution,
            });
        }
        phi.is_radial().then(|| BerezinOracle::Radial { domain, phi: phi.clone() })
    }

    /// Route for `B_Ω T` with `T` the word on `Ω`.
    pub fn for_word(domain: DomainSpec, word: &OperatorWord, s: &Settings) -> Result<Self> {
        if let Some(o) = Self::exact_route(domain, word, s) {
            return Ok(o);
        }
        let model = model_for(domain, s.truncation);
        let matrix = word_matrix(word, &model, s.resolution, truncation_len(&domain, s.truncation))?;
        Ok(BerezinOracle::Matrix { model, matrix })
    }

    /// As [`BerezinOracle::for_word`], reusing an already assembled matrix.
    pub fn with_matrix(domain: DomainSpec, word: &OperatorWord, model: KernelModel, matrix: OperatorMatrix, s: &Settings) -> Self {
        Self::exact_route(domain, word, s).unwrap_or(BerezinOracle::Matrix { model, matrix })
    }

    /// `None` when the value cannot be trusted at `z`.
    pub fn eval(&self, z: Complex64) -> Result<Option<Complex64>> {
        match self {
            BerezinOracle::Mobius { rho_d, rho_k, phi, res } => mobius_berezin(*rho_d, *rho_k, phi, z, *res).map(Some),
            BerezinOracle::Radial { domain, phi } => berezin_of_radial_symbol(domain, phi, z).map(Some),
            BerezinOracle::Matrix { model, matrix } => {
                if kernel_tail(model, z, matrix.dim())? > TAIL_LIMIT {
                    return Ok(None);
                }
                berezin_of_operator(matrix, model, z).map(Some)
            }
        }
    }
}

/// Grids covering `outer ∖ inner` for concentric radial domains.
pub fn difference_grids(outer: &DomainSpec, inner: &DomainSpec, res: Resolution) -> Result<Vec<QuadratureGrid>> {
    let mut out = Vec::new();
    if inner.r_inner() > outer.r_inner() {
        let piece = if outer.r_inner() == 0.0 {
            DomainSpec::punctured_disc(inner.r_inner())?
        } else {
            DomainSpec::annulus(outer.r_inner(), inner.r_inner())?
        };
        out.push(build_graded_grid(piece, res)?);
    }
    if inner.r_outer() < outer.r_outer() {
        out.push(build_graded_grid(DomainSpec::annulus(inner.r_outer(), outer.r_outer())?, res)?);
    }
    Ok(out)
}

/// L^p norms, one per `p`, of a field given on the nodes of several grids.
/// `f` returns `None` where its value is unavailable; those nodes are left
/// out and their total weight is returned alongside.
pub fn lp_norms(
    grids: &[QuadratureGrid],
    p_list: &[f64],
    f: impl Fn(Complex64) -> Result<Option<f64>> + Sync + Send,
) -> Result<(Vec<f64>, f64)> {
    let mut sums = vec![0.0; p_list.len()];
    let mut excluded = 0.0;
    for g in grids {
        let values = par::try_map(g.len(), |i| f(g.nodes[i]))?;
        for (v, w) in values.iter().zip(&g.weights) {
            match v {
                Some(v) => {
                    for (s, p) in sums.iter_mut().zip(p_list) {
                        *s += w * v.powf(*p);
                    }
                }
                None => excluded += w,
            }
        }
    }
    Ok((sums.iter().zip(p_list).map(|(s, p)| s.powf(1.0 / p)).collect(), excluded))
}

/// `(2π ∫ |f(ρ)|^p ρ dρ)^{1/p}` for a radial field on a composite rule.
pub fn radial_lp(nodes: &[f64], weights: &[f64], values: &[f64], p: f64) -> f64 {
    let s: f64 = nodes.iter().zip(weights).zip(values).map(|((r, w), v)| w * r * v.abs().powf(p)).sum();
    (2.0 * PI * s).powf(1.0 / p)
}
