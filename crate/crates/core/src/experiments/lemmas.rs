use rand::Rng;

use crate::experiments::common::{random_point, Settings};
use crate::experiments::report::{ConvergenceReport, Criterion};
use crate::geometry::DomainSpec;
use crate::kernels::{normalized_kernel, KernelModel};
use crate::operators::{
    berezin_of_operator, berezin_of_symbol, compressed_operator, green_berezin_closed_form, mobius,
    poisson_kernel, poisson_kernel_real_part, poisson_square_mean, poisson_square_mean_closed_form,
    restriction_adjoint_apply, word_matrix, OperatorWord, SymbolExpr,
};
use crate::quadrature::{build_polar_grid, grid_for_singularities, Resolution};
use crate::{BlabError, Complex64, Result};

/// Parameter points per identity.
pub const LEMMA_POINTS: usize = 20;

/// One identity of the suite: name, tolerance and the deviation function
/// evaluated on a seeded point set.
struct Identity {
    name: &'static str,
    tolerance: f64,
    run: fn(&mut rand_chacha::ChaCha8Rng) -> Result<f64>,
}

fn deviation_max(n: usize, mut f: impl FnMut() -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let d = f()?;
        if d.is_nan() {
            return Ok(f64::NAN);
        }
        worst = worst.max(d);
    }
    Ok(worst)
}

fn lemma1(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    deviation_max(LEMMA_POINTS, || {
        let s = rng.random_range(0.05..0.95);
        let z = random_point(rng, 0.95);
        Ok((poisson_square_mean(s, z)? - poisson_square_mean_closed_form(s, z)).abs())
    })
}

fn poisson_forms(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    deviation_max(LEMMA_POINTS, || {
        let z = random_point(rng, 0.95);
        let zeta = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        Ok((poisson_kernel(z, zeta)? - poisson_kernel_real_part(z, zeta)?).abs())
    })
}

fn green_quadrature(a: Complex64, z: Complex64) -> Result<f64> {
    let d = DomainSpec::unit_disc();
    let m = KernelModel::analytic(d, 0);
    let phi = SymbolExpr::Green(a);
    let g = grid_for_singularities(d, &phi.singular_points(), Resolution::default())?;
    Ok(berezin_of_symbol(&m, &phi, &g, z)?.re)
}

fn lemma2(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    deviation_max(LEMMA_POINTS, || {
        let a = random_point(rng, 0.7);
        let z = random_point(rng, 0.8);
        Ok((green_quadrature(a, z)? - green_berezin_closed_form(a, z)).abs())
    })
}

fn mobius_step(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    deviation_max(LEMMA_POINTS, || {
        let a = random_point(rng, 0.7);
        let z = random_point(rng, 0.8);
        let zero = Complex64::new(0.0, 0.0);
        Ok((green_quadrature(a, z)? - green_quadrature(zero, mobius(a, z))?).abs())
    })
}

/// `R_U^* K_z^U = K_z^Ω`, compared coefficientwise in the Ω basis.
fn adjoint(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    let m_o = KernelModel::analytic(DomainSpec::unit_disc(), 40);
    deviation_max(LEMMA_POINTS, || {
        let rho = rng.random_range(0.6..0.9);
        let u = DomainSpec::disc(rho)?;
        let m_u = KernelModel::analytic(u, 40);
        let g = build_polar_grid(u, 64, 256)?;
        let z = random_point(rng, 0.7 * rho);
        let coeffs = restriction_adjoint_apply(&m_o, &g, |w| m_u.eval(w, z).unwrap_or_default(), 30)?;
        Ok(coeffs.iter().enumerate().map(|(i, v)| (v - m_o.basis(i, z).conj()).norm()).fold(0.0, f64::max))
    })
}

/// `‖R^* k_z^U − k_z^Ω‖ = |1 − √(K^Ω(z,z)/K^U(z,z))|`.
fn restriction(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    let m_o = KernelModel::analytic(DomainSpec::unit_disc(), 64);
    deviation_max(LEMMA_POINTS, || {
        let rho = rng.random_range(0.6..0.9);
        let u = DomainSpec::disc(rho)?;
        let m_u = KernelModel::analytic(u, 64);
        let g = build_polar_grid(u, 64, 256)?;
        let z = random_point(rng, 0.5 * rho);
        let ku = normalized_kernel(&m_u, z)?;
        let ko = normalized_kernel(&m_o, z)?;
        let a = restriction_adjoint_apply(&m_o, &g, |w| ku.eval(w).unwrap_or_default(), 60)?;
        let dist = a.iter().zip(ko.truncated(60)).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let exact = (1.0 - (m_o.diag(z)? / m_u.diag(z)?).sqrt()).abs();
        Ok((dist - exact).abs())
    })
}

/// `B_U(R_U T R_U^*)(z) = B_Ω T(z) K^Ω(z,z)/K^U(z,z)` with `T = T_{green(0.3)}`.
fn series(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    let omega = DomainSpec::unit_disc();
    let u = DomainSpec::disc(0.9)?;
    let (m_o, m_u) = (KernelModel::analytic(omega, 48), KernelModel::analytic(u, 48));
    let word = OperatorWord::single(SymbolExpr::Green(Complex64::new(0.3, 0.0)));
    let t = word_matrix(&word, &m_o, Resolution::default(), 48)?;
    let g = build_polar_grid(u, 64, 256)?;
    let ct = compressed_operator(&t, &m_o, &m_u, &g, 48)?;
    deviation_max(LEMMA_POINTS, || {
        let z = random_point(rng, 0.5);
        let lhs = berezin_of_operator(&ct, &m_u, z)?;
        let rhs = berezin_of_operator(&t, &m_o, z)? * m_o.diag(z)? / m_u.diag(z)?;
        Ok((lhs - rhs).norm())
    })
}

/// `‖k_z − k_w‖² = 2 − 2 Re⟨k_z, k_w⟩`: left side by quadrature, right
/// side from kernel values.
fn eqn0(rng: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    let d = DomainSpec::unit_disc();
    let m = KernelModel::analytic(d, 0);
    let g = build_polar_grid(d, 64, 256)?;
    deviation_max(LEMMA_POINTS, || {
        let z = random_point(rng, 0.7);
        let w = random_point(rng, 0.7);
        let (kz, kw) = (normalized_kernel(&m, z)?, normalized_kernel(&m, w)?);
        let lhs = g.integrate_real(|x| (kz.eval(x).unwrap_or_default() - kw.eval(x).unwrap_or_default()).norm_sqr())?;
        let inner = m.eval(w, z)? / (m.diag(z)? * m.diag(w)?).sqrt();
        Ok((lhs - (2.0 - 2.0 * inner.re)).abs())
    })
}

const SUITE: [Identity; 8] = [
    Identity { name: "lemma1", tolerance: 1e-10, run: lemma1 },
    Identity { name: "poisson_forms", tolerance: 1e-10, run: poisson_forms },
    Identity { name: "lemma2", tolerance: 1e-6, run: lemma2 },
    Identity { name: "mobius_step", tolerance: 1e-6, run: mobius_step },
    Identity { name: "adjoint", tolerance: 1e-8, run: adjoint },
    Identity { name: "restriction", tolerance: 1e-8, run: restriction },
    Identity { name: "series", tolerance: 1e-6, run: series },
    Identity { name: "eqn0", tolerance: 1e-8, run: eqn0 },
];

/// Evaluates every identity at seeded pseudo-random parameters; one row per
/// identity with its maximum absolute deviation and tolerance. Each identity
/// draws from its own stream so rows do not depend on each other.
pub fn run_lemma_suite(s: &Settings) -> Result<ConvergenceReport> {
    let columns = ["deviation", "tolerance", "points"].map(String::from).to_vec();
    let mut report = ConvergenceReport::new("lemma_suite", "identities at seeded points", columns);
    for (i, id) in SUITE.iter().enumerate() {
        let mut rng = s.rng();
        rng.set_stream(i as u64);
        let dev = (id.run)(&mut rng).map_err(|e| BlabError::Quadrature(format!("{}: {e}", id.name)))?;
        report.push_row(id.name, i as f64, vec![dev, id.tolerance, LEMMA_POINTS as f64])?;
    }
    report.criteria = vec![Criterion::BelowOwnTolerance { column: "deviation".into(), tolerance_column: "tolerance".into() }];
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_is_reproducible() {
        let s = Settings::default();
        let a = run_lemma_suite(&s).unwrap();
        assert!(a.passed(), "{:?}", a.verdicts());
        assert_eq!(a.rows.len(), SUITE.len());
        assert_eq!(a.to_csv_string().unwrap(), run_lemma_suite(&s).unwrap().to_csv_string().unwrap());
    }
}
