use std::f64::consts::PI;

use crate::experiments::common::{model_for, radial_lp, Settings};
use crate::experiments::report::{lp_column, ConvergenceReport, Criterion, SUP_ERROR};
use crate::geometry::{CompactRegion, DomainSpec};
use crate::operators::{berezin_of_radial_symbol, toeplitz_radial, SymbolExpr};
use crate::par;
use crate::quadrature::{build_graded_grid, RadialRule};
use crate::{BlabError, Complex64, Result};

/// Default radius schedules.
pub const PROP1_RADII: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
pub const PROP2_RADII: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
/// Probe point of the limit comparison.
pub const PROBE: f64 = 0.5;
/// Tolerance on the limit value at the probe for `r = 10⁻³`.
pub const PROP1_TOLERANCE: f64 = 1e-2;
/// Tolerance of the exact identities checked along the way.
pub const IDENTITY_TOLERANCE: f64 = 1e-6;
/// Tolerance of the Toeplitz diagonal against its moment oracle.
pub const EIGEN_TOLERANCE: f64 = 1e-10;

/// Pointwise limit `|z|²/4 − 1/(4|z|²)` of `B_{A_r} log|·|` as `r → 0⁺`.
pub fn prop1_limit(z: Complex64) -> f64 {
    let t = z.norm_sqr();
    t / 4.0 - 1.0 / (4.0 * t)
}

/// `B_{𝔻*} log|·|(z) = (|z|² − 1)/2`.
pub fn punctured_log_berezin(z: Complex64) -> f64 {
    (z.norm_sqr() - 1.0) / 2.0
}

/// `‖|z|²/4 − 1/(4|z|²)‖_{L¹(A_r)}`.
pub fn limit_field_l1(r: f64) -> f64 {
    PI / 2.0 * (1.0 / r).ln() - PI * (1.0 - r.powi(4)) / 8.0
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(BlabError::InvalidArgument(format!("radii must lie in (0, 1), got {radii:?}")));
    }
    if !radii.windows(2).all(|w| w[1] < w[0]) {
        return Err(BlabError::InvalidArgument("radius schedule must be strictly decreasing".into()));
    }
    Ok(())
}

fn radius_label(r: f64) -> String {
    format!("r={r:e}")
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// `B_{A_r} log|·|(z)` by direct 2-D quadrature against the annulus kernel.
fn quadrature_berezin(a: DomainSpec, z: Complex64, s: &Settings) -> Result<f64> {
    let m = model_for(a, s.truncation);
    let g = build_graded_grid(a, s.oracle_resolution)?;
    let kzz = m.diag(z)?;
    let phi = SymbolExpr::LogAbs;
    let kernel = |w: Complex64| -> Result<f64> { Ok(m.eval(w, z)?.norm_sqr()) };
    let vals = par::try_map(g.len(), |i| kernel(g.nodes[i]).map(|k| k * phi.eval(g.nodes[i]).re))?;
    Ok(vals.iter().zip(&g.weights).map(|(v, w)| v * w).sum::<f64>() / kzz)
}

/// Proposition 1: `B_{A_r} log|·| → |z|²/4 − 1/(4|z|²)` on compacts as
/// `r → 0⁺`, while `B_{𝔻*} log|·| = (|z|² − 1)/2`.
pub fn run_prop1(radii: &[f64], k: &CompactRegion, s: &Settings) -> Result<ConvergenceReport> {
    check_radii(radii)?;
    let phi = SymbolExpr::LogAbs;
    let dstar = DomainSpec::punctured_disc(1.0)?;
    let probe = Complex64::new(PROBE, 0.0);
    let pts = &k.points;
    let columns = [
        SUP_ERROR,
        "value_at_probe",
        "limit_at_probe",
        "punctured_value",
        "punctured_deviation",
        "rate",
        "max_value",
        "quadrature_check",
    ];
    let mut report = ConvergenceReport::new(
        "prop1",
        format!("annuli A_r, r in {radii:?}, symbol {phi}"),
        columns.map(String::from).to_vec(),
    );
    for &r in radii {
        let a = DomainSpec::annulus(r, 1.0)?;
        if !k.is_inside(&a) {
            return Err(BlabError::CompactNotInside(format!("band not inside {a}")));
        }
        let values = par::try_map(pts.len(), |i| berezin_of_radial_symbol(&a, &phi, pts[i]).map(|v| v.re))?;
        let sup = max_of(values.iter().zip(pts).map(|(v, z)| (v - prop1_limit(*z)).abs()));
        let at_probe = berezin_of_radial_symbol(&a, &phi, probe)?.re;
        let punctured = par::try_map(pts.len(), |i| berezin_of_radial_symbol(&dstar, &phi, pts[i]).map(|v| v.re))?;
        let punctured_dev = max_of(punctured.iter().zip(pts).map(|(v, z)| (v - punctured_log_berezin(*z)).abs()));
        let direct = quadrature_berezin(a, probe, s)?;
        let row = vec![
            sup,
            at_probe,
            prop1_limit(probe),
            berezin_of_radial_symbol(&dstar, &phi, probe)?.re,
            punctured_dev,
            sup * (1.0 / r).ln(),
            max_of(values.iter().copied()),
            (direct - at_probe).abs(),
        ];
        report.push_row(radius_label(r), r, row)?;
    }
    let check_r = if radii.contains(&1e-3) { 1e-3 } else { radii[radii.len() - 1] };
    let tol = s.tolerance.unwrap_or(PROP1_TOLERANCE);
    report.criteria = vec![
        Criterion::NearAt { column: "value_at_probe".into(), index: check_r, target: prop1_limit(probe), tol },
        Criterion::NearAt { column: SUP_ERROR.into(), index: check_r, target: 0.0, tol },
        Criterion::DecreasingTail { column: SUP_ERROR.into(), window: s.tail_window.min(radii.len()) },
        Criterion::AllBelow { column: "max_value".into(), tol: 0.0 },
        Criterion::NearAt { column: "punctured_value".into(), index: check_r, target: punctured_log_berezin(probe), tol: IDENTITY_TOLERANCE },
        Criterion::AllBelow { column: "punctured_deviation".into(), tol: IDENTITY_TOLERANCE },
        Criterion::AllBelow { column: "quadrature_check".into(), tol: IDENTITY_TOLERANCE },
    ];
    Ok(report)
}

/// `⟨φ e_n, e_n⟩` for `φ = log|·|` on `{r < |z| < 1}` by 1-D Gauss
/// quadrature in `t = log ρ`, independent of the closed-form moments.
fn log_moment_oracle(r: f64, n: i32) -> f64 {
    let lo = r.ln();
    let panels = ((-lo / 0.1).ceil() as usize).max(4);
    let breaks: Vec<f64> = (0..=panels).map(|i| lo * (1.0 - i as f64 / panels as f64)).collect();
    let rule = RadialRule::composite(&breaks, 24);
    // ρ^{2n+1} dρ = e^{c t} dt with c = 2n+2, rescaled by its maximum
    let c = 2.0 * n as f64 + 2.0;
    let peak = if c > 0.0 { 0.0 } else { c * lo };
    let num = rule.integrate(|t| t * (c * t - peak).exp());
    let den = rule.integrate(|t| (c * t - peak).exp());
    num / den
}

/// 1-D rule on `[r, 1]` for radial L^p norms: geometric toward `r`, plain
/// Gauss panels up to the outer circle, where the field tends smoothly to 0.
fn norm_rule(r: f64, order: usize) -> RadialRule {
    if r >= 0.5 {
        return RadialRule::composite(&[r, 1.0], order);
    }
    let outer = RadialRule::composite(&[0.5, 0.75, 0.9, 1.0], order);
    let inner = RadialRule::geometric(r, 0.5, order, (((0.5 / r).log10().ceil() as usize) * 3).max(3));
    RadialRule { nodes: [inner.nodes, outer.nodes].concat(), weights: [inner.weights, outer.weights].concat() }
}

/// Proposition 2: `‖E B_{A_r} T_φ^{A_r}‖_{L^p(𝔻*)}` grows without bound as
/// `r → 0⁺` for `φ = log|·|`, while `‖B_{𝔻*} T_φ‖_{L^p(𝔻*)}` is finite.
pub fn run_prop2(radii: &[f64], s: &Settings) -> Result<ConvergenceReport> {
    check_radii(radii)?;
    if s.p_list.is_empty() {
        return Err(BlabError::InvalidArgument("prop2 needs at least one exponent p".into()));
    }
    let phi = SymbolExpr::LogAbs;
    let order = s.lp_resolution.panel_order.max(16);
    let dstar = DomainSpec::punctured_disc(1.0)?;
    let n_eigen = s.truncation.max(2);

    // punctured-disc side, shared by every row
    let dstar_model = model_for(dstar, n_eigen);
    let diag: Vec<f64> = toeplitz_radial(&dstar_model, &phi, n_eigen)?.diagonal().iter().map(|c| c.re).collect();
    let closed_dev = max_of(diag.iter().enumerate().map(|(n, v)| (v + 1.0 / (2.0 * n as f64 + 2.0)).abs()));
    let monotone = diag.windows(2).all(|w| w[1].abs() < w[0].abs()) && diag.iter().all(|v| *v < 0.0);
    let unit = RadialRule::composite(&[0.0, 0.5, 1.0], order);
    let reference: Vec<f64> = {
        let vals: Vec<f64> = unit.nodes.iter().map(|&x| punctured_log_berezin(Complex64::new(x, 0.0))).collect();
        s.p_list.iter().map(|&p| radial_lp(&unit.nodes, &unit.weights, &vals, p)).collect()
    };
    let probe_radii: Vec<f64> = (1..=40).map(|i| i as f64 / 41.0).collect();
    let punctured_dev = max_of(
        par::try_map(probe_radii.len(), |i| {
            let z = Complex64::new(probe_radii[i], 0.0);
            Ok::<_, BlabError>((berezin_of_radial_symbol(&dstar, &phi, z)?.re - punctured_log_berezin(z)).abs())
        })?,
    );

    let mut columns: Vec<String> = s.p_list.iter().map(|&p| format!("norm_{}", lp_column(p))).collect();
    columns.extend(s.p_list.iter().map(|&p| format!("reference_{}", lp_column(p))));
    columns.extend(
        [
            "limit_field_l1",
            "eigen_oracle_deviation",
            "punctured_eigen_deviation",
            "eigen_tail",
            "eigen_monotone",
            "punctured_deviation",
        ]
        .map(String::from),
    );
    let mut report = ConvergenceReport::new("prop2", format!("annuli A_r, r in {radii:?}, symbol {phi}"), columns);

    for &r in radii {
        let a = DomainSpec::annulus(r, 1.0)?;
        let rule = norm_rule(r, order);
        let vals = par::try_map(rule.nodes.len(), |i| {
            berezin_of_radial_symbol(&a, &phi, Complex64::new(rule.nodes[i], 0.0)).map(|v| v.re)
        })?;
        let model = model_for(a, n_eigen);
        let t = toeplitz_radial(&model, &phi, model.basis_len())?;
        let eigen_dev = max_of(
            model.exponents.iter().zip(t.diagonal()).map(|(&n, v)| (v.re - log_moment_oracle(r, n)).abs()),
        );
        let mut row: Vec<f64> = s.p_list.iter().map(|&p| radial_lp(&rule.nodes, &rule.weights, &vals, p)).collect();
        row.extend(&reference);
        row.extend([
            limit_field_l1(r),
            eigen_dev,
            closed_dev,
            diag[diag.len() - 1].abs(),
            if monotone { 1.0 } else { 0.0 },
            punctured_dev,
        ]);
        report.push_row(radius_label(r), r, row)?;
    }

    let first = radii[0];
    let strong = if radii.contains(&1e-3) { 1e-3 } else { radii[radii.len() - 1] };
    let mut criteria = Vec::new();
    for &p in &s.p_list {
        criteria.push(Criterion::Increasing { column: format!("norm_{}", lp_column(p)) });
    }
    if s.p_list.contains(&1.0) {
        let col = format!("norm_{}", lp_column(1.0));
        criteria.push(Criterion::RatioAtLeast { column: col.clone(), numerator: strong, denominator: first, factor: 2.0 });
        criteria.push(Criterion::AboveAt { column: col, index: strong, value: PI / 4.0 });
    }
    criteria.extend([
        Criterion::AllBelow { column: "eigen_oracle_deviation".into(), tol: EIGEN_TOLERANCE },
        Criterion::AllBelow { column: "punctured_eigen_deviation".into(), tol: EIGEN_TOLERANCE },
        Criterion::AllAbove { column: "eigen_monotone".into(), value: 0.5 },
        Criterion::AllBelow { column: "punctured_deviation".into(), tol: IDENTITY_TOLERANCE },
    ]);
    report.criteria = criteria;
    Ok(report)
}
