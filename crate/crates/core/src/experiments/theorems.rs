use nalgebra::DVector;

use crate::experiments::common::{
    check_tail, describe_plan, diag_quotient, difference_grids, lp_norms, model_for, radial_lp, truncation_len,
    BerezinOracle, Settings,
};
use crate::experiments::report::{lp_column, ConvergenceReport, Criterion, SUP_ERROR};
use crate::geometry::{CompactRegion, Direction, DomainKind, DomainSpec, ExhaustionPlan};
use crate::kernels::{normalized_kernel, KernelModel};
use crate::operators::{
    berezin_of_operator, berezin_of_radial_symbol, compressed_operator, expanded_operator, restriction_matrix,
    word_matrix, OperatorMatrix, OperatorWord, SymbolExpr,
};
use crate::par;
use crate::quadrature::{build_graded_grid, build_moment_grid, RadialRule};
use crate::{BlabError, Complex64, Result};

/// Default final sup tolerance for Theorems 1 and 2 and the L^p tolerance.
pub const THEOREM12_TOLERANCE: f64 = 1e-3;
/// Default final sup tolerance for Theorem 3.
pub const THEOREM3_TOLERANCE: f64 = 1e-2;
/// Agreement required between the two Theorem 1 computation paths.
pub const PATH_AGREEMENT: f64 = 1e-6;
/// Representation-independence tolerance.
pub const REPRESENTATION_TOLERANCE: f64 = 1e-8;
/// Default final tolerance of the truncated-symbol corollary.
pub const COROLLARY_TOLERANCE: f64 = 0.05;

fn require_direction(plan: &ExhaustionPlan, dir: Direction, what: &str) -> Result<()> {
    if plan.direction != dir {
        return Err(BlabError::InvalidArgument(format!("{what} needs a {dir:?} exhaustion, got {}", plan.name)));
    }
    Ok(())
}

fn lp_columns(s: &Settings) -> Vec<String> {
    s.p_list.iter().map(|&p| lp_column(p)).collect()
}

fn lp_criteria(s: &Settings, tol: f64) -> Vec<Criterion> {
    s.p_list.iter().map(|&p| Criterion::FinalBelow { column: lp_column(p), tol }).collect()
}

/// `2 Π‖φ‖_∞` summed over the terms, when finite.
fn a_priori_bound(word: &OperatorWord, d: &DomainSpec) -> Option<f64> {
    let b = 2.0 * word.norm_bound(d);
    b.is_finite().then_some(b)
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// Berezin values of a matrix at the points of `pts` inside its domain.
fn berezin_on(mat: &OperatorMatrix, m: &KernelModel, pts: &[Complex64]) -> Result<Vec<Option<Complex64>>> {
    par::try_map(pts.len(), |i| {
        if m.domain.contains(pts[i]) {
            berezin_of_operator(mat, m, pts[i]).map(Some)
        } else {
            Ok(None)
        }
    })
}

/// `max_i |a_i − b_i|` over points where both are present.
fn sup_diff(a: &[Option<Complex64>], b: &[Option<Complex64>]) -> f64 {
    max_abs(a.iter().zip(b).filter_map(|(x, y)| Some((x.as_ref()? - y.as_ref()?).norm())))
}

fn coverage(values: &[Option<Complex64>]) -> f64 {
    values.iter().filter(|v| v.is_some()).count() as f64 / values.len().max(1) as f64
}

/// Theorem 1: `B_{Ω_j}(R_{Ω_j} T R_{Ω_j}^*) → B_Ω T` for an increasing plan.
///
/// Path (i) compresses the matrix of `T` with quadrature restriction
/// matrices; path (ii) uses `B_Ω T(z) K^Ω(z,z)/K^{Ω_j}(z,z)`. The sup error
/// column is path (i); the L^p columns integrate the zero-extended field of
/// path (ii) over `Ω` against a truncation-free value of `B_Ω T`.
pub fn run_theorem1(plan: &ExhaustionPlan, word: &OperatorWord, k: &CompactRegion, s: &Settings) -> Result<ConvergenceReport> {
    require_direction(plan, Direction::Increasing, "theorem1")?;
    check_tail(plan, k, s.tail_window)?;
    let omega = plan.limit;
    let n = s.truncation;
    let m_omega = model_for(omega, n);
    let t = word_matrix(word, &m_omega, s.resolution, truncation_len(&omega, n))?;
    let target = berezin_on(&t, &m_omega, &k.points)?;
    let oracle = BerezinOracle::with_matrix(omega, word, m_omega.clone(), t.clone(), s);

    let mut columns = vec![SUP_ERROR.to_string()];
    columns.extend(lp_columns(s));
    columns.extend(["sup_error_ratio_path", "path_discrepancy", "coverage", "lp_excluded_measure"].map(String::from));
    let mut report = ConvergenceReport::new("theorem1", describe_plan(plan), columns);

    for (j, u) in plan.iter() {
        let m_u = model_for(*u, n);
        let g_u = build_moment_grid(*u, n + 1)?;
        let c = compressed_operator(&t, &m_omega, &m_u, &g_u, truncation_len(u, n))?;
        let path_i = berezin_on(&c, &m_u, &k.points)?;
        let path_ii = par::try_map(k.points.len(), |i| {
            let z = k.points[i];
            match target[i] {
                Some(b) if u.contains(z) => Ok::<_, BlabError>(Some(b * diag_quotient(&m_omega, &m_u, z)?)),
                _ => Ok(None),
            }
        })?;
        let mut grids = vec![build_graded_grid(*u, s.lp_resolution)?];
        grids.extend(difference_grids(&omega, u, s.lp_resolution)?);
        let (lp, excluded) = lp_norms(&grids, &s.p_list, |z| {
            let Some(b) = oracle.eval(z)? else { return Ok(None) };
            if u.contains(z) {
                Ok(Some(b.norm() * (1.0 - diag_quotient(&m_omega, &m_u, z)?).abs()))
            } else {
                Ok(Some(b.norm()))
            }
        })?;
        let mut row = vec![sup_diff(&path_i, &target)];
        row.extend(lp);
        row.extend([sup_diff(&path_ii, &target), sup_diff(&path_i, &path_ii), coverage(&path_i), excluded]);
        report.push_row(format!("j={j}"), j as f64, row)?;
    }

    let tol = s.tolerance.unwrap_or(THEOREM12_TOLERANCE);
    report.criteria = vec![
        Criterion::DecreasingTail { column: SUP_ERROR.into(), window: s.tail_window },
        Criterion::FinalBelow { column: SUP_ERROR.into(), tol },
        Criterion::AllBelow { column: "path_discrepancy".into(), tol: PATH_AGREEMENT },
    ];
    report.criteria.extend(lp_criteria(s, s.lp_tolerance.unwrap_or(THEOREM12_TOLERANCE)));
    if let Some(b) = a_priori_bound(word, &omega) {
        report.criteria.push(Criterion::AllBelow { column: SUP_ERROR.into(), tol: b });
    }
    Ok(report)
}

/// Theorem 2: `B_{Ω_j}((R^{Ω_j}_Ω)^* T R^{Ω_j}_Ω) → B_Ω T` for a decreasing
/// plan, after checking numerically that `K^{Ω_j}(z,z) → K^Ω(z,z)`.
pub fn run_theorem2(plan: &ExhaustionPlan, word: &OperatorWord, k: &CompactRegion, s: &Settings) -> Result<ConvergenceReport> {
    require_direction(plan, Direction::Decreasing, "theorem2")?;
    let omega = plan.limit;
    if !k.is_inside(&omega) {
        return Err(BlabError::CompactNotInside(format!("band not inside {omega}")));
    }
    let n = s.truncation;
    let m_omega = model_for(omega, n);
    let len_omega = truncation_len(&omega, n);
    let pts = &k.points;
    // the hypothesis, checked before anything else
    let probe = *pts.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("nonempty region");
    let models: Vec<KernelModel> = plan.domains().iter().map(|d| model_for(*d, n)).collect();
    let gaps: Vec<f64> = models
        .iter()
        .map(|m| {
            let v = pts.iter().map(|&z| Ok((m_omega.diag(z)? - m.diag(z)?).abs() / m_omega.diag(z)?));
            v.collect::<Result<Vec<f64>>>().map(max_abs)
        })
        .collect::<Result<_>>()?;
    if !gaps.windows(2).all(|w| w[1] <= w[0]) || gaps.last() >= gaps.first() {
        return Err(BlabError::Hypothesis(format!(
            "K^(Ω_j)(z,z) does not approach K^Ω(z,z) along {}: relative gaps {gaps:?}",
            plan.name
        )));
    }

    let t = word_matrix(word, &m_omega, s.resolution, len_omega)?;
    let target = berezin_on(&t, &m_omega, pts)?;
    let oracle = BerezinOracle::with_matrix(omega, word, m_omega.clone(), t.clone(), s);
    let g_omega = build_moment_grid(omega, n + 1)?;
    let lp_grid = build_graded_grid(omega, s.lp_resolution)?;

    let mut columns = vec![SUP_ERROR.to_string()];
    columns.extend(lp_columns(s));
    columns.extend(
        ["kernel_diag_at_probe", "hypothesis_gap", "l2conv", "oracle_discrepancy", "lp_excluded_measure"]
            .map(String::from),
    );
    let mut report = ConvergenceReport::new("theorem2", describe_plan(plan), columns);

    for (((j, d), m_j), gap) in plan.iter().zip(&models).zip(&gaps) {
        let len_j = truncation_len(d, n);
        let e = expanded_operator(&t, &m_omega, &g_omega, m_j, len_j)?;
        let values = berezin_on(&e, m_j, pts)?;
        // ‖R k_z^{Ω_j} − k_z^Ω‖ through Ω-basis coefficients
        let r = restriction_matrix(m_j, &m_omega, &g_omega, len_j, len_omega)?;
        let l2 = par::try_map(pts.len(), |i| {
            let cj = DVector::from_column_slice(normalized_kernel(m_j, pts[i])?.truncated(len_j));
            let co = DVector::from_column_slice(normalized_kernel(&m_omega, pts[i])?.truncated(len_omega));
            Ok::<_, BlabError>((&r * cj - co).norm())
        })?;
        let sandwich_oracle = match (word.as_single(), omega.kind(), d.kind()) {
            (Some(phi), k1, k2) if k1 != DomainKind::Annulus && k2 != DomainKind::Annulus => BerezinOracle::Mobius {
                rho_d: omega.r_outer(),
                rho_k: d.r_outer(),
                phi: phi.clone(),
                res: s.oracle_resolution,
            },
            _ => BerezinOracle::Matrix { model: m_j.clone(), matrix: e.clone() },
        };
        let oracle_values = par::try_map(pts.len(), |i| sandwich_oracle.eval(pts[i]))?;
        let (lp, excluded) = lp_norms(std::slice::from_ref(&lp_grid), &s.p_list, |z| {
            match (sandwich_oracle.eval(z)?, oracle.eval(z)?) {
                (Some(a), Some(b)) => Ok(Some((a - b).norm())),
                _ => Ok(None),
            }
        })?;
        let mut row = vec![sup_diff(&values, &target)];
        row.extend(lp);
        row.extend([m_j.diag(probe)?, *gap, max_abs(l2), sup_diff(&values, &oracle_values), excluded]);
        report.push_row(format!("j={j}"), j as f64, row)?;
    }

    let tol = s.tolerance.unwrap_or(THEOREM12_TOLERANCE);
    report.criteria = vec![
        Criterion::Increasing { column: "kernel_diag_at_probe".into() },
        Criterion::DecreasingTail { column: SUP_ERROR.into(), window: s.tail_window },
        Criterion::FinalBelow { column: SUP_ERROR.into(), tol },
    ];
    report.criteria.extend(lp_criteria(s, s.lp_tolerance.unwrap_or(THEOREM12_TOLERANCE)));
    if let Some(b) = a_priori_bound(word, &omega) {
        report.criteria.push(Criterion::AllBelow { column: SUP_ERROR.into(), tol: b });
    }
    Ok(report)
}

/// Distance from `p` to the closure of a radial domain.
fn distance_to_closure(d: &DomainSpec, p: Complex64) -> f64 {
    let r = p.norm();
    (d.r_inner() - r).max(r - d.r_outer()).max(0.0)
}

/// Symbols admitted by Theorem 3: bounded ones, and symbols whose only
/// singularities are logarithmic points that, for every domain involved,
/// either lie inside it or stay away from its closure. Each restricted
/// Toeplitz operator is then bounded.
pub fn check_admissible(word: &OperatorWord, plan: &ExhaustionPlan) -> Result<()> {
    for phi in word.symbols() {
        if phi.is_bounded() {
            continue;
        }
        let log_type = matches!(phi, SymbolExpr::LogAbs | SymbolExpr::Green(_));
        for d in plan.domains().iter().chain(std::iter::once(&plan.limit)) {
            let ok = log_type
                && phi.singular_points().iter().all(|&p| d.contains(p) || distance_to_closure(d, p) > 0.0);
            if !ok {
                return Err(BlabError::Unbounded(phi.to_string(), d.to_string()));
            }
        }
    }
    Ok(())
}

/// Theorem 3: `B_{Ω_j} T^{Ω_j} → B_Ω T` with `T^{Ω_j}` the same word of
/// Toeplitz operators built on `Ω_j`. Works for either direction; also
/// checks that the word with an identity factor prepended to every product
/// gives the same Berezin values.
pub fn run_theorem3(plan: &ExhaustionPlan, word: &OperatorWord, k: &CompactRegion, s: &Settings) -> Result<ConvergenceReport> {
    check_admissible(word, plan)?;
    check_tail(plan, k, s.tail_window)?;
    let omega = plan.limit;
    if !k.is_inside(&omega) {
        return Err(BlabError::CompactNotInside(format!("band not inside {omega}")));
    }
    let n = s.truncation;
    let m_omega = model_for(omega, n);
    let t = word_matrix(word, &m_omega, s.resolution, truncation_len(&omega, n))?;
    let target = berezin_on(&t, &m_omega, &k.points)?;
    let oracle = BerezinOracle::with_matrix(omega, word, m_omega.clone(), t, s);
    let twin = word.with_identity_factors();

    let mut columns = vec![SUP_ERROR.to_string()];
    columns.extend(lp_columns(s));
    columns.extend(["representation_gap", "coverage", "lp_excluded_measure"].map(String::from));
    let mut report = ConvergenceReport::new("theorem3", describe_plan(plan), columns);

    for (j, d) in plan.iter() {
        let m_j = model_for(*d, n);
        let len_j = truncation_len(d, n);
        let t_j = word_matrix(word, &m_j, s.resolution, len_j)?;
        let values = berezin_on(&t_j, &m_j, &k.points)?;
        let twin_values = berezin_on(&word_matrix(&twin, &m_j, s.resolution, len_j)?, &m_j, &k.points)?;
        let field = BerezinOracle::with_matrix(*d, word, m_j, t_j, s);
        let (lp, excluded) = match plan.direction {
            Direction::Increasing => {
                let mut grids = vec![build_graded_grid(*d, s.lp_resolution)?];
                grids.extend(difference_grids(&omega, d, s.lp_resolution)?);
                lp_norms(&grids, &s.p_list, |z| {
                    let Some(b) = oracle.eval(z)? else { return Ok(None) };
                    if !d.contains(z) {
                        return Ok(Some(b.norm()));
                    }
                    Ok(field.eval(z)?.map(|a| (a - b).norm()))
                })?
            }
            Direction::Decreasing => {
                lp_norms(&[build_graded_grid(omega, s.lp_resolution)?], &s.p_list, |z| {
                    match (field.eval(z)?, oracle.eval(z)?) {
                        (Some(a), Some(b)) => Ok(Some((a - b).norm())),
                        _ => Ok(None),
                    }
                })?
            }
        };
        let mut row = vec![sup_diff(&values, &target)];
        row.extend(lp);
        row.extend([sup_diff(&values, &twin_values), coverage(&values), excluded]);
        report.push_row(format!("j={j}"), j as f64, row)?;
    }

    report.criteria = vec![
        Criterion::DecreasingTail { column: SUP_ERROR.into(), window: s.tail_window },
        Criterion::FinalBelow { column: SUP_ERROR.into(), tol: s.tolerance.unwrap_or(THEOREM3_TOLERANCE) },
        Criterion::ShrinksBy { column: SUP_ERROR.into(), step: 2, factor: 0.5 },
        Criterion::AllBelow { column: "representation_gap".into(), tol: REPRESENTATION_TOLERANCE },
    ];
    if let Some(b) = a_priori_bound(word, &omega) {
        report.criteria.push(Criterion::AllBelow { column: SUP_ERROR.into(), tol: b });
    }
    Ok(report)
}

/// `sup_K |B_{Ω_j} φ − B φ|` with `B φ` given on the points of `K`.
fn radial_sup(d: &DomainSpec, phi: &SymbolExpr, pts: &[Complex64], target: &[Complex64]) -> Result<f64> {
    let v = par::try_map(pts.len(), |i| Ok::<_, BlabError>((berezin_of_radial_symbol(d, phi, pts[i])? - target[i]).norm()))?;
    Ok(max_abs(v))
}

/// Truncated-symbol corollary for a radial (possibly unbounded) symbol on
/// an increasing radial plan: for each clamp level `k` pick the first index
/// `j_k` (not before `j_{k−1}`) with
/// `sup_K |B_{Ω_j} φ_k − B_Ω φ_k| ≤ 1/k`, then report
/// `sup_K |B_{Ω_{j_k}} φ_k − B_Ω φ|`.
pub fn run_corollary_truncation(
    plan: &ExhaustionPlan,
    phi: &SymbolExpr,
    levels: &[f64],
    k: &CompactRegion,
    s: &Settings,
) -> Result<ConvergenceReport> {
    require_direction(plan, Direction::Increasing, "corollary_truncation")?;
    if !phi.is_radial() {
        return Err(BlabError::InvalidArgument(format!("the truncation experiment needs a radial symbol, got {phi}")));
    }
    if levels.is_empty() || levels.iter().any(|&l| !(l > 0.0)) {
        return Err(BlabError::InvalidArgument("clamp levels must be positive".into()));
    }
    let omega = plan.limit;
    let pts = &k.points;
    let target = par::try_map(pts.len(), |i| berezin_of_radial_symbol(&omega, phi, pts[i]))?;

    let mut columns = vec![SUP_ERROR.to_string()];
    columns.extend(lp_columns(s));
    columns.extend(["j_k", "selection_error", "clamp_gap"].map(String::from));
    let mut report = ConvergenceReport::new("corollary_truncation", format!("{} with {phi}", describe_plan(plan)), columns);

    let mut start = 0;
    for &level in levels {
        let clamped = SymbolExpr::Clamp(Box::new(phi.clone()), level);
        let target_k = par::try_map(pts.len(), |i| berezin_of_radial_symbol(&omega, &clamped, pts[i]))?;
        let mut chosen = None;
        for pos in start..plan.len() {
            let d = plan.domains()[pos];
            if !k.is_inside(&d) {
                continue;
            }
            let e = radial_sup(&d, &clamped, pts, &target_k)?;
            if e <= 1.0 / level {
                chosen = Some((pos, e));
                break;
            }
        }
        let (pos, selection) = chosen.ok_or(BlabError::IndexBudget { budget: plan.len(), level })?;
        start = pos;
        let d = plan.domains()[pos];
        let sup = radial_sup(&d, &clamped, pts, &target)?;
        let gap = max_abs(target_k.iter().zip(&target).map(|(a, b)| (a - b).norm()));
        let lp = corollary_lp(&omega, &d, phi, &clamped, s)?;
        let mut row = vec![sup];
        row.extend(lp);
        row.extend([plan.indices()[pos] as f64, selection, gap]);
        report.push_row(format!("k={level}"), level, row)?;
    }

    report.criteria = vec![
        Criterion::DecreasingTail { column: SUP_ERROR.into(), window: s.tail_window.min(levels.len()) },
        Criterion::FinalBelow { column: SUP_ERROR.into(), tol: s.tolerance.unwrap_or(COROLLARY_TOLERANCE) },
        Criterion::DecreasingTail { column: "clamp_gap".into(), window: levels.len() },
    ];
    Ok(report)
}

/// `‖E B_{Ω_j} φ_k − B_Ω φ‖_{L^p(Ω)}` for radial data, by 1-D quadrature.
fn corollary_lp(omega: &DomainSpec, d: &DomainSpec, phi: &SymbolExpr, clamped: &SymbolExpr, s: &Settings) -> Result<Vec<f64>> {
    let order = s.lp_resolution.panel_order;
    let decades = |a: f64, b: f64| ((b / a).log10().ceil() as usize * 2).max(2);
    let mut rules = Vec::new();
    if d.r_inner() > omega.r_inner() {
        rules.push(if omega.r_inner() == 0.0 {
            RadialRule::graded_toward_start(0.0, d.r_inner(), order, 8)
        } else {
            RadialRule::geometric(omega.r_inner(), d.r_inner(), order, decades(omega.r_inner(), d.r_inner()))
        });
    }
    rules.push(RadialRule::geometric(d.r_inner(), d.r_outer(), order, decades(d.r_inner(), d.r_outer())));
    let (mut nodes, mut weights) = (Vec::new(), Vec::new());
    for r in rules {
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    let values = par::try_map(nodes.len(), |i| {
        let z = Complex64::new(nodes[i], 0.0);
        let b = berezin_of_radial_symbol(omega, phi, z)?;
        if d.contains(z) {
            Ok::<_, BlabError>((berezin_of_radial_symbol(d, clamped, z)? - b).norm())
        } else {
            Ok(b.norm())
        }
    })?;
    Ok(s.p_list.iter().map(|&p| radial_lp(&nodes, &weights, &values, p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::standard_exhaustions;

    fn small() -> Settings {
        Settings {
            points: 9,
            truncation: 12,
            lp_resolution: crate::quadrature::Resolution { panel_order: 8, n_panels: 2, n_angular: 16 },
            oracle_resolution: crate::quadrature::Resolution { panel_order: 8, n_panels: 3, n_angular: 24 },
            ..Settings::default()
        }
    }

    #[test]
    fn identity_word_follows_kernel_ratio() {
        // B_{Ω_j}(R R^*)(z) = K^Ω(z,z)/K^{Ω_j}(z,z), which tends to 1
        let plan = standard_exhaustions("discs_increasing", 5).unwrap();
        let s = small();
        let k = s.compact(plan.limit, (0.2, 0.4)).unwrap();
        let r = run_theorem1(&plan, &OperatorWord::identity(), &k, &s).unwrap();
        let m = model_for(plan.limit, 12);
        let last = model_for(plan.domains()[4], 12);
        let expect = max_abs(k.points.iter().map(|&z| (diag_quotient(&m, &last, z).unwrap() - 1.0).abs()));
        assert!((r.final_value(SUP_ERROR).unwrap() - expect).abs() < 1e-9);
        assert!(r.column("path_discrepancy").unwrap().iter().all(|&d| d < 1e-9));
    }

    #[test]
    fn direction_is_checked() {
        let s = small();
        let dec = standard_exhaustions("discs_decreasing", 4).unwrap();
        let inc = standard_exhaustions("discs_increasing", 4).unwrap();
        let k = s.compact(inc.limit, (0.2, 0.4)).unwrap();
        let w = OperatorWord::identity();
        assert!(matches!(run_theorem1(&dec, &w, &k, &s), Err(BlabError::InvalidArgument(_))));
        assert!(matches!(run_theorem2(&inc, &w, &k, &s), Err(BlabError::InvalidArgument(_))));
    }

    #[test]
    fn stalled_kernel_diagonal_is_a_hypothesis_failure() {
        let d = DomainSpec::disc(1.5).unwrap();
        let plan = ExhaustionPlan::new("stalled", Direction::Decreasing, DomainSpec::unit_disc(), vec![1, 2, 3], vec![d; 3])
            .unwrap();
        let s = small();
        let k = s.compact(plan.limit, (0.2, 0.4)).unwrap();
        let r = run_theorem2(&plan, &OperatorWord::identity(), &k, &s);
        assert!(matches!(r, Err(BlabError::Hypothesis(_))), "{r:?}");
    }

    #[test]
    fn admissibility() {
        let discs = standard_exhaustions("discs_increasing", 4).unwrap();
        let annuli = standard_exhaustions("annuli_to_punctured_disc", 4).unwrap();
        let word: OperatorWord = "green:0.3+0i,clamp:log_abs:5".parse().unwrap();
        assert!(check_admissible(&word, &discs).is_ok());
        assert!(check_admissible(&word, &annuli).is_ok());
        // the pole of log|z| is not inside any annulus
        let log: OperatorWord = "log_abs".parse().unwrap();
        assert!(matches!(check_admissible(&log, &annuli), Err(BlabError::Unbounded(..))));
        assert!(check_admissible(&log, &discs).is_ok());
        let pow: OperatorWord = "abs_power:-1".parse().unwrap();
        assert!(check_admissible(&pow, &discs).is_err());
    }

    #[test]
    fn theorem3_on_constant_plan_is_exact() {
        let d = DomainSpec::unit_disc();
        let plan = ExhaustionPlan::constant(d, 3).unwrap();
        let s = small();
        let k = s.compact(d, (0.2, 0.4)).unwrap();
        let word: OperatorWord = "abs_power:2,const:2+0i;const:1+0i".parse().unwrap();
        let r = run_theorem3(&plan, &word, &k, &s).unwrap();
        assert!(r.column(SUP_ERROR).unwrap().iter().all(|&e| e < 1e-12));
        assert!(r.column("representation_gap").unwrap().iter().all(|&e| e < 1e-12));
    }

    #[test]
    fn corollary_budget_and_monotone_clamping() {
        let s = small();
        let short = standard_exhaustions("annuli_to_punctured_disc", 4).unwrap();
        let k = s.compact(short.limit, (0.3, 0.7)).unwrap();
        let r = run_corollary_truncation(&short, &SymbolExpr::LogAbs, &[1.0, 8.0], &k, &s);
        assert!(matches!(r, Err(BlabError::IndexBudget { .. })), "{r:?}");
        let plan = standard_exhaustions("annuli_to_punctured_disc", 40).unwrap();
        let r = run_corollary_truncation(&plan, &SymbolExpr::LogAbs, &[1.0, 2.0], &k, &s).unwrap();
        let js = r.column("j_k").unwrap();
        assert!(js[1] >= js[0]);
        assert!(r.column("selection_error").unwrap().iter().zip([1.0, 0.5]).all(|(e, t)| *e <= t));
        let gap = r.column("clamp_gap").unwrap();
        assert!(gap[1] < gap[0]);
        assert!(matches!(
            run_corollary_truncation(&plan, &SymbolExpr::Green(Complex64::new(0.3, 0.0)), &[1.0], &k, &s),
            Err(BlabError::InvalidArgument(_))
        ));
    }
}
