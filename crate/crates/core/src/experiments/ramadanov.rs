use crate::experiments::common::{check_tail, describe_plan, Settings};
use crate::experiments::report::{ConvergenceReport, Criterion, SUP_ERROR};
use crate::geometry::{CompactRegion, ExhaustionPlan};
use crate::kernels::KernelModel;
use crate::par;
use crate::{BlabError, Complex64, Result};

/// Default final tolerance of the kernel convergence experiment.
pub const RAMADANOV_TOLERANCE: f64 = 1e-4;

const BOUNDARY_SLACK: f64 = 1e-9;

/// `sup_{z,w ∈ K} |K^{Ω_j}(z,w) − K^Ω(z,w)|` along the plan, over the
/// points of `K` inside `Ω_j`. Also reports the diagonal error (the
/// decreasing-domain statement) and the fraction of `K` covered.
pub fn run_ramadanov(plan: &ExhaustionPlan, k: &CompactRegion, s: &Settings) -> Result<ConvergenceReport> {
    if plan.len() < 3 {
        return Err(BlabError::InvalidArgument("kernel convergence needs a plan of length ≥ 3".into()));
    }
    check_tail(plan, k, s.tail_window)?;
    let limit = KernelModel::analytic(plan.limit, 8);
    let pts = &k.points;
    let n = pts.len();
    let target: Vec<Complex64> = par::try_map(n * n, |i| limit.eval(pts[i / n], pts[i % n]))?;

    let rows = par::try_map(plan.len(), |row| {
        let m = KernelModel::analytic(plan.domains()[row], 8);
        // sample points that round onto the boundary count as outside
        let inside: Vec<bool> = pts.iter().map(|&z| m.domain.boundary_distance(z) > BOUNDARY_SLACK).collect();
        let mut sup = 0.0f64;
        let mut diag = 0.0f64;
        for a in 0..n {
            if !inside[a] {
                continue;
            }
            for b in 0..n {
                if !inside[b] {
                    continue;
                }
                let err = (m.eval(pts[a], pts[b])? - target[a * n + b]).norm();
                sup = sup.max(err);
                if a == b {
                    diag = diag.max(err);
                }
            }
        }
        let coverage = inside.iter().filter(|&&x| x).count() as f64 / n as f64;
        Ok::<_, BlabError>(vec![sup, diag, coverage])
    })?;

    let mut report = ConvergenceReport::new(
        "ramadanov",
        describe_plan(plan),
        vec![SUP_ERROR.into(), "diag_sup_error".into(), "coverage".into()],
    );
    for ((j, _), values) in plan.iter().zip(rows) {
        report.push_row(format!("j={j}"), j as f64, values)?;
    }
    report.criteria = vec![
        Criterion::DecreasingTail { column: SUP_ERROR.into(), window: s.tail_window },
        Criterion::FinalBelow { column: SUP_ERROR.into(), tol: s.tolerance.unwrap_or(RAMADANOV_TOLERANCE) },
    ];
    Ok(report)
}
