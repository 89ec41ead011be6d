//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines always
//! reach the output.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use blab_core::experiments::common::random_point;
use blab_core::experiments::{ConvergenceReport, Experiment, ExperimentKind};
use blab_core::kernels::{disc_kernel, kernel_from_basis};
use blab_core::operators::{poisson_square_mean, poisson_square_mean_closed_form};
use blab_core::quadrature::build_polar_grid;
use blab_core::{Complex64, DomainSpec, KernelModel, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { passed, detail: detail.into() })
}

fn run(kind: ExperimentKind, configure: impl FnOnce(&mut Experiment)) -> Result<(ConvergenceReport, Duration)> {
    let mut e = Experiment::new(kind);
    configure(&mut e);
    let t = Instant::now();
    let r = e.run()?;
    Ok((r, t.elapsed()))
}

fn row(report: &ConvergenceReport, label: &str, column: &str) -> f64 {
    let c = report.column_position(column).expect("column");
    report.rows.iter().find(|r| r.label == label).map(|r| r.values[c]).unwrap_or(f64::NAN)
}

fn decreasing_tail(v: &[f64], window: usize) -> bool {
    v.len() >= window && v[v.len() - window..].windows(2).all(|w| w[1] < w[0])
}

fn col(report: &ConvergenceReport, name: &str) -> Vec<f64> {
    report.column(name).unwrap_or_default()
}

fn last(report: &ConvergenceReport, name: &str) -> f64 {
    report.final_value(name).unwrap_or(f64::NAN)
}

fn criterion_1(suite: &ConvergenceReport) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let s = 0.05 + 0.9 * rand::Rng::random::<f64>(&mut rng);
        let z = random_point(&mut rng, 0.95);
        worst = worst.max((poisson_square_mean(s, z)? - poisson_square_mean_closed_form(s, z)).abs());
    }
    let elapsed = t.elapsed();
    let suite_dev = row(suite, "lemma1", "deviation");
    outcome(
        worst < 1e-10 && suite_dev < 1e-10 && elapsed < Duration::from_secs(1),
        format!("max deviation {worst:.2e} (suite {suite_dev:.2e}) < 1e-10 in {elapsed:.2?} < 1 s"),
    )
}

fn criterion_2(suite: &ConvergenceReport) -> Result<Outcome> {
    let (a, b) = (row(suite, "lemma2", "deviation"), row(suite, "mobius_step", "deviation"));
    outcome(a < 1e-6 && b < 1e-6, format!("Green Berezin deviation {a:.2e}, Möbius step {b:.2e} (< 1e-6, 20 pairs each)"))
}

fn criterion_3() -> Result<Outcome> {
    let disc = DomainSpec::unit_disc();
    let basis = kernel_from_basis(disc, 64, &build_polar_grid(disc, 72, 160)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut dev_disc: f64 = 0.0;
    for _ in 0..20 {
        let (z, w) = (random_point(&mut rng, 0.7), random_point(&mut rng, 0.7));
        dev_disc = dev_disc.max((basis.eval(z, w)? - disc_kernel(1.0, z, w)?).norm());
    }
    let ann = DomainSpec::annulus(0.5, 1.0)?;
    let basis = kernel_from_basis(ann, 120, &build_polar_grid(ann, 64, 256)?)?;
    let series = KernelModel::analytic(ann, 8);
    let mut dev_ann: f64 = 0.0;
    for _ in 0..20 {
        let mut band = || {
            let r = 0.6 + 0.3 * rand::Rng::random::<f64>(&mut rng);
            Complex64::from_polar(r, 2.0 * PI * rand::Rng::random::<f64>(&mut rng))
        };
        let (z, w) = (band(), band());
        dev_ann = dev_ann.max((series.eval(z, w)? - basis.eval(z, w)?).norm());
    }
    outcome(
        dev_disc < 1e-10 && dev_ann < 1e-10,
        format!("disc basis vs closed form {dev_disc:.2e}, annulus series vs basis {dev_ann:.2e} (< 1e-10)"),
    )
}

fn criterion_4(suite: &ConvergenceReport) -> Result<Outcome> {
    let a = row(suite, "adjoint", "deviation");
    let r = row(suite, "restriction", "deviation");
    let s = row(suite, "series", "deviation");
    outcome(
        a < 1e-8 && r < 1e-8 && s < 1e-6,
        format!("adjoint {a:.2e} (< 1e-8), restriction norm {r:.2e} (< 1e-8), series ratio {s:.2e} (< 1e-6)"),
    )
}

fn criterion_5() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut passed = true;
    let mut total = Duration::ZERO;
    for family in ["discs_increasing", "annuli_to_punctured_disc"] {
        let (r, t) = run(ExperimentKind::Ramadanov, |e| e.exhaustion = Some(family.into()))?;
        total += t;
        let errs = col(&r, "sup_error");
        let tail = decreasing_tail(&errs, 3);
        let fin = last(&r, "sup_error");
        passed &= tail && fin < 1e-4 && r.rows.last().map(|x| x.index) == Some(10.0);
        parts.push(format!("{family}: decreasing tail {tail}, final {fin:.3e}"));
    }
    passed &= total < Duration::from_secs(30);
    outcome(passed, format!("{} (< 1e-4 at j = 10); {total:.2?} < 30 s", parts.join("; ")))
}

fn criterion_6() -> Result<Outcome> {
    let (r, _) = run(ExperimentKind::Theorem1, |_| {})?;
    let disc = col(&r, "path_discrepancy").into_iter().fold(0.0, f64::max);
    let (sup, l1, l2) = (last(&r, "sup_error"), last(&r, "lp_1"), last(&r, "lp_2"));
    outcome(
        disc < 1e-6 && sup < 1e-3 && l1 < 1e-3 && l2 < 1e-3,
        format!("path discrepancy {disc:.2e} (< 1e-6); final sup {sup:.3e}, L1 {l1:.3e}, L2 {l2:.3e} (< 1e-3 at j = 10)"),
    )
}

fn criterion_7() -> Result<Outcome> {
    let (r, _) = run(ExperimentKind::Theorem2, |_| {})?;
    let diag = col(&r, "kernel_diag_at_probe");
    // probe is the outermost band point, |z| = 0.7
    let limit = KernelModel::analytic(DomainSpec::unit_disc(), 0).diag(Complex64::new(0.7, 0.0))?;
    let increasing = diag.windows(2).all(|w| w[1] > w[0]) && diag.iter().all(|&d| d < limit);
    let sup = last(&r, "sup_error");
    outcome(
        increasing && sup < 1e-3,
        format!(
            "hypothesis column increasing to K(z,z) = {limit:.4}: {increasing} (final {:.4}); final sup {sup:.3e} (< 1e-3)",
            diag.last().copied().unwrap_or(f64::NAN)
        ),
    )
}

fn criterion_8() -> Result<Outcome> {
    let (r, _) = run(ExperimentKind::Theorem3, |_| {})?;
    let e = col(&r, "sup_error");
    let sup = last(&r, "sup_error");
    let halves = e.len() >= 3 && e[e.len() - 1] <= 0.5 * e[e.len() - 3];
    let gap = col(&r, "representation_gap").into_iter().fold(0.0, f64::max);
    outcome(
        sup < 1e-2 && halves && gap < 1e-8,
        format!(
            "final sup {sup:.3e} (< 1e-2), ratio over two indices {:.3} (≤ 0.5), representation gap {gap:.2e} (< 1e-8)",
            e[e.len() - 1] / e[e.len() - 3]
        ),
    )
}

fn criterion_9() -> Result<Outcome> {
    let (r, _) = run(ExperimentKind::Prop1, |_| {})?;
    let v = row(&r, "r=1e-3", "value_at_probe");
    let p = row(&r, "r=1e-3", "punctured_value");
    outcome(
        (v + 0.9375).abs() < 1e-2 && (p + 0.375).abs() < 1e-6,
        format!("B_A(0.5) at r = 1e-3 is {v:.4} (|· + 0.9375| = {:.3e} < 1e-2); punctured value {p:.8} (± 1e-6 of -0.375)", (v + 0.9375).abs()),
    )
}

fn criterion_10() -> Result<Outcome> {
    let (r, _) = run(ExperimentKind::Prop2, |_| {})?;
    let (hi, lo) = (row(&r, "r=1e-3", "norm_lp_1"), row(&r, "r=1e-1", "norm_lp_1"));
    let eig = col(&r, "eigen_oracle_deviation").into_iter().chain(col(&r, "punctured_eigen_deviation")).fold(0.0, f64::max);
    let monotone = col(&r, "eigen_monotone").iter().all(|&m| m == 1.0);
    let tail = last(&r, "eigen_tail");
    outcome(
        hi / lo >= 2.0 && hi > PI / 4.0 && eig < 1e-10 && monotone && tail < 0.02,
        format!(
            "L1 norm ratio r=1e-3 / r=1e-1 = {:.3} (≥ 2); L1 at 1e-3 = {hi:.4} (> π/4); diagonal vs oracle {eig:.2e} (< 1e-10); eigenvalues decreasing {monotone}, last |λ| {tail:.4}",
            hi / lo
        ),
    )
}

fn criterion_11() -> Result<Outcome> {
    let mut same = true;
    for kind in [ExperimentKind::LemmaSuite, ExperimentKind::Theorem3, ExperimentKind::Prop2] {
        let csv = |seed| -> Result<String> {
            let mut e = Experiment::new(kind);
            e.settings.seed = seed;
            if kind == ExperimentKind::Theorem3 {
                e.length = Some(4);
            }
            e.run()?.to_csv_string()
        };
        same &= csv(9)? == csv(9)?;
    }
    outcome(same, "lemma_suite, theorem3 and prop2 re-run with the same seed give byte-identical CSV")
}

fn corollary_example() -> Result<Outcome> {
    let (r, _) = run(ExperimentKind::CorollaryTruncation, |_| {})?;
    let fin = last(&r, "sup_error");
    outcome(fin < 0.05, format!("clamp levels 1, 2, 4, 8 on the annuli family: final sup {fin:.3e} (< 0.05)"))
}

type Check<'a> = Box<dyn Fn() -> Result<Outcome> + 'a>;

fn main() -> ExitCode {
    let start = Instant::now();
    let suite = Experiment::new(ExperimentKind::LemmaSuite).run().expect("lemma suite runs");
    let criteria: Vec<(&str, Check)> = vec![
        ("criterion 1 (Lemma 1 identity)", Box::new(|| criterion_1(&suite))),
        ("criterion 2 (Green's function Berezin)", Box::new(|| criterion_2(&suite))),
        ("criterion 3 (kernel correctness)", Box::new(criterion_3)),
        ("criterion 4 (restriction identities)", Box::new(|| criterion_4(&suite))),
        ("criterion 5 (kernel convergence)", Box::new(criterion_5)),
        ("criterion 6 (Theorem 1)", Box::new(criterion_6)),
        ("criterion 7 (Theorem 2)", Box::new(criterion_7)),
        ("criterion 8 (Theorem 3)", Box::new(criterion_8)),
        ("criterion 9 (Proposition 1)", Box::new(criterion_9)),
        ("criterion 10 (Proposition 2)", Box::new(criterion_10)),
        ("criterion 11 (determinism)", Box::new(criterion_11)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let o = check().unwrap_or_else(|e| Outcome { passed: false, detail: format!("error: {e}") });
        if !o.passed {
            failed += 1;
        }
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    // reported for reference; not one of the numbered criteria
    match corollary_example() {
        Ok(o) => println!("{} truncation corollary example: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail),
        Err(e) => println!("FAIL truncation corollary example: error: {e}"),
    }
    let elapsed = start.elapsed();
    println!(
        "{} of {} criteria passed in {elapsed:.1?} (target under 5 min)",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
