//! Suites over the constructions in [`crate::models`].

use std::f64::consts::TAU;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::identities::CONTROL_THRESHOLD;
use super::report::{CheckKind, CheckRecord, SuiteReport};
use super::{random_tau, subseed};
use crate::distcalc::{antisymmetry_residual, jacobi_residual, BracketTable, Gen, Residual};
use crate::elliptic::EllipticContext;
use crate::error::Result;
use crate::models::prop1::{multistart, FEASIBLE_TOLERANCE};
use crate::models::{
    appendix_table, cp2_check, field_indices, identify_two_field_tables, lambda_probe, lemma1_descend,
    match_structconsts, prop1_certificate_with, prop1_system, prop2_quartic, prop2_table, thm2_check, thm3_extract,
    SolverOptions, StructConsts,
};
use crate::symexpr::{rat, sample_jets, Field, JetAssignment};

/// Jet samples for a table: `jets` samples at each of `taus` random `tau`.
fn jet_samples(t: &BracketTable, seed: u64, taus: usize, jets: usize) -> Result<Vec<JetAssignment>> {
    let (_, order) = t.jacobi_requirements();
    let fields = t.fields();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(taus * jets);
    for i in 0..taus {
        let ctx = EllipticContext::new(random_tau(&mut rng), 1e-13)?;
        for j in 0..jets {
            out.push(sample_jets(&ctx, &fields, order, subseed(seed, (i * jets + j) as u64)));
        }
    }
    Ok(out)
}

type Checker = fn(&BracketTable, &JetAssignment) -> Result<Vec<Residual>>;

/// Largest relative residual per sample and the label of the overall worst one.
fn sweep(t: &BracketTable, samples: &[JetAssignment], f: Checker) -> Result<(Vec<f64>, String)> {
    let mut per_sample = Vec::with_capacity(samples.len());
    let (mut worst, mut label) = (-1.0, String::new());
    for jets in samples {
        let rs = f(t, jets)?;
        let mut m: f64 = 0.0;
        for r in &rs {
            let v = r.relative();
            if v > worst {
                worst = v;
                label = r.label.clone();
            }
            m = m.max(v);
        }
        per_sample.push(m);
    }
    Ok((per_sample, label))
}

fn residual_check(name: &str, t: &BracketTable, samples: &[JetAssignment], f: Checker, tol: f64) -> CheckRecord {
    match sweep(t, samples, f) {
        Ok((v, label)) => {
            let rec = CheckRecord::residual(name, &v, tol);
            if rec.passed {
                rec
            } else {
                rec.with_detail(format!("worst at {label}"))
            }
        }
        Err(e) => CheckRecord::errored(name, CheckKind::Residual, &e),
    }
}

fn control_check(name: &str, t: &BracketTable, samples: &[JetAssignment], f: Checker) -> CheckRecord {
    match sweep(t, samples, f) {
        Ok((v, label)) => CheckRecord::lower_bound(name, &v, CONTROL_THRESHOLD).as_control().with_detail(label),
        Err(e) => CheckRecord::errored(name, CheckKind::LowerBound, &e).as_control(),
    }
}

/// Parameters of the Poisson suite.
#[derive(Clone, Debug)]
pub struct PoissonOptions {
    pub n: usize,
    pub jets: usize,
    pub taus: usize,
    pub tol: f64,
    /// Plant a sign flip in the extracted table before checking it.
    pub corrupt: bool,
}

impl PoissonOptions {
    pub fn new(n: usize) -> Self {
        PoissonOptions { n, jets: 20, taus: 3, tol: 1e-8, corrupt: false }
    }
}

pub const MAX_N: usize = 6;

/// Flip the sign of the first `P` entry.
fn plant_defect(s: &StructConsts) -> StructConsts {
    let mut c = s.clone();
    if let Some((_, p)) = c.p.iter_mut().next() {
        *p = -&*p;
    }
    c
}

pub fn run_poisson_suite(n: usize, seed: u64, jets: usize, tol: f64) -> SuiteReport {
    run_poisson_suite_with(seed, &PoissonOptions { jets, tol, ..PoissonOptions::new(n) })
}

pub fn run_poisson_suite_with(seed: u64, o: &PoissonOptions) -> SuiteReport {
    let start = Instant::now();
    let mut report = SuiteReport::new("poisson", seed)
        .param("n", o.n)
        .param("jets", o.jets)
        .param("taus", o.taus)
        .param("tol", o.tol)
        .param("corrupt", o.corrupt);
    if o.n < 2 || o.n > MAX_N {
        let e = crate::error::Error::Domain(format!("n must lie in 2..={MAX_N}, got {}", o.n));
        report.push(CheckRecord::errored("extraction", CheckKind::Exact, &e));
        return report.finish(start.elapsed());
    }
    let extracted = match thm3_extract(o.n) {
        Ok(s) => {
            report.push(CheckRecord::exact("extraction (exact cancellation and division)", true));
            s
        }
        Err(e) => {
            report.push(CheckRecord::errored("extraction (exact cancellation and division)", CheckKind::Exact, &e));
            return report.finish(start.elapsed());
        }
    };
    let subject = if o.corrupt { plant_defect(&extracted) } else { extracted.clone() };
    match appendix_table(o.n).and_then(|a| match_structconsts(&subject, &a)) {
        Ok(m) => {
            let rec = CheckRecord::exact("closed-form tables match extraction", m.is_match());
            let detail: Vec<String> = m.discrepancies.iter().map(|d| format!("{}{:?}", d.part, (d.a, d.b))).collect();
            report.push(if detail.is_empty() { rec } else { rec.with_detail(detail.join(", ")) });
        }
        Err(e) => report.push(CheckRecord::errored("closed-form tables match extraction", CheckKind::Exact, &e)),
    }
    let table = subject.to_table();
    let samples = match jet_samples(&table, subseed(seed, 10), o.taus, o.jets) {
        Ok(s) => s,
        Err(e) => {
            report.push(CheckRecord::errored("jet sampling", CheckKind::Residual, &e));
            return report.finish(start.elapsed());
        }
    };
    report.push(residual_check("antisymmetry", &table, &samples, antisymmetry_residual, o.tol));
    report.push(residual_check("jacobi", &table, &samples, jacobi_residual, o.tol));

    let last = *field_indices(o.n).last().unwrap_or(&0);
    for (name, den) in [("descent over z0", Field::Z(0)), ("descent over last field", Field::Z(last))] {
        match lemma1_descend(&table, den) {
            Ok(d) => {
                report.push(CheckRecord::exact(&format!("{name}: tau is central"), true));
                match jet_samples(&d, subseed(seed, 20 + last as u64), o.taus, o.jets.clamp(1, 5)) {
                    Ok(js) => report.push(residual_check(&format!("{name}: jacobi"), &d, &js, jacobi_residual, o.tol)),
                    Err(e) => report.push(CheckRecord::errored(&format!("{name}: jacobi"), CheckKind::Residual, &e)),
                }
            }
            Err(e) => report.push(CheckRecord::errored(&format!("{name}: tau is central"), CheckKind::Exact, &e)),
        }
    }

    let first = *extracted.p.keys().next().unwrap_or(&(0, 0));
    let control_samples = &samples[..samples.len().min(3)];
    let flipped = extracted.to_table().corrupted(Gen::F(Field::Z(first.0)), Gen::F(Field::Z(first.1)), 1);
    report.push(control_check("flipped delta' sign: antisymmetry", &flipped, control_samples, antisymmetry_residual));
    let planted = plant_defect(&extracted).to_table();
    report.push(control_check("flipped P sign: jacobi", &planted, control_samples, jacobi_residual));

    if o.n == 2 {
        push_prop2_checks(&mut report, seed, o.tol);
    }
    match lambda_probe(o.n, rat(1, o.n as i128 + 1)) {
        Ok(p) => report.push(CheckRecord::info(&format!("lambda probe at {}", p.lambda), p.message)),
        Err(e) => report.push(CheckRecord::info("lambda probe", e.to_string())),
    }
    report.finish(start.elapsed())
}

/// The printed three-field table: Poisson property, descent and identification.
fn push_prop2_checks(report: &mut SuiteReport, seed: u64, tol: f64) {
    let t = prop2_table();
    match jet_samples(&t, subseed(seed, 30), 3, 20) {
        Ok(js) => {
            report.push(residual_check("three-field lift: antisymmetry", &t, &js, antisymmetry_residual, tol));
            report.push(residual_check("three-field lift: jacobi", &t, &js, jacobi_residual, tol));
        }
        Err(e) => report.push(CheckRecord::errored("three-field lift", CheckKind::Residual, &e)),
    }
    match lemma1_descend(&t, Field::Z(2)) {
        Ok(d) => {
            let p = Field::P(1);
            let target = crate::models::cp1_coefficients(p, &prop2_quartic(p));
            let got = d.entry(Gen::F(p), Gen::F(p)).to_vec();
            report.push(CheckRecord::exact("three-field lift descends to the Weierstrass quartic", got == target));
        }
        Err(e) => report.push(CheckRecord::errored("three-field lift descends", CheckKind::Exact, &e)),
    }
    let ext = thm3_extract(2).map(|s| s.to_table());
    match ext.and_then(|e| identify_two_field_tables(&t, [Field::Z(1), Field::Z(2)], &e, [Field::Z(0), Field::Z(2)])) {
        Ok(r) => {
            let found: Vec<String> = r.matches.iter().map(|m| format!("{:?}", m.matrix)).collect();
            let rec = CheckRecord::exact(
                "three-field lift equals the n = 2 extraction up to a linear change",
                !found.is_empty(),
            );
            report.push(rec.with_detail(format!("{} candidates; matches {}", r.candidates_tried, found.join(" "))));
        }
        Err(e) => report.push(CheckRecord::errored("identification", CheckKind::Exact, &e)),
    }
}

pub fn run_thm2_suite(n: usize, trials: usize, seed: u64) -> SuiteReport {
    run_thm2_suite_with(n, trials, seed, 1e-8)
}

pub fn run_thm2_suite_with(n: usize, trials: usize, seed: u64, tol: f64) -> SuiteReport {
    let start = Instant::now();
    let mut report = SuiteReport::new("thm2", seed).param("n", n).param("trials", trials).param("tol", tol);
    match thm2_check(n, trials, subseed(seed, 40), None) {
        Ok(r) => {
            let v: Vec<f64> = r.samples.iter().map(|s| s.residual).collect();
            report.push(CheckRecord::residual("r-matrix bracket with lambda = 1/n", &v, tol));
            report.push(CheckRecord::residual("e = f at t = 0", &[r.trivial_point], tol));
            report.push(CheckRecord::residual("{tau, e} = 2 pi i e delta'", &[r.tau_row], tol));
        }
        Err(e) => report.push(CheckRecord::errored("r-matrix bracket with lambda = 1/n", CheckKind::Residual, &e)),
    }
    let wrong = 1.0 / (n as f64 + 1.0);
    match thm2_check(n, trials.clamp(1, 3), subseed(seed, 41), Some(wrong)) {
        Ok(r) => {
            let v: Vec<f64> = r.samples.iter().map(|s| s.residual).collect();
            report.push(
                CheckRecord::lower_bound("r-matrix bracket with lambda = 1/(n+1)", &v, CONTROL_THRESHOLD).as_control(),
            );
        }
        Err(e) => report.push(CheckRecord::errored("wrong lambda", CheckKind::LowerBound, &e).as_control()),
    }
    report.finish(start.elapsed())
}

pub fn run_nogo_suite(s: Complex64, restarts: usize, seed: u64) -> SuiteReport {
    run_nogo_suite_with(s, restarts, seed, &SolverOptions::default())
}

pub fn run_nogo_suite_with(s: Complex64, restarts: usize, seed: u64, opts: &SolverOptions) -> SuiteReport {
    let start = Instant::now();
    let mut report = SuiteReport::new("nogo", seed)
        .param("s", [s.re, s.im])
        .param("restarts", restarts)
        .param("box_radius", opts.box_radius)
        .param("max_iterations", opts.max_iterations)
        .param("threshold", opts.threshold)
        .param("feasible_tolerance", FEASIBLE_TOLERANCE);
    let sys = match prop1_system(s) {
        Ok(s) => s,
        Err(e) => {
            report.push(CheckRecord::errored("lifting system", CheckKind::LowerBound, &e));
            return report.finish(start.elapsed());
        }
    };
    match prop1_certificate_with(&sys, restarts, seed, opts) {
        Ok(c) => {
            let runs = multistart(&sys, restarts, seed, opts);
            let detail = format!(
                "{} unknowns, equations {:?}; min {:.4e}, median {:.4e}",
                c.unknowns, c.equations, c.min_residual, c.median_residual
            );
            report.push(
                CheckRecord::lower_bound("lifting residual bounded away from zero", &runs, opts.threshold)
                    .with_detail(detail),
            );
            report.push(
                CheckRecord::residual("liftable target is solved", &[c.feasible_residual], c.feasible_tolerance)
                    .as_control(),
            );
        }
        Err(e) => report.push(CheckRecord::errored("certificate", CheckKind::LowerBound, &e)),
    }
    report.push(scaling_check(&sys, seed));
    report.finish(start.elapsed())
}

/// The matching discrepancy is unchanged under `z -> c z`.
fn scaling_check(sys: &crate::models::NoGoSystem, seed: u64) -> CheckRecord {
    let name = "matching invariant under z -> c z";
    let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, 50));
    let mut values = Vec::new();
    for _ in 0..5 {
        let x: Vec<Complex64> =
            (0..sys.dim()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let c = Complex64::from_polar(rng.random_range(0.3..3.0), rng.random_range(0.0..TAU));
        let (mut a, mut b) = (JetAssignment::new(None), JetAssignment::new(None));
        for f in [Field::Z(1), Field::Z(2)] {
            for k in 0..3 {
                let v = Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..TAU));
                a.set(crate::symexpr::Symbol::Jet(f, k), v);
                b.set(crate::symexpr::Symbol::Jet(f, k), c * v);
            }
        }
        match (sys.matching_at(&x, &a), sys.matching_at(&x, &b)) {
            (Ok(u), Ok(w)) => {
                for (p, q) in u.iter().zip(&w) {
                    values.push((p - q).norm() / p.norm().max(1.0));
                }
            }
            (Err(e), _) | (_, Err(e)) => return CheckRecord::errored(name, CheckKind::Residual, &e),
        }
    }
    CheckRecord::residual(name, &values, 1e-10)
}

pub fn run_cp2_suite(g2: Complex64, g3: Complex64) -> SuiteReport {
    let start = Instant::now();
    let mut report = SuiteReport::new("cp2", 0).param("g2", [g2.re, g2.im]).param("g3", [g3.re, g3.im]);
    match cp2_check(g2, g3) {
        Ok(r) => {
            for c in &r.cases {
                report.push(
                    CheckRecord::exact(&format!("{}: descent", c.label), c.descent_exact)
                        .with_detail(c.descended.clone()),
                );
                report.push(CheckRecord::exact(&format!("{}: jacobi", c.label), c.jacobi_exact));
            }
        }
        Err(e) => report.push(CheckRecord::errored("cp2", CheckKind::Exact, &e)),
    }
    let mut b = crate::models::FiniteBracket::from_cubic(&crate::models::Cubic::symbolic());
    b.perturb(0, 1, &crate::symexpr::Poly::var(crate::symexpr::Symbol::Jet(Field::Z(1), 0)).pow(2));
    report
        .push(CheckRecord::exact_control("perturbed bracket: jacobi", b.jacobiator().iter().all(|(_, j)| j.is_zero())));
    report.finish(start.elapsed())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_n2_passes_with_small_sampling() {
        let r = run_poisson_suite_with(1, &PoissonOptions { jets: 2, taus: 2, ..PoissonOptions::new(2) });
        assert!(r.passed, "{}", r.summary());
        assert!(r.check("three-field lift: jacobi").unwrap().passed);
    }

    #[test]
    fn corrupted_run_fails_with_localized_discrepancy() {
        let r =
            run_poisson_suite_with(1, &PoissonOptions { jets: 1, taus: 1, corrupt: true, ..PoissonOptions::new(3) });
        assert!(!r.passed);
        let m = r.check("closed-form tables match extraction").unwrap();
        assert!(!m.passed);
        assert!(m.detail.as_deref().unwrap().starts_with('P'), "{m:?}");
    }

    #[test]
    fn out_of_range_n_is_a_failed_report() {
        assert!(!run_poisson_suite(7, 1, 1, 1e-8).passed);
    }

    #[test]
    fn cp2_suite_passes_exactly() {
        let r = run_cp2_suite(Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0));
        assert!(r.passed, "{}", r.summary());
    }

    #[test]
    fn thm2_suite_passes_and_detects_wrong_lambda() {
        let r = run_thm2_suite(2, 3, 5);
        assert!(r.passed, "{}", r.summary());
    }

    #[test]
    fn nogo_suite_small() {
        let r = run_nogo_suite(Complex64::new(2.0, 0.0), 10, 42);
        assert!(r.passed, "{}", r.summary());
    }
}
