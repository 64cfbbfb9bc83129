//! Special-function identities at random points and random `tau`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{CheckKind, CheckRecord, SuiteReport};
use super::{random_tau, subseed};
use crate::elliptic::{lattice_oracle, EllipticContext};
use crate::error::Result;
use crate::numdiff::contour_derivative;

const Z_RADIUS: f64 = 0.02;
const Z_NODES: usize = 32;
const TAU_RADIUS: f64 = 0.05;
const TAU_NODES: usize = 24;
const PERIOD_NODES: usize = 256;
/// Planted defects must exceed this to count as detected.
pub const CONTROL_THRESHOLD: f64 = 1e-3;

/// Parameters of the identity suite.
#[derive(Clone, Debug)]
pub struct IdentityOptions {
    pub trials: usize,
    pub taus: usize,
    pub tol: f64,
    pub oracle_points: usize,
    pub oracle_radius: i64,
    pub oracle_tol: f64,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        IdentityOptions { trials: 100, taus: 3, tol: 1e-9, oracle_points: 20, oracle_radius: 200, oracle_tol: 1e-5 }
    }
}

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * PI)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Contexts on the circle around `tau`, shared by every `tau`-derivative.
struct TauStencil {
    ctx: EllipticContext,
    ring: Vec<EllipticContext>,
}

impl TauStencil {
    fn new(tau: Complex64) -> Result<Self> {
        let ctx = EllipticContext::new(tau, 1e-14)?;
        let ring = (0..TAU_NODES)
            .map(|j| {
                let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / TAU_NODES as f64);
                EllipticContext::new(tau + w * TAU_RADIUS, 1e-14)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TauStencil { ctx, ring })
    }

    /// `d/dtau` of `f(ctx)` by the trapezoidal Cauchy rule.
    fn derivative(&self, f: impl Fn(&EllipticContext) -> Result<Complex64>) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, c) in self.ring.iter().enumerate() {
            let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / TAU_NODES as f64);
            acc += f(c)? / w;
        }
        Ok(acc / (TAU_NODES as f64 * TAU_RADIUS))
    }
}

/// A point `a + b tau` with `0.1 <= |b| <= 0.4` and `|a| <= 0.4`.
fn off_axis_point(rng: &mut ChaCha8Rng, tau: Complex64) -> Complex64 {
    let a: f64 = rng.random_range(-0.4..0.4);
    let b: f64 = rng.random_range(0.1..0.4) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    tau * b + a
}

fn cell_point(rng: &mut ChaCha8Rng, tau: Complex64) -> Complex64 {
    loop {
        let a: f64 = rng.random_range(-0.4..0.4);
        let b: f64 = rng.random_range(-0.4..0.4);
        if a.abs().max(b.abs()) >= 0.1 {
            return tau * b + a;
        }
    }
}

pub const IDENTITY_NAMES: [&str; 13] = [
    "zeta_z = -wp",
    "wp_z = d wp/dz",
    "wp_z^2 = 4 wp^3 - g2 wp - g3",
    "zeta(z+1) - zeta(z) = g1",
    "2 pi i g1' closed form",
    "2 pi i g2' closed form",
    "2 pi i g3' closed form",
    "2 pi i zeta_tau closed form",
    "2 pi i wp_tau closed form",
    "wp_z_tau closed form",
    "zeta addition identity",
    "sigma_z / sigma = zeta",
    "2 pi i sigma_tau / sigma closed form",
];

/// Residuals of every identity at one point, in the order of [`IDENTITY_NAMES`],
/// plus the sign-flipped `zeta_z = +wp` control.
fn point_residuals(st: &TauStencil, z: Complex64, w: Complex64, y: Complex64) -> Result<(Vec<f64>, f64)> {
    let c = &st.ctx;
    let tpi = two_pi_i();
    let (p, pz, zt) = (c.wp(z)?, c.wp_z(z)?, c.zeta(z)?);
    let dzeta = contour_derivative(|x| c.zeta(x), z, Z_RADIUS, 1, Z_NODES)?;
    let dwp = contour_derivative(|x| c.wp(x), z, Z_RADIUS, 1, Z_NODES)?;
    let cubic = p * p * p * 4.0 - c.g2() * p - c.g3();

    let mut mean = Complex64::new(0.0, 0.0);
    for k in 0..PERIOD_NODES {
        mean += c.wp(y + k as f64 / PERIOD_NODES as f64)?;
    }
    let period_jump = -mean / PERIOD_NODES as f64;

    let dg = c.g_tau_derivatives();
    let g1t = st.derivative(|k| Ok(k.g1()))?;
    let g2t = st.derivative(|k| Ok(k.g2()))?;
    let g3t = st.derivative(|k| Ok(k.g3()))?;
    let zeta_t = st.derivative(|k| k.zeta(z))?;
    let wp_t = st.derivative(|k| k.wp(z))?;
    let wpz_t = st.derivative(|k| k.wp_z(z))?;
    let sigma_t = st.derivative(|k| k.sigma(z))?;
    let sigma = c.sigma(z)?;
    let dsigma = contour_derivative(|x| c.sigma(x), z, Z_RADIUS, 1, Z_NODES)?;

    let (pw, pzw) = (c.wp(w)?, c.wp_z(w)?);
    let addition_lhs = c.zeta(z - w)? - zt + c.zeta(w)?;
    let addition_rhs = (pz + pzw) / (2.0 * (p - pw));

    let wp_tau_rhs = (zt - z * c.g1()) * pz + p * p * 2.0 - c.g1() * p * 2.0 - c.g2() / 3.0;
    let zeta_tau_rhs = c.g1() * z * p + c.g2() * z / 12.0 - c.g1() * zt - zt * p - pz / 2.0;
    let sigma_tau_rhs = c.g1() + c.g2() * z * z / 24.0 - z * c.g1() * zt + zt * zt / 2.0 - p / 2.0;

    let values = vec![
        rel(dzeta, -p),
        rel(dwp, pz),
        rel(pz * pz, cubic),
        rel(period_jump, c.g1()),
        rel(tpi * g1t, dg.g1),
        rel(tpi * g2t, dg.g2),
        rel(tpi * g3t, dg.g3),
        rel(tpi * zeta_t, zeta_tau_rhs),
        rel(tpi * wp_t, wp_tau_rhs),
        rel(wpz_t, c.wp_z_tau(z)?),
        rel(addition_lhs, addition_rhs),
        rel(dsigma / sigma, zt),
        rel(tpi * sigma_t / sigma, sigma_tau_rhs),
    ];
    Ok((values, rel(dzeta, p)))
}

fn separated_pair(rng: &mut ChaCha8Rng, c: &EllipticContext) -> (Complex64, Complex64) {
    loop {
        let z = cell_point(rng, c.tau());
        let w = cell_point(rng, c.tau());
        let (a, b) = c.cell_coordinates(z - w);
        if a.abs().max(b.abs()) < 0.1 {
            continue;
        }
        if let (Ok(p), Ok(q)) = (c.wp(z), c.wp(w)) {
            if (p - q).norm() > 1e-2 * p.norm().max(1.0) {
                return (z, w);
            }
        }
    }
}

pub fn run_identity_suite(seed: u64, trials: usize, tol: f64) -> SuiteReport {
    run_identity_suite_with(seed, &IdentityOptions { trials, tol, ..Default::default() })
}

pub fn run_identity_suite_with(seed: u64, opts: &IdentityOptions) -> SuiteReport {
    let start = Instant::now();
    let mut report = SuiteReport::new("identities", seed)
        .param("trials", opts.trials)
        .param("taus", opts.taus)
        .param("tol", opts.tol)
        .param("oracle_points", opts.oracle_points)
        .param("oracle_radius", opts.oracle_radius)
        .param("oracle_tol", opts.oracle_tol);
    let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, 1));
    let taus: Vec<Complex64> = (0..opts.taus).map(|_| random_tau(&mut rng)).collect();

    let mut per_identity: Vec<Vec<f64>> = vec![Vec::new(); IDENTITY_NAMES.len()];
    let mut control = Vec::new();
    let mut failure = None;
    for (i, &tau) in taus.iter().enumerate() {
        let st = match TauStencil::new(tau) {
            Ok(s) => s,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let mut prng = ChaCha8Rng::seed_from_u64(subseed(seed, 100 + i as u64));
        let points: Vec<(Complex64, Complex64, Complex64)> = (0..opts.trials)
            .map(|_| {
                let (z, w) = separated_pair(&mut prng, &st.ctx);
                (z, w, off_axis_point(&mut prng, tau))
            })
            .collect();
        let results: Vec<Result<(Vec<f64>, f64)>> =
            points.par_iter().map(|&(z, w, y)| point_residuals(&st, z, w, y)).collect();
        for r in results {
            match r {
                Ok((v, ctl)) => {
                    for (k, x) in v.into_iter().enumerate() {
                        per_identity[k].push(x);
                    }
                    control.push(ctl);
                }
                Err(e) => failure = Some(e),
            }
        }
    }
    if let Some(e) = &failure {
        report.push(CheckRecord::errored("identity evaluation", CheckKind::Residual, e));
    }
    for (name, values) in IDENTITY_NAMES.iter().zip(&per_identity) {
        report.push(CheckRecord::residual(name, values, opts.tol));
    }
    report.push(CheckRecord::lower_bound("zeta_z = +wp (sign flipped)", &control, CONTROL_THRESHOLD).as_control());

    if opts.oracle_points > 0 {
        let mut orng = ChaCha8Rng::seed_from_u64(subseed(seed, 2));
        let samples: Vec<(Complex64, Complex64)> = (0..opts.oracle_points)
            .map(|k| {
                let tau = taus.get(k % taus.len().max(1)).copied().unwrap_or(Complex64::new(0.0, 1.0));
                (tau, cell_point(&mut orng, tau))
            })
            .collect();
        let radius = opts.oracle_radius;
        let diffs: Vec<Result<(f64, f64)>> = samples
            .par_iter()
            .map(|&(tau, z)| {
                let c = EllipticContext::new(tau, 1e-14)?;
                let o = lattice_oracle(tau, z, radius)?;
                Ok(((c.wp(z)? - o.wp).norm(), (c.zeta(z)? - o.zeta).norm()))
            })
            .collect();
        match diffs.into_iter().collect::<Result<Vec<_>>>() {
            Ok(d) => {
                let wp: Vec<f64> = d.iter().map(|x| x.0).collect();
                let zeta: Vec<f64> = d.iter().map(|x| x.1).collect();
                report.push(CheckRecord::residual("wp vs lattice oracle (abs)", &wp, opts.oracle_tol));
                report.push(CheckRecord::residual("zeta vs lattice oracle (abs)", &zeta, opts.oracle_tol));
            }
            Err(e) => report.push(CheckRecord::errored("lattice oracle", CheckKind::Residual, &e)),
        }
    }
    report.finish(start.elapsed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numdiff::central_difference;

    fn small() -> IdentityOptions {
        IdentityOptions {
            trials: 5,
            taus: 3,
            oracle_points: 2,
            oracle_radius: 60,
            oracle_tol: 1e-3,
            ..Default::default()
        }
    }

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let a = run_identity_suite_with(3, &small());
        assert!(a.passed, "{}", a.summary());
        let b = run_identity_suite_with(3, &small());
        assert_eq!(a.without_timing().to_json().unwrap(), b.without_timing().to_json().unwrap());
    }

    #[test]
    fn impossible_tolerance_fails() {
        let r = run_identity_suite_with(
            3,
            &IdentityOptions { tol: 1e-300, oracle_points: 0, trials: 2, ..Default::default() },
        );
        assert!(!r.passed);
        assert!(r.check("zeta_z = +wp (sign flipped)").unwrap().passed);
    }

    #[test]
    fn finite_differences_agree_to_their_own_accuracy() {
        let c = EllipticContext::new(Complex64::new(0.1, 1.2), 1e-14).unwrap();
        let z = Complex64::new(0.23, 0.31);
        let fd = central_difference(|x| c.zeta(x), z, 1e-5).unwrap();
        assert!(rel(fd, -c.wp(z).unwrap()) < 1e-7);
        let fd = central_difference(|x| c.wp(x), z, 1e-5).unwrap();
        assert!(rel(fd, c.wp_z(z).unwrap()) < 1e-7);
    }
}
