//! Weierstrass functions and the quasi-modular forms `g1`, `g2`, `g3` for the
//! lattice `Z + Z tau`.
//!
//! The fast path uses the nome expansions
//!
//! ```text
//! wp(z)   = -g1 - 4 pi^2 [ w/(1-w)^2 + sum_n a_n/(1-a_n)^2 + b_n/(1-b_n)^2 ]
//! zeta(z) = g1 z + pi i (w+1)/(w-1) + 2 pi i sum_n [ b_n/(1-b_n) - a_n/(1-a_n) ]
//! sigma(z) = (i/2pi) (1-w) exp(g1 z^2/2 - i pi z) prod_n (1-a_n)(1-b_n)/(1-q^n)^2
//! ```
//!
//! with `w = e^{2 pi i z}`, `a_n = q^n w`, `b_n = q^n / w`. Arguments are
//! reduced to the cell centred at the origin and, using parity, to the upper
//! half of it so that `|w| <= 1`. The brute-force lattice sums in [`oracle`]
//! serve as the independent reference.

pub mod oracle;

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use oracle::{lattice_oracle, OracleValues};

/// Largest number of nome terms a context is allowed to use.
pub const MAX_TRUNCATION: usize = 20_000;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_POLE_GUARD: f64 = 1e-6;
pub const DEFAULT_SIGMA_RADIUS: f64 = 0.75;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * PI)
}

/// A point of the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularParameter(Complex64);

impl ModularParameter {
    pub fn new(tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::Domain(format!("Im(tau) must be positive, got tau = {tau}")));
        }
        Ok(Self(tau))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }
}

/// Evaluation environment for every elliptic function at a fixed `tau`.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct EllipticContext {
    tau: ModularParameter,
    nome: Complex64,
    g1: Complex64,
    g2: Complex64,
    g3: Complex64,
    /// `zeta(z + tau) - zeta(z)`, summed from the series at `tau/2`.
    eta_tau: Complex64,
    truncation: usize,
    tolerance: f64,
    tail_bound: f64,
    pole_guard: f64,
    sigma_radius: f64,
}

/// `(2 pi i) d/dtau` of `g1`, `g2`, `g3`, in that order.
#[derive(Debug, Clone, Copy)]
pub struct GTauDerivatives {
    pub g1: Complex64,
    pub g2: Complex64,
    pub g3: Complex64,
}

impl EllipticContext {
    /// Build a context with default pole guard and sigma radius.
    pub fn new(tau: Complex64, tolerance: f64) -> Result<Self> {
        Self::with_options(tau, tolerance, DEFAULT_POLE_GUARD, DEFAULT_SIGMA_RADIUS)
    }

    pub fn with_options(tau: Complex64, tolerance: f64, pole_guard: f64, sigma_radius: f64) -> Result<Self> {
        let tau = ModularParameter::new(tau)?;
        if !(tolerance > 0.0 && tolerance <= 1e-4) {
            return Err(Error::Domain(format!("tolerance must lie in (0, 1e-4], got {tolerance}")));
        }
        if !(pole_guard > 0.0) {
            return Err(Error::Domain("pole guard must be positive".into()));
        }
        if !(sigma_radius > 0.0 && sigma_radius < 1.0) {
            return Err(Error::Domain("sigma radius must lie in (0, 1)".into()));
        }
        let nome = (two_pi_i() * tau.value()).exp();
        let (truncation, tail_bound) = choose_truncation(nome.norm(), tolerance, sigma_radius)?;

        let pi2 = PI * PI;
        let pi4 = pi2 * pi2;
        let pi6 = pi4 * pi2;
        let mut s1 = Complex64::new(0.0, 0.0);
        let mut s3 = Complex64::new(0.0, 0.0);
        let mut s5 = Complex64::new(0.0, 0.0);
        let mut qm = Complex64::new(1.0, 0.0);
        for m in 1..=truncation {
            qm *= nome;
            let r = qm / (1.0 - qm);
            let mf = m as f64;
            s1 += r * mf;
            s3 += r * mf.powi(3);
            s5 += r * mf.powi(5);
        }
        let g1 = pi2 / 3.0 - s1 * (8.0 * pi2);
        let g2 = 4.0 * pi4 / 3.0 + s3 * (320.0 * pi4);
        let g3 = 8.0 * pi6 / 27.0 - s5 * (448.0 * pi6 / 3.0);

        let mut ctx = Self {
            tau,
            nome,
            g1,
            g2,
            g3,
            eta_tau: Complex64::new(0.0, 0.0),
            truncation,
            tolerance,
            tail_bound,
            pole_guard,
            sigma_radius,
        };
        ctx.eta_tau = ctx.zeta_series(tau.value() / 2.0) * 2.0;
        Ok(ctx)
    }

    pub fn tau(&self) -> Complex64 {
        self.tau.value()
    }
    pub fn nome(&self) -> Complex64 {
        self.nome
    }
    pub fn g1(&self) -> Complex64 {
        self.g1
    }
    pub fn g2(&self) -> Complex64 {
        self.g2
    }
    pub fn g3(&self) -> Complex64 {
        self.g3
    }
    pub fn eta_tau(&self) -> Complex64 {
        self.eta_tau
    }
    pub fn series_truncation(&self) -> usize {
        self.truncation
    }
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
    /// Geometric bound on the dropped part of the nome series.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }
    pub fn pole_guard(&self) -> f64 {
        self.pole_guard
    }
    pub fn sigma_radius(&self) -> f64 {
        self.sigma_radius
    }

    /// Same options at a different `tau`.
    pub fn at_tau(&self, tau: Complex64) -> Result<Self> {
        Self::with_options(tau, self.tolerance, self.pole_guard, self.sigma_radius)
    }

    /// Lattice coordinates `(s, t)` with `z = s + t tau`.
    pub fn cell_coordinates(&self, z: Complex64) -> (f64, f64) {
        let tau = self.tau();
        let t = z.im / tau.im;
        (z.re - t * tau.re, t)
    }

    /// Reduce `z` to `z0 + m + k tau` with `z0` in the centred cell.
    fn reduce(&self, z: Complex64) -> Result<(Complex64, f64, f64)> {
        let tau = self.tau();
        let k = (z.im / tau.im).round();
        let z1 = z - tau * k;
        let m = z1.re.round();
        let z0 = z1 - m;
        if z0.norm() < self.pole_guard || !z0.re.is_finite() || !z0.im.is_finite() {
            return Err(Error::Pole(format!("{z}")));
        }
        Ok((z0, m, k))
    }

    /// Weierstrass `wp(z)`.
    pub fn wp(&self, z: Complex64) -> Result<Complex64> {
        let (z0, _, _) = self.reduce(z)?;
        Ok(self.wp_series(z0))
    }

    /// `d wp / dz`.
    pub fn wp_z(&self, z: Complex64) -> Result<Complex64> {
        let (z0, _, _) = self.reduce(z)?;
        Ok(self.wp_z_series(z0))
    }

    /// `d^2 wp / dz^2`, through the rewrite `6 wp^2 - g2/2`.
    pub fn wp_zz(&self, z: Complex64) -> Result<Complex64> {
        let p = self.wp(z)?;
        Ok(p * p * 6.0 - self.g2 / 2.0)
    }

    /// Weierstrass `zeta(z)`, continued with the quasi-periods `g1` and `eta_tau`.
    pub fn zeta(&self, z: Complex64) -> Result<Complex64> {
        let (z0, m, k) = self.reduce(z)?;
        Ok(self.zeta_series(z0) + self.g1 * m + self.eta_tau * k)
    }

    /// Weierstrass `sigma(z)` on the bounded cell `max(|s|,|t|) <= sigma_radius`.
    pub fn sigma(&self, z: Complex64) -> Result<Complex64> {
        let (s, t) = self.cell_coordinates(z);
        if s.abs() > self.sigma_radius || t.abs() > self.sigma_radius {
            return Err(Error::Domain(format!(
                "sigma is only evaluated for lattice coordinates within {} of the origin; z = {z} has (s, t) = ({s:.4}, {t:.4})",
                self.sigma_radius
            )));
        }
        if z.im < 0.0 {
            return Ok(-self.sigma_upper(-z));
        }
        Ok(self.sigma_upper(z))
    }

    /// `sigma_z / sigma`, which equals `zeta`; exposed for symmetry with [`Self::log_sigma_tau`].
    pub fn log_sigma_z(&self, z: Complex64) -> Result<Complex64> {
        self.zeta(z)
    }

    /// Closed forms for `2 pi i dg_k/dtau`.
    pub fn g_tau_derivatives(&self) -> GTauDerivatives {
        let (g1, g2, g3) = (self.g1, self.g2, self.g3);
        GTauDerivatives { g1: g2 / 12.0 - g1 * g1, g2: g3 * 6.0 - g1 * g2 * 4.0, g3: g2 * g2 / 3.0 - g1 * g3 * 6.0 }
    }

    /// `d zeta / dtau` at fixed `z`, from its closed form.
    pub fn zeta_tau(&self, z: Complex64) -> Result<Complex64> {
        let p = self.wp(z)?;
        let pz = self.wp_z(z)?;
        let zt = self.zeta(z)?;
        let (g1, g2) = (self.g1, self.g2);
        let rhs = g1 * z * p + g2 * z / 12.0 - g1 * zt - zt * p - pz / 2.0;
        Ok(rhs / two_pi_i())
    }

    /// `d wp / dtau` at fixed `z`.
    pub fn wp_tau(&self, z: Complex64) -> Result<Complex64> {
        let p = self.wp(z)?;
        let pz = self.wp_z(z)?;
        let zt = self.zeta(z)?;
        let (g1, g2) = (self.g1, self.g2);
        let rhs = (zt - z * g1) * pz + p * p * 2.0 - g1 * p * 2.0 - g2 / 3.0;
        Ok(rhs / two_pi_i())
    }

    /// `d wp_z / dtau` at fixed `z`, the `z`-derivative of [`Self::wp_tau`].
    pub fn wp_z_tau(&self, z: Complex64) -> Result<Complex64> {
        let p = self.wp(z)?;
        let pz = self.wp_z(z)?;
        let zt = self.zeta(z)?;
        let (g1, g2) = (self.g1, self.g2);
        let rhs = (zt - z * g1) * (p * p * 6.0 - g2 / 2.0) + (p * 3.0 - g1 * 3.0) * pz;
        Ok(rhs / two_pi_i())
    }

    /// `sigma_tau / sigma` at fixed `z`.
    pub fn log_sigma_tau(&self, z: Complex64) -> Result<Complex64> {
        let p = self.wp(z)?;
        let zt = self.zeta(z)?;
        let (g1, g2) = (self.g1, self.g2);
        let rhs = g1 + g2 * z * z / 24.0 - z * g1 * zt + zt * zt / 2.0 - p / 2.0;
        Ok(rhs / two_pi_i())
    }

    /// `q(u, v) = zeta(v - u) + zeta(u) - g1 v`.
    pub fn q_weight(&self, u: Complex64, v: Complex64) -> Result<Complex64> {
        self.check_collision(u, v)?;
        Ok(self.zeta(v - u)? + self.zeta(u)? - self.g1 * v)
    }

    /// The same weight written through the addition identity,
    /// `(wp_u(u) + wp_v(v)) / (2 (wp(v) - wp(u))) + zeta(v) - g1 v`.
    pub fn q_weight_wp_form(&self, u: Complex64, v: Complex64) -> Result<Complex64> {
        self.check_collision(u, v)?;
        let (pu, pv) = (self.wp(u)?, self.wp(v)?);
        let (du, dv) = (self.wp_z(u)?, self.wp_z(v)?);
        Ok((du + dv) / (2.0 * (pv - pu)) + self.zeta(v)? - self.g1 * v)
    }

    fn check_collision(&self, u: Complex64, v: Complex64) -> Result<()> {
        self.reduce(v - u)?;
        let (pu, pv) = (self.wp(u)?, self.wp(v)?);
        let scale = 1.0f64.max(pu.norm()).max(pv.norm());
        if (pu - pv).norm() < self.tolerance * scale {
            return Err(Error::Collision { u: format!("{u}"), v: format!("{v}") });
        }
        Ok(())
    }

    /// Basis of elliptic functions with poles only on the lattice:
    /// `p_{2a} = wp^a`, `p_{2a+3} = -wp^a wp_z / 2`.
    pub fn basis_p(&self, alpha: i64, z: Complex64) -> Result<Complex64> {
        if alpha < 0 || alpha == 1 {
            return Err(Error::InvalidIndex(alpha));
        }
        if alpha == 0 {
            self.reduce(z)?;
            return Ok(Complex64::new(1.0, 0.0));
        }
        let p = self.wp(z)?;
        if alpha % 2 == 0 {
            Ok(p.powi((alpha / 2) as i32))
        } else {
            Ok(-p.powi(((alpha - 3) / 2) as i32) * self.wp_z(z)? / 2.0)
        }
    }

    // Series kernels. `z0` must be in the centred cell, off the origin.

    fn wp_series(&self, z0: Complex64) -> Complex64 {
        let z = if z0.im < 0.0 { -z0 } else { z0 };
        let w = (two_pi_i() * z).exp();
        let mut acc = w / ((1.0 - w) * (1.0 - w));
        let mut qn = Complex64::new(1.0, 0.0);
        let winv = 1.0 / w;
        for _ in 0..self.truncation {
            qn *= self.nome;
            let a = qn * w;
            let b = qn * winv;
            acc += a / ((1.0 - a) * (1.0 - a)) + b / ((1.0 - b) * (1.0 - b));
        }
        -self.g1 - acc * (4.0 * PI * PI)
    }

    fn wp_z_series(&self, z0: Complex64) -> Complex64 {
        let (z, sign) = if z0.im < 0.0 { (-z0, -1.0) } else { (z0, 1.0) };
        let w = (two_pi_i() * z).exp();
        let cube = |x: Complex64| x * x * x;
        let mut acc = w * (1.0 + w) / cube(1.0 - w);
        let mut qn = Complex64::new(1.0, 0.0);
        let winv = 1.0 / w;
        for _ in 0..self.truncation {
            qn *= self.nome;
            let a = qn * w;
            let b = qn * winv;
            acc += a * (1.0 + a) / cube(1.0 - a) - b * (1.0 + b) / cube(1.0 - b);
        }
        acc * Complex64::new(0.0, -8.0 * PI * PI * PI) * sign
    }

    /// Series for zeta, valid on the strip `|Im z| < Im tau` without reduction.
    fn zeta_series(&self, z0: Complex64) -> Complex64 {
        let (z, sign) = if z0.im < 0.0 { (-z0, -1.0) } else { (z0, 1.0) };
        let w = (two_pi_i() * z).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut qn = Complex64::new(1.0, 0.0);
        let winv = 1.0 / w;
        for _ in 0..self.truncation {
            qn *= self.nome;
            let a = qn * w;
            let b = qn * winv;
            acc += b / (1.0 - b) - a / (1.0 - a);
        }
        let val = self.g1 * z + I * PI * (w + 1.0) / (w - 1.0) + two_pi_i() * acc;
        val * sign
    }

    fn sigma_upper(&self, z: Complex64) -> Complex64 {
        let w = (two_pi_i() * z).exp();
        let mut prod = Complex64::new(1.0, 0.0);
        let mut qn = Complex64::new(1.0, 0.0);
        let winv = 1.0 / w;
        for _ in 0..self.truncation {
            qn *= self.nome;
            let a = qn * w;
            let b = qn * winv;
            let d = 1.0 - qn;
            prod *= (1.0 - a) * (1.0 - b) / (d * d);
        }
        let pref = I / (2.0 * PI) * (1.0 - w) * (self.g1 * z * z / 2.0 - I * PI * z).exp();
        pref * prod
    }
}

/// Smallest truncation whose geometric tail bound falls below a small fraction
/// of `tolerance`, for both the modular-form sums and the `z`-series kernels.
fn choose_truncation(qabs: f64, tolerance: f64, sigma_radius: f64) -> Result<(usize, f64)> {
    if qabs >= 1.0 {
        return Err(Error::Convergence("nome has modulus >= 1".into()));
    }
    if qabs == 0.0 {
        return Ok((1, 0.0));
    }
    let pi = PI;
    let c_g = 448.0 / 3.0 * pi.powi(6);
    let c_z = 8.0 * pi.powi(3);
    // worst exponent offset of b_n = q^n / w over the sigma domain and the reduced cell
    let offset = sigma_radius.max(0.5);
    let target = tolerance * 1e-3;
    for n in 1..=MAX_TRUNCATION {
        let m = (n + 1) as f64;
        let qm = qabs.powf(m);
        let rho_g = ((m + 1.0) / m).powi(5) * qabs;
        let t_g = c_g * m.powi(5) * qm / (1.0 - qm);
        let e = m - offset;
        let qe = qabs.powf(e);
        let rho_z = ((m + 1.0) / m).powi(2) * qabs;
        let t_z = c_z * m * m * qe / (1.0 - qe).powi(3);
        if rho_g < 1.0 && rho_z < 1.0 {
            let tail = t_g / (1.0 - rho_g) + t_z / (1.0 - rho_z);
            if tail < target {
                return Ok((n, tail));
            }
        }
    }
    Err(Error::Convergence(format!(
        "tolerance {tolerance} not reachable with {MAX_TRUNCATION} nome terms at |q| = {qabs}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ctx(tau: Complex64) -> EllipticContext {
        EllipticContext::new(tau, DEFAULT_TOLERANCE).unwrap()
    }

    #[test]
    fn q_to_zero_limits() {
        let k = ctx(c(0.0, 40.0));
        assert!((k.g1() - PI * PI / 3.0).norm() < 1e-8);
        assert!((k.g1().re - 3.28986813).abs() < 1e-8);
        assert!((k.g2().re - 129.878788).abs() < 1e-6);
        assert!((k.g3().re - 284.856057).abs() < 1e-6);
    }

    #[test]
    fn symmetric_lattices() {
        let sq = ctx(c(0.0, 1.0));
        assert!(sq.g3().norm() < 1e-9, "g3(i) = {}", sq.g3());
        let hex = ctx(Complex64::from_polar(1.0, PI / 3.0));
        assert!(hex.g2().norm() < 1e-9, "g2(rho) = {}", hex.g2());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(EllipticContext::new(c(0.1, 0.0), 1e-10), Err(Error::Domain(_))));
        assert!(matches!(EllipticContext::new(c(0.1, -1.0), 1e-10), Err(Error::Domain(_))));
        assert!(matches!(EllipticContext::new(c(0.0, 1.0), 1e-3), Err(Error::Domain(_))));
        assert!(matches!(EllipticContext::new(c(0.0, 1e-5), 1e-10), Err(Error::Convergence(_))));
    }

    #[test]
    fn deterministic_construction() {
        let a = ctx(c(0.2, 1.1));
        let b = ctx(c(0.2, 1.1));
        assert_eq!(a.g2(), b.g2());
        assert_eq!(a.series_truncation(), b.series_truncation());
        assert!(a.tail_bound() < 1e-12);
    }

    #[test]
    fn parity_and_periodicity() {
        let k = ctx(c(0.31, 0.93));
        let z = c(0.27, 0.19);
        assert!((k.wp(z).unwrap() - k.wp(-z).unwrap()).norm() < 1e-10);
        assert!((k.wp(z + 1.0).unwrap() - k.wp(z).unwrap()).norm() < 1e-10);
        assert!((k.wp(z + k.tau()).unwrap() - k.wp(z).unwrap()).norm() < 1e-10);
        assert!((k.zeta(z).unwrap() + k.zeta(-z).unwrap()).norm() < 1e-10);
        assert!((k.zeta(z + 1.0).unwrap() - k.zeta(z).unwrap() - k.g1()).norm() < 1e-10);
        assert!((k.sigma(z).unwrap() + k.sigma(-z).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn legendre_relation_for_tau_quasi_period() {
        let k = ctx(c(-0.2, 1.3));
        let expected = k.g1() * k.tau() - two_pi_i();
        assert!((k.eta_tau() - expected).norm() < 1e-9);
    }

    #[test]
    fn behaviour_near_origin() {
        let k = ctx(c(0.1, 1.2));
        let dir = Complex64::from_polar(1.0, 0.7);
        for &r in &[1e-2, 1e-3] {
            let z = dir * r;
            assert!((k.wp(z).unwrap() - 1.0 / (z * z)).norm() < 10.0 * r * r + 1e-6);
            assert!((z * k.zeta(z).unwrap() - 1.0).norm() < 10.0 * r * r);
            assert!((k.sigma(z).unwrap() / z - 1.0).norm() < 10.0 * r * r);
        }
    }

    #[test]
    fn half_period_zero_of_wp_z() {
        let k = ctx(c(0.3, 0.9));
        assert!(k.wp_z(c(0.5, 0.0)).unwrap().norm() < 1e-9);
    }

    #[test]
    fn pole_and_domain_errors() {
        let k = ctx(c(0.0, 1.0));
        assert!(matches!(k.wp(c(1.0, 1.0)), Err(Error::Pole(_))));
        assert!(matches!(k.zeta(c(0.0, 0.0)), Err(Error::Pole(_))));
        assert!(matches!(k.sigma(c(0.9, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(k.basis_p(1, c(0.2, 0.1)), Err(Error::InvalidIndex(1))));
    }

    #[test]
    fn log_derivative_of_sigma_by_central_difference() {
        let k = ctx(c(0.05, 1.05));
        let z = c(0.21, -0.13);
        let h = 1e-6;
        let fd = (k.sigma(z + h).unwrap().ln() - k.sigma(z - h).unwrap().ln()) / (2.0 * h);
        assert!((fd - k.zeta(z).unwrap()).norm() < 1e-7);
    }

    #[test]
    fn basis_elements() {
        let k = ctx(c(0.0, 1.1));
        let z = c(0.17, 0.23);
        assert_eq!(k.basis_p(0, z).unwrap(), c(1.0, 0.0));
        assert!((k.basis_p(2, z).unwrap() - k.wp(z).unwrap()).norm() < 1e-12);
        assert!((k.basis_p(3, z).unwrap() + k.wp_z(z).unwrap() / 2.0).norm() < 1e-12);
        for alpha in [2i64, 3, 4, 5, 6] {
            let small = Complex64::from_polar(1e-3, 0.4);
            let v = k.basis_p(alpha, small).unwrap() * small.powi(alpha as i32);
            assert!(v.norm() < 2.0 && v.norm() > 0.1, "alpha {alpha}: {v}");
            let shifted = k.basis_p(alpha, z + k.tau() + 1.0).unwrap();
            assert!((shifted - k.basis_p(alpha, z).unwrap()).norm() < 1e-8 * (1.0 + shifted.norm()));
        }
    }

    #[test]
    fn q_weight_forms_agree_and_collision() {
        let k = ctx(c(0.12, 0.97));
        let (u, v) = (c(0.21, 0.11), c(-0.14, 0.29));
        let a = k.q_weight(u, v).unwrap();
        let b = k.q_weight_wp_form(u, v).unwrap();
        assert!((a - b).norm() < 1e-9);
        assert!((a - k.q_weight(u + 1.0, v).unwrap()).norm() < 1e-9);
        assert!(matches!(k.q_weight(u, -u), Err(Error::Collision { .. })));
    }
}
