//! Numeric r-matrix coefficients and the sigma-function realization on flat
//! fields `t_1, ..., t_{n-1}, tau, f`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::elliptic::EllipticContext;
use crate::error::{Error, Result};
use crate::numdiff::DEFAULT_NODES;

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * PI)
}

/// Values of a realization at one spectral point: `e`, `e_w`, `e_x`, `e_wx`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EPoint {
    pub e: Complex64,
    pub e_w: Complex64,
    pub e_x: Complex64,
    pub e_wx: Complex64,
}

/// `q(a, b) = zeta(b - a) + zeta(a) - g1 b`, through the addition identity.
pub fn q_weight(ctx: &EllipticContext, a: Complex64, b: Complex64) -> Result<Complex64> {
    ctx.q_weight_wp_form(a, b)
}

/// `d q(a, b) / d b = -wp(b - a) - g1`.
fn q_second(ctx: &EllipticContext, a: Complex64, b: Complex64) -> Result<Complex64> {
    Ok(-ctx.wp(b - a)? - ctx.g1())
}

/// `d q(a, b) / d tau` at fixed `a, b`.
fn q_tau(ctx: &EllipticContext, a: Complex64, b: Complex64) -> Result<Complex64> {
    let g1_tau = ctx.g_tau_derivatives().g1 / two_pi_i();
    Ok(ctx.zeta_tau(b - a)? + ctx.zeta_tau(a)? - g1_tau * b)
}

/// `delta'` coefficient of `{e(u,x), e(v,y)}`.
pub fn rmatrix_delta_prime_coeff(
    ctx: &EllipticContext,
    u: Complex64,
    v: Complex64,
    eu: &EPoint,
    ev: &EPoint,
    lambda: f64,
) -> Result<Complex64> {
    let q_vu = q_weight(ctx, v, u)?;
    let q_uv = q_weight(ctx, u, v)?;
    Ok(q_vu * eu.e_w * ev.e + q_uv * eu.e * ev.e_w + lambda * eu.e_w * ev.e_w)
}

/// `delta` coefficient of `{e(u,x), e(v,y)}`; `tau_x` is `tau'(x)`.
pub fn rmatrix_delta_coeff(
    ctx: &EllipticContext,
    u: Complex64,
    v: Complex64,
    eu: &EPoint,
    ev: &EPoint,
    tau_x: Complex64,
    lambda: f64,
) -> Result<Complex64> {
    let q_vu = q_weight(ctx, v, u)?;
    let q_uv = q_weight(ctx, u, v)?;
    Ok(q_tau(ctx, v, u)? * eu.e_w * ev.e * tau_x
        + q_second(ctx, v, u)? * (eu.e * ev.e_x - ev.e * eu.e_x)
        + q_vu * eu.e_w * ev.e_x
        + q_uv * eu.e * ev.e_wx
        + lambda * eu.e_w * ev.e_wx)
}

/// Field values `t_1..t_{n-1}, tau, f` in that order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatPoint {
    pub t: Vec<Complex64>,
    pub tau: Complex64,
    pub f: Complex64,
}

impl FlatPoint {
    fn shifted(&self, dir: &FlatPoint, eps: Complex64) -> FlatPoint {
        FlatPoint {
            t: self.t.iter().zip(&dir.t).map(|(a, b)| a + eps * b).collect(),
            tau: self.tau + eps * dir.tau,
            f: self.f + eps * dir.f,
        }
    }

    fn norm(&self) -> f64 {
        self.t.iter().map(|z| z.norm()).fold(self.tau.norm().max(self.f.norm()), f64::max)
    }
}

/// `e` and its first partials: `d/dt_i`, `d/dtau`, `d/df`, and the spectral `d/dw`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub e: Complex64,
    pub fields: Vec<Complex64>,
    pub w: Complex64,
}

impl Gradient {
    fn as_vec(&self) -> Vec<Complex64> {
        let mut v = self.fields.clone();
        v.push(self.w);
        v
    }
}

/// The sigma-function product realization.
#[derive(Clone, Debug)]
pub struct Thm2Realization {
    pub n: usize,
    tolerance: f64,
    /// Radius of the contour for directional derivatives, per unit of jet norm.
    pub step: f64,
}

impl Thm2Realization {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("need n >= 2, got {n}")));
        }
        Ok(Thm2Realization { n, tolerance: 1e-13, step: 0.01 })
    }

    fn context(&self, tau: Complex64) -> Result<EllipticContext> {
        EllipticContext::new(tau, self.tolerance)
    }

    fn check(&self, p: &FlatPoint) -> Result<()> {
        if p.t.len() != self.n - 1 {
            return Err(Error::Domain(format!("expected {} flat fields, got {}", self.n - 1, p.t.len())));
        }
        Ok(())
    }

    /// `e(w, x) = sigma(w + S) prod sigma(w - t_a) / sigma(w)^n exp(-g1 sum_{a<=b} t_a t_b) f`.
    pub fn value(&self, w: Complex64, p: &FlatPoint) -> Result<Complex64> {
        self.check(p)?;
        let ctx = self.context(p.tau)?;
        let s: Complex64 = p.t.iter().sum();
        let mut num = ctx.sigma(w + s)?;
        for t in &p.t {
            num *= ctx.sigma(w - t)?;
        }
        let quad = (s * s + p.t.iter().map(|t| t * t).sum::<Complex64>()) / 2.0;
        Ok(num / ctx.sigma(w)?.powi(self.n as i32) * (-ctx.g1() * quad).exp() * p.f)
    }

    /// Closed-form first partials through the logarithmic derivative.
    pub fn gradient(&self, w: Complex64, p: &FlatPoint) -> Result<Gradient> {
        let e = self.value(w, p)?;
        let ctx = self.context(p.tau)?;
        let g1 = ctx.g1();
        let g1_tau = ctx.g_tau_derivatives().g1 / two_pi_i();
        let s: Complex64 = p.t.iter().sum();
        let quad = (s * s + p.t.iter().map(|t| t * t).sum::<Complex64>()) / 2.0;
        let z_sum = ctx.zeta(w + s)?;
        let mut fields = Vec::with_capacity(self.n + 1);
        for t in &p.t {
            fields.push(e * (z_sum - ctx.zeta(w - t)? - g1 * (s + t)));
        }
        let mut l_tau = ctx.log_sigma_tau(w + s)? - ctx.log_sigma_tau(w)? * self.n as f64 - g1_tau * quad;
        let mut l_w = z_sum - ctx.zeta(w)? * self.n as f64;
        for t in &p.t {
            l_tau += ctx.log_sigma_tau(w - t)?;
            l_w += ctx.zeta(w - t)?;
        }
        fields.push(e * l_tau);
        fields.push(e / p.f);
        Ok(Gradient { e, fields, w: e * l_w })
    }

    /// Directional derivative of the gradient along the jet `dp`, i.e. the
    /// x-derivatives of all first partials.
    pub fn gradient_x(&self, w: Complex64, p: &FlatPoint, dp: &FlatPoint) -> Result<Vec<Complex64>> {
        let radius = self.step / dp.norm().max(1.0);
        let nodes = DEFAULT_NODES;
        let mut acc: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); self.n + 2];
        for j in 0..nodes {
            let z = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / nodes as f64);
            let g = self.gradient(w, &p.shifted(dp, z * radius))?.as_vec();
            for (a, v) in acc.iter_mut().zip(g) {
                *a += v / z;
            }
        }
        Ok(acc.into_iter().map(|a| a / (nodes as f64 * radius)).collect())
    }

    /// `e, e_w, e_x, e_wx` at one spectral point.
    pub fn epoint(&self, w: Complex64, p: &FlatPoint, dp: &FlatPoint) -> Result<(EPoint, Gradient, Vec<Complex64>)> {
        let g = self.gradient(w, p)?;
        let gx = self.gradient_x(w, p, dp)?;
        let e_x = jet_contract(&g.fields, dp);
        let pt = EPoint { e: g.e, e_w: g.w, e_x, e_wx: gx[self.n + 1] };
        Ok((pt, g, gx))
    }
}

fn jet_contract(fields: &[Complex64], dp: &FlatPoint) -> Complex64 {
    let mut v = Complex64::new(0.0, 0.0);
    for (d, t) in fields.iter().zip(&dp.t) {
        v += d * t;
    }
    let k = dp.t.len();
    v + fields[k] * dp.tau + fields[k + 1] * dp.f
}

/// Flat metric on `t`: `1/n` off the diagonal, `-(n-1)/n` on it.
fn kappa(n: usize, i: usize, j: usize) -> f64 {
    if i == j {
        -((n - 1) as f64) / n as f64
    } else {
        1.0 / n as f64
    }
}

/// Both sides of the `delta'` and `delta` coefficients at one sample.
#[derive(Clone, Debug, Serialize)]
pub struct Thm2Sample {
    pub u: Complex64,
    pub v: Complex64,
    pub point: FlatPoint,
    pub jet: FlatPoint,
    pub lhs: [Complex64; 2],
    pub rhs: [Complex64; 2],
    pub residual: f64,
}

/// Compare the induced bracket `{e(u,x), e(v,y)}` with the r-matrix form.
pub fn thm2_sample(
    r: &Thm2Realization,
    u: Complex64,
    v: Complex64,
    p: &FlatPoint,
    dp: &FlatPoint,
    lambda: f64,
) -> Result<Thm2Sample> {
    let n = r.n;
    let ctx = r.context(p.tau)?;
    let (eu, gu, _) = r.epoint(u, p, dp)?;
    let (ev, gv, gvx) = r.epoint(v, p, dp)?;
    let k = n - 1;
    let (tau_u, tau_v, tau_vx) = (gu.fields[k], gv.fields[k], gvx[k]);
    let mut c1 = two_pi_i() * (tau_u * ev.e + eu.e * tau_v);
    let mut c0 = two_pi_i() * (tau_u * ev.e_x + eu.e * tau_vx);
    for i in 0..k {
        for j in 0..k {
            let w = kappa(n, i, j);
            c1 += w * gu.fields[i] * gv.fields[j];
            c0 += w * gu.fields[i] * gvx[j];
        }
    }
    let r1 = rmatrix_delta_prime_coeff(&ctx, u, v, &eu, &ev, lambda)?;
    let r0 = rmatrix_delta_coeff(&ctx, u, v, &eu, &ev, dp.tau, lambda)?;
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / a.norm().max(b.norm()).max(1.0);
    Ok(Thm2Sample {
        u,
        v,
        point: p.clone(),
        jet: dp.clone(),
        lhs: [c1, c0],
        rhs: [r1, r0],
        residual: rel(c1, r1).max(rel(c0, r0)),
    })
}

fn uniform(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    Complex64::new(rng.random_range(-r..r), rng.random_range(-r..r))
}

fn annulus(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Complex64 {
    Complex64::from_polar(rng.random_range(lo..hi), rng.random_range(0.0..2.0 * PI))
}

/// A random sample with small `t`, spectral points in the central cell and
/// well-separated `wp(u)`, `wp(v)`.
pub fn random_sample(n: usize, rng: &mut ChaCha8Rng) -> (Complex64, Complex64, FlatPoint, FlatPoint) {
    loop {
        let tau = Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(0.8..2.0));
        let t: Vec<Complex64> = (0..n - 1).map(|_| uniform(rng, 0.08)).collect();
        let p = FlatPoint { t, tau, f: annulus(rng, 0.5, 1.5) };
        let dp = FlatPoint {
            t: (0..n - 1).map(|_| annulus(rng, 0.2, 2.0)).collect(),
            tau: annulus(rng, 0.2, 2.0),
            f: annulus(rng, 0.2, 2.0),
        };
        let (u, v) = (uniform(rng, 0.3), uniform(rng, 0.3));
        let sep = u.norm().min(v.norm()).min((u - v).norm()).min((u + v).norm());
        if sep > 0.1 {
            return (u, v, p, dp);
        }
    }
}

/// Summary of the realization check over random samples.
#[derive(Clone, Debug, Serialize)]
pub struct Thm2Report {
    pub n: usize,
    pub lambda: f64,
    pub seed: u64,
    pub samples: Vec<Thm2Sample>,
    pub max_residual: f64,
    /// `|e - f|` at `t = 0`.
    pub trivial_point: f64,
    /// `|f de/df - e|`, the `delta'` coefficient of `{tau, e}` minus `2 pi i e`, over `2 pi i`.
    pub tau_row: f64,
}

/// Sample `trials` points for the given `n` and compare both sides.
pub fn thm2_check(n: usize, trials: usize, seed: u64, lambda: Option<f64>) -> Result<Thm2Report> {
    let r = Thm2Realization::new(n)?;
    let lambda = lambda.unwrap_or(1.0 / n as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(trials);
    let mut trivial: f64 = 0.0;
    let mut tau_row: f64 = 0.0;
    for _ in 0..trials {
        let (u, v, p, dp) = random_sample(n, &mut rng);
        let zero = FlatPoint { t: vec![Complex64::new(0.0, 0.0); n - 1], ..p.clone() };
        trivial = trivial.max((r.value(u, &zero)? - p.f).norm());
        let g = r.gradient(u, &p)?;
        tau_row = tau_row.max((g.fields[n] * p.f - g.e).norm() / g.e.norm().max(1.0));
        samples.push(thm2_sample(&r, u, v, &p, &dp, lambda)?);
    }
    let max_residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    Ok(Thm2Report { n, lambda, seed, samples, max_residual, trivial_point: trivial, tau_row })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numdiff::contour_derivative;

    fn ctx() -> EllipticContext {
        EllipticContext::new(Complex64::new(0.2, 1.1), 1e-13).unwrap()
    }

    fn random_epoint(rng: &mut ChaCha8Rng) -> EPoint {
        EPoint {
            e: annulus(rng, 0.5, 2.0),
            e_w: annulus(rng, 0.5, 2.0),
            e_x: annulus(rng, 0.5, 2.0),
            e_wx: annulus(rng, 0.5, 2.0),
        }
    }

    #[test]
    fn coefficients_are_antisymmetric_at_arbitrary_values() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (u, v) = (Complex64::new(0.21, 0.13), Complex64::new(-0.17, 0.29));
        let (eu, ev) = (random_epoint(&mut rng), random_epoint(&mut rng));
        let (eu_wx, ev_wx) = (annulus(&mut rng, 0.5, 2.0), annulus(&mut rng, 0.5, 2.0));
        let tau_x = annulus(&mut rng, 0.5, 2.0);
        let (eu, ev) = (EPoint { e_wx: eu_wx, ..eu }, EPoint { e_wx: ev_wx, ..ev });
        let lam = 0.37;
        let a = rmatrix_delta_prime_coeff(&c, u, v, &eu, &ev, lam).unwrap();
        let b = rmatrix_delta_prime_coeff(&c, v, u, &ev, &eu, lam).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm());

        // B(u,v) + B(v,u) must equal the x-derivative of the delta' coefficient.
        let d_uv = rmatrix_delta_coeff(&c, u, v, &eu, &ev, tau_x, lam).unwrap();
        let d_vu = rmatrix_delta_coeff(&c, v, u, &ev, &eu, tau_x, lam).unwrap();
        let (q_vu, q_uv) = (q_weight(&c, v, u).unwrap(), q_weight(&c, u, v).unwrap());
        let a_x = (q_tau(&c, v, u).unwrap() * eu.e_w * ev.e + q_tau(&c, u, v).unwrap() * eu.e * ev.e_w) * tau_x
            + q_vu * (eu.e_wx * ev.e + eu.e_w * ev.e_x)
            + q_uv * (eu.e_x * ev.e_w + eu.e * ev.e_wx)
            + lam * (eu.e_wx * ev.e_w + eu.e_w * ev.e_wx);
        assert!((d_uv + d_vu - a_x).norm() < 1e-10 * a_x.norm(), "{} vs {}", d_uv + d_vu, a_x);
    }

    #[test]
    fn constant_realization_has_no_delta_prime_term() {
        let c = ctx();
        let e = EPoint {
            e: Complex64::new(1.3, -0.4),
            e_w: Complex64::new(0.0, 0.0),
            e_x: Complex64::new(0.2, 0.0),
            e_wx: Complex64::new(0.0, 0.0),
        };
        let a =
            rmatrix_delta_prime_coeff(&c, Complex64::new(0.2, 0.1), Complex64::new(-0.1, 0.3), &e, &e, 0.5).unwrap();
        assert_eq!(a, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn lambda_term_is_linear() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (eu, ev) = (random_epoint(&mut rng), random_epoint(&mut rng));
        let (u, v) = (Complex64::new(0.2, 0.1), Complex64::new(-0.1, 0.3));
        let a0 = rmatrix_delta_prime_coeff(&c, u, v, &eu, &ev, 0.0).unwrap();
        let a1 = rmatrix_delta_prime_coeff(&c, u, v, &eu, &ev, 0.4).unwrap();
        let a2 = rmatrix_delta_prime_coeff(&c, u, v, &eu, &ev, 0.8).unwrap();
        assert!(((a2 - a0) - (a1 - a0) * 2.0).norm() < 1e-12 * a1.norm());
        assert!(((a1 - a0) - eu.e_w * ev.e_w * 0.4).norm() < 1e-12 * a1.norm());
    }

    #[test]
    fn weights_agree_with_zeta_form() {
        let c = ctx();
        let (u, v) = (Complex64::new(0.2, 0.1), Complex64::new(-0.1, 0.3));
        assert!((q_weight(&c, u, v).unwrap() - c.q_weight(u, v).unwrap()).norm() < 1e-10);
        let d = contour_derivative(|b| c.q_weight(u, b), v, 0.01, 1, DEFAULT_NODES).unwrap();
        assert!((d - q_second(&c, u, v).unwrap()).norm() < 1e-9);
        let tau = c.tau();
        let dt = contour_derivative(|s| EllipticContext::new(s, 1e-13)?.q_weight(u, v), tau, 0.01, 1, DEFAULT_NODES)
            .unwrap();
        assert!((dt - q_tau(&c, u, v).unwrap()).norm() < 1e-8, "{dt} vs {}", q_tau(&c, u, v).unwrap());
    }

    #[test]
    fn analytic_gradient_matches_contour_derivatives() {
        let r = Thm2Realization::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (u, _, p, _) = random_sample(3, &mut rng);
        let g = r.gradient(u, &p).unwrap();
        for i in 0..2 {
            let d = contour_derivative(
                |x| {
                    let mut q = p.clone();
                    q.t[i] = x;
                    r.value(u, &q)
                },
                p.t[i],
                0.01,
                1,
                DEFAULT_NODES,
            )
            .unwrap();
            assert!((d - g.fields[i]).norm() < 1e-9 * g.e.norm().max(1.0), "t{i}: {d} vs {}", g.fields[i]);
        }
        let d = contour_derivative(|s| r.value(u, &FlatPoint { tau: s, ..p.clone() }), p.tau, 0.01, 1, DEFAULT_NODES)
            .unwrap();
        assert!((d - g.fields[2]).norm() < 1e-9 * g.e.norm().max(1.0), "tau: {d} vs {}", g.fields[2]);
        let d = contour_derivative(|w| r.value(w, &p), u, 0.01, 1, DEFAULT_NODES).unwrap();
        assert!((d - g.w).norm() < 1e-9 * g.e.norm().max(1.0));
    }

    #[test]
    fn realization_is_trivial_at_zero_and_scales_with_tau() {
        let rep = thm2_check(2, 3, 5, None).unwrap();
        assert!(rep.trivial_point < 1e-12, "{}", rep.trivial_point);
        assert!(rep.tau_row < 1e-12);
    }

    #[test]
    fn realization_satisfies_the_rmatrix_bracket() {
        for n in [2, 3] {
            let rep = thm2_check(n, 10, 17 + n as u64, None).unwrap();
            assert!(rep.max_residual < 1e-8, "n = {n}: {}", rep.max_residual);
        }
    }

    #[test]
    fn wrong_lambda_is_detected() {
        let rep = thm2_check(2, 3, 3, Some(0.3)).unwrap();
        assert!(rep.max_residual > 1e-4, "{}", rep.max_residual);
    }

    #[test]
    fn single_field_is_rejected() {
        assert!(Thm2Realization::new(1).is_err());
    }
}
