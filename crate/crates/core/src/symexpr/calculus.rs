//! Derivations on the polynomial ring and the reductions they rely on.

use std::collections::BTreeMap;

use num_traits::One;

use super::poly::{rat, Monomial, Poly, Rational};
use super::symbol::{Spectral, Symbol};
use crate::error::{Error, Result};

fn sym(s: Symbol) -> Poly {
    Poly::var(s)
}

/// `wp_z^2` expressed through `wp`.
pub fn weierstrass_cubic(s: Spectral) -> Poly {
    let x = sym(Symbol::Wp(s));
    &(&x.pow(3).scale(rat(4, 1)) - &(&sym(Symbol::G2) * &x)) - &sym(Symbol::G3)
}

/// Apply a derivation given by its values on leaves. Leaves mapped to
/// `None` are constants.
pub fn derivation(p: &Poly, leaf: impl Fn(Symbol) -> Option<Poly>) -> Poly {
    let mut cache: BTreeMap<Symbol, Option<Poly>> = BTreeMap::new();
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        for &(s, e) in m.factors() {
            let d = cache.entry(s).or_insert_with(|| leaf(s).filter(|d| !d.is_zero()));
            if let Some(d) = d {
                let rest = m.with_power(s, e - 1);
                out += &d.mul_monomial(&rest, *c * Rational::from_integer(e as i128));
            }
        }
    }
    polynomial_reduce(&out)
}

/// Spectral derivative `d/du` (or `d/dv`).
pub fn d_dz_spectral(p: &Poly, var: Spectral) -> Poly {
    derivation(p, |s| match s {
        Symbol::Spectral(v) if v == var => Some(Poly::one()),
        Symbol::Zeta(v) if v == var => Some(-sym(Symbol::Wp(v))),
        Symbol::Wp(v) if v == var => Some(sym(Symbol::WpD(v))),
        Symbol::WpD(v) if v == var => {
            Some(&sym(Symbol::Wp(v)).pow(2).scale(rat(6, 1)) - &sym(Symbol::G2).scale(rat(1, 2)))
        }
        _ => None,
    })
}

/// `2 pi i d/dtau` of a builtin leaf, `None` for leaves independent of tau.
pub fn builtin_tau_derivative(s: Symbol) -> Option<Poly> {
    let g1 = || sym(Symbol::G1);
    let g2 = || sym(Symbol::G2);
    let g3 = || sym(Symbol::G3);
    match s {
        Symbol::G1 => Some(&g2().scale(rat(1, 12)) - &g1().pow(2)),
        Symbol::G2 => Some(&g3().scale(rat(6, 1)) - &(&g1() * &g2()).scale(rat(4, 1))),
        Symbol::G3 => Some(&g2().pow(2).scale(rat(1, 3)) - &(&g1() * &g3()).scale(rat(6, 1))),
        Symbol::Wp(v) => {
            let x = sym(Symbol::Wp(v));
            let shift = &sym(Symbol::Zeta(v)) - &(&sym(Symbol::Spectral(v)) * &g1());
            Some(
                &(&(&shift * &sym(Symbol::WpD(v))) + &x.pow(2).scale(rat(2, 1)))
                    - &(&(&g1() * &x).scale(rat(2, 1)) + &g2().scale(rat(1, 3))),
            )
        }
        Symbol::WpD(v) => {
            let x = sym(Symbol::Wp(v));
            let shift = &sym(Symbol::Zeta(v)) - &(&sym(Symbol::Spectral(v)) * &g1());
            let wpzz = &x.pow(2).scale(rat(6, 1)) - &g2().scale(rat(1, 2));
            Some(&(&shift * &wpzz) + &(&(&x - &g1()).scale(rat(3, 1)) * &sym(Symbol::WpD(v))))
        }
        Symbol::Zeta(v) => {
            let z = sym(Symbol::Spectral(v));
            let x = sym(Symbol::Wp(v));
            let zeta = sym(Symbol::Zeta(v));
            let mut out = &(&g1() * &z) * &x;
            out += &(&g2() * &z).scale(rat(1, 12));
            out -= &(&g1() * &zeta);
            out -= &(&zeta * &x);
            out -= &sym(Symbol::WpD(v)).scale(rat(1, 2));
            Some(out)
        }
        _ => None,
    }
}

/// `2 pi i d/dtau` at fixed jets and spectral variables.
pub fn tau_deriv(p: &Poly) -> Poly {
    derivation(p, builtin_tau_derivative)
}

/// `x`-derivative of a leaf: jets prolong, builtins pick up `-T` times
/// their `2 pi i d/dtau` derivative.
pub fn leaf_x_derivative(s: Symbol) -> Option<Poly> {
    match s {
        Symbol::Jet(f, k) => Some(sym(Symbol::Jet(f, k + 1))),
        Symbol::T(k) => Some(sym(Symbol::T(k + 1))),
        _ if s.is_builtin() => builtin_tau_derivative(s).map(|d| -(&sym(Symbol::T(0)) * &d)),
        _ => None,
    }
}

/// Total derivative along the loop variable `x`.
pub fn total_x_derivative(p: &Poly) -> Poly {
    derivation(p, leaf_x_derivative)
}

pub fn total_x_derivative_n(p: &Poly, k: usize) -> Poly {
    let mut out = p.clone();
    for _ in 0..k {
        out = total_x_derivative(&out);
    }
    out
}

/// Reduce `wp_z` powers to at most one via the Weierstrass cubic and
/// powers of the imaginary unit via `i^2 = -1`.
pub fn polynomial_reduce(p: &Poly) -> Poly {
    let needs = |m: &Monomial| {
        m.factors().iter().any(|&(s, e)| match s {
            Symbol::WpD(_) => !(0..=1).contains(&e),
            Symbol::I => !(0..=1).contains(&e),
            _ => false,
        })
    };
    if !p.terms().any(|(m, _)| needs(m)) {
        return p.clone();
    }
    let mut cubic_pow: BTreeMap<(Spectral, u32), Poly> = BTreeMap::new();
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        if !needs(m) {
            out.add_term(m.clone(), *c);
            continue;
        }
        let mut coeff = *c;
        let mut kept = Vec::new();
        let mut extra = Poly::one();
        for &(s, e) in m.factors() {
            match s {
                Symbol::WpD(v) if e >= 2 => {
                    let (q, r) = (e / 2, e % 2);
                    let cp =
                        cubic_pow.entry((v, q as u32)).or_insert_with(|| weierstrass_cubic(v).pow(q as u32)).clone();
                    extra = &extra * &cp;
                    if r == 1 {
                        kept.push((s, 1));
                    }
                }
                Symbol::I => {
                    let r = e.rem_euclid(4);
                    if r >= 2 {
                        coeff = -coeff;
                    }
                    if r % 2 == 1 {
                        kept.push((s, 1));
                    }
                }
                _ => kept.push((s, e)),
            }
        }
        out += &extra.mul_monomial(&Monomial::from_pairs(kept), coeff);
    }
    out
}

/// Exact quotient `num / den`; fails unless the division leaves no remainder.
pub fn exact_divide(num: &Poly, den: &Poly) -> Result<Poly> {
    if den.is_zero() {
        return Err(Error::Divisibility("division by zero".into()));
    }
    if num.is_zero() {
        return Ok(Poly::zero());
    }
    if den.len() == 1 {
        let (m, c) = den.terms().next().map(|(m, c)| (m.clone(), *c)).unwrap();
        let inv = Monomial::from_pairs(m.factors().iter().map(|&(s, e)| (s, -e)).collect());
        return Ok(num.mul_monomial(&inv, c.recip()));
    }
    let main = den.symbols().into_iter().max_by_key(|&s| (den.degree_in(s), std::cmp::Reverse(s))).unwrap();
    if num.min_degree_in(main) < 0 || den.min_degree_in(main) < 0 {
        return Err(Error::Divisibility(format!("negative powers of {main}")));
    }
    let dd = den.degree_in(main);
    if dd == 0 {
        return Err(Error::Divisibility("denominator has no main variable".into()));
    }
    let lead = den.coeff_of_power(main, dd);
    let mut rem = num.clone();
    let mut quot = Poly::zero();
    loop {
        if rem.is_zero() {
            return Ok(quot);
        }
        let rd = rem.degree_in(main);
        if rd < dd {
            return Err(Error::Divisibility(format!("remainder {rem} modulo {den}")));
        }
        let lc = rem.coeff_of_power(main, rd);
        let q = exact_divide(&lc, &lead)?;
        let step = q.mul_monomial(&Monomial::var(main, rd - dd), Rational::one());
        rem -= &(&step * den);
        quot += &step;
        if rem.degree_in(main) >= rd && !rem.coeff_of_power(main, rd).is_zero() {
            return Err(Error::Divisibility("division did not make progress".into()));
        }
    }
}

/// Substitute `T^(k) -> 0` for all `k`, freezing the modular field.
pub fn freeze_tau(p: &Poly) -> Poly {
    Poly::from_terms(
        p.terms()
            .filter(|(m, _)| !m.factors().iter().any(|(s, _)| matches!(s, Symbol::T(_))))
            .map(|(m, c)| (m.clone(), *c)),
    )
}

/// Does the polynomial mention bare spectral variables or zeta leaves?
pub fn has_transcendental_leaves(p: &Poly) -> bool {
    p.any_symbol(|s| matches!(s, Symbol::Spectral(_) | Symbol::Zeta(_)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{EllipticContext, DEFAULT_TOLERANCE};
    use crate::symexpr::jets::sample_jets;
    use crate::symexpr::symbol::Field;
    use num_complex::Complex64;

    const U: Spectral = Spectral::U;

    fn p(s: &str) -> Poly {
        Poly::parse(s).unwrap()
    }

    #[test]
    fn spectral_derivative_rules() {
        assert_eq!(d_dz_spectral(&sym(Symbol::Zeta(U)), U), p("-wp(u)"));
        assert_eq!(d_dz_spectral(&p("g2*z0'"), U), Poly::zero());
        let sq = d_dz_spectral(&sym(Symbol::WpD(U)).pow(2), U);
        let expected = d_dz_spectral(&weierstrass_cubic(U), U);
        assert_eq!(sq, expected);
        assert_eq!(sq, p("-g2*wpd(u) + 12*wp(u)^2*wpd(u)"));
    }

    #[test]
    fn x_derivative_of_modular_forms() {
        assert_eq!(total_x_derivative(&p("g2")), p("-6*g3*T + 4*g1*g2*T"));
        assert_eq!(total_x_derivative(&p("z3")), p("z3'"));
        assert_eq!(total_x_derivative(&p("T'")), p("T''"));
        assert_eq!(total_x_derivative(&p("c1*u")), Poly::zero());
    }

    #[test]
    fn reduction() {
        assert_eq!(polynomial_reduce(&p("wpd(u)^2")), weierstrass_cubic(U));
        assert_eq!(polynomial_reduce(&p("wpd(u)^3")), &weierstrass_cubic(U) * &sym(Symbol::WpD(U)));
        let r = polynomial_reduce(&p("i^2*g1 + i^3 + wpd(v)*wpd(u)"));
        assert_eq!(r, p("-g1 - i + wpd(u)*wpd(v)"));
        assert_eq!(polynomial_reduce(&r), r);
    }

    #[test]
    fn division() {
        assert_eq!(exact_divide(&p("u^2 - v^2"), &p("u - v")).unwrap(), p("u + v"));
        assert!(matches!(exact_divide(&p("u^2 + v^2"), &p("u - v")), Err(Error::Divisibility(_))));
        let a = p("g1*wp(u)^2 - 3*wp(v)*z0 + 1/2*wpd(u)");
        let d = p("wp(u) - wp(v)");
        assert_eq!(exact_divide(&(&(&a * &d) * &d), &d.pow(2)).unwrap(), a);
    }

    #[test]
    fn cubic_vanishes_on_consistent_jets() {
        let ctx = EllipticContext::new(Complex64::new(0.1, 1.2), DEFAULT_TOLERANCE).unwrap();
        let jets = sample_jets(&ctx, &[Field::Z(0)], 2, 7);
        let r = &(&sym(Symbol::WpD(U)).pow(2) - &weierstrass_cubic(U));
        assert!(r.eval(&jets).unwrap().norm() < 1e-8);
        let e = p("g2*z0");
        let want = ctx.g2() * jets.value_of(Symbol::Jet(Field::Z(0), 0)).unwrap();
        assert!((e.eval(&jets).unwrap() - want).norm() < 1e-12);
        assert_eq!(Poly::zero().eval(&jets).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn spectral_and_x_derivatives_commute() {
        let ctx = EllipticContext::new(Complex64::new(-0.2, 0.9), DEFAULT_TOLERANCE).unwrap();
        for seed in 0..5 {
            let jets = sample_jets(&ctx, &[Field::Z(0)], 3, seed);
            for leaf in [Symbol::Wp(U), Symbol::WpD(U), Symbol::Zeta(U), Symbol::Spectral(U)] {
                let e = &sym(leaf) * &p("z0");
                let a = d_dz_spectral(&total_x_derivative(&e), U);
                let b = total_x_derivative(&d_dz_spectral(&e, U));
                let r = (&a - &b).eval(&jets).unwrap();
                assert!(r.norm() < 1e-9, "{leaf}: {r}");
            }
        }
    }

    #[test]
    fn tau_derivatives_match_finite_differences() {
        let tau = Complex64::new(0.13, 1.05);
        let u = Complex64::new(0.21, 0.17);
        let h = 1e-5;
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let values = |t: Complex64| {
            let c = EllipticContext::new(t, DEFAULT_TOLERANCE).unwrap();
            move |s: Symbol| -> Option<Complex64> {
                Some(match s {
                    Symbol::G1 => c.g1(),
                    Symbol::G2 => c.g2(),
                    Symbol::G3 => c.g3(),
                    Symbol::Wp(_) => c.wp(u).ok()?,
                    Symbol::WpD(_) => c.wp_z(u).ok()?,
                    Symbol::Zeta(_) => c.zeta(u).ok()?,
                    Symbol::Spectral(_) => u,
                    _ => return None,
                })
            }
        };
        for leaf in [Symbol::G1, Symbol::G2, Symbol::G3, Symbol::Wp(U), Symbol::WpD(U), Symbol::Zeta(U)] {
            let e = sym(leaf);
            let fd = (e.eval(&values(tau + h)).unwrap() - e.eval(&values(tau - h)).unwrap()) / (2.0 * h);
            let closed = tau_deriv(&e).eval(&values(tau)).unwrap() / two_pi_i;
            assert!((fd - closed).norm() < 1e-5 * closed.norm().max(1.0), "{leaf}: {fd} {closed}");
        }
    }

    #[test]
    fn second_x_derivative_matches_finite_difference_along_a_field() {
        // Polynomial field z0(x) = a + b x + c x^2 + d x^3 with tau fixed.
        let (a, b, c, d) = (0.7, -0.4, 0.3, 0.25);
        let z = |x: f64| a + b * x + c * x * x + d * x * x * x;
        let dz = |x: f64, k: u8| match k {
            0 => z(x),
            1 => b + 2.0 * c * x + 3.0 * d * x * x,
            2 => 2.0 * c + 6.0 * d * x,
            3 => 6.0 * d,
            _ => 0.0,
        };
        let e = p("z0^3 - 2*z0*z0' + z0'^2");
        let d1 = total_x_derivative(&e);
        let d2 = total_x_derivative(&d1);
        let at = |q: &Poly, x: f64| {
            q.eval(&|s: Symbol| match s {
                Symbol::Jet(Field::Z(0), k) => Some(Complex64::new(dz(x, k), 0.0)),
                _ => None,
            })
            .unwrap()
        };
        let x0 = 0.3;
        let h = 1e-4;
        let fd = (at(&d1, x0 + h) - at(&d1, x0 - h)) / (2.0 * h);
        let exact = at(&d2, x0);
        assert!((fd - exact).norm() < 1e-6 * exact.norm().max(1.0));
    }
}
