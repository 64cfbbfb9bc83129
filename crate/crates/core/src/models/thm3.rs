//! Structure constants on `C^n` from the elliptic r-matrix of hydrodynamic type.

use std::collections::BTreeMap;

use super::frac::{separator, Frac};
use super::structconsts::{field_indices, StructConsts};
use crate::error::{Error, Result};
use crate::symexpr::calculus::has_transcendental_leaves;
use crate::symexpr::{
    d_dz_spectral, polynomial_reduce, rat, tau_deriv, total_x_derivative, z, Poly, Rational, Spectral, Symbol,
};

fn sym(s: Symbol) -> Poly {
    Poly::var(s)
}

/// `p_a` at a spectral point: `wp^k` for `a = 2k`, `-wp^k wp_z / 2` for `a = 2k + 3`.
pub fn basis_poly(a: u16, w: Spectral) -> Result<Poly> {
    match a {
        1 => Err(Error::InvalidIndex(1)),
        a if a % 2 == 0 => Ok(sym(Symbol::Wp(w)).pow(a as u32 / 2)),
        a => Ok((sym(Symbol::Wp(w)).pow((a as u32 - 3) / 2) * sym(Symbol::WpD(w))).scale(rat(-1, 2))),
    }
}

/// `e(w, x) = sum_a p_a(w) z_a(x)`.
pub fn generating_poly(n: usize, w: Spectral) -> Result<Poly> {
    let mut e = Poly::zero();
    for a in field_indices(n) {
        e += &(basis_poly(a, w)? * z(a));
    }
    Ok(e)
}

/// `q(v, u)` and `q(u, v)` written with the addition identity.
fn weights() -> (Frac, Frac) {
    let (u, v) = (Spectral::U, Spectral::V);
    let half = (sym(Symbol::WpD(u)) + sym(Symbol::WpD(v))).scale(rat(1, 2));
    let g1 = sym(Symbol::G1);
    let drift = |w: Spectral| sym(Symbol::Zeta(w)) - &g1 * &sym(Symbol::Spectral(w));
    let q_vu = Frac::new(&half + &(drift(u) * separator()), 1);
    let q_uv = Frac::new(&(-&half) + &(drift(v) * separator()), 1);
    (q_vu, q_uv)
}

/// Pieces of the right-hand side that depend only on `e`.
struct Realization {
    e_u: Poly,
    e_v: Poly,
    de_u: Poly,
    de_v: Poly,
    eu_u: Poly,
    ev_v: Poly,
    eu_x: Poly,
    ev_x: Poly,
    ev_vx: Poly,
}

impl Realization {
    fn new(n: usize) -> Result<Self> {
        let (u, v) = (Spectral::U, Spectral::V);
        let e_u = generating_poly(n, u)?;
        let e_v = generating_poly(n, v)?;
        let ev_x = total_x_derivative(&e_v);
        Ok(Realization {
            de_u: tau_deriv(&e_u),
            de_v: tau_deriv(&e_v),
            eu_u: d_dz_spectral(&e_u, u),
            ev_v: d_dz_spectral(&e_v, v),
            eu_x: total_x_derivative(&e_u),
            ev_vx: d_dz_spectral(&ev_x, v),
            ev_x,
            e_u,
            e_v,
        })
    }
}

/// Right side of the r-matrix bracket: `(delta' coefficient, delta coefficient)`.
fn rmatrix_rhs(r: &Realization, lambda: Rational) -> (Frac, Frac) {
    let (q_vu, q_uv) = weights();
    let lam = Poly::constant(lambda);
    let t = sym(Symbol::T(0));
    let rhs1 = q_vu
        .mul_poly(&(&r.eu_u * &r.e_v))
        .add(&q_uv.mul_poly(&(&r.e_u * &r.ev_v)))
        .add(&Frac::poly(&lam * &(&r.eu_u * &r.ev_v)));
    let dq = q_vu.derive(&tau_deriv);
    let qu = q_vu.derive(&|p| d_dz_spectral(p, Spectral::U));
    let cross = &(&r.e_u * &r.ev_x) - &(&r.e_v * &r.eu_x);
    let rhs0 = dq
        .mul_poly(&(-&t * (&r.eu_u * &r.e_v)))
        .add(&qu.mul_poly(&cross))
        .add(&q_vu.mul_poly(&(&r.eu_u * &r.ev_x)))
        .add(&q_uv.mul_poly(&(&r.e_u * &r.ev_vx)))
        .add(&Frac::poly(&lam * &(&r.eu_u * &r.ev_vx)));
    (rhs1, rhs0)
}

/// Expand a reduced polynomial in `wp(u)^a wp(v)^b wpd(u)^i wpd(v)^j` and read
/// off the coefficients of `p_a(u) p_b(v)`.
fn decompose(s: &Poly, n: usize, what: &str) -> Result<BTreeMap<(u16, u16), Poly>> {
    if has_transcendental_leaves(s) {
        return Err(Error::Extraction(format!("{what}: bare spectral or zeta terms survive")));
    }
    let (u, v) = (Spectral::U, Spectral::V);
    let mut out: BTreeMap<(u16, u16), Poly> = BTreeMap::new();
    for (m, c) in s.collect_by(|x| matches!(x, Symbol::Wp(_) | Symbol::WpD(_))) {
        let index = |w: Spectral| -> Result<(u16, Rational)> {
            let k = m.degree_in(Symbol::Wp(w));
            let d = m.degree_in(Symbol::WpD(w));
            let (a, f) = match d {
                0 => (2 * k, rat(1, 1)),
                1 => (2 * k + 3, rat(-2, 1)),
                _ => return Err(Error::Extraction(format!("{what}: unreduced monomial {m}"))),
            };
            if k < 0 || a as usize > n {
                return Err(Error::Extraction(format!("{what}: {m} lies outside the basis for n = {n}")));
            }
            Ok((a as u16, f))
        };
        let (a, fa) = index(u)?;
        let (b, fb) = index(v)?;
        let entry = out.entry((a, b)).or_insert_with(Poly::zero);
        *entry += &c.scale(fa * fb);
    }
    out.retain(|_, p| !p.is_zero());
    Ok(out)
}

/// Structure constants with `lambda = 1/n`.
pub fn thm3_extract(n: usize) -> Result<StructConsts> {
    thm3_extract_with_lambda(n, rat(1, n as i128))
}

pub fn thm3_extract_with_lambda(n: usize, lambda: Rational) -> Result<StructConsts> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {n}")));
    }
    let r = Realization::new(n)?;
    let (rhs1, rhs0) = rmatrix_rhs(&r, lambda);

    // delta' part: sum p_a(u) p_b(v) P_ab = rhs1 - (e(u) De(v) + De(u) e(v)).
    let modular1 = &(&r.e_u * &r.de_v) + &(&r.de_u * &r.e_v);
    let s1 = rhs1.sub(&Frac::poly(modular1)).into_poly()?;
    let p = decompose(&s1, n, "delta' coefficient")?;

    // delta part: the modular and P-transport terms move to the right.
    let mut modular0 = &(&r.e_u * &total_x_derivative(&r.de_v)) + &(&r.de_u * &total_x_derivative(&r.e_v));
    for ((a, b), pab) in &p {
        let pa = basis_poly(*a, Spectral::U)?;
        let pb_x = total_x_derivative(&basis_poly(*b, Spectral::V)?);
        modular0 += &(&(&pa * pab) * &pb_x);
    }
    let s0 = rhs0.sub(&Frac::poly(polynomial_reduce(&modular0))).into_poly()?;
    let q = decompose(&s0, n, "delta coefficient")?;

    Ok(StructConsts { n, lambda, generator: "thm3_extract".into(), p, q })
}

/// Outcome of running the reduction with a non-default `lambda`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct LambdaProbe {
    pub n: usize,
    pub lambda: String,
    pub closed: bool,
    pub jacobi_exact: Option<bool>,
    pub message: String,
}

/// Re-run the reduction at `lambda` and, if it closes, the exact Jacobi check.
pub fn lambda_probe(n: usize, lambda: Rational) -> Result<LambdaProbe> {
    let mut probe =
        LambdaProbe { n, lambda: lambda.to_string(), closed: false, jacobi_exact: None, message: String::new() };
    match thm3_extract_with_lambda(n, lambda) {
        Ok(s) => {
            let ok = crate::distcalc::jacobi_symbolic(&s.to_table())?.iter().all(|(_, d)| d.is_zero());
            probe.closed = true;
            probe.jacobi_exact = Some(ok);
            probe.message = if ok { "closed; Jacobi holds exactly".into() } else { "closed; Jacobi fails".into() };
        }
        Err(Error::Extraction(m)) => probe.message = m,
        Err(e) => return Err(e),
    }
    Ok(probe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distcalc::{antisymmetry_symbolic, leibniz_bracket, Gen};
    use crate::symexpr::Field;

    #[test]
    fn basis_has_no_first_order_element() {
        assert!(matches!(basis_poly(1, Spectral::U), Err(Error::InvalidIndex(1))));
        assert_eq!(basis_poly(5, Spectral::U).unwrap().to_string(), "-1/2*wp(u)*wpd(u)");
    }

    #[test]
    fn n2_extraction_has_hydrodynamic_shape() {
        let s = thm3_extract(2).unwrap();
        s.check_shape().unwrap();
        assert!(!s.p.is_empty());
        let t = s.to_table();
        for (key, d) in antisymmetry_symbolic(&t).unwrap() {
            assert!(d.is_zero(), "antisymmetry fails for {key:?}: {d}");
        }
    }

    #[test]
    fn modular_row_is_the_scaling_row() {
        let t = thm3_extract(3).unwrap().to_table();
        for a in [0u16, 2, 3] {
            let d = leibniz_bracket(&t, Gen::Tau, &z(a)).unwrap();
            assert_eq!(d.two_point_coefficients(), vec![crate::symexpr::dz(a), z(a)]);
            assert_eq!(t.entry(Gen::F(Field::Z(a)), Gen::Tau), &[Poly::zero(), z(a)]);
        }
    }

    #[test]
    fn lambda_probe_reports_both_outcomes() {
        let ok = lambda_probe(2, rat(1, 2)).unwrap();
        assert_eq!((ok.closed, ok.jacobi_exact), (true, Some(true)));
        let off = lambda_probe(2, rat(1, 3)).unwrap();
        assert!(!off.closed && off.message.contains("outside the basis"), "{off:?}");
    }

    #[test]
    fn n2_and_n3_tables_satisfy_jacobi_numerically() {
        use crate::distcalc::{jacobi_residual, max_relative};
        use crate::elliptic::EllipticContext;
        use crate::symexpr::sample_jets;
        use num_complex::Complex64;
        for n in [2usize, 3] {
            let t = thm3_extract(n).unwrap().to_table();
            let (_, order) = t.jacobi_requirements();
            let ctx = EllipticContext::new(Complex64::new(0.1, 1.1), 1e-12).unwrap();
            let jets = sample_jets(&ctx, &t.fields(), order, 7 + n as u64);
            let r = max_relative(&jacobi_residual(&t, &jets).unwrap());
            assert!(r < 1e-8, "n = {n}: Jacobi residual {r}");
        }
    }
}
