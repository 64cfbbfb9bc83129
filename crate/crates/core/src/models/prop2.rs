//! The three-field lift of the elliptic CP^1 bracket and the descent to
//! affine coordinates.

use serde::{Deserialize, Serialize};

use crate::distcalc::{change_coordinates, BracketTable, Gen, GenExpr};
use crate::error::{Error, Result};
use crate::symexpr::{
    dz, freeze_tau, jet, rat, total_x_derivative, total_x_derivative_n, z, Field, Poly, Rational, Symbol,
};

fn g(k: u8) -> Poly {
    Poly::var(match k {
        1 => Symbol::G1,
        2 => Symbol::G2,
        _ => Symbol::G3,
    })
}

fn t0() -> Poly {
    Poly::var(Symbol::T(0))
}

/// Brackets of `tau, z_1, z_2`.
pub fn prop2_table() -> BracketTable {
    let (z1, z2, dz1, dz2) = (z(1), z(2), dz(1), dz(2));
    let (g1, g2, g3) = (g(1), g(2), g(3));
    let mut t = BracketTable::new(vec![Gen::F(Field::Z(1)), Gen::F(Field::Z(2))]);

    let p11 = (&g2 * &z1 * &z2).scale(rat(-1, 6)) + (&g3 * &z2 * &z2).scale(rat(1, 2));
    let q11 = (&g2 * &z2 * &dz1).scale(rat(-1, 12))
        + ((&g3 * &z2).scale(rat(1, 2)) - (&g2 * &z1).scale(rat(1, 12))) * &dz2
        + ((g3.scale(rat(6, 1)) - (&g1 * &g2).scale(rat(4, 1))) * &z1 * &z2
            + ((&g1 * &g3).scale(rat(18, 1)) - g2.pow(2)) * &z2 * &z2)
            * t0().scale(rat(1, 12));

    let p12 = (&g1 * &z1 * &z2).scale(rat(2, 1)) - (&g2 * &z2 * &z2).scale(rat(1, 3));
    let q12 = &g1 * &z2 * &dz1 + (&g1 * &z1 - (&g2 * &z2).scale(rat(1, 3))) * &dz2
        - ((&g1 * &g2).scale(rat(2, 1)) - g3.scale(rat(3, 1))) * &z2 * &z2 * t0().scale(rat(1, 6));

    let p22 = (&z1 * &z2).scale(rat(-2, 1)) + (&g1 * &z2 * &z2).scale(rat(4, 1));
    let q22 = -(&z2 * &dz1)
        + ((&g1 * &z2).scale(rat(4, 1)) - &z1) * &dz2
        + ((g1.pow(2)).scale(rat(12, 1)) - &g2) * &z2 * &z2 * t0().scale(rat(1, 6));

    // {z2(x), z1(y)} from antisymmetry: P_21 = P_12, Q_21 = P_12' - Q_12.
    let q21 = &total_x_derivative(&p12) - &q12;
    let (f1, f2) = (Gen::F(Field::Z(1)), Gen::F(Field::Z(2)));
    t.set(f1, f1, vec![q11, p11]);
    t.set(f1, f2, vec![q12, p12.clone()]);
    t.set(f2, f1, vec![q21, p12]);
    t.set(f2, f2, vec![q22, p22]);
    t.with_tau_row()
}

/// `G(p) = -(4p^3 - g2 p - g3)/2` in the affine coordinate field `p`.
pub fn prop2_quartic(p: Field) -> Poly {
    let x = jet(p, 0);
    (x.pow(3).scale(rat(4, 1)) - &g(2) * &x - g(3)).scale(rat(-1, 2))
}

/// The CP^1 bracket `{p, p} = G delta' + G'(p) p' / 2 delta` as table coefficients.
pub fn cp1_coefficients(p: Field, big_g: &Poly) -> Vec<Poly> {
    let x = Symbol::Jet(p, 0);
    let h = big_g.partial(x).scale(rat(1, 2));
    vec![&h * &jet(p, 1), big_g.clone()]
}

/// Affine coordinates `p_c = z_c / z_d`, descended with `tau` frozen.
pub fn lemma1_descend(t: &BracketTable, denominator: Field) -> Result<BracketTable> {
    if !t.has_tau() {
        return Err(Error::Structure("descent needs a modular generator".into()));
    }
    let fields = t.fields();
    if !fields.contains(&denominator) {
        return Err(Error::UnknownField(denominator.to_string()));
    }
    let inv = Poly::var_pow(Symbol::Jet(denominator, 0), -1);
    let numerators: Vec<Field> = fields.iter().copied().filter(|&f| f != denominator).collect();
    let affine = |f: Field| match f {
        Field::Z(k) | Field::P(k) => Field::P(k),
    };
    let mut new = vec![(Gen::Tau, GenExpr::Gen(Gen::Tau))];
    for &f in &numerators {
        new.push((Gen::F(affine(f)), GenExpr::Expr(&jet(f, 0) * &inv)));
    }
    let lifted = change_coordinates(t, &new)?;
    for &f in &numerators {
        let row = lifted.entry(Gen::Tau, Gen::F(affine(f)));
        if !row.iter().all(Poly::is_zero) {
            return Err(Error::Structure(format!("tau is not central: {{tau, p_{f}}} = {row:?}")));
        }
    }
    let sub = |s: Symbol| -> Option<Poly> {
        match s {
            Symbol::Jet(f, k) if f != denominator && numerators.contains(&f) => {
                Some(total_x_derivative_n(&(&jet(affine(f), 0) * &jet(denominator, 0)), k as usize))
            }
            _ => None,
        }
    };
    let gens: Vec<Gen> = numerators.iter().map(|&f| Gen::F(affine(f))).collect();
    let mut out = BracketTable::new(gens.clone());
    for &a in &gens {
        for &b in &gens {
            let mut coeffs = Vec::new();
            for c in lifted.entry(a, b) {
                let c = c.substitute(&sub)?;
                if c.any_symbol(|s| matches!(s, Symbol::Jet(f, _) if f == denominator)) {
                    return Err(Error::Structure(format!(
                        "{{{a},{b}}} still depends on {denominator} after substitution: {c}"
                    )));
                }
                coeffs.push(freeze_tau(&c));
            }
            out.set(a, b, coeffs);
        }
    }
    Ok(out)
}

/// A constant linear identification `w = M z` under which one three-field
/// table becomes another.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub matrix: [[String; 2]; 2],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentificationReport {
    pub candidates_tried: usize,
    pub matches: Vec<Identification>,
}

/// Re-express a two-field table with modular row in fields `w_i = sum_j M_ij z_j`.
fn linear_image(t: &BracketTable, from: [Field; 2], to: [Field; 2], m: [[Rational; 2]; 2]) -> Result<BracketTable> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == Rational::from_integer(0) {
        return Err(Error::Domain("singular identification".into()));
    }
    let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    let sub = |s: Symbol| -> Option<Poly> {
        match s {
            Symbol::Jet(f, k) if from.contains(&f) => {
                let i = from.iter().position(|&g| g == f)?;
                Some(jet(to[0], k).scale(inv[i][0]) + jet(to[1], k).scale(inv[i][1]))
            }
            _ => None,
        }
    };
    let mut out = BracketTable::new(to.iter().map(|&f| Gen::F(f)).collect());
    for a in 0..2 {
        for b in 0..2 {
            let mut acc: Vec<Poly> = Vec::new();
            for c in 0..2 {
                for d in 0..2 {
                    let w = m[a][c] * m[b][d];
                    if w == Rational::from_integer(0) {
                        continue;
                    }
                    for (k, e) in t.entry(Gen::F(from[c]), Gen::F(from[d])).iter().enumerate() {
                        if acc.len() <= k {
                            acc.resize(k + 1, Poly::zero());
                        }
                        acc[k] += &e.scale(w);
                    }
                }
            }
            let acc = acc.iter().map(|p| p.substitute(&sub)).collect::<Result<Vec<_>>>()?;
            out.set(Gen::F(to[a]), Gen::F(to[b]), acc);
        }
    }
    Ok(out.with_tau_row())
}

/// Search `M` with entries in `{0, +-1/2, +-1, +-2}` such that the three-field
/// table `a` in variables `w = M z` equals `b`.
pub fn identify_two_field_tables(
    a: &BracketTable,
    a_fields: [Field; 2],
    b: &BracketTable,
    b_fields: [Field; 2],
) -> Result<IdentificationReport> {
    let grid: Vec<Rational> =
        [0, 1, -1, 2, -2].iter().map(|&k| Rational::from_integer(k)).chain([rat(1, 2), rat(-1, 2)]).collect();
    let mut report = IdentificationReport::default();
    for &m00 in &grid {
        for &m01 in &grid {
            for &m10 in &grid {
                for &m11 in &grid {
                    let m = [[m00, m01], [m10, m11]];
                    if m00 * m11 == m01 * m10 {
                        continue;
                    }
                    report.candidates_tried += 1;
                    let image = linear_image(a, a_fields, b_fields, m)?;
                    if &image == b {
                        report.matches.push(Identification {
                            matrix: [[m00.to_string(), m01.to_string()], [m10.to_string(), m11.to_string()]],
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// The `{p, p}` coefficients of a one-field descended table.
pub fn descended_pair(t: &BracketTable, p: Field) -> Vec<Poly> {
    t.entry(Gen::F(p), Gen::F(p)).to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distcalc::{antisymmetry_symbolic, jacobi_residual, leibniz_bracket, max_relative};
    use crate::elliptic::EllipticContext;
    use crate::models::thm3_extract;
    use crate::symexpr::sample_jets;
    use num_complex::Complex64;

    #[test]
    fn table_is_antisymmetric_and_poisson() {
        let t = prop2_table();
        for (k, d) in antisymmetry_symbolic(&t).unwrap() {
            assert!(d.is_zero(), "{k:?}: {d}");
        }
        let (_, order) = t.jacobi_requirements();
        for (i, tau) in [Complex64::new(0.0, 1.0), Complex64::new(0.3, 1.4)].into_iter().enumerate() {
            let ctx = EllipticContext::new(tau, 1e-12).unwrap();
            let jets = sample_jets(&ctx, &t.fields(), order, 40 + i as u64);
            let r = max_relative(&jacobi_residual(&t, &jets).unwrap());
            assert!(r < 1e-8, "Jacobi residual {r}");
        }
    }

    #[test]
    fn descent_reproduces_the_weierstrass_quartic() {
        let d = lemma1_descend(&prop2_table(), Field::Z(2)).unwrap();
        assert!(!d.has_tau());
        let p = Field::P(1);
        assert_eq!(descended_pair(&d, p), cp1_coefficients(p, &prop2_quartic(p)));
    }

    #[test]
    fn modular_field_is_central_after_division() {
        let t = prop2_table();
        let ratio = &z(1) * &Poly::var_pow(Symbol::Jet(Field::Z(2), 0), -1);
        assert!(leibniz_bracket(&t, Gen::Tau, &ratio).unwrap().is_zero());
    }

    #[test]
    fn other_chart_is_poisson() {
        let d = lemma1_descend(&prop2_table(), Field::Z(1)).unwrap();
        let ctx = EllipticContext::new(Complex64::new(-0.2, 1.2), 1e-12).unwrap();
        let (_, order) = d.jacobi_requirements();
        let jets = sample_jets(&ctx, &d.fields(), order, 3);
        assert!(max_relative(&jacobi_residual(&d, &jets).unwrap()) < 1e-8);
    }

    #[test]
    fn descent_rejects_tables_without_modular_row() {
        let t = BracketTable::new(vec![Gen::F(Field::Z(1)), Gen::F(Field::Z(2))]);
        assert!(matches!(lemma1_descend(&t, Field::Z(2)), Err(Error::Structure(_))));
    }

    #[test]
    fn extraction_for_two_fields_is_a_sign_flip_of_the_lift() {
        let ext = thm3_extract(2).unwrap().to_table();
        let r = identify_two_field_tables(&ext, [Field::Z(0), Field::Z(2)], &prop2_table(), [Field::Z(1), Field::Z(2)])
            .unwrap();
        assert!(r.matches.iter().any(|m| m.matrix == [["-1".to_string(), "0".into()], ["0".into(), "1".into()]]));
    }
}
