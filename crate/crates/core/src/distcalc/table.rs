//! Local brackets, their Leibniz extension, and antisymmetry/Jacobi residuals.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_integer::binomial;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::canon::{sign, CanonKey, Coefficient, DistPoly, Edge, NumericDist, Point, RawTerm};
use crate::error::{Error, Result};
use crate::symexpr::{tau_deriv, Field, JetAssignment, Poly, Rational, Series, SeriesJets, Symbol};

/// A generator of the bracket algebra. `Tau` stands for the rescaled modular
/// field `s = tau / (2 pi i)`, whose jets enter coefficients through the
/// modular forms (`s` itself) and through `T^(k) = -s^(k+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    Tau,
    F(Field),
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::Tau => write!(f, "tau"),
            Gen::F(field) => write!(f, "{field}"),
        }
    }
}

/// `{a(x), b(y)} = sum_m c_m(x) delta^(m)(x-y)` for each ordered pair.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketTable {
    gens: Vec<Gen>,
    entries: BTreeMap<(Gen, Gen), Vec<Poly>>,
}

impl BracketTable {
    pub fn new(gens: Vec<Gen>) -> Self {
        BracketTable { gens, entries: BTreeMap::new() }
    }

    pub fn gens(&self) -> &[Gen] {
        &self.gens
    }

    pub fn fields(&self) -> Vec<Field> {
        self.gens
            .iter()
            .filter_map(|g| match g {
                Gen::F(f) => Some(*f),
                Gen::Tau => None,
            })
            .collect()
    }

    pub fn has_tau(&self) -> bool {
        self.gens.contains(&Gen::Tau)
    }

    pub fn set(&mut self, a: Gen, b: Gen, mut coeffs: Vec<Poly>) {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            self.entries.remove(&(a, b));
        } else {
            self.entries.insert((a, b), coeffs);
        }
    }

    pub fn entry(&self, a: Gen, b: Gen) -> &[Poly] {
        self.entries.get(&(a, b)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Gen, Gen), &Vec<Poly>)> {
        self.entries.iter()
    }

    /// Add the modular row `{s(x), z(y)} = z(y) delta'(x-y)` and its mirror.
    pub fn with_tau_row(mut self) -> Self {
        if !self.has_tau() {
            self.gens.insert(0, Gen::Tau);
        }
        for f in self.fields() {
            let z = Poly::var(Symbol::Jet(f, 0));
            let dz = Poly::var(Symbol::Jet(f, 1));
            self.set(Gen::Tau, Gen::F(f), vec![dz, z.clone()]);
            self.set(Gen::F(f), Gen::Tau, vec![Poly::zero(), z]);
        }
        self
    }

    /// Flip the sign of one coefficient, for negative controls.
    pub fn corrupted(&self, a: Gen, b: Gen, order: usize) -> Self {
        let mut t = self.clone();
        if let Some(v) = t.entries.get_mut(&(a, b)) {
            if let Some(c) = v.get_mut(order) {
                *c = -&*c;
            }
        }
        t
    }

    pub fn max_delta_order(&self) -> u32 {
        self.entries.values().map(|v| v.len() as u32).max().unwrap_or(1).saturating_sub(1)
    }

    /// Highest generator jet order in any coefficient; `T^(k)` counts as an
    /// order `k + 1` jet of the modular field.
    pub fn max_jet_order(&self) -> u32 {
        let mut best = 0;
        for v in self.entries.values() {
            for c in v {
                for s in c.symbols() {
                    match s {
                        Symbol::Jet(_, k) => best = best.max(k as u32),
                        Symbol::T(k) => best = best.max(k as u32 + 1),
                        _ => {}
                    }
                }
            }
        }
        best
    }

    /// Series length and jet order needed for the numeric Jacobi residual.
    pub fn jacobi_requirements(&self) -> (usize, u8) {
        let len = (self.max_delta_order() + self.max_jet_order() + 1) as usize;
        (len, (self.max_jet_order() as usize + len + 1) as u8)
    }

    /// Every coefficient uses only this table's fields, modular leaves,
    /// `T` jets, constants and the imaginary unit.
    pub fn check_closure(&self) -> Result<()> {
        let fields = self.fields();
        for ((a, b), v) in &self.entries {
            for c in v {
                for s in c.symbols() {
                    let ok = match s {
                        Symbol::Jet(f, _) => fields.contains(&f),
                        Symbol::T(_) | Symbol::G1 | Symbol::G2 | Symbol::G3 => true,
                        Symbol::Param(_) | Symbol::CrossRatio | Symbol::I => true,
                        _ => false,
                    };
                    if !ok {
                        return Err(Error::Closure(format!("symbol {s} in entry {{{a},{b}}}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Field-field coefficients are quadratic forms in the field jets.
    pub fn is_homogeneous(&self) -> bool {
        self.entries.iter().all(|((a, b), v)| {
            if *a == Gen::Tau || *b == Gen::Tau {
                return true;
            }
            v.iter().all(|c| c.terms().all(|(m, _)| m.total_degree(|s| matches!(s, Symbol::Jet(..))) == 2))
        })
    }
}

/// A bracket argument: a generator, or a differential polynomial in them.
#[derive(Clone, Debug, PartialEq)]
pub enum GenExpr {
    Gen(Gen),
    Expr(Poly),
}

/// `dE/dg^(k)` for every generator jet on which `e` depends.
pub fn generator_partials(e: &Poly, gens: &[Gen]) -> Result<Vec<(Gen, u32, Poly)>> {
    let with_tau = gens.contains(&Gen::Tau);
    let mut out = Vec::new();
    for s in e.symbols() {
        match s {
            Symbol::Jet(f, k) => {
                if !gens.contains(&Gen::F(f)) {
                    return Err(Error::UnknownField(f.to_string()));
                }
                out.push((Gen::F(f), k as u32, e.partial(s)));
            }
            Symbol::T(k) if with_tau => out.push((Gen::Tau, k as u32 + 1, -e.partial(s))),
            _ => {}
        }
    }
    if with_tau {
        let d = tau_deriv(e);
        if !d.is_zero() {
            out.push((Gen::Tau, 0, d));
        }
    }
    Ok(out)
}

fn partials_of(e: &GenExpr, gens: &[Gen]) -> Result<Vec<(Gen, u32, Poly)>> {
    match e {
        GenExpr::Gen(g) => {
            if !gens.contains(g) {
                return Err(Error::UnknownField(g.to_string()));
            }
            Ok(vec![(*g, 0, Poly::one())])
        }
        GenExpr::Expr(p) => generator_partials(p, gens),
    }
}

fn binom(n: u32, k: u32) -> Rational {
    Rational::from_integer(binomial(n as i128, k as i128))
}

/// `{a(x), E(y)}` in canonical form.
pub fn leibniz_bracket(t: &BracketTable, a: Gen, e: &Poly) -> Result<DistPoly<Poly>> {
    bracket_exprs(t, &GenExpr::Gen(a), &GenExpr::Expr(e.clone()))
}

/// `{E_a(x), E_b(y)}` in canonical form.
pub fn bracket_exprs(t: &BracketTable, ea: &GenExpr, eb: &GenExpr) -> Result<DistPoly<Poly>> {
    let pa = partials_of(ea, &t.gens)?;
    let pb = partials_of(eb, &t.gens)?;
    let mut out = DistPoly::default();
    for (c, k, da) in &pa {
        for (d, l, db) in &pb {
            for (j, coeff) in t.entry(*c, *d).iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                for i in 0..=*k {
                    let left = da * &Coefficient::x_derivative(coeff, (*k - i) as usize);
                    if left.is_zero() {
                        continue;
                    }
                    out.add_raw(&RawTerm::new(
                        binom(*k, i) * sign(*l),
                        vec![(Point::X, left), (Point::Y, db.clone())],
                        vec![Edge::new(Point::X, Point::Y, j as u32 + l + i)],
                    ));
                }
            }
        }
    }
    Ok(out.prune())
}

/// Re-express a table in new generators given as expressions in the old ones.
pub fn change_coordinates(t: &BracketTable, new: &[(Gen, GenExpr)]) -> Result<BracketTable> {
    let mut out = BracketTable::new(new.iter().map(|(g, _)| *g).collect());
    for (ga, ea) in new {
        for (gb, eb) in new {
            let d = bracket_exprs(t, ea, eb)?;
            out.set(*ga, *gb, d.two_point_coefficients());
        }
    }
    Ok(out)
}

/// A residual coefficient with the absolute size of what cancelled into it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub label: String,
    pub value: Complex64,
    pub scale: f64,
}

impl Residual {
    /// `|value| / max(1, scale)`.
    pub fn relative(&self) -> f64 {
        self.value.norm() / self.scale.max(1.0)
    }
}

/// Table coefficients and generator partials mapped into a coefficient type.
struct Prepared<F> {
    entries: BTreeMap<(Gen, Gen), Vec<F>>,
    partials: BTreeMap<(Gen, Gen), Vec<Vec<(Gen, u32, F)>>>,
}

fn prepare<F>(t: &BracketTable, map: &dyn Fn(&Poly) -> Result<F>) -> Result<Prepared<F>> {
    let mut entries = BTreeMap::new();
    let mut partials = BTreeMap::new();
    for (key, v) in &t.entries {
        entries.insert(*key, v.iter().map(map).collect::<Result<Vec<F>>>()?);
        let mut per_order = Vec::new();
        for c in v {
            let ps = generator_partials(c, &t.gens)?
                .into_iter()
                .map(|(g, k, p)| Ok((g, k, map(&p)?)))
                .collect::<Result<Vec<_>>>()?;
            per_order.push(ps);
        }
        partials.insert(*key, per_order);
    }
    Ok(Prepared { entries, partials })
}

fn pair_terms<F: Coefficient>(p: &Prepared<F>, a: Gen, b: Gen, sink: &mut dyn FnMut(RawTerm<F>)) {
    if let Some(v) = p.entries.get(&(a, b)) {
        for (m, c) in v.iter().enumerate() {
            sink(RawTerm::new(
                Rational::one(),
                vec![(Point::X, c.clone())],
                vec![Edge::new(Point::X, Point::Y, m as u32)],
            ));
        }
    }
    if let Some(v) = p.entries.get(&(b, a)) {
        for (m, c) in v.iter().enumerate() {
            sink(RawTerm::new(
                Rational::one(),
                vec![(Point::Y, c.clone())],
                vec![Edge::new(Point::Y, Point::X, m as u32)],
            ));
        }
    }
}

/// Raw terms of `{a(P1), {b(P2), c(P3)}}`.
fn nested_terms<F: Coefficient>(
    p: &Prepared<F>,
    (a, p1): (Gen, Point),
    (b, p2): (Gen, Point),
    (c, p3): (Gen, Point),
    sink: &mut dyn FnMut(RawTerm<F>),
) {
    let Some(inner) = p.partials.get(&(b, c)) else { return };
    for (m, ps) in inner.iter().enumerate() {
        for (d, k, db) in ps {
            let Some(outer) = p.entries.get(&(a, *d)) else { continue };
            for (j, ad) in outer.iter().enumerate() {
                sink(RawTerm::new(
                    sign(*k),
                    vec![(p1, ad.clone()), (p2, db.clone())],
                    vec![Edge::new(p1, p2, j as u32 + k), Edge::new(p2, p3, m as u32)],
                ));
            }
        }
    }
}

fn jacobi_terms<F: Coefficient>(p: &Prepared<F>, a: Gen, b: Gen, c: Gen, sink: &mut dyn FnMut(RawTerm<F>)) {
    let (x, y, w) = ((a, Point::X), (b, Point::Y), (c, Point::W));
    nested_terms(p, x, y, w, sink);
    nested_terms(p, y, w, x, sink);
    nested_terms(p, w, x, y, sink);
}

fn unordered_pairs(gens: &[Gen]) -> Vec<(Gen, Gen)> {
    let mut out = Vec::new();
    for i in 0..gens.len() {
        for j in i..gens.len() {
            out.push((gens[i], gens[j]));
        }
    }
    out
}

fn unordered_triples(gens: &[Gen]) -> Vec<(Gen, Gen, Gen)> {
    let mut out = Vec::new();
    for i in 0..gens.len() {
        for j in i..gens.len() {
            for k in j..gens.len() {
                out.push((gens[i], gens[j], gens[k]));
            }
        }
    }
    out
}

/// Exact `{a(x),b(y)} + {b(y),a(x)}` for every pair.
pub fn antisymmetry_symbolic(t: &BracketTable) -> Result<Vec<((Gen, Gen), DistPoly<Poly>)>> {
    let p = prepare(t, &|c| Ok(c.clone()))?;
    Ok(unordered_pairs(&t.gens)
        .into_iter()
        .map(|(a, b)| {
            let mut d = DistPoly::default();
            pair_terms(&p, a, b, &mut |r| d.add_raw(&r));
            ((a, b), d.prune())
        })
        .collect())
}

fn numeric_residuals(label: String, d: NumericDist) -> Vec<Residual> {
    d.terms.into_iter().map(|(k, (value, scale))| Residual { label: format!("{label} {k}"), value, scale }).collect()
}

/// Antisymmetry coefficients evaluated at a jet sample.
pub fn antisymmetry_residual(t: &BracketTable, jets: &JetAssignment) -> Result<Vec<Residual>> {
    let frozen;
    let jets = if t.has_tau() {
        jets
    } else {
        frozen = jets.frozen_tau();
        &frozen
    };
    let len = (t.max_delta_order() + 1) as usize;
    let sj = SeriesJets::new(jets, len);
    let p = prepare(t, &|c| sj.eval(c))?;
    let mut out = Vec::new();
    for (a, b) in unordered_pairs(&t.gens) {
        let mut d = NumericDist::default();
        pair_terms(&p, a, b, &mut |r| d.add_raw(&r));
        out.extend(numeric_residuals(format!("{{{a},{b}}}"), d));
    }
    Ok(out)
}

/// Exact Jacobi sums, one canonical three-point distribution per triple.
pub fn jacobi_symbolic(t: &BracketTable) -> Result<Vec<((Gen, Gen, Gen), DistPoly<Poly>)>> {
    let p = prepare(t, &|c| Ok(c.clone()))?;
    Ok(unordered_triples(&t.gens)
        .into_iter()
        .map(|(a, b, c)| {
            let mut d = DistPoly::default();
            jacobi_terms(&p, a, b, c, &mut |r| d.add_raw(&r));
            ((a, b, c), d.prune())
        })
        .collect())
}

/// Jacobi sums at a jet sample: every canonical coefficient of every triple.
pub fn jacobi_residual(t: &BracketTable, jets: &JetAssignment) -> Result<Vec<Residual>> {
    let frozen;
    let jets = if t.has_tau() {
        jets
    } else {
        frozen = jets.frozen_tau();
        &frozen
    };
    let (len, _) = t.jacobi_requirements();
    let triples = unordered_triples(&t.gens);
    let chunks: Vec<Result<Vec<Residual>>> = triples
        .par_chunks(8)
        .map(|chunk| {
            let sj = SeriesJets::new(jets, len);
            let p: Prepared<Series> = prepare(t, &|c| sj.eval(c))?;
            let mut out = Vec::new();
            for &(a, b, c) in chunk {
                let mut d = NumericDist::default();
                jacobi_terms(&p, a, b, c, &mut |r| d.add_raw(&r));
                out.extend(numeric_residuals(format!("{{{a},{b},{c}}}"), d));
            }
            Ok(out)
        })
        .collect();
    let mut out = Vec::new();
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

pub fn max_relative(rs: &[Residual]) -> f64 {
    rs.iter().map(Residual::relative).fold(0.0, f64::max)
}

impl fmt::Display for BracketTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((a, b), v) in &self.entries {
            let d = DistPoly {
                terms: v.iter().enumerate().map(|(m, c)| (CanonKey::two_point(m as u32), c.clone())).collect(),
            };
            writeln!(f, "{{{a}(x),{b}(y)}} = {d}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{EllipticContext, DEFAULT_TOLERANCE};
    use crate::symexpr::{rat, sample_jets};

    fn p(s: &str) -> Poly {
        Poly::parse(s).unwrap()
    }

    const P0: Field = Field::P(0);

    fn ctx() -> EllipticContext {
        EllipticContext::new(Complex64::new(0.1, 1.0), DEFAULT_TOLERANCE).unwrap()
    }

    /// `{p,p} = G(p) delta' + H(p) p' delta` for a polynomial `G`.
    fn hydro_table(g: &Poly, h: &Poly) -> BracketTable {
        let mut t = BracketTable::new(vec![Gen::F(P0)]);
        t.set(Gen::F(P0), Gen::F(P0), vec![h * &p("p0'"), g.clone()]);
        t
    }

    fn quartic() -> Poly {
        p("3/2 - p0 + 2*p0^2 + 1/3*p0^3 - 5/4*p0^4")
    }

    fn half_derivative(g: &Poly) -> Poly {
        g.partial(Symbol::Jet(P0, 0)).scale(rat(1, 2))
    }

    #[test]
    fn constant_table_is_poisson() {
        let mut t = BracketTable::new(vec![Gen::F(P0)]);
        t.set(Gen::F(P0), Gen::F(P0), vec![Poly::zero(), Poly::one()]);
        for (_, d) in antisymmetry_symbolic(&t).unwrap() {
            assert!(d.is_zero());
        }
        for (_, d) in jacobi_symbolic(&t).unwrap() {
            assert!(d.is_zero());
        }
    }

    #[test]
    fn hydrodynamic_line_bracket() {
        let g = quartic();
        let good = hydro_table(&g, &half_derivative(&g));
        let bad = hydro_table(&g, &g.partial(Symbol::Jet(P0, 0)));
        let c = ctx();
        let (_, order) = good.jacobi_requirements();
        for seed in 0..5 {
            let jets = sample_jets(&c, &[P0], order, seed);
            assert!(max_relative(&antisymmetry_residual(&good, &jets).unwrap()) < 1e-9);
            assert!(max_relative(&jacobi_residual(&good, &jets).unwrap()) < 1e-8);
            assert!(max_relative(&antisymmetry_residual(&bad, &jets).unwrap()) > 1e-3);
        }
        for (_, d) in jacobi_symbolic(&good).unwrap() {
            assert!(d.is_zero(), "{d}");
        }
        let flipped = good.corrupted(Gen::F(P0), Gen::F(P0), 1);
        let jets = sample_jets(&c, &[P0], order, 1);
        assert!(max_relative(&antisymmetry_residual(&flipped, &jets).unwrap()) > 1e-2);
    }

    #[test]
    fn jacobi_detects_wrong_h() {
        let g = quartic();
        let bad = hydro_table(&g, &g.partial(Symbol::Jet(P0, 0)).scale(rat(1, 3)));
        let jets = sample_jets(&ctx(), &[P0], bad.jacobi_requirements().1, 3);
        assert!(max_relative(&jacobi_residual(&bad, &jets).unwrap()) > 1e-3);
    }

    #[test]
    fn leibniz_identity_square_and_derivative() {
        let g = quartic();
        let t = hydro_table(&g, &half_derivative(&g));
        let a = Gen::F(P0);
        let direct = leibniz_bracket(&t, a, &p("p0")).unwrap();
        assert_eq!(direct.two_point_coefficients(), t.entry(a, a).to_vec());
        let sq = leibniz_bracket(&t, a, &p("p0^2")).unwrap();
        let mut twice = DistPoly::default();
        for r in direct.to_raw() {
            let mut r = r;
            r.factors.push((Point::Y, p("2*p0")));
            twice.add_raw(&r);
        }
        assert_eq!(sq, twice.prune());
        // derivative in the second slot
        let d = leibniz_bracket(&t, a, &p("p0'")).unwrap();
        let mut want = DistPoly::default();
        for (m, c) in t.entry(a, a).iter().enumerate() {
            want.add_raw(&RawTerm::new(
                -Rational::one(),
                vec![(Point::X, c.clone())],
                vec![Edge::new(Point::X, Point::Y, m as u32 + 1)],
            ));
        }
        assert_eq!(d, want.prune());
        assert!(matches!(leibniz_bracket(&t, a, &p("z3")), Err(Error::UnknownField(_))));
    }

    #[test]
    fn leibniz_is_linear_and_satisfies_product_rule() {
        let g = quartic();
        let t = hydro_table(&g, &half_derivative(&g));
        let a = Gen::F(P0);
        let (e1, e2) = (p("p0^3 - p0'"), p("2*p0*p0' + 1"));
        let sum = leibniz_bracket(&t, a, &(&e1 + &e2)).unwrap();
        let mut parts = DistPoly::default();
        for r in leibniz_bracket(&t, a, &e1).unwrap().to_raw() {
            parts.add_raw(&r);
        }
        for r in leibniz_bracket(&t, a, &e2).unwrap().to_raw() {
            parts.add_raw(&r);
        }
        assert_eq!(sum, parts.prune());
        let prod = leibniz_bracket(&t, a, &(&e1 * &e2)).unwrap();
        let mut rule = DistPoly::default();
        for (e, other) in [(&e1, &e2), (&e2, &e1)] {
            for mut r in leibniz_bracket(&t, a, e).unwrap().to_raw() {
                r.factors.push((Point::Y, other.clone()));
                rule.add_raw(&r);
            }
        }
        assert_eq!(prod, rule.prune());
    }

    #[test]
    fn identity_change_of_coordinates() {
        let g = quartic();
        let t = hydro_table(&g, &half_derivative(&g));
        let same = change_coordinates(&t, &[(Gen::F(P0), GenExpr::Expr(p("p0")))]).unwrap();
        assert_eq!(same, t);
    }

    #[test]
    fn inversion_keeps_quartic_family() {
        // q = 1/p turns G(p) into -q^4 G(1/q) up to sign conventions; the
        // result must again be a Poisson table in q.
        let g = quartic();
        let t = hydro_table(&g, &half_derivative(&g));
        let q = change_coordinates(&t, &[(Gen::F(P0), GenExpr::Expr(p("p0^-1")))]).unwrap();
        let gq = q.entry(Gen::F(P0), Gen::F(P0))[1].clone();
        let want = gq.partial(Symbol::Jet(P0, 0)).scale(rat(1, 2));
        assert_eq!(q.entry(Gen::F(P0), Gen::F(P0))[0], &want * &p("p0'"));
    }

    #[test]
    fn closure_and_homogeneity() {
        let mut t = BracketTable::new(vec![Gen::F(Field::Z(0))]).with_tau_row();
        t.set(Gen::F(Field::Z(0)), Gen::F(Field::Z(0)), vec![p("g1*z0*z0'"), p("z0^2")]);
        assert!(t.check_closure().is_ok());
        assert!(t.is_homogeneous());
        t.set(Gen::F(Field::Z(0)), Gen::F(Field::Z(0)), vec![p("wp(u)*z0")]);
        assert!(t.check_closure().is_err());
        assert!(!t.is_homogeneous());
    }
}
