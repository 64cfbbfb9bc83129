//! Sparse Laurent polynomials with exact rational coefficients.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::symbol::{parse_symbol, Symbol};
use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

pub fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Product of symbol powers, sorted by symbol, no zero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Symbol, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(s: Symbol, e: i32) -> Self {
        if e == 0 {
            Self::one()
        } else {
            Monomial(vec![(s, e)])
        }
    }

    pub fn from_pairs(mut pairs: Vec<(Symbol, i32)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut out: Vec<(Symbol, i32)> = Vec::with_capacity(pairs.len());
        for (s, e) in pairs {
            match out.last_mut() {
                Some(last) if last.0 == s => last.1 += e,
                _ => out.push((s, e)),
            }
        }
        out.retain(|p| p.1 != 0);
        Monomial(out)
    }

    pub fn factors(&self) -> &[(Symbol, i32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree_in(&self, s: Symbol) -> i32 {
        self.0.iter().find(|p| p.0 == s).map_or(0, |p| p.1)
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.0.iter().any(|p| p.0 == s)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Split off the factors satisfying `pred`.
    pub fn split(&self, pred: impl Fn(Symbol) -> bool) -> (Monomial, Monomial) {
        let (yes, no): (Vec<_>, Vec<_>) = self.0.iter().partition(|p| pred(p.0));
        (Monomial(yes), Monomial(no))
    }

    pub fn without(&self, s: Symbol) -> Monomial {
        Monomial(self.0.iter().copied().filter(|p| p.0 != s).collect())
    }

    pub fn with_power(&self, s: Symbol, e: i32) -> Monomial {
        self.without(s).mul(&Monomial::var(s, e))
    }

    pub fn total_degree(&self, pred: impl Fn(Symbol) -> bool) -> i32 {
        self.0.iter().filter(|p| pred(p.0)).map(|p| p.1).sum()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (s, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Canonical polynomial: monomials in a fixed order, exact coefficients,
/// no zero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn int(c: i128) -> Self {
        Self::constant(Rational::from_integer(c))
    }

    pub fn var(s: Symbol) -> Self {
        Self::term(Rational::one(), Monomial::var(s, 1))
    }

    pub fn var_pow(s: Symbol, e: i32) -> Self {
        Self::term(Rational::one(), Monomial::var(s, e))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).copied().unwrap_or_else(Rational::zero)
    }

    /// Constant term if the polynomial is a constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).copied(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, k)| (m.clone(), *k * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: Rational) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(mm, k)| (mm.mul(m), *k * c)))
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut v: Vec<Symbol> = self.terms.keys().flat_map(|m| m.0.iter().map(|p| p.0)).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.terms.keys().any(|m| m.contains(s))
    }

    pub fn any_symbol(&self, pred: impl Fn(Symbol) -> bool) -> bool {
        self.terms.keys().any(|m| m.0.iter().any(|p| pred(p.0)))
    }

    /// Highest power of `s` (0 for a polynomial free of `s`).
    pub fn degree_in(&self, s: Symbol) -> i32 {
        self.terms.keys().map(|m| m.degree_in(s)).max().unwrap_or(0)
    }

    pub fn min_degree_in(&self, s: Symbol) -> i32 {
        self.terms.keys().map(|m| m.degree_in(s)).min().unwrap_or(0)
    }

    /// Coefficient of `s^k` as a polynomial free of `s`.
    pub fn coeff_of_power(&self, s: Symbol, k: i32) -> Poly {
        Poly::from_terms(self.terms.iter().filter(|(m, _)| m.degree_in(s) == k).map(|(m, c)| (m.without(s), *c)))
    }

    /// Formal partial derivative.
    pub fn partial(&self, s: Symbol) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(s);
            if e != 0 {
                out.add_term(m.with_power(s, e - 1), *c * Rational::from_integer(e as i128));
            }
        }
        out
    }

    /// Group by the monomial in the symbols selected by `pred`; each group's
    /// coefficient is a polynomial in the remaining symbols.
    pub fn collect_by(&self, pred: impl Fn(Symbol) -> bool) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (key, rest) = m.split(&pred);
            out.entry(key).or_default().add_term(rest, *c);
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Replace each symbol `s` with `sub(s)` where it returns `Some`.
    /// Negative powers are only allowed for monomial substitutes.
    pub fn substitute(&self, sub: &impl Fn(Symbol) -> Option<Poly>) -> Result<Poly> {
        let mut cache: BTreeMap<(Symbol, i32), Poly> = BTreeMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(*c);
            let mut kept = Monomial::one();
            for &(s, e) in &m.0 {
                match sub(s) {
                    None => kept = kept.mul(&Monomial::var(s, e)),
                    Some(r) => {
                        let p = match cache.get(&(s, e)) {
                            Some(p) => p.clone(),
                            None => {
                                let p = power_of(&r, e).ok_or_else(|| {
                                    Error::Structure(format!("negative power of non-monomial substitute for {s}"))
                                })?;
                                cache.insert((s, e), p.clone());
                                p
                            }
                        };
                        acc = &acc * &p;
                    }
                }
            }
            out += &acc.mul_monomial(&kept, Rational::one());
        }
        Ok(out)
    }

    /// Numerical value with every symbol supplied by `values`.
    pub fn eval(&self, values: &impl SymbolValues) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = Complex64::new(rational_to_f64(c), 0.0);
            for &(s, e) in &m.0 {
                let v = values.value(s).ok_or_else(|| Error::Unbound(s.to_string()))?;
                t *= v.powi(e);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Value together with the sum of absolute term values, the natural
    /// scale against which cancellation is judged.
    pub fn eval_with_scale(&self, values: &impl SymbolValues) -> Result<(Complex64, f64)> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (m, c) in &self.terms {
            let mut t = Complex64::new(rational_to_f64(c), 0.0);
            for &(s, e) in &m.0 {
                let v = values.value(s).ok_or_else(|| Error::Unbound(s.to_string()))?;
                t *= v.powi(e);
            }
            acc += t;
            scale += t.norm();
        }
        Ok((acc, scale))
    }

    /// Parse the canonical rendering.
    pub fn parse(s: &str) -> Result<Poly> {
        let s = s.trim();
        if s == "0" {
            return Ok(Poly::zero());
        }
        let mut out = Poly::zero();
        let mut rest = s;
        let mut negative = false;
        if let Some(r) = rest.strip_prefix('-') {
            negative = true;
            rest = r;
        }
        loop {
            let next_plus = rest.find(" + ");
            let next_minus = rest.find(" - ");
            let (term, tail, next_neg) = match (next_plus, next_minus) {
                (None, None) => (rest, None, false),
                (Some(p), None) => (&rest[..p], Some(&rest[p + 3..]), false),
                (None, Some(q)) => (&rest[..q], Some(&rest[q + 3..]), true),
                (Some(p), Some(q)) if p < q => (&rest[..p], Some(&rest[p + 3..]), false),
                (Some(_), Some(q)) => (&rest[..q], Some(&rest[q + 3..]), true),
            };
            let (mono, mut c) = parse_term(term)?;
            if negative {
                c = -c;
            }
            out.add_term(mono, c);
            match tail {
                None => break,
                Some(t) => {
                    rest = t;
                    negative = next_neg;
                }
            }
        }
        Ok(out)
    }
}

fn power_of(p: &Poly, e: i32) -> Option<Poly> {
    if e >= 0 {
        return Some(p.pow(e as u32));
    }
    if p.terms.len() != 1 {
        return None;
    }
    let (m, c) = p.terms.iter().next().unwrap();
    let inv_m = Monomial(m.0.iter().map(|&(s, k)| (s, -k)).collect());
    let inv = Poly::term(c.recip(), inv_m);
    Some(inv.pow((-e) as u32))
}

fn parse_rational(s: &str) -> Option<Rational> {
    match s.split_once('/') {
        Some((n, d)) => Some(Rational::new(n.parse().ok()?, d.parse().ok()?)),
        None => s.parse::<i128>().ok().map(Rational::from_integer),
    }
}

fn parse_term(term: &str) -> Result<(Monomial, Rational)> {
    let bad = || Error::Parse(format!("cannot parse term '{term}'"));
    let mut coeff = Rational::one();
    let mut pairs = Vec::new();
    for (k, factor) in term.split('*').enumerate() {
        if k == 0 {
            if let Some(r) = parse_rational(factor) {
                coeff = r;
                continue;
            }
        }
        let (name, e) = match factor.split_once('^') {
            Some((n, e)) => (n, e.parse::<i32>().map_err(|_| bad())?),
            None => (factor, 1),
        };
        let sym = parse_symbol(name).ok_or_else(bad)?;
        pairs.push((sym, e));
    }
    Ok((Monomial::from_pairs(pairs), coeff))
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

/// Source of numeric values for symbols.
pub trait SymbolValues {
    fn value(&self, s: Symbol) -> Option<Complex64>;
}

impl<F: Fn(Symbol) -> Option<Complex64>> SymbolValues for F {
    fn value(&self, s: Symbol) -> Option<Complex64> {
        self(s)
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), *c);
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -*c);
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), *ca * *cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: &Poly) -> Poly {
                (&self).$m(rhs)
            }
        }
        impl $tr<Poly> for &Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl From<Symbol> for Poly {
    fn from(s: Symbol) -> Self {
        Poly::var(s)
    }
}

impl From<Rational> for Poly {
    fn from(c: Rational) -> Self {
        Poly::constant(c)
    }
}

impl From<i128> for Poly {
    fn from(c: i128) -> Self {
        Poly::int(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::symbol::{Field, Spectral};
    use proptest::prelude::*;

    fn z(k: u16, o: u8) -> Poly {
        Poly::var(Symbol::Jet(Field::Z(k), o))
    }

    #[test]
    fn arithmetic_and_rendering() {
        let p = &(&z(0, 0) * &z(2, 0)).scale(rat(-1, 6)) + &Poly::var(Symbol::G2).scale(rat(1, 2));
        assert_eq!(p.to_string(), "1/2*g2 - 1/6*z0*z2");
        assert_eq!(Poly::parse(&p.to_string()).unwrap(), p);
        assert_eq!(Poly::zero().to_string(), "0");
        let q = &z(1, 1) - &z(1, 1);
        assert!(q.is_zero());
    }

    #[test]
    fn laurent_powers() {
        let inv = Poly::var_pow(Symbol::Jet(Field::Z(2), 0), -1);
        let prod = &inv * &z(2, 0);
        assert_eq!(prod, Poly::one());
        assert_eq!(inv.partial(Symbol::Jet(Field::Z(2), 0)).to_string(), "-z2^-2");
        assert_eq!(Poly::parse("-z2^-2").unwrap(), inv.partial(Symbol::Jet(Field::Z(2), 0)));
    }

    #[test]
    fn substitution() {
        let x = Symbol::Jet(Field::Z(1), 0);
        let p = &Poly::var_pow(x, 2) + &Poly::var(Symbol::G1);
        let q = p.substitute(&|s| (s == x).then(|| &Poly::var(Symbol::Spectral(Spectral::U)) + &Poly::one())).unwrap();
        assert_eq!(q.to_string(), "1 + g1 + 2*u + u^2");
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        let sym = prop_oneof![
            Just(Symbol::G1),
            Just(Symbol::G2),
            Just(Symbol::T(0)),
            Just(Symbol::Jet(Field::Z(0), 0)),
            Just(Symbol::Jet(Field::Z(2), 1)),
            Just(Symbol::Wp(Spectral::U)),
        ];
        let term = (prop::collection::vec((sym, -2i32..4), 0..3), -20i128..20, 1i128..7);
        prop::collection::vec(term, 0..6).prop_map(|ts| {
            Poly::from_terms(ts.into_iter().map(|(pairs, n, d)| (Monomial::from_pairs(pairs), rat(n, d))))
        })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(p in arb_poly()) {
            prop_assert_eq!(Poly::parse(&p.to_string()).unwrap(), p);
        }

        #[test]
        fn ring_laws(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            let s = Symbol::G1;
            // Leibniz rule for the formal partial derivative
            prop_assert_eq!((&a * &b).partial(s), &(&a.partial(s) * &b) + &(&a * &b.partial(s)));
        }
    }
}
