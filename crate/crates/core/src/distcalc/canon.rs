//! Rewriting products of delta-derivatives into the basis anchored at `x`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_integer::binomial;
use num_traits::One;

use crate::symexpr::{total_x_derivative_n, Poly, Rational, Series};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    X,
    Y,
    W,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Point::X => "x",
            Point::Y => "y",
            Point::W => "w",
        };
        write!(f, "{s}")
    }
}

/// `delta^(order)(from - to)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: Point,
    pub to: Point,
    pub order: u32,
}

impl Edge {
    pub fn new(from: Point, to: Point, order: u32) -> Self {
        Edge { from, to, order }
    }

    fn flipped(self) -> (Edge, Rational) {
        let sign = if self.order % 2 == 0 { Rational::one() } else { -Rational::one() };
        (Edge { from: self.to, to: self.from, order: self.order }, sign)
    }

    fn touches(&self, p: Point) -> bool {
        self.from == p || self.to == p
    }
}

/// Basis element `delta^(p)(x-y) delta^(q)(x-w)`; absent factors are `None`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonKey {
    pub xy: Option<u32>,
    pub xw: Option<u32>,
}

impl CanonKey {
    pub fn two_point(m: u32) -> Self {
        CanonKey { xy: Some(m), xw: None }
    }

    pub fn three_point(p: u32, q: u32) -> Self {
        CanonKey { xy: Some(p), xw: Some(q) }
    }
}

impl fmt::Display for CanonKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(p) = self.xy {
            parts.push(format!("d{p}(x-y)"));
        }
        if let Some(q) = self.xw {
            parts.push(format!("d{q}(x-w)"));
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// Coefficients the calculus can multiply, scale and differentiate in `x`.
pub trait Coefficient: Clone {
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, c: Rational) -> Self;
    fn x_derivative(&self, k: usize) -> Self;
    fn accumulate(&mut self, other: &Self);
}

impl Coefficient for Poly {
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, c: Rational) -> Self {
        Poly::scale(self, c)
    }
    fn x_derivative(&self, k: usize) -> Self {
        total_x_derivative_n(self, k)
    }
    fn accumulate(&mut self, other: &Self) {
        *self += other;
    }
}

impl Coefficient for Series {
    fn mul(&self, other: &Self) -> Self {
        Series::mul(self, other)
    }
    fn scale(&self, c: Rational) -> Self {
        Series::scale(self, Complex64::new(crate::symexpr::poly::rational_to_f64(&c), 0.0))
    }
    fn x_derivative(&self, k: usize) -> Self {
        self.derivative(k)
    }
    fn accumulate(&mut self, other: &Self) {
        self.add_assign(other);
    }
}

/// An uncanonicalized product of coefficients living at points and
/// delta-derivatives between points.
#[derive(Clone, Debug)]
pub struct RawTerm<F> {
    pub scalar: Rational,
    pub factors: Vec<(Point, F)>,
    pub edges: Vec<Edge>,
}

impl<F: Coefficient> RawTerm<F> {
    pub fn new(scalar: Rational, factors: Vec<(Point, F)>, edges: Vec<Edge>) -> Self {
        RawTerm { scalar, factors, edges }
    }
}

fn binom(n: u32, k: u32) -> Rational {
    Rational::from_integer(binomial(n as i128, k as i128))
}

/// Rewrite a raw term into `(key, coefficient at x)` pieces: orient edges
/// away from `x`, reshape chains into a star at `x`, then move every factor
/// to `x`.
pub fn canonicalize_term<F: Coefficient>(t: &RawTerm<F>, sink: &mut dyn FnMut(CanonKey, F)) {
    let mut at: BTreeMap<Point, F> = BTreeMap::new();
    for (p, f) in &t.factors {
        match at.get_mut(p) {
            Some(g) => *g = g.mul(f),
            None => {
                at.insert(*p, f.clone());
            }
        }
    }
    let mut scalar = t.scalar;
    let mut edges: Vec<Edge> = Vec::with_capacity(t.edges.len());
    for e in &t.edges {
        if e.to == Point::X {
            let (f, s) = e.flipped();
            scalar *= s;
            edges.push(f);
        } else {
            edges.push(*e);
        }
    }
    // Star shapes: list of (scalar, edges from x).
    let mut stars: Vec<(Rational, Vec<Edge>)> = Vec::new();
    match edges.iter().position(|e| !e.touches(Point::X)) {
        None => stars.push((scalar, edges)),
        Some(i) => {
            let far = edges[i];
            let near = edges
                .iter()
                .copied()
                .enumerate()
                .find(|(j, e)| *j != i && e.from == Point::X && far.touches(e.to))
                .map(|(_, e)| e)
                .expect("delta chain must connect to x");
            let (far, s) = if far.from == near.to { (far, Rational::one()) } else { far.flipped() };
            let (n, m) = (near.order, far.order);
            for j in 0..=n {
                stars.push((
                    scalar * s * binom(n, j),
                    vec![Edge::new(Point::X, near.to, n - j), Edge::new(Point::X, far.to, m + j)],
                ));
            }
        }
    }
    let base = at.remove(&Point::X);
    for (sc, star) in stars {
        let order_to = |p: Point| star.iter().find(|e| e.to == p).map(|e| e.order);
        // Expand the factor at each non-x point by Leibniz in the anchor.
        let mut pieces: Vec<(Rational, Option<F>, Option<u32>, Option<u32>)> =
            vec![(sc, base.clone(), order_to(Point::Y), order_to(Point::W))];
        for (p, f) in &at {
            let mut next = Vec::new();
            for (c, acc, oy, ow) in pieces {
                let n = match p {
                    Point::Y => oy,
                    Point::W => ow,
                    Point::X => unreachable!(),
                }
                .expect("factor at a point without a delta");
                for l in 0..=n {
                    let d = f.x_derivative(l as usize);
                    let prod = match &acc {
                        Some(a) => a.mul(&d),
                        None => d,
                    };
                    let (ny, nw) = match p {
                        Point::Y => (Some(n - l), ow),
                        _ => (oy, Some(n - l)),
                    };
                    next.push((c * binom(n, l), Some(prod), ny, nw));
                }
            }
            pieces = next;
        }
        for (c, acc, oy, ow) in pieces {
            let coeff = match acc {
                Some(a) => a.scale(c),
                None => panic!("raw term without coefficient factors"),
            };
            sink(CanonKey { xy: oy, xw: ow }, coeff);
        }
    }
}

/// Canonical distribution: coefficients at `x` keyed by basis element.
#[derive(Clone, Debug, PartialEq)]
pub struct DistPoly<F> {
    pub terms: BTreeMap<CanonKey, F>,
}

impl<F> Default for DistPoly<F> {
    fn default() -> Self {
        DistPoly { terms: BTreeMap::new() }
    }
}

impl<F: Coefficient> DistPoly<F> {
    pub fn add_raw(&mut self, t: &RawTerm<F>) {
        canonicalize_term(t, &mut |k, c| match self.terms.get_mut(&k) {
            Some(acc) => acc.accumulate(&c),
            None => {
                self.terms.insert(k, c);
            }
        });
    }

    pub fn from_raw(terms: &[RawTerm<F>]) -> Self {
        let mut d = DistPoly::default();
        for t in terms {
            d.add_raw(t);
        }
        d
    }

    /// Terms as raw terms at `x`, so that canonical forms can be fed back.
    pub fn to_raw(&self) -> Vec<RawTerm<F>> {
        self.terms
            .iter()
            .map(|(k, c)| {
                let mut edges = Vec::new();
                if let Some(p) = k.xy {
                    edges.push(Edge::new(Point::X, Point::Y, p));
                }
                if let Some(q) = k.xw {
                    edges.push(Edge::new(Point::X, Point::W, q));
                }
                RawTerm::new(Rational::one(), vec![(Point::X, c.clone())], edges)
            })
            .collect()
    }
}

impl DistPoly<Poly> {
    pub fn prune(mut self) -> Self {
        self.terms.retain(|_, c| !c.is_zero());
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    /// Two-point coefficients `c_m` of `sum c_m delta^(m)(x-y)`.
    pub fn two_point_coefficients(&self) -> Vec<Poly> {
        let max = self.terms.keys().filter_map(|k| k.xy).max().unwrap_or(0);
        let mut out = vec![Poly::zero(); if self.terms.is_empty() { 0 } else { max as usize + 1 }];
        for (k, c) in &self.terms {
            assert!(k.xw.is_none(), "three-point term in a two-point distribution");
            out[k.xy.expect("two-point key") as usize] += c;
        }
        while out.last().is_some_and(|c| c.is_zero()) {
            out.pop();
        }
        out
    }
}

impl fmt::Display for DistPoly<Poly> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in &self.terms {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*{k}")?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Numeric accumulation of canonical coefficients with the absolute scale of
/// the contributions, used for relative residuals.
#[derive(Clone, Debug, Default)]
pub struct NumericDist {
    pub terms: BTreeMap<CanonKey, (Complex64, f64)>,
}

impl NumericDist {
    pub fn add_raw(&mut self, t: &RawTerm<Series>) {
        canonicalize_term(t, &mut |k, c| {
            let v = c.value();
            let e = self.terms.entry(k).or_insert((Complex64::new(0.0, 0.0), 0.0));
            e.0 += v;
            e.1 += v.norm();
        });
    }
}

pub fn sign(k: u32) -> Rational {
    if k % 2 == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}
