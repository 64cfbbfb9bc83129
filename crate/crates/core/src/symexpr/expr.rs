use std::fmt;

use super::poly::{Poly, Rational};
use super::symbol::Symbol;

/// Expression tree. Every tree normalizes to a canonical [`Poly`].
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Rational),
    Leaf(Symbol),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Scale(Rational, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn leaf(s: Symbol) -> Self {
        Expr::Leaf(s)
    }

    pub fn int(c: i128) -> Self {
        Expr::Const(Rational::from_integer(c))
    }

    pub fn pow(self, e: i32) -> Self {
        Expr::Pow(Box::new(self), e)
    }

    pub fn scale(self, c: Rational) -> Self {
        Expr::Scale(c, Box::new(self))
    }

    /// Canonical polynomial form. Negative powers are only supported on
    /// subtrees that normalize to a single term.
    pub fn normalize(&self) -> Poly {
        match self {
            Expr::Const(c) => Poly::constant(*c),
            Expr::Leaf(s) => Poly::var(*s),
            Expr::Sum(xs) => {
                let mut acc = Poly::zero();
                for x in xs {
                    acc += &x.normalize();
                }
                acc
            }
            Expr::Product(xs) => xs.iter().fold(Poly::one(), |acc, x| &acc * &x.normalize()),
            Expr::Scale(c, x) => x.normalize().scale(*c),
            Expr::Pow(x, e) => {
                let base = x.normalize();
                if *e >= 0 {
                    base.pow(*e as u32)
                } else {
                    let mut terms = base.terms();
                    match (terms.next(), terms.next()) {
                        (Some((m, c)), None) => {
                            let inv = Poly::term(
                                c.recip(),
                                super::poly::Monomial::from_pairs(m.factors().iter().map(|&(s, k)| (s, -k)).collect()),
                            );
                            inv.pow((-e) as u32)
                        }
                        _ => panic!("negative power of a non-monomial expression"),
                    }
                }
            }
        }
    }
}

impl From<&Poly> for Expr {
    fn from(p: &Poly) -> Self {
        Expr::Sum(
            p.terms()
                .map(|(m, c)| {
                    let factors = m.factors().iter().map(|&(s, e)| Expr::Leaf(s).pow(e)).collect::<Vec<_>>();
                    Expr::Scale(*c, Box::new(Expr::Product(factors)))
                })
                .collect(),
        )
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.normalize())
    }
}
