//! Fractions `N / (wp(u) - wp(v))^k` over the polynomial ring.

use crate::error::{Error, Result};
use crate::symexpr::{exact_divide, polynomial_reduce, Poly, Rational, Spectral, Symbol};

/// The separating denominator `wp(u) - wp(v)`.
pub fn separator() -> Poly {
    &Poly::var(Symbol::Wp(Spectral::U)) - &Poly::var(Symbol::Wp(Spectral::V))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Frac {
    pub num: Poly,
    pub pow: u32,
}

impl Frac {
    pub fn poly(p: Poly) -> Self {
        Frac { num: p, pow: 0 }
    }

    pub fn new(num: Poly, pow: u32) -> Self {
        Frac { num, pow }
    }

    pub fn zero() -> Self {
        Frac::poly(Poly::zero())
    }

    fn lift(&self, pow: u32) -> Poly {
        if pow == self.pow {
            self.num.clone()
        } else {
            &self.num * &separator().pow(pow - self.pow)
        }
    }

    pub fn add(&self, o: &Frac) -> Frac {
        let pow = self.pow.max(o.pow);
        Frac { num: &self.lift(pow) + &o.lift(pow), pow }
    }

    pub fn sub(&self, o: &Frac) -> Frac {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Frac {
        Frac { num: -&self.num, pow: self.pow }
    }

    pub fn mul(&self, o: &Frac) -> Frac {
        Frac { num: &self.num * &o.num, pow: self.pow + o.pow }
    }

    pub fn mul_poly(&self, p: &Poly) -> Frac {
        Frac { num: &self.num * p, pow: self.pow }
    }

    pub fn scale(&self, c: Rational) -> Frac {
        Frac { num: self.num.scale(c), pow: self.pow }
    }

    /// Divide by `(wp(u) - wp(v))^k`.
    pub fn over_separator(&self, k: u32) -> Frac {
        Frac { num: self.num.clone(), pow: self.pow + k }
    }

    /// Apply a derivation `d` (quotient rule).
    pub fn derive(&self, d: &dyn Fn(&Poly) -> Poly) -> Frac {
        if self.pow == 0 {
            return Frac::poly(d(&self.num));
        }
        let sep = separator();
        let dn = d(&self.num);
        let ds = d(&sep);
        let k = Rational::from_integer(self.pow as i128);
        Frac { num: &(&dn * &sep) - &(&self.num * &ds).scale(k), pow: self.pow + 1 }
    }

    /// Reduce and divide out the denominator exactly.
    pub fn into_poly(self) -> Result<Poly> {
        let num = polynomial_reduce(&self.num);
        if self.pow == 0 {
            return Ok(num);
        }
        exact_divide(&num, &separator().pow(self.pow))
            .map_err(|e| Error::Divisibility(format!("by (wp(u)-wp(v))^{}: {e}", self.pow)))
    }
}

impl From<Poly> for Frac {
    fn from(p: Poly) -> Self {
        Frac::poly(p)
    }
}

pub fn one() -> Frac {
    Frac::poly(Poly::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::d_dz_spectral;

    #[test]
    fn quotient_rule_and_exact_division() {
        // d/du [sep^2 / sep] = wpd(u)
        let f = Frac::new(separator().pow(2), 1);
        let d = f.derive(&|p| d_dz_spectral(p, Spectral::U));
        assert_eq!(d.into_poly().unwrap(), Poly::var(Symbol::WpD(Spectral::U)));
        let g = Frac::new(Poly::var(Symbol::G1), 1);
        assert!(matches!(g.into_poly(), Err(Error::Divisibility(_))));
        let h = Frac::new(separator(), 1).add(&Frac::new(Poly::one(), 0));
        assert_eq!(h.into_poly().unwrap(), Poly::int(2));
    }
}
