//! Truncated Taylor series in the loop variable, used to evaluate
//! x-derivatives of large coefficients without expanding them symbolically.

use std::cell::RefCell;
use std::collections::BTreeMap;

use num_complex::Complex64;

use super::calculus::total_x_derivative_n;
use super::jets::JetAssignment;
use super::poly::{rational_to_f64, Poly, SymbolValues};
use super::symbol::Symbol;
use crate::error::{Error, Result};

/// Normalized Taylor coefficients `f^(k)(x) / k!`, truncated.
#[derive(Clone, Debug, PartialEq)]
pub struct Series(pub Vec<Complex64>);

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

impl Series {
    pub fn zero(len: usize) -> Self {
        Series(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn constant(c: Complex64, len: usize) -> Self {
        let mut s = Self::zero(len);
        if len > 0 {
            s.0[0] = c;
        }
        s
    }

    /// Series from successive derivatives `f, f', f'', ...`.
    pub fn from_derivatives(ds: &[Complex64]) -> Self {
        Series(ds.iter().enumerate().map(|(k, d)| d / factorial(k)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative_value(&self, k: usize) -> Complex64 {
        self.0.get(k).copied().unwrap_or_default() * factorial(k)
    }

    pub fn value(&self) -> Complex64 {
        self.derivative_value(0)
    }

    /// Series of the `k`-th derivative; `k` coefficients are lost.
    pub fn derivative(&self, k: usize) -> Series {
        if k == 0 {
            return self.clone();
        }
        let n = self.0.len().saturating_sub(k);
        Series((0..n).map(|j| self.0[j + k] * (factorial(j + k) / factorial(j))).collect())
    }

    pub fn add_assign(&mut self, other: &Series) {
        let n = self.0.len().min(other.0.len());
        self.0.truncate(n);
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn add_scaled(&mut self, other: &Series, c: Complex64) {
        let n = self.0.len().min(other.0.len());
        self.0.truncate(n);
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b * c;
        }
    }

    pub fn scale(&self, c: Complex64) -> Series {
        Series(self.0.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Series) -> Series {
        let n = self.0.len().min(other.0.len());
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            if self.0[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n - i {
                out[i + j] += self.0[i] * other.0[j];
            }
        }
        Series(out)
    }

    pub fn recip(&self) -> Result<Series> {
        let n = self.0.len();
        let a0 = self.0[0];
        if a0.norm() == 0.0 {
            return Err(Error::Domain("reciprocal of a series with zero constant term".into()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        out[0] = 1.0 / a0;
        for k in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.0[j] * out[k - j];
            }
            out[k] = -acc / a0;
        }
        Ok(Series(out))
    }

    pub fn powi(&self, e: i32) -> Result<Series> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = Series::constant(Complex64::new(1.0, 0.0), self.0.len());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }
}

/// Series of every leaf symbol at a jet assignment.
pub struct SeriesJets<'a> {
    jets: &'a JetAssignment,
    len: usize,
    cache: RefCell<BTreeMap<Symbol, Series>>,
}

impl<'a> SeriesJets<'a> {
    pub fn new(jets: &'a JetAssignment, len: usize) -> Self {
        SeriesJets { jets, len, cache: RefCell::new(BTreeMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn jets(&self) -> &JetAssignment {
        self.jets
    }

    pub fn leaf(&self, s: Symbol) -> Result<Series> {
        if let Some(v) = self.cache.borrow().get(&s) {
            return Ok(v.clone());
        }
        let unbound = || Error::Unbound(s.to_string());
        let derivs: Vec<Complex64> = match s {
            Symbol::Jet(f, k) => (0..self.len)
                .map(|l| self.jets.value(Symbol::Jet(f, k + l as u8)).ok_or_else(unbound))
                .collect::<Result<_>>()?,
            Symbol::T(k) => (0..self.len)
                .map(|l| self.jets.value(Symbol::T(k + l as u8)).ok_or_else(unbound))
                .collect::<Result<_>>()?,
            _ if s.is_builtin() => {
                let p = Poly::var(s);
                (0..self.len).map(|l| total_x_derivative_n(&p, l).eval(self.jets)).collect::<Result<_>>()?
            }
            _ => {
                let v = self.jets.value(s).ok_or_else(unbound)?;
                let mut d = vec![Complex64::new(0.0, 0.0); self.len];
                d[0] = v;
                d
            }
        };
        let series = Series::from_derivatives(&derivs);
        self.cache.borrow_mut().insert(s, series.clone());
        Ok(series)
    }

    /// Taylor series of a polynomial coefficient.
    pub fn eval(&self, p: &Poly) -> Result<Series> {
        let mut acc = Series::zero(self.len);
        let mut powers: BTreeMap<(Symbol, i32), Series> = BTreeMap::new();
        for (m, c) in p.terms() {
            let mut t = Series::constant(Complex64::new(rational_to_f64(c), 0.0), self.len);
            for &(s, e) in m.factors() {
                if !powers.contains_key(&(s, e)) {
                    let base = self.leaf(s)?;
                    powers.insert((s, e), base.powi(e)?);
                }
                t = t.mul(&powers[&(s, e)]);
            }
            acc.add_assign(&t);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{EllipticContext, DEFAULT_TOLERANCE};
    use crate::symexpr::calculus::total_x_derivative;
    use crate::symexpr::jets::sample_jets;
    use crate::symexpr::symbol::Field;

    #[test]
    fn series_derivatives_match_symbolic_ones() {
        let ctx = EllipticContext::new(Complex64::new(0.05, 1.3), DEFAULT_TOLERANCE).unwrap();
        let jets = sample_jets(&ctx, &[Field::Z(0), Field::Z(2)], 8, 3);
        let sj = SeriesJets::new(&jets, 4);
        let p = Poly::parse("g1*z0*z2' - 1/3*g2*z2^2*T + wp(u)*z0^-1").unwrap();
        let s = sj.eval(&p).unwrap();
        let mut d = p.clone();
        for k in 0..4 {
            let want = d.eval(&jets).unwrap();
            let got = s.derivative_value(k);
            assert!((want - got).norm() < 1e-9 * want.norm().max(1.0), "order {k}: {want} {got}");
            d = total_x_derivative(&d);
        }
    }

    #[test]
    fn reciprocal() {
        let s =
            Series::from_derivatives(&[Complex64::new(2.0, 0.0), Complex64::new(1.0, 1.0), Complex64::new(-0.5, 0.0)]);
        let one = s.mul(&s.recip().unwrap());
        assert!((one.0[0] - 1.0).norm() < 1e-15);
        assert!(one.0[1].norm() < 1e-15 && one.0[2].norm() < 1e-15);
    }
}
