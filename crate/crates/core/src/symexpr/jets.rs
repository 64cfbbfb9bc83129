use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::SymbolValues;
use super::symbol::{Field, Spectral, Symbol};
use crate::elliptic::EllipticContext;

/// Numeric values for jets, `T` jets, spectral points and builtin leaves.
#[derive(Clone, Debug)]
pub struct JetAssignment {
    values: BTreeMap<Symbol, Complex64>,
    ctx: Option<EllipticContext>,
}

impl JetAssignment {
    pub fn new(ctx: Option<EllipticContext>) -> Self {
        JetAssignment { values: BTreeMap::new(), ctx }
    }

    pub fn context(&self) -> Option<&EllipticContext> {
        self.ctx.as_ref()
    }

    pub fn set(&mut self, s: Symbol, v: Complex64) {
        self.values.insert(s, v);
    }

    pub fn with(mut self, s: Symbol, v: Complex64) -> Self {
        self.set(s, v);
        self
    }

    pub fn value_of(&self, s: Symbol) -> Option<Complex64> {
        if let Some(v) = self.values.get(&s) {
            return Some(*v);
        }
        match s {
            Symbol::I => Some(Complex64::new(0.0, 1.0)),
            Symbol::G1 => self.ctx.as_ref().map(|c| c.g1()),
            Symbol::G2 => self.ctx.as_ref().map(|c| c.g2()),
            Symbol::G3 => self.ctx.as_ref().map(|c| c.g3()),
            _ => None,
        }
    }

    /// Bind a spectral point and its builtin leaves from the context.
    pub fn bind_spectral(&mut self, which: Spectral, z: Complex64) -> crate::Result<()> {
        let ctx =
            self.ctx.as_ref().ok_or_else(|| crate::Error::Domain("spectral point needs an elliptic context".into()))?;
        let (wp, wpd, zeta) = (ctx.wp(z)?, ctx.wp_z(z)?, ctx.zeta(z)?);
        self.values.insert(Symbol::Spectral(which), z);
        self.values.insert(Symbol::Wp(which), wp);
        self.values.insert(Symbol::WpD(which), wpd);
        self.values.insert(Symbol::Zeta(which), zeta);
        Ok(())
    }

    /// Copy with every `T` jet set to zero, for tables where the modular
    /// parameter is a constant.
    pub fn frozen_tau(&self) -> Self {
        let mut out = self.clone();
        for (s, v) in out.values.iter_mut() {
            if matches!(s, Symbol::T(_)) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&Symbol, &Complex64)> {
        self.values.iter()
    }
}

impl SymbolValues for JetAssignment {
    fn value(&self, s: Symbol) -> Option<Complex64> {
        self.value_of(s)
    }
}

/// Uniform sample from the annulus `lo <= |z| <= hi`.
pub fn annulus_sample(rng: &mut impl Rng, lo: f64, hi: f64) -> Complex64 {
    let r = rng.random_range(lo..hi);
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, theta)
}

/// A point `a + b tau` in the centred cell with `0.1 <= max(|a|,|b|) <= 0.4`.
pub fn cell_sample(rng: &mut impl Rng, tau: Complex64) -> Complex64 {
    loop {
        let a: f64 = rng.random_range(-0.4..0.4);
        let b: f64 = rng.random_range(-0.4..0.4);
        if a.abs().max(b.abs()) >= 0.1 {
            return tau * b + a;
        }
    }
}

/// Deterministic jets for `fields` and the `T` jets up to `max_order`, plus
/// spectral points `u, v` with consistent builtin leaves.
pub fn sample_jets(ctx: &EllipticContext, fields: &[Field], max_order: u8, seed: u64) -> JetAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jets = JetAssignment::new(Some(ctx.clone()));
    for &f in fields {
        for k in 0..=max_order {
            jets.set(Symbol::Jet(f, k), annulus_sample(&mut rng, 0.2, 2.0));
        }
    }
    for k in 0..=max_order {
        jets.set(Symbol::T(k), annulus_sample(&mut rng, 0.2, 2.0));
    }
    loop {
        let u = cell_sample(&mut rng, ctx.tau());
        let v = cell_sample(&mut rng, ctx.tau());
        let (a, b) = ctx.cell_coordinates(v - u);
        if a.abs().max(b.abs()) < 0.1 {
            continue;
        }
        let (Ok(wu), Ok(wv)) = (ctx.wp(u), ctx.wp(v)) else { continue };
        if (wu - wv).norm() < 1e-2 {
            continue;
        }
        if jets.bind_spectral(Spectral::U, u).is_ok() && jets.bind_spectral(Spectral::V, v).is_ok() {
            break;
        }
    }
    jets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::DEFAULT_TOLERANCE;

    fn ctx() -> EllipticContext {
        EllipticContext::new(Complex64::new(0.3, 1.1), DEFAULT_TOLERANCE).unwrap()
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let c = ctx();
        let a = sample_jets(&c, &[Field::Z(0), Field::Z(2)], 3, 11);
        let b = sample_jets(&c, &[Field::Z(0), Field::Z(2)], 3, 11);
        let d = sample_jets(&c, &[Field::Z(0), Field::Z(2)], 3, 12);
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, d.values);
        for (s, v) in a.symbols() {
            if let Symbol::Jet(..) | Symbol::T(_) = s {
                assert!((0.2..=2.0).contains(&v.norm()));
            }
        }
    }

    #[test]
    fn builtin_leaves_are_consistent() {
        let c = ctx();
        let j = sample_jets(&c, &[Field::Z(0)], 1, 5);
        for s in [Spectral::U, Spectral::V] {
            let x = j.value_of(Symbol::Wp(s)).unwrap();
            let d = j.value_of(Symbol::WpD(s)).unwrap();
            let r = d * d - (4.0 * x * x * x - c.g2() * x - c.g3());
            assert!(r.norm() < 1e-8 * x.norm().powi(3).max(1.0));
        }
        assert_eq!(j.value_of(Symbol::Param(0)), None);
    }
}
