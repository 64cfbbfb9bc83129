//! Finite-dimensional warm-up: a cubic Poisson structure on `C^3` and its
//! descent to affine coordinates on `CP^2`.

use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symexpr::{polynomial_reduce, rat, Field, Poly, Rational, Symbol};

fn zc(k: u16) -> Poly {
    Poly::var(Symbol::Jet(Field::Z(k), 0))
}

fn pc(k: u16) -> Poly {
    Poly::var(Symbol::Jet(Field::P(k), 0))
}

/// Coefficients of the cubic, either the free symbols `g2, g3` or numbers.
#[derive(Clone, Debug)]
pub struct Cubic {
    pub g2: Poly,
    pub g3: Poly,
}

impl Cubic {
    pub fn symbolic() -> Self {
        Cubic { g2: Poly::var(Symbol::G2), g3: Poly::var(Symbol::G3) }
    }

    /// Exact rational image of a complex value; the imaginary part rides on `i`.
    pub fn specialized(g2: Complex64, g3: Complex64) -> Result<Self> {
        Ok(Cubic { g2: complex_poly(g2)?, g3: complex_poly(g3)? })
    }

    /// `Q = (z1^2 z3 - 4 z2^3 + g2 z2 z3^2 + g3 z3^3) / 3`.
    pub fn potential(&self) -> Poly {
        let (z1, z2, z3) = (zc(1), zc(2), zc(3));
        let q = &(&(&z1.pow(2) * &z3) - &z2.pow(3).scale(rat(4, 1)))
            + &(&(&self.g2 * &z2) * &z3.pow(2))
            + (&self.g3 * &z3.pow(3));
        q.scale(rat(1, 3))
    }

    /// `p1^2 - 4 p2^3 + g2 p2 + g3`.
    pub fn affine_target(&self) -> Poly {
        let (p1, p2) = (pc(1), pc(2));
        &(&(&p1.pow(2) - &p2.pow(3).scale(rat(4, 1))) + &(&self.g2 * &p2)) + &self.g3
    }
}

fn rational(x: f64) -> Result<Rational> {
    Ratio::<i128>::approximate_float(x).ok_or_else(|| Error::Domain(format!("{x} has no rational image")))
}

fn complex_poly(c: Complex64) -> Result<Poly> {
    Ok(&Poly::constant(rational(c.re)?) + &Poly::var(Symbol::I).scale(rational(c.im)?))
}

/// A constant-free bivector on finitely many coordinates.
#[derive(Clone, Debug)]
pub struct FiniteBracket {
    coords: Vec<Symbol>,
    pi: Vec<Vec<Poly>>,
}

impl FiniteBracket {
    /// Bracket of the cubic: `{z1,z2} = Q_3`, `{z2,z3} = Q_1`, `{z3,z1} = Q_2`.
    pub fn from_cubic(c: &Cubic) -> Self {
        let q = c.potential();
        let coords: Vec<Symbol> = (1..=3).map(|k| Symbol::Jet(Field::Z(k), 0)).collect();
        let d: Vec<Poly> = coords.iter().map(|s| q.partial(*s)).collect();
        let mut pi = vec![vec![Poly::zero(); 3]; 3];
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            pi[a][b] = d[c].clone();
            pi[b][a] = -&d[c];
        }
        FiniteBracket { coords, pi }
    }

    /// Adds `extra` to `pi_ab` and subtracts it from `pi_ba`.
    pub fn perturb(&mut self, a: usize, b: usize, extra: &Poly) {
        self.pi[a][b] += extra;
        self.pi[b][a] -= extra;
    }

    pub fn entry(&self, a: usize, b: usize) -> &Poly {
        &self.pi[a][b]
    }

    /// `{f, g} = sum_ab f_a g_b pi_ab`.
    pub fn bracket(&self, f: &Poly, g: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (a, sa) in self.coords.iter().enumerate() {
            let fa = f.partial(*sa);
            if fa.is_zero() {
                continue;
            }
            for (b, sb) in self.coords.iter().enumerate() {
                let gb = g.partial(*sb);
                if gb.is_zero() || self.pi[a][b].is_zero() {
                    continue;
                }
                out += &(&(&fa * &gb) * &self.pi[a][b]);
            }
        }
        out
    }

    /// Cyclic sums `{z_a,{z_b,z_c}} + cycl.` for all `a < b < c`.
    pub fn jacobiator(&self) -> Vec<((usize, usize, usize), Poly)> {
        let n = self.coords.len();
        let x: Vec<Poly> = self.coords.iter().map(|s| Poly::var(*s)).collect();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let j = &(&self.bracket(&x[a], &self.pi[b][c]) + &self.bracket(&x[b], &self.pi[c][a]))
                        + &self.bracket(&x[c], &self.pi[a][b]);
                    out.push(((a, b, c), polynomial_reduce(&j)));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Cp2Case {
    pub label: String,
    /// `{p1, p2}` after substituting `z1 = p1 z3`, `z2 = p2 z3`.
    pub descended: String,
    pub target: String,
    pub descent_exact: bool,
    pub jacobi_exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Cp2Report {
    pub cases: Vec<Cp2Case>,
}

impl Cp2Report {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.descent_exact && c.jacobi_exact)
    }
}

/// `{z1/z3, z2/z3}` written in the affine coordinates `p1, p2`.
pub fn cp2_descend(c: &Cubic) -> Result<Poly> {
    let br = FiniteBracket::from_cubic(c);
    let z3 = Symbol::Jet(Field::Z(3), 0);
    let ratio = |k: u16| &zc(k) * &Poly::var_pow(z3, -1);
    let raw = br.bracket(&ratio(1), &ratio(2));
    let sub = |s: Symbol| match s {
        Symbol::Jet(Field::Z(k @ (1 | 2)), 0) => Some(&pc(k) * &zc(3)),
        _ => None,
    };
    let out = polynomial_reduce(&raw.substitute(&sub)?);
    if out.contains(z3) {
        return Err(Error::Structure(format!("descended bracket still depends on z3: {out}")));
    }
    Ok(out)
}

fn run_case(label: &str, c: &Cubic) -> Result<Cp2Case> {
    let descended = cp2_descend(c)?;
    let target = polynomial_reduce(&c.affine_target());
    let jac = FiniteBracket::from_cubic(c).jacobiator();
    Ok(Cp2Case {
        label: label.into(),
        descent_exact: (&descended - &target).is_zero(),
        jacobi_exact: jac.iter().all(|(_, j)| j.is_zero()),
        descended: descended.to_string(),
        target: target.to_string(),
    })
}

/// Exact descent and Jacobi checks with free `g2, g3`, at the given values,
/// and at the degenerate cubic `g2 = g3 = 0`.
pub fn cp2_check(g2: Complex64, g3: Complex64) -> Result<Cp2Report> {
    let zero = Complex64::new(0.0, 0.0);
    Ok(Cp2Report {
        cases: vec![
            run_case("symbolic", &Cubic::symbolic())?,
            run_case("specialized", &Cubic::specialized(g2, g3)?)?,
            run_case("degenerate", &Cubic::specialized(zero, zero)?)?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brackets_are_the_gradient_components() {
        let b = FiniteBracket::from_cubic(&Cubic::symbolic());
        assert_eq!(b.entry(0, 1).to_string(), Poly::parse("1/3*z1^2 + 2/3*g2*z2*z3 + g3*z3^2").unwrap().to_string());
        assert_eq!(b.entry(1, 2).to_string(), Poly::parse("2/3*z1*z3").unwrap().to_string());
        assert_eq!(b.entry(2, 0).to_string(), Poly::parse("-4*z2^2 + 1/3*g2*z3^2").unwrap().to_string());
        assert!((b.entry(1, 0) + b.entry(0, 1)).is_zero());
    }

    #[test]
    fn symbolic_and_specialized_descent_is_exact() {
        let r = cp2_check(Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)).unwrap();
        assert!(r.passed(), "{r:?}");
        let specialized = &r.cases[1];
        assert_eq!(specialized.descended, Poly::parse("1/2 + p2 - 4*p2^3 + p1^2").unwrap().to_string());
        assert_eq!(r.cases[2].descended, Poly::parse("p1^2 - 4*p2^3").unwrap().to_string());
    }

    #[test]
    fn complex_parameters_stay_exact() {
        let r = cp2_check(Complex64::new(0.25, -1.5), Complex64::new(-2.0, 0.75)).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn perturbed_bracket_breaks_jacobi() {
        let mut b = FiniteBracket::from_cubic(&Cubic::symbolic());
        let extra = zc(1).pow(2);
        b.perturb(0, 1, &extra);
        assert!(b.jacobiator().iter().any(|(_, j)| !j.is_zero()));
    }
}
