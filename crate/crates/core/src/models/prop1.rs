//! Homogeneous quadratic lifts of a CP^1 bracket to two fields, as a
//! polynomial system in the unknown structure constants.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::prop2::cp1_coefficients;
use crate::distcalc::{antisymmetry_symbolic, bracket_exprs, jacobi_symbolic, BracketTable, Gen, GenExpr};
use crate::error::{Error, Result};
use crate::symexpr::{jet, rat, total_x_derivative_n, Field, JetAssignment, Poly, Rational, Symbol};

const FIELDS: [Field; 2] = [Field::Z(1), Field::Z(2)];
const AFFINE: Field = Field::P(1);

/// Where an equation came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Source {
    Matching,
    Antisymmetry,
    Jacobi,
}

/// Unknown layout: for each ordered pair `(a, b)`, three `q^{cd}` with
/// `c <= d` followed by four `r^{cd}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Unknown {
    Q { a: u8, b: u8, c: u8, d: u8 },
    R { a: u8, b: u8, c: u8, d: u8 },
}

fn layout() -> Vec<Unknown> {
    let mut out = Vec::new();
    for a in 1..=2 {
        for b in 1..=2 {
            for (c, d) in [(1, 1), (1, 2), (2, 2)] {
                out.push(Unknown::Q { a, b, c, d });
            }
            for c in 1..=2 {
                for d in 1..=2 {
                    out.push(Unknown::R { a, b, c, d });
                }
            }
        }
    }
    out
}

/// One equation `c0 + sum lin_i x_i + sum quad_ij x_i x_j = 0`.
#[derive(Clone, Debug, Default)]
pub struct Equation {
    pub source: Option<Source>,
    pub c0: Complex64,
    pub lin: Vec<(usize, Complex64)>,
    pub quad: Vec<(usize, usize, Complex64)>,
}

impl Equation {
    fn value(&self, x: &[Complex64]) -> Complex64 {
        let mut v = self.c0;
        for &(i, c) in &self.lin {
            v += c * x[i];
        }
        for &(i, j, c) in &self.quad {
            v += c * x[i] * x[j];
        }
        v
    }

    fn gradient_into(&self, x: &[Complex64], row: &mut [Complex64]) {
        for &(i, c) in &self.lin {
            row[i] += c;
        }
        for &(i, j, c) in &self.quad {
            row[i] += c * x[j];
            row[j] += c * x[i];
        }
    }
}

/// The lifting system for a target `{p, p} = G delta' + G'/2 p' delta`.
#[derive(Clone, Debug)]
pub struct NoGoSystem {
    pub s: Complex64,
    pub unknowns: Vec<Unknown>,
    pub equations: Vec<Equation>,
    /// Symbolic equations in `Param` unknowns, before numeric compilation.
    pub symbolic: Vec<(Source, Poly)>,
    /// `delta` and `delta'` coefficients of `{z1/z2, z1/z2}` minus the target, in z-jets.
    pub matching_z: Vec<Poly>,
}

fn param(k: usize) -> Poly {
    Poly::var(Symbol::Param(k as u16))
}

/// The general two-field ansatz with `Param` coefficients.
pub fn ansatz_table() -> BracketTable {
    let unknowns = layout();
    let mut entries: BTreeMap<(u8, u8), [Poly; 2]> = BTreeMap::new();
    for (k, u) in unknowns.iter().enumerate() {
        let (a, b, term, slot) = match *u {
            Unknown::Q { a, b, c, d } => (a, b, &jet(FIELDS[c as usize - 1], 0) * &jet(FIELDS[d as usize - 1], 0), 1),
            Unknown::R { a, b, c, d } => (a, b, &jet(FIELDS[c as usize - 1], 0) * &jet(FIELDS[d as usize - 1], 1), 0),
        };
        entries.entry((a, b)).or_insert_with(|| [Poly::zero(), Poly::zero()])[slot] += &(&param(k) * &term);
    }
    let mut t = BracketTable::new(FIELDS.iter().map(|&f| Gen::F(f)).collect());
    for ((a, b), [d0, d1]) in entries {
        t.set(Gen::F(FIELDS[a as usize - 1]), Gen::F(FIELDS[b as usize - 1]), vec![d0, d1]);
    }
    t
}

/// `G(p) = p (p - 1) (p - s)` with `s` symbolic.
pub fn cross_ratio_quartic() -> Poly {
    let p = jet(AFFINE, 0);
    &(&p * &(&p - &Poly::one())) * &(&p - &Poly::var(Symbol::CrossRatio))
}

fn ratio() -> Poly {
    &jet(FIELDS[0], 0) * &Poly::var_pow(Symbol::Jet(FIELDS[1], 0), -1)
}

/// `{z1/z2, z1/z2}` coefficients for a two-field table, in z-jets.
fn affine_self_bracket(t: &BracketTable) -> Result<Vec<Poly>> {
    let e = GenExpr::Expr(ratio());
    Ok(bracket_exprs(t, &e, &e)?.two_point_coefficients())
}

/// Substitute `z1^{(k)} = (p z2)^{(k)}`.
fn to_affine(c: &Poly) -> Result<Poly> {
    let sub = |s: Symbol| match s {
        Symbol::Jet(f, k) if f == FIELDS[0] => {
            Some(total_x_derivative_n(&(&jet(AFFINE, 0) * &jet(FIELDS[1], 0)), k as usize))
        }
        _ => None,
    };
    c.substitute(&sub)
}

/// Substitute `p^{(k)} = (z1/z2)^{(k)}`.
fn from_affine(c: &Poly) -> Result<Poly> {
    let sub = |s: Symbol| match s {
        Symbol::Jet(f, k) if f == AFFINE => Some(total_x_derivative_n(&ratio(), k as usize)),
        _ => None,
    };
    c.substitute(&sub)
}

fn pad(mut v: Vec<Poly>, len: usize) -> Vec<Poly> {
    v.resize(len.max(v.len()), Poly::zero());
    v
}

fn is_jet(s: Symbol) -> bool {
    matches!(s, Symbol::Jet(..))
}

fn compile(source: Source, p: &Poly, s: Complex64) -> Result<Equation> {
    let mut eq = Equation { source: Some(source), ..Default::default() };
    let values = |sym: Symbol| match sym {
        Symbol::CrossRatio => Some(s),
        _ => None,
    };
    for (m, c) in p.collect_by(|x| matches!(x, Symbol::Param(_))) {
        let c = c.eval(&values)?;
        let idx: Vec<(usize, i32)> = m
            .factors()
            .iter()
            .map(|&(x, e)| match x {
                Symbol::Param(k) => (k as usize, e),
                _ => unreachable!(),
            })
            .collect();
        match idx.as_slice() {
            [] => eq.c0 += c,
            [(i, 1)] => eq.lin.push((*i, c)),
            [(i, 2)] => eq.quad.push((*i, *i, c)),
            [(i, 1), (j, 1)] => eq.quad.push((*i, *j, c)),
            _ => return Err(Error::Structure(format!("equation is not quadratic in the unknowns: {m}"))),
        }
    }
    Ok(eq)
}

impl NoGoSystem {
    /// Matching against `G = p(p-1)(p-s)` with antisymmetry and Jacobi constraints.
    pub fn new(s: Complex64) -> Result<Self> {
        Self::with_target(&cross_ratio_quartic(), s)
    }

    /// Same constraints with an arbitrary target `G(p)`.
    pub fn with_target(big_g: &Poly, s: Complex64) -> Result<Self> {
        let t = ansatz_table();
        let mut symbolic: Vec<(Source, Poly)> = Vec::new();

        let target = cp1_coefficients(AFFINE, big_g);
        let lifted = affine_self_bracket(&t)?;
        let len = target.len().max(lifted.len());
        let mut matching_z = Vec::new();
        for (l, g) in pad(lifted, len).iter().zip(pad(target, len)) {
            matching_z.push(l - &from_affine(&g)?);
            let d = &to_affine(l)? - &g;
            symbolic.extend(d.collect_by(is_jet).into_values().map(|c| (Source::Matching, c)));
        }
        for (_, d) in antisymmetry_symbolic(&t)? {
            for c in d.terms.values() {
                symbolic.extend(c.collect_by(is_jet).into_values().map(|c| (Source::Antisymmetry, c)));
            }
        }
        for (_, d) in jacobi_symbolic(&t)? {
            for c in d.terms.values() {
                symbolic.extend(c.collect_by(is_jet).into_values().map(|c| (Source::Jacobi, c)));
            }
        }
        let equations = symbolic.iter().map(|(src, p)| compile(*src, p, s)).collect::<Result<Vec<_>>>()?;
        Ok(NoGoSystem { s, unknowns: layout(), equations, symbolic, matching_z })
    }

    pub fn dim(&self) -> usize {
        self.unknowns.len()
    }

    pub fn count(&self, source: Source) -> usize {
        self.equations.iter().filter(|e| e.source == Some(source)).count()
    }

    /// Sum of squared moduli of all equations.
    pub fn residual(&self, x: &[Complex64]) -> f64 {
        self.equations.iter().map(|e| e.value(x).norm_sqr()).sum()
    }

    fn values(&self, x: &[Complex64]) -> DVector<Complex64> {
        DVector::from_iterator(self.equations.len(), self.equations.iter().map(|e| e.value(x)))
    }

    fn jacobian(&self, x: &[Complex64]) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut j = DMatrix::zeros(self.equations.len(), n);
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        for (k, e) in self.equations.iter().enumerate() {
            row.iter_mut().for_each(|r| *r = Complex64::new(0.0, 0.0));
            e.gradient_into(x, &mut row);
            for (i, v) in row.iter().enumerate() {
                j[(k, i)] = *v;
            }
        }
        j
    }

    /// Matching discrepancy in z-jets at given unknown values.
    pub fn matching_at(&self, x: &[Complex64], jets: &JetAssignment) -> Result<Vec<Complex64>> {
        let values = |s: Symbol| match s {
            Symbol::Param(k) => x.get(k as usize).copied(),
            Symbol::CrossRatio => Some(self.s),
            _ => jets.value_of(s),
        };
        self.matching_z.iter().map(|p| p.eval(&values)).collect()
    }
}

pub fn prop1_system(s: Complex64) -> Result<NoGoSystem> {
    if s == Complex64::new(0.0, 0.0) || s == Complex64::new(1.0, 0.0) {
        return Err(Error::Domain(format!("cross-ratio {s} makes roots collide")));
    }
    NoGoSystem::new(s)
}

/// Options for the multi-start minimization.
#[derive(Clone, Debug, Serialize)]
pub struct SolverOptions {
    /// Starting points are drawn with real and imaginary parts in `[-box_radius, box_radius]`.
    pub box_radius: f64,
    pub max_iterations: usize,
    pub threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { box_radius: 2.0, max_iterations: 400, threshold: 1e-3 }
    }
}

/// Complex Levenberg-Marquardt from one starting point; returns the final residual.
pub fn minimize(sys: &NoGoSystem, x0: Vec<Complex64>, max_iterations: usize) -> (f64, Vec<Complex64>) {
    let n = sys.dim();
    let mut x = x0;
    let mut r = sys.values(&x);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    for _ in 0..max_iterations {
        if cost < 1e-30 {
            break;
        }
        let j = sys.jacobian(&x);
        let jh = j.adjoint();
        let a = &jh * &j;
        let g = &jh * &r;
        let scale = (0..n).map(|i| a[(i, i)].re).fold(0.0, f64::max).max(1e-300);
        let mut improved = false;
        while mu < 1e12 {
            let mut m = a.clone();
            for i in 0..n {
                m[(i, i)] += Complex64::new(mu * scale, 0.0);
            }
            let Some(step) = m.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<Complex64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let tr = sys.values(&trial);
            let tc = tr.norm_squared();
            if tc < cost {
                let rel = (cost - tc) / cost.max(1e-300);
                x = trial;
                r = tr;
                cost = tc;
                mu = (mu / 3.0).max(1e-15);
                improved = rel > 1e-14;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (cost, x)
}

fn start(n: usize, radius: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Complex64::new(rng.random_range(-radius..radius), rng.random_range(-radius..radius))).collect()
}

/// Best residuals of a multi-start run, sorted ascending.
pub fn multistart(sys: &NoGoSystem, restarts: usize, seed: u64, opts: &SolverOptions) -> Vec<f64> {
    let mut out: Vec<f64> = (0..restarts as u64)
        .into_par_iter()
        .map(|k| {
            let x0 = start(sys.dim(), opts.box_radius, seed.wrapping_add(k.wrapping_mul(0x9e37_79b9)));
            minimize(sys, x0, opts.max_iterations).0
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// A liftable target: the direct sum `c_i (w_i^2 delta' + w_i w_i' delta)`
/// written in `z = M w`, and the quartic it induces on `p = z1/z2`.
pub fn feasible_target(seed: u64) -> Result<(BracketTable, Poly)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |lo: i128, hi: i128| -> Rational {
        loop {
            let v = rng.random_range(lo..=hi);
            if v != 0 {
                return rat(v, 2);
            }
        }
    };
    let (m, weights) = loop {
        let m = [[pick(-4, 4), pick(-4, 4)], [pick(-4, 4), pick(-4, 4)]];
        if m[0][0] * m[1][1] != m[0][1] * m[1][0] {
            break (m, [pick(1, 6), pick(1, 6)]);
        }
    };
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    let w = |c: usize, k: u8| jet(FIELDS[0], k).scale(inv[c][0]) + jet(FIELDS[1], k).scale(inv[c][1]);
    let mut t = BracketTable::new(FIELDS.iter().map(|&f| Gen::F(f)).collect());
    for a in 0..2 {
        for b in 0..2 {
            let (mut d0, mut d1) = (Poly::zero(), Poly::zero());
            for c in 0..2 {
                let k = m[a][c] * m[b][c] * weights[c];
                d1 += &w(c, 0).pow(2).scale(k);
                d0 += &(&w(c, 0) * &w(c, 1)).scale(k);
            }
            t.set(Gen::F(FIELDS[a]), Gen::F(FIELDS[b]), vec![d0, d1]);
        }
    }
    let coeffs = affine_self_bracket(&t)?;
    let big_g = to_affine(&coeffs[1])?;
    if big_g.any_symbol(|s| matches!(s, Symbol::Jet(f, _) if f == FIELDS[1])) {
        return Err(Error::Structure(format!("direct sum does not descend: {big_g}")));
    }
    let expected = cp1_coefficients(AFFINE, &big_g);
    if !(&to_affine(&coeffs[0])? - &expected[0]).is_zero() {
        return Err(Error::Structure("direct sum descends to a non-hydrodynamic bracket".into()));
    }
    Ok((t, big_g))
}

/// Outcome of the no-go certificate.
#[derive(Clone, Debug, Serialize)]
pub struct NoGoReport {
    pub s: Complex64,
    pub unknowns: usize,
    pub equations: BTreeMap<String, usize>,
    pub restarts: usize,
    pub seed: u64,
    pub options: SolverOptions,
    pub min_residual: f64,
    pub median_residual: f64,
    pub max_residual: f64,
    /// Smallest residual reached on a liftable control target.
    pub feasible_residual: f64,
    pub feasible_tolerance: f64,
}

impl NoGoReport {
    pub fn certified(&self) -> bool {
        self.min_residual > self.options.threshold && self.feasible_residual < self.feasible_tolerance
    }
}

pub const FEASIBLE_TOLERANCE: f64 = 1e-10;
const FEASIBLE_RESTARTS: usize = 8;

pub fn prop1_certificate(sys: &NoGoSystem, restarts: usize, seed: u64) -> Result<NoGoReport> {
    prop1_certificate_with(sys, restarts, seed, &SolverOptions::default())
}

pub fn prop1_certificate_with(
    sys: &NoGoSystem,
    restarts: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<NoGoReport> {
    if restarts == 0 {
        return Err(Error::Domain("need at least one restart".into()));
    }
    let runs = multistart(sys, restarts, seed, opts);
    let (_, g) = feasible_target(seed)?;
    let control = NoGoSystem::with_target(&g, sys.s)?;
    let feasible = multistart(&control, FEASIBLE_RESTARTS, seed ^ 0x5eed, opts)[0];
    let mut equations = BTreeMap::new();
    for (name, src) in
        [("matching", Source::Matching), ("antisymmetry", Source::Antisymmetry), ("jacobi", Source::Jacobi)]
    {
        equations.insert(name.to_string(), sys.count(src));
    }
    Ok(NoGoReport {
        s: sys.s,
        unknowns: sys.dim(),
        equations,
        restarts,
        seed,
        options: opts.clone(),
        min_residual: runs[0],
        median_residual: runs[runs.len() / 2],
        max_residual: runs[runs.len() - 1],
        feasible_residual: feasible,
        feasible_tolerance: FEASIBLE_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn ansatz_has_twenty_eight_unknowns() {
        let sys = prop1_system(c(2.0)).unwrap();
        assert_eq!(sys.dim(), 28);
        assert!(sys.count(Source::Matching) > 0);
        assert!(sys.count(Source::Antisymmetry) > 0);
        assert!(sys.count(Source::Jacobi) > 0);
    }

    #[test]
    fn matching_and_antisymmetry_are_linear() {
        let sys = prop1_system(c(2.0)).unwrap();
        for e in &sys.equations {
            if e.source != Some(Source::Jacobi) {
                assert!(e.quad.is_empty());
            }
        }
        assert!(sys.equations.iter().any(|e| !e.quad.is_empty()));
    }

    #[test]
    fn degenerate_cross_ratio_is_rejected() {
        assert!(prop1_system(c(1.0)).is_err());
        assert!(prop1_system(c(0.0)).is_err());
    }

    #[test]
    fn direct_sum_control_descends_and_is_solvable() {
        let (t, g) = feasible_target(3).unwrap();
        for (_, d) in jacobi_symbolic(&t).unwrap() {
            assert!(d.is_zero());
        }
        let sys = NoGoSystem::with_target(&g, c(2.0)).unwrap();
        let best = multistart(&sys, 4, 11, &SolverOptions::default())[0];
        assert!(best < FEASIBLE_TOLERANCE, "feasible residual {best}");
    }

    #[test]
    fn matching_is_invariant_under_rescaling() {
        let sys = prop1_system(Complex64::new(2.0, 0.5)).unwrap();
        let x = start(sys.dim(), 1.0, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut jets = JetAssignment::new(None);
        let mut scaled = JetAssignment::new(None);
        let k = Complex64::new(0.7, -1.3);
        for f in FIELDS {
            for o in 0..3 {
                let v = Complex64::new(rng.random_range(0.5..1.5), rng.random_range(-1.0..1.0));
                jets.set(Symbol::Jet(f, o), v);
                scaled.set(Symbol::Jet(f, o), k * v);
            }
        }
        let a = sys.matching_at(&x, &jets).unwrap();
        let b = sys.matching_at(&x, &scaled).unwrap();
        assert!(a.iter().any(|v| v.norm() > 1e-3));
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).norm() < 1e-10 * (1.0 + u.norm()), "{u} vs {v}");
        }
    }
}
