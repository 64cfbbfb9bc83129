//! Structure constants of the homogeneous brackets on `C^n` and their JSON form.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distcalc::{BracketTable, Gen};
use crate::error::{Error, Result};
use crate::symexpr::{rat, Field, Monomial, Poly, Rational, Symbol};

/// Field indices `0, 2, 3, ..., n`.
pub fn field_indices(n: usize) -> Vec<u16> {
    std::iter::once(0).chain(2..=n as u16).collect()
}

/// `{z_a(x), z_b(y)} = P_ab delta'(x-y) + Q_ab delta(x-y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructConsts {
    pub n: usize,
    pub lambda: Rational,
    pub generator: String,
    pub p: BTreeMap<(u16, u16), Poly>,
    pub q: BTreeMap<(u16, u16), Poly>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PTerm {
    pub c: u16,
    pub d: u16,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QTerm {
    pub monomial: String,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PEntry {
    pub a: u16,
    pub b: u16,
    pub terms: Vec<PTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QEntry {
    pub a: u16,
    pub b: u16,
    pub terms: Vec<QTerm>,
}

/// Serialized structure constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructDoc {
    pub n: usize,
    pub lambda: String,
    pub fields: Vec<String>,
    #[serde(rename = "P")]
    pub p: Vec<PEntry>,
    #[serde(rename = "Q")]
    pub q: Vec<QEntry>,
    pub coeff_ring: String,
    pub generator: String,
}

const COEFF_RING: &str = "Q[g1,g2,g3,T]";

fn is_field_jet(s: Symbol) -> bool {
    matches!(s, Symbol::Jet(Field::Z(_), _))
}

fn quadratic_pair(m: &Monomial) -> Option<(u16, u16)> {
    match m.factors() {
        [(Symbol::Jet(Field::Z(c), 0), 2)] => Some((*c, *c)),
        [(Symbol::Jet(Field::Z(c), 0), 1), (Symbol::Jet(Field::Z(d), 0), 1)] => Some(((*c).min(*d), (*c).max(*d))),
        _ => None,
    }
}

impl StructConsts {
    pub fn indices(&self) -> Vec<u16> {
        field_indices(self.n)
    }

    pub fn p_entry(&self, a: u16, b: u16) -> Poly {
        self.p.get(&(a, b)).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn q_entry(&self, a: u16, b: u16) -> Poly {
        self.q.get(&(a, b)).cloned().unwrap_or_else(Poly::zero)
    }

    /// Check the shape of every entry: `P` quadratic in undifferentiated
    /// fields, `Q` quadratic with at most one first jet or one `T`.
    pub fn check_shape(&self) -> Result<()> {
        for ((a, b), p) in &self.p {
            for m in p.collect_by(|s| !matches!(s, Symbol::G1 | Symbol::G2 | Symbol::G3)).keys() {
                if quadratic_pair(m).is_none() {
                    return Err(Error::Structure(format!("P[{a},{b}] has a non-quadratic monomial {m}")));
                }
            }
        }
        for ((a, b), q) in &self.q {
            for m in q.collect_by(|s| !matches!(s, Symbol::G1 | Symbol::G2 | Symbol::G3)).keys() {
                let fields = m.total_degree(is_field_jet);
                let order: i32 = m
                    .factors()
                    .iter()
                    .map(|&(s, e)| match s {
                        Symbol::Jet(_, k) => k as i32 * e,
                        Symbol::T(k) => (k as i32 + 1) * e,
                        _ => 0,
                    })
                    .sum();
                let foreign = m.factors().iter().any(|&(s, _)| !is_field_jet(s) && s != Symbol::T(0));
                if fields != 2 || order != 1 || foreign {
                    return Err(Error::Structure(format!("Q[{a},{b}] has an unexpected monomial {m}")));
                }
            }
        }
        Ok(())
    }

    /// Bracket table on `tau, z_0, z_2, ..., z_n` including the modular row.
    pub fn to_table(&self) -> BracketTable {
        let gens: Vec<Gen> = self.indices().into_iter().map(|a| Gen::F(Field::Z(a))).collect();
        let mut t = BracketTable::new(gens);
        for a in self.indices() {
            for b in self.indices() {
                t.set(Gen::F(Field::Z(a)), Gen::F(Field::Z(b)), vec![self.q_entry(a, b), self.p_entry(a, b)]);
            }
        }
        t.with_tau_row()
    }

    pub fn to_doc(&self) -> Result<StructDoc> {
        let idx = self.indices();
        let mut p_entries = Vec::new();
        let mut q_entries = Vec::new();
        for &a in &idx {
            for &b in &idx {
                let mut terms = Vec::new();
                for (m, c) in self.p_entry(a, b).collect_by(is_field_jet) {
                    let (c_idx, d_idx) = quadratic_pair(&m)
                        .ok_or_else(|| Error::Structure(format!("P[{a},{b}] has a non-quadratic monomial {m}")))?;
                    terms.push(PTerm { c: c_idx, d: d_idx, coeff: c.to_string() });
                }
                p_entries.push(PEntry { a, b, terms });
                let terms = self
                    .q_entry(a, b)
                    .collect_by(|s| is_field_jet(s) || matches!(s, Symbol::T(_)))
                    .into_iter()
                    .map(|(m, c)| QTerm { monomial: m.to_string(), coeff: c.to_string() })
                    .collect();
                q_entries.push(QEntry { a, b, terms });
            }
        }
        let mut fields = vec!["tau".to_string()];
        fields.extend(idx.iter().map(|a| format!("z{a}")));
        Ok(StructDoc {
            n: self.n,
            lambda: self.lambda.to_string(),
            fields,
            p: p_entries,
            q: q_entries,
            coeff_ring: COEFF_RING.into(),
            generator: self.generator.clone(),
        })
    }

    pub fn from_doc(doc: &StructDoc) -> Result<Self> {
        let lambda = parse_rational(&doc.lambda)?;
        let mut p = BTreeMap::new();
        for e in &doc.p {
            let mut acc = Poly::zero();
            for t in &e.terms {
                let zz = Poly::var(Symbol::Jet(Field::Z(t.c), 0)) * Poly::var(Symbol::Jet(Field::Z(t.d), 0));
                acc += &(Poly::parse(&t.coeff)? * zz);
            }
            if !acc.is_zero() {
                p.insert((e.a, e.b), acc);
            }
        }
        let mut q = BTreeMap::new();
        for e in &doc.q {
            let mut acc = Poly::zero();
            for t in &e.terms {
                acc += &(Poly::parse(&t.coeff)? * Poly::parse(&t.monomial)?);
            }
            if !acc.is_zero() {
                q.insert((e.a, e.b), acc);
            }
        }
        Ok(StructConsts { n: doc.n, lambda, generator: doc.generator.clone(), p, q })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc()?)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: StructDoc = serde_json::from_str(s)?;
        Self::from_doc(&doc)
    }

    /// Same constants with the generator label replaced.
    pub fn relabeled(&self, generator: &str) -> Self {
        StructConsts { generator: generator.into(), ..self.clone() }
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let parse = |t: &str| t.trim().parse::<i128>().map_err(|_| Error::Parse(format!("bad rational {s:?}")));
    match s.split_once('/') {
        Some((a, b)) => {
            let d = parse(b)?;
            if d == 0 {
                return Err(Error::Parse(format!("bad rational {s:?}")));
            }
            Ok(rat(parse(a)?, d))
        }
        None => Ok(Rational::from_integer(parse(s)?)),
    }
}

/// One mismatching entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub part: String,
    pub a: u16,
    pub b: u16,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub entries_compared: usize,
    pub discrepancies: Vec<Discrepancy>,
}

impl MatchReport {
    pub fn is_match(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

impl fmt::Display for MatchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} entries compared, {} discrepancies", self.entries_compared, self.discrepancies.len())?;
        for d in &self.discrepancies {
            writeln!(f, "  {}[{},{}]: {} != {}", d.part, d.a, d.b, d.left, d.right)?;
        }
        Ok(())
    }
}

/// Exact entry-by-entry comparison.
pub fn match_structconsts(a: &StructConsts, b: &StructConsts) -> Result<MatchReport> {
    if a.n != b.n {
        return Err(Error::Domain(format!("cannot match n = {} against n = {}", a.n, b.n)));
    }
    let mut report = MatchReport::default();
    for i in a.indices() {
        for j in a.indices() {
            for (part, l, r) in [("P", a.p_entry(i, j), b.p_entry(i, j)), ("Q", a.q_entry(i, j), b.q_entry(i, j))] {
                report.entries_compared += 1;
                if l != r {
                    report.discrepancies.push(Discrepancy {
                        part: part.into(),
                        a: i,
                        b: j,
                        left: l.to_string(),
                        right: r.to_string(),
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{dz, z};

    fn sample() -> StructConsts {
        let g1 = Poly::var(Symbol::G1);
        let t = Poly::var(Symbol::T(0));
        let mut p = BTreeMap::new();
        p.insert((0, 2), &(&g1 * &z(0)) * &z(2) - z(2) * z(2));
        p.insert((2, 2), z(0) * z(2));
        let mut q = BTreeMap::new();
        q.insert((0, 2), &(&g1 * &z(0)) * &dz(2) + (t * z(2) * z(2)).scale(rat(1, 6)));
        StructConsts { n: 2, lambda: rat(1, 2), generator: "test".into(), p, q }
    }

    #[test]
    fn json_round_trip() {
        let s = sample();
        let back = StructConsts::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json().unwrap(), s.to_json().unwrap());
        let doc = s.to_doc().unwrap();
        assert_eq!(doc.fields, vec!["tau", "z0", "z2"]);
        assert_eq!(doc.lambda, "1/2");
    }

    #[test]
    fn match_is_reflexive_and_sees_one_flip() {
        let s = sample();
        assert!(match_structconsts(&s, &s).unwrap().is_match());
        let mut t = s.clone();
        let flipped = -t.p[&(2, 2)].clone();
        t.p.insert((2, 2), flipped);
        let r = match_structconsts(&s, &t).unwrap();
        assert_eq!(r.discrepancies.len(), 1);
        assert_eq!((r.discrepancies[0].a, r.discrepancies[0].b), (2, 2));
    }

    #[test]
    fn shape_check_rejects_cubic_terms() {
        let mut s = sample();
        assert!(s.check_shape().is_ok());
        s.p.insert((0, 0), z(0) * z(0) * z(2));
        assert!(s.check_shape().is_err());
    }
}
