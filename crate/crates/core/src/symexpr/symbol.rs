use std::fmt;

/// A scalar field on the loop, named `z<k>` or `p<k>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Z(u16),
    P(u16),
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Z(k) => write!(f, "z{k}"),
            Field::P(k) => write!(f, "p{k}"),
        }
    }
}

/// Spectral parameter label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spectral {
    U,
    V,
}

impl Spectral {
    pub fn name(self) -> &'static str {
        match self {
            Spectral::U => "u",
            Spectral::V => "v",
        }
    }
}

/// Leaves of the polynomial ring.
///
/// The modular parameter enters only through `g1, g2, g3`, the builtin
/// elliptic leaves, and `T(k)`, the `k`-th x-derivative of `T = i tau'/(2 pi)`.
/// Variant order fixes the canonical monomial order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Unknown constant coefficient of an ansatz.
    Param(u16),
    /// Cross-ratio parameter `s`.
    CrossRatio,
    G1,
    G2,
    G3,
    /// Imaginary unit, reduced by `i^2 = -1`.
    I,
    /// Bare spectral variable.
    Spectral(Spectral),
    Zeta(Spectral),
    Wp(Spectral),
    /// `wp_z` at the spectral point.
    WpD(Spectral),
    T(u8),
    Jet(Field, u8),
}

impl Symbol {
    pub fn jet(field: Field, order: u8) -> Self {
        Symbol::Jet(field, order)
    }

    pub fn is_builtin(self) -> bool {
        matches!(self, Symbol::G1 | Symbol::G2 | Symbol::G3 | Symbol::Zeta(_) | Symbol::Wp(_) | Symbol::WpD(_))
    }

    pub fn spectral(self) -> Option<Spectral> {
        match self {
            Symbol::Spectral(s) | Symbol::Zeta(s) | Symbol::Wp(s) | Symbol::WpD(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Param(k) => write!(f, "c{k}"),
            Symbol::CrossRatio => write!(f, "s"),
            Symbol::G1 => write!(f, "g1"),
            Symbol::G2 => write!(f, "g2"),
            Symbol::G3 => write!(f, "g3"),
            Symbol::I => write!(f, "i"),
            Symbol::Spectral(s) => write!(f, "{}", s.name()),
            Symbol::Zeta(s) => write!(f, "zeta({})", s.name()),
            Symbol::Wp(s) => write!(f, "wp({})", s.name()),
            Symbol::WpD(s) => write!(f, "wpd({})", s.name()),
            Symbol::T(k) => write!(f, "T{}", "'".repeat(*k as usize)),
            Symbol::Jet(field, k) => write!(f, "{field}{}", "'".repeat(*k as usize)),
        }
    }
}

/// Parse the textual form produced by `Display`.
pub fn parse_symbol(s: &str) -> Option<Symbol> {
    let primes = s.chars().rev().take_while(|&c| c == '\'').count();
    let base = &s[..s.len() - primes];
    let order = u8::try_from(primes).ok()?;
    let spectral = |arg: &str| match arg {
        "u" => Some(Spectral::U),
        "v" => Some(Spectral::V),
        _ => None,
    };
    if let Some(inner) = base.strip_suffix(')') {
        if primes > 0 {
            return None;
        }
        let (head, arg) = inner.split_once('(')?;
        let sp = spectral(arg)?;
        return match head {
            "zeta" => Some(Symbol::Zeta(sp)),
            "wp" => Some(Symbol::Wp(sp)),
            "wpd" => Some(Symbol::WpD(sp)),
            _ => None,
        };
    }
    if base == "T" {
        return Some(Symbol::T(order));
    }
    let index = |rest: &str| rest.parse::<u16>().ok();
    if let Some(rest) = base.strip_prefix('z') {
        return index(rest).map(|k| Symbol::Jet(Field::Z(k), order));
    }
    if let Some(rest) = base.strip_prefix('p') {
        return index(rest).map(|k| Symbol::Jet(Field::P(k), order));
    }
    if primes > 0 {
        return None;
    }
    match base {
        "s" => Some(Symbol::CrossRatio),
        "g1" => Some(Symbol::G1),
        "g2" => Some(Symbol::G2),
        "g3" => Some(Symbol::G3),
        "i" => Some(Symbol::I),
        "u" => Some(Symbol::Spectral(Spectral::U)),
        "v" => Some(Symbol::Spectral(Spectral::V)),
        _ => base.strip_prefix('c').and_then(index).map(Symbol::Param),
    }
}
