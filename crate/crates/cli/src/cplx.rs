//! Complex literals of the form `a+bi`.

use num_complex::Complex64;

/// Parses `a`, `bi`, `a+bi`, `a-bi`, with `i` alone meaning `1i`.
pub fn parse(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex literal".into());
    }
    let Some(body) = t.strip_suffix('i') else {
        return real(&t).map(|re| Complex64::new(re, 0.0));
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let split =
        (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (real(&body[..k])?, imag(&body[k..])?),
        None => (0.0, imag(body)?),
    };
    Ok(Complex64::new(re, im))
}

fn real(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid number '{s}'"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite number '{s}'"))
    }
}

fn imag(s: &str) -> Result<f64, String> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => real(s),
    }
}

pub fn render(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(parse("1000i").unwrap(), Complex64::new(0.0, 1000.0));
        assert_eq!(parse("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse("-0.25+1.5i").unwrap(), Complex64::new(-0.25, 1.5));
        assert_eq!(parse("1e-3-2E+1i").unwrap(), Complex64::new(1e-3, -20.0));
        assert_eq!(parse("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse(" 2 + i ").unwrap(), Complex64::new(2.0, 1.0));
        assert!(parse("").is_err());
        assert!(parse("1+2j").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("nan").is_err());
    }

    #[test]
    fn render_parses_back() {
        for z in [Complex64::new(1.25, -3.5), Complex64::new(-0.1, 0.0), Complex64::new(2e-17, 1e20)] {
            assert_eq!(parse(&render(z)).unwrap(), z);
        }
    }
}
