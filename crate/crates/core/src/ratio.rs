//! Exact rationals for thresholds such as epsilon and delta, written as
//! `"p/q"` text in files and on the command line.

use num_rational::Ratio;

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let parsed = match text.split_once('/') {
        Some((p, q)) => p.trim().parse::<i64>().ok().zip(q.trim().parse::<i64>().ok()),
        None => text.parse::<i64>().ok().map(|p| (p, 1)),
    };
    match parsed {
        Some((_, 0)) | None => Err(Error::domain(format!("`{text}` is not a rational p/q"))),
        Some((p, q)) => Ok(Rational::new(p, q)),
    }
}

pub fn format_rational(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `serde(with = "...")` adapter storing a rational as `"p/q"`.
pub mod as_text {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("1/4").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational(" 2/8 ").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.25").is_err());
        assert_eq!(format_rational(&Rational::new(2, 4)), "1/2");
        assert_eq!(format_rational(&Rational::from_integer(2)), "2");
    }
}
