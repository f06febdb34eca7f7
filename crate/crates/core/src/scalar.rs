//! Scalar abstraction shared by every model.
//!
//! All dynamics are generic over [`Scalar`], which is implemented for exact
//! arbitrary-precision rationals ([`Rational`]) and for `f32`/`f64`. Exact
//! scalars compare by equality (their default tolerance is zero); floating
//! scalars compare within a tolerance carried by the caller.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {text:?} as a number: {reason}")]
pub struct ParseScalarError {
    pub text: String,
    pub reason: &'static str,
}

impl ParseScalarError {
    fn new(text: &str, reason: &'static str) -> Self {
        Self {
            text: text.to_string(),
            reason,
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// Whether arithmetic in this type is exact.
    const EXACT: bool;

    /// Comparison tolerance used when the caller does not supply one.
    fn default_tolerance() -> Self;

    fn floor(&self) -> Self;

    /// Square root, when it is representable in this type.
    fn sqrt_checked(&self) -> Option<Self>;

    /// The exact rational value, if this scalar carries one.
    fn to_rational(&self) -> Option<Rational>;

    fn from_rational(value: &Rational) -> Self;

    /// Text form used in CSV and JSON: `p/q` for rationals, shortest
    /// round-trip decimal for floats.
    fn to_text(&self) -> String;

    fn parse_text(text: &str) -> Result<Self, ParseScalarError>;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    fn from_int(value: i64) -> Self {
        Self::from_ratio(value, 1)
    }

    /// Integer power; negative exponents invert.
    fn powi(&self, exp: i64) -> Self {
        let magnitude = num_traits::pow(self.clone(), exp.unsigned_abs() as usize);
        if exp < 0 {
            Self::one() / magnitude
        } else {
            magnitude
        }
    }

    /// Fractional part `x - floor(x)`, in `[0, 1)`.
    fn frac(&self) -> Self {
        self.clone() - self.floor()
    }

    fn approx_eq(&self, other: &Self, tolerance: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= *tolerance
    }

    /// Within `tolerance` of an integer.
    fn is_integral(&self, tolerance: &Self) -> bool {
        let below = self.floor();
        let above = below.clone() + Self::one();
        self.approx_eq(&below, tolerance) || self.approx_eq(&above, tolerance)
    }

    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn default_tolerance() -> Self {
        Self::zero()
    }

    fn floor(&self) -> Self {
        num_rational::Ratio::floor(self)
    }

    fn sqrt_checked(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| Self::new(n, d))
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }

    fn to_text(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn parse_text(text: &str) -> Result<Self, ParseScalarError> {
        parse_exact(text)
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn default_tolerance() -> Self {
                $tol
            }

            fn floor(&self) -> Self {
                <$t>::floor(*self)
            }

            fn sqrt_checked(&self) -> Option<Self> {
                (*self >= 0.0).then(|| self.sqrt())
            }

            fn to_rational(&self) -> Option<Rational> {
                None
            }

            fn from_rational(value: &Rational) -> Self {
                value.to_f64().unwrap_or(f64::NAN) as $t
            }

            fn to_text(&self) -> String {
                format!("{}", self)
            }

            fn parse_text(text: &str) -> Result<Self, ParseScalarError> {
                let text = text.trim();
                if text.contains('/') {
                    return parse_exact(text).map(|r| Self::from_rational(&r));
                }
                <$t>::from_str(text).map_err(|_| ParseScalarError::new(text, "not a decimal"))
            }

            fn powi(&self, exp: i64) -> Self {
                <$t>::powi(*self, exp as i32)
            }
        }
    };
}

float_scalar!(f64, 1e-9);
float_scalar!(f32, 1e-5);

/// Parses `p/q`, an integer, or a finite decimal (`1.05`, `-0.25`) into an
/// exact rational.
pub fn parse_exact(text: &str) -> Result<Rational, ParseScalarError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ParseScalarError::new(text, "empty"));
    }
    if let Some((p, q)) = text.split_once('/') {
        let p = parse_exact(p)?;
        let q = parse_exact(q)?;
        if q.is_zero() {
            return Err(ParseScalarError::new(text, "zero denominator"));
        }
        return Ok(p / q);
    }
    let (negative, body) = match text.as_bytes()[0] {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty()) || !all_digits(int_part) || !all_digits(frac_part) {
        return Err(ParseScalarError::new(text, "expected p/q or a decimal"));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(&digits).map_err(|_| ParseScalarError::new(text, "bad digits"))?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Rational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

/// Builds an exact rational `numer/denom`.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Serde adapters writing scalars in their text form.
pub mod text {
    use super::Scalar;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_text())
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        let text = String::deserialize(d)?;
        T::parse_text(&text).map_err(D::Error::custom)
    }

    pub mod option {
        use super::super::Scalar;
        use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

        pub fn serialize<T: Scalar, S: Serializer>(value: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
            match value {
                Some(v) => s.serialize_some(&v.to_text()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Option<T>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| T::parse_text(&t).map_err(D::Error::custom))
                .transpose()
        }
    }

    pub mod vec {
        use super::super::Scalar;
        use serde::{de::Error as _, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

        pub fn serialize<T: Scalar, S: Serializer>(values: &[T], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(values.len()))?;
            for v in values {
                seq.serialize_element(&v.to_text())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<T>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|t| T::parse_text(t).map_err(D::Error::custom))
                .collect()
        }
    }
}
