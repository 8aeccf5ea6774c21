//! Numeric coefficients: exact rationals that degrade to `f64` on overflow or
//! on contact with an inexact value.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

/// Exact rational with `i128` parts, always reduced with a positive denominator.
pub type Rational = Ratio<i128>;

#[derive(Clone, Copy, Debug)]
pub enum Number {
    Rational(Rational),
    Float(f64),
}

impl Number {
    pub const ZERO: Number = Number::Rational(Ratio::new_raw(0, 1));
    pub const ONE: Number = Number::Rational(Ratio::new_raw(1, 1));

    pub fn int(n: i128) -> Number {
        Number::Rational(Rational::from_integer(n))
    }

    pub fn ratio(numer: i128, denom: i128) -> Number {
        Number::Rational(Rational::new(numer, denom))
    }

    /// Integral reals become exact; everything else stays a float.
    pub fn from_real(v: f64) -> Number {
        if v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15 {
            Number::int(v as i128)
        } else {
            Number::Float(v)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Number::Rational(r) => rational_to_f64(&r),
            Number::Float(f) => f,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Float(f) => *f == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_one(),
            Number::Float(f) => *f == 1.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_negative(),
            Number::Float(f) => *f < 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Rational(_))
    }

    /// The value as an integer, if it is an exact integer.
    pub fn as_integer(&self) -> Option<i128> {
        match self {
            Number::Rational(r) if r.is_integer() => Some(*r.numer()),
            _ => None,
        }
    }

    pub fn abs(self) -> Number {
        match self {
            Number::Rational(r) => Number::Rational(r.abs()),
            Number::Float(f) => Number::Float(f.abs()),
        }
    }

    pub fn add(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => match a.checked_add(&b) {
                Some(r) => Number::Rational(r),
                None => Number::Float(self.to_f64() + other.to_f64()),
            },
            _ => Number::Float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn sub(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => match a.checked_sub(&b) {
                Some(r) => Number::Rational(r),
                None => Number::Float(self.to_f64() - other.to_f64()),
            },
            _ => Number::Float(self.to_f64() - other.to_f64()),
        }
    }

    pub fn mul(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => match a.checked_mul(&b) {
                Some(r) => Number::Rational(r),
                None => Number::Float(self.to_f64() * other.to_f64()),
            },
            _ => Number::Float(self.to_f64() * other.to_f64()),
        }
    }

    /// Division; `None` when dividing by an exact zero.
    pub fn div(self, other: Number) -> Option<Number> {
        if other.is_zero() {
            return None;
        }
        Some(match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => match a.checked_div(&b) {
                Some(r) => Number::Rational(r),
                None => Number::Float(self.to_f64() / other.to_f64()),
            },
            _ => Number::Float(self.to_f64() / other.to_f64()),
        })
    }

    pub fn neg(self) -> Number {
        match self {
            Number::Rational(r) => Number::Rational(-r),
            Number::Float(f) => Number::Float(-f),
        }
    }

    /// Integer power; `None` for a negative power of zero.
    pub fn powi(self, n: i128) -> Option<Number> {
        if n < 0 {
            let inv = Number::ONE.div(self)?;
            return inv.powi(-n);
        }
        match self {
            Number::Rational(r) => {
                let mut acc = Rational::one();
                let mut base = r;
                let mut e = n;
                let mut exact = true;
                while e > 0 {
                    if e & 1 == 1 {
                        match acc.checked_mul(&base) {
                            Some(v) => acc = v,
                            None => {
                                exact = false;
                                break;
                            }
                        }
                    }
                    e >>= 1;
                    if e > 0 {
                        match base.checked_mul(&base) {
                            Some(v) => base = v,
                            None => {
                                exact = false;
                                break;
                            }
                        }
                    }
                }
                if exact {
                    Some(Number::Rational(acc))
                } else {
                    Some(Number::Float(rational_to_f64(&r).powf(n as f64)))
                }
            }
            Number::Float(f) => Some(Number::Float(powi_f64(f, n))),
        }
    }

    fn variant_rank(&self) -> u8 {
        match self {
            Number::Rational(_) => 0,
            Number::Float(_) => 1,
        }
    }
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    let (n, d) = (*r.numer(), *r.denom());
    if d == 1 {
        return n as f64;
    }
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) => a / b,
        _ => f64::NAN,
    }
}

pub(crate) fn powi_f64(base: f64, n: i128) -> f64 {
    if let Ok(k) = i32::try_from(n) {
        base.powi(k)
    } else {
        base.powf(n as f64)
    }
}

/// Exact decimal reading of a literal such as `12.5e-3`; `None` when the
/// value does not fit an `i128` rational.
pub(crate) fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    let digits: String = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    let numer: i128 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let scale = exponent.checked_sub(i32::try_from(frac_part.len()).ok()?)?;
    let ten = Rational::from_integer(10);
    let factor = if scale >= 0 {
        checked_pow(ten, scale as u32)?
    } else {
        Rational::one().checked_div(&checked_pow(ten, (-scale) as u32)?)?
    };
    Rational::from_integer(numer).checked_mul(&factor)
}

fn checked_pow(base: Rational, e: u32) -> Option<Rational> {
    let mut acc = Rational::one();
    for _ in 0..e {
        acc = acc.checked_mul(&base)?;
    }
    Some(acc)
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Number {}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Structural order (rationals before floats); used for canonical term
/// ordering, not numeric comparison across variants.
impl Ord for Number {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => a.cmp(b),
            (Number::Float(a), Number::Float(b)) => a.total_cmp(b),
            _ => self.variant_rank().cmp(&other.variant_rank()),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Number::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Number::Float(v) => write!(f, "{v:?}"),
        }
    }
}

impl From<i64> for Number {
    fn from(n: i64) -> Self {
        Number::int(n as i128)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_decimal("0.1"), Some(Rational::new(1, 10)));
        assert_eq!(parse_decimal("12.5e-3"), Some(Rational::new(1, 80)));
        assert_eq!(parse_decimal("3"), Some(Rational::from_integer(3)));
        assert_eq!(parse_decimal("2E2"), Some(Rational::from_integer(200)));
        assert_eq!(parse_decimal("0.000"), Some(Rational::from_integer(0)));
        assert_eq!(parse_decimal("1e400"), None);
    }

    #[test]
    fn overflow_degrades_to_float() {
        let big = Number::int(i128::MAX / 2);
        let sum = big.add(big).add(big);
        assert!(!sum.is_exact());
        assert!((sum.to_f64() / (1.5 * i128::MAX as f64) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn powers() {
        assert_eq!(Number::ratio(2, 3).powi(3), Some(Number::ratio(8, 27)));
        assert_eq!(Number::int(2).powi(-2), Some(Number::ratio(1, 4)));
        assert_eq!(Number::ZERO.powi(-1), None);
        assert_eq!(Number::Float(2.0).powi(10).map(Number::to_f64), Some(1024.0));
    }

    #[test]
    fn from_real_keeps_integers_exact() {
        assert!(Number::from_real(-1.0).is_exact());
        assert!(!Number::from_real(0.7).is_exact());
    }
}
