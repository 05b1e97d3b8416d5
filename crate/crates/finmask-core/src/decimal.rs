//! Exact decimal arithmetic for numeric span matching.
//!
//! Values are `mantissa * 10^exponent` with an `i128` mantissa, kept in
//! canonical form (mantissa not divisible by ten, zero is `0 * 10^0`). All
//! comparisons and the precision-relaxed rounding go through arbitrary
//! precision integers internally, so no operation in this module ever touches
//! binary floating point.

use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;

/// An exact decimal number in canonical `mantissa * 10^exponent` form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decimal {
    mantissa: i128,
    exponent: i32,
}

impl Decimal {
    pub const ZERO: Decimal = Decimal { mantissa: 0, exponent: 0 };
    pub const ONE: Decimal = Decimal { mantissa: 1, exponent: 0 };

    /// Builds a decimal from parts, normalizing to canonical form.
    pub fn new(mantissa: i128, exponent: i32) -> Decimal {
        let mut d = Decimal { mantissa, exponent };
        d.canonicalize();
        d
    }

    /// `10^exponent`.
    pub fn pow10(exponent: i32) -> Decimal {
        Decimal { mantissa: 1, exponent }
    }

    pub fn from_i128(value: i128) -> Decimal {
        Decimal::new(value, 0)
    }

    fn canonicalize(&mut self) {
        if self.mantissa == 0 {
            self.exponent = 0;
            return;
        }
        while self.mantissa % 10 == 0 {
            self.mantissa /= 10;
            self.exponent += 1;
        }
    }

    pub fn mantissa(&self) -> i128 {
        self.mantissa
    }

    pub fn exponent(&self) -> i32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa > 0
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa < 0
    }

    pub fn abs(&self) -> Decimal {
        Decimal { mantissa: self.mantissa.abs(), exponent: self.exponent }
    }

    /// Exact product; `None` if the mantissa overflows `i128`.
    pub fn checked_mul(&self, other: &Decimal) -> Option<Decimal> {
        let mantissa = self.mantissa.checked_mul(other.mantissa)?;
        let exponent = self.exponent.checked_add(other.exponent)?;
        Some(Decimal::new(mantissa, exponent))
    }

    /// Exact quotient if it terminates within the representable range.
    ///
    /// Used to strip a scale factor back out of a normalized value. Returns
    /// `None` when the division does not come out exact (for example a scale
    /// factor that is not a power of ten and does not divide the mantissa).
    pub fn checked_div_exact(&self, divisor: &Decimal) -> Option<Decimal> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Decimal::ZERO);
        }
        let mut mantissa = self.mantissa;
        let mut exponent = self.exponent.checked_sub(divisor.exponent)?;
        let mut den = divisor.mantissa;
        // Pull factors of 2 and 5 out of the denominator via extra powers of
        // ten on the numerator; anything else must divide the mantissa.
        while den % 2 == 0 {
            den /= 2;
            mantissa = mantissa.checked_mul(5)?;
            exponent = exponent.checked_sub(1)?;
        }
        while den % 5 == 0 {
            den /= 5;
            mantissa = mantissa.checked_mul(2)?;
            exponent = exponent.checked_sub(1)?;
        }
        if mantissa % den != 0 {
            return None;
        }
        Some(Decimal::new(mantissa / den, exponent))
    }

    fn to_bigint_at(self, exponent: i32) -> BigInt {
        // exponent must be <= self.exponent; callers align to the minimum.
        let shift = (self.exponent - exponent) as u32;
        BigInt::from(self.mantissa) * BigInt::from(10u8).pow(shift)
    }

    /// `round(self / divisor)` with ties away from zero, exact.
    ///
    /// `None` if the divisor is zero or the result does not fit in `i128`.
    pub fn div_round_half_away(&self, divisor: &Decimal) -> Option<i128> {
        if divisor.is_zero() {
            return None;
        }
        let exp = self.exponent.min(divisor.exponent);
        let num = self.to_bigint_at(exp);
        let mut den = divisor.to_bigint_at(exp);
        let mut sign = if self.mantissa < 0 { -1i128 } else { 1i128 };
        if divisor.mantissa < 0 {
            sign = -sign;
        }
        if den.sign() == num_bigint::Sign::Minus {
            den = -den;
        }
        let num_abs = num.magnitude().clone();
        let den_abs = den.magnitude().clone();
        let rounded = (num_abs * 2u8 + &den_abs) / (den_abs * 2u8);
        let magnitude = i128::try_from(BigInt::from(rounded)).ok()?;
        Some(sign * magnitude)
    }
}

/// Error from [`Decimal::from_str`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDecimalError;

impl fmt::Display for ParseDecimalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid decimal literal")
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseDecimalError {}

impl core::str::FromStr for Decimal {
    type Err = ParseDecimalError;

    /// Parses plain decimal notation: `[-]digits[.digits][e[-]digits]`.
    ///
    /// This is for configuration values (scale factors and the like), not for
    /// span text; span literals go through the matcher's tokenizer.
    fn from_str(s: &str) -> Result<Decimal, ParseDecimalError> {
        let s = s.trim();
        let (s, neg) = match s.strip_prefix('-') {
            Some(rest) => (rest, true),
            None => (s.strip_prefix('+').unwrap_or(s), false),
        };
        let (body, exp_part) = match s.find(['e', 'E']) {
            Some(pos) => (&s[..pos], Some(&s[pos + 1..])),
            None => (s, None),
        };
        let exp_shift: i32 = match exp_part {
            Some(e) => e.parse().map_err(|_| ParseDecimalError)?,
            None => 0,
        };
        let (int_part, frac_part) = match body.find('.') {
            Some(pos) => (&body[..pos], &body[pos + 1..]),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ParseDecimalError);
        }
        let mut mantissa: i128 = 0;
        for c in int_part.chars().chain(frac_part.chars()) {
            let digit = c.to_digit(10).ok_or(ParseDecimalError)? as i128;
            mantissa = mantissa
                .checked_mul(10)
                .and_then(|m| m.checked_add(digit))
                .ok_or(ParseDecimalError)?;
        }
        if neg {
            mantissa = -mantissa;
        }
        let exponent = exp_shift
            .checked_sub(frac_part.len() as i32)
            .ok_or(ParseDecimalError)?;
        Ok(Decimal::new(mantissa, exponent))
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Decimal) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Decimal) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        let exp = self.exponent.min(other.exponent);
        self.to_bigint_at(exp).cmp(&other.to_bigint_at(exp))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use fmt::Write;
        if self.mantissa == 0 {
            return f.write_str("0");
        }
        // Positional rendering for everyday magnitudes, scientific beyond.
        if self.exponent > 27 || self.exponent < -27 {
            return write!(f, "{}e{}", self.mantissa, self.exponent);
        }
        let neg = self.mantissa < 0;
        let mut digits = String::new();
        write!(digits, "{}", self.mantissa.unsigned_abs())?;
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        if self.exponent >= 0 {
            out.push_str(&digits);
            for _ in 0..self.exponent {
                out.push('0');
            }
        } else {
            let frac_len = (-self.exponent) as usize;
            if digits.len() > frac_len {
                let split = digits.len() - frac_len;
                out.push_str(&digits[..split]);
                out.push('.');
                out.push_str(&digits[split..]);
            } else {
                out.push_str("0.");
                for _ in 0..(frac_len - digits.len()) {
                    out.push('0');
                }
                out.push_str(&digits);
            }
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn canonical_form() {
        assert_eq!(Decimal::new(1_230_000, 0), Decimal::new(123, 4));
        assert_eq!(Decimal::new(0, 17), Decimal::ZERO);
        assert_eq!(Decimal::new(1500, -3).exponent(), -1);
    }

    #[test]
    fn multiply_applies_scale_exactly() {
        // 1.23 * 10^9 = 1,230,000,000 exactly
        let literal = Decimal::new(123, -2);
        let billion = Decimal::pow10(9);
        let value = literal.checked_mul(&billion).unwrap();
        assert_eq!(value, Decimal::new(1_230_000_000, 0));
        assert_eq!(value.to_string(), "1230000000");
    }

    #[test]
    fn ordering_crosses_exponents() {
        let a = Decimal::new(123, 4); // 1,230,000
        let b = Decimal::new(12, 5); // 1,200,000
        assert!(a > b);
        assert!(Decimal::new(-1, 6) < Decimal::new(1, -6));
        assert_eq!(Decimal::pow10(4).max(Decimal::pow10(5)), Decimal::pow10(5));
    }

    #[test]
    fn rounding_half_away_from_zero() {
        let p = Decimal::pow10(5);
        // 1,230,000 / 10^5 = 12.3 -> 12
        assert_eq!(Decimal::new(123, 4).div_round_half_away(&p), Some(12));
        // 1,250,000 / 10^5 = 12.5 -> 13 (ties away from zero)
        assert_eq!(Decimal::new(125, 4).div_round_half_away(&p), Some(13));
        assert_eq!(Decimal::new(-125, 4).div_round_half_away(&p), Some(-13));
        // 1,240,000 / 10^5 = 12.4 -> 12
        assert_eq!(Decimal::new(124, 4).div_round_half_away(&p), Some(12));
        // tiny / huge rounds to zero
        assert_eq!(Decimal::new(1, 0).div_round_half_away(&Decimal::pow10(20)), Some(0));
    }

    #[test]
    fn rounding_with_non_power_of_ten_divisor() {
        // 100 / 8 = 12.5 -> 13
        let n = Decimal::from_i128(100);
        let d = Decimal::from_i128(8);
        assert_eq!(n.div_round_half_away(&d), Some(13));
        // 7.2 / 2.4 = 3 exactly
        assert_eq!(
            Decimal::new(72, -1).div_round_half_away(&Decimal::new(24, -1)),
            Some(3)
        );
    }

    #[test]
    fn exact_division_strips_scales() {
        let v = Decimal::new(1_230_000_000, 0);
        assert_eq!(v.checked_div_exact(&Decimal::pow10(9)), Some(Decimal::new(123, -2)));
        // 36 / 12 = 3 (non power-of-ten factor dividing exactly)
        assert_eq!(
            Decimal::from_i128(36).checked_div_exact(&Decimal::from_i128(12)),
            Some(Decimal::from_i128(3))
        );
        // 1 / 3 does not terminate
        assert_eq!(Decimal::ONE.checked_div_exact(&Decimal::from_i128(3)), None);
    }

    #[test]
    fn parse_plain_notation() {
        assert_eq!("1000000".parse::<Decimal>().unwrap(), Decimal::pow10(6));
        assert_eq!("1.23".parse::<Decimal>().unwrap(), Decimal::new(123, -2));
        assert_eq!("-0.5".parse::<Decimal>().unwrap(), Decimal::new(-5, -1));
        assert_eq!("1e9".parse::<Decimal>().unwrap(), Decimal::pow10(9));
        assert_eq!("2.5e3".parse::<Decimal>().unwrap(), Decimal::new(25, 2));
        assert!("".parse::<Decimal>().is_err());
        assert!("1,000".parse::<Decimal>().is_err());
    }

    #[test]
    fn display_positional() {
        assert_eq!(Decimal::new(123, -2).to_string(), "1.23");
        assert_eq!(Decimal::new(-72, -1).to_string(), "-7.2");
        assert_eq!(Decimal::new(5, -4).to_string(), "0.0005");
        assert_eq!(Decimal::new(12, 5).to_string(), "1200000");
        assert_eq!(Decimal::ZERO.to_string(), "0");
    }
}
