//! Exact rational arithmetic helpers.
//!
//! Payoffs, deltas and ratio comparisons are kept as `BigRational`
//! throughout so that argmin/argmax tie sets are exact. Decimal text from
//! config files is converted without going through floating point, and
//! natural logarithms (needed by the stage-bound formulas) are evaluated
//! as certified rational intervals so integer ceilings come out exact.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Largest exponent magnitude accepted in decimal input. Keeps a hostile
/// `1e999999999` from allocating a gigantic integer.
const MAX_EXPONENT: i64 = 32_768;

/// Parse decimal text (`"12"`, `"-0.375"`, `"2.5e-3"`) into an exact rational.
pub fn parse_decimal(text: &str) -> Result<Rat> {
    let bad = |msg: &str| Error::Argument(format!("{msg}: {text:?}"));
    let s = text.trim();
    if s.is_empty() {
        return Err(bad("empty number"));
    }

    let (mantissa, exp_part) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let explicit_exp: i64 = match exp_part {
        None => 0,
        Some(e) => e
            .parse::<i64>()
            .map_err(|_| bad("malformed exponent"))
            .and_then(|v| {
                if v.abs() > MAX_EXPONENT {
                    Err(bad("exponent out of range"))
                } else {
                    Ok(v)
                }
            })?,
    };

    let (sign, digits_part) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_digits, frac_digits) = match digits_part.find('.') {
        Some(i) => (&digits_part[..i], &digits_part[i + 1..]),
        None => (digits_part, ""),
    };
    if int_digits.is_empty() && frac_digits.is_empty() {
        return Err(bad("no digits"));
    }
    if !int_digits.bytes().all(|b| b.is_ascii_digit())
        || !frac_digits.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(bad("malformed number"));
    }
    if frac_digits.len() as i64 > MAX_EXPONENT {
        return Err(bad("too many fractional digits"));
    }

    let all_digits = format!("{int_digits}{frac_digits}");
    let numer: BigInt = all_digits
        .parse()
        .map_err(|_| bad("malformed number"))?;
    let exp = explicit_exp - frac_digits.len() as i64;
    let value = if exp >= 0 {
        Rat::from_integer(numer * BigInt::from(10u32).pow(exp as u32))
    } else {
        Rat::new(numer, BigInt::from(10u32).pow((-exp) as u32))
    };
    Ok(if sign < 0 { -value } else { value })
}

/// Parse either decimal text or an explicit fraction `"p/q"`.
pub fn parse_rational(text: &str) -> Result<Rat> {
    let s = text.trim();
    if let Some(i) = s.find('/') {
        let p: BigInt = s[..i]
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("malformed numerator: {text:?}")))?;
        let q: BigInt = s[i + 1..]
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("malformed denominator: {text:?}")))?;
        if q.is_zero() {
            return Err(Error::Argument(format!("zero denominator: {text:?}")));
        }
        Ok(Rat::new(p, q))
    } else {
        parse_decimal(s)
    }
}

/// Render a rational exactly: terminating decimal when the reduced
/// denominator is of the form 2^a·5^b, otherwise `"p/q"`. The output is
/// accepted back by [`parse_rational`].
pub fn format_rational(r: &Rat) -> String {
    let numer = r.numer();
    let denom = r.denom();
    if denom.is_one() {
        return numer.to_string();
    }
    let mut d = denom.clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{numer}/{denom}");
    }
    let k = twos.max(fives);
    let scaled = (numer * BigInt::from(10u32).pow(k) / denom).abs();
    let digits = scaled.to_string();
    let k = k as usize;
    let sign = if r.is_negative() { "-" } else { "" };
    if digits.len() > k {
        let (int_part, frac_part) = digits.split_at(digits.len() - k);
        format!("{sign}{int_part}.{frac_part}")
    } else {
        format!("{sign}0.{digits:0>width$}", width = k)
    }
}

/// Nearest-f64 view of a rational, for reports and RNG probabilities.
pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

// ── Certified natural logarithm ───────────────────────────────────────

/// A closed interval [lo, hi] guaranteed to contain the true value.
#[derive(Debug, Clone)]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

impl Interval {
    fn point(v: Rat) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    /// Scale by an exact rational (either sign).
    pub fn scale(&self, c: &Rat) -> Interval {
        if c.is_negative() {
            Interval {
                lo: c * &self.hi,
                hi: c * &self.lo,
            }
        } else {
            Interval {
                lo: c * &self.lo,
                hi: c * &self.hi,
            }
        }
    }

    pub fn shift(&self, c: &Rat) -> Interval {
        Interval {
            lo: &self.lo + c,
            hi: &self.hi + c,
        }
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }
}

/// atanh(z) = z + z³/3 + z⁵/5 + …, as an interval. Requires |z| < 1/2.
/// The truncation tail is bounded by |z|^(2m+1)/(2m+1) · 1/(1−z²) ≤
/// |z|^(2m+1) · 4/3 for |z| ≤ 1/2.
fn atanh_interval(z: &Rat, bits: u32) -> Interval {
    debug_assert!(z.abs() < rat(1, 2));
    let z2 = z * z;
    let mut term = z.clone();
    let mut sum = Rat::zero();
    let mut k = 1u32;
    let threshold = Rat::new(BigInt::one(), BigInt::one() << bits as usize);
    loop {
        sum += &term / rat_int(k as i64);
        term *= &z2;
        k += 2;
        if term.abs() < threshold {
            break;
        }
    }
    let tail = term.abs() * rat(4, 3);
    Interval {
        lo: &sum - &tail,
        hi: &sum + &tail,
    }
}

fn ln2_interval(bits: u32) -> Interval {
    // ln 2 = 2 atanh(1/3)
    atanh_interval(&rat(1, 3), bits + 2).scale(&rat_int(2))
}

/// Certified interval for ln(x), x > 0, with interval width roughly 2^-bits.
pub fn ln_interval(x: &Rat, bits: u32) -> Result<Interval> {
    if !x.is_positive() {
        return Err(Error::Argument(format!(
            "ln requires a positive argument, got {x}"
        )));
    }
    if x.is_one() {
        return Ok(Interval::point(Rat::zero()));
    }
    // Normalize x = 2^e · y with y ∈ [3/4, 3/2); then |(y−1)/(y+1)| ≤ 1/5.
    let mut e: i64 = (x.numer().bits() as i64) - (x.denom().bits() as i64);
    let mut y = if e >= 0 {
        x / Rat::from_integer(pow2(e))
    } else {
        x * Rat::from_integer(pow2(-e))
    };
    let lo_bound = rat(3, 4);
    let hi_bound = rat(3, 2);
    while y >= hi_bound {
        y /= rat_int(2);
        e += 1;
    }
    while y < lo_bound {
        y *= rat_int(2);
        e -= 1;
    }
    let z = (&y - Rat::one()) / (&y + Rat::one());
    let ln_y = atanh_interval(&z, bits + 2).scale(&rat_int(2));
    let ln2 = ln2_interval(bits + 2).scale(&rat_int(e));
    Ok(ln_y.add(&ln2))
}

fn pow2(e: i64) -> BigInt {
    debug_assert!(e >= 0);
    BigInt::one() << e as usize
}
