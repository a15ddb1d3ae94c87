//! Arbitrary-precision integers with an inline fast path.

use core::cmp::Ordering;
use core::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Integer value. `Big` is only used when the value does not fit in an `i64`.
#[derive(Clone, Debug)]
pub enum Int {
    Small(i64),
    Big(BigInt),
}

impl Int {
    pub fn zero() -> Self {
        Int::Small(0)
    }

    pub fn from_big(b: BigInt) -> Self {
        match b.to_i64() {
            Some(v) => Int::Small(v),
            None => Int::Big(b),
        }
    }

    pub fn to_big(&self) -> BigInt {
        match self {
            Int::Small(v) => BigInt::from(*v),
            Int::Big(b) => b.clone(),
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Int::Small(v) => Some(*v),
            Int::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Int::Small(0))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Int::Small(v) => *v < 0,
            Int::Big(b) => b.is_negative(),
        }
    }

    /// Number of significant bits of the magnitude.
    pub fn bits(&self) -> u64 {
        match self {
            Int::Small(v) => 64 - v.unsigned_abs().leading_zeros() as u64,
            Int::Big(b) => b.bits(),
        }
    }

    pub fn neg(&self) -> Int {
        match self {
            Int::Small(v) => match v.checked_neg() {
                Some(n) => Int::Small(n),
                None => Int::from_big(-BigInt::from(*v)),
            },
            Int::Big(b) => Int::from_big(-b.clone()),
        }
    }

    pub fn abs(&self) -> Int {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn add(&self, other: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            if let Some(r) = a.checked_add(*b) {
                return Int::Small(r);
            }
        }
        Int::from_big(self.to_big() + other.to_big())
    }

    pub fn sub(&self, other: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            if let Some(r) = a.checked_sub(*b) {
                return Int::Small(r);
            }
        }
        Int::from_big(self.to_big() - other.to_big())
    }

    pub fn mul(&self, other: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            if let Some(r) = a.checked_mul(*b) {
                return Int::Small(r);
            }
        }
        Int::from_big(self.to_big() * other.to_big())
    }

    /// Floor division; `None` when dividing by zero.
    pub fn floor_div(&self, other: &Int) -> Option<Int> {
        if other.is_zero() {
            return None;
        }
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            if !(*a == i64::MIN && *b == -1) {
                return Some(Int::Small(a.div_floor(b)));
            }
        }
        Some(Int::from_big(self.to_big().div_floor(&other.to_big())))
    }

    /// Modulo whose sign follows the divisor; `None` when dividing by zero.
    pub fn floor_mod(&self, other: &Int) -> Option<Int> {
        if other.is_zero() {
            return None;
        }
        if let (Int::Small(a), Int::Small(b)) = (self, other) {
            if !(*a == i64::MIN && *b == -1) {
                return Some(Int::Small(a.mod_floor(b)));
            }
        }
        Some(Int::from_big(self.to_big().mod_floor(&other.to_big())))
    }

    pub fn pow(&self, exp: u32) -> Int {
        if let Int::Small(a) = self {
            if let Some(r) = a.checked_pow(exp) {
                return Int::Small(r);
            }
        }
        Int::from_big(num_traits::pow(self.to_big(), exp as usize))
    }

    pub fn bitand(&self, other: &Int) -> Int {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => Int::Small(a & b),
            _ => Int::from_big(self.to_big() & other.to_big()),
        }
    }

    pub fn bitor(&self, other: &Int) -> Int {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => Int::Small(a | b),
            _ => Int::from_big(self.to_big() | other.to_big()),
        }
    }

    pub fn bitxor(&self, other: &Int) -> Int {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => Int::Small(a ^ b),
            _ => Int::from_big(self.to_big() ^ other.to_big()),
        }
    }

    pub fn invert(&self) -> Int {
        self.neg().sub(&Int::Small(1))
    }

    pub fn shl(&self, n: u32) -> Int {
        if let Int::Small(a) = self {
            if n < 63 {
                if let Some(r) = a.checked_mul(1i64 << n) {
                    return Int::Small(r);
                }
            }
        }
        Int::from_big(self.to_big() << n as usize)
    }

    pub fn shr(&self, n: u64) -> Int {
        match self {
            Int::Small(a) => Int::Small(if n >= 64 { if *a < 0 { -1 } else { 0 } } else { a >> n }),
            Int::Big(b) => Int::from_big(b >> n as usize),
        }
    }

    /// Nearest `f64`; `None` when the magnitude overflows.
    pub fn to_f64(&self) -> Option<f64> {
        let f = match self {
            Int::Small(v) => *v as f64,
            Int::Big(b) => b.to_f64()?,
        };
        if f.is_finite() {
            Some(f)
        } else {
            None
        }
    }

    /// Truncates a finite float toward zero.
    pub fn from_f64_trunc(f: f64) -> Option<Int> {
        if !f.is_finite() {
            return None;
        }
        let t = libm::trunc(f);
        if libm::fabs(t) < 9.0e15 {
            return Some(Int::Small(t as i64));
        }
        BigInt::from_f64(t).map(Int::from_big)
    }

    /// Parses an integer literal in the given radix (digits only, optional sign).
    pub fn parse_radix(digits: &str, radix: u32) -> Option<Int> {
        if digits.is_empty() {
            return None;
        }
        if let Ok(v) = i64::from_str_radix(digits, radix) {
            return Some(Int::Small(v));
        }
        BigInt::parse_bytes(digits.as_bytes(), radix).map(Int::from_big)
    }

    /// Digits of the magnitude in `radix` (lower case), without sign.
    pub fn magnitude_radix(&self, radix: u32) -> alloc::string::String {
        match self {
            Int::Small(v) => {
                let mut m = v.unsigned_abs();
                if m == 0 {
                    return "0".into();
                }
                let mut digits = alloc::vec::Vec::new();
                while m > 0 {
                    digits.push(core::char::from_digit((m % radix as u64) as u32, radix).unwrap_or('0'));
                    m /= radix as u64;
                }
                digits.iter().rev().collect()
            }
            Int::Big(b) => b.magnitude().to_str_radix(radix),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Int::Small(v) => v.signum() as i32,
            Int::Big(b) => match b.sign() {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            },
        }
    }

    /// Exact comparison against a float; `None` when `f` is NaN.
    pub fn cmp_f64(&self, f: f64) -> Option<Ordering> {
        if f.is_nan() {
            return None;
        }
        if f == f64::INFINITY {
            return Some(Ordering::Less);
        }
        if f == f64::NEG_INFINITY {
            return Some(Ordering::Greater);
        }
        if let Int::Small(v) = self {
            if v.unsigned_abs() < (1u64 << 53) {
                return (*v as f64).partial_cmp(&f);
            }
        }
        let floor = libm::floor(f);
        let fi = BigInt::from_f64(floor)?;
        let me = self.to_big();
        match me.cmp(&fi) {
            Ordering::Equal if floor < f => Some(Ordering::Less),
            o => Some(o),
        }
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Self {
        Int::Small(v)
    }
}

impl PartialEq for Int {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Int {}

impl PartialOrd for Int {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Int {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Int::Small(v) => write!(f, "{v}"),
            Int::Big(b) => write!(f, "{b}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn floor_semantics() {
        let a = Int::from(-7);
        let b = Int::from(2);
        assert_eq!(a.floor_div(&b).unwrap(), Int::from(-4));
        assert_eq!(a.floor_mod(&b).unwrap(), Int::from(1));
        assert_eq!(Int::from(7).floor_mod(&Int::from(-2)).unwrap(), Int::from(-1));
        assert!(a.floor_div(&Int::zero()).is_none());
    }

    #[test]
    fn overflow_promotes() {
        let big = Int::from(i64::MAX).add(&Int::from(1));
        assert!(matches!(big, Int::Big(_)));
        assert_eq!(big.sub(&Int::from(1)), Int::from(i64::MAX));
        assert!(matches!(big.sub(&Int::from(1)), Int::Small(_)));
        assert_eq!(Int::from(2).pow(100).to_string(), "1267650600228229401496703205376");
    }

    #[test]
    fn compare_with_float() {
        let two53 = Int::from(2).pow(53);
        let above = two53.add(&Int::from(1));
        assert_eq!(above.cmp_f64(9007199254740992.0), Some(Ordering::Greater));
        assert_eq!(Int::from(3).cmp_f64(3.5), Some(Ordering::Less));
        assert_eq!(Int::from(-3).cmp_f64(-3.5), Some(Ordering::Greater));
        assert_eq!(Int::from(1).cmp_f64(f64::NAN), None);
    }
}
