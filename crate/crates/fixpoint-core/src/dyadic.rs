//! Arbitrary-precision dyadic rationals `m * 2^e` and dyadic vectors.
//!
//! Dyadics are the rational points of every domain in this crate: they are
//! exact under addition, subtraction, multiplication and scaling by powers
//! of two, which is all the name layer ever needs. Division and square
//! roots are only available as precision-bounded approximations.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

/// An exact dyadic rational, value `mantissa * 2^exponent`.
///
/// Canonical form: the mantissa is odd or zero, and zero carries exponent 0,
/// so equality of values is equality of representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    /// Builds `mantissa * 2^exponent`, normalising to canonical form.
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        if mantissa.is_zero() {
            return Dyadic {
                mantissa,
                exponent: 0,
            };
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        Dyadic {
            mantissa: mantissa >> tz,
            exponent: exponent + tz as i64,
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::from_int(1)
    }

    pub fn from_int(i: i64) -> Self {
        Dyadic::new(BigInt::from(i), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic {
            mantissa: BigInt::from(1),
            exponent: e,
        }
    }

    /// `num / 2^k` for an integer numerator.
    pub fn ratio_pow2(num: i64, k: i64) -> Self {
        Dyadic::new(BigInt::from(num), -k)
    }

    /// Exact conversion from a finite `f64` (every finite float is dyadic).
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Some(Dyadic::new(BigInt::from(sign) * BigInt::from(mant), exp))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.sign() == Sign::Minus
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.sign() == Sign::Plus
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn scale_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
        }
    }

    /// Smallest `k` with `|self| <= 2^k`; `None` for zero.
    pub fn ceil_log2(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let bits = self.mantissa.bits() as i64;
        // canonical mantissa is odd, so |m| = 1 is the only power of two
        if self.mantissa.magnitude().bits() == 1 {
            Some(self.exponent)
        } else {
            Some(self.exponent + bits)
        }
    }

    /// Largest `k` with `2^k <= |self|`; `None` for zero.
    pub fn floor_log2(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        Some(self.exponent + self.mantissa.bits() as i64 - 1)
    }

    fn align(&self, other: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64 as usize;
        let b = &other.mantissa << (other.exponent - e) as u64 as usize;
        (a, b, e)
    }

    /// Nearest multiple of `2^-n`, ties rounded away from zero. Error <= 2^-(n+1).
    pub fn round_to(&self, n: u32) -> Self {
        let shift = -(n as i64) - self.exponent;
        if shift <= 0 || self.is_zero() {
            return self.clone();
        }
        let half = BigInt::from(1) << (shift as usize - 1);
        let mag = self.mantissa.magnitude().to_owned();
        let rounded = (BigInt::from_biguint(Sign::Plus, mag) + half) >> shift as usize;
        let signed = if self.is_negative() { -rounded } else { rounded };
        Dyadic::new(signed, -(n as i64))
    }

    /// Largest multiple of `2^-n` that is <= self.
    pub fn floor_to(&self, n: u32) -> Self {
        let shift = -(n as i64) - self.exponent;
        if shift <= 0 || self.is_zero() {
            return self.clone();
        }
        let one = BigInt::from(1) << shift as usize;
        Dyadic::new(self.mantissa.div_floor(&one), -(n as i64))
    }

    /// Smallest multiple of `2^-n` that is >= self.
    pub fn ceil_to(&self, n: u32) -> Self {
        self.neg().floor_to(n).neg()
    }

    /// Approximate quotient with `result <= num/den < result + 2^-n` (for den > 0;
    /// the two-sided bound `|result - num/den| < 2^-n` holds for any sign of den).
    pub fn div_to(num: &Dyadic, den: &Dyadic, n: u32) -> Self {
        assert!(!den.is_zero(), "dyadic division by zero");
        let s = num.exponent - den.exponent + n as i64;
        let (mut a, mut b) = (num.mantissa.clone(), den.mantissa.clone());
        if s >= 0 {
            a <<= s as usize;
        } else {
            b <<= (-s) as usize;
        }
        Dyadic::new(a.div_floor(&b), -(n as i64))
    }

    /// Lower square root approximation: result in `(sqrt(self) - 2^-n, sqrt(self)]`.
    ///
    /// Panics when self is negative (callers certify nonnegativity first).
    pub fn sqrt_lower_to(&self, n: u32) -> Self {
        assert!(
            !self.is_negative(),
            "dyadic sqrt of a certified negative value"
        );
        if self.is_zero() {
            return Dyadic::zero();
        }
        let k = n as i64 + 2;
        let shift = self.exponent + 2 * k;
        let scaled = if shift >= 0 {
            &self.mantissa << shift as usize
        } else {
            self.mantissa.div_floor(&(BigInt::from(1) << (-shift) as usize))
        };
        // floor isqrt of the floor-scaled value stays within 2 ulps below sqrt
        let root = scaled.sqrt();
        Dyadic::new(root, -k)
    }

    /// Upper square root approximation: result in `[sqrt(self), sqrt(self) + 2^-n)`.
    pub fn sqrt_upper_to(&self, n: u32) -> Self {
        &self.sqrt_lower_to(n + 1) + &Dyadic::pow2(-(n as i64) - 1)
    }

    pub fn clamped(&self, lo: &Dyadic, hi: &Dyadic) -> Self {
        debug_assert!(lo <= hi);
        if self < lo {
            lo.clone()
        } else if self > hi {
            hi.clone()
        } else {
            self.clone()
        }
    }

    pub fn min(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Lossy conversion for display and diagnostics.
    pub fn to_f64(&self) -> f64 {
        let m = self.mantissa.to_f64().unwrap_or(f64::NAN);
        // build 2^e through the bit pattern; clamp to the f64 exponent range
        let e = self.exponent.clamp(-1022, 1023);
        let scale = f64::from_bits(((e + 1023) as u64) << 52);
        let mut out = m * scale;
        let mut rest = self.exponent - e;
        while rest > 0 {
            out *= 2.0;
            rest -= 1;
        }
        while rest < 0 {
            out *= 0.5;
            rest += 1;
        }
        out
    }

    /// Fixed-point decimal rendering with `digits` fractional digits,
    /// rounded to nearest (ties away from zero). Deterministic.
    pub fn to_decimal_string(&self, digits: u32) -> String {
        use alloc::string::ToString;
        let ten = BigInt::from(10u32).pow(digits);
        let scaled_num = self.mantissa.magnitude().to_owned();
        let mut num = BigInt::from_biguint(Sign::Plus, scaled_num) * &ten;
        let mut den = BigInt::from(1);
        if self.exponent >= 0 {
            num <<= self.exponent as usize;
        } else {
            den <<= (-self.exponent) as usize;
        }
        let q = (num * 2u32 + &den).div_floor(&(den * 2u32));
        let s = q.to_string();
        let (int_part, frac_part) = if s.len() > digits as usize {
            let split = s.len() - digits as usize;
            (s[..split].to_string(), s[split..].to_string())
        } else {
            let mut frac = String::new();
            for _ in 0..(digits as usize - s.len()) {
                frac.push('0');
            }
            frac.push_str(&s);
            ("0".to_string(), frac)
        };
        let sign = if self.is_negative() { "-" } else { "" };
        let mut out = String::new();
        out.push_str(sign);
        out.push_str(&int_part);
        if digits > 0 {
            out.push('.');
            out.push_str(&frac_part);
        }
        out
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.mantissa.sign(), other.mantissa.sign()) {
            (Sign::Minus, Sign::NoSign) | (Sign::Minus, Sign::Plus) => return Ordering::Less,
            (Sign::NoSign, Sign::Plus) => return Ordering::Less,
            (Sign::Plus, Sign::NoSign) | (Sign::Plus, Sign::Minus) => return Ordering::Greater,
            (Sign::NoSign, Sign::Minus) => return Ordering::Greater,
            (Sign::NoSign, Sign::NoSign) => return Ordering::Equal,
            _ => {}
        }
        let (a, b, _) = self.align(other);
        a.cmp(&b)
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.align(rhs);
        Dyadic::new(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.align(rhs);
        Dyadic::new(a - b, e)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -self.mantissa.clone(),
            exponent: if self.mantissa.is_zero() {
                0
            } else {
                self.exponent
            },
        }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

/// A finite-dimensional vector of exact dyadics.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DyVec(pub Vec<Dyadic>);

impl DyVec {
    pub fn zeros(dim: usize) -> Self {
        DyVec(alloc::vec![Dyadic::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn from_ints(v: &[i64]) -> Self {
        DyVec(v.iter().map(|&i| Dyadic::from_int(i)).collect())
    }

    pub fn add(&self, other: &DyVec) -> DyVec {
        debug_assert_eq!(self.dim(), other.dim());
        DyVec(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &DyVec) -> DyVec {
        debug_assert_eq!(self.dim(), other.dim());
        DyVec(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, c: &Dyadic) -> DyVec {
        DyVec(self.0.iter().map(|a| a * c).collect())
    }

    /// Exact multiplication by `2^k`.
    pub fn scale_pow2(&self, k: i64) -> DyVec {
        DyVec(self.0.iter().map(|a| a.scale_pow2(k)).collect())
    }

    pub fn dot(&self, other: &DyVec) -> Dyadic {
        debug_assert_eq!(self.dim(), other.dim());
        let mut acc = Dyadic::zero();
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            acc = &acc + &(a * b);
        }
        acc
    }

    /// Exact squared Euclidean norm.
    pub fn norm_sq(&self) -> Dyadic {
        self.dot(self)
    }

    pub fn dist_sq(&self, other: &DyVec) -> Dyadic {
        self.sub(other).norm_sq()
    }

    /// Euclidean norm from below: result in `(||v|| - 2^-n, ||v||]`.
    pub fn norm_lower_to(&self, n: u32) -> Dyadic {
        self.norm_sq().sqrt_lower_to(n)
    }

    /// Euclidean norm from above: result in `[||v||, ||v|| + 2^-n)`.
    pub fn norm_upper_to(&self, n: u32) -> Dyadic {
        self.norm_sq().sqrt_upper_to(n)
    }

    /// Rounds each coordinate to a multiple of `2^-n`.
    pub fn round_to(&self, n: u32) -> DyVec {
        DyVec(self.0.iter().map(|a| a.round_to(n)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dy(num: i64, k: i64) -> Dyadic {
        Dyadic::ratio_pow2(num, k)
    }

    #[test]
    fn canonical_form() {
        let d = Dyadic::new(BigInt::from(12), -2); // 12/4 = 3
        assert_eq!(d, Dyadic::from_int(3));
        assert_eq!(d.exponent(), 0);
        let z = Dyadic::new(BigInt::zero(), 17);
        assert_eq!(z.exponent(), 0);
        assert!(z.is_zero());
    }

    #[test]
    fn exact_ring_ops() {
        let a = dy(3, 2); // 3/4
        let b = dy(1, 2); // 1/4
        assert_eq!(&a + &b, Dyadic::one());
        assert_eq!(&a - &b, dy(1, 1));
        assert_eq!(&a * &b, dy(3, 4));
        assert_eq!(a.scale_pow2(2), Dyadic::from_int(3));
        assert_eq!(-&b, dy(-1, 2));
    }

    #[test]
    fn ordering_is_exact() {
        assert!(dy(1, 2) < dy(1, 1));
        assert!(dy(-1, 1) < dy(1, 4));
        assert_eq!(dy(2, 3), dy(1, 2));
        assert!(dy(-3, 1) < dy(-1, 1));
    }

    #[test]
    fn log2_bounds() {
        assert_eq!(dy(1, 2).ceil_log2(), Some(-2));
        assert_eq!(dy(3, 2).ceil_log2(), Some(0)); // 3/4 <= 1
        assert_eq!(dy(3, 2).floor_log2(), Some(-1)); // 1/2 <= 3/4
        assert_eq!(Dyadic::from_int(5).ceil_log2(), Some(3));
        assert_eq!(Dyadic::from_int(5).floor_log2(), Some(2));
        assert_eq!(Dyadic::zero().ceil_log2(), None);
    }

    #[test]
    fn rounding_modes() {
        let v = dy(5, 3); // 0.625
        assert_eq!(v.round_to(1), dy(1, 1)); // nearest of {0.5, 1.0} is 0.5
        assert_eq!(v.floor_to(1), dy(1, 1));
        assert_eq!(v.ceil_to(1), dy(2, 1));
        let neg = dy(-5, 3);
        assert_eq!(neg.floor_to(1), dy(-2, 1));
        assert_eq!(neg.ceil_to(1), dy(-1, 1));
        // tie: 0.75 at precision 1 rounds away from zero to 1.0
        assert_eq!(dy(3, 2).round_to(1), Dyadic::one());
        assert_eq!(dy(-3, 2).round_to(1), Dyadic::from_int(-1));
    }

    #[test]
    fn division_brackets_quotient() {
        // 1/3 to 20 bits, floor-sided
        let q = Dyadic::div_to(&Dyadic::one(), &Dyadic::from_int(3), 20);
        let three_q = &q * &Dyadic::from_int(3);
        assert!(three_q <= Dyadic::one());
        assert!(&Dyadic::one() - &three_q < dy(3, 20));
        // negative numerator: still within 2^-20 of -1/3
        let qn = Dyadic::div_to(&Dyadic::from_int(-1), &Dyadic::from_int(3), 20);
        let three_qn = &qn * &Dyadic::from_int(3);
        assert!(three_qn <= Dyadic::from_int(-1));
        assert!(&Dyadic::from_int(-1) - &three_qn < dy(3, 20));
    }

    #[test]
    fn sqrt_bounds() {
        let two = Dyadic::from_int(2);
        let r = two.sqrt_lower_to(30);
        assert!(&r * &r <= two);
        let r_hi = &r + &Dyadic::pow2(-30);
        assert!(&r_hi * &r_hi > two);
        assert_eq!(Dyadic::from_int(4).sqrt_lower_to(10), Dyadic::from_int(2));
        assert_eq!(Dyadic::zero().sqrt_lower_to(10), Dyadic::zero());
    }

    #[test]
    #[should_panic(expected = "certified negative")]
    fn sqrt_rejects_negative() {
        let _ = Dyadic::from_int(-1).sqrt_lower_to(4);
    }

    #[test]
    fn f64_round_trip_exact() {
        for &x in &[0.25, -0.75, 1.0, 3.5, 0.0, 123.0625] {
            let d = Dyadic::from_f64(x).unwrap();
            assert_eq!(d.to_f64(), x);
        }
        assert!(Dyadic::from_f64(f64::INFINITY).is_none());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(dy(3, 2).to_decimal_string(12), "0.750000000000");
        assert_eq!(dy(-1, 3).to_decimal_string(3), "-0.125");
        assert_eq!(Dyadic::from_int(2).to_decimal_string(2), "2.00");
        // 1/3 is not dyadic, but 1/4 + 1/64 = 0.265625 renders exactly
        assert_eq!(dy(17, 6).to_decimal_string(6), "0.265625");
    }

    #[test]
    fn vector_ops() {
        let a = DyVec(vec![dy(1, 1), dy(1, 1)]);
        assert_eq!(a.norm_sq(), dy(1, 1));
        let b = DyVec::from_ints(&[1, 0]);
        assert_eq!(a.dist_sq(&b), &dy(1, 2) + &dy(1, 2));
        let n = a.norm_lower_to(20);
        assert!(&n * &n <= a.norm_sq());
    }
}
