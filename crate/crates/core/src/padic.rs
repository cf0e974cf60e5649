//! Truncated p-adic numbers with explicit precision tracking.
//!
//! A nonzero value is `p^valuation · unit` where `unit` is a p-adic unit known
//! modulo `p^precision`. A zero value is only known modulo `p^valuation`
//! (its absolute precision) and carries `precision == 0`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicNumber {
    prime: u64,
    valuation: i64,
    unit: BigInt,
    precision: u32,
}

pub fn pow_p(p: u64, k: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), k as usize)
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation_int(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero(), "valuation of zero");
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

impl PadicNumber {
    pub fn zero(prime: u64, abs_precision: i64) -> Self {
        Self { prime, valuation: abs_precision, unit: BigInt::zero(), precision: 0 }
    }

    /// Builds `p^valuation · s` from an arbitrary integer `s`, keeping
    /// `abs_precision - valuation` digits after normalising.
    fn normalise(prime: u64, valuation: i64, s: BigInt, abs_precision: i64) -> Self {
        if valuation >= abs_precision {
            return Self::zero(prime, abs_precision);
        }
        let m = pow_p(prime, (abs_precision - valuation) as u32);
        let s = s.mod_floor(&m);
        if s.is_zero() {
            return Self::zero(prime, abs_precision);
        }
        let t = valuation_int(&s, prime);
        let val = valuation + t;
        let rel = (abs_precision - val) as u32;
        let unit = (s / pow_p(prime, t as u32)).mod_floor(&pow_p(prime, rel));
        Self { prime, valuation: val, unit, precision: rel }
    }

    pub fn from_integer(n: &BigInt, prime: u64, precision: u32) -> Self {
        if n.is_zero() {
            return Self::zero(prime, precision as i64);
        }
        let v = valuation_int(n, prime);
        Self::normalise(prime, 0, n.clone(), v + precision as i64)
    }

    pub fn from_i64(n: i64, prime: u64, precision: u32) -> Self {
        Self::from_integer(&BigInt::from(n), prime, precision)
    }

    pub fn from_rational(q: &BigRational, prime: u64, precision: u32) -> Self {
        if q.is_zero() {
            return Self::zero(prime, precision as i64);
        }
        let a = Self::from_integer(q.numer(), prime, precision);
        let b = Self::from_integer(q.denom(), prime, precision);
        a.div(&b)
    }

    /// `p^valuation · unit` with `unit` coprime to `p`, known to `precision` digits.
    pub fn from_parts(prime: u64, valuation: i64, unit: BigInt, precision: u32) -> Self {
        Self::normalise(prime, valuation, unit, valuation + precision as i64)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    pub fn abs_precision(&self) -> i64 {
        self.valuation + self.precision as i64
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.prime, o.prime, "mixed primes");
        let a = self.abs_precision().min(o.abs_precision());
        let m = self.valuation.min(o.valuation);
        if m >= a {
            return Self::zero(self.prime, a);
        }
        let lift = |x: &Self| {
            if x.is_zero() {
                BigInt::zero()
            } else {
                &x.unit * pow_p(self.prime, (x.valuation - m) as u32)
            }
        };
        Self::normalise(self.prime, m, lift(self) + lift(o), a)
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let m = pow_p(self.prime, self.precision);
        Self { unit: (m - &self.unit).mod_floor(&pow_p(self.prime, self.precision)), ..self.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.prime, o.prime, "mixed primes");
        if self.is_zero() || o.is_zero() {
            let a = (self.abs_precision() + o.valuation).min(o.abs_precision() + self.valuation);
            return Self::zero(self.prime, a);
        }
        let rel = self.precision.min(o.precision);
        let unit = (&self.unit * &o.unit).mod_floor(&pow_p(self.prime, rel));
        Self { prime: self.prime, valuation: self.valuation + o.valuation, unit, precision: rel }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let m = pow_p(self.prime, self.precision);
        let unit = mod_inverse(&self.unit, &m)?;
        Some(Self { prime: self.prime, valuation: -self.valuation, unit, precision: self.precision })
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv().expect("division by p-adic zero"))
    }

    pub fn pow(&self, e: i64) -> Self {
        let mut acc = Self::from_i64(1, self.prime, self.precision.max(1));
        if self.is_zero() {
            assert!(e >= 0, "negative power of zero");
            return if e == 0 { acc } else { Self::zero(self.prime, self.valuation * e) };
        }
        let mut b = if e < 0 { self.inv().unwrap() } else { self.clone() };
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        acc
    }

    /// Base-`p` digits of the unit, least significant first.
    pub fn digits(&self) -> Vec<u64> {
        let pb = BigInt::from(self.prime);
        let mut u = self.unit.clone();
        (0..self.precision)
            .map(|_| {
                let (q, r) = u.div_rem(&pb);
                u = q;
                r.to_u64().unwrap()
            })
            .collect()
    }

    /// Integer representative of the value modulo `p^j`, for values in `ℤ_p`.
    pub fn residue(&self, j: u32) -> Option<BigInt> {
        if self.abs_precision() < j as i64 {
            return None;
        }
        if self.is_zero() || self.valuation >= j as i64 {
            return Some(BigInt::zero());
        }
        if self.valuation < 0 {
            return None;
        }
        let m = pow_p(self.prime, j);
        Some((&self.unit * pow_p(self.prime, self.valuation as u32)).mod_floor(&m))
    }

    /// `|x|_p ≤ p^{-k}` as far as the stored precision can tell.
    pub fn is_divisible_to(&self, k: i64) -> bool {
        self.valuation >= k
    }

    pub fn to_serial(&self) -> PadicSerial {
        let digits: String = self
            .digits()
            .iter()
            .rev()
            .map(|d| if self.prime <= 10 { char::from_digit(*d as u32, 10).unwrap().to_string() } else { format!("({d})") })
            .collect();
        PadicSerial { prime: self.prime, valuation: self.valuation, digits, precision: self.precision }
    }
}

/// Serialised p-adic number: digits most significant first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PadicSerial {
    pub prime: u64,
    pub valuation: i64,
    pub digits: String,
    pub precision: u32,
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.to_serial();
        if self.is_zero() {
            return write!(f, "O({}^{})", self.prime, self.valuation);
        }
        write!(f, "…{}·{}^{}", s.digits, self.prime, self.valuation)
    }
}

fn eval_mod(g: &[BigInt], u: &BigInt, m: &BigInt) -> BigInt {
    g.iter().rev().fold(BigInt::zero(), |acc, c| (acc * u + c).mod_floor(m))
}

/// Lifts a simple root `u0` of `g` modulo `p` to a root modulo `p^k`.
pub fn hensel_lift(g: &[BigInt], u0: &BigInt, p: u64, k: u32) -> Option<BigInt> {
    let dg: Vec<BigInt> = g.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
    let pb = BigInt::from(p);
    if !eval_mod(g, u0, &pb).is_zero() || eval_mod(&dg, u0, &pb).is_zero() {
        return None;
    }
    let mut u = u0.mod_floor(&pb);
    let mut prec = 1u32;
    while prec < k {
        prec = (prec * 2).min(k);
        let m = pow_p(p, prec);
        let d = mod_inverse(&eval_mod(&dg, &u, &m), &m)?;
        u = (&u - eval_mod(g, &u, &m) * d).mod_floor(&m);
    }
    Some(u)
}

/// Sign-aware valuation for rationals.
pub fn valuation_rational(q: &BigRational, p: u64) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    Some(valuation_int(q.numer(), p) - valuation_int(q.denom(), p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minus_one_is_all_ones() {
        let x = PadicNumber::from_i64(-1, 2, 16);
        assert_eq!(x.digits(), vec![1; 16]);
        assert_eq!(x.valuation(), 0);
    }

    #[test]
    fn rational_and_inverse() {
        let half = PadicNumber::from_rational(&BigRational::new(1.into(), 2.into()), 2, 32);
        assert_eq!(half.valuation(), -1);
        let third = PadicNumber::from_rational(&BigRational::new(1.into(), 3.into()), 2, 32);
        let one = third.mul(&PadicNumber::from_i64(3, 2, 32));
        assert_eq!(one, PadicNumber::from_i64(1, 2, 32));
    }

    #[test]
    fn cancellation_loses_precision() {
        let a = PadicNumber::from_i64(1, 3, 10);
        let b = PadicNumber::from_i64(1 + 3i64.pow(4), 3, 10);
        let d = b.sub(&a);
        assert_eq!(d.valuation(), 4);
        assert_eq!(d.abs_precision(), 10);
        assert_eq!(d.precision(), 6);
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn hensel_sqrt_minus_seven() {
        // x^2 + 7 over Z_2 has simple roots mod 2 of x^2+x+2? use x^2 - x + 2 (disc -7)
        let g: Vec<BigInt> = [2, -1, 1].iter().map(|&c| BigInt::from(c)).collect();
        let u = hensel_lift(&g, &BigInt::from(0), 2, 40).unwrap();
        let m = pow_p(2, 40);
        assert!(eval_mod(&g, &u, &m).is_zero());
        assert!(hensel_lift(&g, &BigInt::from(1), 2, 40).is_some());
        // double root mod p: refused
        let h: Vec<BigInt> = [1, 0, 1].iter().map(|&c| BigInt::from(c)).collect();
        assert!(hensel_lift(&h, &BigInt::from(1), 2, 10).is_none());
    }

    proptest! {
        #[test]
        fn field_laws(a in -10_000i64..10_000, b in 1i64..10_000, c in -500i64..500, p in prop::sample::select(vec![2u64, 3, 5, 7])) {
            let k = 40;
            let x = PadicNumber::from_rational(&BigRational::new(a.into(), b.into()), p, k);
            let y = PadicNumber::from_i64(c, p, k);
            let lhs = x.add(&y);
            let rhs = PadicNumber::from_rational(&BigRational::new((a + c * b).into(), b.into()), p, k);
            if !lhs.is_zero() && !rhs.is_zero() {
                let d = lhs.sub(&rhs);
                prop_assert!(d.is_zero());
            }
            if !x.is_zero() {
                let one = x.mul(&x.inv().unwrap());
                prop_assert_eq!(one.residue(k / 2), Some(BigInt::one()));
            }
        }
    }
}
