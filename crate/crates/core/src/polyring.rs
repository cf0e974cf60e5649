//! Integer Laurent polynomials, associated polynomials, the annulus inverse
//! `1/f` and the floor digit reduction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::places;
use crate::roots::{isolate_roots, RootSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid associated polynomial: {0}")]
    InvalidAssociated(String),
    #[error("polynomial is not hyperbolic")]
    NotHyperbolic,
    #[error("floor reduction has infinite support (tail of g/f is negative)")]
    NoFiniteReduction,
    #[error("root isolation did not reach the requested precision")]
    PrecisionExhausted,
}

/// Sparse integer Laurent polynomial. Stored coefficients are nonzero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntLaurentPoly {
    terms: BTreeMap<i64, BigInt>,
}

impl IntLaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, BigInt::one())
    }

    pub fn monomial(exp: i64, coeff: impl Into<BigInt>) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, &coeff.into());
        p
    }

    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, &c.into());
        }
        p
    }

    /// Coefficients `c[0], c[1], …` attached to exponents `offset, offset+1, …`.
    pub fn from_ascending<C: Clone + Into<BigInt>>(offset: i64, coeffs: &[C]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(i, c)| (offset + i as i64, c.clone())))
    }

    pub fn add_term(&mut self, exp: i64, coeff: &BigInt) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: i64) -> BigInt {
        self.terms.get(&exp).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Multiplication by `x^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect() }
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect() }
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term(e1 + e2, &(c1 * c2));
            }
        }
        out
    }

    /// `Σ |c|`.
    pub fn l1_norm(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn content(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |acc, c| acc.gcd(c))
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| z.powi(*e as i32) * c.to_f64().unwrap_or(f64::NAN))
            .sum()
    }

    /// Parses `"x^2+2x-1"`, `"[-1,2,1]"` or `"x^-1+2"`.
    pub fn parse(text: &str) -> Result<Self, PolyError> {
        parse_poly(text)
    }
}

impl fmt::Display for IntLaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if neg {
                write!(f, "-")?;
            } else if i > 0 {
                write!(f, "+")?;
            }
            if *e == 0 {
                write!(f, "{mag}")?;
                continue;
            }
            if !mag.is_one() {
                write!(f, "{mag}")?;
            }
            if *e == 1 {
                write!(f, "x")?;
            } else {
                write!(f, "x^{e}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for IntLaurentPoly {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_poly(s)
    }
}

fn perr(pos: usize, msg: &str) -> PolyError {
    PolyError::Parse { pos, msg: msg.to_string() }
}

fn parse_poly(text: &str) -> Result<IntLaurentPoly, PolyError> {
    let t = text.trim();
    if t.is_empty() {
        return Err(perr(0, "empty input"));
    }
    if let Some(inner) = t.strip_prefix('[') {
        let inner = inner.strip_suffix(']').ok_or_else(|| perr(t.len(), "missing ']'"))?;
        let mut coeffs = Vec::new();
        if !inner.trim().is_empty() {
            for (i, part) in inner.split(',').enumerate() {
                let c = BigInt::from_str(part.trim()).map_err(|_| perr(i, "bad coefficient in list"))?;
                coeffs.push(c);
            }
        }
        return Ok(IntLaurentPoly::from_ascending(0, &coeffs));
    }
    let chars: Vec<(usize, char)> = t.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
    let mut p = IntLaurentPoly::zero();
    let mut i = 0;
    let digits = |i: &mut usize| -> Option<String> {
        let start = *i;
        while *i < chars.len() && chars[*i].1.is_ascii_digit() {
            *i += 1;
        }
        (start < *i).then(|| chars[start..*i].iter().map(|(_, c)| c).collect())
    };
    let pos = |i: usize| chars.get(i).map(|(p, _)| *p).unwrap_or(t.len());
    while i < chars.len() {
        let mut sign = BigInt::one();
        if chars[i].1 == '+' || chars[i].1 == '-' {
            if chars[i].1 == '-' {
                sign = -sign;
            }
            i += 1;
        } else if i > 0 {
            return Err(perr(pos(i), "expected '+' or '-'"));
        }
        let coeff = digits(&mut i).map(|d| BigInt::from_str(&d).unwrap());
        if coeff.is_some() && i < chars.len() && chars[i].1 == '*' {
            i += 1;
        }
        let mut exp = 0i64;
        let has_x = i < chars.len() && chars[i].1 == 'x';
        if has_x {
            i += 1;
            exp = 1;
            if i < chars.len() && chars[i].1 == '^' {
                i += 1;
                let paren = i < chars.len() && chars[i].1 == '(';
                if paren {
                    i += 1;
                }
                let mut esign = 1i64;
                if i < chars.len() && (chars[i].1 == '-' || chars[i].1 == '+') {
                    if chars[i].1 == '-' {
                        esign = -1;
                    }
                    i += 1;
                }
                let d = digits(&mut i).ok_or_else(|| perr(pos(i), "expected exponent"))?;
                exp = esign * d.parse::<i64>().map_err(|_| perr(pos(i), "exponent out of range"))?;
                if paren {
                    if i < chars.len() && chars[i].1 == ')' {
                        i += 1;
                    } else {
                        return Err(perr(pos(i), "expected ')'"));
                    }
                }
            }
        }
        if coeff.is_none() && !has_x {
            return Err(perr(pos(i), "expected a term"));
        }
        let c = coeff.unwrap_or_else(BigInt::one) * sign;
        p.add_term(exp, &c);
    }
    Ok(p)
}

/// Primitive polynomial with nonzero constant term and positive leading
/// coefficient, coefficients ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AssociatedPoly {
    coeffs: Vec<BigInt>,
}

/// Result of normalisation: `poly = sign · x^shift · p / content`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalization {
    pub poly: AssociatedPoly,
    pub shift: i64,
    pub sign: i8,
    pub content: BigInt,
}

impl AssociatedPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self, PolyError> {
        let bad = |m: &str| Err(PolyError::InvalidAssociated(m.to_string()));
        if coeffs.is_empty() {
            return Err(PolyError::ZeroPolynomial);
        }
        if coeffs[0].is_zero() {
            return bad("constant term is zero");
        }
        if !coeffs.last().unwrap().is_positive() {
            return bad("leading coefficient is not positive");
        }
        if !coeffs.iter().fold(BigInt::zero(), |a, c| a.gcd(c)).is_one() {
            return bad("not primitive");
        }
        Ok(Self { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self, PolyError> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Parses any polynomial text and normalises it.
    pub fn parse(text: &str) -> Result<Self, PolyError> {
        normalize_associated(&IntLaurentPoly::parse(text)?)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs.last().unwrap()
    }

    pub fn constant(&self) -> &BigInt {
        &self.coeffs[0]
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn to_laurent(&self) -> IntLaurentPoly {
        IntLaurentPoly::from_ascending(0, &self.coeffs)
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs_f64().iter().rev().fold(Complex64::zero(), |acc, c| acc * z + c)
    }

    /// `Σ |a_i|`.
    pub fn l1_norm(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }
}

impl fmt::Display for AssociatedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_laurent())
    }
}

impl FromStr for AssociatedPoly {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

pub fn normalize_with_record(p: &IntLaurentPoly) -> Result<Normalization, PolyError> {
    let lo = p.min_exp().ok_or(PolyError::ZeroPolynomial)?;
    let hi = p.max_exp().unwrap();
    let content = p.content();
    let lead = p.coeff(hi);
    let sign: i8 = if lead.is_negative() { -1 } else { 1 };
    let s = BigInt::from(sign);
    let coeffs: Vec<BigInt> = (lo..=hi).map(|e| p.coeff(e) * &s / &content).collect();
    Ok(Normalization { poly: AssociatedPoly::new(coeffs)?, shift: -lo, sign, content })
}

pub fn normalize_associated(p: &IntLaurentPoly) -> Result<AssociatedPoly, PolyError> {
    normalize_with_record(p).map(|n| n.poly)
}

pub fn reciprocal_poly(f: &AssociatedPoly) -> AssociatedPoly {
    let rev: Vec<BigInt> = f.coeffs.iter().rev().cloned().collect();
    normalize_associated(&IntLaurentPoly::from_ascending(0, &rev)).expect("reversal of a valid polynomial")
}

/// Finite window of a real Laurent series with a uniform bound on the error of
/// every stored coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct RealLaurentWindow {
    pub n_min: i64,
    pub n_max: i64,
    pub coeffs: Vec<f64>,
    pub error_bound: f64,
}

impl RealLaurentWindow {
    pub fn coeff(&self, n: i64) -> f64 {
        if n < self.n_min || n > self.n_max {
            0.0
        } else {
            self.coeffs[(n - self.n_min) as usize]
        }
    }

    /// Product with a dense integer-valued window `g` starting at `g_offset`.
    pub fn convolve_int(&self, g: &[f64], g_offset: i64) -> RealLaurentWindow {
        let n_min = self.n_min + g_offset;
        let n_max = self.n_max + g_offset + g.len() as i64 - 1;
        let mut out = vec![0.0; (n_max - n_min + 1) as usize];
        for (j, gj) in g.iter().enumerate() {
            for (k, c) in self.coeffs.iter().enumerate() {
                out[j + k] += gj * c;
            }
        }
        let l1: f64 = g.iter().map(|x| x.abs()).sum();
        RealLaurentWindow { n_min, n_max, coeffs: out, error_bound: self.error_bound * l1 }
    }
}

/// Largest geometric decay ratio of `1/f` on the unit annulus:
/// `max(max |stable root|, 1/min |unstable root|)`.
pub fn annulus_decay_rate(roots: &RootSet) -> f64 {
    roots
        .roots
        .iter()
        .map(|r| {
            let m = r.value().norm();
            if m < 1.0 {
                m
            } else {
                1.0 / m
            }
        })
        .fold(0.0, f64::max)
}

/// Coefficients of the Laurent expansion of `1/f` converging on an annulus
/// around `|x| = 1`. A root `ρ` inside the unit disc contributes
/// `1/(x-ρ) = Σ_{k≥1} ρ^{k-1} x^{-k}`; a root outside contributes
/// `-Σ_{k≥0} ρ^{-k-1} x^k`.
pub fn inverse_laurent_coeffs(
    f: &AssociatedPoly,
    window: (i64, i64),
    precision_bits: u32,
) -> Result<RealLaurentWindow, PolyError> {
    let (n_min, n_max) = window;
    if !places::is_hyperbolic(f).hyperbolic {
        return Err(PolyError::NotHyperbolic);
    }
    let roots = isolate_roots(f, precision_bits).map_err(|_| PolyError::PrecisionExhausted)?;
    let lead = f.leading().to_f64().unwrap();
    let mut stable = Vec::new();
    let mut unstable = Vec::new();
    for r in &roots.roots {
        for _ in 0..r.multiplicity {
            if r.value().norm() < 1.0 {
                stable.push(r.value());
            } else {
                unstable.push(r.value());
            }
        }
    }
    let rate = annulus_decay_rate(&roots);
    let span = (n_max - n_min).max(0) as usize;
    let extra = if rate <= 0.0 { 8 } else { ((-45.0) / rate.ln()).ceil() as usize + 8 * f.degree() + 8 };
    let mut len = span + extra + n_max.unsigned_abs() as usize + n_min.unsigned_abs() as usize + 8;
    // Grow the truncation until the majorant tails are negligible.
    let majorant_tail = |len: usize| {
        let tail = |mods: &[f64], total: f64| {
            let mut c = vec![0.0f64; len];
            c[0] = 1.0;
            for &m in mods {
                for k in 1..len {
                    c[k] += m * c[k - 1];
                }
            }
            (total - c.iter().sum::<f64>()).max(0.0) / total
        };
        let sm: Vec<f64> = stable.iter().map(|r| r.norm()).collect();
        let um: Vec<f64> = unstable.iter().map(|r| 1.0 / r.norm()).collect();
        let st: f64 = sm.iter().map(|m| 1.0 / (1.0 - m)).product();
        let ut: f64 = um.iter().map(|m| 1.0 / (1.0 - m)).product();
        tail(&sm, st).max(tail(&um, ut))
    };
    while majorant_tail(len) > 1e-13 && len < 1 << 16 {
        len *= 2;
    }
    let s = stable.len() as i64;

    // T(y) = Π 1/(1-ρy) over stable ρ; the stable part is y^s T(y), y = 1/x.
    let mut t = vec![Complex64::zero(); len];
    let mut t_maj = vec![0.0f64; len];
    t[0] = Complex64::one();
    t_maj[0] = 1.0;
    for rho in &stable {
        for k in 1..len {
            let prev = t[k - 1];
            t[k] += rho * prev;
            t_maj[k] += rho.norm() * t_maj[k - 1];
        }
    }
    // U(x) = Π (-1/ρ)/(1-x/ρ) over unstable ρ.
    let mut u = vec![Complex64::zero(); len];
    let mut u_maj = vec![0.0f64; len];
    u[0] = Complex64::one();
    u_maj[0] = 1.0;
    for rho in &unstable {
        let inv = rho.inv();
        for k in 1..len {
            let prev = u[k - 1];
            u[k] += inv * prev;
            u_maj[k] += inv.norm() * u_maj[k - 1];
        }
        for k in 0..len {
            u[k] *= -inv;
            u_maj[k] *= inv.norm();
        }
    }
    // Coefficient of x^n is Σ_j u[j] t[j-n-s].
    let mut coeffs = Vec::with_capacity(span + 1);
    for n in n_min..=n_max {
        let mut acc = Complex64::zero();
        let j0 = (n + s).max(0) as usize;
        for j in j0..len {
            let k = (j as i64 - n - s) as usize;
            if k >= len {
                break;
            }
            acc += u[j] * t[k];
        }
        coeffs.push(acc.re / lead);
    }
    // Majorant tails: omitted index pairs are bounded by the tails of the
    // majorant series times the full sums.
    let t_total: f64 = stable.iter().map(|r| 1.0 / (1.0 - r.norm())).product();
    let u_total: f64 = unstable.iter().map(|r| 1.0 / (r.norm() - 1.0)).product();
    let t_part: f64 = t_maj.iter().sum();
    let u_part: f64 = u_maj.iter().sum();
    let tail = ((t_total - t_part).max(0.0) * u_total + (u_total - u_part).max(0.0) * t_total) / lead.abs();
    let rounding = 4.0 * f64::EPSILON * (len as f64) * t_total * u_total / lead.abs();
    Ok(RealLaurentWindow { n_min, n_max, coeffs, error_bound: tail + rounding })
}

/// Floor reduction `g = f·h + r`: `h` collects the floors of the annulus
/// coefficients of `g/f`. Every coefficient of `r` then lies in
/// `[Σ_{a_i<0} a_i + 1, Σ_{a_i>0} a_i − 1] ∪ {0}`.
pub fn digit_reduce(g: &IntLaurentPoly, f: &AssociatedPoly) -> Result<(IntLaurentPoly, IntLaurentPoly), PolyError> {
    if g.is_zero() {
        return Ok((IntLaurentPoly::zero(), IntLaurentPoly::zero()));
    }
    let roots = isolate_roots(f, 64).map_err(|_| PolyError::PrecisionExhausted)?;
    if !places::is_hyperbolic(f).hyperbolic {
        return Err(PolyError::NotHyperbolic);
    }
    let rate = annulus_decay_rate(&roots);
    let gl1 = g.l1_norm().to_f64().unwrap_or(f64::MAX);
    let margin = if rate <= 0.0 {
        4
    } else {
        ((1e-14 / gl1.max(1.0)).ln() / rate.ln()).ceil() as i64 + 4 * f.degree() as i64 + 8
    };
    let (glo, ghi) = (g.min_exp().unwrap(), g.max_exp().unwrap());
    let (lo, hi) = (glo - margin, ghi + margin);
    let q = inverse_laurent_coeffs(f, (lo - ghi, hi - glo), 64)?;
    let err = q.error_bound * gl1 + 1e-14 * gl1;
    let snap = 4.0 * err + 1e-12;
    let c: Vec<f64> = (lo..=hi)
        .map(|n| g.terms().map(|(e, gc)| gc.to_f64().unwrap() * q.coeff(n - e)).sum())
        .collect();
    // The floors vanish eventually iff g/f tends to 0 from above on both
    // sides; the sign is read off the outermost resolvable coefficients.
    let d = f.degree() as i64;
    let idx = |n: i64| (n - lo) as usize;
    let far_left: Vec<i64> = (lo..glo - d - 1).filter(|&n| c[idx(n)].abs() > snap).collect();
    let far_right: Vec<i64> = (ghi + d + 2..=hi).rev().filter(|&n| c[idx(n)].abs() > snap).collect();
    let outer_negative = |s: &[i64]| {
        let Some(&edge) = s.first() else { return false };
        let span = (s[s.len() - 1] - edge).abs();
        let keep = (d as usize + 2).max(1);
        s.iter()
            .enumerate()
            .filter(|&(k, &n)| k < keep || 2 * (n - edge).abs() <= span)
            .any(|(_, &n)| c[idx(n)] < 0.0)
    };
    if outer_negative(&far_left) || outer_negative(&far_right) {
        return Err(PolyError::NoFiniteReduction);
    }
    let inner = margin / 2;
    let mut h = IntLaurentPoly::zero();
    for n in lo..=hi {
        let v = c[idx(n)];
        let r = v.round();
        let fl = if (v - r).abs() <= snap { r } else { v.floor() };
        if fl != 0.0 {
            if n < glo - inner || n > ghi + inner {
                return Err(PolyError::NoFiniteReduction);
            }
            h.add_term(n, &BigInt::from(fl as i64));
        }
    }
    let r = g.sub(&f.to_laurent().mul(&h));
    Ok((h, r))
}

/// Bounds `[lo, hi]` guaranteed for the coefficients of the remainder of
/// [`digit_reduce`].
pub fn digit_reduce_bounds(f: &AssociatedPoly) -> (BigInt, BigInt) {
    let neg: BigInt = f.coeffs.iter().filter(|c| c.is_negative()).sum();
    let pos: BigInt = f.coeffs.iter().filter(|c| c.is_positive()).sum();
    (neg + 1, pos - 1)
}

/// `log|a_d| + Σ log max(1, |ρ|)`.
pub fn mahler_entropy(f: &AssociatedPoly, precision_bits: u32) -> Result<f64, PolyError> {
    let roots = isolate_roots(f, precision_bits).map_err(|_| PolyError::PrecisionExhausted)?;
    let mut m = f.leading().to_f64().unwrap().ln();
    for r in &roots.roots {
        let n = r.value().norm();
        if n > 1.0 {
            m += r.multiplicity as f64 * n.ln();
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ap(c: &[i64]) -> AssociatedPoly {
        AssociatedPoly::from_i64(c).unwrap()
    }

    #[test]
    fn parse_forms() {
        let a = IntLaurentPoly::parse("x^2+2x-1").unwrap();
        let b = IntLaurentPoly::parse("[-1,2,1]").unwrap();
        assert_eq!(a, b);
        let c = IntLaurentPoly::parse("x^-1 + 2").unwrap();
        assert_eq!(c, IntLaurentPoly::from_terms([(-1, 1), (0, 2)]));
        assert_eq!(IntLaurentPoly::parse("2*x^(-2) - x").unwrap().to_string(), "-x+2x^-2");
        assert!(IntLaurentPoly::parse("x^").is_err());
        assert!(IntLaurentPoly::parse("2y").is_err());
        assert!(IntLaurentPoly::parse("").is_err());
    }

    #[test]
    fn display_round_trip() {
        for s in ["x^2+2x-1", "2x^2+3x-1", "-x+2x^-2", "7", "x^3-x-1"] {
            assert_eq!(IntLaurentPoly::parse(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn normalisation_examples() {
        let n = normalize_with_record(&IntLaurentPoly::parse("-2x^3+x^2").unwrap()).unwrap();
        assert_eq!(n.poly, ap(&[-1, 2]));
        assert_eq!((n.shift, n.sign), (-2, -1));
        assert_eq!(AssociatedPoly::parse("4x-2").unwrap(), ap(&[-1, 2]));
        assert_eq!(AssociatedPoly::parse("x^-1+2-x^-2").unwrap(), ap(&[-1, 1, 2]));
        assert_eq!(normalize_associated(&IntLaurentPoly::zero()), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn reciprocal_examples() {
        assert_eq!(reciprocal_poly(&ap(&[-1, 2, 1])), ap(&[-1, -2, 1]));
        assert_eq!(reciprocal_poly(&ap(&[-1, 2])), ap(&[-2, 1]));
        assert_eq!(reciprocal_poly(&ap(&[1, -3, 1])), ap(&[1, -3, 1]));
    }

    #[test]
    fn inverse_of_two_x_minus_one() {
        let w = inverse_laurent_coeffs(&ap(&[-1, 2]), (-5, 5), 64).unwrap();
        for n in -5..=5 {
            let want = if n <= -1 { 2f64.powi(n as i32) } else { 0.0 };
            assert!((w.coeff(n) - want).abs() < 1e-13, "n={n}");
        }
        assert!(w.error_bound < 1e-12);
    }

    #[test]
    fn inverse_decay_rate() {
        let w = inverse_laurent_coeffs(&ap(&[-1, 2, 1]), (-30, 30), 64).unwrap();
        let r = 2f64.sqrt() - 1.0;
        for n in [10i64, 20, -10, -20] {
            let ratio = w.coeff(n + 1) / w.coeff(n);
            assert!((ratio.abs() - if n > 0 { r } else { 1.0 / r }).abs() < 1e-6, "n={n} ratio={ratio}");
        }
    }

    #[test]
    fn inverse_convolves_to_delta() {
        for c in [vec![-1, 2], vec![-1, 2, 1], vec![-1, 3, 2], vec![-1, -1, 0, 1], vec![3, 0, 0, 2]] {
            let f = ap(&c);
            let w = inverse_laurent_coeffs(&f, (-40, 40), 64).unwrap();
            let conv = w.convolve_int(&f.coeffs_f64(), 0);
            for n in -30..=30 {
                let want = if n == 0 { 1.0 } else { 0.0 };
                assert!((conv.coeff(n) - want).abs() <= conv.error_bound + 1e-12, "{f} n={n}");
            }
        }
    }

    #[test]
    fn inverse_refuses_non_hyperbolic() {
        assert_eq!(inverse_laurent_coeffs(&ap(&[1, -1, 1]), (-3, 3), 64), Err(PolyError::NotHyperbolic));
    }

    #[test]
    fn digit_reduce_examples() {
        let f = ap(&[-1, 2]);
        let (h, r) = digit_reduce(&IntLaurentPoly::monomial(0, 5), &f).unwrap();
        assert_eq!(h, IntLaurentPoly::from_terms([(-1, 2), (-2, 1)]));
        assert_eq!(r, IntLaurentPoly::from_terms([(0, 1), (-2, 1)]));
        let (h, r) = digit_reduce(&IntLaurentPoly::zero(), &f).unwrap();
        assert!(h.is_zero() && r.is_zero());
        let x2 = IntLaurentPoly::monomial(2, 1);
        assert_eq!(digit_reduce(&x2, &f).unwrap(), (IntLaurentPoly::zero(), x2));
        assert_eq!(digit_reduce(&IntLaurentPoly::monomial(0, -1), &f), Err(PolyError::NoFiniteReduction));
    }

    #[test]
    fn mahler_examples() {
        assert!((mahler_entropy(&ap(&[-3, 2]), 64).unwrap() - 3f64.ln()).abs() < 1e-12);
        assert!(mahler_entropy(&ap(&[-1, 1]), 64).unwrap().abs() < 1e-12);
        let m = mahler_entropy(&ap(&[-1, -2, 1]), 64).unwrap();
        assert!((m - (1.0 + 2f64.sqrt()).ln()).abs() < 1e-12);
    }

    fn arb_laurent() -> impl Strategy<Value = IntLaurentPoly> {
        prop::collection::vec((-4i64..6, -9i64..10), 1..5).prop_map(IntLaurentPoly::from_terms)
    }

    fn arb_assoc() -> impl Strategy<Value = AssociatedPoly> {
        prop::collection::vec(-6i64..7, 2..5).prop_filter_map("zero", |mut c| {
            c[0] = if c[0] == 0 { 1 } else { c[0] };
            let p = IntLaurentPoly::from_ascending(0, &c);
            normalize_associated(&p).ok()
        })
    }

    proptest! {
        #[test]
        fn normalise_idempotent(p in arb_laurent()) {
            prop_assume!(!p.is_zero());
            let f = normalize_associated(&p).unwrap();
            prop_assert_eq!(normalize_associated(&f.to_laurent()).unwrap(), f.clone());
            prop_assert!(!f.constant().is_zero());
            prop_assert!(f.leading().is_positive());
            let n = normalize_with_record(&p).unwrap();
            let back = p.shift(n.shift).scale(&BigInt::from(n.sign));
            prop_assert_eq!(back, f.to_laurent().scale(&n.content));
        }

        #[test]
        fn reciprocal_involution(f in arb_assoc()) {
            prop_assert_eq!(reciprocal_poly(&reciprocal_poly(&f)), f);
        }

        #[test]
        fn parse_display_round_trip(p in arb_laurent()) {
            prop_assert_eq!(IntLaurentPoly::parse(&p.to_string()).unwrap(), p);
        }

        #[test]
        fn digit_reduce_identity(g in arb_laurent(), f in arb_assoc()) {
            prop_assume!(places::is_hyperbolic(&f).hyperbolic);
            if let Ok((h, r)) = digit_reduce(&g, &f) {
                prop_assert_eq!(f.to_laurent().mul(&h).add(&r), g);
                let (lo, hi) = digit_reduce_bounds(&f);
                for (_, c) in r.terms() {
                    prop_assert!(c >= &lo && c <= &hi);
                }
            }
        }

        #[test]
        fn mahler_reciprocal(f in arb_assoc()) {
            let a = mahler_entropy(&f, 64).unwrap();
            let b = mahler_entropy(&reciprocal_poly(&f), 64).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
