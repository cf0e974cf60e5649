//! Hyperbolicity, irreducibility and Pisot classification, Newton polygons and
//! the stable/unstable places of an associated polynomial, and evaluation of
//! digit series at those places.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::padic::{hensel_lift, valuation_int, PadicNumber};
use crate::polyring::{reciprocal_poly, AssociatedPoly, IntLaurentPoly};
use crate::qpoly::{self, QPoly};
use crate::roots::{isolate_roots, Root, RootError, RootSet, MAX_PRECISION_BITS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlaceError {
    #[error("root isolation exhausted its precision budget")]
    PrecisionExhausted,
    #[error("degree {0} exceeds the supported bound of 6")]
    DegreeTooLarge(usize),
    #[error("polynomial is not hyperbolic")]
    NotHyperbolic,
    #[error("polynomial is not irreducible")]
    NotIrreducible,
    #[error("series tail lies on the divergent side of this place")]
    DivergentDirection,
    #[error("place over p = {0} is not evaluable (local factor not simple modulo p)")]
    HenselFailure(u64),
    #[error("coefficient too large to factor")]
    CoefficientTooLarge,
    #[error("no such place")]
    UnknownPlace,
}

impl From<RootError> for PlaceError {
    fn from(_: RootError) -> Self {
        PlaceError::PrecisionExhausted
    }
}

/// Default number of p-adic digits.
pub const DEFAULT_PADIC_DIGITS: u32 = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicReport {
    pub hyperbolic: bool,
    /// Lower bound on `min ||ρ| − 1|`; zero when a root lies on the circle.
    pub certificate: f64,
    /// Number of distinct roots on the unit circle, found exactly.
    pub circle_roots: usize,
}

fn reversed(q: &[BigRational]) -> QPoly {
    let mut r: QPoly = q.iter().rev().cloned().collect();
    qpoly::trim(&mut r);
    r
}

/// Exact count of distinct roots on the unit circle: such roots are common
/// roots of `f` and its reversal; after removing `x ∓ 1` the common factor is
/// palindromic and `x^k h(x + 1/x)` turns circle roots into real roots of `h`
/// in `[-2, 2]`.
fn count_circle_roots(f: &[BigRational]) -> usize {
    let g = qpoly::gcd(f, &reversed(f));
    if qpoly::degree(&g).unwrap_or(0) == 0 {
        return 0;
    }
    let mut g = qpoly::squarefree_part(&g);
    let mut count = 0;
    for s in [1i64, -1] {
        let lin = vec![BigRational::from_integer((-s).into()), BigRational::one()];
        let (qq, r) = qpoly::divrem(&g, &lin);
        if r.is_empty() {
            count += 1;
            g = qq;
        }
    }
    let deg = qpoly::degree(&g).unwrap_or(0);
    if deg == 0 {
        return count;
    }
    let k = deg / 2;
    // T_0 = 2, T_1 = y, T_{j+1} = y T_j - T_{j-1}
    let y: QPoly = vec![BigRational::zero(), BigRational::one()];
    let mut t_prev: QPoly = vec![BigRational::from_integer(2.into())];
    let mut t_cur: QPoly = y.clone();
    let mut h: QPoly = vec![g[k].clone()];
    for j in 1..=k {
        h = qpoly::add(&h, &qpoly::scale(&t_cur, &g[k + j]));
        let next = qpoly::sub(&qpoly::mul(&y, &t_cur), &t_prev);
        t_prev = std::mem::replace(&mut t_cur, next);
    }
    let two = BigRational::from_integer(2.into());
    count + 2 * qpoly::count_real_roots_closed(&h, &-two.clone(), &two)
}

fn isolate_adaptive<F: Fn(&RootSet) -> bool>(f: &AssociatedPoly, start: u32, ok: F) -> Result<RootSet, PlaceError> {
    let mut bits = start.max(53);
    loop {
        let rs = isolate_roots(f, bits)?;
        if ok(&rs) {
            return Ok(rs);
        }
        if bits >= MAX_PRECISION_BITS {
            return Err(PlaceError::PrecisionExhausted);
        }
        bits = (bits * 2).min(MAX_PRECISION_BITS);
    }
}

fn all_decided(rs: &RootSet) -> bool {
    rs.roots.iter().all(|r| r.modulus_cmp_one().is_some())
}

pub fn is_hyperbolic(f: &AssociatedPoly) -> HyperbolicReport {
    if f.degree() == 0 {
        return HyperbolicReport { hyperbolic: true, certificate: f64::INFINITY, circle_roots: 0 };
    }
    let circle = count_circle_roots(&qpoly::from_ints(f.coeffs()));
    if circle > 0 {
        return HyperbolicReport { hyperbolic: false, certificate: 0.0, circle_roots: circle };
    }
    let certificate = match isolate_adaptive(f, 64, all_decided) {
        Ok(rs) => rs
            .roots
            .iter()
            .map(|r| ((r.value().norm() - 1.0).abs() - r.radius).max(0.0))
            .fold(f64::INFINITY, f64::min),
        Err(_) => 0.0,
    };
    HyperbolicReport { hyperbolic: true, certificate, circle_roots: 0 }
}

fn positive_divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs().to_u64().unwrap_or(u64::MAX);
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(BigInt::from(d));
            if d * d != n {
                out.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    out
}

/// Irreducibility over ℚ for degree ≤ 6: every factor of `f` is
/// `l · Π_{ρ∈S}(x − ρ)` for a subset `S` of roots and a divisor `l` of `a_d`,
/// so each candidate obtained by rounding such a product is tested by exact
/// division.
pub fn is_irreducible(f: &AssociatedPoly) -> Result<bool, PlaceError> {
    let d = f.degree();
    if d > 6 {
        return Err(PlaceError::DegreeTooLarge(d));
    }
    if d == 0 {
        return Ok(false);
    }
    if d == 1 {
        return Ok(true);
    }
    let q = qpoly::from_ints(f.coeffs());
    if qpoly::degree(&qpoly::gcd(&q, &qpoly::derivative(&q))).unwrap_or(0) > 0 {
        return Ok(false);
    }
    let rs = isolate_roots(f, 64)?;
    let vals: Vec<Complex64> = rs.roots.iter().map(Root::value).collect();
    let divisors = positive_divisors(f.leading());
    for mask in 1u32..(1 << d) {
        let k = mask.count_ones() as usize;
        if k > d / 2 {
            continue;
        }
        let mut prod = vec![Complex64::one()];
        for (i, rho) in vals.iter().enumerate() {
            if mask & (1 << i) != 0 {
                let mut next = vec![Complex64::zero(); prod.len() + 1];
                for (j, c) in prod.iter().enumerate() {
                    next[j + 1] += c;
                    next[j] -= c * rho;
                }
                prod = next;
            }
        }
        if prod.iter().any(|c| c.im.abs() > 1e-6 * (1.0 + c.re.abs())) {
            continue;
        }
        for l in &divisors {
            let lf = l.to_f64().unwrap();
            let cand: Vec<BigInt> = prod.iter().map(|c| BigInt::from((c.re * lf).round() as i64)).collect();
            let cq = qpoly::from_ints(&cand);
            if qpoly::degree(&cq) != Some(k) {
                continue;
            }
            if qpoly::divrem(&q, &cq).1.is_empty() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PisotSide {
    Direct,
    Reciprocal,
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PisotReport {
    pub side: PisotSide,
    /// Monic polynomial with the Pisot root (the side that was recognised).
    pub monic: Option<AssociatedPoly>,
    /// Certified interval `[lo, hi]` containing β.
    pub beta: Option<(BigRational, BigRational)>,
    pub beta_f64: Option<f64>,
    pub is_unit: bool,
}

impl PisotReport {
    pub fn none() -> Self {
        Self { side: PisotSide::None, monic: None, beta: None, beta_f64: None, is_unit: false }
    }

    pub fn is_pisot(&self) -> bool {
        self.side != PisotSide::None
    }
}

/// Checks whether monic `g` has a Pisot root: one real root `> 1`, every
/// other root strictly inside the unit disc. Such `g` is irreducible, since
/// a factor without the large root would have a nonzero integer constant term
/// of modulus below 1.
fn pisot_root(g: &AssociatedPoly, bits: u32) -> Option<Root> {
    if !g.is_monic() || g.degree() == 0 || !is_hyperbolic(g).hyperbolic {
        return None;
    }
    let rs = isolate_adaptive(g, bits, all_decided).ok()?;
    if rs.roots.iter().any(|r| r.multiplicity != 1) {
        return None;
    }
    let big: Vec<&Root> = rs.roots.iter().filter(|r| r.modulus_cmp_one() == Some(Ordering::Greater)).collect();
    if big.len() != 1 || !big[0].is_real || !big[0].re.is_positive() {
        return None;
    }
    Some(big[0].clone())
}

pub fn pisot_classify(f: &AssociatedPoly, bits: u32) -> PisotReport {
    for side in [PisotSide::Reciprocal, PisotSide::Direct] {
        let g = if side == PisotSide::Reciprocal { reciprocal_poly(f) } else { f.clone() };
        if let Some(root) = pisot_root(&g, bits) {
            let interval = root.real_interval();
            return PisotReport {
                side,
                beta_f64: Some(root.value().re),
                beta: Some(interval),
                is_unit: g.constant().abs().is_one(),
                monic: Some(g),
            };
        }
    }
    PisotReport::none()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonSide {
    /// Slope `m`; the side carries `length` roots of valuation `-m`.
    pub slope: Rational64,
    pub length: usize,
    pub start: usize,
}

/// Lower convex hull of `{(i, v_p(a_i))}`.
pub fn newton_polygon(f: &AssociatedPoly, p: u64) -> Vec<NewtonSide> {
    let pts: Vec<(i64, i64)> = f
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i as i64, valuation_int(c, p)))
        .collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull.windows(2)
        .map(|w| NewtonSide {
            slope: Rational64::new(w[1].1 - w[0].1, w[1].0 - w[0].0),
            length: (w[1].0 - w[0].0) as usize,
            start: w[0].0 as usize,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Stable,
    Unstable,
}

/// An archimedean place: a real root or a conjugate pair of roots of `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArchPlace {
    pub root: Root,
    pub modulus: f64,
    pub tag: Tag,
    /// 1 for a real place, 2 for a complex place.
    pub root_count: usize,
}

impl ArchPlace {
    pub fn value(&self) -> Complex64 {
        self.root.value()
    }

    pub fn is_real(&self) -> bool {
        self.root_count == 1
    }
}

/// One side of a Newton polygon with nonzero slope.
#[derive(Clone, Debug, PartialEq)]
pub struct NonArchPlace {
    pub prime: u64,
    pub slope: Rational64,
    pub root_count: usize,
    pub tag: Tag,
    /// Roots in `ℚ_p` lifted by Hensel iteration; each is a degree-one place.
    pub local_roots: Vec<PadicNumber>,
    /// Roots on this side not evaluable (ramified, inert or repeated mod p).
    pub unevaluable: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaceClassification {
    pub poly: AssociatedPoly,
    pub archimedean: Vec<ArchPlace>,
    pub nonarchimedean: Vec<NonArchPlace>,
    pub pisot: PisotReport,
    pub padic_digits: u32,
}

impl PlaceClassification {
    pub fn count(&self, tag: Tag, archimedean: bool) -> usize {
        if archimedean {
            self.archimedean.iter().filter(|p| p.tag == tag).count()
        } else {
            self.nonarchimedean.iter().filter(|p| p.tag == tag).count()
        }
    }

    /// All evaluable places, in a fixed order.
    pub fn place_refs(&self) -> Vec<PlaceRef> {
        let mut v: Vec<PlaceRef> = (0..self.archimedean.len()).map(PlaceRef::Arch).collect();
        for (e, p) in self.nonarchimedean.iter().enumerate() {
            for r in 0..p.local_roots.len() {
                v.push(PlaceRef::NonArch { entry: e, root: r });
            }
        }
        v
    }

    pub fn tag_of(&self, place: PlaceRef) -> Result<Tag, PlaceError> {
        match place {
            PlaceRef::Arch(i) => self.archimedean.get(i).map(|p| p.tag).ok_or(PlaceError::UnknownPlace),
            PlaceRef::NonArch { entry, .. } => self.nonarchimedean.get(entry).map(|p| p.tag).ok_or(PlaceError::UnknownPlace),
        }
    }

    pub fn has_unevaluable(&self) -> bool {
        self.nonarchimedean.iter().any(|p| p.unevaluable > 0)
    }
}

fn prime_factors(n: &BigInt) -> Result<Vec<u64>, PlaceError> {
    let mut n = n.abs().to_u64().ok_or(PlaceError::CoefficientTooLarge)?;
    if n > (1u64 << 50) {
        return Err(PlaceError::CoefficientTooLarge);
    }
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    Ok(out)
}

/// Largest prime for which residual roots are searched exhaustively.
const RESIDUAL_SEARCH_LIMIT: u64 = 1 << 16;

fn local_roots(f: &AssociatedPoly, p: u64, side: &NewtonSide, digits: u32) -> Vec<PadicNumber> {
    if *side.slope.denom() != 1 || p > RESIDUAL_SEARCH_LIMIT {
        return Vec::new();
    }
    let s = *side.slope.numer();
    let v: Vec<Option<i64>> = f.coeffs().iter().map(|c| (!c.is_zero()).then(|| valuation_int(c, p))).collect();
    let i0 = side.start as i64;
    let c = s * i0 - v[side.start].unwrap();
    // g(u) = p^c f(p^{-s} u), integral with the side's points as units.
    let g: Vec<BigInt> = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, a)| match v[i] {
            None => BigInt::zero(),
            Some(vi) => {
                let e = vi - s * i as i64 + c;
                a / crate::padic::pow_p(p, vi as u32) * crate::padic::pow_p(p, e as u32)
            }
        })
        .collect();
    let pb = BigInt::from(p);
    let mut roots = Vec::new();
    for u in 1..p {
        let ub = BigInt::from(u);
        let val = g.iter().rev().fold(BigInt::zero(), |acc, a| (acc * &ub + a).mod_floor(&pb));
        if !val.is_zero() {
            continue;
        }
        if let Some(lift) = hensel_lift(&g, &ub, p, digits) {
            roots.push(PadicNumber::from_parts(p, -s, lift, digits));
        }
    }
    roots
}

pub fn classify_places(f: &AssociatedPoly, bits: u32) -> Result<PlaceClassification, PlaceError> {
    classify_places_with(f, bits, DEFAULT_PADIC_DIGITS)
}

pub fn classify_places_with(f: &AssociatedPoly, bits: u32, padic_digits: u32) -> Result<PlaceClassification, PlaceError> {
    if !is_irreducible(f)? {
        return Err(PlaceError::NotIrreducible);
    }
    if !is_hyperbolic(f).hyperbolic {
        return Err(PlaceError::NotHyperbolic);
    }
    let rs = isolate_adaptive(f, bits, all_decided)?;
    let mut archimedean = Vec::new();
    for r in &rs.roots {
        if r.im.is_negative() {
            continue;
        }
        let tag = match r.modulus_cmp_one() {
            Some(Ordering::Less) => Tag::Stable,
            _ => Tag::Unstable,
        };
        archimedean.push(ArchPlace {
            modulus: r.value().norm(),
            tag,
            root_count: if r.is_real { 1 } else { 2 },
            root: r.clone(),
        });
    }
    let mut primes = prime_factors(f.constant())?;
    primes.extend(prime_factors(f.leading())?);
    primes.sort_unstable();
    primes.dedup();
    let mut nonarchimedean = Vec::new();
    for p in primes {
        for side in newton_polygon(f, p) {
            if side.slope.is_zero() {
                continue;
            }
            let tag = if side.slope.is_negative() { Tag::Stable } else { Tag::Unstable };
            let lr = local_roots(f, p, &side, padic_digits);
            nonarchimedean.push(NonArchPlace {
                prime: p,
                slope: side.slope,
                root_count: side.length,
                tag,
                unevaluable: side.length - lr.len(),
                local_roots: lr,
            });
        }
    }
    Ok(PlaceClassification {
        poly: f.clone(),
        archimedean,
        nonarchimedean,
        pisot: pisot_classify(f, bits),
        padic_digits,
    })
}

/// Which place a series is evaluated at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlaceRef {
    Arch(usize),
    NonArch { entry: usize, root: usize },
}

/// Periodic tail of a digit series. For a right tail
/// `s_{start+k} = pattern[k mod L]`; for a left tail `s_{start−k} = pattern[k mod L]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tail {
    pub start: i64,
    pub pattern: Vec<i64>,
}

/// Integer digit sequence: finite part plus optional periodic tails.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DigitSeries {
    pub finite: IntLaurentPoly,
    pub right: Option<Tail>,
    pub left: Option<Tail>,
}

impl DigitSeries {
    pub fn finite(p: IntLaurentPoly) -> Self {
        Self { finite: p, right: None, left: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlaceValue {
    Arch { value: Complex64, error: f64 },
    Padic(PadicNumber),
}

fn tail_active(t: &Option<Tail>) -> Option<&Tail> {
    t.as_ref().filter(|t| t.pattern.iter().any(|&d| d != 0))
}

/// `Σ s_n ρ^n` at the given place.
pub fn evaluate_series_at_place(
    series: &DigitSeries,
    pc: &PlaceClassification,
    place: PlaceRef,
) -> Result<PlaceValue, PlaceError> {
    match place {
        PlaceRef::Arch(i) => {
            let ap = pc.archimedean.get(i).ok_or(PlaceError::UnknownPlace)?;
            let rho = ap.value();
            let m = rho.norm();
            let mut value = Complex64::zero();
            let mut mag = 0.0;
            for (e, c) in series.finite.terms() {
                let c = c.to_f64().unwrap();
                value += rho.powi(e as i32) * c;
                mag += c.abs() * m.powi(e as i32);
            }
            if let Some(t) = tail_active(&series.right) {
                if m >= 1.0 {
                    return Err(PlaceError::DivergentDirection);
                }
                let l = t.pattern.len() as i32;
                let head: Complex64 = t.pattern.iter().enumerate().map(|(k, &d)| rho.powi(k as i32) * d as f64).sum();
                value += rho.powi(t.start as i32) * head / (Complex64::one() - rho.powi(l));
                let dmax = t.pattern.iter().map(|d| d.abs()).max().unwrap() as f64;
                mag += dmax * m.powi(t.start as i32) / (1.0 - m);
            }
            if let Some(t) = tail_active(&series.left) {
                if m <= 1.0 {
                    return Err(PlaceError::DivergentDirection);
                }
                let l = t.pattern.len() as i32;
                let inv = rho.inv();
                let head: Complex64 = t.pattern.iter().enumerate().map(|(k, &d)| inv.powi(k as i32) * d as f64).sum();
                value += rho.powi(t.start as i32) * head / (Complex64::one() - inv.powi(l));
                let dmax = t.pattern.iter().map(|d| d.abs()).max().unwrap() as f64;
                mag += dmax * m.powi(t.start as i32) / (1.0 - 1.0 / m);
            }
            let terms = series.finite.len() as f64 + 8.0;
            Ok(PlaceValue::Arch { value, error: 4.0 * f64::EPSILON * terms * mag.max(f64::MIN_POSITIVE) })
        }
        PlaceRef::NonArch { entry, root } => {
            let np = pc.nonarchimedean.get(entry).ok_or(PlaceError::UnknownPlace)?;
            let r = np.local_roots.get(root).ok_or(PlaceError::HenselFailure(np.prime))?;
            let p = np.prime;
            let k = pc.padic_digits;
            let one = PadicNumber::from_i64(1, p, k);
            let mut acc = PadicNumber::zero(p, k as i64 + 64);
            for (e, c) in series.finite.terms() {
                acc = acc.add(&PadicNumber::from_integer(c, p, k).mul(&r.pow(e)));
            }
            let v = r.valuation();
            if let Some(t) = tail_active(&series.right) {
                if v <= 0 {
                    return Err(PlaceError::DivergentDirection);
                }
                let head = t.pattern.iter().enumerate().fold(PadicNumber::zero(p, k as i64 + 64), |a, (i, &d)| {
                    a.add(&PadicNumber::from_i64(d, p, k).mul(&r.pow(i as i64)))
                });
                let den = one.sub(&r.pow(t.pattern.len() as i64));
                acc = acc.add(&r.pow(t.start).mul(&head).div(&den));
            }
            if let Some(t) = tail_active(&series.left) {
                if v >= 0 {
                    return Err(PlaceError::DivergentDirection);
                }
                let inv = r.inv().unwrap();
                let head = t.pattern.iter().enumerate().fold(PadicNumber::zero(p, k as i64 + 64), |a, (i, &d)| {
                    a.add(&PadicNumber::from_i64(d, p, k).mul(&inv.pow(i as i64)))
                });
                let den = one.sub(&inv.pow(t.pattern.len() as i64));
                acc = acc.add(&r.pow(t.start).mul(&head).div(&den));
            }
            Ok(PlaceValue::Padic(acc))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ap(c: &[i64]) -> AssociatedPoly {
        AssociatedPoly::from_i64(c).unwrap()
    }

    #[test]
    fn hyperbolic_examples() {
        assert!(!is_hyperbolic(&ap(&[1, -1, 1])).hyperbolic);
        let h = is_hyperbolic(&ap(&[-1, -2, 1]));
        assert!(h.hyperbolic);
        assert!((h.certificate - (1.0 - (2f64.sqrt() - 1.0))).abs() < 1e-9);
        assert!(!is_hyperbolic(&ap(&[-1, 1])).hyperbolic);
        // x^4 - x^3 - x^2 - x + 1 (Salem) has two roots on the circle
        let s = is_hyperbolic(&ap(&[1, -1, -1, -1, 1]));
        assert_eq!((s.hyperbolic, s.circle_roots), (false, 2));
        // (x^2+1)(x-3): one factor on the circle
        assert_eq!(is_hyperbolic(&ap(&[-3, 1, -3, 1])).circle_roots, 2);
    }

    #[test]
    fn irreducibility_examples() {
        assert!(is_irreducible(&ap(&[-1, 2, 1])).unwrap());
        assert!(!is_irreducible(&ap(&[-1, 0, 1])).unwrap());
        assert!(is_irreducible(&ap(&[-1, 2])).unwrap());
        // (2x^2+1)(3x^2-x+5) has no rational roots
        assert!(!is_irreducible(&ap(&[5, -1, 13, -2, 6])).unwrap());
        // (x^2-x-1)(x^2+x-1)
        assert!(!is_irreducible(&ap(&[1, 0, -3, 0, 1])).unwrap());
        assert!(is_irreducible(&ap(&[-1, -1, 0, 1])).unwrap());
        assert_eq!(is_irreducible(&ap(&[1, 0, 0, 0, 0, 0, 0, 1])), Err(PlaceError::DegreeTooLarge(7)));
    }

    /// Brute-force oracle: all monic-over-divisor integer factor pairs with
    /// bounded coefficients.
    fn reducible_brute(c: &[i64]) -> bool {
        let q = qpoly::from_ints(&c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>());
        let d = c.len() - 1;
        for k in 1..=d / 2 {
            let mut cand = vec![-6i64; k + 1];
            loop {
                if cand[k] > 0 {
                    let cq = qpoly::from_ints(&cand.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>());
                    if qpoly::degree(&cq) == Some(k) && qpoly::divrem(&q, &cq).1.is_empty() {
                        return true;
                    }
                }
                let mut i = 0;
                while i <= k {
                    cand[i] += 1;
                    if cand[i] <= 6 {
                        break;
                    }
                    cand[i] = -6;
                    i += 1;
                }
                if i > k {
                    break;
                }
            }
        }
        false
    }

    #[test]
    fn irreducibility_matches_bruteforce() {
        let mut rng = 12345u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng >> 33) % 7) as i64 - 3
        };
        let mut checked = 0;
        while checked < 150 {
            let d = 2 + (checked % 3);
            let mut c: Vec<i64> = (0..=d).map(|_| next()).collect();
            if c[0] == 0 || c[d] <= 0 {
                continue;
            }
            let Ok(f) = normalize(&c) else { continue };
            c = f.coeffs().iter().map(|x| x.to_i64().unwrap()).collect();
            assert_eq!(is_irreducible(&f).unwrap(), !reducible_brute(&c), "{f}");
            checked += 1;
        }
    }

    fn normalize(c: &[i64]) -> Result<AssociatedPoly, crate::polyring::PolyError> {
        crate::polyring::normalize_associated(&IntLaurentPoly::from_ascending(0, c))
    }

    #[test]
    fn pisot_examples() {
        let r = pisot_classify(&ap(&[-1, 3, 2]), 128);
        assert_eq!(r.side, PisotSide::Reciprocal);
        assert_eq!(r.monic, Some(ap(&[-2, -3, 1])));
        assert!((r.beta_f64.unwrap() - (3.0 + 17f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!(!r.is_unit);
        assert_eq!(pisot_classify(&ap(&[-3, 2]), 128).side, PisotSide::None);
        let r = pisot_classify(&ap(&[-1, 2, 1]), 128);
        assert_eq!(r.side, PisotSide::Reciprocal);
        assert!(r.is_unit);
        let (lo, hi) = r.beta.unwrap();
        let s = BigRational::from_float(1.0 + 2f64.sqrt()).unwrap();
        assert!(lo <= s.clone() + BigRational::new(1.into(), BigInt::from(1u64 << 50)) && hi >= s - BigRational::new(1.into(), BigInt::from(1u64 << 50)));
        // direct side: x^3 - x - 1 (plastic number) is Pisot as given
        assert_eq!(pisot_classify(&ap(&[-1, -1, 0, 1]), 128).side, PisotSide::Direct);
    }

    #[test]
    fn newton_examples() {
        let n = newton_polygon(&ap(&[-1, 3, 2]), 2);
        assert_eq!(
            n,
            vec![
                NewtonSide { slope: Rational64::new(0, 1), length: 1, start: 0 },
                NewtonSide { slope: Rational64::new(1, 1), length: 1, start: 1 }
            ]
        );
        assert_eq!(newton_polygon(&ap(&[-1, 2]), 2), vec![NewtonSide { slope: Rational64::new(1, 1), length: 1, start: 0 }]);
        assert_eq!(newton_polygon(&ap(&[-1, -2, 1]), 2), vec![NewtonSide { slope: Rational64::new(0, 1), length: 2, start: 0 }]);
        // 4x^2 + 2: slope 2/2 merged? points (0,1),(2,2): one side slope 1/2, length 2
        assert_eq!(newton_polygon(&ap(&[1, 0, 2]), 2), vec![NewtonSide { slope: Rational64::new(1, 2), length: 2, start: 0 }]);
    }

    #[test]
    fn classify_examples() {
        let pc = classify_places(&ap(&[-1, 2]), 128).unwrap();
        assert_eq!(pc.archimedean.len(), 1);
        assert_eq!(pc.archimedean[0].tag, Tag::Stable);
        assert_eq!(pc.nonarchimedean.len(), 1);
        assert_eq!((pc.nonarchimedean[0].prime, pc.nonarchimedean[0].tag), (2, Tag::Unstable));
        let pc = classify_places(&ap(&[-1, 2, 1]), 128).unwrap();
        assert_eq!((pc.count(Tag::Stable, true), pc.count(Tag::Unstable, true)), (1, 1));
        assert!(pc.nonarchimedean.is_empty());
        let pc = classify_places(&ap(&[-1, 3, 2]), 128).unwrap();
        assert_eq!(pc.count(Tag::Unstable, true), 1);
        assert_eq!(pc.count(Tag::Unstable, false), 1);
        assert_eq!(pc.nonarchimedean[0].prime, 2);
        assert_eq!(pc.nonarchimedean[0].local_roots.len(), 1);
        assert_eq!(classify_places(&ap(&[1, -1, 1]), 64), Err(PlaceError::NotHyperbolic));
        assert_eq!(classify_places(&ap(&[-1, 0, 1]), 64), Err(PlaceError::NotIrreducible));
    }

    #[test]
    fn hensel_root_annihilates() {
        let f = ap(&[6, 5, 0, 12]);
        let Ok(pc) = classify_places(&f, 128) else { return };
        for np in &pc.nonarchimedean {
            for r in &np.local_roots {
                let mut acc = PadicNumber::zero(np.prime, 200);
                for (i, c) in f.coeffs().iter().enumerate() {
                    acc = acc.add(&PadicNumber::from_integer(c, np.prime, 64).mul(&r.pow(i as i64)));
                }
                assert!(acc.is_zero() || acc.valuation() >= 64 - 8, "{acc}");
            }
        }
    }

    #[test]
    fn series_examples() {
        let f = ap(&[-1, 2]);
        let pc = classify_places(&f, 128).unwrap();
        let ones_right = DigitSeries { right: Some(Tail { start: 1, pattern: vec![1] }), ..Default::default() };
        match evaluate_series_at_place(&ones_right, &pc, PlaceRef::Arch(0)).unwrap() {
            PlaceValue::Arch { value, error } => assert!((value.re - 1.0).abs() <= error + 1e-15),
            _ => panic!(),
        }
        let ones_left = DigitSeries { left: Some(Tail { start: 0, pattern: vec![1] }), ..Default::default() };
        let place = PlaceRef::NonArch { entry: 0, root: 0 };
        match evaluate_series_at_place(&ones_left, &pc, place).unwrap() {
            PlaceValue::Padic(x) => {
                assert_eq!(x.valuation(), 0);
                assert!(x.digits().iter().all(|&d| d == 1));
            }
            _ => panic!(),
        }
        assert_eq!(evaluate_series_at_place(&ones_left, &pc, PlaceRef::Arch(0)), Err(PlaceError::DivergentDirection));
        assert_eq!(evaluate_series_at_place(&ones_right, &pc, place), Err(PlaceError::DivergentDirection));
        let empty = DigitSeries::default();
        for pl in pc.place_refs() {
            match evaluate_series_at_place(&empty, &pc, pl).unwrap() {
                PlaceValue::Arch { value, .. } => assert_eq!(value, Complex64::zero()),
                PlaceValue::Padic(x) => assert!(x.is_zero()),
            }
        }
    }

    fn examples() -> Vec<AssociatedPoly> {
        vec![ap(&[-1, 2]), ap(&[-1, 2, 1]), ap(&[-1, 3, 2]), ap(&[-3, 2]), ap(&[3, -1, 0, 5])]
    }

    proptest! {
        #[test]
        fn kernel_containment(g in prop::collection::vec(-5i64..6, 1..4), shift in -3i64..3, which in 0usize..5) {
            let f = examples()[which].clone();
            let Ok(pc) = classify_places(&f, 128) else { return Ok(()) };
            let gp = IntLaurentPoly::from_ascending(shift, &g);
            let s = DigitSeries::finite(f.to_laurent().mul(&gp));
            for pl in pc.place_refs() {
                match evaluate_series_at_place(&s, &pc, pl).unwrap() {
                    PlaceValue::Arch { value, error } => prop_assert!(value.norm() <= error * 4.0 + 1e-12),
                    PlaceValue::Padic(x) => prop_assert!(x.is_zero() || x.valuation() >= 64 - 16),
                }
            }
        }

        #[test]
        fn additivity(a in prop::collection::vec(0i64..4, 1..5), b in prop::collection::vec(0i64..4, 1..5)) {
            let f = ap(&[-1, 3, 2]);
            let pc = classify_places(&f, 128).unwrap();
            let sa = IntLaurentPoly::from_ascending(-2, &a);
            let sb = IntLaurentPoly::from_ascending(10, &b);
            for pl in pc.place_refs() {
                let e = |p: &IntLaurentPoly| evaluate_series_at_place(&DigitSeries::finite(p.clone()), &pc, pl).unwrap();
                match (e(&sa), e(&sb), e(&sa.add(&sb))) {
                    (PlaceValue::Arch { value: x, error: ex }, PlaceValue::Arch { value: y, error: ey }, PlaceValue::Arch { value: z, error: ez }) => {
                        prop_assert!((x + y - z).norm() <= ex + ey + ez + 1e-12);
                    }
                    (PlaceValue::Padic(x), PlaceValue::Padic(y), PlaceValue::Padic(z)) => {
                        prop_assert!(x.add(&y).sub(&z).is_zero());
                    }
                    _ => prop_assert!(false),
                }
            }
        }
    }
}
