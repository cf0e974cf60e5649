//! The natural coding of the two-sided β-shift onto the phase space: stable
//! and unstable evaluations, reduction to the fundamental domain, the exact
//! kernel on periodic points, collision sampling, the PV decay check and the
//! additive flow.

use std::collections::{BTreeSet, HashMap, HashSet};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::beta::{
    build_automaton, fin_add, greedy_expand, parry_data, BetaDigits, BetaError, ParryAutomaton, ParryData,
    DEFAULT_PERIOD_CAP,
};
use crate::numfield::{BetaContext, FieldElem, FieldError};
use crate::padic::{mod_inverse, pow_p, valuation_int, PadicNumber, PadicSerial};
use crate::places::{
    classify_places_with, evaluate_series_at_place, is_hyperbolic, pisot_classify, DigitSeries, PisotSide,
    PlaceClassification, PlaceError, PlaceRef, PlaceValue, Tag, Tail,
};
use crate::polyring::{
    annulus_decay_rate, inverse_laurent_coeffs, reciprocal_poly, AssociatedPoly, IntLaurentPoly, PolyError,
    RealLaurentWindow,
};
use crate::roots::{isolate_roots, round_dyadic};
use crate::shift::{enumerate_periodic, window_admissible, BiSequence, PeriodicSequence, ShiftError};

/// Integer parts closer than this to an integer are rounded to it.
pub const SNAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodingError {
    #[error("polynomial is not hyperbolic")]
    NotHyperbolic,
    #[error("polynomial has no Pisot root on either side")]
    NotPisot,
    #[error(transparent)]
    Place(#[from] PlaceError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Beta(#[from] BetaError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("flanking zero blocks too short: need {needed}, have {left} on the left and {right} on the right")]
    GapConditionUnmet { needed: i64, left: i64, right: i64 },
    #[error("sequence is not admissible")]
    Inadmissible,
    #[error("additive flow needs a sequence without periodic tails")]
    HasTails,
    #[error("greedy expansion of the increment does not terminate")]
    NonTerminating,
    #[error("p-adic reduction failed at the prime {0}")]
    Reduction(u64),
}

/// Window of the Laurent coefficients of `1/f` on the unit annulus.
#[derive(Clone, Debug, PartialEq)]
pub struct HomoclinicSeq {
    pub window: RealLaurentWindow,
    pub decay_rate: f64,
}

impl HomoclinicSeq {
    pub fn coeff(&self, n: i64) -> f64 {
        self.window.coeff(n)
    }

    /// Coefficient reduced into `[0, 1)`.
    pub fn coeff_mod1(&self, n: i64) -> f64 {
        self.coeff(n).rem_euclid(1.0)
    }

    /// `f · w` on the window, which should be the delta at 0 away from the edges.
    pub fn convolve(&self, f: &AssociatedPoly) -> RealLaurentWindow {
        self.window.convolve_int(&f.coeffs_f64(), 0)
    }
}

pub fn homoclinic_fundamental(
    f: &AssociatedPoly,
    window: (i64, i64),
    precision_bits: u32,
) -> Result<HomoclinicSeq, CodingError> {
    if !is_hyperbolic(f).hyperbolic {
        return Err(CodingError::NotHyperbolic);
    }
    let w = inverse_laurent_coeffs(f, window, precision_bits)?;
    let rs = isolate_roots(f, precision_bits).map_err(|_| PolyError::PrecisionExhausted)?;
    Ok(HomoclinicSeq { window: w, decay_rate: annulus_decay_rate(&rs) })
}

/// Point of the phase space: one coordinate per archimedean place and per
/// evaluable p-adic place, in the order of [`CodingSystem::padic_places`].
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub arch: Vec<Complex64>,
    pub padic: Vec<PadicNumber>,
    pub reduced: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhasePointSerial {
    pub arch: Vec<String>,
    pub padic: Vec<PadicSerial>,
    pub reduced: bool,
}

impl PhasePoint {
    /// Largest modulus of an archimedean coordinate.
    pub fn arch_norm(&self) -> f64 {
        self.arch.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn padic_is_zero(&self) -> bool {
        self.padic.iter().all(PadicNumber::is_zero)
    }

    pub fn to_serial(&self, digits: usize) -> PhasePointSerial {
        let arch = self
            .arch
            .iter()
            .map(|z| {
                if z.im == 0.0 {
                    format!("{:.*e}", digits, z.re)
                } else {
                    format!("{:.*e}{:+.*e}i", digits, z.re, digits, z.im)
                }
            })
            .collect();
        PhasePointSerial { arch, padic: self.padic.iter().map(PadicNumber::to_serial).collect(), reduced: self.reduced }
    }
}

/// An evaluable p-adic place: a root of the coding polynomial in `ℚ_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct PadicPlace {
    pub entry: usize,
    pub root: usize,
    pub prime: u64,
    pub slope: Rational64,
    pub tag: Tag,
    pub rho: PadicNumber,
    pub beta: PadicNumber,
}

/// Sign `σ` of the diagonal: reduction adds `σ_v q` at place `v`.
fn sigma(tag: Tag) -> i64 {
    match tag {
        Tag::Unstable => 1,
        Tag::Stable => -1,
    }
}

type CQ = (BigRational, BigRational);

fn cq_mul(a: &CQ, b: &CQ) -> CQ {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

fn cq_f64(a: &CQ) -> Complex64 {
    Complex64::new(a.0.to_f64().unwrap_or(f64::NAN), a.1.to_f64().unwrap_or(f64::NAN))
}

fn snap_floor(t: f64) -> f64 {
    let r = t.round();
    if (t - r).abs() < SNAP_TOLERANCE {
        r
    } else {
        t.floor()
    }
}

/// `{x}_p`: the p-adic fractional part, a rational in `[0, 1)` with
/// denominator a power of `p`.
fn padic_fraction(x: &PadicNumber) -> f64 {
    let v = x.valuation();
    if x.is_zero() || v >= 0 {
        return 0.0;
    }
    let k = (-v) as u32;
    let m = pow_p(x.prime(), k.min(x.precision()));
    let r = x.unit().mod_floor(&m);
    let q = BigRational::new(r, pow_p(x.prime(), k));
    q.to_f64().unwrap()
}

/// Solves `A·x ≡ b (mod p^v)` by elimination with minimal-valuation pivots.
fn solve_mod_prime_power(mut a: Vec<Vec<BigInt>>, mut b: Vec<BigInt>, p: u64, v: u32) -> Option<Vec<BigInt>> {
    let modulus = pow_p(p, v);
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let val = |x: &BigInt| if x.is_zero() { i64::MAX } else { valuation_int(x, p) };
    for row in a.iter_mut() {
        for x in row.iter_mut() {
            *x = x.mod_floor(&modulus);
        }
    }
    for x in b.iter_mut() {
        *x = x.mod_floor(&modulus);
    }
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut pivots = Vec::new();
    for t in 0..rows.min(cols) {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let e = val(&a[i][j]);
                if e != i64::MAX && best.is_none_or(|(be, _, _)| e < be) {
                    best = Some((e, i, j));
                }
            }
        }
        let Some((e, i, j)) = best else { break };
        a.swap(t, i);
        b.swap(t, i);
        for row in a.iter_mut() {
            row.swap(t, j);
        }
        perm.swap(t, j);
        let pe = pow_p(p, e as u32);
        let uinv = mod_inverse(&(&a[t][t] / &pe), &modulus)?;
        for i in t + 1..rows {
            if a[i][t].is_zero() {
                continue;
            }
            let factor = ((&a[i][t] / &pe) * &uinv).mod_floor(&modulus);
            for j in t..cols {
                let sub = &factor * &a[t][j];
                a[i][j] = (&a[i][j] - sub).mod_floor(&modulus);
            }
            b[i] = (&b[i] - &factor * &b[t]).mod_floor(&modulus);
        }
        pivots.push((e, uinv));
    }
    let r = pivots.len();
    if b[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut x = vec![BigInt::zero(); cols];
    for t in (0..r).rev() {
        let (e, uinv) = &pivots[t];
        let mut rhs = b[t].clone();
        for j in t + 1..cols {
            rhs -= &a[t][j] * &x[j];
        }
        let rhs = rhs.mod_floor(&modulus);
        let pe = pow_p(p, *e as u32);
        if !rhs.is_multiple_of(&pe) {
            return None;
        }
        x[t] = ((rhs / &pe) * uinv).mod_floor(&modulus);
    }
    let mut out = vec![BigInt::zero(); cols];
    for (t, &c) in perm.iter().enumerate() {
        let y = &x[t];
        out[c] = if y * 2 > modulus { y - &modulus } else { y.clone() };
    }
    Some(out)
}

/// Result of [`CodingSystem::reduce_fundamental`]: the reduced point and the
/// element `q` whose diagonal image was added.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub point: PhasePoint,
    pub q: FieldElem,
}

/// One identified pair of sampled sequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Collision {
    pub a: String,
    pub b: String,
    pub kernel_explained: bool,
    pub witness: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollisionReport {
    pub samples: usize,
    pub distinct: usize,
    pub window: (i64, i64),
    pub epsilon: f64,
    pub seed: u64,
    pub collisions: Vec<Collision>,
    pub collision_count: usize,
    pub kernel_explained: usize,
    pub unexplained: usize,
    pub witnesses_injected: usize,
    pub witnesses_detected: usize,
    pub measure: String,
    pub lattice: String,
}

#[derive(Clone, Debug)]
pub struct SampleConfig {
    pub samples: usize,
    pub window: (i64, i64),
    pub epsilon: f64,
    pub seed: u64,
    pub threads: usize,
    /// Number of tail-rewrite witness pairs to inject.
    pub witnesses: usize,
    /// Also inject the pairs (zero, nonzero kernel point of period ≤ 2).
    pub kernel_pairs: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { samples: 500, window: (-12, 12), epsilon: 1e-6, seed: 0, threads: 1, witnesses: 0, kernel_pairs: false }
    }
}

/// Decay of `‖tβⁿ‖`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PvReport {
    pub distances: Vec<f64>,
    /// Fitted `exp(slope)` of `ln ‖tβⁿ‖`; 0 when every distance vanishes.
    pub fitted_rate: f64,
    /// Largest modulus of a conjugate other than β.
    pub conjugate_modulus: f64,
    pub constant: f64,
    pub exponent_error: f64,
    pub pass: bool,
}

/// The coding `S_β → Γ` of one Pisot polynomial.
#[derive(Clone, Debug)]
pub struct CodingSystem {
    poly: AssociatedPoly,
    flipped: bool,
    places: PlaceClassification,
    ctx: BetaContext,
    parry: ParryData,
    automaton: ParryAutomaton,
    bits: u32,
    arch_beta: Vec<CQ>,
    padic: Vec<PadicPlace>,
    basis: DMatrix<f64>,
    basis_inv: DMatrix<f64>,
}

impl CodingSystem {
    /// Sets up the coding for `f`. When the Pisot root is a root of `f`
    /// itself, the coding uses the reciprocal polynomial.
    pub fn new(f: &AssociatedPoly, bits: u32, padic_digits: u32) -> Result<Self, CodingError> {
        if !is_hyperbolic(f).hyperbolic {
            return Err(CodingError::NotHyperbolic);
        }
        let (poly, flipped) = match pisot_classify(f, bits).side {
            PisotSide::Reciprocal => (f.clone(), false),
            PisotSide::Direct => (reciprocal_poly(f), true),
            PisotSide::None => return Err(CodingError::NotPisot),
        };
        let places = classify_places_with(&poly, bits, padic_digits)?;
        let monic = places.pisot.monic.clone().ok_or(CodingError::NotPisot)?;
        let ctx = BetaContext::new(&monic)?;
        let parry = parry_data(&ctx, DEFAULT_PERIOD_CAP)?;
        let automaton = build_automaton(&parry);
        let prec = bits + 64;
        let arch_beta = places
            .archimedean
            .iter()
            .map(|ap| {
                let (re, im) = (&ap.root.re, &ap.root.im);
                let n = re * re + im * im;
                (round_dyadic(&(re / &n), prec), round_dyadic(&(-im / &n), prec))
            })
            .collect();
        let mut padic = Vec::new();
        for (entry, np) in places.nonarchimedean.iter().enumerate() {
            for (root, rho) in np.local_roots.iter().enumerate() {
                padic.push(PadicPlace {
                    entry,
                    root,
                    prime: np.prime,
                    slope: np.slope,
                    tag: np.tag,
                    rho: rho.clone(),
                    beta: rho.inv().ok_or(PlaceError::HenselFailure(np.prime))?,
                });
            }
        }
        let mut sys = Self {
            poly,
            flipped,
            places,
            ctx,
            parry,
            automaton,
            bits,
            arch_beta,
            padic,
            basis: DMatrix::zeros(0, 0),
            basis_inv: DMatrix::zeros(0, 0),
        };
        let d = sys.ctx.degree();
        let cols: Vec<Vec<f64>> = (0..d as i64)
            .map(|i| {
                let z = sys.embed_arch(&sys.ctx.beta_pow(i));
                sys.coords(&sys.diag_arch(&z, -1.0))
            })
            .collect();
        let rows = cols.first().map_or(0, Vec::len);
        sys.basis = DMatrix::from_fn(rows, d, |r, c| cols[c][r]);
        sys.basis_inv = sys.basis.clone().try_inverse().ok_or(PlaceError::PrecisionExhausted)?;
        Ok(sys)
    }

    /// The polynomial whose roots are the place values (`f` or its reciprocal).
    pub fn poly(&self) -> &AssociatedPoly {
        &self.poly
    }

    pub fn flipped(&self) -> bool {
        self.flipped
    }

    pub fn places(&self) -> &PlaceClassification {
        &self.places
    }

    pub fn context(&self) -> &BetaContext {
        &self.ctx
    }

    pub fn parry(&self) -> &ParryData {
        &self.parry
    }

    pub fn automaton(&self) -> &ParryAutomaton {
        &self.automaton
    }

    pub fn padic_places(&self) -> &[PadicPlace] {
        &self.padic
    }

    /// Whether every p-adic place of the classification could be evaluated.
    pub fn complete(&self) -> bool {
        !self.places.has_unevaluable()
    }

    /// Real coordinates of the archimedean block: `Re` for a real place,
    /// `(Re, Im)` for a complex one.
    fn coords(&self, z: &[Complex64]) -> Vec<f64> {
        let mut out = Vec::new();
        for (ap, v) in self.places.archimedean.iter().zip(z) {
            out.push(v.re);
            if !ap.is_real() {
                out.push(v.im);
            }
        }
        out
    }

    /// `s · σ_v z_v` at every archimedean place.
    fn diag_arch(&self, z: &[Complex64], s: f64) -> Vec<Complex64> {
        self.places.archimedean.iter().zip(z).map(|(ap, v)| v * (s * sigma(ap.tag) as f64)).collect()
    }

    fn embed_arch_exact(&self, x: &FieldElem) -> Vec<CQ> {
        let prec = self.bits + 64;
        self.arch_beta
            .iter()
            .map(|b| {
                let mut acc: CQ = (BigRational::zero(), BigRational::zero());
                for c in x.coeffs().iter().rev() {
                    acc = cq_mul(&acc, b);
                    acc.0 = round_dyadic(&(&acc.0 + c), prec);
                    acc.1 = round_dyadic(&acc.1, prec);
                }
                acc
            })
            .collect()
    }

    /// Images of `x ∈ ℚ(β)` at the archimedean places.
    pub fn embed_arch(&self, x: &FieldElem) -> Vec<Complex64> {
        self.embed_arch_exact(x).iter().map(cq_f64).collect()
    }

    /// Images of `x ∈ ℚ(β)` at the p-adic places.
    pub fn embed_padic(&self, x: &FieldElem) -> Vec<PadicNumber> {
        let digits = self.places.padic_digits;
        self.padic
            .iter()
            .map(|pl| {
                let mut acc = PadicNumber::zero(pl.prime, digits as i64 + 64);
                for c in x.coeffs().iter().rev() {
                    acc = acc.mul(&pl.beta).add(&PadicNumber::from_rational(c, pl.prime, digits));
                }
                acc
            })
            .collect()
    }

    /// The diagonal image of `q`: `q` at stable places, `−q` at unstable ones.
    pub fn diagonal_point(&self, q: &FieldElem) -> PhasePoint {
        let arch = self.diag_arch(&self.embed_arch(q), -1.0);
        let padic = self
            .embed_padic(q)
            .into_iter()
            .zip(&self.padic)
            .map(|(x, pl)| if sigma(pl.tag) > 0 { x.neg() } else { x })
            .collect();
        PhasePoint { arch, padic, reduced: false }
    }

    /// Exact `(c⁺, c⁻) = (Σ_{n≥1} s_n β^{−n}, Σ_{n≤0} s_n β^{−n})` as rational
    /// functions of β; tails are summed as geometric series.
    pub fn exact_coordinates(&self, s: &BiSequence) -> (FieldElem, FieldElem) {
        let f = self.ctx.field();
        let w = s.widen(0, 1);
        let mut plus = IntLaurentPoly::zero();
        let mut minus = IntLaurentPoly::zero();
        for n in w.n_min..=w.n_max() {
            let d = w.digit(n);
            if d != 0 {
                let target = if n >= 1 { &mut plus } else { &mut minus };
                target.add_term(-n, &BigInt::from(d));
            }
        }
        let mut cp = f.from_laurent(&plus);
        let mut cm = f.from_laurent(&minus);
        let one = f.one();
        if let Some(p) = w.right.as_ref().filter(|p| p.iter().any(|&d| d != 0)) {
            let head = f.from_laurent(&IntLaurentPoly::from_terms(p.iter().enumerate().map(|(k, &d)| (-(k as i64), d))));
            let den = f.sub(&one, &self.ctx.beta_pow(-(p.len() as i64)));
            let t = f.mul(&self.ctx.beta_pow(-(w.n_max() + 1)), &f.div(&head, &den).unwrap());
            cp = f.add(&cp, &t);
        }
        if let Some(p) = w.left.as_ref().filter(|p| p.iter().any(|&d| d != 0)) {
            let head = f.from_laurent(&IntLaurentPoly::from_terms(p.iter().enumerate().map(|(k, &d)| (k as i64, d))));
            let den = f.sub(&one, &self.ctx.beta_pow(p.len() as i64));
            let t = f.mul(&self.ctx.beta_pow(1 - w.n_min), &f.div(&head, &den).unwrap());
            cm = f.add(&cm, &t);
        }
        (cp, cm)
    }

    /// Whether the sequence codes to the identity: `c⁺ ∈ ℤ[β, β⁻¹]` and
    /// `c⁻ = −c⁺`, decided exactly.
    pub fn codes_to_zero(&self, s: &BiSequence) -> bool {
        let (cp, cm) = self.exact_coordinates(s);
        self.ctx.field().add(&cp, &cm).is_zero() && self.ctx.in_zbeta(&cp)
    }

    /// Stable and unstable evaluations of `s`, before reduction.
    pub fn code_raw(&self, s: &BiSequence) -> Result<PhasePoint, CodingError> {
        let w = s.widen(0, 1);
        let mut plus = IntLaurentPoly::zero();
        let mut minus = IntLaurentPoly::zero();
        for n in w.n_min..=w.n_max() {
            let d = w.digit(n);
            if d != 0 {
                let target = if n >= 1 { &mut plus } else { &mut minus };
                target.add_term(n, &BigInt::from(d));
            }
        }
        let pattern = |t: &Option<Vec<u32>>| t.as_ref().map(|p| p.iter().map(|&d| d as i64).collect::<Vec<i64>>());
        let stable = DigitSeries {
            finite: plus,
            right: pattern(&w.right).map(|pattern| Tail { start: w.n_max() + 1, pattern }),
            left: None,
        };
        let unstable = DigitSeries {
            finite: minus,
            right: None,
            left: pattern(&w.left).map(|pattern| Tail { start: w.n_min - 1, pattern }),
        };
        let pick = |tag: Tag| if tag == Tag::Stable { &stable } else { &unstable };
        let mut arch = Vec::new();
        for (i, ap) in self.places.archimedean.iter().enumerate() {
            match evaluate_series_at_place(pick(ap.tag), &self.places, PlaceRef::Arch(i))? {
                PlaceValue::Arch { value, .. } => arch.push(value),
                PlaceValue::Padic(_) => unreachable!(),
            }
        }
        let mut padic = Vec::new();
        for pl in &self.padic {
            let place = PlaceRef::NonArch { entry: pl.entry, root: pl.root };
            match evaluate_series_at_place(pick(pl.tag), &self.places, place)? {
                PlaceValue::Padic(x) => padic.push(x),
                PlaceValue::Arch { .. } => unreachable!(),
            }
        }
        Ok(PhasePoint { arch, padic, reduced: false })
    }

    /// The coded point of `s`, reduced to the fundamental domain.
    pub fn code_sequence(&self, s: &BiSequence) -> Result<PhasePoint, CodingError> {
        Ok(self.reduce_fundamental(&self.code_raw(s)?)?.point)
    }

    fn padic_step(&self, padic: &mut [PadicNumber], prime: u64) -> Result<FieldElem, CodingError> {
        let f = self.ctx.field();
        let idx: Vec<usize> = (0..self.padic.len()).filter(|&i| self.padic[i].prime == prime).collect();
        let deficit = idx.iter().map(|&i| if padic[i].is_zero() { 0 } else { -padic[i].valuation() }).max().unwrap_or(0);
        if deficit <= 0 {
            return Ok(f.zero());
        }
        let slope = |pl: &PadicPlace| pl.slope.abs().to_f64().unwrap();
        let min_slope = idx.iter().map(|&i| slope(&self.padic[i])).fold(f64::INFINITY, f64::min);
        let d = self.ctx.degree() as i64;
        let mut k = (deficit as f64 / min_slope).ceil() as i64 + d + 1;
        for _ in 0..5 {
            let mut m = BigInt::one();
            let mut others: Vec<u64> =
                self.padic.iter().filter(|pl| pl.prime != prime).map(|pl| pl.prime).collect();
            others.dedup();
            for &p2 in &others {
                let s = self.padic.iter().filter(|pl| pl.prime == p2).map(slope).fold(0.0, f64::max);
                m *= pow_p(p2, (k as f64 * s).ceil() as u32);
            }
            let digits = self.places.padic_digits;
            let cols: Vec<i64> = (-k..=k).collect();
            let entries: Vec<Vec<PadicNumber>> = idx
                .iter()
                .map(|&i| {
                    let pl = &self.padic[i];
                    let scale = PadicNumber::from_integer(&(&m * sigma(pl.tag)), prime, digits);
                    cols.iter().map(|&j| scale.mul(&pl.beta.pow(j))).collect()
                })
                .collect();
            let v = entries
                .iter()
                .flatten()
                .filter(|x| !x.is_zero())
                .map(|x| -x.valuation())
                .fold(deficit, i64::max)
                .max(0) as u32;
            let pv = PadicNumber::from_integer(&pow_p(prime, v), prime, digits);
            let res = |x: &PadicNumber| x.mul(&pv).residue(v).ok_or(CodingError::Reduction(prime));
            let a = entries.iter().map(|row| row.iter().map(res).collect()).collect::<Result<Vec<Vec<BigInt>>, _>>()?;
            let b = idx.iter().map(|&i| res(&padic[i].neg())).collect::<Result<Vec<BigInt>, _>>()?;
            if let Some(n) = solve_mod_prime_power(a, b, prime, v) {
                let mut q = f.zero();
                for (&j, c) in cols.iter().zip(&n) {
                    if !c.is_zero() {
                        q = f.add(&q, &f.scale(&self.ctx.beta_pow(j), &BigRational::from_integer(c * &m)));
                    }
                }
                for ((x, e), pl) in padic.iter_mut().zip(self.embed_padic(&q)).zip(&self.padic) {
                    *x = if sigma(pl.tag) > 0 { x.add(&e) } else { x.sub(&e) };
                }
                return Ok(q);
            }
            k *= 2;
        }
        Err(CodingError::Reduction(prime))
    }

    /// Adds the diagonal image of some `q ∈ ℤ[β, β⁻¹]` so that every p-adic
    /// coordinate lies in `ℤ_p` and the archimedean block lies in the
    /// fundamental parallelepiped of `ℤ[β]`.
    pub fn reduce_fundamental(&self, p: &PhasePoint) -> Result<Reduction, CodingError> {
        let f = self.ctx.field();
        let mut padic = p.padic.clone();
        let mut primes: Vec<u64> = self.padic.iter().map(|pl| pl.prime).collect();
        primes.dedup();
        let mut q = f.zero();
        for prime in primes {
            let qp = self.padic_step(&mut padic, prime)?;
            q = f.add(&q, &qp);
        }
        let y = self.coords(&p.arch);
        let shifted = self.coords(&self.diag_arch(&self.embed_arch(&q), 1.0));
        let target: Vec<f64> = y.iter().zip(&shifted).map(|(a, b)| a + b).collect();
        let t = &self.basis_inv * nalgebra::DVector::from_vec(target);
        let z: Vec<BigInt> = t.iter().map(|&x| BigInt::from_f64(snap_floor(x)).unwrap_or_default()).collect();
        let zf = f.from_ints(&z);
        let w = f.add(&q, &zf);
        let exact = self.embed_arch_exact(&w);
        let arch = self
            .places
            .archimedean
            .iter()
            .zip(&p.arch)
            .zip(&exact)
            .map(|((ap, y), e)| {
                let s = BigRational::from_integer(sigma(ap.tag).into());
                let re = BigRational::from_float(y.re).unwrap() + &s * &e.0;
                let im = BigRational::from_float(y.im).unwrap() + &s * &e.1;
                cq_f64(&(re, im))
            })
            .collect();
        for ((x, e), pl) in padic.iter_mut().zip(self.embed_padic(&zf)).zip(&self.padic) {
            *x = if sigma(pl.tag) > 0 { x.add(&e) } else { x.sub(&e) };
        }
        Ok(Reduction { point: PhasePoint { arch, padic, reduced: true }, q: w })
    }

    /// Admissible periodic sequences of period at most `max_period` that code
    /// to the identity, decided by exact arithmetic in `ℚ(β)`.
    pub fn kernel_periodic(&self, max_period: usize) -> Result<Vec<PeriodicSequence>, CodingError> {
        let mut out: Vec<PeriodicSequence> = enumerate_periodic(&self.parry, max_period)?
            .into_iter()
            .filter(|p| self.codes_to_zero(&p.to_bisequence()))
            .collect();
        out.sort();
        Ok(out)
    }

    /// Rewrites the last nonzero digit `a` of a finite sequence as `a − 1`
    /// followed by the tail `d*(1)`, which has the same value.
    pub fn tail_rewrite(&self, s: &BiSequence) -> Option<BiSequence> {
        let (_, j) = s.support()?;
        let (pre, per) = self.parry.dstar_word();
        let mut digits = s.slice(s.n_min, j);
        *digits.last_mut().unwrap() -= 1;
        digits.extend_from_slice(&pre);
        let out = BiSequence { n_min: s.n_min, digits, left: None, right: Some(per) };
        window_admissible(&out, &self.parry).then_some(out)
    }

    /// Uniform random admissible word on the window, by automaton path counts.
    fn sample(&self, window: (i64, i64), counts: &[Vec<f64>], seed: u64, stream: u64) -> BiSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let len = (window.1 - window.0 + 1) as usize;
        let mut state = self.automaton.initial;
        let mut digits = Vec::with_capacity(len);
        for k in 0..len {
            let rest = len - k - 1;
            let mut u = rng.gen::<f64>() * counts[rest + 1][state];
            let mut pick = None;
            for (d, t) in self.automaton.transitions[state].iter().enumerate() {
                if let Some(t) = *t {
                    pick = Some((d as u32, t));
                    u -= counts[rest][t];
                    if u < 0.0 {
                        break;
                    }
                }
            }
            let (d, t) = pick.expect("every state has a successor");
            digits.push(d);
            state = t;
        }
        BiSequence::window(window.0, digits)
    }

    /// Samples admissible windowed sequences, codes them and reports pairs
    /// whose reduced points agree within `ε` up to a lattice translate.
    pub fn almost_one_one_sample(&self, cfg: &SampleConfig) -> Result<CollisionReport, CodingError> {
        let len = (cfg.window.1 - cfg.window.0 + 1).max(1) as usize;
        let counts = self.automaton.path_counts(len);
        let threads = cfg.threads.max(1);
        let chunk = cfg.samples.div_ceil(threads).max(1);
        let drawn: Vec<BiSequence> = std::thread::scope(|sc| {
            let handles: Vec<_> = (0..cfg.samples)
                .step_by(chunk)
                .map(|lo| {
                    let hi = (lo + chunk).min(cfg.samples);
                    let counts = &counts;
                    sc.spawn(move || {
                        (lo..hi).map(|i| self.sample(cfg.window, counts, cfg.seed, i as u64)).collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
        });
        let mut index: HashMap<BiSequence, usize> = HashMap::new();
        let mut seqs: Vec<BiSequence> = Vec::new();
        let mut intern = |s: BiSequence, seqs: &mut Vec<BiSequence>| {
            *index.entry(s.normalized()).or_insert_with(|| {
                seqs.push(s);
                seqs.len() - 1
            })
        };
        for s in drawn {
            intern(s, &mut seqs);
        }
        let distinct = seqs.len();
        let mut pairs = Vec::new();
        for i in 0..distinct {
            if pairs.len() >= cfg.witnesses {
                break;
            }
            if let Some(w) = self.tail_rewrite(&seqs[i]) {
                pairs.push((seqs[i].clone(), w));
            }
        }
        if cfg.kernel_pairs {
            for k in self.kernel_periodic(2)? {
                if !k.is_zero() {
                    pairs.push((BiSequence::zero(), k.to_bisequence()));
                }
            }
        }
        let mut witness_index = Vec::new();
        for (a, b) in &pairs {
            let i = intern(a.clone(), &mut seqs);
            let j = intern(b.clone(), &mut seqs);
            witness_index.push((i.min(j), i.max(j)));
        }
        let points: Vec<PhasePoint> = std::thread::scope(|sc| {
            let chunk = seqs.len().div_ceil(threads).max(1);
            let handles: Vec<_> = seqs
                .chunks(chunk)
                .map(|part| sc.spawn(move || part.iter().map(|s| self.code_sequence(s)).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().unwrap()).collect::<Result<Vec<_>, _>>()
        })?;
        let found = self.find_collisions(&points, cfg.epsilon);
        let witness_set: HashSet<(usize, usize)> = witness_index.iter().copied().collect();
        let mut collisions = Vec::new();
        let (mut explained, mut unexplained, mut detected) = (0, 0, 0);
        let f = self.ctx.field();
        for &(i, j) in &found {
            if seqs[i].normalized() == seqs[j].normalized() {
                continue;
            }
            let (ap, am) = self.exact_coordinates(&seqs[i]);
            let (bp, bm) = self.exact_coordinates(&seqs[j]);
            let dp = f.sub(&ap, &bp);
            let dm = f.sub(&am, &bm);
            let ok = f.add(&dp, &dm).is_zero() && self.ctx.in_zbeta(&dp);
            let witness = witness_set.contains(&(i, j));
            if ok {
                explained += 1;
                detected += witness as usize;
            } else {
                unexplained += 1;
            }
            collisions.push(Collision {
                a: seqs[i].normalized().to_string(),
                b: seqs[j].normalized().to_string(),
                kernel_explained: ok,
                witness,
            });
        }
        let collision_count = collisions.len();
        collisions.truncate(64);
        Ok(CollisionReport {
            samples: cfg.samples,
            distinct,
            window: cfg.window,
            epsilon: cfg.epsilon,
            seed: cfg.seed,
            collisions,
            collision_count,
            kernel_explained: explained,
            unexplained,
            witnesses_injected: pairs.len(),
            witnesses_detected: detected,
            measure: "uniform path measure on the Parry automaton".into(),
            lattice: "order Z[beta] with basis 1, beta, ..., beta^(d-1)".into(),
        })
    }

    /// Pairs `(i, j)`, `i < j`, of points that agree within `ε` after a
    /// translate by `Σ c_k β^k`, `c_k ∈ {−1, 0, 1}`.
    fn find_collisions(&self, points: &[PhasePoint], eps: f64) -> BTreeSet<(usize, usize)> {
        let f = self.ctx.field();
        let d = self.ctx.degree();
        let digits: Vec<u32> = self
            .padic
            .iter()
            .map(|pl| ((1.0 / eps).ln() / (pl.prime as f64).ln()).ceil().max(1.0) as u32)
            .collect();
        let mut translates = Vec::new();
        for code in 0..3usize.pow(d as u32) {
            let mut c = code;
            let ints: Vec<BigInt> = (0..d)
                .map(|_| {
                    let v = (c % 3) as i64 - 1;
                    c /= 3;
                    BigInt::from(v)
                })
                .collect();
            let z = f.from_ints(&ints);
            let arch = self.coords(&self.diag_arch(&self.embed_arch(&z), 1.0));
            let padic: Vec<PadicNumber> = self
                .embed_padic(&z)
                .into_iter()
                .zip(&self.padic)
                .map(|(x, pl)| if sigma(pl.tag) > 0 { x } else { x.neg() })
                .collect();
            translates.push((arch, padic));
        }
        let residues = |padic: &[PadicNumber]| -> Vec<Option<BigInt>> {
            padic.iter().zip(&digits).map(|(x, &k)| x.residue(k.min(x.abs_precision().max(0) as u32))).collect()
        };
        let cell = |c: &[f64]| -> Vec<i64> { c.iter().map(|x| (x / eps).floor() as i64).collect() };
        let dims = self.basis.nrows();
        let mut bins: HashMap<(Vec<i64>, Vec<Option<BigInt>>), Vec<usize>> = HashMap::new();
        let mut out = BTreeSet::new();
        let coords: Vec<Vec<f64>> = points.iter().map(|p| self.coords(&p.arch)).collect();
        for (j, p) in points.iter().enumerate() {
            for (ta, tp) in &translates {
                let moved: Vec<f64> = coords[j].iter().zip(ta).map(|(a, b)| a + b).collect();
                let mp: Vec<PadicNumber> = p.padic.iter().zip(tp).map(|(a, b)| a.add(b)).collect();
                let res = residues(&mp);
                let base = cell(&moved);
                for code in 0..3usize.pow(dims as u32) {
                    let mut c = code;
                    let key: Vec<i64> = base
                        .iter()
                        .map(|&b| {
                            let off = (c % 3) as i64 - 1;
                            c /= 3;
                            b + off
                        })
                        .collect();
                    let Some(list) = bins.get(&(key, res.clone())) else { continue };
                    for &i in list {
                        if coords[i].iter().zip(&moved).all(|(a, b)| (a - b).abs() <= eps) {
                            out.insert((i, j));
                        }
                    }
                }
            }
            bins.entry((cell(&coords[j]), residues(&p.padic))).or_default().push(j);
        }
        out
    }

    /// `x_k = ⟨Φ⟩_k`: the `k`-th coordinate in `ℝ/ℤ` of a point of the
    /// solenoid, from the coded point by partial fractions of `1/f`.
    pub fn solenoid_coordinate(&self, p: &PhasePoint, k: i64) -> f64 {
        let g = &self.poly;
        let deriv: Vec<f64> = g.coeffs_f64().iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
        let dval = |z: Complex64| deriv.iter().rev().fold(Complex64::zero(), |acc, &c| acc * z + c);
        let mut x = 0.0;
        for (ap, y) in self.places.archimedean.iter().zip(&p.arch) {
            let rho = ap.value();
            let tau = if ap.tag == Tag::Stable { 1.0 } else { -1.0 };
            let term = rho.powi((-k - 1) as i32) / dval(rho) * y;
            x += tau * ap.root_count as f64 * term.re;
        }
        let digits = self.places.padic_digits;
        for (pl, y) in self.padic.iter().zip(&p.padic) {
            let dv = g
                .coeffs()
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(PadicNumber::zero(pl.prime, digits as i64 + 64), |acc, (i, c)| {
                    acc.mul(&pl.rho).add(&PadicNumber::from_integer(&(c * i), pl.prime, digits))
                });
            let term = pl.rho.pow(-k - 1).mul(y).div(&dv);
            let tau = if pl.tag == Tag::Unstable { 1.0 } else { -1.0 };
            x += tau * padic_fraction(&term);
        }
        x.rem_euclid(1.0)
    }
}

/// Largest modulus of a root of the minimal polynomial other than β.
fn conjugate_modulus(ctx: &BetaContext) -> f64 {
    let Ok(rs) = isolate_roots(ctx.poly(), 64) else { return f64::NAN };
    let mut m: Vec<f64> = rs
        .roots
        .iter()
        .flat_map(|r| std::iter::repeat_n(r.value().norm(), if r.is_real { 1 } else { 2 }))
        .collect();
    m.sort_by(|a, b| b.total_cmp(a));
    m.get(1).copied().unwrap_or(0.0)
}

/// Distances `‖tβⁿ‖` to the nearest integer for `n = 1..=n_max`, with a
/// fitted geometric rate compared against the largest conjugate modulus.
pub fn pv_check(ctx: &BetaContext, t: &FieldElem, n_max: usize) -> PvReport {
    let f = ctx.field();
    let half = f.from_rational(BigRational::new(1.into(), 2.into()));
    let mut x = t.clone();
    let beta = ctx.beta();
    let mut distances = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        x = f.mul(&x, &beta);
        let k = ctx.floor(&f.add(&x, &half));
        let diff = f.sub(&x, &f.from_rational(BigRational::from_integer(k)));
        distances.push(ctx.value(&diff).abs());
    }
    let rho = conjugate_modulus(ctx);
    let pts: Vec<(f64, f64)> = distances
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 0.0)
        .map(|(i, &d)| ((i + 1) as f64, d.ln()))
        .collect();
    if pts.len() < 2 {
        return PvReport {
            distances,
            fitted_rate: 0.0,
            conjugate_modulus: rho,
            constant: 0.0,
            exponent_error: 0.0,
            pass: pts.is_empty(),
        };
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let exponent_error = if rho > 0.0 { ((slope - rho.ln()) / rho.ln()).abs() } else { f64::INFINITY };
    let split = n_max / 2;
    let constant = distances[..split.max(1)]
        .iter()
        .enumerate()
        .map(|(i, d)| d / rho.powi(i as i32 + 1))
        .fold(0.0, f64::max);
    let bounded = distances
        .iter()
        .enumerate()
        .skip(split)
        .all(|(i, d)| *d <= constant * rho.powi(i as i32 + 1) * (1.0 + 1e-6) + 1e-15);
    PvReport {
        distances,
        fitted_rate: slope.exp(),
        conjugate_modulus: rho,
        constant,
        exponent_error,
        pass: exponent_error <= 0.05 && bounded,
    }
}

/// Adds the greedy expansion of `t` to the finite sequence `s`, refusing when
/// the content is not flanked inside the window by `gap` zeros on each side.
pub fn additive_flow_step(
    s: &BiSequence,
    t: &FieldElem,
    ctx: &BetaContext,
    gap: i64,
    depth: i64,
) -> Result<BiSequence, CodingError> {
    if s.has_tails() {
        return Err(CodingError::HasTails);
    }
    let exp = greedy_expand(t, ctx, depth)?;
    if !exp.terminated {
        return Err(CodingError::NonTerminating);
    }
    let td = exp.digits;
    let sd = BetaDigits::from_exponents(
        (s.n_min..=s.n_max()).map(|n| (-n, s.digit(n))).filter(|&(_, d)| d != 0),
    );
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for d in [&sd, &td] {
        if let (Some(h), Some(l)) = (d.high_exponent(), d.low_exponent()) {
            lo = lo.min(-h);
            hi = hi.max(-l);
        }
    }
    if lo > hi {
        return Ok(BiSequence::window(s.n_min, vec![0; s.digits.len()]));
    }
    let (left, right) = (lo - s.n_min, s.n_max() - hi);
    let unmet = CodingError::GapConditionUnmet { needed: gap, left, right };
    if left < gap || right < gap {
        return Err(unmet);
    }
    let (sum, _) = fin_add(&sd, &td, ctx, depth)?;
    let inside = |e: Option<i64>| e.is_none_or(|e| -e >= s.n_min && -e <= s.n_max());
    if !inside(sum.high_exponent()) || !inside(sum.low_exponent()) {
        return Err(unmet);
    }
    Ok(BiSequence::window(s.n_min, (s.n_min..=s.n_max()).map(|n| sum.digit_at_exponent(-n)).collect()))
}

/// Entropy of the algebraic system against the entropy of its β-shift.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyComparison {
    /// Logarithmic Mahler measure of `f`.
    pub mahler: f64,
    pub beta: Option<f64>,
    /// `log β`.
    pub log_beta: Option<f64>,
    /// `log` of the Parry automaton's spectral radius, when β is sofic.
    pub automaton: Option<f64>,
    pub mismatch: bool,
}

/// The β attached to `f`: the Pisot root when one exists, otherwise the
/// largest real root `> 1` of `f` or of its reciprocal.
pub fn beta_context_for(f: &AssociatedPoly, bits: u32) -> Result<BetaContext, FieldError> {
    match pisot_classify(f, bits).monic {
        Some(m) => BetaContext::new(&m),
        None => BetaContext::new(f).or_else(|_| BetaContext::new(&reciprocal_poly(f))),
    }
}

/// Compares `log M(f)` with `log β`, where β is the Pisot root when one
/// exists and otherwise the largest real root `> 1` of `f` or of its
/// reciprocal.
pub fn compare_entropy(f: &AssociatedPoly, bits: u32) -> Result<EntropyComparison, CodingError> {
    let mahler = crate::polyring::mahler_entropy(f, bits)?;
    let Ok(ctx) = beta_context_for(f, bits) else {
        return Ok(EntropyComparison { mahler, beta: None, log_beta: None, automaton: None, mismatch: true });
    };
    let pd = parry_data(&ctx, DEFAULT_PERIOD_CAP).ok();
    let e = crate::shift::shift_entropy(&ctx, pd.as_ref());
    Ok(EntropyComparison {
        mahler,
        beta: Some(ctx.beta_f64()),
        log_beta: Some(e.log_beta),
        automaton: e.automaton,
        mismatch: (mahler - e.log_beta).abs() > 1e-9,
    })
}
