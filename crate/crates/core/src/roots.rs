//! Certified complex root isolation for integer polynomials.
//!
//! Each squarefree factor is seeded with companion-matrix eigenvalues, polished
//! by Aberth iteration in double precision and then refined by Newton steps in
//! dyadic rational arithmetic. A disc of radius `n·|g(z)/g'(z)|` around `z`
//! always contains a root of `g`; pairwise disjoint discs for all `n` roots of a
//! squarefree `g` therefore isolate them. Real roots are counted exactly with a
//! Sturm sequence and certified by a sign change.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::polyring::AssociatedPoly;
use crate::qpoly::{self, QPoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootError {
    #[error("requested precision of {0} bits not reached")]
    PrecisionExhausted(u32),
}

/// Highest precision accepted; beyond it certified radii underflow `f64`.
pub const MAX_PRECISION_BITS: u32 = 480;

#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub re: BigRational,
    pub im: BigRational,
    /// Upper bound on the distance from the centre to the true root.
    pub radius: f64,
    pub multiplicity: usize,
    pub is_real: bool,
}

impl Root {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }

    fn radius_q(&self) -> BigRational {
        BigRational::from_float(self.radius).unwrap_or_else(BigRational::zero)
    }

    /// Certified comparison of `|root|` with 1, or `None` if the disc meets
    /// the unit circle.
    pub fn modulus_cmp_one(&self) -> Option<Ordering> {
        let m2 = &self.re * &self.re + &self.im * &self.im;
        let r = self.radius_q();
        let one = BigRational::one();
        let hi = (&one + &r) * (&one + &r);
        if m2 > hi {
            return Some(Ordering::Greater);
        }
        if r < one {
            let lo = (&one - &r) * (&one - &r);
            if m2 < lo {
                return Some(Ordering::Less);
            }
        }
        None
    }

    /// Certified bounds `[lo, hi]` for a real root.
    pub fn real_interval(&self) -> (BigRational, BigRational) {
        let r = self.radius_q();
        (&self.re - &r, &self.re + &r)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub precision_bits: u32,
}

impl RootSet {
    pub fn count_with_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
}

pub(crate) fn round_dyadic(x: &BigRational, bits: u32) -> BigRational {
    let scaled = x.numer() << bits as usize;
    let d = x.denom();
    let num: BigInt = scaled * 2 + d;
    let n = Integer::div_floor(&num, &(d * 2));
    BigRational::new(n, BigInt::one() << bits as usize)
}

type CQ = (BigRational, BigRational);

fn cq_mul(a: &CQ, b: &CQ) -> CQ {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

fn cq_norm2(a: &CQ) -> BigRational {
    &a.0 * &a.0 + &a.1 * &a.1
}

/// `(g(z), g'(z))` by Horner.
fn eval_with_derivative(g: &[BigRational], z: &CQ) -> (CQ, CQ) {
    let zero = || (BigRational::zero(), BigRational::zero());
    let mut p = zero();
    let mut dp = zero();
    for c in g.iter().rev() {
        let t = cq_mul(&dp, z);
        dp = (t.0 + &p.0, t.1 + &p.1);
        let t = cq_mul(&p, z);
        p = (t.0 + c, t.1);
    }
    (p, dp)
}

fn sqrt_upper(q: &BigRational) -> f64 {
    let v = q.to_f64().unwrap_or(f64::MAX);
    if v <= 0.0 {
        return if q.is_zero() { 0.0 } else { f64::MIN_POSITIVE };
    }
    v.sqrt() * (1.0 + 1e-12) + f64::MIN_POSITIVE
}

fn aberth(coeffs: &[f64], init: &mut [Complex64]) {
    let n = init.len();
    let eval = |z: Complex64| {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    for i in 0..n {
        for j in 0..i {
            if (init[i] - init[j]).norm() < 1e-10 {
                init[i] += Complex64::new(1e-6 * (i as f64 + 1.0), 1e-6);
            }
        }
    }
    for _ in 0..200 {
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = eval(init[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != k).map(|j| (init[k] - init[j]).inv()).sum();
            let w = ratio / (Complex64::one() - ratio * s);
            if w.is_finite() {
                init[k] -= w;
                max_step = max_step.max(w.norm() / init[k].norm().max(1.0));
            }
        }
        if max_step < 1e-16 {
            break;
        }
    }
}

fn initial_approximations(g: &[BigRational]) -> Vec<Complex64> {
    let n = g.len() - 1;
    let lead = g[n].to_f64().unwrap();
    let c: Vec<f64> = g.iter().map(|x| x.to_f64().unwrap() / lead).collect();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i];
    }
    let mut z: Vec<Complex64> = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 1000)
        .map(|s| s.complex_eigenvalues().iter().copied().collect())
        .unwrap_or_default();
    if z.len() != n || z.iter().any(|v| !v.is_finite()) {
        let bound = 1.0 + c.iter().take(n).map(|x| x.abs()).fold(0.0, f64::max);
        z = (0..n)
            .map(|k| Complex64::from_polar(bound, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
    }
    aberth(&c, &mut z);
    z
}

fn refine_real(g: &[BigRational], approx: f64, bits: u32) -> Result<Root, RootError> {
    let w = bits + 24;
    let eps = BigRational::new(BigInt::one(), BigInt::one() << (bits + 1) as usize);
    let dg = qpoly::derivative(g);
    let mut x = BigRational::from_float(approx).ok_or(RootError::PrecisionExhausted(bits))?;
    for _ in 0..(16 + 2 * (bits as usize).ilog2() as usize) {
        let v = qpoly::eval(g, &x);
        if v.is_zero() {
            return Ok(Root { re: x, im: BigRational::zero(), radius: 0.0, multiplicity: 1, is_real: true });
        }
        let d = qpoly::eval(&dg, &x);
        if d.is_zero() {
            break;
        }
        let step = &v / &d;
        x = round_dyadic(&(&x - &step), w);
        if step.abs() < &eps * BigRational::new(BigInt::one(), BigInt::from(1u32 << 20)) {
            break;
        }
    }
    let eps = BigRational::new(BigInt::one(), BigInt::one() << (bits + 1) as usize);
    let a = qpoly::eval(g, &(&x - &eps));
    let b = qpoly::eval(g, &(&x + &eps));
    if qpoly::eval(g, &x).is_zero() {
        return Ok(Root { re: x, im: BigRational::zero(), radius: 0.0, multiplicity: 1, is_real: true });
    }
    if a.signum() * b.signum() >= BigRational::zero() {
        return Err(RootError::PrecisionExhausted(bits));
    }
    let radius = eps.to_f64().unwrap() * (1.0 + 1e-12);
    Ok(Root { re: x, im: BigRational::zero(), radius, multiplicity: 1, is_real: true })
}

fn refine_complex(g: &[BigRational], approx: Complex64, bits: u32) -> Result<Root, RootError> {
    let n = BigRational::from_integer(BigInt::from(g.len() - 1));
    let target = {
        let e = BigRational::new(BigInt::one(), BigInt::one() << bits as usize);
        &e * &e
    };
    let mut w = bits + 24;
    let to_q = |v: f64| BigRational::from_float(v).ok_or(RootError::PrecisionExhausted(bits));
    let mut z: CQ = (to_q(approx.re)?, to_q(approx.im)?);
    for round in 0..4 {
        for _ in 0..(12 + 2 * (bits as usize).ilog2() as usize) {
            let (p, dp) = eval_with_derivative(g, &z);
            let d2 = cq_norm2(&dp);
            if d2.is_zero() || cq_norm2(&p).is_zero() {
                break;
            }
            // p / dp = p·conj(dp) / |dp|²
            let num = cq_mul(&p, &(dp.0.clone(), -&dp.1));
            let step = (&num.0 / &d2, &num.1 / &d2);
            let small = cq_norm2(&step) < &target / BigRational::from_integer(BigInt::one() << 40usize);
            z = (round_dyadic(&(&z.0 - &step.0), w), round_dyadic(&(&z.1 - &step.1), w));
            if small {
                break;
            }
        }
        let (p, dp) = eval_with_derivative(g, &z);
        let d2 = cq_norm2(&dp);
        let p2 = cq_norm2(&p);
        if p2.is_zero() {
            return Ok(Root { re: z.0, im: z.1, radius: 0.0, multiplicity: 1, is_real: false });
        }
        if !d2.is_zero() {
            let rad2 = &n * &n * &p2 / &d2;
            if rad2 <= target {
                return Ok(Root { re: z.0, im: z.1, radius: sqrt_upper(&rad2), multiplicity: 1, is_real: false });
            }
        }
        w += 64 * (round + 1);
    }
    Err(RootError::PrecisionExhausted(bits))
}

fn isolate_squarefree(g: &[BigRational], bits: u32) -> Result<Vec<Root>, RootError> {
    let n = g.len() - 1;
    if n == 1 {
        let re = -&g[0] / &g[1];
        return Ok(vec![Root { re, im: BigRational::zero(), radius: 0.0, multiplicity: 1, is_real: true }]);
    }
    let approx = initial_approximations(g);
    let n_real = qpoly::count_real_roots(g);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| approx[a].im.abs().total_cmp(&approx[b].im.abs()));
    let mut roots = Vec::with_capacity(n);
    for &i in &idx[..n_real] {
        roots.push(refine_real(g, approx[i].re, bits)?);
    }
    let mut upper: Vec<Complex64> = idx[n_real..].iter().map(|&i| approx[i]).collect();
    upper.sort_by(|a, b| b.im.total_cmp(&a.im));
    upper.truncate((n - n_real) / 2);
    for z in upper {
        let z = Complex64::new(z.re, z.im.abs());
        let r = refine_complex(g, z, bits)?;
        let conj = Root { im: -&r.im, ..r.clone() };
        roots.push(r);
        roots.push(conj);
    }
    for i in 0..roots.len() {
        for j in 0..i {
            let d = (roots[i].value() - roots[j].value()).norm();
            if d <= roots[i].radius + roots[j].radius || d == 0.0 {
                return Err(RootError::PrecisionExhausted(bits));
            }
        }
        if !roots[i].is_real && roots[i].im.abs().to_f64().unwrap() <= roots[i].radius {
            return Err(RootError::PrecisionExhausted(bits));
        }
    }
    Ok(roots)
}

/// Isolates all complex roots of `f`, with multiplicities, each within
/// `2^-bits` of its certified centre.
pub fn isolate_roots(f: &AssociatedPoly, bits: u32) -> Result<RootSet, RootError> {
    if bits > MAX_PRECISION_BITS {
        return Err(RootError::PrecisionExhausted(bits));
    }
    let q = qpoly::from_ints(f.coeffs());
    let mut roots = Vec::new();
    for (factor, mult) in qpoly::squarefree_decomposition(&q) {
        let ints: QPoly = qpoly::from_ints(&qpoly::primitive_integer(&factor));
        for mut r in isolate_squarefree(&ints, bits)? {
            r.multiplicity = mult;
            roots.push(r);
        }
    }
    roots.sort_by(|a, b| {
        let (x, y) = (a.value(), b.value());
        x.norm().total_cmp(&y.norm()).then(x.re.total_cmp(&y.re)).then(x.im.total_cmp(&y.im))
    });
    Ok(RootSet { roots, precision_bits: bits })
}
