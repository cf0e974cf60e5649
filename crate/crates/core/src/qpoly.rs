//! Dense univariate polynomials over the rationals.
//!
//! Coefficients are stored in ascending order and kept trimmed (no trailing
//! zeros). The zero polynomial is the empty vector. These helpers back the
//! exact parts of root isolation, unit-circle detection and number-field
//! arithmetic; they are deliberately free functions over slices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type QPoly = Vec<BigRational>;

pub fn trim(p: &mut QPoly) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

pub fn from_ints(c: &[BigInt]) -> QPoly {
    let mut p: QPoly = c.iter().map(|a| BigRational::from_integer(a.clone())).collect();
    trim(&mut p);
    p
}

/// Degree, with `None` for the zero polynomial.
pub fn degree(p: &[BigRational]) -> Option<usize> {
    if p.is_empty() {
        None
    } else {
        Some(p.len() - 1)
    }
}

pub fn eval(p: &[BigRational], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

pub fn add(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let n = a.len().max(b.len());
    let mut out: QPoly = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
            let y = b.get(i).cloned().unwrap_or_else(BigRational::zero);
            x + y
        })
        .collect();
    trim(&mut out);
    out
}

pub fn neg(a: &[BigRational]) -> QPoly {
    a.iter().map(|c| -c).collect()
}

pub fn sub(a: &[BigRational], b: &[BigRational]) -> QPoly {
    add(a, &neg(b))
}

pub fn mul(a: &[BigRational], b: &[BigRational]) -> QPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

pub fn scale(a: &[BigRational], s: &BigRational) -> QPoly {
    let mut out: QPoly = a.iter().map(|c| c * s).collect();
    trim(&mut out);
    out
}

/// Euclidean division; panics on a zero divisor.
pub fn divrem(a: &[BigRational], b: &[BigRational]) -> (QPoly, QPoly) {
    let db = degree(b).expect("division by the zero polynomial");
    let mut r: QPoly = a.to_vec();
    trim(&mut r);
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let lead = b[db].clone();
    let mut q = vec![BigRational::zero(); r.len() - db];
    while r.len() > db {
        let k = r.len() - 1 - db;
        let c = r.last().unwrap() / &lead;
        for (i, bc) in b.iter().enumerate() {
            r[k + i] -= &c * bc;
        }
        q[k] = c;
        r.pop();
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

pub fn monic(a: &[BigRational]) -> QPoly {
    match a.last() {
        None => Vec::new(),
        Some(l) => {
            let inv = l.recip();
            scale(a, &inv)
        }
    }
}

/// Monic greatest common divisor (zero if both inputs vanish).
pub fn gcd(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let mut x: QPoly = a.to_vec();
    let mut y: QPoly = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let (_, r) = divrem(&x, &y);
        x = y;
        y = r;
    }
    monic(&x)
}

/// Returns `(g, s)` with `g = gcd(a, m)` monic and `s·a ≡ g (mod m)`.
pub fn ext_gcd(a: &[BigRational], m: &[BigRational]) -> (QPoly, QPoly) {
    let (mut r0, mut r1): (QPoly, QPoly) = (m.to_vec(), a.to_vec());
    let (mut s0, mut s1): (QPoly, QPoly) = (Vec::new(), vec![BigRational::one()]);
    trim(&mut r0);
    trim(&mut r1);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1);
        let s = sub(&s0, &mul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    let lead = r0.last().cloned().unwrap_or_else(BigRational::one).recip();
    (scale(&r0, &lead), scale(&s0, &lead))
}

pub fn derivative(a: &[BigRational]) -> QPoly {
    let mut out: QPoly = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect();
    trim(&mut out);
    out
}

/// Squarefree part `a / gcd(a, a')`, made monic.
pub fn squarefree_part(a: &[BigRational]) -> QPoly {
    let g = gcd(a, &derivative(a));
    if degree(&g).unwrap_or(0) == 0 {
        return monic(a);
    }
    monic(&divrem(a, &g).0)
}

/// Yun's squarefree factorisation: `a = c · Π f_i^i`; returns `(f_i, i)` with
/// nonconstant monic `f_i`.
pub fn squarefree_decomposition(a: &[BigRational]) -> Vec<(QPoly, usize)> {
    let mut out = Vec::new();
    if degree(a).unwrap_or(0) == 0 {
        return out;
    }
    let da = derivative(a);
    let mut b = gcd(a, &da);
    let mut c = divrem(a, &b).0;
    let mut d = sub(&divrem(&da, &b).0, &derivative(&c));
    let mut i = 1;
    while degree(&c).unwrap_or(0) > 0 {
        let g = gcd(&c, &d);
        if degree(&g).unwrap_or(0) > 0 {
            out.push((g.clone(), i));
        }
        c = divrem(&c, &g).0;
        d = sub(&divrem(&d, &g).0, &derivative(&c));
        i += 1;
        b = g;
    }
    let _ = b;
    out
}

/// Clears denominators and content so the result has coprime integer
/// coefficients with a positive leading term.
pub fn primitive_integer(a: &[BigRational]) -> Vec<BigInt> {
    if a.is_empty() {
        return Vec::new();
    }
    let lcm = a
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = a.iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let sign = if ints.last().unwrap().is_negative() { -BigInt::one() } else { BigInt::one() };
    ints.iter().map(|c| c / &content * &sign).collect()
}

fn sign_changes(vals: impl Iterator<Item = BigRational>) -> usize {
    let mut last = 0i8;
    let mut n = 0;
    for v in vals {
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                n += 1;
            }
            last = s;
        }
    }
    n
}

/// Sturm sequence of a squarefree polynomial.
pub fn sturm_sequence(a: &[BigRational]) -> Vec<QPoly> {
    let mut seq = vec![a.to_vec(), derivative(a)];
    loop {
        let n = seq.len();
        if seq[n - 1].is_empty() {
            seq.pop();
            break;
        }
        let (_, r) = divrem(&seq[n - 2], &seq[n - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(neg(&r));
    }
    seq
}

/// Number of distinct real roots in the closed interval `[lo, hi]`.
pub fn count_real_roots_closed(a: &[BigRational], lo: &BigRational, hi: &BigRational) -> usize {
    if degree(a).unwrap_or(0) == 0 {
        return 0;
    }
    let sf = squarefree_part(a);
    let seq = sturm_sequence(&sf);
    let at = |x: &BigRational| sign_changes(seq.iter().map(|p| eval(p, x)));
    let interior = at(lo) - at(hi);
    interior + usize::from(eval(&sf, lo).is_zero())
}

/// Number of distinct real roots on the whole line.
pub fn count_real_roots(a: &[BigRational]) -> usize {
    if degree(a).unwrap_or(0) == 0 {
        return 0;
    }
    let sf = squarefree_part(a);
    let seq = sturm_sequence(&sf);
    let at_neg_inf = sign_changes(seq.iter().map(|p| {
        let d = p.len() - 1;
        let l = p[d].clone();
        if d % 2 == 1 {
            -l
        } else {
            l
        }
    }));
    let at_pos_inf = sign_changes(seq.iter().map(|p| p.last().unwrap().clone()));
    at_neg_inf - at_pos_inf
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> QPoly {
        from_ints(&v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
    }

    #[test]
    fn divrem_reconstructs() {
        let a = q(&[-1, 0, 0, 1]);
        let b = q(&[-1, 1]);
        let (qq, r) = divrem(&a, &b);
        assert!(r.is_empty());
        assert_eq!(qq, q(&[1, 1, 1]));
    }

    #[test]
    fn gcd_of_shared_factor() {
        let a = q(&[-1, 0, 1]);
        let b = q(&[1, 2, 1]);
        assert_eq!(gcd(&a, &b), q(&[1, 1]));
    }

    #[test]
    fn sturm_counts() {
        // (x-1)(x+1)(x-3)
        let p = q(&[3, -1, -3, 1]);
        assert_eq!(count_real_roots(&p), 3);
        let lo = BigRational::from_integer((-1).into());
        let hi = BigRational::from_integer(1.into());
        assert_eq!(count_real_roots_closed(&p, &lo, &hi), 2);
        assert_eq!(count_real_roots(&q(&[1, 0, 1])), 0);
    }

    #[test]
    fn yun_multiplicities() {
        // (x-1)^2 (x+2)
        let p = mul(&mul(&q(&[-1, 1]), &q(&[-1, 1])), &q(&[2, 1]));
        let dec = squarefree_decomposition(&p);
        assert_eq!(dec, vec![(q(&[2, 1]), 1), (q(&[-1, 1]), 2)]);
    }

    #[test]
    fn ext_gcd_inverts() {
        let m = q(&[-1, -2, 1]);
        let a = q(&[3, 1]);
        let (g, s) = ext_gcd(&a, &m);
        assert_eq!(g, q(&[1]));
        let (_, r) = divrem(&mul(&s, &a), &m);
        assert_eq!(r, q(&[1]));
    }
}
