//! Literals for elements of ℚ(β): rationals, `b` (or `β`, `beta`), `sqrt(c)`
//! for rational `c`, the operators `+ - * / ^` with integer exponents,
//! parentheses, implicit multiplication, and coefficient lists
//! `[c0, c1, …]` meaning `Σ cᵢ βⁱ`.

use betacode::numfield::{BetaContext, FieldElem};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {text:?} at position {pos}: {msg}")]
pub struct XTextError {
    pub text: String,
    pub pos: usize,
    pub msg: String,
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    ctx: &'a BetaContext,
    text: &'a str,
}

pub fn parse(text: &str, ctx: &BetaContext) -> Result<FieldElem, XTextError> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0, ctx, text };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(v)
}

fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> XTextError {
        XTextError { text: self.text.to_string(), pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, word: &str) -> bool {
        self.skip_ws();
        let w: Vec<char> = word.chars().collect();
        let end = self.pos + w.len();
        if self.chars.get(self.pos..end) == Some(&w[..])
            && !self.chars.get(end).is_some_and(|c| c.is_alphanumeric())
        {
            self.pos = end;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<FieldElem, XTextError> {
        let f = self.ctx.field();
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = f.add(&acc, &self.term()?);
            } else if self.eat('-') {
                acc = f.sub(&acc, &self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn starts_primary(&mut self) -> bool {
        match self.peek() {
            Some(c) => c.is_ascii_digit() || "(b[β".contains(c) || c == 's',
            None => false,
        }
    }

    fn term(&mut self) -> Result<FieldElem, XTextError> {
        let f = self.ctx.field();
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = f.mul(&acc, &self.unary()?);
            } else if self.eat('/') {
                let d = self.unary()?;
                acc = f.div(&acc, &d).ok_or_else(|| self.err("division by zero"))?;
            } else if self.starts_primary() {
                acc = f.mul(&acc, &self.power()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<FieldElem, XTextError> {
        if self.eat('-') {
            return Ok(self.ctx.field().neg(&self.unary()?));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<FieldElem, XTextError> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        let e = self.integer()?;
        let e: i64 = e.try_into().map_err(|_| self.err("exponent too large"))?;
        let e = if neg { -e } else { e };
        self.ctx.field().pow(&base, e).ok_or_else(|| self.err("negative power of zero"))
    }

    fn integer(&mut self) -> Result<BigInt, XTextError> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        Ok(s.parse().unwrap())
    }

    fn rational(&mut self) -> Result<BigRational, XTextError> {
        let neg = self.eat('-');
        let n = self.integer()?;
        let d = if self.eat('/') { self.integer()? } else { BigInt::one() };
        if d.is_zero() {
            return Err(self.err("zero denominator"));
        }
        let q = BigRational::new(n, d);
        Ok(if neg { -q } else { q })
    }

    fn primary(&mut self) -> Result<FieldElem, XTextError> {
        let f = self.ctx.field();
        if self.eat('(') {
            let v = self.expr()?;
            if !self.eat(')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(v);
        }
        if self.eat('[') {
            let mut coeffs = vec![self.rational()?];
            while self.eat(',') {
                coeffs.push(self.rational()?);
            }
            if !self.eat(']') {
                return Err(self.err("expected ']'"));
            }
            let mut acc = f.zero();
            for (i, c) in coeffs.iter().enumerate() {
                acc = f.add(&acc, &f.scale(&self.ctx.beta_pow(i as i64), c));
            }
            return Ok(acc);
        }
        if self.keyword("sqrt") {
            if !self.eat('(') {
                return Err(self.err("expected '(' after sqrt"));
            }
            let arg = self.expr()?;
            if !self.eat(')') {
                return Err(self.err("expected ')'"));
            }
            let c = arg.as_rational().ok_or_else(|| self.err("sqrt needs a rational argument"))?;
            return self.sqrt(&c);
        }
        if self.keyword("beta") || self.keyword("b") || self.eat('β') {
            return Ok(self.ctx.beta());
        }
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Ok(f.from_rational(BigRational::from_integer(self.integer()?)));
        }
        Err(self.err("expected a number, b, sqrt(...), '(' or '['"))
    }

    /// `√c` in ℚ(β): rational when `c` is a square, otherwise a rational
    /// multiple of `√disc` in a quadratic field.
    fn sqrt(&self, c: &BigRational) -> Result<FieldElem, XTextError> {
        let f = self.ctx.field();
        let rat_sqrt = |q: &BigRational| Some(BigRational::new(exact_sqrt(q.numer())?, exact_sqrt(q.denom())?));
        if let Some(r) = rat_sqrt(c) {
            return Ok(f.from_rational(r));
        }
        let m = f.modulus();
        if m.len() == 3 {
            let disc = &m[1] * &m[1] - BigRational::from_integer(4.into()) * &m[0];
            if let Some(r) = rat_sqrt(&(c / &disc)) {
                // β = (−m₁ + √disc)/2
                let root = f.add(&f.scale(&self.ctx.beta(), &BigRational::from_integer(2.into())), &f.from_rational(m[1].clone()));
                return Ok(f.scale(&root, &r));
            }
        }
        Err(self.err("square root is not in Q(beta)"))
    }
}
