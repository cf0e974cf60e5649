//! The two-sided β-shift at desk scale: windowed sequences with optional
//! periodic tails, periodic points, the odometer on left-sided sequences and
//! the entropy of the shift.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::beta::{build_automaton, is_admissible, BetaDigits, ParryData};
use crate::numfield::BetaContext;

/// Largest period accepted by [`enumerate_periodic`].
pub const MAX_ENUM_PERIOD: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShiftError {
    #[error("period {0} exceeds the enumeration bound of 12")]
    PeriodTooLarge(usize),
    #[error("no successor within the search cap")]
    SearchCapExceeded,
    #[error("sequence has digits right of the radix point")]
    NotLeftSided,
    #[error("sequence is not admissible")]
    Inadmissible,
}

/// Two-sided digit sequence `(s_n)`: an explicit window plus optional
/// periodic tails (zeros where a tail is absent).
///
/// Left tail: `s_{n_min−1−k} = left[k mod L]`. Right tail:
/// `s_{n_max+1+k} = right[k mod L]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BiSequence {
    pub n_min: i64,
    pub digits: Vec<u32>,
    pub left: Option<Vec<u32>>,
    pub right: Option<Vec<u32>>,
}

fn nonzero_tail(t: &Option<Vec<u32>>) -> Option<&Vec<u32>> {
    t.as_ref().filter(|p| p.iter().any(|&d| d != 0))
}

impl BiSequence {
    pub fn zero() -> Self {
        Self { n_min: 0, digits: Vec::new(), left: None, right: None }
    }

    /// Finite-support sequence with `digits[i] = s_{n_min + i}`.
    pub fn window(n_min: i64, digits: Vec<u32>) -> Self {
        Self { n_min, digits, left: None, right: None }
    }

    /// `s_n = word[(n + phase) mod L]` for all `n`.
    pub fn periodic(word: &[u32], phase: i64) -> Self {
        let l = word.len() as i64;
        let at = |n: i64| word[(n + phase).mod_floor(&l) as usize];
        Self {
            n_min: 0,
            digits: (0..l).map(at).collect(),
            left: Some((0..l).map(|k| at(-1 - k)).collect()),
            right: Some((0..l).map(|k| at(l + k)).collect()),
        }
    }

    /// Sequence whose nonnegative-exponent β-digits sit at indices `n = −e`.
    pub fn from_digits(d: &BetaDigits) -> Self {
        match d.high_exponent() {
            None => Self::zero(),
            Some(h) => Self::window(-h, d.digits().to_vec()),
        }
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.digits.len() as i64 - 1
    }

    pub fn digit(&self, n: i64) -> u32 {
        if n < self.n_min {
            return match &self.left {
                Some(p) => p[((self.n_min - 1 - n) as usize) % p.len()],
                None => 0,
            };
        }
        if n > self.n_max() {
            return match &self.right {
                Some(p) => p[((n - self.n_max() - 1) as usize) % p.len()],
                None => 0,
            };
        }
        self.digits[(n - self.n_min) as usize]
    }

    pub fn has_tails(&self) -> bool {
        nonzero_tail(&self.left).is_some() || nonzero_tail(&self.right).is_some()
    }

    /// Smallest and largest index of a nonzero digit, for finite support.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.has_tails() {
            return None;
        }
        let lo = self.digits.iter().position(|&d| d != 0)?;
        let hi = self.digits.iter().rposition(|&d| d != 0).unwrap();
        Some((self.n_min + lo as i64, self.n_min + hi as i64))
    }

    /// Same sequence with the window widened to cover `[lo, hi]`.
    pub fn widen(&self, lo: i64, hi: i64) -> Self {
        let lo = lo.min(self.n_min);
        let hi = hi.max(self.n_max());
        let rot = |t: &Option<Vec<u32>>, skip: i64| {
            t.as_ref().map(|p| {
                let l = p.len();
                (0..l).map(|k| p[(k + skip as usize) % l]).collect()
            })
        };
        Self {
            n_min: lo,
            digits: (lo..=hi).map(|n| self.digit(n)).collect(),
            left: rot(&self.left, self.n_min - lo),
            right: rot(&self.right, hi - self.n_max()),
        }
    }

    /// `σ^k`: `(σ^k s)_n = s_{n+k}`.
    pub fn shift(&self, k: i64) -> Self {
        Self { n_min: self.n_min - k, ..self.clone() }
    }

    /// Digits `s_a … s_b` as a word.
    pub fn slice(&self, a: i64, b: i64) -> Vec<u32> {
        (a..=b).map(|n| self.digit(n)).collect()
    }

    /// Canonical form: trims zero borders of finite-support sequences.
    pub fn normalized(&self) -> Self {
        if self.has_tails() {
            return Self { left: nonzero_tail(&self.left).cloned(), right: nonzero_tail(&self.right).cloned(), ..self.clone() };
        }
        match self.support() {
            None => Self::zero(),
            Some((a, b)) => Self::window(a, self.slice(a, b)),
        }
    }
}

fn push_word(s: &mut String, w: &[u32]) {
    for &d in w {
        if d <= 9 {
            s.push(char::from_digit(d, 10).unwrap());
        } else {
            s.push_str(&format!("({d})"));
        }
    }
}

impl fmt::Display for BiSequence {
    /// `…(tail)|w.w|(tail)…`; the radix point sits between `s_0` and `s_1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.n_min.min(1);
        let hi = self.n_max().max(0);
        let mut s = String::from("…");
        match nonzero_tail(&self.left) {
            Some(p) => {
                s.push('(');
                push_word(&mut s, &p.iter().rev().copied().collect::<Vec<_>>());
                s.push(')');
            }
            None => s.push('0'),
        }
        s.push('|');
        for n in lo..=hi {
            if n == 1 {
                s.push('.');
            }
            push_word(&mut s, &[self.digit(n)]);
        }
        s.push('|');
        match nonzero_tail(&self.right) {
            Some(p) => {
                s.push('(');
                push_word(&mut s, p);
                s.push(')');
            }
            None => s.push('0'),
        }
        s.push('…');
        f.write_str(&s)
    }
}

/// Compares `a_pre · a_per^∞` with `b_pre · b_per^∞`; an empty period means
/// a tail of zeros.
pub fn cmp_eventually_periodic(a_pre: &[u32], a_per: &[u32], b_pre: &[u32], b_per: &[u32]) -> Ordering {
    let at = |pre: &[u32], per: &[u32], k: usize| {
        if k < pre.len() {
            pre[k]
        } else if per.is_empty() {
            0
        } else {
            per[(k - pre.len()) % per.len()]
        }
    };
    let la = a_per.len().max(1);
    let lb = b_per.len().max(1);
    let n = a_pre.len().max(b_pre.len()) + la.lcm(&lb);
    for k in 0..n {
        match at(a_pre, a_per, k).cmp(&at(b_pre, b_per, k)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Whether every shift of `s` is at most `d*(1)`, with digits outside the
/// window taken from the tails (zeros if absent).
pub fn window_admissible(s: &BiSequence, pd: &ParryData) -> bool {
    let cap = pd.digit_cap();
    let tail_ok = |t: &Option<Vec<u32>>| t.as_ref().is_none_or(|p| !p.is_empty() && p.iter().all(|&d| d <= cap));
    if s.digits.iter().any(|&d| d > cap) || !tail_ok(&s.left) || !tail_ok(&s.right) {
        return false;
    }
    let right: Vec<u32> = nonzero_tail(&s.right).cloned().unwrap_or_default();
    let (dp, dq) = pd.dstar_word();
    let suffix_ok = |j: i64| {
        let pre = s.slice(j, s.n_max());
        cmp_eventually_periodic(&pre, &right, &dp, &dq) != Ordering::Greater
    };
    for k in 0..right.len() {
        let rot: Vec<u32> = (0..right.len()).map(|i| right[(i + k) % right.len()]).collect();
        if cmp_eventually_periodic(&[], &rot, &dp, &dq) == Ordering::Greater {
            return false;
        }
    }
    let first = match nonzero_tail(&s.left) {
        Some(p) => {
            let l = p.len() as i64;
            let reach = dp.len() as i64 + (dq.len() as i64).lcm(&l) + s.digits.len() as i64 + right.len() as i64;
            s.n_min - 2 * reach - 2 * l
        }
        None => s.n_min,
    };
    (first..=s.n_max()).all(suffix_ok)
}

/// Periodic point `s_n = word[(n + phase) mod L]`, with `word` the least
/// rotation of a primitive word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PeriodicSequence {
    pub word: Vec<u32>,
    pub phase: usize,
}

impl PeriodicSequence {
    /// Canonical form of the periodic sequence `s_n = word[(n + phase) mod L]`.
    pub fn new(word: &[u32], phase: i64) -> Self {
        assert!(!word.is_empty(), "empty period");
        let l = word.len();
        let p = (1..=l).find(|&p| l % p == 0 && (0..l).all(|i| word[i] == word[i % p])).unwrap();
        let word = &word[..p];
        let best = (0..p)
            .min_by(|&a, &b| (0..p).map(|i| word[(i + a) % p]).cmp((0..p).map(|i| word[(i + b) % p])))
            .unwrap();
        let canon: Vec<u32> = (0..p).map(|i| word[(i + best) % p]).collect();
        let phase = (phase - best as i64).rem_euclid(p as i64) as usize;
        Self { word: canon, phase }
    }

    pub fn period(&self) -> usize {
        self.word.len()
    }

    pub fn digit(&self, n: i64) -> u32 {
        self.word[(n + self.phase as i64).rem_euclid(self.word.len() as i64) as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.word.iter().all(|&d| d == 0)
    }

    pub fn to_bisequence(&self) -> BiSequence {
        BiSequence::periodic(&self.word, self.phase as i64)
    }

    /// `σ`: the same orbit at the next phase.
    pub fn shifted(&self, k: i64) -> Self {
        Self::new(&self.word, self.phase as i64 + k)
    }

    /// Text form such as `"(02)^∞@1"`.
    pub fn text(&self) -> String {
        let mut s = String::from("(");
        push_word(&mut s, &self.word);
        s.push_str(&format!(")^∞@{}", self.phase));
        s
    }
}

/// Whether the bi-infinite periodization of `word` lies in the β-shift.
pub fn periodic_admissible(word: &[u32], pd: &ParryData) -> bool {
    if word.iter().any(|&d| d > pd.digit_cap()) {
        return false;
    }
    let (dp, dq) = pd.dstar_word();
    let l = word.len();
    (0..l).all(|k| {
        let rot: Vec<u32> = (0..l).map(|i| word[(i + k) % l]).collect();
        cmp_eventually_periodic(&[], &rot, &dp, &dq) != Ordering::Greater
    })
}

fn is_lyndon(w: &[u32]) -> bool {
    let l = w.len();
    (1..l).all(|k| (0..l).map(|i| w[(i + k) % l]).cmp(w.iter().copied()) == Ordering::Greater)
}

/// All admissible periodic points of minimal period at most `max_period`,
/// every phase listed.
pub fn enumerate_periodic(pd: &ParryData, max_period: usize) -> Result<Vec<PeriodicSequence>, ShiftError> {
    if max_period > MAX_ENUM_PERIOD {
        return Err(ShiftError::PeriodTooLarge(max_period));
    }
    let aut = build_automaton(pd);
    let alpha = pd.digit_cap() + 1;
    let mut out = Vec::new();
    for l in 1..=max_period {
        let mut stack: Vec<(Vec<u32>, usize)> = vec![(Vec::new(), aut.initial)];
        while let Some((w, state)) = stack.pop() {
            if w.len() == l {
                if is_lyndon(&w) && periodic_admissible(&w, pd) {
                    out.extend((0..l).map(|ph| PeriodicSequence { word: w.clone(), phase: ph }));
                }
                continue;
            }
            for d in (0..alpha).rev() {
                if let Some(t) = aut.step(state, d) {
                    let mut v = w.clone();
                    v.push(d);
                    stack.push((v, t));
                }
            }
        }
    }
    out.sort_by(|a, b| a.word.len().cmp(&b.word.len()).then(a.cmp(b)));
    Ok(out)
}

fn lex_successor_fixed(w: &[u32], pd: &ParryData) -> Option<Vec<u32>> {
    for i in (0..w.len()).rev() {
        for c in w[i] + 1..=pd.digit_cap() {
            let mut cand = w[..i].to_vec();
            cand.push(c);
            if is_admissible(&cand, pd).unwrap_or(false) {
                cand.resize(w.len(), 0);
                return Some(cand);
            }
        }
    }
    None
}

/// Successor in evaluation order among admissible finite left-sided
/// sequences (digits at exponents `≥ 0`), searching words up to
/// `search_cap` digits longer than the input.
pub fn odometer_successor(s: &BetaDigits, pd: &ParryData, search_cap: usize) -> Result<BetaDigits, ShiftError> {
    if s.low_exponent().is_some_and(|e| e < 0) {
        return Err(ShiftError::NotLeftSided);
    }
    let m = s.high_exponent().map_or(0, |h| h as usize + 1);
    let word = s.word(m as i64 - 1, 0);
    if !is_admissible(&word, pd).unwrap_or(false) {
        return Err(ShiftError::Inadmissible);
    }
    for n in m..=m + search_cap {
        let mut padded = vec![0; n - m];
        padded.extend_from_slice(&word);
        if let Some(next) = lex_successor_fixed(&padded, pd) {
            return Ok(BetaDigits::new(next, -(n as i64 - 1)));
        }
    }
    Err(ShiftError::SearchCapExceeded)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShiftEntropy {
    /// `log β`.
    pub log_beta: f64,
    /// `log` of the spectral radius of the automaton, when β is sofic.
    pub automaton: Option<f64>,
}

/// Perron root of a nonnegative irreducible matrix, by power iteration on
/// `A + I`.
pub fn spectral_radius(a: &[Vec<u64>]) -> f64 {
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / n as f64; n];
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let mut w: Vec<f64> = (0..n).map(|i| v[i] + (0..n).map(|j| a[i][j] as f64 * v[j]).sum::<f64>()).collect();
        let norm: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= norm);
        let diff: f64 = w.iter().zip(&v).map(|(x, y)| (x - y).abs()).sum();
        v = w;
        let done = (norm - lambda).abs() <= 1e-15 * norm && diff < 1e-15;
        lambda = norm;
        if done {
            break;
        }
    }
    lambda - 1.0
}

/// Entropy of the β-shift: `log β`, cross-checked against the automaton when
/// Parry data is available.
pub fn shift_entropy(ctx: &BetaContext, pd: Option<&ParryData>) -> ShiftEntropy {
    let log_beta = ctx.beta_f64().ln();
    let automaton = pd.map(|p| spectral_radius(&build_automaton(p).adjacency()).ln());
    ShiftEntropy { log_beta, automaton }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::{eval_digits, parry_data, DEFAULT_PERIOD_CAP};
    use crate::polyring::AssociatedPoly;
    use proptest::prelude::*;

    fn ctx(c: &[i64]) -> BetaContext {
        BetaContext::new(&AssociatedPoly::from_i64(c).unwrap()).unwrap()
    }

    fn pd(c: &[i64]) -> ParryData {
        parry_data(&ctx(c), DEFAULT_PERIOD_CAP).unwrap()
    }

    #[test]
    fn window_examples() {
        let s = pd(&[-1, -2, 1]);
        assert!(window_admissible(&BiSequence::window(-3, vec![0, 0, 0, 0]), &s));
        assert!(!window_admissible(&BiSequence::window(0, vec![2, 1]), &s));
        assert!(window_admissible(&BiSequence::window(0, vec![2, 0, 2]), &s));
        assert!(window_admissible(&BiSequence::periodic(&[2, 0], 0), &s));
        assert!(!window_admissible(&BiSequence::periodic(&[2, 1], 0), &s));
        let two = pd(&[-2, 1]);
        assert!(window_admissible(&BiSequence::periodic(&[1], 0), &two));
        assert!(window_admissible(&BiSequence::window(-4, vec![1, 1, 0, 1, 1, 1, 0, 1]), &two));
        // a right tail (20)^∞ preceded by 1 is fine; preceded by 2 it is not
        let mut t = BiSequence::window(0, vec![1]);
        t.right = Some(vec![2, 0]);
        assert!(window_admissible(&t, &s));
        t.digits = vec![2];
        assert!(!window_admissible(&t, &s));
    }

    #[test]
    fn bisequence_text_and_widen() {
        let s = BiSequence::window(-1, vec![1, 2, 0, 1]);
        assert_eq!(s.to_string(), "…0|12.01|0…");
        let p = BiSequence::periodic(&[2, 0], 1);
        assert_eq!(p.digit(0), 0);
        assert_eq!(p.digit(1), 2);
        assert_eq!(p.digit(-1), 2);
        let w = p.widen(-5, 7);
        for n in -12..12 {
            assert_eq!(w.digit(n), p.digit(n));
        }
        assert_eq!(s.shift(1).digit(-2), s.digit(-1));
    }

    #[test]
    fn periodic_examples() {
        let two = enumerate_periodic(&pd(&[-2, 1]), 1).unwrap();
        assert_eq!(two, vec![PeriodicSequence { word: vec![0], phase: 0 }, PeriodicSequence { word: vec![1], phase: 0 }]);
        let s = enumerate_periodic(&pd(&[-1, -2, 1]), 2).unwrap();
        assert!(s.contains(&PeriodicSequence::new(&[2, 0], 0)));
        assert!(s.contains(&PeriodicSequence::new(&[2, 0], 1)));
        assert!(!s.iter().any(|p| p.word == vec![1, 2] || p.word == vec![2, 2]));
        let t = enumerate_periodic(&pd(&[-2, -3, 1]), 2).unwrap();
        assert!(t.contains(&PeriodicSequence::new(&[3, 1], 0)));
        assert_eq!(enumerate_periodic(&pd(&[-2, 1]), 13), Err(ShiftError::PeriodTooLarge(13)));
    }

    #[test]
    fn periodic_canonical_form() {
        let p = PeriodicSequence::new(&[2, 0, 2, 0], 1);
        assert_eq!(p.word, vec![0, 2]);
        for n in -6..6 {
            assert_eq!(p.digit(n), [2, 0][((n + 1).rem_euclid(2)) as usize]);
        }
    }

    #[test]
    fn odometer_examples() {
        let two = pd(&[-2, 1]);
        let d = |s: &str| s.parse::<BetaDigits>().unwrap();
        assert_eq!(odometer_successor(&d("11"), &two, 2).unwrap(), d("100"));
        let s = pd(&[-1, -2, 1]);
        assert_eq!(odometer_successor(&d(""), &s, 2).unwrap(), d("1"));
        assert_eq!(odometer_successor(&d("2"), &s, 2).unwrap(), d("10"));
        assert_eq!(odometer_successor(&d(".1"), &s, 2), Err(ShiftError::NotLeftSided));
        assert_eq!(odometer_successor(&d("22"), &s, 2), Err(ShiftError::Inadmissible));
        assert_eq!(odometer_successor(&d("2"), &s, 0), Err(ShiftError::SearchCapExceeded));
    }

    /// Brute-force oracle: all admissible words of bounded length, sorted by
    /// exact value.
    #[test]
    fn odometer_matches_sorted_enumeration() {
        let c = ctx(&[-1, -2, 1]);
        let p = parry_data(&c, DEFAULT_PERIOD_CAP).unwrap();
        let bound = c.field().from_int(20);
        let mut words: Vec<BetaDigits> = Vec::new();
        let mut frontier = vec![vec![]];
        for _ in 0..5 {
            let mut next = Vec::new();
            for w in frontier {
                for dg in 0..=p.digit_cap() {
                    let mut v: Vec<u32> = w.clone();
                    v.push(dg);
                    if is_admissible(&v, &p).unwrap() {
                        next.push(v);
                    }
                }
            }
            for w in &next {
                let x = BetaDigits::new(w.clone(), -(w.len() as i64 - 1));
                if c.cmp(&eval_digits(&x, &c), &bound) != Ordering::Greater && !words.contains(&x) {
                    words.push(x);
                }
            }
            frontier = next;
        }
        words.sort_by(|a, b| c.cmp(&eval_digits(a, &c), &eval_digits(b, &c)));
        let mut cur = BetaDigits::default();
        for w in &words {
            assert_eq!(&cur, w);
            cur = odometer_successor(&cur, &p, 3).unwrap();
        }
        assert_eq!(c.cmp(&eval_digits(&cur, &c), &bound), Ordering::Greater);
    }

    #[test]
    fn entropy_examples() {
        let two = ctx(&[-2, 1]);
        let e = shift_entropy(&two, Some(&parry_data(&two, DEFAULT_PERIOD_CAP).unwrap()));
        assert!((e.log_beta - 2f64.ln()).abs() < 1e-12);
        assert!((e.automaton.unwrap() - 2f64.ln()).abs() < 1e-12);
        for c in [vec![-1, -2, 1], vec![-2, -3, 1], vec![1, -3, 1], vec![-1, -1, 0, 1]] {
            let cx = ctx(&c);
            let e = shift_entropy(&cx, Some(&parry_data(&cx, DEFAULT_PERIOD_CAP).unwrap()));
            assert!((e.log_beta - e.automaton.unwrap()).abs() < 1e-9, "{c:?}");
        }
        let th = ctx(&[-3, 2]);
        assert!((shift_entropy(&th, None).log_beta - 1.5f64.ln()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn periodic_enumeration_closed(cidx in 0usize..3, l in 1usize..6) {
            let c = [vec![-1, -2, 1], vec![-2, -3, 1], vec![-1, -1, 0, 1]][cidx].clone();
            let p = pd(&c);
            let all = enumerate_periodic(&p, l).unwrap();
            for s in &all {
                prop_assert!(all.contains(&s.shifted(1)));
                let doubled = [s.word.clone(), s.word.clone()].concat();
                prop_assert!(is_admissible(&doubled, &p).unwrap());
                prop_assert!(window_admissible(&s.to_bisequence(), &p));
            }
        }

        #[test]
        fn window_matches_finite_criterion(w in prop::collection::vec(0u32..3, 0..10), n in -5i64..5) {
            let p = pd(&[-1, -2, 1]);
            prop_assert_eq!(window_admissible(&BiSequence::window(n, w.clone()), &p), is_admissible(&w, &p).unwrap());
        }

        #[test]
        fn odometer_strictly_increasing(w in prop::collection::vec(0u32..3, 0..6)) {
            let c = ctx(&[-1, -2, 1]);
            let p = parry_data(&c, DEFAULT_PERIOD_CAP).unwrap();
            prop_assume!(is_admissible(&w, &p).unwrap());
            let x = BetaDigits::new(w.clone(), -(w.len() as i64 - 1));
            let y = odometer_successor(&x, &p, 2).unwrap();
            prop_assert_eq!(c.cmp(&eval_digits(&y, &c), &eval_digits(&x, &c)), Ordering::Greater);
        }
    }
}
