//! Sparse multivariate polynomials with a graded-lexicographic term order.
//!
//! [`MultiPoly`] is the exact, untruncated polynomial type used for Witt
//! structure polynomials, presented-algebra relations, and the coefficients
//! of polynomial ring extensions. Truncated power series live in
//! [`crate::series`] instead.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::ring::{Coeff, RingDescriptor, RingError, RingMap};

/// An exponent vector, ordered graded-lexicographically: lower total degree
/// first, ties broken by the exponent vector itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Box<[u32]>);

impl Monomial {
    pub fn constant(arity: usize) -> Self {
        Monomial(vec![0; arity].into_boxed_slice())
    }

    pub fn from_exponents(e: Vec<u32>) -> Self {
        Monomial(e.into_boxed_slice())
    }

    pub fn variable(arity: usize, index: usize) -> Self {
        let mut e = vec![0; arity];
        e[index] = 1;
        Monomial(e.into_boxed_slice())
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.arity(), other.arity());
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Componentwise division; `None` if any exponent would go negative.
    pub fn try_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            if a < b {
                return None;
            }
            out.push(a - b);
        }
        Some(Monomial(out.into_boxed_slice()))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn term_add(
    ring: &RingDescriptor,
    a: &BTreeMap<Monomial, Coeff>,
    b: &BTreeMap<Monomial, Coeff>,
) -> BTreeMap<Monomial, Coeff> {
    let mut out = a.clone();
    for (m, c) in b {
        match out.remove(m) {
            Some(existing) => {
                let sum = ring.add(&existing, c);
                if !ring.is_zero(&sum) {
                    out.insert(m.clone(), sum);
                }
            }
            None => {
                out.insert(m.clone(), c.clone());
            }
        }
    }
    out
}

pub(crate) fn term_mul(
    ring: &RingDescriptor,
    a: &BTreeMap<Monomial, Coeff>,
    b: &BTreeMap<Monomial, Coeff>,
) -> BTreeMap<Monomial, Coeff> {
    let mut out: BTreeMap<Monomial, Coeff> = BTreeMap::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m = ma.mul(mb);
            let prod = ring.mul(ca, cb);
            if ring.is_zero(&prod) {
                continue;
            }
            match out.remove(&m) {
                Some(existing) => {
                    let sum = ring.add(&existing, &prod);
                    if !ring.is_zero(&sum) {
                        out.insert(m, sum);
                    }
                }
                None => {
                    out.insert(m, prod);
                }
            }
        }
    }
    out
}

pub(crate) fn terms_to_string(
    ring: &RingDescriptor,
    vars: &[String],
    terms: &BTreeMap<Monomial, Coeff>,
) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    // leading (highest) term first
    for (m, c) in terms.iter().rev() {
        let cs = ring.element_to_string_plain(c);
        let (sign, body) = match cs.strip_prefix('-') {
            Some(rest) => ("-", rest.to_string()),
            None => ("+", cs),
        };
        if out.is_empty() {
            if sign == "-" {
                out.push('-');
            }
        } else {
            out.push(if sign == "-" { '-' } else { '+' });
        }
        let needs_parens = body.contains('+') || body.contains('-');
        let mut factors = Vec::new();
        if m.is_constant() || body != "1" {
            factors.push(if needs_parens && !m.is_constant() {
                format!("({body})")
            } else {
                body
            });
        }
        for (i, v) in vars.iter().enumerate() {
            match m.exponent(i) {
                0 => {}
                1 => factors.push(v.clone()),
                e => factors.push(format!("{v}^{e}")),
            }
        }
        out.push_str(&factors.join("*"));
    }
    out
}

/// A sparse multivariate polynomial over an exact coefficient ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    pub ring: RingDescriptor,
    pub vars: Vec<String>,
    pub terms: BTreeMap<Monomial, Coeff>,
}

impl MultiPoly {
    pub fn zero(ring: RingDescriptor, vars: Vec<String>) -> Self {
        MultiPoly {
            ring,
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: RingDescriptor, vars: Vec<String>, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !ring.is_zero(&c) {
            terms.insert(Monomial::constant(vars.len()), c);
        }
        MultiPoly { ring, vars, terms }
    }

    pub fn one(ring: RingDescriptor, vars: Vec<String>) -> Self {
        let one = ring.one();
        Self::constant(ring, vars, one)
    }

    pub fn variable(ring: RingDescriptor, vars: Vec<String>, index: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::variable(vars.len(), index), ring.one());
        MultiPoly { ring, vars, terms }
    }

    pub fn monomial(ring: RingDescriptor, vars: Vec<String>, m: Monomial, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !ring.is_zero(&c) {
            terms.insert(m, c);
        }
        MultiPoly { ring, vars, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coeff(&self, m: &Monomial) -> Coeff {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    fn same_context(&self, other: &MultiPoly) {
        assert_eq!(self.ring, other.ring, "polynomial ring mismatch");
        assert_eq!(self.vars, other.vars, "polynomial variable mismatch");
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        self.same_context(other);
        MultiPoly {
            ring: self.ring.clone(),
            vars: self.vars.clone(),
            terms: term_add(&self.ring, &self.terms, &other.terms),
        }
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            ring: self.ring.clone(),
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), self.ring.neg(c)))
                .collect(),
        }
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        self.same_context(other);
        MultiPoly {
            ring: self.ring.clone(),
            vars: self.vars.clone(),
            terms: term_mul(&self.ring, &self.terms, &other.terms),
        }
    }

    pub fn scale(&self, c: &Coeff) -> MultiPoly {
        let mut terms = BTreeMap::new();
        for (m, v) in &self.terms {
            let prod = self.ring.mul(v, c);
            if !self.ring.is_zero(&prod) {
                terms.insert(m.clone(), prod);
            }
        }
        MultiPoly {
            ring: self.ring.clone(),
            vars: self.vars.clone(),
            terms,
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut result = MultiPoly::one(self.ring.clone(), self.vars.clone());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Evaluate at a point of the same ring.
    pub fn eval(&self, point: &[Coeff]) -> Coeff {
        assert_eq!(point.len(), self.vars.len(), "evaluation arity mismatch");
        let mut acc = self.ring.zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, p) in point.iter().enumerate() {
                let e = m.exponent(i);
                if e > 0 {
                    term = self.ring.mul(&term, &self.ring.pow(p, e as u64));
                }
            }
            acc = self.ring.add(&acc, &term);
        }
        acc
    }

    /// Evaluate at a point of the map's target ring, pushing coefficients
    /// through the ring map first.
    pub fn eval_mapped(&self, map: &RingMap, point: &[Coeff]) -> Result<Coeff, RingError> {
        assert_eq!(point.len(), self.vars.len(), "evaluation arity mismatch");
        let target = &map.target;
        let mut acc = target.zero();
        for (m, c) in &self.terms {
            let mut term = map.apply(c)?;
            for (i, p) in point.iter().enumerate() {
                let e = m.exponent(i);
                if e > 0 {
                    term = target.mul(&term, &target.pow(p, e as u64));
                }
            }
            acc = target.add(&acc, &term);
        }
        Ok(acc)
    }

    /// Substitute polynomials for the variables. All arguments must share one
    /// context, which becomes the context of the result.
    pub fn substitute(&self, args: &[MultiPoly]) -> MultiPoly {
        assert_eq!(args.len(), self.vars.len(), "substitution arity mismatch");
        let (ring, vars) = match args.first() {
            Some(a) => (a.ring.clone(), a.vars.clone()),
            None => (self.ring.clone(), Vec::new()),
        };
        let mut acc = MultiPoly::zero(ring.clone(), vars.clone());
        for (m, c) in &self.terms {
            let mut term = MultiPoly::constant(ring.clone(), vars.clone(), c.clone());
            for (i, a) in args.iter().enumerate() {
                let e = m.exponent(i);
                if e > 0 {
                    term = term.mul(&a.pow(e));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Push every coefficient through a ring map; variables are untouched.
    pub fn map_coeffs(&self, map: &RingMap) -> Result<MultiPoly, RingError> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let mapped = map.apply(c)?;
            if !map.target.is_zero(&mapped) {
                terms.insert(m.clone(), mapped);
            }
        }
        Ok(MultiPoly {
            ring: map.target.clone(),
            vars: self.vars.clone(),
            terms,
        })
    }

    /// The polynomial with integer coefficients taken into `ring`.
    pub fn from_int_terms(
        ring: RingDescriptor,
        vars: Vec<String>,
        terms: &[(Vec<u32>, i64)],
    ) -> MultiPoly {
        let mut out = BTreeMap::new();
        for (e, c) in terms {
            let coeff = ring.from_bigint(&BigInt::from(*c));
            if !ring.is_zero(&coeff) {
                out.insert(Monomial::from_exponents(e.clone()), coeff);
            }
        }
        MultiPoly {
            ring,
            vars,
            terms: out,
        }
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", terms_to_string(&self.ring, &self.vars, &self.terms))
    }
}

/// Parse a polynomial in the given variables: sums of terms, where a term is
/// `*`-separated factors, each an integer, a rational `a/b`, a variable, or
/// `var^exp`. No parentheses.
pub fn parse_poly(
    ring: &RingDescriptor,
    vars: &[String],
    input: &str,
) -> Result<MultiPoly, RingError> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(RingError::Parse("empty polynomial".into()));
    }
    let mut result = MultiPoly::zero(ring.clone(), vars.to_vec());
    // split into signed chunks
    let bytes = s.as_bytes();
    let mut chunks: Vec<(bool, String)> = Vec::new();
    let mut current = String::new();
    let mut negative = false;
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if (ch == '+' || ch == '-') && i > 0 && bytes[i - 1] as char != '^' && bytes[i - 1] as char != '*' && bytes[i - 1] as char != '/'
        {
            chunks.push((negative, std::mem::take(&mut current)));
            negative = ch == '-';
        } else if ch == '+' && i == 0 {
            // leading plus, skip
        } else if ch == '-' && i == 0 {
            negative = true;
        } else {
            current.push(ch);
        }
        i += 1;
    }
    chunks.push((negative, current));

    for (neg, chunk) in chunks {
        if chunk.is_empty() {
            return Err(RingError::Parse(format!("dangling sign in `{input}`")));
        }
        let mut coeff = ring.one();
        let mut expo = vec![0u32; vars.len()];
        for factor in chunk.split('*') {
            if factor.is_empty() {
                return Err(RingError::Parse(format!("empty factor in `{input}`")));
            }
            let (name, e) = match factor.split_once('^') {
                Some((n, e_str)) => {
                    let e: u32 = e_str.parse().map_err(|_| {
                        RingError::Parse(format!("bad exponent `{e_str}` in `{input}`"))
                    })?;
                    (n, e)
                }
                None => (factor, 1),
            };
            if let Some(idx) = vars.iter().position(|v| v == name) {
                expo[idx] += e;
            } else if name.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                // numeric factor (integer or rational); `^` applies to it too
                let c = ring.parse_element(name)?;
                coeff = ring.mul(&coeff, &ring.pow(&c, e as u64));
            } else if let Some(inner) = ring.var_element(name) {
                // a variable of the coefficient ring itself
                coeff = ring.mul(&coeff, &ring.pow(&inner, e as u64));
            } else {
                return Err(RingError::Parse(format!(
                    "unknown variable `{name}` in `{input}`"
                )));
            }
        }
        if neg {
            coeff = ring.neg(&coeff);
        }
        let term = MultiPoly::monomial(
            ring.clone(),
            vars.to_vec(),
            Monomial::from_exponents(expo),
            coeff,
        );
        result = result.add(&term);
    }
    Ok(result)
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::from(1);
    for i in 0..k {
        num *= BigInt::from(n - i);
        num /= BigInt::from(i + 1);
    }
    num
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zz() -> RingDescriptor {
        RingDescriptor::Integers
    }

    #[test]
    fn graded_lex_order() {
        let m = |e: &[u32]| Monomial::from_exponents(e.to_vec());
        assert!(m(&[0, 0]) < m(&[0, 1]));
        assert!(m(&[0, 1]) < m(&[1, 0])); // same degree, lex on exponents
        assert!(m(&[1, 0]) < m(&[0, 2])); // degree wins
        assert!(m(&[1, 1]) < m(&[2, 0]));
    }

    #[test]
    fn difference_of_squares() {
        let vars = vec!["x".to_string(), "y".to_string()];
        let a = parse_poly(&zz(), &vars, "x+y").unwrap();
        let b = parse_poly(&zz(), &vars, "x-y").unwrap();
        let expect = parse_poly(&zz(), &vars, "x^2-y^2").unwrap();
        assert_eq!(a.mul(&b), expect);
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let vars = vec!["x".to_string(), "y".to_string()];
        let f = parse_poly(&zz(), &vars, "x+2*y-1").unwrap();
        let mut g = MultiPoly::one(zz(), vars.clone());
        for _ in 0..6 {
            g = g.mul(&f);
        }
        assert_eq!(f.pow(6), g);
    }

    #[test]
    fn display_parse_round_trip() {
        let vars = vec!["x".to_string(), "y".to_string()];
        for s in ["x^2-y^2", "3*x*y+2", "-x+1", "x^3+x^2*y+x*y^2+y^3"] {
            let p = parse_poly(&zz(), &vars, s).unwrap();
            let q = parse_poly(&zz(), &vars, &p.to_string()).unwrap();
            assert_eq!(p, q);
        }
    }

    #[test]
    fn eval_and_substitute_agree() {
        let vars = vec!["x".to_string(), "y".to_string()];
        let f = parse_poly(&zz(), &vars, "x^2*y-3*x+y").unwrap();
        let x = zz().from_int(4);
        let y = zz().from_int(-2);
        let direct = f.eval(&[x, y]);
        assert_eq!(direct, zz().from_int(4 * 4 * -2 - 12 - 2));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(8, 3), BigInt::from(56));
        assert_eq!(binomial(5, 0), BigInt::from(1));
        assert_eq!(binomial(3, 5), BigInt::from(0));
        assert_eq!(binomial(125, 62).to_string().len(), 37); // ~3e36, fits i128 check elsewhere
    }
}
