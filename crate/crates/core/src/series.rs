//! Multivariate power series truncated at a fixed total degree.
//!
//! A [`TruncatedSeries`] is the working object for all formal-group
//! computation: a sparse term map over an exact coefficient ring, in a fixed
//! ordered variable list, with every stored exponent vector of total degree
//! at most `N`. Arithmetic between two series requires identical ring,
//! variable list and truncation; anything else is a [`SeriesError::MismatchedContext`].
//!
//! Invariants maintained by every constructor and operation:
//! - no stored coefficient is zero;
//! - every stored exponent vector has total degree `<= N`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::poly::{terms_to_string, Monomial};
use crate::ring::{Coeff, RingDescriptor, RingError, RingMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("mismatched series context: {0}")]
    MismatchedContext(String),
    #[error("substitution argument has nonzero constant term")]
    NonNilpotentSubstitution,
    #[error("series has nonzero constant term")]
    NonzeroConstantTerm,
    #[error("linear coefficient is not a unit")]
    NonUnitLinearTerm,
    #[error("integer {0} is not invertible in this ring")]
    NonInvertibleInteger(u64),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A power series truncated at total degree `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    pub ring: RingDescriptor,
    pub vars: Vec<String>,
    pub trunc: u32,
    terms: BTreeMap<Monomial, Coeff>,
}

impl TruncatedSeries {
    pub fn zero(ring: RingDescriptor, vars: Vec<String>, trunc: u32) -> Self {
        TruncatedSeries {
            ring,
            vars,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: RingDescriptor, vars: Vec<String>, trunc: u32, c: Coeff) -> Self {
        let mut s = Self::zero(ring, vars, trunc);
        s.set_coeff(Monomial::constant(s.vars.len()), c);
        s
    }

    pub fn one(ring: RingDescriptor, vars: Vec<String>, trunc: u32) -> Self {
        let c = ring.one();
        Self::constant(ring, vars, trunc, c)
    }

    /// The series consisting of the single variable `vars[index]`.
    pub fn variable(
        ring: RingDescriptor,
        vars: Vec<String>,
        trunc: u32,
        index: usize,
    ) -> Self {
        let m = Monomial::variable(vars.len(), index);
        let c = ring.one();
        let mut s = Self::zero(ring, vars, trunc);
        s.set_coeff(m, c);
        s
    }

    pub fn from_terms(
        ring: RingDescriptor,
        vars: Vec<String>,
        trunc: u32,
        terms: impl IntoIterator<Item = (Monomial, Coeff)>,
    ) -> Self {
        let mut s = Self::zero(ring, vars, trunc);
        for (m, c) in terms {
            let existing = s.terms.remove(&m);
            let total = match existing {
                Some(e) => s.ring.add(&e, &c),
                None => c,
            };
            s.set_coeff(m, total);
        }
        s
    }

    /// Insert or replace one coefficient, keeping the invariants.
    pub fn set_coeff(&mut self, m: Monomial, c: Coeff) {
        debug_assert_eq!(m.arity(), self.vars.len());
        if m.degree() > self.trunc || self.ring.is_zero(&c) {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, c);
        }
    }

    pub fn coeff(&self, m: &Monomial) -> Coeff {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Coeff {
        self.coeff(&Monomial::constant(self.vars.len()))
    }

    /// Lowest total degree with a nonzero term (`None` for the zero series).
    pub fn valuation(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).min()
    }

    fn check_context(&self, other: &TruncatedSeries) -> Result<(), SeriesError> {
        if self.ring != other.ring || self.vars != other.vars || self.trunc != other.trunc {
            return Err(SeriesError::MismatchedContext(format!(
                "({} in [{}] up to degree {}) vs ({} in [{}] up to degree {})",
                self.ring,
                self.vars.join(","),
                self.trunc,
                other.ring,
                other.vars.join(","),
                other.trunc
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.check_context(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            let sum = self.ring.add(&out.coeff(m), c);
            out.set_coeff(m.clone(), sum);
        }
        Ok(out)
    }

    pub fn neg(&self) -> TruncatedSeries {
        TruncatedSeries {
            ring: self.ring.clone(),
            vars: self.vars.clone(),
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), self.ring.neg(c)))
                .collect(),
        }
    }

    pub fn sub(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.add(&other.neg())
    }

    /// Exact product with all terms of total degree `> N` discarded.
    pub fn mul(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.check_context(other)?;
        let mut acc: BTreeMap<Monomial, Coeff> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            if da > self.trunc {
                continue;
            }
            for (mb, cb) in &other.terms {
                if da + mb.degree() > self.trunc {
                    continue;
                }
                let m = ma.mul(mb);
                let prod = self.ring.mul(ca, cb);
                if self.ring.is_zero(&prod) {
                    continue;
                }
                match acc.remove(&m) {
                    Some(e) => {
                        let sum = self.ring.add(&e, &prod);
                        if !self.ring.is_zero(&sum) {
                            acc.insert(m, sum);
                        }
                    }
                    None => {
                        acc.insert(m, prod);
                    }
                }
            }
        }
        Ok(TruncatedSeries {
            ring: self.ring.clone(),
            vars: self.vars.clone(),
            trunc: self.trunc,
            terms: acc,
        })
    }

    pub fn scale(&self, c: &Coeff) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.ring.clone(), self.vars.clone(), self.trunc);
        for (m, v) in &self.terms {
            out.set_coeff(m.clone(), self.ring.mul(v, c));
        }
        out
    }

    pub fn pow(&self, e: u32) -> Result<TruncatedSeries, SeriesError> {
        let mut result = TruncatedSeries::one(self.ring.clone(), self.vars.clone(), self.trunc);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Substitute one series per variable of `self`. Arguments must share one
    /// context and have zero constant term; the result lives in that context.
    pub fn compose(&self, args: &[TruncatedSeries]) -> Result<TruncatedSeries, SeriesError> {
        if args.len() != self.vars.len() {
            return Err(SeriesError::MismatchedContext(format!(
                "composition arity: series in {} variables given {} arguments",
                self.vars.len(),
                args.len()
            )));
        }
        let Some(first) = args.first() else {
            // constant series in zero variables
            return Err(SeriesError::MismatchedContext(
                "composition requires at least one variable".into(),
            ));
        };
        for a in args {
            first.check_context(a)?;
            if a.ring != self.ring || a.trunc != self.trunc {
                return Err(SeriesError::MismatchedContext(
                    "argument ring/truncation differs from the composed series".into(),
                ));
            }
            if !self.ring.is_zero(&a.constant_term()) {
                return Err(SeriesError::NonNilpotentSubstitution);
            }
        }
        // power tables per argument, built lazily up to the needed exponent
        let mut powers: Vec<Vec<TruncatedSeries>> = args
            .iter()
            .map(|a| vec![TruncatedSeries::one(a.ring.clone(), a.vars.clone(), a.trunc), a.clone()])
            .collect();
        let mut acc = TruncatedSeries::zero(first.ring.clone(), first.vars.clone(), first.trunc);
        for (m, c) in &self.terms {
            // arguments have zero constant term, so args[i]^e has valuation
            // >= e and any term of total degree > N contributes nothing
            if m.degree() > self.trunc {
                continue;
            }
            let mut term =
                TruncatedSeries::constant(first.ring.clone(), first.vars.clone(), first.trunc, c.clone());
            for (i, table) in powers.iter_mut().enumerate() {
                let e = m.exponent(i) as usize;
                while table.len() <= e {
                    let next = table.last().unwrap().mul(&args[i])?;
                    table.push(next);
                }
                if e > 0 {
                    term = term.mul(&table[e])?;
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Compositional inverse of a univariate series with `f(0) = 0` and unit
    /// linear coefficient: returns `g` with `f(g(x)) = x = g(f(x))` up to `N`.
    ///
    /// Solved degree by degree: the degree-`k` coefficient of `f(g)` is
    /// `u*b_k` plus terms in lower `b_j`, so each `b_k` needs one division by
    /// the unit `u`. This works over every coefficient ring (no factorials).
    pub fn reversion(&self) -> Result<TruncatedSeries, SeriesError> {
        if self.vars.len() != 1 {
            return Err(SeriesError::MismatchedContext(
                "reversion needs a univariate series".into(),
            ));
        }
        if !self.ring.is_zero(&self.constant_term()) {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let lin = Monomial::from_exponents(vec![1]);
        let u = self.coeff(&lin);
        let u_inv = self.ring.inv(&u).map_err(|_| SeriesError::NonUnitLinearTerm)?;
        let n = self.trunc;
        let mut g = TruncatedSeries::zero(self.ring.clone(), self.vars.clone(), n);
        g.set_coeff(lin, u_inv.clone());
        for k in 2..=n {
            let fg = self.compose(std::slice::from_ref(&g))?;
            let mk = Monomial::from_exponents(vec![k]);
            let r = fg.coeff(&mk);
            if self.ring.is_zero(&r) {
                continue;
            }
            let b = self.ring.neg(&self.ring.mul(&u_inv, &r));
            g.set_coeff(mk, b);
        }
        Ok(g)
    }

    /// Multiplicative inverse `1/f` for `f` with unit constant term.
    pub fn mul_inverse(&self) -> Result<TruncatedSeries, SeriesError> {
        let c0 = self.constant_term();
        let c0_inv = self.ring.inv(&c0).map_err(|_| SeriesError::NonUnitLinearTerm)?;
        // 1/f = c0^{-1} * sum_k (1 - c0^{-1} f)^k, truncated
        let one = TruncatedSeries::one(self.ring.clone(), self.vars.clone(), self.trunc);
        let w = one.sub(&self.scale(&c0_inv))?; // valuation >= 1
        let mut acc = one.clone();
        let mut term = one;
        for _ in 1..=self.trunc {
            term = term.mul(&w)?;
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc.scale(&c0_inv))
    }

    /// Partial derivative with respect to `vars[index]`.
    pub fn derivative(&self, index: usize) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.ring.clone(), self.vars.clone(), self.trunc);
        for (m, c) in &self.terms {
            let e = m.exponent(index);
            if e == 0 {
                continue;
            }
            let mut exps = m.exponents().to_vec();
            exps[index] -= 1;
            let scaled = self
                .ring
                .mul(c, &self.ring.from_int(e as i64));
            out.set_coeff(Monomial::from_exponents(exps), scaled);
        }
        out
    }

    /// Termwise integral of a univariate series (constant of integration 0).
    /// Every divisor `k+1` that occurs must be a unit in the ring.
    pub fn integrate(&self) -> Result<TruncatedSeries, SeriesError> {
        if self.vars.len() != 1 {
            return Err(SeriesError::MismatchedContext(
                "integration needs a univariate series".into(),
            ));
        }
        let mut out = TruncatedSeries::zero(self.ring.clone(), self.vars.clone(), self.trunc);
        for (m, c) in &self.terms {
            let k = m.exponent(0);
            if k + 1 > self.trunc {
                continue;
            }
            let divided = self
                .ring
                .div_by_int(c, (k + 1) as i64)
                .map_err(|_| SeriesError::NonInvertibleInteger((k + 1) as u64))?;
            out.set_coeff(Monomial::from_exponents(vec![k + 1]), divided);
        }
        Ok(out)
    }

    /// Re-express this series in a larger variable context, matching
    /// variables by name. Every variable of `self` must occur in
    /// `target_vars`.
    pub fn embed(&self, target_vars: &[String]) -> Result<TruncatedSeries, SeriesError> {
        let positions: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                target_vars.iter().position(|t| t == v).ok_or_else(|| {
                    SeriesError::MismatchedContext(format!(
                        "variable `{v}` missing from target context"
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        let mut out =
            TruncatedSeries::zero(self.ring.clone(), target_vars.to_vec(), self.trunc);
        for (m, c) in &self.terms {
            let mut exps = vec![0u32; target_vars.len()];
            for (i, &pos) in positions.iter().enumerate() {
                exps[pos] = m.exponent(i);
            }
            out.set_coeff(Monomial::from_exponents(exps), c.clone());
        }
        Ok(out)
    }

    /// Rename the variables positionally (contents unchanged).
    pub fn rename_vars(&self, new_vars: Vec<String>) -> TruncatedSeries {
        assert_eq!(new_vars.len(), self.vars.len());
        TruncatedSeries {
            ring: self.ring.clone(),
            vars: new_vars,
            trunc: self.trunc,
            terms: self.terms.clone(),
        }
    }

    /// Push all coefficients through a ring map (e.g. reduction mod p or a
    /// specialization of a polynomial parameter).
    pub fn map_coeffs(&self, map: &RingMap) -> Result<TruncatedSeries, SeriesError> {
        let mut out = TruncatedSeries::zero(map.target.clone(), self.vars.clone(), self.trunc);
        for (m, c) in &self.terms {
            out.set_coeff(m.clone(), map.apply(c)?);
        }
        Ok(out)
    }

    /// Lower the truncation degree (drops higher terms).
    pub fn truncate_to(&self, n: u32) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.ring.clone(), self.vars.clone(), n.min(self.trunc));
        for (m, c) in &self.terms {
            out.set_coeff(m.clone(), c.clone());
        }
        out
    }

    /// Canonical JSON form:
    /// `{"ring": {...}, "vars": [...], "N": n, "terms": [[[e...], "coeff"], ...]}`
    /// with terms in ascending graded-lex order.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(m, c)| json!([m.exponents(), self.ring.element_to_string(c)]))
            .collect();
        json!({
            "ring": self.ring.to_json(),
            "vars": self.vars,
            "N": self.trunc,
            "terms": terms,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, SeriesError> {
        let ring = RingDescriptor::from_json(
            v.get("ring")
                .ok_or_else(|| RingError::Parse("series: missing `ring`".into()))?,
        )?;
        let vars: Vec<String> = v
            .get("vars")
            .and_then(|x| x.as_array())
            .ok_or_else(|| RingError::Parse("series: missing `vars`".into()))?
            .iter()
            .map(|x| {
                x.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| RingError::Parse("series: non-string var".into()))
            })
            .collect::<Result<_, _>>()?;
        let trunc = v
            .get("N")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| RingError::Parse("series: missing `N`".into()))? as u32;
        let mut out = TruncatedSeries::zero(ring, vars, trunc);
        let terms = v
            .get("terms")
            .and_then(|x| x.as_array())
            .ok_or_else(|| RingError::Parse("series: missing `terms`".into()))?;
        for t in terms {
            let pair = t
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| RingError::Parse("series: bad term entry".into()))?;
            let exps: Vec<u32> = pair[0]
                .as_array()
                .ok_or_else(|| RingError::Parse("series: bad exponent vector".into()))?
                .iter()
                .map(|e| {
                    e.as_u64()
                        .map(|x| x as u32)
                        .ok_or_else(|| RingError::Parse("series: bad exponent".into()))
                })
                .collect::<Result<_, _>>()?;
            if exps.len() != out.vars.len() {
                return Err(RingError::Parse("series: exponent arity mismatch".into()).into());
            }
            let c = pair[1]
                .as_str()
                .ok_or_else(|| RingError::Parse("series: coefficient must be a string".into()))?;
            let c = out.ring.parse_element(c)?;
            out.set_coeff(Monomial::from_exponents(exps), c);
        }
        Ok(out)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            terms_to_string(&self.ring, &self.vars, &self.terms)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zz() -> RingDescriptor {
        RingDescriptor::Integers
    }

    fn uni(ring: &RingDescriptor, n: u32, s: &str) -> TruncatedSeries {
        let p = crate::poly::parse_poly(ring, &["x".to_string()], s).unwrap();
        TruncatedSeries::from_terms(ring.clone(), vec!["x".to_string()], n, p.terms)
    }

    #[test]
    fn difference_of_squares_truncated() {
        let a = uni(&zz(), 2, "1+x");
        let b = uni(&zz(), 2, "1-x");
        assert_eq!(a.mul(&b).unwrap(), uni(&zz(), 2, "1-x^2"));
    }

    #[test]
    fn degree_overflow_truncates_to_zero() {
        let x = uni(&zz(), 1, "x");
        assert!(x.mul(&x).unwrap().is_zero());
    }

    #[test]
    fn square_over_f2() {
        let f2 = RingDescriptor::integers_mod(2).unwrap();
        let f = uni(&f2, 2, "1+x+x^2");
        // (1+x+x^2)^2 = 1 + 2x + 3x^2 + ... = 1 + x^2 over Z/2 at N=2
        assert_eq!(f.mul(&f).unwrap(), uni(&f2, 2, "1+x^2"));
    }

    #[test]
    fn compose_renaming() {
        let f = uni(&zz(), 4, "x+x^2");
        let y = TruncatedSeries::variable(zz(), vec!["y".to_string()], 4, 0);
        let g = f.compose(&[y]).unwrap();
        let expect = crate::poly::parse_poly(&zz(), &["y".to_string()], "y+y^2").unwrap();
        assert_eq!(
            g,
            TruncatedSeries::from_terms(zz(), vec!["y".to_string()], 4, expect.terms)
        );
    }

    #[test]
    fn compose_identity() {
        let f = uni(&zz(), 3, "x");
        let vars = vec!["x".to_string(), "y".to_string()];
        let arg = {
            let p = crate::poly::parse_poly(&zz(), &vars, "x+y+x*y").unwrap();
            TruncatedSeries::from_terms(zz(), vars.clone(), 3, p.terms)
        };
        assert_eq!(f.compose(&[arg.clone()]).unwrap(), arg);
    }

    #[test]
    fn compose_direct_expansion() {
        // f = x^2 at x + x^2, N = 3: (x+x^2)^2 = x^2 + 2x^3 + O(4)
        let f = uni(&zz(), 3, "x^2");
        let arg = uni(&zz(), 3, "x+x^2");
        assert_eq!(f.compose(&[arg]).unwrap(), uni(&zz(), 3, "x^2+2*x^3"));
    }

    #[test]
    fn compose_rejects_constant_term() {
        let f = uni(&zz(), 3, "x");
        let arg = uni(&zz(), 3, "1+x");
        assert_eq!(
            f.compose(&[arg]).unwrap_err(),
            SeriesError::NonNilpotentSubstitution
        );
    }

    #[test]
    fn reversion_identity() {
        let f = uni(&zz(), 5, "x");
        assert_eq!(f.reversion().unwrap(), f);
    }

    #[test]
    fn reversion_of_x_plus_x_squared() {
        let f = uni(&zz(), 3, "x+x^2");
        let g = f.reversion().unwrap();
        assert_eq!(g, uni(&zz(), 3, "x-x^2+2*x^3"));
        // two-sided inverse up to degree N
        assert_eq!(f.compose(&[g.clone()]).unwrap(), uni(&zz(), 3, "x"));
        assert_eq!(g.compose(&[f]).unwrap(), uni(&zz(), 3, "x"));
    }

    #[test]
    fn reversion_with_negative_unit() {
        // f = -x + x^2 over Q: solving f(g) = x degree by degree gives
        // g = -x + x^2 (checked by the round trip below)
        let q = RingDescriptor::Rationals;
        let f = uni(&q, 2, "-1*x+x^2");
        let g = f.reversion().unwrap();
        assert_eq!(g, uni(&q, 2, "-1*x+x^2"));
        assert_eq!(f.compose(&[g]).unwrap(), uni(&q, 2, "x"));
    }

    #[test]
    fn reversion_needs_unit_linear_term() {
        let f = uni(&zz(), 3, "2*x+x^2");
        assert_eq!(f.reversion().unwrap_err(), SeriesError::NonUnitLinearTerm);
    }

    #[test]
    fn mismatched_context_rejected() {
        let a = uni(&zz(), 3, "x");
        let b = uni(&zz(), 4, "x");
        assert!(matches!(
            a.add(&b).unwrap_err(),
            SeriesError::MismatchedContext(_)
        ));
        let c = uni(&RingDescriptor::Rationals, 3, "x");
        assert!(matches!(
            a.add(&c).unwrap_err(),
            SeriesError::MismatchedContext(_)
        ));
    }

    #[test]
    fn mul_inverse_geometric_series() {
        let f = uni(&zz(), 4, "1-x");
        assert_eq!(f.mul_inverse().unwrap(), uni(&zz(), 4, "1+x+x^2+x^3+x^4"));
    }

    #[test]
    fn integrate_requires_invertible_integers() {
        let z_series = uni(&zz(), 3, "x");
        assert_eq!(
            z_series.integrate().unwrap_err(),
            SeriesError::NonInvertibleInteger(2)
        );
        let q = RingDescriptor::Rationals;
        let f = uni(&q, 3, "1+x+x^2");
        let int = f.integrate().unwrap();
        assert_eq!(int, uni(&q, 3, "x+1/2*x^2+1/3*x^3"));
    }

    #[test]
    fn json_round_trip() {
        let vars = vec!["x".to_string(), "y".to_string()];
        let p = crate::poly::parse_poly(&zz(), &vars, "x+y+3*x*y-x^2").unwrap();
        let s = TruncatedSeries::from_terms(zz(), vars, 8, p.terms);
        let j = s.to_json();
        assert_eq!(TruncatedSeries::from_json(&j).unwrap(), s);
    }
}
