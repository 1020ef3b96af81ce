//! Exact coefficient rings and their elements.
//!
//! A [`RingDescriptor`] names a commutative ring with totally defined exact
//! arithmetic: the integers, the rationals, `Z/m`, a Galois field `GF(p^k)`,
//! a polynomial extension `R[x1,...,xr]`, or a nilpotent extension
//! `R[e]/(e^d)`. Elements are [`Coeff`] values; they carry no ring pointer of
//! their own, so every operation goes through the descriptor. This keeps
//! elements small and makes context mismatches explicit at the call site.
//!
//! Division is deliberately restricted: [`RingDescriptor::inv`] succeeds only
//! on units, and there is no silent lift from `Z` to `Q`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::poly::{self, Monomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("not a unit: {0}")]
    NotAUnit(String),
    #[error("ill-formed ring map: {0}")]
    IllFormedRingMap(String),
    #[error("unsupported ring: {0}")]
    UnsupportedRing(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("element does not belong to ring {0}")]
    WrongRing(String),
}

/// Description of an exact commutative coefficient ring.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RingDescriptor {
    /// The ring of integers.
    Integers,
    /// The field of rationals.
    Rationals,
    /// `Z/m` with `m >= 2` (not necessarily prime).
    IntegersMod(u64),
    /// The field with `p^k` elements, arithmetic modulo a fixed Conway
    /// polynomial. `k >= 2`; for `k = 1` use `IntegersMod(p)`.
    GaloisField { p: u64, k: u32 },
    /// `base[vars]`, a polynomial ring over `base`.
    PolynomialExtension {
        base: Box<RingDescriptor>,
        vars: Vec<String>,
    },
    /// `base[var]/(var^degree)` with `degree >= 2`.
    NilpotentExtension {
        base: Box<RingDescriptor>,
        var: String,
        degree: u32,
    },
}

/// An element of some ring; interpretation depends on the descriptor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Coeff {
    Int(BigInt),
    Rat(BigRational),
    /// Residue in `[0, m)`.
    Mod(u64),
    /// Coefficients of `1, u, ..., u^{k-1}` over `F_p`.
    Gf(Vec<u64>),
    /// Sparse polynomial in the extension variables; coefficients live in the
    /// base ring and are never zero.
    Poly(BTreeMap<Monomial, Coeff>),
    /// Coefficients of `1, e, ..., e^{d-1}` over the base ring.
    Nil(Vec<Coeff>),
}

/// Conway polynomials (monic, little-endian including the leading 1) for the
/// small field sizes this crate supports.
fn conway(p: u64, k: u32) -> Option<Vec<u64>> {
    let c: &[u64] = match (p, k) {
        (2, 2) => &[1, 1, 1],
        (2, 3) => &[1, 1, 0, 1],
        (2, 4) => &[1, 1, 0, 0, 1],
        (3, 2) => &[2, 2, 1],
        (3, 3) => &[1, 2, 0, 1],
        (3, 4) => &[2, 0, 0, 2, 1],
        (5, 2) => &[2, 4, 1],
        (5, 3) => &[3, 3, 0, 1],
        (5, 4) => &[2, 4, 4, 0, 1],
        (7, 2) => &[3, 6, 1],
        (7, 3) => &[4, 0, 6, 1],
        _ => return None,
    };
    Some(c.to_vec())
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl RingDescriptor {
    pub fn integers() -> Self {
        RingDescriptor::Integers
    }

    pub fn rationals() -> Self {
        RingDescriptor::Rationals
    }

    pub fn integers_mod(m: u64) -> Result<Self, RingError> {
        if m < 2 {
            return Err(RingError::UnsupportedRing(format!(
                "Z/{m} requires m >= 2"
            )));
        }
        Ok(RingDescriptor::IntegersMod(m))
    }

    pub fn galois_field(p: u64, k: u32) -> Result<Self, RingError> {
        if !is_prime(p) {
            return Err(RingError::UnsupportedRing(format!("GF: {p} is not prime")));
        }
        if k == 1 {
            return Ok(RingDescriptor::IntegersMod(p));
        }
        if conway(p, k).is_none() {
            return Err(RingError::UnsupportedRing(format!(
                "no modulus table entry for GF({p}^{k})"
            )));
        }
        Ok(RingDescriptor::GaloisField { p, k })
    }

    pub fn polynomial_extension(
        base: RingDescriptor,
        vars: Vec<String>,
    ) -> Result<Self, RingError> {
        if vars.is_empty() {
            return Err(RingError::UnsupportedRing(
                "polynomial extension needs at least one variable".into(),
            ));
        }
        for (i, v) in vars.iter().enumerate() {
            if v.is_empty() || vars[..i].contains(v) || base.owns_variable(v) {
                return Err(RingError::UnsupportedRing(format!(
                    "bad or duplicate extension variable `{v}`"
                )));
            }
        }
        Ok(RingDescriptor::PolynomialExtension {
            base: Box::new(base),
            vars,
        })
    }

    pub fn nilpotent_extension(
        base: RingDescriptor,
        var: &str,
        degree: u32,
    ) -> Result<Self, RingError> {
        if degree < 2 {
            return Err(RingError::UnsupportedRing(
                "nilpotent extension needs degree >= 2".into(),
            ));
        }
        if var.is_empty() || base.owns_variable(var) {
            return Err(RingError::UnsupportedRing(format!(
                "bad nilpotent variable `{var}`"
            )));
        }
        Ok(RingDescriptor::NilpotentExtension {
            base: Box::new(base),
            var: var.to_string(),
            degree,
        })
    }

    /// All extension variables in this descriptor tower, outermost first.
    pub fn all_extension_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                RingDescriptor::PolynomialExtension { base, vars } => {
                    out.extend(vars.iter().cloned());
                    cur = base;
                }
                RingDescriptor::NilpotentExtension { base, var, .. } => {
                    out.push(var.clone());
                    cur = base;
                }
                _ => return out,
            }
        }
    }

    /// True if `name` is already used as an extension variable somewhere in
    /// this descriptor tower.
    pub fn owns_variable(&self, name: &str) -> bool {
        match self {
            RingDescriptor::PolynomialExtension { base, vars } => {
                vars.iter().any(|v| v == name) || base.owns_variable(name)
            }
            RingDescriptor::NilpotentExtension { base, var, .. } => {
                var == name || base.owns_variable(name)
            }
            _ => false,
        }
    }

    /// The characteristic; 0 for `Z` and `Q`.
    pub fn characteristic(&self) -> u64 {
        match self {
            RingDescriptor::Integers | RingDescriptor::Rationals => 0,
            RingDescriptor::IntegersMod(m) => *m,
            RingDescriptor::GaloisField { p, .. } => *p,
            RingDescriptor::PolynomialExtension { base, .. } => base.characteristic(),
            RingDescriptor::NilpotentExtension { base, .. } => base.characteristic(),
        }
    }

    pub fn is_field(&self) -> bool {
        match self {
            RingDescriptor::Rationals | RingDescriptor::GaloisField { .. } => true,
            RingDescriptor::IntegersMod(m) => is_prime(*m),
            _ => false,
        }
    }

    /// True iff every nonzero integer is a unit, i.e. the ring is a
    /// `Q`-algebra. This is the precondition for termwise integration.
    pub fn is_q_algebra(&self) -> bool {
        match self {
            RingDescriptor::Rationals => true,
            RingDescriptor::PolynomialExtension { base, .. } => base.is_q_algebra(),
            RingDescriptor::NilpotentExtension { base, .. } => base.is_q_algebra(),
            _ => false,
        }
    }

    /// Number of elements for finite rings, `None` otherwise.
    pub fn size(&self) -> Option<u64> {
        match self {
            RingDescriptor::IntegersMod(m) => Some(*m),
            RingDescriptor::GaloisField { p, k } => Some(p.pow(*k)),
            RingDescriptor::NilpotentExtension { base, degree, .. } => {
                base.size().and_then(|s| s.checked_pow(*degree))
            }
            _ => None,
        }
    }

    pub fn zero(&self) -> Coeff {
        match self {
            RingDescriptor::Integers => Coeff::Int(BigInt::zero()),
            RingDescriptor::Rationals => Coeff::Rat(BigRational::zero()),
            RingDescriptor::IntegersMod(_) => Coeff::Mod(0),
            RingDescriptor::GaloisField { k, .. } => Coeff::Gf(vec![0; *k as usize]),
            RingDescriptor::PolynomialExtension { .. } => Coeff::Poly(BTreeMap::new()),
            RingDescriptor::NilpotentExtension { base, degree, .. } => {
                Coeff::Nil(vec![base.zero(); *degree as usize])
            }
        }
    }

    pub fn one(&self) -> Coeff {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> Coeff {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> Coeff {
        match self {
            RingDescriptor::Integers => Coeff::Int(n.clone()),
            RingDescriptor::Rationals => Coeff::Rat(BigRational::from_integer(n.clone())),
            RingDescriptor::IntegersMod(m) => Coeff::Mod(bigint_mod(n, *m)),
            RingDescriptor::GaloisField { p, k } => {
                let mut v = vec![0; *k as usize];
                v[0] = bigint_mod(n, *p);
                Coeff::Gf(v)
            }
            RingDescriptor::PolynomialExtension { base, .. } => {
                let c = base.from_bigint(n);
                let mut terms = BTreeMap::new();
                if !base.is_zero(&c) {
                    terms.insert(Monomial::constant(self.poly_arity()), c);
                }
                Coeff::Poly(terms)
            }
            RingDescriptor::NilpotentExtension { base, degree, .. } => {
                let mut v = vec![base.zero(); *degree as usize];
                v[0] = base.from_bigint(n);
                Coeff::Nil(v)
            }
        }
    }

    fn poly_arity(&self) -> usize {
        match self {
            RingDescriptor::PolynomialExtension { vars, .. } => vars.len(),
            _ => 0,
        }
    }

    /// The element of this ring representing an owned extension variable,
    /// wherever it sits in the extension tower.
    pub fn var_element(&self, name: &str) -> Option<Coeff> {
        match self {
            RingDescriptor::PolynomialExtension { base, vars } => {
                if let Some(i) = vars.iter().position(|v| v == name) {
                    let mut terms = BTreeMap::new();
                    terms.insert(Monomial::variable(vars.len(), i), base.one());
                    Some(Coeff::Poly(terms))
                } else {
                    let inner = base.var_element(name)?;
                    let mut terms = BTreeMap::new();
                    terms.insert(Monomial::constant(vars.len()), inner);
                    Some(Coeff::Poly(terms))
                }
            }
            RingDescriptor::NilpotentExtension { base, var, degree } => {
                let mut v = vec![base.zero(); *degree as usize];
                if var == name {
                    v[1] = base.one();
                    Some(Coeff::Nil(v))
                } else {
                    v[0] = base.var_element(name)?;
                    Some(Coeff::Nil(v))
                }
            }
            _ => None,
        }
    }

    /// Base ring of a polynomial or nilpotent extension.
    pub fn base(&self) -> Option<&RingDescriptor> {
        match self {
            RingDescriptor::PolynomialExtension { base, .. } => Some(base),
            RingDescriptor::NilpotentExtension { base, .. } => Some(base),
            _ => None,
        }
    }

    /// Extension variables of a polynomial extension.
    pub fn extension_vars(&self) -> Option<&[String]> {
        match self {
            RingDescriptor::PolynomialExtension { vars, .. } => Some(vars),
            _ => None,
        }
    }

    pub fn is_zero(&self, a: &Coeff) -> bool {
        match a {
            Coeff::Int(x) => x.is_zero(),
            Coeff::Rat(x) => x.is_zero(),
            Coeff::Mod(x) => *x == 0,
            Coeff::Gf(v) => v.iter().all(|&x| x == 0),
            Coeff::Poly(t) => t.is_empty(),
            Coeff::Nil(v) => {
                let base = self.base().expect("Nil coeff in non-extension ring");
                v.iter().all(|c| base.is_zero(c))
            }
        }
    }

    pub fn is_one(&self, a: &Coeff) -> bool {
        *a == self.one()
    }

    pub fn add(&self, a: &Coeff, b: &Coeff) -> Coeff {
        match (self, a, b) {
            (RingDescriptor::Integers, Coeff::Int(x), Coeff::Int(y)) => Coeff::Int(x + y),
            (RingDescriptor::Rationals, Coeff::Rat(x), Coeff::Rat(y)) => Coeff::Rat(x + y),
            (RingDescriptor::IntegersMod(m), Coeff::Mod(x), Coeff::Mod(y)) => {
                Coeff::Mod((x + y) % m)
            }
            (RingDescriptor::GaloisField { p, .. }, Coeff::Gf(x), Coeff::Gf(y)) => {
                Coeff::Gf(x.iter().zip(y).map(|(a, b)| (a + b) % p).collect())
            }
            (RingDescriptor::PolynomialExtension { base, .. }, Coeff::Poly(x), Coeff::Poly(y)) => {
                Coeff::Poly(poly::term_add(base, x, y))
            }
            (RingDescriptor::NilpotentExtension { base, .. }, Coeff::Nil(x), Coeff::Nil(y)) => {
                Coeff::Nil(x.iter().zip(y).map(|(a, b)| base.add(a, b)).collect())
            }
            _ => panic!("coefficient does not match ring {self}"),
        }
    }

    pub fn neg(&self, a: &Coeff) -> Coeff {
        match (self, a) {
            (RingDescriptor::Integers, Coeff::Int(x)) => Coeff::Int(-x),
            (RingDescriptor::Rationals, Coeff::Rat(x)) => Coeff::Rat(-x),
            (RingDescriptor::IntegersMod(m), Coeff::Mod(x)) => {
                Coeff::Mod(if *x == 0 { 0 } else { m - x })
            }
            (RingDescriptor::GaloisField { p, .. }, Coeff::Gf(v)) => {
                Coeff::Gf(v.iter().map(|&x| if x == 0 { 0 } else { p - x }).collect())
            }
            (RingDescriptor::PolynomialExtension { base, .. }, Coeff::Poly(t)) => {
                Coeff::Poly(t.iter().map(|(m, c)| (m.clone(), base.neg(c))).collect())
            }
            (RingDescriptor::NilpotentExtension { base, .. }, Coeff::Nil(v)) => {
                Coeff::Nil(v.iter().map(|c| base.neg(c)).collect())
            }
            _ => panic!("coefficient does not match ring {self}"),
        }
    }

    pub fn sub(&self, a: &Coeff, b: &Coeff) -> Coeff {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Coeff, b: &Coeff) -> Coeff {
        match (self, a, b) {
            (RingDescriptor::Integers, Coeff::Int(x), Coeff::Int(y)) => Coeff::Int(x * y),
            (RingDescriptor::Rationals, Coeff::Rat(x), Coeff::Rat(y)) => Coeff::Rat(x * y),
            (RingDescriptor::IntegersMod(m), Coeff::Mod(x), Coeff::Mod(y)) => {
                Coeff::Mod(((*x as u128 * *y as u128) % *m as u128) as u64)
            }
            (RingDescriptor::GaloisField { p, k }, Coeff::Gf(x), Coeff::Gf(y)) => {
                Coeff::Gf(gf_mul(*p, *k, x, y))
            }
            (RingDescriptor::PolynomialExtension { base, .. }, Coeff::Poly(x), Coeff::Poly(y)) => {
                Coeff::Poly(poly::term_mul(base, x, y))
            }
            (
                RingDescriptor::NilpotentExtension { base, degree, .. },
                Coeff::Nil(x),
                Coeff::Nil(y),
            ) => {
                let d = *degree as usize;
                let mut out = vec![base.zero(); d];
                for (i, xi) in x.iter().enumerate() {
                    if base.is_zero(xi) {
                        continue;
                    }
                    for (j, yj) in y.iter().enumerate() {
                        if i + j >= d {
                            break;
                        }
                        out[i + j] = base.add(&out[i + j], &base.mul(xi, yj));
                    }
                }
                Coeff::Nil(out)
            }
            _ => panic!("coefficient does not match ring {self}"),
        }
    }

    pub fn pow(&self, a: &Coeff, e: u64) -> Coeff {
        let mut result = self.one();
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }

    /// Multiplicative inverse; errors with [`RingError::NotAUnit`] when the
    /// element is not invertible.
    pub fn inv(&self, a: &Coeff) -> Result<Coeff, RingError> {
        let fail = || RingError::NotAUnit(self.element_to_string(a));
        match (self, a) {
            (RingDescriptor::Integers, Coeff::Int(x)) => {
                if x.is_one() || (-x).is_one() {
                    Ok(Coeff::Int(x.clone()))
                } else {
                    Err(fail())
                }
            }
            (RingDescriptor::Rationals, Coeff::Rat(x)) => {
                if x.is_zero() {
                    Err(fail())
                } else {
                    Ok(Coeff::Rat(x.recip()))
                }
            }
            (RingDescriptor::IntegersMod(m), Coeff::Mod(x)) => {
                mod_inverse(*x, *m).map(Coeff::Mod).ok_or_else(fail)
            }
            (RingDescriptor::GaloisField { p, k }, Coeff::Gf(v)) => {
                gf_inv(*p, *k, v).map(Coeff::Gf).ok_or_else(fail)
            }
            (RingDescriptor::PolynomialExtension { base, .. }, Coeff::Poly(t)) => {
                // Only constant polynomials with unit constant are inverted;
                // units with nilpotent higher coefficients are out of scope.
                if t.len() == 1 {
                    if let Some((m, c)) = t.iter().next() {
                        if m.is_constant() {
                            let ci = base.inv(c).map_err(|_| fail())?;
                            let mut terms = BTreeMap::new();
                            terms.insert(m.clone(), ci);
                            return Ok(Coeff::Poly(terms));
                        }
                    }
                }
                Err(fail())
            }
            (RingDescriptor::NilpotentExtension { base, degree, .. }, Coeff::Nil(v)) => {
                // (c + n)^{-1} = c^{-1} (1 + w + w^2 + ...) with w = -c^{-1} n,
                // a finite sum because n^degree = 0.
                let c_inv = base.inv(&v[0]).map_err(|_| fail())?;
                let mut n = v.clone();
                n[0] = base.zero();
                let w = self.neg(&self.scale_nil(&Coeff::Nil(n), &c_inv));
                let mut acc = self.one();
                let mut term = self.one();
                for _ in 1..*degree {
                    term = self.mul(&term, &w);
                    acc = self.add(&acc, &term);
                }
                Ok(self.scale_nil(&acc, &c_inv))
            }
            _ => panic!("coefficient does not match ring {self}"),
        }
    }

    fn scale_nil(&self, a: &Coeff, s: &Coeff) -> Coeff {
        match (self, a) {
            (RingDescriptor::NilpotentExtension { base, .. }, Coeff::Nil(v)) => {
                Coeff::Nil(v.iter().map(|c| base.mul(c, s)).collect())
            }
            _ => unreachable!(),
        }
    }

    /// Divide by the integer `n`, which must be a unit in the ring.
    /// There is never a silent rational lift: dividing by 2 over `Z` fails.
    pub fn div_by_int(&self, a: &Coeff, n: i64) -> Result<Coeff, RingError> {
        let n_elt = self.from_int(n);
        let n_inv = self.inv(&n_elt)?;
        Ok(self.mul(a, &n_inv))
    }

    /// All elements of a finite ring in a canonical deterministic order.
    pub fn enumerate(&self) -> Option<Vec<Coeff>> {
        match self {
            RingDescriptor::IntegersMod(m) => Some((0..*m).map(Coeff::Mod).collect()),
            RingDescriptor::GaloisField { p, k } => {
                let k = *k as usize;
                let total = p.pow(k as u32);
                let mut out = Vec::with_capacity(total as usize);
                for idx in 0..total {
                    let mut v = vec![0u64; k];
                    let mut rem = idx;
                    for slot in v.iter_mut() {
                        *slot = rem % p;
                        rem /= p;
                    }
                    out.push(Coeff::Gf(v));
                }
                Some(out)
            }
            RingDescriptor::NilpotentExtension { base, degree, .. } => {
                let elems = base.enumerate()?;
                let d = *degree as usize;
                let mut out = vec![vec![]];
                for _ in 0..d {
                    let mut next = Vec::with_capacity(out.len() * elems.len());
                    for prefix in &out {
                        for e in &elems {
                            let mut v: Vec<Coeff> = prefix.clone();
                            v.push(e.clone());
                            next.push(v);
                        }
                    }
                    out = next;
                }
                Some(out.into_iter().map(Coeff::Nil).collect())
            }
            _ => None,
        }
    }

    /// Check that `a` structurally belongs to this ring.
    pub fn validate(&self, a: &Coeff) -> Result<(), RingError> {
        let bad = || RingError::WrongRing(self.to_string());
        match (self, a) {
            (RingDescriptor::Integers, Coeff::Int(_)) => Ok(()),
            (RingDescriptor::Rationals, Coeff::Rat(_)) => Ok(()),
            (RingDescriptor::IntegersMod(m), Coeff::Mod(x)) => {
                if x < m {
                    Ok(())
                } else {
                    Err(bad())
                }
            }
            (RingDescriptor::GaloisField { p, k }, Coeff::Gf(v)) => {
                if v.len() == *k as usize && v.iter().all(|x| x < p) {
                    Ok(())
                } else {
                    Err(bad())
                }
            }
            (RingDescriptor::PolynomialExtension { base, vars }, Coeff::Poly(t)) => {
                for (m, c) in t {
                    if m.arity() != vars.len() || base.is_zero(c) {
                        return Err(bad());
                    }
                    base.validate(c)?;
                }
                Ok(())
            }
            (RingDescriptor::NilpotentExtension { base, degree, .. }, Coeff::Nil(v)) => {
                if v.len() != *degree as usize {
                    return Err(bad());
                }
                for c in v {
                    base.validate(c)?;
                }
                Ok(())
            }
            _ => Err(bad()),
        }
    }

    /// Canonical string form; residues carry their modulus (`"2 mod 5"`).
    pub fn element_to_string(&self, a: &Coeff) -> String {
        match (self, a) {
            (RingDescriptor::IntegersMod(m), Coeff::Mod(x)) => format!("{x} mod {m}"),
            _ => self.element_to_string_plain(a),
        }
    }

    /// String form without the modulus suffix; used inside composite
    /// expressions where the ring is clear from context.
    pub fn element_to_string_plain(&self, a: &Coeff) -> String {
        match (self, a) {
            (RingDescriptor::Integers, Coeff::Int(x)) => x.to_string(),
            (RingDescriptor::Rationals, Coeff::Rat(x)) => {
                if x.denom().is_one() {
                    x.numer().to_string()
                } else {
                    format!("{}/{}", x.numer(), x.denom())
                }
            }
            (RingDescriptor::IntegersMod(_), Coeff::Mod(x)) => x.to_string(),
            (RingDescriptor::GaloisField { .. }, Coeff::Gf(v)) => gf_to_string(v),
            (RingDescriptor::PolynomialExtension { base, vars }, Coeff::Poly(t)) => {
                poly::terms_to_string(base, vars, t)
            }
            (RingDescriptor::NilpotentExtension { base, var, .. }, Coeff::Nil(v)) => {
                nil_to_string(base, var, v)
            }
            _ => panic!("coefficient does not match ring {self}"),
        }
    }

    /// Parse an element from its canonical (or reasonably close) string form.
    pub fn parse_element(&self, s: &str) -> Result<Coeff, RingError> {
        let s = s.trim();
        match self {
            RingDescriptor::Integers => s
                .parse::<BigInt>()
                .map(Coeff::Int)
                .map_err(|e| RingError::Parse(format!("`{s}`: {e}"))),
            RingDescriptor::Rationals => {
                if let Some((num, den)) = s.split_once('/') {
                    let n: BigInt = num
                        .trim()
                        .parse()
                        .map_err(|e| RingError::Parse(format!("`{s}`: {e}")))?;
                    let d: BigInt = den
                        .trim()
                        .parse()
                        .map_err(|e| RingError::Parse(format!("`{s}`: {e}")))?;
                    if d.is_zero() {
                        return Err(RingError::Parse(format!("`{s}`: zero denominator")));
                    }
                    Ok(Coeff::Rat(BigRational::new(n, d)))
                } else {
                    let n: BigInt = s
                        .parse()
                        .map_err(|e| RingError::Parse(format!("`{s}`: {e}")))?;
                    Ok(Coeff::Rat(BigRational::from_integer(n)))
                }
            }
            RingDescriptor::IntegersMod(m) => {
                let body = match s.split_once("mod") {
                    Some((r, modulus)) => {
                        let declared: u64 = modulus
                            .trim()
                            .parse()
                            .map_err(|e| RingError::Parse(format!("`{s}`: {e}")))?;
                        if declared != *m {
                            return Err(RingError::Parse(format!(
                                "`{s}`: modulus {declared} does not match ring Z/{m}"
                            )));
                        }
                        r.trim()
                    }
                    None => s,
                };
                let n: BigInt = body
                    .parse()
                    .map_err(|e| RingError::Parse(format!("`{s}`: {e}")))?;
                Ok(Coeff::Mod(bigint_mod(&n, *m)))
            }
            RingDescriptor::GaloisField { p, k } => {
                let as_poly = RingDescriptor::polynomial_extension(
                    RingDescriptor::IntegersMod(*p),
                    vec!["u".to_string()],
                )?;
                let parsed = as_poly.parse_element(s)?;
                let Coeff::Poly(terms) = parsed else {
                    unreachable!()
                };
                let mut v = vec![0u64; *k as usize];
                for (m, c) in terms {
                    let e = m.exponent(0) as usize;
                    if e >= v.len() {
                        return Err(RingError::Parse(format!(
                            "`{s}`: exponent {e} too large for GF({p}^{k})"
                        )));
                    }
                    let Coeff::Mod(x) = c else { unreachable!() };
                    v[e] = x;
                }
                Ok(Coeff::Gf(v))
            }
            RingDescriptor::PolynomialExtension { base, vars } => {
                let p = poly::parse_poly(base, vars, s)?;
                Ok(Coeff::Poly(p.terms))
            }
            RingDescriptor::NilpotentExtension { base, var, degree } => {
                let as_poly = RingDescriptor::polynomial_extension(
                    (**base).clone(),
                    vec![var.clone()],
                )?;
                let parsed = as_poly.parse_element(s)?;
                let Coeff::Poly(terms) = parsed else {
                    unreachable!()
                };
                let mut v = vec![base.zero(); *degree as usize];
                for (m, c) in terms {
                    let e = m.exponent(0) as usize;
                    if e < v.len() {
                        v[e] = c;
                    }
                    // powers >= degree vanish
                }
                Ok(Coeff::Nil(v))
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            RingDescriptor::Integers => json!({"kind": "Z"}),
            RingDescriptor::Rationals => json!({"kind": "Q"}),
            RingDescriptor::IntegersMod(m) => json!({"kind": "Zmod", "m": m}),
            RingDescriptor::GaloisField { p, k } => json!({"kind": "gf", "p": p, "k": k}),
            RingDescriptor::PolynomialExtension { base, vars } => {
                json!({"kind": "poly", "base": base.to_json(), "vars": vars})
            }
            RingDescriptor::NilpotentExtension { base, var, degree } => {
                json!({"kind": "nilpotent", "base": base.to_json(), "var": var, "degree": degree})
            }
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, RingError> {
        let kind = v
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| RingError::Parse("ring: missing `kind`".into()))?;
        let get_u64 = |key: &str| {
            v.get(key)
                .and_then(|x| x.as_u64())
                .ok_or_else(|| RingError::Parse(format!("ring: missing numeric `{key}`")))
        };
        match kind {
            "Z" => Ok(RingDescriptor::Integers),
            "Q" => Ok(RingDescriptor::Rationals),
            "Zmod" => RingDescriptor::integers_mod(get_u64("m")?),
            "gf" => RingDescriptor::galois_field(get_u64("p")?, get_u64("k")? as u32),
            "poly" => {
                let base = RingDescriptor::from_json(
                    v.get("base")
                        .ok_or_else(|| RingError::Parse("ring: missing `base`".into()))?,
                )?;
                let vars = v
                    .get("vars")
                    .and_then(|x| x.as_array())
                    .ok_or_else(|| RingError::Parse("ring: missing `vars`".into()))?
                    .iter()
                    .map(|x| {
                        x.as_str()
                            .map(str::to_string)
                            .ok_or_else(|| RingError::Parse("ring: non-string var".into()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                RingDescriptor::polynomial_extension(base, vars)
            }
            "nilpotent" => {
                let base = RingDescriptor::from_json(
                    v.get("base")
                        .ok_or_else(|| RingError::Parse("ring: missing `base`".into()))?,
                )?;
                let var = v
                    .get("var")
                    .and_then(|x| x.as_str())
                    .ok_or_else(|| RingError::Parse("ring: missing `var`".into()))?;
                RingDescriptor::nilpotent_extension(base, var, get_u64("degree")? as u32)
            }
            other => Err(RingError::Parse(format!("ring: unknown kind `{other}`"))),
        }
    }
}

impl fmt::Display for RingDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingDescriptor::Integers => write!(f, "Z"),
            RingDescriptor::Rationals => write!(f, "Q"),
            RingDescriptor::IntegersMod(m) => write!(f, "Z/{m}"),
            RingDescriptor::GaloisField { p, k } => write!(f, "GF({})", p.pow(*k)),
            RingDescriptor::PolynomialExtension { base, vars } => {
                write!(f, "{}[{}]", base, vars.join(","))
            }
            RingDescriptor::NilpotentExtension { base, var, degree } => {
                write!(f, "{base}[{var}]/({var}^{degree})")
            }
        }
    }
}

fn bigint_mod(n: &BigInt, m: u64) -> u64 {
    let m_big = BigInt::from(m);
    let mut r = n % &m_big;
    if r.is_negative() {
        r += &m_big;
    }
    let (_, digits) = r.to_u64_digits();
    digits.first().copied().unwrap_or(0)
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    // extended Euclid on i128 to keep signs simple
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    let mut inv = old_s % m as i128;
    if inv < 0 {
        inv += m as i128;
    }
    Some(inv as u64)
}

fn gf_mul(p: u64, k: u32, x: &[u64], y: &[u64]) -> Vec<u64> {
    let k = k as usize;
    let mut prod = vec![0u64; 2 * k - 1];
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0 {
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            prod[i + j] = (prod[i + j] + xi * yj) % p;
        }
    }
    gf_reduce(p, k, prod)
}

fn gf_reduce(p: u64, k: usize, mut v: Vec<u64>) -> Vec<u64> {
    let modulus = conway(p, k as u32).expect("field size checked at construction");
    for i in (k..v.len()).rev() {
        let c = v[i];
        if c == 0 {
            continue;
        }
        v[i] = 0;
        // u^i = u^{i-k} * (u^k) and u^k = -(modulus minus leading term)
        for (j, &mj) in modulus.iter().enumerate().take(k) {
            let sub = (c * mj) % p;
            let idx = i - k + j;
            v[idx] = (v[idx] + p - sub) % p;
        }
    }
    v.truncate(k);
    v
}

fn gf_inv(p: u64, k: u32, a: &[u64]) -> Option<Vec<u64>> {
    if a.iter().all(|&x| x == 0) {
        return None;
    }
    // extended Euclid in F_p[u] against the field modulus
    let k = k as usize;
    let modulus = conway(p, k as u32).expect("checked");
    let mut r0: Vec<u64> = modulus;
    let mut r1: Vec<u64> = a.to_vec();
    let mut s0: Vec<u64> = vec![0];
    let mut s1: Vec<u64> = vec![1];
    let trim = |v: &mut Vec<u64>| {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
    };
    trim(&mut r1);
    loop {
        if r1.len() == 1 && r1[0] == 0 {
            return None; // gcd has positive degree: impossible for irreducible modulus
        }
        if r1.len() == 1 {
            // unit remainder: scale s1 by its inverse
            let c = mod_inverse(r1[0], p)?;
            let mut out: Vec<u64> = s1.iter().map(|&x| (x * c) % p).collect();
            out.resize(k, 0);
            return Some(out);
        }
        // divide r0 by r1
        let mut rem = r0.clone();
        let mut q = vec![0u64; rem.len().saturating_sub(r1.len()) + 1];
        let lead_inv = mod_inverse(*r1.last().unwrap(), p)?;
        while rem.len() >= r1.len() && !(rem.len() == 1 && rem[0] == 0) {
            let shift = rem.len() - r1.len();
            let c = (rem.last().unwrap() * lead_inv) % p;
            if c != 0 {
                q[shift] = (q[shift] + c) % p;
                for (j, &dj) in r1.iter().enumerate() {
                    let idx = shift + j;
                    rem[idx] = (rem[idx] + p - (c * dj) % p) % p;
                }
            }
            trim(&mut rem);
            if rem.len() < r1.len() {
                break;
            }
            if rem.iter().all(|&x| x == 0) {
                break;
            }
        }
        // s_next = s0 - q * s1
        let mut qs = vec![0u64; q.len() + s1.len() - 1];
        for (i, &qi) in q.iter().enumerate() {
            if qi == 0 {
                continue;
            }
            for (j, &sj) in s1.iter().enumerate() {
                qs[i + j] = (qs[i + j] + qi * sj) % p;
            }
        }
        let len = s0.len().max(qs.len());
        let mut s_next = vec![0u64; len];
        for (i, slot) in s_next.iter_mut().enumerate() {
            let a = s0.get(i).copied().unwrap_or(0);
            let b = qs.get(i).copied().unwrap_or(0);
            *slot = (a + p - b) % p;
        }
        trim(&mut s_next);
        r0 = r1;
        r1 = rem;
        trim(&mut r1);
        s0 = s1;
        s1 = s_next;
    }
}

fn gf_to_string(v: &[u64]) -> String {
    let mut parts = Vec::new();
    for (e, &c) in v.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let body = match e {
            0 => c.to_string(),
            1 if c == 1 => "u".to_string(),
            1 => format!("{c}*u"),
            _ if c == 1 => format!("u^{e}"),
            _ => format!("{c}*u^{e}"),
        };
        parts.push(body);
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join("+")
    }
}

fn nil_to_string(base: &RingDescriptor, var: &str, v: &[Coeff]) -> String {
    let mut parts = Vec::new();
    for (e, c) in v.iter().enumerate() {
        if base.is_zero(c) {
            continue;
        }
        let cs = base.element_to_string_plain(c);
        let needs_parens = cs.contains('+') || (cs.contains('-') && !cs.starts_with('-'));
        let cs = if needs_parens && e > 0 {
            format!("({cs})")
        } else {
            cs
        };
        let body = match e {
            0 => cs,
            1 if cs == "1" => var.to_string(),
            1 => format!("{cs}*{var}"),
            _ if cs == "1" => format!("{var}^{e}"),
            _ => format!("{cs}*{var}^{e}"),
        };
        parts.push(body);
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join("+")
    }
}

/// A ring homomorphism given by the canonical map on the prime ring plus
/// chosen images for the extension variables of the source.
#[derive(Debug, Clone)]
pub struct RingMap {
    pub source: RingDescriptor,
    pub target: RingDescriptor,
    var_images: BTreeMap<String, Coeff>,
}

impl RingMap {
    /// The canonical map, defined when the prime rings are compatible:
    /// `Z -> anything`, `Q -> Q-algebras` (elementwise it may still fail on
    /// non-invertible denominators), `Z/m -> rings of characteristic dividing m`.
    pub fn canonical(source: RingDescriptor, target: RingDescriptor) -> Result<Self, RingError> {
        Self::with_images(source, target, BTreeMap::new())
    }

    /// The inclusion into an extension ring that owns every variable of the
    /// source (each variable maps to itself).
    pub fn inclusion(source: RingDescriptor, target: RingDescriptor) -> Result<Self, RingError> {
        let mut images = BTreeMap::new();
        for v in source.all_extension_vars() {
            let img = target.var_element(&v).ok_or_else(|| {
                RingError::IllFormedRingMap(format!("target does not own variable `{v}`"))
            })?;
            images.insert(v, img);
        }
        Self::with_images(source, target, images)
    }

    pub fn with_images(
        source: RingDescriptor,
        target: RingDescriptor,
        var_images: BTreeMap<String, Coeff>,
    ) -> Result<Self, RingError> {
        let map = RingMap {
            source,
            target,
            var_images,
        };
        map.check_prime_ring()?;
        for img in map.var_images.values() {
            map.target
                .validate(img)
                .map_err(|_| RingError::IllFormedRingMap("variable image not in target".into()))?;
        }
        Ok(map)
    }

    fn check_prime_ring(&self) -> Result<(), RingError> {
        fn prime_ring(r: &RingDescriptor) -> &RingDescriptor {
            match r {
                RingDescriptor::PolynomialExtension { base, .. } => prime_ring(base),
                RingDescriptor::NilpotentExtension { base, .. } => prime_ring(base),
                other => other,
            }
        }
        let src = prime_ring(&self.source);
        let tgt_char = self.target.characteristic();
        match src {
            RingDescriptor::Integers => Ok(()),
            RingDescriptor::Rationals => Ok(()), // per-element denominator checks
            RingDescriptor::IntegersMod(m) => {
                if tgt_char != 0 && m % tgt_char == 0 {
                    Ok(())
                } else {
                    Err(RingError::IllFormedRingMap(format!(
                        "Z/{m} maps only to rings of characteristic dividing {m}"
                    )))
                }
            }
            RingDescriptor::GaloisField { p, k } => {
                // identity on the same field only
                if matches!(prime_ring(&self.target), RingDescriptor::GaloisField { p: q, k: l } if q == p && l == k)
                {
                    Ok(())
                } else {
                    Err(RingError::IllFormedRingMap(
                        "Galois field sources map only to the same field".into(),
                    ))
                }
            }
            _ => unreachable!("prime_ring returns a non-extension"),
        }
    }

    fn image_of_var(&self, v: &str) -> Result<&Coeff, RingError> {
        self.var_images.get(v).ok_or_else(|| {
            RingError::IllFormedRingMap(format!("no image given for variable `{v}`"))
        })
    }

    pub fn apply(&self, a: &Coeff) -> Result<Coeff, RingError> {
        self.apply_in(&self.source, a)
    }

    fn apply_in(&self, src: &RingDescriptor, a: &Coeff) -> Result<Coeff, RingError> {
        match (src, a) {
            (RingDescriptor::Integers, Coeff::Int(n)) => Ok(self.target.from_bigint(n)),
            (RingDescriptor::Rationals, Coeff::Rat(q)) => {
                let num = self.target.from_bigint(q.numer());
                let den = self.target.from_bigint(q.denom());
                let den_inv = self.target.inv(&den).map_err(|_| {
                    RingError::IllFormedRingMap(format!(
                        "denominator {} is not a unit in {}",
                        q.denom(),
                        self.target
                    ))
                })?;
                Ok(self.target.mul(&num, &den_inv))
            }
            (RingDescriptor::IntegersMod(_), Coeff::Mod(r)) => {
                Ok(self.target.from_bigint(&BigInt::from(*r)))
            }
            (RingDescriptor::GaloisField { .. }, Coeff::Gf(_)) => Ok(a.clone()),
            (RingDescriptor::PolynomialExtension { base, vars }, Coeff::Poly(terms)) => {
                let mut acc = self.target.zero();
                for (m, c) in terms {
                    let mut term = self.apply_in(base, c)?;
                    for (i, v) in vars.iter().enumerate() {
                        let e = m.exponent(i);
                        if e > 0 {
                            let img = self.image_of_var(v)?.clone();
                            term = self.target.mul(&term, &self.target.pow(&img, e as u64));
                        }
                    }
                    acc = self.target.add(&acc, &term);
                }
                Ok(acc)
            }
            (RingDescriptor::NilpotentExtension { base, var, degree }, Coeff::Nil(v)) => {
                let img = self.image_of_var(var)?.clone();
                if !self.target.is_zero(&self.target.pow(&img, *degree as u64)) {
                    return Err(RingError::IllFormedRingMap(format!(
                        "image of `{var}` is not {degree}-step nilpotent in {}",
                        self.target
                    )));
                }
                let mut acc = self.target.zero();
                for (i, c) in v.iter().enumerate() {
                    let t = self.apply_in(base, c)?;
                    let t = self
                        .target
                        .mul(&t, &self.target.pow(&img, i as u64));
                    acc = self.target.add(&acc, &t);
                }
                Ok(acc)
            }
            _ => Err(RingError::WrongRing(src.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modular_arithmetic_basics() {
        let r = RingDescriptor::integers_mod(7).unwrap();
        let a = r.from_int(5);
        let b = r.from_int(4);
        assert_eq!(r.mul(&a, &b), r.from_int(6)); // 20 mod 7
        assert_eq!(r.inv(&a).unwrap(), r.from_int(3)); // 5*3 = 15 = 1 mod 7
        let z6 = RingDescriptor::integers_mod(6).unwrap();
        assert!(z6.inv(&z6.from_int(2)).is_err());
        assert!(z6.inv(&z6.from_int(5)).is_ok());
    }

    #[test]
    fn rejects_modulus_below_two() {
        assert!(RingDescriptor::integers_mod(1).is_err());
        assert!(RingDescriptor::integers_mod(0).is_err());
    }

    #[test]
    fn integer_units_only_pm_one() {
        let z = RingDescriptor::Integers;
        assert!(z.inv(&z.from_int(1)).is_ok());
        assert!(z.inv(&z.from_int(-1)).is_ok());
        assert!(z.inv(&z.from_int(2)).is_err());
        assert!(z.div_by_int(&z.from_int(4), 2).is_err(), "no rational lift");
    }

    #[test]
    fn field_moduli_are_irreducible() {
        // no roots and no degree<=2 factors; enough for k <= 4
        for (p, k) in [(2u64, 2u32), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4), (5, 2), (5, 3), (5, 4), (7, 2), (7, 3)] {
            let f = conway(p, k).unwrap();
            let eval = |x: u64| -> u64 {
                let mut acc = 0u64;
                for &c in f.iter().rev() {
                    acc = (acc * x + c) % p;
                }
                acc
            };
            for x in 0..p {
                assert_ne!(eval(x), 0, "GF({p}^{k}) modulus has root {x}");
            }
            if k == 4 {
                // check no irreducible quadratic divides it
                let ring = RingDescriptor::galois_field(p, 2).unwrap();
                // f has a quadratic factor iff it has a root in GF(p^2)
                for e in ring.enumerate().unwrap() {
                    let mut acc = ring.zero();
                    for &c in f.iter().rev() {
                        acc = ring.add(&ring.mul(&acc, &e), &ring.from_int(c as i64));
                    }
                    assert!(!ring.is_zero(&acc), "GF({p}^4) modulus has root in GF({p}^2)");
                }
            }
        }
    }

    #[test]
    fn galois_field_inverses() {
        for (p, k) in [(2u64, 2u32), (3, 2), (2, 4), (5, 2)] {
            let r = RingDescriptor::galois_field(p, k).unwrap();
            for e in r.enumerate().unwrap() {
                if r.is_zero(&e) {
                    assert!(r.inv(&e).is_err());
                } else {
                    let inv = r.inv(&e).unwrap();
                    assert!(r.is_one(&r.mul(&e, &inv)));
                }
            }
        }
    }

    #[test]
    fn frobenius_fixed_field_of_gf9_is_prime_field() {
        let r = RingDescriptor::galois_field(3, 2).unwrap();
        let fixed: Vec<_> = r
            .enumerate()
            .unwrap()
            .into_iter()
            .filter(|e| r.pow(e, 3) == *e)
            .collect();
        assert_eq!(fixed.len(), 3);
    }

    #[test]
    fn nilpotent_extension_arithmetic() {
        let base = RingDescriptor::integers_mod(3).unwrap();
        let r = RingDescriptor::nilpotent_extension(base, "e", 2).unwrap();
        let e = r.parse_element("e").unwrap();
        assert!(r.is_zero(&r.mul(&e, &e)));
        // 1 + e is a unit with inverse 1 - e = 1 + 2e
        let one_plus = r.parse_element("1+e").unwrap();
        let inv = r.inv(&one_plus).unwrap();
        assert!(r.is_one(&r.mul(&one_plus, &inv)));
        assert_eq!(r.element_to_string(&inv), "1+2*e");
        assert_eq!(r.size(), Some(9));
    }

    #[test]
    fn polynomial_extension_strings_round_trip() {
        let r = RingDescriptor::polynomial_extension(RingDescriptor::Integers, vec!["t".into()])
            .unwrap();
        for s in ["0", "1", "t", "3*t^2+1", "-2*t+5", "t^3-t"] {
            let e = r.parse_element(s).unwrap();
            let printed = r.element_to_string(&e);
            let e2 = r.parse_element(&printed).unwrap();
            assert_eq!(e, e2, "`{s}` -> `{printed}`");
        }
    }

    #[test]
    fn canonical_map_q_to_fp_checks_denominators() {
        let q = RingDescriptor::Rationals;
        let f3 = RingDescriptor::integers_mod(3).unwrap();
        let map = RingMap::canonical(q.clone(), f3.clone()).unwrap();
        let half = q.parse_element("1/2").unwrap();
        assert_eq!(map.apply(&half).unwrap(), f3.from_int(2)); // 2^{-1} = 2 mod 3
        let third = q.parse_element("1/3").unwrap();
        assert!(map.apply(&third).is_err());
    }

    #[test]
    fn ring_json_round_trip() {
        let rings = [
            RingDescriptor::Integers,
            RingDescriptor::Rationals,
            RingDescriptor::integers_mod(12).unwrap(),
            RingDescriptor::galois_field(3, 2).unwrap(),
            RingDescriptor::polynomial_extension(RingDescriptor::Integers, vec!["t".into()])
                .unwrap(),
            RingDescriptor::nilpotent_extension(
                RingDescriptor::integers_mod(2).unwrap(),
                "e",
                4,
            )
            .unwrap(),
        ];
        for r in rings {
            let j = r.to_json();
            assert_eq!(RingDescriptor::from_json(&j).unwrap(), r);
        }
    }

    #[test]
    fn variable_collisions_rejected() {
        let zt = RingDescriptor::polynomial_extension(RingDescriptor::Integers, vec!["t".into()])
            .unwrap();
        assert!(RingDescriptor::polynomial_extension(zt.clone(), vec!["t".into()]).is_err());
        assert!(RingDescriptor::nilpotent_extension(zt, "t", 2).is_err());
    }
}
