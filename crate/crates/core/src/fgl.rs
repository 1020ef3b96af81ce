//! One-dimensional formal group laws at truncation.
//!
//! A [`FormalGroupLaw`] is a two-variable series `F(X,Y) = X + Y + sum a_ij
//! X^i Y^j` whose unit, commutativity and associativity axioms have been
//! verified exactly up to the truncation degree. On top of the validated law
//! this module provides the formal inverse, n-series, height over prime
//! characteristic, the char-0 logarithm/exponential, base change, and the
//! one-parameter rescaling family `F_t(X,Y) = t^{-1} F(tX, tY)` that
//! degenerates any law to the additive one at `t = 0`.

use std::fmt;

use thiserror::Error;

use crate::poly::Monomial;
use crate::ring::{Coeff, RingDescriptor, RingError, RingMap};
use crate::series::{SeriesError, TruncatedSeries};

pub const VAR_X: &str = "X";
pub const VAR_Y: &str = "Y";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    Commutativity,
    Unit,
    Associativity,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Commutativity => write!(f, "commutativity"),
            Axiom::Unit => write!(f, "unit"),
            Axiom::Associativity => write!(f, "associativity"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FglError {
    #[error("axiom violation ({axiom}) at {monomial}: {discrepancy}")]
    AxiomViolation {
        axiom: Axiom,
        monomial: String,
        discrepancy: String,
    },
    #[error("height is indeterminate at truncation: {0}")]
    IndeterminateAtTruncation(String),
    #[error("integer {0} is not invertible in this ring")]
    NonInvertibleInteger(u64),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Height of a law over a ring of prime characteristic. A vanishing p-series
/// only certifies infinity *at this truncation*; the flag keeps that honest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Height {
    Finite(u32),
    InfinityAtTruncation { trunc: u32 },
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Finite(h) => write!(f, "{h}"),
            Height::InfinityAtTruncation { trunc } => {
                write!(f, "infinity (at truncation {trunc})")
            }
        }
    }
}

/// A validated one-dimensional formal group law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalGroupLaw {
    series: TruncatedSeries,
}

fn fgl_vars() -> Vec<String> {
    vec![VAR_X.to_string(), VAR_Y.to_string()]
}

impl FormalGroupLaw {
    /// Validate the unit, commutativity and associativity axioms of a
    /// candidate series in `(X, Y)` up to its truncation degree. On failure
    /// the error names the first violated axiom (commutativity is checked
    /// first) and the offending monomial.
    pub fn check(series: TruncatedSeries) -> Result<Self, FglError> {
        if series.vars != fgl_vars() {
            return Err(SeriesError::MismatchedContext(format!(
                "formal group law must live in variables [{VAR_X},{VAR_Y}], got [{}]",
                series.vars.join(",")
            ))
            .into());
        }
        let ring = series.ring.clone();
        let n = series.trunc;

        // commutativity: a_ij = a_ji, smallest offending monomial first
        for (m, c) in series.terms() {
            let (i, j) = (m.exponent(0), m.exponent(1));
            if i < j {
                continue;
            }
            let mirror = Monomial::from_exponents(vec![j, i]);
            let other = series.coeff(&mirror);
            if *c != other {
                return Err(FglError::AxiomViolation {
                    axiom: Axiom::Commutativity,
                    monomial: monomial_name(j, i),
                    discrepancy: format!(
                        "coefficient of {} is {} but coefficient of {} is {}",
                        monomial_name(i, j),
                        ring.element_to_string(c),
                        monomial_name(j, i),
                        ring.element_to_string(&other)
                    ),
                });
            }
        }

        // unit axiom: F(X,0) = X and F(0,Y) = Y, read off directly
        let mut check_edge = |along_x: bool| -> Result<(), FglError> {
            for d in 0..=n {
                let m = if along_x {
                    Monomial::from_exponents(vec![d, 0])
                } else {
                    Monomial::from_exponents(vec![0, d])
                };
                let c = series.coeff(&m);
                let expected = if d == 1 { ring.one() } else { ring.zero() };
                if c != expected {
                    let (i, j) = if along_x { (d, 0) } else { (0, d) };
                    return Err(FglError::AxiomViolation {
                        axiom: Axiom::Unit,
                        monomial: monomial_name(i, j),
                        discrepancy: format!(
                            "expected {}, found {}",
                            ring.element_to_string(&expected),
                            ring.element_to_string(&c)
                        ),
                    });
                }
            }
            Ok(())
        };
        check_edge(true)?;
        check_edge(false)?;

        // associativity in a three-variable context at the same truncation
        let xyz: Vec<String> = vec!["X".into(), "Y".into(), "Z".into()];
        let x3 = TruncatedSeries::variable(ring.clone(), xyz.clone(), n, 0);
        let y3 = TruncatedSeries::variable(ring.clone(), xyz.clone(), n, 1);
        let z3 = TruncatedSeries::variable(ring.clone(), xyz.clone(), n, 2);
        let f_xy = series.embed(&xyz)?;
        let f_yz = series
            .rename_vars(vec!["Y".into(), "Z".into()])
            .embed(&xyz)?;
        let lhs = series.compose(&[f_xy, z3])?;
        let rhs = series.compose(&[x3, f_yz])?;
        let diff = lhs.sub(&rhs)?;
        if let Some((m, c)) = diff.terms().next() {
            return Err(FglError::AxiomViolation {
                axiom: Axiom::Associativity,
                monomial: format!(
                    "X^{}*Y^{}*Z^{}",
                    m.exponent(0),
                    m.exponent(1),
                    m.exponent(2)
                ),
                discrepancy: format!(
                    "F(F(X,Y),Z) - F(X,F(Y,Z)) has coefficient {}",
                    ring.element_to_string(c)
                ),
            });
        }

        Ok(FormalGroupLaw { series })
    }

    /// The additive law `X + Y`.
    pub fn additive(ring: RingDescriptor, trunc: u32) -> Self {
        let x = TruncatedSeries::variable(ring.clone(), fgl_vars(), trunc, 0);
        let y = TruncatedSeries::variable(ring, fgl_vars(), trunc, 1);
        FormalGroupLaw {
            series: x.add(&y).expect("same context"),
        }
    }

    /// The multiplicative law `X + Y + XY`.
    pub fn multiplicative(ring: RingDescriptor, trunc: u32) -> Self {
        let mut s = Self::additive(ring.clone(), trunc).series;
        s.set_coeff(Monomial::from_exponents(vec![1, 1]), ring.one());
        FormalGroupLaw { series: s }
    }

    /// Build `X + Y + sum a_ij X^i Y^j` from a coefficient table (`i, j >= 1`)
    /// and validate it.
    pub fn from_coefficients(
        ring: RingDescriptor,
        trunc: u32,
        coeffs: impl IntoIterator<Item = (u32, u32, Coeff)>,
    ) -> Result<Self, FglError> {
        let mut s = Self::additive(ring.clone(), trunc).series;
        for (i, j, c) in coeffs {
            if i == 0 || j == 0 {
                return Err(SeriesError::MismatchedContext(
                    "coefficient table entries need i, j >= 1; the linear part is implicit".into(),
                )
                .into());
            }
            s.set_coeff(Monomial::from_exponents(vec![i, j]), c);
        }
        Self::check(s)
    }

    pub fn ring(&self) -> &RingDescriptor {
        &self.series.ring
    }

    pub fn trunc(&self) -> u32 {
        self.series.trunc
    }

    pub fn series(&self) -> &TruncatedSeries {
        &self.series
    }

    /// The nonlinear coefficient table `a_ij`, `i, j >= 1`, in graded-lex order.
    pub fn coefficients(&self) -> Vec<(u32, u32, Coeff)> {
        self.series
            .terms()
            .filter(|(m, _)| m.exponent(0) >= 1 && m.exponent(1) >= 1)
            .map(|(m, c)| (m.exponent(0), m.exponent(1), c.clone()))
            .collect()
    }

    pub fn coefficient(&self, i: u32, j: u32) -> Coeff {
        self.series.coeff(&Monomial::from_exponents(vec![i, j]))
    }

    /// True if this is exactly the additive law at this truncation.
    pub fn is_additive(&self) -> bool {
        self.coefficients().is_empty()
    }

    /// Add two univariate series with the group law: `F(a(x), b(x))`.
    pub fn combine(
        &self,
        a: &TruncatedSeries,
        b: &TruncatedSeries,
    ) -> Result<TruncatedSeries, FglError> {
        Ok(self.series.compose(&[a.clone(), b.clone()])?)
    }

    /// The formal inverse: the unique series with `F(X, i(X)) = 0`, found by
    /// undetermined coefficients so it exists in every characteristic.
    pub fn formal_inverse(&self) -> Result<TruncatedSeries, FglError> {
        let ring = self.ring().clone();
        let n = self.trunc();
        let xvars = vec![VAR_X.to_string()];
        let x = TruncatedSeries::variable(ring.clone(), xvars.clone(), n, 0);
        let mut inv = x.neg();
        for k in 2..=n {
            let trial = self.combine(&x, &inv)?;
            let mk = Monomial::from_exponents(vec![k]);
            let r = trial.coeff(&mk);
            if ring.is_zero(&r) {
                continue;
            }
            // F = X + Y + ..., so the Y-linear slot contributes the unknown
            // degree-k coefficient exactly once
            inv.set_coeff(mk, ring.neg(&r));
        }
        debug_assert!(self.combine(&x, &inv)?.is_zero());
        Ok(inv)
    }

    /// The n-series `[n](X)`: `[0] = 0`, `[n+1] = F(X, [n])`, `[-n] = i([n])`.
    pub fn n_series(&self, n: i64) -> Result<TruncatedSeries, FglError> {
        let ring = self.ring().clone();
        let xvars = vec![VAR_X.to_string()];
        let x = TruncatedSeries::variable(ring.clone(), xvars.clone(), self.trunc(), 0);
        let mut acc = TruncatedSeries::zero(ring, xvars, self.trunc());
        for _ in 0..n.unsigned_abs() {
            acc = self.combine(&x, &acc)?;
        }
        if n < 0 {
            let inv = self.formal_inverse()?;
            acc = inv.compose(&[acc])?;
        }
        Ok(acc)
    }

    /// Height over a ring of prime characteristic `p`: the `h` with
    /// `[p](X) = u X^{p^h} + ...` for a unit `u`.
    pub fn height(&self) -> Result<Height, FglError> {
        let p = self.ring().characteristic();
        if p == 0 || !crate::ring::is_prime(p) {
            return Err(FglError::IndeterminateAtTruncation(format!(
                "height needs prime characteristic, ring {} has characteristic {p}",
                self.ring()
            )));
        }
        if (self.trunc() as u64) < p {
            return Err(FglError::IndeterminateAtTruncation(format!(
                "truncation {} is below p = {p}",
                self.trunc()
            )));
        }
        let ps = self.n_series(p as i64)?;
        let Some(val) = ps.valuation() else {
            return Ok(Height::InfinityAtTruncation {
                trunc: self.trunc(),
            });
        };
        // the leading degree must be p^h with a unit coefficient
        let mut d = val as u64;
        let mut h = 0u32;
        while d % p == 0 {
            d /= p;
            h += 1;
        }
        if d != 1 {
            return Err(FglError::IndeterminateAtTruncation(format!(
                "[p](X) starts at degree {val}, which is not a power of {p}"
            )));
        }
        let lead = ps.coeff(&Monomial::from_exponents(vec![val]));
        if self.ring().inv(&lead).is_err() {
            return Err(FglError::IndeterminateAtTruncation(format!(
                "leading coefficient {} of [p](X) is not a unit",
                self.ring().element_to_string(&lead)
            )));
        }
        Ok(Height::Finite(h))
    }

    /// The logarithm: the strict isomorphism to the additive law over a
    /// `Q`-algebra, computed from the invariant differential
    /// `log'(X) = 1 / (dF/dY)(X, 0)` and integrated termwise.
    pub fn log(&self) -> Result<TruncatedSeries, FglError> {
        if !self.ring().is_q_algebra() {
            return Err(FglError::NonInvertibleInteger(
                self.ring().characteristic().max(2),
            ));
        }
        let ring = self.ring().clone();
        let n = self.trunc();
        let xvars = vec![VAR_X.to_string()];
        // (dF/dY)(X, 0) reads off the Y-linear coefficients a_{i,1}
        let mut invariant = TruncatedSeries::zero(ring.clone(), xvars.clone(), n);
        for (m, c) in self.series.terms() {
            if m.exponent(1) == 1 {
                invariant.set_coeff(
                    Monomial::from_exponents(vec![m.exponent(0)]),
                    c.clone(),
                );
            }
        }
        let log_prime = invariant.mul_inverse()?;
        // integration shifts degree up; compute at N+1 precision there is no
        // need, the N-th coefficient of log comes from degree N-1 of log'
        let log = log_prime.integrate()?;
        debug_assert!({
            let lx = log.embed(&fgl_vars())?;
            let ly = log
                .rename_vars(vec![VAR_Y.to_string()])
                .embed(&fgl_vars())?;
            let lhs = log.compose(&[self.series.clone()])?;
            lhs == lx.add(&ly)?
        });
        Ok(log)
    }

    /// Rebuild a law from a logarithm: `exp = log^{-1}`, `F = exp(l(X) + l(Y))`.
    /// The input must have zero constant term and linear coefficient 1.
    pub fn from_log(l: &TruncatedSeries) -> Result<Self, FglError> {
        if l.vars.len() != 1 {
            return Err(SeriesError::MismatchedContext(
                "a logarithm is a univariate series".into(),
            )
            .into());
        }
        let lin = l.coeff(&Monomial::from_exponents(vec![1]));
        if !l.ring.is_one(&lin) || !l.ring.is_zero(&l.constant_term()) {
            return Err(SeriesError::NonUnitLinearTerm.into());
        }
        let exp = l.reversion()?;
        let l_x = l.rename_vars(vec![VAR_X.to_string()]).embed(&fgl_vars())?;
        let l_y = l.rename_vars(vec![VAR_Y.to_string()]).embed(&fgl_vars())?;
        let arg = l_x.add(&l_y)?;
        let f = exp.rename_vars(vec![VAR_X.to_string()]).compose(&[arg])?;
        Self::check(f)
    }

    /// The deformation family `F_t(X, Y) = t^{-1} F(tX, tY)` over `R[t]`:
    /// each `a_ij` is rescaled by `t^{i+j-1}`. Specializing `t = 1` recovers
    /// `F`; `t = 0` gives the additive law (the degeneration to the tangent
    /// normal cone).
    pub fn deform(&self) -> Result<Self, FglError> {
        let var = self.deformation_variable();
        let ring = self.ring().clone();
        let ext = RingDescriptor::polynomial_extension(ring.clone(), vec![var.clone()])?;
        let inc = RingMap::inclusion(ring, ext.clone())?;
        let t = ext
            .var_element(&var)
            .expect("freshly adjoined variable exists");
        let mut s = Self::additive(ext.clone(), self.trunc()).series().clone();
        for (i, j, c) in self.coefficients() {
            let lifted = inc.apply(&c)?;
            let scaled = ext.mul(&lifted, &ext.pow(&t, (i + j - 1) as u64));
            s.set_coeff(Monomial::from_exponents(vec![i, j]), scaled);
        }
        Self::check(s)
    }

    /// The name used for the deformation parameter: `t` unless the base ring
    /// already owns it.
    pub fn deformation_variable(&self) -> String {
        let mut candidate = "t".to_string();
        let mut k = 1;
        while self.ring().owns_variable(&candidate) {
            k += 1;
            candidate = format!("t{k}");
        }
        candidate
    }

    /// Specialize the deformation parameter of a family over `R[t]` to a
    /// value of `R`.
    pub fn specialize(&self, var: &str, value: &Coeff) -> Result<Self, FglError> {
        let RingDescriptor::PolynomialExtension { base, vars } = self.ring() else {
            return Err(RingError::IllFormedRingMap(format!(
                "ring {} is not a polynomial extension",
                self.ring()
            ))
            .into());
        };
        if vars.len() != 1 || vars[0] != var {
            return Err(RingError::IllFormedRingMap(format!(
                "ring {} does not have `{var}` as its outer parameter",
                self.ring()
            ))
            .into());
        }
        let mut images = std::collections::BTreeMap::new();
        images.insert(var.to_string(), value.clone());
        // inner variables of the base map to themselves
        for v in base.all_extension_vars() {
            images.insert(v.clone(), base.var_element(&v).expect("owned variable"));
        }
        let map = RingMap::with_images(self.ring().clone(), (**base).clone(), images)?;
        self.base_change(&map)
    }

    /// Apply a ring map to every coefficient and re-verify the axioms.
    pub fn base_change(&self, map: &RingMap) -> Result<Self, FglError> {
        if map.source != *self.ring() {
            return Err(RingError::IllFormedRingMap(format!(
                "map source {} does not match law ring {}",
                map.source,
                self.ring()
            ))
            .into());
        }
        let s = self.series.map_coeffs(map)?;
        Self::check(s)
    }

    /// JSON form: `{"ring": ..., "N": n, "coeffs": [[i, j, "a_ij"], ...]}`,
    /// nonlinear coefficients only.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let coeffs: Vec<serde_json::Value> = self
            .coefficients()
            .into_iter()
            .map(|(i, j, c)| json!([i, j, self.ring().element_to_string(&c)]))
            .collect();
        json!({
            "ring": self.ring().to_json(),
            "N": self.trunc(),
            "coeffs": coeffs,
        })
    }

    /// Parse and validate a law from its JSON form. `default_ring` and
    /// `default_trunc` fill in omitted fields.
    pub fn from_json(
        v: &serde_json::Value,
        default_ring: Option<RingDescriptor>,
        default_trunc: Option<u32>,
    ) -> Result<Self, FglError> {
        let ring = match v.get("ring") {
            Some(r) => RingDescriptor::from_json(r)?,
            None => default_ring.ok_or_else(|| RingError::Parse("law: missing `ring`".into()))?,
        };
        let trunc = match v.get("N").and_then(|x| x.as_u64()) {
            Some(n) => n as u32,
            None => default_trunc.ok_or_else(|| RingError::Parse("law: missing `N`".into()))?,
        };
        let coeffs = v
            .get("coeffs")
            .and_then(|x| x.as_array())
            .ok_or_else(|| RingError::Parse("law: missing `coeffs`".into()))?;
        let mut table = Vec::new();
        for entry in coeffs {
            let triple = entry
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| RingError::Parse("law: bad coeffs entry".into()))?;
            let i = triple[0]
                .as_u64()
                .ok_or_else(|| RingError::Parse("law: bad i index".into()))? as u32;
            let j = triple[1]
                .as_u64()
                .ok_or_else(|| RingError::Parse("law: bad j index".into()))? as u32;
            let c = triple[2]
                .as_str()
                .ok_or_else(|| RingError::Parse("law: coefficient must be a string".into()))?;
            let c = ring.parse_element(c)?;
            table.push((i, j, c));
        }
        Self::from_coefficients(ring, trunc, table)
    }
}

fn monomial_name(i: u32, j: u32) -> String {
    match (i, j) {
        (0, 0) => "1".to_string(),
        _ => {
            let mut parts = Vec::new();
            match i {
                0 => {}
                1 => parts.push("X".to_string()),
                _ => parts.push(format!("X^{i}")),
            }
            match j {
                0 => {}
                1 => parts.push("Y".to_string()),
                _ => parts.push(format!("Y^{j}")),
            }
            parts.join("*")
        }
    }
}

impl fmt::Display for FormalGroupLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.series)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zz() -> RingDescriptor {
        RingDescriptor::Integers
    }

    fn law_from(ring: &RingDescriptor, n: u32, s: &str) -> Result<FormalGroupLaw, FglError> {
        let p = crate::poly::parse_poly(ring, &fgl_vars(), s).unwrap();
        FormalGroupLaw::check(TruncatedSeries::from_terms(
            ring.clone(),
            fgl_vars(),
            n,
            p.terms,
        ))
    }

    fn uni(ring: &RingDescriptor, n: u32, s: &str) -> TruncatedSeries {
        let p = crate::poly::parse_poly(ring, &[VAR_X.to_string()], s).unwrap();
        TruncatedSeries::from_terms(ring.clone(), vec![VAR_X.to_string()], n, p.terms)
    }

    #[test]
    fn additive_and_multiplicative_are_valid() {
        assert!(law_from(&zz(), 6, "X+Y").is_ok());
        assert!(law_from(&zz(), 6, "X+Y+X*Y").is_ok());
    }

    #[test]
    fn asymmetric_term_fails_commutativity() {
        let err = law_from(&zz(), 4, "X+Y+X^2").unwrap_err();
        match err {
            FglError::AxiomViolation { axiom, monomial, .. } => {
                assert_eq!(axiom, Axiom::Commutativity);
                assert_eq!(monomial, "X^2");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn symmetric_nonassociative_fails_associativity() {
        // X + Y + X^2 Y + X Y^2 is commutative and satisfies the unit axiom
        // but not associativity
        let err = law_from(&zz(), 4, "X+Y+X^2*Y+X*Y^2").unwrap_err();
        match err {
            FglError::AxiomViolation { axiom, .. } => assert_eq!(axiom, Axiom::Associativity),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unit_axiom_violation_detected() {
        let err = law_from(&zz(), 4, "X+Y+X^2+Y^2").unwrap_err();
        match err {
            FglError::AxiomViolation { axiom, .. } => assert_eq!(axiom, Axiom::Unit),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn inverse_of_additive_is_negation() {
        let g = FormalGroupLaw::additive(zz(), 5);
        assert_eq!(g.formal_inverse().unwrap(), uni(&zz(), 5, "-1*X"));
    }

    #[test]
    fn inverse_of_multiplicative_is_geometric() {
        let g = FormalGroupLaw::multiplicative(zz(), 3);
        assert_eq!(g.formal_inverse().unwrap(), uni(&zz(), 3, "-1*X+X^2-X^3"));
    }

    #[test]
    fn inverse_of_family() {
        let zt = RingDescriptor::polynomial_extension(zz(), vec!["t".into()]).unwrap();
        let g = law_from(&zt, 2, "X+Y+t*X*Y").unwrap();
        assert_eq!(g.formal_inverse().unwrap(), uni(&zt, 2, "-1*X+t*X^2"));
    }

    #[test]
    fn n_series_values() {
        let g = FormalGroupLaw::multiplicative(zz(), 4);
        assert_eq!(g.n_series(1).unwrap(), uni(&zz(), 4, "X"));
        assert_eq!(g.n_series(2).unwrap(), uni(&zz(), 4, "2*X+X^2"));
        let f2 = RingDescriptor::integers_mod(2).unwrap();
        let g2 = FormalGroupLaw::multiplicative(f2.clone(), 4);
        assert_eq!(g2.n_series(2).unwrap(), uni(&f2, 4, "X^2"));
    }

    #[test]
    fn n_series_of_negative_n_inverts() {
        let g = FormalGroupLaw::multiplicative(zz(), 5);
        let plus = g.n_series(3).unwrap();
        let minus = g.n_series(-3).unwrap();
        assert!(g.combine(&plus, &minus).unwrap().is_zero());
    }

    #[test]
    fn heights_of_standard_laws() {
        for p in [2u64, 3, 5] {
            let fp = RingDescriptor::integers_mod(p).unwrap();
            let mult = FormalGroupLaw::multiplicative(fp.clone(), (p as u32) + 2);
            assert_eq!(mult.height().unwrap(), Height::Finite(1));
            let add = FormalGroupLaw::additive(fp, (p as u32) + 2);
            assert_eq!(
                add.height().unwrap(),
                Height::InfinityAtTruncation {
                    trunc: (p as u32) + 2
                }
            );
        }
    }

    #[test]
    fn height_requires_prime_characteristic() {
        let g = FormalGroupLaw::multiplicative(zz(), 5);
        assert!(matches!(
            g.height(),
            Err(FglError::IndeterminateAtTruncation(_))
        ));
        let z4 = RingDescriptor::integers_mod(4).unwrap();
        let g4 = FormalGroupLaw::multiplicative(z4, 5);
        assert!(g4.height().is_err());
    }

    #[test]
    fn log_of_multiplicative_is_mercator() {
        let q = RingDescriptor::Rationals;
        let g = FormalGroupLaw::multiplicative(q.clone(), 3);
        assert_eq!(g.log().unwrap(), uni(&q, 3, "X-1/2*X^2+1/3*X^3"));
        let add = FormalGroupLaw::additive(q.clone(), 3);
        assert_eq!(add.log().unwrap(), uni(&q, 3, "X"));
    }

    #[test]
    fn log_needs_q_algebra() {
        let g = FormalGroupLaw::multiplicative(zz(), 3);
        assert!(matches!(g.log(), Err(FglError::NonInvertibleInteger(_))));
    }

    #[test]
    fn log_exp_round_trip() {
        let q = RingDescriptor::Rationals;
        let g = law_from(&q, 6, "X+Y+X*Y+2*X^2*Y+2*X*Y^2").unwrap_or_else(|_| {
            // fall back: conjugate of multiplicative by X + X^2
            let m = FormalGroupLaw::multiplicative(q.clone(), 6);
            let phi = uni(&q, 6, "X+X^2");
            conjugate(&m, &phi).unwrap()
        });
        let reconstructed = FormalGroupLaw::from_log(&g.log().unwrap()).unwrap();
        assert_eq!(reconstructed, g);
    }

    /// Transport a law along a strict isomorphism `phi`: the conjugated law
    /// `phi(F(phi^{-1} X, phi^{-1} Y))`, used by tests as a law generator.
    pub(crate) fn conjugate(
        g: &FormalGroupLaw,
        phi: &TruncatedSeries,
    ) -> Result<FormalGroupLaw, FglError> {
        let psi = phi.reversion()?;
        let psi_x = psi.rename_vars(vec![VAR_X.to_string()]).embed(&fgl_vars())?;
        let psi_y = psi.rename_vars(vec![VAR_Y.to_string()]).embed(&fgl_vars())?;
        let inner = g.series().compose(&[psi_x, psi_y])?;
        let outer = phi.rename_vars(vec![VAR_X.to_string()]).compose(&[inner])?;
        FormalGroupLaw::check(outer)
    }

    #[test]
    fn honda_law_has_height_two() {
        // log = x + x^4/2 is the truncation at N = 8 of the 2-typical Honda
        // logarithm of height 2; the law is 2-integral and reduces mod 2 to a
        // law with [2](X) = X^4 + ...
        let q = RingDescriptor::Rationals;
        let l = uni(&q, 8, "X+1/2*X^4");
        let g = FormalGroupLaw::from_log(&l).unwrap();
        assert!(g.ring().is_zero(&g.coefficient(1, 1)));
        let f2 = RingDescriptor::integers_mod(2).unwrap();
        let map = RingMap::canonical(q, f2).unwrap();
        let g2 = g.base_change(&map).unwrap();
        assert_eq!(g2.height().unwrap(), Height::Finite(2));
    }

    #[test]
    fn deform_multiplicative_gives_family() {
        let g = FormalGroupLaw::multiplicative(zz(), 4);
        let fam = g.deform().unwrap();
        let zt = RingDescriptor::polynomial_extension(zz(), vec!["t".into()]).unwrap();
        assert_eq!(fam, law_from(&zt, 4, "X+Y+t*X*Y").unwrap());
        // fiber at 1 is the original law, fiber at 0 the additive law
        let at_one = fam.specialize("t", &zz().one()).unwrap();
        assert_eq!(at_one, g);
        let at_zero = fam.specialize("t", &zz().zero()).unwrap();
        assert!(at_zero.is_additive());
    }

    #[test]
    fn deform_additive_is_constant_family() {
        let g = FormalGroupLaw::additive(zz(), 4);
        let fam = g.deform().unwrap();
        assert!(fam.is_additive());
    }

    #[test]
    fn deformation_is_conjugation_by_scaling() {
        // over Q, specializing t = c equals c^{-1} F(cX, cY)
        let q = RingDescriptor::Rationals;
        let m = FormalGroupLaw::multiplicative(q.clone(), 5);
        let phi = uni(&q, 5, "X+3*X^2-2*X^3");
        let g = conjugate(&m, &phi).unwrap();
        let fam = g.deform().unwrap();
        for c in [2i64, -1, 5] {
            let spec = fam.specialize("t", &q.from_int(c)).unwrap();
            let c_elt = q.from_int(c);
            let c_inv = q.inv(&c_elt).unwrap();
            let scale = uni(&q, 5, "X").scale(&c_inv);
            let expected = conjugate(&g, &scale).unwrap();
            assert_eq!(spec, expected, "t = {c}");
        }
    }

    #[test]
    fn base_change_examples() {
        let zt = RingDescriptor::polynomial_extension(zz(), vec!["t".into()]).unwrap();
        let fam = law_from(&zt, 4, "X+Y+t*X*Y").unwrap();
        let one = fam.specialize("t", &zz().one()).unwrap();
        assert_eq!(one, FormalGroupLaw::multiplicative(zz(), 4));
        let zero = fam.specialize("t", &zz().zero()).unwrap();
        assert_eq!(zero, FormalGroupLaw::additive(zz(), 4));
        let f3 = RingDescriptor::integers_mod(3).unwrap();
        let map = RingMap::canonical(zz(), f3.clone()).unwrap();
        let red = FormalGroupLaw::multiplicative(zz(), 4)
            .base_change(&map)
            .unwrap();
        assert_eq!(red, FormalGroupLaw::multiplicative(f3, 4));
    }

    #[test]
    fn json_round_trip() {
        let zt = RingDescriptor::polynomial_extension(zz(), vec!["t".into()]).unwrap();
        let fam = law_from(&zt, 4, "X+Y+t*X*Y").unwrap();
        let j = fam.to_json();
        assert_eq!(FormalGroupLaw::from_json(&j, None, None).unwrap(), fam);
    }
}
