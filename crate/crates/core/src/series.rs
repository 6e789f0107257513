//! Exact multivariate power series truncated at a weighted total degree.
//!
//! A series lives over a [`SeriesLayout`]: a named indexed variable family
//! (`t_0, t_1, ...` or `x_1, x_2, ...`), a positive weight per variable, and a
//! cap on the weighted degree. Terms above the cap are never stored, and every
//! product drops the contributions that would land above it. Combining two
//! series with the same family but different caps truncates to the smaller cap.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{format_rational, parse_rational, Coefficient, ExactCoefficient};

/// Cap used for "polynomial" layouts that never truncate in practice.
pub const UNBOUNDED: u32 = u32::MAX / 8;

pub type Monomial = Vec<u32>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("malformed series data: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeriesLayout {
    family: String,
    first_index: u32,
    weights: Vec<u32>,
    cap: u32,
}

impl SeriesLayout {
    pub fn new(family: &str, first_index: u32, weights: Vec<u32>, cap: u32) -> Self {
        assert!(weights.iter().all(|&w| w > 0), "variable weights must be positive");
        Self { family: family.to_string(), first_index, weights, cap }
    }

    /// `t_0 .. t_{count-1}`, all of weight 1.
    pub fn kdv_times(count: usize, cap: u32) -> Self {
        Self::new("t", 0, vec![1; count], cap)
    }

    /// `x_1 .. x_count` with `weight(x_j) = j`.
    pub fn fock(count: usize, cap: u32) -> Self {
        Self::new("x", 1, (1..=count as u32).collect(), cap)
    }

    /// `family_{first} ..` of uniform weight 1.
    pub fn uniform(family: &str, first_index: u32, count: usize, cap: u32) -> Self {
        Self::new(family, first_index, vec![1; count], cap)
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn first_index(&self) -> u32 {
        self.first_index
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn weight(&self, var: usize) -> u32 {
        self.weights[var]
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn with_cap(&self, cap: u32) -> Self {
        Self { cap, ..self.clone() }
    }

    pub fn degree(&self, exps: &[u32]) -> u64 {
        exps.iter().zip(&self.weights).map(|(&e, &w)| e as u64 * w as u64).sum()
    }

    pub fn variable_name(&self, var: usize) -> String {
        format!("{}_{}", self.family, self.first_index as usize + var)
    }

    /// Position of the variable with the given index label (`t_3` has label 3).
    pub fn position(&self, label: u32) -> Option<usize> {
        let pos = label.checked_sub(self.first_index)? as usize;
        (pos < self.len()).then_some(pos)
    }

    /// Position of a variable written as `"t_3"` or `"x3"`.
    pub fn position_of_name(&self, name: &str) -> Option<usize> {
        let rest = name.strip_prefix(self.family.as_str())?;
        let rest = rest.strip_prefix('_').unwrap_or(rest);
        self.position(rest.parse().ok()?)
    }

    fn same_family(&self, other: &Self) -> bool {
        self.family == other.family
            && self.first_index == other.first_index
            && self.weights == other.weights
    }
}

#[derive(Clone, PartialEq)]
pub struct TruncatedSeries<C> {
    layout: Arc<SeriesLayout>,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coefficient> fmt::Debug for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncatedSeries")
            .field("family", &self.layout.family)
            .field("cap", &self.layout.cap)
            .field("terms", &self.terms)
            .finish()
    }
}

impl<C: Coefficient> TruncatedSeries<C> {
    pub fn zero(layout: &Arc<SeriesLayout>) -> Self {
        Self { layout: layout.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(layout: &Arc<SeriesLayout>, c: C) -> Self {
        let mut s = Self::zero(layout);
        s.add_term(vec![0; layout.len()], c);
        s
    }

    pub fn one(layout: &Arc<SeriesLayout>) -> Self {
        Self::constant(layout, C::one())
    }

    /// The variable at position `var`; zero if its weight already exceeds the cap.
    pub fn variable(layout: &Arc<SeriesLayout>, var: usize) -> Self {
        let mut exps = vec![0; layout.len()];
        exps[var] = 1;
        Self::monomial(layout, exps, C::one())
    }

    pub fn monomial(layout: &Arc<SeriesLayout>, exps: Monomial, c: C) -> Self {
        assert_eq!(exps.len(), layout.len(), "monomial length does not match layout");
        let mut s = Self::zero(layout);
        s.add_term(exps, c);
        s
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, C)>>(layout: &Arc<SeriesLayout>, it: I) -> Self {
        let mut s = Self::zero(layout);
        for (e, c) in it {
            assert_eq!(e.len(), layout.len(), "monomial length does not match layout");
            s.add_term(e, c);
        }
        s
    }

    /// Adds `c · x^exps`, dropping it if it lies above the cap.
    pub fn add_term(&mut self, exps: Monomial, c: C) {
        if c.is_zero() || self.layout.degree(&exps) > self.layout.cap as u64 {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn layout(&self) -> &Arc<SeriesLayout> {
        &self.layout
    }

    pub fn cap(&self) -> u32 {
        self.layout.cap
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, C> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, C> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> C {
        self.terms.get(exps).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&vec![0; self.layout.len()])
    }

    pub fn max_degree(&self) -> Option<u64> {
        self.terms.keys().map(|e| self.layout.degree(e)).max()
    }

    pub fn min_degree(&self) -> Option<u64> {
        self.terms.keys().map(|e| self.layout.degree(e)).min()
    }

    /// Homogeneous component of the given weighted degree.
    pub fn homogeneous_part(&self, degree: u64) -> Self {
        Self {
            layout: self.layout.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| self.layout.degree(e) == degree)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(&self.layout);
        }
        Self {
            layout: self.layout.clone(),
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v.clone() * c.clone())).collect(),
        }
    }

    /// Re-truncates at a smaller cap (or relabels with a larger one; nothing is invented).
    pub fn truncate(&self, cap: u32) -> Self {
        let layout = Arc::new(self.layout.with_cap(cap));
        Self::from_terms(&layout, self.terms.iter().map(|(e, c)| (e.clone(), c.clone())))
    }

    /// Same terms over an equivalent layout (same family and weights).
    pub fn relayout(&self, layout: &Arc<SeriesLayout>) -> Self {
        assert!(self.layout.same_family(layout), "incompatible series layouts");
        Self::from_terms(layout, self.terms.iter().map(|(e, c)| (e.clone(), c.clone())))
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> TruncatedSeries<D> {
        TruncatedSeries::from_terms(&self.layout, self.terms.iter().map(|(e, c)| (e.clone(), f(c))))
    }

    fn joint_layout(&self, other: &Self) -> Arc<SeriesLayout> {
        if Arc::ptr_eq(&self.layout, &other.layout) || *self.layout == *other.layout {
            return self.layout.clone();
        }
        assert!(
            self.layout.same_family(&other.layout),
            "series over different variable families cannot be combined"
        );
        if self.layout.cap <= other.layout.cap {
            self.layout.clone()
        } else {
            other.layout.clone()
        }
    }

    fn add_impl(&self, other: &Self, negate: bool) -> Self {
        let layout = self.joint_layout(other);
        let mut out = if Arc::ptr_eq(&layout, &self.layout) { self.clone() } else { self.relayout(&layout) };
        for (e, c) in &other.terms {
            out.add_term(e.clone(), if negate { -c.clone() } else { c.clone() });
        }
        out
    }

    fn mul_impl(&self, other: &Self) -> Self {
        let layout = self.joint_layout(other);
        let cap = layout.cap as u64;
        let mut acc: BTreeMap<Monomial, C> = BTreeMap::new();
        let rhs: Vec<(&Monomial, &C, u64)> =
            other.terms.iter().map(|(e, c)| (e, c, layout.degree(e))).collect();
        for (ea, ca) in &self.terms {
            let da = layout.degree(ea);
            if da > cap {
                continue;
            }
            for (eb, cb, db) in &rhs {
                if da + db > cap {
                    continue;
                }
                let e: Monomial = ea.iter().zip(eb.iter()).map(|(a, b)| a + b).collect();
                let v = ca.clone() * (*cb).clone();
                match acc.get_mut(&e) {
                    Some(x) => *x = x.clone() + v,
                    None => {
                        acc.insert(e, v);
                    }
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Self { layout, terms: acc }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(&self.layout);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// `Σ s^k / k!`, truncated at the cap.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::Domain("exp needs a series with zero constant term".into()));
        }
        let mut out = Self::one(&self.layout);
        let mut power = Self::one(&self.layout);
        let mut k = 1i64;
        loop {
            power = (&power * self).scale(&(C::one() / C::from_i64(k)));
            if power.is_zero() {
                break;
            }
            out = &out + &power;
            k += 1;
        }
        Ok(out)
    }

    /// `log(1 + u) = Σ (-1)^{k+1} u^k / k`; the constant term must be exactly 1.
    pub fn log(&self) -> Result<Self, SeriesError> {
        if self.constant_term() != C::one() {
            return Err(SeriesError::Domain("log needs a series with constant term 1".into()));
        }
        let u = self - &Self::one(&self.layout);
        let mut out = Self::zero(&self.layout);
        let mut power = Self::one(&self.layout);
        let mut k = 1i64;
        loop {
            power = &power * &u;
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { C::one() } else { -C::one() };
            out = &out + &power.scale(&(sign / C::from_i64(k)));
            k += 1;
        }
        Ok(out)
    }

    /// Exact partial derivative of the given order. The result is only reliable up to
    /// `cap - order·weight(var)`, and its layout carries that reduced cap.
    pub fn derivative(&self, var: usize, order: u32) -> Result<Self, SeriesError> {
        if var >= self.layout.len() {
            return Err(SeriesError::Domain(format!("unknown variable position {var}")));
        }
        if order == 0 {
            return Ok(self.clone());
        }
        let drop = order as u64 * self.layout.weight(var) as u64;
        let cap = (self.layout.cap as u64).saturating_sub(drop) as u32;
        let layout = if self.layout.cap >= UNBOUNDED { self.layout.clone() } else { Arc::new(self.layout.with_cap(cap)) };
        let mut out = Self::zero(&layout);
        for (e, c) in &self.terms {
            if e[var] < order {
                continue;
            }
            let falling: i64 = (0..order as i64).map(|i| e[var] as i64 - i).product();
            let mut ne = e.clone();
            ne[var] -= order;
            out.add_term(ne, c.clone() * C::from_i64(falling));
        }
        Ok(out)
    }

    /// Substitutes a constant for one variable.
    pub fn substitute(&self, var: usize, value: &C) -> Self {
        let mut out = Self::zero(&self.layout);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let k = ne[var];
            ne[var] = 0;
            let mut v = c.clone();
            for _ in 0..k {
                v = v * value.clone();
            }
            out.add_term(ne, v);
        }
        out
    }

    /// Whether the series involves the variable at `var`.
    pub fn involves(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] > 0)
    }

    /// Human-readable rendering (`3/2*t_0^2*t_1 + ...`), for reports and debugging.
    pub fn render(&self) -> String
    where
        C: ExactCoefficient,
    {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let (re, im) = c.to_parts();
                let coeff = match (num_traits::Zero::is_zero(&re), num_traits::Zero::is_zero(&im)) {
                    (_, true) => format_rational(&re),
                    (true, false) => format!("{}i", format_rational(&im)),
                    _ => format!("({}+{}i)", format_rational(&re), format_rational(&im)),
                };
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| {
                        let n = self.layout.variable_name(i);
                        if k == 1 {
                            n
                        } else {
                            format!("{n}^{k}")
                        }
                    })
                    .collect();
                if mono.is_empty() {
                    coeff
                } else {
                    format!("{coeff}*{}", mono.join("*"))
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// `∂^order s / ∂var^order`.
pub fn apply_diff<C: Coefficient>(
    s: &TruncatedSeries<C>,
    var: usize,
    order: u32,
) -> Result<TruncatedSeries<C>, SeriesError> {
    s.derivative(var, order)
}

pub fn series_exp<C: Coefficient>(s: &TruncatedSeries<C>) -> Result<TruncatedSeries<C>, SeriesError> {
    s.exp()
}

pub fn series_log<C: Coefficient>(s: &TruncatedSeries<C>) -> Result<TruncatedSeries<C>, SeriesError> {
    s.log()
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<C: Coefficient> $tr<&TruncatedSeries<C>> for &TruncatedSeries<C> {
            type Output = TruncatedSeries<C>;
            fn $m(self, rhs: &TruncatedSeries<C>) -> TruncatedSeries<C> {
                $body(self, rhs)
            }
        }
        impl<C: Coefficient> $tr for TruncatedSeries<C> {
            type Output = TruncatedSeries<C>;
            fn $m(self, rhs: TruncatedSeries<C>) -> TruncatedSeries<C> {
                $body(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &TruncatedSeries<C>, b| a.add_impl(b, false));
forward_binop!(Sub, sub, |a: &TruncatedSeries<C>, b| a.add_impl(b, true));
forward_binop!(Mul, mul, |a: &TruncatedSeries<C>, b| a.mul_impl(b));

impl<C: Coefficient> Neg for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn neg(self) -> TruncatedSeries<C> {
        self.scale(&-C::one())
    }
}

impl<C: Coefficient> Neg for TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn neg(self) -> TruncatedSeries<C> {
        -&self
    }
}

/// One serialized term: `{exponents, coeff_re, coeff_im}` with `"p/q"` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub exponents: Vec<u32>,
    pub coeff_re: String,
    pub coeff_im: String,
}

impl<C: ExactCoefficient> TruncatedSeries<C> {
    pub fn to_json_terms(&self) -> Vec<SeriesTerm> {
        self.terms
            .iter()
            .map(|(e, c)| {
                let (re, im) = c.to_parts();
                SeriesTerm { exponents: e.clone(), coeff_re: format_rational(&re), coeff_im: format_rational(&im) }
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_json_terms()).expect("series terms serialize")
    }

    pub fn from_json_terms(layout: &Arc<SeriesLayout>, terms: &[SeriesTerm]) -> Result<Self, SeriesError> {
        let mut s = Self::zero(layout);
        for t in terms {
            if t.exponents.len() != layout.len() {
                return Err(SeriesError::Format(format!(
                    "exponent vector of length {} for a layout with {} variables",
                    t.exponents.len(),
                    layout.len()
                )));
            }
            let re = parse_rational(&t.coeff_re).map_err(|e| SeriesError::Format(e.to_string()))?;
            let im = parse_rational(&t.coeff_im).map_err(|e| SeriesError::Format(e.to_string()))?;
            let c = C::from_parts(re, im)
                .ok_or_else(|| SeriesError::Format("imaginary part in a real series".into()))?;
            s.add_term(t.exponents.clone(), c);
        }
        Ok(s)
    }
}

/// All exponent vectors over `layout` with weighted degree at most `max_degree`,
/// in lexicographic order.
pub fn monomials_up_to(layout: &SeriesLayout, max_degree: u64) -> Vec<Monomial> {
    fn rec(layout: &SeriesLayout, pos: usize, left: u64, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if pos == layout.len() {
            out.push(cur.clone());
            return;
        }
        let w = layout.weight(pos) as u64;
        let mut k = 0u32;
        while k as u64 * w <= left {
            cur[pos] = k;
            rec(layout, pos + 1, left - k as u64 * w, cur, out);
            k += 1;
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0; layout.len()];
    rec(layout, 0, max_degree, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat, Rational};

    type S = TruncatedSeries<Rational>;

    fn x_layout(n: usize, cap: u32) -> Arc<SeriesLayout> {
        Arc::new(SeriesLayout::uniform("x", 1, n, cap))
    }

    #[test]
    fn exp_of_zero_is_one() {
        let l = x_layout(2, 4);
        assert_eq!(S::zero(&l).exp().unwrap(), S::one(&l));
    }

    #[test]
    fn exp_of_single_variable() {
        let l = x_layout(1, 3);
        let e = S::variable(&l, 0).exp().unwrap();
        assert_eq!(e.coeff(&[0]), int(1));
        assert_eq!(e.coeff(&[1]), int(1));
        assert_eq!(e.coeff(&[2]), rat(1, 2));
        assert_eq!(e.coeff(&[3]), rat(1, 6));
        assert_eq!(e.len(), 4);
    }

    #[test]
    fn exp_product_coefficient() {
        let l = x_layout(2, 4);
        let s = &S::variable(&l, 0) + &S::variable(&l, 1);
        assert_eq!(s.exp().unwrap().coeff(&[1, 1]), int(1));
    }

    #[test]
    fn exp_rejects_constant_term() {
        let l = x_layout(1, 3);
        assert!(matches!(S::one(&l).exp(), Err(SeriesError::Domain(_))));
        assert!(matches!(S::zero(&l).log(), Err(SeriesError::Domain(_))));
    }

    #[test]
    fn log_examples() {
        let l = x_layout(2, 4);
        assert!(S::one(&l).log().unwrap().is_zero());
        let l2 = x_layout(1, 2);
        let s = &S::one(&l2) + &S::variable(&l2, 0);
        let lg = s.log().unwrap();
        assert_eq!(lg, S::from_terms(&l2, vec![(vec![1], int(1)), (vec![2], rat(-1, 2))]));
        let x1 = S::variable(&l, 0);
        let x2 = S::variable(&l, 1);
        let u = &x1 + &(&x2 * &x2);
        assert_eq!(u.exp().unwrap().log().unwrap(), u);
    }

    #[test]
    fn derivative_examples() {
        let l = Arc::new(SeriesLayout::kdv_times(2, 6));
        let t0 = S::variable(&l, 0);
        let t1 = S::variable(&l, 1);
        assert_eq!(apply_diff(&t0.pow(3), 0, 1).unwrap().coeff(&[2, 0]), int(3));
        assert!(apply_diff(&(&t0 * &t1), 0, 2).unwrap().is_zero());
        let fl = Arc::new(SeriesLayout::fock(2, 8));
        let x1 = S::variable(&fl, 0);
        let x2 = S::variable(&fl, 1);
        let d = apply_diff(&(&x1 * &x2.pow(2)), 1, 1).unwrap();
        assert_eq!(d.terms().len(), 1);
        assert_eq!(d.coeff(&[1, 1]), int(2));
        assert!(apply_diff(&x1, 7, 1).is_err());
    }

    #[test]
    fn derivative_reduces_cap() {
        let l = Arc::new(SeriesLayout::fock(3, 9));
        let d = S::variable(&l, 2).derivative(2, 1).unwrap();
        assert_eq!(d.cap(), 6);
    }

    #[test]
    fn fock_weights_truncate() {
        let l = Arc::new(SeriesLayout::fock(3, 4));
        let x3 = S::variable(&l, 2);
        let x2 = S::variable(&l, 1);
        assert!((&x3 * &x2).is_zero());
        assert_eq!((&x2 * &x2).len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let l = x_layout(2, 5);
        let s = S::from_terms(&l, vec![(vec![1, 2], rat(-3, 4)), (vec![0, 0], int(2))]);
        let back = S::from_json_terms(&l, &s.to_json_terms()).unwrap();
        assert_eq!(back, s);
        let text = serde_json::to_string(&s.to_json_terms()).unwrap();
        assert!(text.contains("\"coeff_re\":\"-3/4\""));
    }

    #[test]
    fn monomial_listing_counts() {
        let l = SeriesLayout::fock(4, 4);
        // partitions of 0..=4: 1+1+2+3+5
        assert_eq!(monomials_up_to(&l, 4).len(), 12);
    }
}
