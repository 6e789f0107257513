use std::collections::BTreeMap;

use crate::scalar::{binomial, Coefficient, Rational};
use crate::series::{Monomial, SeriesLayout, TruncatedSeries};

/// Normal-ordered differential operator `Σ c · x^a ∂^b` on `n` variables (all `x` left of all `∂`).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorExpr<C> {
    vars: usize,
    terms: BTreeMap<(Monomial, Monomial), C>,
}

fn falling(k: u32, r: u32) -> i64 {
    (0..r as i64).map(|i| k as i64 - i).product()
}

impl<C: Coefficient> OperatorExpr<C> {
    pub fn zero(vars: usize) -> Self {
        Self { vars, terms: BTreeMap::new() }
    }

    pub fn scalar(vars: usize, c: C) -> Self {
        let mut out = Self::zero(vars);
        out.add_term(vec![0; vars], vec![0; vars], c);
        out
    }

    pub fn identity(vars: usize) -> Self {
        Self::scalar(vars, C::one())
    }

    /// Multiplication by `x_var`.
    pub fn x(vars: usize, var: usize) -> Self {
        let mut a = vec![0; vars];
        a[var] = 1;
        let mut out = Self::zero(vars);
        out.add_term(a, vec![0; vars], C::one());
        out
    }

    /// `∂/∂x_var`.
    pub fn d(vars: usize, var: usize) -> Self {
        let mut b = vec![0; vars];
        b[var] = 1;
        let mut out = Self::zero(vars);
        out.add_term(vec![0; vars], b, C::one());
        out
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> &BTreeMap<(Monomial, Monomial), C> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, xs: Monomial, ds: Monomial, c: C) {
        assert!(xs.len() == self.vars && ds.len() == self.vars, "operator arity mismatch");
        if c.is_zero() {
            return;
        }
        let key = (xs, ds);
        let sum = match self.terms.remove(&key) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    /// Adds `c · Π x_{xvars} · Π ∂_{dvars}` (indices may repeat).
    pub fn add_product(&mut self, xvars: &[usize], dvars: &[usize], c: C) {
        let mut xs = vec![0; self.vars];
        let mut ds = vec![0; self.vars];
        for &v in xvars {
            xs[v] += 1;
        }
        for &v in dvars {
            ds[v] += 1;
        }
        self.add_term(xs, ds, c);
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.vars);
        for ((a, b), v) in &self.terms {
            out.add_term(a.clone(), b.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((a, b), v) in &other.terms {
            out.add_term(a.clone(), b.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-C::one()))
    }

    /// `self ∘ other`, normal ordered with `∂^β x^γ = Σ_κ Π_i C(β_i, κ_i) (γ_i)_{κ_i} x^{γ−κ} ∂^{β−κ}`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars, "operator arity mismatch");
        let mut out = Self::zero(self.vars);
        for ((a, b), c1) in &self.terms {
            for ((g, d), c2) in &other.terms {
                let kmax: Vec<u32> = b.iter().zip(g).map(|(&x, &y)| x.min(y)).collect();
                let mut kappa = vec![0u32; self.vars];
                loop {
                    let mut w = c1.clone() * c2.clone();
                    let mut xs = a.clone();
                    let mut ds = d.clone();
                    for i in 0..self.vars {
                        let k = kappa[i];
                        if k > 0 {
                            let f = binomial(b[i], k) * num_bigint::BigInt::from(falling(g[i], k));
                            w = w * C::from_rational(&Rational::from(f));
                        }
                        xs[i] += g[i] - k;
                        ds[i] += b[i] - k;
                    }
                    out.add_term(xs, ds, w);
                    // next κ in the box 0..=kmax
                    let mut i = 0;
                    while i < self.vars {
                        if kappa[i] < kmax[i] {
                            kappa[i] += 1;
                            break;
                        }
                        kappa[i] = 0;
                        i += 1;
                    }
                    if i == self.vars {
                        break;
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).sub(&other.compose(self))
    }

    /// Applies to a polynomial. The result keeps the input's layout; terms the layout
    /// cannot hold (weight above its cap) are dropped by construction of the series.
    pub fn apply(&self, p: &TruncatedSeries<C>) -> TruncatedSeries<C> {
        let layout = p.layout();
        assert_eq!(layout.len(), self.vars, "operator arity mismatch");
        let mut out = TruncatedSeries::zero(layout);
        for ((a, b), c) in &self.terms {
            for (e, v) in p.terms() {
                if e.iter().zip(b).any(|(x, y)| x < y) {
                    continue;
                }
                let mut f = 1i64;
                let mut ne = e.clone();
                for i in 0..self.vars {
                    f *= falling(e[i], b[i]);
                    ne[i] = e[i] - b[i] + a[i];
                }
                out.add_term(ne, c.clone() * v.clone() * C::from_i64(f));
            }
        }
        out
    }

    pub fn render(&self, layout: &SeriesLayout) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for ((a, b), c) in &self.terms {
            let mut s = format!("({c:?})");
            for (i, &k) in a.iter().enumerate() {
                for _ in 0..k {
                    s.push_str(&format!("·{}", layout.variable_name(i)));
                }
            }
            for (i, &k) in b.iter().enumerate() {
                for _ in 0..k {
                    s.push_str(&format!("·∂{}", layout.variable_name(i)));
                }
            }
            parts.push(s);
        }
        parts.join(" + ")
    }
}
