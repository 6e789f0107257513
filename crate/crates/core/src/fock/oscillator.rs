use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::FockError;
use crate::scalar::{format_gaussian, gauss, int, rat, Coefficient, GaussianRational, Rational};
use crate::series::{monomials_up_to, Monomial, SeriesLayout};
use crate::Series;

/// `x_1..x_cap` with `weight(x_j) = j`, truncated at weight `cap`.
pub fn fock_layout(cap: u32) -> Arc<SeriesLayout> {
    Arc::new(SeriesLayout::fock(cap as usize, cap))
}

/// `a_n = ∂/∂x_n`, `a_{−n} = ħ·n·x_n`, `a_0 = μ`, with every `ε_n = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorParams {
    pub hbar: Rational,
    pub mu: Rational,
    pub lambda: Rational,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self { hbar: Rational::one(), mu: Rational::zero(), lambda: Rational::zero() }
    }
}

impl OscillatorParams {
    pub fn new(mu: Rational, lambda: Rational) -> Self {
        Self { mu, lambda, ..Self::default() }
    }

    /// `1 + 12λ²`.
    pub fn central_charge(&self) -> Rational {
        int(1) + int(12) * self.lambda.clone() * self.lambda.clone()
    }
}

fn g(q: Rational) -> GaussianRational {
    GaussianRational::from_rational(&q)
}

/// `a_n p`.
pub fn heisenberg_apply(n: i64, p: &Series, params: &OscillatorParams) -> Result<Series, FockError> {
    let layout = p.layout();
    match n {
        0 => Ok(p.scale(&g(params.mu.clone()))),
        n if n > 0 => {
            let pos = n as usize - 1;
            if pos >= layout.len() {
                return Ok(Series::zero(layout));
            }
            Ok(p.derivative(pos, 1).expect("variable exists").relayout(layout))
        }
        n => {
            let k = n.unsigned_abs();
            let top = p.max_degree().unwrap_or(0) + k;
            if p.is_zero() {
                return Ok(p.clone());
            }
            if top > layout.cap() as u64 || k as usize > layout.len() {
                return Err(FockError::TruncationError { weight: top, cap: layout.cap() });
            }
            let xk = Series::variable(layout, k as usize - 1);
            Ok((&xk * p).scale(&g(params.hbar.clone() * int(k as i64))))
        }
    }
}

/// `L_k p` built from the `a_n`. For `k ≠ 0` the sum `½ Σ_j a_{−j} a_{j+k}` runs over
/// the finitely many pairs that can act nontrivially on `p`, annihilator first.
pub fn oscillator_virasoro_apply(k: i64, p: &Series, params: &OscillatorParams) -> Result<Series, FockError> {
    let w = p.max_degree().unwrap_or(0) as i64;
    if k == 0 {
        let mut acc = p.scale(&g((params.mu.clone() * params.mu.clone() + params.lambda.clone() * params.lambda.clone()) / int(2)));
        for j in 1..=w {
            let inner = heisenberg_apply(j, p, params)?;
            if !inner.is_zero() {
                acc = &acc + &heisenberg_apply(-j, &inner, params)?;
            }
        }
        return Ok(acc);
    }
    let mut acc = Series::zero(p.layout());
    let bound = w + k.abs() + 1;
    for a in -bound..=bound {
        let b = k - a;
        // annihilator (larger index) acts first; the pair commutes since k ≠ 0
        let (first, second) = if a >= b { (a, b) } else { (b, a) };
        if first > w {
            continue;
        }
        if first < 0 && second < 0 && (first < -bound || second < -bound) {
            continue;
        }
        let inner = heisenberg_apply(first, p, params)?;
        if inner.is_zero() {
            continue;
        }
        let outer = heisenberg_apply(second, &inner, params)?;
        acc = &acc + &outer.scale(&g(rat(1, 2)));
    }
    let lam = gauss(Rational::zero(), params.lambda.clone() * int(k));
    acc = &acc + &heisenberg_apply(k, p, params)?.scale(&lam);
    Ok(acc)
}

/// The printed `B^(m)` display, taken literally: `L_0 = (μ²+λ²)/2 + Σ j x_j ∂_j`,
/// `L_k = ½ Σ_{j≥1} j x_j ∂_{j+k} + iλk ∂_k` for `k > 0`, and
/// `L_k = ½ Σ_{j≥1} j x_j ∂_{j+k} + iλk² x_k` for `k < 0`, with `x_j`, `∂_j` absent for `j ≤ 0`.
pub fn printed_display_apply(k: i64, p: &Series, params: &OscillatorParams) -> Result<Series, FockError> {
    let layout = p.layout().clone();
    let kk = layout.len() as i64;
    let deriv = |j: i64, q: &Series| -> Series {
        if j < 1 || j > kk {
            Series::zero(&layout)
        } else {
            q.derivative(j as usize - 1, 1).unwrap().relayout(&layout)
        }
    };
    let times = |j: i64, q: &Series| -> Result<Series, FockError> {
        let top = q.max_degree().unwrap_or(0) + j as u64;
        if q.is_zero() {
            return Ok(q.clone());
        }
        if j > kk || top > layout.cap() as u64 {
            return Err(FockError::TruncationError { weight: top, cap: layout.cap() });
        }
        Ok(&Series::variable(&layout, j as usize - 1) * q)
    };
    let w = p.max_degree().unwrap_or(0) as i64;
    if k == 0 {
        let mut acc = p.scale(&g((params.mu.clone() * params.mu.clone() + params.lambda.clone() * params.lambda.clone()) / int(2)));
        for j in 1..=w.min(kk) {
            acc = &acc + &times(j, &deriv(j, p))?.scale(&g(int(j)));
        }
        return Ok(acc);
    }
    let mut acc = Series::zero(&layout);
    for j in 1..=kk {
        let d = deriv(j + k, p);
        if d.is_zero() {
            continue;
        }
        acc = &acc + &times(j, &d)?.scale(&g(rat(j, 2)));
    }
    if k > 0 {
        acc = &acc + &deriv(k, p).scale(&gauss(Rational::zero(), params.lambda.clone() * int(k)));
    } else {
        acc = &acc + &times(-k, p)?.scale(&gauss(Rational::zero(), params.lambda.clone() * int(k * k)));
    }
    Ok(acc)
}

#[derive(Debug, Clone, Serialize)]
pub struct DisplayDiff {
    pub k: i64,
    pub monomial: Monomial,
    pub agree: bool,
    pub difference: String,
}

/// Diffs the printed display against the `a_n` form on all monomials of weight ≤ `max_weight`.
pub fn printed_display_report(ks: &[i64], max_weight: u32, params: &OscillatorParams) -> Result<Vec<DisplayDiff>, FockError> {
    let cap = max_weight + ks.iter().map(|k| k.unsigned_abs() as u32).max().unwrap_or(0);
    let layout = fock_layout(cap);
    let mut out = Vec::new();
    for &k in ks {
        for m in monomials_up_to(&layout, max_weight as u64) {
            let p = Series::monomial(&layout, m.clone(), GaussianRational::one());
            let d = &printed_display_apply(k, &p, params)? - &oscillator_virasoro_apply(k, &p, params)?;
            out.push(DisplayDiff { k, monomial: m, agree: d.is_zero(), difference: d.render() });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorReport {
    pub m: i64,
    pub n: i64,
    pub central_charge: String,
    pub window_weight: u32,
    pub monomials_checked: usize,
    /// Monomials with a nonzero residual, rendered with their residual.
    pub failures: Vec<(Monomial, String)>,
}

impl CommutatorReport {
    pub fn passes(&self) -> bool {
        self.failures.is_empty() && self.monomials_checked > 0
    }
}

/// `([L_m, L_n] − (m−n)L_{m+n} − (c/12)(m³−m)δ_{m,−n}) p` on every basis monomial of
/// weight ≤ `cap − |m| − |n| − max(|m|, |n|)`, with `c = 1 + 12λ²`.
pub fn oscillator_commutator_check(m: i64, n: i64, params: &OscillatorParams, cap: u32) -> Result<CommutatorReport, FockError> {
    let (am, an) = (m.abs(), n.abs());
    let window = cap as i64 - am - an - am.max(an);
    if window < 0 {
        return Err(FockError::InsufficientCap(format!("cap {cap} leaves no window for (m, n) = ({m}, {n})")));
    }
    let layout = fock_layout(cap);
    let c = params.central_charge();
    let central = if m + n == 0 { c.clone() / int(12) * int(m * m * m - m) } else { Rational::zero() };
    let basis = monomials_up_to(&layout, window as u64);
    let results: Result<Vec<Option<(Monomial, String)>>, FockError> = basis
        .par_iter()
        .map(|e| {
            let p = Series::monomial(&layout, e.clone(), GaussianRational::one());
            let lmn = oscillator_virasoro_apply(m, &oscillator_virasoro_apply(n, &p, params)?, params)?;
            let lnm = oscillator_virasoro_apply(n, &oscillator_virasoro_apply(m, &p, params)?, params)?;
            let rhs = oscillator_virasoro_apply(m + n, &p, params)?.scale(&g(int(m - n)));
            let r = &(&(&lmn - &lnm) - &rhs) - &p.scale(&g(central.clone()));
            Ok((!r.is_zero()).then(|| (e.clone(), r.render())))
        })
        .collect();
    let failures: Vec<_> = results?.into_iter().flatten().collect();
    Ok(CommutatorReport {
        m,
        n,
        central_charge: format_gaussian(&g(c)),
        window_weight: window as u32,
        monomials_checked: basis.len(),
        failures,
    })
}
