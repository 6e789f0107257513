use std::collections::BTreeMap;

use serde::Serialize;

use super::FockError;
use crate::kp::elementary_schur_table;
use crate::scalar::{rat, Coefficient, GaussianRational};
use crate::Series;

/// Laurent expansion in `(u, v)` with Fock-polynomial coefficients, keyed by `(a, b)` for `u^a v^b`.
type Laurent = BTreeMap<(i64, i64), Series>;

fn laurent_mul(x: &Laurent, y: &Laurent, keep: impl Fn(i64, i64) -> bool) -> Laurent {
    let mut out: Laurent = BTreeMap::new();
    for (&(a1, b1), p) in x {
        for (&(a2, b2), q) in y {
            let key = (a1 + a2, b1 + b2);
            if !keep(key.0, key.1) {
                continue;
            }
            let prod = p * q;
            if prod.is_zero() {
                continue;
            }
            let slot = out.entry(key).or_insert_with(|| Series::zero(p.layout()));
            *slot = &*slot + &prod;
        }
    }
    out.retain(|_, s| !s.is_zero());
    out
}

/// Coefficients of `Γ(u, v) p` for `u^a v^b`, `a ≤ u_order`, `b ≤ v_order`. Every stored
/// coefficient is exact: the exponential factor is expanded far enough to reach each one.
#[derive(Debug, Clone)]
pub struct VertexExpansion {
    pub u_order: i64,
    pub v_order: i64,
    /// Weight of the input state; negative powers reach down to `−weight`.
    pub weight: i64,
    pub coeffs: BTreeMap<(i64, i64), Series>,
}

impl VertexExpansion {
    pub fn coeff(&self, a: i64, b: i64) -> Option<Series> {
        if a > self.u_order || b > self.v_order {
            return None;
        }
        let layout = self.coeffs.values().next().map(|s| s.layout().clone());
        Some(self.coeffs.get(&(a, b)).cloned().unwrap_or_else(|| match layout {
            Some(l) => Series::zero(&l),
            None => unreachable!("empty expansion has no layout"),
        }))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<_> = self
            .coeffs
            .iter()
            .map(|(&(a, b), s)| serde_json::json!({ "u": a, "v": b, "terms": s.to_json_terms() }))
            .collect();
        serde_json::json!({ "u_order": self.u_order, "v_order": self.v_order, "coefficients": entries })
    }
}

/// `Γ(u, v) = exp(Σ (u^j − v^j) x_j) · exp(−Σ (u^{−j} − v^{−j})/j ∂_j)` applied to `p`.
pub fn vertex_operator_apply(p: &Series, u_order: i64, v_order: i64) -> Result<VertexExpansion, FockError> {
    let layout = p.layout().clone();
    let w = p.max_degree().unwrap_or(0) as i64;
    let needed = w + u_order.max(0) + v_order.max(0);
    if needed > layout.cap() as i64 {
        return Err(FockError::TruncationError { weight: needed as u64, cap: layout.cap() });
    }
    let mut coeffs = BTreeMap::new();
    if p.is_zero() {
        return Ok(VertexExpansion { u_order, v_order, weight: w, coeffs });
    }

    // exp(−Σ (u^{−j} − v^{−j})/j ∂_j) p = p(x_j + (v^{−j} − u^{−j})/j)
    let mut shifted: Laurent = BTreeMap::new();
    for (e, c) in p.terms() {
        let mut acc: Laurent = BTreeMap::from([((0, 0), Series::constant(&layout, c.clone()))]);
        for (pos, &k) in e.iter().enumerate() {
            let j = pos as i64 + 1;
            let mut factor: Laurent = BTreeMap::new();
            factor.insert((0, 0), Series::variable(&layout, pos));
            factor.insert((-j, 0), Series::constant(&layout, GaussianRational::from_rational(&rat(-1, j))));
            factor.insert((0, -j), Series::constant(&layout, GaussianRational::from_rational(&rat(1, j))));
            for _ in 0..k {
                acc = laurent_mul(&acc, &factor, |_, _| true);
            }
        }
        for (key, s) in acc {
            let slot = shifted.entry(key).or_insert_with(|| Series::zero(&layout));
            *slot = &*slot + &s;
        }
    }
    shifted.retain(|_, s| !s.is_zero());

    // exp(Σ u^j x_j) exp(−Σ v^j x_j) = Σ S_a(x) S_b(−x) u^a v^b
    let (ua, vb) = ((u_order + w).max(0) as usize, (v_order + w).max(0) as usize);
    let su = elementary_schur_table::<GaussianRational>(ua, &layout);
    let sv: Vec<Series> = elementary_schur_table::<GaussianRational>(vb, &layout)
        .into_iter()
        .map(|s| {
            let terms = s.terms().iter().map(|(e, c)| {
                let odd = e.iter().map(|&x| x as u64).sum::<u64>() % 2 == 1;
                (e.clone(), if odd { -c.clone() } else { c.clone() })
            });
            Series::from_terms(&layout, terms.collect::<Vec<_>>())
        })
        .collect();
    let mut expo: Laurent = BTreeMap::new();
    for (a, sa) in su.iter().enumerate() {
        for (b, sb) in sv.iter().enumerate() {
            let prod = sa * sb;
            if !prod.is_zero() {
                expo.insert((a as i64, b as i64), prod);
            }
        }
    }
    coeffs = laurent_mul(&expo, &shifted, |a, b| a <= u_order && b <= v_order);
    Ok(VertexExpansion { u_order, v_order, weight: w, coeffs })
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexCheck {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl VertexCheck {
    pub fn passes(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }
}

/// On `u = v`, `Γ` is the identity: `Σ_{a+b=s} Γ_{a,b} p = δ_{s,0} p` for every `s`
/// whose diagonal is fully inside the computed window.
pub fn vertex_diagonal_check(p: &Series, order: i64) -> Result<VertexCheck, FockError> {
    let ex = vertex_operator_apply(p, order, order)?;
    let w = ex.weight;
    let mut failures = Vec::new();
    let mut checked = 0;
    for s in -2 * w..=order - w {
        let mut acc = Series::zero(p.layout());
        for a in -w..=order {
            let b = s - a;
            if b < -w || b > order {
                continue;
            }
            acc = &acc + &ex.coeff(a, b).unwrap();
        }
        let expected = if s == 0 { p.clone() } else { Series::zero(p.layout()) };
        checked += 1;
        let d = &acc - &expected;
        if !d.is_zero() {
            failures.push(format!("u^{s} on the diagonal: {}", d.render()));
        }
    }
    Ok(VertexCheck { checked, failures })
}

/// `[a_j, Γ(u, v)] = (u^j − v^j) Γ(u, v)` for `a_j = ∂_j`, `j ≥ 1`, coefficientwise.
pub fn vertex_commutation_check(p: &Series, j: usize, u_order: i64, v_order: i64) -> Result<VertexCheck, FockError> {
    let layout = p.layout().clone();
    if j == 0 || j > layout.len() {
        return Err(FockError::InvalidRange(format!("mode {j} outside 1..={}", layout.len())));
    }
    let ex = vertex_operator_apply(p, u_order, v_order)?;
    let ex_d = vertex_operator_apply(&p.derivative(j - 1, 1).unwrap().relayout(&layout), u_order, v_order)?;
    let zero = Series::zero(&layout);
    let get = |e: &VertexExpansion, a: i64, b: i64| e.coeffs.get(&(a, b)).cloned().unwrap_or_else(|| zero.clone());
    let j = j as i64;
    let w = ex.weight;
    let mut failures = Vec::new();
    let mut checked = 0;
    for a in -w..=u_order {
        for b in -w..=v_order {
            let lhs = &get(&ex, a, b).derivative(j as usize - 1, 1).unwrap().relayout(&layout) - &get(&ex_d, a, b);
            let rhs = &get(&ex, a - j, b) - &get(&ex, a, b - j);
            checked += 1;
            let d = &lhs - &rhs;
            if !d.is_zero() {
                failures.push(format!("u^{a} v^{b}: {}", d.render()));
            }
        }
    }
    Ok(VertexCheck { checked, failures })
}
