use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use super::coeffs::{coeff_c, coeff_d};
use super::operator::OperatorExpr;
use super::FockError;
use crate::linalg::Matrix;
use crate::scalar::{format_rational, int, parse_rational, rat, Coefficient, GaussianRational, Rational};
use crate::series::{monomials_up_to, Monomial, SeriesLayout};
use crate::Series;

/// Cohomology input: pairing `η`, the nilpotent matrix `𝒞_α^β` (row α, column β), `b_α` and an independent `b^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct CohomologyData {
    pub dim: usize,
    pub eta: Vec<Vec<Rational>>,
    pub cmat: Vec<Vec<Rational>>,
    pub b: Vec<Rational>,
    pub b_raised: Vec<Rational>,
}

fn matrix(rows: &[Vec<Rational>]) -> Matrix<Rational> {
    Matrix::from_rows(rows.to_vec())
}

impl CohomologyData {
    /// A point: `η = (1)`, `𝒞 = (0)`, `b = b^α = 1/2` (from `q = 0`, `dim M = 0`).
    pub fn point() -> Self {
        Self { dim: 1, eta: vec![vec![int(1)]], cmat: vec![vec![int(0)]], b: vec![rat(1, 2)], b_raised: vec![rat(1, 2)] }
    }

    /// Two classes: antidiagonal `η`, strictly lower nilpotent `𝒞`, `b = (−1/2, 1/2)`, `b^α = (1/2, −1/2)`.
    pub fn two_class_sample() -> Self {
        Self {
            dim: 2,
            eta: vec![vec![int(0), int(1)], vec![int(1), int(0)]],
            cmat: vec![vec![int(0), int(0)], vec![int(1), int(0)]],
            b: vec![rat(-1, 2), rat(1, 2)],
            b_raised: vec![rat(1, 2), rat(-1, 2)],
        }
    }

    pub fn validate(&self) -> Result<(), FockError> {
        let bad = |s: &str| Err(FockError::InvalidData(s.to_string()));
        let d = self.dim;
        if d == 0 {
            return bad("dim must be positive");
        }
        let square = |m: &Vec<Vec<Rational>>| m.len() == d && m.iter().all(|r| r.len() == d);
        if !square(&self.eta) || !square(&self.cmat) || self.b.len() != d || self.b_raised.len() != d {
            return bad("shapes do not match dim");
        }
        for i in 0..d {
            for j in 0..d {
                if self.eta[i][j] != self.eta[j][i] {
                    return bad("eta is not symmetric");
                }
            }
        }
        if matrix(&self.eta).det().is_zero() {
            return bad("eta is singular");
        }
        if !self.cmat_power(d).is_zero() {
            return bad("C is not nilpotent (C^dim != 0)");
        }
        Ok(())
    }

    pub fn cmat_power(&self, k: usize) -> Matrix<Rational> {
        let c = matrix(&self.cmat);
        let mut acc = Matrix::identity(self.dim);
        for _ in 0..k {
            acc = acc.mul(&c);
        }
        acc
    }

    pub fn eta_inverse(&self) -> Matrix<Rational> {
        matrix(&self.eta).inverse().expect("validated eta is invertible")
    }

    /// JSON with exact-rational strings: `{"dim", "eta", "cmat", "b", "b_raised"}`.
    pub fn from_json(text: &str) -> Result<Self, FockError> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| FockError::InvalidData(e.to_string()))?;
        let q = |x: &serde_json::Value| -> Result<Rational, FockError> {
            match x {
                serde_json::Value::String(s) => parse_rational(s).map_err(|e| FockError::InvalidData(e.to_string())),
                serde_json::Value::Number(n) if n.is_i64() => Ok(int(n.as_i64().unwrap())),
                _ => Err(FockError::InvalidData(format!("expected an exact rational string, got {x}"))),
            }
        };
        let vec = |key: &str| -> Result<Vec<Rational>, FockError> {
            v.get(key).and_then(|x| x.as_array()).ok_or_else(|| FockError::InvalidData(format!("missing array {key}")))?.iter().map(q).collect()
        };
        let mat = |key: &str| -> Result<Vec<Vec<Rational>>, FockError> {
            v.get(key)
                .and_then(|x| x.as_array())
                .ok_or_else(|| FockError::InvalidData(format!("missing matrix {key}")))?
                .iter()
                .map(|row| row.as_array().ok_or_else(|| FockError::InvalidData(format!("{key} row is not an array")))?.iter().map(q).collect())
                .collect()
        };
        let dim = v.get("dim").and_then(|x| x.as_u64()).ok_or_else(|| FockError::InvalidData("missing dim".into()))? as usize;
        let data = Self { dim, eta: mat("eta")?, cmat: mat("cmat")?, b: vec("b")?, b_raised: vec("b_raised")? };
        data.validate()?;
        Ok(data)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let m = |x: &Vec<Vec<Rational>>| -> Vec<Vec<String>> { x.iter().map(|r| r.iter().map(format_rational).collect()).collect() };
        serde_json::json!({
            "dim": self.dim,
            "eta": m(&self.eta),
            "cmat": m(&self.cmat),
            "b": self.b.iter().map(format_rational).collect::<Vec<_>>(),
            "b_raised": self.b_raised.iter().map(format_rational).collect::<Vec<_>>(),
        })
    }
}

/// Variables `t^α_m`, `α < dim`, `m < levels`, at position `α·levels + m`.
#[derive(Debug, Clone)]
pub struct TargetSpace {
    pub dim: usize,
    pub levels: usize,
    pub layout: Arc<SeriesLayout>,
}

impl TargetSpace {
    pub fn new(dim: usize, levels: usize) -> Self {
        let layout = Arc::new(SeriesLayout::uniform("t", 0, dim * levels, crate::series::UNBOUNDED));
        Self { dim, levels, layout }
    }

    pub fn var(&self, alpha: usize, m: i64) -> Option<usize> {
        (m >= 0 && (m as usize) < self.levels).then(|| alpha * self.levels + m as usize)
    }

    pub fn vars(&self) -> usize {
        self.dim * self.levels
    }

    pub fn label(&self, pos: usize) -> String {
        format!("t^{}_{}", pos / self.levels, pos % self.levels)
    }

    pub fn render_monomial(&self, e: &Monomial) -> String {
        let parts: Vec<String> = e
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| if k == 1 { self.label(i) } else { format!("({})^{k}", self.label(i)) })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("·")
        }
    }
}

fn gq(q: &Rational) -> GaussianRational {
    GaussianRational::from_rational(q)
}

/// `L_n` of the target family as printed, on `levels` levels, with the genus parameter λ = 1.
/// The second-derivative block carries `(𝒞^j)` like the first block; `∂^α = η^{αγ}∂_γ`, `t_α = η_{αβ}t^β`.
pub fn target_virasoro_build(data: &CohomologyData, n: i64, levels: usize) -> Result<OperatorExpr<GaussianRational>, FockError> {
    data.validate()?;
    if n < -1 {
        return Err(FockError::InvalidRange(format!("L_n needs n >= -1, got {n}")));
    }
    if levels == 0 {
        return Err(FockError::InsufficientCap("no levels".into()));
    }
    let sp = TargetSpace::new(data.dim, levels);
    let d = data.dim;
    let mut op = OperatorExpr::zero(sp.vars());
    let half = rat(1, 2);
    let t0 = |a: usize| sp.var(a, 0).unwrap();
    match n {
        -1 => {
            for a in 0..d {
                for m in 1..levels as i64 {
                    op.add_product(&[sp.var(a, m).unwrap()], &[sp.var(a, m - 1).unwrap()], gq(&int(m)));
                }
                for g in 0..d {
                    op.add_product(&[t0(a), t0(g)], &[], gq(&(half.clone() * data.eta[a][g].clone())));
                }
            }
        }
        0 => {
            let big_n = d as i64 - 1;
            for a in 0..d {
                for m in 0..levels as i64 {
                    let v = sp.var(a, m).unwrap();
                    op.add_product(&[v], &[v], gq(&(int(m) + data.b[a].clone())));
                }
            }
            for a in 0..d.saturating_sub(1) {
                for m in 1..levels as i64 {
                    op.add_product(&[sp.var(a, m).unwrap()], &[sp.var(a + 1, m - 1).unwrap()], gq(&int((big_n + 1) * m)));
                }
                for g in 0..d {
                    op.add_product(&[t0(a), t0(g)], &[], gq(&(half.clone() * int(big_n - 1) * data.eta[a + 1][g].clone())));
                }
            }
            let constant = -rat((big_n - 1) * (big_n + 1) * (big_n + 3), 48);
            op = op.add(&OperatorExpr::scalar(sp.vars(), gq(&constant)));
        }
        n => {
            let eta_inv = data.eta_inverse();
            let powers: Vec<Matrix<Rational>> = (0..=(n as usize + 1)).map(|j| data.cmat_power(j)).collect();
            for a in 0..d {
                for bta in 0..d {
                    for j in 0..=(n + 1) {
                        let cj = &powers[j as usize][(a, bta)];
                        if cj.is_zero() {
                            continue;
                        }
                        for m in 0..levels as i64 {
                            let Some(target) = sp.var(bta, m + n - j) else { continue };
                            let c = coeff_c(j, m, n, &data.b[a])? * cj.clone();
                            op.add_product(&[sp.var(a, m).unwrap()], &[target], gq(&c));
                        }
                        for m in 0..n {
                            let k = n - m - j - 1;
                            if k < 0 {
                                continue;
                            }
                            let (Some(_), Some(second)) = (sp.var(a, m), sp.var(bta, k)) else { continue };
                            let dv = coeff_d(j, m, n, &data.b[a], &data.b_raised[a])? * cj.clone() * half.clone();
                            for g in 0..d {
                                let w = dv.clone() * eta_inv[(a, g)].clone();
                                op.add_product(&[], &[sp.var(g, m).unwrap(), second], gq(&w));
                            }
                        }
                    }
                }
            }
            let top = &powers[n as usize + 1];
            for a in 0..d {
                for bta in 0..d {
                    for g in 0..d {
                        let w = half.clone() * top[(a, bta)].clone() * data.eta[bta][g].clone();
                        op.add_product(&[t0(a), t0(g)], &[], gq(&w));
                    }
                }
            }
        }
    }
    Ok(op)
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetCommutatorEntry {
    pub monomial: String,
    /// `([L_{n1}, L_n] − (n − n1) L_{n+n1}) p`, the printed closure.
    pub residual_printed: String,
    /// `([L_{n1}, L_n] − (n1 − n) L_{n+n1}) p`, the standard Witt closure.
    pub residual_standard: String,
    pub printed_zero: bool,
    pub standard_zero: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetCommutatorReport {
    pub n1: i64,
    pub n: i64,
    pub window_levels: usize,
    pub window_degree: u32,
    pub entries: Vec<TargetCommutatorEntry>,
}

impl TargetCommutatorReport {
    pub fn printed_holds(&self) -> bool {
        self.entries.iter().all(|e| e.printed_zero)
    }

    pub fn standard_holds(&self) -> bool {
        self.entries.iter().all(|e| e.standard_zero)
    }
}

/// Applies both orders to every monomial in `t^α_m`, `m < window_levels`, of degree ≤ `window_degree`.
/// Operators are built on `window_levels + 2` levels: each application raises the top level
/// by at most one, so every residual is exact.
pub fn target_commutator_report(
    n1: i64,
    n: i64,
    data: &CohomologyData,
    window_levels: usize,
    window_degree: u32,
) -> Result<TargetCommutatorReport, FockError> {
    if window_levels == 0 {
        return Err(FockError::InsufficientCap("window has no levels".into()));
    }
    if n + n1 < -1 && n != n1 {
        return Err(FockError::InvalidRange(format!("L_{{n+n1}} undefined for n + n1 = {}", n + n1)));
    }
    let levels = window_levels + 2;
    let sp = TargetSpace::new(data.dim, levels);
    let l1 = target_virasoro_build(data, n1, levels)?;
    let l2 = target_virasoro_build(data, n, levels)?;
    // the self-commutator needs no L_{2n}
    let l12 = if n == n1 { OperatorExpr::zero(sp.vars()) } else { target_virasoro_build(data, n + n1, levels)? };
    let window = SeriesLayout::uniform("t", 0, data.dim * window_levels, crate::series::UNBOUNDED);
    let mut entries = Vec::new();
    for small in monomials_up_to(&window, window_degree as u64) {
        let mut e = vec![0u32; sp.vars()];
        for a in 0..data.dim {
            for m in 0..window_levels {
                e[a * levels + m] = small[a * window_levels + m];
            }
        }
        let p = Series::monomial(&sp.layout, e.clone(), GaussianRational::one());
        let comm = &l1.apply(&l2.apply(&p)) - &l2.apply(&l1.apply(&p));
        let base = l12.apply(&p);
        let printed = &comm - &base.scale(&gq(&int(n - n1)));
        let standard = &comm - &base.scale(&gq(&int(n1 - n)));
        entries.push(TargetCommutatorEntry {
            monomial: sp.render_monomial(&e),
            residual_printed: render(&sp, &printed),
            residual_standard: render(&sp, &standard),
            printed_zero: printed.is_zero(),
            standard_zero: standard.is_zero(),
        });
    }
    Ok(TargetCommutatorReport { n1, n, window_levels, window_degree, entries })
}

fn render(sp: &TargetSpace, s: &Series) -> String {
    if s.is_zero() {
        return "0".into();
    }
    s.terms()
        .iter()
        .map(|(e, c)| format!("({})·{}", crate::scalar::format_gaussian(c), sp.render_monomial(e)))
        .collect::<Vec<_>>()
        .join(" + ")
}
