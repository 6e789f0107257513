//! Torsion of based acyclic chain complexes over ℚ, Smith normal form over ℤ, the
//! short-exact-sequence formula and the order-of-homology theorem.
//!
//! `∂_i : C_i → C_{i−1}` is stored as an `n_{i−1} × n_i` matrix acting on column vectors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::{format_rational, parse_rational, rational_abs, Rational};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TorsionError {
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("complex is not acyclic")]
    NotAcyclic,
    #[error("not a short exact sequence of complexes: {0}")]
    NotExact(String),
    #[error("homology has positive rank in degree {0}")]
    NotRationallyAcyclic(usize),
    #[error("invalid basis choice: {0}")]
    InvalidChoice(String),
}

type Q = Matrix<Rational>;

#[derive(Debug, Clone, PartialEq)]
pub struct BasedChainComplex {
    ranks: Vec<usize>,
    boundaries: Vec<Q>,
}

impl BasedChainComplex {
    /// `ranks[i] = n_i`, `boundaries[i−1] = ∂_i` (`n_{i−1} × n_i`). Checks shapes and `∂∘∂ = 0`.
    pub fn new(ranks: Vec<usize>, boundaries: Vec<Q>) -> Result<Self, TorsionError> {
        if ranks.is_empty() || boundaries.len() + 1 != ranks.len() {
            return Err(TorsionError::InvalidComplex(format!("{} ranks need {} boundaries", ranks.len(), ranks.len().saturating_sub(1))));
        }
        for (k, d) in boundaries.iter().enumerate() {
            let i = k + 1;
            if d.rows() != ranks[i - 1] || d.cols() != ranks[i] {
                return Err(TorsionError::InvalidComplex(format!(
                    "∂_{i} is {}×{}, expected {}×{}",
                    d.rows(),
                    d.cols(),
                    ranks[i - 1],
                    ranks[i]
                )));
            }
        }
        for k in 1..boundaries.len() {
            if !boundaries[k - 1].mul(&boundaries[k]).is_zero() {
                return Err(TorsionError::InvalidComplex(format!("∂_{} ∘ ∂_{} ≠ 0", k, k + 1)));
            }
        }
        Ok(Self { ranks, boundaries })
    }

    /// JSON `{"ranks": [n_0, .., n_m], "boundaries": [∂_1, .., ∂_m]}`, each `∂_i` given by its
    /// `n_{i−1}` rows, entries integers or `"p/q"` strings.
    pub fn from_json(text: &str) -> Result<Self, TorsionError> {
        let bad = |s: String| TorsionError::InvalidComplex(s);
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let ranks: Vec<usize> = v["ranks"]
            .as_array()
            .ok_or_else(|| bad("missing ranks".into()))?
            .iter()
            .map(|x| x.as_u64().map(|n| n as usize).ok_or_else(|| bad("ranks must be nonnegative integers".into())))
            .collect::<Result<_, _>>()?;
        let entry = |x: &serde_json::Value| -> Result<Rational, TorsionError> {
            match x {
                serde_json::Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap().into())),
                serde_json::Value::String(s) => parse_rational(s).map_err(|e| bad(e.to_string())),
                _ => Err(bad(format!("entry {x} is neither an integer nor a \"p/q\" string"))),
            }
        };
        let rows: Vec<Vec<Vec<Rational>>> = v["boundaries"]
            .as_array()
            .ok_or_else(|| bad("missing boundaries".into()))?
            .iter()
            .map(|m| {
                m.as_array()
                    .ok_or_else(|| bad("boundary must be an array of rows".into()))?
                    .iter()
                    .map(|r| r.as_array().ok_or_else(|| bad("row must be an array".into()))?.iter().map(entry).collect())
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        let mut boundaries = Vec::new();
        for (k, m) in rows.into_iter().enumerate() {
            let src = ranks.get(k + 1).copied().unwrap_or(0);
            let dst = ranks[k];
            if m.len() != dst || m.iter().any(|r| r.len() != src) {
                return Err(bad(format!("∂_{} must be {}×{}", k + 1, dst, src)));
            }
            boundaries.push(Matrix::from_shape(dst, src, m.into_iter().flatten().collect()));
        }
        Self::new(ranks, boundaries)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let b: Vec<Vec<Vec<String>>> = self
            .boundaries
            .iter()
            .map(|d| (0..d.rows()).map(|r| (0..d.cols()).map(|c| format_rational(&d[(r, c)])).collect()).collect())
            .collect();
        serde_json::json!({ "ranks": self.ranks, "boundaries": b })
    }

    pub fn length(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// `∂_i`; the zero map for `i = 0` or `i > m`.
    pub fn boundary(&self, i: usize) -> Q {
        if i == 0 || i > self.length() {
            let src = self.ranks.get(i).copied().unwrap_or(0);
            let dst = if i == 0 { 0 } else { self.ranks.get(i - 1).copied().unwrap_or(0) };
            return Matrix::zeros(dst, src);
        }
        self.boundaries[i - 1].clone()
    }

    pub fn is_acyclic(&self) -> bool {
        (0..=self.length()).all(|i| self.boundary(i).rank() + self.boundary(i + 1).rank() == self.ranks[i])
    }

    /// Direct sum, degreewise block-diagonal.
    pub fn direct_sum(&self, other: &Self) -> Result<Self, TorsionError> {
        let m = self.length().max(other.length());
        let rank = |c: &Self, i: usize| c.ranks.get(i).copied().unwrap_or(0);
        let ranks: Vec<usize> = (0..=m).map(|i| rank(self, i) + rank(other, i)).collect();
        let pad = |c: &Self, i: usize| -> Q {
            if i <= c.length() {
                c.boundary(i)
            } else {
                Matrix::zeros(rank(c, i - 1), rank(c, i))
            }
        };
        let boundaries = (1..=m).map(|i| block_diag(&pad(self, i), &pad(other, i))).collect();
        Self::new(ranks, boundaries)
    }

    /// Based change of basis on `C_i`: the new basis vectors are the columns of `p` in old coordinates.
    pub fn change_basis(&self, i: usize, p: &Q) -> Result<Self, TorsionError> {
        let pinv = p.inverse().ok_or_else(|| TorsionError::InvalidChoice("singular change of basis".into()))?;
        let mut b = self.boundaries.clone();
        if i >= 1 && i <= self.length() {
            b[i - 1] = b[i - 1].mul(p);
        }
        if i < self.length() {
            b[i] = pinv.mul(&b[i]);
        }
        Self::new(self.ranks.clone(), b)
    }
}

fn block_diag(a: &Q, b: &Q) -> Q {
    let mut m = Matrix::zeros(a.rows() + b.rows(), a.cols() + b.cols());
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            m[(r, c)] = a[(r, c)].clone();
        }
    }
    for r in 0..b.rows() {
        for c in 0..b.cols() {
            m[(a.rows() + r, a.cols() + c)] = b[(r, c)].clone();
        }
    }
    m
}

fn columns(m: &Q, idx: &[usize]) -> Q {
    let cols: Vec<Vec<Rational>> = idx.iter().map(|&j| m.column(j)).collect();
    Matrix::from_columns(m.rows(), &cols)
}

fn hcat(a: &Q, b: &Q) -> Q {
    let mut cols: Vec<Vec<Rational>> = (0..a.cols()).map(|j| a.column(j)).collect();
    cols.extend((0..b.cols()).map(|j| b.column(j)));
    Matrix::from_columns(a.rows(), &cols)
}

/// Basis of the kernel as columns, from the reduced row echelon form.
pub fn kernel_basis(m: &Q) -> Q {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else { continue };
        for j in 0..cols {
            let t = a[(p, j)].clone();
            a[(p, j)] = a[(r, j)].clone();
            a[(r, j)] = t;
        }
        let inv = a[(r, c)].recip();
        for j in 0..cols {
            a[(r, j)] = a[(r, j)].clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !a[(i, c)].is_zero() {
                let f = a[(i, c)].clone();
                for j in 0..cols {
                    let v = a[(r, j)].clone();
                    a[(i, j)] = a[(i, j)].clone() - f.clone() * v;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let basis: Vec<Vec<Rational>> = free
        .iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (k, &p) in pivots.iter().enumerate() {
                v[p] = -a[(k, f)].clone();
            }
            v
        })
        .collect();
    Matrix::from_columns(cols, &basis)
}

/// For each degree `i`: a basis `b_i` of `im ∂_{i+1} ⊆ C_i` and lifts `b̃_i ⊂ C_{i+1}` with `∂_{i+1} b̃_i = b_i`.
#[derive(Debug, Clone)]
pub struct TorsionChoices {
    pub bases: Vec<Q>,
    pub lifts: Vec<Q>,
}

impl TorsionChoices {
    /// `b_i` = pivot columns of `∂_{i+1}`, lifted to the matching standard basis vectors.
    pub fn standard(c: &BasedChainComplex) -> Self {
        let mut bases = Vec::new();
        let mut lifts = Vec::new();
        for i in 0..=c.length() {
            let d = c.boundary(i + 1);
            let piv = d.pivot_columns();
            bases.push(columns(&d, &piv));
            let src = c.ranks.get(i + 1).copied().unwrap_or(0);
            let id = Matrix::<Rational>::identity(src);
            lifts.push(columns(&id, &piv));
        }
        Self { bases, lifts }
    }

    /// Resamples every choice: `b_i ↦ b_i G_i` for random invertible `G_i`, lifts shifted by random kernel elements.
    pub fn resample<R: Rng + ?Sized>(c: &BasedChainComplex, rng: &mut R) -> Self {
        let std = Self::standard(c);
        let mut bases = Vec::new();
        let mut lifts = Vec::new();
        for i in 0..=c.length() {
            let r = std.bases[i].cols();
            let g = random_invertible(r, rng);
            let kernel = kernel_basis(&c.boundary(i + 1));
            let noise: Q = Matrix::from_shape(
                kernel.cols(),
                r,
                (0..kernel.cols() * r).map(|_| Rational::from_integer(rng.random_range(-3i64..=3).into())).collect(),
            );
            bases.push(std.bases[i].mul(&g));
            lifts.push(std.lifts[i].mul(&g).add(&kernel.mul(&noise)));
        }
        Self { bases, lifts }
    }
}

fn random_invertible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Q {
    loop {
        let m: Q = Matrix::from_shape(
            n,
            n,
            (0..n * n).map(|_| Rational::new(rng.random_range(-4i64..=4).into(), rng.random_range(1i64..=3).into())).collect(),
        );
        if !m.det().is_zero() {
            return m;
        }
    }
}

trait MatrixAdd {
    fn add(&self, other: &Self) -> Self;
}

impl MatrixAdd for Q {
    fn add(&self, other: &Self) -> Self {
        let data = (0..self.rows())
            .flat_map(|r| (0..self.cols()).map(move |c| (r, c)))
            .map(|(r, c)| self[(r, c)].clone() + other[(r, c)].clone())
            .collect();
        Matrix::from_shape(self.rows(), self.cols(), data)
    }
}

/// `τ(C) = Π_i det[b_i | b̃_{i−1}]^{(−1)^{i+1}}` in the distinguished basis of each `C_i`.
pub fn torsion_with(c: &BasedChainComplex, choices: &TorsionChoices) -> Result<Rational, TorsionError> {
    if !c.is_acyclic() {
        return Err(TorsionError::NotAcyclic);
    }
    let m = c.length();
    for i in 0..=m {
        let d = c.boundary(i + 1);
        if d.mul(&choices.lifts[i]) != choices.bases[i] {
            return Err(TorsionError::InvalidChoice(format!("lifts in degree {i} do not map onto b_{i}")));
        }
    }
    let mut tau = Rational::one();
    for i in 0..=m {
        let mut block = choices.bases[i].clone();
        if i > 0 {
            block = hcat(&block, &choices.lifts[i - 1]);
        }
        if block.cols() != c.ranks[i] {
            return Err(TorsionError::InvalidChoice(format!("degree {i}: {} vectors for rank {}", block.cols(), c.ranks[i])));
        }
        let det = if c.ranks[i] == 0 { Rational::one() } else { block.det() };
        if det.is_zero() {
            return Err(TorsionError::InvalidChoice(format!("degree {i}: b_{i} and the lifts of b_{} are dependent", i as i64 - 1)));
        }
        tau = if i % 2 == 1 { tau * det } else { tau / det };
    }
    Ok(tau)
}

/// Torsion with the deterministic pivot-order choices.
pub fn torsion(c: &BasedChainComplex) -> Result<Rational, TorsionError> {
    torsion_with(c, &TorsionChoices::standard(c))
}

#[derive(Debug, Clone, Serialize)]
pub struct SesReport {
    pub tau_c: String,
    pub tau_sub: String,
    pub tau_quotient: String,
    /// `τ(A_i)` with `A_i = (C'_i → C_i → C''_i)` in degrees 2, 1, 0.
    pub tau_a: Vec<String>,
    /// `|τ(C)| = |Π τ(A_i)| · |τ(C')| · |τ(C'')|`, as printed.
    pub holds_as_printed: bool,
    /// `|τ(C)| = |Π τ(A_i)^{(−1)^{i+1}}| · |τ(C')| · |τ(C'')|`.
    pub holds_alternating: bool,
    /// Sign of `τ(C) / (Π τ(A_i)^{(−1)^{i+1}} τ(C') τ(C''))`.
    pub sign: i8,
}


/// Checks the multiplicativity formula for `0 → C' →f C →g C'' → 0`, `f[i] : C'_i → C_i`, `g[i] : C_i → C''_i`.
pub fn ses_multiplicativity_check(
    sub: &BasedChainComplex,
    c: &BasedChainComplex,
    quotient: &BasedChainComplex,
    f: &[Q],
    g: &[Q],
) -> Result<SesReport, TorsionError> {
    let m = c.length();
    let rank = |x: &BasedChainComplex, i: usize| x.ranks.get(i).copied().unwrap_or(0);
    if f.len() != m + 1 || g.len() != m + 1 {
        return Err(TorsionError::NotExact(format!("need {} maps in each of f and g", m + 1)));
    }
    let ext = |x: &BasedChainComplex, i: usize| -> Q {
        if i <= x.length() {
            x.boundary(i)
        } else {
            Matrix::zeros(rank(x, i - 1), rank(x, i))
        }
    };
    let mut tau_a = Vec::new();
    for i in 0..=m {
        let (a, b, q) = (rank(sub, i), rank(c, i), rank(quotient, i));
        if f[i].rows() != b || f[i].cols() != a || g[i].rows() != q || g[i].cols() != b {
            return Err(TorsionError::NotExact(format!("map shapes in degree {i}")));
        }
        if a + q != b || f[i].rank() != a || g[i].rank() != q || !g[i].mul(&f[i]).is_zero() {
            return Err(TorsionError::NotExact(format!("degree {i} is not short exact")));
        }
        if i >= 1 {
            if c.boundary(i).mul(&f[i]) != f[i - 1].mul(&ext(sub, i)) {
                return Err(TorsionError::NotExact(format!("f is not a chain map at degree {i}")));
            }
            if ext(quotient, i).mul(&g[i]) != g[i - 1].mul(&c.boundary(i)) {
                return Err(TorsionError::NotExact(format!("g is not a chain map at degree {i}")));
            }
        }
        let ai = BasedChainComplex::new(vec![q, b, a], vec![g[i].clone(), f[i].clone()])?;
        tau_a.push(torsion(&ai)?);
    }
    let tc = torsion(c)?;
    let ts = torsion(sub)?;
    let tq = torsion(quotient)?;
    let plain: Rational = tau_a.iter().cloned().product();
    let alternating = tau_a.iter().enumerate().fold(Rational::one(), |acc, (i, t)| if i % 2 == 1 { acc * t } else { acc / t });
    let rhs_alt = alternating * ts.clone() * tq.clone();
    let ratio = tc.clone() / rhs_alt.clone();
    Ok(SesReport {
        tau_c: format_rational(&tc),
        tau_sub: format_rational(&ts),
        tau_quotient: format_rational(&tq),
        tau_a: tau_a.iter().map(format_rational).collect(),
        holds_as_printed: rational_abs(&tc) == rational_abs(&(plain * ts * tq)),
        holds_alternating: rational_abs(&tc) == rational_abs(&rhs_alt),
        sign: if ratio.is_negative() { -1 } else { 1 },
    })
}

/// `U·A·V = diag(d_1, .., d_r, 0, ..)` with `d_1 | d_2 | ..`, `d_i > 0`, `U`, `V` unimodular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub factors: Vec<BigInt>,
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
}

pub fn smith_normal_form(a: &[Vec<BigInt>]) -> SmithForm {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let ident = |k: usize| -> Vec<Vec<BigInt>> {
        (0..k).map(|i| (0..k).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
    };
    let mut d = a.to_vec();
    let mut u = ident(m);
    let mut v = ident(n);
    let mut factors = Vec::new();
    for t in 0..m.min(n) {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if !d[i][j].is_zero() && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return SmithForm { factors, u, v };
            };
            d.swap(t, pi);
            u.swap(t, pi);
            for row in d.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
            let mut clean = true;
            for i in t + 1..m {
                let q = d[i][t].div_floor(&d[t][t]);
                if !q.is_zero() {
                    for j in 0..n {
                        let s = &q * &d[t][j];
                        d[i][j] -= s;
                    }
                    for j in 0..m {
                        let s = &q * &u[t][j];
                        u[i][j] -= s;
                    }
                }
                clean &= d[i][t].is_zero();
            }
            for j in t + 1..n {
                let q = d[t][j].div_floor(&d[t][t]);
                if !q.is_zero() {
                    for i in 0..m {
                        let s = &q * &d[i][t];
                        d[i][j] -= s;
                    }
                    for i in 0..n {
                        let s = &q * &v[i][t];
                        v[i][j] -= s;
                    }
                }
                clean &= d[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            // divisibility: fold an offending row into the pivot row and repeat
            let offending = (t + 1..m).find(|&i| (t + 1..n).any(|j| !(&d[i][j] % &d[t][t]).is_zero()));
            if let Some(i) = offending {
                for j in 0..n {
                    let s = d[i][j].clone();
                    d[t][j] += s;
                }
                for j in 0..m {
                    let s = u[i][j].clone();
                    u[t][j] += s;
                }
                continue;
            }
            break;
        }
        if d[t][t].is_negative() {
            for j in 0..n {
                d[t][j] = -d[t][j].clone();
            }
            for j in 0..m {
                u[t][j] = -u[t][j].clone();
            }
        }
        factors.push(d[t][t].clone());
    }
    SmithForm { factors, u, v }
}

#[derive(Debug, Clone, Serialize)]
pub struct TorsionOrderReport {
    /// `ord H_i(C)` for `i = 0..=m`.
    pub orders: Vec<String>,
    pub tau: String,
    /// `Π (ord H_i)^{(−1)^{i+1}}`.
    pub product: String,
    pub pass: bool,
}

fn integer_matrix(m: &Q) -> Result<Vec<Vec<BigInt>>, TorsionError> {
    (0..m.rows())
        .map(|r| {
            (0..m.cols())
                .map(|c| {
                    let x = &m[(r, c)];
                    if x.is_integer() {
                        Ok(x.to_integer())
                    } else {
                        Err(TorsionError::InvalidComplex("torsion_order_check needs integer boundaries".into()))
                    }
                })
                .collect()
        })
        .collect()
}

/// `|τ(ℚ⊗C)| = Π (ord H_i(C))^{(−1)^{i+1}}`, with `ord H_i` the product of the invariant factors of
/// `∂_{i+1}` (the kernel of `∂_i` is a direct summand, so these present the torsion of `H_i`).
pub fn torsion_order_check(c: &BasedChainComplex) -> Result<TorsionOrderReport, TorsionError> {
    let mut orders = Vec::new();
    for i in 0..=c.length() {
        let d_in = c.boundary(i + 1);
        let d_out = c.boundary(i);
        if d_in.rank() + d_out.rank() != c.ranks[i] {
            return Err(TorsionError::NotRationallyAcyclic(i));
        }
        let smith = smith_normal_form(&integer_matrix(&d_in)?);
        orders.push(smith.factors.iter().fold(BigInt::one(), |acc, x| acc * x));
    }
    let tau = torsion(c)?;
    let product = orders.iter().enumerate().fold(Rational::one(), |acc, (i, o)| {
        let q = Rational::from_integer(o.clone());
        if i % 2 == 1 {
            acc * q
        } else {
            acc / q
        }
    });
    Ok(TorsionOrderReport {
        orders: orders.iter().map(|o| o.to_string()).collect(),
        tau: format_rational(&tau),
        product: format_rational(&product),
        pass: rational_abs(&tau) == product,
    })
}

/// A rationally acyclic integer complex with known homology: a sum of pieces `ℤ →(d) ℤ`
/// in random degrees, conjugated by random unimodular matrices. Returns the complex,
/// `ord H_i` per degree, and `|τ|`.
pub fn random_integer_complex<R: Rng + ?Sized>(rng: &mut R, length: usize, max_rank: usize) -> (BasedChainComplex, Vec<BigInt>, Rational) {
    assert!(length >= 1, "a random complex needs length ≥ 1");
    let mut ranks = vec![0usize; length + 1];
    let mut pieces: Vec<(usize, i64)> = Vec::new();
    let target = rng.random_range(1..=2 * length);
    for _ in 0..target {
        let k = rng.random_range(0..length);
        if ranks[k] < max_rank && ranks[k + 1] < max_rank {
            let d = rng.random_range(1i64..=6) * if rng.random_bool(0.3) { -1 } else { 1 };
            pieces.push((k, d));
            ranks[k] += 1;
            ranks[k + 1] += 1;
        }
    }
    let mut boundaries: Vec<Q> = (1..=length).map(|i| Matrix::zeros(ranks[i - 1], ranks[i])).collect();
    let mut next = vec![0usize; length + 1];
    let mut orders = vec![BigInt::one(); length + 1];
    let mut tau = Rational::one();
    for &(k, d) in &pieces {
        let (row, col) = (next[k], next[k + 1]);
        next[k] += 1;
        next[k + 1] += 1;
        boundaries[k][(row, col)] = Rational::from_integer(d.into());
        orders[k] *= BigInt::from(d.abs());
        // the piece contributes |d| at degree k with exponent (−1)^{k+1}
        let q = Rational::from_integer(d.abs().into());
        tau = if k % 2 == 1 { tau * q } else { tau / q };
    }
    let mut c = BasedChainComplex::new(ranks.clone(), boundaries).expect("block complex is valid");
    for (i, &n) in ranks.iter().enumerate() {
        c = c.change_basis(i, &random_unimodular(n, rng)).expect("unimodular");
    }
    (c, orders, tau)
}

/// Product of random elementary integer row operations and sign flips.
pub fn random_unimodular<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Q {
    let mut m = Matrix::<Rational>::identity(n);
    if n == 0 {
        return m;
    }
    for _ in 0..3 * n {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i == j {
            if rng.random_bool(0.2) {
                for c in 0..n {
                    m[(i, c)] = -m[(i, c)].clone();
                }
            }
            continue;
        }
        let k = Rational::from_integer(rng.random_range(-2i64..=2).into());
        for c in 0..n {
            let add = k.clone() * m[(j, c)].clone();
            m[(i, c)] += add;
        }
    }
    m
}

/// A short exact sequence `0 → C' →f C →g C'' → 0` of based complexes.
#[derive(Debug, Clone)]
pub struct SesInstance {
    pub sub: BasedChainComplex,
    pub total: BasedChainComplex,
    pub quotient: BasedChainComplex,
    pub f: Vec<Q>,
    pub g: Vec<Q>,
}

impl SesInstance {
    pub fn check(&self) -> Result<SesReport, TorsionError> {
        ses_multiplicativity_check(&self.sub, &self.total, &self.quotient, &self.f, &self.g)
    }
}

/// `C = C' ⊕ C''` re-based on every `C_i` by a random unimodular `P_i`, with the inclusion
/// and projection written in the new bases. Every `A_i` then has torsion ±1.
pub fn random_direct_sum_ses<R: Rng + ?Sized>(rng: &mut R, length: usize, max_rank: usize) -> SesInstance {
    let (sub, _, _) = random_integer_complex(rng, length, max_rank);
    let (quotient, _, _) = random_integer_complex(rng, length, max_rank);
    let mut total = sub.direct_sum(&quotient).expect("sum of valid complexes");
    let mut f = Vec::new();
    let mut g = Vec::new();
    for i in 0..=length {
        let (a, q) = (sub.ranks[i], quotient.ranks[i]);
        let p = random_unimodular(a + q, rng);
        let pinv = p.inverse().expect("unimodular");
        let id = Matrix::<Rational>::identity(a + q);
        let incl = columns(&id, &(0..a).collect::<Vec<_>>());
        let proj = columns(&id, &(a..a + q).collect::<Vec<_>>()).transpose();
        f.push(pinv.mul(&incl));
        g.push(proj.mul(&p));
        total = total.change_basis(i, &p).expect("unimodular");
    }
    SesInstance { sub, total, quotient, f, g }
}
