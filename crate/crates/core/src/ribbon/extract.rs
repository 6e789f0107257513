use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{dart_count, enumerate_trivalent, RibbonError, RibbonGraphClass, DEFAULT_MAX_DARTS};
use crate::linalg::{solve_linear_exact, LinalgError, Matrix};
use crate::scalar::{format_rational, int, odd_double_factorial, rat, Coefficient, Rational};

/// `Σ_Γ 2^{-V}/|Aut Γ| · Π_e 2/(λ_a + λ_b)` over the given classes, faces `a`, `b` of `e`.
pub fn kontsevich_sum_classes<C: Coefficient>(classes: &[RibbonGraphClass], lambda: &[C]) -> Result<C, RibbonError> {
    let two = C::from_i64(2);
    let mut total = C::zero();
    for class in classes {
        let mut term = C::one() / C::from_i64(class.aut_order as i64);
        for _ in 0..class.vertices() {
            term = term / two.clone();
        }
        for &(a, b) in &class.edge_face_pairs {
            let (a, b) = (a as usize - 1, b as usize - 1);
            let (la, lb) = lambda_pair(lambda, a, b)?;
            let s = la + lb;
            if s.is_zero() {
                return Err(RibbonError::PoleError { a: a + 1, b: b + 1 });
            }
            term = term * two.clone() / s;
        }
        total = total + term;
    }
    Ok(total)
}

fn lambda_pair<C: Clone>(lambda: &[C], a: usize, b: usize) -> Result<(C, C), RibbonError> {
    let need = a.max(b) + 1;
    if lambda.len() < need {
        return Err(RibbonError::Arity { expected: need, got: lambda.len() });
    }
    Ok((lambda[a].clone(), lambda[b].clone()))
}

/// Graph side of the main identity at the point `lambda`.
pub fn kontsevich_sum(g: u32, n: u32, lambda: &[Rational], max_darts: usize) -> Result<Rational, RibbonError> {
    if lambda.len() != n as usize {
        return Err(RibbonError::Arity { expected: n as usize, got: lambda.len() });
    }
    let classes = enumerate_trivalent(g, n, max_darts)?;
    kontsevich_sum_classes(&classes, lambda)
}

/// Classes grouped by their multiset of edge face pairs; the graph side is a
/// weighted sum of `Π (λ_a+λ_b)^{-k}` over these groups.
struct GraphSide {
    groups: Vec<(Rational, Vec<((usize, usize), u32)>)>,
}

impl GraphSide {
    fn new(classes: &[RibbonGraphClass]) -> Self {
        let mut by_edges: BTreeMap<Vec<((usize, usize), u32)>, Rational> = BTreeMap::new();
        for c in classes {
            let mut counts: BTreeMap<(usize, usize), u32> = BTreeMap::new();
            for &(a, b) in &c.edge_face_pairs {
                *counts.entry((a as usize - 1, b as usize - 1)).or_default() += 1;
            }
            let e = c.edge_face_pairs.len() as i32;
            let v = c.vertices() as i32;
            // 2^{-V} · 2^{E} / |Aut|
            let w = pow2(e - v) / int(c.aut_order as i64);
            let key: Vec<_> = counts.into_iter().collect();
            let slot = by_edges.entry(key).or_insert_with(Rational::zero);
            *slot += w;
        }
        Self { groups: by_edges.into_iter().map(|(k, w)| (w, k)).collect() }
    }

    fn eval(&self, lambda: &[Rational]) -> Result<Rational, RibbonError> {
        let mut total = Rational::zero();
        for (w, edges) in &self.groups {
            let mut den = Rational::one();
            for &((a, b), k) in edges {
                let s = &lambda[a] + &lambda[b];
                if s.is_zero() {
                    return Err(RibbonError::PoleError { a: a + 1, b: b + 1 });
                }
                den *= num_traits::pow(s, k as usize);
            }
            total += w / den;
        }
        Ok(total)
    }
}

fn pow2(e: i32) -> Rational {
    let p = num_traits::pow(int(2), e.unsigned_abs() as usize);
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

/// All ordered `n`-tuples of non-negative integers summing to `total`, lexicographic.
pub fn ordered_tuples(n: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == n {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for d in 0..=left {
            cur.push(d);
            rec(n, left - d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, total, &mut Vec::with_capacity(n), &mut out);
    out
}

/// `Π (2d_i − 1)!! · λ_i^{−(2d_i+1)}`.
pub fn lhs_basis_value(d: &[u32], lambda: &[Rational]) -> Rational {
    d.iter().zip(lambda).fold(Rational::one(), |acc, (&di, l)| {
        acc * Rational::from_integer(odd_double_factorial(di)) / num_traits::pow(l.clone(), 2 * di as usize + 1)
    })
}

/// Reference normalization of the two base cases: `⟨τ_0³⟩ = 1`, `⟨τ_1⟩ = 1/24`.
pub fn reference_value(g: u32, n: u32) -> Option<(Vec<u32>, Rational)> {
    match (g, n) {
        (0, 3) => Some((vec![0, 0, 0], int(1))),
        (1, 1) => Some((vec![1], rat(1, 24))),
        _ => None,
    }
}

/// Graph side divided by the reference left-hand side at `lambda`. A convention
/// mismatch in the graph weights shows up as a constant different from 1.
pub fn normalization_ratio(g: u32, n: u32, lambda: &[Rational], max_darts: usize) -> Result<Option<Rational>, RibbonError> {
    let Some((d, value)) = reference_value(g, n) else {
        return Ok(None);
    };
    let graph = kontsevich_sum(g, n, lambda, max_darts)?;
    Ok(Some(graph / (value * lhs_basis_value(&d, lambda))))
}

const PRIMES: [i64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleFamily {
    /// `λ_i = p_i + k/q`.
    Line { q: i64 },
    /// `λ_i = p_i + k^{i+1}/q`.
    MomentCurve { q: i64 },
}

impl SampleFamily {
    pub fn point(&self, k: usize, n: usize) -> Vec<Rational> {
        assert!(n <= PRIMES.len(), "too many faces for the sample prime table");
        let k = k as i64;
        (0..n)
            .map(|i| match *self {
                SampleFamily::Line { q } => int(PRIMES[i]) + rat(k, q),
                SampleFamily::MomentCurve { q } => int(PRIMES[i]) + rat(k.pow(i as u32 + 1), q),
            })
            .collect()
    }

    pub fn name(&self) -> String {
        match self {
            SampleFamily::Line { q } => format!("line(q={q})"),
            SampleFamily::MomentCurve { q } => format!("moment-curve(q={q})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub max_darts: usize,
    pub primary: SampleFamily,
    /// Used when the primary family is rank deficient.
    pub fallback: SampleFamily,
    /// An independent family whose solution must coincide with the primary one.
    pub check: SampleFamily,
    pub check_normalization: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            max_darts: DEFAULT_MAX_DARTS,
            primary: SampleFamily::Line { q: 7 },
            fallback: SampleFamily::MomentCurve { q: 7 },
            check: SampleFamily::MomentCurve { q: 13 },
            check_normalization: true,
        }
    }
}

/// Exact `⟨τ_{d_1}⋯τ_{d_n}⟩_g` keyed by genus and the non-increasing exponent tuple,
/// plus the set of `(g, n)` fragments known to be complete.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntersectionTable {
    entries: BTreeMap<(u32, Vec<u32>), Rational>,
    fragments: BTreeSet<(u32, u32)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TableRow {
    genus: u32,
    tuple: Vec<u32>,
    value: String,
}

impl IntersectionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sort_key(d: &[u32]) -> Vec<u32> {
        let mut k = d.to_vec();
        k.sort_unstable_by(|a, b| b.cmp(a));
        k
    }

    pub fn format_key(d: &[u32]) -> String {
        let parts: Vec<String> = Self::sort_key(d).iter().map(u32::to_string).collect();
        format!("({})", parts.join(","))
    }

    pub fn insert(&mut self, g: u32, d: &[u32], value: Rational) {
        self.entries.insert((g, Self::sort_key(d)), value);
    }

    pub fn mark_fragment(&mut self, g: u32, n: u32) {
        self.fragments.insert((g, n));
    }

    pub fn has_fragment(&self, g: u32, n: u32) -> bool {
        self.fragments.contains(&(g, n))
    }

    pub fn fragments(&self) -> &BTreeSet<(u32, u32)> {
        &self.fragments
    }

    pub fn get(&self, g: u32, d: &[u32]) -> Option<&Rational> {
        self.entries.get(&(g, Self::sort_key(d)))
    }

    /// Value of a correlator inside a complete fragment (absent entries are zero there).
    pub fn value(&self, g: u32, d: &[u32]) -> Option<Rational> {
        if let Some(v) = self.get(g, d) {
            return Some(v.clone());
        }
        self.has_fragment(g, d.len() as u32).then(Rational::zero)
    }

    pub fn entries(&self) -> &BTreeMap<(u32, Vec<u32>), Rational> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn merge(&mut self, other: &IntersectionTable) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
        self.fragments.extend(other.fragments.iter().copied());
    }

    /// Entries of one `(g, n)` fragment as `{"(d_1,..)": "p/q"}`.
    pub fn fragment_numbers(&self, g: u32, n: u32) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .filter(|((eg, d), _)| *eg == g && d.len() == n as usize)
            .map(|((_, d), v)| (Self::format_key(d), format_rational(v)))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<TableRow> = self
            .entries
            .iter()
            .map(|((g, d), v)| TableRow { genus: *g, tuple: d.clone(), value: format_rational(v) })
            .collect();
        let fragments: Vec<[u32; 2]> = self.fragments.iter().map(|&(g, n)| [g, n]).collect();
        serde_json::json!({ "entries": rows, "fragments": fragments })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        let rows: Vec<TableRow> =
            serde_json::from_value(v.get("entries").cloned().unwrap_or_default()).map_err(|e| e.to_string())?;
        let fragments: Vec<[u32; 2]> =
            serde_json::from_value(v.get("fragments").cloned().unwrap_or_default()).map_err(|e| e.to_string())?;
        let mut t = Self::new();
        for r in rows {
            let q = crate::scalar::parse_rational(&r.value).map_err(|e| e.to_string())?;
            t.insert(r.genus, &r.tuple, q);
        }
        for [g, n] in fragments {
            t.mark_fragment(g, n);
        }
        Ok(t)
    }
}

#[derive(Debug, Clone)]
pub struct ExtractionReport {
    pub g: u32,
    pub n: u32,
    pub darts: usize,
    pub class_count: usize,
    pub unknowns: usize,
    pub samples: usize,
    pub family: SampleFamily,
    pub check_family: SampleFamily,
    /// `None` outside the base cases.
    pub normalization_ratio: Option<Rational>,
    pub residual_zero: bool,
    pub table: IntersectionTable,
}

fn solve_family(
    side: &GraphSide,
    tuples: &[Vec<u32>],
    n: usize,
    samples: usize,
    family: SampleFamily,
) -> Result<Vec<Rational>, LinalgError<Rational>> {
    let mut rows = Vec::with_capacity(samples);
    let mut y = Vec::with_capacity(samples);
    for k in 1..=samples {
        let lambda = family.point(k, n);
        rows.push(tuples.iter().map(|d| lhs_basis_value(d, &lambda)).collect());
        y.push(side.eval(&lambda).expect("sample points are positive"));
    }
    solve_linear_exact(&Matrix::from_rows(rows), &y)
}

/// Solves the main identity for every `⟨τ_{d_1}⋯τ_{d_n}⟩_g` with `Σ d_i = 3g − 3 + n`.
pub fn extract_intersection_numbers(g: u32, n: u32, opts: &ExtractOptions) -> Result<ExtractionReport, RibbonError> {
    let darts = dart_count(g, n)?;
    let classes = enumerate_trivalent(g, n, opts.max_darts)?;
    let side = GraphSide::new(&classes);
    let nu = n as usize;

    let normalization_ratio = if opts.check_normalization {
        match reference_value(g, n) {
            Some((d, value)) => {
                let lambda = opts.primary.point(1, nu);
                let r = side.eval(&lambda)? / (value * lhs_basis_value(&d, &lambda));
                if !r.is_one() {
                    return Err(RibbonError::NormalizationMismatch { g, n, ratio: format_rational(&r) });
                }
                Some(r)
            }
            None => None,
        }
    } else {
        None
    };

    let total = 3 * g + n - 3;
    let tuples = ordered_tuples(nu, total);
    let unknowns = tuples.len();
    let samples = (5 * unknowns).div_ceil(4).max(unknowns + 1);

    let map_err = |e: LinalgError<Rational>| match e {
        LinalgError::InconsistentSystem { residual } => {
            RibbonError::InconsistentSystem { g, n, nonzero: residual.iter().filter(|v| !v.is_zero()).count() }
        }
        _ => RibbonError::RankDeficient { g, n },
    };
    let (solution, family) = match solve_family(&side, &tuples, nu, samples, opts.primary) {
        Ok(x) => (x, opts.primary),
        Err(LinalgError::RankDeficient { .. }) => {
            (solve_family(&side, &tuples, nu, samples, opts.fallback).map_err(map_err)?, opts.fallback)
        }
        Err(e) => return Err(map_err(e)),
    };
    let check = solve_family(&side, &tuples, nu, samples, opts.check).map_err(map_err)?;
    if check != solution {
        return Err(RibbonError::FamilyDisagreement { g, n });
    }

    let mut table = IntersectionTable::new();
    let mut by_key: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
    for (d, v) in tuples.iter().zip(&solution) {
        let key = IntersectionTable::sort_key(d);
        match by_key.get(&key) {
            Some(prev) if prev != v => return Err(RibbonError::Asymmetric { g, n }),
            Some(_) => {}
            None => {
                by_key.insert(key, v.clone());
            }
        }
    }
    for (d, v) in by_key {
        if !v.is_zero() {
            table.insert(g, &d, v);
        }
    }
    table.mark_fragment(g, n);

    Ok(ExtractionReport {
        g,
        n,
        darts,
        class_count: classes.len(),
        unknowns,
        samples,
        family,
        check_family: opts.check,
        normalization_ratio,
        residual_zero: true,
        table,
    })
}

/// Runs the extraction for every listed `(g, n)` and merges the fragments.
pub fn build_table(fragments: &[(u32, u32)], opts: &ExtractOptions) -> Result<IntersectionTable, RibbonError> {
    let mut table = IntersectionTable::new();
    for &(g, n) in fragments {
        table.merge(&extract_intersection_numbers(g, n, opts)?.table);
    }
    Ok(table)
}

/// Fragments with `n + 2g − 2 <= k_max`.
pub fn stable_range(k_max: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for g in 0..=(k_max + 1) / 2 + 1 {
        for n in 1..=k_max + 2 {
            let k = n as i64 + 2 * g as i64 - 2;
            if k >= 1 && k <= k_max as i64 {
                out.push((g, n));
            }
        }
    }
    out
}
