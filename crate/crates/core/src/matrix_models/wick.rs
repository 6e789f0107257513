use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::MatrixError;
use crate::ribbon::{enumerate_trivalent, kontsevich_sum_classes, DEFAULT_MAX_DARTS};
use crate::scalar::{format_rational, int, odd_double_factorial, Rational};
use crate::series::{series_log, SeriesLayout, TruncatedSeries};

pub const DEFAULT_MATCHING_BUDGET: u128 = 2_000_000;

/// `Π tr(M^k)^m`, stored as `power → multiplicity`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceWord {
    factors: BTreeMap<u32, u32>,
}

impl TraceWord {
    pub fn new(factors: impl IntoIterator<Item = (u32, u32)>) -> Result<Self, MatrixError> {
        let mut map = BTreeMap::new();
        for (k, m) in factors {
            if k == 0 {
                return Err(MatrixError::InvalidWord("trace powers must be >= 1".into()));
            }
            if m > 0 {
                *map.entry(k).or_insert(0) += m;
            }
        }
        Ok(Self { factors: map })
    }

    pub fn single(k: u32) -> Self {
        Self::new([(k, 1)]).expect("k >= 1")
    }

    pub fn factors(&self) -> &BTreeMap<u32, u32> {
        &self.factors
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(k, m)| k * m).sum()
    }

    pub fn trace_count(&self) -> u32 {
        self.factors.values().sum()
    }

    /// Trace lengths in order, one entry per trace.
    fn traces(&self) -> Vec<u32> {
        self.factors.iter().flat_map(|(&k, &m)| std::iter::repeat_n(k, m as usize)).collect()
    }
}

/// `"tr3^2*tr2"`, factors separated by `*` or whitespace; `"1"` is the empty word.
impl FromStr for TraceWord {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Self::new([]);
        }
        let mut factors = Vec::new();
        for tok in s.split(|c: char| c == '*' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let body = tok.strip_prefix("tr").ok_or_else(|| MatrixError::InvalidWord(format!("factor {tok:?} must start with tr")))?;
            let (k, m) = match body.split_once('^') {
                Some((k, m)) => (k, m),
                None => (body, "1"),
            };
            let parse = |x: &str| x.parse::<u32>().map_err(|_| MatrixError::InvalidWord(format!("bad number in {tok:?}")));
            factors.push((parse(k)?, parse(m)?));
        }
        Self::new(factors)
    }
}

impl fmt::Display for TraceWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> =
            self.factors.iter().map(|(k, m)| if *m == 1 { format!("tr{k}") } else { format!("tr{k}^{m}") }).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// `Diagonal`: Λ = diag(λ), propagator `⟨M_ij M_kl⟩ = 2δ_il δ_jk/(λ_i+λ_j)`.
/// `Scalar`: propagator `1/N`, each index loop contributing `N`.
#[derive(Debug, Clone, PartialEq)]
pub enum GaussianSpec {
    Diagonal(Vec<Rational>),
    Scalar,
}

impl GaussianSpec {
    pub fn diagonal(lambda: Vec<Rational>) -> Result<Self, MatrixError> {
        if lambda.is_empty() || lambda.iter().any(|l| *l <= Rational::zero()) {
            return Err(MatrixError::InvalidSpec("λ must be a nonempty list of positive rationals".into()));
        }
        Ok(Self::Diagonal(lambda))
    }
}

/// Laurent polynomial in `N`, exponent → coefficient.
pub type LaurentN = BTreeMap<i64, Rational>;

#[derive(Debug, Clone, PartialEq)]
pub enum Moment {
    Exact(Rational),
    Laurent(LaurentN),
}

impl Moment {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Moment::Exact(q) => serde_json::json!(format_rational(q)),
            Moment::Laurent(l) => serde_json::Value::Object(
                l.iter().map(|(e, c)| (format!("N^{e}"), serde_json::json!(format_rational(c)))).collect(),
            ),
        }
    }
}

/// One perfect matching of the entry slots, with the face structure it induces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingDiagram {
    pub pairs: Vec<(usize, usize)>,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    /// Connected components of the closed surface.
    pub components: usize,
    /// Sum of the component genera.
    pub genus: u32,
    /// For each pair, the two faces on its sides.
    pub edge_faces: Vec<(usize, usize)>,
}

/// Slots: trace `t` of length `k` owns slots `M_{i_p i_{p+1}}`, `p < k`, indices cyclic.
struct Slots {
    row: Vec<usize>,
    col: Vec<usize>,
    trace_of: Vec<usize>,
    traces: usize,
}

fn slots(w: &TraceWord) -> Slots {
    let mut row = Vec::new();
    let mut col = Vec::new();
    let mut trace_of = Vec::new();
    let mut base = 0;
    let traces = w.traces();
    for (t, &k) in traces.iter().enumerate() {
        for p in 0..k as usize {
            row.push(base + p);
            col.push(base + (p + 1) % k as usize);
            trace_of.push(t);
        }
        base += k as usize;
    }
    Slots { row, col, trace_of, traces: traces.len() }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

fn diagram(s: &Slots, pairs: &[(usize, usize)]) -> PairingDiagram {
    let n = s.row.len();
    // index nodes are identified as row(a) = col(b), col(a) = row(b)
    let mut parent: Vec<usize> = (0..n).collect();
    let union = |p: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            p[ra] = rb;
        }
    };
    for &(a, b) in pairs {
        union(&mut parent, s.row[a], s.col[b]);
        union(&mut parent, s.col[a], s.row[b]);
    }
    let mut face_id = HashMap::new();
    for x in 0..n {
        let r = find(&mut parent, x);
        let next = face_id.len();
        face_id.entry(r).or_insert(next);
    }
    let faces = face_id.len();
    let edge_faces = pairs
        .iter()
        .map(|&(a, _)| {
            let fa = face_id[&find(&mut parent, s.row[a])];
            let fb = face_id[&find(&mut parent, s.col[a])];
            (fa.min(fb), fa.max(fb))
        })
        .collect();
    // components over traces
    let mut comp: Vec<usize> = (0..s.traces).collect();
    for &(a, b) in pairs {
        let (ra, rb) = (find(&mut comp, s.trace_of[a]), find(&mut comp, s.trace_of[b]));
        if ra != rb {
            comp[ra] = rb;
        }
    }
    let components = (0..s.traces).filter(|&t| find(&mut comp, t) == t).count();
    let (v, e, f) = (s.traces as i64, pairs.len() as i64, faces as i64);
    let chi = v - e + f;
    let genus = ((2 * components as i64 - chi) / 2) as u32;
    PairingDiagram { pairs: pairs.to_vec(), vertices: s.traces, edges: pairs.len(), faces, components, genus, edge_faces }
}

fn matchings_count(slots: usize) -> u128 {
    if slots % 2 == 1 {
        return 0;
    }
    (1..slots as u128).step_by(2).product()
}

fn extend(free: &mut Vec<usize>, pairs: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    if free.is_empty() {
        out.push(pairs.clone());
        return;
    }
    let a = free.remove(0);
    for i in 0..free.len() {
        let b = free.remove(i);
        pairs.push((a, b));
        extend(free, pairs, out);
        pairs.pop();
        free.insert(i, b);
    }
    free.insert(0, a);
}

/// Every perfect matching of the slots of `w`, with its diagram. Parallel over the partner of slot 0.
pub fn pairing_diagrams(w: &TraceWord, budget: u128) -> Result<Vec<PairingDiagram>, MatrixError> {
    let d = w.degree() as usize;
    if d % 2 == 1 {
        return Ok(Vec::new());
    }
    let needed = matchings_count(d);
    if needed > budget {
        return Err(MatrixError::BudgetError { needed, budget });
    }
    let s = slots(w);
    if d == 0 {
        return Ok(vec![diagram(&s, &[])]);
    }
    let out: Vec<Vec<PairingDiagram>> = (1..d)
        .into_par_iter()
        .map(|b| {
            let mut free: Vec<usize> = (1..d).filter(|&x| x != b).collect();
            let mut pairs = vec![(0, b)];
            let mut all = Vec::new();
            extend(&mut free, &mut pairs, &mut all);
            all.iter().map(|p| diagram(&s, p)).collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// `Σ_{colorings} Π_e 2/(λ_{c(a)}+λ_{c(b)})` for one face structure.
fn colored_sum(faces: usize, edge_faces: &[(usize, usize)], prop: &[Vec<Rational>]) -> Rational {
    let n = prop.len();
    let mut total = Rational::zero();
    let mut color = vec![0usize; faces];
    loop {
        let mut term = Rational::one();
        for &(a, b) in edge_faces {
            term *= &prop[color[a]][color[b]];
        }
        total += term;
        let mut i = 0;
        while i < faces {
            color[i] += 1;
            if color[i] < n {
                break;
            }
            color[i] = 0;
            i += 1;
        }
        if i == faces {
            break;
        }
    }
    total
}

/// `⟨w⟩` summed over all perfect matchings. Odd degree is zero without enumeration.
pub fn wick_moment(spec: &GaussianSpec, w: &TraceWord) -> Result<Moment, MatrixError> {
    wick_moment_budget(spec, w, DEFAULT_MATCHING_BUDGET)
}

pub fn wick_moment_budget(spec: &GaussianSpec, w: &TraceWord, budget: u128) -> Result<Moment, MatrixError> {
    if w.degree() % 2 == 1 {
        return Ok(match spec {
            GaussianSpec::Diagonal(_) => Moment::Exact(Rational::zero()),
            GaussianSpec::Scalar => Moment::Laurent(LaurentN::new()),
        });
    }
    let diagrams = pairing_diagrams(w, budget)?;
    match spec {
        GaussianSpec::Scalar => {
            let mut out = LaurentN::new();
            for dg in &diagrams {
                *out.entry(dg.faces as i64 - dg.edges as i64).or_insert_with(Rational::zero) += Rational::one();
            }
            Ok(Moment::Laurent(out))
        }
        GaussianSpec::Diagonal(lambda) => {
            let prop: Vec<Vec<Rational>> =
                lambda.iter().map(|a| lambda.iter().map(|b| int(2) / (a.clone() + b.clone())).collect()).collect();
            // diagrams with the same face incidence up to face order contribute equally
            let mut groups: HashMap<(usize, Vec<(usize, usize)>), u64> = HashMap::new();
            for dg in diagrams {
                let mut key = dg.edge_faces.clone();
                key.sort_unstable();
                *groups.entry((dg.faces, key)).or_insert(0) += 1;
            }
            let mut keys: Vec<_> = groups.into_iter().collect();
            keys.sort();
            let total = keys
                .par_iter()
                .map(|((faces, ef), count)| colored_sum(*faces, ef, &prop) * int(*count as i64))
                .reduce(Rational::zero, |a, b| a + b);
            Ok(Moment::Exact(total))
        }
    }
}

/// Pairing counts by total genus: in scalar mode `⟨w⟩ = Σ_g count_g · N^{F−E}`, with
/// `F − E = Σ_components (2 − 2g_c) − V`.
pub fn genus_expansion(w: &TraceWord) -> Result<BTreeMap<u32, Rational>, MatrixError> {
    let mut out = BTreeMap::new();
    for dg in pairing_diagrams(w, DEFAULT_MATCHING_BUDGET)? {
        *out.entry(dg.genus).or_insert_with(Rational::zero) += Rational::one();
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchReport {
    pub n: usize,
    pub lambda: Vec<String>,
    pub vertex_order: u32,
    /// Coefficient of `log I_N` at each even vertex count `V ≤ vertex_order`.
    pub wick: BTreeMap<u32, String>,
    pub graph: BTreeMap<u32, String>,
    /// `t_0(Λ)³/6 + t_1(Λ)/24`, reported at `vertex_order ≥ 2`.
    pub free_energy_v2: Option<String>,
    pub equal: bool,
}

/// `log ∫ exp(i tr M³/6) dμ_Λ` through `(tr M³)^{vertex_order}` by Wick contraction and
/// `series_log`, against `Σ_{(g,n)} (−1)^n/n! Σ_{r ∈ [N]^n} (graph side at λ_r)`.
pub fn kontsevich_match(lambda: &[Rational], vertex_order: u32) -> Result<MatchReport, MatrixError> {
    let spec = GaussianSpec::diagonal(lambda.to_vec())?;
    let n = lambda.len();
    let layout = Arc::new(SeriesLayout::new("s", 1, vec![1], vertex_order));
    // Σ_k (i/6)^k/k! ⟨(tr M³)^k⟩ s^k; odd k vanish, i^k = (−1)^{k/2} for even k
    let mut z = TruncatedSeries::<Rational>::zero(&layout);
    for k in 0..=vertex_order {
        if k % 2 == 1 {
            continue;
        }
        let w = TraceWord::new([(3, k)])?;
        let Moment::Exact(m) = wick_moment(&spec, &w)? else { unreachable!() };
        let sign = if (k / 2) % 2 == 0 { int(1) } else { int(-1) };
        let factorial: Rational = (1..=k as i64).map(int).product();
        let coeff = sign * m / (Rational::from_integer(6.into()).pow(k as i32) * factorial);
        z.add_term(vec![k], coeff);
    }
    let log = series_log(&z).map_err(|e| MatrixError::InvalidSpec(e.to_string()))?;
    let mut wick = BTreeMap::new();
    let mut graph = BTreeMap::new();
    let mut equal = true;
    for v in (2..=vertex_order).step_by(2) {
        let lhs = log.coeff(&[v]);
        // V = 2(n + 2g − 2)
        let mut rhs = Rational::zero();
        let k = (v / 2) as i64;
        for g in 0..=(k + 2) / 2 {
            let faces = k + 2 - 2 * g;
            if faces < 1 {
                continue;
            }
            let classes = enumerate_trivalent(g as u32, faces as u32, DEFAULT_MAX_DARTS.max(6 * k as usize))?;
            let sign = if faces % 2 == 0 { int(1) } else { int(-1) };
            let factorial: Rational = (1..=faces).map(int).product();
            let mut colored = Rational::zero();
            let mut r = vec![0usize; faces as usize];
            loop {
                let pt: Vec<Rational> = r.iter().map(|&i| lambda[i].clone()).collect();
                colored += kontsevich_sum_classes(&classes, &pt)?;
                let mut i = 0;
                while i < r.len() {
                    r[i] += 1;
                    if r[i] < n {
                        break;
                    }
                    r[i] = 0;
                    i += 1;
                }
                if i == r.len() {
                    break;
                }
            }
            rhs += sign * colored / factorial;
        }
        equal &= lhs == rhs;
        wick.insert(v, format_rational(&lhs));
        graph.insert(v, format_rational(&rhs));
    }
    let free_energy_v2 = (vertex_order >= 2).then(|| {
        let t = |i: u32| -> Rational {
            let s: Rational = lambda.iter().map(|l| l.pow(-(2 * i as i32 + 1))).sum();
            -Rational::from(odd_double_factorial(i)) * s
        };
        let t0 = t(0);
        let fe = t0.clone() * t0.clone() * t0 / int(6) + t(1) / int(24);
        equal &= wick.get(&2).map(|w| *w == format_rational(&fe)).unwrap_or(false);
        format_rational(&fe)
    });
    Ok(MatchReport { n, lambda: lambda.iter().map(format_rational).collect(), vertex_order, wick, graph, free_energy_v2, equal })
}
