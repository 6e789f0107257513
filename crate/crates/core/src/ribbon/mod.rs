//! Trivalent ribbon graphs with labeled faces.
//!
//! A graph on `D` darts is a pair of permutations: `sigma` (vertices, all
//! 3-cycles) and `alpha` (edges, a fixed-point-free involution). Faces are the
//! cycles of `sigma ∘ alpha`, i.e. `d ↦ sigma[alpha[d]]`. Isomorphisms are dart
//! bijections conjugating both permutations and preserving face labels.

mod enumerate;
mod extract;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use enumerate::{enumerate_trivalent, rooted_trivalent_maps, DEFAULT_MAX_DARTS};
pub use extract::{
    build_table, extract_intersection_numbers, kontsevich_sum, kontsevich_sum_classes, lhs_basis_value,
    normalization_ratio, ordered_tuples, reference_value, stable_range, ExtractOptions, ExtractionReport,
    IntersectionTable, SampleFamily,
};

pub type Dart = u16;
const UNSET: Dart = Dart::MAX;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RibbonError {
    #[error("unstable (g, n) = ({g}, {n}): need n + 2g - 2 >= 1")]
    Unstable { g: u32, n: u32 },
    #[error("enumeration needs {needed} darts, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("pole: lambda_{a} + lambda_{b} = 0")]
    PoleError { a: usize, b: usize },
    #[error("expected {expected} face weights, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("graph side differs from the normalized left-hand side by the constant {ratio} at (g, n) = ({g}, {n})")]
    NormalizationMismatch { g: u32, n: u32, ratio: String },
    #[error("inconsistent extraction system at (g, n) = ({g}, {n}); {nonzero} nonzero residual rows")]
    InconsistentSystem { g: u32, n: u32, nonzero: usize },
    #[error("rank-deficient extraction system at (g, n) = ({g}, {n}) for every sample family")]
    RankDeficient { g: u32, n: u32 },
    #[error("extracted values are not symmetric under permutation at (g, n) = ({g}, {n})")]
    Asymmetric { g: u32, n: u32 },
    #[error("sample families disagree at (g, n) = ({g}, {n})")]
    FamilyDisagreement { g: u32, n: u32 },
    #[error("invalid dart structure: {0}")]
    Invalid(String),
}

/// Number of darts of a trivalent graph with `n` faces and genus `g`.
pub fn dart_count(g: u32, n: u32) -> Result<usize, RibbonError> {
    let k = n as i64 + 2 * g as i64 - 2;
    if n == 0 || k < 1 {
        return Err(RibbonError::Unstable { g, n });
    }
    Ok(6 * k as usize)
}

/// `sigma` with vertex `v` = `(3v, 3v+1, 3v+2)`.
pub fn canonical_sigma(darts: usize) -> Vec<Dart> {
    (0..darts).map(|d| (3 * (d / 3) + (d % 3 + 1) % 3) as Dart).collect()
}

/// Face index of every dart (faces numbered by their smallest dart) and the face count.
pub fn face_cycles(sigma: &[Dart], alpha: &[Dart]) -> (Vec<usize>, usize) {
    let mut face = vec![usize::MAX; sigma.len()];
    let mut count = 0;
    for start in 0..sigma.len() {
        if face[start] != usize::MAX {
            continue;
        }
        let mut d = start;
        while face[d] == usize::MAX {
            face[d] = count;
            d = sigma[alpha[d] as usize] as usize;
        }
        count += 1;
    }
    (face, count)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DartStructure {
    pub darts: usize,
    pub sigma: Vec<Dart>,
    pub alpha: Vec<Dart>,
    /// Label in `1..=n` of the face containing each dart.
    pub face_labels: Vec<Dart>,
}

impl DartStructure {
    pub fn vertices(&self) -> usize {
        self.darts / 3
    }

    pub fn edges(&self) -> usize {
        self.darts / 2
    }

    pub fn faces(&self) -> usize {
        face_cycles(&self.sigma, &self.alpha).1
    }

    pub fn genus(&self) -> i64 {
        let chi = self.vertices() as i64 - self.edges() as i64 + self.faces() as i64;
        (2 - chi) / 2
    }

    pub fn is_connected(&self) -> bool {
        if self.darts == 0 {
            return true;
        }
        let mut seen = vec![false; self.darts];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(d) = stack.pop() {
            for e in [self.sigma[d] as usize, self.alpha[d] as usize] {
                if !seen[e] {
                    seen[e] = true;
                    count += 1;
                    stack.push(e);
                }
            }
        }
        count == self.darts
    }

    /// Checks every structural invariant and returns the genus.
    pub fn validate(&self) -> Result<u32, RibbonError> {
        let bad = |s: &str| Err(RibbonError::Invalid(s.to_string()));
        let d = self.darts;
        if self.sigma.len() != d || self.alpha.len() != d || self.face_labels.len() != d {
            return bad("array lengths differ from the dart count");
        }
        if d == 0 || d % 6 != 0 {
            return bad("dart count must be a positive multiple of 6");
        }
        for x in 0..d {
            let s = self.sigma[x] as usize;
            let a = self.alpha[x] as usize;
            if s >= d || a >= d {
                return bad("permutation entry out of range");
            }
            if s == x || self.sigma[self.sigma[s] as usize] as usize != x {
                return bad("sigma is not a product of 3-cycles");
            }
            if a == x || self.alpha[a] as usize != x {
                return bad("alpha is not a fixed-point-free involution");
            }
        }
        if !self.is_connected() {
            return bad("not connected");
        }
        let (face, f) = face_cycles(&self.sigma, &self.alpha);
        let mut label_of_face = vec![UNSET; f];
        for x in 0..d {
            let l = self.face_labels[x];
            if l == 0 || l as usize > f {
                return bad("face label out of range");
            }
            match label_of_face[face[x]] {
                UNSET => label_of_face[face[x]] = l,
                m if m != l => return bad("face label not constant along a face"),
                _ => {}
            }
        }
        let mut sorted = label_of_face.clone();
        sorted.sort_unstable();
        if sorted != (1..=f as Dart).collect::<Vec<_>>() {
            return bad("face labels are not a bijection onto 1..n");
        }
        let chi = (d / 3) as i64 - (d / 2) as i64 + f as i64;
        if chi > 2 || chi % 2 != 0 {
            return bad("Euler characteristic is not 2 - 2g");
        }
        Ok(((2 - chi) / 2) as u32)
    }

    /// Reads the structure as seen from `root`: vertices numbered in breadth-first
    /// discovery order, each entered at position 0. Requires connectivity.
    fn renumbered(&self, root: usize) -> (Vec<Dart>, Vec<Dart>) {
        let d = self.darts;
        let mut new_of_old = vec![UNSET; d];
        let mut old_of_new = Vec::with_capacity(d);
        let enter = |x: usize, new_of_old: &mut Vec<Dart>, old_of_new: &mut Vec<usize>| {
            let mut y = x;
            for _ in 0..3 {
                new_of_old[y] = old_of_new.len() as Dart;
                old_of_new.push(y);
                y = self.sigma[y] as usize;
            }
        };
        enter(root, &mut new_of_old, &mut old_of_new);
        let mut p = 0;
        while p < old_of_new.len() {
            let a = self.alpha[old_of_new[p]] as usize;
            if new_of_old[a] == UNSET {
                enter(a, &mut new_of_old, &mut old_of_new);
            }
            p += 1;
        }
        let alpha = old_of_new.iter().map(|&o| new_of_old[self.alpha[o] as usize]).collect();
        let labels = old_of_new.iter().map(|&o| self.face_labels[o]).collect();
        (alpha, labels)
    }

    /// Canonical form and automorphism order. Automorphisms of a connected map act
    /// freely on darts, so `|Aut|` is the number of roots realizing the minimal code.
    pub fn canonical_with_aut(&self) -> (DartStructure, u64) {
        let mut best: Option<(Vec<Dart>, Vec<Dart>)> = None;
        let mut hits = 0u64;
        for root in 0..self.darts {
            let code = self.renumbered(root);
            match &best {
                Some(b) if code > *b => {}
                Some(b) if code == *b => hits += 1,
                _ => {
                    best = Some(code);
                    hits = 1;
                }
            }
        }
        let (alpha, face_labels) = best.expect("nonempty structure");
        (
            DartStructure { darts: self.darts, sigma: canonical_sigma(self.darts), alpha, face_labels },
            hits,
        )
    }

    pub fn canonicalize(&self) -> DartStructure {
        self.canonical_with_aut().0
    }

    /// Unordered face-label pair on each side of every edge, edges listed by smaller dart.
    pub fn edge_face_pairs(&self) -> Vec<(Dart, Dart)> {
        (0..self.darts)
            .filter(|&x| x < self.alpha[x] as usize)
            .map(|x| {
                let a = self.face_labels[x];
                let b = self.face_labels[self.alpha[x] as usize];
                (a.min(b), a.max(b))
            })
            .collect()
    }
}

/// Order of the group of dart permutations commuting with `sigma` and `alpha` and fixing face labels.
pub fn automorphism_order(d: &DartStructure) -> u64 {
    d.canonical_with_aut().1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RibbonGraphClass {
    pub canonical: DartStructure,
    pub aut_order: u64,
    pub edge_face_pairs: Vec<(Dart, Dart)>,
}

impl RibbonGraphClass {
    pub fn from_structure(d: &DartStructure) -> Self {
        let (canonical, aut_order) = d.canonical_with_aut();
        let edge_face_pairs = canonical.edge_face_pairs();
        Self { canonical, aut_order, edge_face_pairs }
    }

    pub fn vertices(&self) -> usize {
        self.canonical.vertices()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "darts": self.canonical.darts,
            "sigma": self.canonical.sigma,
            "alpha": self.canonical.alpha,
            "face_labels": self.canonical.face_labels,
            "aut_order": self.aut_order,
        })
    }
}
