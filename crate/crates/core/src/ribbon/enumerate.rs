use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{canonical_sigma, dart_count, face_cycles, Dart, DartStructure, RibbonError, RibbonGraphClass, UNSET};

pub const DEFAULT_MAX_DARTS: usize = 18;

/// Every connected rooted trivalent map on `darts` darts, each once, in the
/// breadth-first form produced by [`DartStructure::canonical_with_aut`] from root 0.
///
/// The smallest unpaired dart is matched either with an unpaired dart of an
/// already discovered vertex or with the entry dart of the next vertex.
pub fn rooted_trivalent_maps(darts: usize) -> Vec<Vec<Dart>> {
    fn rec(alpha: &mut Vec<Dart>, nv: usize, next: usize, out: &mut Vec<Vec<Dart>>) {
        let d = alpha.len();
        let v = d / 3;
        let mut i = next;
        while i < d && alpha[i] != UNSET {
            i += 1;
        }
        if i == d {
            out.push(alpha.clone());
            return;
        }
        if i >= 3 * nv {
            // every discovered dart is paired but vertices remain: disconnected
            return;
        }
        for j in (i + 1)..(3 * nv) {
            if alpha[j] == UNSET {
                alpha[i] = j as Dart;
                alpha[j] = i as Dart;
                rec(alpha, nv, i + 1, out);
                alpha[i] = UNSET;
                alpha[j] = UNSET;
            }
        }
        if nv < v {
            let j = 3 * nv;
            alpha[i] = j as Dart;
            alpha[j] = i as Dart;
            rec(alpha, nv + 1, i + 1, out);
            alpha[i] = UNSET;
            alpha[j] = UNSET;
        }
    }
    let mut out = Vec::new();
    if darts == 0 || darts % 6 != 0 {
        return out;
    }
    rec(&mut vec![UNSET; darts], 1, 0, &mut out);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Complete, duplicate-free list of label-preserving isomorphism classes of connected
/// trivalent ribbon graphs of genus `g` with `n` labeled faces, in canonical order.
pub fn enumerate_trivalent(g: u32, n: u32, max_darts: usize) -> Result<Vec<RibbonGraphClass>, RibbonError> {
    let darts = dart_count(g, n)?;
    if darts > max_darts {
        return Err(RibbonError::BudgetExceeded { needed: darts, budget: max_darts });
    }
    let sigma = canonical_sigma(darts);
    let maps: Vec<Vec<Dart>> = rooted_trivalent_maps(darts)
        .into_iter()
        .filter(|alpha| face_cycles(&sigma, alpha).1 == n as usize)
        .collect();
    let perms = permutations(n as usize);
    let found: Vec<(DartStructure, u64)> = maps
        .par_iter()
        .flat_map_iter(|alpha| {
            let (face, _) = face_cycles(&sigma, alpha);
            let sigma = &sigma;
            perms.iter().map(move |p| {
                let face_labels = face.iter().map(|&f| (p[f] + 1) as Dart).collect();
                DartStructure { darts, sigma: sigma.clone(), alpha: alpha.clone(), face_labels }
                    .canonical_with_aut()
            })
        })
        .collect();
    let mut classes: BTreeMap<DartStructure, u64> = BTreeMap::new();
    for (c, aut) in found {
        classes.entry(c).or_insert(aut);
    }
    Ok(classes
        .into_iter()
        .map(|(canonical, aut_order)| {
            let edge_face_pairs = canonical.edge_face_pairs();
            RibbonGraphClass { canonical, aut_order, edge_face_pairs }
        })
        .collect())
}
