//! Brute-force reference routines used to cross-check the fast paths.
//!
//! These are deliberately naive. They exist so that tests can compare an
//! optimized implementation against an independent computation, and they
//! stay out of every production code path.

/// Enumerates all perfect matchings of the complete graph on vertices
/// `0..n` (n even) as lists of `(i, j)` pairs with `i < j`. For odd `n`
/// every near-perfect matching (one vertex left out) is produced.
pub fn enumerate_matchings(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut current = Vec::new();
    let spare = n % 2;
    recurse(n, spare, &mut used, &mut current, &mut out);
    out
}

fn recurse(
    n: usize,
    spare: usize,
    used: &mut Vec<bool>,
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    let first = match used.iter().position(|&u| !u) {
        Some(f) => f,
        None => {
            out.push(current.clone());
            return;
        }
    };
    used[first] = true;
    // Option: leave `first` unmatched (odd n only, one spare allowed).
    if spare > 0 {
        recurse(n, spare - 1, used, current, out);
    }
    for j in (first + 1)..n {
        if used[j] {
            continue;
        }
        used[j] = true;
        current.push((first, j));
        recurse(n, spare, used, current, out);
        current.pop();
        used[j] = false;
    }
    used[first] = false;
}

/// Exhaustive maximum-weight (near-)perfect matching. Returns the best
/// matching and its total weight under `weight(i, j)` with `i < j`,
/// 0-based.
pub fn best_matching_by_enumeration(
    n: usize,
    weight: impl Fn(usize, usize) -> f64,
) -> (Vec<(usize, usize)>, f64) {
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for matching in enumerate_matchings(n) {
        let total: f64 = matching.iter().map(|&(i, j)| weight(i, j)).sum();
        if total > best.1 {
            best = (matching, total);
        }
    }
    best
}
