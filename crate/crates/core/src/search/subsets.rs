use crate::gf::{Field, FieldElement};

/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All `k`-subsets of `items` in lexicographic order of positions.
pub fn k_subsets(items: &[u32], k: usize) -> Vec<Vec<u32>> {
    let n = items.len();
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// One representative per orbit of `t`-subsets of GF(q) under the affine
/// maps `x -> λx + c`: the lexicographically smallest sorted image.
///
/// Those maps carry product-block systems to product-block systems (element
/// translation and scaling), so searching one universe per orbit is complete.
pub fn canonical_universes(field: &Field, t: usize) -> Vec<Vec<u32>> {
    let q = field.order();
    if t == 0 || t > q as usize {
        return Vec::new();
    }
    // every orbit meets a set containing 0, and the minimum of any orbit starts with 0
    let rest: Vec<u32> = (1..q).collect();
    let mut out = Vec::new();
    let mut image = Vec::with_capacity(t);
    for tail in k_subsets(&rest, t - 1) {
        let mut set = Vec::with_capacity(t);
        set.push(0u32);
        set.extend_from_slice(&tail);
        let minimal = field.nonzero_elements().all(|lambda| {
            field.elements().all(|c| {
                image.clear();
                image.extend(set.iter().map(|&x| {
                    field
                        .add(field.mul(lambda, FieldElement::from_code(x)), c)
                        .code()
                }));
                image.sort_unstable();
                image.as_slice() >= set.as_slice()
            })
        });
        if minimal {
            out.push(set);
        }
    }
    out
}
