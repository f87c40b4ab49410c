//! Small combinatorial helpers: binomial counts, k-subset enumeration and
//! seeded random subsets. Used by the stability search and the audit oracles.

use rand::seq::SliceRandom;
use rand::RngCore;

/// Exact binomial coefficient in u128, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) cannot be reduced before dividing by (i + 1) in
        // general, but acc is always exactly divisible after the multiply.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Binomial coefficient as f64 for cost models where counts overflow integers.
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// All k-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// One uniformly random k-subset of `0..n`, returned sorted.
pub fn random_k_subset<R: RngCore>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let (chosen, _) = pool.partial_shuffle(rng, k);
    let mut subset = chosen.to_vec();
    subset.sort_unstable();
    subset
}

/// Complement of a sorted subset within `0..n`.
pub fn complement(subset: &[usize], n: usize) -> Vec<usize> {
    let mut mask = vec![false; n];
    for &i in subset {
        mask[i] = true;
    }
    (0..n).filter(|&i| !mask[i]).collect()
}
