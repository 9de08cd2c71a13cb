//! Index bookkeeping for alternating tensors.

/// All strictly increasing `k`-tuples drawn from `0..n`, in lexicographic order.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Sort `idx` and return the permutation sign, or `None` on a repeated index.
pub fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    // insertion sort; tuples are short
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

/// Every permutation of `0..n` with its sign, in lexicographic order.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        out.push((perm.clone(), permutation_sign(&perm)));
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    out
}

pub fn permutation_sign(perm: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Split the increasing tuple `idx` into (`left`, `right`) with `left.len() == r`,
/// over all `C(len, r)` choices, with the sign of the shuffle `left ++ right`.
pub fn shuffles(idx: &[usize], r: usize) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    increasing_tuples(idx.len(), r)
        .into_iter()
        .map(|pos| {
            let left: Vec<usize> = pos.iter().map(|&p| idx[p]).collect();
            let right: Vec<usize> = (0..idx.len()).filter(|p| !pos.contains(p)).map(|p| idx[p]).collect();
            let order: Vec<usize> = pos.iter().copied().chain((0..idx.len()).filter(|p| !pos.contains(p))).collect();
            (left, right, permutation_sign(&order))
        })
        .collect()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuples_and_counts() {
        assert_eq!(increasing_tuples(4, 2).len(), 6);
        assert_eq!(increasing_tuples(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(increasing_tuples(2, 3).len(), 0);
        assert_eq!(increasing_tuples(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(binomial(5, 2), 10);
    }

    #[test]
    fn signs() {
        assert_eq!(sort_with_sign(&[2, 0, 1]), Some((vec![0, 1, 2], 1.0)));
        assert_eq!(sort_with_sign(&[1, 0]), Some((vec![0, 1], -1.0)));
        assert_eq!(sort_with_sign(&[1, 1]), None);
        let perms = permutations(4);
        assert_eq!(perms.len(), 24);
        assert_eq!(perms.iter().map(|p| p.1).sum::<f64>(), 0.0);
    }

    #[test]
    fn shuffle_signs() {
        let s = shuffles(&[0, 1, 2], 1);
        assert_eq!(s[1], (vec![1], vec![0, 2], -1.0));
        assert_eq!(s.len(), 3);
    }
}
