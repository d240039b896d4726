//! Small enumeration helpers shared across modules.

/// Binomial coefficient as `f64`; exact for the magnitudes used here.
pub fn binomial_f64(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Binomial coefficient, saturating at `u64::MAX`.
pub fn binomial(n: usize, r: usize) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Calls `visit` with every `r`-subset of `items` in lexicographic order of
/// positions. Stops early when `visit` returns `false`.
pub fn for_each_combination<T: Copy>(items: &[T], r: usize, mut visit: impl FnMut(&[T]) -> bool) {
    let n = items.len();
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    let mut buf: Vec<T> = idx.iter().map(|&i| items[i]).collect();
    loop {
        if !visit(&buf) {
            return;
        }
        let Some(i) = (0..r).rev().find(|&i| idx[i] < i + n - r) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
        for j in i..r {
            buf[j] = items[idx[j]];
        }
    }
}

/// All `r`-subsets of `items`, lexicographic by position.
pub fn combinations<T: Copy>(items: &[T], r: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    for_each_combination(items, r, |c| {
        out.push(c.to_vec());
        true
    });
    out
}

/// Advances `perm` to the next lexicographic permutation; false when it was the last.
pub fn next_permutation<T: Ord>(perm: &mut [T]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        perm.reverse();
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_counts() {
        let items: Vec<u32> = (0..7).collect();
        for r in 0..=8 {
            assert_eq!(
                combinations(&items, r).len() as u64,
                binomial(7, r),
                "r={r}"
            );
        }
        assert_eq!(
            combinations(&[1, 2, 3], 2),
            vec![vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(combinations::<u32>(&[], 0), vec![Vec::<u32>::new()]);
    }

    #[test]
    fn permutations_cycle_through_all() {
        let mut p = [0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(p, [0, 1, 2, 3]);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(30, 6), 593_775);
        assert_eq!(binomial_f64(60, 3), 34_220.0);
        assert_eq!(binomial(3, 5), 0);
    }
}
