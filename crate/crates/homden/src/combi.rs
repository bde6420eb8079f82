//! Subset enumeration in the canonical orders used by the constructors.

/// All `k`-subsets of `{0, .., n-1}` as sorted vectors, lexicographic.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            if n - x < k - cur.len() {
                break;
            }
            cur.push(x);
            rec(n, k, x + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

/// All nonempty subsets of `{0, .., n-1}` of size at most `r`, ordered
/// lexicographically as ascending sequences: [0], [0,1], [0,1,2], [0,2], ...
pub fn nonempty_subsets_up_to(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for x in start..n {
            cur.push(x);
            out.push(cur.clone());
            if cur.len() < r {
                rec(n, r, x + 1, cur, out);
            }
            cur.pop();
        }
    }
    rec(n, r, 0, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_size_subsets() {
        assert_eq!(
            k_subsets(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(k_subsets(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(k_subsets(2, 3), Vec::<Vec<usize>>::new());
    }

    #[test]
    fn bounded_subsets_in_sequence_order() {
        assert_eq!(
            nonempty_subsets_up_to(3, 2),
            vec![
                vec![0],
                vec![0, 1],
                vec![0, 2],
                vec![1],
                vec![1, 2],
                vec![2]
            ]
        );
        assert_eq!(nonempty_subsets_up_to(3, 3).len(), 7);
    }
}
