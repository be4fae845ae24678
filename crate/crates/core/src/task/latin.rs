/// Condition orders, one row per participant (modulo `n`).
///
/// Even `n` gets a balanced (Williams) square in which every ordered pair of
/// neighbouring conditions occurs exactly once; odd `n` gets the cyclic
/// square.
pub fn latin_square(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return Vec::new();
    }
    let first: Vec<usize> = if n.is_multiple_of(2) {
        // 0, 1, n-1, 2, n-2, ...
        let (mut lo, mut hi) = (1, n - 1);
        let mut row = vec![0];
        for k in 1..n {
            if k % 2 == 1 {
                row.push(lo);
                lo += 1;
            } else {
                row.push(hi);
                hi -= 1;
            }
        }
        row
    } else {
        (0..n).collect()
    };
    (0..n)
        .map(|i| first.iter().map(|c| (c + i) % n).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_latin(sq: &[Vec<usize>]) -> bool {
        let n = sq.len();
        (0..n).all(|i| {
            let mut row: Vec<_> = sq[i].clone();
            let mut col: Vec<_> = sq.iter().map(|r| r[i]).collect();
            row.sort_unstable();
            col.sort_unstable();
            row == (0..n).collect::<Vec<_>>() && col == (0..n).collect::<Vec<_>>()
        })
    }

    #[test]
    fn small_cases() {
        assert_eq!(latin_square(1), vec![vec![0]]);
        assert_eq!(
            latin_square(4),
            vec![
                vec![0, 1, 3, 2],
                vec![1, 2, 0, 3],
                vec![2, 3, 1, 0],
                vec![3, 0, 2, 1]
            ]
        );
        for n in 1..=9 {
            assert!(is_latin(&latin_square(n)), "n = {n}");
        }
    }

    #[test]
    fn even_squares_are_balanced() {
        for n in [2, 4, 6, 8] {
            let sq = latin_square(n);
            let mut count = vec![vec![0; n]; n];
            for row in &sq {
                for w in row.windows(2) {
                    count[w[0]][w[1]] += 1;
                }
            }
            for a in 0..n {
                for b in 0..n {
                    assert_eq!(count[a][b], usize::from(a != b), "n={n} pair ({a},{b})");
                }
            }
        }
    }
}
