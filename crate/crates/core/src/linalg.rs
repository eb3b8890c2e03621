//! Gaussian elimination over `F_q`: rank and linear-system solving.

use crate::field::Fe;

/// Reduces `rows` to row-echelon form in place and returns the pivot
/// columns.
fn echelon(rows: &mut [Vec<Fe>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inv().expect("pivot is nonzero");
        for v in rows[r][c..].iter_mut() {
            *v *= inv;
        }
        let (head, tail) = rows.split_at_mut(r);
        let (pivot, tail) = tail.split_first_mut().expect("row r exists");
        let pivot_row: &Vec<Fe> = pivot;
        for row in head.iter_mut().chain(tail.iter_mut()) {
            let factor = row[c];
            if factor.is_zero() {
                continue;
            }
            for (v, &pv) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                *v -= factor * pv;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of the matrix whose rows are `rows`.
pub fn rank(rows: &[Vec<Fe>]) -> usize {
    let Some(cols) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut m = rows.to_vec();
    echelon(&mut m, cols).len()
}

/// Some solution `x` of `a x = b`, with free variables set to zero, or
/// `None` if the system is inconsistent.
pub fn solve(a: &[Vec<Fe>], b: &[Fe]) -> Option<Vec<Fe>> {
    assert_eq!(a.len(), b.len());
    let cols = a.first().map_or(0, Vec::len);
    let zero = b.first()?.field().zero();
    let mut m: Vec<Vec<Fe>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    let pivots = echelon(&mut m, cols + 1);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![zero; cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][cols];
    }
    Some(x)
}
