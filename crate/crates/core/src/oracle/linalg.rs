//! Small dense linear algebra for the checks: rank, square solves and
//! vertex enumeration of tiny polyhedra.

/// Rank by Gaussian elimination with partial pivoting.
pub fn rank(rows: &[Vec<f64>], pivot_tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..ncols {
        if rank == m.len() {
            break;
        }
        let (p, best) =
            (rank..m.len())
                .map(|r| (r, m[r][c].abs()))
                .fold(
                    (rank, 0.0),
                    |acc, cur| if cur.1 > acc.1 { cur } else { acc },
                );
        if best <= pivot_tol {
            continue;
        }
        m.swap(rank, p);
        let pivot = m[rank].clone();
        for r in rank + 1..m.len() {
            let f = m[r][c] / pivot[c];
            if f != 0.0 {
                for (v, pv) in m[r].iter_mut().zip(&pivot) {
                    *v -= f * pv;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Solves `a v = b` for square `a`; `None` when a pivot falls below `pivot_tol`.
pub fn solve_square(a: &[Vec<f64>], b: &[f64], pivot_tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() <= pivot_tol {
            return None;
        }
        m.swap(c, p);
        let pivot = m[c].clone();
        for r in 0..n {
            if r != c {
                let f = m[r][c] / pivot[c];
                if f != 0.0 {
                    for (v, pv) in m[r].iter_mut().zip(&pivot) {
                        *v -= f * pv;
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// All vertices of `{v : a_k · v <= b_k}` by enumerating `n`-subsets of
/// constraints. Exponential; meant for a handful of variables.
pub fn enumerate_vertices(constraints: &[(Vec<f64>, f64)], n: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let k = constraints.len();
    if n == 0 || k < n {
        return vertices;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| constraints[i].0.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| constraints[i].1).collect();
        if let Some(v) = solve_square(&a, &b, 1e-10) {
            let feasible = constraints.iter().all(|(row, rhs)| {
                let lhs: f64 = row.iter().zip(&v).map(|(x, y)| x * y).sum();
                lhs <= rhs + tol * (1.0 + rhs.abs())
            });
            let seen = vertices
                .iter()
                .any(|u| u.iter().zip(&v).all(|(p, q)| (p - q).abs() <= 1e-7));
            if feasible && !seen {
                vertices.push(v);
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return vertices;
            }
            i -= 1;
            if idx[i] < k - n + i {
                idx[i] += 1;
                for j in i + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}
