//! Small helpers over the probability simplex.

use rand::Rng;

pub const SIMPLEX_TOL: f64 = 1e-9;

pub fn l1(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn is_on_simplex(p: &[f64], tol: f64) -> bool {
    !p.is_empty()
        && p.iter().all(|&x| x.is_finite() && x >= -tol)
        && (p.iter().sum::<f64>() - 1.0).abs() <= tol
}

/// Uniform (flat Dirichlet) sample from the `n`-point simplex.
pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let s: f64 = v.iter().sum();
    for x in &mut v {
        *x /= s;
    }
    v
}

/// `C(n, k)` as u128, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of points in the `K`-uniform grid over a `d`-point simplex.
pub fn grid_count(d: usize, k: u64) -> u128 {
    if d == 0 {
        return 0;
    }
    binomial(k + d as u64 - 1, d as u64 - 1)
}

/// Calls `f` with every composition of `total` into `d` nonnegative parts,
/// in lexicographic order of the part vector.
pub fn for_each_composition(d: usize, total: u32, mut f: impl FnMut(&[u32])) {
    if d == 0 {
        return;
    }
    let mut parts = vec![0u32; d];
    fill(&mut parts, 0, total, &mut f);
}

fn fill(parts: &mut [u32], idx: usize, remaining: u32, f: &mut impl FnMut(&[u32])) {
    let d = parts.len();
    if idx == d - 1 {
        parts[idx] = remaining;
        f(parts);
        return;
    }
    for c in 0..=remaining {
        parts[idx] = c;
        fill(parts, idx + 1, remaining - c, f);
    }
}

/// Calls `f` with every `r`-subset of `0..n` as an increasing index list, in
/// lexicographic order. `r = 0` yields the empty subset once.
pub fn for_each_combination(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        f(&idx);
        let mut i = r;
        while i > 0 && idx[i - 1] == n - r + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Solves a square system by Gaussian elimination with partial pivoting;
/// `None` when a pivot falls below `1e-11`.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let d = rhs.len();
    for c in 0..d {
        let p = (c..d).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[p][c].abs() < 1e-11 {
            return None;
        }
        a.swap(p, c);
        rhs.swap(p, c);
        for r in c + 1..d {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..d {
                    a[r][k] -= f * a[c][k];
                }
                rhs[r] -= f * rhs[c];
            }
        }
    }
    let mut x = vec![0.0; d];
    for r in (0..d).rev() {
        let s: f64 = (r + 1..d).map(|k| a[r][k] * x[k]).sum();
        x[r] = (rhs[r] - s) / a[r][r];
    }
    Some(x)
}
