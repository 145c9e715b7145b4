//! Real symmetric eigensolvers.
//!
//! Two routes are provided: the implicit QL iteration with Wilkinson-type
//! shifts for symmetric tridiagonal matrices, and a Householder reduction of
//! a dense symmetric matrix to tridiagonal form followed by the same QL
//! iteration. A Lanczos routine for the lowest eigenpair of a large operator
//! is available for blocks too large for dense treatment.
//!
//! Eigenvectors are returned column-major: vector `i` occupies
//! `vectors[i * n..(i + 1) * n]`.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Per-eigenvalue iteration budget of the QL sweep.
const MAX_QL_ITERATIONS: usize = 60;

/// Matrix dimension above which row and column updates run on the rayon pool.
const PARALLEL_ROW_THRESHOLD: usize = 512;

/// Eigenvalues in ascending order with optional eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<f64>>,
}

impl Eigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> Option<&[f64]> {
        let n = self.dim();
        self.vectors.as_ref().map(|v| &v[i * n..(i + 1) * n])
    }
}

/// Diagonalizes the symmetric tridiagonal matrix with main diagonal `diag`
/// and first off-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], want_vectors: bool) -> Result<Eigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: want_vectors.then(Vec::new),
        });
    }
    if off.len() + 1 != n {
        return Err(crate::error::invalid(
            "off",
            format!("expected {} off-diagonal entries, got {}", n - 1, off.len()),
        ));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut v = want_vectors.then(|| identity_row_major(n));
    ql_implicit(&mut d, &mut e, v.as_deref_mut())?;
    Ok(sorted(d, v))
}

/// Diagonalizes a dense symmetric matrix given in row-major order. Only the
/// lower triangle is referenced.
pub fn symmetric_eigen(mut a: Vec<f64>, n: usize, want_vectors: bool) -> Result<Eigen> {
    if a.len() != n * n {
        return Err(crate::error::invalid(
            "matrix",
            format!("expected {} entries, got {}", n * n, a.len()),
        ));
    }
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: want_vectors.then(Vec::new),
        });
    }
    // Row-major storage of a symmetric matrix doubles as column-major storage
    // of its transpose; the reduction below works on columns.
    symmetrize_from_lower(&mut a, n);
    let (mut d, mut e, betas) = householder_tridiagonalize(&mut a, n);
    let mut v = if want_vectors {
        let mut q = accumulate_reflectors(&a, &betas, n);
        drop(a);
        transpose_in_place(&mut q, n);
        Some(q)
    } else {
        None
    };
    e.push(0.0);
    ql_implicit(&mut d, &mut e, v.as_deref_mut())?;
    Ok(sorted(d, v))
}

fn identity_row_major(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    v
}

fn symmetrize_from_lower(a: &mut [f64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            a[i * n + j] = a[j * n + i];
        }
    }
}

fn transpose_in_place(a: &mut [f64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            a.swap(i * n + j, j * n + i);
        }
    }
}

/// Reduces the symmetric matrix (column-major, full storage) to tridiagonal
/// form by Householder reflections. On return the reflector `k` is stored in
/// column `k` below the subdiagonal, i.e. in `a[k*n + k+1 .. k*n + n]`.
fn householder_tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut betas = vec![0.0; n.saturating_sub(2)];
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        diag[k] = a[k * n + k];
        let m = n - k - 1;
        let (head, tail) = a.split_at_mut((k + 1) * n);
        let x = &mut head[k * n + k + 1..k * n + n];
        let scale: f64 = x.iter().map(|v| v.abs()).sum();
        if scale == 0.0 {
            off[k] = 0.0;
            betas[k] = 0.0;
            continue;
        }
        let norm = x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt() * scale;
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        off[k] = alpha;
        x[0] -= alpha;
        let vtv: f64 = x.iter().map(|v| v * v).sum();
        let beta = 2.0 / vtv;
        betas[k] = beta;
        let v: &[f64] = x;

        // p = beta * B v, where B is the trailing block (columns k+1..n).
        let p = &mut p[..m];
        if m >= PARALLEL_ROW_THRESHOLD {
            p.par_iter_mut()
                .zip(tail.par_chunks(n))
                .for_each(|(pj, col)| *pj = beta * dot(&col[k + 1..], v));
        } else {
            for (pj, col) in p.iter_mut().zip(tail.chunks(n)) {
                *pj = beta * dot(&col[k + 1..], v);
            }
        }
        let kappa = 0.5 * beta * dot(p, v);
        for (pj, vj) in p.iter_mut().zip(v) {
            *pj -= kappa * vj;
        }
        let w: &[f64] = p;
        let update = |(j, col): (usize, &mut [f64])| {
            let seg = &mut col[k + 1..];
            let (vj, wj) = (v[j], w[j]);
            for ((s, vi), wi) in seg.iter_mut().zip(v).zip(w) {
                *s -= vi * wj + wi * vj;
            }
        };
        if m >= PARALLEL_ROW_THRESHOLD {
            tail.par_chunks_mut(n).enumerate().for_each(update);
        } else {
            tail.chunks_mut(n).enumerate().for_each(update);
        }
    }
    if n >= 2 {
        diag[n - 2] = a[(n - 2) * n + n - 2];
        off[n - 2] = a[(n - 2) * n + n - 1];
    }
    diag[n - 1] = a[(n - 1) * n + n - 1];
    (diag, off, betas)
}

/// Forms Q = H_0 H_1 ... H_{n-3} (column-major) from the stored reflectors.
fn accumulate_reflectors(a: &[f64], betas: &[f64], n: usize) -> Vec<f64> {
    let mut q = identity_row_major(n);
    for k in (0..betas.len()).rev() {
        let beta = betas[k];
        if beta == 0.0 {
            continue;
        }
        let v = &a[k * n + k + 1..k * n + n];
        let apply = |col: &mut [f64]| {
            let seg = &mut col[k + 1..];
            let t = beta * dot(seg, v);
            for (s, vi) in seg.iter_mut().zip(v) {
                *s -= t * vi;
            }
        };
        let cols = &mut q[(k + 1) * n..];
        if n - k - 1 >= PARALLEL_ROW_THRESHOLD {
            cols.par_chunks_mut(n).for_each(apply);
        } else {
            cols.chunks_mut(n).for_each(apply);
        }
    }
    q
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Implicit QL iteration on the tridiagonal matrix (`d`, `e`), where `e[i]`
/// couples rows `i` and `i+1` and `e[n-1] == 0`. When `v` is given (row-major
/// n×n), the rotations are accumulated into its columns.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut v: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let mut shift_total = 0.0;
    let mut tst1 = 0.0f64;
    let mut rotations: Vec<(f64, f64)> = Vec::with_capacity(n);

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence { index: l });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di -= h;
                }
                shift_total += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                rotations.clear();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotations.push((c, s));
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if let Some(v) = v.as_deref_mut() {
                    apply_rotations(v, n, m, &rotations);
                }
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += shift_total;
        e[l] = 0.0;
    }
    Ok(())
}

/// Applies the rotation sequence of one QL sweep (pivot rows `m-1` down to
/// `l`) to every row of the row-major matrix `v`.
fn apply_rotations(v: &mut [f64], n: usize, m: usize, rotations: &[(f64, f64)]) {
    let rotate_row = |row: &mut [f64]| {
        for (j, &(c, s)) in rotations.iter().enumerate() {
            let i = m - 1 - j;
            let h = row[i + 1];
            row[i + 1] = s * row[i] + c * h;
            row[i] = c * row[i] - s * h;
        }
    };
    if n >= PARALLEL_ROW_THRESHOLD {
        v.par_chunks_mut(n).for_each(rotate_row);
    } else {
        v.chunks_mut(n).for_each(rotate_row);
    }
}

/// Sorts eigenvalues ascending and gathers the matching eigenvector columns
/// of the row-major matrix `v` into column-major output.
fn sorted(values: Vec<f64>, v: Option<Vec<f64>>) -> Eigen {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let vectors = v.map(|v| {
        let mut out = vec![0.0; n * n];
        for (col, &src) in order.iter().enumerate() {
            let dst = &mut out[col * n..(col + 1) * n];
            for (k, x) in dst.iter_mut().enumerate() {
                *x = v[k * n + src];
            }
        }
        out
    });
    Eigen {
        values: sorted_values,
        vectors,
    }
}

/// Lowest eigenpair of a symmetric operator via Lanczos with full
/// reorthogonalization. `apply` computes `y = A x`.
pub fn lanczos_lowest<F>(n: usize, apply: F, tol: f64, max_steps: usize) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64], &mut [f64]),
{
    if n == 0 {
        return Err(crate::error::invalid("n", "empty operator"));
    }
    let max_steps = max_steps.min(n).max(1);
    // Deterministic start vector with support on every basis state.
    let mut q: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.25 * ((i as f64) * 0.618_033_988_75).fract())
        .collect();
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_steps);
    let mut alphas = Vec::with_capacity(max_steps);
    let mut betas: Vec<f64> = Vec::with_capacity(max_steps);
    let mut w = vec![0.0; n];
    let mut best = (f64::NAN, Vec::new());

    for step in 0..max_steps {
        apply(&q, &mut w);
        let alpha = dot(&q, &w);
        alphas.push(alpha);
        basis.push(q.clone());
        // Full reorthogonalization, applied twice for stability.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
            }
        }
        let beta = dot(&w, &w).sqrt();

        let converged_check = (step + 1) % 5 == 0 || step + 1 == max_steps || beta < 1e-300;
        if converged_check {
            let k = alphas.len();
            let eig = tridiagonal_eigen(&alphas, &betas, true)?;
            let z = eig.vector(0).expect("vectors requested");
            let residual = (beta * z[k - 1]).abs();
            let scale = eig.values.iter().map(|x| x.abs()).fold(1.0, f64::max);
            best = (eig.values[0], z.to_vec());
            if residual <= tol * scale || beta < 1e-300 {
                break;
            }
            if step + 1 == max_steps {
                return Err(Error::NoConvergence { index: 0 });
            }
        }
        betas.push(beta);
        q = w.iter().map(|x| x / beta).collect();
    }

    let (value, z) = best;
    let mut x = vec![0.0; n];
    for (b, zj) in basis.iter().zip(&z) {
        x.iter_mut().zip(b).for_each(|(xi, bi)| *xi += zj * bi);
    }
    let norm = dot(&x, &x).sqrt();
    x.iter_mut().for_each(|xi| *xi /= norm);
    Ok((value, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &[f64], n: usize, value: f64, v: &[f64]) -> f64 {
        (0..n)
            .map(|i| {
                let row: f64 = (0..n).map(|j| a[i * n + j] * v[j]).sum();
                (row - value * v[i]).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    fn test_matrix(n: usize) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x = ((i * 7 + j * 13) % 17) as f64 / 17.0 - 0.5 + if i == j { i as f64 } else { 0.0 };
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        a
    }

    #[test]
    fn two_by_two_closed_form() {
        let eig = tridiagonal_eigen(&[1.5, 2.5], &[0.5], true).unwrap();
        let r = 0.5f64.sqrt();
        assert!((eig.values[0] - (2.0 - r)).abs() < 1e-14);
        assert!((eig.values[1] - (2.0 + r)).abs() < 1e-14);
    }

    #[test]
    fn tridiagonal_matches_dense_path() {
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| 1.0 + (i as f64 * 0.11).cos()).collect();
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            dense[i * n + i] = diag[i];
            if i + 1 < n {
                dense[i * n + i + 1] = off[i];
                dense[(i + 1) * n + i] = off[i];
            }
        }
        let t = tridiagonal_eigen(&diag, &off, true).unwrap();
        let d = symmetric_eigen(dense.clone(), n, true).unwrap();
        for (x, y) in t.values.iter().zip(&d.values) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        for i in 0..n {
            assert!(residual(&dense, n, t.values[i], t.vector(i).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn dense_eigenpairs_are_orthonormal_with_small_residual() {
        for n in [1, 2, 3, 17, 64] {
            let a = test_matrix(n);
            let eig = symmetric_eigen(a.clone(), n, true).unwrap();
            for i in 0..n {
                let vi = eig.vector(i).unwrap();
                assert!(residual(&a, n, eig.values[i], vi) < 1e-11);
                for j in 0..n {
                    let vj = eig.vector(j).unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot(vi, vj) - expect).abs() < 1e-12);
                }
            }
            let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
            let sum: f64 = eig.values.iter().sum();
            assert!((trace - sum).abs() < 1e-10 * trace.abs().max(1.0));
            let without = symmetric_eigen(a, n, false).unwrap();
            for (x, y) in without.values.iter().zip(&eig.values) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_input_is_returned_sorted() {
        let eig = tridiagonal_eigen(&[3.0, -1.0, 2.0], &[0.0, 0.0], true).unwrap();
        assert_eq!(eig.values, vec![-1.0, 2.0, 3.0]);
        assert_eq!(eig.vector(0).unwrap(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn lanczos_finds_lowest_eigenpair() {
        let n = 120;
        let a = test_matrix(n);
        let exact = symmetric_eigen(a.clone(), n, false).unwrap().values[0];
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = (0..n).map(|j| a[i * n + j] * x[j]).sum();
            }
        };
        let (value, v) = lanczos_lowest(n, apply, 1e-12, 120).unwrap();
        assert!((value - exact).abs() < 1e-9);
        assert!(residual(&a, n, value, &v) < 1e-8);
    }

    #[test]
    fn rejects_mismatched_lengths() {
        assert!(tridiagonal_eigen(&[1.0, 2.0], &[], false).is_err());
        assert!(symmetric_eigen(vec![1.0; 3], 2, false).is_err());
    }
}
