//! Eigenvalues of small Hermitian matrices.
//!
//! The matrix is reduced to real symmetric tridiagonal form, by Householder
//! reflections for dense input or by band-preserving Givens rotations with
//! bulge chasing for banded input, and the tridiagonal problem is solved with
//! implicitly shifted QL iterations.
#![allow(clippy::needless_range_loop)]

use crate::{Error, Result};
use num_complex::Complex64;

/// Ascending eigenvalues of the Hermitian matrix `a` (row-major, `n x n`).
/// Only the lower triangle is read.
pub fn hermitian_eigenvalues(a: &[Complex64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::domain(
            "hermitian_eigenvalues",
            "matrix is not square",
        ));
    }
    let (mut d, mut e) = tridiagonalize(a.to_vec(), n);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| x.total_cmp(y));
    Ok(d)
}

/// Ascending eigenvalues of a Hermitian band matrix with `bandwidth`
/// off-diagonals (row-major dense storage, lower triangle read). Costs
/// `O(n^2 bandwidth)` instead of `O(n^3)`.
pub fn banded_hermitian_eigenvalues(
    a: &[Complex64],
    n: usize,
    bandwidth: usize,
) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::domain(
            "banded_hermitian_eigenvalues",
            "matrix is not square",
        ));
    }
    let (mut d, mut e) = band_to_tridiagonal(a.to_vec(), n, bandwidth);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| x.total_cmp(y));
    Ok(d)
}

/// Unitary rotation in the `(p, q)` plane that zeroes `a[q][col]` against
/// `a[p][col]`, applied as a similarity to rows and columns in `lo..hi`.
fn rotate(a: &mut [Complex64], n: usize, p: usize, q: usize, col: usize, lo: usize, hi: usize) {
    let f = a[p * n + col];
    let g = a[q * n + col];
    let gn = g.norm_sqr().sqrt();
    if gn == 0.0 {
        return;
    }
    let fn_ = f.norm_sqr().sqrt();
    let rho = (fn_ * fn_ + gn * gn).sqrt();
    let (c, s) = if fn_ == 0.0 {
        (0.0, g.conj() / gn)
    } else {
        (fn_ / rho, (f / fn_) * g.conj() / rho)
    };
    for j in lo..hi {
        let (x, y) = (a[p * n + j], a[q * n + j]);
        a[p * n + j] = x * c + s * y;
        a[q * n + j] = -s.conj() * x + y * c;
    }
    for i in lo..hi {
        let (x, y) = (a[i * n + p], a[i * n + q]);
        a[i * n + p] = x * c + y * s.conj();
        a[i * n + q] = -x * s + y * c;
    }
    a[q * n + col] = Complex64::new(0.0, 0.0);
    a[col * n + q] = Complex64::new(0.0, 0.0);
}

fn band_to_tridiagonal(mut a: Vec<Complex64>, n: usize, b: usize) -> (Vec<f64>, Vec<f64>) {
    let idx = |i: usize, j: usize| i * n + j;
    for i in 0..n {
        a[idx(i, i)] = Complex64::new(a[idx(i, i)].re, 0.0);
        for j in 0..i {
            a[idx(j, i)] = a[idx(i, j)].conj();
        }
    }
    let window = |p: usize, q: usize| (p.saturating_sub(b + 1), (q + b + 2).min(n));
    if b >= 2 {
        for k in 0..n.saturating_sub(2) {
            for r in (2..=b).rev() {
                let q = k + r;
                if q >= n {
                    continue;
                }
                let (lo, hi) = window(q - 1, q);
                rotate(&mut a, n, q - 1, q, k, lo, hi);
                // chase the bulge created b + 1 below the diagonal
                let (mut i, mut j) = (q + b, q - 1);
                while i < n {
                    let (lo, hi) = window(i - 1, i);
                    rotate(&mut a, n, i - 1, i, j, lo, hi);
                    j = i - 1;
                    i += b;
                }
            }
        }
    }
    let d = (0..n).map(|i| a[idx(i, i)].re).collect();
    let mut sub: Vec<f64> = (0..n.saturating_sub(1))
        .map(|i| a[idx(i + 1, i)].norm_sqr().sqrt())
        .collect();
    sub.push(0.0);
    (d, sub)
}

/// Householder reduction. Returns the diagonal and the moduli of the
/// subdiagonal; the phases are removed by a diagonal unitary similarity.
fn tridiagonalize(mut a: Vec<Complex64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let idx = |i: usize, j: usize| i * n + j;
    // use the lower triangle as the source of truth
    for i in 0..n {
        a[idx(i, i)] = Complex64::new(a[idx(i, i)].re, 0.0);
        for j in 0..i {
            a[idx(j, i)] = a[idx(i, j)].conj();
        }
    }
    let mut sub = vec![0.0; n];
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut p = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        let m = k + 1;
        let alpha = (m..n).map(|i| a[idx(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let x0 = a[idx(m, k)];
        let tail: f64 = (m + 1..n).map(|i| a[idx(i, k)].norm_sqr()).sum();
        if alpha == 0.0 || tail == 0.0 {
            sub[k] = x0.norm();
            continue;
        }
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in m..n {
            v[i] = a[idx(i, k)];
        }
        v[m] += phase * alpha;
        let vnorm2: f64 = (m..n).map(|i| v[i].norm_sqr()).sum();
        let tau = 2.0 / vnorm2;
        // p = tau * B v, with B the trailing block
        for i in m..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in m..n {
                s += a[idx(i, j)] * v[j];
            }
            p[i] = s * tau;
        }
        let vp: Complex64 = (m..n).map(|i| v[i].conj() * p[i]).sum();
        let c = 0.5 * tau * vp.re;
        for i in m..n {
            p[i] -= v[i] * c;
        }
        for i in m..n {
            for j in m..n {
                a[idx(i, j)] -= v[i] * p[j].conj() + p[i] * v[j].conj();
            }
        }
        sub[k] = alpha;
        for i in m..n {
            a[idx(i, k)] = Complex64::new(0.0, 0.0);
            a[idx(k, i)] = Complex64::new(0.0, 0.0);
        }
    }
    let d = (0..n).map(|i| a[idx(i, i)].re).collect();
    (d, sub)
}

/// Implicit QL on a symmetric tridiagonal matrix. `e[i]` couples `d[i]` and
/// `d[i + 1]`; on return `d` holds the (unsorted) eigenvalues.
pub fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence("tridiagonal QL"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = (g * g + 1.0).sqrt();
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
