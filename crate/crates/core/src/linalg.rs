//! Small dense linear algebra used by the iterative solvers and tests.
//!
//! Everything here is O(n³) on small matrices: the projected matrices of the
//! Lanczos solvers (n ≲ 250) and dense coarse-grid oracles in tests. The grid
//! operators themselves never materialize a matrix.

use num_complex::Complex64 as C64;

/// Compensated (Neumaier) summation of f64 terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of complex terms (componentwise Neumaier).
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSumC {
    re: KahanSum,
    im: KahanSum,
}

impl KahanSumC {
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// Eigenvalues (and optionally eigenvectors) of a real symmetric tridiagonal
/// matrix by the implicit QL algorithm.
///
/// `d` holds the diagonal (length n), `e` the subdiagonal (length n-1).
/// On return `d` is overwritten with the eigenvalues (unsorted) and, if `z`
/// is given, its columns are overwritten with the eigenvectors: `z` must come
/// in as an n×n matrix (row-major) initialized to the basis in which the
/// tridiagonal is expressed (identity for the tridiagonal itself).
pub fn tqli(d: &mut [f64], e: &mut Vec<f64>, mut z: Option<&mut [f64]>) {
    let n = d.len();
    if n == 0 {
        return;
    }
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find a negligible subdiagonal element.
            let mut m = l;
            while m + 1 < n {
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
            assert!(iter <= 50, "tqli: too many iterations");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(zm) = z.as_deref_mut() {
                    for k in 0..n {
                        f = zm[k * n + i + 1];
                        zm[k * n + i + 1] = s * zm[k * n + i] + c * f;
                        zm[k * n + i] = c * zm[k * n + i] - s * f;
                    }
                }
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    e.pop();
}

/// Householder reduction of a dense real symmetric matrix (row-major n×n)
/// to tridiagonal form, accumulating the orthogonal transform in `a`.
///
/// Returns (diagonal, subdiagonal). Afterwards `a` holds Q such that
/// Qᵀ A Q = T; feeding `a` as `z` into [`tqli`] yields eigenvectors of A.
pub fn tred2(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[i * n + k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let mut f = a[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                f = 0.0;
                for j in 0..=l {
                    a[j * n + i] = a[i * n + j] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += a[i * n + k] * a[k * n + j];
                }
                for k in 0..i {
                    a[k * n + j] -= g * a[k * n + i];
                }
            }
        }
        d[i] = a[i * n + i];
        a[i * n + i] = 1.0;
        for j in 0..i {
            a[j * n + i] = 0.0;
            a[i * n + j] = 0.0;
        }
    }
    let sub = e[1..].to_vec();
    (d, sub)
}

/// Eigendecomposition of a dense real symmetric matrix (row-major).
///
/// Returns eigenvalues ascending with matching eigenvectors as columns of the
/// returned matrix (row-major n×n).
pub fn symmetric_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (mut d, sub) = tred2(&mut a, n);
    let mut e = sub;
    tqli(&mut d, &mut e, Some(&mut a));
    // Sort ascending, permuting columns.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (newc, &oldc) in idx.iter().enumerate() {
        for r in 0..n {
            vecs[r * n + newc] = a[r * n + oldc];
        }
    }
    (vals, vecs)
}

/// Eigendecomposition of a dense complex Hermitian matrix (row-major) by
/// cyclic Jacobi rotations.
///
/// Returns eigenvalues ascending and eigenvectors as columns (row-major n×n).
/// Intended for the small projected matrices of the Lanczos solvers.
pub fn hermitian_eigen(mut a: Vec<C64>, n: usize) -> (Vec<f64>, Vec<C64>) {
    assert_eq!(a.len(), n * n);
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
    }
    let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tol = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[p * n + q];
                let babs = b.norm();
                if babs <= tol / (n as f64) {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let phase = b / babs;
                let tau = (aqq - app) / (2.0 * babs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sigma = phase * s;
                // Columns p and q of A and V: X_p' = c X_p − σ̄ X_q, X_q' = σ X_p + c X_q.
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - sigma.conj() * aiq;
                    a[i * n + q] = sigma * aip + c * aiq;
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - sigma.conj() * viq;
                    v[i * n + q] = sigma * vip + c * viq;
                }
                // Rows p and q (A ← R† A).
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - sigma * aqj;
                    a[q * n + j] = sigma.conj() * apj + c * aqj;
                }
                // Clean up hermiticity drift on the rotated pair.
                let m = 0.5 * (a[p * n + q] + a[q * n + p].conj());
                a[p * n + q] = m;
                a[q * n + p] = m.conj();
                a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = C64::new(a[q * n + q].re, 0.0);
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i * n + i].re.partial_cmp(&a[j * n + j].re).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| a[i * n + i].re).collect();
    let mut vecs = vec![C64::new(0.0, 0.0); n * n];
    for (newc, &oldc) in idx.iter().enumerate() {
        for r in 0..n {
            vecs[r * n + newc] = v[r * n + oldc];
        }
    }
    (vals, vecs)
}
