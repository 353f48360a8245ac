//! Dense Hermitian eigensolver: Householder reduction to a complex
//! tridiagonal, a diagonal phase gauge to a real one, then implicit QL.

use super::matrix::{CMatrix, HermitianMatrix, C64, ZERO};
use super::EigenDecomposition;
use crate::error::{Error, Result};

pub fn eig_hermitian(h: &HermitianMatrix, tol: f64) -> Result<EigenDecomposition> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let n = h.dim();
    let (d, sub, q) = tridiagonalize(h.as_matrix());

    // phases so that exp(-i p[k+1]) sub[k] exp(i p[k]) = -|sub[k]|
    let mut phases = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        phases[k + 1] = if sub[k] == ZERO {
            phases[k]
        } else {
            phases[k] + sub[k].arg() - std::f64::consts::PI
        };
    }
    let mut diag = d;
    let mut off: Vec<f64> = sub.iter().map(|s| -s.norm()).collect();
    off.push(0.0);

    // zt row j holds eigenvector j of the real tridiagonal
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    tql(&mut diag, &mut off, &mut zt, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));

    let qd = CMatrix::from_fn(n, n, |r, k| q[(r, k)] * C64::from_polar(1.0, phases[k]));
    let mut vecs = CMatrix::zeros(n, n);
    for (col, &j) in order.iter().enumerate() {
        let z = &zt[j * n..(j + 1) * n];
        for r in 0..n {
            let mut acc = ZERO;
            for (k, &zk) in z.iter().enumerate() {
                if zk != 0.0 {
                    acc += qd[(r, k)] * zk;
                }
            }
            vecs[(r, col)] = acc;
        }
    }
    let eigenvalues: Vec<f64> = order.iter().map(|&j| diag[j]).collect();
    let residual = relative_residual(h, &eigenvalues, &vecs);
    if residual > tol {
        return Err(Error::NotConverged {
            iterations: 64 * n,
            residual,
        });
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vecs,
        residual,
    })
}

/// `max_j ||H v_j - lambda_j v_j|| / ||H||`.
pub(crate) fn relative_residual(h: &HermitianMatrix, vals: &[f64], vecs: &CMatrix) -> f64 {
    let norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst: f64 = 0.0;
    for (j, &lam) in vals.iter().enumerate() {
        let v = vecs.column(j);
        let hv = h.mul_vec(&v);
        let r = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * lam).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r);
    }
    if norm > 0.0 {
        worst / norm
    } else {
        worst
    }
}

/// Returns the real diagonal, complex sub-diagonal and the unitary `Q` with
/// `A = Q T Q^dag`.
fn tridiagonalize(a_in: &CMatrix) -> (Vec<f64>, Vec<C64>, CMatrix) {
    let n = a_in.rows();
    let mut a = a_in.clone();
    let mut q = CMatrix::identity(n);
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let tail: f64 = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let xnorm = (x0.norm_sqr() + tail).sqrt();
        let phase = if x0 == ZERO {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;

        let v = &mut v[..m];
        v[0] = x0 - alpha;
        for i in 1..m {
            v[i] = a[(k + 1 + i, k)];
        }
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // p = tau * A_sub v
        let p = &mut p[..m];
        for i in 0..m {
            let mut acc = ZERO;
            for j in 0..m {
                acc += a[(k + 1 + i, k + 1 + j)] * v[j];
            }
            p[i] = acc * tau;
        }
        let vp: C64 = v.iter().zip(p.iter()).map(|(vi, pi)| vi.conj() * pi).sum();
        let kk = 0.5 * tau * vp.re;
        let w: Vec<C64> = p
            .iter()
            .zip(v.iter())
            .map(|(pi, vi)| pi - vi * kk)
            .collect();
        for i in 0..m {
            for j in 0..m {
                a[(k + 1 + i, k + 1 + j)] -= v[i] * w[j].conj() + w[i] * v[j].conj();
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[(i, k)] = ZERO;
            a[(k, i)] = ZERO;
        }

        // Q <- Q (I - tau v v^dag) on columns k+1..
        for r in 0..n {
            let mut acc = ZERO;
            for j in 0..m {
                acc += q[(r, k + 1 + j)] * v[j];
            }
            let acc = acc * tau;
            for j in 0..m {
                q[(r, k + 1 + j)] -= acc * v[j].conj();
            }
        }
    }
    let d = (0..n).map(|i| a[(i, i)].re).collect();
    let sub = (0..n.saturating_sub(1)).map(|i| a[(i + 1, i)]).collect();
    (d, sub, q)
}

/// Implicit QL with Wilkinson-type shifts on a real symmetric tridiagonal.
/// `e[i]` couples `i` and `i + 1`; `e[n - 1]` is scratch.
fn tql(d: &mut [f64], e: &mut [f64], zt: &mut [f64], n: usize) -> Result<()> {
    let cap = 64 * n.max(1);
    let mut total = 0;
    for l in 0..n {
        loop {
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
            total += 1;
            if total > cap {
                return Err(Error::NotConverged {
                    iterations: total,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
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
                let (lo, hi) = zt.split_at_mut((i + 1) * n);
                let zi = &mut lo[i * n..(i + 1) * n];
                let zi1 = &mut hi[..n];
                for k in 0..n {
                    let f = zi1[k];
                    zi1[k] = s * zi[k] + c * f;
                    zi[k] = c * zi[k] - s * f;
                }
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
