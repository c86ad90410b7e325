//! Complex Householder QR with column-norm pivoting, and the two
//! least-squares solutions built on it (right pseudo-inverse and ridge).

use nalgebra::Complex;

use crate::scalar::{CMatrix, CVector, Real};

/// Thin QR factorization `A P = Q R` of an `m x n` matrix with `m >= n`.
#[derive(Debug, Clone)]
pub struct Qr<T: Real> {
    pub q: CMatrix<T>,
    pub r: CMatrix<T>,
    /// Column `j` of `A P` is column `perm[j]` of `A`.
    pub perm: Vec<usize>,
}

impl<T: Real> Qr<T> {
    /// Householder QR. With `pivot` set, the remaining column of largest norm
    /// is moved to the front at each step so `|R_jj|` is non-increasing.
    pub fn new(a: &CMatrix<T>, pivot: bool) -> Self {
        let (m, n) = a.shape();
        assert!(m >= n, "thin QR needs at least as many rows as columns");
        let mut work = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut reflectors: Vec<Option<CVector<T>>> = Vec::with_capacity(n);
        let zero = Complex::new(T::zero(), T::zero());

        for j in 0..n {
            if pivot {
                let mut best = j;
                let mut best_norm = T::zero();
                for c in j..n {
                    let nrm = work
                        .view((j, c), (m - j, 1))
                        .iter()
                        .fold(T::zero(), |acc, z| acc + z.norm_sqr());
                    if nrm > best_norm {
                        best_norm = nrm;
                        best = c;
                    }
                }
                if best != j {
                    work.swap_columns(j, best);
                    perm.swap(j, best);
                }
            }

            let x: CVector<T> = work.view((j, j), (m - j, 1)).column(0).into_owned();
            let norm_x = x.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
            if norm_x == T::zero() {
                reflectors.push(None);
                continue;
            }
            let x0 = x[0];
            let phase = if x0.norm_sqr().sqrt() > T::zero() {
                x0 / Complex::new(x0.norm_sqr().sqrt(), T::zero())
            } else {
                Complex::new(T::one(), T::zero())
            };
            let alpha = -phase * Complex::new(norm_x, T::zero());
            let mut v = x;
            v[0] -= alpha;
            let v_norm2 = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
            if v_norm2 == T::zero() {
                reflectors.push(None);
                continue;
            }
            let two_over = Complex::new(T::lit(2.0) / v_norm2, T::zero());
            for c in j..n {
                let mut col = work.view_mut((j, c), (m - j, 1));
                let s = v
                    .iter()
                    .zip(col.iter())
                    .fold(zero, |acc, (vi, ai)| acc + vi.conj() * ai);
                let f = s * two_over;
                for (ai, vi) in col.iter_mut().zip(v.iter()) {
                    *ai -= *vi * f;
                }
            }
            reflectors.push(Some(v));
        }

        let mut q = CMatrix::<T>::from_fn(m, n, |i, c| {
            if i == c {
                Complex::new(T::one(), T::zero())
            } else {
                zero
            }
        });
        for (j, refl) in reflectors.iter().enumerate().rev() {
            let Some(v) = refl else { continue };
            let v_norm2 = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
            let two_over = Complex::new(T::lit(2.0) / v_norm2, T::zero());
            for c in 0..n {
                let mut col = q.view_mut((j, c), (m - j, 1));
                let s = v
                    .iter()
                    .zip(col.iter())
                    .fold(zero, |acc, (vi, ai)| acc + vi.conj() * ai);
                let f = s * two_over;
                for (ai, vi) in col.iter_mut().zip(v.iter()) {
                    *ai -= *vi * f;
                }
            }
        }

        let r = CMatrix::<T>::from_fn(n, n, |i, c| if i <= c { work[(i, c)] } else { zero });
        Qr { q, r, perm }
    }

    /// Number of diagonal entries of `R` above `rel_tol * max |R_jj|`.
    pub fn rank(&self, rel_tol: T) -> usize {
        let diag: Vec<T> = (0..self.r.ncols())
            .map(|j| self.r[(j, j)].norm_sqr().sqrt())
            .collect();
        let largest = diag
            .iter()
            .copied()
            .fold(T::zero(), |a, b| if b > a { b } else { a });
        if largest == T::zero() {
            return 0;
        }
        diag.iter().filter(|d| **d > rel_tol * largest).count()
    }

    /// `(R^H R)^{-1}` in the permuted column order, via two triangular solves.
    fn gram_inverse_permuted(&self) -> Option<CMatrix<T>> {
        let n = self.r.ncols();
        let eye = CMatrix::<T>::identity(n, n);
        let y = self.r.adjoint().solve_lower_triangular(&eye)?;
        self.r.solve_upper_triangular(&y)
    }
}

/// `A (A^H A)^{-1}`: the right pseudo-inverse of `A^H`, computed from a
/// pivoted QR of `A` as `Q R^{-H}` with the pivoting undone. Returns `None`
/// when `A` is numerically rank deficient at `rank_tol`.
pub fn right_pinv_of_adjoint<T: Real>(a: &CMatrix<T>, rank_tol: T) -> Result<CMatrix<T>, usize> {
    let (m, n) = a.shape();
    if m < n {
        return Err(m.min(n));
    }
    let qr = Qr::new(a, true);
    let rank = qr.rank(rank_tol);
    if rank < n {
        return Err(rank);
    }
    let eye = CMatrix::<T>::identity(n, n);
    let r_inv_h = qr.r.adjoint().solve_lower_triangular(&eye).ok_or(rank)?;
    let w_perm = &qr.q * r_inv_h;
    let mut w = CMatrix::<T>::zeros(m, n);
    for (j, &orig) in qr.perm.iter().enumerate() {
        w.set_column(orig, &w_perm.column(j));
    }
    Ok(w)
}

/// `A (A^H A + eps I)^{-1}`, from the QR of the stacked matrix `[A; sqrt(eps) I]`
/// whose Gram matrix is `A^H A + eps I`.
pub fn ridge_right_inverse<T: Real>(a: &CMatrix<T>, eps: T) -> Option<CMatrix<T>> {
    let (m, n) = a.shape();
    let sq = Complex::new(eps.sqrt(), T::zero());
    let stacked = CMatrix::<T>::from_fn(m + n, n, |i, c| {
        if i < m {
            a[(i, c)]
        } else if i - m == c {
            sq
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    let qr = Qr::new(&stacked, false);
    if qr.rank(T::default_epsilon()) < n {
        return None;
    }
    let g_inv = qr.gram_inverse_permuted()?;
    Some(a * g_inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(m: usize, n: usize, seed: u64) -> CMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(m, n, |_, _| {
            Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    #[test]
    fn qr_reconstructs_permuted_matrix() {
        let a = random_matrix(9, 5, 1);
        let qr = Qr::new(&a, true);
        let qr_prod = &qr.q * &qr.r;
        for (j, &c) in qr.perm.iter().enumerate() {
            for i in 0..9 {
                assert!((qr_prod[(i, j)] - a[(i, c)]).norm() < 1e-12);
            }
        }
        let qhq = qr.q.adjoint() * &qr.q;
        assert!((qhq - CMatrix::<f64>::identity(5, 5)).norm() < 1e-12);
        for j in 1..5 {
            assert!(qr.r[(j, j)].norm() <= qr.r[(j - 1, j - 1)].norm() + 1e-12);
        }
    }

    #[test]
    fn pinv_satisfies_identity() {
        let a = random_matrix(12, 6, 2);
        let w = right_pinv_of_adjoint(&a, 1e-10).unwrap();
        let prod = a.adjoint() * w;
        assert!((prod - CMatrix::<f64>::identity(6, 6)).norm() < 1e-10);
    }

    #[test]
    fn duplicate_column_is_rank_deficient() {
        let mut a = random_matrix(8, 4, 3);
        let c0 = a.column(0).into_owned();
        a.set_column(3, &c0);
        assert_eq!(right_pinv_of_adjoint(&a, 1e-10).unwrap_err(), 3);
    }

    #[test]
    fn ridge_matches_normal_equations() {
        let a = random_matrix(7, 4, 4);
        let eps = 0.3;
        let f = ridge_right_inverse(&a, eps).unwrap();
        let gram = a.adjoint() * &a + CMatrix::<f64>::identity(4, 4) * Complex::new(eps, 0.0);
        let direct = &a * gram.try_inverse().unwrap();
        assert!((f - direct).norm() < 1e-12);
    }
}
