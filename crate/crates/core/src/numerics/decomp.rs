use super::{dot, Matrix, Real, RngStream};

/// Orthonormal basis of the column span of `a`, from Householder QR with
/// column pivoting.
///
/// A pivot is accepted while its magnitude exceeds `tol * max(1, |r_00|)`.
/// Returns a `rows x rank` matrix.
pub fn orthonormal_basis<T: Real>(a: &Matrix<T>, tol: T) -> Matrix<T> {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut norms: Vec<T> = (0..n).map(|j| col_norm_sq(&r, j, 0)).collect();
    let mut reflectors: Vec<Vec<T>> = Vec::new();
    let mut threshold = None;

    for k in 0..m.min(n) {
        // pivot: remaining column with the largest trailing norm
        let (p, _) = (k..n)
            .map(|j| (j, norms[j]))
            .fold((k, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if p != k {
            for i in 0..m {
                let t = r[(i, k)];
                r[(i, k)] = r[(i, p)];
                r[(i, p)] = t;
            }
            norms.swap(k, p);
        }

        let x: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
        let alpha = dot(&x, &x).sqrt();
        let thr = *threshold.get_or_insert_with(|| tol * alpha.max(T::one()));
        if alpha <= thr {
            break;
        }

        let sign = if x[0] >= T::zero() { T::one() } else { -T::one() };
        let mut v = x;
        v[0] += sign * alpha;
        let vnorm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|e| *e /= vnorm);

        for j in k..n {
            let s: T = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
            let s2 = s + s;
            for i in k..m {
                r[(i, j)] -= s2 * v[i - k];
            }
        }
        for (j, nj) in norms.iter_mut().enumerate().skip(k + 1) {
            *nj = col_norm_sq(&r, j, k + 1);
        }
        reflectors.push(v);
    }

    // Q e_j for each accepted pivot, applying reflectors in reverse
    let rank = reflectors.len();
    let mut q = Matrix::zeros(m, rank);
    for j in 0..rank {
        let mut e = vec![T::zero(); m];
        e[j] = T::one();
        for (k, v) in reflectors.iter().enumerate().rev() {
            let s: T = (k..m).map(|i| v[i - k] * e[i]).sum();
            let s2 = s + s;
            for i in k..m {
                e[i] -= s2 * v[i - k];
            }
        }
        for i in 0..m {
            q[(i, j)] = e[i];
        }
    }
    q
}

fn col_norm_sq<T: Real>(a: &Matrix<T>, j: usize, from: usize) -> T {
    (from..a.rows()).map(|i| a[(i, j)] * a[(i, j)]).sum()
}

/// Largest singular value by power iteration on `a^T a`.
pub fn spectral_norm<T: Real>(a: &Matrix<T>, iters: usize, seed: u64) -> T {
    let mut rng = RngStream::new(seed);
    let mut v: Vec<T> = (0..a.cols()).map(|_| rng.uniform(-T::one(), T::one())).collect();
    let mut sigma = T::zero();
    for _ in 0..iters {
        let n = dot(&v, &v).sqrt();
        if n == T::zero() {
            return T::zero();
        }
        v.iter_mut().for_each(|e| *e /= n);
        let av = a.matvec(&v).expect("shape checked by construction");
        sigma = dot(&av, &av).sqrt();
        v = a.tr_matvec(&av).expect("shape checked by construction");
    }
    sigma
}
