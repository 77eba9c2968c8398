use crate::error::{Error, Result};
use crate::numerics::{dot, Real};

/// Vertices of the regular simplex with `count` vertices, as unit vectors in
/// `count - 1` dimensions centred at the origin.
///
/// Orientation is fixed: the centred standard basis vectors are run through
/// modified Gram-Schmidt in order, so vertex 0 lies on the first axis and
/// vertex `i` has a positive `i`-th coordinate for `i < count - 1`.
pub fn max_separated_codewords<T: Real>(count: usize) -> Result<Vec<Vec<T>>> {
    if count < 2 {
        return Err(Error::contract(format!(
            "a simplex codeword set needs at least 2 states, got {count}"
        )));
    }
    let n = count;
    let inv_n = T::one() / T::lit(n as f64);
    let centred: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { T::one() - inv_n } else { -inv_n })
                .collect()
        })
        .collect();

    let mut basis: Vec<Vec<T>> = Vec::with_capacity(n - 1);
    for v in centred.iter().take(n - 1) {
        let mut u = v.clone();
        for b in &basis {
            let p = dot(&u, b);
            u.iter_mut().zip(b).for_each(|(x, &y)| *x -= p * y);
        }
        let nu = dot(&u, &u).sqrt();
        u.iter_mut().for_each(|x| *x /= nu);
        basis.push(u);
    }

    let words = centred
        .iter()
        .map(|v| {
            let mut w: Vec<T> = basis.iter().map(|b| dot(v, b)).collect();
            let nw = dot(&w, &w).sqrt();
            w.iter_mut().for_each(|x| *x /= nw);
            w
        })
        .collect();
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_states_are_plus_minus_one() {
        let w = max_separated_codewords::<f64>(2).unwrap();
        assert_eq!(w, vec![vec![1.0], vec![-1.0]]);
    }

    #[test]
    fn three_states_match_triangle() {
        let w = max_separated_codewords::<f64>(3).unwrap();
        let h = 3.0f64.sqrt() / 2.0;
        let expected = [[1.0, 0.0], [-0.5, h], [-0.5, -h]];
        for (got, want) in w.iter().zip(&expected) {
            for (a, b) in got.iter().zip(want) {
                assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn six_state_gram_matrix() {
        let w = max_separated_codewords::<f64>(6).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let g = dot(&w[i], &w[j]);
                // (I - J/6) * 6/5: diagonal 1, off-diagonal -1/5
                let want = if i == j { 1.0 } else { -0.2 };
                assert!((g - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_degenerate() {
        assert!(max_separated_codewords::<f64>(1).is_err());
        assert!(max_separated_codewords::<f64>(0).is_err());
    }

    #[test]
    fn defining_properties_up_to_twelve() {
        for s in 2..=12 {
            let w = max_separated_codewords::<f64>(s).unwrap();
            assert_eq!(w.len(), s);
            let off = -1.0 / (s as f64 - 1.0);
            let mut sum = vec![0.0; s - 1];
            for i in 0..s {
                assert_eq!(w[i].len(), s - 1);
                assert!((dot(&w[i], &w[i]) - 1.0).abs() < 1e-12);
                for j in 0..i {
                    assert!((dot(&w[i], &w[j]) - off).abs() < 1e-12);
                }
                sum.iter_mut().zip(&w[i]).for_each(|(a, b)| *a += b);
            }
            assert!(sum.iter().all(|v| v.abs() < 1e-12));
        }
    }
}
