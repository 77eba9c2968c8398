//! Central finite differences, the reference against which every analytic
//! gradient in the crate is tested.

use super::Real;
use crate::error::{Error, Result};

/// Central-difference gradient of `objective` at `point`.
pub fn finite_diff_grad<T: Real>(
    mut objective: impl FnMut(&[T]) -> T,
    point: &[T],
    step: T,
) -> Result<Vec<T>> {
    if !(step > T::zero()) {
        return Err(Error::contract("finite difference step must be positive"));
    }
    let mut x = point.to_vec();
    let mut grad = Vec::with_capacity(point.len());
    let two_h = step + step;
    for i in 0..point.len() {
        let orig = x[i];
        x[i] = orig + step;
        let plus = objective(&x);
        x[i] = orig - step;
        let minus = objective(&x);
        x[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!(
                "objective not finite when perturbing coordinate {i}"
            )));
        }
        grad.push((plus - minus) / two_h);
    }
    Ok(grad)
}

/// `||a - b|| / max(||a||, ||b||)`; zero when both vectors vanish.
pub fn relative_error<T: Real>(a: &[T], b: &[T]) -> T {
    let diff: T = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt();
    let na: T = a.iter().map(|&x| x * x).sum::<T>().sqrt();
    let nb: T = b.iter().map(|&x| x * x).sum::<T>().sqrt();
    let denom = na.max(nb);
    if denom == T::zero() {
        T::zero()
    } else {
        diff / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let g = finite_diff_grad(|x: &[f64]| 0.5 * (x[0] * x[0] + x[1] * x[1]), &[1.0, -2.0], 1e-5).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-8);
        assert!((g[1] + 2.0).abs() < 1e-8);
    }

    #[test]
    fn constant_is_flat() {
        let g = finite_diff_grad(|_: &[f64]| 3.0, &[0.5, 0.1, 9.0], 1e-5).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn non_finite_names_coordinate() {
        let err = finite_diff_grad(|x: &[f64]| if x[1] > 0.0 { f64::NAN } else { 0.0 }, &[0.0, 0.0], 1e-3)
            .unwrap_err()
            .to_string();
        assert!(err.contains("coordinate 1"), "{err}");
    }

    #[test]
    fn rejects_bad_step() {
        assert!(finite_diff_grad(|_: &[f64]| 0.0, &[1.0], 0.0).is_err());
    }
}
