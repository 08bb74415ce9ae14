//! Matrix exponential by scaling and squaring with a truncated Taylor core.

use super::Matrix;
use crate::error::{Error, Result};

/// Scaled matrices satisfy `||A / 2^s||_1 <= SCALED_NORM`.
const SCALED_NORM: f64 = 0.5;

/// With `||A||_1 <= 0.5` the remainder after this order is below
/// `0.5^17 / 17! < 1e-20`.
const TAYLOR_ORDER: usize = 16;

/// Computes `e^A`.
pub fn expm(a: &Matrix) -> Result<Matrix> {
    if !a.is_finite() {
        return Err(Error::Overflow);
    }
    let n = a.dim();
    let norm = a.norm_one();
    let mut squarings = 0u32;
    if norm > SCALED_NORM {
        squarings = (norm / SCALED_NORM).log2().ceil() as u32;
    }
    if squarings > 1000 {
        return Err(Error::Overflow);
    }
    let scaled = a.scale(0.5f64.powi(squarings as i32));

    // Horner: I + X(I + X/2(I + X/3(...))).
    let mut acc = Matrix::identity(n);
    for k in (1..=TAYLOR_ORDER).rev() {
        acc = scaled.matmul(&acc).scale(1.0 / k as f64);
        for i in 0..n {
            acc[(i, i)] += 1.0;
        }
    }
    for _ in 0..squarings {
        acc = acc.matmul(&acc);
    }
    if !acc.is_finite() {
        return Err(Error::Overflow);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_gives_identity() {
        assert_eq!(expm(&Matrix::zeros(4)).unwrap(), Matrix::identity(4));
    }

    #[test]
    fn diagonal_matches_scalar_exp() {
        let d = Matrix::diag(&[1.0, -2.0, 0.5, 3.0]);
        let e = expm(&d).unwrap();
        for (i, v) in [1.0f64, -2.0, 0.5, 3.0].iter().enumerate() {
            assert!((e[(i, i)] - v.exp()).abs() <= 1e-14 * v.exp().max(1.0));
        }
    }

    #[test]
    fn rotation_generator() {
        // exp(t [[0,1],[-1,0]]) = [[cos t, sin t], [-sin t, cos t]]
        let t = 2.3;
        let r = Matrix::from_rows(&[[0.0, t], [-t, 0.0]]).unwrap();
        let e = expm(&r).unwrap();
        let expected = Matrix::from_rows(&[[t.cos(), t.sin()], [-t.sin(), t.cos()]]).unwrap();
        assert!(e.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn cyclic_generator_reproduces_strange_matrix() {
        let lambda = 2.0 * PI / 3f64.sqrt();
        let q = Matrix::from_rows(&[[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, -1.0]])
            .unwrap()
            .scale(lambda);
        let eps = (-PI * 3f64.sqrt()).exp();
        let e = expm(&q).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { (1.0 - 2.0 * eps) / 3.0 } else { (1.0 + eps) / 3.0 };
                assert!((e[(i, j)] - expected).abs() < 1e-13, "({i},{j})");
            }
        }
    }

    #[test]
    fn non_finite_input_is_overflow() {
        let mut a = Matrix::zeros(2);
        a[(0, 1)] = f64::INFINITY;
        assert_eq!(expm(&a), Err(Error::Overflow));
        let big = Matrix::from_rows(&[[800.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(expm(&big), Err(Error::Overflow));
    }
}
