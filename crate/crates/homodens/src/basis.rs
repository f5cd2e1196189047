//! Physicists' Hermite polynomials H_n, orthonormal Hermite functions
//! psi_n(x) = H_n(x) e^{-x^2/2} / sqrt(sqrt(pi) 2^n n!), and their 2D tensor
//! products.
//!
//! All estimator-facing work goes through the normalized psi recurrence
//!   psi_{n+1}(x) = x sqrt(2/(n+1)) psi_n(x) - sqrt(n/(n+1)) psi_{n-1}(x),
//! which never forms 2^n n! and keeps every value inside Cramer's bound
//! |psi_n(x)| <= pi^{-1/4}. Raw H_n exists only for cross-checks below its
//! overflow ceiling.

use thiserror::Error;

/// pi^{-1/4}, the uniform bound on |psi_n(x)| (Cramer's inequality).
pub const CRAMER_BOUND: f64 = 0.75112554446494248286;

/// Largest order accepted by [`hermite_poly`]; raw polynomial values blow
/// through the f64 range not far beyond this for moderate arguments.
pub const HERMITE_POLY_MAX_ORDER: usize = 512;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("Hermite polynomial order {n} exceeds the overflow ceiling {max}")]
    OrderTooLarge { n: usize, max: usize },
}

/// H_n(x) by the three-term recurrence H_{n+1} = 2x H_n - 2n H_{n-1}.
pub fn hermite_poly(n: usize, x: f64) -> Result<f64, BasisError> {
    if n > HERMITE_POLY_MAX_ORDER {
        return Err(BasisError::OrderTooLarge {
            n,
            max: HERMITE_POLY_MAX_ORDER,
        });
    }
    if n == 0 {
        return Ok(1.0);
    }
    let mut prev = 1.0f64;
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Orthonormal Hermite function psi_n(x).
pub fn hermite_fn(n: usize, x: f64) -> f64 {
    let mut prev = 0.0f64;
    let mut cur = CRAMER_BOUND * (-x * x / 2.0).exp();
    for k in 0..n {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// One bottom-up recurrence pass filling `buf[n] = psi_n(x)` for all
/// `n < buf.len()`. This is the estimator's inner loop; no allocation.
pub fn hermite_fn_row_into(buf: &mut [f64], x: f64) {
    if buf.is_empty() {
        return;
    }
    buf[0] = CRAMER_BOUND * (-x * x / 2.0).exp();
    if buf.len() == 1 {
        return;
    }
    buf[1] = x * std::f64::consts::SQRT_2 * buf[0];
    for k in 1..buf.len() - 1 {
        let kf = k as f64;
        buf[k + 1] = x * (2.0 / (kf + 1.0)).sqrt() * buf[k] - (kf / (kf + 1.0)).sqrt() * buf[k - 1];
    }
}

/// Hermite-function values psi_0(x), ..., psi_{N-1}(x) at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisValueRow {
    pub point: f64,
    pub values: Vec<f64>,
}

impl BasisValueRow {
    pub fn order_count(&self) -> usize {
        self.values.len()
    }
}

/// Evaluate the first `n` Hermite functions at `x` in one recurrence pass.
pub fn hermite_fn_row(n: usize, x: f64) -> BasisValueRow {
    assert!(n >= 1, "row needs at least one basis function");
    let mut values = vec![0.0f64; n];
    hermite_fn_row_into(&mut values, x);
    BasisValueRow { point: x, values }
}

/// 2D tensor basis function Psi_{mn}(x1, x2) = psi_m(x1) psi_n(x2).
pub fn tensor_fn(m: usize, n: usize, x1: f64, x2: f64) -> f64 {
    hermite_fn(m, x1) * hermite_fn(n, x2)
}
