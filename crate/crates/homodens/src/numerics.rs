//! Shared numerical machinery: adaptive Gauss-Kronrod quadrature on finite
//! intervals and on the whole real line, Gauss-Hermite rules, evaluation
//! grids, and L2 error metrics.

use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error(
        "quadrature budget exhausted: best value {value:.9e}, achieved tolerance \
         {achieved_tol:.3e} (requested {requested_tol:.3e})"
    )]
    Budget {
        value: f64,
        achieved_tol: f64,
        requested_tol: f64,
    },
    #[error("integrand returned a non-finite value near x = {x:.6e}")]
    NonFinite { x: f64 },
    #[error("Gauss-Hermite order {0} outside supported range 1..=400")]
    Order(usize),
    #[error("grid requires lo < hi and count >= 2 (got lo={lo}, hi={hi}, count={count})")]
    Grid { lo: f64, hi: f64, count: usize },
}

/// Value of an adaptive quadrature together with the error bound it achieved.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub achieved_tol: f64,
}

// K15 abscissae (positive half, descending) and weights; Kronrod extension
// of the 7-point Gauss rule on [-1, 1].
const XGK: [f64; 8] = [
    0.99145537112081263921,
    0.94910791234275852453,
    0.86486442335976907279,
    0.74153118559939443986,
    0.58608723546769113029,
    0.40584515137739716691,
    0.20778495500789846760,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224964,
    0.063092092629978553291,
    0.10479001032225018384,
    0.14065325971552591875,
    0.16900472663926790283,
    0.19035057806478540991,
    0.20443294007529889241,
    0.20948214108472782801,
];
// G7 weights matching XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.12948496616886969327,
    0.27970539148927666790,
    0.38183005050511894495,
    0.41795918367346938776,
];

struct PanelEval {
    value: f64,
    error: f64,
}

/// One G7-K15 pass over `[a, b]`, with the QUADPACK-style error rescale.
fn gk15<F: Fn(f64) -> Result<f64, NumericsError>>(
    f: &F,
    a: f64,
    b: f64,
) -> Result<PanelEval, NumericsError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center)?;
    let mut res_k = WGK[7] * fc;
    let mut res_g = WG[3] * fc;
    let mut res_abs = res_k.abs();
    let mut fv = [0.0f64; 15];
    fv[7] = fc;

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x)?;
        let f2 = f(center + x)?;
        fv[j] = f1;
        fv[14 - j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    if !value.is_finite() {
        return Err(NumericsError::NonFinite { x: center });
    }

    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(PanelEval { value, error })
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

const MAX_PANELS: usize = 4096;

fn adapt<F: Fn(f64) -> Result<f64, NumericsError>>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadResult, NumericsError> {
    let first = gk15(f, a, b)?;
    let mut heap = BinaryHeap::new();
    let mut total = first.value;
    let mut err = first.error;
    heap.push(Panel {
        a,
        b,
        value: first.value,
        error: first.error,
    });

    while err > tol.max(tol * total.abs()) {
        if heap.len() >= MAX_PANELS {
            return Err(NumericsError::Budget {
                value: total,
                achieved_tol: err,
                requested_tol: tol,
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted in f64; accept its estimate as-is
            err -= worst.error;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let left = gk15(f, worst.a, mid)?;
        let right = gk15(f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: left.value,
            error: left.error,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: right.value,
            error: right.error,
        });
    }
    Ok(QuadResult {
        value: total,
        achieved_tol: err,
    })
}

/// Adaptive quadrature of `f` over the finite interval `[a, b]`.
pub fn quad_finite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadResult, NumericsError> {
    adapt(
        &|x| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(NumericsError::NonFinite { x })
            }
        },
        a,
        b,
        tol,
    )
}

/// Adaptive quadrature of `f` over the whole real line.
///
/// The line is compactified through x = t/(1 - t^2), t in (-1, 1); the
/// Jacobian (1 + t^2)/(1 - t^2)^2 blows up at the endpoints, so integrands
/// must decay (an integrand that underflows to exactly 0 contributes 0
/// without touching the Jacobian).
pub fn quad_real_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> Result<QuadResult, NumericsError> {
    let g = |t: f64| -> Result<f64, NumericsError> {
        let u = 1.0 - t * t;
        let x = t / u;
        let v = f(x);
        if v == 0.0 {
            return Ok(0.0);
        }
        if !v.is_finite() {
            return Err(NumericsError::NonFinite { x });
        }
        let w = v * (1.0 + t * t) / (u * u);
        if !w.is_finite() {
            return Err(NumericsError::NonFinite { x });
        }
        Ok(w)
    };
    adapt(&g, -1.0, 1.0, tol)
}

/// Nested adaptive quadrature of `f(x, y)` over the box `[xlo,xhi] x [ylo,yhi]`.
pub fn quad2d_box<F: Fn(f64, f64) -> f64>(
    f: F,
    xlo: f64,
    xhi: f64,
    ylo: f64,
    yhi: f64,
    tol: f64,
) -> Result<QuadResult, NumericsError> {
    let inner_tol = tol / 10.0;
    let inner_err = std::cell::Cell::new(0.0f64);
    let failed = std::cell::Cell::new(false);
    let outer = quad_finite(
        |x| match quad_finite(|y| f(x, y), ylo, yhi, inner_tol) {
            Ok(r) => {
                inner_err.set(inner_err.get().max(r.achieved_tol));
                r.value
            }
            Err(_) => {
                failed.set(true);
                f64::NAN
            }
        },
        xlo,
        xhi,
        tol,
    );
    if failed.get() {
        return Err(NumericsError::Budget {
            value: f64::NAN,
            achieved_tol: f64::INFINITY,
            requested_tol: tol,
        });
    }
    let outer = outer?;
    Ok(QuadResult {
        value: outer.value,
        achieved_tol: outer.achieved_tol + inner_err.get() * (xhi - xlo),
    })
}

/// Gauss-Hermite rule for the weight e^{-x^2} on the real line.
///
/// `weights` are the classical w_i (these underflow to zero for the extreme
/// nodes of very high orders, which is the correct double-precision limit);
/// `scaled_weights` hold w_i * e^{x_i^2} and stay representable, so
/// `sum scaled_weights[i] * h(nodes[i])` integrates a decaying `h` directly.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

impl GaussHermite {
    /// Integrate f(x) e^{-x^2} dx.
    pub fn integrate_weighted<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

static GH_CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();

/// Cached Gauss-Hermite nodes and weights of order `n`, 1 <= n <= 400.
pub fn gauss_hermite(n: usize) -> Result<Arc<GaussHermite>, NumericsError> {
    if !(1..=400).contains(&n) {
        return Err(NumericsError::Order(n));
    }
    let cache = GH_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(build_gauss_hermite(n));
    cache.lock().unwrap().insert(n, Arc::clone(&rule));
    Ok(rule)
}

fn build_gauss_hermite(n: usize) -> GaussHermite {
    // Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix with zero
    // diagonal and off-diagonal sqrt(k/2).
    let mut d = vec![0.0f64; n];
    let mut e: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    e.push(0.0);
    tridiagonal_eigenvalues(&mut d, &mut e);
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Newton polish on the zeros of psi_n: psi_n' = sqrt(2n) psi_{n-1} - x psi_n.
    let mut row = vec![0.0f64; n + 1];
    let sq2n = (2.0 * n as f64).sqrt();
    for x in d.iter_mut() {
        for _ in 0..3 {
            basis::hermite_fn_row_into(&mut row, *x);
            let deriv = sq2n * row[n - 1] - *x * row[n];
            if deriv != 0.0 {
                *x -= row[n] / deriv;
            }
        }
    }

    // enforce the exact symmetry of the rule
    for i in 0..n / 2 {
        let m = 0.5 * (d[n - 1 - i] - d[i]);
        d[i] = -m;
        d[n - 1 - i] = m;
    }
    if n % 2 == 1 {
        d[n / 2] = 0.0;
    }

    // Christoffel weights: w_i e^{x_i^2} = 1 / sum_{k<n} psi_k(x_i)^2.
    let mut weights = vec![0.0f64; n];
    let mut scaled = vec![0.0f64; n];
    let mut psi_row = vec![0.0f64; n];
    for (i, &x) in d.iter().enumerate() {
        basis::hermite_fn_row_into(&mut psi_row, x);
        let s: f64 = psi_row.iter().map(|v| v * v).sum();
        scaled[i] = 1.0 / s;
        weights[i] = scaled[i] * (-x * x).exp();
    }
    GaussHermite {
        nodes: d,
        weights,
        scaled_weights: scaled,
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix by the implicit QL method
/// with Wilkinson shifts. `d` holds the diagonal (replaced by eigenvalues),
/// `e` the off-diagonals in `e[0..n-1]`; `e[n-1]` is scratch.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    if n <= 1 {
        return;
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
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
            iter += 1;
            assert!(iter <= 60, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
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
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Uniform evaluation grid on `[lo, hi]` with `count` points inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self, NumericsError> {
        if !(lo < hi) || count < 2 {
            return Err(NumericsError::Grid { lo, hi, count });
        }
        Ok(Grid1D { lo, hi, count })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.count).map(move |i| self.lo + h * i as f64)
    }
}

/// Trapezoid approximation of (integral of (f-g)^2)^(1/2) over the grid.
pub fn l2_error<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(f: F, g: G, grid: &Grid1D) -> f64 {
    let h = grid.step();
    let mut acc = 0.0;
    for (i, x) in grid.points().enumerate() {
        let d = f(x) - g(x);
        let w = if i == 0 || i == grid.count - 1 { 0.5 } else { 1.0 };
        acc += w * d * d;
    }
    (acc * h).sqrt()
}

/// Tensor-trapezoid L2 distance over the box `gx x gy`.
pub fn l2_error_2d<F, G>(f: F, g: G, gx: &Grid1D, gy: &Grid1D) -> f64
where
    F: Fn(f64, f64) -> f64,
    G: Fn(f64, f64) -> f64,
{
    let hx = gx.step();
    let hy = gy.step();
    let mut acc = 0.0;
    for (i, x) in gx.points().enumerate() {
        let wx = if i == 0 || i == gx.count - 1 { 0.5 } else { 1.0 };
        for (j, y) in gy.points().enumerate() {
            let wy = if j == 0 || j == gy.count - 1 { 0.5 } else { 1.0 };
            let d = f(x, y) - g(x, y);
            acc += wx * wy * d * d;
        }
    }
    (acc * hx * hy).sqrt()
}
