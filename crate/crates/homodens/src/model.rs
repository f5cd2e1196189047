//! Potential definitions, homogenization constants, and exact reference
//! invariant densities with cached normalizations.
//!
//! Potentials are a closed catalog (no expression parsing): the slow
//! confining part V and the fast periodic part p, both shifted at
//! construction so V(0) = 0 and p(0) = 0. Constant shifts change neither the
//! dynamics (only derivatives enter the drift) nor the normalized densities.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

use crate::numerics::{self, NumericsError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("fast potential failed the period-{period} spot check")]
    NotPeriodic { period: f64 },
    #[error("unknown potential '{name}'; valid names: {valid}")]
    UnknownName { name: String, valid: String },
    #[error("potential appears non-integrable: {0}")]
    NonIntegrable(NumericsError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Slow confining potential V (value shifted so V(0) = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SlowPotential {
    /// (x - mu)^2 / 2, shifted by -mu^2/2.
    Quadratic { mu: f64 },
    /// x^4/4 - x^2/2.
    DoubleWell,
}

impl SlowPotential {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            SlowPotential::Quadratic { mu } => ((x - mu) * (x - mu) - mu * mu) / 2.0,
            SlowPotential::DoubleWell => x * x * x * x / 4.0 - x * x / 2.0,
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            SlowPotential::Quadratic { mu } => x - mu,
            SlowPotential::DoubleWell => x * x * x - x,
        }
    }

    /// Global Lipschitz constant of V', when one exists.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            SlowPotential::Quadratic { .. } => Some(1.0),
            SlowPotential::DoubleWell => None,
        }
    }

    /// Dissipativity constants (beta, R >= 1) with
    /// -sign(x) V'(x) <= -beta |x| for |x| >= R.
    pub fn dissipativity(&self) -> Option<(f64, f64)> {
        match *self {
            SlowPotential::Quadratic { mu } => Some((0.5, (2.0 * mu.abs()).max(1.0))),
            SlowPotential::DoubleWell => Some((1.0, std::f64::consts::SQRT_2)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SlowPotential::Quadratic { .. } => "quadratic",
            SlowPotential::DoubleWell => "double-well",
        }
    }
}

/// Fast periodic potential p (value shifted so p(0) = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FastPotential {
    Zero,
    /// cos(y) - 1, period 2 pi.
    Cos,
}

impl FastPotential {
    pub fn value(&self, y: f64) -> f64 {
        match self {
            FastPotential::Zero => 0.0,
            FastPotential::Cos => y.cos() - 1.0,
        }
    }

    pub fn deriv(&self, y: f64) -> f64 {
        match self {
            FastPotential::Zero => 0.0,
            FastPotential::Cos => -y.sin(),
        }
    }

    pub fn period(&self) -> f64 {
        TAU
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, FastPotential::Zero)
    }

    pub fn name(&self) -> &'static str {
        match self {
            FastPotential::Zero => "zero",
            FastPotential::Cos => "cos",
        }
    }
}

/// One multiscale SDE instance:
/// dX = -V'(X) dt - (1/eps) p'(X/eps) dt + sqrt(2 sigma^2) dW, X_0 = x0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub slow: SlowPotential,
    pub fast: FastPotential,
    pub eps: f64,
    pub sigma2: f64,
    pub x0: f64,
}

impl ProblemSpec {
    pub fn new(
        slow: SlowPotential,
        fast: FastPotential,
        eps: f64,
        sigma2: f64,
        x0: f64,
    ) -> Result<Self, ModelError> {
        if !(sigma2 > 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "sigma2 must be positive (got {sigma2})"
            )));
        }
        Self::validate_common(slow, fast, eps)?;
        Ok(ProblemSpec {
            slow,
            fast,
            eps,
            sigma2,
            x0,
        })
    }

    /// Testing-only constructor accepting sigma2 = 0 so Euler steps become
    /// deterministic. Reference densities are not defined for such a spec.
    pub fn deterministic(
        slow: SlowPotential,
        fast: FastPotential,
        eps: f64,
        x0: f64,
    ) -> Result<Self, ModelError> {
        Self::validate_common(slow, fast, eps)?;
        Ok(ProblemSpec {
            slow,
            fast,
            eps,
            sigma2: 0.0,
            x0,
        })
    }

    fn validate_common(
        slow: SlowPotential,
        fast: FastPotential,
        eps: f64,
    ) -> Result<(), ModelError> {
        if !(eps > 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "eps must be positive (got {eps})"
            )));
        }
        let period = fast.period();
        if !(period > 0.0) {
            return Err(ModelError::InvalidParameter(
                "period must be positive".into(),
            ));
        }
        for i in 0..17 {
            let y = -5.0 + 0.625 * i as f64;
            if (fast.value(y + period) - fast.value(y)).abs() > 1e-10 {
                return Err(ModelError::NotPeriodic { period });
            }
        }
        debug_assert!(slow.value(0.0).abs() < 1e-14);
        debug_assert!(fast.value(0.0).abs() < 1e-14);
        Ok(())
    }

    /// Total potential V(x) + p(x/eps) of the multiscale Gibbs measure.
    pub fn total_potential(&self, x: f64) -> f64 {
        self.slow.value(x) + self.fast.value(x / self.eps)
    }

    /// Multiscale drift -V'(x) - (1/eps) p'(x/eps).
    pub fn multiscale_drift(&self, x: f64) -> f64 {
        -self.slow.deriv(x) - self.fast.deriv(x / self.eps) / self.eps
    }

    /// Theorem constant l = (L_V + |V'(0)|)/sigma^2; None when V' is not
    /// globally Lipschitz (the constant is then only formal).
    pub fn constant_l(&self) -> Option<f64> {
        self.slow
            .lipschitz()
            .map(|lv| (lv + self.slow.deriv(0.0).abs()) / self.sigma2)
    }

    /// Theorem constant r = beta/sigma^2.
    pub fn constant_r(&self) -> Option<f64> {
        self.slow
            .dissipativity()
            .map(|(beta, _)| beta / self.sigma2)
    }

    pub fn homogenized(&self) -> Result<HomogenizedModel, ModelError> {
        homogenize(|y| self.fast.value(y), self.fast.period(), self.sigma2)
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.slow.name(), self.fast.name())
    }
}

/// Constants of the effective SDE: Pi, Pi-hat, K = L^2/(Pi Pi-hat), and
/// Sigma = K sigma^2. The drift of the homogenized SDE is -K V'.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogenizedModel {
    pub pi: f64,
    pub pi_hat: f64,
    pub k: f64,
    pub sigma_eff: f64,
}

/// Compute the homogenization constants for a period-`period` fast potential:
/// Pi = int_0^L e^{-p/sigma^2}, Pi-hat = int_0^L e^{+p/sigma^2} (adaptive
/// quadrature, tolerance 1e-10), K = L^2/(Pi Pi-hat), Sigma = K sigma^2.
pub fn homogenize<F: Fn(f64) -> f64>(
    p: F,
    period: f64,
    sigma2: f64,
) -> Result<HomogenizedModel, ModelError> {
    if !(sigma2 > 0.0) {
        return Err(ModelError::InvalidParameter(format!(
            "sigma2 must be positive (got {sigma2})"
        )));
    }
    if !(period > 0.0) {
        return Err(ModelError::InvalidParameter(format!(
            "period must be positive (got {period})"
        )));
    }
    let pi = numerics::quad_finite(|y| (-p(y) / sigma2).exp(), 0.0, period, 1e-10)?.value;
    let pi_hat = numerics::quad_finite(|y| (p(y) / sigma2).exp(), 0.0, period, 1e-10)?.value;
    let k = period * period / (pi * pi_hat);
    debug_assert!(k > 0.0 && k <= 1.0 + 1e-12, "Cauchy-Schwarz requires K <= 1");
    Ok(HomogenizedModel {
        pi,
        pi_hat,
        k,
        sigma_eff: k * sigma2,
    })
}

/// Which invariant density a [`ReferenceDensity`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DensityKind {
    /// rho(x) = e^{-V(x)/sigma^2} / Z.
    Homogenized,
    /// rho_eps(x) = e^{-(V(x) + p(x/eps))/sigma^2} / Z_eps.
    Multiscale,
}

/// Exact invariant density with cached normalization constant.
#[derive(Debug, Clone)]
pub struct ReferenceDensity {
    kind: DensityKind,
    spec: ProblemSpec,
    normalization: f64,
    domain: (f64, f64),
}

impl ReferenceDensity {
    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    /// Z (homogenized) or Z_eps (multiscale).
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Interval outside which the density stays below the 1e-12 tail level.
    pub fn domain_hint(&self) -> (f64, f64) {
        self.domain
    }

    fn unnormalized(&self, x: f64) -> f64 {
        let v = match self.kind {
            DensityKind::Homogenized => self.spec.slow.value(x),
            DensityKind::Multiscale => self.spec.total_potential(x),
        };
        (-v / self.spec.sigma2).exp()
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.unnormalized(x) / self.normalization
    }
}

/// Build the exact reference density of `kind` for `spec`, caching the
/// normalization constant (adaptive quadrature over the compactified line).
pub fn reference_density(
    spec: &ProblemSpec,
    kind: DensityKind,
) -> Result<ReferenceDensity, ModelError> {
    if !(spec.sigma2 > 0.0) {
        return Err(ModelError::InvalidParameter(
            "reference density needs sigma2 > 0".into(),
        ));
    }
    let potential = |x: f64| match kind {
        DensityKind::Homogenized => spec.slow.value(x),
        DensityKind::Multiscale => spec.total_potential(x),
    };
    let z = numerics::quad_real_line(|x| (-potential(x) / spec.sigma2).exp(), 1e-10)
        .map_err(ModelError::NonIntegrable)?;
    // Fast oscillations average out in the tail; bound them by the periodic
    // minimum when locating the 1e-12 cutoff.
    let p_min = match spec.fast {
        FastPotential::Zero => 0.0,
        FastPotential::Cos => -2.0,
    };
    let envelope = |x: f64| (-(spec.slow.value(x) + p_min) / spec.sigma2).exp() / z.value;
    let domain = tail_cutoff(envelope);
    Ok(ReferenceDensity {
        kind,
        spec: *spec,
        normalization: z.value,
        domain,
    })
}

fn tail_cutoff<F: Fn(f64) -> f64>(density_envelope: F) -> (f64, f64) {
    let mut x = 1.0f64;
    while x < 64.0 {
        if density_envelope(x) < 1e-12 && density_envelope(-x) < 1e-12 {
            return (-x, x);
        }
        x += 0.25;
    }
    (-64.0, 64.0)
}

// ---------------------------------------------------------------------------
// two-dimensional variants
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SlowPotential2 {
    /// (x1^4 + x2^4)/4 - (x1^2 + x2^2)/2, wells at (+-1, +-1).
    QuarticWell,
}

impl SlowPotential2 {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        let [a, b] = x;
        (a.powi(4) + b.powi(4)) / 4.0 - (a * a + b * b) / 2.0
    }

    pub fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        let [a, b] = x;
        [a * a * a - a, b * b * b - b]
    }

    pub fn name(&self) -> &'static str {
        "2d-example"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FastPotential2 {
    Zero,
    /// sin(y1) + sin^2(y2).
    SinPlusSinSq,
    /// sin(y1) alone; keeps the dynamics even in x2.
    SinFirstOnly,
}

impl FastPotential2 {
    pub fn value(&self, y: [f64; 2]) -> f64 {
        let [a, b] = y;
        match self {
            FastPotential2::Zero => 0.0,
            FastPotential2::SinPlusSinSq => a.sin() + b.sin() * b.sin(),
            FastPotential2::SinFirstOnly => a.sin(),
        }
    }

    pub fn grad(&self, y: [f64; 2]) -> [f64; 2] {
        let [a, b] = y;
        match self {
            FastPotential2::Zero => [0.0, 0.0],
            FastPotential2::SinPlusSinSq => [a.cos(), (2.0 * b).sin()],
            FastPotential2::SinFirstOnly => [a.cos(), 0.0],
        }
    }

    /// Per-coordinate periods (sin^2 repeats every pi).
    pub fn periods(&self) -> [f64; 2] {
        match self {
            FastPotential2::Zero => [TAU, TAU],
            FastPotential2::SinPlusSinSq => [TAU, std::f64::consts::PI],
            FastPotential2::SinFirstOnly => [TAU, TAU],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FastPotential2::Zero => "zero",
            FastPotential2::SinPlusSinSq => "sin+sin2",
            FastPotential2::SinFirstOnly => "sin-y1",
        }
    }
}

/// Two-dimensional multiscale SDE instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec2 {
    pub slow: SlowPotential2,
    pub fast: FastPotential2,
    pub eps: f64,
    pub sigma2: f64,
    pub x0: [f64; 2],
}

impl ProblemSpec2 {
    pub fn new(
        slow: SlowPotential2,
        fast: FastPotential2,
        eps: f64,
        sigma2: f64,
        x0: [f64; 2],
    ) -> Result<Self, ModelError> {
        if !(eps > 0.0) || !(sigma2 > 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "eps and sigma2 must be positive (got eps={eps}, sigma2={sigma2})"
            )));
        }
        Ok(ProblemSpec2 {
            slow,
            fast,
            eps,
            sigma2,
            x0,
        })
    }

    pub fn total_potential(&self, x: [f64; 2]) -> f64 {
        self.slow.value(x) + self.fast.value([x[0] / self.eps, x[1] / self.eps])
    }

    pub fn multiscale_drift(&self, x: [f64; 2]) -> [f64; 2] {
        let gs = self.slow.grad(x);
        let gf = self.fast.grad([x[0] / self.eps, x[1] / self.eps]);
        [-gs[0] - gf[0] / self.eps, -gs[1] - gf[1] / self.eps]
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.slow.name(), self.fast.name())
    }
}

/// Exact 2D reference density over a truncated box.
#[derive(Debug, Clone)]
pub struct ReferenceDensity2 {
    kind: DensityKind,
    spec: ProblemSpec2,
    normalization: f64,
    half_width: f64,
}

impl ReferenceDensity2 {
    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Symmetric box [-w, w]^2 carrying all mass above the 1e-12 tail level.
    pub fn domain_hint(&self) -> f64 {
        self.half_width
    }

    pub fn evaluate(&self, x: [f64; 2]) -> f64 {
        let v = match self.kind {
            DensityKind::Homogenized => self.spec.slow.value(x),
            DensityKind::Multiscale => self.spec.total_potential(x),
        };
        (-v / self.spec.sigma2).exp() / self.normalization
    }
}

pub fn reference_density_2d(
    spec: &ProblemSpec2,
    kind: DensityKind,
) -> Result<ReferenceDensity2, ModelError> {
    let p_min = match spec.fast {
        FastPotential2::Zero => 0.0,
        FastPotential2::SinPlusSinSq => -1.0,
        FastPotential2::SinFirstOnly => -1.0,
    };
    // The slow part is coordinate-separable for the built-in, so an axis scan
    // bounds the tails of the full density.
    let axis = |t: f64| (-(spec.slow.value([t, 0.0]) + p_min) / spec.sigma2).exp();
    let mut w = 1.0f64;
    while w < 64.0 && axis(w).max(axis(-w)) > 1e-13 {
        w += 0.25;
    }
    let potential = |x: [f64; 2]| match kind {
        DensityKind::Homogenized => spec.slow.value(x),
        DensityKind::Multiscale => spec.total_potential(x),
    };
    let z = numerics::quad2d_box(
        |a, b| (-potential([a, b]) / spec.sigma2).exp(),
        -w,
        w,
        -w,
        w,
        1e-9,
    )
    .map_err(ModelError::NonIntegrable)?;
    Ok(ReferenceDensity2 {
        kind,
        spec: *spec,
        normalization: z.value,
        half_width: w,
    })
}

// ---------------------------------------------------------------------------
// catalog
// ---------------------------------------------------------------------------

pub const SLOW_NAMES: &[&str] = &["quadratic", "double-well", "2d-example"];
pub const FAST_NAMES: &[&str] = &["zero", "cos"];

/// Look up a 1D slow potential by catalog name. `mu` parameterizes
/// "quadratic" (default 0).
pub fn slow_by_name(name: &str, mu: Option<f64>) -> Result<SlowPotential, ModelError> {
    match name {
        "quadratic" => Ok(SlowPotential::Quadratic {
            mu: mu.unwrap_or(0.0),
        }),
        "double-well" => Ok(SlowPotential::DoubleWell),
        _ => Err(ModelError::UnknownName {
            name: name.to_string(),
            valid: SLOW_NAMES.join(", "),
        }),
    }
}

pub fn fast_by_name(name: &str) -> Result<FastPotential, ModelError> {
    match name {
        "zero" => Ok(FastPotential::Zero),
        "cos" => Ok(FastPotential::Cos),
        _ => Err(ModelError::UnknownName {
            name: name.to_string(),
            valid: FAST_NAMES.join(", "),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn homogenize_constant_fast_potential() {
        let hm = homogenize(|_| 0.0, TAU, 1.7).unwrap();
        assert_abs_diff_eq!(hm.pi, TAU, epsilon = 1e-10);
        assert_abs_diff_eq!(hm.pi_hat, TAU, epsilon = 1e-10);
        assert_abs_diff_eq!(hm.k, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hm.sigma_eff, 1.7, epsilon = 1e-12);
    }

    #[test]
    fn homogenize_cosine_matches_bessel_series() {
        // int_0^{2pi} e^{-+cos y} dy = 2 pi I_0(1/sigma2); frozen values from
        // the Bessel series at 40 digits
        let hm = homogenize(|y| y.cos(), TAU, 1.0).unwrap();
        assert_abs_diff_eq!(hm.pi, 7.9549265210128452745, epsilon = 1e-9);
        assert_abs_diff_eq!(hm.pi_hat, 7.9549265210128452745, epsilon = 1e-9);
        assert_abs_diff_eq!(hm.k, 0.62386036043206918776, epsilon = 1e-10);

        let hm4 = homogenize(|y| y.cos(), TAU, 4.0).unwrap();
        assert_abs_diff_eq!(hm4.pi, 6.3817442392421038013, epsilon = 1e-9);
        assert_abs_diff_eq!(hm4.k, 0.96935074113636642514, epsilon = 1e-10);
        assert_abs_diff_eq!(hm4.sigma_eff, 4.0 * hm4.k, epsilon = 1e-12);
    }

    #[test]
    fn k_invariant_under_constant_shift() {
        let a = homogenize(|y| y.cos(), TAU, 1.3).unwrap();
        let b = homogenize(|y| y.cos() + 0.7, TAU, 1.3).unwrap();
        assert_abs_diff_eq!(a.k, b.k, epsilon = 1e-10);
    }

    #[test]
    fn k_at_most_one_and_below_one_for_nonconstant() {
        let hm = homogenize(|y| (2.0 * y).sin(), std::f64::consts::PI, 0.8).unwrap();
        assert!(hm.k > 0.0 && hm.k < 1.0);
    }

    #[test]
    fn gaussian_reference_density() {
        let spec = ProblemSpec::new(
            SlowPotential::Quadratic { mu: 0.0 },
            FastPotential::Zero,
            0.1,
            1.0,
            0.0,
        )
        .unwrap();
        let rho = reference_density(&spec, DensityKind::Homogenized).unwrap();
        let sqrt_tau = (2.0 * std::f64::consts::PI).sqrt();
        assert_abs_diff_eq!(rho.normalization(), sqrt_tau, epsilon = 1e-9);
        assert_abs_diff_eq!(rho.evaluate(0.0), 1.0 / sqrt_tau, epsilon = 1e-10);
        assert_abs_diff_eq!(
            rho.evaluate(1.3),
            (-1.3f64 * 1.3 / 2.0).exp() / sqrt_tau,
            epsilon = 1e-10
        );
    }

    #[test]
    fn shifted_quadratic_keeps_its_minimum() {
        let v = slow_by_name("quadratic", Some(0.7)).unwrap();
        assert_eq!(v.deriv(0.7), 0.0);
        assert_eq!(v.value(0.0), 0.0);
    }

    #[test]
    fn double_well_plug_in() {
        let v = slow_by_name("double-well", None).unwrap();
        assert_abs_diff_eq!(v.value(1.0), -0.25, epsilon = 1e-15);
    }

    #[test]
    fn two_d_example_plug_in() {
        let p = FastPotential2::SinPlusSinSq;
        let h = std::f64::consts::FRAC_PI_2;
        assert_abs_diff_eq!(p.value([h, h]), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn unknown_names_list_catalog() {
        let err = slow_by_name("triple-well", None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("triple-well") && msg.contains("double-well"));
        assert!(fast_by_name("sawtooth").is_err());
    }

    #[test]
    fn double_well_density_is_even() {
        let spec = ProblemSpec::new(
            SlowPotential::DoubleWell,
            FastPotential::Zero,
            0.1,
            1.0,
            0.0,
        )
        .unwrap();
        let rho = reference_density(&spec, DensityKind::Homogenized).unwrap();
        for i in 0..64 {
            let x = 0.05 * i as f64;
            assert_abs_diff_eq!(rho.evaluate(x), rho.evaluate(-x), epsilon = 1e-12);
        }
    }

    #[test]
    fn densities_normalize_to_one() {
        let spec = ProblemSpec::new(
            SlowPotential::DoubleWell,
            FastPotential::Cos,
            0.1,
            1.0,
            0.0,
        )
        .unwrap();
        for kind in [DensityKind::Homogenized, DensityKind::Multiscale] {
            let rho = reference_density(&spec, kind).unwrap();
            let total = numerics::quad_real_line(|x| rho.evaluate(x), 1e-10)
                .unwrap()
                .value;
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn multiscale_normalization_approaches_homogenized_limit() {
        // Z_eps -> Z Pi / L; frozen 40-digit values for the shifted cos fast
        // potential at eps = 0.2, 0.1, 0.05
        let z_expected = [12.939518392469022, 13.4442510522688751, 13.4396227485238656];
        let limit = 13.4396227822724609;
        let mut errors = Vec::new();
        for (i, eps) in [0.2, 0.1, 0.05].into_iter().enumerate() {
            let spec =
                ProblemSpec::new(SlowPotential::DoubleWell, FastPotential::Cos, eps, 1.0, 0.0)
                    .unwrap();
            let rho = reference_density(&spec, DensityKind::Multiscale).unwrap();
            assert_relative_eq!(rho.normalization(), z_expected[i], max_relative = 1e-8);
            errors.push((rho.normalization() - limit).abs());
        }
        assert!(errors[0] > errors[1] && errors[1] > errors[2]);
    }

    #[test]
    fn weak_convergence_of_low_modes() {
        // |int psi_n rho_eps - int psi_n rho| shrinks monotonically as eps
        // halves from 0.2 to 0.05, for every n <= 8
        let homog = {
            let spec =
                ProblemSpec::new(SlowPotential::DoubleWell, FastPotential::Cos, 0.1, 1.0, 0.0)
                    .unwrap();
            reference_density(&spec, DensityKind::Homogenized).unwrap()
        };
        let alpha = |rho: &ReferenceDensity, n: usize| {
            numerics::quad_real_line(|x| basis::hermite_fn(n, x) * rho.evaluate(x), 1e-10)
                .unwrap()
                .value
        };
        for n in 0..=8usize {
            let target = alpha(&homog, n);
            let mut errs = Vec::new();
            for eps in [0.2, 0.1, 0.05] {
                let spec =
                    ProblemSpec::new(SlowPotential::DoubleWell, FastPotential::Cos, eps, 1.0, 0.0)
                        .unwrap();
                let rho_eps = reference_density(&spec, DensityKind::Multiscale).unwrap();
                errs.push((alpha(&rho_eps, n) - target).abs());
            }
            assert!(
                errs[0] >= errs[1] && errs[1] >= errs[2],
                "mode {n}: errors not monotone: {errs:?}"
            );
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(ProblemSpec::new(
            SlowPotential::DoubleWell,
            FastPotential::Cos,
            -0.1,
            1.0,
            0.0
        )
        .is_err());
        assert!(ProblemSpec::new(
            SlowPotential::DoubleWell,
            FastPotential::Cos,
            0.1,
            0.0,
            0.0
        )
        .is_err());
        assert!(ProblemSpec::deterministic(
            SlowPotential::Quadratic { mu: 0.0 },
            FastPotential::Zero,
            0.1,
            1.0
        )
        .is_ok());
    }

    #[test]
    fn two_d_density_normalizes() {
        let spec = ProblemSpec2::new(
            SlowPotential2::QuarticWell,
            FastPotential2::SinPlusSinSq,
            0.1,
            2.25,
            [0.0, 0.0],
        )
        .unwrap();
        let rho = reference_density_2d(&spec, DensityKind::Homogenized).unwrap();
        let w = rho.domain_hint();
        let total = numerics::quad2d_box(|a, b| rho.evaluate([a, b]), -w, w, -w, w, 1e-9)
            .unwrap()
            .value;
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
        // wells of the quartic double-well sit at (+-1, +-1)
        assert!(rho.evaluate([1.0, 1.0]) > rho.evaluate([0.0, 0.0]));
        assert_abs_diff_eq!(
            rho.evaluate([1.0, -1.0]),
            rho.evaluate([-1.0, 1.0]),
            epsilon = 1e-12
        );
    }

    #[test]
    fn two_d_multiscale_density_normalizes() {
        let spec = ProblemSpec2::new(
            SlowPotential2::QuarticWell,
            FastPotential2::SinPlusSinSq,
            0.1,
            2.25,
            [0.0, 0.0],
        )
        .unwrap();
        let rho = reference_density_2d(&spec, DensityKind::Multiscale).unwrap();
        let w = rho.domain_hint();
        let total = numerics::quad2d_box(|a, b| rho.evaluate([a, b]), -w, w, -w, w, 1e-8)
            .unwrap()
            .value;
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-7);
    }
}
