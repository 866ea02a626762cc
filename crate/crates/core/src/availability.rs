//! Single repairable component with Lindley (or exponential) failure times
//! and exponential repair.
//!
//! The Lindley chain has states `(E0, G0, G1, F)`: `E0` is the exponential
//! failure path, `G0 → G1` the two-phase gamma path, and `F` the failed state.
//! A repair completes at rate `μ` and restarts the component in `E0` or `G0`
//! with the Lindley entry probabilities `α1 = λ/(λ+1)`, `α2 = 1/(λ+1)`.

use thiserror::Error;

use crate::ctmc::{transient_distribution, CtmcError, GeneratorMatrix, StateDistribution};
use crate::linalg::DenseMatrix;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AvailabilityError {
    #[error("{name} must be positive, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },
    #[error("time must be finite and non-negative, got {0}")]
    NegativeTime(f64),
    #[error(transparent)]
    Ctmc(#[from] CtmcError),
}

type Result<T> = std::result::Result<T, AvailabilityError>;

/// Failure-time law of a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Law {
    Lindley,
    Exponential,
}

impl Law {
    pub fn name(self) -> &'static str {
        match self {
            Law::Lindley => "lindley",
            Law::Exponential => "exponential",
        }
    }
}

/// Failure rate `λ > 0` and repair rate `μ ≥ 0` (per day); `μ = 0` means
/// the component is not repaired.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentParams<T> {
    pub lambda: T,
    pub mu: T,
    pub law: Law,
}

impl<T: Scalar> ComponentParams<T> {
    pub fn new(lambda: T, mu: T, law: Law) -> Result<Self> {
        check_lambda(lambda)?;
        check_mu(mu)?;
        Ok(Self { lambda, mu, law })
    }

    pub fn lindley(lambda: T, mu: T) -> Result<Self> {
        Self::new(lambda, mu, Law::Lindley)
    }

    pub fn exponential(lambda: T, mu: T) -> Result<Self> {
        Self::new(lambda, mu, Law::Exponential)
    }

    /// Probability of entering the exponential path.
    pub fn alpha1(&self) -> T {
        self.lambda / (self.lambda + T::one())
    }

    /// Probability of entering the gamma path.
    pub fn alpha2(&self) -> T {
        T::one() - self.alpha1()
    }

    pub fn with_law(self, law: Law) -> Self {
        Self { law, ..self }
    }

    /// Availability at `t` under this component's law.
    pub fn availability(&self, t: T) -> Result<T> {
        match self.law {
            Law::Lindley => availability_closed(self.lambda, self.mu, t),
            Law::Exponential => availability_exponential_closed(self.lambda, self.mu, t),
        }
    }

    /// Survival without repair under this component's law.
    pub fn reliability(&self, t: T) -> Result<T> {
        match self.law {
            Law::Lindley => reliability_lindley(self.lambda, t),
            Law::Exponential => {
                check_time(t)?;
                Ok((-self.lambda * t).exp())
            }
        }
    }

    pub fn steady_state(&self) -> Result<T> {
        steady_state_availability(self)
    }
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<()> {
    if lambda > T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(AvailabilityError::NonPositiveRate {
            name: "lambda",
            value: lambda.as_f64(),
        })
    }
}

fn check_mu<T: Scalar>(mu: T) -> Result<()> {
    if mu >= T::zero() && mu.is_finite() {
        Ok(())
    } else {
        Err(AvailabilityError::NonPositiveRate {
            name: "mu",
            value: mu.as_f64(),
        })
    }
}

fn check_time<T: Scalar>(t: T) -> Result<()> {
    if t >= T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(AvailabilityError::NegativeTime(t.as_f64()))
    }
}

/// Index of the failed state in the single-component Lindley chain.
pub const FAILED_STATE: usize = 3;

/// The 4-state Lindley repair chain and its initial distribution
/// `(α1, α2, 0, 0)`.
pub fn lindley_generator<T: Scalar>(
    lambda: T,
    mu: T,
) -> Result<(GeneratorMatrix<T>, StateDistribution<T>)> {
    check_lambda(lambda)?;
    check_mu(mu)?;
    let alpha1 = lambda / (lambda + T::one());
    let alpha2 = T::one() - alpha1;
    let z = T::zero();
    let rows = [
        [-lambda, z, z, lambda],
        [z, -lambda, lambda, z],
        [z, z, -lambda, lambda],
        [mu * alpha1, mu * alpha2, z, -mu],
    ];
    let q = GeneratorMatrix::from_rows(&rows)?;
    let p0 = StateDistribution::new(vec![alpha1, alpha2, z, z])?;
    Ok((q, p0))
}

/// The component's own CTMC: the 4-state Lindley chain, or the 2-state
/// up/down chain for exponential failures. The failed state is always last.
pub fn component_chain<T: Scalar>(
    p: &ComponentParams<T>,
) -> Result<(GeneratorMatrix<T>, StateDistribution<T>)> {
    match p.law {
        Law::Lindley => lindley_generator(p.lambda, p.mu),
        Law::Exponential => {
            check_lambda(p.lambda)?;
            check_mu(p.mu)?;
            let raw = DenseMatrix::from_rows(&[[-p.lambda, p.lambda], [p.mu, -p.mu]])
                .expect("2x2");
            Ok((GeneratorMatrix::new(raw)?, StateDistribution::point_mass(2, 0)))
        }
    }
}

/// Which form of the transient term applies, by the sign of the
/// discriminant `μ² - 4λμ/(λ+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Hyperbolic,
    Trigonometric,
    Critical,
}

/// Relative width of the critical band: `|disc| ≤ CRITICAL_BAND · μ²`.
pub const CRITICAL_BAND: f64 = 1e-9;

/// Constants of the closed-form availability
/// `A(t) = A∞ + (1 - A∞)(cosh(ωt/2) - M sinh(ωt/2)) e^{-(λ+μ/2)t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormTerms<T> {
    pub disc: T,
    /// `√|disc|`.
    pub omega: T,
    /// `M` (or its trigonometric counterpart); zero on the critical branch.
    pub big_m: T,
    /// Coefficient `K` of the critical-branch limit `M sinh(ωt/2) → K t`.
    pub critical_k: T,
    pub steady: T,
    pub decay: T,
    pub branch: Branch,
}

impl<T: Scalar> ClosedFormTerms<T> {
    pub fn new(lambda: T, mu: T) -> Result<Self> {
        check_lambda(lambda)?;
        check_mu(mu)?;
        let one = T::one();
        let two = T::lit(2.0);
        let lp1 = lambda + one;
        let disc = mu * mu - T::lit(4.0) * lambda * mu / lp1;
        let band = T::lit(CRITICAL_BAND) * mu * mu;
        let branch = if disc > band {
            Branch::Hyperbolic
        } else if disc < -band {
            Branch::Trigonometric
        } else {
            Branch::Critical
        };
        let omega = disc.abs().sqrt();
        let numerator = (mu - two) * lambda * lambda + two * (mu - one) * lambda - mu;
        let big_m = match branch {
            Branch::Critical => T::zero(),
            _ => numerator / (omega * lp1 * lp1),
        };
        Ok(Self {
            disc,
            omega,
            big_m,
            critical_k: numerator / (two * lp1 * lp1),
            steady: lindley_steady(lambda, mu),
            decay: lambda + mu / two,
            branch,
        })
    }

    /// `(cosh(ωt/2) - M sinh(ωt/2))·e^{-decay·t}` or its analytic continuation.
    fn transient_factor(&self, t: T) -> T {
        let half = T::lit(0.5);
        match self.branch {
            Branch::Hyperbolic => {
                // Expanded so that neither exponential overflows: ω < μ keeps
                // both exponents negative.
                let slow = ((half * self.omega - self.decay) * t).exp();
                let fast = ((-half * self.omega - self.decay) * t).exp();
                half * ((T::one() - self.big_m) * slow + (T::one() + self.big_m) * fast)
            }
            Branch::Trigonometric => {
                let phase = half * self.omega * t;
                (phase.cos() - self.big_m * phase.sin()) * (-self.decay * t).exp()
            }
            Branch::Critical => (T::one() - self.critical_k * t) * (-self.decay * t).exp(),
        }
    }
}

fn lindley_steady<T: Scalar>(lambda: T, mu: T) -> T {
    let two = T::lit(2.0);
    mu * (lambda + two) / (lambda * (lambda + T::one()) + mu * (lambda + two))
}

/// Closed-form availability of a repairable Lindley component.
pub fn availability_closed<T: Scalar>(lambda: T, mu: T, t: T) -> Result<T> {
    check_lambda(lambda)?;
    check_mu(mu)?;
    check_time(t)?;
    if t == T::zero() {
        return Ok(T::one());
    }
    if mu == T::zero() {
        return reliability_lindley(lambda, t);
    }
    let terms = ClosedFormTerms::new(lambda, mu)?;
    let value = terms.steady + (T::one() - terms.steady) * terms.transient_factor(t);
    Ok(value.max(T::zero()).min(T::one()))
}

/// Availability `1 - P_F(t)` from the transient solution of the 4-state chain.
pub fn availability_numeric<T: Scalar>(lambda: T, mu: T, t: T) -> Result<T> {
    let (q, p0) = lindley_generator(lambda, mu)?;
    let p = transient_distribution(&q, &p0, t)?;
    Ok(T::one() - p.probs()[FAILED_STATE])
}

/// Long-run availability: `μ(λ+2)/(λ(λ+1)+μ(λ+2))` for Lindley,
/// `μ/(λ+μ)` for exponential. Zero when `μ = 0`.
pub fn steady_state_availability<T: Scalar>(p: &ComponentParams<T>) -> Result<T> {
    check_lambda(p.lambda)?;
    check_mu(p.mu)?;
    Ok(match p.law {
        Law::Lindley => lindley_steady(p.lambda, p.mu),
        Law::Exponential => p.mu / (p.lambda + p.mu),
    })
}

/// `μ/(λ+μ) + λ/(λ+μ)·e^{-(λ+μ)t}`.
pub fn availability_exponential_closed<T: Scalar>(lambda: T, mu: T, t: T) -> Result<T> {
    check_lambda(lambda)?;
    check_mu(mu)?;
    check_time(t)?;
    if t == T::zero() {
        return Ok(T::one());
    }
    let total = lambda + mu;
    Ok(mu / total + lambda / total * (-total * t).exp())
}

/// Lindley reliability `(1 + λ + λt)/(λ+1)·e^{-λt}`.
pub fn reliability_lindley<T: Scalar>(lambda: T, t: T) -> Result<T> {
    check_lambda(lambda)?;
    check_time(t)?;
    let one = T::one();
    Ok((one + lambda + lambda * t) / (lambda + one) * (-lambda * t).exp())
}

/// Mean time to failure `(λ+2)/(λ(λ+1))`.
pub fn mttf_lindley<T: Scalar>(lambda: T) -> Result<T> {
    check_lambda(lambda)?;
    Ok((lambda + T::lit(2.0)) / (lambda * (lambda + T::one())))
}

/// Mean time to repair `1/μ`; a non-repairable component (`μ = 0`) is an error.
pub fn mttr<T: Scalar>(mu: T) -> Result<T> {
    if mu > T::zero() && mu.is_finite() {
        Ok(mu.recip())
    } else {
        Err(AvailabilityError::NonPositiveRate {
            name: "mu",
            value: mu.as_f64(),
        })
    }
}

/// `∂A∞/∂λ = -μ(λ²+4λ+2)/[λ(λ+1)+μ(λ+2)]²` for the Lindley law.
pub fn steady_state_dlambda<T: Scalar>(lambda: T, mu: T) -> Result<T> {
    check_lambda(lambda)?;
    if !(mu > T::zero() && mu.is_finite()) {
        return Err(AvailabilityError::NonPositiveRate {
            name: "mu",
            value: mu.as_f64(),
        });
    }
    let two = T::lit(2.0);
    let denom = lambda * (lambda + T::one()) + mu * (lambda + two);
    Ok(-mu * (lambda * lambda + T::lit(4.0) * lambda + two) / (denom * denom))
}

/// `∂A∞/∂μ = λ(λ+1)(λ+2)/[λ(λ+1)+μ(λ+2)]²` for the Lindley law.
pub fn steady_state_dmu<T: Scalar>(lambda: T, mu: T) -> Result<T> {
    check_lambda(lambda)?;
    check_mu(mu)?;
    let two = T::lit(2.0);
    let denom = lambda * (lambda + T::one()) + mu * (lambda + two);
    Ok(lambda * (lambda + T::one()) * (lambda + two) / (denom * denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn generator_without_repair_has_absorbing_failure() {
        let (q, _) = lindley_generator(1.0, 0.0).unwrap();
        assert_eq!(q.rates().row(3), &[0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn generator_repair_row() {
        let (q, p0) = lindley_generator(0.004, 0.03).unwrap();
        let row = q.rates().row(3);
        assert!(close(row[0], 0.03 * 0.004 / 1.004, 1e-18));
        assert!(close(row[1], 0.03 / 1.004, 1e-16));
        assert_eq!(row[2], 0.0);
        assert_eq!(row[3], -0.03);
        assert!(close(row[0], 0.03 * 0.003_984, 1e-8));
        assert!(close(row[1], 0.03 * 0.996_016, 1e-8));
        assert_eq!(p0.probs()[2..], [0.0, 0.0]);
    }

    #[test]
    fn generator_rejects_bad_rates() {
        assert!(matches!(
            lindley_generator(0.0, 1.0).unwrap_err(),
            AvailabilityError::NonPositiveRate { name: "lambda", .. }
        ));
        assert!(lindley_generator(1.0, -0.1).is_err());
    }

    #[test]
    fn availability_is_one_at_zero() {
        for (l, m) in [(0.004, 0.03), (1.0, 1.0), (1.0, 2.0), (3.0, 0.0)] {
            assert_eq!(availability_closed(l, m, 0.0).unwrap(), 1.0);
            assert_eq!(availability_numeric(l, m, 0.0).unwrap(), 1.0);
            assert_eq!(availability_exponential_closed(l, m, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn branch_selection() {
        assert_eq!(ClosedFormTerms::new(0.004, 0.03).unwrap().branch, Branch::Hyperbolic);
        assert_eq!(ClosedFormTerms::new(1.0, 1.0).unwrap().branch, Branch::Trigonometric);
        assert_eq!(ClosedFormTerms::new(1.0, 2.0).unwrap().branch, Branch::Critical);
    }

    #[test]
    fn trigonometric_branch_matches_chain() {
        for &t in &[0.5, 1.0, 2.0, 5.0] {
            let closed = availability_closed(1.0, 1.0, t).unwrap();
            let numeric = availability_numeric(1.0, 1.0, t).unwrap();
            assert!(close(closed, numeric, 1e-8), "t={t}: {closed} vs {numeric}");
        }
    }

    #[test]
    fn steady_state_table_values() {
        let g = ComponentParams::lindley(0.004, 0.03).unwrap();
        let ice = ComponentParams::lindley(0.002, 0.08).unwrap();
        assert!(close(g.steady_state().unwrap(), 0.9374, 5e-5));
        assert!(close(ice.steady_state().unwrap(), 0.9876, 5e-5));
        let g_exp = g.with_law(Law::Exponential);
        let ice_exp = ice.with_law(Law::Exponential);
        assert!(close(g_exp.steady_state().unwrap(), 0.8824, 5e-5));
        assert!(close(ice_exp.steady_state().unwrap(), 0.9756, 5e-5));
    }

    #[test]
    fn steady_state_limits() {
        let dead = ComponentParams::lindley(0.5, 0.0).unwrap();
        assert_eq!(dead.steady_state().unwrap(), 0.0);
        let dead = ComponentParams::exponential(0.5, 0.0).unwrap();
        assert_eq!(dead.steady_state().unwrap(), 0.0);
        let tiny = ComponentParams::lindley(1e-12, 0.03).unwrap();
        assert!(close(tiny.steady_state().unwrap(), 1.0, 1e-9));
    }

    #[test]
    fn long_horizon_reaches_steady_state() {
        assert!(close(availability_closed(0.004, 0.03, 1e4).unwrap(), 0.9374, 1e-4));
        assert!(close(availability_exponential_closed(0.004, 0.03, 1e4).unwrap(), 0.8824, 1e-4));
        // large t must not overflow
        let far = availability_closed(2.0f64, 50.0, 1e6).unwrap();
        assert!(far.is_finite());
    }

    #[test]
    fn exponential_without_repair_decays() {
        let v = availability_exponential_closed(0.2, 0.0, 3.0).unwrap();
        assert!(close(v, (-0.6f64).exp(), 1e-15));
    }

    #[test]
    fn reliability_hand_values() {
        assert_eq!(reliability_lindley(0.3, 0.0).unwrap(), 1.0);
        assert!(close(reliability_lindley(1.0, 1.0).unwrap(), 0.551_819_161_757_164_2, 1e-15));
        assert!(close(availability_numeric(1.0, 0.0, 1.0).unwrap(), 0.551_819, 1e-6));
    }

    #[test]
    fn mttf_and_mttr() {
        assert!(close(mttf_lindley(0.004).unwrap(), 499.004, 1e-4));
        assert_eq!(mttf_lindley(1.0).unwrap(), 1.5);
        assert!(close(mttr(0.03).unwrap(), 33.333_333_333_333, 1e-10));
        assert_eq!(mttr(0.08).unwrap(), 12.5);
        assert!(mttr(0.0).is_err());
        let (f, r) = (mttf_lindley(0.004f64).unwrap(), mttr(0.03).unwrap());
        assert!(close(f / (f + r), 0.9374, 5e-5));
    }

    #[test]
    fn derivative_nominal_values() {
        assert!(close(steady_state_dlambda(0.004, 0.03).unwrap(), -14.7, 0.05));
        assert!(close(steady_state_dlambda(0.002, 0.08).unwrap(), -6.11, 0.005));
        assert!(close(steady_state_dmu(0.004, 0.03).unwrap(), 1.96, 0.005));
        assert!(close(steady_state_dmu(0.002, 0.08).unwrap(), 0.15, 0.005));
        assert!(steady_state_dlambda(0.004, 0.0).is_err());
    }

    #[test]
    fn single_precision_closed_form() {
        let a32 = availability_closed(0.004f32, 0.03, 250.0).unwrap();
        let a64 = availability_closed(0.004f64, 0.03, 250.0).unwrap();
        assert!((a32 as f64 - a64).abs() < 1e-5);
    }
}
