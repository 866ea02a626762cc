//! Continuous phase-type distributions `PH(α, A)`: the time to absorption of
//! a CTMC started in transient phase `i` with probability `α_i`.

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::Exp1;
use thiserror::Error;

use crate::ctmc::{expm_action, CtmcError};
use crate::linalg::{DenseMatrix, Lu};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseTypeError {
    #[error("rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("time must be finite and non-negative, got {0}")]
    NegativeTime(f64),
    #[error("initial vector of length {alpha} does not match matrix order {order}")]
    DimensionMismatch { alpha: usize, order: usize },
    #[error("invalid initial vector: {0}")]
    InvalidInitial(String),
    #[error("invalid transient matrix: {0}")]
    InvalidMatrix(String),
    #[error("transient matrix is singular (some phase never absorbs)")]
    SingularMatrix,
    #[error(transparent)]
    Ctmc(#[from] CtmcError),
}

/// `PH(α, A)` with `α` summing to one over the transient phases.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseType<T> {
    alpha: Vec<T>,
    matrix: DenseMatrix<T>,
    exit: Vec<T>,
}

impl<T: Scalar> PhaseType<T> {
    pub fn new(alpha: Vec<T>, matrix: DenseMatrix<T>) -> Result<Self, PhaseTypeError> {
        let order = matrix.rows();
        if !matrix.is_square() || order == 0 {
            return Err(PhaseTypeError::InvalidMatrix(format!(
                "expected a non-empty square matrix, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if alpha.len() != order {
            return Err(PhaseTypeError::DimensionMismatch {
                alpha: alpha.len(),
                order,
            });
        }
        if alpha.iter().any(|&a| !(a >= T::zero()) || !a.is_finite()) {
            return Err(PhaseTypeError::InvalidInitial("negative entry".into()));
        }
        let total = alpha.iter().fold(T::zero(), |acc, &a| acc + a);
        if (total - T::one()).abs() > T::tol(1e-12) {
            return Err(PhaseTypeError::InvalidInitial(format!(
                "entries sum to {total}; atoms at zero are not supported"
            )));
        }
        let row_tol = T::tol(1e-12);
        for i in 0..order {
            for j in 0..order {
                let v = matrix[(i, j)];
                if !v.is_finite() {
                    return Err(PhaseTypeError::InvalidMatrix(format!("non-finite entry at ({i}, {j})")));
                }
                if i == j && !(v < T::zero()) {
                    return Err(PhaseTypeError::InvalidMatrix(format!("diagonal entry {i} is not negative")));
                }
                if i != j && v < T::zero() {
                    return Err(PhaseTypeError::InvalidMatrix(format!("negative rate at ({i}, {j})")));
                }
            }
            let scale = matrix.row(i).iter().fold(T::one(), |acc, x| acc.max(x.abs()));
            if matrix.row_sum(i) > row_tol * scale {
                return Err(PhaseTypeError::InvalidMatrix(format!("row {i} sums above zero")));
            }
        }
        Lu::factor(&matrix).map_err(|_| PhaseTypeError::SingularMatrix)?;
        let exit = (0..order)
            .map(|i| (-matrix.row_sum(i)).max(T::zero()))
            .collect();
        Ok(Self { alpha, matrix, exit })
    }

    /// Exponential law as an order-1 phase-type distribution.
    pub fn exponential(rate: T) -> Result<Self, PhaseTypeError> {
        check_rate(rate)?;
        let matrix = DenseMatrix::from_rows(&[[-rate]]).expect("1x1");
        Self::new(vec![T::one()], matrix)
    }

    /// Order-3 Lindley representation: an exponential phase chosen with
    /// probability `λ/(λ+1)`, or two exponential phases in sequence (a
    /// gamma(2, λ) path) chosen with probability `1/(λ+1)`. The second gamma
    /// phase is never an entry phase.
    pub fn lindley(lambda: T) -> Result<Self, PhaseTypeError> {
        check_rate(lambda)?;
        let zero = T::zero();
        let matrix = DenseMatrix::from_rows(&[
            [-lambda, zero, zero],
            [zero, -lambda, lambda],
            [zero, zero, -lambda],
        ])
        .expect("3x3");
        let alpha1 = lambda / (lambda + T::one());
        let alpha = vec![alpha1, T::one() - alpha1, zero];
        Self::new(alpha, matrix)
    }

    pub fn order(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    /// Exit rates into the absorbing state, `-A·1`.
    pub fn exit_rates(&self) -> &[T] {
        &self.exit
    }

    /// `P(T > t) = α·exp(A t)·1`.
    pub fn survival(&self, t: T) -> Result<T, PhaseTypeError> {
        check_time(t)?;
        let mass = expm_action(&self.matrix, &self.alpha, t)?;
        let total = mass.into_iter().fold(T::zero(), |acc, x| acc + x);
        Ok(total.max(T::zero()).min(T::one()))
    }

    /// `E[T] = -α·A⁻¹·1`.
    pub fn mean(&self) -> Result<T, PhaseTypeError> {
        // x A = -α  <=>  Aᵀ xᵀ = -αᵀ
        let lu = Lu::factor(&self.matrix.transpose()).map_err(|_| PhaseTypeError::SingularMatrix)?;
        let rhs: Vec<T> = self.alpha.iter().map(|&a| -a).collect();
        let x = lu.solve(&rhs);
        Ok(x.into_iter().fold(T::zero(), |acc, v| acc + v))
    }

    /// Draws one absorption time by walking the phase path: exponential
    /// sojourns with competing transitions, until the absorbing state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T
    where
        Exp1: Distribution<T>,
        Open01: Distribution<T>,
    {
        let mut phase = pick(rng, self.alpha.iter().copied(), T::one(), true)
            .expect("initial vector sums to one");
        let mut elapsed = T::zero();
        loop {
            let out_rate = -self.matrix[(phase, phase)];
            let sojourn: T = Exp1.sample(rng);
            elapsed = elapsed + sojourn / out_rate;
            let row = self.matrix.row(phase);
            let targets = row
                .iter()
                .enumerate()
                .map(|(j, &r)| if j == phase { T::zero() } else { r });
            match pick(rng, targets, out_rate, false) {
                Some(next) => phase = next,
                None => return elapsed,
            }
        }
    }
}

/// Chooses index `i` with probability `weights_i / total`; `None` is the
/// leftover mass (absorption). When `exhaustive`, the weights sum to `total`
/// and rounding shortfall goes to the last positive weight.
fn pick<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    weights: impl Iterator<Item = T>,
    total: T,
    exhaustive: bool,
) -> Option<usize>
where
    Open01: Distribution<T>,
{
    let u: T = Open01.sample(rng);
    let target = u * total;
    let mut cumulative = T::zero();
    let mut last_positive = None;
    for (i, w) in weights.enumerate() {
        if w > T::zero() {
            last_positive = Some(i);
        }
        cumulative = cumulative + w;
        if target < cumulative {
            return Some(i);
        }
    }
    if exhaustive {
        last_positive
    } else {
        None
    }
}

fn check_rate<T: Scalar>(rate: T) -> Result<(), PhaseTypeError> {
    if rate > T::zero() && rate.is_finite() {
        Ok(())
    } else {
        Err(PhaseTypeError::NonPositiveRate(rate.as_f64()))
    }
}

fn check_time<T: Scalar>(t: T) -> Result<(), PhaseTypeError> {
    if t >= T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(PhaseTypeError::NegativeTime(t.as_f64()))
    }
}

/// Lindley survival function `(1 + λt/(λ+1))·e^{-λt}`.
pub fn lindley_survival<T: Scalar>(lambda: T, t: T) -> Result<T, PhaseTypeError> {
    check_rate(lambda)?;
    check_time(t)?;
    Ok((T::one() + lambda * t / (lambda + T::one())) * (-lambda * t).exp())
}
