//! Dense CTMC generators, transient distributions by uniformization, and
//! stationary distributions by a normalized LU solve.
//!
//! Distributions are row vectors evolving as `dP/dt = P·Q`.

use thiserror::Error;

use crate::linalg::{DenseMatrix, Lu};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CtmcError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is empty")]
    Empty,
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("negative off-diagonal rate {value} at ({row}, {col})")]
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {residual}, expected 0")]
    RowSumNonzero { row: usize, residual: f64 },
    #[error("row {row} sums to {residual} > 0; not a sub-generator")]
    RowSumPositive { row: usize, residual: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("time must be finite and non-negative, got {0}")]
    NegativeTime(f64),
    #[error("invalid state distribution: {0}")]
    InvalidDistribution(String),
    #[error("stationary system is singular (reducible chain or solver breakdown)")]
    SingularSystem,
}

/// Numerical tolerances used by the CTMC routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    /// Allowed absolute row-sum residual of a generator, per unit of the
    /// row's largest rate (rows with rates below 1 use an absolute bound).
    pub row_sum: T,
    /// Allowed deviation of a distribution's total mass from 1.
    pub distribution_sum: T,
    /// Poisson tail mass dropped by uniformization over the whole horizon.
    pub truncation: T,
    /// Maximum accepted `‖π·Q‖∞` for the stationary solve, scaled like `row_sum`.
    pub stationary_residual: T,
    /// Uniformization rate as a multiple of the largest exit rate.
    pub uniformization_factor: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            row_sum: T::tol(1e-12),
            distribution_sum: T::tol(1e-12),
            truncation: T::tol(1e-14),
            stationary_residual: T::tol(1e-12),
            uniformization_factor: T::lit(1.05),
        }
    }
}

/// Largest Poisson mean handled in a single uniformization pass; longer
/// horizons are split into equal sub-intervals so `e^{-mean}` never underflows.
const MAX_POISSON_MEAN: f64 = 32.0;

/// A validated CTMC generator: non-negative off-diagonals, zero row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix<T> {
    rates: DenseMatrix<T>,
}

impl<T: Scalar> GeneratorMatrix<T> {
    /// Validates `raw` with default tolerances.
    pub fn new(raw: DenseMatrix<T>) -> Result<Self, CtmcError> {
        Self::with_tolerances(raw, &Tolerances::default())
    }

    pub fn with_tolerances(raw: DenseMatrix<T>, tol: &Tolerances<T>) -> Result<Self, CtmcError> {
        check_rates(&raw, tol.row_sum, true)?;
        Ok(Self { rates: raw })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self, CtmcError> {
        let raw = DenseMatrix::from_rows(rows).ok_or(CtmcError::NonSquare {
            rows: rows.len(),
            cols: 0,
        })?;
        Self::new(raw)
    }

    pub fn order(&self) -> usize {
        self.rates.rows()
    }

    pub fn rates(&self) -> &DenseMatrix<T> {
        &self.rates
    }

    pub fn into_rates(self) -> DenseMatrix<T> {
        self.rates
    }

    /// Kronecker sum: the generator of two independent chains run jointly,
    /// with `self` as the slow (most significant) index.
    pub fn kron_sum(&self, other: &Self) -> Self {
        Self {
            rates: self.rates.kron_sum(&other.rates),
        }
    }

    /// Largest exit rate `max |Q_ii|`.
    pub fn max_exit_rate(&self) -> T {
        (0..self.order()).fold(T::zero(), |acc, i| acc.max(self.rates[(i, i)].abs()))
    }
}

/// Shared structural check for generators (`exact = true`) and
/// sub-generators (`exact = false`, row sums may be negative).
fn check_rates<T: Scalar>(m: &DenseMatrix<T>, row_tol: T, exact: bool) -> Result<(), CtmcError> {
    if !m.is_square() {
        return Err(CtmcError::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.rows() == 0 {
        return Err(CtmcError::Empty);
    }
    let n = m.rows();
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(CtmcError::NonFinite { row: i, col: j });
            }
            if i != j && v < T::zero() {
                return Err(CtmcError::NegativeOffDiagonal {
                    row: i,
                    col: j,
                    value: v.as_f64(),
                });
            }
        }
        let scale = m.row(i).iter().fold(T::one(), |acc, x| acc.max(x.abs()));
        let residual = m.row_sum(i);
        if exact && residual.abs() > row_tol * scale {
            return Err(CtmcError::RowSumNonzero {
                row: i,
                residual: residual.as_f64(),
            });
        }
        if !exact && residual > row_tol * scale {
            return Err(CtmcError::RowSumPositive {
                row: i,
                residual: residual.as_f64(),
            });
        }
    }
    Ok(())
}

/// A probability vector over CTMC states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDistribution<T> {
    probs: Vec<T>,
}

impl<T: Scalar> StateDistribution<T> {
    pub fn new(probs: Vec<T>) -> Result<Self, CtmcError> {
        Self::with_tolerance(probs, T::tol(1e-12))
    }

    pub fn with_tolerance(probs: Vec<T>, sum_tol: T) -> Result<Self, CtmcError> {
        if probs.is_empty() {
            return Err(CtmcError::InvalidDistribution("empty vector".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, &p)| !(p >= T::zero() && p <= T::one()))
        {
            return Err(CtmcError::InvalidDistribution(format!(
                "entry {i} = {p} outside [0, 1]"
            )));
        }
        let total = probs.iter().fold(T::zero(), |acc, &p| acc + p);
        if (total - T::one()).abs() > sum_tol {
            return Err(CtmcError::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(Self { probs })
    }

    /// All mass on `state`.
    pub fn point_mass(n: usize, state: usize) -> Self {
        assert!(state < n, "point mass outside state space");
        let mut probs = vec![T::zero(); n];
        probs[state] = T::one();
        Self { probs }
    }

    /// Product-form joint distribution of two independent chains, ordered to
    /// match [`GeneratorMatrix::kron_sum`].
    pub fn kron(&self, other: &Self) -> Self {
        let probs = self
            .probs
            .iter()
            .flat_map(|&a| other.probs.iter().map(move |&b| a * b))
            .collect();
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<T> {
        self.probs
    }

    /// Total probability of the listed states.
    pub fn mass_of(&self, states: &[usize]) -> T {
        states.iter().fold(T::zero(), |acc, &i| acc + self.probs[i])
    }

    /// Rounding-level cleanup of solver output: clamps into `[0, 1]`.
    fn from_solver(probs: Vec<T>) -> Self {
        let probs = probs
            .into_iter()
            .map(|p| p.max(T::zero()).min(T::one()))
            .collect();
        Self { probs }
    }
}

fn check_time<T: Scalar>(t: T) -> Result<(), CtmcError> {
    if t.is_finite() && t >= T::zero() {
        Ok(())
    } else {
        Err(CtmcError::NegativeTime(t.as_f64()))
    }
}

/// `P(t) = p0 · exp(Q t)`.
pub fn transient_distribution<T: Scalar>(
    q: &GeneratorMatrix<T>,
    p0: &StateDistribution<T>,
    t: T,
) -> Result<StateDistribution<T>, CtmcError> {
    transient_distribution_with(q, p0, t, &Tolerances::default())
}

pub fn transient_distribution_with<T: Scalar>(
    q: &GeneratorMatrix<T>,
    p0: &StateDistribution<T>,
    t: T,
    tol: &Tolerances<T>,
) -> Result<StateDistribution<T>, CtmcError> {
    if p0.len() != q.order() {
        return Err(CtmcError::DimensionMismatch {
            expected: q.order(),
            found: p0.len(),
        });
    }
    check_time(t)?;
    let probs = uniformize(q.rates(), p0.probs(), t, tol);
    Ok(StateDistribution::from_solver(probs))
}

/// Jensen's uniformization of `v · exp(Q t)` for a generator `Q`.
///
/// The horizon is cut into sub-intervals whose Poisson mean is at most
/// [`MAX_POISSON_MEAN`]; each pass drops at most `truncation / passes` of tail
/// mass and renormalizes by the retained Poisson weight.
fn uniformize<T: Scalar>(q: &DenseMatrix<T>, v: &[T], t: T, tol: &Tolerances<T>) -> Vec<T> {
    let n = q.rows();
    let max_exit = (0..n).fold(T::zero(), |acc, i| acc.max(q[(i, i)].abs()));
    if t == T::zero() || max_exit == T::zero() || n == 1 {
        return v.to_vec();
    }
    let rate = tol.uniformization_factor * max_exit;
    let mut jump = q.clone();
    for i in 0..n {
        for j in 0..n {
            jump[(i, j)] = q[(i, j)] / rate;
        }
        jump[(i, i)] = jump[(i, i)] + T::one();
    }
    let total_mean = rate * t;
    let passes = (total_mean / T::lit(MAX_POISSON_MEAN)).ceil().max(T::one());
    let mean = total_mean / passes;
    let pass_tol = (tol.truncation / passes).max(T::min_positive_value());
    let passes = passes.to_usize().expect("finite pass count");

    let mut x = v.to_vec();
    for _ in 0..passes {
        x = poisson_pass(&jump, &x, mean, pass_tol);
    }
    x
}

fn poisson_pass<T: Scalar>(jump: &DenseMatrix<T>, v: &[T], mean: T, tail_tol: T) -> Vec<T> {
    let mut weight = (-mean).exp();
    let mut retained = weight;
    let mut term = v.to_vec();
    let mut acc: Vec<T> = term.iter().map(|&x| x * weight).collect();
    let mut k = 0usize;
    loop {
        k += 1;
        let kf = T::lit(k as f64);
        // Once past the mode the tail after k is bounded by a geometric series.
        if kf > mean + T::one() {
            let ratio = mean / (kf + T::one());
            let tail = weight * mean / kf / (T::one() - ratio);
            if tail <= tail_tol {
                break;
            }
        }
        weight = weight * mean / kf;
        term = jump.left_mul(&term);
        for (a, &x) in acc.iter_mut().zip(&term) {
            *a = *a + weight * x;
        }
        retained = retained + weight;
    }
    acc.into_iter().map(|a| a / retained).collect()
}

/// `v · exp(A t)` for a sub-generator `A` (non-negative off-diagonals,
/// non-positive row sums), e.g. the transient block of a phase-type law.
///
/// `A` is embedded into a generator by appending one absorbing state that
/// collects the exit rates; the appended coordinate is dropped afterwards.
pub fn expm_action<T: Scalar>(a: &DenseMatrix<T>, v: &[T], t: T) -> Result<Vec<T>, CtmcError> {
    let tol = Tolerances::default();
    check_rates(a, tol.row_sum, false)?;
    let n = a.rows();
    if v.len() != n {
        return Err(CtmcError::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    check_time(t)?;
    let mut embedded = DenseMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            embedded[(i, j)] = a[(i, j)];
        }
        embedded[(i, n)] = (-a.row_sum(i)).max(T::zero());
    }
    let mut extended = v.to_vec();
    extended.push(T::zero());
    let mut out = uniformize(&embedded, &extended, t, &tol);
    out.pop();
    Ok(out)
}

/// Stationary distribution `π` with `π·Q = 0`, `Σπ = 1`.
pub fn stationary_distribution<T: Scalar>(
    q: &GeneratorMatrix<T>,
) -> Result<StateDistribution<T>, CtmcError> {
    stationary_distribution_with(q, &Tolerances::default())
}

pub fn stationary_distribution_with<T: Scalar>(
    q: &GeneratorMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<StateDistribution<T>, CtmcError> {
    let n = q.order();
    if n == 1 {
        return Ok(StateDistribution::point_mass(1, 0));
    }
    // Qᵀ πᵀ = 0 with the last balance equation replaced by Σπ = 1.
    let mut system = q.rates().transpose();
    for j in 0..n {
        system[(n - 1, j)] = T::one();
    }
    let mut rhs = vec![T::zero(); n];
    rhs[n - 1] = T::one();
    let lu = Lu::factor(&system).map_err(|_| CtmcError::SingularSystem)?;
    let pi = lu.solve(&rhs);

    let scale = q.rates().max_abs().max(T::one());
    if pi.iter().any(|&p| !p.is_finite() || p < -tol.stationary_residual) {
        return Err(CtmcError::SingularSystem);
    }
    let residual = q
        .rates()
        .left_mul(&pi)
        .into_iter()
        .fold(T::zero(), |acc, r| acc.max(r.abs()));
    if residual > tol.stationary_residual * scale {
        return Err(CtmcError::SingularSystem);
    }
    Ok(StateDistribution::from_solver(pi))
}
