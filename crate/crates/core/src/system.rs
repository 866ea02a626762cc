//! Series and parallel systems of independent components, each with its own
//! repair crew.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::availability::{component_chain, AvailabilityError, ComponentParams};
use crate::ctmc::{GeneratorMatrix, StateDistribution};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("system has no components")]
    EmptySystem,
    #[error("a single-component system needs exactly one component, got {0}")]
    SingleArity(usize),
    #[error("{name} must be positive for steady-state analysis, got {value} (component {index})")]
    NonPositiveRate {
        index: usize,
        name: &'static str,
        value: f64,
    },
    #[error("product space supports at most {max} components, got {got}")]
    TooManyComponents { max: usize, got: usize },
    #[error("time grid must be non-negative and increasing (index {0})")]
    InvalidGrid(usize),
    #[error(transparent)]
    Component(#[from] AvailabilityError),
}

type Result<T> = std::result::Result<T, SystemError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    Single,
    Series,
    Parallel,
}

impl Structure {
    pub fn name(self) -> &'static str {
        match self {
            Structure::Single => "single",
            Structure::Series => "series",
            Structure::Parallel => "parallel",
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Structure {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "single" => Ok(Structure::Single),
            "series" => Ok(Structure::Series),
            "parallel" => Ok(Structure::Parallel),
            other => Err(format!("unknown structure `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component<T> {
    pub label: String,
    pub params: ComponentParams<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel<T> {
    pub name: String,
    pub structure: Structure,
    pub components: Vec<Component<T>>,
}

impl<T: Scalar> SystemModel<T> {
    pub fn new(
        name: impl Into<String>,
        structure: Structure,
        components: Vec<Component<T>>,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(SystemError::EmptySystem);
        }
        if structure == Structure::Single && components.len() != 1 {
            return Err(SystemError::SingleArity(components.len()));
        }
        for c in &components {
            ComponentParams::new(c.params.lambda, c.params.mu, c.params.law)?;
        }
        Ok(Self {
            name: name.into(),
            structure,
            components,
        })
    }

    pub fn params(&self) -> Vec<ComponentParams<T>> {
        self.components.iter().map(|c| c.params).collect()
    }

    /// Long-run system availability from the per-component formulas.
    pub fn steady_state(&self) -> Result<T> {
        let params = self.params();
        match self.structure {
            Structure::Single | Structure::Series => steady_state_series(&params),
            Structure::Parallel => steady_state_parallel(&params),
        }
    }

    /// Combines per-component availabilities at one instant.
    pub fn combine(&self, values: &[T]) -> T {
        combine(self.structure, values)
    }
}

fn combine<T: Scalar>(structure: Structure, values: &[T]) -> T {
    match structure {
        Structure::Single | Structure::Series => values.iter().fold(T::one(), |acc, &a| acc * a),
        Structure::Parallel => {
            T::one() - values.iter().fold(T::one(), |acc, &a| acc * (T::one() - a))
        }
    }
}

fn steady_values<T: Scalar>(components: &[ComponentParams<T>]) -> Result<Vec<T>> {
    if components.is_empty() {
        return Err(SystemError::EmptySystem);
    }
    components
        .iter()
        .enumerate()
        .map(|(index, p)| {
            if !(p.mu > T::zero()) {
                return Err(SystemError::NonPositiveRate {
                    index,
                    name: "mu",
                    value: p.mu.as_f64(),
                });
            }
            Ok(p.steady_state()?)
        })
        .collect()
}

/// `Π A∞⁽ⁱ⁾`, each factor by its component's law.
pub fn steady_state_series<T: Scalar>(components: &[ComponentParams<T>]) -> Result<T> {
    Ok(combine(Structure::Series, &steady_values(components)?))
}

/// `1 - Π (1 - A∞⁽ⁱ⁾)`.
pub fn steady_state_parallel<T: Scalar>(components: &[ComponentParams<T>]) -> Result<T> {
    Ok(combine(Structure::Parallel, &steady_values(components)?))
}

/// How a curve's values were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    NumericTransient,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityCurve<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub provenance: Provenance,
}

fn check_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    for (i, &t) in grid.iter().enumerate() {
        let ordered = i == 0 || t > grid[i - 1];
        if !(t >= T::zero() && t.is_finite() && ordered) {
            return Err(SystemError::InvalidGrid(i));
        }
    }
    Ok(())
}

/// Per-component closed-form curve on `grid`.
pub fn component_availability_curve<T: Scalar>(
    params: &ComponentParams<T>,
    grid: &[T],
) -> Result<AvailabilityCurve<T>> {
    check_grid(grid)?;
    let values = grid
        .iter()
        .map(|&t| params.availability(t))
        .collect::<std::result::Result<_, _>>()?;
    Ok(AvailabilityCurve {
        times: grid.to_vec(),
        values,
        provenance: Provenance::ClosedForm,
    })
}

/// System availability over time assuming independent components.
pub fn system_availability_curve<T: Scalar>(
    model: &SystemModel<T>,
    grid: &[T],
) -> Result<AvailabilityCurve<T>> {
    check_grid(grid)?;
    let per_component = model
        .components
        .iter()
        .map(|c| component_availability_curve(&c.params, grid))
        .collect::<Result<Vec<_>>>()?;
    let values = (0..grid.len())
        .map(|k| {
            let at: Vec<T> = per_component.iter().map(|c| c.values[k]).collect();
            model.combine(&at)
        })
        .collect();
    Ok(AvailabilityCurve {
        times: grid.to_vec(),
        values,
        provenance: Provenance::ClosedForm,
    })
}

/// Up/down partition of a product-space chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateClassification {
    pub up: Vec<usize>,
    pub down: Vec<usize>,
}

/// Largest component count for the dense product-space chain.
pub const MAX_PRODUCT_COMPONENTS: usize = 4;

/// Joint chain of independent components: the Kronecker sum of the
/// per-component chains, states ordered lexicographically with the first
/// component most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpace<T> {
    pub generator: GeneratorMatrix<T>,
    pub initial: StateDistribution<T>,
    /// Local state count of each component (4 for Lindley, 2 for exponential).
    pub sizes: Vec<usize>,
}

pub fn product_space_generator<T: Scalar>(components: &[ComponentParams<T>]) -> Result<ProductSpace<T>> {
    if components.is_empty() {
        return Err(SystemError::EmptySystem);
    }
    if components.len() > MAX_PRODUCT_COMPONENTS {
        return Err(SystemError::TooManyComponents {
            max: MAX_PRODUCT_COMPONENTS,
            got: components.len(),
        });
    }
    let mut chains = components.iter().map(component_chain);
    let (mut generator, mut initial) = chains.next().expect("non-empty")?;
    for chain in chains {
        let (q, p0) = chain?;
        generator = generator.kron_sum(&q);
        initial = initial.kron(&p0);
    }
    let sizes = components
        .iter()
        .map(|p| component_chain(p).map(|(q, _)| q.order()))
        .collect::<std::result::Result<_, _>>()?;
    Ok(ProductSpace {
        generator,
        initial,
        sizes,
    })
}

impl<T: Scalar> ProductSpace<T> {
    pub fn order(&self) -> usize {
        self.generator.order()
    }

    /// Local state of each component in joint state `state`.
    pub fn decode(&self, state: usize) -> Vec<usize> {
        let mut rest = state;
        let mut out = vec![0; self.sizes.len()];
        for (slot, &size) in out.iter_mut().zip(&self.sizes).rev() {
            *slot = rest % size;
            rest /= size;
        }
        out
    }

    /// Number of failed components in joint state `state`.
    pub fn failures(&self, state: usize) -> usize {
        self.decode(state)
            .iter()
            .zip(&self.sizes)
            .filter(|(&local, &size)| local == size - 1)
            .count()
    }

    /// Series: up iff nothing has failed. Parallel: down iff everything has.
    pub fn classify(&self, structure: Structure) -> StateClassification {
        let n = self.sizes.len();
        let (up, down) = (0..self.order()).partition(|&s| {
            let failed = self.failures(s);
            match structure {
                Structure::Single | Structure::Series => failed == 0,
                Structure::Parallel => failed < n,
            }
        });
        StateClassification { up, down }
    }

    /// Marginal distribution of component `index` under joint distribution `p`.
    pub fn marginal(&self, p: &StateDistribution<T>, index: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.sizes[index]];
        for (state, &mass) in p.probs().iter().enumerate() {
            let local = self.decode(state)[index];
            out[local] = out[local] + mass;
        }
        out
    }
}
