//! Monte Carlo availability estimates by alternating-renewal simulation.
//!
//! Each component alternates phase-type up times and exponential repairs,
//! independently of the others. Replication `r`, component `c` draws from
//! ChaCha stream `r · STREAM_STRIDE + c` of the plan's root seed, so adding
//! replications never changes earlier ones.

use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use thiserror::Error;

use crate::availability::Law;
use crate::phase_type::PhaseType;
use crate::system::{Structure, SystemModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation plan: {0}")]
    InvalidPlan(String),
}

const STREAM_STRIDE: u64 = 1 << 16;

/// Default burn-in as a fraction of the horizon.
pub const DEFAULT_BURN_IN_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub model: SystemModel<f64>,
    /// Simulated time span in days.
    pub horizon: f64,
    pub replications: usize,
    pub seed: u64,
    /// Increasing times in `[0, horizon]` for pointwise estimates.
    pub checkpoints: Vec<f64>,
    /// Discarded prefix for the long-run average; `None` uses 20% of the horizon.
    pub burn_in: Option<f64>,
}

impl SimulationPlan {
    pub fn new(model: SystemModel<f64>, horizon: f64, replications: usize, seed: u64) -> Self {
        Self {
            model,
            horizon,
            replications,
            seed,
            checkpoints: Vec::new(),
            burn_in: None,
        }
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<f64>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    pub fn with_burn_in(mut self, burn_in: f64) -> Self {
        self.burn_in = Some(burn_in);
        self
    }

    fn burn_in(&self) -> f64 {
        self.burn_in
            .unwrap_or(DEFAULT_BURN_IN_FRACTION * self.horizon)
    }

    fn validate(&self) -> Result<(), SimError> {
        let invalid = |msg: String| Err(SimError::InvalidPlan(msg));
        if self.replications == 0 {
            return invalid("replications must be at least 1".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return invalid(format!("horizon must be positive, got {}", self.horizon));
        }
        let burn = self.burn_in();
        if !(burn >= 0.0 && burn < self.horizon) {
            return invalid(format!("burn-in {burn} must lie in [0, horizon)"));
        }
        for (i, &t) in self.checkpoints.iter().enumerate() {
            if !(0.0..=self.horizon).contains(&t) {
                return invalid(format!("checkpoint {t} outside [0, {}]", self.horizon));
            }
            if i > 0 && t <= self.checkpoints[i - 1] {
                return invalid("checkpoints must be increasing".into());
            }
        }
        if self.model.components.len() as u64 >= STREAM_STRIDE {
            return invalid("too many components".into());
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        if xs.len() < 2 {
            return Self { mean, std_error: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            mean,
            std_error: (var / n).sqrt(),
        }
    }

    /// `|mean - target| ≤ k · SE`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityEstimate {
    /// `(checkpoint, fraction of replications up)`.
    pub pointwise: Vec<(f64, Estimate)>,
    /// Time-average up fraction over `[burn_in, horizon]`, across replications.
    pub long_run: Estimate,
    /// Same average for each component on its own, in model order.
    pub components: Vec<Estimate>,
    pub burn_in: f64,
}

struct Sampler {
    failure: PhaseType<f64>,
    repair_rate: f64,
}

impl Sampler {
    /// Down intervals `[start, end)` of one component on `[0, horizon]`.
    fn down_intervals(&self, rng: &mut ChaCha8Rng, horizon: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut now = 0.0;
        loop {
            now += self.failure.sample(rng);
            if now >= horizon {
                return out;
            }
            if self.repair_rate <= 0.0 {
                out.push((now, horizon));
                return out;
            }
            let repair: f64 = Exp1.sample(rng);
            let end = now + repair / self.repair_rate;
            out.push((now, end.min(horizon)));
            if end >= horizon {
                return out;
            }
            now = end;
        }
    }
}

fn is_down(intervals: &[(f64, f64)], t: f64) -> bool {
    let idx = intervals.partition_point(|&(start, _)| start <= t);
    idx > 0 && t < intervals[idx - 1].1
}

struct Replication {
    up_at_checkpoints: Vec<bool>,
    long_run_fraction: f64,
    component_fractions: Vec<f64>,
}

fn down_time_within(intervals: &[(f64, f64)], from: f64, to: f64) -> f64 {
    intervals
        .iter()
        .map(|&(start, end)| (end.min(to) - start.max(from)).max(0.0))
        .sum()
}

fn run_replication(plan: &SimulationPlan, samplers: &[Sampler], index: u64, burn_in: f64) -> Replication {
    let n = samplers.len();
    let downs: Vec<Vec<(f64, f64)>> = samplers
        .iter()
        .enumerate()
        .map(|(c, sampler)| {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            rng.set_stream(index * STREAM_STRIDE + c as u64);
            sampler.down_intervals(&mut rng, plan.horizon)
        })
        .collect();

    let system_up = |failed: usize| match plan.model.structure {
        Structure::Single | Structure::Series => failed == 0,
        Structure::Parallel => failed < n,
    };

    let up_at_checkpoints = plan
        .checkpoints
        .iter()
        .map(|&t| system_up(downs.iter().filter(|d| is_down(d, t)).count()))
        .collect();

    // Sweep the merged down/up transitions over [burn_in, horizon].
    let mut events: Vec<(f64, i32)> = downs
        .iter()
        .flatten()
        .flat_map(|&(start, end)| [(start, 1), (end, -1)])
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut failed = 0i32;
    let mut cursor = burn_in;
    let mut up_time = 0.0;
    for (time, delta) in events {
        let clipped = time.clamp(burn_in, plan.horizon);
        if clipped > cursor && system_up(failed as usize) {
            up_time += clipped - cursor;
        }
        cursor = cursor.max(clipped);
        failed += delta;
    }
    if plan.horizon > cursor && system_up(failed as usize) {
        up_time += plan.horizon - cursor;
    }
    let window = plan.horizon - burn_in;
    let component_fractions = downs
        .iter()
        .map(|d| 1.0 - down_time_within(d, burn_in, plan.horizon) / window)
        .collect();
    Replication {
        up_at_checkpoints,
        long_run_fraction: up_time / window,
        component_fractions,
    }
}

/// Runs the plan. Replications execute in parallel and are merged by index,
/// so the result depends only on the plan.
pub fn simulate(plan: &SimulationPlan) -> Result<AvailabilityEstimate, SimError> {
    plan.validate()?;
    let burn_in = plan.burn_in();
    let samplers = plan
        .model
        .components
        .iter()
        .map(|c| {
            let failure = match c.params.law {
                Law::Lindley => PhaseType::lindley(c.params.lambda),
                Law::Exponential => PhaseType::exponential(c.params.lambda),
            }
            .map_err(|e| SimError::InvalidPlan(format!("component {}: {e}", c.label)))?;
            Ok(Sampler {
                failure,
                repair_rate: c.params.mu,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;

    let reps: Vec<Replication> = (0..plan.replications as u64)
        .into_par_iter()
        .map(|r| run_replication(plan, &samplers, r, burn_in))
        .collect();

    let pointwise = plan
        .checkpoints
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let xs: Vec<f64> = reps
                .iter()
                .map(|r| if r.up_at_checkpoints[k] { 1.0 } else { 0.0 })
                .collect();
            (t, Estimate::from_samples(&xs))
        })
        .collect();
    let fractions: Vec<f64> = reps.iter().map(|r| r.long_run_fraction).collect();
    let components = (0..samplers.len())
        .map(|c| {
            let xs: Vec<f64> = reps.iter().map(|r| r.component_fractions[c]).collect();
            Estimate::from_samples(&xs)
        })
        .collect();
    Ok(AvailabilityEstimate {
        pointwise,
        long_run: Estimate::from_samples(&fractions),
        components,
        burn_in,
    })
}
